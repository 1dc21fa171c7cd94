//! The expansion a closed form can check.
//!
//! One branch of the 2x2 family [[0, x], [x, 2]] has energy
//! 1 - sqrt(1 + x^2), so every coefficient, every partial sum, and every
//! corrected state is checkable to machine precision. This is the smallest
//! complete walkthrough of the hierarchy.

use rspt::{partial_sums, rs_series, wavefunction_partial_sum, HamiltonianSplit, SolverSettings};

fn main() -> rspt::Result<()> {
    let split = HamiltonianSplit::toy_two_level();
    let settings = SolverSettings::default();
    let series = rs_series(&split, 0, 6, &settings)?;

    println!("coefficients vs the Taylor series of 1 - sqrt(1 + x^2):");
    let closed: [f64; 7] = [0.0, 0.0, -0.5, 0.0, 0.125, 0.0, -0.0625];
    for (k, want) in closed.iter().enumerate() {
        let have = series.energies[k];
        println!("  E_{k} = {have:+.12e}   closed {want:+.4}   diff {:.1e}", (have - want).abs());
    }

    println!("\npartial sums S_6 at a few couplings:");
    println!("  {:>6}  {:>23}  {:>23}  {:>9}", "lambda", "S_6", "exact", "error");
    for &lambda in &[0.05, 0.1, 0.2, 0.4] {
        let trace = partial_sums(&series, lambda);
        let exact = 1.0 - (1.0 + lambda * lambda).sqrt();
        let s6 = trace.partial_sums[6];
        println!("  {lambda:>6.2}  {s6:>23.16e}  {exact:>23.16e}  {:>9.2e}", (s6 - exact).abs());
    }

    // The corrected state at lambda = 0.2, against the exact unit
    // eigenvector (1, e/lambda) / norm of the assembled matrix.
    let lambda = 0.2_f64;
    let e = 1.0 - (1.0 + lambda * lambda).sqrt();
    let raw = [1.0, e / lambda];
    let nrm = (raw[0] * raw[0] + raw[1] * raw[1]).sqrt();
    let exact = [raw[0] / nrm, raw[1] / nrm];
    let psi = wavefunction_partial_sum(&series, lambda, 6);
    println!("\ncorrected state at lambda = {lambda}:");
    println!("  series sum  ({:+.12}, {:+.12})", psi[0], psi[1]);
    println!("  exact       ({:+.12}, {:+.12})", exact[0], exact[1]);
    Ok(())
}
