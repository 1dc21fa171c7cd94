//! Checking the series against measurements that never use it.
//!
//! Two independent verdicts on the same coefficients: a finite-difference
//! stencil over direct solves measures the Taylor coefficients of the tracked
//! energy, and log-log fits of the truncation error against the coupling
//! measure the order of each partial sum. Neither computation touches the
//! hierarchy.

use rspt::{
    build_oscillator_split, convergence_slope, direct_curve, fd_coefficients, partial_sums,
    rs_series, BasisSpec, PotentialSpec, SolverSettings,
};

fn main() -> rspt::Result<()> {
    let settings = SolverSettings::default();
    let split = build_oscillator_split(&BasisSpec { n_basis: 64 }, &PotentialSpec::Quartic)?;
    let series = rs_series(&split, 0, 4, &settings)?;

    // Taylor coefficients from symmetric stencils at two spacings, combined
    // by Richardson extrapolation; the disagreement of the two spacings is an
    // empirical error bar. The quartic coefficients grow fast, so the stencil
    // needs a finer step than the 1e-2 default to pass its own agreement
    // check at fourth order.
    let fd = fd_coefficients(&split, 0, 4, 2e-3, 1e-3, &settings)?;
    println!("series coefficients vs derivative measurement (step {}):", fd.step);
    println!("  {:>2}  {:>17}  {:>17}  {:>9}  {:>9}", "k", "series", "stencil", "diff", "est err");
    for k in 1..=4usize {
        println!(
            "  {k:>2}  {:>17.10e}  {:>17.10e}  {:>9.2e}  {:>9.2e}",
            series.energies[k],
            fd.coefficients[k],
            (series.energies[k] - fd.coefficients[k]).abs(),
            fd.error_estimates[k]
        );
    }

    // Truncation-error exponents over a small-coupling grid. Every
    // coefficient of this model is nonzero, so S_K must miss the true energy
    // at order K+1 exactly.
    let grid: [f64; 4] = [0.005, 0.008, 0.0125, 0.02];
    let direct = direct_curve(&split, 0, &grid, &settings)?;
    println!("\ntruncation-error exponents (expect K+1):");
    for k in 1..=3usize {
        let errors: Vec<f64> = grid
            .iter()
            .zip(&direct)
            .map(|(&l, &d)| (partial_sums(&series, l).partial_sums[k] - d).abs())
            .collect();
        let fit = convergence_slope(&grid, &errors)?;
        println!("  S_{k}: slope {:.3} from {} points", fit.slope, fit.points);
    }
    Ok(())
}
