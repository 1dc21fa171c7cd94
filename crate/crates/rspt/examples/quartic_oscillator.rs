//! The classic divergent series: x^2 + lambda x^4 in the ladder basis.
//!
//! The reference operator is diagonal (E_n = 2n + 1) and the coupling matrix
//! holds the exact x^4 elements, so the hierarchy reproduces the famous
//! weak-coupling coefficients — which grow factorially. The series is
//! asymptotic: at any fixed coupling it improves only up to an optimal order
//! and then turns around.

use rspt::{
    build_oscillator_split, direct_energy, partial_sums, rs_series, BasisSpec, PotentialSpec,
    SolverSettings,
};

fn main() -> rspt::Result<()> {
    let settings = SolverSettings::default();
    let split = build_oscillator_split(&BasisSpec { n_basis: 64 }, &PotentialSpec::Quartic)?;
    let series = rs_series(&split, 0, 10, &settings)?;

    println!("ground-state coefficients (note the factorial growth and alternating signs):");
    for (k, e) in series.energies.iter().enumerate() {
        println!("  E_{k:<2} = {e:+.10e}");
    }

    let lambda = 0.1;
    let direct = direct_energy(&split, 0, lambda, &settings)?;
    let trace = partial_sums(&series, lambda).against_reference(direct);
    let errors = trace.errors_vs_oracle.as_ref().expect("reference attached");

    println!("\npartial sums at lambda = {lambda} (direct solve gives {direct:.12}):");
    println!("  {:>2}  {:>16}  {:>16}  {:>9}", "K", "term", "S_K", "error");
    for k in 0..trace.terms.len() {
        println!(
            "  {k:>2}  {:>16.6e}  {:>16.12}  {:>9.2e}",
            trace.terms[k], trace.partial_sums[k], errors[k]
        );
    }
    println!(
        "\nsmallest-term rule stops at K = {} -> error {:.2e}",
        trace.k_opt.expect("multiple terms"),
        errors[trace.k_opt.expect("multiple terms")]
    );
    Ok(())
}
