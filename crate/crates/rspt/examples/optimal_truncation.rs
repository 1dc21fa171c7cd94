//! Where to stop summing a divergent series.
//!
//! At lambda = 0.25 the quartic expansion turns around quickly: the terms
//! shrink for a few orders, pass through a minimum, and then grow without
//! bound. The best available accuracy is obtained by truncating at the
//! smallest term — the classic rule for asymptotic series — and the
//! smallest-term index is exactly what `optimal_truncation` reports.

use rspt::{
    build_oscillator_split, direct_energy, partial_sums, rs_series, BasisSpec, PotentialSpec,
    SolverSettings,
};

fn main() -> rspt::Result<()> {
    let settings = SolverSettings::default();
    let split = build_oscillator_split(&BasisSpec { n_basis: 64 }, &PotentialSpec::Quartic)?;
    let series = rs_series(&split, 0, 8, &settings)?;

    let lambda = 0.25;
    let direct = direct_energy(&split, 0, lambda, &settings)?;
    let trace = partial_sums(&series, lambda).against_reference(direct);
    let errors = trace.errors_vs_oracle.as_ref().expect("reference attached");
    let k_opt = trace.k_opt.expect("multiple terms");

    println!("terms and true errors at lambda = {lambda} (direct energy {direct:.10}):");
    println!("  {:>2}  {:>13}  {:>13}  {:>6}", "K", "|term K|", "error of S_K", "");
    for k in 0..trace.terms.len() {
        let marker = if k == k_opt { "<- stop" } else { "" };
        println!(
            "  {k:>2}  {:>13.4e}  {:>13.4e}  {marker:>7}",
            trace.terms[k].abs(),
            errors[k]
        );
    }

    let best = errors
        .iter()
        .enumerate()
        .skip(1)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    println!(
        "\nsmallest term at K = {k_opt} (error {:.3e}); best possible truncation is K = {} \
         (error {:.3e})",
        errors[k_opt], best.0, best.1
    );
    println!("pushing past the turn only makes it worse: S_8 is off by {:.3e}", errors[8]);
    Ok(())
}
