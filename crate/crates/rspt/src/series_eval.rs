//! Summing the expansion at a physical coupling.
//!
//! The hierarchy hands over raw coefficients; this module turns them into
//! numbers at a given value of the expansion variable `mu` and exposes the
//! one decision an asymptotic-series user has to make: where to stop. For a
//! factorially divergent expansion the best available accuracy is obtained by
//! truncating just before the smallest term, so [`optimal_truncation`] simply
//! locates that term — ignoring exact zeros, which are parity artifacts and
//! carry no size information.

use crate::hierarchy::PerturbationSeries;
use crate::util::{axpy, norm2, scale_in_place};
use serde::Serialize;

/// Term-by-term evaluation of an energy expansion at one coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSumTrace {
    /// Expansion variable the series was evaluated at.
    pub mu: f64,
    /// `E_k mu^k`, including the zero-order term at index 0.
    pub terms: Vec<f64>,
    /// Running sums of `terms`.
    pub partial_sums: Vec<f64>,
    /// Index of the smallest nonzero term from order 1 up, when one exists.
    pub k_opt: Option<usize>,
    /// `|partial_sums[k] - reference|`, filled in by
    /// [`PartialSumTrace::against_reference`].
    pub errors_vs_oracle: Option<Vec<f64>>,
}

impl PartialSumTrace {
    /// Attach absolute errors of every partial sum against a reference
    /// energy obtained independently of the series.
    pub fn against_reference(mut self, reference: f64) -> Self {
        self.errors_vs_oracle =
            Some(self.partial_sums.iter().map(|s| (s - reference).abs()).collect());
        self
    }
}

/// Evaluate all partial sums of the energy expansion at `mu`.
///
/// `mu` is the *effective* expansion variable: `lambda_target - lambda_ref`
/// for an ordinary split, or the value returned by
/// [`crate::model::HamiltonianSplit::fold_for_target`] when a truncation
/// remainder was folded.
pub fn partial_sums(series: &PerturbationSeries, mu: f64) -> PartialSumTrace {
    let mut terms = Vec::with_capacity(series.energies.len());
    let mut power = 1.0;
    for e in &series.energies {
        terms.push(e * power);
        power *= mu;
    }
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let k_opt = if terms.len() > 1 { Some(optimal_truncation(&terms)) } else { None };
    PartialSumTrace { mu, terms, partial_sums, k_opt, errors_vs_oracle: None }
}

/// Index of the smallest-magnitude term with `k >= 1`; ties resolve to the
/// smaller index.
///
/// Terms at or below the roundoff floor of the evaluation — machine epsilon
/// times the largest term — are not candidates: they are either exact parity
/// zeros or accumulated noise, and in both cases their magnitude says nothing
/// about where the asymptotic tail starts growing. (Below that floor a term
/// cannot change a double-precision partial sum anyway.) When every candidate
/// sits under the floor the series is already converged at order 1, which is
/// then the answer.
pub fn optimal_truncation(terms: &[f64]) -> usize {
    assert!(
        terms.len() >= 2,
        "optimal truncation needs at least the first-order term"
    );
    let floor = f64::EPSILON * terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let mut k_opt = None;
    for (k, t) in terms.iter().enumerate().skip(1) {
        if t.abs() <= floor {
            continue;
        }
        match k_opt {
            Some((_, best)) if t.abs() >= best => {}
            _ => k_opt = Some((k, t.abs())),
        }
    }
    k_opt.map(|(k, _)| k).unwrap_or(1)
}

/// Corrected state `x + sum_{j=1..=upto_k} mu^j y_j`, renormalized to unit
/// length (the raw sum carries intermediate normalization, where only the
/// zero-order component is fixed).
pub fn wavefunction_partial_sum(
    series: &PerturbationSeries,
    mu: f64,
    upto_k: usize,
) -> Vec<f64> {
    assert!(
        upto_k <= series.vectors.len(),
        "requested order {upto_k} beyond the computed {}",
        series.vectors.len()
    );
    let mut w = series.eigenpair.vector.clone();
    let mut power = 1.0;
    for y in series.vectors.iter().take(upto_k) {
        power *= mu;
        axpy(&mut w, power, y);
    }
    let nrm = norm2(&w);
    if nrm > 0.0 {
        scale_in_place(&mut w, 1.0 / nrm);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::rs_series;
    use crate::model::HamiltonianSplit;
    use crate::util::dot;
    use crate::zero_order::SolverSettings;

    fn toy_series(order: usize) -> PerturbationSeries {
        let split = HamiltonianSplit::toy_two_level();
        rs_series(&split, 0, order, &SolverSettings::default()).unwrap()
    }

    #[test]
    fn toy_partial_sums_close_on_the_branch() {
        // E_-(mu) = 1 - sqrt(1 + mu^2) within the convergence disk |mu| < 1.
        let series = toy_series(6);
        let mu = 0.5_f64;
        let exact = 1.0 - (1.0 + mu * mu).sqrt();
        let trace = partial_sums(&series, mu).against_reference(exact);
        assert_eq!(trace.terms.len(), 7);
        assert!((trace.terms[2] - (-0.125)).abs() < 1e-13);
        assert!((trace.terms[4] - 0.0078125).abs() < 1e-13);
        let errs = trace.errors_vs_oracle.as_ref().unwrap();
        for k in 1..errs.len() {
            assert!(
                errs[k] <= errs[k - 1] + 1e-15,
                "error must not grow inside the disk: {} -> {}",
                errs[k - 1],
                errs[k]
            );
        }
        assert!(errs[6] < 2e-4);
        // The last nonzero term is also the smallest one here.
        assert_eq!(trace.k_opt, Some(6));
    }

    #[test]
    fn truncation_index_skips_zeros_and_noise() {
        assert_eq!(optimal_truncation(&[1.0, 0.2, 0.0, 0.5]), 1);
        assert_eq!(optimal_truncation(&[1.0, 0.3, 0.1, 0.1]), 2, "ties pick the earlier order");
        assert_eq!(optimal_truncation(&[5.0, 0.0, 0.0, 0.0]), 1, "all-zero tail defaults to 1");
        assert_eq!(optimal_truncation(&[5.0, -3.0, 2.0, -0.5, 4.0]), 3);
        // Roundoff-level entries (parity zeros in finite precision) are not
        // candidates even though they are the smallest in raw magnitude.
        assert_eq!(optimal_truncation(&[0.0, 1e-30, -0.125, 3e-32, 0.0078125]), 4);
    }

    #[test]
    #[should_panic(expected = "at least the first-order term")]
    fn truncation_needs_a_candidate() {
        optimal_truncation(&[1.0]);
    }

    #[test]
    fn corrected_state_tracks_the_exact_eigenvector() {
        let series = toy_series(5);
        let mu = 0.3_f64;
        let w = wavefunction_partial_sum(&series, mu, 5);
        assert!((norm2(&w) - 1.0).abs() < 1e-14);
        // Exact ground eigenvector of [[0, mu], [mu, 2]].
        let e = 1.0 - (1.0 + mu * mu).sqrt();
        let mut exact = vec![1.0, e / mu];
        let nrm = norm2(&exact);
        scale_in_place(&mut exact, 1.0 / nrm);
        let overlap = dot(&w, &exact).abs();
        assert!(overlap > 1.0 - 1e-8, "overlap {overlap}");
        // And the order-0 sum is just the zero-order vector.
        let w0 = wavefunction_partial_sum(&series, mu, 0);
        assert_eq!(w0, series.eigenpair.vector);
    }

    #[test]
    fn zero_coupling_reproduces_order_zero() {
        let series = toy_series(4);
        let trace = partial_sums(&series, 0.0);
        assert_eq!(trace.partial_sums.last().copied().unwrap(), series.energies[0]);
        assert_eq!(trace.k_opt, Some(1), "all mu-scaled terms vanish");
    }
}
