//! Rewriting the split without changing the operator.
//!
//! Every policy here is an exact algebraic identity on the family
//! `H(lambda)`: [`apply_policy`] may move the expansion center, or push
//! off-band content of the assembled operator into a pending constant term,
//! but `assemble_at` is preserved entrywise at every coupling. What changes
//! is how much work the series has to do — measured by [`SplitQuality`],
//! whose entries are scaled by the effective expansion variable so that
//! splits with different centers are comparable at the same physical target.

use crate::error::{Error, Result};
use crate::hierarchy::rs_series;
use crate::model::HamiltonianSplit;
use crate::util::norm2;
use crate::zero_order::SolverSettings;
use serde::{Deserialize, Serialize};

fn default_max_rounds() -> usize {
    8
}

fn default_shrink_tol() -> f64 {
    1e-2
}

/// A rewriting rule for a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitPolicy {
    /// Move the expansion center to `lambda0`, keeping the full assembled
    /// operator as the new `h0`.
    RecenterFull { lambda0: f64 },
    /// Assemble at `lambda0`, keep only the central `keep_bandwidth` bands in
    /// the new `h0`, and park the off-band remainder as a pending constant
    /// term that must be folded before expanding.
    BandTruncate { lambda0: f64, keep_bandwidth: usize },
    /// Walk the center toward `lambda_target`, jumping as far as possible and
    /// halving the jump whenever the zero-order state at the trial center is
    /// degenerate. A move is kept only while the mu-scaled first correction
    /// norm shrinks by at least `shrink_tol` relative; otherwise the best
    /// split so far is returned.
    IterativeImprove {
        lambda_target: f64,
        #[serde(default = "default_max_rounds")]
        max_rounds: usize,
        #[serde(default = "default_shrink_tol")]
        shrink_tol: f64,
    },
}

/// How hard the series has to work to reach `lambda_target` from this split.
/// All entries are scaled by the effective expansion variable `mu`, so the
/// numbers quantify actual contributions at the target, not raw coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitQuality {
    /// Center of the measured split.
    pub lambda_ref: f64,
    /// Physical coupling the series is asked to reach.
    pub lambda_target: f64,
    /// Effective expansion variable: `lambda_target - lambda_ref`, or 1 when
    /// a pending constant term was folded into the first-order operator.
    pub mu: f64,
    /// `|E_1 mu|` — first-order energy contribution at the target.
    pub first_correction_energy: f64,
    /// `|mu| * |y_1|` — first-order state deformation at the target.
    pub first_correction_vector_norm: f64,
    /// `|E_K mu^K| / |E_{K-1} mu^{K-1}|` at the probe order `K`; an empirical
    /// contraction factor (0/0 counts as 0, nonzero/0 as infinity).
    pub effective_ratio: f64,
    /// Probe order `K`.
    pub order: usize,
}

/// Measure a split against a physical target without modifying it. Pending
/// constant terms are folded into the probe automatically.
pub fn split_quality(
    split: &HamiltonianSplit,
    state_index: usize,
    lambda_target: f64,
    order: usize,
    settings: &SolverSettings,
) -> Result<SplitQuality> {
    if order == 0 {
        return Err(Error::InvalidModel(
            "quality probe needs at least the first correction order".into(),
        ));
    }
    let (folded, mu) = split.fold_for_target(lambda_target);
    let series = rs_series(&folded, state_index, order, settings)?;
    let first_correction_energy = (series.energies[1] * mu).abs();
    let first_correction_vector_norm = mu.abs() * norm2(&series.vectors[0]);
    let term = |k: usize| (series.energies[k] * mu.powi(k as i32)).abs();
    let (t_hi, t_lo) = (term(order), term(order - 1));
    let effective_ratio = if t_lo == 0.0 {
        if t_hi == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        t_hi / t_lo
    };
    Ok(SplitQuality {
        lambda_ref: split.lambda_ref(),
        lambda_target,
        mu,
        first_correction_energy,
        first_correction_vector_norm,
        effective_ratio,
        order,
    })
}

/// Apply a policy. For [`SplitPolicy::RecenterFull`] and
/// [`SplitPolicy::BandTruncate`] this is pure matrix algebra and cannot fail
/// on solver grounds; [`SplitPolicy::IterativeImprove`] probes trial centers
/// and needs the state to be solvable at the starting split.
pub fn apply_policy(
    split: &HamiltonianSplit,
    policy: &SplitPolicy,
    state_index: usize,
    quality_order: usize,
    settings: &SolverSettings,
) -> Result<HamiltonianSplit> {
    match policy {
        SplitPolicy::RecenterFull { lambda0 } => Ok(split.resplit(*lambda0)),
        SplitPolicy::BandTruncate { lambda0, keep_bandwidth } => {
            truncate(split, *lambda0, *keep_bandwidth)
        }
        SplitPolicy::IterativeImprove { .. } => {
            let (out, _) =
                apply_policy_traced(split, policy, state_index, quality_order, settings)?;
            Ok(out)
        }
    }
}

/// Like [`apply_policy`], and also measure every split the policy moves
/// through against the policy's own target coupling: the first entry is the
/// input split, the last is the returned one.
pub fn apply_policy_traced(
    split: &HamiltonianSplit,
    policy: &SplitPolicy,
    state_index: usize,
    quality_order: usize,
    settings: &SolverSettings,
) -> Result<(HamiltonianSplit, Vec<SplitQuality>)> {
    match policy {
        SplitPolicy::RecenterFull { lambda0 } => {
            let before = split_quality(split, state_index, *lambda0, quality_order, settings)?;
            let out = split.resplit(*lambda0);
            let after = split_quality(&out, state_index, *lambda0, quality_order, settings)?;
            Ok((out, vec![before, after]))
        }
        SplitPolicy::BandTruncate { lambda0, keep_bandwidth } => {
            let before = split_quality(split, state_index, *lambda0, quality_order, settings)?;
            let out = truncate(split, *lambda0, *keep_bandwidth)?;
            let after = split_quality(&out, state_index, *lambda0, quality_order, settings)?;
            Ok((out, vec![before, after]))
        }
        SplitPolicy::IterativeImprove { lambda_target, max_rounds, shrink_tol } => {
            improve(split, state_index, *lambda_target, *max_rounds, *shrink_tol, quality_order, settings)
        }
    }
}

fn truncate(
    split: &HamiltonianSplit,
    lambda0: f64,
    keep_bandwidth: usize,
) -> Result<HamiltonianSplit> {
    if keep_bandwidth >= split.dim() {
        return Err(Error::InvalidShape(format!(
            "keep_bandwidth {keep_bandwidth} must be below the dimension {}",
            split.dim()
        )));
    }
    let assembled = split.assemble_at(lambda0);
    let (kept, rest) = assembled.band_split(keep_bandwidth);
    let constant = if rest.max_abs() == 0.0 { None } else { Some(rest) };
    Ok(HamiltonianSplit::with_parts(
        kept,
        split.h1().clone(),
        lambda0,
        constant,
        split.representation().clone(),
    ))
}

/// The walk behind [`SplitPolicy::IterativeImprove`]. State identity is by
/// index at the current center; a refusal at a trial center (levels too close)
/// shortens the jump rather than aborting, and the walk settles for the best
/// split reached when no admissible move still improves.
fn improve(
    split: &HamiltonianSplit,
    state_index: usize,
    lambda_target: f64,
    max_rounds: usize,
    shrink_tol: f64,
    quality_order: usize,
    settings: &SolverSettings,
) -> Result<(HamiltonianSplit, Vec<SplitQuality>)> {
    let baseline = split_quality(split, state_index, lambda_target, quality_order, settings)?;
    let mut best_norm = baseline.first_correction_vector_norm;
    let mut trace = vec![baseline];
    let mut current = split.clone();
    if best_norm == 0.0 {
        return Ok((current, trace)); // nothing left for the series to do
    }
    let mut candidate = lambda_target;
    for _ in 0..max_rounds {
        let step = candidate - current.lambda_ref();
        if step.abs() <= f64::EPSILON * lambda_target.abs().max(1.0) {
            break; // halved into numerical standstill
        }
        let moved = current.resplit(candidate);
        match split_quality(&moved, state_index, lambda_target, quality_order, settings) {
            Err(Error::DegenerateState { .. }) => {
                candidate = current.lambda_ref() + 0.5 * step;
            }
            Err(e) => return Err(e),
            Ok(q) => {
                if q.first_correction_vector_norm < best_norm * (1.0 - shrink_tol) {
                    best_norm = q.first_correction_vector_norm;
                    trace.push(q);
                    current = moved;
                    if current.lambda_ref() == lambda_target || best_norm == 0.0 {
                        break;
                    }
                    candidate = lambda_target;
                } else {
                    break; // admissible, but no longer worth moving
                }
            }
        }
    }
    Ok((current, trace))
}
