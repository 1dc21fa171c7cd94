//! Independent checks the series cannot game.
//!
//! Everything here reaches the answer by a route that shares no code path
//! with the correction hierarchy: energies come from full solves of the
//! assembled operator at each coupling, derivatives from finite differences
//! of those energies, and convergence orders from log-log regression of
//! observed errors. Each verdict carries its own accuracy estimate, and a
//! check whose noise floor drowns the signal refuses instead of reporting a
//! meaningless number.

use crate::error::{Error, Result};
use crate::model::HamiltonianSplit;
use crate::zero_order::{solve_state, SolverSettings};
use serde::Serialize;

/// Energy of the index-`state_index` eigenvalue of the fully assembled
/// operator at `lambda` — no expansion involved.
pub fn direct_energy(
    split: &HamiltonianSplit,
    state_index: usize,
    lambda: f64,
    settings: &SolverSettings,
) -> Result<f64> {
    let h = split.assemble_at(lambda);
    Ok(solve_state(&h, state_index, settings)?.energy)
}

/// Direct energies along a coupling path, with a branch-identity guard.
///
/// Eigenvalues are tracked by sorted index, so between consecutive grid
/// points the tracked energy must not move by more than half its local
/// spectral gap: a larger move means the walk cannot certify that the label
/// still names the same physical branch (it may have swapped with a
/// neighbor), and the walk refuses with [`Error::StateCrossing`].
pub fn direct_curve(
    split: &HamiltonianSplit,
    state_index: usize,
    lambdas: &[f64],
    settings: &SolverSettings,
) -> Result<Vec<f64>> {
    let mut energies = Vec::with_capacity(lambdas.len());
    let mut prev: Option<(f64, f64, f64)> = None; // (lambda, energy, local gap)
    for &lambda in lambdas {
        let h = split.assemble_at(lambda);
        let e = solve_state(&h, state_index, settings)?.energy;
        let mut gap = f64::INFINITY;
        if state_index > 0 {
            let below = solve_state(&h, state_index - 1, settings)?.energy;
            gap = gap.min(e - below);
        }
        if state_index + 1 < split.dim() {
            let above = solve_state(&h, state_index + 1, settings)?.energy;
            gap = gap.min(above - e);
        }
        if let Some((lambda_before, e_before, gap_before)) = prev {
            let jump = (e - e_before).abs();
            let local_gap = gap_before.min(gap);
            if jump > 0.5 * local_gap {
                return Err(Error::StateCrossing {
                    state_index,
                    lambda_before,
                    lambda_after: lambda,
                    jump,
                    local_gap,
                });
            }
        }
        prev = Some((lambda, e, gap));
        energies.push(e);
    }
    Ok(energies)
}

/// Finite-difference weights on an arbitrary stencil: `weights[k][i]` is the
/// coefficient of the sample at `x[i]` in the order-`k` derivative at `z`,
/// for every `k <= max_order` at once (the one-pass recurrence of the
/// classical algorithm for interpolatory differentiation weights).
fn fd_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    assert!(max_order < n, "order {max_order} needs more than {n} samples");
    let mut c = vec![vec![0.0; max_order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    let mut out = vec![vec![0.0; n]; max_order + 1];
    for (i, row) in c.iter().enumerate() {
        for (k, w) in row.iter().enumerate() {
            out[k][i] = *w;
        }
    }
    out
}

/// Taylor coefficients of the energy at the expansion center, measured by
/// finite differences of direct solves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdDerivatives {
    /// Base stencil spacing in the coupling.
    pub step: f64,
    /// Highest coefficient measured.
    pub order: usize,
    /// Extrapolated Taylor coefficients `E^(k)(lambda_ref) / k!` for
    /// `k = 1..=order` (index 0 holds the direct energy at the center).
    pub coefficients: Vec<f64>,
    /// Richardson disagreement per coefficient — an empirical error bar, with
    /// entry 0 fixed at zero for the directly solved center value.
    pub error_estimates: Vec<f64>,
}

/// Ratio of the Richardson disagreement to the tolerance-scaled coefficient
/// above which the measurement is rejected as noise.
const FD_NOISE_FACTOR: f64 = 10.0;

/// Measure the first `order` Taylor coefficients of the tracked energy at the
/// split's center by symmetric finite differences with spacings `step` and
/// `step / 2`, combined by Richardson extrapolation at each stencil's formal
/// accuracy order. The two spacings must agree: a coefficient whose
/// disagreement exceeds `10 * fd_tol * max(|value|, 1)` is dominated by
/// cancellation noise or by the nonlinear tail of the stencil, and the
/// measurement refuses rather than returning it.
pub fn fd_coefficients(
    split: &HamiltonianSplit,
    state_index: usize,
    order: usize,
    step: f64,
    fd_tol: f64,
    settings: &SolverSettings,
) -> Result<FdDerivatives> {
    if order == 0 {
        return Err(Error::InvalidModel("derivative measurement needs order >= 1".into()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidModel(format!("stencil step {step} must be positive")));
    }
    let k_max = order;
    let center = split.lambda_ref();

    // One symmetric stencil of 2K+1 direct solves per spacing.
    let sample = |h: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let offsets: Vec<f64> = (-(k_max as isize)..=k_max as isize)
            .map(|j| j as f64 * h)
            .collect();
        let mut values = Vec::with_capacity(offsets.len());
        for &dx in &offsets {
            values.push(direct_energy(split, state_index, center + dx, settings)?);
        }
        Ok((offsets, values))
    };
    let (x_full, e_full) = sample(step)?;
    let (x_half, e_half) = sample(0.5 * step)?;
    let w_full = fd_weights(0.0, &x_full, k_max);
    let w_half = fd_weights(0.0, &x_half, k_max);
    let apply = |w: &[Vec<f64>], e: &[f64], k: usize| -> f64 {
        w[k].iter().zip(e.iter()).map(|(wi, ei)| wi * ei).sum()
    };

    let mut coefficients = vec![e_full[k_max]];
    let mut error_estimates = vec![0.0];
    let mut factorial = 1.0;
    for k in 1..=k_max {
        factorial *= k as f64;
        let d_full = apply(&w_full, &e_full, k);
        let d_half = apply(&w_half, &e_half, k);
        // Formal accuracy of the symmetric (2K+1)-point stencil for the k-th
        // derivative, promoted to the next even power (odd error terms cancel
        // on a symmetric grid).
        let mut p = 2 * k_max - k + 1;
        if p % 2 == 1 {
            p += 1;
        }
        let gain = (2.0_f64).powi(p as i32);
        let d_rich = (gain * d_half - d_full) / (gain - 1.0);
        let disagreement = (d_half - d_full).abs() / factorial;
        let value = d_rich / factorial;
        if disagreement > FD_NOISE_FACTOR * fd_tol * value.abs().max(1.0) {
            return Err(Error::NoisyDerivative { k, step, disagreement, value });
        }
        coefficients.push(value);
        error_estimates.push(disagreement);
    }
    Ok(FdDerivatives { step, order, coefficients, error_estimates })
}

/// Least-squares power-law fit of an error curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    /// Fitted exponent of `error ~ C * |mu|^slope`.
    pub slope: f64,
    /// Fitted `log10(C)`.
    pub intercept: f64,
    /// Number of usable (nonzero) points the fit consumed.
    pub points: usize,
}

/// Fit `log10(error)` against `log10(|mu|)`. Points with a vanishing error
/// or coupling carry no slope information and are skipped; at least two
/// usable points must remain. Meaningful slopes need couplings well inside
/// the convergence region, where the next omitted term dominates the error.
pub fn convergence_slope(mus: &[f64], errors: &[f64]) -> Result<SlopeFit> {
    if mus.len() != errors.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} couplings vs {} errors",
            mus.len(),
            errors.len()
        )));
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (&mu, &err) in mus.iter().zip(errors.iter()) {
        if mu != 0.0 && err > 0.0 && err.is_finite() {
            pts.push((mu.abs().log10(), err.log10()));
        }
    }
    let n = pts.len();
    if n < 2 {
        return Err(Error::InvalidModel(format!(
            "slope fit needs at least two nonzero error points, got {n}"
        )));
    }
    let nf = n as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = nf * sxx - sx * sx;
    if denom.abs() < f64::EPSILON * nf * sxx.max(1.0) {
        return Err(Error::InvalidModel(
            "slope fit needs at least two distinct couplings".into(),
        ));
    }
    let slope = (nf * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / nf;
    Ok(SlopeFit { slope, intercept, points: n })
}
