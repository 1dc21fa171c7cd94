//! Zero-order eigenpairs by inertia bisection and inverse iteration.
//!
//! No spectral decomposition is ever formed. The k-th eigenvalue of the band
//! matrix is bracketed by bisection on the inertia count (negative pivots of
//! the shifted `LDL^T` factorization), its isolation is certified by two more
//! inertia evaluations at the edges of a guard window, and the eigenvector
//! comes from inverse iteration on one band `LU` factorization at the
//! converged shift. A state whose guard window contains a neighboring
//! eigenvalue is refused outright — the perturbation hierarchy built on top of
//! it would divide by that vanishing gap.

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::factor::{inertia_with_retry, BandLu};
use crate::util::{dot, norm2, scale_in_place, start_vector};
use serde::{Deserialize, Serialize};

/// Relative step used when an inertia factorization must be nudged off an
/// exactly singular shift.
const INERTIA_RETRY_DELTA: f64 = 1e-13;

/// Tolerances and iteration caps shared by every solver stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Bisection interval width, relative to the Gershgorin span.
    pub tol_eig: f64,
    /// Hard cap on bisection steps.
    pub max_bisect: usize,
    /// Hard cap on inverse-iteration steps.
    pub max_inverse_iter: usize,
    /// Isolation window half-width, relative to the Gershgorin span; a
    /// neighboring eigenvalue inside it makes the state unusable.
    pub degeneracy_gap: f64,
    /// Per-order relative residual bound for the correction hierarchy.
    pub tol_hier: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol_eig: 1e-12,
            max_bisect: 200,
            max_inverse_iter: 50,
            degeneracy_gap: 1e-8,
            tol_hier: 1e-10,
        }
    }
}

/// A converged zero-order state of the unperturbed operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Rayleigh-quotient energy.
    pub energy: f64,
    /// Unit eigenvector; the entry of largest magnitude is positive.
    pub vector: Vec<f64>,
    /// Two-norm of `h x - energy x` at exit.
    pub residual: f64,
    /// Which eigenvalue this is, counting from the bottom of the spectrum.
    pub state_index: usize,
}

/// Number of eigenvalues of `h` strictly below `shift`, from the signs of the
/// `LDL^T` pivots. Exact singularity at the shift is first disarmed by a pivot
/// clamp and, failing that, by nudging the shift a few parts in 1e13.
pub fn inertia_below(h: &BandMatrix, shift: f64) -> Result<usize> {
    inertia_with_retry(h, shift, INERTIA_RETRY_DELTA, h.max_abs().max(1.0))
}

/// Gershgorin span with a floor so that window and tolerance scales stay
/// positive even for multiples of the identity.
fn spectral_span(h: &BandMatrix) -> (f64, f64, f64) {
    let (lo, hi) = h.gershgorin();
    let floor = f64::EPSILON * h.max_abs().max(1.0);
    (lo, hi, (hi - lo).max(floor))
}

/// Solve for the `state_index`-th eigenpair (0 = bottom of the spectrum).
pub fn solve_state(
    h: &BandMatrix,
    state_index: usize,
    settings: &SolverSettings,
) -> Result<EigenPair> {
    let n = h.dim();
    if state_index >= n {
        return Err(Error::InvalidModel(format!(
            "state index {state_index} out of range for a {n}-dimensional operator"
        )));
    }
    let k = state_index;
    let (glo, ghi, span) = spectral_span(h);

    // Widen the Gershgorin interval slightly: for diagonal-dominant cases the
    // extreme eigenvalues sit exactly on the bounds, and the bracket invariant
    // needs inertia(lo) <= k and inertia(hi) >= k + 1 strictly.
    let pad = 1e-3 * span;
    let mut lo = glo - pad;
    let mut hi = ghi + pad;
    let width_goal = settings.tol_eig * span;
    let mut steps = 0usize;
    while hi - lo > width_goal {
        if steps >= settings.max_bisect {
            return Err(Error::IllConditioned {
                order: 0,
                detail: format!(
                    "bisection did not reach width {width_goal:.3e} in {} steps",
                    settings.max_bisect
                ),
            });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // no representable point strictly inside; as tight as f64 gets
        }
        if inertia_below(h, mid)? <= k {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let e_mid = 0.5 * (lo + hi);

    // Isolation certificate: exactly one eigenvalue inside [e - g, e + g].
    // The window is floored at a few ulp of the energy so both probes are
    // representable shifts distinct from e_mid itself.
    let gap_bound = (settings.degeneracy_gap * span).max(4.0 * f64::EPSILON * e_mid.abs());
    let below = inertia_below(h, e_mid - gap_bound)?;
    let above = inertia_below(h, e_mid + gap_bound)?;
    if below != k || above != k + 1 {
        return Err(Error::DegenerateState { state_index: k, gap_bound, order: 0 });
    }

    // Inverse iteration at the converged shift. The factorization's tiny-pivot
    // boost turns an exact hit into a huge, well-directed amplification.
    let lu = BandLu::factor(h, e_mid);
    let mut v = start_vector(n);
    let mut best: Option<(f64, f64, Vec<f64>)> = None; // (residual, energy, vector)
    let stop_at = 32.0 * f64::EPSILON * h.norm_inf().max(1.0);
    for iter in 0..settings.max_inverse_iter {
        let mut w = lu.solve(&v);
        let nrm = norm2(&w);
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::InverseIterationStalled {
                state_index: k,
                residual: f64::INFINITY,
                iterations: iter + 1,
            });
        }
        scale_in_place(&mut w, 1.0 / nrm);
        let hw = h.matvec(&w);
        let theta = dot(&w, &hw);
        let mut res2 = 0.0;
        for i in 0..n {
            let r = hw[i] - theta * w[i];
            res2 += r * r;
        }
        let res = res2.sqrt();
        let improved = best.as_ref().map_or(true, |(r, _, _)| res < *r);
        if improved {
            best = Some((res, theta, w.clone()));
        }
        if res <= stop_at || (!improved && iter > 0) {
            break;
        }
        v = w;
    }
    let (residual, energy, mut vector) =
        best.expect("inverse iteration ran at least one step");

    // The loosest acceptable residual: far looser than the stopping goal, but
    // still small against the isolation window, so the pair is unambiguous.
    if residual > 1e-8 * h.norm_inf().max(1.0) {
        return Err(Error::InverseIterationStalled {
            state_index: k,
            residual,
            iterations: settings.max_inverse_iter,
        });
    }
    // The Rayleigh quotient must land inside the certified window; drifting
    // out would mean the iteration locked onto a different state.
    if (energy - e_mid).abs() > gap_bound.max(width_goal) {
        return Err(Error::IllConditioned {
            order: 0,
            detail: format!(
                "inverse iteration drifted to {energy:.16e}, outside the window around {e_mid:.16e}"
            ),
        });
    }

    // Deterministic sign: the entry of largest magnitude (first on ties) is
    // positive.
    let mut idx = 0usize;
    for (i, value) in vector.iter().enumerate() {
        if value.abs() > vector[idx].abs() {
            idx = i;
        }
    }
    if vector[idx] < 0.0 {
        scale_in_place(&mut vector, -1.0);
    }
    Ok(EigenPair { energy, vector, residual, state_index: k })
}

/// Bottom-of-spectrum convenience wrapper.
pub fn ground_state(h: &BandMatrix, settings: &SolverSettings) -> Result<EigenPair> {
    solve_state(h, 0, settings)
}
