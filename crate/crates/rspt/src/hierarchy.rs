//! The coupled hierarchy of correction equations.
//!
//! With `x, E0` the zero-order pair of `h0` and `A = h0 - E0 I`, order `k`
//! of the expansion solves the singular system
//!
//! ```text
//! A y_k = E_k x + tau_k,
//! tau_1 = -h1 x,
//! tau_k = -(h1 - E1) y_{k-1} + sum_{j=2}^{k-1} E_j y_{k-j}   (k >= 2),
//! ```
//!
//! whose solvability condition fixes the energy first: `E_k = -<x, tau_k>`.
//! The vector correction then comes from the bordered system
//! `[[A, x], [x^T, 0]] [y; mu] = [E_k x + tau_k; 0]`, which is regular on the
//! whole space and pins the intermediate normalization `<x, y_k> = 0`. One
//! factorization of that bordered matrix serves every order; each order costs
//! one band matvec and one pair of triangular sweeps. The multiplier `mu`
//! vanishes analytically, so its computed size is a free consistency monitor.

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::factor::BandLu;
use crate::model::HamiltonianSplit;
use crate::util::{axpy, dot, norm2};
use crate::zero_order::{solve_state, EigenPair, SolverSettings};
use serde::{Deserialize, Serialize};

/// Condition-number ceiling for the bordered factorization; beyond it the
/// correction equations no longer determine their solutions to working
/// precision and the run refuses rather than degrade.
const COND_LIMIT: f64 = 1.0 / (100.0 * f64::EPSILON);

/// Ceiling on the relative size of the bordered multiplier `mu`, which is an
/// exact zero of the continuous problem.
const MU_SOLVABILITY_REL: f64 = 1e-10;

/// How the corrected state is normalized across orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationPolicy {
    /// `<x, y_k> = 0` for every order: the zero-order component of the state
    /// is frozen at 1 and all corrections live in the orthogonal complement.
    Intermediate,
}

/// A perturbation expansion around one reference coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSeries {
    /// Coupling the expansion is centered on.
    pub lambda_ref: f64,
    /// Which eigenvalue branch, counted from the bottom at the reference.
    pub state_index: usize,
    /// Zero-order pair the hierarchy was anchored to.
    pub eigenpair: EigenPair,
    /// `E_0, E_1, ..., E_K` (length `order + 1`).
    pub energies: Vec<f64>,
    /// `y_1, ..., y_K` (length `order`), each orthogonal to the zero-order
    /// vector.
    pub vectors: Vec<Vec<f64>>,
    /// Independently recomputed `|A y_k - E_k x - tau_k|` per order.
    pub per_order_residuals: Vec<f64>,
    pub normalization: NormalizationPolicy,
}

impl PerturbationSeries {
    /// Expansion depth `K`.
    pub fn order(&self) -> usize {
        self.energies.len() - 1
    }
}

/// Right-hand side `tau_k` of the order-`k` equation, from the lower orders.
/// `energies` holds `E_0..E_{k-1}` (at least), `vectors` holds `y_1..y_{k-1}`,
/// and `x` is the zero-order vector.
fn build_tau(
    h1: &BandMatrix,
    x: &[f64],
    energies: &[f64],
    vectors: &[Vec<f64>],
    k: usize,
) -> Vec<f64> {
    debug_assert!(k >= 1 && energies.len() >= k && vectors.len() >= k - 1);
    let prev = if k == 1 { x } else { &vectors[k - 2] };
    let mut tau = h1.matvec(prev);
    for t in tau.iter_mut() {
        *t = -*t;
    }
    if k >= 2 {
        axpy(&mut tau, energies[1], prev);
        for j in 2..k {
            axpy(&mut tau, energies[j], &vectors[k - j - 1]);
        }
    }
    tau
}

/// Residual `|A y - (E_k x + tau)|_2` recomputed from the original operator,
/// independent of any factorization.
pub fn residual_norm(
    h0: &BandMatrix,
    e0: f64,
    x: &[f64],
    y: &[f64],
    e_k: f64,
    tau: &[f64],
) -> f64 {
    let hy = h0.matvec(y);
    let mut sum = 0.0;
    for i in 0..y.len() {
        let r = hy[i] - e0 * y[i] - e_k * x[i] - tau[i];
        sum += r * r;
    }
    sum.sqrt()
}

/// One hierarchy step on an existing factorization: returns
/// `(E_k, y_k, residual)` and enforces the solvability and accuracy monitors.
fn step(
    lu: &BandLu,
    h0: &BandMatrix,
    e0: f64,
    x: &[f64],
    tau: &[f64],
    k: usize,
    settings: &SolverSettings,
) -> Result<(f64, Vec<f64>, f64)> {
    let e_k = -dot(x, tau);
    let mut f = tau.to_vec();
    axpy(&mut f, e_k, x);
    let (mut y, mu) = lu.solve_bordered(&f, 0.0);
    let tau_scale = norm2(tau);
    if mu.abs() > MU_SOLVABILITY_REL * tau_scale {
        return Err(Error::IllConditioned {
            order: k,
            detail: format!(
                "solvability multiplier {:.3e} exceeds {:.1e} of the source norm {:.3e}",
                mu, MU_SOLVABILITY_REL, tau_scale
            ),
        });
    }
    // Sharpen the normalization: the constraint row enforces <x, y> = 0 only
    // to the solver's accuracy; one explicit projection makes it exact.
    let overlap = dot(x, &y);
    axpy(&mut y, -overlap, x);
    let res = residual_norm(h0, e0, x, &y, e_k, tau);
    let res_scale = norm2(&f) + h0.norm_inf().max(e0.abs()) * norm2(&y);
    if res > settings.tol_hier * res_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::IllConditioned {
            order: k,
            detail: format!(
                "correction residual {:.3e} exceeds {:.1e} of its scale {:.3e}",
                res, settings.tol_hier, res_scale
            ),
        });
    }
    Ok((e_k, y, res))
}

/// Solve a single order in isolation, factoring the bordered system for this
/// call only. `energies` must hold `E_0..E_{k-1}` and `vectors` must hold
/// `y_1..y_{k-1}` for `k = vectors.len() + 1`. For a whole expansion prefer
/// [`rs_series`], which reuses one factorization across all orders.
pub fn solve_order(
    h0: &BandMatrix,
    h1: &BandMatrix,
    pair: &EigenPair,
    energies: &[f64],
    vectors: &[Vec<f64>],
    settings: &SolverSettings,
) -> Result<(f64, Vec<f64>, f64)> {
    let k = vectors.len() + 1;
    if energies.len() < k {
        return Err(Error::DimensionMismatch(format!(
            "order {k} needs E_0..E_{}, got {} energies",
            k - 1,
            energies.len()
        )));
    }
    let lu = BandLu::factor_bordered(h0, pair.energy, &pair.vector);
    let tau = build_tau(h1, &pair.vector, energies, vectors, k);
    step(&lu, h0, pair.energy, &pair.vector, &tau, k, settings)
}

/// Full expansion of the given state to `order` energy corrections.
///
/// The split must be constant-free: a pending truncation remainder would
/// silently change the operator the series converges to, so it is a hard
/// error here — fold it first (see
/// [`HamiltonianSplit::fold_for_target`]).
pub fn rs_series(
    split: &HamiltonianSplit,
    state_index: usize,
    order: usize,
    settings: &SolverSettings,
) -> Result<PerturbationSeries> {
    if split.constant().is_some() {
        return Err(Error::ConstantTermNotFolded);
    }
    let h0 = split.h0();
    let h1 = split.h1();
    let pair = solve_state(h0, state_index, settings)?;
    split.check_tail_weight(&pair.vector, "zero-order vector");

    let mut series = PerturbationSeries {
        lambda_ref: split.lambda_ref(),
        state_index,
        energies: vec![pair.energy],
        vectors: Vec::with_capacity(order),
        per_order_residuals: Vec::with_capacity(order),
        normalization: NormalizationPolicy::Intermediate,
        eigenpair: pair,
    };
    if order == 0 {
        return Ok(series);
    }

    let x = &series.eigenpair.vector;
    let e0 = series.eigenpair.energy;
    let lu = BandLu::factor_bordered(h0, e0, x);
    let cond = lu.condition_estimate();
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::IllConditioned {
            order: 1,
            detail: format!(
                "bordered propagator condition {:.3e} exceeds {:.3e}",
                cond, COND_LIMIT
            ),
        });
    }

    for k in 1..=order {
        let tau = build_tau(h1, x, &series.energies, &series.vectors, k);
        let (e_k, y, res) = step(&lu, h0, e0, x, &tau, k, settings)?;
        series.energies.push(e_k);
        series.vectors.push(y);
        series.per_order_residuals.push(res);
        split.check_tail_weight(series.vectors.last().unwrap(), "correction vector");
    }
    Ok(series)
}
