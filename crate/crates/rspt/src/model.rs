//! Hamiltonian families `H(lambda) = H0 + (lambda - lambda_ref) * H1 [+ C]`
//! and the two concrete representations that build them.
//!
//! A [`HamiltonianSplit`] fixes which part of the family is treated as solved
//! (`h0`) and which as the perturbation (`h1`). The optional constant term `C`
//! appears only after band truncation, where the discarded off-band remainder
//! of `H(lambda0)` must stay part of the operator; it belongs to the
//! perturbation side and has to be folded into an effective first-order
//! operator (see [`HamiltonianSplit::fold_for_target`]) before expanding.
//!
//! Representations:
//! * lattice — central differences on a uniform Dirichlet grid, so `h0` is
//!   tridiagonal with diagonal `2/h^2 + V_base(x_i)` and off-diagonal `-1/h^2`;
//!   `h1` is diagonal with the lambda-coefficient of the potential.
//! * oscillator basis — `h0 = diag(2n + 1)` and `h1` the exact matrix of `x^4`
//!   (bandwidth 4, odd bands vanishing by parity), for `V = x^2 + lambda x^4`.

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::util::norm_inf;
use serde::{Deserialize, Serialize};

/// Potential family `V(x; lambda) = V_base(x) + lambda * V_coupling(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `V = x^2 + lambda * x^4`.
    Quartic,
    /// Explicit monomial coefficients, index = power: `base[m]` multiplies `x^m`.
    Polynomial {
        #[serde(default)]
        base: Vec<f64>,
        #[serde(default)]
        coupling: Vec<f64>,
    },
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl PotentialSpec {
    /// Validate confinement of the lambda-independent part. A zero base is
    /// allowed: on a finite Dirichlet grid the box itself binds every state,
    /// and the free-particle stencil is a useful calibration case.
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Quartic => Ok(()),
            PotentialSpec::Polynomial { base, coupling } => {
                for (name, poly) in [("base", base), ("coupling", coupling)] {
                    if poly.iter().any(|c| !c.is_finite()) {
                        return Err(Error::InvalidModel(format!(
                            "{name} polynomial has a non-finite coefficient"
                        )));
                    }
                }
                match base.iter().rposition(|&c| c != 0.0) {
                    None => Ok(()), // identically zero
                    Some(deg) if deg % 2 == 0 && base[deg] > 0.0 => Ok(()),
                    Some(deg) => Err(Error::InvalidModel(format!(
                        "base potential is not confining: leading term {}*x^{}",
                        base[deg], deg
                    ))),
                }
            }
        }
    }

    /// Lambda-independent part `V_base(x)`.
    pub fn base_at(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Quartic => x * x,
            PotentialSpec::Polynomial { base, .. } => poly_eval(base, x),
        }
    }

    /// Lambda-coefficient `V_coupling(x)`.
    pub fn coupling_at(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Quartic => x * x * x * x,
            PotentialSpec::Polynomial { coupling, .. } => poly_eval(coupling, x),
        }
    }
}

/// Uniform grid on `[x_min, x_max]` with `n_points` interior points; the
/// endpoints carry Dirichlet zeros and are not represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl LatticeSpec {
    /// Conventional domain wide enough for low quartic/oscillator states.
    pub const DEFAULT_X_MIN: f64 = -8.0;
    pub const DEFAULT_X_MAX: f64 = 8.0;

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_min >= self.x_max {
            return Err(Error::InvalidModel(format!(
                "lattice domain [{}, {}] is not a finite interval",
                self.x_min, self.x_max
            )));
        }
        if self.n_points == 0 {
            return Err(Error::InvalidModel("lattice needs at least one interior point".into()));
        }
        Ok(())
    }

    /// Grid step `h = (x_max - x_min) / (n_points + 1)`.
    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points + 1) as f64
    }

    /// Interior point `x_i = x_min + (i + 1) h`, `i = 0..n_points`.
    pub fn point(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.step()
    }
}

/// Truncated harmonic-oscillator basis `{|0>, ..., |n_basis - 1>}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub n_basis: usize,
}

impl BasisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_basis < 2 {
            return Err(Error::InvalidModel(format!(
                "oscillator basis needs n_basis >= 2, got {}",
                self.n_basis
            )));
        }
        Ok(())
    }
}

/// Which basis the split's matrices live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    /// The matrices are the operator family itself, not a finite section of
    /// something larger — no truncation diagnostics apply.
    Exact,
    Lattice(LatticeSpec),
    Basis(BasisSpec),
}

/// Relative tail weight above which a truncated-basis vector is suspect.
const TAIL_WEIGHT_BOUND: f64 = 1e-8;

/// A fixed decomposition `H(lambda) = h0 + (lambda - lambda_ref) h1 + constant`.
///
/// The decomposition is exact by construction: every operation that rewrites
/// it ([`resplit`], [`crate::adaptive::apply_policy`]) preserves
/// [`assemble_at`](Self::assemble_at) identically at every coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SplitDoc", try_from = "SplitDoc")]
pub struct HamiltonianSplit {
    h0: BandMatrix,
    h1: BandMatrix,
    lambda_ref: f64,
    constant: Option<BandMatrix>,
    representation: Representation,
}

impl HamiltonianSplit {
    /// Assemble a split from already-built operators.
    pub fn from_operators(
        h0: BandMatrix,
        h1: BandMatrix,
        lambda_ref: f64,
        representation: Representation,
    ) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(Error::DimensionMismatch(format!(
                "h0 is {}-dim but h1 is {}-dim",
                h0.dim(),
                h1.dim()
            )));
        }
        if !lambda_ref.is_finite() {
            return Err(Error::InvalidModel("lambda_ref must be finite".into()));
        }
        Ok(Self { h0, h1, lambda_ref, constant: None, representation })
    }

    pub fn h0(&self) -> &BandMatrix {
        &self.h0
    }

    pub fn h1(&self) -> &BandMatrix {
        &self.h1
    }

    pub fn lambda_ref(&self) -> f64 {
        self.lambda_ref
    }

    /// Constant perturbation remainder, present only after band truncation.
    pub fn constant(&self) -> Option<&BandMatrix> {
        self.constant.as_ref()
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub(crate) fn with_parts(
        h0: BandMatrix,
        h1: BandMatrix,
        lambda_ref: f64,
        constant: Option<BandMatrix>,
        representation: Representation,
    ) -> Self {
        Self { h0, h1, lambda_ref, constant, representation }
    }

    /// The full operator at coupling `lambda`:
    /// `h0 + (lambda - lambda_ref) h1 + constant`.
    pub fn assemble_at(&self, lambda: f64) -> BandMatrix {
        let mut m = self
            .h0
            .add_scaled(&self.h1, lambda - self.lambda_ref)
            .expect("split invariant: equal dims");
        if let Some(c) = &self.constant {
            m = m.add_scaled(c, 1.0).expect("split invariant: equal dims");
        }
        m
    }

    /// Move the reference coupling: `h0' = h0 + (lambda0 - lambda_ref) h1`,
    /// `h1' = h1`. An exact identity — `assemble_at` is unchanged at every
    /// coupling — but the expansion point, and with it the whole series, moves.
    pub fn resplit(&self, lambda0: f64) -> Self {
        let h0 = self
            .h0
            .add_scaled(&self.h1, lambda0 - self.lambda_ref)
            .expect("split invariant: equal dims");
        Self {
            h0,
            h1: self.h1.clone(),
            lambda_ref: lambda0,
            constant: self.constant.clone(),
            representation: self.representation.clone(),
        }
    }

    /// Reduce to a constant-free split suitable for the power-series hierarchy,
    /// together with the effective expansion variable for `lambda_target`.
    ///
    /// Without a constant term this is the identity and the variable is
    /// `lambda_target - lambda_ref`. With one, the whole perturbation at the
    /// target, `C + (lambda_target - lambda_ref) h1`, becomes the effective
    /// first-order operator and the physical point sits at variable 1: the
    /// series then measures how well the truncated `h0` alone explains the
    /// target operator.
    pub fn fold_for_target(&self, lambda_target: f64) -> (Self, f64) {
        match &self.constant {
            None => (self.clone(), lambda_target - self.lambda_ref),
            Some(c) => {
                let mu = lambda_target - self.lambda_ref;
                let h1_eff = c.add_scaled(&self.h1, mu).expect("split invariant: equal dims");
                (
                    Self {
                        h0: self.h0.clone(),
                        h1: h1_eff,
                        lambda_ref: 0.0,
                        constant: None,
                        representation: self.representation.clone(),
                    },
                    1.0,
                )
            }
        }
    }

    /// Warn (once per call site context) when a vector leans on the last basis
    /// state: the truncated matrix problem is then a poor stand-in for the
    /// operator it discretizes. Returns the relative tail weight if excessive.
    /// Only meaningful for truncated-basis splits; exact families and lattices
    /// (whose error lives in the grid spacing, not the tail) are never flagged.
    pub fn check_tail_weight(&self, v: &[f64], context: &str) -> Option<f64> {
        let Representation::Basis(_) = self.representation else {
            return None;
        };
        let scale = norm_inf(v);
        if scale == 0.0 || v.is_empty() {
            return None;
        }
        let tail = v[v.len() - 1].abs() / scale;
        if tail > TAIL_WEIGHT_BOUND {
            log::warn!(
                "{context}: relative weight {tail:.2e} on the last basis state exceeds {TAIL_WEIGHT_BOUND:.0e}; grow n_basis"
            );
            Some(tail)
        } else {
            None
        }
    }

    /// Two-level toy family `h0 = diag(0, 2)`, `h1` the symmetric off-diagonal
    /// coupling: `E_-(lambda) = 1 - sqrt(1 + lambda^2)` in closed form.
    pub fn toy_two_level() -> Self {
        let h0 = BandMatrix::from_diagonal(&[0.0, 2.0]).expect("static shape");
        let mut h1 = BandMatrix::zeros(2, 1).expect("static shape");
        h1.set(1, 0, 1.0);
        Self { h0, h1, lambda_ref: 0.0, constant: None, representation: Representation::Exact }
    }

    /// Deliberately quasi-degenerate fixture: `h0 = diag(1, 1 + 2e-12, 3)` has
    /// a gap of 1e-12 of its spectral span, far inside the refusal threshold.
    pub fn toy_quasi_degenerate() -> Self {
        let h0 = BandMatrix::from_diagonal(&[1.0, 1.0 + 2e-12, 3.0]).expect("static shape");
        let mut h1 = BandMatrix::zeros(3, 1).expect("static shape");
        h1.set(1, 0, 1.0);
        h1.set(2, 1, 1.0);
        Self { h0, h1, lambda_ref: 0.0, constant: None, representation: Representation::Exact }
    }
}

/// Central-difference discretization of
/// `-d^2/dx^2 + V_base(x) + lambda V_coupling(x)` on the interior grid.
pub fn build_lattice_split(
    lattice: &LatticeSpec,
    potential: &PotentialSpec,
) -> Result<HamiltonianSplit> {
    lattice.validate()?;
    potential.validate()?;
    let n = lattice.n_points;
    let h = lattice.step();
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidModel(format!("grid step {h} is not positive")));
    }
    let inv_h2 = 1.0 / (h * h);
    let w = if n > 1 { 1 } else { 0 };
    let mut h0 = BandMatrix::zeros(n, w)?;
    let mut h1 = BandMatrix::zeros(n, 0)?;
    for i in 0..n {
        let x = lattice.point(i);
        h0.set(i, i, 2.0 * inv_h2 + potential.base_at(x));
        h1.set(i, i, potential.coupling_at(x));
    }
    for i in 0..n.saturating_sub(1) {
        h0.set(i + 1, i, -inv_h2);
    }
    HamiltonianSplit::from_operators(h0, h1, 0.0, Representation::Lattice(*lattice))
}

/// Exact matrix element `<n+d | x^4 | n>` in the oscillator basis of
/// `-d^2/dx^2 + x^2` (ladder convention `X_{n,n+1} = sqrt((n+1)/2)`).
/// Only `d = 0, 2, 4` are nonzero.
fn x4_element(n: usize, d: usize) -> f64 {
    let nf = n as f64;
    match d {
        0 => 1.5 * nf * nf + 1.5 * nf + 0.75,
        2 => (nf + 1.5) * ((nf + 1.0) * (nf + 2.0)).sqrt(),
        4 => ((nf + 1.0) * (nf + 2.0) * (nf + 3.0) * (nf + 4.0)).sqrt() * 0.25,
        _ => 0.0,
    }
}

/// Oscillator-basis split for `V = x^2 + lambda x^4`: `h0 = diag(2n + 1)`
/// exactly, `h1` the exact truncated matrix of `x^4`.
pub fn build_oscillator_split(
    basis: &BasisSpec,
    potential: &PotentialSpec,
) -> Result<HamiltonianSplit> {
    basis.validate()?;
    potential.validate()?;
    if !matches!(potential, PotentialSpec::Quartic) {
        return Err(Error::InvalidModel(
            "the oscillator basis is built for the quartic potential x^2 + lambda x^4".into(),
        ));
    }
    let n = basis.n_basis;
    let w = 4.min(n - 1);
    let mut h0 = BandMatrix::zeros(n, 0)?;
    let mut h1 = BandMatrix::zeros(n, w)?;
    for i in 0..n {
        h0.set(i, i, (2 * i + 1) as f64);
        h1.set(i, i, x4_element(i, 0));
    }
    for d in [2usize, 4] {
        if d > w {
            continue;
        }
        for i in 0..n - d {
            h1.set(i + d, i, x4_element(i, d));
        }
    }
    HamiltonianSplit::from_operators(h0, h1, 0.0, Representation::Basis(*basis))
}

/// Serialized form of a split: bands are diagonal-first, each matrix carries
/// its own band count, and `bandwidth` records the wider of the two.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitDoc {
    dim: usize,
    bandwidth: usize,
    h0_bands: Vec<Vec<f64>>,
    h1_bands: Vec<Vec<f64>>,
    lambda_ref: f64,
    representation: Representation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant_bands: Option<Vec<Vec<f64>>>,
}

impl From<HamiltonianSplit> for SplitDoc {
    fn from(s: HamiltonianSplit) -> Self {
        SplitDoc {
            dim: s.h0.dim(),
            bandwidth: s.h0.bandwidth().max(s.h1.bandwidth()),
            h0_bands: s.h0.bands().to_vec(),
            h1_bands: s.h1.bands().to_vec(),
            lambda_ref: s.lambda_ref,
            representation: s.representation,
            constant_bands: s.constant.map(|c| c.bands().to_vec()),
        }
    }
}

impl TryFrom<SplitDoc> for HamiltonianSplit {
    type Error = Error;

    fn try_from(doc: SplitDoc) -> Result<Self> {
        let h0 = BandMatrix::from_bands(doc.dim, doc.h0_bands)?;
        let h1 = BandMatrix::from_bands(doc.dim, doc.h1_bands)?;
        if h0.bandwidth().max(h1.bandwidth()) != doc.bandwidth {
            return Err(Error::InvalidShape(format!(
                "declared bandwidth {} does not match the stored bands",
                doc.bandwidth
            )));
        }
        let constant = doc
            .constant_bands
            .map(|b| BandMatrix::from_bands(doc.dim, b))
            .transpose()?;
        let mut split = HamiltonianSplit::from_operators(h0, h1, doc.lambda_ref, doc.representation)?;
        split.constant = constant;
        Ok(split)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle_stencil() {
        // N = 3, h = 1, V = 0: the classic (-1, 2, -1) second-difference rows.
        let lattice = LatticeSpec { x_min: -2.0, x_max: 2.0, n_points: 3 };
        let v0 = PotentialSpec::Polynomial { base: vec![], coupling: vec![] };
        let s = build_lattice_split(&lattice, &v0).unwrap();
        assert_eq!(s.h0().get(0, 0), 2.0);
        assert_eq!(s.h0().get(1, 1), 2.0);
        assert_eq!(s.h0().get(1, 0), -1.0);
        assert_eq!(s.h0().get(2, 0), 0.0);
        assert_eq!(s.h1().max_abs(), 0.0);
    }

    #[test]
    fn quartic_lattice_diagonal() {
        // Grid {-1, 0, 1}: base x^2 adds {1, 0, 1}, coupling x^4 is {1, 0, 1}.
        let lattice = LatticeSpec { x_min: -2.0, x_max: 2.0, n_points: 3 };
        let s = build_lattice_split(&lattice, &PotentialSpec::Quartic).unwrap();
        assert_eq!(s.h0().get(0, 0), 3.0);
        assert_eq!(s.h0().get(1, 1), 2.0);
        assert_eq!(s.h0().get(2, 2), 3.0);
        assert_eq!(s.h1().get(0, 0), 1.0);
        assert_eq!(s.h1().get(1, 1), 0.0);
        assert_eq!(s.h1().get(2, 2), 1.0);
    }

    #[test]
    fn oscillator_split_entries() {
        let s = build_oscillator_split(&BasisSpec { n_basis: 8 }, &PotentialSpec::Quartic).unwrap();
        for i in 0..8 {
            assert_eq!(s.h0().get(i, i), (2 * i + 1) as f64);
        }
        assert_eq!(s.h1().get(0, 0), 0.75, "<0|x^4|0> = 3/4");
        assert_eq!(s.h1().bandwidth(), 4);
        // Odd bands vanish by parity.
        for i in 0..7 {
            assert_eq!(s.h1().get(i + 1, i), 0.0);
        }
        for i in 0..5 {
            assert_eq!(s.h1().get(i + 3, i), 0.0);
        }
        // <n|x^2|n> = (2n + 1)/2 feeds <0|x^4|0> through the square; check the
        // first super-super-diagonal element against the ladder product.
        let want = 1.5 * (2.0f64).sqrt(); // (0 + 3/2) * sqrt(1 * 2)
        assert!((s.h1().get(2, 0) - want).abs() < 1e-15);
    }

    #[test]
    fn oscillator_matches_dense_power_oracle() {
        // Independent route: tridiagonal X in a larger dense basis, squared
        // twice; the leading block must agree entrywise.
        let n = 12usize;
        let m = n + 4;
        let mut x = vec![vec![0.0; m]; m];
        for i in 0..m - 1 {
            let v = ((i + 1) as f64 / 2.0).sqrt();
            x[i][i + 1] = v;
            x[i + 1][i] = v;
        }
        let matmul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            let mut c = vec![vec![0.0; m]; m];
            for i in 0..m {
                for k in 0..m {
                    if a[i][k] != 0.0 {
                        for j in 0..m {
                            c[i][j] += a[i][k] * b[k][j];
                        }
                    }
                }
            }
            c
        };
        let x2 = matmul(&x, &x);
        let x4 = matmul(&x2, &x2);
        let s = build_oscillator_split(&BasisSpec { n_basis: n }, &PotentialSpec::Quartic).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (s.h1().get(i, j) - x4[i][j]).abs() < 1e-12,
                    "x^4 element ({i},{j}): {} vs oracle {}",
                    s.h1().get(i, j),
                    x4[i][j]
                );
            }
        }
    }

    #[test]
    fn oscillator_requires_quartic() {
        let p = PotentialSpec::Polynomial { base: vec![0.0, 0.0, 1.0], coupling: vec![] };
        assert!(build_oscillator_split(&BasisSpec { n_basis: 4 }, &p).is_err());
    }

    #[test]
    fn confinement_validation() {
        let bad_sign = PotentialSpec::Polynomial { base: vec![0.0, 0.0, -1.0], coupling: vec![] };
        assert!(bad_sign.validate().is_err());
        let odd = PotentialSpec::Polynomial { base: vec![0.0, 0.0, 0.0, 2.0], coupling: vec![] };
        assert!(odd.validate().is_err());
        let ok = PotentialSpec::Polynomial { base: vec![1.0, 0.0, 2.0], coupling: vec![0.0, 1.0] };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn resplit_is_exact() {
        let s = HamiltonianSplit::toy_two_level();
        let r = s.resplit(0.3);
        assert_eq!(r.lambda_ref(), 0.3);
        for lambda in [-0.7, 0.0, 0.3, 1.9] {
            let a = s.assemble_at(lambda);
            let b = r.assemble_at(lambda);
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (a.get(i, j) - b.get(i, j)).abs() < 1e-12,
                        "lambda {lambda}, entry ({i},{j})"
                    );
                }
            }
        }
        // Spot value: h0' = diag(0, 2) + 0.3 * offdiag(1).
        assert_eq!(r.h0().get(1, 0), 0.3);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let lattice = LatticeSpec { x_min: -8.0, x_max: 8.0, n_points: 5 };
        let s = build_lattice_split(&lattice, &PotentialSpec::Quartic).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: HamiltonianSplit = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back, "round trip must be exact within one build");
        // Schema spot checks.
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["dim"], 5);
        assert_eq!(doc["bandwidth"], 1);
        assert!(doc["h0_bands"].is_array());
        assert_eq!(doc["representation"]["kind"], "lattice");
    }

    #[test]
    fn fold_identity_without_constant() {
        let s = HamiltonianSplit::toy_two_level();
        let (f, mu) = s.fold_for_target(0.4);
        assert_eq!(mu, 0.4);
        assert_eq!(f, s);
    }
}
