//! Banded factorizations behind the eigensolver and the correction hierarchy.
//!
//! Two factorizations live here, with deliberately different contracts:
//!
//! * [`inertia_ldlt`] — unpivoted band LDL^T of `H - shift*I` used only for its
//!   pivot signs. Sylvester's law of inertia makes the negative-pivot count
//!   equal the number of eigenvalues strictly below the shift. Pivots are
//!   clamped away from exact zero so the count stays well defined when the
//!   shift hits an eigenvalue of a leading submatrix; only a non-finite
//!   (overflowed) pivot aborts, and the caller retries with a perturbed shift.
//!
//! * [`BandLu`] — band LU with partial pivoting among the band rows, with an
//!   optional symmetric dense border (one extra row and column). The border
//!   row is always an elimination *target*, never a pivot row, so the band
//!   structure of the factors survives; the price is possible growth in the
//!   border row when a pivot had to be boosted, which a step of iterative
//!   refinement against the original matrix repairs. This is what lets the
//!   singular correction equations be solved through one reusable band
//!   factorization instead of a dense one.

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::util::{axpy, dot, norm2, probe_vector, scale_in_place};

/// Pivot clamp for the inertia count; far below any plausible matrix scale.
const INERTIA_PIVOT_GUARD: f64 = 1e-300;

/// Count of eigenvalues of `h - shift*I` that are strictly negative, i.e. the
/// number of eigenvalues of `h` strictly below `shift`. O(dim * bandwidth^2).
pub(crate) fn inertia_ldlt(h: &BandMatrix, shift: f64) -> Result<usize> {
    let n = h.dim();
    let w = h.bandwidth();
    // Lower-band working copy of h - shift*I, diagonal-first layout.
    let mut work: Vec<Vec<f64>> = h.bands().to_vec();
    for v in work[0].iter_mut() {
        *v -= shift;
    }
    let mut negative = 0usize;
    for j in 0..n {
        let mut d = work[0][j];
        if !d.is_finite() {
            return Err(Error::ExactSingularPivot { column: j });
        }
        if d == 0.0 {
            d = INERTIA_PIVOT_GUARD;
        } else if d.abs() < INERTIA_PIVOT_GUARD {
            d = INERTIA_PIVOT_GUARD.copysign(d);
        }
        if d < 0.0 {
            negative += 1;
        }
        // Rank-one update of the trailing block inside the band.
        let hi = (j + w).min(n - 1);
        for i in j + 1..=hi {
            let lij_d = work[i - j][j]; // L(i,j) * d
            if lij_d == 0.0 {
                continue;
            }
            for k in i..=hi {
                work[k - i][i] -= lij_d * work[k - j][j] / d;
            }
        }
    }
    Ok(negative)
}

/// Inertia count with the documented deterministic retry: on an overflowed
/// pivot the shift is nudged by `delta * max(|shift|, scale)` and retried.
pub(crate) fn inertia_with_retry(
    h: &BandMatrix,
    shift: f64,
    delta: f64,
    scale: f64,
) -> Result<usize> {
    let mut s = shift;
    let mut last = None;
    for _ in 0..4 {
        match inertia_ldlt(h, s) {
            Ok(count) => return Ok(count),
            Err(e) => {
                last = Some(e);
                s += delta * s.abs().max(scale).max(f64::MIN_POSITIVE);
            }
        }
    }
    Err(last.expect("retry loop ran at least once"))
}

struct BorderFactor {
    /// Border column entries after elimination: the last column of U.
    bcol: Vec<f64>,
    /// Multipliers that eliminated the border row, one per column.
    bmult: Vec<f64>,
    /// Final pivot `U(n, n)` of the bordered system.
    corner: f64,
    /// Original (unscaled) border vector, for residuals.
    x: Vec<f64>,
    /// Scale applied symmetrically to the border row and column.
    scale: f64,
}

/// Band LU with partial pivoting of `h - shift*I`, optionally bordered by a
/// dense symmetric row/column. Factors once, solves many times in O(dim * bw).
pub(crate) struct BandLu {
    n: usize,
    w: usize,
    /// Column-major band slots: entry (i, j) at `ab[j * stride + (i - j + 2w)]`,
    /// valid for `j - 2w <= i <= j + w` (U fill-in above, L multipliers below).
    ab: Vec<f64>,
    stride: usize,
    pivots: Vec<u32>,
    border: Option<BorderFactor>,
    /// Shifted matrix kept for residual computation (refinement, estimates).
    a_shifted: BandMatrix,
    /// Infinity norm of the (bordered) system, for condition estimates.
    norm_m: f64,
    /// Pivot boost threshold actually used during factorization.
    boost: f64,
}

impl BandLu {
    /// Factor `h - shift*I` alone.
    pub fn factor(h: &BandMatrix, shift: f64) -> Self {
        Self::factor_impl(h, shift, None)
    }

    /// Factor the bordered system
    /// `[[h - shift*I, s*x], [s*x^T, 0]]` with `s = max(norm_inf, 1)` chosen so
    /// the border competes on the same scale as the band. `x` must be unit norm.
    pub fn factor_bordered(h: &BandMatrix, shift: f64, x: &[f64]) -> Self {
        assert_eq!(x.len(), h.dim(), "border vector dimension mismatch");
        Self::factor_impl(h, shift, Some(x))
    }

    fn factor_impl(h: &BandMatrix, shift: f64, border_x: Option<&[f64]>) -> Self {
        let n = h.dim();
        let w = h.bandwidth();
        let stride = 3 * w + 1;

        let mut a_shifted = h.clone();
        {
            // Safe: band 0 is the diagonal.
            let diag = &mut a_shifted_bands_mut(&mut a_shifted)[0];
            for v in diag.iter_mut() {
                *v -= shift;
            }
        }
        let norm_a = a_shifted.norm_inf();
        let border_scale = norm_a.max(1.0);
        let norm_m = match border_x {
            Some(_) => norm_a + border_scale, // coarse but sufficient for estimates
            None => norm_a,
        };
        let boost = f64::EPSILON * norm_a.max(border_scale).max(f64::MIN_POSITIVE);

        // Load band into pivoting storage.
        let mut ab = vec![0.0; n * stride];
        for j in 0..n {
            let lo = j.saturating_sub(w);
            let hi = (j + w).min(n - 1);
            for i in lo..=hi {
                ab[j * stride + (i + 2 * w - j)] = a_shifted.get(i, j);
            }
        }
        let mut bcol: Vec<f64>;
        let mut brow: Vec<f64>;
        let mut brow_corner = 0.0;
        if let Some(x) = border_x {
            bcol = x.iter().map(|v| v * border_scale).collect();
            brow = x.iter().map(|v| v * border_scale).collect();
        } else {
            bcol = Vec::new();
            brow = Vec::new();
        }
        let mut bmult = vec![0.0; if border_x.is_some() { n } else { 0 }];

        let mut pivots = vec![0u32; n];
        let at = |j: usize, i: usize| j * stride + (i + 2 * w - j);

        for j in 0..n {
            // Partial pivot among band rows j..=j+w only; the border row is
            // never promoted, which is what keeps U banded.
            let hi = (j + w).min(n - 1);
            let mut p = j;
            let mut pmax = ab[at(j, j)].abs();
            for i in j + 1..=hi {
                let v = ab[at(j, i)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            pivots[j] = p as u32;
            if p != j {
                let chi = (j + 2 * w).min(n - 1);
                for c in j..=chi {
                    ab.swap(at(c, j), at(c, p));
                }
                if border_x.is_some() {
                    bcol.swap(j, p);
                }
            }
            let mut piv = ab[at(j, j)];
            if piv.abs() < boost {
                // Deterministic boost keeps elimination finite; refinement
                // against the original matrix repairs the perturbation.
                piv = if piv == 0.0 { boost } else { boost.copysign(piv) };
                ab[at(j, j)] = piv;
            }
            let chi = (j + 2 * w).min(n - 1);
            for i in j + 1..=hi {
                let m = ab[at(j, i)] / piv;
                ab[at(j, i)] = m;
                if m != 0.0 {
                    for c in j + 1..=chi {
                        let u = ab[at(c, j)];
                        if u != 0.0 {
                            ab[at(c, i)] -= m * u;
                        }
                    }
                    if border_x.is_some() {
                        bcol[i] -= m * bcol[j];
                    }
                }
            }
            if border_x.is_some() {
                let bm = brow[j] / piv;
                bmult[j] = bm;
                if bm != 0.0 {
                    for c in j + 1..=chi {
                        brow[c] -= bm * ab[at(c, j)];
                    }
                    brow_corner -= bm * bcol[j];
                }
            }
        }

        let border = border_x.map(|x| {
            let mut corner = brow_corner;
            if corner.abs() < boost {
                corner = if corner == 0.0 { boost } else { boost.copysign(corner) };
            }
            BorderFactor {
                bcol,
                bmult,
                corner,
                x: x.to_vec(),
                scale: border_scale,
            }
        });

        BandLu {
            n,
            w,
            ab,
            stride,
            pivots,
            border,
            a_shifted,
            norm_m,
            boost,
        }
    }

    /// Raw triangular solve (no refinement). For the bordered case `rhs` has
    /// length `n + 1` (last entry is the constraint row); the returned vector
    /// matches. The border multiplier comes back in the *scaled* basis.
    fn solve_raw(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, w, stride) = (self.n, self.w, self.stride);
        let at = |j: usize, i: usize| j * stride + (i + 2 * w - j);
        let bordered = self.border.is_some();
        debug_assert_eq!(rhs.len(), n + usize::from(bordered));

        let mut f = rhs.to_vec();
        for j in 0..n {
            let p = self.pivots[j] as usize;
            if p != j {
                f.swap(j, p);
            }
            let fj = f[j];
            if fj != 0.0 {
                let hi = (j + w).min(n - 1);
                for i in j + 1..=hi {
                    f[i] -= self.ab[at(j, i)] * fj;
                }
                if let Some(b) = &self.border {
                    f[n] -= b.bmult[j] * fj;
                }
            }
        }
        let mut z = vec![0.0; f.len()];
        let mu_scaled = if let Some(b) = &self.border {
            let m = f[n] / b.corner;
            z[n] = m;
            m
        } else {
            0.0
        };
        for i in (0..n).rev() {
            let mut s = f[i];
            let chi = (i + 2 * w).min(n - 1);
            for c in i + 1..=chi {
                let u = self.ab[at(c, i)];
                if u != 0.0 {
                    s -= u * z[c];
                }
            }
            if let Some(b) = &self.border {
                s -= b.bcol[i] * mu_scaled;
            }
            let mut d = self.ab[at(i, i)];
            if d == 0.0 {
                d = self.boost;
            }
            z[i] = s / d;
        }
        z
    }

    /// Apply the original (shifted, bordered) matrix to `z`.
    fn apply(&self, z: &[f64]) -> Vec<f64> {
        match &self.border {
            None => self.a_shifted.matvec(z),
            Some(b) => {
                let (y, mu) = (&z[..self.n], z[self.n]);
                let mut out = self.a_shifted.matvec(y);
                for i in 0..self.n {
                    out[i] += b.scale * b.x[i] * mu;
                }
                out.push(b.scale * dot(&b.x, y));
                out
            }
        }
    }

    /// Solve `(h - shift*I) z = rhs` without refinement. Tiny pivots were
    /// boosted, so a near-singular system amplifies along the near-null
    /// direction — exactly what inverse iteration wants.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert!(self.border.is_none(), "use solve_bordered for bordered factors");
        self.solve_raw(rhs)
    }

    /// Solve the bordered system
    /// `[[A, x], [x^T, 0]] [y; mu] = [f; g]` with `A = h - shift*I`.
    /// Runs up to two steps of iterative refinement against the original
    /// matrix, which restores accuracy lost to boosted pivots or border-row
    /// growth. Returns `(y, mu)` in the unscaled-border convention.
    pub fn solve_bordered(&self, f: &[f64], g: f64) -> (Vec<f64>, f64) {
        let b = self.border.as_ref().expect("factor_bordered required");
        let mut rhs = f.to_vec();
        // The constraint row is scaled along with the border column.
        rhs.push(g * b.scale);
        let mut z = self.solve_raw(&rhs);
        let rhs_scale = norm2(&rhs).max(f64::MIN_POSITIVE);
        for _ in 0..2 {
            let mz = self.apply(&z);
            let mut r = rhs.clone();
            axpy(&mut r, -1.0, &mz);
            let znorm = norm2(&z);
            if norm2(&r) <= 1e-14 * (self.norm_m * znorm + rhs_scale) {
                break;
            }
            let d = self.solve_raw(&r);
            axpy(&mut z, 1.0, &d);
        }
        let mu_scaled = z.pop().expect("bordered solution has n+1 entries");
        (z, mu_scaled * b.scale)
    }

    /// Order-of-magnitude estimate of the condition number via a few steps of
    /// inverse power iteration on the factored system (the matrix is
    /// symmetric, so the dominant eigenvalue of the inverse is 1/|lambda|_min).
    pub fn condition_estimate(&self) -> f64 {
        let m = self.n + usize::from(self.border.is_some());
        let mut v = probe_vector(m);
        let mut inv_norm = 0.0;
        for _ in 0..4 {
            let mut u = self.solve_raw(&v);
            if self.border.is_some() {
                // One refinement pass so a boosted factorization does not
                // misreport the conditioning of the true bordered matrix.
                let mu = self.apply(&u);
                let mut r = v.clone();
                axpy(&mut r, -1.0, &mu);
                let d = self.solve_raw(&r);
                axpy(&mut u, 1.0, &d);
            }
            inv_norm = norm2(&u);
            if !inv_norm.is_finite() || inv_norm == 0.0 {
                return f64::INFINITY;
            }
            scale_in_place(&mut u, 1.0 / inv_norm);
            v = u;
        }
        self.norm_m * inv_norm
    }
}

/// Borrow the bands of a matrix mutably. Lives here so `BandMatrix` does not
/// have to expose mutable band access in its public API.
fn a_shifted_bands_mut(m: &mut BandMatrix) -> &mut [Vec<f64>] {
    // SAFETY-free accessor: rebuild via from_bands would copy; instead keep a
    // crate-private hook.
    m.bands_mut()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::BandMatrix;

    /// Dense LU solve with partial pivoting, as an independent reference.
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for j in 0..n {
            let p = (j..n).max_by(|&r, &s| m[r][j].abs().total_cmp(&m[s][j].abs())).unwrap();
            m.swap(j, p);
            x.swap(j, p);
            for i in j + 1..n {
                let f = m[i][j] / m[j][j];
                for c in j..n {
                    m[i][c] -= f * m[j][c];
                }
                x[i] -= f * x[j];
            }
        }
        for i in (0..n).rev() {
            for c in i + 1..n {
                x[i] -= m[i][c] * x[c];
            }
            x[i] /= m[i][i];
        }
        x
    }

    fn test_band(dim: usize, w: usize, seed: u64) -> BandMatrix {
        // Deterministic pseudo-entries; diagonally dominant enough to be safe.
        let mut m = BandMatrix::zeros(dim, w).unwrap();
        for d in 0..=w {
            for i in 0..dim - d {
                let t = (seed as f64 + (d * dim + i) as f64 * 0.7311).sin();
                if d == 0 {
                    m.set(i, i, 3.0 + t);
                } else {
                    m.set(i + d, i, t);
                }
            }
        }
        m
    }

    #[test]
    fn inertia_diagonal_cases() {
        let h = BandMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(inertia_ldlt(&h, 2.5).unwrap(), 2);
        assert_eq!(inertia_ldlt(&h, 0.5).unwrap(), 0);
        assert_eq!(inertia_ldlt(&h, 100.0).unwrap(), 3);
    }

    #[test]
    fn inertia_tridiagonal_at_exact_eigenvalue() {
        // tridiag(-1, 2, -1), dim 3: eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2).
        let mut h = BandMatrix::zeros(3, 1).unwrap();
        for i in 0..3 {
            h.set(i, i, 2.0);
        }
        h.set(1, 0, -1.0);
        h.set(2, 1, -1.0);
        // Shift exactly on the middle eigenvalue: strictly-below count is 1,
        // and the pivot clamp must keep the sweep finite.
        assert_eq!(inertia_ldlt(&h, 2.0).unwrap(), 1);
        assert_eq!(inertia_ldlt(&h, 2.0 - std::f64::consts::SQRT_2 + 1e-9).unwrap(), 1);
        assert_eq!(inertia_ldlt(&h, 4.0).unwrap(), 3);
    }

    #[test]
    fn band_solve_matches_dense() {
        for &(dim, w, seed) in &[(7usize, 1usize, 1u64), (9, 3, 2), (5, 0, 3), (12, 4, 4)] {
            let h = test_band(dim, w, seed);
            let lu = BandLu::factor(&h, 0.37);
            let rhs: Vec<f64> = (0..dim).map(|i| ((i + 1) as f64 * 1.3).cos()).collect();
            let got = lu.solve(&rhs);
            let mut dense = h.to_dense();
            for i in 0..dim {
                dense[i][i] -= 0.37;
            }
            let want = dense_solve(&dense, &rhs);
            for i in 0..dim {
                assert!(
                    (got[i] - want[i]).abs() < 1e-10 * (1.0 + want[i].abs()),
                    "dim {dim} w {w}: z[{i}] = {} vs {}",
                    got[i],
                    want[i]
                );
            }
        }
    }

    #[test]
    fn bordered_solve_on_singular_diagonal() {
        // A = diag(0, 2) (singular, null vector e0), border x = e0.
        // [[A, x], [x^T, 0]] [y; mu] = [(0, -1); 0] has y = (0, -0.5), mu = 0.
        let h = BandMatrix::from_diagonal(&[0.0, 2.0]).unwrap();
        let lu = BandLu::factor_bordered(&h, 0.0, &[1.0, 0.0]);
        let (y, mu) = lu.solve_bordered(&[0.0, -1.0], 0.0);
        assert!(y[0].abs() < 1e-12, "y0 = {}", y[0]);
        assert!((y[1] + 0.5).abs() < 1e-12, "y1 = {}", y[1]);
        assert!(mu.abs() < 1e-12, "mu = {mu}");
    }

    #[test]
    fn bordered_solve_nearly_singular_band() {
        // Shift a well-behaved band matrix close to an eigenvalue simulated by
        // deflating: use A - lambda*I with lambda chosen as the Rayleigh
        // quotient of an approximate eigenvector; the bordered system must stay
        // solvable and satisfy both block equations to near machine accuracy.
        let h = test_band(10, 2, 9);
        // Crude power iteration for the dominant eigenpair.
        let mut v = vec![1.0; 10];
        for _ in 0..300 {
            v = h.matvec(&v);
            let n = norm2(&v);
            scale_in_place(&mut v, 1.0 / n);
        }
        let lam = dot(&v, &h.matvec(&v));
        let lu = BandLu::factor_bordered(&h, lam, &v);
        // Right-hand side orthogonal to v.
        let mut f: Vec<f64> = (0..10).map(|i| ((i * i + 1) as f64).sin()).collect();
        let c = dot(&f, &v);
        axpy(&mut f, -c, &v);
        let (y, mu) = lu.solve_bordered(&f, 0.0);
        // Check A y + mu v = f and v^T y = 0 directly.
        let mut res = h.matvec(&y);
        for i in 0..10 {
            res[i] -= lam * y[i];
            res[i] += mu * v[i];
            res[i] -= f[i];
        }
        let fnorm = norm2(&f);
        assert!(norm2(&res) < 1e-11 * fnorm.max(1.0), "residual {}", norm2(&res));
        assert!(dot(&v, &y).abs() < 1e-11 * norm2(&y).max(1.0));
    }

    #[test]
    fn condition_estimate_orders_of_magnitude() {
        let h = test_band(8, 1, 5);
        let lu = BandLu::factor(&h, 0.0);
        let c = lu.condition_estimate();
        assert!(c >= 1.0 && c < 1e4, "well-conditioned estimate, got {c}");

        // Quasi-degenerate bordered system: two eigenvalues 1e-14 apart with
        // the border on one of them leaves the matrix nearly singular.
        let hd = BandMatrix::from_diagonal(&[1.0, 1.0 + 1e-14, 3.0]).unwrap();
        let lu = BandLu::factor_bordered(&hd, 1.0, &[1.0, 0.0, 0.0]);
        let c = lu.condition_estimate();
        assert!(c > 1e13, "quasi-degenerate estimate should explode, got {c}");
    }
}
