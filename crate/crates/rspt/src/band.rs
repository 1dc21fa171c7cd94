//! Symmetric band-matrix storage.
//!
//! Stores the main diagonal plus `bandwidth` sub-diagonals; the upper triangle
//! is implied by symmetry, so an asymmetric matrix is unrepresentable. Bands
//! are kept diagonal-first: `bands[d][i]` is the entry `(i + d, i)` for
//! `d = 0..=bandwidth`. All dense work in this crate (matvec, Gershgorin
//! bounds, factorizations) runs over this layout in O(dim * bandwidth).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Symmetric real matrix with entries confined to `|i - j| <= bandwidth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMatrix {
    dim: usize,
    bandwidth: usize,
    /// `bands[d]` has length `dim - d`; `bands[0]` is the main diagonal.
    bands: Vec<Vec<f64>>,
}

impl BandMatrix {
    /// Zero matrix with the given shape. Requires `dim >= 1` and `bandwidth < dim`.
    pub fn zeros(dim: usize, bandwidth: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidShape("dim must be at least 1".into()));
        }
        if bandwidth >= dim {
            return Err(Error::InvalidShape(format!(
                "bandwidth {bandwidth} must be smaller than dim {dim}"
            )));
        }
        let bands = (0..=bandwidth).map(|d| vec![0.0; dim - d]).collect();
        Ok(Self { dim, bandwidth, bands })
    }

    /// Build from explicit diagonal-first bands (`bands[d]` of length `dim - d`).
    pub fn from_bands(dim: usize, bands: Vec<Vec<f64>>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidShape("need at least the main diagonal".into()));
        }
        let bandwidth = bands.len() - 1;
        let mut m = Self::zeros(dim, bandwidth)?;
        for (d, band) in bands.into_iter().enumerate() {
            if band.len() != dim - d {
                return Err(Error::InvalidShape(format!(
                    "band {d} has length {}, expected {}",
                    band.len(),
                    dim - d
                )));
            }
            m.bands[d] = band;
        }
        Ok(m)
    }

    /// Diagonal matrix from its entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len(), 0)?;
        m.bands[0].copy_from_slice(diag);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Diagonal-first band slices.
    pub fn bands(&self) -> &[Vec<f64>] {
        &self.bands
    }

    /// Mutable band access for the factorization internals; kept crate-private
    /// so external code cannot break the length invariants.
    pub(crate) fn bands_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.bands
    }

    /// Entry `(i, j)`; zero outside the band by definition.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth {
            0.0
        } else {
            self.bands[d][lo]
        }
    }

    /// Set entry `(i, j)` and its mirror. Panics outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(
            d <= self.bandwidth,
            "entry ({i}, {j}) lies outside bandwidth {}",
            self.bandwidth
        );
        self.bands[d][lo] = value;
    }

    /// `y = A x` exploiting symmetry; O(dim * bandwidth).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "matvec dimension mismatch");
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            y[i] += self.bands[0][i] * x[i];
        }
        for d in 1..=self.bandwidth {
            for i in 0..self.dim - d {
                let a = self.bands[d][i];
                y[i + d] += a * x[i];
                y[i] += a * x[i + d];
            }
        }
        y
    }

    /// `self + s * other`, widening to the larger bandwidth.
    pub fn add_scaled(&self, other: &BandMatrix, s: f64) -> Result<BandMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}-dim and {}-dim band matrices",
                self.dim, other.dim
            )));
        }
        let w = self.bandwidth.max(other.bandwidth);
        let mut out = BandMatrix::zeros(self.dim, w)?;
        for d in 0..=w {
            for i in 0..self.dim - d {
                let a = if d <= self.bandwidth { self.bands[d][i] } else { 0.0 };
                let b = if d <= other.bandwidth { other.bands[d][i] } else { 0.0 };
                out.bands[d][i] = a + s * b;
            }
        }
        Ok(out)
    }

    /// Scale every entry by `s`.
    pub fn scaled(&self, s: f64) -> BandMatrix {
        let mut out = self.clone();
        for band in &mut out.bands {
            for v in band.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Split into the part with `|i - j| <= keep` and the remainder, so that
    /// `self = kept + remainder` entrywise. The remainder keeps the original
    /// bandwidth (its inner bands are zero).
    pub fn band_split(&self, keep: usize) -> (BandMatrix, BandMatrix) {
        let keep = keep.min(self.bandwidth);
        let mut kept = BandMatrix::zeros(self.dim, keep).expect("shape already validated");
        let mut rest = BandMatrix::zeros(self.dim, self.bandwidth).expect("shape already validated");
        for d in 0..=self.bandwidth {
            if d <= keep {
                kept.bands[d] = self.bands[d].clone();
            } else {
                rest.bands[d] = self.bands[d].clone();
            }
        }
        (kept, rest)
    }

    /// Maximum absolute row sum. Equals the 1-norm by symmetry.
    pub fn norm_inf(&self) -> f64 {
        let mut row = vec![0.0; self.dim];
        for i in 0..self.dim {
            row[i] += self.bands[0][i].abs();
        }
        for d in 1..=self.bandwidth {
            for i in 0..self.dim - d {
                let a = self.bands[d][i].abs();
                row[i] += a;
                row[i + d] += a;
            }
        }
        row.into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.bands
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Gershgorin bounds `(lo, hi)`: every eigenvalue lies in `[lo, hi]`.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.dim];
        for d in 1..=self.bandwidth {
            for i in 0..self.dim - d {
                let a = self.bands[d][i].abs();
                radius[i] += a;
                radius[i + d] += a;
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            lo = lo.min(self.bands[0][i] - radius[i]);
            hi = hi.max(self.bands[0][i] + radius[i]);
        }
        (lo, hi)
    }

    /// Dense copy, mostly for small cross-checks and serialization tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.dim]; self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                a[i][j] = self.get(i, j);
            }
        }
        a
    }

    /// Largest `d` with a nonzero band, i.e. the structural bandwidth actually used.
    pub fn effective_bandwidth(&self) -> usize {
        (0..=self.bandwidth)
            .rev()
            .find(|&d| self.bands[d].iter().any(|&v| v != 0.0))
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(dim: usize, diag: f64, off: f64) -> BandMatrix {
        let mut m = BandMatrix::zeros(dim, 1).unwrap();
        for i in 0..dim {
            m.set(i, i, diag);
        }
        for i in 0..dim - 1 {
            m.set(i + 1, i, off);
        }
        m
    }

    #[test]
    fn shape_validation() {
        assert!(BandMatrix::zeros(0, 0).is_err());
        assert!(BandMatrix::zeros(3, 3).is_err());
        assert!(BandMatrix::zeros(3, 2).is_ok());
        assert!(BandMatrix::zeros(1, 0).is_ok());
    }

    #[test]
    fn get_set_symmetric() {
        let mut m = BandMatrix::zeros(4, 2).unwrap();
        m.set(2, 0, 5.0);
        assert_eq!(m.get(0, 2), 5.0);
        assert_eq!(m.get(2, 0), 5.0);
        assert_eq!(m.get(3, 0), 0.0, "outside band reads as zero");
    }

    #[test]
    #[should_panic(expected = "outside bandwidth")]
    fn set_outside_band_panics() {
        let mut m = BandMatrix::zeros(4, 1).unwrap();
        m.set(3, 0, 1.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let m = tridiag(5, 2.0, -1.0);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = m.matvec(&x);
        let dense = m.to_dense();
        for i in 0..5 {
            let want: f64 = (0..5).map(|j| dense[i][j] * x[j]).sum();
            assert!(
                (y[i] - want).abs() < 1e-14,
                "row {i}: got {} want {want}",
                y[i]
            );
        }
    }

    #[test]
    fn gershgorin_tridiagonal() {
        // tridiag(-1, 2, -1): rows give [2 - 2, 2 + 2] in the interior.
        let m = tridiag(6, 2.0, -1.0);
        let (lo, hi) = m.gershgorin();
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 4.0);
    }

    #[test]
    fn add_scaled_widens_bandwidth() {
        let diag = BandMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let tri = tridiag(3, 0.0, 1.0);
        let sum = diag.add_scaled(&tri, 2.0).unwrap();
        assert_eq!(sum.bandwidth(), 1);
        assert_eq!(sum.get(0, 0), 1.0);
        assert_eq!(sum.get(1, 0), 2.0);
        assert_eq!(sum.get(2, 2), 3.0);
    }

    #[test]
    fn band_split_reassembles() {
        let mut m = BandMatrix::zeros(6, 3).unwrap();
        for d in 0..=3usize {
            for i in 0..6 - d {
                m.set(i + d, i, (d * 10 + i) as f64 + 1.0);
            }
        }
        let (kept, rest) = m.band_split(1);
        assert_eq!(kept.bandwidth(), 1);
        let back = kept.add_scaled(&rest, 1.0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(back.get(i, j), m.get(i, j), "entry ({i},{j})");
            }
        }
        assert_eq!(rest.get(1, 0), 0.0, "remainder has no inner-band content");
    }

    #[test]
    fn norms() {
        let m = tridiag(4, 2.0, -1.0);
        assert_eq!(m.norm_inf(), 4.0);
        assert_eq!(m.max_abs(), 2.0);
        assert_eq!(m.effective_bandwidth(), 1);
        let d = BandMatrix::from_diagonal(&[1.0, -3.0]).unwrap();
        assert_eq!(d.norm_inf(), 3.0);
    }
}
