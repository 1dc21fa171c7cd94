//! Shared oracles for the integration suite.
//!
//! Everything here deliberately goes through a different code path from the
//! library: dense storage, full `nalgebra` eigendecompositions, and the
//! textbook sum-over-states recursion with explicit energy denominators.
//! Agreement between the band hierarchy and these oracles is therefore a real
//! cross-check, not a tautology.

#![allow(dead_code)] // each test binary links its own subset of the helpers

use nalgebra::DMatrix;
use rand::Rng;
use rspt::{BandMatrix, HamiltonianSplit, Representation};

/// Dense copy of a band matrix.
pub fn dense(h: &BandMatrix) -> DMatrix<f64> {
    let rows = h.to_dense();
    let n = h.dim();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Full eigendecomposition, eigenvalues ascending, eigenvectors as columns
/// with the library's sign convention (entry of largest magnitude, first on
/// ties, is positive).
pub fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_sign(&mut v);
        for (row, &x) in v.iter().enumerate() {
            vectors[(row, col)] = x;
        }
    }
    (values, vectors)
}

/// Flip a vector so its entry of largest magnitude (first on ties) is
/// positive — the same convention the band solver applies.
pub fn fix_sign(v: &mut [f64]) {
    let mut idx = 0usize;
    for (i, value) in v.iter().enumerate() {
        if value.abs() > v[idx].abs() {
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// `state`-th eigenvalue (ascending) of a band matrix by dense
/// diagonalization.
pub fn dense_energy(h: &BandMatrix, state: usize) -> f64 {
    let (values, _) = sorted_eigen(&dense(h));
    values[state]
}

/// `state`-th eigenvalue of the fully assembled operator at `lambda`.
pub fn dense_energy_at(split: &HamiltonianSplit, state: usize, lambda: f64) -> f64 {
    dense_energy(&split.assemble_at(lambda), state)
}

/// Textbook sum-over-states Rayleigh-Schrodinger recursion in the eigenbasis
/// of `h0`, to `order` corrections. Returns `(E_0..E_K, y_1..y_K)` with the
/// correction vectors mapped back to the original coordinates, in
/// intermediate normalization. Independent of the band solver: dense
/// eigendecomposition, explicit division by energy gaps.
pub fn sum_over_states(
    h0: &BandMatrix,
    h1: &BandMatrix,
    state: usize,
    order: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = h0.dim();
    let (e, u) = sorted_eigen(&dense(h0));
    let v = dense(h1);
    // Everything below lives in eigenbasis coordinates c_m = <u_m, y>.
    let project = |y: &[f64]| -> Vec<f64> {
        (0..n).map(|m| (0..n).map(|i| u[(i, m)] * y[i]).sum()).collect()
    };
    let unproject = |c: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|m| u[(i, m)] * c[m]).sum()).collect()
    };
    let x: Vec<f64> = (0..n).map(|i| u[(i, state)]).collect();

    let mut energies = vec![e[state]];
    let mut coeffs: Vec<Vec<f64>> = Vec::new(); // c^(k), k >= 1
    for k in 1..=order {
        let prev = if k == 1 { x.clone() } else { unproject(&coeffs[k - 2]) };
        let w: Vec<f64> = {
            let wv = v.clone() * DMatrix::from_column_slice(n, 1, &prev);
            (0..n).map(|i| wv[(i, 0)]).collect()
        };
        let g = project(&w);
        energies.push(g[state]);
        let mut c = vec![0.0; n];
        for m in 0..n {
            if m == state {
                continue;
            }
            let mut num = -g[m];
            for j in 1..k {
                num += energies[j] * coeffs[k - 1 - j][m];
            }
            c[m] = num / (e[m] - e[state]);
        }
        coeffs.push(c);
    }
    let vectors = coeffs.iter().map(|c| unproject(c)).collect();
    (energies, vectors)
}

/// Random symmetric band matrix: diagonal entries spread roughly `spread`
/// apart with jitter, off-diagonal bands of scale `off_scale`.
pub fn random_banded(
    rng: &mut impl Rng,
    dim: usize,
    bandwidth: usize,
    spread: f64,
    off_scale: f64,
) -> BandMatrix {
    let mut bands = vec![vec![0.0; dim]];
    for i in 0..dim {
        bands[0][i] = i as f64 * spread + rng.gen_range(-0.2 * spread..0.2 * spread);
    }
    for d in 1..=bandwidth.min(dim.saturating_sub(1)) {
        bands.push((0..dim - d).map(|_| rng.gen_range(-off_scale..off_scale)).collect());
    }
    BandMatrix::from_bands(dim, bands).expect("test band shapes are consistent")
}

/// Random split with a gap-guarded target state: the zero-order spectrum
/// around `state` is checked by dense diagonalization and the draw is
/// retried until the state is isolated by at least `min_gap`.
pub fn random_split(
    rng: &mut impl Rng,
    dim: usize,
    bandwidth: usize,
    min_gap: f64,
) -> (HamiltonianSplit, usize) {
    loop {
        let h0 = random_banded(rng, dim, bandwidth, 1.0, 0.3);
        let h1 = random_banded(rng, dim, bandwidth, 0.2, 0.2);
        let state = rng.gen_range(0..dim);
        let (e, _) = sorted_eigen(&dense(&h0));
        let mut gap = f64::INFINITY;
        if state > 0 {
            gap = gap.min(e[state] - e[state - 1]);
        }
        if state + 1 < dim {
            gap = gap.min(e[state + 1] - e[state]);
        }
        if gap < min_gap {
            continue;
        }
        let split = HamiltonianSplit::from_operators(h0, h1, 0.0, Representation::Exact)
            .expect("matching dimensions by construction");
        return (split, state);
    }
}

/// Largest absolute difference between two equal-length slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
