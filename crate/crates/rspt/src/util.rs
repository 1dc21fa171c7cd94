//! Small vector helpers shared across the solver modules.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn scale_in_place(a: &mut [f64], s: f64) {
    for v in a.iter_mut() {
        *v *= s;
    }
}

/// `a += s * b`.
pub(crate) fn axpy(a: &mut [f64], s: f64, b: &[f64]) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

/// Deterministic start vector for inverse iteration: a constant vector with a
/// small smooth perturbation that breaks parity and translation symmetries
/// (a plain constant is exactly orthogonal to odd states on symmetric grids).
pub(crate) fn start_vector(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * ((i + 1) as f64).sin()).collect();
    let nv = norm2(&v);
    scale_in_place(&mut v, 1.0 / nv);
    v
}

/// Deterministic, sign-alternating probe vector for condition estimation.
pub(crate) fn probe_vector(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + 0.5 * (3.0 * (i + 1) as f64).sin())
        })
        .collect();
    let nv = norm2(&v);
    scale_in_place(&mut v, 1.0 / nv);
    v
}
