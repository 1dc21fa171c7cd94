//! Behavioral properties of the expansion hierarchy: frozen closed forms,
//! agreement with the dense eigenbasis recursion, and stepwise consistency.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rspt::{
    build_lattice_split, build_oscillator_split, rs_series, solve_order, Error, BasisSpec,
    HamiltonianSplit, LatticeSpec, NormalizationPolicy, PotentialSpec, SolverSettings,
};

#[test]
fn toy_ground_branch_matches_its_taylor_series() {
    let settings = SolverSettings::default();
    let split = HamiltonianSplit::toy_two_level();
    let series = rs_series(&split, 0, 6, &settings).expect("toy ground expansion");
    // 1 - sqrt(1 + x^2) = -x^2/2 + x^4/8 - x^6/16 + ...
    let expected: [f64; 7] = [0.0, 0.0, -0.5, 0.0, 0.125, 0.0, -0.0625];
    for (k, want) in expected.iter().enumerate() {
        assert!(
            (series.energies[k] - want).abs() <= 1e-12,
            "E_{k} = {} but the closed form gives {want}",
            series.energies[k]
        );
    }
    assert_eq!(series.normalization, NormalizationPolicy::Intermediate);
    assert_eq!(series.order(), 6);
}

#[test]
fn toy_excited_branch_matches_its_taylor_series() {
    let settings = SolverSettings::default();
    let split = HamiltonianSplit::toy_two_level();
    let series = rs_series(&split, 1, 6, &settings).expect("toy excited expansion");
    // 1 + sqrt(1 + x^2): the even corrections flip sign against the ground
    // branch, the odd ones stay zero.
    let expected: [f64; 7] = [2.0, 0.0, 0.5, 0.0, -0.125, 0.0, 0.0625];
    for (k, want) in expected.iter().enumerate() {
        assert!(
            (series.energies[k] - want).abs() <= 1e-12,
            "E_{k} = {} but the closed form gives {want}",
            series.energies[k]
        );
    }
}

#[test]
fn quartic_low_orders_match_the_classic_rationals() {
    // Ground-state weak-coupling coefficients of x^2 + lambda x^4 in the
    // convention E_n(0) = 2n + 1: exact rationals 3/4, -21/16, 333/64,
    // -30885/1024. Basis truncation cannot touch them here: the order-k
    // correction only reaches ladder state 4k, far inside a 64-state basis.
    let settings = SolverSettings::default();
    let split = build_oscillator_split(&BasisSpec { n_basis: 64 }, &PotentialSpec::Quartic)
        .expect("oscillator split builds");
    let series = rs_series(&split, 0, 4, &settings).expect("quartic expansion");
    let expected: [f64; 5] = [1.0, 0.75, -1.3125, 5.203125, -30.1611328125];
    for (k, want) in expected.iter().enumerate() {
        let tol = 1e-9 * want.abs().max(1.0);
        assert!(
            (series.energies[k] - want).abs() <= tol,
            "E_{k} = {:.12} but the closed form gives {want}",
            series.energies[k]
        );
    }
}

#[test]
fn quartic_deep_orders_match_the_eigenbasis_recursion() {
    let settings = SolverSettings::default();
    let split = build_oscillator_split(&BasisSpec { n_basis: 32 }, &PotentialSpec::Quartic)
        .expect("oscillator split builds");
    let series = rs_series(&split, 0, 6, &settings).expect("quartic expansion");
    let (oracle, _) = common::sum_over_states(split.h0(), split.h1(), 0, 6);
    for k in 0..=6 {
        let scale = oracle[k].abs().max(1.0);
        assert!(
            (series.energies[k] - oracle[k]).abs() <= 1e-10 * scale,
            "order {k}: hierarchy {} vs eigenbasis recursion {}",
            series.energies[k],
            oracle[k]
        );
    }
}

#[test]
fn lattice_hierarchy_agrees_with_dense_recursion() {
    // The tridiagonal reference operator goes through band factorizations
    // only; the oracle diagonalizes the same matrix densely. Agreement here
    // is the core claim of the propagator path.
    let settings = SolverSettings::default();
    let split = build_lattice_split(
        &LatticeSpec { x_min: -8.0, x_max: 8.0, n_points: 120 },
        &PotentialSpec::Quartic,
    )
    .expect("lattice split builds");
    let series = rs_series(&split, 0, 3, &settings).expect("lattice expansion");
    let (oracle, vectors) = common::sum_over_states(split.h0(), split.h1(), 0, 3);
    for k in 0..=3 {
        let scale = oracle[k].abs().max(1.0);
        assert!(
            (series.energies[k] - oracle[k]).abs() <= 1e-9 * scale,
            "order {k}: hierarchy {} vs eigenbasis recursion {}",
            series.energies[k],
            oracle[k]
        );
    }
    for k in 1..=3 {
        assert!(
            common::max_abs_diff(&series.vectors[k - 1], &vectors[k - 1]) <= 1e-8,
            "order {k} correction vector deviates from the dense recursion"
        );
        let ortho: f64 = series.eigenpair.vector.iter()
            .zip(&series.vectors[k - 1])
            .map(|(a, b)| a * b)
            .sum();
        assert!(ortho.abs() <= 1e-12, "order {k} breaks intermediate normalization");
    }
}

#[test]
fn single_order_solves_reproduce_the_full_series() {
    let settings = SolverSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (split, state) = common::random_split(&mut rng, 12, 2, 0.3);
    let series = rs_series(&split, state, 4, &settings).expect("series solves");

    let mut energies = vec![series.eigenpair.energy];
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for k in 1..=4usize {
        let (e_k, y_k, _residual) = solve_order(
            split.h0(),
            split.h1(),
            &series.eigenpair,
            &energies,
            &vectors,
            &settings,
        )
        .expect("single order solves");
        assert!(
            (e_k - series.energies[k]).abs() <= 1e-13 * series.energies[k].abs().max(1.0),
            "order {k} energy differs between stepwise and full runs"
        );
        assert!(
            common::max_abs_diff(&y_k, &series.vectors[k - 1]) <= 1e-12,
            "order {k} vector differs between stepwise and full runs"
        );
        energies.push(e_k);
        vectors.push(y_k);
    }
}

#[test]
fn quasi_degenerate_reference_refuses_with_context() {
    let settings = SolverSettings::default();
    let split = HamiltonianSplit::toy_quasi_degenerate();
    match rs_series(&split, 0, 3, &settings) {
        Err(Error::DegenerateState { state_index, order, .. }) => {
            assert_eq!(state_index, 0);
            assert_eq!(order, 0, "the refusal happens before any correction is computed");
        }
        Err(Error::IllConditioned { order, .. }) => {
            assert_eq!(order, 0);
        }
        other => panic!("expected a degeneracy refusal, got {other:?}"),
    }
}
