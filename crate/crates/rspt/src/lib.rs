//! Rayleigh-Schrodinger perturbation series for band-matrix Hamiltonians.
//!
//! The expansion is built without ever diagonalizing the unperturbed operator:
//! the zero-order state comes from inertia bisection plus inverse iteration on
//! the band matrix, and every correction order reuses one factorization of a
//! bordered band system. See the `examples/` directory for one runnable
//! walkthrough per capability, and the `rspt` binary for batch runs.

pub mod adaptive;
pub mod band;
pub mod config;
pub mod error;
mod factor;
pub mod hierarchy;
pub mod model;
pub mod oracle;
pub mod run;
pub mod series_eval;
mod util;
pub mod zero_order;

pub use adaptive::{apply_policy, apply_policy_traced, split_quality, SplitPolicy, SplitQuality};
pub use band::BandMatrix;
pub use error::{Error, Result};
pub use hierarchy::{rs_series, solve_order, NormalizationPolicy, PerturbationSeries};
pub use model::{
    build_lattice_split, build_oscillator_split, BasisSpec, HamiltonianSplit, LatticeSpec,
    PotentialSpec, Representation,
};
pub use oracle::{
    convergence_slope, direct_curve, direct_energy, fd_coefficients, FdDerivatives, SlopeFit,
};
pub use series_eval::{
    optimal_truncation, partial_sums, wavefunction_partial_sum, PartialSumTrace,
};
pub use zero_order::{ground_state, inertia_below, solve_state, EigenPair, SolverSettings};
