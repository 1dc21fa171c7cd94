//! Run descriptions for the batch front end.
//!
//! A run config is one JSON document naming the operator family, the state
//! and expansion depth, optionally a split policy to apply first, the
//! physical couplings to evaluate at, and the oracle checks to run against
//! the result. Unknown keys are rejected — a typo in a tolerance name must
//! not silently fall back to a default.

use crate::adaptive::SplitPolicy;
use crate::error::{Error, Result};
use crate::model::{
    build_lattice_split, build_oscillator_split, BasisSpec, HamiltonianSplit, LatticeSpec,
    PotentialSpec,
};
use crate::zero_order::SolverSettings;
use serde::Deserialize;
use std::path::Path;

/// Which operator family a run works on.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Built-in two-level family with a closed-form spectrum.
    Toy2x2 {},
    /// Built-in fixture whose lowest two levels are separated by 1e-12 of the
    /// span — guaranteed to trip the degeneracy refusal.
    ToyDegenerate {},
    /// Uniform-grid discretization on `[x_min, x_max]`.
    Lattice {
        potential: PotentialSpec,
        #[serde(default = "default_x_min")]
        x_min: f64,
        #[serde(default = "default_x_max")]
        x_max: f64,
        n_points: usize,
    },
    /// Truncated oscillator basis for the quartic family.
    Oscillator { n_basis: usize },
    /// A split previously serialized by this tool (or built by hand to the
    /// same schema), loaded verbatim.
    SplitFile { path: String },
}

fn default_x_min() -> f64 {
    LatticeSpec::DEFAULT_X_MIN
}

fn default_x_max() -> f64 {
    LatticeSpec::DEFAULT_X_MAX
}

impl ModelConfig {
    /// Build the split this model describes. Relative `split_file` paths are
    /// resolved against `base_dir` (the config file's directory).
    pub fn build(&self, base_dir: &Path) -> Result<HamiltonianSplit> {
        match self {
            ModelConfig::Toy2x2 {} => Ok(HamiltonianSplit::toy_two_level()),
            ModelConfig::ToyDegenerate {} => Ok(HamiltonianSplit::toy_quasi_degenerate()),
            ModelConfig::Lattice { potential, x_min, x_max, n_points } => {
                let lattice = LatticeSpec { x_min: *x_min, x_max: *x_max, n_points: *n_points };
                build_lattice_split(&lattice, potential)
            }
            ModelConfig::Oscillator { n_basis } => {
                build_oscillator_split(&BasisSpec { n_basis: *n_basis }, &PotentialSpec::Quartic)
            }
            ModelConfig::SplitFile { path } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    Error::Config(format!("cannot read split file {}: {e}", full.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("split file {}: {e}", full.display())))
            }
        }
    }
}

/// Oracle-check knobs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Base stencil spacing for derivative measurements.
    pub fd_step: f64,
    /// Highest Taylor coefficient to measure; capped at the run's expansion
    /// order when absent.
    pub fd_order: Option<usize>,
    /// Relative agreement demanded between the two stencil spacings.
    pub fd_tol: f64,
    /// Couplings for the direct-solve curve and the convergence-slope fit;
    /// falls back to the run's `lambda_targets`.
    pub grid: Vec<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { fd_step: 1e-2, fd_order: None, fd_tol: 1e-3, grid: Vec::new() }
    }
}

/// One batch run: model, expansion request, optional rewriting policy,
/// evaluation targets, and oracle knobs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub state_index: usize,
    pub order: usize,
    /// Applied to the built split before anything is expanded.
    #[serde(default)]
    pub policy: Option<SplitPolicy>,
    /// Physical couplings the series is evaluated at.
    #[serde(default)]
    pub lambda_targets: Vec<f64>,
    /// Probe depth for split-quality traces; defaults to `min(order, 2)`,
    /// but at least 1.
    #[serde(default)]
    pub quality_order: Option<usize>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub settings: SolverSettings,
}

impl RunConfig {
    /// Parse a config document, rejecting unknown keys and malformed values.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if let Some(q) = self.quality_order {
            if q == 0 {
                return Err(Error::Config("quality_order must be at least 1".into()));
            }
        }
        for lambda in &self.lambda_targets {
            if !lambda.is_finite() {
                return Err(Error::Config(format!("lambda target {lambda} is not finite")));
            }
        }
        if let Some(oracle) = &self.oracle {
            if !(oracle.fd_step.is_finite() && oracle.fd_step > 0.0) {
                return Err(Error::Config(format!(
                    "oracle fd_step {} must be positive",
                    oracle.fd_step
                )));
            }
            if !(oracle.fd_tol.is_finite() && oracle.fd_tol > 0.0) {
                return Err(Error::Config(format!(
                    "oracle fd_tol {} must be positive",
                    oracle.fd_tol
                )));
            }
        }
        Ok(())
    }

    /// Probe depth for quality traces.
    pub fn effective_quality_order(&self) -> usize {
        self.quality_order.unwrap_or_else(|| self.order.clamp(1, 2))
    }
}
