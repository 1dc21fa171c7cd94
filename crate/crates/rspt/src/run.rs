//! Batch front end: the `solve`, `sweep`, and `oracle` commands.
//!
//! Every command reads one JSON run config, builds the split, optionally
//! applies a rewriting policy, and writes its results under an output
//! directory. Output files are deterministic: the same config produces
//! byte-identical files on every run. Floating-point values are written with
//! 17 significant digits (`{:.16e}`), which parses back to the exact bit
//! pattern, and each file carries the tool version and the SHA-256 of the
//! config bytes that produced it. Files are written to a temporary name and
//! renamed into place, so a crashed run never leaves a half-written file.

use crate::adaptive::{apply_policy_traced, SplitQuality};
use crate::config::{OracleConfig, RunConfig};
use crate::error::{Error, Result};
use crate::hierarchy::{rs_series, PerturbationSeries};
use crate::model::HamiltonianSplit;
use crate::oracle::{convergence_slope, direct_curve, fd_coefficients};
use crate::series_eval::{partial_sums, PartialSumTrace};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Everything a command needs besides the parsed config.
pub struct RunContext {
    /// Raw config bytes, hashed into every output file.
    pub raw_config: Vec<u8>,
    /// Directory of the config file; relative model paths resolve against it.
    pub base_dir: PathBuf,
    /// Where output files go; created if absent.
    pub out_dir: PathBuf,
    /// Suppress the stdout summary (files are always written).
    pub quiet: bool,
}

impl RunContext {
    fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(&self.raw_config);
        let out = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in out {
            write!(hex, "{byte:02x}").expect("writing to a String cannot fail");
        }
        hex
    }

    /// Print a summary line unless the run is quiet.
    pub fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }
}

/// One float, full precision, JSON-compatible; non-finite values (which can
/// legitimately appear in ratio diagnostics) become `null`.
fn fnum(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn farr(xs: &[f64]) -> String {
    let mut s = String::from("[");
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&fnum(*x));
    }
    s.push(']');
    s
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Build the split and apply the config's policy, collecting quality traces
/// when a policy actually ran.
fn prepare_split(
    config: &RunConfig,
    ctx: &RunContext,
) -> Result<(HamiltonianSplit, Vec<SplitQuality>)> {
    let split = config.model.build(&ctx.base_dir)?;
    match &config.policy {
        None => Ok((split, Vec::new())),
        Some(policy) => apply_policy_traced(
            &split,
            policy,
            config.state_index,
            config.effective_quality_order(),
            &config.settings,
        ),
    }
}

/// An expansion folded for one physical target, with its evaluation.
struct Expansion {
    lambda_target: f64,
    mu: f64,
    series: PerturbationSeries,
    trace: PartialSumTrace,
}

/// Expand for every target. A constant-free split is expanded once and
/// re-evaluated per target; a truncated split genuinely changes its effective
/// first-order operator with the target, so each target gets its own
/// hierarchy run.
fn expansions_for(
    split: &HamiltonianSplit,
    config: &RunConfig,
) -> Result<Vec<Expansion>> {
    let targets: Vec<f64> = if config.lambda_targets.is_empty() {
        vec![split.lambda_ref()]
    } else {
        config.lambda_targets.clone()
    };
    let mut shared: Option<PerturbationSeries> = None;
    let mut out = Vec::with_capacity(targets.len());
    for &lambda in &targets {
        let (folded, mu) = split.fold_for_target(lambda);
        let series = if split.constant().is_none() {
            if shared.is_none() {
                shared = Some(rs_series(
                    &folded,
                    config.state_index,
                    config.order,
                    &config.settings,
                )?);
            }
            shared.clone().expect("populated above")
        } else {
            rs_series(&folded, config.state_index, config.order, &config.settings)?
        };
        let trace = partial_sums(&series, mu);
        out.push(Expansion { lambda_target: lambda, mu, series, trace });
    }
    Ok(out)
}

fn quality_json(q: &SplitQuality, indent: &str) -> String {
    format!(
        "{indent}{{\"lambda_ref\": {}, \"lambda_target\": {}, \"mu\": {}, \
         \"first_correction_energy\": {}, \"first_correction_vector_norm\": {}, \
         \"effective_ratio\": {}, \"order\": {}}}",
        fnum(q.lambda_ref),
        fnum(q.lambda_target),
        fnum(q.mu),
        fnum(q.first_correction_energy),
        fnum(q.first_correction_vector_norm),
        fnum(q.effective_ratio),
        q.order
    )
}

fn expansion_json(e: &Expansion, indent: &str) -> String {
    let pair = &e.series.eigenpair;
    let k_opt = e
        .trace
        .k_opt
        .map(|k| k.to_string())
        .unwrap_or_else(|| "null".to_string());
    let sum_at_k_opt = e
        .trace
        .k_opt
        .map(|k| fnum(e.trace.partial_sums[k]))
        .unwrap_or_else(|| "null".to_string());
    let mut s = String::new();
    let _ = write!(
        s,
        "{indent}{{\n\
         {indent}  \"lambda_target\": {},\n\
         {indent}  \"mu\": {},\n\
         {indent}  \"lambda_ref\": {},\n\
         {indent}  \"zero_order\": {{\"energy\": {}, \"residual\": {}}},\n\
         {indent}  \"energies\": {},\n\
         {indent}  \"per_order_residuals\": {},\n\
         {indent}  \"terms\": {},\n\
         {indent}  \"partial_sums\": {},\n\
         {indent}  \"k_opt\": {},\n\
         {indent}  \"sum_at_k_opt\": {}\n\
         {indent}}}",
        fnum(e.lambda_target),
        fnum(e.mu),
        fnum(e.series.lambda_ref),
        fnum(pair.energy),
        fnum(pair.residual),
        farr(&e.series.energies),
        farr(&e.series.per_order_residuals),
        farr(&e.trace.terms),
        farr(&e.trace.partial_sums),
        k_opt,
        sum_at_k_opt,
    );
    s
}

fn header_json(ctx: &RunContext, command: &str, config: &RunConfig) -> String {
    format!(
        "  \"version\": \"{}\",\n  \"config_sha256\": \"{}\",\n  \"command\": \"{command}\",\n  \
         \"state_index\": {},\n  \"order\": {}",
        env!("CARGO_PKG_VERSION"),
        ctx.digest(),
        config.state_index,
        config.order
    )
}

fn write_split_file(split: &HamiltonianSplit, ctx: &RunContext) -> Result<PathBuf> {
    let path = ctx.out_dir.join("split.json");
    let mut text = serde_json::to_string_pretty(split)
        .map_err(|e| Error::Config(format!("cannot serialize split: {e}")))?;
    text.push('\n');
    write_atomic(&path, &text)?;
    Ok(path)
}

/// Expand and evaluate: writes `split.json` and `series.json`.
pub fn cmd_solve(config: &RunConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&ctx.out_dir)?;
    let (split, quality) = prepare_split(config, ctx)?;
    let expansions = expansions_for(&split, config)?;

    let mut body = String::from("{\n");
    let _ = write!(body, "{},\n", header_json(ctx, "solve", config));
    let _ = write!(body, "  \"lambda_ref\": {},\n", fnum(split.lambda_ref()));
    body.push_str("  \"normalization\": \"intermediate\",\n");
    if quality.is_empty() {
        body.push_str("  \"policy_trace\": [],\n");
    } else {
        body.push_str("  \"policy_trace\": [\n");
        for (i, q) in quality.iter().enumerate() {
            body.push_str(&quality_json(q, "    "));
            body.push_str(if i + 1 < quality.len() { ",\n" } else { "\n" });
        }
        body.push_str("  ],\n");
    }
    body.push_str("  \"expansions\": [\n");
    for (i, e) in expansions.iter().enumerate() {
        body.push_str(&expansion_json(e, "    "));
        body.push_str(if i + 1 < expansions.len() { ",\n" } else { "\n" });
    }
    body.push_str("  ]\n}\n");

    let series_path = ctx.out_dir.join("series.json");
    write_atomic(&series_path, &body)?;
    let split_path = write_split_file(&split, ctx)?;

    for e in &expansions {
        match e.trace.k_opt {
            Some(k) => ctx.say(&format!(
                "lambda {:+.6e}: sum({}) = {:+.9e}, optimal truncation k = {k} -> {:+.9e}",
                e.lambda_target,
                config.order,
                e.trace.partial_sums[config.order],
                e.trace.partial_sums[k],
            )),
            None => ctx.say(&format!(
                "lambda {:+.6e}: E0 = {:+.9e}",
                e.lambda_target, e.series.energies[0]
            )),
        }
    }
    Ok(vec![series_path, split_path])
}

/// Series against direct solves over the target grid: writes `split.json`
/// and `sweep.csv`.
pub fn cmd_sweep(config: &RunConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    if config.lambda_targets.is_empty() {
        return Err(Error::Config("sweep needs a non-empty lambda_targets list".into()));
    }
    std::fs::create_dir_all(&ctx.out_dir)?;
    let (split, _) = prepare_split(config, ctx)?;
    let expansions = expansions_for(&split, config)?;
    let direct =
        direct_curve(&split, config.state_index, &config.lambda_targets, &config.settings)?;

    let mut csv = String::new();
    let _ = writeln!(csv, "# version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(csv, "# config_sha256={}", ctx.digest());
    csv.push_str(
        "lambda,mu,direct,partial_sum_full,k_opt,partial_sum_k_opt,abs_err_full,abs_err_k_opt\n",
    );
    for (e, d) in expansions.iter().zip(direct.iter()) {
        let full = e.trace.partial_sums[config.order];
        let (k_opt, at_k) = match e.trace.k_opt {
            Some(k) => (k.to_string(), e.trace.partial_sums[k]),
            None => (String::new(), e.series.energies[0]),
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            fnum(e.lambda_target),
            fnum(e.mu),
            fnum(*d),
            fnum(full),
            k_opt,
            fnum(at_k),
            fnum((full - d).abs()),
            fnum((at_k - d).abs()),
        );
    }
    let csv_path = ctx.out_dir.join("sweep.csv");
    write_atomic(&csv_path, &csv)?;
    let split_path = write_split_file(&split, ctx)?;
    ctx.say(&format!(
        "swept {} couplings; worst full-order error {:.3e}",
        expansions.len(),
        expansions
            .iter()
            .zip(direct.iter())
            .map(|(e, d)| (e.trace.partial_sums[config.order] - d).abs())
            .fold(0.0_f64, f64::max)
    ));
    Ok(vec![csv_path, split_path])
}

/// Independent verification: derivative measurement against series
/// coefficients, direct curve, and per-truncation convergence slopes.
/// Writes `split.json` and `oracle.json`.
pub fn cmd_oracle(config: &RunConfig, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&ctx.out_dir)?;
    let (split, _) = prepare_split(config, ctx)?;
    if split.constant().is_some() {
        // Coefficients of a truncated split are tied to one folded target; a
        // derivative oracle in the bare coupling has nothing to compare with.
        return Err(Error::ConstantTermNotFolded);
    }
    let oracle_cfg: OracleConfig = config.oracle.clone().unwrap_or_default();
    let series = rs_series(&split, config.state_index, config.order, &config.settings)?;

    // Derivative measurement at the center.
    let fd_order = oracle_cfg.fd_order.unwrap_or_else(|| config.order.min(4)).max(1);
    let fd = fd_coefficients(
        &split,
        config.state_index,
        fd_order,
        oracle_cfg.fd_step,
        oracle_cfg.fd_tol,
        &config.settings,
    )?;
    let series_coeffs = &series.energies[..=fd_order.min(config.order)];
    let abs_diff: Vec<f64> = fd
        .coefficients
        .iter()
        .zip(series_coeffs.iter())
        .map(|(a, b)| (a - b).abs())
        .collect();

    // Direct curve and per-truncation convergence slopes over the grid.
    let grid: &[f64] = if oracle_cfg.grid.is_empty() {
        &config.lambda_targets
    } else {
        &oracle_cfg.grid
    };
    let mut curve_block = String::from("null");
    let mut slope_block = String::from("null");
    if !grid.is_empty() {
        let direct = direct_curve(&split, config.state_index, grid, &config.settings)?;
        let mus: Vec<f64> = grid.iter().map(|l| l - split.lambda_ref()).collect();
        let sums_full: Vec<f64> = mus
            .iter()
            .map(|&mu| *partial_sums(&series, mu).partial_sums.last().expect("nonempty"))
            .collect();
        let abs_err: Vec<f64> = sums_full
            .iter()
            .zip(direct.iter())
            .map(|(s, d)| (s - d).abs())
            .collect();
        curve_block = format!(
            "{{\n    \"lambdas\": {},\n    \"direct\": {},\n    \"partial_sum_full\": {},\n    \
             \"abs_err\": {}\n  }}",
            farr(grid),
            farr(&direct),
            farr(&sums_full),
            farr(&abs_err)
        );

        let mut fits = Vec::new();
        for k in 1..=config.order {
            let errors: Vec<f64> = mus
                .iter()
                .zip(direct.iter())
                .map(|(&mu, &d)| (partial_sums(&series, mu).partial_sums[k] - d).abs())
                .collect();
            if let Ok(fit) = convergence_slope(&mus, &errors) {
                fits.push(format!(
                    "    {{\"truncation_order\": {k}, \"slope\": {}, \"intercept\": {}, \
                     \"points\": {}}}",
                    fnum(fit.slope),
                    fnum(fit.intercept),
                    fit.points
                ));
            }
        }
        if !fits.is_empty() {
            slope_block = format!("[\n{}\n  ]", fits.join(",\n"));
        }
    }

    let mut body = String::from("{\n");
    let _ = write!(body, "{},\n", header_json(ctx, "oracle", config));
    let _ = write!(body, "  \"lambda_ref\": {},\n", fnum(split.lambda_ref()));
    let _ = write!(
        body,
        "  \"fd\": {{\n    \"step\": {},\n    \"order\": {},\n    \"coefficients\": {},\n    \
         \"error_estimates\": {},\n    \"series_coefficients\": {},\n    \"abs_diff\": {}\n  }},\n",
        fnum(fd.step),
        fd.order,
        farr(&fd.coefficients),
        farr(&fd.error_estimates),
        farr(series_coeffs),
        farr(&abs_diff)
    );
    let _ = write!(body, "  \"curve\": {curve_block},\n");
    let _ = write!(body, "  \"slopes\": {slope_block}\n}}\n");

    let oracle_path = ctx.out_dir.join("oracle.json");
    write_atomic(&oracle_path, &body)?;
    let split_path = write_split_file(&split, ctx)?;

    for k in 1..=fd_order.min(config.order) {
        ctx.say(&format!(
            "coefficient {k}: series {:+.9e} vs derivative {:+.9e} (diff {:.3e}, est err {:.3e})",
            series.energies[k], fd.coefficients[k], abs_diff[k], fd.error_estimates[k]
        ));
    }
    Ok(vec![oracle_path, split_path])
}
