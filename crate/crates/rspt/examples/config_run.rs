//! The batch pipeline as a library call.
//!
//! Everything the `rspt` binary does is reachable programmatically: parse a
//! JSON run configuration, build the context, and invoke a command. Output
//! files land in the context's directory, stamped with the tool version and
//! the SHA-256 of the exact config bytes — rerunning the same bytes yields
//! byte-identical files.

use rspt::config::RunConfig;
use rspt::run::{cmd_solve, RunContext};
use std::path::{Path, PathBuf};

fn main() -> rspt::Result<()> {
    let config_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/toy_solve.json");
    let raw_config = std::fs::read(&config_path)?;
    let config = RunConfig::from_json(std::str::from_utf8(&raw_config).expect("utf-8 config"))?;

    let out_dir = std::env::temp_dir().join("rspt-config-run");
    let ctx = RunContext {
        raw_config,
        base_dir: config_path.parent().map(PathBuf::from).expect("config has a parent"),
        out_dir,
        quiet: false,
    };

    println!("running the solve pipeline on {}", config_path.display());
    let written = cmd_solve(&config, &ctx)?;
    for path in &written {
        println!("wrote {}", path.display());
    }

    let report = std::fs::read_to_string(&written[0])?;
    let first_lines: Vec<&str> = report.lines().take(6).collect();
    println!("\nreport header:\n{}", first_lines.join("\n"));
    Ok(())
}
