//! `onephoton`: run scenario files through the one-photon absorption
//! pipelines and emit one CSV time series plus one JSON summary per run.
//!
//! Exit code 0 means the run completed with every built-in invariant flag
//! passing; anything else is nonzero.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use onephoton::scenario::EXAMPLE_SCENARIOS;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "onephoton",
    version,
    about = "One-photon absorption simulator: coherent pulses vs. thermal light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its CSV time series and JSON summary.
    Run {
        /// Path to a scenario TOML file.
        scenario_file: PathBuf,
        /// Output directory; overrides the scenario's [output] dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the brute-force oracle cross-check.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Parse and validate a scenario file, echoing it with defaults applied.
    Validate {
        /// Path to a scenario TOML file.
        scenario_file: PathBuf,
    },
    /// List the shipped example scenarios.
    ListExamples,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<bool> {
    match Cli::parse().command {
        Command::Run {
            scenario_file,
            out,
            no_oracle,
        } => run(&scenario_file, out.as_deref(), no_oracle),
        Command::Validate { scenario_file } => validate(&scenario_file),
        Command::ListExamples => {
            list_examples();
            Ok(true)
        }
    }
}

fn load_scenario(path: &Path) -> Result<onephoton::Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading scenario file {}", path.display()))?;
    onephoton::parse_scenario(&text)
        .with_context(|| format!("validating scenario file {}", path.display()))
}

fn run(path: &Path, out: Option<&Path>, no_oracle: bool) -> Result<bool> {
    let mut scenario = load_scenario(path)?;
    if no_oracle {
        scenario.analysis.oracle = false;
    }
    let report = onephoton::run_scenario(&scenario)?;

    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");
    let out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&scenario.output.dir));
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let json_path = out_dir.join(format!("{stem}-summary.json"));
    fs::write(&csv_path, report.timeseries_csv())
        .with_context(|| format!("writing {}", csv_path.display()))?;
    fs::write(&json_path, report.summary_json())
        .with_context(|| format!("writing {}", json_path.display()))?;

    println!("scenario: {stem}");
    for scalar in &report.scalars {
        println!(
            "  {:<28} {:>24e}   [{}]",
            scalar.name, scalar.value, scalar.op
        );
    }
    if let Some(bin) = report.frequency_bin_cycles {
        println!(
            "  frequencies (cycles/time)    {:?}   bin {bin:e}",
            report.frequencies_cycles
        );
    }
    if report.oracle.requested && !report.oracle.ran {
        if let Some(reason) = &report.oracle.skipped {
            println!("  oracle skipped: {reason}");
        }
    }
    let flags = &report.invariants;
    println!(
        "  invariants: hermitian {} | psd {} | positive trace {}{}",
        pass(flags.hermitian),
        pass(flags.positive_semidefinite),
        pass(flags.positive_trace),
        match flags.thermal_stationary {
            Some(flag) => format!(" | thermal stationary {}", pass(flag)),
            None => String::new(),
        }
    );
    println!("  wrote {}", csv_path.display());
    println!("  wrote {}", json_path.display());
    println!("result: {}", if report.passed { "PASS" } else { "FAIL" });
    Ok(report.passed)
}

fn pass(flag: bool) -> &'static str {
    if flag {
        "pass"
    } else {
        "FAIL"
    }
}

fn validate(path: &Path) -> Result<bool> {
    let scenario = load_scenario(path)?;
    // consistency beyond parsing: the model must build and the mode counts
    // must line up, which run_scenario would otherwise report at run time
    let model = onephoton::build_bright_dark_model(
        scenario.model.delta,
        scenario.model.coupling,
        scenario.model.n_dark as usize,
        scenario.model.dark_spread,
        scenario.model.dipole,
        false,
    )?;
    let eig = onephoton::eigensystem(&model, onephoton::DEFAULT_DEGENERACY_TOL)?;
    let grid = onephoton::resonant_mode_grid(
        &eig,
        model.ground_energy(),
        scenario.volume(),
        scenario.z(),
    )?;
    let expected = grid.n_modes();
    let got = match &scenario.field.kind {
        onephoton::scenario::FieldKind::Coherent { alphas } => Some(alphas.len()),
        onephoton::scenario::FieldKind::Number { occupations } => Some(occupations.len()),
        onephoton::scenario::FieldKind::Thermal { .. } => None,
    };
    if let Some(got) = got {
        if got != expected {
            bail!(
                "field spec lists {got} per-mode values but the model has {expected} \
                 degeneracy clusters (one radiation mode each)"
            );
        }
    }
    print!("{}", scenario.to_toml());
    Ok(true)
}

fn list_examples() {
    println!("shipped example scenarios (scenarios/<name>.toml):");
    for (name, text) in EXAMPLE_SCENARIOS {
        let description = text
            .lines()
            .take_while(|line| line.starts_with('#'))
            .map(|line| line.trim_start_matches('#').trim())
            .collect::<Vec<_>>()
            .join(" ");
        println!("\n{name}");
        println!("  {description}");
    }
}
