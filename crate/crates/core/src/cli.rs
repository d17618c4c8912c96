//! Command-line front end: `run` writes spectra, `validate` checks the
//! solvers against the oracles.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::spectra::{SpectraError, Spectrometer, SpectrumResult};
use crate::units::{to_cm1, AMU_IN_ELECTRON_MASSES, ANGSTROM_IN_BOHR, HARTREE_IN_CM1};
use crate::validation::{validate, ValidationError, ValidationPlan};

pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_SWEEP: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const CSV_HEADER: &str = "energy_cm1,abs_coupled,abs_uncoupled,raman_coupled,raman_uncoupled,status";

#[derive(Debug, Parser)]
#[command(name = "curve-crossing", version, about = "Coupled two-channel Green's functions and vibronic spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the photon-energy grid and write CSV, metadata and a plot script.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// CSV path; `.meta.json` and `.plot.py` sidecars are written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the sweep (default: available parallelism).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        threads: Option<u64>,
    },
    /// Compare the production solvers with the grid and closed-form oracles.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Treat informational checks as required.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Validation(ValidationError),
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        match e {
            ValidationError::Config(c) => CliError::Config(c),
            other => CliError::Validation(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Config(_) => EXIT_SCHEMA,
            CliError::Spectra(SpectraError::Config(_)) => EXIT_SCHEMA,
            CliError::Spectra(_) | CliError::Validation(_) => EXIT_SWEEP,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    Ok(RunConfig::from_json(&text)?)
}

/// Sidecar paths for a CSV output path.
pub fn sidecar_paths(out: &Path) -> (PathBuf, PathBuf) {
    (out.with_extension("meta.json"), out.with_extension("plot.py"))
}

pub fn format_csv(result: &SpectrumResult) -> String {
    let mut s = String::with_capacity(128 * (result.energies.len() + 1));
    s += CSV_HEADER;
    s.push('\n');
    for k in 0..result.energies.len() {
        s += &format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            to_cm1(result.energies[k]),
            result.abs_coupled[k],
            result.abs_uncoupled[k],
            result.raman_coupled[k],
            result.raman_uncoupled[k],
            result.status[k].tag()
        );
    }
    s
}

pub fn metadata(cfg: &RunConfig, spectrometer: &Spectrometer, result: &SpectrumResult) -> serde_json::Value {
    serde_json::json!({
        "library": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config": cfg,
        "deviation": { "D_A": result.deviation.absorption, "D_R": result.deviation.raman },
        "points": result.energies.len(),
        "skipped_points": result.skipped(),
        "coupling_sites": result.sites,
        "overlap_levels": {
            "initial": spectrometer.initial_coefficients().len(),
            "final": spectrometer.final_coefficients().len(),
        },
        "units": {
            "amu_in_electron_masses": AMU_IN_ELECTRON_MASSES,
            "angstrom_in_bohr": ANGSTROM_IN_BOHR,
            "hartree_in_cm1": HARTREE_IN_CM1,
        },
        "csv_columns": CSV_HEADER.split(',').collect::<Vec<_>>(),
    })
}

pub fn plot_script(csv_name: &str) -> String {
    PLOT_TEMPLATE.replace("@CSV@", csv_name)
}

const PLOT_TEMPLATE: &str = r#"#!/usr/bin/env python3
"""Overlay coupled (solid) and uncoupled (dashed) absorption and Raman curves."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "@CSV@")
cols = {k: [] for k in ("energy_cm1", "abs_coupled", "abs_uncoupled", "raman_coupled", "raman_uncoupled")}
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        if row["status"] != "ok":
            continue
        for k in cols:
            cols[k].append(float(row[k]))

fig, (ax_a, ax_r) = plt.subplots(2, 1, sharex=True, figsize=(6, 7))
ax_a.plot(cols["energy_cm1"], cols["abs_coupled"], "k-", label="coupled")
ax_a.plot(cols["energy_cm1"], cols["abs_uncoupled"], "k--", label="uncoupled")
ax_a.set_ylabel("absorption")
ax_a.legend()
ax_r.plot(cols["energy_cm1"], cols["raman_coupled"], "k-", label="coupled")
ax_r.plot(cols["energy_cm1"], cols["raman_uncoupled"], "k--", label="uncoupled")
ax_r.set_ylabel("Raman")
ax_r.set_xlabel("photon energy / cm$^{-1}$")
fig.tight_layout()
target = os.path.splitext(path)[0] + ".png"
fig.savefig(target, dpi=150)
print(target)
"#;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(io_error(path))
}

pub fn run(config: &Path, out: &Path, threads: Option<usize>) -> Result<SpectrumResult, CliError> {
    let cfg = load_config(config)?;
    let spectrometer = Spectrometer::new(cfg.spectroscopy()?)?;
    let result = spectrometer.sweep(threads)?;
    let (meta_path, plot_path) = sidecar_paths(out);
    let meta = serde_json::to_string_pretty(&metadata(&cfg, &spectrometer, &result)).expect("metadata serializes");
    write_file(out, &format_csv(&result))?;
    write_file(&meta_path, &(meta + "\n"))?;
    let csv_name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    write_file(&plot_path, &plot_script(&csv_name))?;
    Ok(result)
}

/// Runs the suite, prints the table, and returns whether it passed.
pub fn validate_config(config: &Path, strict: bool, out: &mut impl Write) -> Result<bool, CliError> {
    let cfg = load_config(config)?;
    let report = validate(&cfg, &ValidationPlan::default())?;
    let passed = report.passed(strict);
    let _ = write!(out, "{}", report.table(strict));
    let _ = writeln!(out, "{}", if passed { "all checks passed" } else { "validation failed" });
    Ok(passed)
}

/// Parses `args` (program name first) and executes; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Run { config, out, threads } => run(&config, &out, threads.map(|t| t as usize)).map(|r| {
            eprintln!(
                "wrote {} points ({} skipped), D_A = {:.6e}, D_R = {:.6e}",
                r.energies.len(),
                r.skipped(),
                r.deviation.absorption,
                r.deviation.raman
            );
            0
        }),
        Command::Validate { config, strict } => validate_config(&config, strict, &mut std::io::stdout())
            .map(|passed| if passed { 0 } else { EXIT_VALIDATION_FAILED }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
