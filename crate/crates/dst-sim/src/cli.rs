//! Command-line front end: flag parsing, optional JSON config overlay,
//! and process exit codes.
//!
//! Precedence per field is flags, then config file, then the selected
//! experiment's defaults. Exit codes distinguish the failure families a
//! caller can act on:
//!
//! * `0` success
//! * `1` usage, configuration, or I/O errors
//! * `2` estimation failed on the given data
//! * `3` calibration entries or file missing

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Deserialize;

use crate::harness::{run_experiment, write_output, Experiment, ExperimentConfig, RunOutput};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "dst-sim",
    about = "Weak-value state reconstruction experiments",
    disable_help_subcommand = true
)]
struct Cli {
    /// Experiment: fig1-sweep, fig2-sweep, fig3-dims, calibrate, single-run
    #[arg(long)]
    experiment: Option<String>,
    /// JSON file whose keys mirror the flag names; flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hilbert-space dimension (single-run; the sweeps fix or grid it)
    #[arg(long)]
    dim: Option<usize>,
    /// Total copy budget (per-dimension coefficient for fig3-dims/calibrate)
    #[arg(long)]
    copies: Option<usize>,
    /// First-step copy budget of the hybrid
    #[arg(long)]
    n1: Option<usize>,
    /// Second-step copy budget of the hybrid
    #[arg(long)]
    n2: Option<usize>,
    /// First-step (and fig1) coupling strength
    #[arg(long)]
    g1: Option<f64>,
    /// Second-step coupling strength; defaults per dimension
    #[arg(long)]
    g2: Option<f64>,
    /// Monte Carlo repetitions per grid point
    #[arg(long)]
    reps: Option<usize>,
    /// Seed from which every repetition's RNG streams derive
    #[arg(long = "seed")]
    master_seed: Option<u64>,
    /// Comma-separated sweep angles in radians, inside (0, pi)
    #[arg(long, value_delimiter = ',')]
    theta_grid: Option<Vec<f64>>,
    /// Comma-separated dimensions, each inside 2..=15
    #[arg(long, value_delimiter = ',')]
    dim_grid: Option<Vec<usize>>,
    /// Output file; defaults to <experiment>.<format>
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
    /// Calibration table path (written by calibrate, read by the rest)
    #[arg(long)]
    calibration_file: Option<PathBuf>,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    jobs: Option<usize>,
}

/// Config-file mirror of the flags, all optional.
#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct FileConfig {
    experiment: Option<String>,
    dim: Option<usize>,
    copies: Option<usize>,
    n1: Option<usize>,
    n2: Option<usize>,
    g1: Option<f64>,
    g2: Option<f64>,
    reps: Option<usize>,
    master_seed: Option<u64>,
    theta_grid: Option<Vec<f64>>,
    dim_grid: Option<Vec<usize>>,
    out: Option<PathBuf>,
    format: Option<String>,
    calibration_file: Option<PathBuf>,
    jobs: Option<usize>,
}

fn load_file_config(path: Option<&PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

/// Merge flags over config-file values over experiment defaults.
fn resolve(cli: &Cli, file: &FileConfig) -> Result<ExperimentConfig> {
    let experiment: Experiment = cli
        .experiment
        .as_deref()
        .or(file.experiment.as_deref())
        .ok_or_else(|| {
            Error::InvalidConfig(
                "no experiment selected; pass --experiment or set it in the config file".into(),
            )
        })?
        .parse()?;

    let mut config = ExperimentConfig::defaults(experiment);
    let copies = cli.copies.or(file.copies);
    let n1 = cli.n1.or(file.n1);
    let n2 = cli.n2.or(file.n2);

    if let Some(v) = cli.dim.or(file.dim) {
        config.dim = v;
    }
    if let Some(v) = cli.g1.or(file.g1) {
        config.g1 = v;
    }
    if let Some(v) = cli.g2.or(file.g2) {
        config.g2 = Some(v);
    }
    if let Some(v) = cli.reps.or(file.reps) {
        config.reps = v;
    }
    if let Some(v) = cli.master_seed.or(file.master_seed) {
        config.master_seed = v;
    }
    if let Some(v) = cli.theta_grid.clone().or_else(|| file.theta_grid.clone()) {
        config.theta_grid = v;
    }
    if let Some(v) = cli.dim_grid.clone().or_else(|| file.dim_grid.clone()) {
        config.dim_grid = v;
    }
    if let Some(v) = cli.out.clone().or_else(|| file.out.clone()) {
        config.out = Some(v);
    }
    if let Some(v) = cli.format.as_deref().or(file.format.as_deref()) {
        config.format = v.parse()?;
    }
    if let Some(v) = cli
        .calibration_file
        .clone()
        .or_else(|| file.calibration_file.clone())
    {
        config.calibration_file = Some(v);
    }
    if let Some(v) = cli.jobs.or(file.jobs) {
        config.jobs = Some(v);
    }

    // Budget resolution: a lone total keeps the default 1:4 split; a lone
    // split sets the total; partial overrides must stay consistent, which
    // validate() checks after the fact.
    match (copies, n1, n2) {
        (Some(c), None, None) => {
            config.copies = c;
            config.n1 = c / 5;
            config.n2 = c - c / 5;
        }
        (None, Some(a), Some(b)) => {
            config.n1 = a;
            config.n2 = b;
            config.copies = a + b;
        }
        (c, a, b) => {
            if let Some(c) = c {
                config.copies = c;
            }
            if let Some(a) = a {
                config.n1 = a;
            }
            if let Some(b) = b {
                config.n2 = b;
            }
        }
    }

    config.validate()?;
    Ok(config)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::MissingCalibration(_) | Error::MissingCalibrationFile(_) => 3,
        Error::EstimationFailure(_) | Error::InvalidProbe { .. } => 2,
        _ => 1,
    }
}

fn summarize(config: &ExperimentConfig, output: &RunOutput, path: Option<&PathBuf>) -> String {
    match output {
        RunOutput::Calibration(table) => format!(
            "{}: {} entries -> {} (seed {})",
            config.experiment,
            table.entries().len(),
            config
                .calibration_file
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            config.master_seed
        ),
        _ => format!(
            "{}: {} records -> {} (seed {})",
            config.experiment,
            output.record_count(),
            path.map(|p| p.display().to_string())
                .unwrap_or_else(|| "(no file)".into()),
            config.master_seed
        ),
    }
}

fn run(cli: &Cli) -> Result<String> {
    let file = load_file_config(cli.config.as_ref())?;
    let config = resolve(cli, &file)?;
    let output = run_experiment(&config)?;
    let path = write_output(&config, &output)?;
    Ok(summarize(&config, &output, path.as_ref()))
}

/// Parse `argv`, run the selected experiment, and return the process exit
/// code. Errors print one `error: ...` line to stderr.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("dst-sim").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"experiment": "fig1-sweep", "reps": 44, "master-seed": 9, "g1": 0.7}"#,
        )
        .unwrap();
        let cli = parse(&["--config", path.to_str().unwrap(), "--reps", "55"]);
        let file = load_file_config(cli.config.as_ref()).unwrap();
        let config = resolve(&cli, &file).unwrap();
        assert_eq!(config.experiment, Experiment::Fig1Sweep);
        assert_eq!(config.reps, 55); // flag beats file
        assert_eq!(config.master_seed, 9); // file beats default
        assert_eq!(config.g1, 0.7);
        assert_eq!(config.copies, 100); // untouched default
    }

    #[test]
    fn grids_parse_from_comma_lists_and_json_arrays() {
        let cli = parse(&[
            "--experiment",
            "fig3-dims",
            "--dim-grid",
            "2,3,5",
            "--calibration-file",
            "cal.json",
        ]);
        let config = resolve(&cli, &FileConfig::default()).unwrap();
        assert_eq!(config.dim_grid, vec![2, 3, 5]);

        let file: FileConfig =
            serde_json::from_str(r#"{"theta-grid": [0.5, 1.0], "dim-grid": [2, 7]}"#).unwrap();
        let cli = parse(&["--experiment", "fig1"]);
        let config = resolve(&cli, &file).unwrap();
        assert_eq!(config.theta_grid, vec![0.5, 1.0]);
        assert_eq!(config.dim_grid, vec![2, 7]);
    }

    #[test]
    fn budget_split_resolution() {
        // lone total rescales the split
        let cli = parse(&["--experiment", "fig2", "--copies", "1000"]);
        let config = resolve(&cli, &FileConfig::default()).unwrap();
        assert_eq!((config.copies, config.n1, config.n2), (1000, 200, 800));

        // lone split sets the total
        let cli = parse(&["--experiment", "fig2", "--n1", "300", "--n2", "700"]);
        let config = resolve(&cli, &FileConfig::default()).unwrap();
        assert_eq!((config.copies, config.n1, config.n2), (1000, 300, 700));

        // inconsistent override is rejected
        let cli = parse(&["--experiment", "fig2", "--copies", "1000", "--n1", "999"]);
        assert!(resolve(&cli, &FileConfig::default()).is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, r#"{"experiment": "fig1", "copy": 5}"#).unwrap();
        let cli = parse(&["--config", path.to_str().unwrap()]);
        assert!(matches!(
            load_file_config(cli.config.as_ref()),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn exit_codes_partition_the_error_space() {
        assert_eq!(exit_code(&Error::MissingCalibration("x".into())), 3);
        assert_eq!(exit_code(&Error::MissingCalibrationFile("x".into())), 3);
        assert_eq!(exit_code(&Error::EstimationFailure("x".into())), 2);
        assert_eq!(
            exit_code(&Error::InvalidProbe {
                index: 0,
                overlap: 0.0
            }),
            2
        );
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), 1);
        assert_eq!(
            exit_code(&Error::BudgetTooSmall { budget: 1, min: 4 }),
            1
        );
        assert_eq!(exit_code(&Error::NonPrimeDimension(4)), 1);
    }

    #[test]
    fn cli_main_smoke_and_failure_paths() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sweep.csv");
        let code = cli_main([
            "dst-sim",
            "--experiment",
            "fig1",
            "--reps",
            "5",
            "--theta-grid",
            "1.0,2.0",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 3);

        // unknown flag: usage error
        assert_eq!(cli_main(["dst-sim", "--nope"]), 1);
        // no experiment anywhere
        assert_eq!(cli_main(["dst-sim"]), 1);
        // hybrid without a calibration file: distinct exit code
        assert_eq!(
            cli_main([
                "dst-sim",
                "--experiment",
                "fig2",
                "--reps",
                "1",
                "--theta-grid",
                "1.0"
            ]),
            3
        );
        // help is not an error
        assert_eq!(cli_main(["dst-sim", "--help"]), 0);
    }
}
