//! Experiment orchestration: the shipped sweep configurations, seeded
//! parallel repetition loops, and CSV/JSON record output.
//!
//! Four sweep experiments plus a calibration builder:
//!
//! * `fig1-sweep` — single-observable readout error across qubit states
//!   `cos(theta/2)|0> + sin(theta/2)|1>`.
//! * `fig2-sweep` — the two-step hybrid across the same state family.
//! * `fig3-dims` — budget-scaled hybrid error across dimensions, next to
//!   the analytic and simulated baselines.
//! * `calibrate` — measures the per-step error weights the hybrid needs and
//!   persists them; hybrid experiments refuse to run without that file
//!   rather than silently self-calibrating.
//! * `single-run` — one hybrid configuration, one result row.
//!
//! Repetitions fan out over a thread pool; every repetition owns
//! numbered RNG streams, and records assemble in repetition order, so
//! output bytes are identical for any thread count.

use std::fmt;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{mub_scaled_mse, mub_tomography_sim, sic_scaled_mse};
use crate::bases::{fourier_mub, is_prime};
use crate::coupling::CouplingStrength;
use crate::dst::{
    calibrate, hybrid_dst, revised_dst, CalibrationTable, EstimatorKind, HybridConfig,
    ReferenceRow,
};
use crate::metrics::{aggregate, mse_pure};
use crate::qmath::{haar_random_pure, CVec, DensityMatrix, PureState, C64};
use crate::sampler::{SampleSource, StreamFactory};
use crate::{Error, Result};

/// The available experiments; short aliases (`fig1`, `single`, ...) parse too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fig1Sweep,
    Fig2Sweep,
    Fig3Dims,
    Calibrate,
    SingleRun,
}

impl Experiment {
    pub fn token(self) -> &'static str {
        match self {
            Experiment::Fig1Sweep => "fig1-sweep",
            Experiment::Fig2Sweep => "fig2-sweep",
            Experiment::Fig3Dims => "fig3-dims",
            Experiment::Calibrate => "calibrate",
            Experiment::SingleRun => "single-run",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig1-sweep" | "fig1" => Experiment::Fig1Sweep,
            "fig2-sweep" | "fig2" => Experiment::Fig2Sweep,
            "fig3-dims" | "fig3" => Experiment::Fig3Dims,
            "calibrate" => Experiment::Calibrate,
            "single-run" | "single" => Experiment::SingleRun,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown experiment '{other}' (expected fig1-sweep, fig2-sweep, fig3-dims, calibrate, or single-run)"
                )))
            }
        })
    }
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown output format '{other}' (expected csv or json)"
                )))
            }
        })
    }
}

/// Fully resolved experiment parameters. For `fig3-dims` and `calibrate`
/// the budgets are per-dimension coefficients (total copies `= copies * d`);
/// everywhere else they are literal copy counts.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub copies: usize,
    pub n1: usize,
    pub n2: usize,
    pub g1: f64,
    /// `None` applies the per-dimension default from [`default_g2`].
    pub g2: Option<f64>,
    pub reps: usize,
    pub master_seed: u64,
    pub theta_grid: Vec<f64>,
    pub dim_grid: Vec<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub calibration_file: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// The default sweep grid: 33 evenly spaced angles on `[0.02 pi, 0.98 pi]`,
/// keeping clear of the endpoints where the readout denominator vanishes.
/// The midpoint of the grid is exactly `pi/2`.
pub fn default_theta_grid() -> Vec<f64> {
    let step = 0.03 * std::f64::consts::PI;
    (0..33).map(|k| 0.02 * std::f64::consts::PI + k as f64 * step).collect()
}

/// Default refinement coupling per dimension, tuned once per dimension
/// range; dimensions outside 2..=15 have no default and must set one
/// explicitly.
pub fn default_g2(dim: usize) -> Result<f64> {
    Ok(match dim {
        2..=3 => 0.4,
        4..=8 => 0.6,
        9 => 0.7,
        10..=12 => 0.8,
        13..=15 => 0.9,
        _ => {
            return Err(Error::InvalidDimension {
                dim,
                reason: "no default refinement coupling outside 2..=15; pass g2 explicitly",
            })
        }
    })
}

impl ExperimentConfig {
    /// Per-experiment defaults; flag and config-file values overlay these.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            dim: 2,
            copies: 100,
            n1: 20,
            n2: 80,
            g1: 1.2,
            g2: None,
            reps: 10_000,
            master_seed: 0,
            theta_grid: default_theta_grid(),
            dim_grid: (2..=15).collect(),
            out: None,
            format: OutputFormat::Csv,
            calibration_file: None,
            jobs: None,
        };
        match experiment {
            Experiment::Fig1Sweep => base,
            Experiment::Fig2Sweep => Self {
                copies: 20_000,
                n1: 4_000,
                n2: 16_000,
                ..base
            },
            Experiment::Fig3Dims => Self {
                copies: 10_000,
                n1: 2_000,
                n2: 8_000,
                reps: 1_000,
                ..base
            },
            Experiment::Calibrate => Self {
                copies: 10_000,
                n1: 2_000,
                n2: 8_000,
                reps: 400,
                ..base
            },
            Experiment::SingleRun => Self {
                copies: 10_000,
                n1: 2_000,
                n2: 8_000,
                reps: 100,
                ..base
            },
        }
    }

    /// Output path: the explicit one, or `<experiment>.<ext>`.
    pub fn output_path(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            PathBuf::from(format!(
                "{}.{}",
                self.experiment.token(),
                self.format.extension()
            ))
        })
    }

    fn g2_for(&self, dim: usize) -> Result<CouplingStrength> {
        let g = match self.g2 {
            Some(g) => g,
            None => default_g2(dim)?,
        };
        CouplingStrength::new(g)
    }

    /// Cross-field validation shared by all run entry points.
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 || self.copies == 0 {
            return Err(Error::InvalidConfig(
                "copies and reps must be positive".into(),
            ));
        }
        match self.experiment {
            Experiment::Fig1Sweep | Experiment::Fig2Sweep => {
                if self.dim != 2 {
                    return Err(Error::InvalidConfig(format!(
                        "{} sweeps a qubit state family; dim must be 2, got {}",
                        self.experiment, self.dim
                    )));
                }
                if self.theta_grid.is_empty() {
                    return Err(Error::InvalidConfig("theta grid is empty".into()));
                }
                for &t in &self.theta_grid {
                    if !(t.is_finite() && t > 0.0 && t < std::f64::consts::PI) {
                        return Err(Error::InvalidConfig(format!(
                            "theta {t} outside the open interval (0, pi)"
                        )));
                    }
                }
            }
            Experiment::Fig3Dims | Experiment::Calibrate => {
                if self.dim_grid.is_empty() {
                    return Err(Error::InvalidConfig("dimension grid is empty".into()));
                }
                for &d in &self.dim_grid {
                    if !(2..=15).contains(&d) {
                        return Err(Error::InvalidConfig(format!(
                            "dimension {d} outside the supported grid 2..=15"
                        )));
                    }
                }
            }
            Experiment::SingleRun => {
                if self.dim < 2 {
                    return Err(Error::InvalidConfig(format!(
                        "dim must be at least 2, got {}",
                        self.dim
                    )));
                }
            }
        }
        if matches!(
            self.experiment,
            Experiment::Fig2Sweep | Experiment::Fig3Dims | Experiment::SingleRun
        ) && self.n1 + self.n2 != self.copies
        {
            return Err(Error::InvalidConfig(format!(
                "step budgets must split the total: n1 ({}) + n2 ({}) != copies ({})",
                self.n1, self.n2, self.copies
            )));
        }
        Ok(())
    }
}

/// One sweep point of the theta experiments.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaRecord {
    pub theta_rad: f64,
    pub mse_mean: f64,
    pub mse_stderr: f64,
    pub reps: usize,
}

/// Strategy column of the dimension experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimStrategy {
    Hybrid,
    MubAnalytic,
    SicAnalytic,
    MubSimulated,
}

impl fmt::Display for DimStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DimStrategy::Hybrid => "hybrid",
            DimStrategy::MubAnalytic => "mub-analytic",
            DimStrategy::SicAnalytic => "sic-analytic",
            DimStrategy::MubSimulated => "mub-simulated",
        })
    }
}

/// One row of the dimension experiment; analytic rows carry zero stderr
/// and zero reps.
#[derive(Debug, Clone, Serialize)]
pub struct DimRecord {
    pub dim: usize,
    pub strategy: DimStrategy,
    pub scaled_mse: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// The qubit sweep family `cos(theta/2)|0> + sin(theta/2)|1>`.
pub fn sweep_state(theta: f64) -> PureState {
    let half = theta / 2.0;
    PureState::new(CVec::from(vec![
        C64::new(half.cos(), 0.0),
        C64::new(half.sin(), 0.0),
    ]))
    .expect("cos/sin pair is unit norm")
}

/// Single-observable readout error across the qubit sweep family: per
/// theta, `reps` seeded reconstructions at the full copy budget, probing
/// `|0><0|` against the Fourier partner basis.
pub fn run_fig1(config: &ExperimentConfig) -> Result<Vec<ThetaRecord>> {
    config.validate()?;
    let g = CouplingStrength::new(config.g1)?;
    let mub = fourier_mub(2)?;
    let probe = mub.basis_a().vector(0).clone();
    let factory = StreamFactory::new(config.master_seed, "fig1");
    let reps = config.reps;

    let mut records = Vec::with_capacity(config.theta_grid.len());
    for (k, &theta) in config.theta_grid.iter().enumerate() {
        let phi = sweep_state(theta);
        let rho = DensityMatrix::from_pure(&phi);
        let errors: Vec<f64> = (0..reps as u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let mut streams = factory.rep((k * reps) as u64 + i);
                let est = revised_dst(
                    &SampleSource::sampled(&rho),
                    &probe,
                    mub.basis_psi(),
                    g,
                    config.copies,
                    &mut streams,
                )?;
                Ok(mse_pure(&est, &phi))
            })
            .collect::<Result<Vec<_>>>()?;
        let report = aggregate(&errors, config.copies)?;
        records.push(ThetaRecord {
            theta_rad: theta,
            mse_mean: report.mean,
            mse_stderr: report.stderr,
            reps,
        });
    }
    Ok(records)
}

fn hybrid_weights(
    table: &CalibrationTable,
    dim: usize,
    g1: CouplingStrength,
    n1: usize,
    g2: CouplingStrength,
    n2: usize,
) -> Result<(f64, f64)> {
    let e1 = table
        .lookup(dim, g1.get(), n1, EstimatorKind::OriginalCollapse)
        .ok_or_else(|| {
            Error::MissingCalibration(format!(
                "no original-collapse entry for d={dim}, g={}, n={n1}; run the calibrate experiment first",
                g1.get()
            ))
        })?
        .mse;
    let e2 = table
        .lookup(dim, g2.get(), n2, EstimatorKind::RevisedIdealProbe)
        .ok_or_else(|| {
            Error::MissingCalibration(format!(
                "no revised-ideal-probe entry for d={dim}, g={}, n={n2}; run the calibrate experiment first",
                g2.get()
            ))
        })?
        .mse;
    Ok((e1, e2))
}

/// Hybrid error across the qubit sweep family, weighted by calibrated
/// per-step errors.
pub fn run_fig2(config: &ExperimentConfig, table: &CalibrationTable) -> Result<Vec<ThetaRecord>> {
    config.validate()?;
    let g1 = CouplingStrength::new(config.g1)?;
    let g2 = config.g2_for(config.dim)?;
    let (e1, e2) = hybrid_weights(table, 2, g1, config.n1, g2, config.n2)?;
    let mub = fourier_mub(2)?;
    let hybrid = HybridConfig {
        n1: config.n1,
        n2: config.n2,
        g1,
        g2,
        weight_e1: e1,
        weight_e2: e2,
        reference_row: ReferenceRow::ArgmaxDiagonal,
    };
    let factory = StreamFactory::new(config.master_seed, "fig2");
    let reps = config.reps;

    let mut records = Vec::with_capacity(config.theta_grid.len());
    for (k, &theta) in config.theta_grid.iter().enumerate() {
        let phi = sweep_state(theta);
        let rho = DensityMatrix::from_pure(&phi);
        let errors: Vec<f64> = (0..reps as u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let mut streams = factory.rep((k * reps) as u64 + i);
                let est = hybrid_dst(&SampleSource::sampled(&rho), &mub, &hybrid, &mut streams)?;
                Ok(mse_pure(&est, &phi))
            })
            .collect::<Result<Vec<_>>>()?;
        let report = aggregate(&errors, config.copies)?;
        records.push(ThetaRecord {
            theta_rad: theta,
            mse_mean: report.mean,
            mse_stderr: report.stderr,
            reps,
        });
    }
    Ok(records)
}

/// Budget-scaled hybrid error across dimensions on Haar-random states,
/// with analytic baselines per dimension and the simulated baseline where
/// a complete unbiased-basis set exists (prime dimensions). Budgets scale
/// with dimension: total `copies * d`, split `n1 * d` / `n2 * d`.
pub fn run_fig3(config: &ExperimentConfig, table: &CalibrationTable) -> Result<Vec<DimRecord>> {
    config.validate()?;
    let g1 = CouplingStrength::new(config.g1)?;
    let reps = config.reps;
    let mut records = Vec::new();

    for &d in &config.dim_grid {
        let total = config.copies * d;
        let n1 = config.n1 * d;
        let n2 = config.n2 * d;
        let g2 = config.g2_for(d)?;
        let (e1, e2) = hybrid_weights(table, d, g1, n1, g2, n2)?;
        let hybrid = HybridConfig {
            n1,
            n2,
            g1,
            g2,
            weight_e1: e1,
            weight_e2: e2,
            reference_row: ReferenceRow::ArgmaxDiagonal,
        };
        let mub = fourier_mub(d)?;
        let factory = StreamFactory::new(config.master_seed, &format!("fig3/d{d}"));

        let errors: Vec<f64> = (0..reps as u64)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let mut streams = factory.rep(rep);
                let phi = haar_random_pure(d, &mut streams.task_rng())?;
                let rho = DensityMatrix::from_pure(&phi);
                let est = hybrid_dst(&SampleSource::sampled(&rho), &mub, &hybrid, &mut streams)?;
                Ok(mse_pure(&est, &phi))
            })
            .collect::<Result<Vec<_>>>()?;
        let report = aggregate(&errors, total)?;
        records.push(DimRecord {
            dim: d,
            strategy: DimStrategy::Hybrid,
            scaled_mse: report.scaled,
            stderr: report.stderr * total as f64,
            reps,
        });
        records.push(DimRecord {
            dim: d,
            strategy: DimStrategy::MubAnalytic,
            scaled_mse: mub_scaled_mse(d),
            stderr: 0.0,
            reps: 0,
        });
        records.push(DimRecord {
            dim: d,
            strategy: DimStrategy::SicAnalytic,
            scaled_mse: sic_scaled_mse(d),
            stderr: 0.0,
            reps: 0,
        });
        if is_prime(d) {
            let sim_factory = StreamFactory::new(config.master_seed, &format!("fig3/mub-sim/d{d}"));
            let mut rng = sim_factory.rep(0).task_rng();
            let phi = haar_random_pure(d, &mut rng)?;
            let sim = mub_tomography_sim(&phi, total, reps, &mut rng)?;
            records.push(DimRecord {
                dim: d,
                strategy: DimStrategy::MubSimulated,
                scaled_mse: sim.scaled_mse,
                stderr: sim.stderr,
                reps,
            });
        }
    }
    Ok(records)
}

/// Build (or extend) the calibration table the hybrid experiments consume:
/// for every dimension in the grid, one entry per hybrid step at that
/// dimension's budgets and couplings.
pub fn run_calibrate(config: &ExperimentConfig) -> Result<CalibrationTable> {
    config.validate()?;
    let path = config.calibration_file.as_ref().ok_or_else(|| {
        Error::InvalidConfig("the calibrate experiment needs --calibration-file".into())
    })?;
    let mut table = if path.exists() {
        CalibrationTable::load(path)?
    } else {
        CalibrationTable::new()
    };
    let g1 = CouplingStrength::new(config.g1)?;
    for &d in &config.dim_grid {
        let g2 = config.g2_for(d)?;
        table.upsert(calibrate(
            d,
            g1,
            config.n1 * d,
            EstimatorKind::OriginalCollapse,
            config.reps,
            config.master_seed,
        )?);
        table.upsert(calibrate(
            d,
            g2,
            config.n2 * d,
            EstimatorKind::RevisedIdealProbe,
            config.reps,
            config.master_seed,
        )?);
    }
    table.save(path)?;
    Ok(table)
}

/// One hybrid configuration on Haar-random states; budgets are literal
/// copy counts here, not per-dimension coefficients.
pub fn run_single(config: &ExperimentConfig, table: &CalibrationTable) -> Result<Vec<DimRecord>> {
    config.validate()?;
    let d = config.dim;
    let g1 = CouplingStrength::new(config.g1)?;
    let g2 = config.g2_for(d)?;
    let (e1, e2) = hybrid_weights(table, d, g1, config.n1, g2, config.n2)?;
    let hybrid = HybridConfig {
        n1: config.n1,
        n2: config.n2,
        g1,
        g2,
        weight_e1: e1,
        weight_e2: e2,
        reference_row: ReferenceRow::ArgmaxDiagonal,
    };
    let mub = fourier_mub(d)?;
    let factory = StreamFactory::new(config.master_seed, "single");
    let errors: Vec<f64> = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let mut streams = factory.rep(rep);
            let phi = haar_random_pure(d, &mut streams.task_rng())?;
            let rho = DensityMatrix::from_pure(&phi);
            let est = hybrid_dst(&SampleSource::sampled(&rho), &mub, &hybrid, &mut streams)?;
            Ok(mse_pure(&est, &phi))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = aggregate(&errors, config.copies)?;
    Ok(vec![DimRecord {
        dim: d,
        strategy: DimStrategy::Hybrid,
        scaled_mse: report.scaled,
        stderr: report.stderr * config.copies as f64,
        reps: config.reps,
    }])
}

/// What an experiment produced.
pub enum RunOutput {
    Theta(Vec<ThetaRecord>),
    Dim(Vec<DimRecord>),
    Calibration(CalibrationTable),
}

impl RunOutput {
    pub fn record_count(&self) -> usize {
        match self {
            RunOutput::Theta(r) => r.len(),
            RunOutput::Dim(r) => r.len(),
            RunOutput::Calibration(t) => t.entries().len(),
        }
    }
}

fn load_required_calibration(config: &ExperimentConfig) -> Result<CalibrationTable> {
    let path = config.calibration_file.as_ref().ok_or_else(|| {
        Error::MissingCalibrationFile(format!(
            "{} needs --calibration-file (run the calibrate experiment to create one)",
            config.experiment
        ))
    })?;
    CalibrationTable::load(path)
}

fn run_dispatch(config: &ExperimentConfig) -> Result<RunOutput> {
    match config.experiment {
        Experiment::Fig1Sweep => Ok(RunOutput::Theta(run_fig1(config)?)),
        Experiment::Fig2Sweep => {
            let table = load_required_calibration(config)?;
            Ok(RunOutput::Theta(run_fig2(config, &table)?))
        }
        Experiment::Fig3Dims => {
            let table = load_required_calibration(config)?;
            Ok(RunOutput::Dim(run_fig3(config, &table)?))
        }
        Experiment::Calibrate => Ok(RunOutput::Calibration(run_calibrate(config)?)),
        Experiment::SingleRun => {
            let table = load_required_calibration(config)?;
            Ok(RunOutput::Dim(run_single(config, &table)?))
        }
    }
}

/// Run the configured experiment, on a dedicated pool when `jobs` is set.
/// Stream seeding keeps results byte-identical for any thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    match config.jobs {
        None => run_dispatch(config),
        Some(jobs) => {
            if jobs == 0 {
                return Err(Error::InvalidConfig("jobs must be positive".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
            pool.install(|| run_dispatch(config))
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    experiment: &'a str,
    master_seed: u64,
    records: &'a [T],
}

fn csv_theta(records: &[ThetaRecord]) -> String {
    let mut s = String::from("theta_rad,mse_mean,mse_stderr,reps\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.theta_rad, r.mse_mean, r.mse_stderr, r.reps
        ));
    }
    s
}

fn csv_dim(records: &[DimRecord]) -> String {
    let mut s = String::from("dim,strategy,scaled_mse,stderr,reps\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.dim, r.strategy, r.scaled_mse, r.stderr, r.reps
        ));
    }
    s
}

fn json_envelope<T: Serialize>(config: &ExperimentConfig, records: &[T]) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&Envelope {
        experiment: config.experiment.token(),
        master_seed: config.master_seed,
        records,
    })?;
    text.push('\n');
    Ok(text)
}

/// Serialize records in the configured format and write them to the output
/// path. Calibration output is persisted by [`run_calibrate`] itself; no
/// sweep file is written for it.
pub fn write_output(config: &ExperimentConfig, output: &RunOutput) -> Result<Option<PathBuf>> {
    let text = match (output, config.format) {
        (RunOutput::Calibration(_), _) => return Ok(None),
        (RunOutput::Theta(r), OutputFormat::Csv) => csv_theta(r),
        (RunOutput::Theta(r), OutputFormat::Json) => json_envelope(config, r)?,
        (RunOutput::Dim(r), OutputFormat::Csv) => csv_dim(r),
        (RunOutput::Dim(r), OutputFormat::Json) => json_envelope(config, r)?,
    };
    let path = config.output_path();
    let mut file = std::fs::File::create(&path)?;
    file.write_all(text.as_bytes())?;
    Ok(Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quick_fig1(reps: usize, seed: u64, grid: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            reps,
            master_seed: seed,
            theta_grid: grid,
            ..ExperimentConfig::defaults(Experiment::Fig1Sweep)
        }
    }

    #[test]
    fn theta_grid_shape() {
        let grid = default_theta_grid();
        assert_eq!(grid.len(), 33);
        assert_abs_diff_eq!(grid[0], 0.02 * std::f64::consts::PI, epsilon = 1e-15);
        assert_abs_diff_eq!(grid[32], 0.98 * std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(grid[16], std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn coupling_defaults_by_dimension() {
        assert_eq!(default_g2(2).unwrap(), 0.4);
        assert_eq!(default_g2(3).unwrap(), 0.4);
        assert_eq!(default_g2(4).unwrap(), 0.6);
        assert_eq!(default_g2(8).unwrap(), 0.6);
        assert_eq!(default_g2(9).unwrap(), 0.7);
        assert_eq!(default_g2(10).unwrap(), 0.8);
        assert_eq!(default_g2(12).unwrap(), 0.8);
        assert_eq!(default_g2(13).unwrap(), 0.9);
        assert_eq!(default_g2(15).unwrap(), 0.9);
        assert!(default_g2(16).is_err());
        assert!(default_g2(1).is_err());
    }

    #[test]
    fn experiment_tokens_roundtrip() {
        for (text, want) in [
            ("fig1", Experiment::Fig1Sweep),
            ("fig1-sweep", Experiment::Fig1Sweep),
            ("fig2", Experiment::Fig2Sweep),
            ("fig3-dims", Experiment::Fig3Dims),
            ("calibrate", Experiment::Calibrate),
            ("single", Experiment::SingleRun),
            ("single-run", Experiment::SingleRun),
        ] {
            assert_eq!(text.parse::<Experiment>().unwrap(), want);
        }
        assert!("fig9".parse::<Experiment>().is_err());
        assert_eq!(Experiment::Fig3Dims.to_string(), "fig3-dims");
    }

    #[test]
    fn config_validation_catches_bad_combinations() {
        let mut config = ExperimentConfig::defaults(Experiment::Fig2Sweep);
        config.n1 = 5_000; // 5000 + 16000 != 20000
        assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));

        let mut config = ExperimentConfig::defaults(Experiment::Fig1Sweep);
        config.theta_grid = vec![3.2];
        assert!(config.validate().is_err());
        config.theta_grid = vec![];
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::defaults(Experiment::Fig3Dims);
        config.dim_grid = vec![16];
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::defaults(Experiment::Fig1Sweep);
        config.dim = 3;
        assert!(config.validate().is_err());
    }

    #[test]
    fn fig1_examples_hold_at_reduced_reps() {
        let config = quick_fig1(
            600,
            11,
            vec![
                0.5 * std::f64::consts::PI,
                0.95 * std::f64::consts::PI,
            ],
        );
        let records = run_fig1(&config).unwrap();
        assert_eq!(records.len(), 2);
        let mid = &records[0];
        let edge = &records[1];
        // reference curve: ~0.031 at the midpoint, ~0.85 near the edge
        assert!(
            (mid.mse_mean - 0.031).abs() < 5.0 * mid.mse_stderr + 0.003,
            "midpoint {} (se {})",
            mid.mse_mean,
            mid.mse_stderr
        );
        assert!(
            edge.mse_mean > 10.0 * mid.mse_mean,
            "edge {} vs midpoint {}",
            edge.mse_mean,
            mid.mse_mean
        );
        for r in &records {
            assert_eq!(r.reps, 600);
            assert!(r.mse_stderr > 0.0);
        }
    }

    #[test]
    fn fig1_is_deterministic_per_seed() {
        let grid = vec![0.4 * std::f64::consts::PI];
        let a = run_fig1(&quick_fig1(50, 3, grid.clone())).unwrap();
        let b = run_fig1(&quick_fig1(50, 3, grid.clone())).unwrap();
        assert_eq!(a[0].mse_mean.to_bits(), b[0].mse_mean.to_bits());
        let c = run_fig1(&quick_fig1(50, 4, grid)).unwrap();
        assert_ne!(a[0].mse_mean.to_bits(), c[0].mse_mean.to_bits());
    }

    fn tiny_calibration(dim_grid: Vec<usize>, copies: usize, n1: usize, n2: usize) -> CalibrationTable {
        let g1 = CouplingStrength::new(1.2).unwrap();
        let mut table = CalibrationTable::new();
        for &d in &dim_grid {
            let g2 = CouplingStrength::new(default_g2(d).unwrap()).unwrap();
            table.upsert(
                calibrate(d, g1, n1 * d, EstimatorKind::OriginalCollapse, 150, 1).unwrap(),
            );
            table.upsert(
                calibrate(d, g2, n2 * d, EstimatorKind::RevisedIdealProbe, 150, 1).unwrap(),
            );
        }
        let _ = copies;
        table
    }

    #[test]
    fn fig2_is_flat_and_beats_the_divergent_sweep() {
        // reduced-budget variant: scale every budget by 1/10 to keep the
        // test quick while preserving the flatness contrast
        let mut config = ExperimentConfig::defaults(Experiment::Fig2Sweep);
        config.copies = 2_000;
        config.n1 = 400;
        config.n2 = 1_600;
        config.reps = 200;
        config.master_seed = 21;
        config.theta_grid = vec![
            0.02 * std::f64::consts::PI,
            0.5 * std::f64::consts::PI,
            0.98 * std::f64::consts::PI,
        ];
        // entries live at literal budgets; the helper stores n * d, so halve
        let table = tiny_calibration(vec![2], 2_000, 200, 800);
        let records = run_fig2(&config, &table).unwrap();
        assert_eq!(records.len(), 3);
        let max = records.iter().map(|r| r.mse_mean).fold(0.0, f64::max);
        let min = records.iter().map(|r| r.mse_mean).fold(f64::MAX, f64::min);
        assert!(max / min < 10.0, "flatness ratio {}", max / min);

        // matched-budget comparison with the single-observable sweep near
        // its divergence: scaled error there is far larger
        let fig1 = run_fig1(&quick_fig1(200, 21, vec![0.95 * std::f64::consts::PI])).unwrap();
        let fig1_scaled = fig1[0].mse_mean * 100.0;
        for r in &records {
            assert!(
                r.mse_mean * config.copies as f64 * 2.0 < fig1_scaled,
                "theta {}: hybrid scaled {} vs divergent scaled {fig1_scaled}",
                r.theta_rad,
                r.mse_mean * config.copies as f64
            );
        }
    }

    #[test]
    fn fig2_requires_calibration_entries() {
        let config = ExperimentConfig::defaults(Experiment::Fig2Sweep);
        let empty = CalibrationTable::new();
        assert!(matches!(
            run_fig2(&config, &empty),
            Err(Error::MissingCalibration(_))
        ));
    }

    #[test]
    fn fig3_rows_and_ordering() {
        let mut config = ExperimentConfig::defaults(Experiment::Fig3Dims);
        config.dim_grid = vec![2, 4];
        config.copies = 1_000;
        config.n1 = 200;
        config.n2 = 800;
        config.reps = 150;
        config.master_seed = 5;
        let table = tiny_calibration(vec![2, 4], 1_000, 200, 800);
        let records = run_fig3(&config, &table).unwrap();
        // d=2 is prime: 4 rows; d=4 composite: 3 rows
        assert_eq!(records.len(), 7);
        let d2: Vec<_> = records.iter().filter(|r| r.dim == 2).collect();
        assert_eq!(d2.len(), 4);
        let hybrid2 = d2
            .iter()
            .find(|r| r.strategy == DimStrategy::Hybrid)
            .unwrap();
        assert!(hybrid2.scaled_mse > 0.0);
        assert!(hybrid2.stderr > 0.0);
        assert_eq!(hybrid2.reps, 150);
        let mub2 = d2
            .iter()
            .find(|r| r.strategy == DimStrategy::MubAnalytic)
            .unwrap();
        assert_eq!(mub2.scaled_mse, 3.0);
        assert_eq!(mub2.stderr, 0.0);
        let sic4 = records
            .iter()
            .find(|r| r.dim == 4 && r.strategy == DimStrategy::SicAnalytic)
            .unwrap();
        assert_eq!(sic4.scaled_mse, 18.0);
        assert!(records
            .iter()
            .all(|r| r.dim == 4 || r.strategy != DimStrategy::MubSimulated || r.dim == 2));
        // hybrid beats the conventional baseline on both grid points
        for &d in &[2usize, 4] {
            let h = records
                .iter()
                .find(|r| r.dim == d && r.strategy == DimStrategy::Hybrid)
                .unwrap();
            assert!(
                h.scaled_mse < mub_scaled_mse(d),
                "d={d}: hybrid {} vs {}",
                h.scaled_mse,
                mub_scaled_mse(d)
            );
        }
    }

    #[test]
    fn calibrate_experiment_persists_and_merges() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cal.json");
        let mut config = ExperimentConfig::defaults(Experiment::Calibrate);
        config.dim_grid = vec![2];
        config.n1 = 50;
        config.n2 = 200;
        config.copies = 250;
        config.reps = 100;
        config.calibration_file = Some(path.clone());
        let table = run_calibrate(&config).unwrap();
        assert_eq!(table.entries().len(), 2);
        assert!(path.exists());

        // second run at another dimension merges into the same file
        config.dim_grid = vec![3];
        let table = run_calibrate(&config).unwrap();
        assert_eq!(table.entries().len(), 4);
        let reloaded = CalibrationTable::load(&path).unwrap();
        assert_eq!(reloaded.entries().len(), 4);

        // missing path is a config error
        config.calibration_file = None;
        assert!(matches!(
            run_calibrate(&config),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn single_run_emits_one_hybrid_row() {
        let mut config = ExperimentConfig::defaults(Experiment::SingleRun);
        config.dim = 3;
        config.copies = 900;
        config.n1 = 180;
        config.n2 = 720;
        config.reps = 120;
        let table = {
            let g1 = CouplingStrength::new(1.2).unwrap();
            let g2 = CouplingStrength::new(default_g2(3).unwrap()).unwrap();
            let mut t = CalibrationTable::new();
            t.upsert(calibrate(3, g1, 180, EstimatorKind::OriginalCollapse, 120, 2).unwrap());
            t.upsert(calibrate(3, g2, 720, EstimatorKind::RevisedIdealProbe, 120, 2).unwrap());
            t
        };
        let records = run_single(&config, &table).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].dim, 3);
        assert_eq!(records[0].strategy, DimStrategy::Hybrid);
        assert!(records[0].scaled_mse > 0.0);
    }

    #[test]
    fn csv_schemas_are_stable() {
        let theta = vec![ThetaRecord {
            theta_rad: 0.5,
            mse_mean: 0.25,
            mse_stderr: 0.01,
            reps: 7,
        }];
        assert_eq!(
            csv_theta(&theta),
            "theta_rad,mse_mean,mse_stderr,reps\n0.5,0.25,0.01,7\n"
        );
        let dim = vec![DimRecord {
            dim: 15,
            strategy: DimStrategy::MubAnalytic,
            scaled_mse: 224.0,
            stderr: 0.0,
            reps: 0,
        }];
        assert_eq!(
            csv_dim(&dim),
            "dim,strategy,scaled_mse,stderr,reps\n15,mub-analytic,224,0,0\n"
        );
    }

    #[test]
    fn json_output_carries_seed_and_records() {
        let mut config = ExperimentConfig::defaults(Experiment::Fig1Sweep);
        config.master_seed = 99;
        config.format = OutputFormat::Json;
        let records = vec![ThetaRecord {
            theta_rad: 0.5,
            mse_mean: 0.25,
            mse_stderr: 0.01,
            reps: 7,
        }];
        let text = json_envelope(&config, &records).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["experiment"], "fig1-sweep");
        assert_eq!(value["master_seed"], 99);
        assert_eq!(value["records"][0]["theta_rad"], 0.5);
        assert_eq!(value["records"][0]["reps"], 7);
    }

    #[test]
    fn jobs_setting_does_not_change_results() {
        let grid = vec![0.3 * std::f64::consts::PI, 0.7 * std::f64::consts::PI];
        let mut config = quick_fig1(40, 17, grid);
        config.jobs = Some(1);
        let serial = match run_experiment(&config).unwrap() {
            RunOutput::Theta(r) => r,
            _ => unreachable!(),
        };
        config.jobs = Some(3);
        let parallel = match run_experiment(&config).unwrap() {
            RunOutput::Theta(r) => r,
            _ => unreachable!(),
        };
        for (a, b) in serial.iter().zip(&parallel) {
            assert_eq!(a.mse_mean.to_bits(), b.mse_mean.to_bits());
            assert_eq!(a.mse_stderr.to_bits(), b.mse_stderr.to_bits());
        }
    }

    #[test]
    fn write_output_produces_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = quick_fig1(10, 1, vec![0.5 * std::f64::consts::PI]);
        config.out = Some(dir.path().join("sweep.csv"));
        let output = run_experiment(&config).unwrap();
        let path = write_output(&config, &output).unwrap().unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "theta_rad,mse_mean,mse_stderr,reps");
        assert_eq!(lines.count(), 1);

        config.format = OutputFormat::Json;
        config.out = Some(dir.path().join("sweep.json"));
        let path = write_output(&config, &output).unwrap().unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(value["records"].as_array().unwrap().len(), 1);
    }
}
