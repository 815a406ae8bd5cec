//! Budget-scaled hybrid error against conventional tomography across
//! dimensions.
//!
//! Per dimension the hybrid runs on Haar-random pure states with budgets
//! proportional to d, next to the analytic scaled errors of full
//! mutually-unbiased-bases and symmetric-measurement tomography (d^2 - 1
//! and d^2 + d - 2). Reduced grid and repetitions; the shipped run covers
//! d = 2..=15 at 1000 repetitions.

use dst_sim::coupling::CouplingStrength;
use dst_sim::dst::{calibrate, CalibrationTable, EstimatorKind};
use dst_sim::harness::{run_fig3, Experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::defaults(Experiment::Fig3Dims);
    config.dim_grid = vec![2, 3, 5, 8];
    config.copies = 2_000;
    config.n1 = 400;
    config.n2 = 1_600;
    config.reps = 200;
    config.master_seed = 42;

    let g1 = CouplingStrength::new(config.g1)?;
    let mut table = CalibrationTable::new();
    for &d in &config.dim_grid {
        let g2 = CouplingStrength::new(dst_sim::harness::default_g2(d)?)?;
        table.upsert(calibrate(
            d,
            g1,
            config.n1 * d,
            EstimatorKind::OriginalCollapse,
            150,
            1,
        )?);
        table.upsert(calibrate(
            d,
            g2,
            config.n2 * d,
            EstimatorKind::RevisedIdealProbe,
            150,
            1,
        )?);
    }

    let records = run_fig3(&config, &table)?;
    println!(
        "{:>4} {:>15} {:>12} {:>10} {:>6}",
        "dim", "strategy", "scaled mse", "stderr", "reps"
    );
    for r in &records {
        println!(
            "{:>4} {:>15} {:>12.2} {:>10.2} {:>6}",
            r.dim,
            r.strategy.to_string(),
            r.scaled_mse,
            r.stderr,
            r.reps
        );
    }
    println!("\nscaled mse = mean squared error x total copies (here {} x d)", config.copies);
    Ok(())
}
