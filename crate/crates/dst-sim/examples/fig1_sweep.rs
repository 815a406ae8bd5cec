//! Single-observable readout error across a qubit state family.
//!
//! Sweeps `cos(theta/2)|0> + sin(theta/2)|1>` with the probe fixed at
//! `|0><0|`. The readout error is near-flat around the probe-matched middle
//! of the sweep and diverges toward `theta = pi`, where the state loses its
//! overlap with the probe vector. Reduced repetitions here; the shipped
//! configuration runs 10000 per angle.

use dst_sim::harness::{run_fig1, Experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::defaults(Experiment::Fig1Sweep);
    config.reps = 300;
    config.master_seed = 42;
    config.theta_grid = (0..9)
        .map(|k| (0.06 + 0.11 * k as f64) * std::f64::consts::PI)
        .collect();

    let records = run_fig1(&config)?;
    println!("{:>10} {:>12} {:>12}", "theta/pi", "mse", "stderr");
    for r in &records {
        println!(
            "{:>10.2} {:>12.5} {:>12.5}",
            r.theta_rad / std::f64::consts::PI,
            r.mse_mean,
            r.mse_stderr
        );
    }

    let min = records.iter().map(|r| r.mse_mean).fold(f64::MAX, f64::min);
    let max = records.iter().map(|r| r.mse_mean).fold(0.0, f64::max);
    println!("\nmax/min error ratio across the sweep: {:.0}", max / min);
    Ok(())
}
