//! Building and persisting an estimator error table.
//!
//! The hybrid weighting needs the mean squared error of each step at its
//! own dimension, coupling, and budget. The table stores those under a
//! versioned JSON schema; the sweep experiments refuse to run without one
//! rather than guessing weights.

use dst_sim::coupling::CouplingStrength;
use dst_sim::dst::{calibrate, CalibrationTable, EstimatorKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g1 = CouplingStrength::new(1.2)?;
    let mut table = CalibrationTable::new();

    println!("{:>3} {:>22} {:>6} {:>8} {:>10}", "d", "estimator", "g", "copies", "mse");
    for d in [2usize, 3] {
        let g2 = CouplingStrength::new(0.4)?;
        for entry in [
            calibrate(d, g1, 2_000 * d, EstimatorKind::OriginalCollapse, 200, 1)?,
            calibrate(d, g2, 8_000 * d, EstimatorKind::RevisedIdealProbe, 200, 1)?,
        ] {
            println!(
                "{:>3} {:>22} {:>6} {:>8} {:>10.6}",
                entry.d, entry.kind.to_string(), entry.g, entry.n, entry.mse
            );
            table.upsert(entry);
        }
    }

    let path = std::env::temp_dir().join("dst-sim-example-calibration.json");
    table.save(&path)?;
    println!("\nsaved {} entries to {}", table.entries().len(), path.display());

    // lookups are exact on (d, kind, n) and tolerant on g roundoff
    let reloaded = CalibrationTable::load(&path)?;
    let hit = reloaded
        .lookup(3, 0.4, 24_000, EstimatorKind::RevisedIdealProbe)
        .expect("entry written above");
    println!("lookup d=3 refined step: mse {:.6} (from {} reps)", hit.mse, hit.reps);
    Ok(())
}
