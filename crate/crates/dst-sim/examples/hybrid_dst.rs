//! The two-step hybrid estimator.
//!
//! Step one runs the row-by-row estimator at strong coupling on a slice of
//! the budget and collapses the matrix to a rough pure state. Step two
//! re-probes along that estimate at moderate coupling, where the
//! single-observable readout is near its probe-matched optimum. The two
//! estimates combine weighted by their calibrated mean squared errors.

use dst_sim::bases::fourier_mub;
use dst_sim::coupling::CouplingStrength;
use dst_sim::dst::{calibrate, hybrid_dst, EstimatorKind, HybridConfig, ReferenceRow};
use dst_sim::metrics::{aggregate, mse_pure};
use dst_sim::qmath::{haar_random_pure, DensityMatrix};
use dst_sim::sampler::{SampleSource, StreamFactory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dim = 4;
    let g1 = CouplingStrength::new(1.2)?;
    let g2 = CouplingStrength::new(0.6)?;
    let (n1, n2) = (2_000, 8_000);

    // calibrated per-step errors at exactly these budgets and couplings
    let e1 = calibrate(dim, g1, n1, EstimatorKind::OriginalCollapse, 200, 5)?;
    let e2 = calibrate(dim, g2, n2, EstimatorKind::RevisedIdealProbe, 200, 5)?;
    println!(
        "calibrated step errors: rough {:.5} (se {:.5}), refined {:.5} (se {:.5})",
        e1.mse, e1.stderr, e2.mse, e2.stderr
    );

    let config = HybridConfig {
        n1,
        n2,
        g1,
        g2,
        weight_e1: e1.mse,
        weight_e2: e2.mse,
        reference_row: ReferenceRow::ArgmaxDiagonal,
    };
    let mub = fourier_mub(dim)?;
    let factory = StreamFactory::new(31, "example/hybrid");

    let reps = 200;
    let mut errors = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut streams = factory.rep(rep as u64);
        let phi = haar_random_pure(dim, &mut streams.task_rng())?;
        let rho = DensityMatrix::from_pure(&phi);
        let est = hybrid_dst(&SampleSource::sampled(&rho), &mub, &config, &mut streams)?;
        errors.push(mse_pure(&est, &phi));
    }
    let report = aggregate(&errors, n1 + n2)?;
    println!(
        "\nhybrid over {} Haar-random states: mse {:.6} +- {:.6}",
        reps, report.mean, report.stderr
    );
    println!(
        "scaled by the {} copies: {:.2} (conventional baseline at d=4: {})",
        n1 + n2,
        report.scaled,
        dst_sim::baselines::mub_scaled_mse(dim)
    );
    Ok(())
}
