//! Error functionals: exact Hilbert-Schmidt squared error, the purity-gap
//! approximation to it, pure-state shortcuts, and repetition aggregation
//! into mean / standard error / scaled summaries.

use serde::{Deserialize, Serialize};

use crate::qmath::{frobenius_dist2, CMat, PureState};
use crate::{Error, Result};

/// Aggregated error of repeated reconstructions at copy budget `n`.
/// `scaled` folds the budget back in (`mean * n`) so strategies with
/// different budgets compare at equal resources.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MseReport {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub scaled: f64,
    pub n: usize,
}

/// Exact squared Hilbert-Schmidt distance between two operators.
/// For pure states it reduces to `2 (1 - |<est|truth>|^2)`.
pub fn mse_exact(estimate: &CMat, truth: &CMat) -> Result<f64> {
    frobenius_dist2(estimate, truth)
}

/// Pure-state shortcut for [`mse_exact`] on the two projectors.
pub fn mse_pure(estimate: &PureState, truth: &PureState) -> f64 {
    2.0 * (1.0 - estimate.overlap(truth).norm_sqr())
}

/// `|<a|b>|^2`.
pub fn fidelity_pure(a: &PureState, b: &PureState) -> f64 {
    a.overlap(b).norm_sqr()
}

/// Purity-gap approximation `tr(est^dag est) - tr(truth^2)`.
///
/// Diagnostic only: it can be negative, and it collapses to zero whenever
/// both operators are pure, so it cannot rank pure-state estimators.
pub fn mse_purity_approx(estimate: &CMat, truth: &CMat) -> Result<f64> {
    if estimate.dim() != truth.dim() {
        return Err(Error::ShapeMismatch(format!(
            "mse_purity_approx: {:?} vs {:?}",
            estimate.dim(),
            truth.dim()
        )));
    }
    let est_purity: f64 = estimate.iter().map(|z| z.norm_sqr()).sum();
    let mut truth_purity = 0.0;
    let d = truth.nrows();
    for i in 0..d {
        for j in 0..d {
            truth_purity += (truth[[i, j]] * truth[[j, i]]).re;
        }
    }
    Ok(est_purity - truth_purity)
}

/// Mean, standard error of the mean, and budget-scaled mean of repeated
/// per-reconstruction errors. Kahan-compensated sums keep the result
/// independent of summation order to well below reporting precision.
pub fn aggregate(values: &[f64], n: usize) -> Result<MseReport> {
    if values.is_empty() {
        return Err(Error::EstimationFailure(
            "cannot aggregate an empty value list".into(),
        ));
    }
    let mean = kahan_sum(values.iter().copied()) / values.len() as f64;
    let stderr = if values.len() < 2 {
        0.0
    } else {
        let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        (ss / (values.len() - 1) as f64).sqrt() / (values.len() as f64).sqrt()
    };
    Ok(MseReport {
        mean,
        stderr,
        reps: values.len(),
        scaled: mean * n as f64,
        n,
    })
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
