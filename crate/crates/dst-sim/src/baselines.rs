//! Conventional-tomography reference points: closed-form scaled errors for
//! mutually-unbiased-bases and SIC measurements, plus a Monte Carlo
//! linear-inversion simulator over a complete MUB set (prime dimensions)
//! that checks the closed form from first principles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bases::complete_mub_set;
use crate::metrics::aggregate;
use crate::qmath::{frobenius_dist2, CMat, PureState, C64};
use crate::{Error, Result};

/// Which baseline produced a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    MubAnalytic,
    SicAnalytic,
    MubSimulated,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::MubAnalytic => "mub-analytic",
            Strategy::SicAnalytic => "sic-analytic",
            Strategy::MubSimulated => "mub-simulated",
        })
    }
}

/// One baseline efficiency figure; `stderr` is zero for the analytic rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineResult {
    pub d: usize,
    pub strategy: Strategy,
    pub scaled_mse: f64,
    pub stderr: f64,
}

/// Budget-scaled mean squared error of MUB tomography on pure states:
/// `d^2 - 1`.
pub fn mub_scaled_mse(d: usize) -> f64 {
    assert!(d >= 2, "dimension must be at least 2");
    (d * d - 1) as f64
}

/// Budget-scaled mean squared error of optimal SIC tomography on pure
/// states: `d^2 + d - 2`.
pub fn sic_scaled_mse(d: usize) -> f64 {
    assert!(d >= 2, "dimension must be at least 2");
    (d * d + d - 2) as f64
}

fn sample_basis_counts<R: Rng + ?Sized>(probs: &[f64], m: usize, rng: &mut R) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    *cdf.last_mut().expect("basis has outcomes") = 1.0;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..m {
        let u: f64 = rng.random();
        counts[cdf.partition_point(|&c| c <= u)] += 1;
    }
    counts
}

/// One linear-inversion reconstruction from a complete MUB set:
/// `rho_hat = sum_{b,k} p_hat(b,k) |psi_bk><psi_bk| - I`, with `n/(d+1)`
/// copies measured per basis. The per-basis frequencies sum to one, so the
/// estimate has unit trace exactly (though it need not be positive).
pub fn mub_linear_inversion<R: Rng + ?Sized>(
    phi: &PureState,
    n: usize,
    rng: &mut R,
) -> Result<CMat> {
    let d = phi.dim();
    let bases = complete_mub_set(d)?;
    let per_basis = n / (d + 1);
    if per_basis == 0 {
        return Err(Error::BudgetTooSmall { budget: n, min: d + 1 });
    }
    let mut est = CMat::eye(d).mapv(|z| -z);
    for basis in &bases {
        let probs: Vec<f64> = basis
            .vectors()
            .iter()
            .map(|v| v.overlap(phi).norm_sqr())
            .collect();
        let counts = sample_basis_counts(&probs, per_basis, rng);
        for (vec, &count) in basis.vectors().iter().zip(&counts) {
            let weight = C64::new(count as f64 / per_basis as f64, 0.0);
            for i in 0..d {
                for j in 0..d {
                    est[[i, j]] += weight * vec.amplitudes()[i] * vec.amplitudes()[j].conj();
                }
            }
        }
    }
    Ok(est)
}

/// Monte Carlo efficiency of MUB linear inversion: mean of
/// `N_used * ||rho_hat - rho||^2` over `reps` independent experiments on
/// the fixed state `phi`, where `N_used = (d+1) * floor(n / (d+1))` is the
/// budget actually consumed.
pub fn mub_tomography_sim<R: Rng + ?Sized>(
    phi: &PureState,
    n: usize,
    reps: usize,
    rng: &mut R,
) -> Result<BaselineResult> {
    let d = phi.dim();
    let per_basis = n / (d + 1);
    if per_basis == 0 {
        return Err(Error::BudgetTooSmall { budget: n, min: d + 1 });
    }
    let n_used = (d + 1) * per_basis;
    let truth = phi.projector();
    let mut errors = Vec::with_capacity(reps);
    for _ in 0..reps {
        let est = mub_linear_inversion(phi, n, rng)?;
        errors.push(frobenius_dist2(&est, &truth)?);
    }
    let report = aggregate(&errors, n_used)?;
    Ok(BaselineResult {
        d,
        strategy: Strategy::MubSimulated,
        scaled_mse: report.scaled,
        stderr: report.stderr * n_used as f64,
    })
}
