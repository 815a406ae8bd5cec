//! Finite-statistics layer: joint outcome distributions for a pointer
//! observable measured after postselection, seeded sampling of those
//! distributions, and empirical estimates of the products `P_j W_j`.
//!
//! Every estimator in the crate consumes a [`SampleSource`], which is either
//! the simulated experiment (counts drawn from the exact distribution) or the
//! infinite-statistics substitute (the exact probabilities themselves). The
//! substitution happens at the frequency level, so both paths share all
//! downstream arithmetic.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bases::OrthonormalBasis;
use crate::coupling::{postselected_block, CouplingStrength};
use crate::qmath::{eig_hermitian_2x2, CMat, DensityMatrix, PureState, C64};
use crate::{Error, Result};

/// Joint distribution over (postselection outcome j, pointer eigenvalue
/// index s) for one measured pointer observable.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    probabilities: Array2<f64>, // shape (d, 2)
    eigenvalues: [f64; 2],
}

impl JointDistribution {
    /// Validate and wrap a probability table: entries may dip to `-1e-14`
    /// from roundoff (clamped to zero), and must sum to 1 within `1e-12`.
    pub fn new(probabilities: Array2<f64>, eigenvalues: [f64; 2]) -> Result<Self> {
        if probabilities.ncols() != 2 || probabilities.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "joint distribution shape {:?}",
                probabilities.dim()
            )));
        }
        let mut table = probabilities;
        for p in table.iter_mut() {
            if *p < -1e-14 {
                return Err(Error::EstimationFailure(format!(
                    "joint probability {p} below clamping tolerance"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::EstimationFailure(format!(
                "joint probabilities sum to {total}"
            )));
        }
        table.mapv_inplace(|p| p / total);
        Ok(Self {
            probabilities: table,
            eigenvalues,
        })
    }

    pub fn dim(&self) -> usize {
        self.probabilities.nrows()
    }

    pub fn probabilities(&self) -> &Array2<f64> {
        &self.probabilities
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        self.eigenvalues
    }
}

/// Counts of joint outcomes from `total` draws.
#[derive(Debug, Clone)]
pub struct OutcomeTally {
    counts: Array2<u64>, // shape (d, 2)
    total: u64,
}

impl OutcomeTally {
    pub fn counts(&self) -> &Array2<u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Empirical frequencies `c(j,s)/M`.
    pub fn frequencies(&self) -> Array2<f64> {
        let m = self.total as f64;
        self.counts.mapv(|c| c as f64 / m)
    }
}

/// Estimates of the products `P_j W_j`, one per postselection outcome.
#[derive(Debug, Clone)]
pub struct WeakValueTable {
    pw: Vec<C64>,
    samples_per_observable: usize,
}

impl WeakValueTable {
    pub fn pw(&self) -> &[C64] {
        &self.pw
    }

    pub fn samples_per_observable(&self) -> usize {
        self.samples_per_observable
    }
}

/// Statistics of measuring `pointer_obs` on the pointer jointly with the
/// postselection outcome, after coupling `rho_s` through `|a><a|` at
/// strength `g`.
pub fn joint_distribution(
    rho_s: &DensityMatrix,
    a: &PureState,
    g: CouplingStrength,
    post_basis: &OrthonormalBasis,
    pointer_obs: &CMat,
) -> Result<JointDistribution> {
    let (lams, vecs) = eig_hermitian_2x2(pointer_obs)?;
    let d = post_basis.dim();
    let mut table = Array2::zeros((d, 2));
    for (j, psi) in post_basis.vectors().iter().enumerate() {
        let b = postselected_block(rho_s, a, psi, g);
        for s in 0..2 {
            let v = &vecs[s];
            let mut acc = C64::new(0.0, 0.0);
            for u in 0..2 {
                for w in 0..2 {
                    acc += v[u].conj() * b[[u, w]] * v[w];
                }
            }
            table[[j, s]] = acc.re;
        }
    }
    JointDistribution::new(table, lams)
}

/// Draw `m` i.i.d. joint outcomes by inverse CDF over the flattened table.
pub fn sample_tally<R: Rng + ?Sized>(
    dist: &JointDistribution,
    m: usize,
    rng: &mut R,
) -> OutcomeTally {
    let d = dist.dim();
    let mut cdf = Vec::with_capacity(2 * d);
    let mut acc = 0.0;
    for j in 0..d {
        for s in 0..2 {
            acc += dist.probabilities[[j, s]];
            cdf.push(acc);
        }
    }
    // Guard the top edge so u close to 1 can never fall off the table.
    *cdf.last_mut().unwrap() = 1.0;
    let mut counts = Array2::zeros((d, 2));
    for _ in 0..m {
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c <= u);
        counts[[idx / 2, idx % 2]] += 1u64;
    }
    OutcomeTally {
        counts,
        total: m as u64,
    }
}

fn s_values(freq: &Array2<f64>, eigenvalues: [f64; 2]) -> Vec<f64> {
    (0..freq.nrows())
        .map(|j| eigenvalues[0] * freq[[j, 0]] + eigenvalues[1] * freq[[j, 1]])
        .collect()
}

/// Combine per-outcome expectation estimates of the two deformed
/// observables into `pw[j] = (1/2g) [ -S_y(j) + i S_x(j) ]`.
pub(crate) fn pw_from_frequencies(
    freq_y: &Array2<f64>,
    eig_y: [f64; 2],
    freq_x: &Array2<f64>,
    eig_x: [f64; 2],
    g: CouplingStrength,
    samples_per_observable: usize,
) -> Result<WeakValueTable> {
    if freq_y.dim() != freq_x.dim() {
        return Err(Error::ShapeMismatch(format!(
            "frequency tables {:?} vs {:?}",
            freq_y.dim(),
            freq_x.dim()
        )));
    }
    let sy = s_values(freq_y, eig_y);
    let sx = s_values(freq_x, eig_x);
    let inv = 1.0 / (2.0 * g.get());
    let pw = sy
        .iter()
        .zip(&sx)
        .map(|(&y, &x)| C64::new(-y, x) * inv)
        .collect();
    Ok(WeakValueTable {
        pw,
        samples_per_observable,
    })
}

/// Estimate the products `P_j W_j` from two tallies: one taken in the
/// deformed-sigma-y eigenbasis, one in the deformed-sigma-x eigenbasis.
pub fn estimate_pw(
    tally_y: &OutcomeTally,
    tally_x: &OutcomeTally,
    eig_y: [f64; 2],
    eig_x: [f64; 2],
    g: CouplingStrength,
) -> Result<WeakValueTable> {
    if tally_y.total == 0 || tally_x.total == 0 {
        return Err(Error::BudgetTooSmall { budget: 0, min: 1 });
    }
    pw_from_frequencies(
        &tally_y.frequencies(),
        eig_y,
        &tally_x.frequencies(),
        eig_x,
        g,
        tally_y.total.min(tally_x.total) as usize,
    )
}

/// How an estimator obtains outcome frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    /// Infinite-statistics substitute: exact probabilities as frequencies.
    Exact,
    /// Monte Carlo counts from the seeded stream.
    Sampled,
}

/// The simulated experiment an estimator draws from: the true state plus
/// the statistics mode.
#[derive(Clone, Copy)]
pub struct SampleSource<'a> {
    rho: &'a DensityMatrix,
    statistics: Statistics,
}

impl<'a> SampleSource<'a> {
    pub fn exact(rho: &'a DensityMatrix) -> Self {
        Self {
            rho,
            statistics: Statistics::Exact,
        }
    }

    pub fn sampled(rho: &'a DensityMatrix) -> Self {
        Self {
            rho,
            statistics: Statistics::Sampled,
        }
    }

    pub fn rho(&self) -> &DensityMatrix {
        self.rho
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    /// Outcome frequencies for `m` copies: exact probabilities or a seeded
    /// empirical table, depending on the mode.
    pub(crate) fn frequencies(
        &self,
        dist: &JointDistribution,
        m: usize,
        rng: &mut ChaCha8Rng,
    ) -> Array2<f64> {
        match self.statistics {
            Statistics::Exact => dist.probabilities.clone(),
            Statistics::Sampled => sample_tally(dist, m, rng).frequencies(),
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Deterministic per-task RNG streams: a master seed plus a domain label
/// select the cipher key, and (repetition, task counter) select the stream.
/// Tasks never share a stream, so repetitions can run on any number of
/// threads without changing a single drawn number.
#[derive(Debug, Clone, Copy)]
pub struct StreamFactory {
    key: u64,
}

impl StreamFactory {
    pub fn new(master_seed: u64, domain: &str) -> Self {
        Self {
            key: master_seed ^ fnv1a64(domain.as_bytes()),
        }
    }

    pub fn rep(&self, rep: u64) -> RepStreams {
        assert!(rep < (1 << 48), "repetition index overflows stream space");
        RepStreams {
            key: self.key,
            rep,
            task: 0,
        }
    }
}

/// Hands out the per-task streams of one repetition, in call order.
#[derive(Debug)]
pub struct RepStreams {
    key: u64,
    rep: u64,
    task: u64,
}

impl RepStreams {
    pub fn task_rng(&mut self) -> ChaCha8Rng {
        assert!(self.task < (1 << 16), "task counter overflows stream space");
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream((self.rep << 16) | self.task);
        self.task += 1;
        rng
    }
}
