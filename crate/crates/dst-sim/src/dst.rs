//! The three weak-value reconstruction strategies and the calibration
//! machinery that glues them together.
//!
//! * [`original_dst`] rebuilds every density-matrix row from weak values
//!   taken across a mutually unbiased basis pair, then
//!   [`hermitize_normalize`] and [`collapse_to_pure`] turn the raw rows into
//!   a physical pure-state estimate.
//! * [`revised_dst`] reads a pure state out of a single probe observable,
//!   one weak value per postselection outcome.
//! * [`hybrid_dst`] chains them: a cheap row reconstruction picks the probe
//!   for an accurate single-observable pass, and the two estimates combine
//!   with inverse-error weights from a [`CalibrationTable`].
//!
//! Calibration entries are produced by [`calibrate`] over Haar-random pure
//! states and persisted as versioned JSON.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{fourier_mub, gram_schmidt_extend, probe_state, MubPair, OrthonormalBasis};
use crate::coupling::{deformed_sigma_x, deformed_sigma_y, CouplingStrength};
use crate::metrics::{aggregate, mse_pure};
use crate::qmath::{haar_random_pure, hermiticity_defect, CMat, CVec, DensityMatrix, PureState, C64};
use crate::sampler::{joint_distribution, pw_from_frequencies, RepStreams, SampleSource, StreamFactory};
use crate::{tol, Error, Result};

/// Row-by-row weak-value estimates of `<a_n|rho|a_m>`. Not Hermitian or
/// normalized in general; finite statistics leaves both properties to the
/// later projection step.
#[derive(Debug, Clone)]
pub struct RawRowEstimate {
    rows: CMat,
}

impl RawRowEstimate {
    pub fn new(rows: CMat) -> Result<Self> {
        if rows.nrows() != rows.ncols() || rows.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "row estimate shape {:?}",
                rows.dim()
            )));
        }
        if rows.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::EstimationFailure(
                "row estimate contains non-finite entries".into(),
            ));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &CMat {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.nrows()
    }
}

/// Which row anchors the pure-state collapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceRow {
    /// Largest diagonal entry: the best-conditioned denominator.
    #[default]
    ArgmaxDiagonal,
    /// A fixed row index, kept for the literal one-reference-row readout.
    FixedIndex(usize),
}

/// Estimate every matrix element `<a_n|rho|a_m>` from weak values: for each
/// row `n` the products `P_j W_j` are measured across the unbiased partner
/// basis and resummed with ratio weights `<psi_j|a_m> / <psi_j|a_n>`.
///
/// The copy budget is split evenly over `2 d` tasks (two deformed pointer
/// observables per row); budgets below `2 d` are rejected.
pub fn original_dst(
    source: &SampleSource,
    mub: &MubPair,
    g: CouplingStrength,
    budget: usize,
    streams: &mut RepStreams,
) -> Result<RawRowEstimate> {
    let d = mub.dim();
    if source.rho().dim() != d {
        return Err(Error::ShapeMismatch(format!(
            "state dimension {} vs basis dimension {d}",
            source.rho().dim()
        )));
    }
    let per_task = budget / (2 * d);
    if per_task == 0 {
        return Err(Error::BudgetTooSmall {
            budget,
            min: 2 * d,
        });
    }

    let obs_y = deformed_sigma_y(g);
    let obs_x = deformed_sigma_x(g);
    // ov[(j, m)] = <psi_j|a_m>; unbiasedness keeps every denominator at
    // modulus 1/sqrt(d), so the ratio weights never blow up.
    let ov = CMat::from_shape_fn((d, d), |(j, m)| {
        mub.basis_psi().vector(j).overlap(mub.basis_a().vector(m))
    });

    let mut rows = CMat::zeros((d, d));
    for n in 0..d {
        let a = mub.basis_a().vector(n);
        let dist_y = joint_distribution(source.rho(), a, g, mub.basis_psi(), &obs_y)?;
        let freq_y = source.frequencies(&dist_y, per_task, &mut streams.task_rng());
        let dist_x = joint_distribution(source.rho(), a, g, mub.basis_psi(), &obs_x)?;
        let freq_x = source.frequencies(&dist_x, per_task, &mut streams.task_rng());
        let table = pw_from_frequencies(
            &freq_y,
            dist_y.eigenvalues(),
            &freq_x,
            dist_x.eigenvalues(),
            g,
            per_task,
        )?;
        for m in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for (j, pw) in table.pw().iter().enumerate() {
                acc += ov[[j, m]] / ov[[j, n]] * pw;
            }
            rows[[n, m]] = acc;
        }
    }
    RawRowEstimate::new(rows)
}

/// Project raw rows onto Hermitian unit-trace matrices:
/// `(rows + rows^dag) / tr(rows + rows^dag)`. Fails when the trace is too
/// small to divide by, which signals an unusable reconstruction.
pub fn hermitize_normalize(raw: &RawRowEstimate) -> Result<CMat> {
    let d = raw.dim();
    let a = raw.rows();
    let mut h = CMat::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            h[[i, j]] = a[[i, j]] + a[[j, i]].conj();
        }
    }
    let trace: f64 = (0..d).map(|i| h[[i, i]].re).sum();
    if trace.abs() < tol::VALIDATE {
        return Err(Error::EstimationFailure(format!(
            "hermitized row estimate has trace {trace:.3e}, cannot normalize"
        )));
    }
    h.mapv_inplace(|z| z / trace);
    Ok(h)
}

/// Read a pure state out of a Hermitian unit-trace estimate by eliminating
/// the unknown conjugate amplitudes through one reference row:
/// `c_m = sum_n rho_mn rho_nn / rho_rn`, skipping denominators below
/// `tol::COLLAPSE_SKIP`.
///
/// On an exact pure projector this returns the state itself (up to phase);
/// on a maximally mixed input only the `n = r` term survives and the result
/// degenerates to the reference basis vector.
pub fn collapse_to_pure(rho_e: &CMat, policy: ReferenceRow) -> Result<PureState> {
    let d = rho_e.nrows();
    if rho_e.ncols() != d || d == 0 {
        return Err(Error::ShapeMismatch(format!(
            "collapse input shape {:?}",
            rho_e.dim()
        )));
    }
    let defect = hermiticity_defect(rho_e);
    if defect > tol::PSD_SLACK {
        return Err(Error::NotHermitian(defect));
    }
    let trace: f64 = (0..d).map(|i| rho_e[[i, i]].re).sum();
    if (trace - 1.0).abs() > tol::PSD_SLACK {
        return Err(Error::InvalidDensity(format!(
            "collapse input has trace {trace}, expected 1"
        )));
    }

    let r = match policy {
        ReferenceRow::FixedIndex(r) => {
            if r >= d {
                return Err(Error::InvalidConfig(format!(
                    "reference row {r} out of range for dimension {d}"
                )));
            }
            r
        }
        ReferenceRow::ArgmaxDiagonal => {
            // first maximal diagonal entry, so ties resolve deterministically
            let mut r = 0;
            for i in 1..d {
                if rho_e[[i, i]].re > rho_e[[r, r]].re {
                    r = i;
                }
            }
            r
        }
    };

    let mut c = CVec::zeros(d);
    let mut used = 0usize;
    for n in 0..d {
        let denom = rho_e[[r, n]];
        if denom.norm() < tol::COLLAPSE_SKIP {
            continue;
        }
        used += 1;
        let weight = rho_e[[n, n]] / denom;
        for m in 0..d {
            c[m] += rho_e[[m, n]] * weight;
        }
    }
    if used == 0 {
        return Err(Error::EstimationFailure(format!(
            "every entry of reference row {r} is below the collapse cutoff"
        )));
    }
    PureState::from_unnormalized(c)
}

/// Pure-state readout from a single probe observable `|a><a|`: one weak
/// value per postselection outcome gives the amplitudes
/// `c_j = conj(P_j W_j / <psi_j|a>)` in the postselection basis.
///
/// Requires every `|<psi_j|a>|` above `tol::PROBE_OVERLAP`; the budget is
/// split evenly over the two deformed pointer observables.
pub fn revised_dst(
    source: &SampleSource,
    probe: &PureState,
    post_basis: &OrthonormalBasis,
    g: CouplingStrength,
    budget: usize,
    streams: &mut RepStreams,
) -> Result<PureState> {
    let d = post_basis.dim();
    if probe.dim() != d || source.rho().dim() != d {
        return Err(Error::ShapeMismatch(format!(
            "probe dim {}, state dim {}, basis dim {d}",
            probe.dim(),
            source.rho().dim()
        )));
    }
    let overlaps: Vec<C64> = post_basis
        .vectors()
        .iter()
        .map(|psi| psi.overlap(probe))
        .collect();
    for (j, ov) in overlaps.iter().enumerate() {
        if ov.norm() < tol::PROBE_OVERLAP {
            return Err(Error::InvalidProbe {
                index: j,
                overlap: ov.norm(),
            });
        }
    }
    let per_task = budget / 2;
    if per_task == 0 {
        return Err(Error::BudgetTooSmall { budget, min: 2 });
    }

    let obs_y = deformed_sigma_y(g);
    let obs_x = deformed_sigma_x(g);
    let dist_y = joint_distribution(source.rho(), probe, g, post_basis, &obs_y)?;
    let freq_y = source.frequencies(&dist_y, per_task, &mut streams.task_rng());
    let dist_x = joint_distribution(source.rho(), probe, g, post_basis, &obs_x)?;
    let freq_x = source.frequencies(&dist_x, per_task, &mut streams.task_rng());
    let table = pw_from_frequencies(
        &freq_y,
        dist_y.eigenvalues(),
        &freq_x,
        dist_x.eigenvalues(),
        g,
        per_task,
    )?;

    let mut vec = CVec::zeros(d);
    for (j, psi) in post_basis.vectors().iter().enumerate() {
        let c_j = (table.pw()[j] / overlaps[j]).conj();
        for m in 0..d {
            vec[m] += c_j * psi.amplitudes()[m];
        }
    }
    // A probe orthogonal to the state drives every weak-value product to
    // zero; the roundoff-scale residue left in that case is noise, not a
    // reconstruction, so flag it instead of normalizing it.
    let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < tol::VALIDATE {
        return Err(Error::EstimationFailure(format!(
            "reconstructed amplitudes have norm {norm:.3e}; probe carries no weight on the state"
        )));
    }
    PureState::from_unnormalized(vec)
}

/// Budgets, couplings, and combination weights for the two-step estimator.
/// `weight_e1` / `weight_e2` are the calibrated mean squared errors of the
/// two steps at their respective budgets; the combination divides by them.
#[derive(Debug, Clone)]
pub struct HybridConfig {
    pub n1: usize,
    pub n2: usize,
    pub g1: CouplingStrength,
    pub g2: CouplingStrength,
    pub weight_e1: f64,
    pub weight_e2: f64,
    pub reference_row: ReferenceRow,
}

impl HybridConfig {
    fn validate(&self) -> Result<()> {
        for (name, w) in [("weight_e1", self.weight_e1), ("weight_e2", self.weight_e2)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be a positive finite error weight, got {w}"
                )));
            }
        }
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::InvalidConfig(
                "hybrid step budgets must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Two-step reconstruction: a row estimate collapsed to a rough pure state
/// picks the probe direction, a single-observable readout refines it, and
/// the two estimates average with inverse-error weights after phase
/// alignment.
///
/// When the step outputs are nearly orthogonal (overlap below
/// `tol::PHASE_ALIGN`) no meaningful alignment exists and the step with the
/// smaller calibrated error wins outright.
pub fn hybrid_dst(
    source: &SampleSource,
    mub: &MubPair,
    config: &HybridConfig,
    streams: &mut RepStreams,
) -> Result<PureState> {
    config.validate()?;
    let raw = original_dst(source, mub, config.g1, config.n1, streams)?;
    let rho_e = hermitize_normalize(&raw)?;
    let phi_e = collapse_to_pure(&rho_e, config.reference_row)?;

    let refine_basis = gram_schmidt_extend(&phi_e)?;
    // Uniform superposition over the extended basis: every postselection
    // overlap is exactly 1/sqrt(d), so the probe precondition always holds.
    let probe = probe_state(&refine_basis)?;
    let phi_r = revised_dst(source, &probe, &refine_basis, config.g2, config.n2, streams)?;

    let ov = phi_r.overlap(&phi_e);
    if ov.norm() < tol::PHASE_ALIGN {
        return Ok(if config.weight_e1 <= config.weight_e2 {
            phi_e
        } else {
            phi_r
        });
    }
    let aligned = phi_r.with_phase(ov / ov.norm())?;

    let mut combined = CVec::zeros(phi_e.dim());
    for m in 0..phi_e.dim() {
        combined[m] = phi_e.amplitudes()[m] / config.weight_e1
            + aligned.amplitudes()[m] / config.weight_e2;
    }
    PureState::from_unnormalized(combined)
}

/// Which estimator a calibration entry describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Row reconstruction, hermitized and collapsed to a pure state.
    OriginalCollapse,
    /// Single-observable readout with the probe built from the true state.
    RevisedIdealProbe,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::OriginalCollapse => "original-collapse",
            EstimatorKind::RevisedIdealProbe => "revised-ideal-probe",
        })
    }
}

/// Mean squared error of one estimator at one (dimension, coupling, budget)
/// point, averaged over Haar-random pure states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub d: usize,
    pub g: f64,
    pub n: usize,
    pub kind: EstimatorKind,
    pub mse: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// On-disk calibration format version accepted by [`CalibrationTable::load`].
pub const CALIBRATION_FORMAT_VERSION: u32 = 1;

/// Versioned collection of calibration entries, keyed by
/// (dimension, coupling, budget, estimator kind).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationTable {
    version: u32,
    entries: Vec<CalibrationEntry>,
}

impl Default for CalibrationTable {
    fn default() -> Self {
        Self::new()
    }
}

impl CalibrationTable {
    pub fn new() -> Self {
        Self {
            version: CALIBRATION_FORMAT_VERSION,
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[CalibrationEntry] {
        &self.entries
    }

    fn matches(entry: &CalibrationEntry, d: usize, g: f64, n: usize, kind: EstimatorKind) -> bool {
        entry.d == d && entry.n == n && entry.kind == kind && (entry.g - g).abs() < 1e-12
    }

    /// Insert, replacing any entry with the same key.
    pub fn upsert(&mut self, entry: CalibrationEntry) {
        match self
            .entries
            .iter_mut()
            .find(|e| Self::matches(e, entry.d, entry.g, entry.n, entry.kind))
        {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn lookup(&self, d: usize, g: f64, n: usize, kind: EstimatorKind) -> Option<&CalibrationEntry> {
        self.entries.iter().find(|e| Self::matches(e, d, g, n, kind))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingCalibrationFile(path.display().to_string())
            } else {
                Error::Io(e)
            }
        })?;
        let table: Self = serde_json::from_str(&text)?;
        if table.version != CALIBRATION_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "calibration file {} has version {}, expected {CALIBRATION_FORMAT_VERSION}",
                path.display(),
                table.version
            )));
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Measure one calibration entry: run `kind` on `reps` Haar-random pure
/// states at the given budget and coupling, recording the mean squared
/// error and its standard error. Repetitions run in parallel on seeded
/// streams, so the result does not depend on the thread count.
///
/// Fewer than 100 repetitions give error weights too noisy to divide by and
/// are rejected.
pub fn calibrate(
    d: usize,
    g: CouplingStrength,
    budget: usize,
    kind: EstimatorKind,
    reps: usize,
    master_seed: u64,
) -> Result<CalibrationEntry> {
    if reps < 100 {
        return Err(Error::InvalidConfig(format!(
            "calibration needs at least 100 repetitions, got {reps}"
        )));
    }
    let mub = match kind {
        EstimatorKind::OriginalCollapse => Some(fourier_mub(d)?),
        EstimatorKind::RevisedIdealProbe => None,
    };
    let domain = format!("calibrate/{kind}/d{d}/g{g}/n{budget}", g = g.get());
    let factory = StreamFactory::new(master_seed, &domain);

    let values: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let mut streams = factory.rep(rep);
            let phi = haar_random_pure(d, &mut streams.task_rng())?;
            let rho = DensityMatrix::from_pure(&phi);
            let source = SampleSource::sampled(&rho);
            let est = match (kind, &mub) {
                (EstimatorKind::OriginalCollapse, Some(mub)) => {
                    let raw = original_dst(&source, mub, g, budget, &mut streams)?;
                    let rho_e = hermitize_normalize(&raw)?;
                    collapse_to_pure(&rho_e, ReferenceRow::ArgmaxDiagonal)?
                }
                (EstimatorKind::RevisedIdealProbe, _) => {
                    let basis = gram_schmidt_extend(&phi)?;
                    let probe = probe_state(&basis)?;
                    revised_dst(&source, &probe, &basis, g, budget, &mut streams)?
                }
                (EstimatorKind::OriginalCollapse, None) => unreachable!(),
            };
            Ok(mse_pure(&est, &phi))
        })
        .collect::<Result<Vec<f64>>>()?;

    let report = aggregate(&values, budget)?;
    Ok(CalibrationEntry {
        d,
        g: g.get(),
        n: budget,
        kind,
        mse: report.mean,
        stderr: report.stderr,
        reps,
    })
}
