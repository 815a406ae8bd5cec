//! Dense complex linear algebra and random-state primitives for small
//! dimensions, shared by every other module.
//!
//! Everything here is plain `ndarray` data: states are validated wrappers
//! around `Array1<Complex64>`, density matrices around `Array2<Complex64>`.
//! The only eigendecomposition the crate ever needs is the closed-form 2x2
//! Hermitian one (pointer observables), so there is no general eigensolver.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{tol, Error, Result};

pub type C64 = Complex64;
pub type CVec = Array1<C64>;
pub type CMat = Array2<C64>;

/// `<u|v>` with the physics convention: conjugate-linear in the first slot.
pub fn inner(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

/// Squared Hilbert-Schmidt (Frobenius) distance `sum_ij |a_ij - b_ij|^2`.
pub fn frobenius_dist2(a: &CMat, b: &CMat) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "frobenius_dist2: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum())
}

/// Largest entrywise deviation from Hermiticity, `max |m - m^dag|`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let (r, c) = m.dim();
    debug_assert_eq!(r, c);
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in i..c {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a 2x2 Hermitian matrix, eigenvalues sorted
/// descending, eigenvectors orthonormal and paired with their eigenvalues.
pub fn eig_hermitian_2x2(h: &CMat) -> Result<([f64; 2], [CVec; 2])> {
    if h.dim() != (2, 2) {
        return Err(Error::ShapeMismatch(format!(
            "eig_hermitian_2x2: {:?}",
            h.dim()
        )));
    }
    let defect = hermiticity_defect(h);
    if defect > tol::VALIDATE {
        return Err(Error::NotHermitian(defect));
    }
    let a = h[[0, 0]].re;
    let c = h[[1, 1]].re;
    let b = h[[0, 1]];
    let mid = 0.5 * (a + c);
    let half_gap = 0.5 * (a - c);
    let radius = (half_gap * half_gap + b.norm_sqr()).sqrt();
    let scale = a.abs().max(c.abs()).max(b.norm());
    if radius <= scale * 1e-15 {
        // Multiple of the identity (or zero): any orthonormal pair works.
        let e0 = basis_cvec(2, 0);
        let e1 = basis_cvec(2, 1);
        return Ok(([mid + radius, mid - radius], [e0, e1]));
    }
    let lams = [mid + radius, mid - radius];
    let vecs = lams.map(|lam| {
        // Two algebraically equivalent eigenvector forms; take the better
        // conditioned one so nothing cancels when b is tiny.
        let v1 = [b, C64::new(lam - a, 0.0)];
        let v2 = [C64::new(lam - c, 0.0), b.conj()];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        let inv = 1.0 / n.sqrt();
        let mut out = CVec::from(vec![v[0] * inv, v[1] * inv]);
        // Canonical phase: largest-modulus component real positive, so the
        // decomposition is deterministic and sampling built on it stays
        // byte-reproducible.
        let k = if out[0].norm() >= out[1].norm() { 0 } else { 1 };
        let phase = out[k].conj() / out[k].norm();
        out.mapv_inplace(|z| z * phase);
        out
    });
    Ok((lams, vecs))
}

fn basis_cvec(dim: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

/// A unit-norm pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVec,
}

impl PureState {
    /// Wrap an amplitude vector, enforcing unit norm within `tol::VALIDATE`.
    pub fn new(amplitudes: CVec) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > tol::VALIDATE {
            return Err(Error::InvalidState(format!(
                "norm^2 = {norm2} is not 1 within {:.0e}",
                tol::VALIDATE
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalize an arbitrary nonzero vector into a state.
    pub fn from_unnormalized(v: CVec) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2.is_finite() && norm2 > 0.0) {
            return Err(Error::EstimationFailure(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        let inv = 1.0 / norm2.sqrt();
        Self::new(v.mapv(|z| z * inv))
    }

    /// Computational basis vector `|k>`.
    pub fn basis_vector(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        Self {
            amplitudes: basis_cvec(dim, k),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// Rank-one projector `|self><self|`.
    pub fn projector(&self) -> CMat {
        let d = self.dim();
        CMat::from_shape_fn((d, d), |(i, j)| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        })
    }

    /// Multiply by a global phase factor (must be unimodular).
    pub fn with_phase(&self, phase: C64) -> Result<Self> {
        if (phase.norm() - 1.0).abs() > tol::VALIDATE {
            return Err(Error::InvalidState(format!(
                "phase factor has modulus {}",
                phase.norm()
            )));
        }
        Self::new(self.amplitudes.mapv(|z| z * phase))
    }
}

/// A validated density matrix: Hermitian, unit trace, eigenvalues above
/// `-tol::PSD_SLACK`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c || r == 0 {
            return Err(Error::InvalidDensity(format!("shape {:?}", matrix.dim())));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > tol::VALIDATE {
            return Err(Error::InvalidDensity(format!(
                "hermiticity defect {defect:.3e}"
            )));
        }
        let trace: C64 = matrix.diag().sum();
        if (trace.re - 1.0).abs() > tol::VALIDATE || trace.im.abs() > tol::VALIDATE {
            return Err(Error::InvalidDensity(format!("trace {trace}")));
        }
        // PSD within slack: Cholesky of (m + slack*I) must not hit a pivot
        // below roundoff noise. Cheaper than an eigensolver and just as binding.
        let min_pivot = min_cholesky_pivot(&matrix, tol::PSD_SLACK);
        if min_pivot < -1e-12 {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue beyond slack (cholesky pivot {min_pivot:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// `|phi><phi|`.
    pub fn from_pure(phi: &PureState) -> Self {
        Self {
            matrix: phi.projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = C64::new(1.0 / dim as f64, 0.0);
        Self {
            matrix: CMat::eye(dim) * w,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// `<bra|rho|ket>`.
    pub fn matrix_element(&self, bra: &PureState, ket: &PureState) -> C64 {
        let rho_ket = self.matrix.dot(ket.amplitudes());
        inner(bra.amplitudes(), &rho_ket)
    }
}

/// Minimum pivot met while Cholesky-factorizing `m + shift*I` in place.
///
/// For a Hermitian input this is negative (beyond roundoff) iff some
/// eigenvalue lies below `-shift`.
fn min_cholesky_pivot(m: &CMat, shift: f64) -> f64 {
    let d = m.nrows();
    let mut l = vec![vec![C64::new(0.0, 0.0); d]; d];
    let mut min_pivot = f64::INFINITY;
    for j in 0..d {
        let mut pivot = m[[j, j]].re + shift;
        for v in &l[j][..j] {
            pivot -= v.norm_sqr();
        }
        min_pivot = min_pivot.min(pivot);
        if pivot < -1e-12 {
            return pivot; // definitely not PSD within slack
        }
        let ljj = pivot.max(0.0).sqrt();
        l[j][j] = C64::new(ljj, 0.0);
        for i in (j + 1)..d {
            if ljj == 0.0 {
                continue; // semidefinite direction; later pivots absorb errors
            }
            let mut s = m[[i, j]];
            for (a, b) in l[i][..j].iter().zip(&l[j][..j]) {
                s -= a * b.conj();
            }
            l[i][j] = s / ljj;
        }
    }
    min_pivot
}

/// Haar-uniform random pure state: normalized i.i.d. complex Gaussians.
pub fn haar_random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "random states need dim >= 2",
        });
    }
    let v = CVec::from_shape_fn(dim, |_| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    PureState::from_unnormalized(v)
}

/// Random full-rank density matrix `G G^dag / tr(G G^dag)` with Ginibre `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "random states need dim >= 2",
        });
    }
    let g = CMat::from_shape_fn((dim, dim), |_| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let m = g.dot(&dagger(&g));
    let trace: f64 = m.diag().iter().map(|z| z.re).sum();
    DensityMatrix::new(m.mapv(|z| z / trace))
}
