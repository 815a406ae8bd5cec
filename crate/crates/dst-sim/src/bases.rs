//! Measurement and postselection bases: Fourier-conjugate pairs, complete
//! mutually unbiased sets for prime dimension, Gram-Schmidt extension, and
//! the uniform-superposition probe state used by the hybrid estimator.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64;

use crate::qmath::{inner, CVec, PureState, C64};
use crate::{tol, Error, Result};

/// An ordered, complete orthonormal basis of a `dim`-dimensional space.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    dim: usize,
    vectors: Vec<PureState>,
}

impl OrthonormalBasis {
    /// Validate completeness (`dim` vectors of dimension `dim`) and pairwise
    /// orthonormality within `tol::BASIS`.
    pub fn new(vectors: Vec<PureState>) -> Result<Self> {
        let dim = match vectors.first() {
            Some(v) => v.dim(),
            None => return Err(Error::InvalidState("empty basis".into())),
        };
        if vectors.len() != dim || vectors.iter().any(|v| v.dim() != dim) {
            return Err(Error::InvalidState(format!(
                "basis needs exactly {dim} vectors of dimension {dim}"
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                let ov = vectors[i].overlap(&vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (ov.norm() - target).abs() > tol::BASIS {
                    return Err(Error::InvalidState(format!(
                        "basis not orthonormal: |<v_{i}|v_{j}>| = {}",
                        ov.norm()
                    )));
                }
            }
        }
        Ok(Self { dim, vectors })
    }

    /// The computational basis `{|0>, ..., |dim-1>}`.
    pub fn computational(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "basis needs dim >= 2",
            });
        }
        let vectors = (0..dim).map(|k| PureState::basis_vector(dim, k)).collect();
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[PureState] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &PureState {
        &self.vectors[k]
    }
}

/// A pair of mutually unbiased bases: the measured basis `{|a_n>}` and the
/// postselection basis `{|psi_j>}`, with `|<psi_j|a_n>| = 1/sqrt(d)` for all
/// pairs.
#[derive(Debug, Clone)]
pub struct MubPair {
    basis_a: OrthonormalBasis,
    basis_psi: OrthonormalBasis,
}

impl MubPair {
    pub fn new(basis_a: OrthonormalBasis, basis_psi: OrthonormalBasis) -> Result<Self> {
        let d = basis_a.dim();
        if basis_psi.dim() != d {
            return Err(Error::ShapeMismatch(format!(
                "MUB pair dims {d} vs {}",
                basis_psi.dim()
            )));
        }
        let target = 1.0 / (d as f64).sqrt();
        for j in 0..d {
            for n in 0..d {
                let ov = basis_psi.vector(j).overlap(basis_a.vector(n)).norm();
                if (ov - target).abs() > tol::BASIS {
                    return Err(Error::InvalidState(format!(
                        "not mutually unbiased: |<psi_{j}|a_{n}>| = {ov}, want {target}"
                    )));
                }
            }
        }
        Ok(Self { basis_a, basis_psi })
    }

    pub fn dim(&self) -> usize {
        self.basis_a.dim()
    }

    pub fn basis_a(&self) -> &OrthonormalBasis {
        &self.basis_a
    }

    pub fn basis_psi(&self) -> &OrthonormalBasis {
        &self.basis_psi
    }
}

/// Unit phase `e^{2 pi i k / d}` with the exponent reduced first, so the
/// same rational angle always maps to the same float.
fn root_of_unity(k: i64, d: usize) -> C64 {
    let m = k.rem_euclid(d as i64);
    Complex64::from_polar(1.0, 2.0 * PI * m as f64 / d as f64)
}

/// Computational basis paired with its Fourier conjugate:
/// `psi_j[n] = e^{2 pi i j n / d} / sqrt(d)`.
pub fn fourier_mub(dim: usize) -> Result<MubPair> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "MUB pair needs dim >= 2",
        });
    }
    let basis_a = OrthonormalBasis::computational(dim)?;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut psis = Vec::with_capacity(dim);
    for j in 0..dim {
        let amps: CVec = Array1::from_shape_fn(dim, |n| {
            root_of_unity((j * n) as i64, dim) * scale
        });
        psis.push(PureState::new(amps)?);
    }
    MubPair::new(basis_a, OrthonormalBasis::new(psis)?)
}

/// Extend a unit vector to a full orthonormal basis with `v` as the exact
/// (bitwise) first element.
///
/// The remaining directions are seeded from the computational basis in
/// order; a candidate whose residual after projection is shorter than
/// `tol::COLLAPSE_SKIP` is discarded (it is already spanned) and the next
/// one is tried. Projection is applied twice so orthogonality holds to
/// machine precision, not just to first order.
pub fn gram_schmidt_extend(v: &PureState) -> Result<OrthonormalBasis> {
    let d = v.dim();
    let mut vectors: Vec<PureState> = Vec::with_capacity(d);
    vectors.push(v.clone());
    for k in 0..d {
        if vectors.len() == d {
            break;
        }
        let mut r = PureState::basis_vector(d, k).amplitudes().clone();
        for _ in 0..2 {
            for b in &vectors {
                let coeff = inner(b.amplitudes(), &r);
                r = r - b.amplitudes().mapv(|z| z * coeff);
            }
        }
        let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < tol::COLLAPSE_SKIP {
            continue; // candidate already (numerically) in the span
        }
        vectors.push(PureState::new(r.mapv(|z| z / norm))?);
    }
    if vectors.len() != d {
        return Err(Error::InvalidState(
            "gram-schmidt could not complete the basis".into(),
        ));
    }
    Ok(OrthonormalBasis { dim: d, vectors })
}

/// Uniform superposition of all basis elements, `(1/sqrt(d)) sum_i |b_i>`.
///
/// Its overlap with every basis element has squared modulus exactly `1/d`,
/// which is what makes it a safe probe for the pure-state readout.
pub fn probe_state(basis: &OrthonormalBasis) -> Result<PureState> {
    let d = basis.dim();
    let mut sum = CVec::zeros(d);
    for b in basis.vectors() {
        sum += b.amplitudes();
    }
    PureState::from_unnormalized(sum)
}

/// Trial-division primality check; complete MUB sets exist (here) only for
/// prime dimensions.
pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Complete set of `d + 1` mutually unbiased bases for prime `d`: the
/// computational basis plus `d` Fourier-type bases with quadratic phases,
/// `v^{(a)}_t[k] = w^{a k^2 + t k} / sqrt(d)` for odd primes (the qubit set
/// is the three Pauli eigenbases).
pub fn complete_mub_set(dim: usize) -> Result<Vec<OrthonormalBasis>> {
    if !is_prime(dim) {
        return Err(Error::NonPrimeDimension(dim));
    }
    if dim == 2 {
        let h = 1.0 / f64::sqrt(2.0);
        let c = |re: f64, im: f64| C64::new(re, im);
        let x0 = PureState::new(CVec::from(vec![c(h, 0.), c(h, 0.)]))?;
        let x1 = PureState::new(CVec::from(vec![c(h, 0.), c(-h, 0.)]))?;
        let y0 = PureState::new(CVec::from(vec![c(h, 0.), c(0., h)]))?;
        let y1 = PureState::new(CVec::from(vec![c(h, 0.), c(0., -h)]))?;
        return Ok(vec![
            OrthonormalBasis::computational(2)?,
            OrthonormalBasis::new(vec![x0, x1])?,
            OrthonormalBasis::new(vec![y0, y1])?,
        ]);
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let mut out = vec![OrthonormalBasis::computational(dim)?];
    for a in 0..dim {
        let mut vectors = Vec::with_capacity(dim);
        for t in 0..dim {
            let amps: CVec = Array1::from_shape_fn(dim, |k| {
                root_of_unity((a * k * k + t * k) as i64, dim) * scale
            });
            vectors.push(PureState::new(amps)?);
        }
        out.push(OrthonormalBasis::new(vectors)?);
    }
    Ok(out)
}
