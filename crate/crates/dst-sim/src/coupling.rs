//! The system-pointer interaction and weak-value readout.
//!
//! A d-dimensional system couples to a qubit pointer (always prepared in
//! `|0>`) through `U = exp(-i g A x sigma_x)` with `A = |a><a|`. Because
//! `(A x sigma_x)^2 = A x I`, the exponential closes after two terms:
//!
//! `U = I + |a><a| x [(cos g - 1) I - i sin g sigma_x]`
//!
//! Postselecting the system on `|psi>` leaves the pointer in a 2x2 block
//! whose trace is the postselection probability. Two coupling-deformed
//! pointer observables read the weak value back out of that block exactly,
//! at any strength `g` in `(0, pi)` — no weak-coupling expansion involved.

use ndarray::Array2;

use crate::qmath::{CMat, DensityMatrix, PureState, C64};
use crate::{tol, Error, Result};

/// Interaction strength, restricted to `(0, pi)` where the deformed
/// observables are well defined (`sin g != 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingStrength(f64);

impl CouplingStrength {
    pub fn new(g: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0 && g < std::f64::consts::PI) {
            return Err(Error::InvalidCoupling(g));
        }
        Ok(Self(g))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Pointer state conditioned on a system postselection outcome.
///
/// `pointer` is `None` when the outcome probability is below
/// `tol::POSTSELECT_CUTOFF`: conditioning on a never-occurring outcome
/// leaves the pointer undefined.
#[derive(Debug, Clone)]
pub struct PostselectedPointer {
    pub probability: f64,
    pub pointer: Option<CMat>,
}

/// A weak value; `finite` is false when the postselection probability
/// vanished and no value exists.
#[derive(Debug, Clone, Copy)]
pub struct WeakValue {
    pub value: C64,
    pub finite: bool,
}

/// The closed-form joint unitary on system (x) pointer, with system-major
/// index ordering: row `2*i_sys + i_ptr`.
pub fn interaction_unitary(a: &PureState, g: CouplingStrength) -> CMat {
    let d = a.dim();
    let (c, s) = (g.get().cos(), g.get().sin());
    // K = (cos g - 1) I - i sin g sigma_x
    let k00 = C64::new(c - 1.0, 0.0);
    let k01 = C64::new(0.0, -s);
    let mut u = CMat::eye(2 * d);
    for i in 0..d {
        for ip in 0..d {
            let proj = a.amplitudes()[i] * a.amplitudes()[ip].conj();
            u[[2 * i, 2 * ip]] += proj * k00;
            u[[2 * i, 2 * ip + 1]] += proj * k01;
            u[[2 * i + 1, 2 * ip]] += proj * k01;
            u[[2 * i + 1, 2 * ip + 1]] += proj * k00;
        }
    }
    u
}

/// Scalars the postselected block is built from: `q = <psi|rho|psi>`,
/// `w = <psi|a><a|rho|psi>`, `r = |<psi|a>|^2 <a|rho|a>`.
fn block_scalars(rho: &DensityMatrix, a: &PureState, psi: &PureState) -> (f64, C64, f64) {
    let q = rho.matrix_element(psi, psi).re;
    let w = psi.overlap(a) * rho.matrix_element(a, psi);
    let r = psi.overlap(a).norm_sqr() * rho.matrix_element(a, a).re;
    (q, w, r)
}

/// Unnormalized postselected pointer block
/// `B = <psi| U (rho x |0><0|) U^dag |psi>` in closed form; `tr B` is the
/// postselection probability.
pub(crate) fn postselected_block(
    rho: &DensityMatrix,
    a: &PureState,
    psi: &PureState,
    g: CouplingStrength,
) -> CMat {
    let (q, w, r) = block_scalars(rho, a, psi);
    let (c, s) = (g.get().cos(), g.get().sin());
    let b00 = C64::new(q + 2.0 * (c - 1.0) * w.re + r * (c - 1.0) * (c - 1.0), 0.0);
    let b01 = C64::new(0.0, s) * (w.conj() + C64::new(r * (c - 1.0), 0.0));
    let b11 = C64::new(r * s * s, 0.0);
    Array2::from_shape_vec((2, 2), vec![b00, b01, b01.conj(), b11]).unwrap()
}

/// Pointer state after coupling through `|a><a|` and postselecting `|psi>`.
pub fn postselected_pointer(
    rho: &DensityMatrix,
    a: &PureState,
    psi: &PureState,
    g: CouplingStrength,
) -> PostselectedPointer {
    let b = postselected_block(rho, a, psi, g);
    let p = (b[[0, 0]] + b[[1, 1]]).re;
    if p < tol::POSTSELECT_CUTOFF {
        return PostselectedPointer {
            probability: p.max(0.0),
            pointer: None,
        };
    }
    PostselectedPointer {
        probability: p,
        pointer: Some(b.mapv(|z| z / p)),
    }
}

/// Coupling-deformed pointer observable replacing `sigma_y`:
/// `(g/sin g) [sigma_y - tan(g/2)(I - sigma_z)]`.
pub fn deformed_sigma_y(g: CouplingStrength) -> CMat {
    let f = g.get() / g.get().sin();
    let t = (g.get() / 2.0).tan();
    Array2::from_shape_vec(
        (2, 2),
        vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, -f),
            C64::new(0.0, f),
            C64::new(-2.0 * f * t, 0.0),
        ],
    )
    .unwrap()
}

/// Coupling-deformed pointer observable replacing `sigma_x`:
/// `(g/sin g) sigma_x`.
pub fn deformed_sigma_x(g: CouplingStrength) -> CMat {
    let f = g.get() / g.get().sin();
    Array2::from_shape_vec(
        (2, 2),
        vec![
            C64::new(0.0, 0.0),
            C64::new(f, 0.0),
            C64::new(f, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap()
}

fn trace_product(rho: &CMat, obs: &CMat) -> f64 {
    // tr(rho obs) is real for Hermitian factors; drop the roundoff imag part
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += rho[[i, j]] * obs[[j, i]];
        }
    }
    acc.re
}

/// Weak value from the (normalized) postselected pointer via the deformed
/// observables: `W = (1/2g) [ -tr(rho sigma_y') + i tr(rho sigma_x') ]`.
/// Exact at every admissible `g`.
pub fn exact_weak_value(pointer: &CMat, g: CouplingStrength) -> C64 {
    let sy = trace_product(pointer, &deformed_sigma_y(g));
    let sx = trace_product(pointer, &deformed_sigma_x(g));
    C64::new(-sy, sx) / (2.0 * g.get())
}

/// Small-coupling estimator using the undeformed Paulis in place of the
/// deformed observables. Its bias is quadratic in `g` (all error terms in
/// the deformed-vs-undeformed difference are even), vanishing as `g -> 0`.
pub fn approx_weak_value(pointer: &CMat, g: CouplingStrength) -> C64 {
    let sigma_y = Array2::from_shape_vec(
        (2, 2),
        vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap();
    let sigma_x = Array2::from_shape_vec(
        (2, 2),
        vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap();
    let sy = trace_product(pointer, &sigma_y);
    let sx = trace_product(pointer, &sigma_x);
    C64::new(-sy, sx) / (2.0 * g.get())
}

/// The estimable product `P * W = <psi|a><a|rho|psi>`; independent of `g`
/// and of any readout convention. Summed over a complete postselection
/// basis it telescopes to `<a|rho|a>`.
pub fn weak_value_product(rho: &DensityMatrix, a: &PureState, psi: &PureState) -> C64 {
    psi.overlap(a) * rho.matrix_element(a, psi)
}

/// Direct weak-value reference, no pointer machinery: the product
/// `<psi|a><a|rho|psi>` divided by the probability of actually obtaining
/// `|psi>` after coupling at strength `g`. Matches `exact_weak_value` on the
/// postselected pointer identically, for every admissible `g`.
pub fn weak_value_oracle(
    rho: &DensityMatrix,
    a: &PureState,
    psi: &PureState,
    g: CouplingStrength,
) -> WeakValue {
    let (q, w, r) = block_scalars(rho, a, psi);
    let p = q + 2.0 * (1.0 - g.get().cos()) * (r - w.re);
    if p < tol::POSTSELECT_CUTOFF {
        return WeakValue {
            value: C64::new(f64::NAN, f64::NAN),
            finite: false,
        };
    }
    WeakValue {
        value: w / p,
        finite: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::bases::fourier_mub;
    use crate::qmath::{
        dagger, frobenius_dist2, haar_random_pure, random_density_matrix, CVec,
    };

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus_state() -> PureState {
        PureState::from_unnormalized(CVec::from(vec![c(1., 0.), c(1., 0.)])).unwrap()
    }

    /// Literal-construction reference for the postselected block: build the
    /// full 2d x 2d product `U (rho x |0><0|) U^dag` and project the system
    /// factor on `|psi>`. Independent of the closed form under test.
    fn block_by_literal_unitary(
        rho: &DensityMatrix,
        a: &PureState,
        psi: &PureState,
        g: CouplingStrength,
    ) -> CMat {
        let d = rho.dim();
        let u = interaction_unitary(a, g);
        let mut joint = CMat::zeros((2 * d, 2 * d));
        for i in 0..d {
            for j in 0..d {
                joint[[2 * i, 2 * j]] = rho.matrix()[[i, j]]; // pointer |0><0|
            }
        }
        let evolved = u.dot(&joint).dot(&dagger(&u));
        let mut b = CMat::zeros((2, 2));
        for s in 0..2 {
            for sp in 0..2 {
                let mut acc = c(0., 0.);
                for i in 0..d {
                    for j in 0..d {
                        acc += psi.amplitudes()[i].conj()
                            * evolved[[2 * i + s, 2 * j + sp]]
                            * psi.amplitudes()[j];
                    }
                }
                b[[s, sp]] = acc;
            }
        }
        b
    }

    #[test]
    fn coupling_strength_domain() {
        assert!(CouplingStrength::new(1.2).is_ok());
        assert!(CouplingStrength::new(0.0).is_err());
        assert!(CouplingStrength::new(std::f64::consts::PI).is_err());
        assert!(CouplingStrength::new(-0.3).is_err());
        assert!(CouplingStrength::new(f64::NAN).is_err());
    }

    #[test]
    fn unitary_near_identity_at_tiny_coupling() {
        let g = CouplingStrength::new(1e-9).unwrap();
        let a = plus_state();
        let u = interaction_unitary(&a, g);
        let id = CMat::eye(4);
        assert!(frobenius_dist2(&u, &id).unwrap().sqrt() < 1e-8);
    }

    #[test]
    fn unitary_coupled_block_at_right_angle() {
        // a = |0>, g = pi/2: the |0> system block becomes -i sigma_x
        let g = CouplingStrength::new(std::f64::consts::FRAC_PI_2).unwrap();
        let a = PureState::basis_vector(2, 0);
        let u = interaction_unitary(&a, g);
        assert_abs_diff_eq!((u[[0, 0]] - c(0., 0.)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((u[[0, 1]] - c(0., -1.)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((u[[1, 0]] - c(0., -1.)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((u[[1, 1]] - c(0., 0.)).norm(), 0.0, epsilon = 1e-15);
        // uncoupled |1> block stays the identity
        assert_abs_diff_eq!((u[[2, 2]] - c(1., 0.)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((u[[3, 3]] - c(1., 0.)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_block_matches_literal_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for d in 2..=5 {
            for gval in [0.3, 0.8, 1.2, 2.0, 3.0] {
                let g = CouplingStrength::new(gval).unwrap();
                let rho = random_density_matrix(d, &mut rng).unwrap();
                let a = haar_random_pure(d, &mut rng).unwrap();
                let psi = haar_random_pure(d, &mut rng).unwrap();
                let fast = postselected_block(&rho, &a, &psi, g);
                let slow = block_by_literal_unitary(&rho, &a, &psi, g);
                assert!(
                    frobenius_dist2(&fast, &slow).unwrap() < 1e-24,
                    "d={d} g={gval}"
                );
            }
        }
    }

    #[test]
    fn pointer_untouched_when_probe_misses_state() {
        // <a|psi> = 0 removes every interaction term: pointer stays |0><0|
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_density_matrix(2, &mut rng).unwrap();
        let a = PureState::basis_vector(2, 0);
        let psi = PureState::basis_vector(2, 1);
        let g = CouplingStrength::new(1.2).unwrap();
        let out = postselected_pointer(&rho, &a, &psi, g);
        let ptr = out.pointer.unwrap();
        assert_abs_diff_eq!((ptr[[0, 0]] - c(1., 0.)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ptr[[1, 1]].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ptr[[0, 1]].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn pointer_undefined_on_zero_probability_branch() {
        // rho = |1><1|, psi = a = |0>: the |0> outcome never happens
        let rho = DensityMatrix::from_pure(&PureState::basis_vector(2, 1));
        let a = PureState::basis_vector(2, 0);
        let psi = PureState::basis_vector(2, 0);
        let g = CouplingStrength::new(0.8).unwrap();
        let out = postselected_pointer(&rho, &a, &psi, g);
        assert!(out.pointer.is_none());
        assert!(out.probability < tol::POSTSELECT_CUTOFF);
    }

    #[test]
    fn worked_qubit_postselection_probability() {
        // rho = |+><+|, a = |0>, psi = |+>, any g: P = (1 + cos g)/2
        let plus = plus_state();
        let rho = DensityMatrix::from_pure(&plus);
        let a = PureState::basis_vector(2, 0);
        for gval in [0.3, 1.2, 2.5] {
            let g = CouplingStrength::new(gval).unwrap();
            let out = postselected_pointer(&rho, &a, &plus, g);
            assert_abs_diff_eq!(out.probability, (1.0 + gval.cos()) / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn deformed_observables_shape() {
        for gval in [0.3, 1.2, 2.0] {
            let g = CouplingStrength::new(gval).unwrap();
            for m in [deformed_sigma_y(g), deformed_sigma_x(g)] {
                assert!(crate::qmath::hermiticity_defect(&m) < 1e-14);
            }
        }
        // g = pi/2: sigma_x' = (pi/2) sigma_x
        let g = CouplingStrength::new(std::f64::consts::FRAC_PI_2).unwrap();
        let sx = deformed_sigma_x(g);
        assert_abs_diff_eq!(sx[[0, 1]].re, std::f64::consts::FRAC_PI_2, epsilon = 1e-14);
        // and sigma_y' = (pi/2) (sigma_y - (I - sigma_z)) since tan(pi/4) = 1
        let sy = deformed_sigma_y(g);
        assert_abs_diff_eq!(sy[[1, 1]].re, -std::f64::consts::PI, epsilon = 1e-13);
        assert_abs_diff_eq!(sy[[0, 1]].im, -std::f64::consts::FRAC_PI_2, epsilon = 1e-14);
    }

    #[test]
    fn weak_value_of_own_projector_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for gval in [0.3, 1.2, 2.0] {
            let g = CouplingStrength::new(gval).unwrap();
            let a = haar_random_pure(3, &mut rng).unwrap();
            let psi = haar_random_pure(3, &mut rng).unwrap();
            let rho = DensityMatrix::from_pure(&a);
            let out = postselected_pointer(&rho, &a, &psi, g);
            let wv = exact_weak_value(&out.pointer.unwrap(), g);
            assert_abs_diff_eq!(wv.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(wv.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn qubit_reference_tuple_all_conventions() {
        // rho = |+><+|, a = |0>, psi = |+>: the estimable product P*W is
        // exactly 1/2 at every g, so W itself is 1/(1 + cos g).
        let plus = plus_state();
        let rho = DensityMatrix::from_pure(&plus);
        let a = PureState::basis_vector(2, 0);
        let pw = weak_value_product(&rho, &a, &plus);
        assert_abs_diff_eq!(pw.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pw.im, 0.0, epsilon = 1e-15);

        let g = CouplingStrength::new(1.2).unwrap();
        let oracle = weak_value_oracle(&rho, &a, &plus, g);
        assert!(oracle.finite);
        assert_abs_diff_eq!(oracle.value.re, 1.0 / (1.0 + 1.2f64.cos()), epsilon = 1e-13);

        let out = postselected_pointer(&rho, &a, &plus, g);
        let wv = exact_weak_value(&out.pointer.unwrap(), g);
        assert_abs_diff_eq!((wv - oracle.value).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.probability * wv.re, 0.5, epsilon = 1e-13);
    }

    #[test]
    fn maximally_mixed_qubit_weak_value() {
        let rho = DensityMatrix::maximally_mixed(2);
        let mub = fourier_mub(2).unwrap();
        let a = mub.basis_a().vector(0);
        let psi = mub.basis_psi().vector(0);
        // w is real here, so the finite-g probability equals <psi|rho|psi>
        // and W = |<a|psi>|^2 = 1/2 at every strength.
        for gval in [0.4, 1.2, 2.0] {
            let g = CouplingStrength::new(gval).unwrap();
            let wv = weak_value_oracle(&rho, a, psi, g);
            assert!(wv.finite);
            assert_abs_diff_eq!(wv.value.re, 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(wv.value.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn oracle_zero_when_probe_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_density_matrix(2, &mut rng).unwrap();
        let a = PureState::basis_vector(2, 0);
        let psi = PureState::basis_vector(2, 1);
        let g = CouplingStrength::new(1.2).unwrap();
        let wv = weak_value_oracle(&rho, &a, &psi, g);
        assert!(wv.finite);
        assert_abs_diff_eq!(wv.value.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn oracle_flags_vanishing_postselection() {
        let rho = DensityMatrix::from_pure(&PureState::basis_vector(2, 1));
        let a = PureState::basis_vector(2, 0);
        let psi = PureState::basis_vector(2, 0);
        let g = CouplingStrength::new(0.8).unwrap();
        assert!(!weak_value_oracle(&rho, &a, &psi, g).finite);
    }

    #[test]
    fn approx_estimator_bias_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let rho = random_density_matrix(3, &mut rng).unwrap();
        let a = haar_random_pure(3, &mut rng).unwrap();
        let psi = haar_random_pure(3, &mut rng).unwrap();

        // near-zero coupling: approx tracks exact closely
        let g = CouplingStrength::new(1e-4).unwrap();
        let ptr = postselected_pointer(&rho, &a, &psi, g).pointer.unwrap();
        let diff = (approx_weak_value(&ptr, g) - exact_weak_value(&ptr, g)).norm();
        assert!(diff < 1e-3, "small-g diff {diff}");

        // strong coupling: visible bias
        let g = CouplingStrength::new(1.2).unwrap();
        let ptr = postselected_pointer(&rho, &a, &psi, g).pointer.unwrap();
        let diff = (approx_weak_value(&ptr, g) - exact_weak_value(&ptr, g)).norm();
        assert!(diff > 1e-3, "strong-g diff {diff}");

        // own projector at small g: approx close to 1
        let g = CouplingStrength::new(1e-3).unwrap();
        let rho_a = DensityMatrix::from_pure(&a);
        let ptr = postselected_pointer(&rho_a, &a, &psi, g).pointer.unwrap();
        assert!((approx_weak_value(&ptr, g) - C64::new(1.0, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn approx_estimator_bias_is_quadratic_in_g() {
        // The deformed-minus-undeformed readout difference expands in even
        // powers of g only, so the log-log slope of the bias is 2, not 1.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = random_density_matrix(3, &mut rng).unwrap();
        let a = haar_random_pure(3, &mut rng).unwrap();
        let psi = haar_random_pure(3, &mut rng).unwrap();
        let gs: Vec<f64> = (0..9).map(|k| 1e-4 * 10f64.powf(k as f64 / 4.0)).collect();
        let mut logs = Vec::new();
        for &gval in &gs {
            let g = CouplingStrength::new(gval).unwrap();
            let ptr = postselected_pointer(&rho, &a, &psi, g).pointer.unwrap();
            let diff = (approx_weak_value(&ptr, g) - exact_weak_value(&ptr, g)).norm();
            logs.push((gval.ln(), diff.ln()));
        }
        let n = logs.len() as f64;
        let (mx, my): (f64, f64) = (
            logs.iter().map(|p| p.0).sum::<f64>() / n,
            logs.iter().map(|p| p.1).sum::<f64>() / n,
        );
        let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
        assert!(
            (slope - 2.0).abs() < 0.05,
            "bias slope {slope}, expected quadratic scaling"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn unitary_is_unitary(seed in 0u64..10_000, dim in 2usize..6, gval in 0.05f64..3.1) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = haar_random_pure(dim, &mut rng).unwrap();
            let g = CouplingStrength::new(gval).unwrap();
            let u = interaction_unitary(&a, g);
            let prod = u.dot(&dagger(&u));
            let id = CMat::eye(2 * dim);
            prop_assert!(frobenius_dist2(&prod, &id).unwrap().sqrt() < 1e-12);
        }

        #[test]
        fn postselection_probabilities_complete(seed in 0u64..10_000, dim in 2usize..6, gval in 0.05f64..3.1) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density_matrix(dim, &mut rng).unwrap();
            let mub = fourier_mub(dim).unwrap();
            let a = mub.basis_a().vector(0);
            let g = CouplingStrength::new(gval).unwrap();
            let total: f64 = mub
                .basis_psi()
                .vectors()
                .iter()
                .map(|psi| postselected_pointer(&rho, a, psi, g).probability)
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn weak_value_sum_rule(seed in 0u64..10_000, dim in 2usize..6, gval in 0.05f64..3.1) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density_matrix(dim, &mut rng).unwrap();
            let mub = fourier_mub(dim).unwrap();
            let a = mub.basis_a().vector(1 % dim);
            let g = CouplingStrength::new(gval).unwrap();

            // via the g-free product
            let sum_product: C64 = mub
                .basis_psi()
                .vectors()
                .iter()
                .map(|psi| weak_value_product(&rho, a, psi))
                .sum();
            let diag = rho.matrix_element(a, a);
            prop_assert!((sum_product - diag).norm() < 1e-12);

            // via P * W from the pointer readout
            let mut sum_pw = C64::new(0.0, 0.0);
            for psi in mub.basis_psi().vectors() {
                let out = postselected_pointer(&rho, a, psi, g);
                if let Some(ptr) = out.pointer {
                    sum_pw += exact_weak_value(&ptr, g) * out.probability;
                }
            }
            prop_assert!((sum_pw - diag).norm() < 1e-12);
        }

        #[test]
        fn exact_readout_equals_oracle(seed in 0u64..10_000, dim in 2usize..6, gval in 0.05f64..3.1) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density_matrix(dim, &mut rng).unwrap();
            let a = haar_random_pure(dim, &mut rng).unwrap();
            let psi = haar_random_pure(dim, &mut rng).unwrap();
            let g = CouplingStrength::new(gval).unwrap();
            let oracle = weak_value_oracle(&rho, &a, &psi, g);
            prop_assume!(oracle.finite);
            let out = postselected_pointer(&rho, &a, &psi, g);
            let wv = exact_weak_value(&out.pointer.unwrap(), g);
            prop_assert!((wv - oracle.value).norm() < 1e-10);
        }
    }
}
