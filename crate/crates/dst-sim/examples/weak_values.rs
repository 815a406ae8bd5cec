//! Weak values read out of the pointer exactly, at finite coupling.
//!
//! For each observable eigenvector `a` and postselection vector `psi`, the
//! pointer block after postselection encodes the product
//! `<psi|a><a|rho|psi>`. The coupling-deformed observables recover it with
//! no weak-coupling approximation; the plain first-order readout drifts as
//! the coupling grows.

use dst_sim::coupling::{
    approx_weak_value, exact_weak_value, postselected_pointer, weak_value_oracle,
    weak_value_product, CouplingStrength,
};
use dst_sim::bases::fourier_mub;
use dst_sim::qmath::{random_density_matrix, DensityMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dim = 3;
    let rho: DensityMatrix = random_density_matrix(dim, &mut rng)?;
    let mub = fourier_mub(dim)?;
    let a = mub.basis_a().vector(0);

    println!("mixed qutrit state, probe |a_0>, Fourier-partner postselection\n");
    println!(
        "{:>4} {:>5} {:>24} {:>24} {:>12}",
        "g", "psi_j", "exact readout", "oracle w/P", "approx drift"
    );
    for g in [0.05, 0.6, 1.2, 2.4] {
        let g = CouplingStrength::new(g)?;
        for j in 0..dim {
            let psi = mub.basis_psi().vector(j);
            let block = postselected_pointer(&rho, a, psi, g);
            let pointer = block.pointer.expect("postselection succeeds here");
            let exact = exact_weak_value(&pointer, g);
            let approx = approx_weak_value(&pointer, g);
            let oracle = weak_value_oracle(&rho, a, psi, g);
            assert!(oracle.finite);
            println!(
                "{:>4.2} {:>5} {:>24} {:>24} {:>12.3e}",
                g.get(),
                j,
                format!("{:.6}", exact),
                format!("{:.6}", oracle.value),
                (approx - exact).norm()
            );
            assert!((exact - oracle.value).norm() < 1e-12);
        }
    }

    // completeness of the postselection basis gives a sum rule
    let mut sum = num_complex::Complex64::new(0.0, 0.0);
    for j in 0..dim {
        sum += weak_value_product(&rho, a, mub.basis_psi().vector(j));
    }
    let direct = rho.matrix_element(a, a);
    println!("\nsum rule: sum_j <psi_j|a><a|rho|psi_j> = {sum:.9}");
    println!("direct    <a|rho|a>                     = {direct:.9}");
    assert!((sum - direct).norm() < 1e-12);
    Ok(())
}
