use num_complex::Complex64;

use crate::model::NormalizedScenario;

/// Best relayed SNR of an amplify-and-forward relay with an unrestricted
/// `N×N` matrix under the same budget:
/// `‖h1‖²‖h2‖² / (‖h1‖²snr1 + ‖h2‖²snr2 + 1) · snr1 · snr2`.
///
/// This is the relayed term only; the direct slot adds `|h_d|² snr1` after
/// maximum ratio combining (see [`relay_total_snr`]).
pub fn relay_optimum_snr(norm: &NormalizedScenario) -> f64 {
    let g1: f64 = norm.h1().iter().map(|h| h.norm_sqr()).sum();
    let g2: f64 = norm.h2().iter().map(|h| h.norm_sqr()).sum();
    let (s1, s2) = (norm.snr1(), norm.snr2());
    if g1 == 0.0 || g2 == 0.0 {
        return 0.0;
    }
    g1 * g2 / (g1 * s1 + g2 * s2 + 1.0) * s1 * s2
}

/// Relay SNR after combining both time slots, `|h_d|² snr1 + relayed`.
pub fn relay_total_snr(norm: &NormalizedScenario) -> f64 {
    norm.h_d().norm_sqr() * norm.snr1() + relay_optimum_snr(norm)
}

/// Relayed SNR and budget usage `(snr, snr1‖Φh1‖² + ‖Φ‖_F²)` of an arbitrary
/// row-major `N×N` relay matrix.
pub fn relay_matrix_snr(norm: &NormalizedScenario, phi: &[Complex64]) -> (f64, f64) {
    let n = norm.n();
    assert_eq!(phi.len(), n * n, "relay matrix must be N×N");
    let (h1, h2) = (norm.h1(), norm.h2());
    // Φh1 and h2ᵀΦ
    let phi_h1: Vec<Complex64> = (0..n).map(|r| (0..n).map(|c| phi[r * n + c] * h1[c]).sum()).collect();
    let h2_phi: Vec<Complex64> = (0..n).map(|c| (0..n).map(|r| h2[r] * phi[r * n + c]).sum()).collect();
    let gain: Complex64 = h2.iter().zip(&phi_h1).map(|(a, b)| a * b).sum();
    let noise: f64 = h2_phi.iter().map(|z| z.norm_sqr()).sum();
    let frob: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
    let used = norm.snr1() * phi_h1.iter().map(|z| z.norm_sqr()).sum::<f64>() + frob;
    (gain.norm_sqr() / (1.0 + noise) * norm.snr1(), used)
}
