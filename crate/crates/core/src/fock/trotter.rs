//! Numerical check of the Trotter split of a noisy conditional displacement.
//!
//! The noise generator `A = −i(w_q p̂ − w_p q̂)` and the CD generator
//! `B = σ_z(βa† − β*a)` with `β = α dt` are both linear in the quadratures,
//! so `[A, B] = σ_z · 2i Im(γβ*)` is central within each `σ_z` block and
//! `e^{A+B} = e^A e^B e^{−[A,B]/2}` holds exactly.

use ndarray::s;
use num_complex::Complex;

use super::linalg::{displacement_generator, expm, max_abs_diff, CMatrix, C};
use super::ops::{check_truncation, TRUNCATION_MARGIN};
use crate::error::Result;
use crate::scalar::Real;

/// `γ` with `D(γ) = exp(−i(w_q p̂ − w_p q̂))`.
pub fn noise_amplitude<T: Real>(w_q: T, w_p: T) -> C<T> {
    C::new(w_q, w_p) / T::SQRT_2()
}

/// Scalar `c` with `[A, B] = σ_z c` for noise amplitude `gamma` and CD step
/// amplitude `beta`.
pub fn noise_cd_commutator<T: Real>(gamma: C<T>, beta: C<T>) -> C<T> {
    gamma * beta.conj() - gamma.conj() * beta
}

/// Largest deviation between `e^{A+B}` and `e^A e^B e^{−[A,B]/2}` over both
/// qubit blocks, restricted to the lower half of the Fock basis where the
/// truncated generators are faithful.
pub fn trotter_phase_check<T: Real>(alpha: C<T>, w_q: T, w_p: T, dt: T, cutoff: usize) -> Result<T> {
    let gamma = noise_amplitude(w_q, w_p);
    let beta = alpha * dt;
    check_truncation(gamma, cutoff)?;
    check_truncation(beta, cutoff)?;
    check_truncation(gamma + beta, cutoff)?;
    check_truncation(gamma - beta, cutoff)?;

    let dim = cutoff + TRUNCATION_MARGIN;
    let keep = cutoff / 2;
    let gen_a = displacement_generator(gamma, dim);
    let exp_a = expm(&gen_a);
    let mut worst = T::zero();
    for sign in [T::one(), -T::one()] {
        let b = beta * sign;
        let gen_b = displacement_generator(b, dim);
        let joint = expm(&(&gen_a + &gen_b));
        let phase = (-noise_cd_commutator(gamma, b) * T::lit(0.5)).exp();
        let split: CMatrix<T> = exp_a.dot(&expm(&gen_b)).mapv(|z: Complex<T>| z * phase);
        let crop = |m: &CMatrix<T>| m.slice(s![..cutoff, ..keep]).to_owned();
        worst = worst.max(max_abs_diff(&crop(&joint), &crop(&split)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Z = C<f64>;

    #[test]
    fn no_noise_is_exact() {
        let dev = trotter_phase_check(Z::new(1.0, 0.5), 0.0, 0.0, 0.01, 40).unwrap();
        assert!(dev < 1e-13, "{dev}");
    }

    #[test]
    fn parallel_generators_commute() {
        let c = noise_cd_commutator(noise_amplitude(0.2, 0.0), Z::new(0.03, 0.0));
        assert!(c.norm() < 1e-17);
        let dev = trotter_phase_check(Z::new(3.0, 0.0), 0.2, 0.0, 0.01, 40).unwrap();
        assert!(dev < 1e-10, "{dev}");
    }

    #[test]
    fn bch_identity_with_nonzero_commutator() {
        let dev = trotter_phase_check(Z::new(1.0, 0.0), 0.1, 0.1, 0.01, 40).unwrap();
        assert!(dev < 1e-8, "{dev}");
        let c = noise_cd_commutator(noise_amplitude(0.1, 0.1), Z::new(0.01, 0.0));
        assert!(c.re.abs() < 1e-18 && c.im.abs() > 1e-4);
    }

    #[test]
    fn truncation_guard() {
        assert!(trotter_phase_check(Z::new(1.0, 0.0), 5.0, 0.0, 0.01, 20).is_err());
    }
}
