//! Gate operators of the hybrid gate set.
//!
//! Hybrid operators act on `qubit ⊗ oscillator` with the qubit as the slow
//! index: basis element `(b, n)` sits at `b * cutoff + n`, and `b = 0` is the
//! `σ_z = +1` state.

use ndarray::{s, Array2};
use num_complex::Complex;
use num_traits::{One, Zero};

use super::linalg::{displacement_generator, expm, CMatrix, C};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Extra Fock levels carried while exponentiating, cropped afterwards.
pub const TRUNCATION_MARGIN: usize = 10;

/// 2x2 single-qubit operator.
pub type QubitGate<T> = [[C<T>; 2]; 2];

pub(crate) fn check_truncation<T: Real>(gamma: C<T>, cutoff: usize) -> Result<()> {
    let norm_sqr = gamma.norm_sqr().as_f64();
    let limit = cutoff as f64 / 4.0;
    if !norm_sqr.is_finite() || norm_sqr > limit {
        return Err(Error::TruncationRisk { norm_sqr, limit });
    }
    Ok(())
}

/// `D(γ) = exp(γa† − γ*a)` on `cutoff` levels.
///
/// The exponential is taken on `cutoff + TRUNCATION_MARGIN` levels and
/// cropped, which keeps the edge artifacts of the truncated generator out of
/// the retained block.
pub fn displacement_op<T: Real>(gamma: C<T>, cutoff: usize) -> Result<CMatrix<T>> {
    check_truncation(gamma, cutoff)?;
    let big = expm(&displacement_generator(gamma, cutoff + TRUNCATION_MARGIN));
    Ok(big.slice(s![..cutoff, ..cutoff]).to_owned())
}

/// `CD(α) = exp[σ_z(αa† − α*a)]`: `D(α)` on the `σ_z = +1` block and `D(−α)`
/// on the `σ_z = −1` block.
pub fn cd_op<T: Real>(alpha: C<T>, cutoff: usize) -> Result<CMatrix<T>> {
    let plus = displacement_op(alpha, cutoff)?;
    let minus = displacement_op(-alpha, cutoff)?;
    let mut out = CMatrix::zeros((2 * cutoff, 2 * cutoff));
    out.slice_mut(s![..cutoff, ..cutoff]).assign(&plus);
    out.slice_mut(s![cutoff.., cutoff..]).assign(&minus);
    Ok(out)
}

/// σ_φ = σ_x cos φ + σ_y sin φ.
pub fn sigma_phi<T: Real>(phi: T) -> QubitGate<T> {
    let z = C::zero();
    [[z, C::from_polar(T::one(), -phi)], [C::from_polar(T::one(), phi), z]]
}

/// `R_φ(θ) = exp(−iθσ_φ/2)`.
pub fn sqr_op<T: Real>(theta: T, phi: T) -> QubitGate<T> {
    let half = theta * T::lit(0.5);
    let c = C::new(half.cos(), T::zero());
    let ms = C::new(T::zero(), -half.sin());
    let sp = sigma_phi(phi);
    [[c, ms * sp[0][1]], [ms * sp[1][0], c]]
}

pub fn qubit_mul<T: Real>(a: &QubitGate<T>, b: &QubitGate<T>) -> QubitGate<T> {
    let mut out = [[C::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Embed a qubit gate as `gate ⊗ 1` on the hybrid space.
pub fn qubit_gate_on_hybrid<T: Real>(gate: &QubitGate<T>, cutoff: usize) -> CMatrix<T> {
    let mut out = CMatrix::zeros((2 * cutoff, 2 * cutoff));
    for (i, row) in gate.iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            for n in 0..cutoff {
                out[[i * cutoff + n, j * cutoff + n]] = g;
            }
        }
    }
    out
}

/// Apply `exp(γa† − γ*a)` to `v` in place.
///
/// The vector is padded by [`TRUNCATION_MARGIN`] levels and the Taylor
/// series of the exponential is summed on the sparse generator, so this
/// agrees with [`displacement_op`] to rounding at `O(cutoff)` cost per term.
pub fn displace_vector<T: Real>(v: &mut [C<T>], gamma: C<T>) {
    if gamma.is_zero() {
        return;
    }
    let dim = v.len() + TRUNCATION_MARGIN;
    let bound = gamma.norm().as_f64() * 2.0 * (dim as f64).sqrt();
    let substeps = ((bound / 0.5).ceil() as usize).max(1);
    let g = gamma / T::from_usize_lossy(substeps);
    let roots: Vec<T> = (0..=dim).map(|n| T::from_usize_lossy(n).sqrt()).collect();

    let mut state = vec![C::zero(); dim];
    state[..v.len()].copy_from_slice(v);
    let mut term = vec![C::zero(); dim];
    let mut next = vec![C::zero(); dim];
    let tol = T::epsilon() * T::epsilon();
    for _ in 0..substeps {
        term.copy_from_slice(&state);
        for k in 1..200 {
            let inv_k = T::one() / T::from_usize_lossy(k);
            for n in 0..dim {
                let up = if n > 0 { g * term[n - 1] * roots[n] } else { C::zero() };
                let down = if n + 1 < dim {
                    g.conj() * term[n + 1] * roots[n + 1]
                } else {
                    C::zero()
                };
                next[n] = (up - down) * inv_k;
            }
            std::mem::swap(&mut term, &mut next);
            let mut term_norm = T::zero();
            let mut state_norm = T::zero();
            for (s, t) in state.iter_mut().zip(&term) {
                *s += *t;
                term_norm += t.norm_sqr();
                state_norm += s.norm_sqr();
            }
            if term_norm <= tol * state_norm {
                break;
            }
        }
    }
    v.copy_from_slice(&state[..v.len()]);
}

/// Coherent state amplitudes `e^{−|γ|²/2} γⁿ/√n!` on `cutoff` levels.
pub fn coherent_state<T: Real>(gamma: C<T>, cutoff: usize) -> Vec<C<T>> {
    let mut out = Vec::with_capacity(cutoff);
    let mut c = C::new((-gamma.norm_sqr() * T::lit(0.5)).exp(), T::zero());
    for n in 0..cutoff {
        if n > 0 {
            c = c * gamma / T::from_usize_lossy(n).sqrt();
        }
        out.push(c);
    }
    out
}

/// Fock state `|n⟩` on `cutoff` levels.
pub fn fock_state<T: Real>(n: usize, cutoff: usize) -> Vec<C<T>> {
    let mut out = vec![C::zero(); cutoff];
    out[n] = C::one();
    out
}

pub fn apply_dense<T: Real>(m: &Array2<Complex<T>>, v: &mut [C<T>]) {
    let out: Vec<C<T>> = m
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(v.iter()).map(|(a, b)| *a * *b).sum())
        .collect();
    v.copy_from_slice(&out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::linalg::{identity, max_abs_diff, unitarity_defect};

    type Z = C<f64>;

    fn close(a: &QubitGate<f64>, b: &QubitGate<f64>, tol: f64) -> bool {
        a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn zero_displacement_is_identity() {
        let d = displacement_op(Z::new(0.0, 0.0), 20).unwrap();
        assert!(max_abs_diff(&d, &identity(20)) < 1e-15);
        let cd = cd_op(Z::new(0.0, 0.0), 10).unwrap();
        assert!(max_abs_diff(&cd, &identity(20)) < 1e-15);
    }

    #[test]
    fn displaced_vacuum_photon_number() {
        let gamma = Z::new(1.5, 0.0);
        let d = displacement_op(gamma, 60).unwrap();
        let n: f64 = d
            .column(0)
            .iter()
            .enumerate()
            .map(|(k, z)| k as f64 * z.norm_sqr())
            .sum();
        assert!((n - 2.25).abs() < 1e-6);
        let coh = coherent_state(gamma, 60);
        for (a, b) in d.column(0).iter().zip(&coh) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn displacement_composition_law() {
        let (a, b) = (Z::new(0.7, 0.0), Z::new(0.0, 0.3));
        let cutoff = 60;
        let lhs = displacement_op(a, cutoff).unwrap().dot(&displacement_op(b, cutoff).unwrap());
        let phase = ((a * b.conj() - a.conj() * b) * 0.5).exp();
        let rhs = displacement_op(a + b, cutoff).unwrap().mapv(|z| z * phase);
        let keep = cutoff / 2;
        let diff = max_abs_diff(
            &lhs.slice(s![.., ..keep]).to_owned(),
            &rhs.slice(s![.., ..keep]).to_owned(),
        );
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn truncation_guard() {
        assert!(matches!(
            displacement_op(Z::new(3.0, 0.0), 20),
            Err(Error::TruncationRisk { .. })
        ));
        assert!(cd_op(Z::new(0.0, 2.3), 20).is_err());
    }

    #[test]
    fn cd_inverse_and_unitarity() {
        let alpha = Z::new(0.8, -0.4);
        let u = cd_op(alpha, 40).unwrap();
        let v = cd_op(-alpha, 40).unwrap();
        let prod = u.dot(&v);
        let keep = 20;
        let block = |m: &CMatrix<f64>| {
            let mut b = m.slice(s![..keep, ..keep]).to_owned();
            b.append(ndarray::Axis(0), m.slice(s![40..40 + keep, ..keep])).unwrap();
            b
        };
        let eye = identity::<f64>(80);
        assert!(max_abs_diff(&block(&prod), &block(&eye)) < 1e-10);
        assert!(unitarity_defect(&u.slice(s![..40, ..keep]).to_owned()) < 1e-9);
    }

    #[test]
    fn rotation_examples() {
        let i = Z::new(0.0, 1.0);
        let z = Z::new(0.0, 0.0);
        let one = Z::new(1.0, 0.0);
        let pi = std::f64::consts::PI;
        assert!(close(&sqr_op(pi, 0.0), &[[z, -i], [-i, z]], 1e-15));
        assert!(close(&sqr_op(pi, pi / 2.0), &[[z, -one], [one, z]], 1e-15));
        for phi in [0.0, 0.3, -2.0] {
            assert!(close(&sqr_op(0.0, phi), &[[one, z], [z, one]], 1e-15));
        }
        let r = sqr_op(1.1, 0.4);
        let rd = [[r[0][0].conj(), r[1][0].conj()], [r[0][1].conj(), r[1][1].conj()]];
        assert!(close(&qubit_mul(&rd, &r), &[[one, z], [z, one]], 1e-15));
    }

    #[test]
    fn vector_action_matches_dense_operator() {
        let cutoff = 40;
        let gamma = Z::new(0.9, -1.3);
        let dense = displacement_op(gamma, cutoff).unwrap();
        let mut v: Vec<Z> = (0..cutoff)
            .map(|k| Z::new((k as f64 * 0.7).sin(), (k as f64 * 0.3).cos()) * (-(k as f64) / 4.0).exp())
            .collect();
        let mut w = v.clone();
        apply_dense(&dense, &mut w);
        displace_vector(&mut v, gamma);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
