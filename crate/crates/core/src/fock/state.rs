use ndarray::Array2;
use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use super::linalg::{CMatrix, C};
use super::ops::{apply_dense, displace_vector, QubitGate};
use crate::error::{Error, Result};
use crate::phase_space::ResidualDisplacement;
use crate::scalar::Real;

/// Outcomes with Born probability below this are rejected as impossible.
pub const IMPOSSIBLE_OUTCOME: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitBasis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for QubitBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(QubitBasis::X),
            "y" => Ok(QubitBasis::Y),
            "z" => Ok(QubitBasis::Z),
            other => Err(Error::invalid(format!("unknown qubit basis {other:?}"))),
        }
    }
}

/// Pure state of a qubit and an oscillator truncated to `cutoff` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState<T> {
    amplitudes: Vec<C<T>>,
    cutoff: usize,
}

impl<T: Real> HybridState<T> {
    /// `|↑⟩ ⊗ |0⟩`.
    pub fn ground(cutoff: usize) -> Self {
        let mut amplitudes = vec![C::zero(); 2 * cutoff];
        amplitudes[0] = C::new(T::one(), T::zero());
        Self { amplitudes, cutoff }
    }

    /// `qubit ⊗ oscillator` from the two factors.
    pub fn product(qubit: [C<T>; 2], oscillator: &[C<T>]) -> Self {
        let cutoff = oscillator.len();
        let amplitudes = qubit
            .iter()
            .flat_map(|&q| oscillator.iter().map(move |&o| q * o))
            .collect();
        Self { amplitudes, cutoff }
    }

    pub fn from_amplitudes(amplitudes: Vec<C<T>>, cutoff: usize) -> Result<Self> {
        if amplitudes.len() != 2 * cutoff {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: 2 * cutoff,
            });
        }
        Ok(Self { amplitudes, cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    /// Oscillator amplitudes of the `σ_z = +1` (0) or `−1` (1) branch.
    pub fn branch(&self, bit: usize) -> &[C<T>] {
        &self.amplitudes[bit * self.cutoff..(bit + 1) * self.cutoff]
    }

    fn branches_mut(&mut self) -> (&mut [C<T>], &mut [C<T>]) {
        self.amplitudes.split_at_mut(self.cutoff)
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        for z in &mut self.amplitudes {
            *z /= n;
        }
    }

    /// Population in the top `fraction` of Fock levels.
    pub fn leakage(&self, fraction: f64) -> T {
        let start = ((1.0 - fraction) * self.cutoff as f64).floor() as usize;
        (0..2)
            .map(|b| self.branch(b)[start..].iter().map(|z| z.norm_sqr()).sum::<T>())
            .sum()
    }

    pub fn apply_qubit_gate(&mut self, gate: &QubitGate<T>) {
        let (up, down) = self.branches_mut();
        for (u, d) in up.iter_mut().zip(down.iter_mut()) {
            let (a, b) = (*u, *d);
            *u = gate[0][0] * a + gate[0][1] * b;
            *d = gate[1][0] * a + gate[1][1] * b;
        }
    }

    /// Apply block-diagonal `plus ⊕ minus`, e.g. a conditional displacement
    /// given as its two oscillator blocks.
    pub fn apply_conditional(&mut self, plus: &CMatrix<T>, minus: &CMatrix<T>) {
        let (up, down) = self.branches_mut();
        apply_dense(plus, up);
        apply_dense(minus, down);
    }

    /// Apply a full hybrid operator.
    pub fn apply_operator(&mut self, op: &CMatrix<T>) -> Result<()> {
        if op.nrows() != self.amplitudes.len() || op.ncols() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                left: op.nrows(),
                right: self.amplitudes.len(),
            });
        }
        apply_dense(op, &mut self.amplitudes);
        Ok(())
    }

    /// `D(γ) ⊗` on the oscillator, independent of the qubit.
    pub fn displace(&mut self, gamma: C<T>) {
        let (up, down) = self.branches_mut();
        displace_vector(up, gamma);
        displace_vector(down, gamma);
    }

    /// Shift `q` by `δ_q` and `p` by `δ_p`: `D(δ_q/√2) D(iδ_p/√2)`.
    pub fn apply_noise_displacement(&mut self, delta: &ResidualDisplacement<T>) {
        if delta.delta_q.is_zero() && delta.delta_p.is_zero() {
            return;
        }
        let inv = T::one() / T::SQRT_2();
        self.displace(C::new(delta.delta_p * inv, T::zero()) * C::i());
        self.displace(C::new(delta.delta_q * inv, T::zero()));
    }

    /// Born probability of `outcome` (±1) in `basis` and the renormalized
    /// post-measurement state.
    pub fn measure_qubit(&self, basis: QubitBasis, outcome: i8) -> Result<(T, Self)> {
        if outcome != 1 && outcome != -1 {
            return Err(Error::invalid(format!("outcome must be +1 or -1, got {outcome}")));
        }
        let half = T::lit(0.5);
        let sign = if outcome > 0 { T::one() } else { -T::one() };
        let one = C::new(T::one(), T::zero());
        let z = C::zero();
        // (1 + sign σ_b) / 2
        let sigma: QubitGate<T> = match basis {
            QubitBasis::X => [[z, one], [one, z]],
            QubitBasis::Y => [[z, -C::i()], [C::i(), z]],
            QubitBasis::Z => [[one, z], [z, -one]],
        };
        let mut projector = [[z; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { one } else { z };
                projector[i][j] = (id + sigma[i][j] * sign) * half;
            }
        }
        let mut post = self.clone();
        post.apply_qubit_gate(&projector);
        let p = post.norm().powi(2);
        if !(p.as_f64() >= IMPOSSIBLE_OUTCOME) {
            return Err(Error::ImpossibleOutcome {
                probability: p.as_f64(),
            });
        }
        post.normalize();
        Ok((p, post))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                left: self.amplitudes.len(),
                right: other.amplitudes.len(),
            });
        }
        Ok(overlap(&self.amplitudes, &other.amplitudes).norm_sqr())
    }

    /// `⟨t|Tr_qubit(ρ)|t⟩` for an oscillator state `t`.
    pub fn oscillator_fidelity(&self, target: &[C<T>]) -> Result<T> {
        if target.len() != self.cutoff {
            return Err(Error::DimensionMismatch {
                left: target.len(),
                right: self.cutoff,
            });
        }
        Ok((0..2).map(|b| overlap(target, self.branch(b)).norm_sqr()).sum())
    }

    /// Reduced oscillator density matrix, `ρ[m][n] = Σ_b ψ(b,m) ψ(b,n)*`.
    pub fn oscillator_density(&self) -> Array2<Complex<T>> {
        let mut rho = Array2::zeros((self.cutoff, self.cutoff));
        accumulate_density(&mut rho, self, T::one());
        rho
    }

    /// ⟨q̂⟩ and ⟨p̂⟩ of the oscillator.
    pub fn mean_quadratures(&self) -> (T, T) {
        // ⟨a⟩ = Σ sqrt(n) ψ(n-1)* ψ(n)
        let mut a = C::<T>::zero();
        for b in 0..2 {
            let v = self.branch(b);
            for n in 1..self.cutoff {
                a += v[n - 1].conj() * v[n] * T::from_usize_lossy(n).sqrt();
            }
        }
        (a.re * T::SQRT_2(), a.im * T::SQRT_2())
    }

    /// ⟨(−1)^n̂⟩.
    pub fn parity(&self) -> T {
        (0..2)
            .map(|b| {
                self.branch(b)
                    .iter()
                    .enumerate()
                    .map(|(n, z)| if n % 2 == 0 { z.norm_sqr() } else { -z.norm_sqr() })
                    .sum::<T>()
            })
            .sum()
    }
}

/// `rho += weight · Tr_qubit |ψ⟩⟨ψ|`.
pub fn accumulate_density<T: Real>(rho: &mut Array2<Complex<T>>, state: &HybridState<T>, weight: T) {
    for b in 0..2 {
        let v = state.branch(b);
        for (m, vm) in v.iter().enumerate() {
            if vm.is_zero() {
                continue;
            }
            let vm = *vm * weight;
            for (n, vn) in v.iter().enumerate() {
                rho[[m, n]] += vm * vn.conj();
            }
        }
    }
}

/// `⟨a|b⟩`.
pub fn overlap<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Oscillator-only fidelity `|⟨a|b⟩|²`.
pub fn fidelity<T: Real>(a: &[C<T>], b: &[C<T>]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(overlap(a, b).norm_sqr())
}
