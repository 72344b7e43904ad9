//! First-order Trotterization of a circuit into ideal sub-gates and noise
//! slots.

use num_complex::Complex;
use serde::Serialize;

use super::spec::{CircuitSpec, GateKind};
use crate::error::{Error, Result};
use crate::fock::linalg::CMatrix;
use crate::fock::{displacement_op, sqr_op, QubitBasis, QubitGate};
use crate::scalar::Real;

/// Trotter counts below `GUARD_WARN_FACTOR × bound` are accepted with a
/// warning; counts below the bound itself are refused.
pub const GUARD_WARN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub enum StepOp<T> {
    Qubit(QubitGate<T>),
    /// Index into [`StepPlan::cd_blocks`].
    Conditional(usize),
    Measure { basis: QubitBasis, postselect: Option<i8> },
}

#[derive(Debug, Clone)]
pub struct Step<T> {
    pub op: StepOp<T>,
    /// Index of the originating gate in the circuit.
    pub gate: usize,
    /// Per-step noise standard deviation, or `None` for measurements.
    pub noise_sigma: Option<T>,
}

/// Circuit expanded into `N` ideal sub-gates per gate, each followed by a
/// noise slot.
#[derive(Debug, Clone)]
pub struct StepPlan<T> {
    pub cutoff: usize,
    pub trotter_n: usize,
    pub steps: Vec<Step<T>>,
    /// `(D(+α/N), D(−α/N))` oscillator blocks for each CD gate.
    pub cd_blocks: Vec<(CMatrix<T>, CMatrix<T>)>,
}

impl<T: Real> StepPlan<T> {
    pub fn noisy_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.noise_sigma.is_some()).count()
    }
}

/// `(|α|√(κT))^{2/3}`, the scale the Trotter count must exceed for a CD.
pub fn trotter_bound<T: Real>(alpha: Complex<T>, kappa: T, duration: T) -> T {
    (alpha.norm() * (kappa * duration).sqrt()).powf(T::lit(2.0 / 3.0))
}

pub fn trotterize<T: Real>(circuit: &CircuitSpec<T>) -> Result<StepPlan<T>> {
    circuit.validate()?;
    let n = circuit.trotter_n;
    let nf = T::from_usize_lossy(n);
    let mut steps = Vec::with_capacity(circuit.gates.len() * n);
    let mut cd_blocks = Vec::new();
    for (index, gate) in circuit.gates.iter().enumerate() {
        let sigma = circuit.sigma_step(gate.duration);
        match gate.kind {
            GateKind::Sqr { theta, phi } => {
                let sub = sqr_op(theta / nf, phi);
                steps.extend((0..n).map(|_| Step {
                    op: StepOp::Qubit(sub),
                    gate: index,
                    noise_sigma: Some(sigma),
                }));
            }
            GateKind::Cd { alpha } => {
                let bound = trotter_bound(alpha, circuit.kappa, gate.duration);
                if nf < bound {
                    return Err(Error::TrotterGuard {
                        n,
                        bound: bound.as_f64(),
                    });
                }
                if nf < bound * T::lit(GUARD_WARN_FACTOR) {
                    log::warn!("gate {index}: N = {n} is close to the Trotter bound {bound:.3}");
                }
                let step_alpha = alpha / nf;
                let plus = displacement_op(step_alpha, circuit.cutoff)?;
                let minus = displacement_op(-step_alpha, circuit.cutoff)?;
                cd_blocks.push((plus, minus));
                let block = cd_blocks.len() - 1;
                steps.extend((0..n).map(|_| Step {
                    op: StepOp::Conditional(block),
                    gate: index,
                    noise_sigma: Some(sigma),
                }));
            }
            GateKind::MeasureQubit { basis, postselect } => steps.push(Step {
                op: StepOp::Measure { basis, postselect },
                gate: index,
                noise_sigma: None,
            }),
        }
    }
    Ok(StepPlan {
        cutoff: circuit.cutoff,
        trotter_n: n,
        steps,
        cd_blocks,
    })
}

/// Physical amplitudes each encoded CD step drives on the two modes:
/// `cosh(s)α/N` on the data mode and `sinh(s)α*/N` on the ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EncodedCd {
    pub gate: usize,
    pub logical_re: f64,
    pub logical_im: f64,
    pub data_re: f64,
    pub data_im: f64,
    pub ancilla_re: f64,
    pub ancilla_im: f64,
    pub trotter_bound: f64,
}

/// Per-gate budget of the encoded physical CD amplitudes at squeezing `s`.
///
/// Under ideal encoding these never reach the simulated data mode; they are
/// reported for hardware budgeting only.
pub fn explain_encoding<T: Real>(circuit: &CircuitSpec<T>, s: T) -> Vec<EncodedCd> {
    let nf = T::from_usize_lossy(circuit.trotter_n);
    circuit
        .gates
        .iter()
        .enumerate()
        .filter_map(|(gate, g)| match g.kind {
            GateKind::Cd { alpha } => {
                let step = alpha / nf;
                let data = step * s.cosh();
                let anc = step.conj() * s.sinh();
                Some(EncodedCd {
                    gate,
                    logical_re: step.re.as_f64(),
                    logical_im: step.im.as_f64(),
                    data_re: data.re.as_f64(),
                    data_im: data.im.as_f64(),
                    ancilla_re: anc.re.as_f64(),
                    ancilla_im: anc.im.as_f64(),
                    trotter_bound: trotter_bound(alpha, circuit.kappa, g.duration).as_f64(),
                })
            }
            _ => None,
        })
        .collect()
}
