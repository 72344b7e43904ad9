//! Built-in circuits and the layered Fock-preparation loader.

use std::path::Path;

use num_complex::Complex;

use super::plan::trotterize;
use super::run::run_noiseless;
use super::spec::{load_circuit, CircuitSpec, ExecutionMode, GateKind, GateSpec};
use crate::error::{Error, Result};
use crate::fock::{coherent_state, fock_state, HybridState, QubitBasis};
use crate::scalar::Real;

pub const CAT_CUTOFF: usize = 60;
pub const CAT_SIGMA_P: f64 = 0.1;
pub const CAT_TROTTER_N: usize = 100;
/// Loaded Fock circuits whose noiseless output overlaps the target less
/// than this are reported.
pub const FOCK_TARGET_WARN: f64 = 0.98;

/// Odd-cat preparation: `SQR(π/2, π/2)`, `CD(β/√2)`, `SQR(π/2, −π/2)`, then a
/// `σ_z` measurement postselected on `−1`.
///
/// The noiseless output is `(|−β/√2⟩ − |β/√2⟩)/N`, a cat whose lobes sit at
/// `q = ±β`.
pub fn builtin_cat_circuit<T: Real>(beta: T) -> Result<CircuitSpec<T>> {
    if !(beta > T::zero() && beta.is_finite()) {
        return Err(Error::invalid(format!("cat size must be > 0, got {beta}")));
    }
    let half_pi = T::FRAC_PI_2();
    let gates = vec![
        GateSpec::sqr(half_pi, half_pi),
        GateSpec::cd(Complex::new(beta / T::SQRT_2(), T::zero())),
        GateSpec::sqr(half_pi, -half_pi),
        GateSpec::measure(QubitBasis::Z, Some(-1)),
    ];
    Ok(CircuitSpec::new(gates, CAT_CUTOFF)
        .with_sigma_p(T::lit(CAT_SIGMA_P))
        .with_trotter_n(CAT_TROTTER_N)
        .with_mode(ExecutionMode::Physical))
}

/// Normalized odd cat `|−γ⟩ − |γ⟩` with `γ = β/√2`.
pub fn odd_cat_state<T: Real>(beta: T, cutoff: usize) -> Vec<Complex<T>> {
    let gamma = Complex::new(beta / T::SQRT_2(), T::zero());
    let plus = coherent_state(gamma, cutoff);
    let minus = coherent_state(-gamma, cutoff);
    let mut v: Vec<_> = minus.iter().zip(&plus).map(|(m, p)| m - p).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Count `[SQR, CD]` layers, allowing one trailing SQR.
pub fn fock_layers<T: Real>(circuit: &CircuitSpec<T>) -> Result<usize> {
    let gates = &circuit.gates;
    let paired = gates.len() / 2 * 2;
    for (i, pair) in gates[..paired].chunks(2).enumerate() {
        match (&pair[0].kind, &pair[1].kind) {
            (GateKind::Sqr { .. }, GateKind::Cd { .. }) => {}
            _ => {
                return Err(Error::LayerStructure(format!(
                    "layer {i} (gates {}, {}) is not SQR followed by CD",
                    2 * i,
                    2 * i + 1
                )))
            }
        }
    }
    if paired < gates.len() && !matches!(gates[paired].kind, GateKind::Sqr { .. }) {
        return Err(Error::LayerStructure(format!("trailing gate {paired} is not an SQR")));
    }
    Ok(paired / 2)
}

/// A validated layered circuit targeting a Fock state.
#[derive(Debug, Clone)]
pub struct FockCircuit<T> {
    pub circuit: CircuitSpec<T>,
    pub layers: usize,
    pub target: usize,
    /// `⟨target|ρ_osc|target⟩` of the noiseless output.
    pub noiseless_fidelity: T,
}

impl<T: Real> FockCircuit<T> {
    pub fn from_circuit(circuit: CircuitSpec<T>) -> Result<Self> {
        let layers = fock_layers(&circuit)?;
        let target = circuit
            .target_fock
            .ok_or_else(|| Error::invalid("Fock circuit needs [target] fock = n"))?;
        let output = noiseless_output(&circuit)?;
        let noiseless_fidelity = output.oscillator_fidelity(&fock_state(target, circuit.cutoff))?;
        if noiseless_fidelity.as_f64() < FOCK_TARGET_WARN {
            log::warn!(
                "noiseless overlap with |{target}⟩ is {:.4}, below {FOCK_TARGET_WARN}",
                noiseless_fidelity
            );
        }
        Ok(Self {
            circuit,
            layers,
            target,
            noiseless_fidelity,
        })
    }
}

pub fn load_fock_circuit<T: Real>(path: impl AsRef<Path>) -> Result<FockCircuit<T>> {
    FockCircuit::from_circuit(load_circuit(path)?)
}

/// Output of the unsplit circuit without noise.
pub fn noiseless_output<T: Real>(circuit: &CircuitSpec<T>) -> Result<HybridState<T>> {
    let ideal = circuit.clone().with_kappa(T::zero()).with_trotter_n(1);
    run_noiseless(&trotterize(&ideal)?, None)
}
