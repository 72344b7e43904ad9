//! Trajectory execution and Monte Carlo averaging.
//!
//! In logical mode the GKP ancilla and the encoder never appear explicitly:
//! under ideal encoding their entire effect on the data mode is that each
//! step's raw displacement is replaced by the post-correction residual from
//! [`crate::phase_space::LogicalStep`].

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::plan::{trotterize, StepOp, StepPlan};
use super::spec::{CircuitSpec, ExecutionMode, SqueezingChoice};
use crate::error::{Error, Result};
use crate::fock::state::{accumulate_density, IMPOSSIBLE_OUTCOME};
use crate::fock::{wigner_from_density, HybridState, WignerGrid, WignerGridSpec};
use crate::optimizer::{optimal_squeezing, Method, DEFAULT_TOLERANCE};
use crate::phase_space::{sample_noise_draw, LogicalStep, ResidualDisplacement};
use crate::rng::NormalSampler;
use crate::scalar::Real;

pub const SCHEMA_VERSION: u32 = 1;
/// Trajectories per work unit. Results are reduced unit by unit in index
/// order, which makes every summary bit-identical for any thread count.
pub const TRAJECTORY_CHUNK: usize = 8;
/// Fraction of top Fock levels monitored for truncation leakage.
pub const LEAKAGE_BAND: f64 = 0.1;
pub const LEAKAGE_WARN: f64 = 1e-6;

/// How postselected measurements enter the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Postselection {
    /// Force the postselected outcome and weight the trajectory by its Born
    /// probability.
    #[default]
    Weighted,
    /// Sample the outcome by the Born rule and discard mismatches.
    Sampled,
}

/// Noise source of one gate's Trotter steps.
#[derive(Debug, Clone, Copy)]
pub enum GateNoise<T> {
    Raw(T),
    Residual(LogicalStep<T>),
}

impl<T: Real> GateNoise<T> {
    fn sample(&self, rng: &mut NormalSampler) -> ResidualDisplacement<T> {
        match self {
            GateNoise::Raw(sigma) => {
                let draw = sample_noise_draw(rng, *sigma);
                ResidualDisplacement::new(draw.omega.q_dat, draw.omega.p_dat)
            }
            GateNoise::Residual(step) => step.sample(rng),
        }
    }
}

/// Noise sources for every gate of a circuit, with the execution mode's
/// squeezing resolved.
#[derive(Debug, Clone)]
pub struct ResolvedNoise<T> {
    per_gate: Vec<Option<GateNoise<T>>>,
    pub s_used: Option<T>,
}

impl<T: Real> ResolvedNoise<T> {
    pub fn noiseless(gates: usize) -> Self {
        Self {
            per_gate: vec![None; gates],
            s_used: None,
        }
    }

    pub fn resolve(circuit: &CircuitSpec<T>) -> Result<Self> {
        let mut auto_cache: BTreeMap<u64, T> = BTreeMap::new();
        let mut s_used = None;
        let mut per_gate = Vec::with_capacity(circuit.gates.len());
        for gate in &circuit.gates {
            if gate.is_measurement() {
                per_gate.push(None);
                continue;
            }
            let sigma = circuit.sigma_step(gate.duration);
            let noise = match circuit.mode {
                ExecutionMode::Physical => GateNoise::Raw(sigma),
                ExecutionMode::Logical(choice) => {
                    let s = match choice {
                        SqueezingChoice::Fixed(s) => s,
                        SqueezingChoice::Auto if sigma == T::zero() => T::zero(),
                        SqueezingChoice::Auto => match auto_cache.get(&sigma.as_f64().to_bits()) {
                            Some(&s) => s,
                            None => {
                                let s = optimal_squeezing(sigma, Method::Analytic, T::lit(DEFAULT_TOLERANCE))?.s_star;
                                auto_cache.insert(sigma.as_f64().to_bits(), s);
                                s
                            }
                        },
                    };
                    s_used.get_or_insert(s);
                    GateNoise::Residual(LogicalStep::new(sigma, s)?)
                }
            };
            per_gate.push((sigma > T::zero()).then_some(noise));
        }
        if auto_cache.len() > 1 {
            log::info!("auto squeezing resolved per gate: {} distinct values", auto_cache.len());
        }
        Ok(Self { per_gate, s_used })
    }
}

/// Final state of one trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub state: HybridState<T>,
    /// False when a postselection failed.
    pub accepted: bool,
    /// Product of the Born probabilities of forced postselected outcomes.
    pub weight: T,
    /// Outcome of every measurement, in circuit order.
    pub outcomes: Vec<i8>,
}

fn execute<T: Real>(
    plan: &StepPlan<T>,
    noise: &ResolvedNoise<T>,
    rng: &mut NormalSampler,
    postselection: Postselection,
    forced: Option<&[i8]>,
) -> Result<Trajectory<T>> {
    let mut state = HybridState::ground(plan.cutoff);
    let mut weight = T::one();
    let mut outcomes = Vec::new();
    for step in &plan.steps {
        match &step.op {
            StepOp::Qubit(g) => state.apply_qubit_gate(g),
            StepOp::Conditional(k) => {
                let (plus, minus) = &plan.cd_blocks[*k];
                state.apply_conditional(plus, minus);
            }
            StepOp::Measure { basis, postselect } => {
                let replay = forced.map(|f| f[outcomes.len()]);
                let outcome = match (replay, *postselect, postselection) {
                    (Some(o), _, _) => o,
                    (None, Some(o), Postselection::Weighted) => o,
                    (None, _, _) => {
                        let (p_plus, _) = state.measure_qubit(*basis, 1).unwrap_or((T::zero(), state.clone()));
                        if rng.uniform() < p_plus.as_f64() {
                            1
                        } else {
                            -1
                        }
                    }
                };
                outcomes.push(outcome);
                let rejected = postselect.is_some_and(|o| o != outcome);
                match state.measure_qubit(*basis, outcome) {
                    Ok((p, post)) => {
                        state = post;
                        if postselect.is_some() && postselection == Postselection::Weighted {
                            weight *= p;
                        }
                    }
                    Err(Error::ImpossibleOutcome { .. }) if postselect.is_some() => {
                        return Ok(Trajectory {
                            state,
                            accepted: false,
                            weight: T::zero(),
                            outcomes,
                        });
                    }
                    Err(e) => return Err(e),
                }
                if rejected {
                    return Ok(Trajectory {
                        state,
                        accepted: false,
                        weight: T::zero(),
                        outcomes,
                    });
                }
            }
        }
        if let Some(source) = &noise.per_gate[step.gate] {
            let delta = source.sample(rng);
            state.apply_noise_displacement(&delta);
        }
    }
    Ok(Trajectory {
        state,
        accepted: true,
        weight,
        outcomes,
    })
}

/// One noisy trajectory through `plan`.
pub fn run_trajectory<T: Real>(
    plan: &StepPlan<T>,
    noise: &ResolvedNoise<T>,
    rng: &mut NormalSampler,
    postselection: Postselection,
) -> Result<Trajectory<T>> {
    execute(plan, noise, rng, postselection, None)
}

/// Noiseless output of `plan` along a given measurement record (or with
/// postselected outcomes forced, when `outcomes` is `None`).
pub fn run_noiseless<T: Real>(plan: &StepPlan<T>, outcomes: Option<&[i8]>) -> Result<HybridState<T>> {
    let noise = ResolvedNoise::noiseless(plan.steps.iter().map(|s| s.gate + 1).max().unwrap_or(0));
    let mut rng = NormalSampler::from_stream(0, 0);
    let has_free = plan
        .steps
        .iter()
        .any(|s| matches!(s.op, StepOp::Measure { postselect: None, .. }));
    if has_free && outcomes.is_none() {
        return Err(Error::invalid("circuit has unpostselected measurements; give an outcome record"));
    }
    let t = execute(plan, &noise, &mut rng, Postselection::Weighted, outcomes)?;
    if !t.accepted || t.weight.as_f64() < IMPOSSIBLE_OUTCOME {
        return Err(Error::ImpossibleOutcome {
            probability: t.weight.as_f64(),
        });
    }
    Ok(t.state)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub trials: usize,
    pub seed: u64,
    pub postselection: Postselection,
    /// Accumulate the weighted mean oscillator state and evaluate its Wigner
    /// function on this grid.
    pub wigner: Option<WignerGridSpec>,
}

impl RunOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            postselection: Postselection::Weighted,
            wigner: None,
        }
    }

    pub fn with_wigner(mut self, grid: WignerGridSpec) -> Self {
        self.wigner = Some(grid);
        self
    }

    pub fn with_postselection(mut self, p: Postselection) -> Self {
        self.postselection = p;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary<T> {
    pub schema_version: u32,
    pub mode: &'static str,
    pub s_used: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub accepted: usize,
    pub mean_fidelity: f64,
    pub infidelity: f64,
    pub standard_error: f64,
    pub postselect_acceptance_rate: f64,
    pub postselection: Postselection,
    pub kappa: f64,
    pub trotter_n: usize,
    pub sigma_step: Option<f64>,
    pub cutoff: usize,
    pub gates: usize,
    pub max_leakage: f64,
    pub wigner_min: Option<f64>,
    pub wigner_integral: Option<f64>,
    /// Per-trajectory fidelities, in trajectory order.
    #[serde(skip)]
    pub fidelities: Vec<f64>,
    #[serde(skip)]
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub wigner: Option<WignerGrid<T>>,
    /// Weighted mean of the accepted oscillator states.
    #[serde(skip)]
    pub density: Option<Array2<Complex<T>>>,
}

struct ChunkResult<T> {
    samples: Vec<(f64, f64, bool, f64)>,
    density: Option<Array2<Complex<T>>>,
}

/// Average fidelity of `trials` noisy trajectories against the noiseless
/// circuit output.
///
/// Trajectory `i` draws from stream `i` of `seed`. The mean is weighted by
/// each trajectory's postselection weight; the standard error is that of
/// the ratio estimator.
pub fn run_monte_carlo<T: Real>(circuit: &CircuitSpec<T>, options: &RunOptions) -> Result<RunSummary<T>> {
    if options.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let plan = trotterize(circuit)?;
    let noise = ResolvedNoise::resolve(circuit)?;
    let has_free = plan
        .steps
        .iter()
        .any(|s| matches!(s.op, StepOp::Measure { postselect: None, .. }));
    let fixed_reference = if has_free { None } else { Some(run_noiseless(&plan, None)?) };
    let cutoff = plan.cutoff;
    let want_density = options.wigner.is_some();

    let chunks = options.trials.div_ceil(TRAJECTORY_CHUNK);
    let results: Vec<ChunkResult<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<ChunkResult<T>> {
            let start = c * TRAJECTORY_CHUNK;
            let end = (start + TRAJECTORY_CHUNK).min(options.trials);
            let mut density = want_density.then(|| Array2::zeros((cutoff, cutoff)));
            let mut samples = Vec::with_capacity(end - start);
            for i in start..end {
                let mut rng = NormalSampler::from_stream(options.seed, i as u64);
                let t = run_trajectory(&plan, &noise, &mut rng, options.postselection)?;
                if !t.accepted {
                    samples.push((0.0, 0.0, false, 0.0));
                    continue;
                }
                let reference = match &fixed_reference {
                    Some(r) => r.clone(),
                    None => run_noiseless(&plan, Some(&t.outcomes))?,
                };
                let f = t.state.fidelity(&reference)?.as_f64();
                let leak = t.state.leakage(LEAKAGE_BAND).as_f64();
                if let Some(rho) = density.as_mut() {
                    accumulate_density(rho, &t.state, t.weight);
                }
                samples.push((f, t.weight.as_f64(), true, leak));
            }
            Ok(ChunkResult { samples, density })
        })
        .collect::<Result<_>>()?;

    let mut fidelities = Vec::with_capacity(options.trials);
    let mut weights = Vec::with_capacity(options.trials);
    let mut accepted = 0;
    let mut max_leakage: f64 = 0.0;
    let mut density: Option<Array2<Complex<T>>> = want_density.then(|| Array2::zeros((cutoff, cutoff)));
    for chunk in &results {
        for &(f, w, ok, leak) in &chunk.samples {
            fidelities.push(f);
            weights.push(w);
            accepted += usize::from(ok);
            max_leakage = max_leakage.max(leak);
        }
        if let (Some(total), Some(part)) = (density.as_mut(), chunk.density.as_ref()) {
            *total += part;
        }
    }
    let weight_sum: f64 = weights.iter().sum();
    if accepted == 0 || weight_sum <= 0.0 {
        return Err(Error::PostselectionStarvation {
            trials: options.trials,
        });
    }
    if max_leakage > LEAKAGE_WARN {
        log::warn!("truncation leakage {max_leakage:e} exceeds {LEAKAGE_WARN:e}; raise the cutoff");
    }
    let mean: f64 = fidelities.iter().zip(&weights).map(|(f, w)| f * w).sum::<f64>() / weight_sum;
    let spread: f64 = fidelities
        .iter()
        .zip(&weights)
        .map(|(f, w)| (w * (f - mean)).powi(2))
        .sum();
    let standard_error = if accepted > 1 {
        (spread * accepted as f64 / (accepted as f64 - 1.0)).sqrt() / weight_sum
    } else {
        0.0
    };
    let acceptance = match options.postselection {
        Postselection::Weighted => weight_sum / options.trials as f64,
        Postselection::Sampled => accepted as f64 / options.trials as f64,
    };

    let mut wigner = None;
    if let (Some(grid), Some(rho)) = (options.wigner.as_ref(), density.as_mut()) {
        let norm = T::lit(weight_sum);
        rho.mapv_inplace(|z| z / norm);
        wigner = Some(wigner_from_density(rho, grid)?);
    }
    let sigma_step = circuit
        .gates
        .iter()
        .find(|g| !g.is_measurement())
        .map(|g| circuit.sigma_step(g.duration).as_f64());
    let (wigner_min, wigner_integral) = match &wigner {
        Some(w) => (Some(w.min().as_f64()), Some(w.integral().as_f64())),
        None => (None, None),
    };
    Ok(RunSummary {
        schema_version: SCHEMA_VERSION,
        mode: circuit.mode.name(),
        s_used: noise.s_used.map(|s| s.as_f64()),
        seed: options.seed,
        trials: options.trials,
        accepted,
        mean_fidelity: mean,
        infidelity: 1.0 - mean,
        standard_error,
        postselect_acceptance_rate: acceptance,
        postselection: options.postselection,
        kappa: circuit.kappa.as_f64(),
        trotter_n: circuit.trotter_n,
        sigma_step,
        cutoff,
        gates: circuit.gates.len(),
        max_leakage,
        wigner_min,
        wigner_integral,
        fidelities,
        weights,
        wigner,
        density,
    })
}
