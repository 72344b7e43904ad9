//! Circuit description and the TOML circuit-file format.
//!
//! ```toml
//! cutoff = 40
//!
//! [noise]
//! sigma_p = 0.1        # or: kappa = 0.01
//! trotter_n = 100
//!
//! [mode]
//! mode = "logical"     # or "physical"
//! s = "auto"           # or a number
//!
//! [target]
//! fock = 5
//!
//! [[gates]]
//! kind = "sqr"
//! theta = 1.5708
//! phi = 0.0
//!
//! [[gates]]
//! kind = "cd"
//! alpha = "0.3-1.2i"   # or alpha_re / alpha_im
//!
//! [[gates]]
//! kind = "measure"
//! basis = "z"
//! postselect = -1
//! ```
//!
//! `sigma_p` is the full-gate noise of a unit-duration gate, so it sets
//! `kappa = sigma_p²`.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::fock::QubitBasis;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind<T> {
    Sqr { theta: T, phi: T },
    Cd { alpha: Complex<T> },
    /// `postselect = Some(±1)` keeps only that outcome.
    MeasureQubit { basis: QubitBasis, postselect: Option<i8> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec<T> {
    pub kind: GateKind<T>,
    pub duration: T,
}

impl<T: Real> GateSpec<T> {
    pub fn sqr(theta: T, phi: T) -> Self {
        Self {
            kind: GateKind::Sqr { theta, phi },
            duration: T::one(),
        }
    }

    pub fn cd(alpha: Complex<T>) -> Self {
        Self {
            kind: GateKind::Cd { alpha },
            duration: T::one(),
        }
    }

    pub fn measure(basis: QubitBasis, postselect: Option<i8>) -> Self {
        Self {
            kind: GateKind::MeasureQubit { basis, postselect },
            duration: T::zero(),
        }
    }

    pub fn with_duration(mut self, duration: T) -> Self {
        self.duration = duration;
        self
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self.kind, GateKind::MeasureQubit { .. })
    }

    fn validate(&self, index: usize) -> Result<()> {
        let finite = match self.kind {
            GateKind::Sqr { theta, phi } => theta.is_finite() && phi.is_finite(),
            GateKind::Cd { alpha } => alpha.re.is_finite() && alpha.im.is_finite(),
            GateKind::MeasureQubit { postselect, .. } => {
                if let Some(o) = postselect {
                    if o != 1 && o != -1 {
                        return Err(Error::invalid(format!("gate {index}: postselect must be +1 or -1")));
                    }
                }
                true
            }
        };
        if !finite {
            return Err(Error::invalid(format!("gate {index}: non-finite parameter")));
        }
        if self.is_measurement() {
            if self.duration != T::zero() {
                return Err(Error::invalid(format!("gate {index}: measurements take zero time")));
            }
        } else if !(self.duration > T::zero() && self.duration.is_finite()) {
            return Err(Error::invalid(format!("gate {index}: duration must be > 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezingChoice<T> {
    Fixed(T),
    /// Resolve the optimal squeezing at each gate's per-step noise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode<T> {
    Physical,
    Logical(SqueezingChoice<T>),
}

impl<T> ExecutionMode<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ExecutionMode::Physical => "physical",
            ExecutionMode::Logical(_) => "logical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec<T> {
    pub gates: Vec<GateSpec<T>>,
    /// Noise power; a gate of duration `T` accrues variance `kappa·T` per
    /// quadrature.
    pub kappa: T,
    pub trotter_n: usize,
    pub mode: ExecutionMode<T>,
    pub cutoff: usize,
    /// Fock level the noiseless circuit should prepare, if declared.
    pub target_fock: Option<usize>,
}

impl<T: Real> CircuitSpec<T> {
    pub fn new(gates: Vec<GateSpec<T>>, cutoff: usize) -> Self {
        Self {
            gates,
            kappa: T::zero(),
            trotter_n: 1,
            mode: ExecutionMode::Physical,
            cutoff,
            target_fock: None,
        }
    }

    pub fn with_kappa(mut self, kappa: T) -> Self {
        self.kappa = kappa;
        self
    }

    /// Noise giving full-gate standard deviation `sigma_p` on unit-duration
    /// gates.
    pub fn with_sigma_p(self, sigma_p: T) -> Self {
        self.with_kappa(sigma_p * sigma_p)
    }

    pub fn with_trotter_n(mut self, n: usize) -> Self {
        self.trotter_n = n;
        self
    }

    pub fn with_mode(mut self, mode: ExecutionMode<T>) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// Per-step standard deviation for a gate of `duration`.
    pub fn sigma_step(&self, duration: T) -> T {
        (self.kappa * duration / T::from_usize_lossy(self.trotter_n)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= T::zero() && self.kappa.is_finite()) {
            return Err(Error::invalid("kappa must be finite and >= 0"));
        }
        if self.trotter_n == 0 {
            return Err(Error::invalid("trotter_n must be >= 1"));
        }
        if self.cutoff < 2 {
            return Err(Error::invalid("cutoff must be >= 2"));
        }
        if let ExecutionMode::Logical(SqueezingChoice::Fixed(s)) = self.mode {
            if !(s >= T::zero() && s.is_finite()) {
                return Err(Error::invalid(format!("squeezing must be finite and >= 0, got {s}")));
            }
        }
        if let Some(n) = self.target_fock {
            if n >= self.cutoff {
                return Err(Error::invalid(format!("target Fock level {n} is not below cutoff {}", self.cutoff)));
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            g.validate(i)?;
        }
        Ok(())
    }
}

/// Parse a complex literal such as `1.5`, `-2i`, `0.3-1.2i` or `i`.
pub fn parse_complex(text: &str) -> Option<Complex<f64>> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let imag_unit = |s: &str| -> Option<f64> {
        let body = s.strip_suffix(['i', 'j'])?;
        match body {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => body.parse().ok(),
        }
    };
    if !t.ends_with(['i', 'j']) {
        return t.parse().ok().map(|re| Complex::new(re, 0.0));
    }
    // split at the last sign that is not an exponent sign or the leading one
    let bytes = t.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re: f64 = t[..k].parse().ok()?;
            Some(Complex::new(re, imag_unit(&t[k..])?))
        }
        None => Some(Complex::new(0.0, imag_unit(&t)?)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    cutoff: Option<usize>,
    noise: Option<RawNoise>,
    mode: Option<RawMode>,
    target: Option<RawTarget>,
    #[serde(default)]
    gates: Vec<RawGate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    kappa: Option<f64>,
    sigma_p: Option<f64>,
    trotter_n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSqueezing {
    Number(f64),
    Word(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    mode: String,
    s: Option<RawSqueezing>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    fock: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    kind: Spanned<String>,
    theta: Option<f64>,
    phi: Option<f64>,
    alpha: Option<Spanned<String>>,
    alpha_re: Option<f64>,
    alpha_im: Option<f64>,
    duration: Option<f64>,
    basis: Option<String>,
    postselect: Option<i64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Default cutoff for circuit files that do not set one.
pub const DEFAULT_CUTOFF: usize = 40;
pub const DEFAULT_TROTTER_N: usize = 100;

/// Parse the circuit-file format into a validated [`CircuitSpec`].
pub fn parse_circuit<T: Real>(text: &str) -> Result<CircuitSpec<T>> {
    let raw: RawCircuit = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let lit = |x: f64| T::lit(x);

    let mut gates = Vec::with_capacity(raw.gates.len());
    for g in &raw.gates {
        let line = line_of(text, g.kind.span().start);
        let fail = |message: String| Error::Parse { line, message };
        let kind_name = g.kind.get_ref().to_ascii_lowercase();
        let kind = match kind_name.as_str() {
            "sqr" => GateKind::Sqr {
                theta: lit(g.theta.ok_or_else(|| fail("sqr gate needs theta".into()))?),
                phi: lit(g.phi.unwrap_or(0.0)),
            },
            "cd" => {
                let alpha = match (&g.alpha, g.alpha_re, g.alpha_im) {
                    (Some(s), None, None) => parse_complex(s.get_ref()).ok_or_else(|| Error::Parse {
                        line: line_of(text, s.span().start),
                        message: format!("malformed complex literal {:?}", s.get_ref()),
                    })?,
                    (None, re, im) if re.is_some() || im.is_some() => {
                        Complex::new(re.unwrap_or(0.0), im.unwrap_or(0.0))
                    }
                    (None, _, _) => return Err(fail("cd gate needs alpha or alpha_re/alpha_im".into())),
                    _ => return Err(fail("give either alpha or alpha_re/alpha_im, not both".into())),
                };
                GateKind::Cd {
                    alpha: Complex::new(lit(alpha.re), lit(alpha.im)),
                }
            }
            "measure" => {
                let basis = g
                    .basis
                    .as_deref()
                    .unwrap_or("z")
                    .parse::<QubitBasis>()
                    .map_err(|e| fail(e.to_string()))?;
                let postselect = match g.postselect {
                    None => None,
                    Some(1) => Some(1),
                    Some(-1) => Some(-1),
                    Some(other) => return Err(fail(format!("postselect must be +1 or -1, got {other}"))),
                };
                GateKind::MeasureQubit { basis, postselect }
            }
            other => return Err(fail(format!("unknown gate kind {other:?}"))),
        };
        let default_duration = if matches!(kind, GateKind::MeasureQubit { .. }) { 0.0 } else { 1.0 };
        gates.push(GateSpec {
            kind,
            duration: lit(g.duration.unwrap_or(default_duration)),
        });
    }

    let mut spec = CircuitSpec::new(gates, raw.cutoff.unwrap_or(DEFAULT_CUTOFF));
    spec.trotter_n = DEFAULT_TROTTER_N;
    if let Some(noise) = raw.noise {
        spec.kappa = match (noise.kappa, noise.sigma_p) {
            (Some(_), Some(_)) => return Err(Error::invalid("noise: give kappa or sigma_p, not both")),
            (Some(k), None) => lit(k),
            (None, Some(s)) => lit(s * s),
            (None, None) => T::zero(),
        };
        if let Some(n) = noise.trotter_n {
            spec.trotter_n = n;
        }
    }
    if let Some(mode) = raw.mode {
        spec.mode = match mode.mode.to_ascii_lowercase().as_str() {
            "physical" => ExecutionMode::Physical,
            "logical" => ExecutionMode::Logical(match mode.s {
                None => SqueezingChoice::Auto,
                Some(RawSqueezing::Word(w)) if w.eq_ignore_ascii_case("auto") => SqueezingChoice::Auto,
                Some(RawSqueezing::Number(s)) => SqueezingChoice::Fixed(lit(s)),
                Some(RawSqueezing::Word(w)) => return Err(Error::invalid(format!("mode.s: expected a number or \"auto\", got {w:?}"))),
            }),
            other => return Err(Error::invalid(format!("unknown mode {other:?}"))),
        };
    }
    spec.target_fock = raw.target.and_then(|t| t.fock);
    spec.validate()?;
    Ok(spec)
}

pub fn load_circuit<T: Real>(path: impl AsRef<Path>) -> Result<CircuitSpec<T>> {
    let text = std::fs::read_to_string(path)?;
    parse_circuit(&text)
}
