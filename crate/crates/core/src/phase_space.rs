//! Phase-space model of one encoded time step.
//!
//! A data mode is entangled with a qunaught GKP ancilla by two-mode squeezing,
//! both modes pick up independent Gaussian displacements, the encoder is
//! undone, and the ancilla is measured modulo √(2π). The data-mode noise is
//! then estimated linearly from the syndrome and counter-displaced. Because
//! every step is linear in the quadratures, the whole protocol reduces to
//! arithmetic on 4-vectors of displacements, which is what this module does.
//!
//! Quadrature ordering is `(q_dat, p_dat, q_anc, p_anc)` with the vacuum
//! convention `<q^2> = 1/2`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::NormalSampler;
use crate::scalar::{gkp_period, Real};

/// Dense 4x4 real matrix, row-major.
pub type Mat4<T> = [[T; 4]; 4];

/// Default truncation of the winding-number series in
/// [`residual_variance_analytic`].
pub const DEFAULT_SERIES_TERMS: usize = 50;

/// Samples per Monte Carlo chunk. Each chunk owns one generator stream, so
/// this constant is part of the reproducibility contract.
pub const MC_CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QuadVector4<T> {
    pub q_dat: T,
    pub p_dat: T,
    pub q_anc: T,
    pub p_anc: T,
}

impl<T: Real> QuadVector4<T> {
    pub fn new(q_dat: T, p_dat: T, q_anc: T, p_anc: T) -> Self {
        Self {
            q_dat,
            p_dat,
            q_anc,
            p_anc,
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(v: [T; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.q_dat, self.p_dat, self.q_anc, self.p_anc]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

fn mat_vec<T: Real>(m: &Mat4<T>, v: QuadVector4<T>) -> QuadVector4<T> {
    let x = v.to_array();
    let mut out = [T::zero(); 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(&x).map(|(&a, &b)| a * b).sum();
    }
    QuadVector4::from_array(out)
}

pub fn mat_mul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose<T: Real>(a: &Mat4<T>) -> Mat4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for (i, row) in a.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            out[j][i] = x;
        }
    }
    out
}

pub fn identity4<T: Real>() -> Mat4<T> {
    let mut out = [[T::zero(); 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = T::one();
    }
    out
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> T {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), T::max)
}

/// Two-mode symplectic form, block-diagonal in `[[0, 1], [-1, 0]]`.
pub fn symplectic_form<T: Real>() -> Mat4<T> {
    let (o, z) = (T::one(), T::zero());
    [[z, o, z, z], [-o, z, z, z], [z, z, z, o], [z, z, -o, z]]
}

/// Noise strength and Trotter partition for one gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseParams<T> {
    pub kappa: T,
    pub duration: T,
    pub trotter_n: usize,
}

impl<T: Real> NoiseParams<T> {
    pub fn new(kappa: T, duration: T, trotter_n: usize) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= T::zero()) {
            return Err(Error::invalid(format!("kappa must be finite and >= 0, got {kappa}")));
        }
        if !(duration.is_finite() && duration > T::zero()) {
            return Err(Error::invalid(format!("duration must be > 0, got {duration}")));
        }
        if trotter_n == 0 {
            return Err(Error::invalid("trotter_n must be >= 1"));
        }
        Ok(Self {
            kappa,
            duration,
            trotter_n,
        })
    }

    /// Parameters giving a full-gate standard deviation of `sigma_p`.
    pub fn from_sigma_p(sigma_p: T, duration: T, trotter_n: usize) -> Result<Self> {
        if !(sigma_p.is_finite() && sigma_p >= T::zero()) {
            return Err(Error::invalid(format!("sigma_p must be finite and >= 0, got {sigma_p}")));
        }
        if !(duration.is_finite() && duration > T::zero()) {
            return Err(Error::invalid(format!("duration must be > 0, got {duration}")));
        }
        Self::new(sigma_p * sigma_p / duration, duration, trotter_n)
    }

    pub fn step_duration(&self) -> T {
        self.duration / T::from_usize_lossy(self.trotter_n)
    }

    /// Per-step standard deviation, √(κT/N).
    pub fn sigma_step(&self) -> T {
        (self.kappa * self.step_duration()).sqrt()
    }

    /// Full-gate standard deviation, √(κT).
    pub fn sigma_full(&self) -> T {
        (self.kappa * self.duration).sqrt()
    }
}

/// Two-mode-squeezing symplectic matrix and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmsSymplectic<T> {
    s: T,
    forward: Mat4<T>,
    inverse: Mat4<T>,
}

fn tms_matrix<T: Real>(s: T) -> Mat4<T> {
    let (c, h, z) = (s.cosh(), s.sinh(), T::zero());
    [[c, z, h, z], [z, c, z, -h], [h, z, c, z], [z, -h, z, c]]
}

impl<T: Real> TmsSymplectic<T> {
    pub fn new(s: T) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::invalid(format!("squeezing must be finite, got {s}")));
        }
        Ok(Self {
            s,
            forward: tms_matrix(s),
            inverse: tms_matrix(-s),
        })
    }

    pub fn squeezing(&self) -> T {
        self.s
    }

    pub fn forward(&self) -> &Mat4<T> {
        &self.forward
    }

    pub fn inverse(&self) -> &Mat4<T> {
        &self.inverse
    }

    pub fn encode(&self, v: QuadVector4<T>) -> QuadVector4<T> {
        mat_vec(&self.forward, v)
    }

    pub fn decode(&self, v: QuadVector4<T>) -> QuadVector4<T> {
        mat_vec(&self.inverse, v)
    }

    /// max |SᵀJS − J|.
    pub fn symplectic_defect(&self) -> T {
        let j = symplectic_form::<T>();
        let sjs = mat_mul(&transpose(&self.forward), &mat_mul(&j, &self.forward));
        max_abs_diff(&sjs, &j)
    }
}

pub fn tms_symplectic<T: Real>(s: T) -> Result<TmsSymplectic<T>> {
    TmsSymplectic::new(s)
}

/// Raw independent displacement Ω picked up by both modes in one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseDraw<T> {
    pub omega: QuadVector4<T>,
}

pub fn sample_noise_draw<T: Real>(rng: &mut NormalSampler, sigma_step: T) -> NoiseDraw<T> {
    NoiseDraw {
        omega: QuadVector4::new(
            rng.normal(sigma_step),
            rng.normal(sigma_step),
            rng.normal(sigma_step),
            rng.normal(sigma_step),
        ),
    }
}

/// z = S(−s)·Ω, the noise seen after inverse encoding.
pub fn transform_noise<T: Real>(draw: &NoiseDraw<T>, s: T) -> Result<QuadVector4<T>> {
    Ok(TmsSymplectic::new(s)?.decode(draw.omega))
}

/// Closed-form covariance of the decoded noise z.
pub fn noise_covariance<T: Real>(s: T, sigma_step: T) -> Mat4<T> {
    let var = sigma_step * sigma_step;
    let two_s = s + s;
    let c = var * two_s.cosh();
    let h = var * two_s.sinh();
    let z = T::zero();
    [[c, z, -h, z], [z, c, z, h], [-h, z, c, z], [z, h, z, c]]
}

/// Reduce `x` into the half-open window `[-period/2, period/2)`.
pub fn modular_reduce<T: Real>(x: T, period: T) -> Result<T> {
    if !(period.is_finite() && period > T::zero()) {
        return Err(Error::invalid(format!("period must be > 0, got {period}")));
    }
    if !x.is_finite() {
        return Err(Error::invalid(format!("cannot reduce non-finite value {x}")));
    }
    Ok(reduce_unchecked(x, period))
}

#[inline]
fn reduce_unchecked<T: Real>(x: T, period: T) -> T {
    let half = period * T::lit(0.5);
    let mut r = x - period * (x / period + T::lit(0.5)).floor();
    // floor rounding can land exactly on either edge
    if r >= half {
        r -= period;
    } else if r < -half {
        r += period;
    }
    r
}

/// Modular ancilla measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyndromeOutcome<T> {
    pub zbar_q: T,
    pub zbar_p: T,
}

impl<T: Real> SyndromeOutcome<T> {
    /// Measure the ancilla components of decoded noise `z` modulo √(2π).
    pub fn measure(z: &QuadVector4<T>) -> Self {
        let period = gkp_period::<T>();
        Self {
            zbar_q: reduce_unchecked(z.q_anc, period),
            zbar_p: reduce_unchecked(z.p_anc, period),
        }
    }
}

/// Linear estimate of the data-mode noise, `−Z tanh(2s) z̄`.
pub fn lmmse_estimate<T: Real>(syndrome: &SyndromeOutcome<T>, s: T) -> (T, T) {
    let t = (s + s).tanh();
    (-t * syndrome.zbar_q, t * syndrome.zbar_p)
}

/// Data-mode displacement left over after correction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ResidualDisplacement<T> {
    pub delta_q: T,
    pub delta_p: T,
}

impl<T: Real> ResidualDisplacement<T> {
    pub fn new(delta_q: T, delta_p: T) -> Self {
        Self { delta_q, delta_p }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// One encoded time step with fixed `(sigma_step, s)`, precomputed for
/// repeated sampling.
#[derive(Debug, Clone, Copy)]
pub struct LogicalStep<T> {
    sigma_step: T,
    tms: TmsSymplectic<T>,
}

impl<T: Real> LogicalStep<T> {
    pub fn new(sigma_step: T, s: T) -> Result<Self> {
        if !(sigma_step.is_finite() && sigma_step >= T::zero()) {
            return Err(Error::invalid(format!("sigma_step must be >= 0, got {sigma_step}")));
        }
        if !(s >= T::zero()) {
            return Err(Error::invalid(format!("squeezing must be >= 0, got {s}")));
        }
        Ok(Self {
            sigma_step,
            tms: TmsSymplectic::new(s)?,
        })
    }

    pub fn sigma_step(&self) -> T {
        self.sigma_step
    }

    pub fn squeezing(&self) -> T {
        self.tms.squeezing()
    }

    /// Residual for a given raw draw. Deterministic.
    pub fn residual(&self, draw: &NoiseDraw<T>) -> ResidualDisplacement<T> {
        let z = self.tms.decode(draw.omega);
        let syndrome = SyndromeOutcome::measure(&z);
        let (est_q, est_p) = lmmse_estimate(&syndrome, self.tms.squeezing());
        ResidualDisplacement::new(z.q_dat - est_q, z.p_dat - est_p)
    }

    pub fn sample(&self, rng: &mut NormalSampler) -> ResidualDisplacement<T> {
        let draw = sample_noise_draw(rng, self.sigma_step);
        self.residual(&draw)
    }
}

pub fn sample_residual<T: Real>(
    rng: &mut NormalSampler,
    sigma_step: T,
    s: T,
) -> Result<ResidualDisplacement<T>> {
    Ok(LogicalStep::new(sigma_step, s)?.sample(rng))
}

/// Variance contributed by syndrome wrap-around, `2π tanh²(2s) E[n²]`, where
/// `n` is the lattice winding number of the ancilla noise.
pub fn wrap_penalty<T: Real>(sigma_step: T, s: T, n_max: usize) -> T {
    let two_s = s + s;
    let anc_std = sigma_step * two_s.cosh().sqrt();
    if anc_std == T::zero() {
        return T::zero();
    }
    let period = gkp_period::<T>();
    let scale = period / (anc_std * T::SQRT_2());
    let half = T::lit(0.5);
    // P(winding = n) for n >= 1, via erfc differences to keep tail precision
    let mut second_moment = T::zero();
    for n in 1..=n_max {
        let nf = T::from_usize_lossy(n);
        let p = half * (((nf - half) * scale).erfc() - ((nf + half) * scale).erfc());
        second_moment += nf * nf * p;
    }
    let second_moment = second_moment + second_moment;
    T::TAU() * two_s.tanh().powi(2) * second_moment
}

/// Exact residual variance per quadrature under the ideal-GKP model:
/// `σ² sech(2s) + 2π tanh²(2s) E[n²]`.
pub fn residual_variance_analytic<T: Real>(sigma_step: T, s: T, n_max: usize) -> T {
    let var = sigma_step * sigma_step;
    var / (s + s).cosh() + wrap_penalty(sigma_step, s, n_max)
}

/// Series length that covers ±12 ancilla standard deviations.
pub fn adequate_series_terms<T: Real>(sigma_step: T, s: T) -> usize {
    let anc_std = (sigma_step * (s + s).cosh().sqrt()).as_f64();
    let needed = (12.0 * anc_std / gkp_period::<f64>()).ceil();
    if needed.is_finite() {
        DEFAULT_SERIES_TERMS.max(needed as usize + 1)
    } else {
        usize::MAX
    }
}

/// Sample moments of one residual quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub trials: usize,
    pub mean: f64,
    pub mean_standard_error: f64,
    pub variance: f64,
    pub variance_standard_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualStats {
    pub q: Moments,
    pub p: Moments,
}

impl ResidualStats {
    pub fn variance(&self) -> f64 {
        self.q.variance
    }

    pub fn standard_error(&self) -> f64 {
        self.q.variance_standard_error
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PowerSums {
    n: usize,
    s: [f64; 4],
}

impl PowerSums {
    fn push(&mut self, x: f64) {
        let x2 = x * x;
        self.n += 1;
        self.s[0] += x;
        self.s[1] += x2;
        self.s[2] += x2 * x;
        self.s[3] += x2 * x2;
    }

    fn merge(mut self, other: &Self) -> Self {
        self.n += other.n;
        for (a, b) in self.s.iter_mut().zip(other.s) {
            *a += b;
        }
        self
    }

    fn moments(&self) -> Moments {
        let n = self.n as f64;
        let mean = self.s[0] / n;
        let raw2 = self.s[1] / n;
        let raw3 = self.s[2] / n;
        let raw4 = self.s[3] / n;
        let central2 = raw2 - mean * mean;
        let central4 = raw4 - 4.0 * mean * raw3 + 6.0 * mean * mean * raw2 - 3.0 * mean.powi(4);
        let variance = if self.n > 1 { central2 * n / (n - 1.0) } else { 0.0 };
        Moments {
            trials: self.n,
            mean,
            mean_standard_error: (variance / n).sqrt(),
            variance,
            variance_standard_error: ((central4 - central2 * central2).max(0.0) / n).sqrt(),
        }
    }
}

/// Monte Carlo residual statistics over `trials` independent steps.
///
/// Chunk `k` draws from stream `k` of `seed`, and chunk sums are combined in
/// index order, so the result is bit-identical for any thread count. Reusing
/// a seed across different `s` gives common random numbers.
pub fn residual_stats_mc<T: Real>(
    sigma_step: T,
    s: T,
    trials: usize,
    seed: u64,
) -> Result<ResidualStats> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let step = LogicalStep::new(sigma_step, s)?;
    let chunks = trials.div_ceil(MC_CHUNK);
    let sums: Vec<(PowerSums, PowerSums)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = MC_CHUNK.min(trials - k * MC_CHUNK);
            let mut rng = NormalSampler::from_stream(seed, k as u64);
            let (mut q, mut p) = (PowerSums::default(), PowerSums::default());
            for _ in 0..len {
                let r = step.sample(&mut rng);
                q.push(r.delta_q.as_f64());
                p.push(r.delta_p.as_f64());
            }
            (q, p)
        })
        .collect();
    let (q, p) = sums
        .iter()
        .fold((PowerSums::default(), PowerSums::default()), |(aq, ap), (bq, bp)| {
            (aq.merge(bq), ap.merge(bp))
        });
    Ok(ResidualStats {
        q: q.moments(),
        p: p.moments(),
    })
}

/// `(variance, standard_error)` of δ_q.
pub fn residual_variance_mc<T: Real>(
    sigma_step: T,
    s: T,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let stats = residual_stats_mc(sigma_step, s, trials, seed)?;
    Ok((stats.variance(), stats.standard_error()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn tms_at_zero_is_identity() {
        let t = tms_symplectic(0.0_f64).unwrap();
        assert_eq!(*t.forward(), identity4());
    }

    #[test]
    fn tms_entries_at_one() {
        let t = tms_symplectic(1.0_f64).unwrap();
        let f = t.forward();
        assert_abs_diff_eq!(f[0][0], 1.543081, epsilon = 1e-6);
        assert_abs_diff_eq!(f[0][2], 1.175201, epsilon = 1e-6);
        assert_abs_diff_eq!(f[1][3], -1.175201, epsilon = 1e-6);
        let back = mat_mul(f, tms_symplectic(-1.0).unwrap().forward());
        assert!(max_abs_diff(&back, &identity4()) < 1e-12);
    }

    #[test]
    fn tms_rejects_nan() {
        assert!(matches!(tms_symplectic(f64::NAN), Err(Error::InvalidParameter(_))));
        assert!(tms_symplectic(f64::INFINITY).is_err());
    }

    #[test]
    fn f32_symplectic() {
        let t = tms_symplectic(0.7_f32).unwrap();
        assert!(t.symplectic_defect() < 1e-5);
    }

    #[test]
    fn zero_sigma_draw_is_zero() {
        let mut rng = NormalSampler::from_stream(1, 0);
        let d = sample_noise_draw(&mut rng, 0.0_f64);
        assert_eq!(d.omega, QuadVector4::zero());
    }

    #[test]
    fn transform_identity_and_linearity() {
        let draw = NoiseDraw {
            omega: QuadVector4::new(1.0, 2.0, 3.0, 4.0),
        };
        assert_eq!(transform_noise(&draw, 0.0).unwrap(), draw.omega);
        let zero = NoiseDraw {
            omega: QuadVector4::zero(),
        };
        assert_eq!(transform_noise(&zero, 2.3).unwrap(), QuadVector4::zero());
    }

    #[test]
    fn covariance_closed_form_values() {
        let c = noise_covariance(0.0_f64, 0.2);
        assert!(max_abs_diff(&c, &identity4::<f64>().map(|r| r.map(|x| x * 0.04))) < 1e-15);
        let c = noise_covariance(1.0_f64, 0.01);
        assert_abs_diff_eq!(c[0][0], 3.7622e-4, epsilon = 1e-8);
        assert_abs_diff_eq!(c[0][2], -3.6269e-4, epsilon = 1e-8);
        for s in [0.5, 1.0, 2.0] {
            let inv = *tms_symplectic(-s).unwrap().forward();
            let route = mat_mul(&inv, &transpose(&inv)).map(|r| r.map(|x| x * 1e-4));
            assert!(max_abs_diff(&route, &noise_covariance(s, 0.01)) < 1e-12);
        }
    }

    #[test]
    fn modular_window_examples() {
        let w = gkp_period::<f64>();
        assert_eq!(modular_reduce(0.0, w).unwrap(), 0.0);
        assert_abs_diff_eq!(modular_reduce(2.6, w).unwrap(), 2.6 - w, epsilon = 1e-12);
        assert_abs_diff_eq!(modular_reduce(2.6, w).unwrap(), 0.09337, epsilon = 1e-5);
        assert_eq!(modular_reduce(-w / 2.0, w).unwrap(), -w / 2.0);
        assert_eq!(modular_reduce(w / 2.0, w).unwrap(), -w / 2.0);
        assert!(matches!(modular_reduce(1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(modular_reduce(1.0, -2.0).is_err());
    }

    #[test]
    fn lmmse_examples() {
        let syn = SyndromeOutcome {
            zbar_q: 0.1,
            zbar_p: 0.2,
        };
        assert_eq!(lmmse_estimate(&syn, 0.0), (0.0, 0.0));
        let (q, p) = lmmse_estimate(&syn, 1.0);
        assert_abs_diff_eq!(q, -0.0964028, epsilon = 1e-6);
        assert_abs_diff_eq!(p, 0.1928055, epsilon = 1e-6);
        let w = 0.37_f64;
        let (q, p) = lmmse_estimate(
            &SyndromeOutcome {
                zbar_q: w,
                zbar_p: 0.0,
            },
            8.0,
        );
        assert!((q + w).abs() < 1e-6);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn zero_noise_residual() {
        let mut rng = NormalSampler::from_stream(5, 0);
        let r = sample_residual(&mut rng, 0.0_f64, 3.0).unwrap();
        assert_eq!(r, ResidualDisplacement::zero());
    }

    #[test]
    fn zero_squeezing_passes_raw_noise() {
        let step = LogicalStep::new(0.3_f64, 0.0).unwrap();
        let draw = NoiseDraw {
            omega: QuadVector4::new(0.1, -0.2, 5.0, 7.0),
        };
        assert_eq!(step.residual(&draw), ResidualDisplacement::new(0.1, -0.2));
    }

    #[test]
    fn analytic_values() {
        assert_eq!(residual_variance_analytic(0.02_f64, 0.0, 50), 0.02 * 0.02);
        let v = residual_variance_analytic(0.01_f64, 1.0, 50);
        assert_abs_diff_eq!(v, 2.6580e-5, epsilon = 1e-9);
        assert!(wrap_penalty(0.01_f64, 1.0, 50) < 1e-300);
        // reference from an independent 50-digit mpmath evaluation
        let v = residual_variance_analytic(0.01_f64, 3.42, 50);
        assert_abs_diff_eq!(v, 2.561_556_200_455_9e-7, epsilon = 1e-15);
    }

    #[test]
    fn wrap_penalty_is_monotone_in_squeezing() {
        for sigma in [0.003, 0.01, 0.03, 0.1] {
            let mut prev = 0.0_f64;
            for k in 0..=10 {
                let s = 0.5 * k as f64;
                let w = wrap_penalty(sigma, s, adequate_series_terms(sigma, s));
                assert!(w >= prev, "sigma={sigma} s={s}: {w} < {prev}");
                prev = w;
            }
        }
    }

    #[test]
    fn mc_zero_squeezing_matches_raw_variance() {
        let stats = residual_stats_mc(0.01_f64, 0.0, 1_000_000, 3).unwrap();
        assert!((stats.q.variance - 1e-4).abs() < 3.0 * stats.q.variance_standard_error);
        assert!((stats.q.variance / 1e-4 - 1.0).abs() < 0.01);
        assert!(stats.q.mean.abs() < 3.0 * stats.q.mean_standard_error);
    }

    #[test]
    fn mc_is_deterministic() {
        let a = residual_variance_mc(0.01_f64, 2.0, 50_000, 99).unwrap();
        let b = residual_variance_mc(0.01_f64, 2.0, 50_000, 99).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    #[test]
    fn mc_rejects_zero_trials() {
        assert!(residual_variance_mc(0.01_f64, 1.0, 0, 0).is_err());
    }

    #[test]
    fn noise_params_relations() {
        let p = NoiseParams::new(0.04_f64, 2.0, 16).unwrap();
        assert_abs_diff_eq!(p.sigma_full(), (0.08_f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.sigma_full(), 4.0 * p.sigma_step(), epsilon = 1e-15);
        let q = NoiseParams::from_sigma_p(0.1_f64, 1.0, 100).unwrap();
        assert_abs_diff_eq!(q.sigma_step(), 0.01, epsilon = 1e-15);
        assert!(NoiseParams::new(-1.0_f64, 1.0, 1).is_err());
        assert!(NoiseParams::new(1.0_f64, 0.0, 1).is_err());
        assert!(NoiseParams::new(1.0_f64, 1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn symplectic_for_any_squeezing(s in -3.0_f64..3.0) {
            let t = tms_symplectic(s).unwrap();
            prop_assert!(t.symplectic_defect() < 1e-12);
            let back = mat_mul(t.forward(), t.inverse());
            prop_assert!(max_abs_diff(&back, &identity4()) < 1e-12);
        }

        #[test]
        fn modular_reduce_is_in_window_and_congruent(x in -1e3_f64..1e3) {
            let w = gkp_period::<f64>();
            let r = modular_reduce(x, w).unwrap();
            prop_assert!(r >= -w / 2.0 && r < w / 2.0);
            let k = (x - r) / w;
            prop_assert!((k - k.round()).abs() < 1e-9);
        }

        #[test]
        fn encode_decode_roundtrip(
            s in 0.0_f64..3.0,
            v in proptest::array::uniform4(-5.0_f64..5.0),
        ) {
            let t = tms_symplectic(s).unwrap();
            let x = QuadVector4::from_array(v);
            let back = t.decode(t.encode(x)).to_array();
            for (a, b) in back.iter().zip(v) {
                prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()) * s.cosh().powi(2));
            }
        }
    }
}
