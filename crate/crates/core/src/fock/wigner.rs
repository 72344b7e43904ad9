//! Wigner functions on a rectangular `(q, p)` grid.
//!
//! Normalized so that `∫ W dq dp = 1` with `⟨q²⟩ = 1/2` in vacuum, hence
//! `W(0, 0) = ⟨(−1)^n̂⟩ / π`.

use std::io::Write;

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::C;
use super::state::HybridState;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative weight at the grid border above which support leakage is
/// reported.
pub const EDGE_WARN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerGridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub q_points: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub p_points: usize,
}

impl WignerGridSpec {
    /// Square grid `[-extent, extent]²` with `points` per axis.
    pub fn square(extent: f64, points: usize) -> Self {
        Self {
            q_min: -extent,
            q_max: extent,
            q_points: points,
            p_min: -extent,
            p_max: extent,
            p_points: points,
        }
    }

    fn axis<T: Real>(lo: f64, hi: f64, n: usize) -> Vec<T> {
        if n == 1 {
            return vec![T::lit(lo)];
        }
        (0..n)
            .map(|k| T::lit(lo + (hi - lo) * k as f64 / (n - 1) as f64))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.q_points >= 1
            && self.p_points >= 1
            && self.q_max >= self.q_min
            && self.p_max >= self.p_min
            && [self.q_min, self.q_max, self.p_min, self.p_max].iter().all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("bad Wigner grid {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid<T> {
    pub q_axis: Vec<T>,
    pub p_axis: Vec<T>,
    /// `values[[i, j]] = W(q_axis[i], p_axis[j])`.
    pub values: Array2<T>,
    /// Largest |W| on the grid border relative to the largest |W| anywhere.
    pub edge_fraction: T,
}

impl<T: Real> WignerGrid<T> {
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[[i, j]]
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Riemann sum Σ W Δq Δp.
    pub fn integral(&self) -> T {
        let step = |axis: &[T]| {
            if axis.len() > 1 {
                axis[1] - axis[0]
            } else {
                T::one()
            }
        };
        self.values.iter().copied().sum::<T>() * step(&self.q_axis) * step(&self.p_axis)
    }

    /// CSV with header `q,p,w`, q-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "q,p,w")?;
        for (i, q) in self.q_axis.iter().enumerate() {
            for (j, p) in self.p_axis.iter().enumerate() {
                writeln!(out, "{q:e},{p:e},{:e}", self.values[[i, j]])?;
            }
        }
        Ok(())
    }
}

/// Wigner function of an oscillator density matrix `rho[m][n] = ⟨m|ρ|n⟩`.
///
/// Uses the Laguerre recursion over `|m⟩⟨n|` Wigner kernels, `O(dim²)` per
/// grid point.
pub fn wigner_from_density<T: Real>(rho: &Array2<Complex<T>>, spec: &WignerGridSpec) -> Result<WignerGrid<T>> {
    spec.validate()?;
    if rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            left: rho.nrows(),
            right: rho.ncols(),
        });
    }
    let dim = rho.nrows();
    let q_axis: Vec<T> = WignerGridSpec::axis(spec.q_min, spec.q_max, spec.q_points);
    let p_axis: Vec<T> = WignerGridSpec::axis(spec.p_min, spec.p_max, spec.p_points);
    let roots: Vec<T> = (0..dim.max(1)).map(|n| T::from_usize_lossy(n).sqrt()).collect();
    let two = T::lit(2.0);
    let inv_pi = T::one() / T::PI();

    let rows: Vec<Vec<T>> = q_axis
        .par_iter()
        .map(|&q| {
            let mut kernel = vec![C::new(T::zero(), T::zero()); dim];
            p_axis
                .iter()
                .map(|&p| {
                    let a = C::new(q, p) / T::SQRT_2();
                    let a2 = a * two;
                    let a2c = a2.conj();
                    kernel[0] = C::new((-two * a.norm_sqr()).exp() * inv_pi, T::zero());
                    let mut w = rho[[0, 0]].re * kernel[0].re;
                    for n in 1..dim {
                        kernel[n] = a2 * kernel[n - 1] / roots[n];
                        w += two * (rho[[0, n]] * kernel[n]).re;
                    }
                    for m in 1..dim {
                        let mut temp = kernel[m];
                        kernel[m] = (a2c * temp - kernel[m - 1] * roots[m]) / roots[m];
                        w += (rho[[m, m]] * kernel[m]).re;
                        for n in m + 1..dim {
                            let next = (a2 * kernel[n - 1] - temp * roots[m]) / roots[n];
                            temp = kernel[n];
                            kernel[n] = next;
                            w += two * (rho[[m, n]] * kernel[n]).re;
                        }
                    }
                    w
                })
                .collect()
        })
        .collect();

    let mut values = Array2::zeros((q_axis.len(), p_axis.len()));
    for (i, row) in rows.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            values[[i, j]] = w;
        }
    }
    let peak = values.iter().map(|w: &T| w.abs()).fold(T::zero(), T::max);
    let (nq, np) = (q_axis.len(), p_axis.len());
    let mut edge = T::zero();
    for i in 0..nq {
        for j in 0..np {
            if i == 0 || j == 0 || i + 1 == nq || j + 1 == np {
                edge = edge.max(values[[i, j]].abs());
            }
        }
    }
    let edge_fraction = if peak > T::zero() { edge / peak } else { T::zero() };
    if edge_fraction > T::lit(EDGE_WARN) {
        log::warn!("Wigner grid may truncate the state's support (edge fraction {edge_fraction:e})");
    }
    Ok(WignerGrid {
        q_axis,
        p_axis,
        values,
        edge_fraction,
    })
}

/// Wigner function of the oscillator factor of a pure hybrid state.
pub fn wigner<T: Real>(state: &HybridState<T>, spec: &WignerGridSpec) -> Result<WignerGrid<T>> {
    wigner_from_density(&state.oscillator_density(), spec)
}
