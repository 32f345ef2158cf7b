//! Vertical Fourier modes: decomposition, projection and degree.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::MagneticSystem;
use crate::phase::{PhaseFunction, Quadrature, Sampled};

type C64 = Complex64;

/// Modes below `DEGREE_THRESHOLD · ‖u‖` do not count toward the degree.
pub const DEGREE_THRESHOLD: f64 = 1e-12;

/// Splits `u` into its fiber modes. The list covers every structurally
/// present mode, so `Σ u_k = u` exactly.
pub fn decompose(u: &PhaseFunction) -> Vec<(i32, PhaseFunction)> {
    u.structural_modes().iter().map(|&k| (k, u.project(k))).collect()
}

/// `u_k`.
pub fn project(u: &PhaseFunction, k: i32) -> PhaseFunction {
    u.project(k)
}

/// Sum of a mode list.
pub fn reassemble(parts: &[(i32, PhaseFunction)]) -> PhaseFunction {
    PhaseFunction::linear(parts.iter().map(|(_, p)| (C64::new(1.0, 0.0), p.clone())).collect())
}

/// Numerical degree of `u` on a quadrature.
pub fn degree(sys: &MagneticSystem, quad: &Quadrature, u: &PhaseFunction) -> Result<u32> {
    Ok(ModeSpectrum::measure(sys, quad, u)?.degree)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeNormRow {
    pub k: i32,
    pub norm: f64,
}

/// `‖u_k‖` for each mode together with the numerical degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub norms: BTreeMap<i32, f64>,
    pub degree: u32,
}

impl ModeSpectrum {
    pub fn measure(sys: &MagneticSystem, quad: &Quadrature, u: &PhaseFunction) -> Result<Self> {
        Ok(Self::from_sampled(quad, &quad.sample_one(sys, u)?))
    }

    pub fn from_sampled(quad: &Quadrature, s: &Sampled) -> Self {
        Self::from_norms_sq(quad.mode_norms_sq(s))
    }

    pub fn from_norms_sq(norms_sq: BTreeMap<i32, f64>) -> Self {
        let total: f64 = norms_sq.values().sum();
        let cut = DEGREE_THRESHOLD * total.sqrt();
        let norms: BTreeMap<i32, f64> = norms_sq.into_iter().map(|(k, v)| (k, v.max(0.0).sqrt())).collect();
        let degree = norms.iter().filter(|(_, n)| **n > cut).map(|(k, _)| k.unsigned_abs()).max().unwrap_or(0);
        Self { norms, degree }
    }

    /// `Σ_k ‖u_k‖²`.
    pub fn total_sq(&self) -> f64 {
        self.norms.values().map(|n| n * n).sum()
    }

    pub fn norm(&self, k: i32) -> f64 {
        self.norms.get(&k).copied().unwrap_or(0.0)
    }

    /// Modes carrying mass above the degree threshold.
    pub fn support(&self) -> Vec<i32> {
        let cut = DEGREE_THRESHOLD * self.total_sq().sqrt();
        self.norms.iter().filter(|(_, n)| **n > cut).map(|(k, _)| *k).collect()
    }

    /// Mass outside the given modes.
    pub fn mass_outside(&self, allowed: &[i32]) -> f64 {
        self.norms.iter().filter(|(k, _)| !allowed.contains(k)).map(|(_, n)| n * n).sum::<f64>().sqrt()
    }

    pub fn rows(&self) -> Vec<ModeNormRow> {
        self.norms.iter().map(|(&k, &norm)| ModeNormRow { k, norm }).collect()
    }
}

/// `‖u‖²` from pointwise values on an equispaced fiber grid, independent of
/// the per-mode bookkeeping. Exact once `fiber_points > 2·degree`.
pub fn direct_norm_sq(quad: &Quadrature, s: &Sampled, fiber_points: usize) -> f64 {
    let dt = TAU / fiber_points as f64;
    let mut acc = 0.0;
    for (i, w) in quad.weights().iter().enumerate() {
        let mut fib = 0.0;
        for j in 0..fiber_points {
            let th = j as f64 * dt;
            let v: C64 = s.at(i).iter().map(|&(k, c)| c * C64::from_polar(1.0, k as f64 * th)).sum();
            fib += v.norm_sqr();
        }
        acc += w * fib * dt;
    }
    acc
}

/// Relative Parseval defect `|‖u‖² − Σ‖u_k‖²| / ‖u‖²`.
pub fn parseval_defect(quad: &Quadrature, s: &Sampled) -> f64 {
    let deg = s_degree(s);
    let direct = direct_norm_sq(quad, s, 2 * deg + 3);
    let modes = quad.norm_sq(s);
    if direct == 0.0 {
        return modes.abs();
    }
    (direct - modes).abs() / direct
}

fn s_degree(s: &Sampled) -> usize {
    (0..s.len()).flat_map(|i| s.at(i).iter().map(|(k, _)| k.unsigned_abs() as usize)).max().unwrap_or(0)
}
