//! Numerical verifiers for the integral identities and inequalities of
//! magnetic flows: Pestov, the Riccati norm identity, the per-mode identity,
//! the η± inequalities and the weighted Carleman estimate.

mod carleman;
mod pestov;
mod riccati;
mod structural;

use serde::{Deserialize, Serialize};

use crate::geometry::BackendKind;
use crate::phase::Quadrature;

pub use carleman::{
    carleman_estimate, chain_sigma, contraction_chain, degree_reduction_check, estimate_from_data, weighted_summation_engine, CarlemanReport,
    CarlemanWeights, ChainReport, WeightCertificate, DegreeReduction, EngineReport, ModeData, ModeRecord, TailReport,
    CARLEMAN_TOL, DEFAULT_K_MAX,
};
pub use pestov::{
    gk_inequalities, mode_identity_residual, pestov_corollary_residual, pestov_residual, riccati_norm_identity,
    GkReport,
};
pub use structural::{structural_residuals, STRUCTURAL_NAMES};
pub use riccati::{branch_separation, dense_samples, riccati_solve, Branch, RiccatiSolution, RICCATI_TOL};

#[cfg(test)]
mod tests;

/// Relative residual of `left = right` is used once `|right|` exceeds
/// this fraction of the term scale; below it the residual is absolute.
pub const RELATIVE_FLOOR: f64 = 1e-8;

/// A named tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub name: String,
    pub value: f64,
}

impl Tolerance {
    pub fn new(name: &str, value: f64) -> Self {
        Self { name: name.into(), value }
    }

    /// Default tolerance for integral identities on a backend: the torus
    /// rule is spectrally exact on the test data, the Bolza rule is not.
    pub fn identity(backend: BackendKind) -> Self {
        match backend {
            BackendKind::Torus => Self::new("torus-spectral", 1e-9),
            BackendKind::Bolza => Self::new("bolza-quadrature", 1e-5),
        }
    }

    /// Tolerance for inequalities where both sides come from quadrature.
    pub fn inequality(backend: BackendKind) -> Self {
        match backend {
            BackendKind::Torus => Self::new("torus-spectral", 1e-9),
            BackendKind::Bolza => Self::new("bolza-quadrature", 1e-6),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `left = right`.
    Equal,
    /// `left <= right`.
    AtMost,
    /// `left <= right` with both sides natural logarithms.
    LogAtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub backend: BackendKind,
    pub base: usize,
    pub nodes: usize,
}

impl Resolution {
    pub fn of(quad: &Quadrature) -> Self {
        Self { backend: quad.backend(), base: quad.resolution(), nodes: quad.len() }
    }
}

/// Outcome of one identity or inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub relation: Relation,
    pub left: f64,
    pub right: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    /// Magnitude of the terms that were combined; the absolute test is
    /// measured against it.
    pub scale: f64,
    pub tolerance: Tolerance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Resolution>,
    pub pass: bool,
}

impl IdentityReport {
    /// `left = right`; relative when `|right| > RELATIVE_FLOOR · scale`.
    pub fn equality(name: &str, left: f64, right: f64, scale: f64, tolerance: Tolerance) -> Self {
        let abs = (left - right).abs();
        let scale = scale.max(left.abs()).max(right.abs());
        let rel = if right.abs() > RELATIVE_FLOOR * scale { abs / right.abs() } else { abs / scale.max(f64::MIN_POSITIVE) };
        let pass = if right.abs() > RELATIVE_FLOOR * scale { rel <= tolerance.value } else { abs <= tolerance.value * scale };
        Self {
            name: name.into(),
            relation: Relation::Equal,
            left,
            right,
            abs_residual: abs,
            rel_residual: rel,
            scale,
            tolerance,
            resolution: None,
            pass: pass && left.is_finite() && right.is_finite(),
        }
    }

    /// `left <= right` up to `tolerance · scale`. The residual is the
    /// violation, zero when the inequality holds outright.
    pub fn at_most(name: &str, left: f64, right: f64, scale: f64, tolerance: Tolerance) -> Self {
        let scale = scale.max(left.abs()).max(right.abs());
        let abs = (left - right).max(0.0);
        let rel = abs / scale.max(f64::MIN_POSITIVE);
        Self {
            name: name.into(),
            relation: Relation::AtMost,
            left,
            right,
            abs_residual: abs,
            rel_residual: rel,
            scale,
            tolerance: tolerance.clone(),
            resolution: None,
            pass: left.is_finite() && right.is_finite() && abs <= tolerance.value * scale,
        }
    }

    /// `exp(left) <= exp(right) · (1 + tolerance)`; `-inf` stands for zero.
    pub fn log_at_most(name: &str, ln_left: f64, ln_right: f64, tolerance: Tolerance) -> Self {
        let pass = crate::lse::log_le(ln_left, ln_right, tolerance.value);
        let excess = if ln_left == f64::NEG_INFINITY { f64::NEG_INFINITY } else { ln_left - ln_right };
        let rel = if excess > 0.0 { excess.exp_m1() } else { 0.0 };
        Self {
            name: name.into(),
            relation: Relation::LogAtMost,
            left: ln_left,
            right: ln_right,
            abs_residual: excess.max(0.0),
            rel_residual: rel,
            scale: ln_right.abs(),
            tolerance,
            resolution: None,
            pass,
        }
    }

    pub fn with_resolution(mut self, quad: &Quadrature) -> Self {
        self.resolution = Some(Resolution::of(quad));
        self
    }

    /// `exp(left - right)` for log reports, `left / right` otherwise.
    pub fn ratio(&self) -> f64 {
        match self.relation {
            Relation::LogAtMost => {
                if self.left == f64::NEG_INFINITY {
                    0.0
                } else {
                    (self.left - self.right).exp()
                }
            }
            _ => self.left / self.right,
        }
    }
}
