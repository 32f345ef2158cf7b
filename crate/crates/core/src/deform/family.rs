use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::ModeSpectrum;
use crate::geometry::{ConformalTorusMetric, MagneticSystem, PhasePoint, ScalarField, Surface, TrigPoly2};
use crate::phase::{PhaseFunction, Quadrature};

/// Mode leakage of `β` outside `{−2, 0, 2}` tolerated before the
/// representation is rejected.
pub const BETA_LEAKAGE_TOL: f64 = 1e-8;

/// How the pair `(g_s, κ_s)` depends on `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `(g_s, κ_s) = (g₀, κ₀)`.
    Constant,
    /// `g_s = e^{2sφ} g₀` on a torus chart, `κ_s = κ₀`.
    Conformal { phi: TrigPoly2 },
    /// `g_s = g₀`, `κ_s = κ₀ + s·direction`.
    KappaLinear { direction: ScalarField },
    /// Pullback of a torus system by the translation `p ↦ p + s·(vx, vy)`.
    TorusTranslation { vx: f64, vy: f64 },
}

#[derive(Debug, Clone)]
pub struct DeformationFamily {
    base: MagneticSystem,
    kind: FamilyKind,
    epsilon: f64,
    h_s: f64,
}

impl DeformationFamily {
    pub fn new(base: MagneticSystem, kind: FamilyKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter("family half-width ε must be positive".into()));
        }
        let torus_only = matches!(kind, FamilyKind::Conformal { .. } | FamilyKind::TorusTranslation { .. });
        if torus_only && base.surface().as_torus().is_none() {
            return Err(Error::BackendMismatch { expected: "torus".into(), found: base.backend().to_string() });
        }
        let fam = Self { base, kind, epsilon, h_s: 1e-3 };
        fam.at(0.0)?;
        Ok(fam)
    }

    pub fn with_step(mut self, h_s: f64) -> Result<Self> {
        if !(h_s > 0.0 && h_s < self.epsilon) {
            return Err(Error::InvalidParameter("finite-difference step must lie in (0, ε)".into()));
        }
        self.h_s = h_s;
        Ok(self)
    }

    pub fn base(&self) -> &MagneticSystem {
        &self.base
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn h_s(&self) -> f64 {
        self.h_s
    }

    /// Every family here is given in closed form.
    pub fn is_analytic(&self) -> bool {
        true
    }

    /// True when `g_s = g₀` for all `s`.
    pub fn fixed_metric(&self) -> bool {
        matches!(self.kind, FamilyKind::Constant | FamilyKind::KappaLinear { .. })
    }

    /// `(g_s, κ_s)`.
    pub fn at(&self, s: f64) -> Result<MagneticSystem> {
        if !(s.abs() < self.epsilon) {
            return Err(Error::InvalidParameter(format!("s = {s} outside (−{0}, {0})", self.epsilon)));
        }
        match &self.kind {
            FamilyKind::Constant => Ok(self.base.clone()),
            FamilyKind::KappaLinear { direction } => self.base.with_kappa(self.base.kappa().affine(s, direction)?),
            FamilyKind::Conformal { phi } => {
                let metric = self.base.surface().as_torus().expect("checked at construction");
                let lambda = metric.lambda.plus(&phi.scaled(s.into()));
                MagneticSystem::new(Surface::Torus(ConformalTorusMetric::new(lambda)?), self.base.kappa().clone())
            }
            FamilyKind::TorusTranslation { vx, vy } => {
                let metric = self.base.surface().as_torus().expect("checked at construction");
                let lambda = metric.lambda.shifted(s * vx, s * vy);
                let kappa = match self.base.kappa() {
                    ScalarField::Trig { poly } => ScalarField::Trig { poly: poly.shifted(s * vx, s * vy) },
                    other => other.clone(),
                };
                MagneticSystem::new(Surface::Torus(ConformalTorusMetric::new(lambda)?), kappa)
            }
        }
    }

    /// `(d/ds) κ_s` at `s = 0` as a field on the base.
    pub fn kappa_derivative(&self) -> Result<ScalarField> {
        match &self.kind {
            FamilyKind::Constant | FamilyKind::Conformal { .. } => Ok(ScalarField::constant(0.0)),
            FamilyKind::KappaLinear { direction } => Ok(direction.clone()),
            FamilyKind::TorusTranslation { vx, vy } => match self.base.kappa() {
                ScalarField::Trig { poly } => Ok(ScalarField::Trig {
                    poly: poly.d_dx().scaled((*vx).into()).plus(&poly.d_dy().scaled((*vy).into())),
                }),
                _ => Ok(ScalarField::constant(0.0)),
            },
        }
    }
}

/// `β = (d/ds) g_s(v, v)` at `s = 0` on the unit bundle of `g₀`.
#[derive(Debug, Clone)]
pub struct BetaTensor {
    pub function: PhaseFunction,
    pub spectrum: ModeSpectrum,
    /// Norm outside `{−2, 0, 2}` relative to the total.
    pub leakage: f64,
}

fn torus_beta(poly: TrigPoly2) -> PhaseFunction {
    if poly.is_zero() {
        PhaseFunction::zero()
    } else {
        PhaseFunction::torus_mode(0, poly)
    }
}

/// Closed-form `β`, checked for mode support.
pub fn beta(family: &DeformationFamily, quad: &Quadrature) -> Result<BetaTensor> {
    let function = match &family.kind {
        FamilyKind::Constant | FamilyKind::KappaLinear { .. } => PhaseFunction::zero(),
        FamilyKind::Conformal { phi } => torus_beta(phi.scaled(2.0.into())),
        FamilyKind::TorusTranslation { vx, vy } => {
            let lam = &family.base.surface().as_torus().expect("torus family").lambda;
            torus_beta(lam.d_dx().scaled((2.0 * vx).into()).plus(&lam.d_dy().scaled((2.0 * vy).into())))
        }
    };
    let spectrum = ModeSpectrum::measure(&family.base, quad, &function)?;
    let total = spectrum.total_sq().sqrt();
    let leakage = if total > 0.0 { spectrum.mass_outside(&[-2, 0, 2]) / total } else { 0.0 };
    if leakage > BETA_LEAKAGE_TOL {
        return Err(Error::Representation(format!("β has {leakage:.3e} of its norm outside modes {{−2, 0, 2}}")));
    }
    Ok(BetaTensor { function, spectrum, leakage })
}

/// Largest gap between the closed-form `β` and a central difference of
/// `g_s(v, v)` over the given unit vectors of `g₀`.
pub fn beta_difference_check(family: &DeformationFamily, beta: &BetaTensor, points: &[PhasePoint]) -> Result<f64> {
    let h = family.h_s;
    let (gp, gm) = (family.at(h)?, family.at(-h)?);
    let lam0 = |p: PhasePoint| family.base.surface().lambda(p.base());
    let mut worst = 0.0f64;
    for &p in points {
        // v has g₀-length one, so g_s(v, v) = e^{2(λ_s − λ₀)}
        let l0 = lam0(p);
        let up = (2.0 * (gp.surface().lambda(p.base()) - l0)).exp();
        let dn = (2.0 * (gm.surface().lambda(p.base()) - l0)).exp();
        let fd = (up - dn) / (2.0 * h);
        let exact = crate::phase::evaluate(&family.base, &beta.function, p)?.re;
        worst = worst.max((fd - exact).abs());
    }
    Ok(worst)
}
