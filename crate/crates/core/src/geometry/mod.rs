//! Surfaces, magnetic intensities and the curvature quantities built from them.
//!
//! Both backends use a single isothermal chart with metric `e^{2λ}|dz|²`:
//! the 2π-periodic square for tori, and the Poincaré disk (with
//! `λ = ln 2 - ln(1 - |z|²)`) for the Bolza surface. Directions are measured
//! by the Euclidean angle `θ` in the chart.

pub mod atoms;
pub mod bolza;
pub mod torus;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
pub use atoms::{BumpAtom, PreparedAtoms};
pub use bolza::{BolzaSurface, Su11};
pub use torus::{ConformalTorusMetric, TrigPoly2};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Torus,
    Bolza,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Torus => "torus",
            BackendKind::Bolza => "bolza",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub x: f64,
    pub y: f64,
}

impl BasePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn z(&self) -> C64 {
        C64::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn base(&self) -> BasePoint {
        BasePoint::new(self.x, self.y)
    }
}

#[derive(Debug, Clone)]
pub enum Surface {
    Torus(ConformalTorusMetric),
    Bolza(Arc<BolzaSurface>),
}

impl Surface {
    pub fn flat_torus() -> Self {
        Surface::Torus(ConformalTorusMetric::flat())
    }

    pub fn bolza() -> Self {
        Surface::Bolza(Arc::new(BolzaSurface::new()))
    }

    pub fn backend(&self) -> BackendKind {
        match self {
            Surface::Torus(_) => BackendKind::Torus,
            Surface::Bolza(_) => BackendKind::Bolza,
        }
    }

    pub fn as_bolza(&self) -> Option<&Arc<BolzaSurface>> {
        match self {
            Surface::Bolza(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_torus(&self) -> Option<&ConformalTorusMetric> {
        match self {
            Surface::Torus(t) => Some(t),
            _ => None,
        }
    }

    pub fn check_point(&self, p: BasePoint) -> Result<()> {
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::Domain(format!("non-finite point ({}, {})", p.x, p.y)));
        }
        if let Surface::Bolza(_) = self {
            if p.x * p.x + p.y * p.y >= 1.0 {
                return Err(Error::Domain(format!("({}, {}) is not in the unit disk", p.x, p.y)));
            }
        }
        Ok(())
    }

    /// Conformal factor `λ` at a point.
    pub fn lambda(&self, p: BasePoint) -> f64 {
        match self {
            Surface::Torus(t) => t.lambda_at(p.x, p.y),
            Surface::Bolza(_) => 2f64.ln() - (1.0 - p.x * p.x - p.y * p.y).ln(),
        }
    }

    /// `(λ_x, λ_y)` at a point.
    pub fn lambda_gradient(&self, p: BasePoint) -> (f64, f64) {
        match self {
            Surface::Torus(t) => {
                let j = t.lambda.jet(p.x, p.y, 1);
                (j.coeff(1, 0).re, j.coeff(0, 1).re)
            }
            Surface::Bolza(_) => {
                let d = 1.0 - p.x * p.x - p.y * p.y;
                (2.0 * p.x / d, 2.0 * p.y / d)
            }
        }
    }

    /// Total area.
    pub fn area(&self) -> f64 {
        match self {
            Surface::Torus(t) => t.area(96),
            Surface::Bolza(b) => b.area(),
        }
    }

    /// Gaussian curvature; exactly `-1` on the Bolza surface.
    pub fn gaussian_curvature(&self, p: BasePoint) -> Result<f64> {
        self.check_point(p)?;
        Ok(match self {
            Surface::Torus(t) => t.gaussian_curvature(p.x, p.y),
            Surface::Bolza(_) => -1.0,
        })
    }
}

/// The magnetic intensity `κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField {
    Constant { value: f64 },
    Trig { poly: TrigPoly2 },
    Bumps { offset: f64, atoms: Vec<BumpAtom> },
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        ScalarField::Constant { value }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            ScalarField::Constant { value } => Some(*value),
            ScalarField::Trig { poly } if poly.terms().all(|((m, n), _)| m == 0 && n == 0) => {
                Some(poly.coeff(0, 0).re)
            }
            ScalarField::Bumps { offset, atoms } if atoms.is_empty() => Some(*offset),
            _ => None,
        }
    }

    fn validate(&self, backend: BackendKind) -> Result<()> {
        match self {
            ScalarField::Constant { value } if !value.is_finite() => {
                Err(Error::InvalidParameter("magnetic intensity must be finite".into()))
            }
            ScalarField::Trig { poly } => {
                if backend != BackendKind::Torus {
                    return Err(Error::BackendMismatch { expected: "torus".into(), found: backend.to_string() });
                }
                if !poly.is_real(1e-14) {
                    return Err(Error::InvalidParameter("magnetic intensity must be real-valued".into()));
                }
                Ok(())
            }
            ScalarField::Bumps { atoms, .. } => {
                if backend != BackendKind::Bolza {
                    return Err(Error::BackendMismatch { expected: "bolza".into(), found: backend.to_string() });
                }
                if atoms.iter().any(|a| a.mode != 0 || a.weight.im != 0.0) {
                    return Err(Error::InvalidParameter(
                        "magnetic intensity atoms must be real and rotation invariant (mode 0)".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `self + s · other`.
    pub fn affine(&self, s: f64, other: &ScalarField) -> Result<ScalarField> {
        use ScalarField::*;
        Ok(match (self, other) {
            (Constant { value: a }, Constant { value: b }) => Constant { value: a + s * b },
            (Trig { poly }, Constant { value }) => Trig { poly: poly.plus(&TrigPoly2::constant(s * value)) },
            (Constant { value }, Trig { poly }) => Trig { poly: TrigPoly2::constant(*value).plus(&poly.scaled(C64::new(s, 0.0))) },
            (Trig { poly: a }, Trig { poly: b }) => Trig { poly: a.plus(&b.scaled(C64::new(s, 0.0))) },
            (Bumps { offset, atoms }, Constant { value }) => Bumps { offset: offset + s * value, atoms: atoms.clone() },
            (Constant { value }, Bumps { offset, atoms }) => Bumps {
                offset: value + s * offset,
                atoms: atoms.iter().map(|a| BumpAtom { weight: a.weight * s, ..a.clone() }).collect(),
            },
            (Bumps { offset: o1, atoms: a1 }, Bumps { offset: o2, atoms: a2 }) => Bumps {
                offset: o1 + s * o2,
                atoms: a1
                    .iter()
                    .cloned()
                    .chain(a2.iter().map(|a| BumpAtom { weight: a.weight * s, ..a.clone() }))
                    .collect(),
            },
            _ => {
                return Err(Error::BackendMismatch {
                    expected: "intensities on the same backend".into(),
                    found: "mixed torus and bolza representations".into(),
                })
            }
        })
    }
}

/// Chart data needed by the frame operators at a base point.
#[derive(Debug, Clone, Copy)]
pub struct PointCtx {
    /// `e^{-λ}`
    pub em: Jet<C64>,
    /// `∂_z λ`
    pub lz: Jet<C64>,
    /// `∂_z̄ λ`
    pub lzb: Jet<C64>,
    pub kappa: Jet<C64>,
    pub gauss: Jet<C64>,
}

/// A surface with a magnetic intensity.
#[derive(Debug, Clone)]
pub struct MagneticSystem {
    surface: Surface,
    kappa: ScalarField,
    prepared: Option<Arc<PreparedAtoms>>,
}

impl MagneticSystem {
    pub fn new(surface: Surface, kappa: ScalarField) -> Result<Self> {
        kappa.validate(surface.backend())?;
        let prepared = match (&surface, &kappa) {
            (Surface::Bolza(b), ScalarField::Bumps { atoms, .. }) => {
                Some(Arc::new(PreparedAtoms::new(b, atoms.clone())?))
            }
            _ => None,
        };
        Ok(Self { surface, kappa, prepared })
    }

    pub fn flat_torus(kappa: f64) -> Self {
        Self::new(Surface::flat_torus(), ScalarField::constant(kappa)).expect("constant intensity")
    }

    pub fn bolza(kappa: f64) -> Self {
        Self::new(Surface::bolza(), ScalarField::constant(kappa)).expect("constant intensity")
    }

    /// Same surface, different intensity.
    pub fn with_kappa(&self, kappa: ScalarField) -> Result<Self> {
        Self::new(self.surface.clone(), kappa)
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn kappa(&self) -> &ScalarField {
        &self.kappa
    }

    pub fn backend(&self) -> BackendKind {
        self.surface.backend()
    }

    pub fn kappa_at(&self, p: BasePoint) -> f64 {
        match &self.kappa {
            ScalarField::Constant { value } => *value,
            ScalarField::Trig { poly } => poly.eval(p.x, p.y).re,
            ScalarField::Bumps { offset, .. } => {
                let b = self.surface.as_bolza().expect("validated backend");
                let m = self.prepared.as_ref().expect("prepared atoms").mode_values(b, p.z());
                offset + m.get(&0).map(|v| v.re).unwrap_or(0.0)
            }
        }
    }

    /// `(κ, κ_x, κ_y)` at a point.
    pub fn kappa_gradient(&self, p: BasePoint) -> (f64, f64, f64) {
        match &self.kappa {
            ScalarField::Constant { value } => (*value, 0.0, 0.0),
            _ => {
                let j = self.kappa_jet(p, 1);
                (j.value().re, j.coeff(1, 0).re, j.coeff(0, 1).re)
            }
        }
    }

    fn kappa_jet(&self, p: BasePoint, order: usize) -> Jet<C64> {
        match &self.kappa {
            ScalarField::Constant { value } => Jet::constant(C64::new(*value, 0.0), order),
            ScalarField::Trig { poly } => poly.jet(p.x, p.y, order),
            ScalarField::Bumps { offset, .. } => {
                let b = self.surface.as_bolza().expect("validated backend");
                let m = self.prepared.as_ref().expect("prepared atoms").mode_jets(b, p.z(), order);
                let base = Jet::constant(C64::new(*offset, 0.0), order);
                match m.get(&0) {
                    Some(j) => base + *j,
                    None => base,
                }
            }
        }
    }

    /// Jets of the chart data; `em`, `lz`, `lzb`, `kappa` carry order
    /// `order + 1` so that one derivative still leaves `order`.
    pub fn point_ctx(&self, p: BasePoint, order: usize) -> Result<PointCtx> {
        self.surface.check_point(p)?;
        let o1 = order + 1;
        let i = C64::new(0.0, 1.0);
        let half = C64::new(0.5, 0.0);
        let (em, lz, gauss) = match &self.surface {
            Surface::Torus(t) => {
                let l = t.lambda.jet(p.x, p.y, order + 2);
                let em = (-l).exp().truncate(o1);
                let lz = (l.dx() - l.dy() * i) * half;
                let lap = l.dx().dx() + l.dy().dy();
                let gauss = -(em * em).truncate(order) * lap;
                (em, lz, gauss)
            }
            Surface::Bolza(_) => {
                let x = Jet::var_x(C64::new(p.x, 0.0), o1);
                let y = Jet::var_y(C64::new(p.y, 0.0), o1);
                let one_m = Jet::constant(C64::new(1.0, 0.0), o1) - (x * x + y * y);
                let em = one_m * half;
                let lz = (x - y * i) * one_m.recip();
                (em, lz, Jet::constant(C64::new(-1.0, 0.0), order))
            }
        };
        Ok(PointCtx { em, lz, lzb: lz.conj(), kappa: self.kappa_jet(p, o1), gauss })
    }

    pub fn gaussian_curvature(&self, p: BasePoint) -> Result<f64> {
        self.surface.gaussian_curvature(p)
    }

    /// Coefficients `(A, B, C)` with `𝕂 = A + B sin θ + C cos θ`.
    pub fn magnetic_curvature_coefficients(&self, p: BasePoint) -> Result<(f64, f64, f64)> {
        let k = self.gaussian_curvature(p)?;
        let (kap, kx, ky) = self.kappa_gradient(p);
        let em = (-self.surface.lambda(p)).exp();
        Ok((k + kap * kap, em * kx, -em * ky))
    }

    /// `𝕂 = K - X⊥κ + κ²` at a phase point.
    pub fn magnetic_curvature(&self, q: PhasePoint) -> Result<f64> {
        let (a, b, c) = self.magnetic_curvature_coefficients(q.base())?;
        Ok(a + b * q.theta.sin() + c * q.theta.cos())
    }

    /// Base quadrature `(point, weight)` with the area density folded in.
    /// `resolution` is the grid size per direction on the torus and the
    /// triangle subdivision on the octagon.
    pub fn quadrature(&self, resolution: usize) -> Vec<(BasePoint, f64)> {
        match &self.surface {
            Surface::Torus(t) => {
                let n = resolution.max(2);
                let h = 2.0 * std::f64::consts::PI / n as f64;
                let mut out = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let (x, y) = (i as f64 * h, j as f64 * h);
                        out.push((BasePoint::new(x, y), h * h * (2.0 * t.lambda_at(x, y)).exp()));
                    }
                }
                out
            }
            Surface::Bolza(b) => b
                .quadrature(resolution.max(1))
                .into_iter()
                .map(|(z, w)| (BasePoint::new(z.re, z.im), w))
                .collect(),
        }
    }

    /// Sampled bounds `-2b <= 𝕂 <= -2a` over the unit tangent bundle. The
    /// extremes over directions are exact; the spatial sampling error is
    /// covered by a Lipschitz margin of twice the grid spacing. A sample
    /// where `𝕂 >= 0` (after the margin) yields a refusal.
    pub fn negativity_bounds(&self, resolution: usize) -> Result<Negativity> {
        let nodes = self.quadrature(resolution);
        let spacing = match &self.surface {
            Surface::Torus(_) => std::f64::consts::PI * 2f64.sqrt() / resolution.max(2) as f64,
            Surface::Bolza(b) => b.circumradius().tanh() / resolution.max(1) as f64,
        };
        let constant = self.kappa.constant_value().is_some()
            && self.surface.as_torus().map(|t| t.is_flat()).unwrap_or(true);
        let mut max_k = f64::NEG_INFINITY;
        let mut argmax = PhasePoint::new(0.0, 0.0, 0.0);
        let mut min_k = f64::INFINITY;
        let mut lip = 0.0f64;
        for (p, _) in &nodes {
            let (a, b, c) = self.magnetic_curvature_coefficients(*p)?;
            let r = (b * b + c * c).sqrt();
            if a + r > max_k {
                max_k = a + r;
                argmax = PhasePoint::new(p.x, p.y, b.atan2(c).rem_euclid(std::f64::consts::TAU));
            }
            min_k = min_k.min(a - r);
            if !constant {
                lip = lip.max(self.coefficient_gradient(*p)?);
            }
        }
        let margin = 2.0 * lip * spacing;
        if max_k + margin >= 0.0 {
            return Ok(Negativity::Refused { point: argmax, value: max_k, margin });
        }
        Ok(Negativity::Bounds(NegativityBounds {
            a: -(max_k + margin) / 2.0,
            b: -(min_k - margin) / 2.0,
            max_curvature: max_k,
            min_curvature: min_k,
            margin,
        }))
    }

    fn coefficient_gradient(&self, p: BasePoint) -> Result<f64> {
        // |∇A| + |∇B| + |∇C| by jets
        let ctx = self.point_ctx(p, 1)?;
        let kap = ctx.kappa;
        let a = ctx.gauss + (kap * kap).truncate(1);
        let b = ctx.em * kap.dx();
        let c = -(ctx.em * kap.dy());
        let g = |j: Jet<C64>| (j.coeff(1, 0).re.powi(2) + j.coeff(0, 1).re.powi(2)).sqrt();
        Ok(g(a) + g(b) + g(c))
    }
}

/// Outcome of [`MagneticSystem::negativity_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Negativity {
    Bounds(NegativityBounds),
    /// A phase point where the sampled magnetic curvature is not negative.
    Refused { point: PhasePoint, value: f64, margin: f64 },
}

impl Negativity {
    pub fn bounds(&self) -> Result<NegativityBounds> {
        match self {
            Negativity::Bounds(b) => Ok(*b),
            Negativity::Refused { point, value, .. } => Err(Error::NotNegative(format!(
                "magnetic curvature {value:.6e} at (x, y, θ) = ({:.6}, {:.6}, {:.6})",
                point.x, point.y, point.theta
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityBounds {
    pub a: f64,
    pub b: f64,
    pub max_curvature: f64,
    pub min_curvature: f64,
    pub margin: f64,
}
