use serde::{Deserialize, Serialize};

use super::family::{BetaTensor, DeformationFamily};
use crate::error::{Error, Result};
use crate::geometry::MagneticSystem;
use crate::identity::{dense_samples, IdentityReport, Tolerance};
use crate::orbit::{
    find_periodic_orbit, monodromy, orbit_integral, refine_periodic_orbit, trajectory, ClassLabel, Monodromy,
    PeriodicOrbit, ShootingOptions,
};
use crate::phase::{PhaseFunction, Quadrature};
use crate::spectral::denoised_derivative;

/// Length variation below which a family counts as isospectral on a class.
pub const ISOSPECTRAL_TOL: f64 = 1e-8;
/// `|∫_γ β| ≤ LIVSIC_TOL · ℓ(0)` for isospectral families.
pub const LIVSIC_TOL: f64 = 1e-8;
/// Default bound on the Jacobi residuals at `h_s = 1e-3`.
pub const JACOBI_TOL: f64 = 1e-4;

/// Closed orbits of one class along an `s` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthFunction {
    pub class_key: String,
    pub s: Vec<f64>,
    pub lengths: Vec<f64>,
    pub closure_defects: Vec<f64>,
}

impl LengthFunction {
    /// `max_s |ℓ(s) − ℓ(0)| / ℓ(0)`, with `ℓ(0)` the value nearest `s = 0`.
    pub fn max_relative_variation(&self) -> f64 {
        let i0 = (0..self.s.len()).min_by(|&a, &b| self.s[a].abs().total_cmp(&self.s[b].abs()));
        let Some(i0) = i0 else { return 0.0 };
        let l0 = self.lengths[i0];
        self.lengths.iter().map(|l| (l - l0).abs() / l0).fold(0.0, f64::max)
    }
}

/// Newton from `prev` at `s`; halves the step towards `s` on failure.
fn continue_to(
    family: &DeformationFamily,
    class: &ClassLabel,
    prev: (f64, &PeriodicOrbit),
    s: f64,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    let (mut s_at, mut orbit) = (prev.0, prev.1.clone());
    let mut h = s - s_at;
    let mut halvings = 0;
    while s_at != s {
        let target = if (s - s_at).abs() <= h.abs() { s } else { s_at + h };
        let sys = family.at(target)?;
        match refine_periodic_orbit(&sys, class, orbit.start, orbit.period, opts) {
            Ok(o) => {
                orbit = o;
                s_at = target;
            }
            Err(e) => {
                halvings += 1;
                if halvings > 6 {
                    return Err(Error::ContinuationLost { s: target, reason: e.to_string() });
                }
                h /= 2.0;
            }
        }
    }
    Ok(orbit)
}

/// Orbits continued from `s = 0` outwards over `s_grid`, returned in grid
/// order.
pub fn continue_orbit(
    family: &DeformationFamily,
    class: &ClassLabel,
    s_grid: &[f64],
    opts: &ShootingOptions,
) -> Result<Vec<PeriodicOrbit>> {
    let base = find_periodic_orbit(family.base(), class)?;
    let mut out: Vec<Option<PeriodicOrbit>> = vec![None; s_grid.len()];
    for sign in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..s_grid.len()).filter(|&i| s_grid[i] * sign >= 0.0).collect();
        idx.sort_by(|&a, &b| s_grid[a].abs().total_cmp(&s_grid[b].abs()));
        let mut prev = (0.0, base.clone());
        for i in idx {
            if out[i].is_some() {
                continue;
            }
            let o = continue_to(family, class, (prev.0, &prev.1), s_grid[i], opts)?;
            prev = (s_grid[i], o.clone());
            out[i] = Some(o);
        }
    }
    Ok(out.into_iter().map(|o| o.expect("every grid point visited")).collect())
}

/// `ℓ(s)` on `s_grid` by warm-started continuation.
pub fn length_function(family: &DeformationFamily, class: &ClassLabel, s_grid: &[f64]) -> Result<LengthFunction> {
    let orbits = continue_orbit(family, class, s_grid, &ShootingOptions::default())?;
    Ok(LengthFunction {
        class_key: class.key(),
        s: s_grid.to_vec(),
        lengths: orbits.iter().map(|o| o.period).collect(),
        closure_defects: orbits.iter().map(|o| o.closure_defect).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LivsicReport {
    pub class_key: String,
    pub integral: f64,
    pub length: f64,
    /// Length variation over the supplied grid, when one was given.
    pub length_variation: Option<f64>,
    /// Vanishing is asserted only for families isospectral on the class.
    pub asserted: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// `∫_γ β` along the `s = 0` orbit. With `lengths` showing isospectrality
/// the integral must vanish; otherwise it is reported as is.
pub fn livsic_integral_check(
    family: &DeformationFamily,
    beta: &BetaTensor,
    orbit: &PeriodicOrbit,
    lengths: Option<&LengthFunction>,
) -> Result<LivsicReport> {
    let integral = if beta.function.is_structurally_zero() {
        0.0
    } else {
        orbit_integral(family.base(), &beta.function, orbit.start, orbit.period)?
    };
    let variation = lengths.map(|l| l.max_relative_variation());
    let asserted = variation.is_some_and(|v| v <= ISOSPECTRAL_TOL);
    let pass = !asserted || integral.abs() <= LIVSIC_TOL * orbit.period;
    Ok(LivsicReport {
        class_key: orbit.class_label.key(),
        integral,
        length: orbit.period,
        length_variation: variation,
        asserted,
        tolerance: LIVSIC_TOL,
        pass,
    })
}

/// `S = x γ̇ + y iγ̇` along a closed orbit, with the data entering the
/// Jacobi system sampled on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalField {
    pub class_key: String,
    pub h_s: f64,
    pub period: f64,
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `(d/ds) κ_s` at `s = 0` along the orbit.
    pub f0: Vec<f64>,
    pub kappa: Vec<f64>,
    pub curvature: Vec<f64>,
    /// `ℓ'(0)/ℓ(0)`. Continuations are compared at equal fractions of their
    /// periods, which adds this constant to `ẋ − κ y`.
    pub length_rate: f64,
}

impl VariationalField {
    /// The zero field on `orbit` (`f₀ = 0`).
    pub fn zero(sys: &MagneticSystem, orbit: &PeriodicOrbit) -> Result<Self> {
        let n = dense_samples(orbit.period);
        let times: Vec<f64> = (0..n).map(|k| orbit.period * k as f64 / n as f64).collect();
        let pts = trajectory(sys, orbit.start, &times)?;
        Ok(Self {
            class_key: orbit.class_label.key(),
            h_s: 0.0,
            period: orbit.period,
            x: vec![0.0; n],
            y: vec![0.0; n],
            f0: vec![0.0; n],
            kappa: pts.iter().map(|p| sys.kappa_at(p.base())).collect(),
            curvature: pts.iter().map(|p| sys.magnetic_curvature(*p)).collect::<Result<_>>()?,
            times,
            length_rate: 0.0,
        })
    }
}

/// Central difference of the orbits continued to `±h_s` for a family with
/// fixed metric. The phase condition of the shooting solver pins each
/// continuation to the section through `orbit.start` orthogonal to the flow.
pub fn variational_field(family: &DeformationFamily, orbit: &PeriodicOrbit, h_s: f64) -> Result<VariationalField> {
    if !family.fixed_metric() {
        return Err(Error::Precondition("variational fields need a family with fixed metric".into()));
    }
    let sys = family.base();
    let class = &orbit.class_label;
    let opts = ShootingOptions::default();
    let plus = continue_to(family, class, (0.0, orbit), h_s, &opts)?;
    let minus = continue_to(family, class, (0.0, orbit), -h_s, &opts)?;
    let n = dense_samples(orbit.period);
    let frac: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
    let along = |o: &PeriodicOrbit, sys: &MagneticSystem| {
        let ts: Vec<f64> = frac.iter().map(|f| f * o.period).collect();
        trajectory(sys, o.start, &ts)
    };
    let p0 = along(orbit, sys)?;
    let pp = along(&plus, &family.at(h_s)?)?;
    let pm = along(&minus, &family.at(-h_s)?)?;
    let dk = sys.with_kappa(family.kappa_derivative()?)?;
    let (mut x, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let dx = (pp[i].x - pm[i].x) / (2.0 * h_s);
        let dy = (pp[i].y - pm[i].y) / (2.0 * h_s);
        let el = sys.surface().lambda(p0[i].base()).exp();
        let (sn, cs) = p0[i].theta.sin_cos();
        x.push(el * (dx * cs + dy * sn));
        y.push(el * (dy * cs - dx * sn));
    }
    Ok(VariationalField {
        class_key: class.key(),
        h_s,
        period: orbit.period,
        times: frac.iter().map(|f| f * orbit.period).collect(),
        x,
        y,
        f0: p0.iter().map(|p| dk.kappa_at(p.base())).collect(),
        kappa: p0.iter().map(|p| sys.kappa_at(p.base())).collect(),
        curvature: p0.iter().map(|p| sys.magnetic_curvature(*p)).collect::<Result<_>>()?,
        length_rate: (plus.period - minus.period) / (2.0 * h_s * orbit.period),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiReport {
    pub class_key: String,
    pub h_s: f64,
    /// `max |ÿ + 𝕂 y − f₀|`.
    pub normal_residual: f64,
    /// `max |ẋ − κ y − ℓ'/ℓ|`.
    pub tangential_residual: f64,
    /// `max(|y|, |f₀|, 1)`.
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Residuals of `ÿ + 𝕂 y = f₀` and `ẋ = κ y` by spectral differentiation,
/// truncated at the noise plateau of the difference quotients.
pub fn jacobi_residual(field: &VariationalField, tolerance: f64) -> JacobiReport {
    let ydd = denoised_derivative(&field.y, field.period, 2);
    let xd = denoised_derivative(&field.x, field.period, 1);
    let n = field.y.len();
    let normal = (0..n)
        .map(|i| (ydd[i] + field.curvature[i] * field.y[i] - field.f0[i]).abs())
        .fold(0.0, f64::max);
    let tangential =
        (0..n).map(|i| (xd[i] - field.kappa[i] * field.y[i] - field.length_rate).abs()).fold(0.0, f64::max);
    let scale = field.y.iter().chain(&field.f0).fold(1.0f64, |a, v| a.max(v.abs()));
    JacobiReport {
        class_key: field.class_key.clone(),
        h_s: field.h_s,
        normal_residual: normal,
        tangential_residual: tangential,
        scale,
        tolerance,
        pass: normal <= tolerance * scale && tangential <= tolerance * scale,
    }
}

/// `(F + A)u = v` with `u = (y, w)`, `v = (0, f₀)`, `A = [[0, −1], [𝕂, 0]]`:
/// reports `‖Fy − w‖²` and `‖Fw + 𝕂y − f₀‖²` against zero.
pub fn first_order_system_residual(
    sys: &MagneticSystem,
    quad: &Quadrature,
    y: &PhaseFunction,
    w: &PhaseFunction,
    f0: &PhaseFunction,
) -> Result<Vec<IdentityReport>> {
    let first = y.f().sub(w);
    let second = w.f().add(&PhaseFunction::magnetic_curvature().mul(y)).sub(f0);
    let s = quad.sample(sys, &[&first, &second, y, w, f0])?;
    let scale = quad.norm_sq(&s[2]) + quad.norm_sq(&s[3]) + quad.norm_sq(&s[4]);
    let tol = Tolerance::identity(sys.backend());
    Ok(vec![
        IdentityReport::equality("first_order_row_1", quad.norm_sq(&s[0]), 0.0, scale, tol.clone())
            .with_resolution(quad),
        IdentityReport::equality("first_order_row_2", quad.norm_sq(&s[1]), 0.0, scale, tol).with_resolution(quad),
    ])
}

/// Periodic solutions of the homogeneous Jacobi system along an orbit are
/// zero iff 1 is not an eigenvalue of the monodromy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub class_key: String,
    pub monodromy: Monodromy,
    /// Smallest singular value of `M − I`.
    pub min_singular_value: f64,
    pub pass: bool,
}

pub fn periodic_nondegeneracy(sys: &MagneticSystem, orbit: &PeriodicOrbit) -> Result<Nondegeneracy> {
    let m = monodromy(sys, orbit)?;
    let a = nalgebra::Matrix2::new(
        m.matrix[0][0] - 1.0,
        m.matrix[0][1],
        m.matrix[1][0],
        m.matrix[1][1] - 1.0,
    );
    let sv = a.singular_values();
    let smin = sv.min();
    Ok(Nondegeneracy { class_key: orbit.class_label.key(), monodromy: m, min_singular_value: smin, pass: smin > 1e-6 })
}
