use super::{IdentityReport, Tolerance};
use crate::error::Result;
use crate::geometry::{BackendKind, MagneticSystem};
use crate::phase::{PhaseFunction, Quadrature};

pub const STRUCTURAL_NAMES: [&str; 3] = ["[V,F]=X⊥", "[V,X⊥]=-F+κV", "[F,X⊥]=-κF+𝕂V"];

/// `‖r‖` for the three frame relations applied to `u`, against zero,
/// relative to `‖u‖ + ‖Fu‖ + ‖F²u‖ + ‖X⊥u‖`.
pub fn structural_residuals(sys: &MagneticSystem, quad: &Quadrature, u: &PhaseFunction) -> Result<Vec<IdentityReport>> {
    // shared first derivatives so the evaluator memoizes them once per node
    let fu = u.f();
    let vu = u.v();
    let xp = u.xperp();
    let r1 = fu.v().sub(&vu.f()).sub(&xp);
    let r2 = xp.v().sub(&vu.xperp()).add(&fu).sub(&PhaseFunction::kappa().mul(&vu));
    let r3 = xp
        .f()
        .sub(&fu.xperp())
        .add(&PhaseFunction::kappa().mul(&fu))
        .sub(&PhaseFunction::magnetic_curvature().mul(&vu));
    let ffu = fu.f();
    let s = quad.sample(sys, &[&r1, &r2, &r3, u, &fu, &ffu, &xp])?;
    let scale: f64 = s[3..].iter().map(|x| quad.norm_sq(x).sqrt()).sum();
    let tol = match sys.backend() {
        BackendKind::Torus => Tolerance::new("torus-exact", 1e-10),
        BackendKind::Bolza => Tolerance::new("bolza-quadrature", 1e-6),
    };
    Ok(STRUCTURAL_NAMES
        .iter()
        .zip(&s[..3])
        .map(|(name, r)| {
            IdentityReport::equality(name, quad.norm_sq(r).sqrt(), 0.0, scale, tol.clone()).with_resolution(quad)
        })
        .collect())
}
