use serde::{Deserialize, Serialize};

use super::carleman::ModeData;
use super::{IdentityReport, Tolerance};
use crate::error::{Error, Result};
use crate::geometry::{MagneticSystem, Negativity};
use crate::phase::{PhaseFunction, Quadrature};

/// `‖FVu‖² − (𝕂Vu, Vu) + ‖Fu‖² = ‖VFu‖²`.
pub fn pestov_residual(sys: &MagneticSystem, quad: &Quadrature, u: &PhaseFunction) -> Result<IdentityReport> {
    let vu = u.v();
    let fu = u.f();
    let fvu = vu.f();
    let kvu = PhaseFunction::magnetic_curvature().mul(&vu);
    let vfu = fu.v();
    let s = quad.sample(sys, &[&fvu, &vu, &kvu, &fu, &vfu])?;
    let a = quad.norm_sq(&s[0]);
    let b = quad.inner(&s[2], &s[1]).re;
    let c = quad.norm_sq(&s[3]);
    let right = quad.norm_sq(&s[4]);
    let scale = a + b.abs() + c + right;
    Ok(IdentityReport::equality("pestov", a - b + c, right, scale, Tolerance::identity(sys.backend())).with_resolution(quad))
}

/// `2 Re(X⊥u, VFu) = ‖Fu‖² + ‖X⊥u‖² − (𝕂Vu, Vu)`.
pub fn pestov_corollary_residual(sys: &MagneticSystem, quad: &Quadrature, u: &PhaseFunction) -> Result<IdentityReport> {
    let vu = u.v();
    let fu = u.f();
    let xpu = u.xperp();
    let kvu = PhaseFunction::magnetic_curvature().mul(&vu);
    let vfu = fu.v();
    let s = quad.sample(sys, &[&xpu, &vfu, &fu, &kvu, &vu])?;
    let left = 2.0 * quad.inner(&s[0], &s[1]).re;
    let f2 = quad.norm_sq(&s[2]);
    let x2 = quad.norm_sq(&s[0]);
    let k = quad.inner(&s[3], &s[4]).re;
    let scale = left.abs() + f2 + x2 + k.abs();
    Ok(IdentityReport::equality("pestov_corollary", left, f2 + x2 - k, scale, Tolerance::identity(sys.backend()))
        .with_resolution(quad))
}

/// `‖Fu‖² − (𝕂u, u) = ‖Fu − ru‖²` for a solution `r` of `Fr + r² + 𝕂 = 0`.
/// Returns the identity and the nonnegativity of its left side.
pub fn riccati_norm_identity(
    sys: &MagneticSystem,
    quad: &Quadrature,
    u: &PhaseFunction,
    r: &PhaseFunction,
) -> Result<Vec<IdentityReport>> {
    let kk = PhaseFunction::magnetic_curvature();
    let ric = r.f().add(&r.mul(r)).add(&kk);
    let fu = u.f();
    let ku = kk.mul(u);
    let d = fu.sub(&r.mul(u));
    let s = quad.sample(sys, &[&ric, &kk, &fu, &ku, u, &d])?;
    let curv_scale = (0..s[1].len())
        .map(|i| s[1].at(i).iter().map(|(_, v)| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let ric_res = (0..s[0].len())
        .map(|i| s[0].at(i).iter().map(|(_, v)| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    if ric_res > 1e-8 * (1.0 + curv_scale) {
        return Err(Error::Precondition(format!(
            "r does not solve the Riccati equation: residual {ric_res:.3e}"
        )));
    }
    let f2 = quad.norm_sq(&s[2]);
    let kuu = quad.inner(&s[3], &s[4]).re;
    let right = quad.norm_sq(&s[5]);
    let left = f2 - kuu;
    let tol = Tolerance::identity(sys.backend());
    let scale = f2 + kuu.abs() + right;
    Ok(vec![
        IdentityReport::equality("riccati_norm", left, right, scale, tol.clone()).with_resolution(quad),
        IdentityReport::at_most("riccati_norm_nonnegative", -left, 0.0, scale, tol).with_resolution(quad),
    ])
}

fn single_mode(u: &PhaseFunction) -> Result<i32> {
    let modes = u.structural_modes();
    match (modes.len(), modes.iter().next()) {
        (1, Some(&k)) if k != 0 => Ok(k),
        _ => Err(Error::Precondition(format!("expected a single nonzero mode, found {modes:?}"))),
    }
}

/// `(k² + 1)‖Fu_k‖² − k²(𝕂u_k, u_k) = ‖VFu_k‖²` for `u_k ∈ Ω_k`, `k ≠ 0`,
/// together with the expansion `‖Fu_k‖² = ‖η⁺u_k‖² + ‖η⁻u_k‖² + k²‖κu_k‖²`.
pub fn mode_identity_residual(sys: &MagneticSystem, quad: &Quadrature, uk: &PhaseFunction) -> Result<Vec<IdentityReport>> {
    let k = single_mode(uk)?;
    let kf = k as f64;
    let fu = uk.f();
    let vfu = fu.v();
    let kku = PhaseFunction::magnetic_curvature().mul(uk);
    let ep = uk.eta_plus();
    let em = uk.eta_minus();
    let ku = PhaseFunction::kappa().mul(uk);
    let s = quad.sample(sys, &[&fu, &vfu, &kku, uk, &ep, &em, &ku])?;
    let f2 = quad.norm_sq(&s[0]);
    let vf2 = quad.norm_sq(&s[1]);
    let kuu = quad.inner(&s[2], &s[3]).re;
    let (p2, m2, k2) = (quad.norm_sq(&s[4]), quad.norm_sq(&s[5]), quad.norm_sq(&s[6]));
    let tol = Tolerance::identity(sys.backend());
    let left = (kf * kf + 1.0) * f2 - kf * kf * kuu;
    let main = IdentityReport::equality(
        "mode_identity",
        left,
        vf2,
        (kf * kf + 1.0) * f2 + kf * kf * kuu.abs() + vf2,
        tol.clone(),
    );
    let exp_right = p2 + m2 + kf * kf * k2;
    let expansion = IdentityReport::equality("mode_norm_expansion", f2, exp_right, f2 + exp_right, tol);
    Ok(vec![main.with_resolution(quad), expansion.with_resolution(quad)])
}

/// The two-sided bound on `‖η⁺u_k‖²` and the bound through `Fu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkReport {
    pub k: i32,
    pub a: f64,
    pub b: f64,
    pub lower: IdentityReport,
    pub upper: IdentityReport,
    pub through_f: IdentityReport,
}

impl GkReport {
    pub fn pass(&self) -> bool {
        self.lower.pass && self.upper.pass && self.through_f.pass
    }

    pub fn reports(&self) -> Vec<IdentityReport> {
        vec![self.lower.clone(), self.upper.clone(), self.through_f.clone()]
    }
}

impl ModeData {
    /// With `j = |k|`, `s = sign(k)` and `η_out`, `η_in` the operators moving
    /// away from and toward mode zero:
    /// `‖η_in u_k‖² + j a‖u_k‖² + (j/2)‖κu_k‖² <= ‖η_out u_k‖²
    ///  <= ‖η_in u_k‖² + j b‖u_k‖² + (j/2)‖κu_k‖²` and
    /// `‖η_in u_k‖² + j a‖u_k‖² + (j/2)‖κu_k‖²
    ///  <= 2‖(Fu)_{k+s}‖² + 4‖η_in u_{k+2s}‖² + 4(j+1)²‖κu_{k+s}‖²`.
    pub fn gk(&self, k: i32, a: f64, b: f64, tol: &Tolerance) -> GkReport {
        let s = k.signum();
        let j = k.unsigned_abs() as f64;
        let r = self.get(k);
        let lhs = r.eta_in_sq() + j * a * r.u_sq + 0.5 * j * r.kappa_u_sq;
        let upper = r.eta_in_sq() + j * b * r.u_sq + 0.5 * j * r.kappa_u_sq;
        let n1 = self.get(k + s);
        let n2 = self.get(k + 2 * s);
        let rhs2 = 2.0 * n1.fu_sq + 4.0 * n2.eta_in_sq() + 4.0 * (j + 1.0).powi(2) * n1.kappa_u_sq;
        let scale1 = r.eta_in_sq() + r.eta_out_sq() + j * b.max(a) * r.u_sq + j * r.kappa_u_sq;
        GkReport {
            k,
            a,
            b,
            lower: IdentityReport::at_most("gk1_lower", lhs, r.eta_out_sq(), scale1, tol.clone()),
            upper: IdentityReport::at_most("gk1_upper", r.eta_out_sq(), upper, scale1, tol.clone()),
            through_f: IdentityReport::at_most("gk2", lhs, rhs2, scale1 + rhs2, tol.clone()),
        }
    }
}

/// The η± inequalities at mode `k ≠ 0` with the constants of the system's
/// negativity bounds.
pub fn gk_inequalities(
    sys: &MagneticSystem,
    quad: &Quadrature,
    negativity: &Negativity,
    u: &PhaseFunction,
    k: i32,
) -> Result<GkReport> {
    if k == 0 {
        return Err(Error::Precondition("mode index must be nonzero".into()));
    }
    let nb = negativity.bounds()?;
    let data = ModeData::harvest(sys, quad, u)?;
    let mut r = data.gk(k, nb.a, nb.b, &Tolerance::inequality(sys.backend()));
    for rep in [&mut r.lower, &mut r.upper, &mut r.through_f] {
        *rep = rep.clone().with_resolution(quad);
    }
    Ok(r)
}
