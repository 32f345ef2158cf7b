use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BasePoint, MagneticSystem, PhasePoint, Surface};
use crate::ode::Dopri5;
use crate::phase::{evaluate, PhaseFunction};
pub type Mat3 = [[f64; 3]; 3];

/// Integrator settings for the flow: `1e-11` relative error per unit time.
pub fn integrator() -> Dopri5<f64> {
    Dopri5 { rtol: 1e-12, atol: 1e-13, h_max: 0.1, max_steps: 2_000_000, ..Dopri5::default() }
}

/// Chart data of the flow at a base point: `e^{-λ}`, `∇λ`, `κ` and, when
/// requested, their first derivatives.
struct Local {
    em: f64,
    lx: f64,
    ly: f64,
    kappa: f64,
    // d/dx, d/dy
    dem: [f64; 2],
    dlx: [f64; 2],
    dly: [f64; 2],
    dkappa: [f64; 2],
}

fn local(sys: &MagneticSystem, x: f64, y: f64) -> Result<Local> {
    let ctx = sys.point_ctx(BasePoint::new(x, y), 0)?;
    let d = |j: &crate::Jet64| [j.coeff(1, 0), j.coeff(0, 1)];
    let em = ctx.em;
    let lz = ctx.lz;
    let dlz = d(&lz);
    Ok(Local {
        em: em.value().re,
        lx: 2.0 * lz.value().re,
        ly: -2.0 * lz.value().im,
        kappa: ctx.kappa.value().re,
        dem: d(&em).map(|c| c.re),
        dlx: dlz.map(|c| 2.0 * c.re),
        dly: dlz.map(|c| -2.0 * c.im),
        dkappa: d(&ctx.kappa).map(|c| c.re),
    })
}

/// Right-hand side of the magnetic flow in chart coordinates `(x, y, θ)`,
/// with velocity `e^{-λ}(cos θ, sin θ)`. Unit speed holds by construction.
pub fn vector_field(sys: &MagneticSystem, s: [f64; 3]) -> Result<[f64; 3]> {
    let l = local(sys, s[0], s[1])?;
    let (sn, cs) = s[2].sin_cos();
    Ok([l.em * cs, l.em * sn, l.kappa + l.em * (l.ly * cs - l.lx * sn)])
}

/// Vector field and its Jacobian.
pub fn vector_field_jacobian(sys: &MagneticSystem, s: [f64; 3]) -> Result<([f64; 3], Mat3)> {
    let l = local(sys, s[0], s[1])?;
    let (sn, cs) = s[2].sin_cos();
    let g = l.ly * cs - l.lx * sn;
    let f = [l.em * cs, l.em * sn, l.kappa + l.em * g];
    let mut j = [[0.0; 3]; 3];
    for c in 0..2 {
        j[0][c] = l.dem[c] * cs;
        j[1][c] = l.dem[c] * sn;
        j[2][c] = l.dkappa[c] + l.dem[c] * g + l.em * (l.dly[c] * cs - l.dlx[c] * sn);
    }
    j[0][2] = -l.em * sn;
    j[1][2] = l.em * cs;
    j[2][2] = -l.em * (l.lx * cs + l.ly * sn);
    Ok((f, j))
}

fn pack(p: PhasePoint) -> [f64; 3] {
    [p.x, p.y, p.theta]
}

fn unpack(s: &[f64]) -> PhasePoint {
    PhasePoint::new(s[0], s[1], s[2])
}

/// Runs `f` inside an ODE right-hand side, stashing the first error and
/// poisoning the state so the integrator stops.
fn guarded<F>(err: &RefCell<Option<Error>>, out: &mut [f64], f: F)
where
    F: FnOnce(&mut [f64]) -> Result<()>,
{
    if let Err(e) = f(out) {
        err.borrow_mut().get_or_insert(e);
        out.iter_mut().for_each(|v| *v = f64::NAN);
    }
}

fn finish<T>(err: RefCell<Option<Error>>, r: std::result::Result<T, crate::ode::OdeError>) -> Result<T> {
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(r?)
}

/// `φ_t(p)` in the chart (on the universal cover for the Bolza surface).
pub fn integrate_flow(sys: &MagneticSystem, p: PhasePoint, t: f64) -> Result<PhasePoint> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter("flow time must be finite".into()));
    }
    sys.surface().check_point(p.base())?;
    let err = RefCell::new(None);
    let r = integrator().integrate(
        |_, y, dy| {
            guarded(&err, dy, |dy| {
                dy.copy_from_slice(&vector_field(sys, [y[0], y[1], y[2]])?);
                Ok(())
            })
        },
        0.0,
        &pack(p),
        t,
    );
    Ok(unpack(&finish(err, r)?.0))
}

/// States at each of the (monotone) `times`.
pub fn trajectory(sys: &MagneticSystem, p: PhasePoint, times: &[f64]) -> Result<Vec<PhasePoint>> {
    sys.surface().check_point(p.base())?;
    let err = RefCell::new(None);
    let r = integrator().integrate_dense(
        |_, y, dy| {
            guarded(&err, dy, |dy| {
                dy.copy_from_slice(&vector_field(sys, [y[0], y[1], y[2]])?);
                Ok(())
            })
        },
        0.0,
        &pack(p),
        times,
    );
    Ok(finish(err, r)?.iter().map(|s| unpack(s)).collect())
}

/// `φ_t(p)` together with `Dφ_t(p)`.
pub fn integrate_with_jacobian(sys: &MagneticSystem, p: PhasePoint, t: f64) -> Result<(PhasePoint, Mat3)> {
    let mut y0 = vec![p.x, p.y, p.theta];
    for r in 0..3 {
        for c in 0..3 {
            y0.push(if r == c { 1.0 } else { 0.0 });
        }
    }
    let err = RefCell::new(None);
    let r = integrator().integrate(
        |_, y, dy| {
            guarded(&err, dy, |dy| {
                let (f, j) = vector_field_jacobian(sys, [y[0], y[1], y[2]])?;
                dy[..3].copy_from_slice(&f);
                for r in 0..3 {
                    for c in 0..3 {
                        dy[3 + 3 * r + c] = (0..3).map(|k| j[r][k] * y[3 + 3 * k + c]).sum();
                    }
                }
                Ok(())
            })
        },
        0.0,
        &y0,
        t,
    );
    let y = finish(err, r)?;
    let y = y.0;
    let mut m = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = y[3 + 3 * r + c];
        }
    }
    Ok((unpack(&y), m))
}

/// Moves a phase point on the Bolza cover back into the fundamental
/// octagon; identity on the torus apart from reducing the angle.
pub fn reduce(sys: &MagneticSystem, p: PhasePoint) -> PhasePoint {
    match sys.surface() {
        Surface::Torus(_) => p,
        Surface::Bolza(b) => {
            let z = p.base().z();
            let r = b.reduce(z);
            let th = p.theta + r.element.angle_shift(z);
            PhasePoint::new(r.z.re, r.z.im, th.rem_euclid(std::f64::consts::TAU))
        }
    }
}

/// Running time averages of `u` along an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffAverages {
    pub times: Vec<f64>,
    pub averages: Vec<f64>,
}

/// `(1/T)∫₀ᵀ u(φ_t p) dt` at `checkpoints` (increasing, positive). The real
/// part of `u` is averaged; on the Bolza surface the orbit is folded back
/// into the octagon after every unit of time.
pub fn birkhoff_average(
    sys: &MagneticSystem,
    u: &PhaseFunction,
    p: PhasePoint,
    checkpoints: &[f64],
) -> Result<BirkhoffAverages> {
    u.check_backend(sys)?;
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints.first().is_some_and(|t| *t <= 0.0) {
        return Err(Error::InvalidParameter("checkpoints must be positive and increasing".into()));
    }
    let err = RefCell::new(None);
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        guarded(&err, dy, |dy| {
            let f = vector_field(sys, [y[0], y[1], y[2]])?;
            dy[..3].copy_from_slice(&f);
            dy[3] = evaluate(sys, u, PhasePoint::new(y[0], y[1], y[2]))?.re;
            Ok(())
        })
    };
    let ode = integrator();
    let mut rhs = rhs;
    let mut state = vec![p.x, p.y, p.theta, 0.0];
    let mut t = 0.0;
    let mut averages = Vec::with_capacity(checkpoints.len());
    for &tc in checkpoints {
        while t < tc {
            let t1 = (t + 1.0).min(tc);
            let r = ode.integrate(&mut rhs, t, &state, t1);
            if let Some(e) = err.borrow_mut().take() {
                return Err(e);
            }
            state = r?.0;
            let q = reduce(sys, unpack(&state));
            state[..3].copy_from_slice(&pack(q));
            t = t1;
        }
        averages.push(state[3] / tc);
    }
    Ok(BirkhoffAverages { times: checkpoints.to_vec(), averages })
}

/// Unit-speed check: `‖v‖_g` of the chart velocity.
pub fn speed(sys: &MagneticSystem, s: PhasePoint) -> Result<f64> {
    let f = vector_field(sys, pack(s))?;
    let lam = sys.surface().lambda(s.base());
    Ok(lam.exp() * (f[0] * f[0] + f[1] * f[1]).sqrt())
}

/// `∫₀ᵀ Re u(φ_t p) dt` on the cover.
pub fn orbit_integral(sys: &MagneticSystem, u: &PhaseFunction, p: PhasePoint, t: f64) -> Result<f64> {
    u.check_backend(sys)?;
    let err = RefCell::new(None);
    let r = integrator().integrate(
        |_, y, dy| {
            guarded(&err, dy, |dy| {
                dy[..3].copy_from_slice(&vector_field(sys, [y[0], y[1], y[2]])?);
                dy[3] = evaluate(sys, u, PhasePoint::new(y[0], y[1], y[2]))?.re;
                Ok(())
            })
        },
        0.0,
        &[p.x, p.y, p.theta, 0.0],
        t,
    );
    Ok(finish(err, r)?.0[3])
}
