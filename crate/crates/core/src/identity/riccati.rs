use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{MagneticSystem, PhasePoint};
use crate::orbit::{integrator, vector_field, PeriodicOrbit};
use crate::spectral::periodic_derivative;

/// Period-map displacement at which the iteration stops.
pub const RICCATI_TOL: f64 = 1e-10;
const MAX_PERIODS: usize = 400;

/// `Plus` is the larger solution; it attracts forward in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

/// Periodic solution of `ṙ + r² + 𝕂 = 0` along a closed orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiSolution {
    pub class_key: String,
    pub branch: Branch,
    pub period: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `|r(T) − r(0)|` after the last sweep.
    pub periodicity_defect: f64,
    /// `max |ṙ + r² + 𝕂|` on the samples, `ṙ` by spectral differentiation.
    pub equation_residual: f64,
    pub periods_used: usize,
}

impl RiccatiSolution {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn sweep(sys: &MagneticSystem, start: PhasePoint, r0: f64, t1: f64, times: Option<&[f64]>) -> Result<Vec<Vec<f64>>> {
    let err = RefCell::new(None);
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let mut step = || -> Result<()> {
            let f = vector_field(sys, [y[0], y[1], y[2]])?;
            let k = sys.magnetic_curvature(PhasePoint::new(y[0], y[1], y[2]))?;
            dy[..3].copy_from_slice(&f);
            dy[3] = -y[3] * y[3] - k;
            Ok(())
        };
        if let Err(e) = step() {
            err.borrow_mut().get_or_insert(e);
            dy.iter_mut().for_each(|v| *v = f64::NAN);
        }
    };
    let y0 = [start.x, start.y, start.theta, r0];
    let ode = integrator();
    let out = match times {
        Some(ts) => ode.integrate_dense(rhs, 0.0, &y0, ts),
        None => ode.integrate(rhs, 0.0, &y0, t1).map(|(y, _)| vec![y]),
    };
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(out?)
}

/// Even sample count with at least 64 points per unit time, at least 256.
pub fn dense_samples(period: f64) -> usize {
    let n = ((64.0 * period).ceil() as usize).max(256);
    n + n % 2
}

/// Iterates the period map of the Riccati equation along `orbit` from
/// `±√(−𝕂(start))`: forward for the plus branch, backward for the minus
/// branch.
pub fn riccati_solve(sys: &MagneticSystem, orbit: &PeriodicOrbit, branch: Branch) -> Result<RiccatiSolution> {
    let t = orbit.period;
    let curv: Vec<f64> =
        orbit.samples.iter().map(|p| sys.magnetic_curvature(*p)).collect::<Result<_>>()?;
    if let Some(k) = curv.iter().copied().find(|k| *k >= 0.0) {
        return Err(Error::Precondition(format!(
            "magnetic curvature {k:.3e} is not negative along orbit {}",
            orbit.class_label
        )));
    }
    let k0 = sys.magnetic_curvature(orbit.start)?;
    let (sign, dir) = match branch {
        Branch::Plus => (1.0, 1.0),
        Branch::Minus => (-1.0, -1.0),
    };
    let mut r = sign * (-k0).sqrt();
    let mut defect = f64::INFINITY;
    let mut periods = 0;
    while periods < MAX_PERIODS {
        periods += 1;
        let next = sweep(sys, orbit.start, r, dir * t, None)?[0][3];
        if !next.is_finite() {
            break;
        }
        defect = (next - r).abs();
        r = next;
        if defect < RICCATI_TOL {
            break;
        }
    }
    if !(defect < RICCATI_TOL) {
        return Err(Error::NonConvergence(format!(
            "Riccati {branch:?} branch along {} did not settle: period-map displacement {defect:.3e} after {periods} periods",
            orbit.class_label
        )));
    }
    let n = dense_samples(t);
    let times: Vec<f64> = (0..n).map(|k| t * k as f64 / n as f64).collect();
    let states = sweep(sys, orbit.start, r, t, Some(&times))?;
    let values: Vec<f64> = states.iter().map(|s| s[3]).collect();
    let curv: Vec<f64> =
        states.iter().map(|s| sys.magnetic_curvature(PhasePoint::new(s[0], s[1], s[2]))).collect::<Result<_>>()?;
    let dr = periodic_derivative(&values, t, 1);
    let equation_residual =
        (0..n).map(|i| (dr[i] + values[i] * values[i] + curv[i]).abs()).fold(0.0, f64::max);
    Ok(RiccatiSolution {
        class_key: orbit.class_label.key(),
        branch,
        period: t,
        times,
        values,
        periodicity_defect: defect,
        equation_residual,
        periods_used: periods,
    })
}

/// `min_t (r⁺ − r⁻)` for two solutions on the same orbit.
pub fn branch_separation(plus: &RiccatiSolution, minus: &RiccatiSolution) -> Result<f64> {
    if plus.values.len() != minus.values.len() || plus.class_key != minus.class_key {
        return Err(Error::InvalidParameter("Riccati solutions sampled on different orbits".into()));
    }
    Ok(plus.values.iter().zip(&minus.values).map(|(p, m)| p - m).fold(f64::INFINITY, f64::min))
}
