//! Dormand-Prince 5(4) integrator.

use thiserror::Error;

use crate::num::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}: h = {h} (stiff or singular right-hand side)")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Adaptive embedded Runge-Kutta pair of order 5(4) with FSAL stages.
#[derive(Debug, Clone)]
pub struct Dopri5<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: T,
    pub h_max: T,
    pub h_min: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Dopri5<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-11),
            atol: T::lit(1e-12),
            h_init: T::lit(1e-2),
            h_max: T::lit(0.25),
            h_min: T::lit(1e-14),
            max_steps: 2_000_000,
        }
    }
}

struct Tableau<T> {
    c: [T; 7],
    a: [[T; 6]; 7],
    e: [T; 7],
}

fn tableau<T: Real>() -> Tableau<T> {
    let l = T::lit;
    let z = T::zero();
    let b = [
        l(35.0 / 384.0),
        z,
        l(500.0 / 1113.0),
        l(125.0 / 192.0),
        l(-2187.0 / 6784.0),
        l(11.0 / 84.0),
        z,
    ];
    let b4 = [
        l(5179.0 / 57600.0),
        z,
        l(7571.0 / 16695.0),
        l(393.0 / 640.0),
        l(-92097.0 / 339200.0),
        l(187.0 / 2100.0),
        l(1.0 / 40.0),
    ];
    let mut e = [z; 7];
    for i in 0..7 {
        e[i] = b[i] - b4[i];
    }
    Tableau {
        c: [z, l(0.2), l(0.3), l(0.8), l(8.0 / 9.0), T::one(), T::one()],
        a: [
            [z; 6],
            [l(0.2), z, z, z, z, z],
            [l(3.0 / 40.0), l(9.0 / 40.0), z, z, z, z],
            [l(44.0 / 45.0), l(-56.0 / 15.0), l(32.0 / 9.0), z, z, z],
            [
                l(19372.0 / 6561.0),
                l(-25360.0 / 2187.0),
                l(64448.0 / 6561.0),
                l(-212.0 / 729.0),
                z,
                z,
            ],
            [
                l(9017.0 / 3168.0),
                l(-355.0 / 33.0),
                l(46732.0 / 5247.0),
                l(49.0 / 176.0),
                l(-5103.0 / 18656.0),
                z,
            ],
            b[..6].try_into().unwrap(),
        ],
        e,
    }
}

impl<T: Real> Dopri5<T> {
    pub fn with_tolerance(rtol: T, atol: T) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// One explicit step of size `h`; returns the 5th-order solution and the
    /// embedded error estimate.
    fn step<F>(&self, f: &mut F, tab: &Tableau<T>, t: T, y: &[T], k0: &[T], h: T) -> (Vec<T>, Vec<T>, Vec<T>)
    where
        F: FnMut(T, &[T], &mut [T]),
    {
        let n = y.len();
        let mut k: Vec<Vec<T>> = Vec::with_capacity(7);
        k.push(k0.to_vec());
        let mut tmp = vec![T::zero(); n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate() {
                    acc += tab.a[s][j] * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            let mut ks = vec![T::zero(); n];
            f(t + tab.c[s] * h, &tmp, &mut ks);
            k.push(ks);
        }
        // the last stage is evaluated at the 5th-order solution (FSAL)
        let y_new = tmp;
        let mut err = vec![T::zero(); n];
        for i in 0..n {
            let mut acc = T::zero();
            for s in 0..7 {
                acc += tab.e[s] * k[s][i];
            }
            err[i] = h * acc;
        }
        let k_last = k.pop().unwrap();
        (y_new, err, k_last)
    }

    /// Integrates from `t0` to `t1` (either direction) with adaptive steps.
    pub fn integrate<F>(&self, mut f: F, t0: T, y0: &[T], t1: T) -> Result<(Vec<T>, Stats), OdeError>
    where
        F: FnMut(T, &[T], &mut [T]),
    {
        let tab = tableau::<T>();
        let mut stats = Stats::default();
        let mut t = t0;
        let mut y = y0.to_vec();
        if t1 == t0 {
            return Ok((y, stats));
        }
        let dir = if t1 > t0 { T::one() } else { -T::one() };
        let mut h = self.h_init.min((t1 - t0).abs());
        let mut k0 = vec![T::zero(); y.len()];
        f(t, &y, &mut k0);
        let safety = T::lit(0.9);
        let fac_min = T::lit(0.2);
        let fac_max = T::lit(5.0);
        let expo = T::lit(0.2);
        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(OdeError::TooManySteps(self.max_steps));
            }
            let remaining = (t1 - t).abs();
            let last = h >= remaining;
            let h_step = if last { remaining } else { h };
            let (y_new, err, k_last) = self.step(&mut f, &tab, t, &y, &k0, dir * h_step);
            let mut norm = T::zero();
            for i in 0..y.len() {
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                let r = err[i] / sc;
                norm += r * r;
            }
            norm = (norm / T::from_usize_lossy(y.len())).sqrt();
            if !norm.is_finite() {
                if h_step <= self.h_min {
                    return Err(OdeError::NonFinite(t.to_f64().unwrap_or(f64::NAN)));
                }
                h = h_step * T::lit(0.1);
                stats.rejected += 1;
                continue;
            }
            if norm <= T::one() {
                stats.accepted += 1;
                t = if last { t1 } else { t + dir * h_step };
                y = y_new;
                k0 = k_last;
                if last {
                    return Ok((y, stats));
                }
                let fac = if norm == T::zero() { fac_max } else { (safety * norm.powf(-expo)).min(fac_max).max(fac_min) };
                h = (h_step * fac).min(self.h_max);
            } else {
                stats.rejected += 1;
                let fac = (safety * norm.powf(-expo)).max(fac_min);
                h = h_step * fac;
                if h < self.h_min {
                    return Err(OdeError::StepUnderflow {
                        t: t.to_f64().unwrap_or(f64::NAN),
                        h: h.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
    }

    /// Adaptive integration reporting the state at each of `times`
    /// (monotone, starting at or after `t0`).
    pub fn integrate_dense<F>(&self, mut f: F, t0: T, y0: &[T], times: &[T]) -> Result<Vec<Vec<T>>, OdeError>
    where
        F: FnMut(T, &[T], &mut [T]),
    {
        let mut out = Vec::with_capacity(times.len());
        let mut t = t0;
        let mut y = y0.to_vec();
        for &tn in times {
            let (yn, _) = self.integrate(&mut f, t, &y, tn)?;
            y = yn;
            t = tn;
            out.push(y.clone());
        }
        Ok(out)
    }

    /// Fixed-step integration with the 5th-order formula. The global error is
    /// then a smooth function of time, which matters when the samples are
    /// differentiated afterwards.
    pub fn integrate_fixed<F>(&self, mut f: F, t0: T, y0: &[T], t1: T, steps: usize) -> Vec<T>
    where
        F: FnMut(T, &[T], &mut [T]),
    {
        let tab = tableau::<T>();
        let h = (t1 - t0) / T::from_usize_lossy(steps.max(1));
        let mut y = y0.to_vec();
        let mut k0 = vec![T::zero(); y.len()];
        for i in 0..steps.max(1) {
            let t = t0 + h * T::from_usize_lossy(i);
            f(t, &y, &mut k0);
            let (y_new, _, _) = self.step(&mut f, &tab, t, &y, &k0, h);
            y = y_new;
        }
        y
    }
}
