use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::class::{axis_seed, ClassLabel, Deck};
use super::flow::{integrate_flow, integrate_with_jacobian, trajectory, vector_field, Mat3};
use crate::error::{Error, Result};
use crate::geometry::{MagneticSystem, PhasePoint, ScalarField, Surface};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    pub segments: usize,
    /// Newton stops once the max-norm residual is below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Number of intensity steps from the geodesic seed.
    pub continuation_steps: usize,
    /// Orbit samples stored per period.
    pub samples: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { segments: 8, tolerance: 1e-10, max_iterations: 50, continuation_steps: 10, samples: 64 }
    }
}

/// A closed orbit of the magnetic flow, lifted to the cover: the flow for
/// time `period` carries `start` to the deck image of `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub class_label: ClassLabel,
    pub period: f64,
    pub start: PhasePoint,
    /// States at `k · period / samples.len()`.
    pub samples: Vec<PhasePoint>,
    pub closure_defect: f64,
    pub newton_iterations: usize,
}

impl PeriodicOrbit {
    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.samples.len();
        (0..n).map(|k| self.period * k as f64 / n as f64).collect()
    }
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

fn diff(a: PhasePoint, b: PhasePoint) -> [f64; 3] {
    [a.x - b.x, a.y - b.y, wrap(a.theta - b.theta)]
}

/// Distance between the end of one period and the deck image of the start.
pub fn closure_defect(sys: &MagneticSystem, deck: &Deck, start: PhasePoint, period: f64) -> Result<f64> {
    let end = integrate_flow(sys, start, period)?;
    let target = deck.apply(start);
    let dth = wrap(end.theta - target.theta).abs();
    let dpos = match deck {
        Deck::Shift { .. } => (end.x - target.x).hypot(end.y - target.y),
        Deck::Mobius(_) => crate::geometry::bolza::disk_distance(end.base().z(), target.base().z()),
    };
    Ok(dpos.max(dth))
}

fn deck_for(sys: &MagneticSystem, class: &ClassLabel) -> Result<Deck> {
    Deck::for_class(class, sys.surface().as_bolza().map(|b| b.as_ref()))
}

struct Shooter<'a> {
    sys: &'a MagneticSystem,
    deck: Deck,
    m: usize,
    reference: PhasePoint,
    ref_field: [f64; 3],
}

impl Shooter<'_> {
    fn unpack(&self, x: &DVector<f64>) -> (Vec<PhasePoint>, f64) {
        let nodes = (0..self.m).map(|i| PhasePoint::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])).collect();
        (nodes, x[3 * self.m])
    }

    fn segments(&self, nodes: &[PhasePoint], t: f64) -> Result<Vec<(PhasePoint, Mat3)>> {
        let h = t / self.m as f64;
        nodes.par_iter().map(|p| integrate_with_jacobian(self.sys, *p, h)).collect()
    }

    fn residual_only(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (nodes, t) = self.unpack(x);
        if !(t > 0.0) {
            return Err(Error::NonConvergence("period became nonpositive".into()));
        }
        let h = t / self.m as f64;
        let ends: Vec<PhasePoint> = nodes.par_iter().map(|p| integrate_flow(self.sys, *p, h)).collect::<Result<_>>()?;
        Ok(self.assemble_residual(&nodes, &ends))
    }

    fn assemble_residual(&self, nodes: &[PhasePoint], ends: &[PhasePoint]) -> DVector<f64> {
        let m = self.m;
        let mut r = DVector::zeros(3 * m + 1);
        for i in 0..m {
            let target = if i + 1 < m { nodes[i + 1] } else { self.deck.apply(nodes[0]) };
            let d = diff(ends[i], target);
            for c in 0..3 {
                r[3 * i + c] = d[c];
            }
        }
        let d0 = diff(nodes[0], self.reference);
        r[3 * m] = (0..3).map(|c| d0[c] * self.ref_field[c]).sum();
        r
    }

    fn residual_and_jacobian(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let m = self.m;
        let (nodes, t) = self.unpack(x);
        let segs = self.segments(&nodes, t)?;
        let ends: Vec<PhasePoint> = segs.iter().map(|s| s.0).collect();
        let r = self.assemble_residual(&nodes, &ends);
        let n = 3 * m + 1;
        let mut j = DMatrix::zeros(n, n);
        for i in 0..m {
            let (end, phi) = segs[i];
            let f = vector_field(self.sys, [end.x, end.y, end.theta])?;
            for a in 0..3 {
                for b in 0..3 {
                    j[(3 * i + a, 3 * i + b)] += phi[a][b];
                }
                j[(3 * i + a, 3 * m)] = f[a] / m as f64;
            }
            if i + 1 < m {
                for a in 0..3 {
                    j[(3 * i + a, 3 * (i + 1) + a)] -= 1.0;
                }
            } else {
                let dd = self.deck.jacobian(nodes[0]);
                for a in 0..3 {
                    for b in 0..3 {
                        j[(3 * i + a, b)] -= dd[a][b];
                    }
                }
            }
        }
        for c in 0..3 {
            j[(3 * m, c)] = self.ref_field[c];
        }
        Ok((r, j))
    }
}

fn max_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Newton refinement of a periodic orbit from a guess `(start, period)`.
pub fn refine_periodic_orbit(
    sys: &MagneticSystem,
    class: &ClassLabel,
    start: PhasePoint,
    period: f64,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    let deck = deck_for(sys, class)?;
    let m = opts.segments.max(1);
    let ref_field = vector_field(sys, [start.x, start.y, start.theta])?;
    let shooter = Shooter { sys, deck, m, reference: start, ref_field };
    let mut x = DVector::zeros(3 * m + 1);
    let mut p = start;
    for i in 0..m {
        x[3 * i] = p.x;
        x[3 * i + 1] = p.y;
        x[3 * i + 2] = p.theta;
        if i + 1 < m {
            p = integrate_flow(sys, p, period / m as f64)?;
        }
    }
    x[3 * m] = period;
    let mut iterations = 0;
    let mut best = (f64::INFINITY, x.clone());
    loop {
        let (r, j) = shooter.residual_and_jacobian(&x)?;
        let rn = max_norm(&r);
        if rn < best.0 {
            best = (rn, x.clone());
        }
        if rn < opts.tolerance {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NewtonDivergence {
                label: class.key(),
                residual: best.0,
                iterations,
                best: best.1.iter().copied().collect(),
            });
        }
        iterations += 1;
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&r, 1e-11 * smax)
            .map_err(|e| Error::NonConvergence(format!("shooting linear solve failed: {e}")))?;
        let norm0 = r.norm();
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-4 {
            let trial = &x - &step * alpha;
            if let Ok(rt) = shooter.residual_only(&trial) {
                if rt.norm() <= (1.0 - 1e-4 * alpha) * norm0 || rt.norm() < 0.1 * opts.tolerance {
                    x = trial;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonDivergence {
                label: class.key(),
                residual: best.0,
                iterations,
                best: best.1.iter().copied().collect(),
            });
        }
    }
    let (nodes, t) = shooter.unpack(&x);
    let start = nodes[0];
    let defect = closure_defect(sys, &shooter.deck, start, t)?;
    let n = opts.samples.max(1);
    let times: Vec<f64> = (0..n).map(|k| t * k as f64 / n as f64).collect();
    let samples = trajectory(sys, start, &times)?;
    Ok(PeriodicOrbit { class_label: class.clone(), period: t, start, samples, closure_defect: defect, newton_iterations: iterations })
}

/// Closed geodesic seed for a class: the straight line on a torus chart,
/// the translation axis on the Bolza surface.
pub fn geodesic_seed(sys: &MagneticSystem, class: &ClassLabel) -> Result<(PhasePoint, f64)> {
    let deck = deck_for(sys, class)?;
    match (&deck, sys.surface()) {
        (Deck::Shift { dx, dy }, Surface::Torus(metric)) => {
            let theta = dy.atan2(*dx);
            let n = 256;
            let len: f64 = (0..n)
                .map(|k| {
                    let s = (k as f64 + 0.5) / n as f64;
                    metric.lambda_at(s * dx, s * dy).exp()
                })
                .sum::<f64>()
                * dx.hypot(*dy)
                / n as f64;
            Ok((PhasePoint::new(0.0, 0.0, theta), len))
        }
        (Deck::Mobius(a), _) => Ok((axis_seed(a), a.translation_length())),
        _ => unreachable!("deck matches backend"),
    }
}

fn kappa_at_fraction(target: &ScalarField, s: f64) -> Result<ScalarField> {
    ScalarField::constant(0.0).affine(s, target)
}

/// Closed orbit in a free homotopy class: Newton from the geodesic
/// representative, continued in the intensity `s·κ`, `s: 0 → 1`.
pub fn find_periodic_orbit(sys: &MagneticSystem, class: &ClassLabel) -> Result<PeriodicOrbit> {
    find_periodic_orbit_with(sys, class, &ShootingOptions::default())
}

pub fn find_periodic_orbit_with(sys: &MagneticSystem, class: &ClassLabel, opts: &ShootingOptions) -> Result<PeriodicOrbit> {
    let (start, period) = geodesic_seed(sys, class)?;
    if sys.kappa().constant_value() == Some(0.0) {
        return refine_periodic_orbit(sys, class, start, period, opts);
    }
    let steps = opts.continuation_steps.clamp(1, 10);
    let mut guess = (start, period);
    let mut orbit = None;
    for j in 0..=steps {
        let s = j as f64 / steps as f64;
        let sub = sys.with_kappa(kappa_at_fraction(sys.kappa(), s)?)?;
        let o = refine_periodic_orbit(&sub, class, guess.0, guess.1, opts).map_err(|e| match e {
            Error::NewtonDivergence { label, residual, iterations, best } => Error::NewtonDivergence {
                label: format!("{label} at intensity fraction {s:.2}"),
                residual,
                iterations,
                best,
            },
            other => other,
        })?;
        guess = (o.start, o.period);
        orbit = Some(o);
    }
    Ok(orbit.expect("at least one step"))
}
