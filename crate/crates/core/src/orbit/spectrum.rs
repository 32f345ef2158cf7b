use std::cell::RefCell;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::class::ClassLabel;
use super::flow::{integrator, vector_field};
use super::shooting::{find_periodic_orbit, PeriodicOrbit};
use crate::error::{Error, Result};
use crate::geometry::{MagneticSystem, PhasePoint};

type C64 = Complex64;

/// Transverse linearization of the return map in the Jacobi frame `(y, ẏ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: [C64; 2],
    pub trace: f64,
    pub det: f64,
}

impl Monodromy {
    fn from_matrix(matrix: [[f64; 2]; 2]) -> Self {
        let trace = matrix[0][0] + matrix[1][1];
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        let disc = C64::new(trace * trace / 4.0 - det, 0.0).sqrt();
        let half = C64::new(trace / 2.0, 0.0);
        let mut eigenvalues = [half + disc, half - disc];
        if eigenvalues[0].norm() < eigenvalues[1].norm() {
            eigenvalues.swap(0, 1);
        }
        Self { matrix, eigenvalues, trace, det }
    }

    /// `|trace| > 2`.
    pub fn is_hyperbolic(&self) -> bool {
        self.trace.abs() > 2.0
    }

    /// `ln |λ_max|`.
    pub fn lyapunov_sum(&self) -> f64 {
        self.eigenvalues[0].norm().ln()
    }
}

/// Integrates `ẏ = w, ẇ = −𝕂 y` once around the orbit.
pub fn monodromy(sys: &MagneticSystem, orbit: &PeriodicOrbit) -> Result<Monodromy> {
    let err = RefCell::new(None);
    let s = orbit.start;
    let y0 = [s.x, s.y, s.theta, 1.0, 0.0, 0.0, 1.0];
    let r = integrator().integrate(
        |_, y, dy| {
            let mut step = || -> Result<()> {
                let f = vector_field(sys, [y[0], y[1], y[2]])?;
                let k = sys.magnetic_curvature(PhasePoint::new(y[0], y[1], y[2]))?;
                dy[..3].copy_from_slice(&f);
                // columns (y, w) of the fundamental matrix
                dy[3] = y[5];
                dy[4] = y[6];
                dy[5] = -k * y[3];
                dy[6] = -k * y[4];
                Ok(())
            };
            if let Err(e) = step() {
                err.borrow_mut().get_or_insert(e);
                dy.iter_mut().for_each(|v| *v = f64::NAN);
            }
        },
        0.0,
        &y0,
        orbit.period,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let y = r?.0;
    Ok(Monodromy::from_matrix([[y[3], y[4]], [y[5], y[6]]]))
}

/// One row of a marked length spectrum table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub class_key: String,
    pub period: Option<f64>,
    pub closure_defect: Option<f64>,
    pub monodromy_trace: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Orbit and monodromy for each class, in input order. Failures are
/// recorded per row.
pub fn marked_length_spectrum(sys: &MagneticSystem, classes: &[ClassLabel]) -> Vec<SpectrumRow> {
    classes
        .par_iter()
        .map(|c| {
            let res = find_periodic_orbit(sys, c).and_then(|o| monodromy(sys, &o).map(|m| (o, m)));
            match res {
                Ok((o, m)) => SpectrumRow {
                    class_key: c.key(),
                    period: Some(o.period),
                    closure_defect: Some(o.closure_defect),
                    monodromy_trace: Some(m.trace),
                    error: None,
                },
                Err(e) => SpectrumRow {
                    class_key: c.key(),
                    period: None,
                    closure_defect: None,
                    monodromy_trace: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Fails unless `orbit` closes up to `tol`.
pub fn check_closed(orbit: &PeriodicOrbit, tol: f64) -> Result<()> {
    if orbit.closure_defect > tol {
        return Err(Error::Precondition(format!(
            "orbit {} closes only to {:.3e}",
            orbit.class_label, orbit.closure_defect
        )));
    }
    Ok(())
}
