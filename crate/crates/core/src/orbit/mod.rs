//! The magnetic flow: integration, closed orbits by multiple shooting,
//! marked length spectra and monodromy.

mod class;
mod flow;
mod shooting;
mod spectrum;

pub use class::{axis_seed, parse_class_list, ClassLabel, Deck};
pub use flow::{
    birkhoff_average, integrate_flow, integrate_with_jacobian, integrator, orbit_integral, reduce, speed, trajectory, vector_field,
    vector_field_jacobian, BirkhoffAverages, Mat3,
};
pub use shooting::{
    closure_defect, find_periodic_orbit, find_periodic_orbit_with, geodesic_seed, refine_periodic_orbit, PeriodicOrbit,
    ShootingOptions,
};
pub use spectrum::{check_closed, marked_length_spectrum, monodromy, Monodromy, SpectrumRow};

#[cfg(test)]
mod tests;
