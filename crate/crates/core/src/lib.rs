//! Magnetic flows on closed surfaces.

pub mod battery;
pub mod deform;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod identity;
pub mod jet;
pub mod lse;
pub mod num;
pub mod ode;
pub mod orbit;
pub mod phase;
pub mod spectral;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Jet64 = jet::Jet<num_complex::Complex64>;
pub type Integrator = ode::Dopri5<f64>;
pub type Weights = identity::CarlemanWeights<f64>;
