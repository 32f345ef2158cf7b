//! One-parameter families of magnetic systems: `β`, continued orbit
//! lengths, variational fields and the Jacobi system they satisfy.

mod family;
mod variation;

pub use family::{beta, beta_difference_check, BetaTensor, DeformationFamily, FamilyKind, BETA_LEAKAGE_TOL};
pub use variation::{
    continue_orbit, first_order_system_residual, jacobi_residual, length_function, livsic_integral_check,
    periodic_nondegeneracy, variational_field, JacobiReport, LengthFunction, LivsicReport, Nondegeneracy,
    VariationalField, ISOSPECTRAL_TOL, JACOBI_TOL, LIVSIC_TOL,
};

#[cfg(test)]
mod tests;
