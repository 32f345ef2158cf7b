//! Scalar abstractions shared by the numeric kernels.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + NumAssign + Debug + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Coefficient type for truncated Taylor arithmetic: a real or complex float.
pub trait JetScalar: NumAssign + Neg<Output = Self> + Copy + Debug + Default + Send + Sync + 'static {
    type Real: Real;

    fn from_real(x: Self::Real) -> Self;
    fn conjugate(self) -> Self;
    fn scale(self, s: Self::Real) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    /// Modulus.
    fn modulus(self) -> Self::Real;
}

macro_rules! impl_real_jet_scalar {
    ($t:ty) => {
        impl JetScalar for $t {
            type Real = $t;
            fn from_real(x: $t) -> Self {
                x
            }
            fn conjugate(self) -> Self {
                self
            }
            fn scale(self, s: $t) -> Self {
                self * s
            }
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            fn modulus(self) -> $t {
                self.abs()
            }
        }

        impl JetScalar for Complex<$t> {
            type Real = $t;
            fn from_real(x: $t) -> Self {
                Complex::new(x, 0.0)
            }
            fn conjugate(self) -> Self {
                self.conj()
            }
            fn scale(self, s: $t) -> Self {
                self * s
            }
            fn exp(self) -> Self {
                Complex::exp(self)
            }
            fn ln(self) -> Self {
                Complex::ln(self)
            }
            fn modulus(self) -> $t {
                self.norm()
            }
        }
    };
}

impl_real_jet_scalar!(f32);
impl_real_jet_scalar!(f64);
