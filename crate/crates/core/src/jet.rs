//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet`] of order `p` stores the Taylor coefficients `c[a][b]` of
//! `x^a y^b` for `a + b <= p` about some base point. Coefficients are laid
//! out by total degree, so truncating to a lower order is a prefix slice and
//! binary operations between jets of different orders simply run at the
//! smaller order. Derivatives lower the order by one.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::num::{JetScalar, Real};

/// Highest supported order.
pub const MAX_ORDER: usize = 6;
const CAP: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

#[inline]
const fn len_for(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Index of the `x^a y^b` coefficient.
#[inline]
pub const fn index(a: usize, b: usize) -> usize {
    let n = a + b;
    n * (n + 1) / 2 + b
}

/// Exponents `(a, b)` stored at position `i`.
#[inline]
fn exponents(i: usize) -> (usize, usize) {
    let mut n = 0;
    while (n + 1) * (n + 2) / 2 <= i {
        n += 1;
    }
    let b = i - n * (n + 1) / 2;
    (n - b, b)
}

#[derive(Clone, Copy)]
pub struct Jet<S> {
    order: u8,
    c: [S; CAP],
}

impl<S: JetScalar> Jet<S> {
    #[inline]
    pub fn constant(value: S, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [S::zero(); CAP];
        c[0] = value;
        Self { order: order as u8, c }
    }

    #[inline]
    pub fn zero(order: usize) -> Self {
        Self::constant(S::zero(), order)
    }

    /// The coordinate function `x` expanded about `x0`.
    pub fn var_x(x0: S, order: usize) -> Self {
        let mut j = Self::constant(x0, order);
        if order >= 1 {
            j.c[index(1, 0)] = S::one();
        }
        j
    }

    /// The coordinate function `y` expanded about `y0`.
    pub fn var_y(y0: S, order: usize) -> Self {
        let mut j = Self::constant(y0, order);
        if order >= 1 {
            j.c[index(0, 1)] = S::one();
        }
        j
    }

    /// Builds a jet from Taylor coefficients produced by `f(a, b)`.
    #[inline]
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut j = Self::zero(order);
        for i in 0..len_for(order) {
            let (a, b) = exponents(i);
            j.c[i] = f(a, b);
        }
        j
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    #[inline]
    pub fn value(&self) -> S {
        self.c[0]
    }

    /// Taylor coefficient of `x^a y^b` (zero above the order).
    pub fn coeff(&self, a: usize, b: usize) -> S {
        if a + b > self.order() {
            S::zero()
        } else {
            self.c[index(a, b)]
        }
    }

    #[inline]
    pub fn coeffs(&self) -> &[S] {
        &self.c[..len_for(self.order())]
    }

    #[inline]
    pub fn truncate(mut self, order: usize) -> Self {
        if order < self.order() {
            let hi = len_for(self.order());
            for v in &mut self.c[len_for(order)..hi] {
                *v = S::zero();
            }
            self.order = order as u8;
        }
        self
    }

    /// Partial derivative in `x`; the result has order one less.
    #[inline]
    pub fn dx(&self) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let p = self.order() - 1;
        Self::from_fn(p, |a, b| self.c[index(a + 1, b)].scale(S::Real::from_usize_lossy(a + 1)))
    }

    /// Partial derivative in `y`; the result has order one less.
    #[inline]
    pub fn dy(&self) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let p = self.order() - 1;
        Self::from_fn(p, |a, b| self.c[index(a, b + 1)].scale(S::Real::from_usize_lossy(b + 1)))
    }

    #[inline]
    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        let mut out = *self;
        for v in &mut out.c[..len_for(self.order())] {
            *v = f(*v);
        }
        out
    }

    /// Coefficientwise conjugate; equals the jet of the conjugate function
    /// because the expansion variables are real.
    #[inline]
    pub fn conj(&self) -> Self {
        self.map(|v| v.conjugate())
    }

    #[inline]
    pub fn scale(&self, s: S) -> Self {
        self.map(|v| v * s)
    }

    #[inline]
    pub fn scale_real(&self, s: S::Real) -> Self {
        self.map(|v| v.scale(s))
    }

    /// The non-constant part.
    #[inline]
    fn tail(&self) -> Self {
        let mut t = *self;
        t.c[0] = S::zero();
        t
    }

    /// `sum_n coeffs[n] h^n` where `h` is the tail of `self`.
    fn compose_series(&self, coeffs: &[S]) -> Self {
        let h = self.tail();
        let p = self.order();
        let mut out = Self::constant(coeffs[0], p);
        let mut pow = Self::constant(S::one(), p);
        for &a in coeffs.iter().skip(1).take(p) {
            pow = pow * h;
            out = out + pow.scale(a);
        }
        out
    }

    pub fn exp(&self) -> Self {
        let p = self.order();
        let e0 = self.value().exp();
        let mut coeffs = Vec::with_capacity(p + 1);
        let mut fact = S::one();
        for n in 0..=p {
            if n > 0 {
                fact *= S::from_real(S::Real::from_usize_lossy(n));
            }
            coeffs.push(e0 / fact);
        }
        self.compose_series(&coeffs)
    }

    pub fn recip(&self) -> Self {
        let p = self.order();
        let v = self.value();
        assert!(v != S::zero(), "reciprocal of a jet with zero value");
        let inv = S::one() / v;
        let mut coeffs = Vec::with_capacity(p + 1);
        let mut c = inv;
        for _ in 0..=p {
            coeffs.push(c);
            c = -c * inv;
        }
        self.compose_series(&coeffs)
    }

    pub fn ln(&self) -> Self {
        let p = self.order();
        let v = self.value();
        let inv = S::one() / v;
        let mut coeffs = Vec::with_capacity(p + 1);
        coeffs.push(v.ln());
        let mut pw = inv;
        for n in 1..=p {
            let sign = if n % 2 == 1 { S::one() } else { -S::one() };
            coeffs.push(sign * pw / S::from_real(S::Real::from_usize_lossy(n)));
            pw *= inv;
        }
        self.compose_series(&coeffs)
    }

    /// Integer power by repeated squaring; negative powers go through
    /// [`Jet::recip`].
    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut base = *self;
        let mut acc = Self::constant(S::one(), self.order());
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// Evaluates the Taylor polynomial at displacement `(hx, hy)`.
    pub fn eval_at(&self, hx: S, hy: S) -> S {
        let mut acc = S::zero();
        for (i, &c) in self.coeffs().iter().enumerate() {
            let (a, b) = exponents(i);
            let mut term = c;
            for _ in 0..a {
                term *= hx;
            }
            for _ in 0..b {
                term *= hy;
            }
            acc += term;
        }
        acc
    }
}

impl<S: JetScalar> Add for Jet<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let p = self.order().min(rhs.order());
        let mut out = self.truncate(p);
        for i in 0..len_for(p) {
            out.c[i] += rhs.c[i];
        }
        out
    }
}

impl<S: JetScalar> AddAssign for Jet<S> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        let p = self.order().min(rhs.order());
        if p < self.order() {
            let hi = len_for(self.order());
            for v in &mut self.c[len_for(p)..hi] {
                *v = S::zero();
            }
            self.order = p as u8;
        }
        for i in 0..len_for(p) {
            self.c[i] += rhs.c[i];
        }
    }
}

impl<S: JetScalar> Sub for Jet<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let p = self.order().min(rhs.order());
        let mut out = self.truncate(p);
        for i in 0..len_for(p) {
            out.c[i] -= rhs.c[i];
        }
        out
    }
}

impl<S: JetScalar> Neg for Jet<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.map(|v| -v)
    }
}

impl<S: JetScalar> Mul for Jet<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let p = self.order().min(rhs.order());
        let mut out = Self::zero(p);
        for n1 in 0..=p {
            for b1 in 0..=n1 {
                let l = self.c[index(n1 - b1, b1)];
                if l == S::zero() {
                    continue;
                }
                for n2 in 0..=(p - n1) {
                    for b2 in 0..=n2 {
                        let a = n1 - b1 + n2 - b2;
                        out.c[index(a, b1 + b2)] += l * rhs.c[index(n2 - b2, b2)];
                    }
                }
            }
        }
        out
    }
}

impl<S: JetScalar> Mul<S> for Jet<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: S) -> Self {
        self.scale(rhs)
    }
}

impl<S: JetScalar> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("order", &self.order).field("c", &self.coeffs()).finish()
    }
}
