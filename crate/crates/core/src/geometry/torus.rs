//! Trigonometric polynomials on the 2π-periodic square and the conformal
//! torus metric `e^{2λ}(dx² + dy²)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub m: i32,
    pub n: i32,
    pub re: f64,
    pub im: f64,
}

/// `sum c_{mn} e^{i(mx + ny)}` with finitely many terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<TrigTerm>", into = "Vec<TrigTerm>")]
pub struct TrigPoly2 {
    terms: BTreeMap<(i32, i32), C64>,
}

impl From<Vec<TrigTerm>> for TrigPoly2 {
    fn from(v: Vec<TrigTerm>) -> Self {
        let mut p = TrigPoly2::zero();
        for t in v {
            p.add_term(t.m, t.n, C64::new(t.re, t.im));
        }
        p
    }
}

impl From<TrigPoly2> for Vec<TrigTerm> {
    fn from(p: TrigPoly2) -> Self {
        p.terms
            .into_iter()
            .map(|((m, n), c)| TrigTerm { m, n, re: c.re, im: c.im })
            .collect()
    }
}

impl TrigPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, C64::new(c, 0.0));
        p
    }

    /// `amp · cos(mx + ny)`.
    pub fn cos(amp: f64, m: i32, n: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(m, n, C64::new(amp / 2.0, 0.0));
        p.add_term(-m, -n, C64::new(amp / 2.0, 0.0));
        p
    }

    /// `amp · sin(mx + ny)`.
    pub fn sin(amp: f64, m: i32, n: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(m, n, C64::new(0.0, -amp / 2.0));
        p.add_term(-m, -n, C64::new(0.0, amp / 2.0));
        p
    }

    pub fn add_term(&mut self, m: i32, n: i32, c: C64) {
        let e = self.terms.entry((m, n)).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if *e == C64::new(0.0, 0.0) {
            self.terms.remove(&(m, n));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i32, i32), C64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, m: i32, n: i32) -> C64 {
        self.terms.get(&(m, n)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `max(|m|, |n|)` among the terms.
    pub fn bandwidth(&self) -> i32 {
        self.terms.keys().map(|&(m, n)| m.abs().max(n.abs())).max().unwrap_or(0)
    }

    /// Real-valued iff the coefficients are conjugate-symmetric.
    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.iter().all(|(&(m, n), &c)| (self.coeff(-m, -n).conj() - c).norm() <= tol)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut p = Self::zero();
        for (&(m, n), &c) in &self.terms {
            p.add_term(m, n, c * s);
        }
        p
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (&(m, n), &c) in &other.terms {
            p.add_term(m, n, c);
        }
        p
    }

    pub fn conj(&self) -> Self {
        let mut p = Self::zero();
        for (&(m, n), &c) in &self.terms {
            p.add_term(-m, -n, c.conj());
        }
        p
    }

    /// Pointwise product (convolution of coefficients).
    pub fn product(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (&(m1, n1), &a) in &self.terms {
            for (&(m2, n2), &b) in &other.terms {
                p.add_term(m1 + m2, n1 + n2, a * b);
            }
        }
        p
    }

    /// Translate: `p(x + dx, y + dy)`.
    pub fn shifted(&self, dx: f64, dy: f64) -> Self {
        let mut p = Self::zero();
        for (&(m, n), &c) in &self.terms {
            p.add_term(m, n, c * C64::from_polar(1.0, m as f64 * dx + n as f64 * dy));
        }
        p
    }

    /// Coefficientwise partial derivatives.
    pub fn d_dx(&self) -> Self {
        let mut p = Self::zero();
        for (&(m, n), &c) in &self.terms {
            p.add_term(m, n, c * C64::new(0.0, m as f64));
        }
        p
    }

    pub fn d_dy(&self) -> Self {
        let mut p = Self::zero();
        for (&(m, n), &c) in &self.terms {
            p.add_term(m, n, c * C64::new(0.0, n as f64));
        }
        p
    }

    pub fn eval(&self, x: f64, y: f64) -> C64 {
        self.terms
            .iter()
            .map(|(&(m, n), &c)| c * C64::from_polar(1.0, m as f64 * x + n as f64 * y))
            .sum()
    }

    /// Exact Taylor jet at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64, order: usize) -> Jet<C64> {
        assert!(order <= MAX_ORDER);
        let mut out = Jet::zero(order);
        let mut fact = [1.0f64; MAX_ORDER + 1];
        for i in 1..=MAX_ORDER {
            fact[i] = fact[i - 1] * i as f64;
        }
        for (&(m, n), &c) in &self.terms {
            let base = c * C64::from_polar(1.0, m as f64 * x + n as f64 * y);
            let im = C64::new(0.0, m as f64);
            let inn = C64::new(0.0, n as f64);
            let term = Jet::from_fn(order, |a, b| base * im.powu(a as u32) * inn.powu(b as u32) / (fact[a] * fact[b]));
            out += term;
        }
        out
    }
}

/// `g = e^{2λ}(dx² + dy²)` on the 2π-periodic square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalTorusMetric {
    pub lambda: TrigPoly2,
}

impl ConformalTorusMetric {
    pub fn new(lambda: TrigPoly2) -> Result<Self> {
        if !lambda.is_real(1e-14) {
            return Err(Error::InvalidParameter("conformal factor must be real-valued".into()));
        }
        Ok(Self { lambda })
    }

    pub fn flat() -> Self {
        Self { lambda: TrigPoly2::zero() }
    }

    pub fn is_flat(&self) -> bool {
        self.lambda.terms().all(|((m, n), _)| m == 0 && n == 0)
    }

    pub fn lambda_at(&self, x: f64, y: f64) -> f64 {
        self.lambda.eval(x, y).re
    }

    /// `K = -e^{-2λ} Δλ`, evaluated from coefficients.
    pub fn gaussian_curvature(&self, x: f64, y: f64) -> f64 {
        let lap = self.lambda.d_dx().d_dx().plus(&self.lambda.d_dy().d_dy()).eval(x, y).re;
        -(-2.0 * self.lambda_at(x, y)).exp() * lap
    }

    /// Area of the torus, `∫ e^{2λ} dx dy`, by the trapezoidal rule.
    pub fn area(&self, grid: usize) -> f64 {
        let h = 2.0 * std::f64::consts::PI / grid as f64;
        let mut s = 0.0;
        for i in 0..grid {
            for j in 0..grid {
                s += (2.0 * self.lambda_at(i as f64 * h, j as f64 * h)).exp();
            }
        }
        s * h * h
    }
}
