//! The Bolza surface as a quotient of the Poincaré disk by the group
//! generated by the side pairings of the regular octagon with angles π/4.
//!
//! Group elements are stored as SU(1,1) matrices `[[a, b], [b̄, ā]]` acting by
//! `z ↦ (az + b)/(b̄z + ā)`.

use std::collections::{HashSet, VecDeque};
use std::num::NonZeroUsize;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use gauss_quad::legendre::GaussLegendre;
use num_complex::{Complex, Complex64};

use crate::num::Real;

type C64 = Complex64;

/// Element of SU(1,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su11<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
}

impl<T: Real> Su11<T> {
    pub fn identity() -> Self {
        Self { a: Complex::new(T::one(), T::zero()), b: Complex::new(T::zero(), T::zero()) }
    }

    /// Rotation of the disk by `phi` about the origin.
    pub fn rotation(phi: T) -> Self {
        let h = phi / T::lit(2.0);
        Self { a: Complex::new(h.cos(), h.sin()), b: Complex::new(T::zero(), T::zero()) }
    }

    /// Hyperbolic translation of length `len` along the axis through the
    /// origin in direction `dir`.
    pub fn translation(len: T, dir: T) -> Self {
        let h = len / T::lit(2.0);
        Self { a: Complex::new(h.cosh(), T::zero()), b: Complex::from_polar(h.sinh(), dir) }
    }

    pub fn compose(&self, o: &Self) -> Self {
        Self { a: self.a * o.a + self.b * o.b.conj(), b: self.a * o.b + self.b * o.a.conj() }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.a.conj(), b: -self.b }
    }

    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// `d/dz` of the action.
    pub fn derivative(&self, z: Complex<T>) -> Complex<T> {
        let w = self.b.conj() * z + self.a.conj();
        (w * w).inv()
    }

    /// Rotation of tangent directions at `z`: `arg` of the derivative.
    pub fn angle_shift(&self, z: Complex<T>) -> T {
        self.derivative(z).arg()
    }

    pub fn trace(&self) -> T {
        T::lit(2.0) * self.a.re
    }

    pub fn det(&self) -> T {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// Translation length `2 arccosh(|tr|/2)`; zero for elliptic or parabolic.
    pub fn translation_length(&self) -> T {
        let h = self.trace().abs() / T::lit(2.0);
        if h <= T::one() {
            T::zero()
        } else {
            T::lit(2.0) * h.acosh()
        }
    }

    /// Conjugate into SL(2,R) acting on the upper half plane via the Cayley
    /// map `z ↦ i(1 + z)/(1 - z)`; returns `[[p, q], [r, s]]`.
    pub fn to_sl2r(&self) -> [[T; 2]; 2] {
        // C M C^{-1} with C = [[i, i], [-1, 1]]
        let (a, b) = (self.a, self.b);
        let p = a.re + b.re;
        let q = a.im - b.im;
        let r = -(a.im + b.im);
        let s = a.re - b.re;
        [[p, q], [r, s]]
    }
}

/// Hyperbolic distance between points of the disk.
pub fn disk_distance(z: C64, w: C64) -> f64 {
    let num = 2.0 * (z - w).norm_sqr();
    let den = (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr());
    (1.0 + num / den).acosh()
}

/// Distance from the origin.
pub fn distance_from_origin(z: C64) -> f64 {
    2.0 * z.norm().atanh()
}

#[derive(Debug, Clone)]
pub struct GroupElement {
    pub matrix: Su11<f64>,
    /// Generator indices, leftmost factor first.
    pub word: Vec<u8>,
}

impl GroupElement {
    pub fn image_of_origin(&self) -> C64 {
        self.matrix.apply(C64::new(0.0, 0.0))
    }
}

/// Result of moving a point into the fundamental octagon.
#[derive(Debug, Clone, Copy)]
pub struct Reduced {
    pub z: C64,
    /// `g` with `g(z_in) = z`.
    pub element: Su11<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct BolzaSurface {
    generators: [Su11<f64>; 8],
    side_translation: f64,
    circumradius: f64,
    elements: Vec<GroupElement>,
    element_radius: f64,
}

impl Default for BolzaSurface {
    fn default() -> Self {
        Self::new()
    }
}

impl BolzaSurface {
    pub fn new() -> Self {
        Self::with_element_radius(11.5)
    }

    /// Builds the surface and enumerates every group element `A` with
    /// `d(0, A·0) <= radius`.
    pub fn with_element_radius(radius: f64) -> Self {
        let ell = 2.0 * (1.0 + 2f64.sqrt()).acosh();
        let mut generators = [Su11::identity(); 8];
        for (j, g) in generators.iter_mut().enumerate() {
            *g = Su11::translation(ell, j as f64 * FRAC_PI_4);
        }
        let circumradius = (3.0 + 2.0 * 2f64.sqrt()).acosh();
        let mut s = Self { generators, side_translation: ell, circumradius, elements: Vec::new(), element_radius: radius };
        s.elements = s.enumerate(radius);
        s
    }

    fn enumerate(&self, radius: f64) -> Vec<GroupElement> {
        let key = |m: &Su11<f64>| {
            let p = m.apply(C64::new(0.0, 0.0));
            ((p.re * 1e9).round() as i64, (p.im * 1e9).round() as i64)
        };
        // the geodesic from 0 to A·0 crosses only tiles whose centers lie
        // within the circumradius of it
        let walk = radius + self.circumradius;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        let id = GroupElement { matrix: Su11::identity(), word: Vec::new() };
        seen.insert(key(&id.matrix));
        queue.push_back(id);
        while let Some(e) = queue.pop_front() {
            let d = distance_from_origin(e.image_of_origin());
            if d <= radius {
                out.push(e.clone());
            }
            for (j, g) in self.generators.iter().enumerate() {
                let m = e.matrix.compose(g);
                let p = m.apply(C64::new(0.0, 0.0));
                if p.norm() >= 1.0 || distance_from_origin(p) > walk {
                    continue;
                }
                if seen.insert(key(&m)) {
                    let mut word = e.word.clone();
                    word.push(j as u8);
                    queue.push_back(GroupElement { matrix: m, word });
                }
            }
        }
        out.sort_by(|a, b| {
            distance_from_origin(a.image_of_origin())
                .total_cmp(&distance_from_origin(b.image_of_origin()))
                .then(a.word.cmp(&b.word))
        });
        out
    }

    pub fn generators(&self) -> &[Su11<f64>; 8] {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> Su11<f64> {
        self.generators[j % 8]
    }

    /// Translation length of the side pairings, which is the systole.
    pub fn side_translation(&self) -> f64 {
        self.side_translation
    }

    /// Hyperbolic distance from the center to an octagon vertex.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Hyperbolic distance from the center to a side.
    pub fn inradius(&self) -> f64 {
        self.side_translation / 2.0
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element_radius(&self) -> f64 {
        self.element_radius
    }

    /// Octagon vertices in the disk.
    pub fn vertices(&self) -> [C64; 8] {
        let r = (self.circumradius / 2.0).tanh();
        std::array::from_fn(|j| C64::from_polar(r, FRAC_PI_8 + j as f64 * FRAC_PI_4))
    }

    /// Group element for a word in the generators; index `j + 4` is the
    /// inverse of `j`.
    pub fn word(&self, letters: &[u8]) -> Su11<f64> {
        letters.iter().fold(Su11::identity(), |acc, &j| acc.compose(&self.generator(j as usize)))
    }

    /// Product `g0 g1⁻¹ g2 g3⁻¹ g0⁻¹ g1 g2⁻¹ g3` of the side pairings.
    pub fn relator(&self) -> Su11<f64> {
        self.word(&[0, 5, 2, 7, 4, 1, 6, 3])
    }

    pub fn in_fundamental_domain(&self, z: C64, tol: f64) -> bool {
        let r = z.norm();
        r < 1.0 && self.generators.iter().all(|g| g.apply(z).norm() >= r - tol)
    }

    /// Moves `z` into the closed Dirichlet octagon centered at the origin.
    pub fn reduce(&self, z: C64) -> Reduced {
        let mut cur = z;
        let mut g = Su11::identity();
        let mut steps = 0;
        loop {
            let r = cur.norm();
            let (best, img) = self
                .generators
                .iter()
                .enumerate()
                .map(|(j, h)| (j, h.apply(cur)))
                .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .expect("eight generators");
            if img.norm() < r * (1.0 - 1e-14) && steps < 10_000 {
                cur = img;
                g = self.generators[best].compose(&g);
                steps += 1;
            } else {
                return Reduced { z: cur, element: g, steps };
            }
        }
    }

    /// Interior quadrature rule on the octagon: `(point, weight)` pairs with
    /// the hyperbolic area density folded into the weight. Each of the 8
    /// sectors facing a side is swept by geodesic rays from the center to the
    /// point at arclength `s` from the side midpoint; `(t, s)` is covered by
    /// `n × n` Gauss-Legendre panels. The integrand stays analytic in `s` up
    /// to the vertices, unlike in the polar angle.
    pub fn quadrature(&self, n: usize) -> Vec<(C64, f64)> {
        let n = n.max(1);
        let rule = GaussLegendre::new(NonZeroUsize::new(QUAD_POINTS).expect("nonzero"));
        let pairs = rule.as_node_weight_pairs();
        let r = self.inradius();
        let (sh_r, ch_r) = (r.sinh(), r.cosh());
        let half_side = (sh_r * FRAC_PI_8.tan()).atanh();
        let ds = 2.0 * half_side / n as f64;
        let dt = 1.0 / n as f64;
        let mut out = Vec::with_capacity(8 * n * n * QUAD_POINTS * QUAD_POINTS);
        for j in 0..8 {
            let alpha = j as f64 * FRAC_PI_4;
            for ps in 0..n {
                let s0 = -half_side + ps as f64 * ds;
                for &(xs, ws) in pairs {
                    let s = s0 + 0.5 * ds * (xs + 1.0);
                    let ts = s.tanh() / sh_r;
                    let u = ts.atan();
                    let du_ds = (1.0 - s.tanh().powi(2)) / sh_r / (1.0 + ts * ts);
                    let rho_b = (ch_r * s.cosh()).acosh();
                    for pt in 0..n {
                        let t0 = pt as f64 * dt;
                        for &(xt, wt) in pairs {
                            let rho = rho_b * (t0 + 0.5 * dt * (xt + 1.0));
                            let w = 0.25 * ds * dt * ws * wt * du_ds * rho_b * rho.sinh();
                            out.push((C64::from_polar((rho / 2.0).tanh(), alpha + u), w));
                        }
                    }
                }
            }
        }
        out
    }

    /// Evenly spaced points on the octagon boundary (in the disk), useful for
    /// checking that sampled fields agree across paired sides.
    pub fn boundary_samples(&self, per_side: usize) -> Vec<C64> {
        let rk = self.circumradius.tanh();
        let mut out = Vec::new();
        for j in 0..8 {
            let v0 = C64::from_polar(rk, FRAC_PI_8 + j as f64 * FRAC_PI_4);
            let v1 = C64::from_polar(rk, FRAC_PI_8 + (j + 1) as f64 * FRAC_PI_4);
            for i in 0..per_side {
                let t = (i as f64 + 0.5) / per_side as f64;
                out.push(klein_to_disk(v0 + (v1 - v0) * t));
            }
        }
        out
    }

    /// Area `4π(g - 1)` with `g = 2`.
    pub fn area(&self) -> f64 {
        4.0 * PI
    }
}

/// Klein model point to Poincaré disk point.
pub fn klein_to_disk(w: C64) -> C64 {
    w / (1.0 + (1.0 - w.norm_sqr()).sqrt())
}

/// Poincaré disk point to Klein model point.
pub fn disk_to_klein(z: C64) -> C64 {
    z * 2.0 / (1.0 + z.norm_sqr())
}

const QUAD_POINTS: usize = 6;
