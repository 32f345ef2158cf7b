use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::eval::PointEvaluator;
use super::PhaseFunction;
use crate::error::Result;
use crate::geometry::{BackendKind, BasePoint, MagneticSystem};

type C64 = Complex64;

const CHUNK: usize = 64;

/// Liouville quadrature: a base rule with the area density in its weights,
/// and the fiber integral done exactly per mode.
#[derive(Debug, Clone)]
pub struct Quadrature {
    backend: BackendKind,
    resolution: usize,
    nodes: Vec<BasePoint>,
    weights: Vec<f64>,
}

/// Mode values of one function at every quadrature node.
#[derive(Debug, Clone)]
pub struct Sampled {
    values: Vec<Vec<(i32, C64)>>,
}

impl Sampled {
    pub fn at(&self, i: usize) -> &[(i32, C64)] {
        &self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Quadrature {
    pub fn new(sys: &MagneticSystem, resolution: usize) -> Self {
        let (nodes, weights) = sys.quadrature(resolution).into_iter().unzip();
        Self { backend: sys.backend(), resolution, nodes, weights }
    }

    pub fn backend(&self) -> BackendKind {
        self.backend
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn nodes(&self) -> &[BasePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total Liouville measure `2π · area`.
    pub fn measure(&self) -> f64 {
        TAU * self.weights.iter().sum::<f64>()
    }

    /// Samples several functions at once; shared subexpressions are
    /// evaluated once per node. Work is split in fixed chunks and collected
    /// in order, so results do not depend on the thread count.
    pub fn sample(&self, sys: &MagneticSystem, fns: &[&PhaseFunction]) -> Result<Vec<Sampled>> {
        for f in fns {
            f.check_backend(sys)?;
        }
        let order = fns.iter().map(|f| f.derivative_depth()).max().unwrap_or(0);
        let chunks: Vec<Vec<Vec<Vec<(i32, C64)>>>> = self
            .nodes
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|p| {
                        let mut ev = PointEvaluator::new(sys, *p, order)?;
                        fns.iter().map(|f| ev.values(f)).collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out: Vec<Sampled> = fns.iter().map(|_| Sampled { values: Vec::with_capacity(self.len()) }).collect();
        for chunk in chunks {
            for node in chunk {
                for (s, v) in out.iter_mut().zip(node) {
                    s.values.push(v);
                }
            }
        }
        Ok(out)
    }

    pub fn sample_one(&self, sys: &MagneticSystem, f: &PhaseFunction) -> Result<Sampled> {
        Ok(self.sample(sys, &[f])?.pop().expect("one function"))
    }

    /// `(u, v) = ∫ u v̄ dμ`.
    pub fn inner(&self, u: &Sampled, v: &Sampled) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, w) in self.weights.iter().enumerate() {
            let (a, b) = (&u.values[i], &v.values[i]);
            let mut s = C64::new(0.0, 0.0);
            let (mut ia, mut ib) = (0, 0);
            while ia < a.len() && ib < b.len() {
                match a[ia].0.cmp(&b[ib].0) {
                    std::cmp::Ordering::Less => ia += 1,
                    std::cmp::Ordering::Greater => ib += 1,
                    std::cmp::Ordering::Equal => {
                        s += a[ia].1 * b[ib].1.conj();
                        ia += 1;
                        ib += 1;
                    }
                }
            }
            acc += s * *w;
        }
        acc * TAU
    }

    pub fn norm_sq(&self, u: &Sampled) -> f64 {
        self.mode_norms_sq(u).values().sum()
    }

    /// `‖u_k‖²` for every sampled mode.
    pub fn mode_norms_sq(&self, u: &Sampled) -> BTreeMap<i32, f64> {
        let mut out = BTreeMap::new();
        for (i, w) in self.weights.iter().enumerate() {
            for &(k, v) in &u.values[i] {
                *out.entry(k).or_insert(0.0) += w * v.norm_sqr();
            }
        }
        out.values_mut().for_each(|v| *v *= TAU);
        out
    }

    /// `∫ u dμ`; only mode zero survives the fiber integral.
    pub fn integral(&self, u: &Sampled) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, w) in self.weights.iter().enumerate() {
            if let Some(&(_, v)) = u.values[i].iter().find(|(k, _)| *k == 0) {
                acc += v * *w;
            }
        }
        acc * TAU
    }

    /// Convenience: `(u, v)` for unsampled functions.
    pub fn inner_fn(&self, sys: &MagneticSystem, u: &PhaseFunction, v: &PhaseFunction) -> Result<C64> {
        let s = self.sample(sys, &[u, v])?;
        Ok(self.inner(&s[0], &s[1]))
    }

    pub fn norm_sq_fn(&self, sys: &MagneticSystem, u: &PhaseFunction) -> Result<f64> {
        Ok(self.norm_sq(&self.sample_one(sys, u)?))
    }
}
