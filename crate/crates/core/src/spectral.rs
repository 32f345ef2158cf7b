//! Spectral differentiation of periodic samples.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `order`-th derivative of a `period`-periodic function given at `n`
/// equispaced samples `f(k·period/n)`. The Nyquist mode is dropped for odd
/// orders.
pub fn periodic_derivative(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    let n = samples.len();
    if n == 0 || order == 0 {
        return samples.to_vec();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    let w = std::f64::consts::TAU / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let m = if 2 * k <= n { k as i64 } else { k as i64 - n as i64 };
        if n % 2 == 0 && 2 * k == n && order % 2 == 1 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= Complex64::new(0.0, w * m as f64).powu(order);
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Like [`periodic_derivative`], but first drops the modes beyond the last
/// one standing clear of the noise plateau. The plateau level is the median
/// modulus over the upper half of the spectrum; modes are kept up to the
/// highest one exceeding `10×` that level.
pub fn denoised_derivative(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    let n = samples.len();
    if n < 8 {
        return periodic_derivative(samples, period, order);
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    let half = n / 2;
    let mag = |m: usize| buf[m].norm().max(buf[(n - m) % n].norm());
    let mut upper: Vec<f64> = (half / 2..=half).map(mag).collect();
    upper.sort_by(f64::total_cmp);
    let noise = upper[upper.len() / 2];
    let cut = if noise == 0.0 { half } else { (0..=half).rev().find(|&m| mag(m) > 10.0 * noise).unwrap_or(0) };
    let w = std::f64::consts::TAU / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let m = if 2 * k <= n { k as i64 } else { k as i64 - n as i64 };
        if m.unsigned_abs() as usize > cut || (n % 2 == 0 && 2 * k == n && order % 2 == 1) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, w * m as f64).powu(order);
        }
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Largest modulus among the top `fraction` of Fourier coefficients, relative
/// to the largest coefficient; a cheap resolution check.
pub fn tail_fraction(samples: &[f64], fraction: f64) -> f64 {
    let n = samples.len();
    if n < 4 {
        return 0.0;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    let half = n / 2;
    let cut = ((1.0 - fraction) * half as f64) as usize;
    let top = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    (cut..=half).map(|k| buf[k].norm()).fold(0.0, f64::max) / top
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn derivative_of_trig() {
        let n = 32;
        let p = 3.0;
        let f: Vec<f64> = (0..n).map(|k| (TAU * 2.0 * k as f64 / n as f64).sin()).collect();
        let d = periodic_derivative(&f, p, 1);
        let d2 = periodic_derivative(&f, p, 2);
        let w = TAU * 2.0 / p;
        for k in 0..n {
            let t = TAU * 2.0 * k as f64 / n as f64;
            assert!((d[k] - w * t.cos()).abs() < 1e-12);
            assert!((d2[k] + w * w * t.sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn denoising_keeps_signal_and_drops_noise() {
        use rand::{Rng, SeedableRng};
        let n = 256;
        let p = 4.0;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f: Vec<f64> = (0..n)
            .map(|k| (TAU * 3.0 * k as f64 / n as f64).cos() + 1e-8 * (rng.random::<f64>() - 0.5))
            .collect();
        let w = TAU * 3.0 / p;
        let raw = periodic_derivative(&f, p, 2);
        let clean = denoised_derivative(&f, p, 2);
        let err = |d: &[f64]| {
            (0..n).map(|k| (d[k] + w * w * (TAU * 3.0 * k as f64 / n as f64).cos()).abs()).fold(0.0, f64::max)
        };
        assert!(err(&clean) < 1e-7, "{}", err(&clean));
        assert!(err(&raw) > 10.0 * err(&clean));
    }

    #[test]
    fn constants_have_zero_derivative() {
        let d = periodic_derivative(&[2.0; 16], 1.0, 1);
        assert!(d.iter().all(|x| x.abs() < 1e-14));
        assert_eq!(tail_fraction(&[2.0; 16], 0.25), 0.0);
    }
}
