//! Log-domain summation.

use crate::num::Real;

/// `ln(sum exp(x_i))`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let xs: Vec<T> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    let s = xs.iter().fold(T::zero(), |acc, &x| acc + (x - m).exp());
    m + s.ln()
}

/// Natural log of a nonnegative quantity, mapping zero to `-inf`.
pub fn ln_nonneg<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::neg_infinity()
    } else {
        x.ln()
    }
}

/// `ln(n!)` by direct summation; exact enough for the moderate `n` used here.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    (2..=n).fold(T::zero(), |acc, k| acc + T::from_usize_lossy(k).ln())
}

/// Compares two log-domain quantities `ln a <= ln b * (1 + rel)`.
pub fn log_le<T: Real>(ln_a: T, ln_b: T, rel: T) -> bool {
    if ln_a == T::neg_infinity() {
        return true;
    }
    if ln_b == T::neg_infinity() {
        return false;
    }
    ln_a <= ln_b + rel.ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let xs = [0.1f64, -2.0, 3.5];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(xs) - direct).abs() < 1e-14);
    }

    #[test]
    fn survives_huge_exponents() {
        let v = log_sum_exp([1000.0f64, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!(v.is_finite());
    }

    #[test]
    fn empty_is_neg_inf() {
        assert_eq!(log_sum_exp::<f64>([]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn factorial_small() {
        assert!((ln_factorial::<f64>(5) - 120f64.ln()).abs() < 1e-13);
        assert_eq!(ln_factorial::<f64>(0), 0.0);
        assert!((ln_factorial::<f32>(4) - 24f32.ln()).abs() < 1e-5);
    }
}
