use maglab::identity::CarlemanWeights;
use proptest::prelude::*;

proptest! {
    #[test]
    fn recurrences_are_strict_for_positive_sigma(sigma in 1e-3f64..10.0, k_max in 3usize..200) {
        let w = CarlemanWeights::<f64>::new(sigma, k_max).unwrap();
        let c = w.certify();
        prop_assert!(c.holds(), "{:?}", c);
        // the factorial step has slack exactly σ, the σ step slack ln 8
        prop_assert!((c.factorial_step - sigma).abs() < 1e-9 * sigma.max(1.0));
        prop_assert!((c.sigma_step - 8f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn weights_are_even_and_increasing(sigma in 1e-3f64..10.0, k in 1i32..64) {
        let w = CarlemanWeights::<f64>::new(sigma, 64).unwrap();
        prop_assert_eq!(w.log_gamma_sq(k), w.log_gamma_sq(-k));
        prop_assert!(w.log_gamma_sq(k) > w.log_gamma_sq(k - 1));
        // γ_k² = 8^k k! e^{kσ}
        let direct = (1..=k).map(|j| (8.0 * j as f64).ln() + sigma).sum::<f64>();
        prop_assert!((w.log_gamma_sq(k) - direct).abs() < 1e-9 * direct.max(1.0));
    }
}

#[test]
fn nonpositive_sigma_is_refused() {
    for s in [0.0, -0.5, f64::NAN] {
        let e = CarlemanWeights::<f64>::new(s, 64).unwrap_err().to_string();
        assert!(e.contains("sigma"), "{e}");
    }
}
