use lorentz_lab::comparison::{const_alpha, const_ca_minus, const_k, ComparisonParams};
use proptest::prelude::*;

fn rho_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -2.0..-0.01f64, 0.01..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn alpha_is_a_root_of_k(n in 2usize..=6, b in 0.1..12.0f64, rho in rho_strategy()) {
        let beta = -b;
        prop_assume!(rho >= 0.0 || b > (n as f64 - 1.0) * (-rho).sqrt() * 1.001);
        let alpha = const_alpha(beta, rho, n).unwrap();
        prop_assert!(alpha > 0.0);
        let k = const_k(&ComparisonParams { n, beta, rho, t: alpha, ..Default::default() }).unwrap();
        prop_assert!(k.abs() <= 1e-10 * b.max(1.0), "K(α) = {k}");
    }

    #[test]
    fn alpha_decreases_in_beta_magnitude(n in 2usize..=6, b in 0.1..10.0f64, db in 0.01..2.0f64, rho in rho_strategy()) {
        prop_assume!(rho >= 0.0 || b > (n as f64 - 1.0) * (-rho).sqrt() * 1.001);
        let a1 = const_alpha(-b, rho, n).unwrap();
        let a2 = const_alpha(-(b + db), rho, n).unwrap();
        prop_assert!(a2 < a1, "α({}) = {a2} vs α({b}) = {a1}", b + db);
    }

    #[test]
    fn k_is_increasing_in_t(n in 2usize..=6, b in 0.1..10.0f64, rho in rho_strategy(), t in 0.05..0.7f64, dt in 0.01..0.3f64) {
        let p = |t| ComparisonParams { n, beta: -b, rho, t, ..Default::default() };
        let (k1, k2) = (const_k(&p(t)).unwrap(), const_k(&p(t + dt)).unwrap());
        prop_assert!(k2 > k1);
    }

    #[test]
    fn ca_minus_in_unit_interval_and_decreasing_in_t(
        n in 2usize..=6, kappa in -9.0..-0.01f64, eta in 0.01..3.0f64, t in 0.0..5.0f64, dt in 0.01..2.0f64,
    ) {
        let p = |t| ComparisonParams { n, kappa, eta, t, ..Default::default() };
        let (c1, c2) = (const_ca_minus(&p(t)).unwrap(), const_ca_minus(&p(t + dt)).unwrap());
        prop_assert!(c1 > 0.0 && c1 <= 1.0);
        prop_assert!(c2 > 0.0 && c2 < c1);
    }
}

#[test]
fn ca_minus_is_one_at_zero_depth() {
    let p = ComparisonParams { n: 4, kappa: -1.0, eta: 0.7, t: 0.0, ..Default::default() };
    assert!((const_ca_minus(&p).unwrap() - 1.0).abs() < 1e-15);
}
