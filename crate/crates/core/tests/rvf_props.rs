use mixdiff::fit::geometric_points;
use mixdiff::rvf::{
    asymp_int_ratio, index_estimate, karamata_head_ratio, karamata_tail_ratio, make_from_representation,
    slow_variation_ratio_test, CoefficientH, RepresentationSpec, SlowlyVaryingSpec,
};
use proptest::prelude::*;

const XS: [f64; 3] = [0.5, 2.0, 10.0];

fn lambdas() -> Vec<f64> {
    geometric_points(1e2, 1e12, 11)
}

#[test]
fn constant_and_vanishing_epsilon_pass_the_ratio_test_past_1e8() {
    let rep = RepresentationSpec::new(1.0, |x: f64| 2.0 + 1.0 / x, 2.0, |t: f64| 1.0 / (1.0 + t)).unwrap();
    for ell in [SlowlyVaryingSpec::constant(3.0).unwrap(), make_from_representation(rep).unwrap()] {
        let table = slow_variation_ratio_test(&ell, &XS, &lambdas(), 0.01).unwrap();
        for (lambda, row) in table.lambda_values.iter().zip(&table.ratios) {
            if *lambda >= 1e8 {
                assert!(row.iter().all(|r| (r - 1.0).abs() <= 0.01), "{ell:?} λ={lambda}: {row:?}");
            }
        }
        assert!(table.pass);
    }
}

proptest! {
    #[test]
    fn log_power_ratios_follow_the_closed_form(alpha in -2.0..2.0f64) {
        let ell = SlowlyVaryingSpec::LogPower(alpha);
        let table = slow_variation_ratio_test(&ell, &XS, &lambdas(), 0.01).unwrap();
        let mut previous = vec![f64::INFINITY; XS.len()];
        for (lambda, row) in table.lambda_values.iter().zip(&table.ratios) {
            for (k, (x, r)) in XS.iter().zip(row).enumerate() {
                let exact = ((lambda * x).ln() / lambda.ln()).powf(alpha);
                prop_assert!((r - exact).abs() < 1e-12 * exact);
                let dev = (r - 1.0).abs();
                prop_assert!(dev <= previous[k] + 1e-15);
                previous[k] = dev;
            }
        }
    }

    #[test]
    fn head_ratio_of_a_power_is_exact(k in 0usize..4, x in 1e-3..1e6f64) {
        let rho = [-0.5, 0.0, 1.0, 2.0][k];
        let r = karamata_head_ratio(|t: f64| t.powf(rho), x).unwrap();
        prop_assert!((r.ratio - (rho + 1.0)).abs() < 1e-10, "{}", r.ratio);
    }

    #[test]
    fn tail_ratio_of_a_power_is_exact(k in 0usize..3, x in 1e-2..1e6f64) {
        let rho = [-1.5, -2.0, -3.0][k];
        let r = karamata_tail_ratio(|t: f64| t.powf(rho), x).unwrap();
        prop_assert!((r.ratio - (-rho - 1.0)).abs() < 1e-6, "{}", r.ratio);
    }

    #[test]
    fn index_estimate_error_is_log_ell_over_log_x(rho in -2.0..2.0f64, alpha in -2.0..2.0f64, use_log in any::<bool>()) {
        let ell = if use_log { SlowlyVaryingSpec::LogPower(alpha) } else { SlowlyVaryingSpec::ExpSqrtLog };
        let grid = geometric_points(1e2, 1e10, 17);
        let est = index_estimate(|x: f64| Ok(x.powf(rho) * ell.eval(x)?), &grid).unwrap();
        let x_max = 1e10f64;
        let analytic = ell.eval(x_max).unwrap().ln() / x_max.ln();
        prop_assert!((est.rho_hat - rho - analytic).abs() < 1e-12);
    }
}

#[test]
fn asymp_int_ratio_of_pure_powers_is_one_and_log_factor_deviation_shrinks() {
    for &gamma in &[-0.5f64, 0.0, 1.0] {
        for &beta in &[-1.0f64, 0.5] {
            let power = CoefficientH::power(gamma);
            assert!((asymp_int_ratio(&power, beta, 0.25, 0.8, 1e6).unwrap().ratio - 1.0).abs() < 1e-10);
            let h = CoefficientH::new(gamma, SlowlyVaryingSpec::LogPower(1.0));
            let devs: Vec<f64> = geometric_points(1e3, 1e12, 10)
                .iter()
                .map(|&r| (asymp_int_ratio(&h, beta, 0.25, 0.8, r).unwrap().ratio - 1.0).abs())
                .collect();
            assert!(devs.windows(2).all(|w| w[1] < w[0]), "γ={gamma} β={beta}: {devs:?}");
        }
    }
}

#[test]
fn decaying_power_times_slow_factor_drops_below_threshold() {
    let grid = geometric_points(1e1f64, 1e10, 91);
    let cases: Vec<(f64, SlowlyVaryingSpec<f64>)> = vec![
        (-1.0, SlowlyVaryingSpec::LogPower(1.0)),
        (-1.5, SlowlyVaryingSpec::LogPower(1.0)),
        (-2.0, SlowlyVaryingSpec::LogPower(1.0)),
        (-1.5, SlowlyVaryingSpec::ExpSqrtLog),
        (-2.0, SlowlyVaryingSpec::ExpSqrtLog),
    ];
    for (alpha, ell) in cases {
        for &beta in &[-1.0, 1.0, 2.0] {
            let v: Vec<f64> = grid.iter().map(|&x| x.powf(alpha) * ell.eval(x).unwrap().powf(beta)).collect();
            let tail = &v[v.len() / 2..];
            assert!(tail.windows(2).all(|w| w[1] < w[0]), "α={alpha} β={beta} {ell:?}");
            assert!(*v.last().unwrap() < 1e-6);
        }
    }
}
