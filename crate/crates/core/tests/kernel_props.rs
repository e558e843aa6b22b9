use mixdiff::kernels::{
    fractional_profile, mixed_kernel, poisson_kernel_at_time, poisson_profile, symbol_kernel, KernelParams, Symbol,
};
use mixdiff::spectral::{kernel_field, GridSpec};
use proptest::prelude::*;

proptest! {
    #[test]
    fn poisson_scaling(dim in 1usize..=2, t in 0.01..100.0f64, x in 0.0..50.0f64) {
        let lhs = poisson_kernel_at_time(dim, x, t).unwrap();
        let e = dim as f64;
        let rhs = t.powf(-e) * poisson_profile(dim, x / t);
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }

    #[test]
    fn mixed_kernel_is_even(s in 0.3..0.9f64, t in 0.5..5.0f64, r in 0.0..10.0f64) {
        let params = KernelParams::new(s, 1, t).unwrap();
        prop_assert_eq!(mixed_kernel(&params, r, 1 << 15).unwrap(), mixed_kernel(&params, -r, 1 << 15).unwrap());
    }
}

#[test]
fn numeric_profiles_obey_the_scaling_law() {
    for &s in &[0.4f64, 0.75] {
        for &t in &[0.5f64, 2.0] {
            for &r in &[0.0, 0.7, 3.0] {
                let direct = symbol_kernel(Symbol::Fractional { s }, 1, t, r, 1 << 18).unwrap();
                let profile = fractional_profile(s, 1, &[r * t.powf(-1.0 / (2.0 * s))]).unwrap();
                let scaled = t.powf(-1.0 / (2.0 * s)) * profile.values[0];
                assert!(((direct - scaled) / scaled).abs() < 1e-5, "s={s} t={t} r={r}: {direct} vs {scaled}");
            }
        }
    }
}

#[test]
fn profiles_are_nonnegative() {
    let radii: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
    for dim in 1..=2 {
        for &s in &[0.2, 0.5, 0.8] {
            let table = fractional_profile(s, dim, &radii).unwrap();
            let peak = table.values[0];
            assert!(table.values.iter().all(|v| *v >= -1e-8 * peak), "dim={dim} s={s}");
        }
    }
    for &s in &[0.2, 0.5, 0.8] {
        let params = KernelParams::new(s, 1, 1.0).unwrap();
        let peak = mixed_kernel(&params, 0.0, 4096).unwrap();
        for &r in &radii {
            assert!(mixed_kernel(&params, r, 4096).unwrap() >= -1e-8 * peak);
        }
    }
}

#[test]
fn kernel_field_is_radially_symmetric() {
    let grid = GridSpec::<f64>::desk(1).unwrap();
    let k = kernel_field(&grid, &Symbol::Mixed { s: 0.5 }, 1.0).unwrap();
    let c = grid.center_index();
    let peak = k.values()[c];
    for j in 1..c {
        assert!((k.values()[c + j] - k.values()[c - j]).abs() <= 1e-14 * peak);
    }
}

#[test]
fn half_order_profile_matches_the_poisson_kernel() {
    let radii: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
    for dim in 1..=2 {
        let table = fractional_profile(0.5, dim, &radii).unwrap();
        for (r, v) in radii.iter().zip(&table.values) {
            let exact = poisson_profile(dim, *r);
            assert!(((v - exact) / exact).abs() < 1e-3, "dim={dim} r={r}: {v} vs {exact}");
        }
    }
}
