use mixdiff::spectral::{apply_semigroup, kernel_field, lp_norm, sup_norm, Field, GridSpec, Symbol};
use proptest::prelude::*;

fn desk() -> GridSpec<f64> {
    GridSpec::desk(1).unwrap()
}

/// Sum of two Gaussians, nonnegative and resolved on the desk grid.
fn blob(grid: GridSpec<f64>, c1: f64, w1: f64, a2: f64, c2: f64, w2: f64) -> Field<f64> {
    Field::from_fn(grid, |x| {
        (-(x[0] - c1).powi(2) / (w1 * w1)).exp() + a2 * (-(x[0] - c2).powi(2) / (w2 * w2)).exp()
    })
    .unwrap()
}

fn rel_sup_diff(a: &Field<f64>, b: &Field<f64>) -> f64 {
    let diff = a.combine(1.0, b, -1.0).unwrap();
    sup_norm(&diff) / sup_norm(b)
}

prop_compose! {
    fn blobs()(c1 in -8.0..8.0f64, w1 in 1.0..4.0f64, a2 in 0.0..2.0f64, c2 in -8.0..8.0f64, w2 in 1.0..4.0f64)
        -> Field<f64> {
        blob(desk(), c1, w1, a2, c2, w2)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_composes(f in blobs(), s in 0.1..0.95f64, t1 in 0.01..5.0f64, t2 in 0.01..5.0f64) {
        let two_steps = apply_semigroup(&apply_semigroup(&f, s, t1).unwrap(), s, t2).unwrap();
        let one_step = apply_semigroup(&f, s, t1 + t2).unwrap();
        prop_assert!(rel_sup_diff(&two_steps, &one_step) < 1e-12);
    }

    #[test]
    fn mass_is_conserved(f in blobs(), s in 0.1..0.95f64, t in 0.01..20.0f64) {
        let m0 = f.integral();
        let m1 = apply_semigroup(&f, s, t).unwrap().integral();
        prop_assert!(((m1 - m0) / m0).abs() < 1e-12);
    }

    #[test]
    fn contractive_in_sup_and_l1(f in blobs(), s in 0.1..0.95f64, t in 0.01..20.0f64) {
        let g = apply_semigroup(&f, s, t).unwrap();
        prop_assert!(sup_norm(&g) <= sup_norm(&f) * (1.0 + 1e-10));
        prop_assert!(lp_norm(&g, 1.0).unwrap() <= lp_norm(&f, 1.0).unwrap() * (1.0 + 1e-10));
    }

    #[test]
    fn positivity_is_preserved(f in blobs(), s in 0.1..0.95f64, t in 0.001..20.0f64) {
        let g = apply_semigroup(&f, s, t).unwrap();
        prop_assert!(g.min_value() >= -1e-10 * sup_norm(&g));
    }

    #[test]
    fn linear(f in blobs(), g in blobs(), a in -3.0..3.0f64, b in -3.0..3.0f64, s in 0.1..0.95f64, t in 0.01..5.0f64) {
        let lhs = apply_semigroup(&f.combine(a, &g, b).unwrap(), s, t).unwrap();
        let rhs = apply_semigroup(&f, s, t).unwrap().combine(a, &apply_semigroup(&g, s, t).unwrap(), b).unwrap();
        let scale = sup_norm(&apply_semigroup(&f, s, t).unwrap()) * a.abs()
            + sup_norm(&apply_semigroup(&g, s, t).unwrap()) * b.abs();
        prop_assert!(sup_norm(&lhs.combine(1.0, &rhs, -1.0).unwrap()) <= 1e-13 * scale.max(1e-300));
    }
}

#[test]
fn two_dimensional_mass_and_positivity() {
    let grid = GridSpec::<f64>::desk(2).unwrap();
    let f = Field::from_fn(grid, |x: &[f64]| (-(x[0] * x[0] + 2.0 * x[1] * x[1]) / 4.0).exp()).unwrap();
    for &t in &[0.1, 1.0, 10.0] {
        let g = apply_semigroup(&f, 0.5, t).unwrap();
        assert!(((g.integral() - f.integral()) / f.integral()).abs() < 1e-12);
        assert!(g.min_value() >= -1e-10 * sup_norm(&g));
    }
}

#[test]
fn kernel_field_has_unit_mass_on_the_box() {
    for &s in &[0.25, 0.5, 0.75] {
        for &t in &[0.1, 1.0, 10.0] {
            let k = kernel_field(&desk(), &Symbol::Mixed { s }, t).unwrap();
            assert!((k.integral() - 1.0).abs() < 1e-12, "s={s} t={t}");
        }
    }
}
