use mixdiff::duhamel::{evolve_with, DataDescriptor, EvolveOptions, ProblemSpec, Stepper, TimeGrid};
use mixdiff::rvf::CoefficientH;
use mixdiff::spectral::{apply_semigroup, sup_norm, GridSpec};
use proptest::prelude::*;

fn spec(p: f64, h: Option<CoefficientH<f64>>, rho: f64, u0: DataDescriptor<f64>, w: DataDescriptor<f64>) -> ProblemSpec<f64> {
    ProblemSpec {
        s: 0.5,
        p,
        b: 0.0,
        h,
        rho,
        u0,
        w,
        grid: GridSpec::desk(1).unwrap(),
        delta: None,
    }
}

fn no_guard() -> EvolveOptions<f64> {
    EvolveOptions {
        threshold: Some(1e8),
        convergence_guard: false,
        ..EvolveOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_is_a_fixed_point(p in 1.1..6.0f64, gamma in 0.0..2.0f64) {
        let sp = spec(p, Some(CoefficientH::power(gamma)), 0.0, DataDescriptor::Zero, DataDescriptor::Zero);
        let traj = evolve_with(&sp, &TimeGrid::uniform(5.0, 50), &no_guard()).unwrap();
        prop_assert!(traj.rows.iter().all(|r| r.sup_norm == 0.0 && r.l1_norm == 0.0));
    }

    #[test]
    fn larger_data_never_turns_blow_up_into_global(
        a in 0.2..3.0f64,
        lambda in 1.0..4.0f64,
        p in 1.5..4.0f64,
    ) {
        let run = |amp: f64| {
            let u0 = DataDescriptor::Gaussian { amplitude: amp, width: 1.0 };
            let sp = spec(p, Some(CoefficientH::power(0.0)), 0.0, u0, DataDescriptor::Zero);
            evolve_with(&sp, &TimeGrid::uniform(5.0, 200), &no_guard()).unwrap()
        };
        let base = run(a);
        let scaled = run(lambda * a);
        if let mixdiff::duhamel::RunVerdict::BlowUp { time, .. } = base.verdict {
            prop_assert!(!scaled.verdict.is_global());
            match scaled.verdict {
                mixdiff::duhamel::RunVerdict::BlowUp { time: t2, .. } => prop_assert!(t2 <= time),
                ref v => prop_assert!(false, "scaled run ended {}", v.kind_name()),
            }
        }
        for (r0, r1) in base.rows.iter().zip(&scaled.rows) {
            prop_assert!(r1.sup_norm >= r0.sup_norm * (1.0 - 1e-12));
        }
    }

    #[test]
    fn linear_steps_compose_to_one_semigroup(steps in 1usize..40, horizon in 0.1..10.0f64, width in 1.0..3.0f64) {
        let u0 = DataDescriptor::Gaussian { amplitude: 1.0, width };
        let sp = spec(2.0, None, 0.0, u0, DataDescriptor::Zero);
        let mut stepper = Stepper::new(&sp).unwrap();
        let f0 = u0.realize(&sp.grid).unwrap();
        let nodes = TimeGrid::uniform(horizon, steps).nodes();
        let mut u = f0.clone();
        for w in nodes.windows(2) {
            u = stepper.step(&u, w[0], w[1]).unwrap();
        }
        let direct = apply_semigroup(&f0, 0.5, horizon).unwrap();
        let err = sup_norm(&u.combine(1.0, &direct, -1.0).unwrap()) / sup_norm(&direct);
        prop_assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn forced_mean_is_exact(rho in -0.9..2.0f64, amp in 0.1..2.0f64) {
        let u0 = DataDescriptor::Gaussian { amplitude: 1.0, width: 1.5 };
        let w = DataDescriptor::Bump { amplitude: amp, radius: 2.0 };
        let sp = spec(2.0, None, rho, u0, w);
        let traj = evolve_with(&sp, &TimeGrid::uniform(4.0, 40), &no_guard()).unwrap();
        let m0 = u0.realize(&sp.grid).unwrap().mean();
        let mw = w.realize(&sp.grid).unwrap().mean();
        for r in &traj.rows {
            let expected = m0 + r.t.powf(rho + 1.0) / (rho + 1.0) * mw;
            prop_assert!(((r.mean - expected) / expected).abs() < 1e-10, "t={} {} vs {}", r.t, r.mean, expected);
        }
    }
}

#[test]
fn global_verdicts_survive_step_halving() {
    let u0 = DataDescriptor::Gaussian { amplitude: 0.05, width: 1.0 };
    let mut sp = spec(4.0, Some(CoefficientH::power(0.0)), 0.0, u0, DataDescriptor::Zero);
    sp.grid = GridSpec::new(1, 1024.0, 4096).unwrap();
    let traj = evolve_with(&sp, &TimeGrid::uniform(5.0, 100), &EvolveOptions::default()).unwrap();
    assert!(traj.verdict.is_global());
    let change = traj.refinement_change.unwrap();
    assert!(change <= 0.2, "{change}");
}
