use evosafe_core::ode::OdeOptions;
use evosafe_core::{
    integrate_until, simulate_ode, ClosedLoop, DynamicsKind, DynamicsSpec, PolicySpec, Preset, Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run(preset: Preset, dynamics: DynamicsSpec, policy: &PolicySpec, h0: f64, opts: OdeOptions) -> Trajectory {
    let table = preset.table();
    let system = ClosedLoop { table: &table, dynamics: &dynamics, policy };
    simulate_ode(&system, h0, opts).unwrap()
}

fn policies(preset: Preset) -> Vec<PolicySpec> {
    let t = preset.table();
    vec![PolicySpec::dwsc(&t), PolicySpec::msne(&t), PolicySpec::proposed(&t, preset.reference_epsilon(), 1.0).unwrap()]
}

#[test]
fn always_cooperating_agents_drive_humans_to_defection() {
    let t = Preset::TypeA.table();
    let traj = run(
        Preset::TypeA,
        DynamicsSpec::uniform_mixed(),
        &PolicySpec::dwsc(&t),
        0.9,
        OdeOptions { dt: 1e-3, steps: 100_000, record_every: 100 },
    );
    let end = traj.last();
    assert!(end.pi_h < 1e-3);
    assert!((end.exp_risk - 0.00109).abs() < 1e-6);
    for w in traj.samples.windows(2) {
        assert!(w[1].pi_h <= w[0].pi_h);
    }
}

#[test]
fn dwsc_decreases_monotonically_for_every_rule_and_type() {
    for p in Preset::ALL {
        let t = p.table();
        for kind in DynamicsKind::ALL {
            let traj = run(
                p,
                DynamicsSpec::pure(kind),
                &PolicySpec::dwsc(&t),
                0.95,
                OdeOptions { dt: 1e-3, steps: 20_000, record_every: 1 },
            );
            for w in traj.samples.windows(2) {
                assert!(w[1].pi_h <= w[0].pi_h, "{} {}", p.name(), kind.name());
            }
        }
    }
}

#[test]
fn proposed_policy_reaches_type_a_target() {
    let t = Preset::TypeA.table();
    let policy = PolicySpec::proposed(&t, 9e-4, 1.0).unwrap();
    let traj = run(Preset::TypeA, DynamicsSpec::uniform_mixed(), &policy, 0.9, OdeOptions::default());
    let end = traj.last();
    assert!((end.pi_h - 1.0).abs() < 1e-3);
    assert!((end.pi_a - t.msne_threshold()).abs() < 1e-3);
    assert!(end.exp_risk <= 9e-4);
}

#[test]
fn no_clamping_for_moderate_steps() {
    for p in Preset::ALL {
        for policy in policies(p) {
            for kind in DynamicsKind::ALL {
                for h0 in [0.0, 0.05, 0.5, 0.95, 1.0] {
                    let traj = run(
                        p,
                        DynamicsSpec::pure(kind),
                        &policy,
                        h0,
                        OdeOptions { dt: 1e-2, steps: 20_000, record_every: 1000 },
                    );
                    assert_eq!(traj.meta.clamp_activations, 0, "{} {} {h0}", p.name(), kind.name());
                }
            }
        }
    }
}

#[test]
fn halving_the_step_barely_moves_the_endpoint() {
    for p in Preset::ALL {
        for policy in policies(p) {
            let coarse = OdeOptions { dt: 1e-3, steps: 20_000, record_every: 20_000 };
            let fine = OdeOptions { dt: 5e-4, steps: 40_000, record_every: 40_000 };
            let a = run(p, DynamicsSpec::uniform_mixed(), &policy, 0.6, coarse);
            let b = run(p, DynamicsSpec::uniform_mixed(), &policy, 0.6, fine);
            assert!((a.last().pi_h - b.last().pi_h).abs() < 1e-6, "{}", p.name());
            assert!((a.last().t - b.last().t).abs() < 1e-9);
        }
    }
}

#[test]
fn convergence_to_the_optimum_from_random_starts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in Preset::ALL {
        let t = p.table();
        let eps = p.reference_epsilon();
        let policy = PolicySpec::proposed(&t, eps, 1.0).unwrap();
        let target = policy.target().unwrap().optimum.point.pi_h();
        for kind in DynamicsKind::ALL {
            let dynamics = DynamicsSpec::pure(kind);
            let system = ClosedLoop { table: &t, dynamics: &dynamics, policy: &policy };
            let dt = system.stable_dt(0.5, 1.0);
            for _ in 0..3 {
                let h0 = rng.random_range(0.05..0.95);
                let settled = integrate_until(&system, h0, dt, 20_000_000, 1000, |pi| {
                    (pi.pi_h() - target).abs() < 1e-3 && t.expected_risk(pi) <= eps + 1e-9
                })
                .unwrap();
                assert!(settled.converged, "{} {} {h0}", p.name(), kind.name());
            }
        }
    }
}
