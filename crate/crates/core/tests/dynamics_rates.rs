mod common;

use common::{any_table, unit_grid};
use evosafe_core::{rate, rate_generic, DynamicsKind, DynamicsSpec, Preset, StrategyPair};
use proptest::prelude::*;

fn pair(h: f64, a: f64) -> StrategyPair {
    StrategyPair::new(h, a).unwrap()
}

#[test]
fn closed_and_generic_forms_agree_on_grid() {
    let grid = unit_grid(49);
    for p in Preset::ALL {
        let t = p.table();
        for kind in DynamicsKind::ALL {
            let spec = DynamicsSpec::pure(kind);
            for &h in &grid {
                for &a in &grid {
                    let (c, g) = (rate(&spec, pair(h, a), &t), rate_generic(&spec, pair(h, a), &t));
                    assert!((c - g).abs() < 1e-12, "{} {} ({h}, {a}): {c} vs {g}", p.name(), kind.name());
                }
            }
        }
    }
}

#[test]
fn boundary_states_absorb_mixed_dynamics() {
    for p in Preset::ALL {
        let t = p.table();
        let l = t.msne_threshold();
        let spec = DynamicsSpec::uniform_mixed();
        for a in unit_grid(40) {
            if a > l {
                assert_eq!(rate(&spec, pair(0.0, a), &t), 0.0);
                assert!(rate(&spec, pair(1.0, a), &t) < 0.0);
            } else if a < l {
                assert_eq!(rate(&spec, pair(1.0, a), &t), 0.0);
                assert!(rate(&spec, pair(0.0, a), &t) > 0.0);
            }
        }
    }
}

fn weights() -> impl Strategy<Value = DynamicsSpec> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_filter("non-zero", |(r, b, s)| r + b + s > 1e-3).prop_map(
        |(r, b, s)| {
            let sum = r + b + s;
            let (r, b) = (r / sum, b / sum);
            DynamicsSpec::mixed(r, b, 1.0 - r - b).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn sign_follows_agent_side_of_threshold(
        t in any_table(),
        spec in weights(),
        h in 1e-6..(1.0 - 1e-6),
        a in 0.0..=1.0f64,
    ) {
        let r = rate(&spec, pair(h, a), &t);
        let l = t.msne_threshold();
        if a < l {
            prop_assert!(r > 0.0);
        } else if a > l {
            prop_assert!(r < 0.0);
        } else {
            prop_assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn rate_at_threshold_is_zero(t in any_table(), spec in weights(), h in 0.0..=1.0f64) {
        prop_assert_eq!(rate(&spec, pair(h, t.msne_threshold()), &t), 0.0);
    }

    #[test]
    fn unit_interval_is_forward_invariant(t in any_table(), spec in weights(), a in 0.0..=1.0f64) {
        prop_assert!(rate(&spec, pair(0.0, a), &t) >= 0.0);
        prop_assert!(rate(&spec, pair(1.0, a), &t) <= 0.0);
    }

    #[test]
    fn mixed_rate_is_weighted_sum(t in any_table(), spec in weights(), h in 0.0..=1.0f64, a in 0.0..=1.0f64) {
        let [wr, wb, ws] = spec.weights();
        let pi = pair(h, a);
        let parts = wr * rate(&DynamicsSpec::replicator(), pi, &t)
            + wb * rate(&DynamicsSpec::bnn(), pi, &t)
            + ws * rate(&DynamicsSpec::smith(), pi, &t);
        let r = rate(&spec, pi, &t);
        prop_assert!((r - parts).abs() < 1e-10 * (1.0 + r.abs()));
    }
}
