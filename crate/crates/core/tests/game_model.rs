mod common;

use common::{any_table, unit_grid};
use evosafe_core::{Intent, Preset, StrategyPair};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair(h: f64, a: f64) -> StrategyPair {
    StrategyPair::new(h, a).unwrap()
}

#[test]
fn type_a_threshold_matches_exact_fraction() {
    // Entries in hundredths: L = (r_dd - r_cd) / (r_cc + r_dd - r_dc - r_cd).
    let (r_cc, r_cd, r_dc, r_dd) = (6551i64, 1793i64, 9680i64, -6923i64);
    let num = r_dd - r_cd;
    let den = r_cc + r_dd - r_dc - r_cd;
    assert_eq!((num, den), (-8716, -11845));
    let exact = num as f64 / den as f64;
    let l = Preset::TypeA.table().msne_threshold();
    assert!((l - exact).abs() < 1e-15);
    assert!((l - 0.73584).abs() < 1e-5);
}

#[test]
fn expected_reward_at_cooperation_and_threshold_matches_sampling() {
    let t = Preset::TypeA.table();
    let pi = pair(1.0, t.msne_threshold());
    let analytic = t.expected_total_reward(pi);
    assert!((analytic - 126.7).abs() < 0.05);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let draw = |rng: &mut ChaCha8Rng, p: f64| if rng.random::<f64>() < p { Intent::Cooperate } else { Intent::Defect };
    for _ in 0..n {
        let ih = draw(&mut rng, pi.pi_h());
        let ia = draw(&mut rng, pi.pi_a());
        let r = t.reward(ih, ia) + t.reward(ia, ih);
        sum += r;
        sum_sq += r * r;
    }
    let mean = sum / n as f64;
    let sd = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - analytic).abs() < 4.0 * sd, "{mean} vs {analytic}");
}

#[test]
fn expected_risk_near_target_of_type_a() {
    let t = Preset::TypeA.table();
    let w = t.expected_risk(pair(1.0, t.msne_threshold()));
    assert!((w - 8.62e-4).abs() < 1e-6);
    assert!(w < 9e-4);
}

proptest! {
    #[test]
    fn threshold_is_interior(t in any_table()) {
        let l = t.msne_threshold();
        prop_assert!(l > 0.0 && l < 1.0);
    }

    #[test]
    fn reward_and_risk_are_affine_in_each_coordinate(
        t in any_table(),
        a in 0.0..=1.0f64,
        h0 in 0.0..=1.0f64,
        h1 in 0.0..=1.0f64,
        s in 0.0..=1.0f64,
    ) {
        let hm = h0 + s * (h1 - h0);
        for f in [
            |t: &evosafe_core::PayoffRiskTable, p| t.expected_total_reward(p),
            |t: &evosafe_core::PayoffRiskTable, p| t.expected_risk(p),
        ] {
            let (y0, y1, ym) = (f(&t, pair(h0, a)), f(&t, pair(h1, a)), f(&t, pair(hm, a)));
            let scale = 1.0 + y0.abs() + y1.abs();
            prop_assert!((ym - (y0 + s * (y1 - y0))).abs() < 1e-11 * scale);
        }
    }

    #[test]
    fn risk_is_symmetric_and_bounded(t in any_table(), h in 0.0..=1.0f64, a in 0.0..=1.0f64) {
        let w = t.expected_risk(pair(h, a));
        prop_assert!((w - t.expected_risk(pair(a, h))).abs() < 1e-15);
        let lo = t.w_cc().min(t.w_cd()).min(t.w_dd());
        let hi = t.w_cc().max(t.w_cd()).max(t.w_dd());
        prop_assert!(w >= lo - 1e-15 && w <= hi + 1e-15);
    }
}

#[test]
fn corners_reproduce_table_entries() {
    for p in Preset::ALL {
        let t = p.table();
        for h in unit_grid(1) {
            for a in unit_grid(1) {
                let w = t.expected_risk(pair(h, a));
                let expected = match (h == 1.0, a == 1.0) {
                    (true, true) => t.w_cc(),
                    (false, false) => t.w_dd(),
                    _ => t.w_cd(),
                };
                assert_eq!(w, expected);
            }
        }
    }
}
