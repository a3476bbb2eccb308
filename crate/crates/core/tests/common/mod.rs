#![allow(dead_code)]

use evosafe_core::game::validate_table;
use evosafe_core::{PayoffRiskTable, RawTable};
use proptest::prelude::*;

/// Tables satisfying the ordering assumptions, with arbitrary risks.
pub fn any_table() -> impl Strategy<Value = PayoffRiskTable> {
    (-300.0..300.0f64, 1e-3..300.0f64, -300.0..300.0f64, 1e-3..300.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64)
        .prop_filter_map("assumptions", |(r_cd, below, r_cc, above, w_cc, w_cd, w_dd)| {
            validate_table(RawTable { r_cc, r_cd, r_dc: r_cc + above, r_dd: r_cd - below, w_cc, w_cd, w_dd }).ok()
        })
}

/// `n + 1` evenly spaced points of `[0, 1]`, endpoints exact.
pub fn unit_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}
