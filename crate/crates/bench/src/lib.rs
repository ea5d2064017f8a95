//! Shared fixtures for the criterion targets.

use qrt_core::{build_paley, curve_points, find_curve_with_order, GroupTable, Tournament};

pub fn paley(p: u64) -> Tournament {
    build_paley(p).expect("benchmark prime is admissible")
}

pub fn elliptic_table(p: u64, n: u64) -> GroupTable {
    let curve = find_curve_with_order(p, n).expect("curve exists");
    curve_points(&curve).expect("order matches")
}
