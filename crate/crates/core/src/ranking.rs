//! Maximum consistent edges C(T): exact subset DP for small n, insertion
//! local search for the rest, the spectral upper bound, and the
//! recursive-bisection certificate with its exact telescoping identity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::tournament::{Ranking, Tournament, VertexSet};

/// Default vertex cap for the exact subset DP (≈1M states).
pub const DEFAULT_DP_CAP: usize = 20;
/// Absolute cap; 2²⁴ DP states is as far as desk memory sensibly goes.
pub const MAX_DP_CAP: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("n = {n} exceeds the exact-solver cap {cap}")]
    OverCap { n: usize, cap: usize },
}

/// A ranking with its consistent-edge count and how it was obtained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankingResult {
    pub best_sigma: Ranking,
    pub value: u64,
    pub exact: bool,
    pub method: String,
}

/// C(T) by Held–Karp-style DP over vertex subsets: the vertex appointed the
/// worst remaining rank collects the consistent edges pointing into it from
/// the rest. Exact; `cap` (≤ 24) guards the 2ⁿ table.
pub fn exact_max_consistent(t: &Tournament, cap: usize) -> Result<RankingResult, RankError> {
    let n = t.n();
    let cap = cap.min(MAX_DP_CAP);
    if n > cap {
        return Err(RankError::OverCap { n, cap });
    }
    let in_masks: Vec<u32> = {
        let mut masks = vec![0u32; n];
        for u in 0..n {
            for v in 0..n {
                if u != v && t.has_edge(u, v) {
                    masks[v] |= 1 << u;
                }
            }
        }
        masks
    };
    let full: u32 = (1u32 << n) - 1; // n ≤ 24 here
    let mut best = vec![0u16; 1usize << n];
    for mask in 1..=full {
        let mut value = 0u16;
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = mask & !(1 << v);
            let cand = best[rest as usize] + (in_masks[v] & rest).count_ones() as u16;
            value = value.max(cand);
        }
        best[mask as usize] = value;
    }
    // walk back down, always taking the smallest qualifying vertex
    let mut ranks = vec![0u32; n];
    let mut mask = full;
    while mask != 0 {
        let rank = mask.count_ones();
        let mut bits = mask;
        loop {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = mask & !(1 << v);
            if best[rest as usize] + (in_masks[v] & rest).count_ones() as u16
                == best[mask as usize]
            {
                ranks[v] = rank;
                mask = rest;
                break;
            }
        }
    }
    let sigma = Ranking::new(ranks).expect("DP walk assigns each rank once");
    let value = best[full as usize] as u64;
    debug_assert_eq!(t.consistent_edges(&sigma), value);
    Ok(RankingResult { best_sigma: sigma, value, exact: true, method: "subset-dp".into() })
}

#[derive(Debug, Clone)]
pub struct HeuristicOptions {
    pub restarts: u32,
    pub seed: u64,
    pub threads: usize,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions { restarts: 8, seed: 0, threads: 1 }
    }
}

/// Lower-bound witness for C(T): first start from the out-degree order
/// (ties by vertex index), then seeded shuffles, each polished by
/// first-improvement single-vertex insertion to a local optimum; the best
/// ranking or its reversal — whichever scores higher — wins.
pub fn heuristic_max_consistent(t: &Tournament, options: &HeuristicOptions) -> RankingResult {
    let n = t.n();
    let restarts = options.restarts.max(1);
    let run_restart = |index: u32| -> (u64, Vec<usize>) {
        let mut order: Vec<usize> = (0..n).collect();
        if index == 0 {
            let degrees = t.out_degrees();
            order.sort_by_key(|&v| (std::cmp::Reverse(degrees[v]), v));
        } else {
            rng::shuffle(&mut rng::derived(options.seed, index as u64), &mut order);
        }
        let value = local_search(t, &mut order);
        (value, order)
    };
    let results: Vec<(u32, u64, Vec<usize>)> = if options.threads <= 1 || restarts == 1 {
        (0..restarts).map(|i| {
            let (v, o) = run_restart(i);
            (i, v, o)
        }).collect()
    } else {
        let workers = options.threads.min(restarts as usize);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let run = &run_restart;
                    scope.spawn(move || {
                        let mut out = Vec::new();
                        let mut i = w as u32;
                        while i < restarts {
                            let (v, o) = run(i);
                            out.push((i, v, o));
                            i += workers as u32;
                        }
                        out
                    })
                })
                .collect();
            let mut all: Vec<_> = handles
                .into_iter()
                .flat_map(|h| h.join().expect("restart worker panicked"))
                .collect();
            all.sort_by_key(|&(i, _, _)| i);
            all
        })
    };
    let (_, mut value, order) = results
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))) // ties → lowest index
        .expect("at least one restart");
    let mut sigma = Ranking::from_order(&order);
    let reversed_value = t.edge_count() - value;
    if reversed_value > value {
        sigma = sigma.reversed();
        value = reversed_value;
    }
    debug_assert_eq!(t.consistent_edges(&sigma), value);
    RankingResult { best_sigma: sigma, value, exact: false, method: "insertion-local-search".into() }
}

/// First-improvement insertion local search; scans vertices in rank order,
/// candidate positions left to right. Returns the local optimum's value.
fn local_search(t: &Tournament, order: &mut Vec<usize>) -> u64 {
    let n = order.len();
    let mut value = t.consistent_edges(&Ranking::from_order(order)) as i64;
    if n < 2 {
        return value as u64;
    }
    let mut gain = vec![0i64; n];
    loop {
        let mut improved = false;
        for pos in 0..n {
            let v = order[pos];
            // gain[j]: change in consistent edges if v moves to position j
            let mut acc = 0i64;
            for j in (0..pos).rev() {
                acc += if t.has_edge(v, order[j]) { 1 } else { -1 };
                gain[j] = acc;
            }
            acc = 0;
            for j in pos + 1..n {
                acc += if t.has_edge(order[j], v) { 1 } else { -1 };
                gain[j] = acc;
            }
            gain[pos] = 0;
            if let Some(j) = (0..n).find(|&j| gain[j] > 0) {
                value += gain[j];
                order.remove(pos);
                order.insert(j, v); // same index works on either side of pos
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    debug_assert_eq!(value as u64, t.consistent_edges(&Ranking::from_order(order)));
    value as u64
}

/// n(n−1)/4 + λ·n·log₂(2n) — the spectral ceiling on C(T).
pub fn theorem_bound(n: u64, lambda: f64) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) / 4.0 + lambda * nf * (2.0 * nf).log2()
}

/// (n(n−1)/4, n(n−1)/2): what C(T) must respect for any tournament.
pub fn trivial_bounds(n: u64) -> (f64, u64) {
    let high = n * n.saturating_sub(1) / 2;
    (high as f64 / 2.0, high)
}

/// One level of the recursive bisection: the signed block-pair differences
/// e(A₁,A₂) − e(A₂,A₁) recorded at this depth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateLevel {
    pub level: u32,
    pub differences: Vec<i64>,
    pub sum: i64,
    pub abs_sum: u64,
    /// 2λ·2^(r−1) when λ was supplied.
    pub bound: Option<f64>,
    pub exceeds_bound: bool,
}

/// The recursive-bisection decomposition of C(T,σ) − C(T,σ′): split the
/// σ-order in half (better half first), record the arc-count difference
/// across the split, recurse. Summing every difference telescopes exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BisectionCertificate {
    pub n: u64,
    /// Depth: smallest r with n ≤ 2^r.
    pub r: u32,
    pub levels: Vec<CertificateLevel>,
    pub total: i64,
    pub sigma_value: u64,
    pub sigma_reverse_value: u64,
    pub lambda: Option<f64>,
    pub flagged_levels: Vec<u32>,
}

/// Build the certificate. `lambda` only annotates level bounds (callers
/// without a spectrum pass `None`); the identity itself is unconditional.
pub fn bisection_certificate(
    t: &Tournament,
    sigma: &Ranking,
    lambda: Option<f64>,
) -> BisectionCertificate {
    let n = t.n();
    assert_eq!(sigma.n(), n, "ranking built for a different n");
    let r = (n as u64).next_power_of_two().trailing_zeros();
    let order = sigma.order();
    let mut diffs: Vec<Vec<i64>> = vec![Vec::new(); r as usize];
    split(t, &order, 1, &mut diffs);
    let bound = lambda.map(|l| 2.0 * l * (1u64 << r.saturating_sub(1)) as f64);
    let mut levels = Vec::with_capacity(r as usize);
    let mut flagged = Vec::new();
    for (i, differences) in diffs.into_iter().enumerate() {
        let level = i as u32 + 1;
        let sum = differences.iter().sum();
        let abs_sum = differences.iter().map(|d| d.unsigned_abs()).sum();
        let exceeds = bound.is_some_and(|b| abs_sum as f64 > b + 1e-9);
        if exceeds {
            flagged.push(level);
        }
        levels.push(CertificateLevel { level, differences, sum, abs_sum, bound, exceeds_bound: exceeds });
    }
    let total: i64 = levels.iter().map(|l| l.sum).sum();
    let sigma_value = t.consistent_edges(sigma);
    let sigma_reverse_value = t.consistent_edges(&sigma.reversed());
    assert_eq!(
        total,
        sigma_value as i64 - sigma_reverse_value as i64,
        "telescoping identity must hold exactly"
    );
    BisectionCertificate {
        n: n as u64,
        r,
        levels,
        total,
        sigma_value,
        sigma_reverse_value,
        lambda,
        flagged_levels: flagged,
    }
}

fn split(t: &Tournament, block: &[usize], level: u32, diffs: &mut Vec<Vec<i64>>) {
    if block.len() < 2 {
        return;
    }
    let mid = block.len().div_ceil(2); // highly ranked half gets the extra vertex
    let (top, bottom) = block.split_at(mid);
    let a = VertexSet::from_iter(t.n(), top.iter().copied());
    let b = VertexSet::from_iter(t.n(), bottom.iter().copied());
    let diff = t.edges_between(&a, &b) as i64 - t.edges_between(&b, &a) as i64;
    diffs[level as usize - 1].push(diff);
    split(t, top, level + 1, diffs);
    split(t, bottom, level + 1, diffs);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_cycle() -> Tournament {
        Tournament::from_matrix(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap()
    }

    fn brute_force(t: &Tournament) -> u64 {
        let n = t.n();
        let mut order: Vec<usize> = (0..n).collect();
        let mut best = 0;
        // Heap's algorithm
        let mut c = vec![0usize; n];
        best = best.max(t.consistent_edges(&Ranking::from_order(&order)));
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    order.swap(0, i);
                } else {
                    order.swap(c[i], i);
                }
                best = best.max(t.consistent_edges(&Ranking::from_order(&order)));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        best
    }

    #[test]
    fn dp_three_cycle_is_two() {
        let r = exact_max_consistent(&three_cycle(), DEFAULT_DP_CAP).unwrap();
        assert_eq!(r.value, 2);
        assert!(r.exact);
        assert_eq!(three_cycle().consistent_edges(&r.best_sigma), 2);
    }

    #[test]
    fn dp_transitive_is_all_edges() {
        for n in [4usize, 9, 16] {
            let t = Tournament::from_orientation(n, |_, _| true);
            let r = exact_max_consistent(&t, 16).unwrap();
            assert_eq!(r.value, t.edge_count());
        }
    }

    #[test]
    fn dp_cap_is_enforced() {
        let t = Tournament::random(21, 0);
        assert_eq!(
            exact_max_consistent(&t, 20).unwrap_err(),
            RankError::OverCap { n: 21, cap: 20 }
        );
        // requested caps above the hard maximum clamp down
        let t = Tournament::random(25, 0);
        assert_eq!(
            exact_max_consistent(&t, 30).unwrap_err(),
            RankError::OverCap { n: 25, cap: 24 }
        );
    }

    #[test]
    fn dp_matches_brute_force_small() {
        for seed in 0..10 {
            for n in 1..=7 {
                let t = Tournament::random(n, seed);
                let r = exact_max_consistent(&t, DEFAULT_DP_CAP).unwrap();
                assert_eq!(r.value, brute_force(&t), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn heuristic_solves_transitive_and_respects_floor() {
        for n in [5usize, 12, 31] {
            let t = Tournament::from_orientation(n, |x, y| x < y);
            let r = heuristic_max_consistent(&t, &HeuristicOptions::default());
            assert_eq!(r.value, t.edge_count());
            assert!(!r.exact);
        }
        for seed in 0..10 {
            let t = Tournament::random(15, seed);
            let r = heuristic_max_consistent(&t, &HeuristicOptions::default());
            let (low, high) = trivial_bounds(15);
            assert!(r.value as f64 >= low);
            assert!(r.value <= high);
            assert_eq!(t.consistent_edges(&r.best_sigma), r.value);
        }
    }

    #[test]
    fn heuristic_never_beats_exact_and_usually_matches() {
        let mut matched = 0;
        for seed in 0..40 {
            let t = Tournament::random(11, seed);
            let exact = exact_max_consistent(&t, DEFAULT_DP_CAP).unwrap().value;
            let heur =
                heuristic_max_consistent(&t, &HeuristicOptions { restarts: 8, seed: 1, threads: 1 })
                    .value;
            assert!(heur <= exact, "seed {seed}: heuristic {heur} exceeds exact {exact}");
            if heur == exact {
                matched += 1;
            }
        }
        assert!(matched >= 32, "only {matched}/40 matched the exact optimum");
    }

    #[test]
    fn heuristic_value_is_monotone_in_restarts() {
        let t = Tournament::random(19, 3);
        let mut last = 0;
        for restarts in 1..=10 {
            let r = heuristic_max_consistent(
                &t,
                &HeuristicOptions { restarts, seed: 7, threads: 1 },
            );
            assert!(r.value >= last, "restarts {restarts} regressed");
            last = r.value;
        }
    }

    #[test]
    fn heuristic_is_thread_invariant() {
        let t = Tournament::random(23, 5);
        let base = heuristic_max_consistent(
            &t,
            &HeuristicOptions { restarts: 6, seed: 2, threads: 1 },
        );
        let multi = heuristic_max_consistent(
            &t,
            &HeuristicOptions { restarts: 6, seed: 2, threads: 4 },
        );
        assert_eq!(base.value, multi.value);
        assert_eq!(base.best_sigma, multi.best_sigma);
    }

    #[test]
    fn theorem_bound_values() {
        assert!((theorem_bound(7, std::f64::consts::SQRT_2) - 48.190890772792756).abs() < 1e-12);
        assert!((theorem_bound(7, 0.0) - 10.5).abs() < 1e-15);
        assert!((theorem_bound(3, 0.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn trivial_bound_values() {
        assert_eq!(trivial_bounds(3), (1.5, 3));
        assert_eq!(trivial_bounds(7), (10.5, 21));
        assert_eq!(trivial_bounds(1), (0.0, 0));
    }

    #[test]
    fn certificate_depth_and_block_sizes() {
        let t = Tournament::random(13, 1);
        let sigma = Ranking::random(13, 2);
        let cert = bisection_certificate(&t, &sigma, None);
        assert_eq!(cert.r, 4); // 13 ≤ 2⁴
        assert_eq!(cert.levels.len(), 4);
        // level counts: one root pair, then at most doubling
        let mut max_pairs = 1;
        for level in &cert.levels {
            assert!(level.differences.len() <= max_pairs);
            assert!(!level.differences.is_empty());
            max_pairs *= 2;
        }
        assert_eq!(cert.total, cert.sigma_value as i64 - cert.sigma_reverse_value as i64);
    }

    #[test]
    fn certificate_reversal_negates_total() {
        let t = Tournament::random(10, 8);
        let sigma = Ranking::random(10, 9);
        let fwd = bisection_certificate(&t, &sigma, None);
        let rev = bisection_certificate(&t, &sigma.reversed(), None);
        assert_eq!(fwd.total, -rev.total);
    }

    #[test]
    fn certificate_bounds_hold_for_paley_19() {
        let t = crate::construct::build_paley(19).unwrap();
        let spec = crate::construct::paley_spec(19).unwrap();
        let s = crate::spectral::circulant_spectrum(spec.difference_set(), 19).unwrap();
        assert!((s.lambda - 5f64.sqrt()).abs() < 1e-10);
        let best = heuristic_max_consistent(&t, &HeuristicOptions::default());
        let cert = bisection_certificate(&t, &best.best_sigma, Some(s.lambda));
        assert!(cert.flagged_levels.is_empty());
        for level in &cert.levels {
            let bound = level.bound.unwrap();
            assert!((bound - 2.0 * s.lambda * 2f64.powi(cert.r as i32 - 1)).abs() < 1e-12);
            assert!(level.abs_sum as f64 <= bound + 1e-9);
            assert!(!level.exceeds_bound);
        }
    }

    #[test]
    fn certificate_handles_tiny_inputs() {
        let t = Tournament::random(1, 0);
        let cert = bisection_certificate(&t, &Ranking::identity(1), None);
        assert_eq!((cert.r, cert.total), (0, 0));
        assert!(cert.levels.is_empty());
    }

    proptest! {
        #[test]
        fn certificate_identity_holds(n in 1usize..22, seed in 0u64..300, rseed in 0u64..300) {
            let t = Tournament::random(n, seed); // usually non-regular
            let sigma = Ranking::random(n, rseed);
            let cert = bisection_certificate(&t, &sigma, None);
            prop_assert_eq!(cert.total, cert.sigma_value as i64 - cert.sigma_reverse_value as i64);
            prop_assert_eq!(cert.sigma_value + cert.sigma_reverse_value, t.edge_count());
        }

        #[test]
        fn dp_within_trivial_bounds(n in 1usize..10, seed in 0u64..100) {
            let t = Tournament::random(n, seed);
            let r = exact_max_consistent(&t, DEFAULT_DP_CAP).unwrap();
            let (low, high) = trivial_bounds(n as u64);
            prop_assert!(r.value as f64 >= low.ceil() - 0.5);
            prop_assert!(r.value >= low.ceil() as u64);
            prop_assert!(r.value <= high);
        }
    }
}
