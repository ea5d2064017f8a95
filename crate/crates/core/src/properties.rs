//! Schütte's domination property S_k, double regularity, and the assembled
//! quasi-randomness certificate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construct::{paley_spec, ConstructError, CyclotomicSpec, FamilySpec};
use crate::ranking::{
    self, bisection_certificate, exact_max_consistent, heuristic_max_consistent, trivial_bounds,
    BisectionCertificate, HeuristicOptions, RankError, RankingResult,
};
use crate::spectral::{
    circulant_spectrum, detect_spectral_pattern, lambda_lower_bound, mixing_audit,
    tournament_spectrum, AuditOptions, MixingAudit, SpectralError, SpectralPattern, Spectrum,
};
use crate::tournament::Tournament;

/// Default ceiling on C(n,k) for exhaustive subset scans.
pub const DEFAULT_SCHUTTE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PropertyError {
    #[error("k = {k} outside 1..={max}")]
    BadSubsetSize { k: u32, max: u64 },
    #[error("C({n},{k}) = {required} subsets exceeds the budget {budget}")]
    BudgetExceeded { n: u64, k: u32, required: u64, budget: u64 },
}

/// Outcome of testing S_k: every k-subset A must have a vertex outside A
/// beating all of A. `witness` is the colexicographically first
/// counterexample subset when the property fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchutteResult {
    pub k: u32,
    pub holds: bool,
    pub witness: Option<Vec<usize>>,
    pub checked: u64,
}

fn binomial_capped(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Exhaustive S_k check in colexicographic subset order, with a running
/// bitwise AND of in-neighbor rows (a dominator of A is exactly a vertex in
/// ∩_{a∈A} N⁻(a) ∖ A).
pub fn has_schutte(t: &Tournament, k: u32, budget: u64) -> Result<SchutteResult, PropertyError> {
    let n = t.n();
    if k == 0 || k as usize >= n.max(1) {
        return Err(PropertyError::BadSubsetSize { k, max: n.saturating_sub(1) as u64 });
    }
    let required = binomial_capped(n as u64, k as u64);
    if required > budget {
        return Err(PropertyError::BudgetExceeded { n: n as u64, k, required, budget });
    }
    let words = t.word_count();
    let in_rows = t.in_rows();
    let full: Vec<u64> = {
        let mut f = vec![u64::MAX; words];
        if n % 64 != 0 {
            f[words - 1] = (1u64 << (n % 64)) - 1;
        }
        f
    };
    let k = k as usize;
    let mut subset: Vec<usize> = (0..k).collect();
    let mut checked = 0u64;
    let mut and = vec![0u64; words];
    loop {
        checked += 1;
        and.copy_from_slice(&full);
        let mut alive = true;
        for &a in &subset {
            let row = &in_rows[a * words..(a + 1) * words];
            let mut any = 0u64;
            for (w, r) in and.iter_mut().zip(row) {
                *w &= r;
                any |= *w;
            }
            if any == 0 {
                alive = false; // empty even before removing A itself
                break;
            }
        }
        if alive {
            for &a in &subset {
                and[a / 64] &= !(1 << (a % 64));
            }
            alive = and.iter().any(|&w| w != 0);
        }
        if !alive {
            return Ok(SchutteResult { k: k as u32, holds: false, witness: Some(subset), checked });
        }
        // colex successor: bump the first member not blocked by its neighbor
        let mut i = 0;
        while i + 1 < k && subset[i] + 1 == subset[i + 1] {
            i += 1;
        }
        if i + 1 == k && subset[i] + 1 == n {
            break; // at {n−k..n−1}, the colex maximum
        }
        subset[i] += 1;
        for (j, slot) in subset.iter_mut().enumerate().take(i) {
            *slot = j;
        }
    }
    Ok(SchutteResult { k: k as u32, holds: true, witness: None, checked })
}

/// k²·2^(2k−2): primes above this make Paley tournaments satisfy S_k.
/// Saturates at u64::MAX.
pub fn graham_spencer_threshold(k: u32) -> u64 {
    let square = (k as u64).saturating_mul(k as u64);
    match 1u64.checked_shl(2 * k - 2) {
        Some(power) => square.saturating_mul(power),
        None => u64::MAX,
    }
}

/// Double regularity: every pair of vertices has exactly (n−3)/4 common
/// out-neighbors (forces n ≡ 3 mod 4 and regularity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoublyRegular {
    pub holds: bool,
    /// (n−3)/4 when the property holds.
    pub common_out_neighbors: Option<u64>,
}

pub fn is_doubly_regular(t: &Tournament) -> DoublyRegular {
    let n = t.n();
    let miss = DoublyRegular { holds: false, common_out_neighbors: None };
    if n % 4 != 3 || !t.is_regular() {
        return miss;
    }
    let target = (n - 3) / 4;
    for x in 0..n {
        for y in x + 1..n {
            if t.common_out_neighbors(x, y) != target {
                return miss;
            }
        }
    }
    DoublyRegular { holds: true, common_out_neighbors: Some(target as u64) }
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub dp_cap: usize,
    /// Fail (rather than degrade to the heuristic) if n exceeds the cap.
    pub require_exact: bool,
    pub restarts: u32,
    pub seed: u64,
    pub schutte_ks: Vec<u32>,
    pub schutte_budget: u64,
    pub audit: AuditOptions,
    pub pattern_tol: f64,
    pub threads: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            dp_cap: ranking::DEFAULT_DP_CAP,
            require_exact: false,
            restarts: 8,
            seed: 0,
            schutte_ks: vec![1, 2],
            schutte_budget: DEFAULT_SCHUTTE_BUDGET,
            audit: AuditOptions::default(),
            pattern_tol: 1e-6,
            threads: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("spectral analysis failed: {0}")]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
}

/// The spectral half of a report; present only for regular normal inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSection {
    pub lambda: f64,
    pub lambda_lower_bound: f64,
    pub theorem_bound: f64,
    pub pattern: SpectralPattern,
    pub spectrum: Spectrum,
    pub mixing_audit: MixingAudit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankingSection {
    pub exact: Option<RankingResult>,
    pub heuristic: RankingResult,
    pub best_value: u64,
    pub best_is_exact: bool,
    /// best_value / (n²/4) — the quasi-randomness diagnostic.
    pub quasi_random_ratio: f64,
    /// True when best_value is only a heuristic lower bound on C(T).
    pub ratio_is_lower_bound_only: bool,
    pub trivial_low: f64,
    pub trivial_high: u64,
    pub certificate: BisectionCertificate,
}

/// Everything the library can say about one tournament, JSON-stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub report_version: u32,
    pub n: u64,
    pub construction: Option<FamilySpec>,
    pub regular: bool,
    pub normal: bool,
    pub spectral: Option<SpectralSection>,
    pub spectral_omitted_reason: Option<String>,
    pub ranking: RankingSection,
    pub doubly_regular: DoublyRegular,
    pub schutte: Vec<SchutteResult>,
}

pub const REPORT_VERSION: u32 = 1;

impl CertificateReport {
    /// Hard failures: facts that contradict proven inequalities and thus
    /// signal a bug in λ, normality, or counting — never in the input.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(s) = &self.spectral {
            if s.mixing_audit.violations > 0 {
                out.push(format!(
                    "mixing audit found {} violating pair(s)",
                    s.mixing_audit.violations
                ));
            }
            if s.lambda < s.lambda_lower_bound - 1e-9 {
                out.push(format!(
                    "lambda {} below the floor {}",
                    s.lambda, s.lambda_lower_bound
                ));
            }
            if !self.ranking.certificate.flagged_levels.is_empty() {
                out.push(format!(
                    "bisection certificate levels {:?} exceed the spectral bound",
                    self.ranking.certificate.flagged_levels
                ));
            }
            if self.ranking.best_value as f64
                > s.theorem_bound.min(self.ranking.trivial_high as f64) + 1e-9
            {
                out.push("consistent-edge count exceeds its upper bound".to_string());
            }
        }
        out
    }
}

/// Assemble the full report. `construction`, when present, is trusted to
/// describe `t` and unlocks the cheaper character-sum spectrum for
/// circulant families. Spectral fields are omitted (with a reason) for
/// inputs outside the regular-normal setting.
pub fn certify(
    t: &Tournament,
    construction: Option<&FamilySpec>,
    options: &CertifyOptions,
) -> Result<CertificateReport, CertifyError> {
    let n = t.n() as u64;
    let regular = t.is_regular();
    let normal = t.is_normal();

    let mut spectral = None;
    let mut spectral_omitted_reason = None;
    if !regular {
        spectral_omitted_reason = Some("tournament is not regular".to_string());
    } else if !normal {
        spectral_omitted_reason = Some("tournament is not normal".to_string());
    } else {
        let spectrum = match construction {
            Some(FamilySpec::Cyclotomic { p, m, ivec }) => {
                let spec = CyclotomicSpec::new(*p, *m, ivec.clone())?;
                circulant_spectrum(spec.difference_set(), *p)?
            }
            Some(FamilySpec::Paley { p }) => {
                circulant_spectrum(paley_spec(*p)?.difference_set(), *p)?
            }
            _ => tournament_spectrum(t)?,
        };
        let audit_options = AuditOptions { threads: options.threads, ..options.audit.clone() };
        let audit = mixing_audit(t, &spectrum, &audit_options)?;
        spectral = Some(SpectralSection {
            lambda: spectrum.lambda,
            lambda_lower_bound: lambda_lower_bound(n),
            theorem_bound: ranking::theorem_bound(n, spectrum.lambda),
            pattern: detect_spectral_pattern(&spectrum, options.pattern_tol),
            spectrum,
            mixing_audit: audit,
        });
    }

    let exact = match exact_max_consistent(t, options.dp_cap) {
        Ok(r) => Some(r),
        Err(e @ RankError::OverCap { .. }) => {
            if options.require_exact {
                return Err(e.into());
            }
            None
        }
    };
    let heuristic = heuristic_max_consistent(
        t,
        &HeuristicOptions { restarts: options.restarts, seed: options.seed, threads: options.threads },
    );
    let (best_value, best_is_exact, best_sigma) = match &exact {
        Some(r) => (r.value, true, &r.best_sigma),
        None => (heuristic.value, false, &heuristic.best_sigma),
    };
    let certificate =
        bisection_certificate(t, best_sigma, spectral.as_ref().map(|s| s.lambda));
    let (trivial_low, trivial_high) = trivial_bounds(n);
    let quarter = n as f64 * n as f64 / 4.0;
    let ranking = RankingSection {
        best_value,
        best_is_exact,
        quasi_random_ratio: if quarter > 0.0 { best_value as f64 / quarter } else { 0.0 },
        ratio_is_lower_bound_only: !best_is_exact,
        exact,
        heuristic,
        trivial_low,
        trivial_high,
        certificate,
    };

    let mut schutte = Vec::new();
    for &k in &options.schutte_ks {
        if k == 0 || k as u64 >= n.max(1) {
            continue; // not meaningful at this size
        }
        schutte.push(has_schutte(t, k, options.schutte_budget)?);
    }

    Ok(CertificateReport {
        report_version: REPORT_VERSION,
        n,
        construction: construction.cloned(),
        regular,
        normal,
        spectral,
        spectral_omitted_reason,
        ranking,
        doubly_regular: is_doubly_regular(t),
        schutte,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_paley;

    fn three_cycle() -> Tournament {
        Tournament::from_matrix(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap()
    }

    fn transitive(n: usize) -> Tournament {
        Tournament::from_orientation(n, |_, _| true)
    }

    /// Plain nested-loop dominator re-check, no bit tricks.
    fn verify_no_dominator(t: &Tournament, a: &[usize]) -> bool {
        (0..t.n()).all(|z| a.contains(&z) || a.iter().any(|&v| !t.has_edge(z, v)))
    }

    #[test]
    fn schutte_three_cycle_k1_holds() {
        let r = has_schutte(&three_cycle(), 1, DEFAULT_SCHUTTE_BUDGET).unwrap();
        assert!(r.holds);
        assert_eq!(r.checked, 3);
    }

    #[test]
    fn schutte_transitive_fails_at_top_vertex() {
        let r = has_schutte(&transitive(9), 1, DEFAULT_SCHUTTE_BUDGET).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness, Some(vec![0])); // vertex 0 beats everyone
        assert_eq!(r.checked, 1);
        assert!(verify_no_dominator(&transitive(9), &[0]));
    }

    #[test]
    fn schutte_paley_seven() {
        let t = build_paley(7).unwrap();
        let r = has_schutte(&t, 2, DEFAULT_SCHUTTE_BUDGET).unwrap();
        assert!(r.holds);
        assert_eq!(r.checked, 21);
        // k = 3 must fail: n = 7 has no S_3 tournament that small
        let r = has_schutte(&t, 3, DEFAULT_SCHUTTE_BUDGET).unwrap();
        assert!(!r.holds);
        let w = r.witness.unwrap();
        assert_eq!(w, vec![0, 1, 2]); // colexicographically first counterexample
        assert!(verify_no_dominator(&t, &w));
    }

    #[test]
    fn schutte_monotone_in_k() {
        let t = build_paley(11).unwrap();
        let k2 = has_schutte(&t, 2, DEFAULT_SCHUTTE_BUDGET).unwrap();
        let k1 = has_schutte(&t, 1, DEFAULT_SCHUTTE_BUDGET).unwrap();
        assert!(k2.holds);
        assert!(k1.holds, "S_2 implies S_1");
        assert!(!has_schutte(&t, 3, DEFAULT_SCHUTTE_BUDGET).unwrap().holds);
    }

    #[test]
    fn schutte_guards() {
        let t = build_paley(7).unwrap();
        assert_eq!(
            has_schutte(&t, 0, DEFAULT_SCHUTTE_BUDGET),
            Err(PropertyError::BadSubsetSize { k: 0, max: 6 })
        );
        assert_eq!(
            has_schutte(&t, 7, DEFAULT_SCHUTTE_BUDGET),
            Err(PropertyError::BadSubsetSize { k: 7, max: 6 })
        );
        let t = Tournament::random(30, 0);
        assert!(matches!(
            has_schutte(&t, 15, 1_000_000),
            Err(PropertyError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn schutte_witnesses_survive_scalar_recheck() {
        for seed in 0..20 {
            let t = Tournament::random(9, seed);
            for k in 1..=3 {
                let r = has_schutte(&t, k, DEFAULT_SCHUTTE_BUDGET).unwrap();
                if let Some(w) = r.witness {
                    assert!(!r.holds);
                    assert_eq!(w.len(), k as usize);
                    assert!(verify_no_dominator(&t, &w), "seed {seed} k {k}");
                }
            }
        }
    }

    #[test]
    fn graham_spencer_values() {
        assert_eq!(graham_spencer_threshold(1), 1);
        assert_eq!(graham_spencer_threshold(2), 16);
        assert_eq!(graham_spencer_threshold(3), 144);
        assert_eq!(graham_spencer_threshold(40), u64::MAX); // saturated
    }

    #[test]
    fn doubly_regular_cases() {
        assert_eq!(
            is_doubly_regular(&build_paley(7).unwrap()),
            DoublyRegular { holds: true, common_out_neighbors: Some(1) }
        );
        assert_eq!(
            is_doubly_regular(&three_cycle()),
            DoublyRegular { holds: true, common_out_neighbors: Some(0) }
        );
        assert_eq!(
            is_doubly_regular(&build_paley(19).unwrap()),
            DoublyRegular { holds: true, common_out_neighbors: Some(4) }
        );
        // 13 ≡ 1 (mod 4): congruence obstruction
        let spec = CyclotomicSpec::new(13, 4, vec![0, 1]).unwrap();
        let t = crate::construct::build_cyclotomic(&spec);
        assert!(!is_doubly_regular(&t).holds);
        assert!(!is_doubly_regular(&transitive(7)).holds);
    }

    #[test]
    fn certify_paley_19() {
        let spec = FamilySpec::Paley { p: 19 };
        let t = build_paley(19).unwrap();
        let report = certify(&t, Some(&spec), &CertifyOptions::default()).unwrap();
        assert_eq!(report.report_version, 1);
        assert_eq!(report.n, 19);
        assert!(report.regular && report.normal);
        let s = report.spectral.as_ref().unwrap();
        assert!((s.lambda - 5f64.sqrt()).abs() < 1e-8);
        assert_eq!(s.pattern, SpectralPattern::DoublyRegular);
        assert!(report.doubly_regular.holds);
        assert_eq!(s.mixing_audit.violations, 0);
        assert!(report.ranking.exact.is_some());
        assert!(report.ranking.best_is_exact);
        assert!(report.invariant_violations().is_empty());
        assert_eq!(report.schutte.len(), 2);
        assert!(report.schutte.iter().all(|r| r.holds));
    }

    #[test]
    fn certify_transitive_omits_spectral() {
        let t = transitive(9);
        let report = certify(&t, None, &CertifyOptions::default()).unwrap();
        assert!(report.spectral.is_none());
        assert_eq!(
            report.spectral_omitted_reason.as_deref(),
            Some("tournament is not regular")
        );
        assert_eq!(report.ranking.best_value, 36);
        assert!(report.ranking.best_is_exact);
        assert!((report.ranking.quasi_random_ratio - 36.0 / 20.25).abs() < 1e-12);
        assert!(!report.schutte[0].holds); // transitive fails S_1
    }

    #[test]
    fn certify_respects_require_exact() {
        let t = Tournament::random(23, 0);
        let mut options = CertifyOptions { require_exact: true, ..Default::default() };
        assert!(matches!(
            certify(&t, None, &options),
            Err(CertifyError::Rank(RankError::OverCap { n: 23, cap: 20 }))
        ));
        options.require_exact = false;
        let report = certify(&t, None, &options).unwrap();
        assert!(report.ranking.exact.is_none());
        assert!(report.ranking.ratio_is_lower_bound_only);
    }

    #[test]
    fn report_round_trips_through_json() {
        let spec = FamilySpec::Cyclotomic { p: 13, m: 4, ivec: vec![0, 1] };
        let t = spec.build().unwrap().tournament;
        let report = certify(&t, Some(&spec), &CertifyOptions::default()).unwrap();
        assert_eq!(
            report.spectral.as_ref().unwrap().pattern,
            SpectralPattern::CndrLike
        );
        let json = serde_json::to_string(&report).unwrap();
        let back: CertificateReport = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        assert_eq!(back.n, report.n);
        assert_eq!(back.ranking.best_value, report.ranking.best_value);
        assert_eq!(
            back.spectral.unwrap().spectrum.magnitudes,
            report.spectral.unwrap().spectrum.magnitudes
        );
    }

    #[test]
    fn certify_is_deterministic() {
        let t = Tournament::random(25, 4); // non-regular path, heuristic only
        let a = certify(&t, None, &CertifyOptions::default()).unwrap();
        let b = certify(&t, None, &CertifyOptions::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
