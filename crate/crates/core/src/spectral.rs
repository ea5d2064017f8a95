//! λ(T) via two independent routes — character sums for circulant
//! (difference-set) tournaments and a Jacobi eigensolve of MMᵗ for general
//! normal regular tournaments — plus the expander-mixing audit and spectral
//! pattern detection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::{self, JacobiError};
use crate::rng;
use crate::tournament::{Tournament, VertexSet};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("tournament is not regular")]
    NotRegular,
    #[error("tournament is not normal")]
    NotNormal,
    #[error("invalid half-set of residues: {0}")]
    InvalidHalfSet(String),
    #[error("exhaustive audit limited to n ≤ {limit}, got n = {n}")]
    ExhaustiveTooLarge { n: usize, limit: usize },
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
}

/// Magnitudes of the non-Perron eigenvalues of a regular tournament,
/// sorted descending; `lambda` is the largest, `top` the Perron value
/// (n−1)/2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub n: u64,
    pub top: u64,
    pub lambda: f64,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    /// Σ|λ_i|² over all n eigenvalues, Perron included.
    pub fn sum_abs_squared(&self) -> f64 {
        let top = self.top as f64;
        self.magnitudes.iter().map(|m| m * m).sum::<f64>() + top * top
    }

    /// Relative deviation of Σ|λ_i|² from its exact value n(n−1)/2.
    pub fn trace_residual(&self) -> f64 {
        let target = self.n as f64 * self.top as f64;
        if target == 0.0 {
            return self.sum_abs_squared().abs();
        }
        (self.sum_abs_squared() - target).abs() / target
    }
}

/// √(n+1)/2 — no regular tournament's λ can be smaller.
pub fn lambda_lower_bound(n: u64) -> f64 {
    ((n + 1) as f64).sqrt() / 2.0
}

struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn new() -> Self {
        Kahan { sum: 0.0, carry: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn check_half_set(set: &[u64], n: u64) -> Result<Vec<bool>, SpectralError> {
    if n == 0 || n % 2 == 0 {
        return Err(SpectralError::InvalidHalfSet(format!("modulus {n} must be odd")));
    }
    let mut member = vec![false; n as usize];
    for &s in set {
        if s == 0 || s >= n {
            return Err(SpectralError::InvalidHalfSet(format!(
                "residue {s} outside 1..{n}"
            )));
        }
        if member[s as usize] {
            return Err(SpectralError::InvalidHalfSet(format!("residue {s} repeated")));
        }
        member[s as usize] = true;
    }
    for s in 1..n {
        if member[s as usize] && member[(n - s) as usize] {
            return Err(SpectralError::InvalidHalfSet(format!(
                "both {s} and −{s} ≡ {} present",
                n - s
            )));
        }
    }
    if set.len() as u64 != (n - 1) / 2 {
        return Err(SpectralError::InvalidHalfSet(format!(
            "|S| = {} but (n−1)/2 = {}",
            set.len(),
            (n - 1) / 2
        )));
    }
    Ok(member)
}

/// Spectrum of the circulant tournament with difference set `set` modulo
/// `n`: the eigenvalues are the character sums Σ_{s∈S} e^(2πiks/n) for
/// k = 1..n−1, accumulated with Kahan compensation.
pub fn circulant_spectrum(set: &[u64], n: u64) -> Result<Spectrum, SpectralError> {
    check_half_set(set, n)?;
    let tau = 2.0 * std::f64::consts::PI;
    let mut magnitudes = Vec::with_capacity((n - 1) as usize);
    for k in 1..n {
        let mut re = Kahan::new();
        let mut im = Kahan::new();
        for &s in set {
            let angle = tau * ((k as u128 * s as u128 % n as u128) as f64) / n as f64;
            re.add(angle.cos());
            im.add(angle.sin());
        }
        magnitudes.push(re.sum.hypot(im.sum));
    }
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    let lambda = magnitudes.first().copied().unwrap_or(0.0);
    Ok(Spectrum { n, top: (n - 1) / 2, lambda, magnitudes })
}

/// Spectrum of a regular normal tournament from MMᵗ: its eigenvalues are
/// the |λ_i|², so a symmetric Jacobi solve plus one deflation of the Perron
/// direction (the eigenvalue closest to d²) recovers the magnitudes.
pub fn tournament_spectrum(t: &Tournament) -> Result<Spectrum, SpectralError> {
    if !t.is_regular() {
        return Err(SpectralError::NotRegular);
    }
    if !t.is_normal() {
        return Err(SpectralError::NotNormal);
    }
    let n = t.n();
    let d = (n as u64 - 1) / 2;
    let mut mmt = vec![0.0f64; n * n];
    for x in 0..n {
        mmt[x * n + x] = d as f64;
        for y in x + 1..n {
            let common = t.common_out_neighbors(x, y) as f64;
            mmt[x * n + y] = common;
            mmt[y * n + x] = common;
        }
    }
    let eigen = jacobi::symmetric_eigenvalues(mmt, n)?;
    let mut values = eigen.values;
    let target = (d * d) as f64;
    let perron = values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(i, _)| i)
        .expect("n ≥ 1");
    values.swap_remove(perron);
    let mut magnitudes: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    let lambda = magnitudes.first().copied().unwrap_or(0.0);
    Ok(Spectrum { n: n as u64, top: d, lambda, magnitudes })
}

/// Shape of a regular tournament's spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralPattern {
    /// All magnitudes equal √(n+1)/2.
    #[serde(rename = "doubly-regular")]
    DoublyRegular,
    /// λ = (√n+1)/2 and magnitudes fall into clusters of complex-conjugate
    /// quadruples, multiplicity (n−1)/4 each.
    #[serde(rename = "cndr-like")]
    CndrLike,
    #[serde(rename = "other")]
    Other,
}

impl std::fmt::Display for SpectralPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpectralPattern::DoublyRegular => "doubly-regular",
            SpectralPattern::CndrLike => "cndr-like",
            SpectralPattern::Other => "other",
        })
    }
}

/// Classify a spectrum with relative tolerance `tol` (1e−6 is the usual
/// choice).
pub fn detect_spectral_pattern(spectrum: &Spectrum, tol: f64) -> SpectralPattern {
    let n = spectrum.n;
    if spectrum.magnitudes.is_empty() {
        return SpectralPattern::Other;
    }
    let close = |a: f64, b: f64| (a - b).abs() <= tol * b.abs().max(1.0);
    let drt_value = lambda_lower_bound(n);
    if spectrum.magnitudes.iter().all(|&m| close(m, drt_value)) {
        return SpectralPattern::DoublyRegular;
    }
    if (n - 1) % 4 == 0 && n > 1 {
        let quarter = ((n - 1) / 4) as usize;
        let cndr_lambda = ((n as f64).sqrt() + 1.0) / 2.0;
        if close(spectrum.lambda, cndr_lambda) {
            // magnitudes are sorted descending; split at relative gaps
            let mut quarters = 0usize;
            let mut ok = true;
            let mut head = spectrum.magnitudes[0];
            let mut size = 0usize;
            for &m in &spectrum.magnitudes {
                if head - m <= tol * head.max(1.0) {
                    size += 1;
                } else {
                    if size % quarter != 0 {
                        ok = false;
                        break;
                    }
                    quarters += size / quarter;
                    head = m;
                    size = 1;
                }
            }
            if ok && size % quarter == 0 && quarters + size / quarter == 4 {
                return SpectralPattern::CndrLike;
            }
        }
    }
    SpectralPattern::Other
}

/// How [`mixing_audit`] picks its (A, B) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    Exhaustive,
    Sampled,
}

pub const EXHAUSTIVE_AUDIT_LIMIT: usize = 12;

#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub mode: AuditMode,
    /// Sampled pairs (ignored in exhaustive mode).
    pub trials: u64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { mode: AuditMode::Sampled, trials: 10_000, seed: 0, threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingViolation {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub e_ab: u64,
    pub e_ba: u64,
    /// "mixing" or "antisymmetry".
    pub kind: String,
}

/// Result of checking |e(A,B) − d|A||B|/n| ≤ λ√(|A||B|) and
/// |e(A,B) − e(B,A)| ≤ 2λ√(|A||B|) over disjoint vertex-set pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingAudit {
    pub n: u64,
    pub lambda: f64,
    pub mode: AuditMode,
    pub pairs_checked: u64,
    pub max_mixing_ratio: f64,
    pub max_antisymmetry_ratio: f64,
    pub violations: u64,
    pub first_violation: Option<MixingViolation>,
}

const AUDIT_SLACK: f64 = 1e-9;

struct PairStats {
    checked: u64,
    max_mixing: f64,
    max_anti: f64,
    violations: u64,
    first: Option<(u64, MixingViolation)>,
}

impl PairStats {
    fn new() -> Self {
        PairStats { checked: 0, max_mixing: 0.0, max_anti: 0.0, violations: 0, first: None }
    }

    fn merge(mut self, other: PairStats) -> PairStats {
        self.checked += other.checked;
        self.max_mixing = self.max_mixing.max(other.max_mixing);
        self.max_anti = self.max_anti.max(other.max_anti);
        self.violations += other.violations;
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn check_pair(
    t: &Tournament,
    a: &VertexSet,
    b: &VertexSet,
    d: f64,
    lambda: f64,
    order: u64,
    stats: &mut PairStats,
) {
    let sa = a.len() as f64;
    let sb = b.len() as f64;
    let e_ab = t.edges_between(a, b);
    let e_ba = t.edges_between(b, a);
    let root = (sa * sb).sqrt();
    let mix_lhs = (e_ab as f64 - d * sa * sb / t.n() as f64).abs();
    let mix_rhs = lambda * root;
    let anti_lhs = (e_ab as f64 - e_ba as f64).abs();
    let anti_rhs = 2.0 * lambda * root;
    stats.checked += 1;
    if mix_rhs > 0.0 {
        stats.max_mixing = stats.max_mixing.max(mix_lhs / mix_rhs);
    }
    if anti_rhs > 0.0 {
        stats.max_anti = stats.max_anti.max(anti_lhs / anti_rhs);
    }
    let mix_bad = mix_lhs > mix_rhs + AUDIT_SLACK;
    let anti_bad = anti_lhs > anti_rhs + AUDIT_SLACK;
    if mix_bad || anti_bad {
        stats.violations += 1;
        if stats.first.is_none() {
            stats.first = Some((
                order,
                MixingViolation {
                    a: a.iter().collect(),
                    b: b.iter().collect(),
                    e_ab,
                    e_ba,
                    kind: if mix_bad { "mixing" } else { "antisymmetry" }.into(),
                },
            ));
        }
    }
}

/// Audit the two mixing inequalities for a regular normal tournament whose
/// λ is already known. A violation would falsify the λ computation (the
/// inequalities are theorems), so any violation is a hard failure for the
/// caller to act on.
pub fn mixing_audit(
    t: &Tournament,
    spectrum: &Spectrum,
    options: &AuditOptions,
) -> Result<MixingAudit, SpectralError> {
    if !t.is_regular() {
        return Err(SpectralError::NotRegular);
    }
    if !t.is_normal() {
        return Err(SpectralError::NotNormal);
    }
    let n = t.n();
    let d = (n as f64 - 1.0) / 2.0;
    let lambda = spectrum.lambda;
    let stats = match options.mode {
        AuditMode::Exhaustive => {
            if n > EXHAUSTIVE_AUDIT_LIMIT {
                return Err(SpectralError::ExhaustiveTooLarge {
                    n,
                    limit: EXHAUSTIVE_AUDIT_LIMIT,
                });
            }
            let mut stats = PairStats::new();
            // one ternary digit per vertex: 0 = unused, 1 = A, 2 = B
            let total = 3u64.pow(n as u32);
            for assignment in 0..total {
                let mut code = assignment;
                let mut a = VertexSet::empty(n);
                let mut b = VertexSet::empty(n);
                for v in 0..n {
                    match code % 3 {
                        1 => a.insert(v),
                        2 => b.insert(v),
                        _ => {}
                    }
                    code /= 3;
                }
                if a.is_empty() || b.is_empty() {
                    continue; // both sides are 0 ≤ 0
                }
                check_pair(t, &a, &b, d, lambda, assignment, &mut stats);
            }
            stats
        }
        AuditMode::Sampled => {
            let trials = options.trials;
            let threads = options.threads.max(1).min(trials.max(1) as usize);
            let run = |from: u64, to: u64| {
                let mut stats = PairStats::new();
                for trial in from..to {
                    let mut rng = rng::derived(options.seed, trial);
                    let (a, b) = sample_disjoint_pair(n, &mut rng);
                    check_pair(t, &a, &b, d, lambda, trial, &mut stats);
                }
                stats
            };
            if threads <= 1 {
                run(0, trials)
            } else {
                let chunk = trials.div_ceil(threads as u64);
                std::thread::scope(|scope| {
                    let handles: Vec<_> = (0..threads as u64)
                        .map(|i| {
                            let from = i * chunk;
                            let to = ((i + 1) * chunk).min(trials);
                            scope.spawn(move || run(from, to.max(from)))
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("audit worker panicked"))
                        .fold(PairStats::new(), PairStats::merge)
                })
            }
        }
    };
    Ok(MixingAudit {
        n: n as u64,
        lambda,
        mode: options.mode,
        pairs_checked: stats.checked,
        max_mixing_ratio: stats.max_mixing,
        max_antisymmetry_ratio: stats.max_anti,
        violations: stats.violations,
        first_violation: stats.first.map(|(_, v)| v),
    })
}

/// |A|, |B| uniform on 1..=n/2; members drawn uniformly, collisions
/// rejected element-wise, first |A| draws form A.
fn sample_disjoint_pair(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> (VertexSet, VertexSet) {
    debug_assert!(n >= 3);
    let half = (n / 2) as u64;
    let size_a = 1 + rng::below(rng, half) as usize;
    let size_b = 1 + rng::below(rng, half) as usize;
    let mut used = vec![false; n];
    let mut a = VertexSet::empty(n);
    let mut b = VertexSet::empty(n);
    let mut picked = 0usize;
    while picked < size_a + size_b {
        let v = rng::below(rng, n as u64) as usize;
        if used[v] {
            continue;
        }
        used[v] = true;
        if picked < size_a {
            a.insert(v);
        } else {
            b.insert(v);
        }
        picked += 1;
    }
    (a, b)
}
