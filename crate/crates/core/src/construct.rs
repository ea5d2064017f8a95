//! Explicit tournament families: cyclotomic (including Paley) tournaments
//! over prime fields, and elliptic-curve tournaments over rational point
//! groups of odd order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::tournament::Tournament;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstructError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("m must be a positive even class count, got {0}")]
    BadClassCount(u32),
    #[error("p ≡ m+1 (mod 2m) fails for p = {p}, m = {m}")]
    Congruence { p: u64, m: u32 },
    #[error("class index {index} out of range for m = {m}")]
    ClassIndexOutOfRange { index: u32, m: u32 },
    #[error("invalid index vector {ivec:?}: {reason}")]
    InvalidIndexVector { ivec: Vec<u32>, reason: &'static str },
    #[error("p = {0} must be a prime greater than 3")]
    PrimeTooSmall(u64),
    #[error("p = {0} exceeds the point-enumeration guard")]
    PrimeTooLarge(u64),
    #[error("curve y² = x³ + {a}x + {b} over F_{p} is singular")]
    SingularCurve { p: u64, a: u64, b: u64 },
    #[error("target order {n} is outside the Hasse interval for p = {p}")]
    OutsideHasseInterval { p: u64, n: u64 },
    #[error("target order {n} must be odd, got even")]
    EvenOrder { n: u64 },
    #[error("no curve over F_{p} with exactly {n} points")]
    NoCurveFound { p: u64, n: u64 },
}

// ---- modular arithmetic -------------------------------------------------

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    base %= p;
    let mut acc = 1u64 % p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse in F_p via Fermat; `a` must be nonzero mod prime `p`.
fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

#[inline]
fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    (a + p - b % p) % p
}

/// Trial-division primality, adequate for the enumeration scales here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest g ≥ 2 generating F_p^*, verified against the prime factors of
/// p − 1.
pub fn find_primitive_element(p: u64) -> Result<u64, ConstructError> {
    if !is_prime(p) {
        return Err(ConstructError::NotPrime(p));
    }
    if p == 2 {
        return Ok(1);
    }
    let factors = prime_factors(p - 1);
    'g: for g in 2..p {
        for &q in &factors {
            if pow_mod(g, (p - 1) / q, p) == 1 {
                continue 'g;
            }
        }
        return Ok(g);
    }
    unreachable!("every prime field has a generator")
}

/// The m cyclotomic classes S_i = { g^t : t ≡ i (mod m) } for the smallest
/// primitive element g, each sorted ascending. Requires p ≡ m+1 (mod 2m).
pub fn cyclotomic_classes(p: u64, m: u32) -> Result<Vec<Vec<u64>>, ConstructError> {
    if m == 0 || m % 2 != 0 {
        return Err(ConstructError::BadClassCount(m));
    }
    if !is_prime(p) {
        return Err(ConstructError::NotPrime(p));
    }
    if p % (2 * m as u64) != (m as u64 + 1) % (2 * m as u64) {
        return Err(ConstructError::Congruence { p, m });
    }
    let g = find_primitive_element(p)?;
    let mut classes = vec![Vec::with_capacity(((p - 1) / m as u64) as usize); m as usize];
    let mut x = 1u64;
    for t in 0..p - 1 {
        classes[(t % m as u64) as usize].push(x);
        x = mul_mod(x, g, p);
    }
    for class in &mut classes {
        class.sort_unstable();
    }
    Ok(classes)
}

/// A validated cyclotomic tournament description: p, m, the chosen class
/// indices, and the resulting difference set S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicSpec {
    p: u64,
    m: u32,
    ivec: Vec<u32>,
    generator: u64,
    classes: Vec<Vec<u64>>,
    set: Vec<u64>,
}

impl CyclotomicSpec {
    /// Validate (p, m, ivec). The index vector is checked semantically: the
    /// union S of the selected classes must satisfy S ∩ (−S) = ∅ and
    /// S ∪ (−S) = F_p^*, by direct set computation.
    pub fn new(p: u64, m: u32, ivec: Vec<u32>) -> Result<Self, ConstructError> {
        let classes = cyclotomic_classes(p, m)?;
        let generator = find_primitive_element(p)?;
        for &i in &ivec {
            if i >= m {
                return Err(ConstructError::ClassIndexOutOfRange { index: i, m });
            }
        }
        let mut sorted = ivec.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ivec.len() {
            return Err(ConstructError::InvalidIndexVector {
                ivec,
                reason: "repeated class index",
            });
        }
        let mut member = vec![false; p as usize];
        for &i in &sorted {
            for &s in &classes[i as usize] {
                member[s as usize] = true;
            }
        }
        for s in 1..p {
            let neg = p - s;
            if member[s as usize] && member[neg as usize] {
                return Err(ConstructError::InvalidIndexVector {
                    ivec,
                    reason: "S and −S intersect",
                });
            }
            if !member[s as usize] && !member[neg as usize] {
                return Err(ConstructError::InvalidIndexVector {
                    ivec,
                    reason: "S and −S do not cover F_p^*",
                });
            }
        }
        let set: Vec<u64> = (1..p).filter(|&s| member[s as usize]).collect();
        debug_assert_eq!(set.len() as u64, (p - 1) / 2);
        Ok(CyclotomicSpec { p, m, ivec, generator, classes, set })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn ivec(&self) -> &[u32] {
        &self.ivec
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn classes(&self) -> &[Vec<u64>] {
        &self.classes
    }

    /// The difference set S (sorted): x → y iff x − y ∈ S.
    pub fn difference_set(&self) -> &[u64] {
        &self.set
    }
}

/// Tournament on {0..p−1} with x → y iff (x − y mod p) ∈ S.
pub fn build_cyclotomic(spec: &CyclotomicSpec) -> Tournament {
    let p = spec.p as usize;
    let mut member = vec![false; p];
    for &s in &spec.set {
        member[s as usize] = true;
    }
    Tournament::from_orientation(p, |x, y| member[(x + p - y) % p])
}

/// The Paley tournament: quadratic residues as the difference set.
/// Equivalent to the cyclotomic construction with m = 2, ivec = (0).
pub fn paley_spec(p: u64) -> Result<CyclotomicSpec, ConstructError> {
    CyclotomicSpec::new(p, 2, vec![0])
}

pub fn build_paley(p: u64) -> Result<Tournament, ConstructError> {
    Ok(build_cyclotomic(&paley_spec(p)?))
}

// ---- elliptic curves ----------------------------------------------------

/// Default ceiling for full point enumeration.
pub const CURVE_ENUMERATION_LIMIT: u64 = 1_000_000;

/// Nonsingular short Weierstrass curve y² = x³ + ax + b over F_p, p > 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Curve {
    p: u64,
    a: u64,
    b: u64,
}

impl Curve {
    pub fn new(p: u64, a: u64, b: u64) -> Result<Self, ConstructError> {
        if !is_prime(p) {
            return Err(ConstructError::NotPrime(p));
        }
        if p <= 3 {
            return Err(ConstructError::PrimeTooSmall(p));
        }
        let a = a % p;
        let b = b % p;
        let disc = (4 * mul_mod(mul_mod(a, a, p), a, p) + 27 * mul_mod(b, b, p)) % p;
        if disc == 0 {
            return Err(ConstructError::SingularCurve { p, a, b });
        }
        Ok(Curve { p, a, b })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    fn rhs(&self, x: u64) -> u64 {
        (mul_mod(mul_mod(x, x, self.p), x, self.p) + mul_mod(self.a, x, self.p) + self.b) % self.p
    }
}

/// Number of F_p-rational points (affine plus infinity) by x-sweep against
/// a squares table.
pub fn count_curve_points(curve: &Curve) -> u64 {
    let p = curve.p;
    let squares = square_table(p);
    let mut count = 1u64; // infinity
    for x in 0..p {
        let rhs = curve.rhs(x);
        if rhs == 0 {
            count += 1;
        } else if squares[rhs as usize] {
            count += 2;
        }
    }
    count
}

fn square_table(p: u64) -> Vec<bool> {
    let mut squares = vec![false; p as usize];
    for y in 0..=(p / 2) {
        squares[mul_mod(y, y, p) as usize] = true;
    }
    squares
}

/// A point of the curve group; index 0 of every [`GroupTable`] is infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CurvePoint {
    Infinity,
    Affine { x: u64, y: u64 },
}

/// The fully enumerated rational point group of a curve. Elements are
/// indexed 0..n with the identity first and affine points sorted by (x, y);
/// tournament vertices use these indices.
#[derive(Debug, Clone)]
pub struct GroupTable {
    curve: Curve,
    points: Vec<CurvePoint>,
    neg: Vec<usize>,
}

/// Enumerate the point group. Guarded by [`CURVE_ENUMERATION_LIMIT`].
pub fn curve_points(curve: &Curve) -> Result<GroupTable, ConstructError> {
    if curve.p > CURVE_ENUMERATION_LIMIT {
        return Err(ConstructError::PrimeTooLarge(curve.p));
    }
    let p = curve.p;
    let mut roots: Vec<Vec<u64>> = vec![Vec::new(); p as usize];
    for y in 0..p {
        roots[mul_mod(y, y, p) as usize].push(y);
    }
    let mut points = vec![CurvePoint::Infinity];
    for x in 0..p {
        for &y in &roots[curve.rhs(x) as usize] {
            points.push(CurvePoint::Affine { x, y });
        }
    }
    // roots lists each y ascending per x, so affine points are (x, y)-sorted
    debug_assert!(points[1..].windows(2).all(|w| w[0] < w[1]));
    let neg: Vec<usize> = (0..points.len())
        .map(|i| match points[i] {
            CurvePoint::Infinity => 0,
            CurvePoint::Affine { x, y } => {
                index_of(&points, CurvePoint::Affine { x, y: (p - y) % p })
            }
        })
        .collect();
    Ok(GroupTable { curve: *curve, points, neg })
}

fn index_of(points: &[CurvePoint], target: CurvePoint) -> usize {
    points[1..]
        .binary_search(&target)
        .map(|i| i + 1)
        .unwrap_or_else(|_| panic!("point {target:?} not on curve"))
}

impl GroupTable {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn point(&self, i: usize) -> CurvePoint {
        self.points[i]
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn neg(&self, i: usize) -> usize {
        self.neg[i]
    }

    /// Chord-tangent addition, by index.
    pub fn add(&self, i: usize, j: usize) -> usize {
        let p = self.curve.p;
        let (x1, y1) = match self.points[i] {
            CurvePoint::Infinity => return j,
            CurvePoint::Affine { x, y } => (x, y),
        };
        let (x2, y2) = match self.points[j] {
            CurvePoint::Infinity => return i,
            CurvePoint::Affine { x, y } => (x, y),
        };
        if x1 == x2 && (y1 + y2) % p == 0 {
            return 0;
        }
        let slope = if x1 == x2 {
            // tangent; y1 ≠ 0 here since y1 + y2 ≢ 0 was checked
            let num = (3 * mul_mod(x1, x1, p) + self.curve.a) % p;
            mul_mod(num, inv_mod(2 * y1 % p, p), p)
        } else {
            mul_mod(sub_mod(y2, y1, p), inv_mod(sub_mod(x2, x1, p), p), p)
        };
        let x3 = sub_mod(sub_mod(mul_mod(slope, slope, p), x1, p), x2, p);
        let y3 = sub_mod(mul_mod(slope, sub_mod(x1, x3, p), p), y1, p);
        index_of(&self.points, CurvePoint::Affine { x: x3, y: y3 })
    }

    /// i ⊖ j.
    pub fn sub(&self, i: usize, j: usize) -> usize {
        self.add(i, self.neg[j])
    }
}

/// First curve over F_p (lexicographic (a, b) from (0, 0), skipping singular
/// coefficients) whose group has exactly n points.
pub fn find_curve_with_order(p: u64, n: u64) -> Result<Curve, ConstructError> {
    if !is_prime(p) {
        return Err(ConstructError::NotPrime(p));
    }
    if p <= 3 {
        return Err(ConstructError::PrimeTooSmall(p));
    }
    if p > CURVE_ENUMERATION_LIMIT {
        return Err(ConstructError::PrimeTooLarge(p));
    }
    if n % 2 == 0 {
        return Err(ConstructError::EvenOrder { n });
    }
    let gap = n as i128 - (p as i128 + 1);
    if gap * gap > 4 * p as i128 {
        return Err(ConstructError::OutsideHasseInterval { p, n });
    }
    let squares = square_table(p);
    for a in 0..p {
        for b in 0..p {
            let curve = match Curve::new(p, a, b) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let mut count = 1u64;
            for x in 0..p {
                let rhs = curve.rhs(x);
                if rhs == 0 {
                    count += 1;
                } else if squares[rhs as usize] {
                    count += 2;
                }
            }
            if count == n {
                return Ok(curve);
            }
        }
    }
    Err(ConstructError::NoCurveFound { p, n })
}

/// How a half-set S picks one point from each inverse pair {P, ⊖P}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRule {
    /// The point with lexicographically smaller (x, y), coordinates in [0, p).
    Canonical,
    /// One seeded coin per pair; pairs visited in ascending order of their
    /// smaller member's index, coin bit 1 keeps the smaller member.
    Random,
}

/// A subset S of a point group with S ∪ ⊖S ∪ {0} = G and S ∩ ⊖S = ∅.
#[derive(Debug, Clone)]
pub struct HalfSet {
    rule: SplitRule,
    seed: Option<u64>,
    member: Vec<bool>,
}

impl HalfSet {
    pub fn rule(&self) -> SplitRule {
        self.rule
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn contains(&self, i: usize) -> bool {
        self.member[i]
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.member.len()).filter(|&i| self.member[i]).collect()
    }
}

/// Split the nonzero points into S / ⊖S. `seed` is only consulted under
/// [`SplitRule::Random`] (absent seed means 0).
pub fn split_inverse_pairs(
    table: &GroupTable,
    rule: SplitRule,
    seed: Option<u64>,
) -> Result<HalfSet, ConstructError> {
    let n = table.order();
    if n % 2 == 0 {
        return Err(ConstructError::EvenOrder { n: n as u64 });
    }
    let mut member = vec![false; n];
    let mut decided = vec![false; n];
    decided[0] = true;
    let mut rng = rng::seeded(seed.unwrap_or(0));
    for i in 1..n {
        if decided[i] {
            continue;
        }
        let j = table.neg(i);
        debug_assert!(j > i, "odd order leaves no self-inverse points");
        let keep_smaller = match rule {
            SplitRule::Canonical => true,
            SplitRule::Random => {
                use rand::RngCore;
                rng.next_u32() & 1 == 1
            }
        };
        member[if keep_smaller { i } else { j }] = true;
        decided[i] = true;
        decided[j] = true;
    }
    let half = HalfSet { rule, seed, member };
    debug_assert_eq!(half.len(), (n - 1) / 2);
    Ok(half)
}

/// Tournament on the group elements with x → y iff x ⊖ y ∈ S.
pub fn build_elliptic_tournament(table: &GroupTable, s: &HalfSet) -> Tournament {
    let n = table.order();
    assert_eq!(s.member.len(), n, "half-set built for a different group");
    Tournament::from_orientation(n, |x, y| s.contains(table.sub(x, y)))
}

// ---- family specs -------------------------------------------------------

/// JSON-facing construction description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilySpec {
    Cyclotomic { p: u64, m: u32, ivec: Vec<u32> },
    Paley { p: u64 },
    Elliptic {
        p: u64,
        n: u64,
        rule: SplitRule,
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// A built tournament plus whatever reusable structure the family exposes.
pub struct Construction {
    pub tournament: Tournament,
    /// Difference set for circulant (cyclotomic/Paley) families.
    pub residues: Option<Vec<u64>>,
}

impl FamilySpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            FamilySpec::Cyclotomic { .. } => "cyclotomic",
            FamilySpec::Paley { .. } => "paley",
            FamilySpec::Elliptic { .. } => "elliptic",
        }
    }

    pub fn build(&self) -> Result<Construction, ConstructError> {
        match self {
            FamilySpec::Cyclotomic { p, m, ivec } => {
                let spec = CyclotomicSpec::new(*p, *m, ivec.clone())?;
                Ok(Construction {
                    tournament: build_cyclotomic(&spec),
                    residues: Some(spec.difference_set().to_vec()),
                })
            }
            FamilySpec::Paley { p } => {
                let spec = paley_spec(*p)?;
                Ok(Construction {
                    tournament: build_cyclotomic(&spec),
                    residues: Some(spec.difference_set().to_vec()),
                })
            }
            FamilySpec::Elliptic { p, n, rule, seed } => {
                let curve = find_curve_with_order(*p, *n)?;
                let table = curve_points(&curve)?;
                let half = split_inverse_pairs(&table, *rule, *seed)?;
                Ok(Construction {
                    tournament: build_elliptic_tournament(&table, &half),
                    residues: None,
                })
            }
        }
    }
}
