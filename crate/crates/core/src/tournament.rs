//! Bit-packed tournaments, rankings, and the counting primitives everything
//! else is built on.
//!
//! A tournament on `n` vertices is stored as `n` rows of machine words, one
//! bit per potential out-neighbor, so degree and common-neighbor counts are
//! popcounts over a handful of `u64`s even at the largest sizes this crate
//! targets (a few thousand vertices).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// First adjacency defect found while scanning a 0/1 matrix row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `m[v][v] == 1`.
    SelfLoop { vertex: usize },
    /// Both `x -> y` and `y -> x` present.
    BothDirections { x: usize, y: usize },
    /// Neither direction present between distinct vertices.
    MissingEdge { x: usize, y: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            Violation::BothDirections { x, y } => {
                write!(f, "both directions present between {x} and {y}")
            }
            Violation::MissingEdge { x, y } => {
                write!(f, "no edge in either direction between {x} and {y}")
            }
        }
    }
}

/// Errors from reading the plain-text tournament format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("line 1 must be a positive decimal vertex count, got {0:?}")]
    BadVertexCount(String),
    #[error("expected {expected} matrix lines, found {got}")]
    LineCount { expected: usize, got: usize },
    #[error("line {line}: expected {expected} characters, got {got}")]
    LineLength { line: usize, expected: usize, got: usize },
    #[error("line {line}, column {col}: expected '0' or '1', got {ch:?}")]
    BadChar { line: usize, col: usize, ch: char },
    #[error("missing trailing newline")]
    MissingTrailingNewline,
    #[error("adjacency matrix is not a tournament: {0}")]
    NotATournament(Violation),
}

/// A set of vertices of a fixed tournament, bit-packed to match row layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet { n, words: vec![0; words_for(n)] }
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(n: usize, iter: I) -> Self {
        let mut s = VertexSet::empty(n);
        for v in iter {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.n, "vertex {v} out of range for n = {}", self.n);
        self.words[v / WORD_BITS] |= 1 << (v % WORD_BITS);
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.words[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            BitIter(w).map(move |b| wi * WORD_BITS + b)
        })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// A ranking of `n` vertices: `rank(v)` is a bijection onto `1..=n`,
/// 1 = best. Stored as the rank of each vertex, serialized as that array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Ranking {
    ranks: Vec<u32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("ranks must be a bijection onto 1..=n: {reason}")]
pub struct RankingError {
    reason: String,
}

impl Ranking {
    pub fn new(ranks: Vec<u32>) -> Result<Self, RankingError> {
        let n = ranks.len();
        let mut seen = vec![false; n + 1];
        for &r in &ranks {
            if r == 0 || r as usize > n {
                return Err(RankingError { reason: format!("rank {r} out of range for n = {n}") });
            }
            if seen[r as usize] {
                return Err(RankingError { reason: format!("rank {r} repeated") });
            }
            seen[r as usize] = true;
        }
        Ok(Ranking { ranks })
    }

    /// The identity ranking: vertex `v` gets rank `v + 1`.
    pub fn identity(n: usize) -> Self {
        Ranking { ranks: (1..=n as u32).collect() }
    }

    /// Ranking that lists vertices in the order given (first = rank 1).
    pub fn from_order(order: &[usize]) -> Self {
        let mut ranks = vec![0u32; order.len()];
        for (pos, &v) in order.iter().enumerate() {
            assert!(v < order.len() && ranks[v] == 0, "order must be a permutation");
            ranks[v] = pos as u32 + 1;
        }
        Ranking { ranks }
    }

    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, v: usize) -> u32 {
        self.ranks[v]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// Vertices listed best-first.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0usize; self.ranks.len()];
        for (v, &r) in self.ranks.iter().enumerate() {
            order[r as usize - 1] = v;
        }
        order
    }

    /// The reversal `v ↦ n + 1 - rank(v)`.
    pub fn reversed(&self) -> Ranking {
        let n = self.ranks.len() as u32;
        Ranking { ranks: self.ranks.iter().map(|&r| n + 1 - r).collect() }
    }

    /// Uniformly random ranking under the given seed.
    pub fn random(n: usize, seed: u64) -> Ranking {
        let mut order: Vec<usize> = (0..n).collect();
        rng::shuffle(&mut rng::seeded(seed), &mut order);
        Ranking::from_order(&order)
    }
}

impl TryFrom<Vec<u32>> for Ranking {
    type Error = RankingError;

    fn try_from(ranks: Vec<u32>) -> Result<Self, RankingError> {
        Ranking::new(ranks)
    }
}

impl From<Ranking> for Vec<u32> {
    fn from(r: Ranking) -> Vec<u32> {
        r.ranks
    }
}

/// A tournament: complete directed graph with exactly one arc per vertex pair.
#[derive(Clone, PartialEq, Eq)]
pub struct Tournament {
    n: usize,
    words: usize,
    rows: Vec<u64>, // rows[x * words + w]: bit y of row x set iff x -> y
}

impl fmt::Debug for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tournament(n = {})", self.n)
    }
}

impl Tournament {
    /// Build from an orientation function: for each pair `x < y`,
    /// `forward(x, y) == true` places the arc `x -> y`, otherwise `y -> x`.
    pub fn from_orientation<F: FnMut(usize, usize) -> bool>(n: usize, mut forward: F) -> Self {
        let words = words_for(n);
        let mut rows = vec![0u64; n * words];
        for x in 0..n {
            for y in x + 1..n {
                let (src, dst) = if forward(x, y) { (x, y) } else { (y, x) };
                rows[src * words + dst / WORD_BITS] |= 1 << (dst % WORD_BITS);
            }
        }
        Tournament { n, words, rows }
    }

    /// Build from a full 0/1 matrix, checking the tournament axioms.
    pub fn from_matrix(m: &[Vec<u8>]) -> Result<Self, Violation> {
        let n = m.len();
        let words = words_for(n);
        let mut rows = vec![0u64; n * words];
        for (x, row) in m.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (y, &bit) in row.iter().enumerate() {
                if bit != 0 {
                    rows[x * words + y / WORD_BITS] |= 1 << (y % WORD_BITS);
                }
            }
        }
        let t = Tournament { n, words, rows };
        t.validate()?;
        Ok(t)
    }

    /// Uniformly random tournament: one ChaCha8 draw per pair, pairs visited
    /// in row-major order `(0,1), (0,2), …, (n-2,n-1)`; the low bit of each
    /// `next_u32` set means the arc points from the smaller vertex.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        Tournament::from_orientation(n, |_, _| {
            use rand::RngCore;
            rng.next_u32() & 1 == 1
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.rows[x * self.words + y / WORD_BITS] >> (y % WORD_BITS) & 1 == 1
    }

    pub(crate) fn row(&self, x: usize) -> &[u64] {
        &self.rows[x * self.words..(x + 1) * self.words]
    }

    pub(crate) fn word_count(&self) -> usize {
        self.words
    }

    /// Bit-transpose: word rows of in-neighborhoods, same layout as `row`.
    pub(crate) fn in_rows(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.n * self.words];
        for x in 0..self.n {
            for y in self.out_neighbors(x).iter() {
                out[y * self.words + x / WORD_BITS] |= 1 << (x % WORD_BITS);
            }
        }
        out
    }

    pub fn out_neighbors(&self, x: usize) -> VertexSet {
        VertexSet { n: self.n, words: self.row(x).to_vec() }
    }

    /// Check the axioms; reports the first defect in row-major scan order.
    pub fn validate(&self) -> Result<(), Violation> {
        for x in 0..self.n {
            if self.has_edge(x, x) {
                return Err(Violation::SelfLoop { vertex: x });
            }
            for y in x + 1..self.n {
                match (self.has_edge(x, y), self.has_edge(y, x)) {
                    (true, true) => return Err(Violation::BothDirections { x, y }),
                    (false, false) => return Err(Violation::MissingEdge { x, y }),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn out_degree(&self, x: usize) -> usize {
        self.row(x).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|x| self.out_degree(x)).collect()
    }

    /// Regular: every out-degree equals `(n - 1) / 2` (forces odd `n`).
    pub fn is_regular(&self) -> bool {
        if self.n % 2 == 0 {
            return false;
        }
        let d = (self.n - 1) / 2;
        (0..self.n).all(|x| self.out_degree(x) == d)
    }

    /// Normal: the adjacency matrix commutes with its transpose.
    ///
    /// Checked combinatorially: every vertex has equal out- and in-degree,
    /// and every pair has as many common out-neighbors as common
    /// in-neighbors. Regular tournaments are always normal.
    pub fn is_normal(&self) -> bool {
        let in_rows = self.in_rows();
        for x in 0..self.n {
            let row_x = self.row(x);
            let in_x = &in_rows[x * self.words..(x + 1) * self.words];
            let out_deg: u32 = row_x.iter().map(|w| w.count_ones()).sum();
            let in_deg: u32 = in_x.iter().map(|w| w.count_ones()).sum();
            if out_deg != in_deg {
                return false;
            }
            for y in x + 1..self.n {
                let row_y = self.row(y);
                let in_y = &in_rows[y * self.words..(y + 1) * self.words];
                let common_out: u32 =
                    row_x.iter().zip(row_y).map(|(a, b)| (a & b).count_ones()).sum();
                let common_in: u32 =
                    in_x.iter().zip(in_y).map(|(a, b)| (a & b).count_ones()).sum();
                if common_out != common_in {
                    return false;
                }
            }
        }
        true
    }

    /// Number of common out-neighbors of `x` and `y`.
    pub fn common_out_neighbors(&self, x: usize, y: usize) -> usize {
        self.row(x)
            .iter()
            .zip(self.row(y))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Arcs from `a` into `b`. The sets must be disjoint subsets of the
    /// vertex set.
    pub fn edges_between(&self, a: &VertexSet, b: &VertexSet) -> u64 {
        assert_eq!(a.universe(), self.n, "set A built for a different n");
        assert_eq!(b.universe(), self.n, "set B built for a different n");
        assert!(!a.intersects(b), "A and B must be disjoint");
        let mut total = 0u64;
        for x in a.iter() {
            total += self
                .row(x)
                .iter()
                .zip(b.words())
                .map(|(r, m)| (r & m).count_ones() as u64)
                .sum::<u64>();
        }
        total
    }

    /// Number of arcs `x -> y` with `rank(x) < rank(y)` (arcs the ranking
    /// gets right). Linear scan over vertices in rank order, counting arcs
    /// into the not-yet-ranked suffix.
    pub fn consistent_edges(&self, r: &Ranking) -> u64 {
        assert_eq!(r.n(), self.n, "ranking built for a different n");
        let mut remaining = vec![u64::MAX; self.words];
        if self.n % WORD_BITS != 0 {
            remaining[self.words - 1] = (1u64 << (self.n % WORD_BITS)) - 1;
        }
        // remaining starts as the full vertex set; drop vertices best-first.
        let mut total = 0u64;
        for v in r.order() {
            remaining[v / WORD_BITS] &= !(1 << (v % WORD_BITS));
            total += self
                .row(v)
                .iter()
                .zip(&remaining)
                .map(|(r, m)| (r & m).count_ones() as u64)
                .sum::<u64>();
        }
        total
    }

    /// All-pairs arc count `n(n-1)/2`.
    pub fn edge_count(&self) -> u64 {
        let n = self.n as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Serialize to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity((self.n + 1) * (self.n + 1));
        s.push_str(&self.n.to_string());
        s.push('\n');
        for x in 0..self.n {
            for y in 0..self.n {
                s.push(if self.has_edge(x, y) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Parse the text format produced by [`Tournament::to_text`]; strict
    /// about shape, charset, and the trailing newline.
    pub fn from_text(input: &str) -> Result<Self, ParseError> {
        if input.is_empty() {
            return Err(ParseError::Empty);
        }
        if !input.ends_with('\n') {
            return Err(ParseError::MissingTrailingNewline);
        }
        let mut lines = input.split('\n');
        let header = lines.next().unwrap_or("");
        let n: usize = header
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| ParseError::BadVertexCount(header.to_string()))?;
        let body: Vec<&str> = lines.collect();
        // split on '\n' leaves one empty tail entry for a well-formed file
        let rows = &body[..body.len().saturating_sub(1)];
        if body.last() != Some(&"") || rows.len() != n {
            return Err(ParseError::LineCount { expected: n, got: rows.len() });
        }
        let words = words_for(n);
        let mut bits = vec![0u64; n * words];
        for (x, line) in rows.iter().enumerate() {
            if line.chars().count() != n {
                return Err(ParseError::LineLength {
                    line: x + 2,
                    expected: n,
                    got: line.chars().count(),
                });
            }
            for (y, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => bits[x * words + y / WORD_BITS] |= 1 << (y % WORD_BITS),
                    _ => return Err(ParseError::BadChar { line: x + 2, col: y + 1, ch }),
                }
            }
        }
        let t = Tournament { n, words, rows: bits };
        t.validate().map_err(ParseError::NotATournament)?;
        Ok(t)
    }
}
