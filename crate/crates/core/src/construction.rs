//! Code families, parameter derivation and plane-by-plane encoding.
//!
//! All families share one shape: a node stores `ℓ = s · s_m^n` symbols
//! indexed by `(a, b)`, and for every plane `(a, b)` the `n` symbols
//! `c_{1,(a,b)}, …, c_{n,(a,b)}` form a GRS word whose evaluation point at
//! node `i` is `λ_{i, a_i}`:
//!
//! ```text
//! Σ_i λ_{i,a_i}^(t-1) · c_{i,(a,b)} = 0      for t = 1..r
//! ```
//!
//! The families differ only in how `s_m` (the digit base) and `s` (the block
//! count) are derived from the repair patterns they promise to support, and
//! in the repair schedule built on top (see [`crate::repair`]).
//!
//! Node indices are 1-based everywhere in this module.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, PrimeField};
use crate::grs::{self, GrsError};
use crate::mixed_radix::{Radix, RadixError};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("invalid parameters: {0}")]
    Constraint(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Radix(#[from] RadixError),
    #[error(transparent)]
    Grs(#[from] GrsError),
    #[error("expected {rows} rows of {ell} symbols")]
    Dimension { rows: usize, ell: usize },
    #[error("node {0} is outside [1, n]")]
    BadNode(usize),
    #[error("node {0} listed twice")]
    DuplicateNode(usize),
    #[error("need at least {k} surviving columns, got {got}")]
    TooFewColumns { k: usize, got: usize },
    #[error("symbol {value} at node {node} is not below the modulus")]
    SymbolOutOfRange { node: usize, value: u64 },
    #[error("surviving columns are inconsistent at plane {plane}; data is corrupted")]
    Corrupted { plane: usize },
}

fn constraint(msg: impl Into<String>) -> CodeError {
    CodeError::Constraint(msg.into())
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Single failures at several repair degrees.
    C1,
    /// Multiple failures, every pattern with `h | (d-k)`.
    C2,
    /// One general `(h, d)` pattern with grouped repair.
    C3,
    /// Every listed `(h, d)` pattern at once, grouped repair per block.
    C4,
    /// Binary digits (`ℓ = 2^n`), coset-indexed grouped repair.
    Hadamard,
}

impl Family {
    pub fn tag(&self) -> u8 {
        match self {
            Family::C1 => 1,
            Family::C2 => 2,
            Family::C3 => 3,
            Family::C4 => 4,
            Family::Hadamard => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            1 => Family::C1,
            2 => Family::C2,
            3 => Family::C3,
            4 => Family::C4,
            5 => Family::Hadamard,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::C1 => "c1",
            Family::C2 => "c2",
            Family::C3 => "c3",
            Family::C4 => "c4",
            Family::Hadamard => "hadamard",
        })
    }
}

impl FromStr for Family {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(Family::C1),
            "c2" => Ok(Family::C2),
            "c3" => Ok(Family::C3),
            "c4" => Ok(Family::C4),
            "hadamard" | "h" => Ok(Family::Hadamard),
            other => Err(constraint(format!("unknown family {other:?}"))),
        }
    }
}

/// A repair pattern: `h` failed nodes rebuilt from `d` helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern {
    pub h: usize,
    pub d: usize,
}

impl Pattern {
    pub fn new(h: usize, d: usize) -> Self {
        Self { h, d }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.h, self.d)
    }
}

/// How a pattern's repair groups are laid out over the `(a, b)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// All failed nodes in one group; shifts run over the whole digit base at
    /// a fixed `b`. Used by the pattern with the largest span in C1/C2.
    Cyclic,
    /// Failed nodes split into chunks of `delta`; each block of `width`
    /// consecutive `b` values is repaired with staggered digit shifts.
    Layered,
    /// Binary digits, groups indexed by Hamming cosets.
    Coset,
}

/// A pattern together with its derived repair parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternInfo {
    pub pattern: Pattern,
    /// Size of each chunk of failed nodes solved together.
    pub delta: usize,
    /// Number of digit shifts one group sums over (`s_i`).
    pub span: usize,
    /// Number of `b` values one repair block covers, `(d-k+h)/delta`.
    pub width: usize,
    pub scheme: Scheme,
}

impl PatternInfo {
    /// Number of failed-node chunks, `h / delta`.
    pub fn parts(&self) -> usize {
        self.pattern.h / self.delta
    }
}

/// Fully derived parameters of one code instance.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    family: Family,
    n: usize,
    k: usize,
    /// Caller order.
    patterns: Vec<PatternInfo>,
    /// Indices into `patterns`, ascending by span (stable).
    sorted: Vec<usize>,
    radix: Radix,
    field: PrimeField,
    /// Row-major `n × base`; `λ_{i,j}` at `(i-1)·base + j`.
    lambda: Vec<u64>,
    hadamard_w: Option<usize>,
}

/// Tag of the default evaluation-point rule `λ_{i,j} = (i-1)·s_m + j + 1`.
pub const LAMBDA_RULE: &str = "offset-row-major";

impl CodeSpec {
    /// Builds a spec over the smallest admissible prime field.
    pub fn build(family: Family, n: usize, k: usize, patterns: &[Pattern]) -> Result<Self, CodeError> {
        Self::build_with_min_prime(family, n, k, patterns, 0)
    }

    /// Builds a spec whose field modulus is also at least `min_prime`.
    pub fn build_with_min_prime(
        family: Family,
        n: usize,
        k: usize,
        patterns: &[Pattern],
        min_prime: u64,
    ) -> Result<Self, CodeError> {
        if k == 0 || k >= n {
            return Err(constraint(format!("need 1 <= k < n (n={n}, k={k})")));
        }
        if patterns.is_empty() {
            return Err(constraint("at least one repair pattern is required"));
        }
        for (i, p) in patterns.iter().enumerate() {
            if patterns[..i].contains(p) {
                return Err(constraint(format!("pattern {p} listed twice")));
            }
        }
        let r = n - k;
        let derived = match family {
            Family::C1 => derive_c1(n, k, patterns)?,
            Family::C2 => derive_c2(n, k, r, patterns)?,
            Family::C3 => derive_c3(n, k, r, patterns)?,
            Family::C4 => derive_c4(n, k, r, patterns)?,
            Family::Hadamard => derive_hadamard(n, k, r, patterns)?,
        };
        let Derived {
            infos,
            base,
            blocks,
            hadamard_w,
        } = derived;

        let mut sorted: Vec<usize> = (0..infos.len()).collect();
        sorted.sort_by_key(|&i| infos[i].span);

        let radix = Radix::new(base, n, blocks)?;
        let needed = (base as u64)
            .checked_mul(n as u64)
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| constraint("field size overflow"))?;
        let field = PrimeField::smallest_at_least(needed.max(min_prime))?;
        let lambda = assign_lambda(n, base, &field);
        Ok(Self {
            family,
            n,
            k,
            patterns: infos,
            sorted,
            radix,
            field,
            lambda,
            hadamard_w,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.n - self.k
    }

    /// Sub-packetization `ℓ`.
    pub fn ell(&self) -> usize {
        self.radix.len()
    }

    /// Digit base `s_m`.
    pub fn base(&self) -> usize {
        self.radix.base()
    }

    /// Block count `s`.
    pub fn blocks(&self) -> usize {
        self.radix.blocks()
    }

    pub fn radix(&self) -> &Radix {
        &self.radix
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    /// Patterns in the order they were supplied.
    pub fn patterns(&self) -> impl Iterator<Item = &PatternInfo> {
        self.patterns.iter()
    }

    /// Patterns ascending by span, the order the construction relies on.
    pub fn sorted_patterns(&self) -> impl Iterator<Item = &PatternInfo> {
        self.sorted.iter().map(|&i| &self.patterns[i])
    }

    pub fn pattern_info(&self, pattern: Pattern) -> Option<&PatternInfo> {
        self.patterns.iter().find(|p| p.pattern == pattern)
    }

    /// Hamming parameter `w` with `h/(d-k) = 2^w - 1` (Hadamard family only).
    pub fn hadamard_w(&self) -> Option<usize> {
        self.hadamard_w
    }

    /// `λ_{node, digit}`, node 1-based.
    #[inline]
    pub fn lambda(&self, node: usize, digit: usize) -> u64 {
        self.lambda[(node - 1) * self.base() + digit]
    }

    pub fn lambda_table(&self) -> Vec<Vec<u64>> {
        self.lambda.chunks(self.base()).map(<[u64]>::to_vec).collect()
    }

    /// Evaluation points of plane `(a, ·)`, one per node.
    pub fn plane_points(&self, a: usize) -> Vec<u64> {
        let mut pts = vec![0; self.n];
        self.fill_plane_points(a, &mut pts);
        pts
    }

    #[inline]
    pub(crate) fn fill_plane_points(&self, a: usize, out: &mut [u64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.lambda(i + 1, self.radix.digit(a, i + 1));
        }
    }

    pub fn check_node(&self, node: usize) -> Result<(), CodeError> {
        if node == 0 || node > self.n {
            return Err(CodeError::BadNode(node));
        }
        Ok(())
    }

    /// Uniformly random `k × ℓ` data.
    pub fn random_data<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<u64>> {
        let p = self.field.modulus();
        (0..self.k)
            .map(|_| (0..self.ell()).map(|_| rng.gen_range(0..p)).collect())
            .collect()
    }

    /// Systematic encoding: node `i ≤ k` stores `data[i-1]`; parity nodes are
    /// solved plane by plane (`b` outer, `a` inner).
    pub fn encode(&self, data: &[Vec<u64>]) -> Result<Codeword, CodeError> {
        let ell = self.ell();
        if data.len() != self.k || data.iter().any(|row| row.len() != ell) {
            return Err(CodeError::Dimension { rows: self.k, ell });
        }
        let p = self.field.modulus();
        for (i, row) in data.iter().enumerate() {
            if let Some(&value) = row.iter().find(|&&v| v >= p) {
                return Err(CodeError::SymbolOutOfRange { node: i + 1, value });
            }
        }
        let mut columns: Vec<Vec<u64>> = data.to_vec();
        columns.resize(self.n, vec![0; ell]);
        let erased: Vec<usize> = (self.k..self.n).collect();
        let mut points = vec![0u64; self.n];
        let mut values = vec![0u64; self.n];
        for tau in 0..ell {
            self.fill_plane_points(tau % self.radix.width(), &mut points);
            for (i, v) in values.iter_mut().enumerate().take(self.k) {
                *v = columns[i][tau];
            }
            grs::solve_erasures(&self.field, &points, &mut values, &erased, self.r())?;
            for i in self.k..self.n {
                columns[i][tau] = values[i];
            }
        }
        Ok(Codeword { columns })
    }

    /// Rebuilds the full codeword from at least `k` surviving columns. Extra
    /// columns beyond `k` act as consistency checks.
    pub fn mds_reconstruct(&self, surviving: &[(usize, &[u64])]) -> Result<Codeword, CodeError> {
        let ell = self.ell();
        let mut present = vec![false; self.n];
        for &(node, col) in surviving {
            self.check_node(node)?;
            if present[node - 1] {
                return Err(CodeError::DuplicateNode(node));
            }
            if col.len() != ell {
                return Err(CodeError::Dimension { rows: 1, ell });
            }
            present[node - 1] = true;
        }
        if surviving.len() < self.k {
            return Err(CodeError::TooFewColumns {
                k: self.k,
                got: surviving.len(),
            });
        }
        let erased: Vec<usize> = (0..self.n).filter(|&i| !present[i]).collect();
        let mut columns = vec![vec![0u64; ell]; self.n];
        for &(node, col) in surviving {
            columns[node - 1].copy_from_slice(col);
        }
        let mut points = vec![0u64; self.n];
        let mut values = vec![0u64; self.n];
        for tau in 0..ell {
            self.fill_plane_points(tau % self.radix.width(), &mut points);
            for (i, v) in values.iter_mut().enumerate() {
                *v = columns[i][tau];
            }
            grs::solve_erasures(&self.field, &points, &mut values, &erased, self.r()).map_err(
                |e| match e {
                    GrsError::Inconsistent { .. } => CodeError::Corrupted { plane: tau },
                    other => other.into(),
                },
            )?;
            for &i in &erased {
                columns[i][tau] = values[i];
            }
        }
        Ok(Codeword { columns })
    }

    /// Checks every plane's parity equations.
    pub fn verify(&self, codeword: &Codeword) -> Result<(), CodeError> {
        if codeword.columns.len() != self.n || codeword.columns.iter().any(|c| c.len() != self.ell()) {
            return Err(CodeError::Dimension {
                rows: self.n,
                ell: self.ell(),
            });
        }
        let mut points = vec![0u64; self.n];
        let mut values = vec![0u64; self.n];
        for tau in 0..self.ell() {
            self.fill_plane_points(tau % self.radix.width(), &mut points);
            for (i, v) in values.iter_mut().enumerate() {
                *v = codeword.columns[i][tau];
            }
            if grs::raw_syndromes(&self.field, &points, &values, self.r())
                .iter()
                .any(|&s| s != 0)
            {
                return Err(CodeError::Corrupted { plane: tau });
            }
        }
        Ok(())
    }
}

/// Default evaluation points, `λ_{i,j} = (i-1)·base + j + 1`, flattened
/// row-major. All distinct and nonzero as long as `p > n·base`.
pub fn assign_lambda(n: usize, base: usize, field: &PrimeField) -> Vec<u64> {
    (0..n * base).map(|x| field.reduce(x as u64 + 1)).collect()
}

/// The `n` columns of one codeword; column `j` is node `j`'s content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    columns: Vec<Vec<u64>>,
}

impl Codeword {
    pub fn from_columns(columns: Vec<Vec<u64>>) -> Self {
        Self { columns }
    }

    /// Column of node `node` (1-based).
    pub fn column(&self, node: usize) -> &[u64] {
        &self.columns[node - 1]
    }

    pub fn columns(&self) -> &[Vec<u64>] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Vec<u64>> {
        self.columns
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }
}

struct Derived {
    infos: Vec<PatternInfo>,
    base: usize,
    blocks: usize,
    hadamard_w: Option<usize>,
}

fn check_h_d(n: usize, k: usize, r: usize, p: Pattern) -> Result<(), CodeError> {
    if p.h == 0 || p.h > r {
        return Err(constraint(format!("pattern {p}: need 1 <= h <= n - k = {r}")));
    }
    if p.d < k || p.d + p.h > n {
        return Err(constraint(format!(
            "pattern {p}: need k <= d <= n - h (k={k}, n-h={})",
            n - p.h
        )));
    }
    Ok(())
}

/// C1 and C2 share a derivation: `s_i = (d_i-k+h_i)/h_i`, `s_m = max s_i`,
/// `s = lcm` of the others (1 when there are none).
fn derive_divisible(infos: Vec<PatternInfo>) -> Derived {
    let mut order: Vec<usize> = (0..infos.len()).collect();
    order.sort_by_key(|&i| infos[i].span);
    let top = *order.last().expect("non-empty");
    let base = infos[top].span;
    let blocks = order[..order.len() - 1]
        .iter()
        .fold(1, |acc, &i| lcm(acc, infos[i].span));
    let infos = infos
        .into_iter()
        .enumerate()
        .map(|(i, mut info)| {
            if i == top {
                info.scheme = Scheme::Cyclic;
                info.width = base;
            }
            info
        })
        .collect();
    Derived {
        infos,
        base,
        blocks,
        hadamard_w: None,
    }
}

fn derive_c1(n: usize, k: usize, patterns: &[Pattern]) -> Result<Derived, CodeError> {
    let mut infos = Vec::new();
    for &p in patterns {
        if p.h != 1 {
            return Err(constraint(format!("C1 repairs single failures only, got h={}", p.h)));
        }
        if p.d <= k || p.d > n - 1 {
            return Err(constraint(format!(
                "C1 needs k < d <= n - 1 (k={k}, d={}, n-1={})",
                p.d,
                n - 1
            )));
        }
        let span = p.d - k + 1;
        infos.push(PatternInfo {
            pattern: p,
            delta: 1,
            span,
            width: span,
            scheme: Scheme::Layered,
        });
    }
    Ok(derive_divisible(infos))
}

fn derive_c2(n: usize, k: usize, r: usize, patterns: &[Pattern]) -> Result<Derived, CodeError> {
    let mut infos = Vec::new();
    for &p in patterns {
        check_h_d(n, k, r, p)?;
        if !(p.d - k).is_multiple_of(p.h) {
            return Err(constraint(format!("C2 needs h | (d - k), violated by {p}")));
        }
        let span = (p.d - k + p.h) / p.h;
        infos.push(PatternInfo {
            pattern: p,
            delta: p.h,
            span,
            width: span,
            scheme: Scheme::Layered,
        });
    }
    Ok(derive_divisible(infos))
}

fn layered_info(k: usize, p: Pattern) -> PatternInfo {
    let delta = gcd(p.h, p.d - k);
    PatternInfo {
        pattern: p,
        delta,
        span: (p.d - k + delta) / delta,
        width: (p.d - k + p.h) / delta,
        scheme: Scheme::Layered,
    }
}

fn derive_c3(n: usize, k: usize, r: usize, patterns: &[Pattern]) -> Result<Derived, CodeError> {
    let [p] = patterns else {
        return Err(constraint("C3 takes exactly one (h, d) pattern"));
    };
    let p = *p;
    if p.h < 2 || p.h > r {
        return Err(constraint(format!("C3 needs 2 <= h <= n - k = {r}, got h={}", p.h)));
    }
    if p.d <= k {
        return Err(constraint(format!("C3 needs k < d, got d={} with k={k}", p.d)));
    }
    if p.d + p.h > n {
        return Err(constraint(format!(
            "C3 needs d <= n - h (d={}, n-h={})",
            p.d,
            n - p.h
        )));
    }
    let info = layered_info(k, p);
    Ok(Derived {
        base: info.span,
        blocks: info.width,
        infos: vec![info],
        hadamard_w: None,
    })
}

fn derive_c4(n: usize, k: usize, r: usize, patterns: &[Pattern]) -> Result<Derived, CodeError> {
    let mut infos = Vec::new();
    for &p in patterns {
        check_h_d(n, k, r, p)?;
        infos.push(layered_info(k, p));
    }
    let base = infos.iter().map(|i| i.span).max().expect("non-empty");
    let blocks = infos.iter().fold(1, |acc, i| lcm(acc, i.width));
    Ok(Derived {
        infos,
        base,
        blocks,
        hadamard_w: None,
    })
}

fn derive_hadamard(n: usize, k: usize, r: usize, patterns: &[Pattern]) -> Result<Derived, CodeError> {
    let [p] = patterns else {
        return Err(constraint("the Hadamard family takes exactly one (h, d) pattern"));
    };
    let p = *p;
    check_h_d(n, k, r, p)?;
    if p.d == k {
        return Err(constraint("the Hadamard family needs d > k"));
    }
    let delta = p.d - k;
    if p.h % delta != 0 {
        return Err(constraint(format!("Hadamard needs (d - k) | h, violated by {p}")));
    }
    let cosets = p.h / delta + 1;
    if !cosets.is_power_of_two() || cosets.trailing_zeros() as usize > n {
        return Err(constraint(format!(
            "Hadamard needs h/(d-k) + 1 to be a power of two dividing 2^n, got {cosets}"
        )));
    }
    Ok(Derived {
        infos: vec![PatternInfo {
            pattern: p,
            delta,
            span: 2,
            width: cosets,
            scheme: Scheme::Coset,
        }],
        base: 2,
        blocks: 1,
        hadamard_w: Some(cosets.trailing_zeros() as usize),
    })
}
