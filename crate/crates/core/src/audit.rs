//! Cut-set bound, transcript auditing and the sub-packetization comparator.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construction::{gcd, CodeSpec, Pattern};
use crate::repair::RepairTranscript;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("cut-set bound for h={h}, d={d}, k={k}, l={ell} is not an integer")]
    NonInteger { h: usize, d: usize, k: usize, ell: u64 },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("malformed transcript: {0}")]
    Malformed(String),
    #[error("bound exceeds 64 bits")]
    Overflow,
}

/// Per-helper and total download lower bounds `(β, γ)`:
/// `β = hℓ/(d-k+h)`, `γ = dβ`.
pub fn cut_set(h: usize, d: usize, k: usize, ell: u64) -> Result<(u64, u64), AuditError> {
    if h == 0 || d < k {
        return Err(AuditError::Parameters(format!("need h >= 1 and d >= k, got h={h}, d={d}, k={k}")));
    }
    let num = h as u128 * ell as u128;
    let den = (d - k + h) as u128;
    if !num.is_multiple_of(den) {
        return Err(AuditError::NonInteger { h, d, k, ell });
    }
    let beta = num / den;
    let gamma = beta * d as u128;
    Ok((
        u64::try_from(beta).map_err(|_| AuditError::Overflow)?,
        u64::try_from(gamma).map_err(|_| AuditError::Overflow)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pattern: Pattern,
    pub sub_packetization: usize,
    pub stripes: usize,
    pub per_helper_bound: u64,
    pub cut_set_bound: u64,
    pub per_helper_min: u64,
    pub per_helper_max: u64,
    pub total: u64,
    /// Total equals the bound.
    pub optimal: bool,
    /// Every helper contributed exactly the per-helper bound.
    pub uniform: bool,
}

impl BoundReport {
    pub fn conforming(&self) -> bool {
        self.optimal && self.uniform
    }
}

/// Cheap check against the bounds already stored in the transcript.
pub(crate) fn conforms(t: &RepairTranscript) -> bool {
    t.per_helper.len() == t.pattern.d
        && t.total == t.cut_set_bound
        && t.per_helper.values().all(|&c| c == t.per_helper_bound)
}

/// Recomputes the bounds for `spec` and compares them with a transcript.
pub fn verify_transcript(t: &RepairTranscript, spec: &CodeSpec) -> Result<BoundReport, AuditError> {
    let pattern = t.pattern;
    if t.sub_packetization != spec.ell() {
        return Err(AuditError::Malformed(format!(
            "transcript sub-packetization {} but code has {}",
            t.sub_packetization,
            spec.ell()
        )));
    }
    if t.failed.len() != pattern.h || t.helpers.len() != pattern.d {
        return Err(AuditError::Malformed(format!(
            "{} failed and {} helpers do not match pattern {pattern}",
            t.failed.len(),
            t.helpers.len()
        )));
    }
    if t.per_helper.keys().ne(t.helpers.iter()) {
        return Err(AuditError::Malformed("per-helper counts do not match the helper set".into()));
    }
    let sum: u64 = t.per_helper.values().sum();
    if sum != t.total {
        return Err(AuditError::Malformed(format!("total {} but counts add to {sum}", t.total)));
    }
    if !t.downloads.is_empty() && t.downloads.len() as u64 != t.total {
        return Err(AuditError::Malformed(format!(
            "{} recorded downloads but total {}",
            t.downloads.len(),
            t.total
        )));
    }
    let (beta, gamma) = cut_set(pattern.h, pattern.d, spec.k(), spec.ell() as u64)?;
    let stripes = t.stripes as u64;
    let (beta, gamma) = (beta * stripes, gamma * stripes);
    let per_helper_min = t.per_helper.values().copied().min().unwrap_or(0);
    let per_helper_max = t.per_helper.values().copied().max().unwrap_or(0);
    Ok(BoundReport {
        pattern,
        sub_packetization: spec.ell(),
        stripes: t.stripes,
        per_helper_bound: beta,
        cut_set_bound: gamma,
        per_helper_min,
        per_helper_max,
        total: t.total,
        optimal: t.total == gamma,
        uniform: per_helper_min == beta && per_helper_max == beta,
    })
}

/// One row of the sub-packetization comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub id: String,
    pub formula: String,
    pub scope: String,
    #[serde(serialize_with = "big_as_string", deserialize_with = "big_from_string")]
    pub value: BigUint,
}

fn big_as_string<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn big_from_string<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub n: usize,
    pub k: usize,
    pub h: usize,
    pub d: usize,
    pub rows: Vec<TableRow>,
}

fn big(x: usize) -> BigUint {
    BigUint::from(x)
}

fn lcm_range(lo: usize, hi: usize) -> BigUint {
    let mut acc = BigUint::one();
    for x in lo..=hi {
        let x = big(x);
        let g = num_integer_gcd(&acc, &x);
        acc = acc * &x / g;
    }
    acc
}

fn num_integer_gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    while b != BigUint::ZERO {
        let t = &a % &b;
        a = b;
        b = t;
    }
    a
}

/// Closed-form sub-packetization of every construction applicable to `(h, d)`.
pub fn subpacketization_table(n: usize, k: usize, h: usize, d: usize) -> Result<TableReport, AuditError> {
    if k == 0 || k >= n {
        return Err(AuditError::Parameters(format!("need 0 < k < n, got n={n}, k={k}")));
    }
    let r = n - k;
    if h < 2 || h > r {
        return Err(AuditError::Parameters(format!("need 2 <= h <= n - k = {r}, got h={h}")));
    }
    if d < k || d + h > n {
        return Err(AuditError::Parameters(format!("need k <= d <= n - h, got d={d}")));
    }
    let e = d - k;
    let nn = n as u32;
    let mut rows = Vec::new();
    let mut push = |id: &str, formula: String, scope: &str, value| {
        rows.push(TableRow { id: id.into(), formula, scope: scope.into(), value })
    };

    push(
        "lcm-window",
        format!("lcm({}..{})^{n}", e + 1, e + h),
        "single pattern",
        lcm_range(e + 1, e + h).pow(nn),
    );
    push(
        "span-product",
        format!("{}*{}^{n}", e + h, e + 1),
        "single pattern",
        big(e + h) * big(e + 1).pow(nn),
    );
    if e.is_multiple_of(h) {
        push(
            "divisible-power",
            format!("{}^{n}", (e + h) / h),
            "single pattern, h | (d - k)",
            big((e + h) / h).pow(nn),
        );
    }
    if e > 0 {
        let delta = gcd(h, e);
        push(
            "c3",
            format!("{}*{}^{n}", (e + h) / delta, (e + delta) / delta),
            "single pattern, d > k",
            big((e + h) / delta) * big((e + delta) / delta).pow(nn),
        );
        let cosets = h / e + 1;
        if h.is_multiple_of(e) && cosets.is_power_of_two() && cosets.trailing_zeros() as usize <= n {
            push("hadamard", format!("2^{n}"), "(d - k) | h, h/(d - k) + 1 | 2^n", big(2).pow(nn));
        }
    }
    push(
        "lcm-all",
        format!("lcm(1..{r})^{n}"),
        "all patterns",
        lcm_range(1, r).pow(nn),
    );
    let envelope = lcm_range(1, r) * big(r).pow(nn);
    push(
        "c2-all",
        format!("lcm(1..{r})*{r}^{n}"),
        "all patterns with h | (d - k)",
        envelope.clone(),
    );
    push("c4-all", format!("lcm(1..{r})*{r}^{n}"), "all patterns", envelope);
    Ok(TableReport { n, k, h, d, rows })
}

impl TableReport {
    pub fn row(&self, id: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,formula,scope,value\n");
        for row in &self.rows {
            let _ = writeln!(out, "{},{},\"{}\",{}", row.id, row.formula, row.scope, row.value);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let headers = ["id", "formula", "scope", "value"];
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| [r.id.clone(), r.formula.clone(), r.scope.clone(), r.value.to_string()])
            .collect();
        let mut widths = headers.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = format!("n={} k={} h={} d={}\n", self.n, self.k, self.h, self.d);
        let line = |out: &mut String, row: [&str; 4]| {
            let _ = writeln!(
                out,
                "{:<w0$}  {:<w1$}  {:<w2$}  {:>w3$}",
                row[0],
                row[1],
                row[2],
                row[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            );
        };
        line(&mut out, headers);
        for row in &cells {
            line(&mut out, [&row[0], &row[1], &row[2], &row[3]]);
        }
        out
    }
}
