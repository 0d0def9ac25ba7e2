//! Centralized repair: plan construction, helper-side aggregation and the
//! two-step solve at the repair center.
//!
//! Every scheme reduces to one primitive. A *group* picks planes
//! `τ_0, …, τ_{m-1}` such that every node outside the group's chunk `P` of
//! failed nodes keeps the same digit (hence the same evaluation point) in all
//! of them, while every node in `P` sees `m` distinct digits. Adding the
//! parity checks of those planes yields one GRS word of length `d + r`:
//!
//! * `|P|·m` individual symbols `c_{j,τ_v}` for `j ∈ P`, at points `λ_{j,a_j(τ_v)}`;
//! * one sum `Σ_v c_{j,τ_v}` for every other node, at point `λ_{j,a_j}`.
//!
//! Helpers send their sums (one symbol per group). The rest, namely the chunk's
//! own symbols plus the sums of non-helper nodes, are exactly `r` erasures.
//! Sums recovered for failed nodes outside `P` feed the second step, which
//! peels the remaining symbols off by subtraction without further download.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{self, AuditError};
use crate::construction::{CodeError, CodeSpec, Codeword, Family, Pattern, PatternInfo, Scheme};
use crate::field::PrimeField;
use crate::grs::{self, GrsError};
use crate::hamming;

#[derive(Debug, Error)]
pub enum RepairError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error("pattern {0} is not supported by this code")]
    UnsupportedPattern(Pattern),
    #[error("expected {expected} {what}, got {got}")]
    WrongSize {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("node {0} is both failed and a helper")]
    Overlap(usize),
    #[error("node {0} listed twice")]
    Duplicate(usize),
    #[error("node {0} is not a helper of this plan")]
    NotAHelper(usize),
    #[error("no payload from helper {0}")]
    MissingPayload(usize),
    #[error("helper {helper} sent {got} symbols, plan expects {expected}")]
    PayloadLength {
        helper: usize,
        expected: usize,
        got: usize,
    },
    #[error("group {group} failed to decode: {source}")]
    Inconsistent { group: usize, source: GrsError },
    #[error("plan invariant violated: {0}")]
    Invariant(String),
}

/// Position of one entry in a group's assembled GRS word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    /// Symbol of a failed node in the group's chunk.
    Unknown { node: usize, plane: usize },
    /// Sum of a node's symbols over the group's planes.
    Sum { node: usize },
}

/// Lexicographic group ordering key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    /// 1-based chunk index `i` of `P_i`.
    pub part: usize,
    /// Repair block (`μ`), or the fixed `b` for the cyclic scheme.
    pub block: usize,
    /// The anchor `a` the shifts are applied to.
    pub anchor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDescriptor {
    pub id: usize,
    pub key: GroupKey,
    /// Failed nodes solved individually in this group.
    pub members: Vec<usize>,
    /// Packed coordinates every helper sums over.
    pub planes: Vec<usize>,
    pub slots: Vec<Slot>,
    pub points: Vec<u64>,
    /// Slot positions unknown to the center.
    pub erased: Vec<usize>,
}

/// Second-step subtraction: `c_{node,target} = S - Σ c_{node,τ}` over the
/// other planes of `group`, where `S` is that node's sum recovered in step 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step2Op {
    pub node: usize,
    pub target: usize,
    pub group: usize,
}

impl Step2Op {
    pub fn subtrahends<'a>(&self, plan: &'a RepairPlan) -> impl Iterator<Item = usize> + 'a {
        let target = self.target;
        plan.groups[self.group]
            .planes
            .iter()
            .copied()
            .filter(move |&t| t != target)
    }
}

/// Scheme-specific structure kept for inspection and reporting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanExtras {
    /// Per chunk, the block-relative `b` offsets its groups solve (`Ω_i`).
    pub omega: Vec<Vec<usize>>,
    /// `b` values per repair block and number of blocks.
    pub block_width: usize,
    pub block_count: usize,
    /// Hadamard: one selector node per chunk (its largest member).
    pub coset_selectors: Vec<usize>,
    pub hamming_w: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RepairPlan {
    family: Family,
    n: usize,
    k: usize,
    ell: usize,
    field: PrimeField,
    info: PatternInfo,
    failed: Vec<usize>,
    helpers: Vec<usize>,
    partition: Vec<Vec<usize>>,
    groups: Vec<GroupDescriptor>,
    step2: Vec<Step2Op>,
    extras: PlanExtras,
}

/// One helper's upload: a symbol per group, in plan order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelperPayload {
    pub helper: usize,
    pub values: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Download {
    pub helper: usize,
    pub group: usize,
    pub value: u64,
}

/// Record of one repair: who sent what, and how it compares to the bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairTranscript {
    pub family: Family,
    pub pattern: Pattern,
    pub failed: Vec<usize>,
    pub helpers: Vec<usize>,
    pub sub_packetization: usize,
    /// Codewords repaired under this transcript.
    pub stripes: usize,
    pub per_helper: BTreeMap<usize, u64>,
    pub total: u64,
    pub per_helper_bound: u64,
    pub cut_set_bound: u64,
    pub optimal: bool,
    /// Erasures in each group's word (the same plan serves every stripe).
    pub group_erasures: Vec<usize>,
    #[serde(skip)]
    pub downloads: Vec<Download>,
}

impl RepairTranscript {
    /// Transcript of a repair that downloads nothing.
    pub fn empty(spec: &CodeSpec, pattern: Pattern) -> Self {
        Self {
            family: spec.family(),
            pattern,
            failed: Vec::new(),
            helpers: Vec::new(),
            sub_packetization: spec.ell(),
            stripes: 0,
            per_helper: BTreeMap::new(),
            total: 0,
            per_helper_bound: 0,
            cut_set_bound: 0,
            optimal: true,
            group_erasures: Vec::new(),
            downloads: Vec::new(),
        }
    }

    /// Folds another stripe's transcript (same plan) into this one.
    pub fn merge(&mut self, other: RepairTranscript) {
        if self.stripes == 0 {
            *self = other;
            return;
        }
        for (helper, count) in other.per_helper {
            *self.per_helper.entry(helper).or_default() += count;
        }
        self.total += other.total;
        self.per_helper_bound += other.per_helper_bound;
        self.cut_set_bound += other.cut_set_bound;
        self.stripes += other.stripes;
        self.optimal &= other.optimal;
        self.downloads.extend(other.downloads);
    }
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    /// `(node, column)` for every failed node, ascending.
    pub restored: Vec<(usize, Vec<u64>)>,
    pub transcript: RepairTranscript,
}

impl RepairPlan {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn pattern(&self) -> Pattern {
        self.info.pattern
    }

    pub fn pattern_info(&self) -> &PatternInfo {
        &self.info
    }

    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    /// Chunks `P_1, …` of the sorted failed set.
    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    pub fn groups(&self) -> &[GroupDescriptor] {
        &self.groups
    }

    pub fn step2(&self) -> &[Step2Op] {
        &self.step2
    }

    pub fn extras(&self) -> &PlanExtras {
        &self.extras
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Symbols each helper uploads.
    pub fn per_helper_download(&self) -> usize {
        self.groups.len()
    }

    pub fn total_download(&self) -> usize {
        self.groups.len() * self.helpers.len()
    }

    /// Coordinates of `node` recovered directly in step 1, ascending.
    pub fn step1_coordinates(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .groups
            .iter()
            .filter(|g| g.members.contains(&node))
            .flat_map(|g| g.planes.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Coordinates of `node` filled by step-2 subtraction, ascending.
    pub fn step2_coordinates(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .step2
            .iter()
            .filter(|op| op.node == node)
            .map(|op| op.target)
            .collect();
        out.sort_unstable();
        out
    }

    fn failed_index(&self, node: usize) -> usize {
        self.failed
            .binary_search(&node)
            .expect("node is in the failed set")
    }
}

fn check_nodes(spec: &CodeSpec, nodes: &[usize]) -> Result<Vec<usize>, RepairError> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    for (i, &node) in sorted.iter().enumerate() {
        spec.check_node(node)?;
        if i > 0 && sorted[i - 1] == node {
            return Err(RepairError::Duplicate(node));
        }
    }
    Ok(sorted)
}

/// Builds the repair plan for failed set `failed` and helper set `helpers`.
pub fn plan(
    spec: &CodeSpec,
    failed: &[usize],
    helpers: &[usize],
    pattern: Pattern,
) -> Result<RepairPlan, RepairError> {
    let info = *spec
        .pattern_info(pattern)
        .ok_or(RepairError::UnsupportedPattern(pattern))?;
    let failed = check_nodes(spec, failed)?;
    let helpers = check_nodes(spec, helpers)?;
    if failed.len() != pattern.h {
        return Err(RepairError::WrongSize {
            what: "failed nodes",
            expected: pattern.h,
            got: failed.len(),
        });
    }
    if helpers.len() != pattern.d {
        return Err(RepairError::WrongSize {
            what: "helper nodes",
            expected: pattern.d,
            got: helpers.len(),
        });
    }
    if let Some(&node) = failed.iter().find(|n| helpers.binary_search(n).is_ok()) {
        return Err(RepairError::Overlap(node));
    }

    let partition: Vec<Vec<usize>> = failed.chunks(info.delta).map(<[usize]>::to_vec).collect();
    let mut builder = GroupBuilder {
        spec,
        helpers: &helpers,
        groups: Vec::new(),
    };
    let radix = spec.radix();
    let width = radix.width();
    let mut extras = PlanExtras::default();

    match info.scheme {
        Scheme::Cyclic => {
            let lead = failed[0];
            for b in 0..spec.blocks() {
                for a in (0..width).filter(|&a| radix.digit(a, lead) == 0) {
                    let planes = (0..spec.base())
                        .map(|v| radix.pack_unchecked(radix.shift(a, &failed, v), b))
                        .collect();
                    builder.push(GroupKey { part: 1, block: b, anchor: a }, &failed, planes)?;
                }
            }
            extras.omega = vec![(0..spec.blocks()).collect()];
            extras.block_width = 1;
            extras.block_count = spec.blocks();
        }
        Scheme::Layered => {
            let span = info.span;
            let block_width = info.width;
            let block_count = spec.blocks() / block_width;
            for (idx, part) in partition.iter().enumerate() {
                let i = idx + 1;
                for mu in 0..block_count {
                    let base_b = mu * block_width;
                    for a in 0..width {
                        let mut planes: Vec<usize> = (0..span - 1)
                            .map(|v| radix.pack_unchecked(radix.shift(a, part, v), base_b + v))
                            .collect();
                        planes.push(radix.pack_unchecked(
                            radix.shift(a, part, span - 1),
                            base_b + span + i - 2,
                        ));
                        builder.push(GroupKey { part: i, block: mu, anchor: a }, part, planes)?;
                    }
                }
                extras
                    .omega
                    .push((0..span - 1).chain(std::iter::once(span + i - 2)).collect());
            }
            extras.block_width = block_width;
            extras.block_count = block_count;
        }
        Scheme::Coset => {
            let selectors: Vec<usize> = partition.iter().map(|p| *p.last().expect("chunk")).collect();
            let w = spec.hadamard_w().expect("coset scheme implies hadamard parameters");
            for (idx, part) in partition.iter().enumerate() {
                for a in 0..width {
                    let mask = selectors
                        .iter()
                        .enumerate()
                        .fold(0u64, |m, (q, &sel)| m | ((radix.digit(a, sel) as u64) << q));
                    if hamming::syndrome(mask) != 0 {
                        continue;
                    }
                    let planes = vec![a, radix.shift(a, part, 1)];
                    builder.push(GroupKey { part: idx + 1, block: 0, anchor: a }, part, planes)?;
                }
            }
            extras.coset_selectors = selectors;
            extras.hamming_w = Some(w);
            extras.block_width = 1;
            extras.block_count = 1;
        }
    }

    let groups = builder.groups;
    let mut plan = RepairPlan {
        family: spec.family(),
        n: spec.n(),
        k: spec.k(),
        ell: spec.ell(),
        field: *spec.field(),
        info,
        failed,
        helpers,
        partition,
        groups,
        step2: Vec::new(),
        extras,
    };
    plan.step2 = schedule_step2(&plan)?;

    let (beta, _) = audit::cut_set(pattern.h, pattern.d, plan.k, plan.ell as u64)?;
    if plan.groups.len() as u64 != beta {
        return Err(RepairError::Invariant(format!(
            "{} groups but the per-helper bound is {beta}",
            plan.groups.len()
        )));
    }
    Ok(plan)
}

struct GroupBuilder<'a> {
    spec: &'a CodeSpec,
    helpers: &'a [usize],
    groups: Vec<GroupDescriptor>,
}

impl GroupBuilder<'_> {
    fn push(&mut self, key: GroupKey, members: &[usize], planes: Vec<usize>) -> Result<(), RepairError> {
        let spec = self.spec;
        let radix = spec.radix();
        let width = radix.width();
        let anchor = planes[0] % width;
        let len = members.len() * planes.len() + spec.n() - members.len();
        let mut slots = Vec::with_capacity(len);
        let mut points = Vec::with_capacity(len);
        let mut erased = Vec::with_capacity(spec.r());
        for &node in members {
            for &tau in &planes {
                erased.push(slots.len());
                slots.push(Slot::Unknown { node, plane: tau });
                points.push(spec.lambda(node, radix.digit(tau % width, node)));
            }
        }
        for node in (1..=spec.n()).filter(|j| !members.contains(j)) {
            if self.helpers.binary_search(&node).is_err() {
                erased.push(slots.len());
            }
            slots.push(Slot::Sum { node });
            points.push(spec.lambda(node, radix.digit(anchor, node)));
            debug_assert!(planes
                .iter()
                .all(|&t| radix.digit(t % width, node) == radix.digit(anchor, node)));
        }
        let id = self.groups.len();
        if slots.len() != self.helpers.len() + spec.r() {
            return Err(RepairError::Invariant(format!(
                "group {id} word has length {} instead of d + r = {}",
                slots.len(),
                self.helpers.len() + spec.r()
            )));
        }
        if erased.len() != spec.r() {
            return Err(RepairError::Invariant(format!(
                "group {id} has {} erasures instead of r = {}",
                erased.len(),
                spec.r()
            )));
        }
        grs::check_distinct(spec.field(), &points)
            .map_err(|e| RepairError::Invariant(format!("group {id}: {e}")))?;
        self.groups.push(GroupDescriptor {
            id,
            key,
            members: members.to_vec(),
            planes,
            slots,
            points,
            erased,
        });
        Ok(())
    }
}

/// Symbolic peeling: which step-2 subtractions complete the failed columns,
/// in an order where each one only uses already-known symbols.
fn schedule_step2(plan: &RepairPlan) -> Result<Vec<Step2Op>, RepairError> {
    let ell = plan.ell;
    let h = plan.failed.len();
    let mut known = vec![false; h * ell];
    for g in &plan.groups {
        for &node in &g.members {
            let row = plan.failed_index(node) * ell;
            for &tau in &g.planes {
                if std::mem::replace(&mut known[row + tau], true) {
                    return Err(RepairError::Invariant(format!(
                        "coordinate {tau} of node {node} recovered by two groups"
                    )));
                }
            }
        }
    }

    let mut pending: Vec<(usize, usize)> = plan
        .groups
        .iter()
        .flat_map(|g| {
            plan.failed
                .iter()
                .filter(|n| !g.members.contains(n))
                .map(move |&n| (g.id, n))
        })
        .collect();
    let mut ops = Vec::new();
    loop {
        let before = pending.len();
        pending.retain(|&(gid, node)| {
            let row = plan.failed_index(node) * ell;
            let mut missing = plan.groups[gid].planes.iter().filter(|&&t| !known[row + t]);
            match (missing.next(), missing.next()) {
                (None, _) => false,
                (Some(&target), None) => {
                    known[row + target] = true;
                    ops.push(Step2Op { node, target, group: gid });
                    false
                }
                _ => true,
            }
        });
        if pending.len() == before {
            break;
        }
    }
    if let Some(pos) = known.iter().position(|&k| !k) {
        return Err(RepairError::Invariant(format!(
            "coordinate {} of node {} is never recovered",
            pos % ell,
            plan.failed[pos / ell]
        )));
    }
    Ok(ops)
}

/// Helper-side routine: one sum per group over the group's planes.
pub fn helper_aggregate(plan: &RepairPlan, helper: usize, column: &[u64]) -> Result<HelperPayload, RepairError> {
    if plan.helpers.binary_search(&helper).is_err() {
        return Err(RepairError::NotAHelper(helper));
    }
    if column.len() != plan.ell {
        return Err(RepairError::WrongSize {
            what: "column symbols",
            expected: plan.ell,
            got: column.len(),
        });
    }
    let f = &plan.field;
    let values = plan
        .groups
        .iter()
        .map(|g| g.planes.iter().fold(0, |acc, &t| f.add(acc, f.reduce(column[t]))))
        .collect();
    Ok(HelperPayload { helper, values })
}

/// Repair-center routine: solves every group, then runs the step-2
/// subtractions. Downloads only the payloads.
pub fn center_repair(plan: &RepairPlan, payloads: &[HelperPayload]) -> Result<RepairOutcome, RepairError> {
    let n = plan.n;
    let h = plan.failed.len();
    let ell = plan.ell;
    let per_helper = plan.groups.len();

    // node -> payload
    let mut by_node: Vec<Option<&[u64]>> = vec![None; n + 1];
    for p in payloads {
        if plan.helpers.binary_search(&p.helper).is_err() {
            return Err(RepairError::NotAHelper(p.helper));
        }
        if by_node[p.helper].is_some() {
            return Err(RepairError::Duplicate(p.helper));
        }
        if p.values.len() != per_helper {
            return Err(RepairError::PayloadLength {
                helper: p.helper,
                expected: per_helper,
                got: p.values.len(),
            });
        }
        by_node[p.helper] = Some(&p.values);
    }
    if let Some(&missing) = plan.helpers.iter().find(|&&j| by_node[j].is_none()) {
        return Err(RepairError::MissingPayload(missing));
    }

    let f = &plan.field;
    let mut restored = vec![0u64; h * ell];
    let mut sums = vec![0u64; plan.groups.len() * h];
    let mut values = Vec::new();
    for g in &plan.groups {
        values.clear();
        for slot in &g.slots {
            values.push(match *slot {
                Slot::Sum { node } => by_node[node].map_or(0, |p| f.reduce(p[g.id])),
                Slot::Unknown { .. } => 0,
            });
        }
        grs::solve_erasures(f, &g.points, &mut values, &g.erased, n - plan.k)
            .map_err(|source| RepairError::Inconsistent { group: g.id, source })?;
        for &pos in &g.erased {
            match g.slots[pos] {
                Slot::Unknown { node, plane } => {
                    restored[plan.failed_index(node) * ell + plane] = values[pos];
                }
                Slot::Sum { node } => {
                    if let Ok(idx) = plan.failed.binary_search(&node) {
                        sums[g.id * h + idx] = values[pos];
                    }
                }
            }
        }
    }

    for op in &plan.step2 {
        let idx = plan.failed_index(op.node);
        let row = &restored[idx * ell..(idx + 1) * ell];
        let partial = op.subtrahends(plan).fold(0, |acc, t| f.add(acc, row[t]));
        restored[idx * ell + op.target] = f.sub(sums[op.group * h + idx], partial);
    }

    let mut per_helper_counts = BTreeMap::new();
    let mut downloads = Vec::with_capacity(per_helper * plan.helpers.len());
    for &j in &plan.helpers {
        let payload = by_node[j].expect("checked above");
        per_helper_counts.insert(j, payload.len() as u64);
        downloads.extend(
            payload
                .iter()
                .enumerate()
                .map(|(group, &value)| Download { helper: j, group, value }),
        );
    }
    let pattern = plan.pattern();
    let (beta, gamma) = audit::cut_set(pattern.h, pattern.d, plan.k, ell as u64)?;
    let total = downloads.len() as u64;
    let mut transcript = RepairTranscript {
        family: plan.family,
        pattern,
        failed: plan.failed.clone(),
        helpers: plan.helpers.clone(),
        sub_packetization: ell,
        stripes: 1,
        optimal: false,
        per_helper: per_helper_counts,
        total,
        per_helper_bound: beta,
        cut_set_bound: gamma,
        group_erasures: plan.groups.iter().map(|g| g.erased.len()).collect(),
        downloads,
    };
    transcript.optimal = audit::conforms(&transcript);

    let restored = plan
        .failed
        .iter()
        .zip(restored.chunks(ell))
        .map(|(&node, col)| (node, col.to_vec()))
        .collect();
    Ok(RepairOutcome { restored, transcript })
}

/// Plans and runs a complete repair of `failed` from an in-memory codeword.
pub fn repair_codeword(
    spec: &CodeSpec,
    codeword: &Codeword,
    failed: &[usize],
    helpers: &[usize],
    pattern: Pattern,
) -> Result<RepairOutcome, RepairError> {
    let plan = plan(spec, failed, helpers, pattern)?;
    let payloads = plan
        .helpers()
        .iter()
        .map(|&j| helper_aggregate(&plan, j, codeword.column(j)))
        .collect::<Result<Vec<_>, _>>()?;
    center_repair(&plan, &payloads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(family: Family, n: usize, k: usize, list: &[(usize, usize)]) -> CodeSpec {
        let pats: Vec<Pattern> = list.iter().map(|&(h, d)| Pattern::new(h, d)).collect();
        CodeSpec::build(family, n, k, &pats).unwrap()
    }

    fn codeword(spec: &CodeSpec, seed: u64) -> Codeword {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        spec.encode(&spec.random_data(&mut rng)).unwrap()
    }

    fn check_round_trip(spec: &CodeSpec, cw: &Codeword, failed: &[usize], helpers: &[usize], pattern: Pattern) {
        let out = repair_codeword(spec, cw, failed, helpers, pattern).unwrap();
        for (node, col) in &out.restored {
            assert_eq!(col.as_slice(), cw.column(*node), "node {node} {pattern}");
        }
        assert!(out.transcript.optimal, "{pattern}");
    }

    #[test]
    fn c3_plan_shape() {
        let s = spec(Family::C3, 6, 2, &[(2, 4)]);
        let p = plan(&s, &[1, 2], &[3, 4, 5, 6], Pattern::new(2, 4)).unwrap();
        assert_eq!(p.groups().len(), 64);
        assert_eq!(p.total_download(), 256);
        assert_eq!(p.partition(), &[vec![1, 2]]);
        assert!(p.step2().is_empty());
        assert_eq!(p.extras().omega, vec![vec![0, 1]]);
    }

    #[test]
    fn c3_round_trip_and_zero_codeword() {
        let s = spec(Family::C3, 6, 2, &[(2, 4)]);
        check_round_trip(&s, &codeword(&s, 1), &[1, 2], &[3, 4, 5, 6], Pattern::new(2, 4));
        let zero = s.encode(&vec![vec![0; s.ell()]; 2]).unwrap();
        let out = repair_codeword(&s, &zero, &[1, 2], &[3, 4, 5, 6], Pattern::new(2, 4)).unwrap();
        assert!(out.restored.iter().all(|(_, c)| c.iter().all(|&x| x == 0)));
        assert_eq!(out.transcript.total, 256);
    }

    #[test]
    fn c3_with_several_chunks_uses_step_two() {
        // δ = gcd(4, 2) = 2: two chunks, span 2, block width 3
        let s = spec(Family::C3, 8, 2, &[(4, 4)]);
        let pat = Pattern::new(4, 4);
        let p = plan(&s, &[2, 3, 5, 7], &[1, 4, 6, 8], pat).unwrap();
        assert_eq!(p.partition(), &[vec![2, 3], vec![5, 7]]);
        assert_eq!(p.extras().omega, vec![vec![0, 1], vec![0, 2]]);
        assert!(!p.step2().is_empty());
        for &node in p.failed() {
            let mut all = p.step1_coordinates(node);
            all.extend(p.step2_coordinates(node));
            all.sort_unstable();
            assert_eq!(all, (0..s.ell()).collect::<Vec<_>>());
        }
        check_round_trip(&s, &codeword(&s, 2), &[2, 3, 5, 7], &[1, 4, 6, 8], pat);
    }

    #[test]
    fn rejects_bad_node_sets() {
        let s = spec(Family::C3, 6, 2, &[(2, 4)]);
        let pat = Pattern::new(2, 4);
        assert!(matches!(plan(&s, &[1, 1], &[3, 4, 5, 6], pat), Err(RepairError::Duplicate(1))));
        assert!(matches!(plan(&s, &[1, 2], &[2, 4, 5, 6], pat), Err(RepairError::Overlap(2))));
        assert!(matches!(plan(&s, &[1, 2], &[4, 5, 6], pat), Err(RepairError::WrongSize { .. })));
        assert!(matches!(plan(&s, &[1, 7], &[3, 4, 5, 6], pat), Err(RepairError::Code(_))));
        assert!(matches!(
            plan(&s, &[1, 2], &[3, 4, 5], Pattern::new(2, 3)),
            Err(RepairError::UnsupportedPattern(_))
        ));
    }

    #[test]
    fn center_rejects_bad_payloads() {
        let s = spec(Family::C3, 6, 2, &[(2, 4)]);
        let cw = codeword(&s, 3);
        let p = plan(&s, &[1, 2], &[3, 4, 5, 6], Pattern::new(2, 4)).unwrap();
        let mut payloads: Vec<_> = [3, 4, 5, 6]
            .iter()
            .map(|&j| helper_aggregate(&p, j, cw.column(j)).unwrap())
            .collect();
        assert!(matches!(helper_aggregate(&p, 1, cw.column(1)), Err(RepairError::NotAHelper(1))));
        let last = payloads.pop().unwrap();
        assert!(matches!(center_repair(&p, &payloads), Err(RepairError::MissingPayload(6))));
        let mut short = last.clone();
        short.values.pop();
        payloads.push(short);
        assert!(matches!(center_repair(&p, &payloads), Err(RepairError::PayloadLength { helper: 6, .. })));
        payloads.pop();
        payloads.push(last);
        assert!(center_repair(&p, &payloads).is_ok());
    }

    #[test]
    fn corrupted_payload_yields_wrong_column() {
        let s = spec(Family::C1, 5, 2, &[(1, 4)]);
        let cw = codeword(&s, 4);
        let p = plan(&s, &[5], &[1, 2, 3, 4], Pattern::new(1, 4)).unwrap();
        let mut payloads: Vec<_> = p
            .helpers()
            .iter()
            .map(|&j| helper_aggregate(&p, j, cw.column(j)).unwrap())
            .collect();
        payloads[0].values[0] = s.field().add(payloads[0].values[0], 1);
        // exactly r erasures per group: nothing is left over to check against
        let out = center_repair(&p, &payloads).unwrap();
        assert_ne!(out.restored[0].1, cw.column(5));
    }

    #[test]
    fn hadamard_step_one_classes() {
        let s = spec(Family::Hadamard, 8, 2, &[(3, 3)]);
        let p = plan(&s, &[1, 2, 3], &[4, 5, 6], Pattern::new(3, 3)).unwrap();
        assert_eq!(p.per_helper_download(), 192);
        assert_eq!(p.extras().coset_selectors, vec![1, 2, 3]);
        check_round_trip(&s, &codeword(&s, 5), &[1, 2, 3], &[4, 5, 6], Pattern::new(3, 3));
    }

    #[test]
    fn transcript_merge_accumulates() {
        let s = spec(Family::C3, 6, 2, &[(2, 4)]);
        let cw = codeword(&s, 6);
        let a = repair_codeword(&s, &cw, &[1, 2], &[3, 4, 5, 6], Pattern::new(2, 4)).unwrap().transcript;
        let mut t = RepairTranscript::empty(&s, Pattern::new(2, 4));
        t.merge(a.clone());
        t.merge(a);
        assert_eq!(t.stripes, 2);
        assert_eq!(t.total, 512);
        assert_eq!(t.cut_set_bound, 512);
        assert_eq!(t.downloads.len(), 512);
        assert!(t.optimal);
    }
}
