use msr_core::audit::verify_transcript;
use msr_core::repair::{self, repair_codeword};
use msr_core::{CodeSpec, Codeword, Family, Pattern};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![vec![]];
    }
    if items.len() < size {
        return vec![];
    }
    let mut with: Vec<Vec<usize>> = subsets(&items[1..], size - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    with.extend(subsets(&items[1..], size));
    with
}

fn codeword(spec: &CodeSpec, seed: u64) -> Codeword {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    spec.encode(&spec.random_data(&mut rng)).unwrap()
}

fn assert_repairs(spec: &CodeSpec, cw: &Codeword, failed: &[usize], helpers: &[usize], pattern: Pattern) {
    let out = repair_codeword(spec, cw, failed, helpers, pattern)
        .unwrap_or_else(|e| panic!("{:?} {pattern} H={failed:?} R={helpers:?}: {e}", spec.family()));
    for (node, col) in &out.restored {
        assert_eq!(col.as_slice(), cw.column(*node), "{:?} {pattern} H={failed:?} R={helpers:?}", spec.family());
    }
    let report = verify_transcript(&out.transcript, spec).unwrap();
    assert!(report.conforming(), "{report:?}");
}

/// Every failed set and every helper set of each pattern.
fn exhaustive(spec: &CodeSpec, seed: u64) {
    let cw = codeword(spec, seed);
    let nodes: Vec<usize> = (1..=spec.n()).collect();
    let patterns: Vec<Pattern> = spec.patterns().map(|p| p.pattern).collect();
    for pattern in patterns {
        for failed in subsets(&nodes, pattern.h) {
            let rest: Vec<usize> = nodes.iter().copied().filter(|j| !failed.contains(j)).collect();
            for helpers in subsets(&rest, pattern.d) {
                assert_repairs(spec, &cw, &failed, &helpers, pattern);
            }
        }
    }
}

fn build(family: Family, n: usize, k: usize, list: &[(usize, usize)]) -> CodeSpec {
    let pats: Vec<Pattern> = list.iter().map(|&(h, d)| Pattern::new(h, d)).collect();
    CodeSpec::build(family, n, k, &pats).unwrap()
}

#[test]
fn c1_exhaustive() {
    exhaustive(&build(Family::C1, 5, 2, &[(1, 3)]), 1);
    exhaustive(&build(Family::C1, 5, 2, &[(1, 4)]), 2);
    exhaustive(&build(Family::C1, 6, 3, &[(1, 4), (1, 5)]), 3);
}

#[test]
fn c2_exhaustive() {
    exhaustive(&build(Family::C2, 5, 2, &[(1, 3), (2, 2), (1, 4), (3, 2)]), 4);
    exhaustive(&build(Family::C2, 6, 2, &[(2, 4)]), 5);
}

#[test]
fn c3_exhaustive() {
    exhaustive(&build(Family::C3, 6, 2, &[(2, 4)]), 6);
    exhaustive(&build(Family::C3, 6, 2, &[(3, 3)]), 7);
    exhaustive(&build(Family::C3, 6, 3, &[(2, 4)]), 8);
}

#[test]
fn hadamard_exhaustive() {
    exhaustive(&build(Family::Hadamard, 6, 2, &[(3, 3)]), 9);
    exhaustive(&build(Family::Hadamard, 6, 2, &[(1, 3)]), 10);
}

#[test]
fn c4_exhaustive_small() {
    exhaustive(&build(Family::C4, 5, 2, &[(1, 3), (2, 3), (3, 2), (1, 4)]), 11);
}

#[test]
fn c4_all_patterns_sampled() {
    let (n, k) = (6, 2);
    let mut list = Vec::new();
    for h in 1..=n - k {
        for d in k..=n - h {
            list.push((h, d));
        }
    }
    let spec = build(Family::C4, n, k, &list);
    assert_eq!(spec.ell(), 49152);
    let cw = codeword(&spec, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let nodes: Vec<usize> = (1..=n).collect();
    for &(h, d) in &list {
        for _ in 0..2 {
            let mut order = nodes.clone();
            order.shuffle(&mut rng);
            assert_repairs(&spec, &cw, &order[..h], &order[h..h + d], Pattern::new(h, d));
        }
    }
}

#[test]
fn step_two_targets_exactly_the_uncovered_coordinates() {
    let spec = build(Family::C3, 8, 2, &[(4, 4)]);
    let plan = repair::plan(&spec, &[1, 4, 6, 8], &[2, 3, 5, 7], Pattern::new(4, 4)).unwrap();
    for &node in plan.failed() {
        let one = plan.step1_coordinates(node);
        let two = plan.step2_coordinates(node);
        assert_eq!(one.len() + two.len(), spec.ell());
        assert!(two.iter().all(|t| one.binary_search(t).is_err()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn c3_random_instances(k in 1usize..4, extra in 0usize..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = k + 3 + extra;
        let r = n - k;
        let h = rng.gen_range(2..r);
        let d = rng.gen_range(k + 1..=n - h);
        let spec = build(Family::C3, n, k, &[(h, d)]);
        prop_assume!(spec.ell() <= 1 << 12);
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(&mut rng);
        let cw = codeword(&spec, seed);
        assert_repairs(&spec, &cw, &order[..h], &order[h..h + d], Pattern::new(h, d));
    }
}
