use std::collections::HashSet;

use msr_core::hamming::CosetPartition;
use msr_core::repair::{self, repair_codeword};
use msr_core::{CodeSpec, Family, Pattern};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instances() -> Vec<CodeSpec> {
    let p = |list: &[(usize, usize)]| -> Vec<Pattern> { list.iter().map(|&(h, d)| Pattern::new(h, d)).collect() };
    vec![
        CodeSpec::build(Family::C1, 5, 2, &p(&[(1, 3), (1, 4)])).unwrap(),
        CodeSpec::build(Family::C2, 5, 2, &p(&[(1, 3), (2, 2), (3, 2)])).unwrap(),
        CodeSpec::build(Family::C3, 6, 2, &p(&[(2, 4)])).unwrap(),
        CodeSpec::build(Family::C3, 7, 3, &p(&[(2, 4)])).unwrap(),
        CodeSpec::build(Family::C4, 5, 2, &p(&[(1, 3), (2, 3), (3, 2), (1, 4)])).unwrap(),
        CodeSpec::build(Family::Hadamard, 6, 2, &p(&[(3, 3)])).unwrap(),
    ]
}

fn node_sets(n: usize, pattern: Pattern, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    (order[..pattern.h].to_vec(), order[pattern.h..pattern.h + pattern.d].to_vec())
}

#[test]
fn hundred_codewords_per_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for spec in instances() {
        let patterns: Vec<Pattern> = spec.patterns().map(|p| p.pattern).collect();
        for i in 0..100 {
            let cw = spec.encode(&spec.random_data(&mut rng)).unwrap();
            let pattern = patterns[i % patterns.len()];
            let (failed, helpers) = node_sets(spec.n(), pattern, &mut rng);
            let out = repair_codeword(&spec, &cw, &failed, &helpers, pattern).unwrap();
            for (node, col) in &out.restored {
                assert_eq!(col.as_slice(), cw.column(*node), "{:?} {pattern}", spec.family());
            }
            assert!(out.transcript.optimal);
        }
    }
}

#[test]
fn group_words_have_r_erasures_and_distinct_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for spec in instances() {
        let patterns: Vec<Pattern> = spec.patterns().map(|p| p.pattern).collect();
        for pattern in patterns {
            let (failed, helpers) = node_sets(spec.n(), pattern, &mut rng);
            let plan = repair::plan(&spec, &failed, &helpers, pattern).unwrap();
            for g in plan.groups() {
                assert_eq!(g.erased.len(), spec.r());
                assert_eq!(g.points.len(), pattern.d + spec.r());
                let distinct: HashSet<u64> = g.points.iter().copied().collect();
                assert_eq!(distinct.len(), g.points.len());
            }
        }
    }
}

/// Step-1 sets of each failed node never overlap, and with step 2 they
/// cover every coordinate exactly once. Exhaustive over failed sets.
#[test]
fn coverage_is_exact() {
    for spec in instances() {
        let patterns: Vec<Pattern> = spec.patterns().map(|p| p.pattern).collect();
        for pattern in patterns {
            let nodes: Vec<usize> = (1..=spec.n()).collect();
            let mut failed_sets = vec![vec![]];
            for _ in 0..pattern.h {
                failed_sets = failed_sets
                    .into_iter()
                    .flat_map(|s: Vec<usize>| {
                        let last = s.last().copied().unwrap_or(0);
                        nodes.iter().filter(move |&&j| j > last).map(move |&j| {
                            let mut t = s.clone();
                            t.push(j);
                            t
                        })
                    })
                    .collect();
            }
            for failed in failed_sets {
                let helpers: Vec<usize> = nodes.iter().copied().filter(|j| !failed.contains(j)).take(pattern.d).collect();
                let plan = repair::plan(&spec, &failed, &helpers, pattern).unwrap();
                for &node in &failed {
                    let mut seen = vec![0u8; spec.ell()];
                    for g in plan.groups().iter().filter(|g| g.members.contains(&node)) {
                        for &t in &g.planes {
                            seen[t] += 1;
                        }
                    }
                    for t in plan.step2_coordinates(node) {
                        seen[t] += 1;
                    }
                    assert!(seen.iter().all(|&c| c == 1), "{:?} {pattern} H={failed:?}", spec.family());
                }
            }
        }
    }
}

#[test]
fn hadamard_step_one_matches_coset_classes() {
    for (n, k, h, d, w) in [(6, 2, 3, 3, 2), (8, 4, 3, 5, 2), (8, 1, 7, 1 + 1, 3)] {
        let Ok(spec) = CodeSpec::build(Family::Hadamard, n, k, &[Pattern::new(h, d)]) else {
            continue;
        };
        let part = CosetPartition::build(w).unwrap();
        let failed: Vec<usize> = (n - h + 1..=n).collect();
        let helpers: Vec<usize> = (1..=d).collect();
        let plan = repair::plan(&spec, &failed, &helpers, Pattern::new(h, d)).unwrap();
        let selectors = &plan.extras().coset_selectors;
        let radix = spec.radix();
        for (idx, chunk) in plan.partition().iter().enumerate() {
            let i = idx + 1;
            let expected: Vec<usize> = (0..spec.ell())
                .filter(|&a| {
                    let y: Vec<u8> = selectors.iter().map(|&m| radix.digit(a, m) as u8).collect();
                    let c = part.classify(&y).unwrap();
                    c == 0 || c == i
                })
                .collect();
            for &node in chunk {
                assert_eq!(plan.step1_coordinates(node), expected, "n={n} node {node} chunk {i}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn transcript_total_is_the_cut_set_bound(which in 0usize..6, seed in any::<u64>()) {
        let spec = &instances()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let patterns: Vec<Pattern> = spec.patterns().map(|p| p.pattern).collect();
        let pattern = *patterns.choose(&mut rng).unwrap();
        let (failed, helpers) = node_sets(spec.n(), pattern, &mut rng);
        let cw = spec.encode(&spec.random_data(&mut rng)).unwrap();
        let out = repair_codeword(spec, &cw, &failed, &helpers, pattern).unwrap();
        let want = (pattern.d * pattern.h * spec.ell()) / (pattern.d - spec.k() + pattern.h);
        prop_assert_eq!(out.transcript.total as usize, want);
        prop_assert!(out.transcript.per_helper.values().all(|&c| c as usize == want / pattern.d));
    }
}
