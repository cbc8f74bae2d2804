//! Brute-force cross-check for the rank-similarity path.
//!
//! Counts concordant/discordant/tied pairs by direct O(n²) sign enumeration
//! over index-aligned score slices, with no shared code with the
//! ordered-pair-set route in [`crate::credibility`]. Run from tests and from
//! the `oracle-kendall` CLI subcommand.

use crate::credibility::kendall_similarity;
use crate::id::EntityId;
use crate::ledger::{RatingVector, Timestamp};
use crate::rng::DeterministicRng;

/// Pair classification over two index-aligned score slices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairTally {
    pub concordant: usize,
    pub discordant: usize,
    /// Tied in exactly one of the two slices.
    pub tied_one: usize,
    /// Tied in both slices.
    pub tied_both: usize,
}

impl PairTally {
    /// Ordered pairs present in exactly one of the two strict-preference sets.
    ///
    /// A discordant pair shows up once per direction; a half-tied pair once.
    pub fn symmetric_difference(&self) -> usize {
        2 * self.discordant + self.tied_one
    }
}

pub fn tally_pairs(a: &[f64], b: &[f64]) -> PairTally {
    assert_eq!(a.len(), b.len(), "slices must be index-aligned");
    let mut tally = PairTally::default();
    let n = a.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da == 0.0 && db == 0.0 {
                tally.tied_both += 1;
            } else if da == 0.0 || db == 0.0 {
                tally.tied_one += 1;
            } else if (da > 0.0) == (db > 0.0) {
                tally.concordant += 1;
            } else {
                tally.discordant += 1;
            }
        }
    }
    tally
}

/// Similarity computed from the brute-force tally: `1 - 2*d / (n*(n-1))`.
pub fn similarity_bruteforce(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    assert!(n >= 2, "need at least two subjects");
    let d = tally_pairs(a, b).symmetric_difference();
    1.0 - (2.0 * d as f64) / ((n * (n - 1)) as f64)
}

/// Classic tau for strict orders: `(C - D) / (n*(n-1)/2)`.
pub fn tau_strict_bruteforce(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    assert!(n >= 2, "need at least two subjects");
    let tally = tally_pairs(a, b);
    assert_eq!(
        tally.tied_one + tally.tied_both,
        0,
        "ties are not a strict order"
    );
    let half_pairs = (n * (n - 1) / 2) as f64;
    (tally.concordant as f64 - tally.discordant as f64) / half_pairs
}

/// Outcome of a similarity cross-check run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleCheck {
    pub pairs_checked: usize,
    pub mismatches: usize,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

fn subject_names(n: usize) -> Vec<EntityId> {
    (0..n).map(|i| EntityId::new(format!("s{i:02}"))).collect()
}

fn vector_from_scores(rater: &str, names: &[EntityId], scores: &[f64]) -> RatingVector {
    let mut v = RatingVector::new(rater.into(), Timestamp::ZERO);
    for (name, score) in names.iter().zip(scores) {
        v.set_score(name.clone(), *score);
    }
    v
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

fn check_one(names: &[EntityId], xs: &[f64], ys: &[f64], check: &mut OracleCheck) {
    let a = vector_from_scores("a", names, xs);
    let b = vector_from_scores("b", names, ys);
    let implemented = kendall_similarity(&a, &b).expect("n >= 2 by construction");
    let brute = similarity_bruteforce(xs, ys);
    check.pairs_checked += 1;
    if implemented != brute {
        check.mismatches += 1;
        return;
    }
    // Strict orders must also agree with the classic concordant/discordant
    // form, up to float rounding of the two algebraically equal expressions.
    let tally = tally_pairs(xs, ys);
    if tally.tied_one + tally.tied_both == 0 {
        let tau = tau_strict_bruteforce(xs, ys);
        if (implemented - tau).abs() > 1e-12 {
            check.mismatches += 1;
        }
    }
}

/// Cross-checks the similarity implementation against the brute-force route.
///
/// Exhaustive over all permutation pairs for `n <= exhaustive_max_n`, sampled
/// for each `n` in `sampled_ns`, plus `tie_cases` random vectors drawn from a
/// small value alphabet so ties occur.
pub fn run_similarity_check(
    exhaustive_max_n: usize,
    sampled_ns: &[usize],
    samples_per_n: usize,
    tie_cases: usize,
    seed: u64,
) -> OracleCheck {
    let mut check = OracleCheck::default();

    for n in 2..=exhaustive_max_n {
        let names = subject_names(n);
        let perms = permutations(n);
        let score_sets: Vec<Vec<f64>> = perms
            .iter()
            .map(|p| p.iter().map(|&r| r as f64).collect())
            .collect();
        for xs in &score_sets {
            for ys in &score_sets {
                check_one(&names, xs, ys, &mut check);
            }
        }
    }

    let mut rng = DeterministicRng::derive(seed, &[0x0c1e, 1]);
    for &n in sampled_ns {
        let names = subject_names(n);
        for _ in 0..samples_per_n {
            let xs = random_permutation_scores(&mut rng, n);
            let ys = random_permutation_scores(&mut rng, n);
            check_one(&names, &xs, &ys, &mut check);
        }
    }

    for _ in 0..tie_cases {
        let n = 3 + rng.index(6);
        let names = subject_names(n);
        // Scores drawn from {0, 0.5, 1, 1.5, 2}; repeats produce ties.
        let draw = |rng: &mut DeterministicRng| -> Vec<f64> {
            (0..n).map(|_| rng.index(5) as f64 * 0.5).collect()
        };
        let xs = draw(&mut rng);
        let ys = draw(&mut rng);
        check_one(&names, &xs, &ys, &mut check);
    }

    check
}

fn random_permutation_scores(rng: &mut DeterministicRng, n: usize) -> Vec<f64> {
    let mut items: Vec<f64> = (0..n).map(|i| i as f64).collect();
    for i in (1..n).rev() {
        let j = rng.index(i + 1);
        items.swap(i, j);
    }
    items
}
