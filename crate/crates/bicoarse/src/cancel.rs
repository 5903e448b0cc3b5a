//! The cancellation length `|·|_×` and the bi-invariant word metric `d_×`
//! on free groups.
//!
//! `|w|_×` is the minimal number of letters to delete from `w` so that the
//! remaining letters cancel out completely. Equivalently, it is
//! `|w| − 2·M(w)` where `M(w)` is the size of a maximum non-crossing
//! matching of mutually inverse letter pairs; `M` is computed by the cubic
//! interval recurrence
//!
//! ```text
//! M(i, j) = max( M(i+1, j),
//!                max { 1 + M(i+1, k−1) + M(k+1, j) : i < k ≤ j, w[k] = w[i]⁻¹ } )
//! ```
//!
//! For a reduced word this equals the bi-invariant word length of the
//! represented element; for unreduced input the value is taken on the given
//! letter sequence (which, over a free group, represents the same number).

use std::env;

use serde::Serialize;
use thiserror::Error;

use crate::words::{Letter, ReducedWord, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CancelError {
    #[error("word length {len} exceeds the oracle bound {bound}")]
    OracleBoundExceeded { len: usize, bound: usize },
}

/// Default cap on the brute-force oracle; override with the
/// `BICOARSE_ORACLE_BOUND` environment variable.
pub const DEFAULT_ORACLE_BOUND: usize = 16;

pub fn oracle_bound() -> usize {
    env::var("BICOARSE_ORACLE_BOUND")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BOUND)
}

/// Maximum non-crossing inverse-pair matching table. `table[i][j]` holds
/// `M(i, j)` for `i ≤ j`; intervals are closed.
fn matching_table(letters: &[Letter]) -> Vec<Vec<u32>> {
    let n = letters.len();
    let mut table = vec![vec![0u32; n]; n];
    for span in 2..=n {
        for i in 0..=(n - span) {
            let j = i + span - 1;
            let mut best = table[i + 1][j];
            for k in (i + 1)..=j {
                if letters[k].is_inverse_of(&letters[i]) {
                    let inner = if k > i + 1 { table[i + 1][k - 1] } else { 0 };
                    let outer = if k < j { table[k + 1][j] } else { 0 };
                    best = best.max(1 + inner + outer);
                }
            }
            table[i][j] = best;
        }
    }
    table
}

fn length_from_letters(letters: &[Letter]) -> u64 {
    if letters.is_empty() {
        return 0;
    }
    let table = matching_table(letters);
    letters.len() as u64 - 2 * table[0][letters.len() - 1] as u64
}

/// The cancellation length `|w|_×`. Unreduced input is legal and measured
/// on the given letter sequence.
pub fn cancellation_length(w: &Word) -> u64 {
    length_from_letters(w.letters())
}

pub fn reduced_length(w: &ReducedWord) -> u64 {
    length_from_letters(w.letters())
}

/// The bi-invariant distance `d_×(w1, w2) = |w1⁻¹ w2|_×`.
pub fn cancellation_distance(w1: &ReducedWord, w2: &ReducedWord) -> u64 {
    reduced_length(&w1.invert().mul(w2))
}

/// Deleted positions plus a non-crossing inverse-pair matching witnessing
/// a cancellation length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CancellationCertificate {
    pub deleted: Vec<usize>,
    pub matching: Vec<(usize, usize)>,
}

impl CancellationCertificate {
    /// Checks that the certificate partitions all positions, every matched
    /// pair carries mutually inverse letters, and the matching is
    /// non-crossing. Does not require optimality.
    pub fn verify(&self, w: &Word) -> bool {
        let n = w.len();
        let mut seen = vec![false; n];
        for &d in &self.deleted {
            if d >= n || seen[d] {
                return false;
            }
            seen[d] = true;
        }
        for &(i, j) in &self.matching {
            if i >= j || j >= n || seen[i] || seen[j] {
                return false;
            }
            if !w.letters()[i].is_inverse_of(&w.letters()[j]) {
                return false;
            }
            seen[i] = true;
            seen[j] = true;
        }
        if !seen.iter().all(|&s| s) {
            return false;
        }
        if !self.deleted.windows(2).all(|p| p[0] < p[1]) {
            return false;
        }
        // Non-crossing: no interleaving i < i' < j < j'.
        for (a, &(i, j)) in self.matching.iter().enumerate() {
            for &(i2, j2) in &self.matching[a + 1..] {
                let (lo, hi) = if i < i2 { ((i, j), (i2, j2)) } else { ((i2, j2), (i, j)) };
                let nested = lo.0 < hi.0 && hi.1 < lo.1;
                let disjoint = lo.1 < hi.0;
                if !nested && !disjoint {
                    return false;
                }
            }
        }
        true
    }
}

/// An optimal certificate for `w`. Backtracking prefers matching the
/// interval's first letter with its smallest possible partner.
pub fn certificate(w: &Word) -> CancellationCertificate {
    let letters = w.letters();
    let mut deleted = Vec::new();
    let mut matching = Vec::new();
    if letters.is_empty() {
        return CancellationCertificate { deleted, matching };
    }
    let table = matching_table(letters);
    let mut stack = vec![(0usize, letters.len() - 1)];
    while let Some((i, j)) = stack.pop() {
        if i > j {
            continue;
        }
        if i == j {
            deleted.push(i);
            continue;
        }
        let target = table[i][j];
        let partner = ((i + 1)..=j).find(|&k| {
            letters[k].is_inverse_of(&letters[i]) && {
                let inner = if k > i + 1 { table[i + 1][k - 1] } else { 0 };
                let outer = if k < j { table[k + 1][j] } else { 0 };
                1 + inner + outer == target
            }
        });
        match partner {
            Some(k) => {
                matching.push((i, k));
                if k > i + 1 {
                    stack.push((i + 1, k - 1));
                }
                if k < j {
                    stack.push((k + 1, j));
                }
            }
            None => {
                deleted.push(i);
                stack.push((i + 1, j));
            }
        }
    }
    deleted.sort_unstable();
    matching.sort_unstable();
    CancellationCertificate { deleted, matching }
}

/// Independent brute force: the minimum number of deleted positions over
/// all deletion subsets whose remaining subsequence reduces to the empty
/// word. Exponential in `|w|`; the production path is the interval DP.
pub fn cancellation_length_oracle(w: &Word, bound: usize) -> Result<u64, CancelError> {
    let n = w.len();
    if n > bound {
        return Err(CancelError::OracleBoundExceeded { len: n, bound });
    }
    if n == 0 {
        return Ok(0);
    }
    // Letters as codes with `code ^ 1` the inverse letter.
    let codes: Vec<u32> = w
        .letters()
        .iter()
        .map(|l| l.generator() * 2 + u32::from(l.is_inverse()))
        .collect();
    let mut best = n as u32;
    let mut stack = [0u32; 64];
    for kept in 0..(1u32 << n) {
        let deletions = n as u32 - kept.count_ones();
        if deletions >= best {
            continue;
        }
        let mut top = 0usize;
        for (i, &code) in codes.iter().enumerate() {
            if kept & (1 << i) == 0 {
                continue;
            }
            if top > 0 && stack[top - 1] == code ^ 1 {
                top -= 1;
            } else {
                stack[top] = code;
                top += 1;
            }
        }
        if top == 0 {
            best = deletions;
        }
    }
    Ok(best as u64)
}

/// One row of the commutator norm table: `|[aⁿ, bᵐ]|_×`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CommutatorEntry {
    pub n: u64,
    pub m: u64,
    pub norm: u64,
}

/// `|[aⁿ, bᵐ]|_×` for `1 ≤ n ≤ m ≤ n_max`. Entries with `n < m` equal `2n`;
/// diagonal entries are reported as computed.
pub fn commutator_norm_table(n_max: u64) -> Vec<CommutatorEntry> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for m in n..=n_max {
            out.push(CommutatorEntry { n, m, norm: reduced_length(&commutator_power(n, m)) });
        }
    }
    out
}

/// The commutator `[aⁿ, bᵐ] = aⁿ bᵐ a⁻ⁿ b⁻ᵐ` in rank 2.
pub fn commutator_power(n: u64, m: u64) -> ReducedWord {
    let a = generator_word(0);
    let b = generator_word(1);
    a.power(n as i64)
        .mul(&b.power(m as i64))
        .mul(&a.power(-(n as i64)))
        .mul(&b.power(-(m as i64)))
}

fn generator_word(generator: u32) -> ReducedWord {
    Word::new(vec![Letter::new(generator, false)]).reduce()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{reduced_ball, Alphabet};
    use proptest::prelude::*;

    fn rank2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn w(text: &str) -> Word {
        Word::parse(text, rank2()).unwrap()
    }

    fn rw(text: &str) -> ReducedWord {
        ReducedWord::parse(text, rank2()).unwrap()
    }

    #[test]
    fn golden_norms() {
        assert_eq!(cancellation_length(&w("abAAB")), 3);
        assert_eq!(cancellation_length(&w("abAABabAAB")), 4);
        assert_eq!(cancellation_length(&w("")), 0);
        for n in 1..=10 {
            let conj = rw("a").power(n).mul(&rw("b")).mul(&rw("a").power(-n));
            assert_eq!(reduced_length(&conj), 1, "|a^{n} b a^-{n}|");
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(cancellation_distance(&rw("abAB"), &rw("abAB")), 0);
        assert_eq!(cancellation_distance(&rw("ab"), &rw("ba")), 2);
        for n in 1..6 {
            let m = n + 1;
            let comm = commutator_power(n, m);
            assert_eq!(cancellation_distance(&comm, &ReducedWord::empty()), 2 * n);
        }
    }

    #[test]
    fn commutator_table_values() {
        let table = commutator_norm_table(5);
        for entry in &table {
            if entry.n < entry.m {
                assert_eq!(entry.norm, 2 * entry.n, "[a^{}, b^{}]", entry.n, entry.m);
            }
        }
        assert!(table.iter().any(|e| (e.n, e.m, e.norm) == (1, 2, 2)));
        assert!(table.iter().any(|e| (e.n, e.m, e.norm) == (3, 5, 6)));
        // Diagonal entries are recorded, not covered by the n < m identity.
        let diag: Vec<u64> =
            table.iter().filter(|e| e.n == e.m).map(|e| e.norm).collect();
        assert_eq!(diag, vec![2, 4, 6, 8, 10]);
    }

    #[test]
    fn certificate_examples() {
        let cert = certificate(&w("abAAB"));
        assert!(cert.verify(&w("abAAB")));
        assert_eq!(cert.deleted.len(), 3);
        assert_eq!(cert.matching.len(), 1);
        // Smallest partner: the leading a matches the first A.
        assert_eq!(cert.matching[0], (0, 2));

        let cert = certificate(&w("aA"));
        assert_eq!(cert.deleted, Vec::<usize>::new());
        assert_eq!(cert.matching, vec![(0, 1)]);

        let cert = certificate(&w("aaa"));
        assert_eq!(cert.deleted, vec![0, 1, 2]);
        assert!(cert.matching.is_empty());
        assert!(cert.verify(&w("aaa")));
    }

    #[test]
    fn certificate_rejects_tampering() {
        let word = w("abBA");
        let good = certificate(&word);
        assert!(good.verify(&word));
        let crossing = CancellationCertificate {
            deleted: vec![],
            matching: vec![(0, 2), (1, 3)],
        };
        assert!(!crossing.verify(&word)); // pairs interleave
        let incomplete = CancellationCertificate {
            deleted: vec![0],
            matching: vec![(1, 2)],
        };
        assert!(!incomplete.verify(&word)); // position 3 unaccounted
    }

    #[test]
    fn oracle_examples_and_bound() {
        assert_eq!(cancellation_length_oracle(&w("abAAB"), 16).unwrap(), 3);
        assert_eq!(cancellation_length_oracle(&w(""), 16).unwrap(), 0);
        assert_eq!(
            cancellation_length_oracle(&w("abababababababababab"), 16),
            Err(CancelError::OracleBoundExceeded { len: 20, bound: 16 })
        );
    }

    #[test]
    fn dp_equals_oracle_on_small_ball() {
        for word in reduced_ball(rank2(), 7) {
            let word = Word::from(word);
            assert_eq!(
                cancellation_length(&word),
                cancellation_length_oracle(&word, 16).unwrap(),
                "word {word}"
            );
        }
    }

    #[test]
    fn finite_index_contrast() {
        // a(ab)ⁿ a(ab)⁻ⁿ stays at norm 2 in rank 2 …
        for n in 0..=10 {
            let ab = rw("ab");
            let word = rw("a").mul(&ab.power(n)).mul(&rw("a")).mul(&ab.power(-n));
            assert_eq!(reduced_length(&word), 2);
        }
        // … while x zⁿ y⁻ⁿ grows linearly in rank 3.
        let rank3 = Alphabet::new(3).unwrap();
        for n in 0..=8i64 {
            let x = ReducedWord::parse("a", rank3).unwrap();
            let z = ReducedWord::parse("c", rank3).unwrap();
            let y = ReducedWord::parse("b", rank3).unwrap();
            let word = x.mul(&z.power(n)).mul(&y.power(-n));
            assert_eq!(reduced_length(&word), 2 * n as u64 + 1);
        }
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec((0u32..2, prop::bool::ANY), 0..=max_len)
            .prop_map(|ls| Word::new(ls.into_iter().map(|(g, s)| Letter::new(g, s)).collect()))
    }

    fn arb_reduced(max_len: usize) -> impl Strategy<Value = ReducedWord> {
        arb_word(max_len).prop_map(|w| w.reduce())
    }

    proptest! {
        #[test]
        fn parity_and_abelian_lower_bound(word in arb_word(14)) {
            let len = cancellation_length(&word);
            prop_assert_eq!(len % 2, word.len() as u64 % 2);
            let reduced = word.reduce();
            let abelian: u64 =
                (0..2).map(|g| reduced.exponent_sum(g).unsigned_abs()).sum();
            prop_assert!(len >= abelian);
        }

        #[test]
        fn dp_matches_oracle(word in arb_word(12)) {
            prop_assert_eq!(
                cancellation_length(&word),
                cancellation_length_oracle(&word, 16).unwrap()
            );
        }

        #[test]
        fn certificates_are_sound_and_optimal(word in arb_word(14)) {
            let cert = certificate(&word);
            prop_assert!(cert.verify(&word));
            prop_assert_eq!(cert.deleted.len() as u64, cancellation_length(&word));
            prop_assert_eq!(
                cert.deleted.len() + 2 * cert.matching.len(),
                word.len()
            );
        }

        #[test]
        fn representative_independence(
            word in arb_word(8),
            insertions in prop::collection::vec((0usize..9, 0u32..2, prop::bool::ANY), 0..4),
        ) {
            // Inserting cancelling pairs x x⁻¹ anywhere must not change the value.
            let mut letters = word.letters().to_vec();
            for (pos, gen, sign) in insertions {
                let at = pos.min(letters.len());
                let x = Letter::new(gen, sign);
                letters.insert(at, x.inverse());
                letters.insert(at, x);
            }
            let padded = Word::new(letters);
            prop_assert_eq!(cancellation_length(&padded), cancellation_length(&word));
        }

        #[test]
        fn metric_axioms(x in arb_reduced(8), y in arb_reduced(8), z in arb_reduced(8)) {
            let dxy = cancellation_distance(&x, &y);
            prop_assert_eq!(dxy, cancellation_distance(&y, &x));
            prop_assert_eq!(dxy == 0, x == y);
            prop_assert!(
                cancellation_distance(&x, &z) <= dxy + cancellation_distance(&y, &z)
            );
        }

        #[test]
        fn bi_invariance(
            w1 in arb_reduced(8),
            w2 in arb_reduced(8),
            u in arb_reduced(6),
            v in arb_reduced(6),
        ) {
            let lhs = cancellation_distance(&u.mul(&w1).mul(&v), &u.mul(&w2).mul(&v));
            prop_assert_eq!(lhs, cancellation_distance(&w1, &w2));
        }
    }
}
