//! Word transformations of the free group built from unique decompositions:
//! replacement maps that swap two patterns, wobbling maps that permute the
//! exponents of a fixed base word, and local substitution maps driven by a
//! sliding-window rule.
//!
//! All three rest on the same combinatorial fact: occurrences of pairwise
//! non-overlapping, non-self-overlapping pieces in a reduced word occupy
//! disjoint intervals at forced positions, so a reduced word factors
//! uniquely into piece occurrences and piece-free gaps.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::words::{is_self_overlapping, overlaps, Letter, ReducedWord, Word, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("invalid piece set: {reason} ({first} / {second})")]
    InvalidPieceSet { reason: &'static str, first: String, second: String },
    #[error("invalid wobbling base: {0}")]
    InvalidBase(String),
    #[error("substitution rule is not symmetric at window {0}")]
    AsymmetricRule(String),
    #[error("permutation is not a bijection on its support")]
    InvalidPermutation,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A list of pairwise non-overlapping, non-self-overlapping nonempty
/// reduced words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceSet {
    pieces: Vec<ReducedWord>,
}

impl PieceSet {
    pub fn new(pieces: Vec<ReducedWord>) -> Result<Self, TransformError> {
        for piece in &pieces {
            if piece.is_empty() {
                return Err(TransformError::InvalidPieceSet {
                    reason: "empty piece",
                    first: "1".into(),
                    second: "1".into(),
                });
            }
            if is_self_overlapping(piece)? {
                return Err(TransformError::InvalidPieceSet {
                    reason: "piece overlaps itself",
                    first: piece.to_string(),
                    second: piece.to_string(),
                });
            }
        }
        for (i, p) in pieces.iter().enumerate() {
            for q in &pieces[i + 1..] {
                if overlaps(p, q)? {
                    return Err(TransformError::InvalidPieceSet {
                        reason: "pieces overlap",
                        first: p.to_string(),
                        second: q.to_string(),
                    });
                }
            }
        }
        Ok(PieceSet { pieces })
    }

    pub fn pieces(&self) -> &[ReducedWord] {
        &self.pieces
    }

    /// Index of the unique piece starting at `position`, if any. Uniqueness
    /// holds because two pieces matching at one position would be prefixes
    /// of each other.
    fn piece_at(&self, letters: &[Letter], position: usize) -> Option<usize> {
        self.pieces.iter().position(|p| {
            position + p.len() <= letters.len()
                && letters[position..position + p.len()] == *p.letters()
        })
    }
}

/// One factor of a decomposition: a piece occurrence or a piece-free gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    Piece(usize),
    Free(ReducedWord),
}

/// The unique minimal factorization of `v` into piece occurrences and
/// piece-free gaps, found by the left-to-right scan.
pub fn decompose(v: &ReducedWord, pieces: &PieceSet) -> Vec<Factor> {
    let letters = v.letters();
    let mut factors = Vec::new();
    let mut gap_start = 0;
    let mut i = 0;
    while i < letters.len() {
        if let Some(index) = pieces.piece_at(letters, i) {
            if gap_start < i {
                factors.push(Factor::Free(Word::new(letters[gap_start..i].to_vec()).reduce()));
            }
            factors.push(Factor::Piece(index));
            i += pieces.pieces[index].len();
            gap_start = i;
        } else {
            i += 1;
        }
    }
    if gap_start < letters.len() {
        factors.push(Factor::Free(Word::new(letters[gap_start..].to_vec()).reduce()));
    }
    factors
}

/// Two reduced words with the same first and last letter, such that the
/// four words `{w1, w1⁻¹, w2, w2⁻¹}` form a valid piece set. Applying the
/// rule swaps `w1 ↔ w2` (and their inverses) in the unique decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementRule {
    w1: ReducedWord,
    w2: ReducedWord,
    pieces: PieceSet,
}

impl ReplacementRule {
    pub fn new(w1: ReducedWord, w2: ReducedWord) -> Result<Self, TransformError> {
        if w1.is_empty() || w2.is_empty() {
            return Err(TransformError::Word(WordError::EmptyWord));
        }
        let boundary_match = w1.letters().first() == w2.letters().first()
            && w1.letters().last() == w2.letters().last();
        if !boundary_match {
            return Err(TransformError::InvalidPieceSet {
                reason: "replacement words must share first and last letter",
                first: w1.to_string(),
                second: w2.to_string(),
            });
        }
        let pieces =
            PieceSet::new(vec![w1.clone(), w1.invert(), w2.clone(), w2.invert()])?;
        Ok(ReplacementRule { w1, w2, pieces })
    }

    pub fn words(&self) -> (&ReducedWord, &ReducedWord) {
        (&self.w1, &self.w2)
    }
}

/// Swaps `w1 ↔ w2` and `w1⁻¹ ↔ w2⁻¹` factor by factor. An involution.
pub fn replacement_apply(rule: &ReplacementRule, g: &ReducedWord) -> ReducedWord {
    // Piece order in the rule's set: [w1, w1⁻¹, w2, w2⁻¹], so the swap
    // partner sits at index ^ 2.
    let mut out = ReducedWord::empty();
    for factor in decompose(g, &rule.pieces) {
        match factor {
            Factor::Piece(index) => out = out.mul(&rule.pieces.pieces()[index ^ 2]),
            Factor::Free(gap) => out = out.mul(&gap),
        }
    }
    out
}

/// A maximal-power decomposition `w = u₀ v^{k₁} u₁ ⋯ v^{k_n} u_n`: every
/// `kᵢ ≠ 0`, inner `uᵢ` are nonempty, and no `uᵢ` contains `v` or `v⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerDecomposition {
    pub head: ReducedWord,
    pub runs: Vec<(i64, ReducedWord)>,
}

impl PowerDecomposition {
    pub fn reassemble(&self, base: &ReducedWord) -> ReducedWord {
        let mut out = self.head.clone();
        for (exponent, tail) in &self.runs {
            out = out.mul(&base.power(*exponent)).mul(tail);
        }
        out
    }
}

fn check_wobbling_base(v: &ReducedWord) -> Result<(), TransformError> {
    if v.is_empty() {
        return Err(TransformError::InvalidBase("base must be nonempty".into()));
    }
    if !v.is_cyclically_reduced() {
        return Err(TransformError::InvalidBase(format!("{v} is not cyclically reduced")));
    }
    if is_self_overlapping(v)? {
        return Err(TransformError::InvalidBase(format!("{v} overlaps itself")));
    }
    Ok(())
}

/// The unique maximal-power decomposition of `w` along `v`, by a greedy
/// scan that consumes maximal runs of `v` or `v⁻¹`.
pub fn power_decompose(
    w: &ReducedWord,
    v: &ReducedWord,
) -> Result<PowerDecomposition, TransformError> {
    check_wobbling_base(v)?;
    let letters = w.letters();
    let forward = v.letters();
    let backward = v.invert();
    let matches_at = |pattern: &[Letter], i: usize| {
        i + pattern.len() <= letters.len() && letters[i..i + pattern.len()] == *pattern
    };
    let mut head = ReducedWord::empty();
    let mut runs: Vec<(i64, ReducedWord)> = Vec::new();
    let mut gap_start = 0;
    let mut i = 0;
    let push_gap = |from: usize, to: usize, runs: &mut Vec<(i64, ReducedWord)>,
                    head: &mut ReducedWord| {
        let gap = Word::new(letters[from..to].to_vec()).reduce();
        match runs.last_mut() {
            Some(last) => last.1 = gap,
            None => *head = gap,
        }
    };
    while i < letters.len() {
        let direction = if matches_at(forward, i) {
            Some(1i64)
        } else if matches_at(backward.letters(), i) {
            Some(-1)
        } else {
            None
        };
        match direction {
            Some(sign) => {
                push_gap(gap_start, i, &mut runs, &mut head);
                let pattern = if sign > 0 { forward } else { backward.letters() };
                let mut count = 0i64;
                while matches_at(pattern, i) {
                    count += 1;
                    i += pattern.len();
                }
                runs.push((sign * count, ReducedWord::empty()));
                gap_start = i;
            }
            None => i += 1,
        }
    }
    push_gap(gap_start, letters.len(), &mut runs, &mut head);
    Ok(PowerDecomposition { head, runs })
}

/// A finite-support permutation of the positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Permutation {
    map: BTreeMap<u64, u64>,
}

impl Permutation {
    pub fn new(entries: impl IntoIterator<Item = (u64, u64)>) -> Result<Self, TransformError> {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            if k == 0 || v == 0 || map.insert(k, v).is_some() {
                return Err(TransformError::InvalidPermutation);
            }
        }
        let mut values: Vec<u64> = map.values().copied().collect();
        values.sort_unstable();
        let keys: Vec<u64> = map.keys().copied().collect();
        if keys != values {
            return Err(TransformError::InvalidPermutation);
        }
        map.retain(|k, v| k != v);
        Ok(Permutation { map })
    }

    pub fn identity() -> Self {
        Permutation::default()
    }

    pub fn inverse(&self) -> Permutation {
        Permutation { map: self.map.iter().map(|(&k, &v)| (v, k)).collect() }
    }

    pub fn apply(&self, k: u64) -> u64 {
        self.map.get(&k).copied().unwrap_or(k)
    }

    /// `σ±(k) = σ(k)` for positive `k` and `−σ(−k)` otherwise; preserves
    /// sign, so reassembly never cancels at the seams.
    pub fn apply_signed(&self, k: i64) -> i64 {
        if k > 0 {
            self.apply(k as u64) as i64
        } else {
            -(self.apply((-k) as u64) as i64)
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }
}

/// A wobbling map: permute the exponents in the maximal-power
/// decomposition along a cyclically reduced, non-self-overlapping base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wobble {
    pub base: ReducedWord,
    pub sigma: Permutation,
}

impl Wobble {
    pub fn new(base: ReducedWord, sigma: Permutation) -> Result<Self, TransformError> {
        check_wobbling_base(&base)?;
        Ok(Wobble { base, sigma })
    }

    pub fn inverse(&self) -> Wobble {
        Wobble { base: self.base.clone(), sigma: self.sigma.inverse() }
    }
}

pub fn wobbling_apply(wob: &Wobble, g: &ReducedWord) -> Result<ReducedWord, TransformError> {
    let decomposition = power_decompose(g, &wob.base)?;
    let mut out = decomposition.head.clone();
    for (exponent, tail) in &decomposition.runs {
        out = out.mul(&wob.base.power(wob.sigma.apply_signed(*exponent))).mul(tail);
    }
    Ok(out)
}

/// A sliding-window substitution rule: windows of `window` letters map to
/// words over the target alphabet; missing windows map to the identity.
/// The table must be symmetric: `r(u⁻¹) = r(u)⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRule {
    window: usize,
    table: BTreeMap<Vec<Letter>, ReducedWord>,
}

impl LocalRule {
    pub fn new(
        window: usize,
        entries: impl IntoIterator<Item = (Word, Word)>,
    ) -> Result<Self, TransformError> {
        assert!(window >= 1, "window length must be positive");
        let mut table: BTreeMap<Vec<Letter>, ReducedWord> = BTreeMap::new();
        for (key, value) in entries {
            if key.len() != window {
                return Err(TransformError::AsymmetricRule(key.to_string()));
            }
            table.insert(key.letters().to_vec(), value.reduce());
        }
        for (key, value) in &table {
            let mirror: Vec<Letter> = key.iter().rev().map(Letter::inverse).collect();
            let mirrored_value = table.get(&mirror).cloned().unwrap_or_default();
            if mirrored_value != value.invert() {
                return Err(TransformError::AsymmetricRule(
                    Word::new(key.clone()).to_string(),
                ));
            }
        }
        Ok(LocalRule { window, table })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    fn image(&self, window: &[Letter]) -> ReducedWord {
        self.table.get(window).cloned().unwrap_or_default()
    }
}

/// The sliding-window product `r(x₁…x_k) r(x₂…x_{k+1}) ⋯`, reduced; words
/// shorter than the window map to the identity.
pub fn local_apply(rule: &LocalRule, g: &ReducedWord) -> ReducedWord {
    let letters = g.letters();
    if letters.len() < rule.window {
        return ReducedWord::empty();
    }
    let mut out = ReducedWord::empty();
    for i in 0..=letters.len() - rule.window {
        out = out.mul(&rule.image(&letters[i..i + rule.window]));
    }
    out
}
