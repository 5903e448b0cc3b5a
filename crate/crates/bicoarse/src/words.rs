//! Free group words over a ranked alphabet: parsing, free reduction,
//! inversion, powers, subword counting, overlap predicates and syllable
//! decompositions.
//!
//! Letters are written in ASCII: a lowercase letter is a generator, the
//! corresponding uppercase letter is its inverse (`A = a⁻¹`). The empty
//! word is printed as `1`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid character at position {0}")]
    InvalidCharacter(usize),
    #[error("alphabet rank {0} out of range (1..=26)")]
    RankExceeded(u32),
    #[error("pattern word must be nonempty")]
    EmptyPattern,
    #[error("word must be nonempty")]
    EmptyWord,
}

/// Number of free generators. Rank is capped at 26 by the ASCII encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    rank: u32,
}

impl Alphabet {
    pub fn new(rank: u32) -> Result<Self, WordError> {
        if (1..=26).contains(&rank) {
            Ok(Alphabet { rank })
        } else {
            Err(WordError::RankExceeded(rank))
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// All `2 * rank` letters, in the canonical order `a < A < b < B < …`.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(2 * self.rank as usize);
        for generator in 0..self.rank {
            out.push(Letter::new(generator, false));
            out.push(Letter::new(generator, true));
        }
        out
    }
}

/// A generator or an inverse generator.
///
/// The derived order is `a < A < b < B < …`, which is the order used for
/// every lexicographic tie-break in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    generator: u32,
    inverse: bool,
}

impl Letter {
    pub fn new(generator: u32, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    pub fn inverse(&self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub fn is_inverse_of(&self, other: &Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }

    fn from_char(c: char) -> Option<(Letter, u32)> {
        if c.is_ascii_lowercase() {
            let gen = c as u32 - 'a' as u32;
            Some((Letter::new(gen, false), gen))
        } else if c.is_ascii_uppercase() {
            let gen = c as u32 - 'A' as u32;
            Some((Letter::new(gen, true), gen))
        } else {
            None
        }
    }

    fn to_char(self) -> char {
        let base = if self.inverse { 'A' } else { 'a' };
        char::from_u32(base as u32 + self.generator).unwrap()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A finite, possibly unreduced, sequence of letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parses an ASCII word. Lowercase maps to a generator, uppercase to its
    /// inverse; `"1"` and `""` denote the empty word.
    pub fn parse(text: &str, alphabet: Alphabet) -> Result<Self, WordError> {
        if text == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::with_capacity(text.len());
        for (position, c) in text.chars().enumerate() {
            match Letter::from_char(c) {
                Some((letter, gen)) if gen < alphabet.rank() => letters.push(letter),
                _ => return Err(WordError::InvalidCharacter(position)),
            }
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reverses the order of the letters and inverts each of them.
    pub fn invert(&self) -> Word {
        Word(self.0.iter().rev().map(Letter::inverse).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Frees the word of adjacent inverse pairs with a single stack pass.
    pub fn reduce(&self) -> ReducedWord {
        ReducedWord::reduce_letters(&self.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_letters(&self.0, f)
    }
}

impl From<ReducedWord> for Word {
    fn from(w: ReducedWord) -> Word {
        Word(w.0)
    }
}

fn fmt_letters(letters: &[Letter], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if letters.is_empty() {
        return write!(f, "1");
    }
    for letter in letters {
        write!(f, "{letter}")?;
    }
    Ok(())
}

/// A freely reduced word: no adjacent pair `x x⁻¹`. The empty word is the
/// identity element.
///
/// The derived order on the underlying letters is lexicographic; ordering by
/// `(len, letters)` is done explicitly where it matters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn empty() -> Self {
        ReducedWord(Vec::new())
    }

    pub fn parse(text: &str, alphabet: Alphabet) -> Result<Self, WordError> {
        Ok(Word::parse(text, alphabet)?.reduce())
    }

    fn reduce_letters(letters: &[Letter]) -> ReducedWord {
        let mut stack: Vec<Letter> = Vec::with_capacity(letters.len());
        for &letter in letters {
            match stack.last() {
                Some(top) if top.is_inverse_of(&letter) => {
                    stack.pop();
                }
                _ => stack.push(letter),
            }
        }
        ReducedWord(stack)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn invert(&self) -> ReducedWord {
        ReducedWord(self.0.iter().rev().map(Letter::inverse).collect())
    }

    /// Group multiplication: concatenate and reduce.
    pub fn mul(&self, other: &ReducedWord) -> ReducedWord {
        let mut stack = self.0.clone();
        for &letter in &other.0 {
            match stack.last() {
                Some(top) if top.is_inverse_of(&letter) => {
                    stack.pop();
                }
                _ => stack.push(letter),
            }
        }
        ReducedWord(stack)
    }

    /// Splits `w = c · p · c⁻¹` with `p` cyclically reduced.
    pub fn cyclic_split(&self) -> (ReducedWord, ReducedWord) {
        let mut lo = 0;
        let mut hi = self.0.len();
        while hi - lo >= 2 && self.0[lo].is_inverse_of(&self.0[hi - 1]) {
            lo += 1;
            hi -= 1;
        }
        (ReducedWord(self.0[..lo].to_vec()), ReducedWord(self.0[lo..hi].to_vec()))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(first), Some(last)) => self.0.len() == 1 || !first.is_inverse_of(last),
            _ => true,
        }
    }

    /// `n`-th power, via the cyclic split `w = c p c⁻¹`, so that
    /// `wⁿ = c pⁿ c⁻¹` needs no repeated reduction.
    pub fn power(&self, n: i64) -> ReducedWord {
        if n == 0 || self.is_empty() {
            return ReducedWord::empty();
        }
        if n < 0 {
            return self.invert().power(-n);
        }
        let (conjugator, core) = self.cyclic_split();
        let mut letters = Vec::with_capacity(conjugator.len() * 2 + core.len() * n as usize);
        letters.extend_from_slice(&conjugator.0);
        for _ in 0..n {
            letters.extend_from_slice(&core.0);
        }
        letters.extend(conjugator.0.iter().rev().map(Letter::inverse));
        ReducedWord(letters)
    }

    /// `C_w(g)`: number of (possibly overlapping) occurrences of `pattern`
    /// as a subword of `self`.
    pub fn occurrences(&self, pattern: &ReducedWord) -> Result<usize, WordError> {
        if pattern.is_empty() {
            return Err(WordError::EmptyPattern);
        }
        Ok(occurrence_positions(&self.0, &pattern.0).count())
    }

    /// `c_w(g)`: maximal number of pairwise non-overlapping copies of
    /// `pattern` in `self`, computed by the greedy left-to-right scan.
    pub fn non_overlapping_occurrences(&self, pattern: &ReducedWord) -> Result<usize, WordError> {
        if pattern.is_empty() {
            return Err(WordError::EmptyPattern);
        }
        let mut count = 0;
        let mut i = 0;
        while i + pattern.len() <= self.len() {
            if self.0[i..i + pattern.len()] == pattern.0[..] {
                count += 1;
                i += pattern.len();
            } else {
                i += 1;
            }
        }
        Ok(count)
    }

    /// Run-length decomposition into syllables `g^k` with `k ≠ 0`;
    /// consecutive syllables carry distinct generators.
    pub fn syllables(&self) -> Vec<Syllable> {
        let mut out: Vec<Syllable> = Vec::new();
        for letter in &self.0 {
            let step: i64 = if letter.is_inverse() { -1 } else { 1 };
            match out.last_mut() {
                Some(syllable) if syllable.generator == letter.generator() => {
                    syllable.exponent += step;
                }
                _ => out.push(Syllable { generator: letter.generator(), exponent: step }),
            }
        }
        out
    }

    /// Exponent sum of one generator: the abelianization coordinate.
    pub fn exponent_sum(&self, generator: u32) -> i64 {
        self.0
            .iter()
            .filter(|l| l.generator() == generator)
            .map(|l| if l.is_inverse() { -1i64 } else { 1 })
            .sum()
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_letters(&self.0, f)
    }
}

/// One syllable `generator^exponent` of a reduced word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Syllable {
    pub generator: u32,
    pub exponent: i64,
}

fn occurrence_positions<'a>(
    haystack: &'a [Letter],
    needle: &'a [Letter],
) -> impl Iterator<Item = usize> + 'a {
    (0..haystack.len().saturating_sub(needle.len() - 1))
        .filter(move |&i| haystack[i..i + needle.len()] == *needle)
}

fn is_subword(needle: &[Letter], haystack: &[Letter]) -> bool {
    !needle.is_empty()
        && needle.len() <= haystack.len()
        && occurrence_positions(haystack, needle).next().is_some()
}

/// The overlapping relation on nonempty reduced words: subwords of one
/// another, or some nonempty word is initial in one and terminal in the
/// other.
pub fn overlaps(w1: &ReducedWord, w2: &ReducedWord) -> Result<bool, WordError> {
    if w1.is_empty() || w2.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let (a, b) = (w1.letters(), w2.letters());
    if is_subword(a, b) || is_subword(b, a) {
        return Ok(true);
    }
    let max = a.len().min(b.len());
    for l in 1..=max {
        if a[..l] == b[b.len() - l..] || b[..l] == a[a.len() - l..] {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Self-overlap of `w`: a nonempty proper border (prefix equal to a suffix,
/// shorter than the word itself).
pub fn is_self_overlapping(w: &ReducedWord) -> Result<bool, WordError> {
    if w.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let letters = w.letters();
    for l in 1..letters.len() {
        if letters[..l] == letters[letters.len() - l..] {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Serializes a reduced word as its display string (`"1"` for the empty
/// word).
pub mod serde_word {
    use super::ReducedWord;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(word: &ReducedWord, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(word)
    }
}

/// Serializes a letter as its one-character string.
pub mod serde_letter {
    use super::Letter;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(letter: &Letter, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(letter)
    }
}

/// Every reduced word of length at most `max_len`, ordered by length and
/// then lexicographically. This is the "ball" used by the finite sweeps.
pub fn reduced_ball(alphabet: Alphabet, max_len: usize) -> Vec<ReducedWord> {
    let letters = alphabet.letters();
    let mut ball = vec![ReducedWord::empty()];
    let mut layer = vec![ReducedWord::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for word in &layer {
            for &letter in &letters {
                if word.0.last().map_or(true, |last| !last.is_inverse_of(&letter)) {
                    let mut extended = word.0.clone();
                    extended.push(letter);
                    next.push(ReducedWord(extended));
                }
            }
        }
        ball.extend(next.iter().cloned());
        layer = next;
    }
    ball
}
