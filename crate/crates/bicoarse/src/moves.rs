//! The move calculus on reduced words: a cancellation move deletes one
//! letter and reduces, an addition move inserts a reduced conjugate
//! `u x u⁻¹` of a letter so that the result is reduced.
//!
//! The move-graph distance equals the cancellation distance, and every
//! geodesic can be reordered so that all cancellations come first. That
//! reordering is what makes the distance searchable: additions are never
//! enumerated forward (there are infinitely many); instead two downward
//! cancellation-only frontiers are grown from both endpoints and
//! intersected.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::words::{Letter, ReducedWord, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoveError {
    #[error("move search exhausted the cap of {0} moves")]
    Unreached(u64),
    #[error("move does not apply to the current word")]
    InvalidReplay,
}

/// One move, with enough position data to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Move {
    /// Delete the letter at `index` from the source word and reduce.
    #[serde(rename_all = "camelCase")]
    Cancellation { index: usize },
    /// Insert `conjugator · letter · conjugator⁻¹` at `split`; the result
    /// is again reduced.
    #[serde(rename_all = "camelCase")]
    Addition {
        split: usize,
        #[serde(with = "crate::words::serde_word")]
        conjugator: ReducedWord,
        #[serde(with = "crate::words::serde_letter")]
        letter: Letter,
    },
}

impl Move {
    pub fn apply(&self, word: &ReducedWord) -> Result<ReducedWord, MoveError> {
        match self {
            Move::Cancellation { index } => {
                if *index >= word.len() {
                    return Err(MoveError::InvalidReplay);
                }
                Ok(delete_and_reduce(word, *index))
            }
            Move::Addition { split, conjugator, letter } => {
                if *split > word.len() {
                    return Err(MoveError::InvalidReplay);
                }
                let mut letters = word.letters()[..*split].to_vec();
                letters.extend_from_slice(conjugator.letters());
                letters.push(*letter);
                letters.extend(conjugator.letters().iter().rev().map(Letter::inverse));
                letters.extend_from_slice(&word.letters()[*split..]);
                let inserted = Word::new(letters);
                let reduced = inserted.reduce();
                if reduced.len() != inserted.len() {
                    return Err(MoveError::InvalidReplay);
                }
                Ok(reduced)
            }
        }
    }
}

/// A start word together with a replayable chain of moves. In normal form
/// no addition precedes a cancellation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoveSequence {
    #[serde(with = "crate::words::serde_word")]
    pub start: ReducedWord,
    pub moves: Vec<Move>,
}

impl MoveSequence {
    /// Replays the moves, returning the full chain of reduced words
    /// (including the start).
    pub fn replay(&self) -> Result<Vec<ReducedWord>, MoveError> {
        let mut chain = vec![self.start.clone()];
        for mv in &self.moves {
            let next = mv.apply(chain.last().unwrap())?;
            chain.push(next);
        }
        Ok(chain)
    }

    pub fn is_normal_form(&self) -> bool {
        let first_addition = self
            .moves
            .iter()
            .position(|m| matches!(m, Move::Addition { .. }))
            .unwrap_or(self.moves.len());
        self.moves[first_addition..]
            .iter()
            .all(|m| matches!(m, Move::Addition { .. }))
    }

    pub fn end(&self) -> Result<ReducedWord, MoveError> {
        Ok(self.replay()?.pop().unwrap())
    }
}

fn delete_and_reduce(word: &ReducedWord, index: usize) -> ReducedWord {
    let mut letters = word.letters().to_vec();
    letters.remove(index);
    Word::new(letters).reduce()
}

/// All words one cancellation move away, deduplicated.
pub fn cancellation_neighbors(word: &ReducedWord) -> Vec<ReducedWord> {
    let mut out: Vec<ReducedWord> = (0..word.len()).map(|i| delete_and_reduce(word, i)).collect();
    out.sort_by(|x, y| (x.len(), x.letters()).cmp(&(y.len(), y.letters())));
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MoveDistance {
    Reached(u64),
    Unreached,
}

impl MoveDistance {
    pub fn value(self) -> Option<u64> {
        match self {
            MoveDistance::Reached(d) => Some(d),
            MoveDistance::Unreached => None,
        }
    }
}

/// Per-word search record: depth and the deleted index leading back to the
/// parent word.
struct Visited {
    depth: u64,
    parent: Option<(ReducedWord, usize)>,
}

/// Downward cancellation-only closure from `start`, up to `max_depth`.
/// Expansion strictly decreases word length, so the search terminates.
fn downward_closure(start: &ReducedWord, max_depth: u64) -> HashMap<ReducedWord, Visited> {
    let mut visited = HashMap::new();
    visited.insert(start.clone(), Visited { depth: 0, parent: None });
    let mut frontier = vec![start.clone()];
    let mut depth = 0;
    while !frontier.is_empty() && depth < max_depth {
        depth += 1;
        let mut next = Vec::new();
        for word in frontier {
            for index in 0..word.len() {
                let neighbor = delete_and_reduce(&word, index);
                debug_assert!(neighbor.len() < word.len());
                if !visited.contains_key(&neighbor) {
                    visited.insert(
                        neighbor.clone(),
                        Visited { depth, parent: Some((word.clone(), index)) },
                    );
                    next.push(neighbor);
                }
            }
        }
        frontier = next;
    }
    visited
}

/// The move-graph distance, found by intersecting the two downward
/// frontiers; equals the cancellation distance whenever it is at most
/// `cap`.
pub fn move_distance(w1: &ReducedWord, w2: &ReducedWord, cap: u64) -> MoveDistance {
    match meet(w1, w2, cap) {
        Some((_, d)) => MoveDistance::Reached(d),
        None => MoveDistance::Unreached,
    }
}

/// Minimal-distance meeting point of the two downward closures, with ties
/// broken by smallest length, then lexicographically smallest word.
fn meet(w1: &ReducedWord, w2: &ReducedWord, cap: u64) -> Option<(ReducedWord, u64)> {
    let side1 = downward_closure(w1, cap);
    let side2 = downward_closure(w2, cap);
    let mut best: Option<(ReducedWord, u64)> = None;
    for (word, v1) in &side1 {
        if let Some(v2) = side2.get(word) {
            let total = v1.depth + v2.depth;
            if total > cap {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bw, bd)) => {
                    (total, word.len(), word.letters()) < (*bd, bw.len(), bw.letters())
                }
            };
            if better {
                best = Some((word.clone(), total));
            }
        }
    }
    best
}

fn cancellation_path(
    closure: &HashMap<ReducedWord, Visited>,
    target: &ReducedWord,
) -> Vec<(ReducedWord, usize)> {
    // Path of (source word, deleted index) pairs from the BFS root down to
    // the target.
    let mut path = Vec::new();
    let mut cursor = target.clone();
    while let Some((parent, index)) = &closure[&cursor].parent {
        path.push((parent.clone(), *index));
        cursor = parent.clone();
    }
    path.reverse();
    path
}

/// Encodes the addition move that reverses "delete `index` from `source`
/// and reduce". If `j` letters cancel at the seam, the source reads
/// `p · u · x · u⁻¹ · r` with `|u| = j`, so the addition re-inserts
/// `u x u⁻¹` at split `|p|`.
fn addition_from_cancellation(source: &ReducedWord, index: usize) -> Move {
    let letters = source.letters();
    let mut depth = 0;
    while index >= depth + 1
        && index + depth + 1 < letters.len()
        && letters[index - depth - 1].is_inverse_of(&letters[index + depth + 1])
    {
        depth += 1;
    }
    let conjugator = Word::new(letters[index - depth..index].to_vec()).reduce();
    debug_assert_eq!(conjugator.len(), depth);
    Move::Addition { split: index - depth, conjugator, letter: letters[index] }
}

/// A geodesic in normal form: cancellations from `w1` down to a meeting
/// word, then additions (reversed cancellations from `w2`) up to `w2`.
pub fn geodesic_moves(
    w1: &ReducedWord,
    w2: &ReducedWord,
    cap: u64,
) -> Result<MoveSequence, MoveError> {
    let (meeting, _) = meet(w1, w2, cap).ok_or(MoveError::Unreached(cap))?;
    let side1 = downward_closure(w1, cap);
    let side2 = downward_closure(w2, cap);
    let mut moves: Vec<Move> = cancellation_path(&side1, &meeting)
        .into_iter()
        .map(|(_, index)| Move::Cancellation { index })
        .collect();
    let mut up = cancellation_path(&side2, &meeting);
    up.reverse();
    moves.extend(
        up.into_iter().map(|(source, index)| addition_from_cancellation(&source, index)),
    );
    Ok(MoveSequence { start: w1.clone(), moves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cancel::cancellation_distance;
    use crate::words::{Alphabet, ReducedWord};
    use proptest::prelude::*;
    use std::collections::{HashMap, VecDeque};

    fn rw(text: &str) -> ReducedWord {
        ReducedWord::parse(text, Alphabet::new(2).unwrap()).unwrap()
    }

    #[test]
    fn neighbor_examples() {
        let neighbors = cancellation_neighbors(&rw("ab"));
        assert_eq!(neighbors, vec![rw("a"), rw("b")]);

        let neighbors = cancellation_neighbors(&rw("abAB"));
        let expected: Vec<ReducedWord> =
            ["a", "B", "abA", "bAB"].iter().map(|t| rw(t)).collect();
        assert_eq!(neighbors, expected);

        assert!(cancellation_neighbors(&ReducedWord::empty()).is_empty());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(move_distance(&rw("abAB"), &rw("abAB"), 4), MoveDistance::Reached(0));
        assert_eq!(move_distance(&rw("abAB"), &ReducedWord::empty(), 8), MoveDistance::Reached(2));
        assert_eq!(move_distance(&rw("ab"), &rw("ba"), 8), MoveDistance::Reached(2));
        assert_eq!(move_distance(&rw("abab"), &ReducedWord::empty(), 1), MoveDistance::Unreached);
    }

    #[test]
    fn geodesic_examples() {
        let geo = geodesic_moves(&rw("ab"), &rw("ab"), 4).unwrap();
        assert!(geo.moves.is_empty());

        let geo = geodesic_moves(&rw("abAAB"), &ReducedWord::empty(), 8).unwrap();
        assert_eq!(geo.moves.len(), 3);
        assert!(geo.moves.iter().all(|m| matches!(m, Move::Cancellation { .. })));
        assert_eq!(geo.end().unwrap(), ReducedWord::empty());

        let geo = geodesic_moves(&rw("ab"), &rw("ba"), 8).unwrap();
        assert_eq!(geo.moves.len(), 2);
        assert!(matches!(geo.moves[0], Move::Cancellation { .. }));
        assert!(matches!(geo.moves[1], Move::Addition { .. }));
        assert!(geo.is_normal_form());
        assert_eq!(geo.end().unwrap(), rw("ba"));
    }

    #[test]
    fn addition_reverses_cancellation() {
        // Deleting the b of abA collapses the whole word; the reverse
        // addition must re-insert the conjugate a·b·a⁻¹.
        let source = rw("abA");
        let target = delete_and_reduce(&source, 1);
        assert_eq!(target, ReducedWord::empty());
        let add = addition_from_cancellation(&source, 1);
        assert_eq!(
            add,
            Move::Addition { split: 0, conjugator: rw("a"), letter: Letter::new(1, false) }
        );
        assert_eq!(add.apply(&target).unwrap(), source);
    }

    /// 0/1-cost BFS over the unrestricted move graph on (possibly
    /// unreduced) words: letter insertions/deletions cost 1, cancelling
    /// pair insertions/deletions cost 0. Words longer than `max_len` are
    /// pruned.
    fn unrestricted_move_distance(
        from: &ReducedWord,
        to: &ReducedWord,
        max_len: usize,
    ) -> Option<u64> {
        type Codes = Vec<u8>;
        let encode = |w: &ReducedWord| -> Codes {
            w.letters().iter().map(|l| (l.generator() * 2) as u8 + u8::from(l.is_inverse())).collect()
        };
        let start = encode(from);
        let goal = encode(to);
        let mut dist: HashMap<Codes, u64> = HashMap::new();
        let mut queue: VecDeque<Codes> = VecDeque::new();
        dist.insert(start.clone(), 0);
        queue.push_back(start);
        while let Some(word) = queue.pop_front() {
            let d = dist[&word];
            if word == goal {
                return Some(d);
            }
            let mut relax = |next: Codes, cost: u64, queue: &mut VecDeque<Codes>| {
                if next.len() > max_len {
                    return;
                }
                let best = dist.get(&next).copied().unwrap_or(u64::MAX);
                if d + cost < best {
                    dist.insert(next.clone(), d + cost);
                    if cost == 0 {
                        queue.push_front(next);
                    } else {
                        queue.push_back(next);
                    }
                }
            };
            // T⁻: drop an adjacent cancelling pair (cost 0).
            for i in 0..word.len().saturating_sub(1) {
                if word[i] ^ 1 == word[i + 1] {
                    let mut next = word.clone();
                    next.drain(i..i + 2);
                    relax(next, 0, &mut queue);
                }
            }
            // T⁺: insert a cancelling pair (cost 0).
            for i in 0..=word.len() {
                for code in 0..4u8 {
                    let mut next = word.clone();
                    next.insert(i, code ^ 1);
                    next.insert(i, code);
                    relax(next, 0, &mut queue);
                }
            }
            // A⁻ / A⁺: delete or insert one letter (cost 1).
            for i in 0..word.len() {
                let mut next = word.clone();
                next.remove(i);
                relax(next, 1, &mut queue);
            }
            for i in 0..=word.len() {
                for code in 0..4u8 {
                    let mut next = word.clone();
                    next.insert(i, code);
                    relax(next, 1, &mut queue);
                }
            }
        }
        None
    }

    #[test]
    fn matches_unrestricted_bfs_on_small_words() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xb1c0);
        let mut random_reduced = |max_len: usize| -> ReducedWord {
            let len = rng.gen_range(0..=max_len);
            let letters: Vec<Letter> =
                (0..len).map(|_| Letter::new(rng.gen_range(0..2), rng.gen_bool(0.5))).collect();
            Word::new(letters).reduce()
        };
        for _ in 0..1000 {
            let w1 = random_reduced(3);
            let w2 = random_reduced(3);
            let expected = cancellation_distance(&w1, &w2);
            let cap = (w1.len() + w2.len()).max(1);
            let via_moves = unrestricted_move_distance(&w1, &w2, cap).unwrap();
            assert_eq!(via_moves, expected, "{w1} vs {w2}");
        }
    }

    fn arb_reduced(max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec((0u32..2, prop::bool::ANY), 0..=max_len).prop_map(|ls| {
            Word::new(ls.into_iter().map(|(g, s)| Letter::new(g, s)).collect()).reduce()
        })
    }

    proptest! {
        #[test]
        fn distance_agrees_with_dp(w1 in arb_reduced(8), w2 in arb_reduced(8)) {
            let expected = cancellation_distance(&w1, &w2);
            prop_assert_eq!(
                move_distance(&w1, &w2, 16),
                MoveDistance::Reached(expected)
            );
        }

        #[test]
        fn geodesics_replay_and_have_right_length(
            w1 in arb_reduced(7),
            w2 in arb_reduced(7),
        ) {
            let d = cancellation_distance(&w1, &w2);
            let geo = geodesic_moves(&w1, &w2, 16).unwrap();
            prop_assert_eq!(geo.moves.len() as u64, d);
            prop_assert!(geo.is_normal_form());
            let chain = geo.replay().unwrap();
            prop_assert_eq!(chain.first().unwrap(), &w1);
            prop_assert_eq!(chain.last().unwrap(), &w2);
        }

        #[test]
        fn neighbors_shrink_with_right_parity(w in arb_reduced(9)) {
            for neighbor in cancellation_neighbors(&w) {
                prop_assert!(neighbor.len() + 1 <= w.len());
                prop_assert_eq!((neighbor.len() + 1) % 2, w.len() % 2);
            }
        }
    }
}
