//! Probes around the irrational-slope strip kernel of the rank-2 free
//! group: the words `u_n = a^⌊nβ⌋ bⁿ`, the homomorphism `φ(a) = −1`,
//! `φ(b) = β`, the strip `K = φ⁻¹([0, 1))`, commutation defects against
//! the cancellation metric, and exhaustive almost-commuting searches.
//!
//! The slope is an exact rational convergent standing in for an irrational
//! β; every computation whose floors agree with the irrational target (all
//! `n ≤ q` for a convergent `p/q`) is unaffected by the substitution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::cancel::cancellation_distance;
use crate::words::{reduced_ball, Alphabet, Letter, ReducedWord, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabError {
    #[error("slope must be a rational > 1, got {0}")]
    SlopeOutOfRange(String),
    #[error("exhaustive search is capped at length {cap}, requested {requested}")]
    SearchTooWide { requested: usize, cap: usize },
}

/// Length cap for the exhaustive almost-commuting search.
pub const SEARCH_LENGTH_CAP: usize = 12;

/// An exact rational slope `β = p/q > 1`, a convergent of the intended
/// irrational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slope {
    beta: BigRational,
}

impl Slope {
    pub fn new(beta: BigRational) -> Result<Self, LabError> {
        if beta <= BigRational::one() {
            return Err(LabError::SlopeOutOfRange(beta.to_string()));
        }
        Ok(Slope { beta })
    }

    pub fn from_fraction(numer: i64, denom: i64) -> Result<Self, LabError> {
        if denom == 0 {
            return Err(LabError::SlopeOutOfRange(format!("{numer}/0")));
        }
        Slope::new(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// The golden-ratio convergent 8/5, the default slope.
    pub fn golden_convergent() -> Self {
        Slope::from_fraction(8, 5).unwrap()
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    /// Floors computed with this convergent agree with the irrational
    /// target for all `n` up to the denominator.
    pub fn valid_up_to(&self) -> u64 {
        self.beta.denom().to_u64().unwrap_or(u64::MAX)
    }

    pub fn floor_times(&self, n: u64) -> i64 {
        (&self.beta * BigRational::from(BigInt::from(n))).floor().to_integer().to_i64().unwrap()
    }
}

fn letter_word(generator: u32) -> ReducedWord {
    Word::new(vec![Letter::new(generator, false)]).reduce()
}

/// `u_n = a^⌊nβ⌋ bⁿ`.
pub fn u_word(n: u64, slope: &Slope) -> ReducedWord {
    assert!(n >= 1, "u_n needs n >= 1");
    letter_word(0).power(slope.floor_times(n)).mul(&letter_word(1).power(n as i64))
}

/// `φ(w) = −e_a(w) + β·e_b(w)`, the dense-image homomorphism.
pub fn phi(w: &ReducedWord, slope: &Slope) -> BigRational {
    let ea = BigRational::from(BigInt::from(w.exponent_sum(0)));
    let eb = BigRational::from(BigInt::from(w.exponent_sum(1)));
    slope.beta() * eb - ea
}

/// Membership in the strip kernel `K = φ⁻¹([0, 1))`, decided exactly.
pub fn in_strip(w: &ReducedWord, slope: &Slope) -> bool {
    let value = phi(w, slope);
    !value.is_negative() && value < BigRational::one()
}

/// `d_×(uW, Wu)`: how far `W` is from commuting with `u`.
pub fn commutation_defect(u: &ReducedWord, w: &ReducedWord) -> u64 {
    cancellation_distance(&u.mul(w), &w.mul(u))
}

/// The power `u^k` closest to `W` for `|k| ≤ k_max`, scanning
/// `k = 0, 1, −1, 2, −2, …` and keeping strict improvements, so ties
/// resolve to the smallest `|k|`.
pub fn distance_to_powers(w: &ReducedWord, u: &ReducedWord, k_max: u64) -> (i64, u64) {
    let mut best = (0i64, cancellation_distance(w, &ReducedWord::empty()));
    for magnitude in 1..=k_max as i64 {
        for k in [magnitude, -magnitude] {
            let distance = cancellation_distance(w, &u.power(k));
            if distance < best.1 {
                best = (k, distance);
            }
        }
    }
    best
}

/// One hit of the almost-commuting search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub word: ReducedWord,
    pub defect: u64,
    pub nearest_power: i64,
    pub power_distance: u64,
}

/// All reduced rank-2 words `W` with `|W| ≤ length_cap` and
/// `d_×(uW, Wu) ≤ max_defect`, annotated with their nearest power of `u`,
/// in (length, lex) order.
pub fn almost_commuting_search(
    u: &ReducedWord,
    max_defect: u64,
    length_cap: usize,
    k_max: u64,
) -> Result<Vec<SearchHit>, LabError> {
    if length_cap > SEARCH_LENGTH_CAP {
        return Err(LabError::SearchTooWide { requested: length_cap, cap: SEARCH_LENGTH_CAP });
    }
    let alphabet = Alphabet::new(2).unwrap();
    let mut hits = Vec::new();
    for word in reduced_ball(alphabet, length_cap) {
        let defect = commutation_defect(u, &word);
        if defect <= max_defect {
            let (nearest_power, power_distance) = distance_to_powers(&word, u, k_max);
            hits.push(SearchHit { word, defect, nearest_power, power_distance });
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rw(text: &str) -> ReducedWord {
        ReducedWord::parse(text, Alphabet::new(2).unwrap()).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn slope_validation() {
        assert!(Slope::from_fraction(8, 5).is_ok());
        assert!(Slope::from_fraction(1, 1).is_err());
        assert!(Slope::from_fraction(2, 3).is_err());
        assert_eq!(Slope::golden_convergent().valid_up_to(), 5);
    }

    #[test]
    fn u_word_examples() {
        let golden = Slope::golden_convergent();
        assert_eq!(u_word(1, &golden), rw("ab"));
        assert_eq!(u_word(5, &golden), rw("a").power(8).mul(&rw("b").power(5)));
        let three_halves = Slope::from_fraction(3, 2).unwrap();
        assert_eq!(u_word(2, &three_halves), rw("a").power(3).mul(&rw("b").power(2)));
    }

    #[test]
    fn phi_and_strip_examples() {
        let golden = Slope::golden_convergent();
        assert_eq!(phi(&ReducedWord::empty(), &golden), rat(0, 1));
        assert!(in_strip(&ReducedWord::empty(), &golden));
        assert_eq!(phi(&rw("a"), &golden), rat(-1, 1));
        assert!(!in_strip(&rw("a"), &golden));
        for n in 1..=5 {
            let u = u_word(n, &golden);
            // φ(u_n) = nβ − ⌊nβ⌋, the fractional part.
            let expected = rat(8 * n as i64, 5) - rat(golden.floor_times(n), 1);
            assert_eq!(phi(&u, &golden), expected);
            assert!(in_strip(&u, &golden), "u_{n} in K");
        }
    }

    #[test]
    fn commutation_defect_examples() {
        let golden = Slope::golden_convergent();
        let u = u_word(2, &golden);
        // Powers commute exactly.
        for k in [-3i64, -1, 0, 2, 4] {
            assert_eq!(commutation_defect(&u, &u.power(k)), 0);
        }
        // (a·u)^k almost commutes with defect exactly 2.
        for n in 1..=3 {
            let u = u_word(n, &golden);
            for k in 1..=4 {
                let w = rw("a").mul(&u).power(k);
                assert_eq!(commutation_defect(&u, &w), 2, "n={n}, k={k}");
            }
        }
        // Pinned value: u_2 with slope 3/2 against the letter b.
        let u = u_word(2, &Slope::from_fraction(3, 2).unwrap());
        assert_eq!(commutation_defect(&u, &rw("b")), 2);
    }

    #[test]
    fn distance_to_powers_examples() {
        let golden = Slope::golden_convergent();
        let u = u_word(1, &golden);
        assert_eq!(distance_to_powers(&u.power(3), &u, 5), (3, 0));
        assert_eq!(distance_to_powers(&ReducedWord::empty(), &u, 5), (0, 0));
        for n in 1..=3 {
            let u = u_word(n, &golden);
            for k in 1..=4u64 {
                let w = rw("a").mul(&u).power(k as i64);
                assert_eq!(distance_to_powers(&w, &u, k + 2), (k as i64, k), "n={n}, k={k}");
            }
        }
    }

    #[test]
    fn search_with_zero_defect_finds_exactly_the_powers() {
        let golden = Slope::golden_convergent();
        let u = u_word(1, &golden); // ab
        let hits = almost_commuting_search(&u, 0, 8, 5).unwrap();
        let words: Vec<ReducedWord> = hits.iter().map(|h| h.word.clone()).collect();
        let mut expected: Vec<ReducedWord> = (-4i64..=4).map(|k| u.power(k)).collect();
        expected.sort_by(|x, y| (x.len(), x.letters()).cmp(&(y.len(), y.letters())));
        assert_eq!(words, expected);
        for hit in &hits {
            assert_eq!(hit.power_distance, 0);
        }
    }

    #[test]
    fn search_edge_cases() {
        let golden = Slope::golden_convergent();
        let u = u_word(1, &golden);
        let hits = almost_commuting_search(&u, 0, 0, 3).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].word, ReducedWord::empty());

        assert_eq!(
            almost_commuting_search(&u, 0, 64, 3),
            Err(LabError::SearchTooWide { requested: 64, cap: SEARCH_LENGTH_CAP })
        );

        // Defect 2 admits the (a·u)^k family.
        let hits = almost_commuting_search(&u, 2, 6, 4).unwrap();
        let au = rw("a").mul(&u);
        for k in 1..=2i64 {
            assert!(
                hits.iter().any(|h| h.word == au.power(k)),
                "missing (au)^{k}"
            );
        }
    }

    fn arb_reduced(max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec((0u32..2, prop::bool::ANY), 0..=max_len).prop_map(|ls| {
            Word::new(ls.into_iter().map(|(g, s)| Letter::new(g, s)).collect()).reduce()
        })
    }

    proptest! {
        #[test]
        fn phi_is_a_homomorphism(v in arb_reduced(10), w in arb_reduced(10)) {
            let golden = Slope::golden_convergent();
            prop_assert_eq!(
                phi(&v.mul(&w), &golden),
                phi(&v, &golden) + phi(&w, &golden)
            );
        }

        #[test]
        fn phi_is_lipschitz_for_the_cancellation_metric(
            g in arb_reduced(8),
            h in arb_reduced(8),
        ) {
            let golden = Slope::golden_convergent();
            let spread = (phi(&g, &golden) - phi(&h, &golden)).abs();
            let bound = golden.beta()
                * BigRational::from(BigInt::from(cancellation_distance(&g, &h)));
            prop_assert!(spread <= bound);
        }

        #[test]
        fn commutation_defect_is_symmetric_in_route(
            u in arb_reduced(5),
            w in arb_reduced(5),
        ) {
            // d(uW, Wu) computed through the move search agrees with the DP.
            let defect = commutation_defect(&u, &w);
            let via_moves = crate::moves::move_distance(&u.mul(&w), &w.mul(&u), 24);
            prop_assert_eq!(via_moves, crate::moves::MoveDistance::Reached(defect));
        }
    }
}
