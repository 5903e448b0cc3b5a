//! Quasimorphisms on free groups with exact rational values.
//!
//! Four families are provided: counting quasimorphisms `φ_w = C_w − C_{w⁻¹}`
//! (Brooks), their non-overlapping variant `c_w − c_{w⁻¹}`, syllable sums
//! `φ_α = Σ α(kᵢ)` over an odd integer table (Rolli), and exact-rational
//! linear maps on exponent sums (honest homomorphisms, used as the
//! zero-defect baseline).
//!
//! Defects and controlledness moduli are estimated over finite reduced-word
//! balls. A ball maximum is a *lower* bound for the true supremum; values
//! asserted in tests are pinned empirical constants, not theory.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cancel::cancellation_distance;
use crate::words::{reduced_ball, Alphabet, ReducedWord, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QmorphError {
    #[error("ball of radius {radius} exceeds the enumeration cap {cap}")]
    BallTooLarge { radius: usize, cap: usize },
    #[error("Rolli table must be odd: alpha({0}) conflicts with alpha({1})")]
    TableNotOdd(i64, i64),
    #[error("Rolli table may not contain 0")]
    TableContainsZero,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Radius cap for exhaustive rank-2 ball sweeps.
pub const BALL_RADIUS_CAP: usize = 7;

/// An odd, finitely supported integer table on ℤ∖{0}. Entries are stored
/// for positive arguments; `alpha(−k) = −alpha(k)` and `alpha` vanishes
/// outside the support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolliTable {
    positive: BTreeMap<i64, i64>,
}

impl RolliTable {
    pub fn new(entries: impl IntoIterator<Item = (i64, i64)>) -> Result<Self, QmorphError> {
        let mut positive = BTreeMap::new();
        let mut seen = BTreeMap::new();
        for (k, v) in entries {
            if k == 0 {
                return Err(QmorphError::TableContainsZero);
            }
            if let Some(&prev) = seen.get(&k) {
                if prev != v {
                    return Err(QmorphError::TableNotOdd(k, k));
                }
            }
            if let Some(&mirror) = seen.get(&-k) {
                if mirror != -v {
                    return Err(QmorphError::TableNotOdd(-k, k));
                }
            }
            seen.insert(k, v);
            if v != 0 {
                positive.insert(k.abs(), if k > 0 { v } else { -v });
            }
        }
        Ok(RolliTable { positive })
    }

    pub fn get(&self, k: i64) -> i64 {
        match self.positive.get(&k.abs()) {
            Some(&v) if k > 0 => v,
            Some(&v) => -v,
            None => 0,
        }
    }

    pub fn positive_entries(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.positive.iter().map(|(&k, &v)| (k, v))
    }
}

/// A tagged quasimorphism evaluator.
#[derive(Debug, Clone, PartialEq)]
pub enum Quasimorphism {
    /// `φ_w(g) = C_w(g) − C_{w⁻¹}(g)` with overlapping subword counts.
    Brooks { pattern: ReducedWord },
    /// Same with maximal non-overlapping counts.
    BrooksNonOverlap { pattern: ReducedWord },
    /// `φ_α(g) = Σ α(kᵢ)` over the syllable exponents of `g`.
    Rolli { alpha: RolliTable },
    /// `g ↦ Σ coefficients[s] · exponent_sum(g, s)`; a genuine homomorphism.
    ExponentHom { coefficients: Vec<BigRational> },
}

impl Quasimorphism {
    pub fn brooks(pattern: ReducedWord) -> Result<Self, QmorphError> {
        if pattern.is_empty() {
            return Err(QmorphError::Word(WordError::EmptyPattern));
        }
        Ok(Quasimorphism::Brooks { pattern })
    }

    pub fn brooks_non_overlap(pattern: ReducedWord) -> Result<Self, QmorphError> {
        if pattern.is_empty() {
            return Err(QmorphError::Word(WordError::EmptyPattern));
        }
        Ok(Quasimorphism::BrooksNonOverlap { pattern })
    }

    pub fn evaluate(&self, g: &ReducedWord) -> BigRational {
        match self {
            Quasimorphism::Brooks { .. } | Quasimorphism::BrooksNonOverlap { .. }
            | Quasimorphism::Rolli { .. } => BigRational::from(BigInt::from(self.evaluate_int(g))),
            Quasimorphism::ExponentHom { coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(s, c)| c * BigRational::from(BigInt::from(g.exponent_sum(s as u32))))
                .sum(),
        }
    }

    /// Integer fast path for the counting and syllable variants; the
    /// exponent homomorphism is excluded (rational coefficients).
    fn evaluate_int(&self, g: &ReducedWord) -> i64 {
        match self {
            Quasimorphism::Brooks { pattern } => {
                let direct = g.occurrences(pattern).unwrap() as i64;
                let inverse = g.occurrences(&pattern.invert()).unwrap() as i64;
                direct - inverse
            }
            Quasimorphism::BrooksNonOverlap { pattern } => {
                let direct = g.non_overlapping_occurrences(pattern).unwrap() as i64;
                let inverse = g.non_overlapping_occurrences(&pattern.invert()).unwrap() as i64;
                direct - inverse
            }
            Quasimorphism::Rolli { alpha } => {
                g.syllables().iter().map(|s| alpha.get(s.exponent)).sum()
            }
            Quasimorphism::ExponentHom { .. } => unreachable!("rational-valued variant"),
        }
    }
}

/// A finite-ball defect maximum with its witness pair. The value is a
/// lower bound for the true defect `D(φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectEstimate {
    pub value: BigRational,
    pub radius: usize,
    pub witness: (ReducedWord, ReducedWord),
}

fn check_radius(radius: usize) -> Result<(), QmorphError> {
    if radius > BALL_RADIUS_CAP {
        Err(QmorphError::BallTooLarge { radius, cap: BALL_RADIUS_CAP })
    } else {
        Ok(())
    }
}

/// Max of `|φ(gh) − φ(g) − φ(h)|` over all pairs in the rank-2 ball of the
/// given radius. Ties keep the first witness in (length, lex) order.
pub fn defect_on_ball(
    q: &Quasimorphism,
    alphabet: Alphabet,
    radius: usize,
) -> Result<DefectEstimate, QmorphError> {
    check_radius(radius)?;
    let ball = reduced_ball(alphabet, radius);
    let values: Vec<BigRational> = ball.iter().map(|g| q.evaluate(g)).collect();
    let mut best = DefectEstimate {
        value: BigRational::zero(),
        radius,
        witness: (ReducedWord::empty(), ReducedWord::empty()),
    };
    for (i, g) in ball.iter().enumerate() {
        for (j, h) in ball.iter().enumerate() {
            let defect = (q.evaluate(&g.mul(h)) - &values[i] - &values[j]).abs();
            if defect > best.value {
                best = DefectEstimate { value: defect, radius, witness: (g.clone(), h.clone()) };
            }
        }
    }
    Ok(best)
}

/// The homogenization estimate `φ(gⁿ)/n` together with the error bound
/// `defect_bound / n` (valid when `defect_bound ≥ D(φ)`).
pub fn homogenize(
    q: &Quasimorphism,
    g: &ReducedWord,
    n: u32,
    defect_bound: &BigRational,
) -> (BigRational, BigRational) {
    assert!(n >= 1, "homogenization needs n >= 1");
    let n_rat = BigRational::from(BigInt::from(n));
    let estimate = q.evaluate(&g.power(n as i64)) / &n_rat;
    (estimate, defect_bound / n_rat)
}

/// `ρ(r) = max |φ(g) − φ(h)|` over ball pairs with `d_×(g, h) ≤ r`, for
/// `r = 0..=radius`. Nondecreasing, with `ρ(0) = 0`.
pub fn controlledness_modulus(
    q: &Quasimorphism,
    alphabet: Alphabet,
    radius: usize,
) -> Result<Vec<BigRational>, QmorphError> {
    check_radius(radius)?;
    let ball = reduced_ball(alphabet, radius);
    let values: Vec<BigRational> = ball.iter().map(|g| q.evaluate(g)).collect();
    let mut table = vec![BigRational::zero(); radius + 1];
    for (i, g) in ball.iter().enumerate() {
        for (j, h) in ball.iter().enumerate().skip(i + 1) {
            let spread = (&values[i] - &values[j]).abs();
            let distance = cancellation_distance(g, h) as usize;
            if distance <= radius && spread > table[distance] {
                table[distance] = spread;
            }
        }
    }
    // A pair at distance d also witnesses every r ≥ d.
    for r in 1..=radius {
        if table[r] < table[r - 1] {
            table[r] = table[r - 1].clone();
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{Letter, Word};
    use num_traits::One;
    use proptest::prelude::*;

    fn rank2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn rw(text: &str) -> ReducedWord {
        ReducedWord::parse(text, rank2()).unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn brooks_ab() -> Quasimorphism {
        Quasimorphism::brooks(rw("ab")).unwrap()
    }

    #[test]
    fn brooks_counts_powers() {
        let q = brooks_ab();
        for n in 0..=50 {
            assert_eq!(q.evaluate(&rw("ab").power(n)), rat(n));
            assert_eq!(q.evaluate(&rw("ab").power(-n)), rat(-n));
        }
        assert_eq!(q.evaluate(&ReducedWord::empty()), rat(0));
    }

    #[test]
    fn rolli_sums_syllables() {
        let alpha = RolliTable::new([(1, 1), (2, 5)]).unwrap();
        let q = Quasimorphism::Rolli { alpha };
        // aabB reduces to aa: one syllable with exponent 2.
        let g = Word::parse("aabB", rank2()).unwrap().reduce();
        assert_eq!(q.evaluate(&g), rat(5));
        assert_eq!(q.evaluate(&rw("A")), rat(-1));
        assert_eq!(q.evaluate(&ReducedWord::empty()), rat(0));
    }

    #[test]
    fn rolli_table_validation() {
        assert_eq!(RolliTable::new([(0, 3)]), Err(QmorphError::TableContainsZero));
        assert_eq!(
            RolliTable::new([(1, 1), (-1, 1)]),
            Err(QmorphError::TableNotOdd(1, -1))
        );
        let table = RolliTable::new([(2, 5), (-1, 3)]).unwrap();
        assert_eq!(table.get(1), -3);
        assert_eq!(table.get(-2), -5);
        assert_eq!(table.get(7), 0);
    }

    #[test]
    fn exponent_hom_is_linear() {
        let q = Quasimorphism::ExponentHom {
            coefficients: vec![rat(-1), BigRational::new(BigInt::from(8), BigInt::from(5))],
        };
        let g = rw("a").power(8).mul(&rw("b").power(5));
        // −8 + (8/5)·5 = 0
        assert_eq!(q.evaluate(&g), rat(0));
    }

    #[test]
    fn defect_examples() {
        let hom = Quasimorphism::ExponentHom { coefficients: vec![rat(1), rat(1)] };
        let est = defect_on_ball(&hom, rank2(), 3).unwrap();
        assert_eq!(est.value, rat(0));

        let zero = Quasimorphism::Rolli { alpha: RolliTable::new([]).unwrap() };
        assert_eq!(defect_on_ball(&zero, rank2(), 3).unwrap().value, rat(0));

        assert_eq!(
            defect_on_ball(&brooks_ab(), rank2(), 8),
            Err(QmorphError::BallTooLarge { radius: 8, cap: BALL_RADIUS_CAP })
        );
    }

    #[test]
    fn brooks_ab_ball_defect_pinned() {
        // Pinned by the radius-4 exhaustive sweep.
        let est = defect_on_ball(&brooks_ab(), rank2(), 4).unwrap();
        assert_eq!(est.value, rat(1));
        let (g, h) = &est.witness;
        let defect =
            brooks_ab().evaluate(&g.mul(h)) - brooks_ab().evaluate(g) - brooks_ab().evaluate(h);
        assert_eq!(defect.abs(), est.value);
    }

    #[test]
    fn defect_monotone_in_radius() {
        let q = brooks_ab();
        let mut last = rat(-1);
        for radius in 0..=4 {
            let est = defect_on_ball(&q, rank2(), radius).unwrap();
            assert!(est.value >= last, "defect dropped at radius {radius}");
            last = est.value;
        }
    }

    #[test]
    fn homogenization_examples() {
        let q = brooks_ab();
        let defect = rat(1);
        for n in [1u32, 3, 10, 25] {
            let (est, err) = homogenize(&q, &rw("ab"), n, &defect);
            assert_eq!(est, rat(1), "homogenized value at ab");
            assert_eq!(err, defect.clone() / rat(n as i64));
            let (est, _) = homogenize(&q, &rw("a"), n, &defect);
            assert_eq!(est, rat(0), "homogenized value at a");
        }
        // Homomorphisms are exactly homogeneous.
        let beta = BigRational::new(BigInt::from(8), BigInt::from(5));
        let hom = Quasimorphism::ExponentHom { coefficients: vec![rat(-1), beta.clone()] };
        for n in [1u32, 2, 7] {
            let (est, _) = homogenize(&hom, &rw("b"), n, &rat(0));
            assert_eq!(est, beta);
        }
    }

    #[test]
    fn doubling_sequence_is_cauchy() {
        // Gap bound |φ(g^{2^{k+1}})/2^{k+1} − φ(g^{2^k})/2^k| ≤ D/2^{k+1}
        // with the pinned cap D = 1 for φ_ab.
        let q = brooks_ab();
        let cap = rat(1);
        for g in [rw("ab"), rw("aab"), rw("abAB"), rw("ba")] {
            for k in 0..5u32 {
                let lo = q.evaluate(&g.power(1 << k)) / rat(1 << k);
                let hi = q.evaluate(&g.power(1 << (k + 1))) / rat(1 << (k + 1));
                assert!((hi - lo).abs() <= cap.clone() / rat(1 << (k + 1)), "word {g}, k {k}");
            }
        }
    }

    #[test]
    fn modulus_examples() {
        let hom = Quasimorphism::ExponentHom { coefficients: vec![rat(1), rat(1)] };
        let table = controlledness_modulus(&hom, rank2(), 3).unwrap();
        assert_eq!(table[0], rat(0));
        assert_eq!(table[1], rat(1));

        let table = controlledness_modulus(&brooks_ab(), rank2(), 4).unwrap();
        assert_eq!(table[0], rat(0));
        // Pinned radius-4 sweep values.
        assert_eq!(table, vec![rat(0), rat(1), rat(2), rat(2), rat(3)]);
        assert!(table.windows(2).all(|w| w[0] <= w[1]));
    }

    fn arb_reduced(max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec((0u32..2, prop::bool::ANY), 0..=max_len).prop_map(|ls| {
            Word::new(ls.into_iter().map(|(g, s)| Letter::new(g, s)).collect()).reduce()
        })
    }

    proptest! {
        #[test]
        fn brooks_antisymmetry(g in arb_reduced(16)) {
            for q in [brooks_ab(), Quasimorphism::brooks(rw("aab")).unwrap()] {
                prop_assert_eq!(q.evaluate(&g.invert()), -q.evaluate(&g));
            }
        }

        #[test]
        fn non_overlap_antisymmetry(g in arb_reduced(16)) {
            let q = Quasimorphism::brooks_non_overlap(rw("ab")).unwrap();
            prop_assert_eq!(q.evaluate(&g.invert()), -q.evaluate(&g));
        }

        #[test]
        fn rolli_oddness(g in arb_reduced(16)) {
            let alpha = RolliTable::new([(1, 2), (2, -1), (3, 4)]).unwrap();
            let q = Quasimorphism::Rolli { alpha };
            prop_assert_eq!(q.evaluate(&g.invert()), -q.evaluate(&g));
        }

        #[test]
        fn counting_inverse_identity(g in arb_reduced(14)) {
            // C_w(g⁻¹) = C_{w⁻¹}(g), the identity behind antisymmetry.
            let w = rw("ab");
            prop_assert_eq!(
                g.invert().occurrences(&w).unwrap(),
                g.occurrences(&w.invert()).unwrap()
            );
        }

        #[test]
        fn hom_defect_vanishes(g in arb_reduced(10), h in arb_reduced(10)) {
            let q = Quasimorphism::ExponentHom {
                coefficients: vec![BigRational::one(), rat(-3)],
            };
            let defect = q.evaluate(&g.mul(&h)) - q.evaluate(&g) - q.evaluate(&h);
            prop_assert!(defect.is_zero());
        }
    }
}
