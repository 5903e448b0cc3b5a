//! Word metrics on ℤ from (possibly infinite) generating sets, and the
//! pro-Q witness sequence that separates profinite coarse structures.
//!
//! `|k|_S` is the graph distance in the Cayley graph of ℤ over `S`: the
//! minimal `m` with `k = Σᵢ ±sᵢ`, `sᵢ ∈ S`. Two search routines are used:
//! a multiset iterative-deepening search for single values, and a layered
//! window sweep for whole-range diameter checks.
//!
//! The witness sequence is `k_n = k_{n−1} · (p₁⋯p_n)^{a_n}` with `a_n` the
//! multiplicative order of the product modulo `q^{l_{n−1}}`. The values
//! blow up doubly exponentially, so they are carried in factored form
//! `∏ p^e` with big-integer exponents; only small enough values are ever
//! expanded into plain integers.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ZmetricError {
    #[error("generating set members must be positive and distinct (got {0})")]
    InvalidMember(u64),
    #[error("{0} is not prime")]
    NonPrimeInput(u64),
    #[error("separating prime {0} must not belong to Q")]
    QContainsQ(u64),
    #[error("factorial check needs 2 <= n <= 7, got {0}")]
    InfeasibleN(u32),
    #[error("step {0} would need a modulus beyond the materialization cap")]
    StepsTooDeep(usize),
}

/// A generating family for ℤ: explicit list or a named lazy family, with
/// optional exclusions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ZGenKind {
    Explicit(Vec<u64>),
    Factorials { max_n: u32 },
    PowersOf { base: u64, max_exp: u32 },
    Primes { limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZGenSet {
    pub kind: ZGenKind,
    pub exclusions: Vec<u64>,
}

impl ZGenSet {
    pub fn new(kind: ZGenKind, exclusions: Vec<u64>) -> Result<Self, ZmetricError> {
        let set = ZGenSet { kind, exclusions };
        let mut raw = set.members_raw();
        raw.sort_unstable();
        if raw.first() == Some(&0) {
            return Err(ZmetricError::InvalidMember(0));
        }
        for pair in raw.windows(2) {
            if pair[0] == pair[1] {
                return Err(ZmetricError::InvalidMember(pair[0]));
            }
        }
        if set.members().is_empty() {
            return Err(ZmetricError::InvalidMember(0));
        }
        Ok(set)
    }

    pub fn explicit(members: Vec<u64>) -> Result<Self, ZmetricError> {
        ZGenSet::new(ZGenKind::Explicit(members), Vec::new())
    }

    fn members_raw(&self) -> Vec<u64> {
        match &self.kind {
            ZGenKind::Explicit(list) => list.clone(),
            ZGenKind::Factorials { max_n } => {
                let mut fact = 1u64;
                (1..=*max_n)
                    .map(|n| {
                        fact *= n as u64;
                        fact
                    })
                    .collect()
            }
            ZGenKind::PowersOf { base, max_exp } => {
                (0..=*max_exp).map(|e| base.pow(e)).collect()
            }
            ZGenKind::Primes { limit } => primes_up_to(*limit),
        }
    }

    /// Sorted ascending, exclusions applied.
    pub fn members(&self) -> Vec<u64> {
        let mut out = self.members_raw();
        out.retain(|m| !self.exclusions.contains(m));
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZLength {
    Reached(u64),
    Unreached,
}

impl ZLength {
    pub fn value(self) -> Option<u64> {
        match self {
            ZLength::Reached(v) => Some(v),
            ZLength::Unreached => None,
        }
    }
}

fn signed_sum_dfs(target: i128, depth: u32, members: &[u64], start: usize) -> bool {
    if depth == 0 {
        return target == 0;
    }
    // Largest available member bounds how far `depth` more steps can reach.
    if target.unsigned_abs() > members[start] as u128 * depth as u128 {
        return false;
    }
    for idx in start..members.len() {
        let s = members[idx] as i128;
        if signed_sum_dfs(target - s, depth - 1, members, idx)
            || signed_sum_dfs(target + s, depth - 1, members, idx)
        {
            return true;
        }
    }
    false
}

/// Minimal `m ≤ cap` with `k` a sum of `m` signed generators, by iterative
/// deepening over non-increasing generator multisets.
pub fn z_word_length(k: i64, set: &ZGenSet, cap: u32) -> ZLength {
    let mut members = set.members();
    members.sort_unstable_by(|a, b| b.cmp(a));
    for depth in 0..=cap {
        if signed_sum_dfs(k as i128, depth, &members, 0) {
            return ZLength::Reached(depth as u64);
        }
    }
    ZLength::Unreached
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorialCheck {
    pub n: u32,
    pub expected: u64,
    pub computed: ZLength,
}

impl FactorialCheck {
    pub fn holds(&self) -> bool {
        self.computed == ZLength::Reached(self.expected)
    }
}

/// Verifies `|n!|_{W∖{n!}} = n` against the factorials up to `(n+2)!`.
pub fn factorial_length_check(n: u32) -> Result<FactorialCheck, ZmetricError> {
    if !(2..=7).contains(&n) {
        return Err(ZmetricError::InfeasibleN(n));
    }
    let factorial: u64 = (1..=n as u64).product();
    let set = ZGenSet::new(ZGenKind::Factorials { max_n: n + 2 }, vec![factorial])?;
    Ok(FactorialCheck {
        n,
        expected: n as u64,
        computed: z_word_length(factorial as i64, &set, n + 1),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowReport {
    pub ok: bool,
    pub failures: Vec<u64>,
}

/// Checks `|k|_S ≤ m` for every `1 ≤ k ≤ n_max` with a layered reachability
/// sweep. Partial sums can always be reordered to stay within
/// `[−(n_max + max S), n_max + max S]`, so clipping to that window is exact.
pub fn window_diameter(set: &ZGenSet, n_max: u64, m: u64) -> WindowReport {
    let members = set.members();
    let s_max = *members.last().unwrap();
    let half = (n_max + s_max) as usize;
    let width = 2 * half + 1;
    let mut reachable = vec![false; width];
    reachable[half] = true; // offset: index = value + half
    let mut reached_at_or_below = reachable.clone();
    for _ in 0..m {
        let mut next = vec![false; width];
        for (i, &r) in reachable.iter().enumerate() {
            if !r {
                continue;
            }
            for &s in &members {
                let s = s as usize;
                if i + s < width {
                    next[i + s] = true;
                }
                if i >= s {
                    next[i - s] = true;
                }
            }
        }
        for i in 0..width {
            reached_at_or_below[i] |= next[i];
        }
        reachable = next;
    }
    let failures: Vec<u64> =
        (1..=n_max).filter(|&k| !reached_at_or_below[half + k as usize]).collect();
    WindowReport { ok: failures.is_empty(), failures }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    let mut sieve = vec![true; (limit + 1) as usize];
    let mut out = Vec::new();
    for p in 2..=limit as usize {
        if sieve[p] {
            out.push(p as u64);
            let mut multiple = p * p;
            while multiple <= limit as usize {
                sieve[multiple] = false;
                multiple += p;
            }
        }
    }
    out
}

/// A positive integer in factored form `∏ p^e` with big exponents. The
/// witness values outgrow any dense representation after a few steps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactoredInt {
    exponents: BTreeMap<u64, BigUint>,
}

/// Values above this bit count are never expanded into a plain integer.
pub const MATERIALIZE_BITS_CAP: u64 = 1 << 22;

impl FactoredInt {
    pub fn one() -> Self {
        FactoredInt::default()
    }

    pub fn exponents(&self) -> &BTreeMap<u64, BigUint> {
        &self.exponents
    }

    pub fn multiply_product_power(&mut self, primes: &[u64], exponent: &BigUint) {
        for &p in primes {
            *self.exponents.entry(p).or_insert_with(BigUint::zero) += exponent;
        }
    }

    pub fn valuation(&self, p: u64) -> BigUint {
        self.exponents.get(&p).cloned().unwrap_or_else(BigUint::zero)
    }

    /// Upper estimate of the bit length, `Σ e·log₂ p`; `f64::INFINITY` when
    /// the exponents themselves overflow doubles.
    pub fn bits_estimate(&self) -> f64 {
        self.exponents
            .iter()
            .map(|(&p, e)| e.to_f64().unwrap_or(f64::INFINITY) * (p as f64).log2())
            .sum()
    }

    pub fn to_biguint(&self) -> Option<BigUint> {
        if self.bits_estimate() > MATERIALIZE_BITS_CAP as f64 {
            return None;
        }
        let mut out = BigUint::one();
        for (&p, e) in &self.exponents {
            out *= BigUint::from(p).pow(e.to_u32()?);
        }
        Some(out)
    }

    /// `self mod q^l` for `q` coprime to every factor, via exponent
    /// reduction modulo `φ(q^l)`.
    pub fn mod_prime_power(&self, q: u64, l: u32) -> BigUint {
        let modulus = BigUint::from(q).pow(l);
        let phi = BigUint::from(q).pow(l - 1) * BigUint::from(q - 1);
        let mut out = BigUint::one();
        for (&p, e) in &self.exponents {
            let reduced = e.mod_floor(&phi);
            out = out * BigUint::from(p).modpow(&reduced, &modulus) % &modulus;
        }
        out
    }

    pub fn decimal(&self) -> Option<String> {
        self.to_biguint().map(|v| v.to_string())
    }
}

/// Multiplicative order of `x` modulo the prime `q`.
fn order_mod_prime(x: u64, q: u64) -> u64 {
    let modulus = q as u128;
    let x = (x as u128) % modulus;
    assert!(x != 0, "order of a multiple of q");
    let mut acc = x;
    let mut order = 1;
    while acc != 1 {
        acc = acc * x % modulus;
        order += 1;
    }
    order
}

/// `v_q(value)` for a plain big integer.
fn valuation_biguint(mut value: BigUint, q: u64) -> u32 {
    let q = BigUint::from(q);
    let mut v = 0;
    while (&value % &q).is_zero() && !value.is_zero() {
        value /= &q;
        v += 1;
    }
    v
}

/// Exact `v_q(x^a − 1)` data for lifting: returns `(d, t)` with
/// `d = ord_q(x)` and `t = v_q(x^d − 1)`, so that for odd `q`
/// `x^a ≡ 1 (mod q^l)  ⇔  d | a  and  t + v_q(a/d) ≥ l`.
fn lifting_data(x: u64, q: u64) -> (u64, u32) {
    let d = order_mod_prime(x, q);
    let xd = BigUint::from(x).pow(d as u32) - BigUint::one();
    (d, valuation_biguint(xd, q))
}

/// Multiplicative order of `x` modulo `q^l`, as a big integer (`l` may be
/// large enough that the order itself is astronomical).
fn order_mod_prime_power(x: u64, q: u64, l: u32) -> BigUint {
    if q == 2 {
        // (ℤ/2^l)* is not cyclic; handle the standard cases directly.
        if l == 1 || x % 4 == 1 && l == 2 {
            return BigUint::one();
        }
        let s = valuation_biguint(BigUint::from(x) - BigUint::one(), 2);
        if x % 4 == 1 {
            return BigUint::from(2u64).pow(l.saturating_sub(s).max(0));
        }
        if l == 2 {
            return BigUint::from(2u64);
        }
        let s2 = valuation_biguint(BigUint::from(x) + BigUint::one(), 2);
        return BigUint::from(2u64) * BigUint::from(2u64).pow((l - 1).saturating_sub(s2).max(0));
    }
    let (d, t) = lifting_data(x, q);
    if l <= t {
        BigUint::from(d)
    } else {
        BigUint::from(d) * BigUint::from(q).pow(l - t)
    }
}

/// The witness sequence for separating the pro-Q coarse structure from the
/// pro-q one: `k_n → 0` pro-Q while staying congruence-stable mod powers
/// of `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfiniteWitness {
    /// Q, in the order used for the partial products.
    pub base_primes: Vec<u64>,
    /// q, the prime being separated.
    pub separating_prime: u64,
    /// k₁ … k_m, factored.
    pub values: Vec<FactoredInt>,
    /// l₁ … l_{m−1}: step n+1 works modulo q^{l_n}, with l_n minimal such
    /// that q^{l_n} ≥ k_n.
    pub moduli: Vec<u32>,
    /// a₁ … a_m.
    pub exponents: Vec<BigUint>,
}

impl ProfiniteWitness {
    /// p₁⋯p_min(n,|Q|) for step `n` (1-based); once Q is exhausted the full
    /// product repeats.
    pub fn product_primes(&self, n: usize) -> &[u64] {
        &self.base_primes[..n.min(self.base_primes.len())]
    }
}

/// Constructs the witness: `k₁ = p₁^{ord_q(p₁)}`, then
/// `k_n = k_{n−1}·(p₁⋯p_n)^{a_n}` with `a_n = ord_{q^{l_{n−1}}}(p₁⋯p_n)`
/// and `l_{n−1}` minimal with `q^{l_{n−1}} ≥ k_{n−1}`.
pub fn profinite_witness(
    base_primes: &[u64],
    separating_prime: u64,
    steps: usize,
) -> Result<ProfiniteWitness, ZmetricError> {
    if !is_prime(separating_prime) {
        return Err(ZmetricError::NonPrimeInput(separating_prime));
    }
    for &p in base_primes {
        if !is_prime(p) {
            return Err(ZmetricError::NonPrimeInput(p));
        }
        if p == separating_prime {
            return Err(ZmetricError::QContainsQ(p));
        }
    }
    assert!(!base_primes.is_empty() && steps >= 1);
    let q = separating_prime;
    let mut witness = ProfiniteWitness {
        base_primes: base_primes.to_vec(),
        separating_prime,
        values: Vec::new(),
        moduli: Vec::new(),
        exponents: Vec::new(),
    };
    let mut current = FactoredInt::one();
    for n in 1..=steps {
        let product_primes = &base_primes[..n.min(base_primes.len())];
        let product: u64 = product_primes.iter().product();
        let exponent = if n == 1 {
            BigUint::from(order_mod_prime(product, q))
        } else {
            let value = current.to_biguint().ok_or(ZmetricError::StepsTooDeep(n))?;
            let l = minimal_covering_power(q, &value);
            witness.moduli.push(l);
            order_mod_prime_power(product, q, l)
        };
        current.multiply_product_power(product_primes, &exponent);
        witness.exponents.push(exponent);
        witness.values.push(current.clone());
    }
    Ok(witness)
}

/// Minimal `l ≥ 1` with `q^l ≥ value`.
fn minimal_covering_power(q: u64, value: &BigUint) -> u32 {
    let q = BigUint::from(q);
    let mut power = q.clone();
    let mut l = 1;
    while &power < value {
        power *= &q;
        l += 1;
    }
    l
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WitnessViolation {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("separating prime occurs in Q")]
    SeparatingPrimeInQ,
    #[error("modulus l_{j} is not minimal for k_{j}")]
    ModulusNotMinimal { j: usize },
    #[error("congruence k_{n} = k_{j} mod q^l_{j} fails")]
    CongruenceBroken { j: usize, n: usize },
    #[error("valuation of p={p} does not grow at step {n}")]
    ValuationStalled { p: u64, n: usize },
    #[error("witness value k_{0} is missing")]
    MissingValue(usize),
}

/// Re-verifies the witness invariants independently of the construction:
/// primality, minimal moduli, congruence stability `k_n ≡ k_j (mod q^{l_j})`
/// for `n ≥ j`, and strictly growing p-adic valuations for each `p ∈ Q`.
///
/// Small moduli are checked by direct modular exponentiation. Moduli too
/// large for that are checked by the lifting criterion: for odd `q` and
/// `x` with `ord_q(x) = d`, `x^a ≡ 1 (mod q^l)` iff `d | a` and
/// `v_q(x^d − 1) + v_q(a/d) ≥ l`.
pub fn verify_witness(w: &ProfiniteWitness) -> Result<(), WitnessViolation> {
    let q = w.separating_prime;
    if !is_prime(q) {
        return Err(WitnessViolation::NotPrime(q));
    }
    for &p in &w.base_primes {
        if !is_prime(p) {
            return Err(WitnessViolation::NotPrime(p));
        }
        if p == q {
            return Err(WitnessViolation::SeparatingPrimeInQ);
        }
    }
    let m = w.values.len();
    // Moduli minimality: q^{l_j − 1} < k_j ≤ q^{l_j}.
    for (j, &l) in w.moduli.iter().enumerate() {
        let value = w.values[j].to_biguint().ok_or(WitnessViolation::MissingValue(j + 1))?;
        let power = BigUint::from(q).pow(l);
        let below = BigUint::from(q).pow(l - 1);
        if power < value || (l > 1 && below >= value) {
            return Err(WitnessViolation::ModulusNotMinimal { j: j + 1 });
        }
    }
    // Congruences, modulus by modulus.
    const DIRECT_MODULUS_BITS: u64 = 4096;
    for (j, &l) in w.moduli.iter().enumerate() {
        let modulus_bits = (l as f64) * (q as f64).log2();
        if modulus_bits <= DIRECT_MODULUS_BITS as f64 {
            let reference = w.values[j].mod_prime_power(q, l);
            for value in &w.values[j + 1..] {
                if value.mod_prime_power(q, l) != reference {
                    return Err(WitnessViolation::CongruenceBroken { j: j + 1, n: m });
                }
            }
        } else {
            // k_n / k_j = ∏ (products)^{a_i}; each factor must be ≡ 1.
            for n in (j + 2)..=m {
                let x: u64 = w.product_primes(n).iter().product();
                let a = &w.exponents[n - 1];
                let (d, t) = lifting_data(x, q);
                let d_big = BigUint::from(d);
                if !a.mod_floor(&d_big).is_zero() {
                    return Err(WitnessViolation::CongruenceBroken { j: j + 1, n });
                }
                let mut quotient = a / d_big;
                let mut lifted = t as u64;
                let q_big = BigUint::from(q);
                while lifted < l as u64 && quotient.mod_floor(&q_big).is_zero() {
                    quotient /= &q_big;
                    lifted += 1;
                }
                if lifted < l as u64 {
                    return Err(WitnessViolation::CongruenceBroken { j: j + 1, n });
                }
            }
        }
    }
    // Valuations grow once a prime has entered the product.
    for (idx, &p) in w.base_primes.iter().enumerate() {
        for n in (idx + 1)..m {
            if w.values[n].valuation(p) <= w.values[n - 1].valuation(p) {
                return Err(WitnessViolation::ValuationStalled { p, n: n + 1 });
            }
        }
    }
    Ok(())
}
