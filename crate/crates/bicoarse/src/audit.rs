//! Numerical audit of the coarse-group axioms over a finite sample of a
//! metered magma: associativity, unit and inverse defects, the
//! equi-invariance moduli, plus coarse-abelianity and
//! conjugation-invariance probes.
//!
//! Every reported value is a supremum over the supplied sample, hence a
//! lower bound for the global supremum; each report carries its sample
//! descriptor so claims stay scoped. A nonzero defect refutes an axiom; a
//! zero defect only confirms it up to the audited sample.

use std::fmt;

use thiserror::Error;

use crate::cancel::{cancellation_distance, commutator_power, reduced_length};
use crate::words::{reduced_ball, Alphabet, ReducedWord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("sample is not closed under the operation: {0}")]
    SampleNotClosed(String),
    #[error("metric axiom violated on the sample: {0}")]
    MetricBroken(String),
}

/// Exactly comparable metric values. `triangle_holds(a, b, c)` decides
/// `c ≤ a + b` without leaving exact arithmetic.
pub trait MetricValue: Clone + Ord + fmt::Display + fmt::Debug {
    fn is_zero(&self) -> bool;
    fn triangle_holds(a: &Self, b: &Self, c: &Self) -> bool;
}

impl MetricValue for u64 {
    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn triangle_holds(a: &Self, b: &Self, c: &Self) -> bool {
        *c <= a + b
    }
}

/// A Euclidean distance stored as its square, so lattice metrics stay
/// exact. Ordering by the square is ordering by the distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EuclidSq(pub u64);

impl fmt::Display for EuclidSq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sqrt({})", self.0)
    }
}

impl MetricValue for EuclidSq {
    fn is_zero(&self) -> bool {
        self.0 == 0
    }

    fn triangle_holds(a: &Self, b: &Self, c: &Self) -> bool {
        // √c ≤ √a + √b  ⇔  c ≤ a + b + 2√(ab)  ⇔  (c − a − b)² ≤ 4ab
        // whenever c > a + b.
        let (a, b, c) = (a.0 as u128, b.0 as u128, c.0 as u128);
        if c <= a + b {
            return true;
        }
        let excess = c - a - b;
        excess * excess <= 4 * a * b
    }
}

/// A finite sample of a magma with a unit, an inversion, and a metric.
/// The operation returns `None` outside its domain of definition, which
/// the auditor reports as a closure failure.
pub struct MeteredMagma<'a, T, M> {
    pub label: String,
    pub sample: Vec<T>,
    pub unit: T,
    pub op: Box<dyn Fn(&T, &T) -> Option<T> + 'a>,
    pub inv: Box<dyn Fn(&T) -> T + 'a>,
    pub metric: Box<dyn Fn(&T, &T) -> M + 'a>,
}

impl<T: Clone + PartialEq + fmt::Display, M: MetricValue> MeteredMagma<'_, T, M> {
    fn product(&self, x: &T, y: &T) -> Result<T, AuditError> {
        (self.op)(x, y)
            .ok_or_else(|| AuditError::SampleNotClosed(format!("{x} * {y} undefined")))
    }

    fn zero(&self) -> M {
        (self.metric)(&self.unit, &self.unit)
    }
}

/// A supremum together with the first witness attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extremum<T, M> {
    pub value: M,
    pub witness: T,
}

impl<T, M: MetricValue> Extremum<T, M> {
    fn update(&mut self, value: M, witness: T) {
        if value > self.value {
            self.value = value;
            self.witness = witness;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquiRow<T, M> {
    pub radius: M,
    pub rho: M,
    pub witness: (T, T, T),
}

/// The audited suprema with witnesses. `equi` contains one row per
/// requested radius: `ρ(r) = sup { d(gh, gh′), d(hg, h′g) : d(h, h′) ≤ r }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectReport<T, M> {
    pub sample_label: String,
    pub sample_size: usize,
    pub assoc: Extremum<(T, T, T), M>,
    pub unit: Extremum<T, M>,
    pub inverse: Extremum<T, M>,
    pub abelian: Extremum<(T, T), M>,
    pub equi: Vec<EquiRow<T, M>>,
}

fn check_metric_axioms<T, M>(m: &MeteredMagma<'_, T, M>) -> Result<Vec<Vec<M>>, AuditError>
where
    T: Clone + PartialEq + fmt::Display,
    M: MetricValue,
{
    let n = m.sample.len();
    let mut pairwise = vec![Vec::with_capacity(n); n];
    for i in 0..n {
        for j in 0..n {
            pairwise[i].push((m.metric)(&m.sample[i], &m.sample[j]));
        }
    }
    for i in 0..n {
        if !pairwise[i][i].is_zero() {
            return Err(AuditError::MetricBroken(format!("d(x, x) != 0 at {}", m.sample[i])));
        }
        for j in (i + 1)..n {
            if pairwise[i][j] != pairwise[j][i] {
                return Err(AuditError::MetricBroken(format!(
                    "asymmetry at {} / {}",
                    m.sample[i], m.sample[j]
                )));
            }
            if pairwise[i][j].is_zero() && m.sample[i] != m.sample[j] {
                return Err(AuditError::MetricBroken(format!(
                    "indiscernible pair {} / {}",
                    m.sample[i], m.sample[j]
                )));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if !M::triangle_holds(&pairwise[i][j], &pairwise[j][k], &pairwise[i][k]) {
                    return Err(AuditError::MetricBroken(format!(
                        "triangle fails at {} / {} / {}",
                        m.sample[i], m.sample[j], m.sample[k]
                    )));
                }
            }
        }
    }
    Ok(pairwise)
}

/// Audits the sample: exact suprema for the associativity, unit, inverse
/// and abelianity defects, and the equi-invariance modulus at each
/// requested radius.
pub fn audit<T, M>(m: &MeteredMagma<'_, T, M>, radii: &[M]) -> Result<DefectReport<T, M>, AuditError>
where
    T: Clone + PartialEq + fmt::Display,
    M: MetricValue,
{
    let pairwise = check_metric_axioms(m)?;
    let zero = m.zero();
    let unit3 = (m.unit.clone(), m.unit.clone(), m.unit.clone());
    let mut report = DefectReport {
        sample_label: m.label.clone(),
        sample_size: m.sample.len(),
        assoc: Extremum { value: zero.clone(), witness: unit3.clone() },
        unit: Extremum { value: zero.clone(), witness: m.unit.clone() },
        inverse: Extremum { value: zero.clone(), witness: m.unit.clone() },
        abelian: Extremum { value: zero.clone(), witness: (m.unit.clone(), m.unit.clone()) },
        equi: Vec::new(),
    };

    for g in &m.sample {
        let eg = m.product(&m.unit, g)?;
        let ge = m.product(g, &m.unit)?;
        let unit_defect = (m.metric)(&eg, g).max((m.metric)(&ge, g));
        report.unit.update(unit_defect, g.clone());

        let gi = (m.inv)(g);
        let ggi = m.product(g, &gi)?;
        let gig = m.product(&gi, g)?;
        let inv_defect = (m.metric)(&ggi, &m.unit).max((m.metric)(&gig, &m.unit));
        report.inverse.update(inv_defect, g.clone());
    }

    // Products are shared between the associativity sweep and the
    // equi-invariance rows.
    let n = m.sample.len();
    let mut products = vec![Vec::with_capacity(n); n];
    for (i, g) in m.sample.iter().enumerate() {
        for h in &m.sample {
            products[i].push(m.product(g, h)?);
        }
    }

    for (i, g) in m.sample.iter().enumerate() {
        for (j, h) in m.sample.iter().enumerate() {
            report
                .abelian
                .update((m.metric)(&products[i][j], &products[j][i]), (g.clone(), h.clone()));
            for (k, l) in m.sample.iter().enumerate() {
                let left = m.product(g, &products[j][k])?;
                let right = m.product(&products[i][j], l)?;
                report.assoc.update(
                    (m.metric)(&left, &right),
                    (g.clone(), h.clone(), l.clone()),
                );
            }
        }
    }

    for radius in radii {
        let mut row = EquiRow {
            radius: radius.clone(),
            rho: zero.clone(),
            witness: unit3.clone(),
        };
        for (j, h) in m.sample.iter().enumerate() {
            for (k, h2) in m.sample.iter().enumerate() {
                if pairwise[j][k] > *radius {
                    continue;
                }
                for (i, g) in m.sample.iter().enumerate() {
                    let left = (m.metric)(&products[i][j], &products[i][k]);
                    let right = (m.metric)(&products[j][i], &products[k][i]);
                    let spread = left.max(right);
                    if spread > row.rho {
                        row.rho = spread;
                        row.witness = (g.clone(), h.clone(), h2.clone());
                    }
                }
            }
        }
        report.equi.push(row);
    }
    Ok(report)
}

/// `d_×([aⁿ, bⁿ], ε)` for `n = 1..=n_max`; the unbounded growth certifies
/// non-coarse-abelianity at desk scale.
pub fn abelian_growth(n_max: u64) -> Vec<(u64, u64)> {
    (1..=n_max).map(|n| (n, reduced_length(&commutator_power(n, n)))).collect()
}

/// `sup_{g ∈ G, h ∈ H} min_{h′ ∈ H} d(g h g⁻¹, h′)`: how far conjugates of
/// the subset H stray from H.
pub fn conjugation_defect<T, M>(
    m: &MeteredMagma<'_, T, M>,
    h_sample: &[T],
    g_sample: &[T],
) -> Result<Extremum<(T, T), M>, AuditError>
where
    T: Clone + PartialEq + fmt::Display,
    M: MetricValue,
{
    let mut best = Extremum {
        value: m.zero(),
        witness: (m.unit.clone(), m.unit.clone()),
    };
    for g in g_sample {
        let gi = (m.inv)(g);
        for h in h_sample {
            let conjugate = m.product(&m.product(g, h)?, &gi)?;
            let nearest = h_sample
                .iter()
                .map(|h2| (m.metric)(&conjugate, h2))
                .min()
                .ok_or_else(|| AuditError::SampleNotClosed("empty H sample".into()))?;
            best.update(nearest, (g.clone(), h.clone()));
        }
    }
    Ok(best)
}

/// The rank-2 free group ball of the given word-length radius, metered by
/// the cancellation metric.
pub fn f2_cancel_preset(radius: usize) -> MeteredMagma<'static, ReducedWord, u64> {
    let alphabet = Alphabet::new(2).unwrap();
    MeteredMagma {
        label: format!("F2 word-length ball of radius {radius} with the cancellation metric"),
        sample: reduced_ball(alphabet, radius),
        unit: ReducedWord::empty(),
        op: Box::new(|x, y| Some(x.mul(y))),
        inv: Box::new(|x| x.invert()),
        metric: Box::new(|x, y| cancellation_distance(x, y)),
    }
}

/// ℤ² lattice points in a square, Euclidean metric (squared values).
pub fn z2_euclid_preset(half_side: i64) -> MeteredMagma<'static, Z2Point, EuclidSq> {
    let mut sample = Vec::new();
    for x in -half_side..=half_side {
        for y in -half_side..=half_side {
            sample.push(Z2Point(x, y));
        }
    }
    MeteredMagma {
        label: format!("Z^2 square of half-side {half_side} with the Euclidean metric"),
        sample,
        unit: Z2Point(0, 0),
        op: Box::new(|a, b| Some(Z2Point(a.0 + b.0, a.1 + b.1))),
        inv: Box::new(|a| Z2Point(-a.0, -a.1)),
        metric: Box::new(|a, b| {
            let dx = (a.0 - b.0) as i128;
            let dy = (a.1 - b.1) as i128;
            EuclidSq((dx * dx + dy * dy) as u64)
        }),
    }
}

/// The perturbed magma on ℤ: `op(x, y) = x + y + 1` with unit 0. Its unit
/// defect is exactly 1 by construction.
pub fn perturbed_z_preset(half_side: i64) -> MeteredMagma<'static, i64, u64> {
    MeteredMagma {
        label: format!("Z interval [-{half_side}, {half_side}] with op(x,y) = x + y + 1"),
        sample: (-half_side..=half_side).collect(),
        unit: 0,
        op: Box::new(|x, y| Some(x + y + 1)),
        inv: Box::new(|x| -x),
        metric: Box::new(|x, y| x.abs_diff(*y)),
    }
}

/// A lattice point, displayed as `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Z2Point(pub i64, pub i64);

impl fmt::Display for Z2Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}
