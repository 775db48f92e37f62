//! Full enumeration of tournament outcomes for small `n`.
//!
//! Outcomes are visited in mixed-radix lexicographic order over the
//! canonical game list: game 0 is the most significant digit. Each outcome
//! carries an integer weight over the common denominator `D^G`, where `D` is
//! the model's probability denominator and `G` the number of games. Results
//! are accumulated in integers and reduced to rationals at the end.
//!
//! Accumulators merge associatively, so disjoint index blocks can be folded
//! independently and combined in any grouping.

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};
use crate::exact_dist::{first_above, score_pmf, Mode};
use crate::model::{game_count, has_unique_max, tied_pairs_above, PayoffModel};
use crate::rational::ratio_from_biguint;

pub const DEFAULT_OUTCOME_CAP: u64 = 100_000_000;

/// `(k+1)^G` if it fits in a `u64`.
pub fn outcome_count(k: u32, n: usize) -> Option<u64> {
    let g = u32::try_from(game_count(n)).ok()?;
    (u64::from(k) + 1).checked_pow(g)
}

/// One outcome during a walk. Borrowed from the enumerator; do not keep it.
pub struct OutcomeView<'a> {
    pub index: u64,
    pub games: &'a [u32],
    pub y_scores: &'a [u32],
    atom_counts: &'a [u32],
    plan: &'a Enumeration<'a>,
}

impl OutcomeView<'_> {
    /// Integer weight; the probability is `weight / Enumeration::denominator()`.
    pub fn weight(&self) -> Cow<'_, BigUint> {
        if let Some(w) = &self.plan.constant_weight {
            return Cow::Borrowed(w);
        }
        let mut w = BigUint::one();
        for (a, &c) in self.atom_counts.iter().enumerate() {
            if c > 0 {
                w *= &self.plan.weight_powers[a][c as usize];
            }
        }
        Cow::Owned(w)
    }

    pub fn probability(&self) -> BigRational {
        ratio_from_biguint(&self.weight(), &self.plan.denominator)
    }
}

/// A feasibility-checked enumeration plan for one `(model, n)`.
pub struct Enumeration<'m> {
    model: &'m PayoffModel,
    n: usize,
    pairs: Vec<(usize, usize)>,
    total: u64,
    denominator: BigUint,
    weight_powers: Vec<Vec<BigUint>>,
    constant_weight: Option<BigUint>,
}

impl<'m> Enumeration<'m> {
    pub fn new(model: &'m PayoffModel, n: usize, cap: u64) -> Result<Self> {
        let g = game_count(n);
        let base = u64::from(model.k()) + 1;
        let total = match outcome_count(model.k(), n) {
            Some(t) if t <= cap => t,
            _ => {
                return Err(Error::Infeasible {
                    base,
                    exponent: g as u64,
                    cap,
                })
            }
        };
        let mut pairs = Vec::with_capacity(g);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        let weights = model.weights();
        let constant_weight = weights
            .iter()
            .all(|w| w == &weights[0])
            .then(|| Pow::pow(&weights[0], g as u64));
        let weight_powers = if constant_weight.is_some() {
            Vec::new()
        } else {
            weights
                .iter()
                .map(|w| {
                    let mut row = Vec::with_capacity(g + 1);
                    let mut acc = BigUint::one();
                    for _ in 0..=g {
                        row.push(acc.clone());
                        acc *= w;
                    }
                    row
                })
                .collect()
        };
        Ok(Enumeration {
            model,
            n,
            pairs,
            total,
            denominator: Pow::pow(model.denominator(), g as u64),
            weight_powers,
            constant_weight,
        })
    }

    pub fn model(&self) -> &PayoffModel {
        self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outcome_count(&self) -> u64 {
        self.total
    }

    /// Common denominator of every outcome weight.
    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    /// Visits the outcomes with indices in `range` (clamped to the total).
    pub fn visit_range<F: FnMut(&OutcomeView<'_>)>(&self, range: Range<u64>, mut visitor: F) {
        let end = range.end.min(self.total);
        if range.start >= end {
            return;
        }
        let k = self.model.k();
        let g = self.pairs.len();
        let mut games = vec![0u32; g];
        let mut rem = range.start;
        for slot in games.iter_mut().rev() {
            *slot = (rem % (u64::from(k) + 1)) as u32;
            rem /= u64::from(k) + 1;
        }
        let mut y_scores = vec![0u32; self.n];
        let mut atom_counts = vec![0u32; k as usize + 1];
        for (&(i, j), &a) in self.pairs.iter().zip(&games) {
            y_scores[i] += a;
            y_scores[j] += k - a;
            atom_counts[a as usize] += 1;
        }
        let mut index = range.start;
        loop {
            visitor(&OutcomeView {
                index,
                games: &games,
                y_scores: &y_scores,
                atom_counts: &atom_counts,
                plan: self,
            });
            index += 1;
            if index >= end {
                break;
            }
            // Odometer step: the last game is the least significant digit.
            for pos in (0..g).rev() {
                let (i, j) = self.pairs[pos];
                let a = games[pos];
                atom_counts[a as usize] -= 1;
                if a < k {
                    games[pos] = a + 1;
                    y_scores[i] += 1;
                    y_scores[j] -= 1;
                    atom_counts[a as usize + 1] += 1;
                    break;
                }
                games[pos] = 0;
                y_scores[i] -= k;
                y_scores[j] += k;
                atom_counts[0] += 1;
            }
        }
    }

    pub fn visit_all<F: FnMut(&OutcomeView<'_>)>(&self, visitor: F) {
        self.visit_range(0..self.total, visitor);
    }

    /// Folds the outcomes in `range` into `acc`.
    pub fn fold_range<A: Accumulator>(&self, range: Range<u64>, mut acc: A) -> A {
        self.visit_range(range, |o| acc.visit(o));
        acc
    }

    pub fn fold_all<A: Accumulator>(&self, acc: A) -> A {
        self.fold_range(0..self.total, acc)
    }
}

/// Streams every outcome with its exact probability to `visitor`.
pub fn enumerate_outcomes<F>(model: &PayoffModel, n: usize, cap: u64, mut visitor: F) -> Result<()>
where
    F: FnMut(&[u32], &[u32], BigRational),
{
    let plan = Enumeration::new(model, n, cap)?;
    plan.visit_all(|o| visitor(o.games, o.y_scores, o.probability()));
    Ok(())
}

/// A per-block accumulator with an associative merge.
pub trait Accumulator: Sized {
    fn visit(&mut self, outcome: &OutcomeView<'_>);
    fn merge(&mut self, other: Self);
}

fn add_at(v: &mut Vec<BigUint>, i: usize, w: &BigUint) {
    if v.len() <= i {
        v.resize(i + 1, BigUint::zero());
    }
    v[i] += w;
}

fn merge_vec(a: &mut Vec<BigUint>, b: Vec<BigUint>) {
    if a.len() < b.len() {
        a.resize(b.len(), BigUint::zero());
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UniqueMaxAcc {
    pub unique_weight: BigUint,
    pub unique_count: u64,
}

impl Accumulator for UniqueMaxAcc {
    fn visit(&mut self, o: &OutcomeView<'_>) {
        if has_unique_max(o.y_scores) {
            self.unique_weight += o.weight().as_ref();
            self.unique_count += 1;
        }
    }

    fn merge(&mut self, other: Self) {
        self.unique_weight += other.unique_weight;
        self.unique_count += other.unique_count;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniqueMaxReport {
    pub n: usize,
    pub r_n: BigRational,
    pub p_tie_at_max: BigRational,
}

impl UniqueMaxAcc {
    pub fn finish(self, plan: &Enumeration<'_>) -> UniqueMaxReport {
        let r_n = if plan.n <= 1 {
            BigRational::one()
        } else {
            ratio_from_biguint(&self.unique_weight, &plan.denominator)
        };
        UniqueMaxReport {
            n: plan.n,
            p_tie_at_max: BigRational::one() - &r_n,
            r_n,
        }
    }
}

/// `r_n`: the probability that exactly one player attains the top score.
/// `r_1 = 1` by convention.
pub fn exact_unique_max(model: &PayoffModel, n: usize, cap: u64) -> Result<UniqueMaxReport> {
    if n == 0 {
        return Err(Error::domain("r_n needs at least one player"));
    }
    let plan = Enumeration::new(model, n, cap)?;
    Ok(plan.fold_all(UniqueMaxAcc::default()).finish(&plan))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CensusAcc {
    entries: BTreeMap<Vec<u32>, (BigUint, u64)>,
}

impl Accumulator for CensusAcc {
    fn visit(&mut self, o: &OutcomeView<'_>) {
        let mut key = o.y_scores.to_vec();
        key.sort_unstable();
        let slot = self
            .entries
            .entry(key)
            .or_insert_with(|| (BigUint::zero(), 0));
        slot.0 += o.weight().as_ref();
        slot.1 += 1;
    }

    fn merge(&mut self, other: Self) {
        for (key, (w, c)) in other.entries {
            let slot = self
                .entries
                .entry(key)
                .or_insert_with(|| (BigUint::zero(), 0));
            slot.0 += w;
            slot.1 += c;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusEntry {
    pub probability: BigRational,
    /// Number of labeled outcomes with this sorted score sequence.
    pub count: BigUint,
}

/// Distribution of the nondecreasing score sequence (lattice units).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusTable {
    pub n: usize,
    pub k: u32,
    pub entries: BTreeMap<Vec<u32>, CensusEntry>,
}

impl CensusAcc {
    pub fn finish(self, plan: &Enumeration<'_>) -> CensusTable {
        let entries = self
            .entries
            .into_iter()
            .map(|(key, (w, c))| {
                let entry = CensusEntry {
                    probability: ratio_from_biguint(&w, &plan.denominator),
                    count: BigUint::from(c),
                };
                (key, entry)
            })
            .collect();
        CensusTable {
            n: plan.n,
            k: plan.model.k(),
            entries,
        }
    }
}

impl CensusTable {
    pub fn total_probability(&self) -> BigRational {
        self.entries.values().map(|e| &e.probability).sum()
    }

    pub fn total_count(&self) -> BigUint {
        self.entries.values().map(|e| &e.count).sum()
    }

    /// `r_n` read off the census: sorted keys have a unique maximum iff the
    /// last two entries differ.
    pub fn unique_max_probability(&self) -> BigRational {
        if self.n <= 1 {
            return BigRational::one();
        }
        self.entries
            .iter()
            .filter(|(key, _)| has_unique_max(key))
            .map(|(_, e)| &e.probability)
            .sum()
    }
}

pub fn score_census(model: &PayoffModel, n: usize, cap: u64) -> Result<CensusTable> {
    let plan = Enumeration::new(model, n, cap)?;
    Ok(plan.fold_all(CensusAcc::default()).finish(&plan))
}

/// Weight of outcomes by their maximum lattice score.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaxScoreAcc {
    by_max: Vec<BigUint>,
}

impl Accumulator for MaxScoreAcc {
    fn visit(&mut self, o: &OutcomeView<'_>) {
        let m = o.y_scores.iter().copied().max().unwrap_or(0) as usize;
        add_at(&mut self.by_max, m, o.weight().as_ref());
    }

    fn merge(&mut self, other: Self) {
        merge_vec(&mut self.by_max, other.by_max);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdRow {
    pub x: i64,
    /// `P(s_1 <= x, ..., s_n <= x)` by enumeration.
    pub lhs: BigRational,
    /// `P(s_1 <= x)^n` from the marginal.
    pub rhs: BigRational,
}

impl NdRow {
    pub fn diff(&self) -> BigRational {
        &self.lhs - &self.rhs
    }
}

/// The joint-CDF versus product-of-marginals comparison at every lattice point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdReport {
    pub n: usize,
    pub k: u32,
    pub rows: Vec<NdRow>,
    pub max_diff: BigRational,
}

impl NdReport {
    pub fn holds(&self) -> bool {
        self.max_diff <= BigRational::zero()
    }

    /// The comparison at any integer `x`, including points off the support.
    pub fn at(&self, x: i64) -> NdRow {
        if x < 0 {
            return NdRow {
                x,
                lhs: BigRational::zero(),
                rhs: BigRational::zero(),
            };
        }
        match self.rows.get(x as usize) {
            Some(row) => row.clone(),
            None => NdRow {
                x,
                lhs: BigRational::one(),
                rhs: BigRational::one(),
            },
        }
    }
}

impl MaxScoreAcc {
    pub fn finish(self, plan: &Enumeration<'_>) -> Result<NdReport> {
        let model = plan.model;
        let n = plan.n;
        let top = model.k() as usize * n.saturating_sub(1);
        let marginal = score_pmf(model, n.saturating_sub(1), Mode::Exact)?;
        let mut rows = Vec::with_capacity(top + 1);
        let mut joint = BigUint::zero();
        let zero = BigUint::zero();
        for x in 0..=top {
            joint += self.by_max.get(x).unwrap_or(&zero);
            let lhs = ratio_from_biguint(&joint, &plan.denominator);
            let cdf = marginal.cdf(x as i64);
            let rhs = Pow::pow(cdf.as_exact().expect("exact marginal"), n as u64);
            rows.push(NdRow {
                x: x as i64,
                lhs,
                rhs,
            });
        }
        let max_diff = rows
            .iter()
            .map(NdRow::diff)
            .max()
            .unwrap_or_else(BigRational::zero);
        Ok(NdReport {
            n,
            k: model.k(),
            rows,
            max_diff,
        })
    }
}

pub fn nd_inequality_check(model: &PayoffModel, n: usize, cap: u64) -> Result<NdReport> {
    if n == 0 {
        return Err(Error::domain(
            "negative-dependence check needs at least one player",
        ));
    }
    let plan = Enumeration::new(model, n, cap)?;
    plan.fold_all(MaxScoreAcc::default()).finish(&plan)
}

/// Weight of outcomes by `W_n(t)`, the number of pairs tied above `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WnAcc {
    y_threshold: f64,
    by_w: BTreeMap<u64, BigUint>,
}

impl WnAcc {
    pub fn new(y_threshold: f64) -> Self {
        WnAcc {
            y_threshold,
            by_w: BTreeMap::new(),
        }
    }

    pub fn finish(self, plan: &Enumeration<'_>) -> WnDistribution {
        let probs = self
            .by_w
            .into_iter()
            .map(|(w, weight)| (w, ratio_from_biguint(&weight, &plan.denominator)))
            .collect();
        WnDistribution {
            n: plan.n,
            y_threshold: self.y_threshold,
            probs,
        }
    }
}

impl Accumulator for WnAcc {
    fn visit(&mut self, o: &OutcomeView<'_>) {
        let w = tied_pairs_above(o.y_scores, self.y_threshold);
        *self.by_w.entry(w).or_insert_with(BigUint::zero) += o.weight().as_ref();
    }

    fn merge(&mut self, other: Self) {
        for (w, weight) in other.by_w {
            *self.by_w.entry(w).or_insert_with(BigUint::zero) += weight;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WnDistribution {
    pub n: usize,
    pub y_threshold: f64,
    /// `w -> P(W_n = w)`, only for values with positive probability.
    pub probs: BTreeMap<u64, BigRational>,
}

impl WnDistribution {
    pub fn mean(&self) -> BigRational {
        self.probs
            .iter()
            .map(|(&w, p)| p * BigRational::from_integer(w.into()))
            .sum()
    }

    pub fn p_zero(&self) -> BigRational {
        self.probs
            .get(&0)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }
}

pub fn wn_distribution_exact(
    model: &PayoffModel,
    n: usize,
    y_threshold: f64,
    cap: u64,
) -> Result<WnDistribution> {
    let plan = Enumeration::new(model, n, cap)?;
    Ok(plan.fold_all(WnAcc::new(y_threshold)).finish(&plan))
}

/// Distribution of one labeled player's score, by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalAcc {
    player: usize,
    by_score: Vec<BigUint>,
}

impl MarginalAcc {
    pub fn new(player: usize) -> Self {
        MarginalAcc {
            player,
            by_score: Vec::new(),
        }
    }

    /// Masses on `0..=k(n-1)`.
    pub fn finish(mut self, plan: &Enumeration<'_>) -> Vec<BigRational> {
        let len = plan.model.k() as usize * plan.n.saturating_sub(1) + 1;
        self.by_score.resize(len, BigUint::zero());
        self.by_score
            .iter()
            .map(|w| ratio_from_biguint(w, &plan.denominator))
            .collect()
    }
}

impl Accumulator for MarginalAcc {
    fn visit(&mut self, o: &OutcomeView<'_>) {
        let y = o.y_scores[self.player] as usize;
        add_at(&mut self.by_score, y, o.weight().as_ref());
    }

    fn merge(&mut self, other: Self) {
        merge_vec(&mut self.by_score, other.by_score);
    }
}

pub fn marginal_pmf(
    model: &PayoffModel,
    n: usize,
    player: usize,
    cap: u64,
) -> Result<Vec<BigRational>> {
    if player >= n {
        return Err(Error::domain("player index out of range"));
    }
    let plan = Enumeration::new(model, n, cap)?;
    Ok(plan.fold_all(MarginalAcc::new(player)).finish(&plan))
}

/// Probability that some score lies strictly above `y_threshold`, by
/// enumeration.
pub fn exact_exceed_probability(
    model: &PayoffModel,
    n: usize,
    y_threshold: f64,
    cap: u64,
) -> Result<BigRational> {
    let plan = Enumeration::new(model, n, cap)?;
    let acc = plan.fold_all(MaxScoreAcc::default());
    let start = first_above(y_threshold);
    let w: BigUint = acc.by_max.iter().skip(start).sum();
    Ok(ratio_from_biguint(&w, &plan.denominator))
}
