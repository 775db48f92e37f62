//! Exact and binary64 score distributions on the `Y` lattice, the threshold
//! `t_n`, and the expected number of tied pairs above it.
//!
//! A single player's score over `m` games is the `m`-fold convolution power
//! of the payoff law. Powers are taken by binary exponentiation with direct
//! quadratic convolution. Exact mode works on integer numerators over a
//! common denominator, so every mass is an exact rational. Float mode sums
//! each output cell in a fixed order and is bit-reproducible.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};
use crate::model::PayoffModel;
use crate::rational::{format_rational, ratio_from_biguint, to_f64};

/// Largest support length `score_pmf` builds unless told otherwise.
pub const DEFAULT_SUPPORT_CAP: u64 = 10_000_000;

pub const DEFAULT_EPSILON: f64 = 1.0;

/// Cumulative renormalization drift above which a float PMF is flagged.
pub const DRIFT_WARNING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

/// A probability or expectation produced in either mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Exact(BigRational),
    Float(f64),
}

impl Quantity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(r) => to_f64(r),
            Quantity::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Quantity::Exact(r) => Some(r),
            Quantity::Float(_) => None,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(r) => f.write_str(&format_rational(r)),
            Quantity::Float(x) => write!(f, "{x:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Masses {
    Exact {
        numerators: Vec<BigUint>,
        denominator: BigUint,
    },
    Float(Vec<f64>),
}

/// Distribution of one player's score over `n_games` games, indexed by the
/// lattice value `y` in `0..=k * n_games`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePmf {
    k: u32,
    n_games: usize,
    masses: Masses,
    drift: f64,
}

impl LatticePmf {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_games(&self) -> usize {
        self.n_games
    }

    pub fn mode(&self) -> Mode {
        match self.masses {
            Masses::Exact { .. } => Mode::Exact,
            Masses::Float(_) => Mode::Float,
        }
    }

    /// Support length `k * n_games + 1`.
    pub fn len(&self) -> usize {
        match &self.masses {
            Masses::Exact { numerators, .. } => numerators.len(),
            Masses::Float(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest lattice value in the support.
    pub fn max_y(&self) -> usize {
        self.len() - 1
    }

    /// Sum of `|total - 1|` over every renormalization. Always 0 in exact mode.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn quality_warning(&self) -> bool {
        self.drift > DRIFT_WARNING
    }

    /// Exact numerators and their common denominator, in exact mode.
    pub fn exact_parts(&self) -> Option<(&[BigUint], &BigUint)> {
        match &self.masses {
            Masses::Exact {
                numerators,
                denominator,
            } => Some((numerators, denominator)),
            Masses::Float(_) => None,
        }
    }

    /// Mass at `y`; zero outside the support.
    pub fn mass(&self, y: i64) -> Quantity {
        match &self.masses {
            Masses::Exact {
                numerators,
                denominator,
            } => {
                let num = usize::try_from(y)
                    .ok()
                    .and_then(|i| numerators.get(i))
                    .cloned()
                    .unwrap_or_default();
                Quantity::Exact(ratio_from_biguint(&num, denominator))
            }
            Masses::Float(m) => Quantity::Float(self.mass_f64_of(m, y)),
        }
    }

    fn mass_f64_of(&self, m: &[f64], y: i64) -> f64 {
        usize::try_from(y)
            .ok()
            .and_then(|i| m.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn mass_f64(&self, y: i64) -> f64 {
        match &self.masses {
            Masses::Float(m) => self.mass_f64_of(m, y),
            Masses::Exact { .. } => self.mass(y).to_f64(),
        }
    }

    /// Masses as binary64, converted exactly-then-rounded in exact mode.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.masses {
            Masses::Float(m) => m.clone(),
            Masses::Exact {
                numerators,
                denominator,
            } => numerators
                .iter()
                .map(|n| to_f64(&ratio_from_biguint(n, denominator)))
                .collect(),
        }
    }

    /// Exact masses as reduced rationals, in exact mode.
    pub fn to_rationals(&self) -> Option<Vec<BigRational>> {
        let (nums, den) = self.exact_parts()?;
        Some(nums.iter().map(|n| ratio_from_biguint(n, den)).collect())
    }

    /// `P(Y > y_threshold)` with strict inequality.
    pub fn tail_prob(&self, y_threshold: f64) -> Quantity {
        let start = first_above(y_threshold);
        match &self.masses {
            Masses::Exact {
                numerators,
                denominator,
            } => {
                let num: BigUint = numerators.iter().skip(start).sum();
                Quantity::Exact(ratio_from_biguint(&num, denominator))
            }
            Masses::Float(m) => Quantity::Float(m.iter().skip(start).sum()),
        }
    }

    /// `P(Y <= y)` for an integer lattice point; 0 below the support.
    pub fn cdf(&self, y: i64) -> Quantity {
        if y < 0 {
            return match self.mode() {
                Mode::Exact => Quantity::Exact(BigRational::zero()),
                Mode::Float => Quantity::Float(0.0),
            };
        }
        let take = (y as usize).saturating_add(1);
        match &self.masses {
            Masses::Exact {
                numerators,
                denominator,
            } => {
                let num: BigUint = numerators.iter().take(take).sum();
                Quantity::Exact(ratio_from_biguint(&num, denominator))
            }
            Masses::Float(m) => Quantity::Float(m.iter().take(take).sum()),
        }
    }

    /// Mirror symmetry `mass[y] == mass[max - y]`, exactly or within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        match &self.masses {
            Masses::Exact { numerators, .. } => numerators.iter().eq(numerators.iter().rev()),
            Masses::Float(m) => m
                .iter()
                .zip(m.iter().rev())
                .all(|(a, b)| (a - b).abs() <= tol),
        }
    }
}

/// First integer lattice value strictly above `threshold`.
pub(crate) fn first_above(threshold: f64) -> usize {
    if threshold.is_nan() {
        return usize::MAX;
    }
    if threshold < 0.0 {
        0
    } else {
        let f = libm::floor(threshold);
        if f >= usize::MAX as f64 {
            usize::MAX
        } else {
            f as usize + 1
        }
    }
}

fn convolve_exact(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Each output cell is summed in ascending order of the left index.
fn convolve_f64(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let mut out = vec![0.0; len];
    for (s, cell) in out.iter_mut().enumerate() {
        let lo = s.saturating_sub(b.len() - 1);
        let hi = s.min(a.len() - 1);
        let mut acc = 0.0;
        for i in lo..=hi {
            acc += a[i] * b[s - i];
        }
        *cell = acc;
    }
    out
}

fn renormalize(m: &mut [f64]) -> f64 {
    let total: f64 = m.iter().sum();
    for x in m.iter_mut() {
        *x /= total;
    }
    (total - 1.0).abs()
}

/// Distribution of the sum of `n_games` independent payoffs, with the
/// default support cap.
pub fn score_pmf(model: &PayoffModel, n_games: usize, mode: Mode) -> Result<LatticePmf> {
    score_pmf_capped(model, n_games, mode, DEFAULT_SUPPORT_CAP)
}

pub fn score_pmf_capped(
    model: &PayoffModel,
    n_games: usize,
    mode: Mode,
    support_cap: u64,
) -> Result<LatticePmf> {
    let k = model.k();
    let len = (k as u64)
        .checked_mul(n_games as u64)
        .and_then(|l| l.checked_add(1))
        .unwrap_or(u64::MAX);
    if len > support_cap {
        return Err(Error::Resource {
            len,
            cap: support_cap,
        });
    }
    let (masses, drift) = match mode {
        Mode::Exact => {
            let numerators = power_exact(model.weights(), n_games);
            let denominator = Pow::pow(model.denominator(), n_games as u64);
            (
                Masses::Exact {
                    numerators,
                    denominator,
                },
                0.0,
            )
        }
        Mode::Float => {
            let (m, drift) = power_f64(model.probs_f64(), n_games);
            (Masses::Float(m), drift)
        }
    };
    Ok(LatticePmf {
        k,
        n_games,
        masses,
        drift,
    })
}

fn power_exact(base: &[BigUint], mut e: usize) -> Vec<BigUint> {
    let mut result = vec![BigUint::one()];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = convolve_exact(&result, &b);
        }
        e >>= 1;
        if e > 0 {
            b = convolve_exact(&b, &b);
        }
    }
    result
}

fn power_f64(base: &[f64], mut e: usize) -> (Vec<f64>, f64) {
    let mut drift = 0.0;
    let mut result = vec![1.0];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = convolve_f64(&result, &b);
            drift += renormalize(&mut result);
        }
        e >>= 1;
        if e > 0 {
            b = convolve_f64(&b, &b);
            drift += renormalize(&mut b);
        }
    }
    (result, drift)
}

/// The calibrated threshold `t_n` in score units and on the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub n: usize,
    pub k: u32,
    pub epsilon: f64,
    pub x_n: f64,
    /// Score units.
    pub t_n: f64,
    /// `k * t_n`, the same threshold on the `Y` lattice.
    pub t_n_lattice: f64,
}

/// `t_n = (n-1) mu + x_n sqrt(n-1) sigma` with
/// `x_n^2 = 2 log(n-1) - (1+eps) log log(n-1)`.
pub fn threshold(model: &PayoffModel, n: usize, epsilon: f64) -> Result<Threshold> {
    if n < 3 {
        return Err(Error::domain(format!(
            "threshold needs n >= 3, got n = {n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let m = (n - 1) as f64;
    let log_m = libm::log(m);
    let radicand = 2.0 * log_m - (1.0 + epsilon) * libm::log(log_m);
    if radicand < 0.0 {
        return Err(Error::domain(format!(
            "x_n^2 = {radicand} < 0 at n = {n}, epsilon = {epsilon}"
        )));
    }
    let x_n = libm::sqrt(radicand);
    let moments = model.moments();
    let t_n = m * moments.mu_f64() + x_n * libm::sqrt(m) * moments.sigma;
    Ok(Threshold {
        n,
        k: model.k(),
        epsilon,
        x_n,
        t_n,
        t_n_lattice: f64::from(model.k()) * t_n,
    })
}

fn pairs(n: usize) -> u64 {
    (n as u64) * (n as u64 - 1) / 2
}

/// Exact `E[W_n(t)]` for a lattice threshold `y_threshold = k * t`.
///
/// Conditions on the game between the two players of a pair: player `u`
/// receives `a`, player `v` receives `k - a`, and their remaining scores are
/// independent sums over `n - 2` games each.
pub fn expected_wn_exact(
    model: &PayoffModel,
    n: usize,
    y_threshold: f64,
    mode: Mode,
) -> Result<Quantity> {
    if n < 2 {
        return Err(Error::domain(format!("E[W_n] needs n >= 2, got n = {n}")));
    }
    let k = model.k() as usize;
    let rest = score_pmf(model, n - 2, mode)?;
    let top = k * (n - 1);
    let start = first_above(y_threshold);
    let pairs = pairs(n);
    match (&rest.masses, mode) {
        (
            Masses::Exact {
                numerators,
                denominator,
            },
            _,
        ) => {
            let at = |i: i64| -> Option<&BigUint> {
                usize::try_from(i).ok().and_then(|i| numerators.get(i))
            };
            let mut total = BigUint::zero();
            for (a, w) in model.weights().iter().enumerate() {
                let mut inner = BigUint::zero();
                for y in start..=top {
                    let y = y as i64;
                    if let (Some(p), Some(q)) = (at(y - a as i64), at(y - (k - a) as i64)) {
                        inner += p * q;
                    }
                }
                total += w * inner;
            }
            let den = model.denominator() * denominator * denominator;
            let value =
                ratio_from_biguint(&total, &den) * BigRational::from_integer(BigInt::from(pairs));
            Ok(Quantity::Exact(value))
        }
        (Masses::Float(m), _) => {
            let at = |i: i64| -> f64 {
                usize::try_from(i)
                    .ok()
                    .and_then(|i| m.get(i))
                    .copied()
                    .unwrap_or(0.0)
            };
            let mut total = 0.0;
            for (a, p) in model.probs_f64().iter().enumerate() {
                let mut inner = 0.0;
                for y in start..=top {
                    let y = y as i64;
                    inner += at(y - a as i64) * at(y - (k - a) as i64);
                }
                total += p * inner;
            }
            Ok(Quantity::Float(pairs as f64 * total))
        }
    }
}

/// `E[W_n(t_n)]` at the calibrated threshold.
pub fn expected_wn_at(model: &PayoffModel, threshold: &Threshold, mode: Mode) -> Result<Quantity> {
    expected_wn_exact(model, threshold.n, threshold.t_n_lattice, mode)
}

/// The upper bound `RHS_n = C(n,2) * sum_{h > t_{n-1} - 1} P(S = h)^2`,
/// where `S` is a player's score over the `n - 2` games that do not involve
/// the other member of the pair.
pub fn expected_wn_upper(
    model: &PayoffModel,
    n: usize,
    epsilon: f64,
    mode: Mode,
) -> Result<Quantity> {
    if n < 4 {
        return Err(Error::domain(format!("RHS_n needs n >= 4, got n = {n}")));
    }
    let prev = threshold(model, n - 1, epsilon)?;
    let window = prev.t_n_lattice - f64::from(model.k());
    let rest = score_pmf(model, n - 2, mode)?;
    let start = first_above(window);
    let pairs = pairs(n);
    match &rest.masses {
        Masses::Exact {
            numerators,
            denominator,
        } => {
            let sum: BigUint = numerators.iter().skip(start).map(|p| p * p).sum();
            let value = ratio_from_biguint(&sum, &(denominator * denominator))
                * BigRational::from_integer(BigInt::from(pairs));
            Ok(Quantity::Exact(value))
        }
        Masses::Float(m) => {
            let sum: f64 = m.iter().skip(start).map(|p| p * p).sum();
            Ok(Quantity::Float(pairs as f64 * sum))
        }
    }
}

/// Ingredients and value of the bound `P(s*_n > t_n) >= 1 - (1 - p)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Bound {
    pub threshold: Threshold,
    /// `p = P(s_1(n) > t_n)`.
    pub tail: Quantity,
    pub bound: Quantity,
    /// `1 - exp(-n p)`, the weaker closed-form bound.
    pub exp_bound: f64,
}

pub fn prop1_lower_bound(
    model: &PayoffModel,
    n: usize,
    epsilon: f64,
    mode: Mode,
) -> Result<Prop1Bound> {
    let threshold = threshold(model, n, epsilon)?;
    let pmf = score_pmf(model, n - 1, mode)?;
    let tail = pmf.tail_prob(threshold.t_n_lattice);
    let bound = lower_bound_from_tail(&tail, n);
    let exp_bound = -libm::expm1(-(n as f64) * tail.to_f64());
    Ok(Prop1Bound {
        threshold,
        tail,
        bound,
        exp_bound,
    })
}

/// `1 - (1 - p)^n` in the mode of `p`.
pub fn lower_bound_from_tail(p: &Quantity, n: usize) -> Quantity {
    match p {
        Quantity::Exact(p) => {
            let q = BigRational::one() - p;
            Quantity::Exact(BigRational::one() - Pow::pow(&q, n as u64))
        }
        Quantity::Float(p) => Quantity::Float(-libm::expm1(n as f64 * libm::log1p(-p))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{game_count, TournamentOutcome};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn rationals(p: &LatticePmf) -> Vec<BigRational> {
        p.to_rationals().unwrap()
    }

    #[test]
    fn classic_two_games() {
        let p = score_pmf(&PayoffModel::classic(), 2, Mode::Exact).unwrap();
        assert_eq!(rationals(&p), [q(1, 4), q(1, 2), q(1, 4)]);
    }

    #[test]
    fn chess_two_games() {
        let m = PayoffModel::chess(q(1, 2)).unwrap();
        let p = score_pmf(&m, 2, Mode::Exact).unwrap();
        assert_eq!(
            rationals(&p),
            [q(1, 16), q(1, 4), q(3, 8), q(1, 4), q(1, 16)]
        );
    }

    #[test]
    fn empty_sum_is_point_mass() {
        for m in [PayoffModel::classic(), PayoffModel::uniform(3).unwrap()] {
            let p = score_pmf(&m, 0, Mode::Exact).unwrap();
            assert_eq!(rationals(&p), [q(1, 1)]);
            let f = score_pmf(&m, 0, Mode::Float).unwrap();
            assert_eq!(f.to_f64_vec(), [1.0]);
        }
    }

    #[test]
    fn support_cap_is_enforced() {
        let err = score_pmf_capped(&PayoffModel::classic(), 100, Mode::Float, 50).unwrap_err();
        assert_eq!(err, Error::Resource { len: 101, cap: 50 });
    }

    #[test]
    fn tail_prob_is_strict() {
        let p = score_pmf(&PayoffModel::classic(), 2, Mode::Exact).unwrap();
        assert_eq!(p.tail_prob(1.0), Quantity::Exact(q(1, 4)));
        assert_eq!(p.tail_prob(-1.0), Quantity::Exact(q(1, 1)));
        assert_eq!(p.tail_prob(2.0), Quantity::Exact(q(0, 1)));
        assert_eq!(p.tail_prob(1.5), Quantity::Exact(q(1, 4)));
        assert_eq!(p.tail_prob(0.999), Quantity::Exact(q(3, 4)));
    }

    #[test]
    fn threshold_values() {
        let m = PayoffModel::classic();
        let t = threshold(&m, 101, 1.0).unwrap();
        assert!((t.x_n - 2.481125).abs() < 1e-6, "{}", t.x_n);
        assert!((t.t_n - 62.40562).abs() < 1e-5, "{}", t.t_n);
        let t3 = threshold(&m, 3, 1.0).unwrap();
        assert!((t3.t_n - 2.0294).abs() < 1e-4, "{}", t3.t_n);
        let p = score_pmf(&m, 2, Mode::Exact).unwrap();
        assert_eq!(p.tail_prob(t3.t_n_lattice), Quantity::Exact(q(0, 1)));
        assert!(matches!(threshold(&m, 2, 1.0), Err(Error::Domain(_))));
        assert!(matches!(threshold(&m, 21, 100.0), Err(Error::Domain(_))));
        assert!(matches!(threshold(&m, 10, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn threshold_scales_with_k() {
        let m = PayoffModel::chess(q(1, 2)).unwrap();
        let t = threshold(&m, 50, 1.0).unwrap();
        assert_eq!(t.t_n_lattice, 2.0 * t.t_n);
    }

    /// Brute force over every outcome of an `n`-player tournament.
    fn brute_force_ew(model: &PayoffModel, n: usize, y_threshold: f64) -> BigRational {
        let g = game_count(n);
        let base = model.k() as usize + 1;
        let total = base.pow(g as u32);
        let mut acc = BigRational::zero();
        for idx in 0..total {
            let mut games = vec![0u32; g];
            let mut rem = idx;
            for slot in games.iter_mut().rev() {
                *slot = (rem % base) as u32;
                rem /= base;
            }
            let prob: BigRational = games
                .iter()
                .map(|&a| model.probs()[a as usize].clone())
                .product();
            let o = TournamentOutcome::new(n, model.k(), games).unwrap();
            let w = o.score_vector().tied_pairs_above(y_threshold);
            acc += prob * BigRational::from_integer(w.into());
        }
        acc
    }

    #[test]
    fn expected_wn_small_cases() {
        let m = PayoffModel::classic();
        assert_eq!(
            expected_wn_exact(&m, 3, 0.5, Mode::Exact).unwrap(),
            Quantity::Exact(q(3, 4))
        );
        assert_eq!(
            expected_wn_exact(&m, 3, 1.5, Mode::Exact).unwrap(),
            Quantity::Exact(q(0, 1))
        );
        assert_eq!(
            expected_wn_exact(&m, 5, 4.0, Mode::Exact).unwrap(),
            Quantity::Exact(q(0, 1))
        );
        assert!(expected_wn_exact(&m, 1, 0.0, Mode::Exact).is_err());
    }

    #[test]
    fn expected_wn_matches_brute_force() {
        let models = [
            PayoffModel::classic(),
            PayoffModel::chess(q(1, 4)).unwrap(),
            PayoffModel::uniform(3).unwrap(),
        ];
        for m in &models {
            for n in 2..=4 {
                for t in [-1.0, 0.5, 1.0, 2.5, 3.0] {
                    let y = f64::from(m.k()) * t;
                    let exact = expected_wn_exact(m, n, y, Mode::Exact).unwrap();
                    assert_eq!(
                        exact.as_exact().unwrap(),
                        &brute_force_ew(m, n, y),
                        "{m} n={n} t={t}"
                    );
                    let float = expected_wn_exact(m, n, y, Mode::Float).unwrap().to_f64();
                    assert!((float - exact.to_f64()).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn upper_bound_dominates_at_ten_players() {
        for m in [PayoffModel::classic(), PayoffModel::chess(q(1, 2)).unwrap()] {
            let t = threshold(&m, 10, 1.0).unwrap();
            let exact = expected_wn_at(&m, &t, Mode::Exact).unwrap();
            let upper = expected_wn_upper(&m, 10, 1.0, Mode::Exact).unwrap();
            assert!(exact.as_exact().unwrap() <= upper.as_exact().unwrap());
            assert!(upper.to_f64() > 0.0);
        }
    }

    #[test]
    fn upper_bound_window_can_be_empty() {
        // x_3 = 3.01 at eps = 20 puts t_3 - 1 above the two-game maximum.
        let m = PayoffModel::classic();
        let t = threshold(&m, 3, 20.0).unwrap();
        assert!(t.t_n - 1.0 >= 2.0);
        assert_eq!(
            expected_wn_upper(&m, 4, 20.0, Mode::Exact).unwrap(),
            Quantity::Exact(q(0, 1))
        );
        assert!(matches!(
            expected_wn_upper(&m, 3, 1.0, Mode::Exact),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn prop1_bound_edges() {
        let m = PayoffModel::classic();
        let b = prop1_lower_bound(&m, 3, 1.0, Mode::Exact).unwrap();
        assert_eq!(b.bound, Quantity::Exact(q(0, 1)));
        assert_eq!(
            lower_bound_from_tail(&Quantity::Exact(q(1, 1)), 7),
            Quantity::Exact(q(1, 1))
        );
        assert_eq!(
            lower_bound_from_tail(&Quantity::Float(1.0), 7),
            Quantity::Float(1.0)
        );
        let b = prop1_lower_bound(&m, 101, 1.0, Mode::Exact).unwrap();
        let v = b.bound.to_f64();
        assert!(v > 0.0 && v < 1.0);
        let f = prop1_lower_bound(&m, 101, 1.0, Mode::Float).unwrap();
        assert!((f.bound.to_f64() - v).abs() < 1e-12);
        assert!(b.exp_bound <= v);
    }

    #[test]
    fn float_mode_tracks_exact_mode() {
        for k in 1..=4 {
            let m = PayoffModel::uniform(k).unwrap();
            for n_games in [1usize, 7, 64, 255, 512] {
                let e = score_pmf(&m, n_games, Mode::Exact).unwrap();
                let f = score_pmf(&m, n_games, Mode::Float).unwrap();
                assert!(!f.quality_warning());
                for (x, y) in e.to_f64_vec().iter().zip(f.to_f64_vec()) {
                    if *x > 1e-290 {
                        assert!(((x - y) / x).abs() <= 1e-10, "k={k} m={n_games} {x} {y}");
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pmfs_are_normalized_and_symmetric(k in 1u32..5, n_games in 0usize..40, p in 1u32..9) {
            let m = if k == 2 {
                PayoffModel::chess(q(p as i64, 10)).unwrap()
            } else {
                PayoffModel::uniform(k).unwrap()
            };
            let e = score_pmf(&m, n_games, Mode::Exact).unwrap();
            prop_assert_eq!(e.len(), k as usize * n_games + 1);
            prop_assert!(e.is_symmetric(0.0));
            let total: BigRational = rationals(&e).into_iter().sum();
            prop_assert!(total.is_one());
            let f = score_pmf(&m, n_games, Mode::Float).unwrap();
            prop_assert!(f.is_symmetric(1e-12));
            prop_assert!((f.to_f64_vec().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn tail_is_monotone(n_games in 1usize..30, a in -3.0f64..40.0, b in -3.0f64..40.0) {
            let m = PayoffModel::uniform(2).unwrap();
            let e = score_pmf(&m, n_games, Mode::Exact).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let tl = e.tail_prob(lo);
            let th = e.tail_prob(hi);
            prop_assert!(tl.as_exact().unwrap() >= th.as_exact().unwrap());
        }
    }
}
