//! Payoff models `M_k`, their moments, and single tournament outcomes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64};

/// Number of games in a round robin among `n` players.
pub fn game_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// The first invariant a candidate payoff law breaks.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("expected {expected} probabilities (k+1), got {got}")]
    Length { expected: usize, got: usize },
    #[error("probs[{index}] is not strictly positive")]
    NonPositive { index: usize },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: String },
    #[error("symmetry: probs[{index}] != probs[{mirror}]")]
    Asymmetric { index: usize, mirror: usize },
}

/// Checks the three payoff-law invariants in order: positivity,
/// normalization, symmetry. Reports the first failure.
pub fn validate(k: u32, probs: &[BigRational]) -> core::result::Result<(), Violation> {
    if k == 0 {
        return Err(Violation::ZeroK);
    }
    let expected = k as usize + 1;
    if probs.len() != expected {
        return Err(Violation::Length {
            expected,
            got: probs.len(),
        });
    }
    if let Some(index) = probs.iter().position(|p| !p.is_positive()) {
        return Err(Violation::NonPositive { index });
    }
    let sum: BigRational = probs.iter().sum();
    if !sum.is_one() {
        return Err(Violation::NotNormalized {
            sum: format_rational(&sum),
        });
    }
    for index in 0..expected / 2 {
        let mirror = expected - 1 - index;
        if probs[index] != probs[mirror] {
            return Err(Violation::Asymmetric { index, mirror });
        }
    }
    Ok(())
}

/// A validated symmetric payoff law on `{0, 1/k, ..., 1}`.
///
/// `probs[a]` is the probability that the lower-indexed player of a game
/// receives `a/k`. Probabilities are exact; a binary64 mirror and an integer
/// weight form (`probs[a] = weights[a] / denominator`) are kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffModel {
    k: u32,
    probs: Vec<BigRational>,
    probs_f64: Vec<f64>,
    weights: Vec<BigUint>,
    denominator: BigUint,
}

impl PayoffModel {
    pub fn new(k: u32, probs: Vec<BigRational>) -> Result<Self> {
        validate(k, &probs)?;
        let denominator = probs
            .iter()
            .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let weights = probs
            .iter()
            .map(|p| {
                let w = p.numer() * (&denominator / p.denom());
                w.to_biguint().expect("positive weight")
            })
            .collect();
        let probs_f64 = probs.iter().map(to_f64).collect();
        Ok(PayoffModel {
            k,
            probs,
            probs_f64,
            weights,
            denominator: denominator.to_biguint().expect("positive denominator"),
        })
    }

    /// Model `M_1`: win or lose with probability one half each.
    pub fn classic() -> Self {
        let half = BigRational::new(1.into(), 2.into());
        PayoffModel::new(1, alloc::vec![half.clone(), half]).expect("classic model is valid")
    }

    /// Model `M_2`: a draw with probability `p_draw`, otherwise a decisive
    /// game won by either side with equal probability.
    pub fn chess(p_draw: BigRational) -> Result<Self> {
        if !(p_draw.is_positive() && p_draw < BigRational::one()) {
            return Err(Error::domain(format!(
                "draw probability must lie strictly between 0 and 1, got {}",
                format_rational(&p_draw)
            )));
        }
        let win = (BigRational::one() - &p_draw) / BigRational::from_integer(2.into());
        PayoffModel::new(2, alloc::vec![win.clone(), p_draw, win])
    }

    /// Every payoff in `{0, 1/k, ..., 1}` equally likely.
    pub fn uniform(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Violation::ZeroK.into());
        }
        let p = BigRational::new(1.into(), BigInt::from(k + 1));
        PayoffModel::new(k, alloc::vec![p; k as usize + 1])
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn probs_f64(&self) -> &[f64] {
        &self.probs_f64
    }

    /// Integer numerators of the probabilities over [`Self::denominator`].
    pub fn weights(&self) -> &[BigUint] {
        &self.weights
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn moments(&self) -> Moments {
        let k = BigRational::from_integer(BigInt::from(self.k));
        let mut mu = BigRational::zero();
        let mut second = BigRational::zero();
        for (a, p) in self.probs.iter().enumerate() {
            let x = BigRational::from_integer(BigInt::from(a)) / &k;
            mu += &x * p;
            second += &x * &x * p;
        }
        let sigma_sq = second - &mu * &mu;
        let sigma = libm::sqrt(to_f64(&sigma_sq));
        Moments {
            mu,
            sigma_sq,
            sigma,
        }
    }
}

impl fmt::Display for PayoffModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} probs=[", self.k)?;
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", format_rational(p))?;
        }
        f.write_str("]")
    }
}

/// Mean and variance of a single payoff, in score units.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mu: BigRational,
    pub sigma_sq: BigRational,
    pub sigma: f64,
}

impl Moments {
    pub fn mu_f64(&self) -> f64 {
        to_f64(&self.mu)
    }
}

/// One realized tournament. `games[g]` is the payoff index received by the
/// lower-indexed player of the `g`-th pair in lexicographic order
/// `(0,1), (0,2), ..., (n-2,n-1)`; the other player receives `k - games[g]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TournamentOutcome {
    n: usize,
    k: u32,
    games: Vec<u32>,
}

impl TournamentOutcome {
    pub fn new(n: usize, k: u32, games: Vec<u32>) -> Result<Self> {
        if k == 0 {
            return Err(Violation::ZeroK.into());
        }
        let expected = game_count(n);
        if games.len() != expected {
            return Err(Error::InvalidOutcome(format!(
                "{n} players need {expected} games, got {}",
                games.len()
            )));
        }
        if let Some(g) = games.iter().position(|&a| a > k) {
            return Err(Error::InvalidOutcome(format!(
                "game {g} has payoff index {} > k = {k}",
                games[g]
            )));
        }
        Ok(TournamentOutcome { n, k, games })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn games(&self) -> &[u32] {
        &self.games
    }

    /// Payoff index of player `i` against player `j` (`i != j`).
    pub fn payoff(&self, i: usize, j: usize) -> u32 {
        assert!(i != j && i < self.n && j < self.n, "bad pair ({i}, {j})");
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let a = self.games[pair_index(self.n, lo, hi)];
        if i < j {
            a
        } else {
            self.k - a
        }
    }

    pub fn score_vector(&self) -> ScoreVector {
        let mut y_scores = alloc::vec![0u32; self.n];
        let mut g = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let a = self.games[g];
                y_scores[i] += a;
                y_scores[j] += self.k - a;
                g += 1;
            }
        }
        ScoreVector { y_scores }
    }

    /// Swaps the result of every game.
    pub fn flipped(&self) -> Self {
        TournamentOutcome {
            n: self.n,
            k: self.k,
            games: self.games.iter().map(|&a| self.k - a).collect(),
        }
    }

    /// The same tournament with player `i` renamed to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = alloc::vec![false; self.n];
        if perm.len() != self.n
            || perm
                .iter()
                .any(|&p| p >= self.n || core::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidOutcome(String::from(
                "relabeling is not a permutation",
            )));
        }
        let mut games = alloc::vec![0u32; self.games.len()];
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (pi, pj) = (perm[i], perm[j]);
                let a = self.payoff(i, j);
                if pi < pj {
                    games[pair_index(self.n, pi, pj)] = a;
                } else {
                    games[pair_index(self.n, pj, pi)] = self.k - a;
                }
            }
        }
        Ok(TournamentOutcome {
            n: self.n,
            k: self.k,
            games,
        })
    }
}

/// Position of the pair `(i, j)`, `i < j`, in the lexicographic game list.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Scores in lattice units `Y = k * score`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScoreVector {
    pub y_scores: Vec<u32>,
}

impl ScoreVector {
    pub fn max(&self) -> Option<u32> {
        self.y_scores.iter().copied().max()
    }

    pub fn has_unique_max(&self) -> bool {
        has_unique_max(&self.y_scores)
    }

    pub fn sorted(&self) -> Vec<u32> {
        let mut v = self.y_scores.clone();
        v.sort_unstable();
        v
    }

    pub fn tied_pairs_above(&self, y_threshold: f64) -> u64 {
        tied_pairs_above(&self.y_scores, y_threshold)
    }
}

/// True when exactly one entry attains the maximum. An empty slice has no
/// maximum; a single player is its own unique maximum.
pub fn has_unique_max(y_scores: &[u32]) -> bool {
    let mut best = None;
    let mut ties = 0usize;
    for &s in y_scores {
        match best {
            Some(b) if s < b => {}
            Some(b) if s == b => ties += 1,
            _ => {
                best = Some(s);
                ties = 1;
            }
        }
    }
    ties == 1
}

/// Number of unordered pairs `u < v` with `y_threshold < y_u == y_v`.
pub fn tied_pairs_above(y_scores: &[u32], y_threshold: f64) -> u64 {
    let mut above: Vec<u32> = y_scores
        .iter()
        .copied()
        .filter(|&y| f64::from(y) > y_threshold)
        .collect();
    above.sort_unstable();
    let mut pairs = 0u64;
    let mut run = 0u64;
    let mut prev = None;
    for y in above {
        if prev == Some(y) {
            run += 1;
        } else {
            pairs += run * run.saturating_sub(1) / 2;
            run = 1;
            prev = Some(y);
        }
    }
    pairs + run * run.saturating_sub(1) / 2
}
