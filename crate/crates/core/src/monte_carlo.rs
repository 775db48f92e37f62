//! Seeded Monte Carlo estimates for tournaments too large to enumerate.
//!
//! Replication `i` of a run with seed `s` draws from ChaCha8 keyed by `s`
//! on stream `i`, so any partition of the replication indices over workers
//! gives the same success count.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::std_normal_quantile;
use crate::error::{Error, Result};
use crate::exact_dist::threshold;
use crate::model::{has_unique_max, tied_pairs_above, PayoffModel, TournamentOutcome};

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub reps: u64,
    pub confidence: f64,
}

impl McConfig {
    pub fn new(seed: u64, reps: u64) -> Result<Self> {
        Self::with_confidence(seed, reps, DEFAULT_CONFIDENCE)
    }

    pub fn with_confidence(seed: u64, reps: u64, confidence: f64) -> Result<Self> {
        if reps == 0 {
            return Err(Error::domain("reps must be at least 1"));
        }
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::domain(format!(
                "confidence must lie in (0, 1), got {confidence}"
            )));
        }
        Ok(McConfig {
            seed,
            reps,
            confidence,
        })
    }
}

/// A binomial proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateCi {
    pub estimate: f64,
    pub successes: u64,
    pub reps: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub seed: u64,
}

impl EstimateCi {
    pub fn from_counts(successes: u64, cfg: &McConfig) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, cfg.reps, cfg.confidence);
        EstimateCi {
            estimate: successes as f64 / cfg.reps as f64,
            successes,
            reps: cfg.reps,
            ci_low,
            ci_high,
            confidence: cfg.confidence,
            seed: cfg.seed,
        }
    }

    /// Half-width of the interval in units of the normal quantile.
    pub fn wilson_sigma(&self) -> f64 {
        wilson_sigma(self.successes, self.reps)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Wilson score interval, clamped to `[0, 1]` and widened to contain the
/// point estimate against rounding.
pub fn wilson_interval(successes: u64, reps: u64, confidence: f64) -> (f64, f64) {
    let z = std_normal_quantile(0.5 + confidence / 2.0);
    let n = reps as f64;
    let p = successes as f64 / n;
    let z2n = z * z / n;
    let centre = (p + z2n / 2.0) / (1.0 + z2n);
    let half = z / (1.0 + z2n) * libm::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
    let low = (centre - half).min(p).max(0.0);
    let high = (centre + half).max(p).min(1.0);
    (low, high)
}

/// `sqrt(p(1-p)/n + 1/(4n^2)) / (1 + 1/n)`: the Wilson half-width at `z = 1`.
pub fn wilson_sigma(successes: u64, reps: u64) -> f64 {
    let n = reps as f64;
    let p = successes as f64 / n;
    libm::sqrt(p * (1.0 - p) / n + 1.0 / (4.0 * n * n)) / (1.0 + 1.0 / n)
}

/// The generator for replication `index` of a run seeded with `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `[0, 1)` with 53 random bits.
fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF sampler over the atoms `a = 0..=k` in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffSampler {
    k: u32,
    cumulative: Vec<f64>,
}

impl PayoffSampler {
    pub fn new(model: &PayoffModel) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = model
            .probs_f64()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("k + 1 >= 2 atoms") = 1.0;
        PayoffSampler {
            k: model.k(),
            cumulative,
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u32 {
        let u = unit_f64(rng);
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.k as usize) as u32
    }

    /// Plays one tournament into `y_scores` without keeping the games.
    pub fn play_scores<R: RngCore + ?Sized>(&self, rng: &mut R, y_scores: &mut [u32]) {
        y_scores.iter_mut().for_each(|s| *s = 0);
        let n = y_scores.len();
        for i in 0..n {
            for j in i + 1..n {
                let a = self.sample(rng);
                y_scores[i] += a;
                y_scores[j] += self.k - a;
            }
        }
    }
}

/// Draws every game independently, in canonical pair order.
pub fn sample_tournament<R: RngCore + ?Sized>(
    model: &PayoffModel,
    n: usize,
    rng: &mut R,
) -> TournamentOutcome {
    let sampler = PayoffSampler::new(model);
    let games = (0..crate::model::game_count(n))
        .map(|_| sampler.sample(rng))
        .collect();
    TournamentOutcome::new(n, model.k(), games).expect("sampled outcome has the canonical shape")
}

/// What a replication is tested for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    /// Exactly one player holds the top score.
    UniqueMax,
    /// The top lattice score is strictly above the threshold.
    Exceeds { y_threshold: f64 },
    /// No two players share a lattice score strictly above the threshold.
    CollisionFree { y_threshold: f64 },
}

impl Event {
    pub fn holds(&self, y_scores: &[u32]) -> bool {
        match *self {
            Event::UniqueMax => has_unique_max(y_scores),
            Event::Exceeds { y_threshold } => y_scores.iter().any(|&y| f64::from(y) > y_threshold),
            Event::CollisionFree { y_threshold } => tied_pairs_above(y_scores, y_threshold) == 0,
        }
    }
}

/// Hits and misses over a block of replications.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub hits: u64,
    pub misses: u64,
}

impl Tally {
    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            hits: self.hits + other.hits,
            misses: self.misses + other.misses,
        }
    }
}

/// Runs replications `indices` of the run seeded with `seed`.
pub fn tally_range(
    model: &PayoffModel,
    n: usize,
    event: Event,
    seed: u64,
    indices: Range<u64>,
) -> Tally {
    let sampler = PayoffSampler::new(model);
    let mut scores = vec![0u32; n];
    let mut tally = Tally::default();
    for i in indices {
        let mut rng = replication_rng(seed, i);
        sampler.play_scores(&mut rng, &mut scores);
        if event.holds(&scores) {
            tally.hits += 1;
        } else {
            tally.misses += 1;
        }
    }
    tally
}

pub fn estimate_event(model: &PayoffModel, n: usize, event: Event, cfg: &McConfig) -> EstimateCi {
    let tally = tally_range(model, n, event, cfg.seed, 0..cfg.reps);
    EstimateCi::from_counts(tally.hits, cfg)
}

/// Unique-maximum and tie-at-maximum estimates from the same replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniqueMaxEstimate {
    pub unique: EstimateCi,
    pub tie_at_max: EstimateCi,
}

impl UniqueMaxEstimate {
    pub fn from_tally(tally: Tally, cfg: &McConfig) -> Self {
        UniqueMaxEstimate {
            unique: EstimateCi::from_counts(tally.hits, cfg),
            tie_at_max: EstimateCi::from_counts(tally.misses, cfg),
        }
    }
}

pub fn estimate_unique_max(
    model: &PayoffModel,
    n: usize,
    cfg: &McConfig,
) -> Result<UniqueMaxEstimate> {
    if n == 0 {
        return Err(Error::domain("r_n needs at least one player"));
    }
    let tally = tally_range(model, n, Event::UniqueMax, cfg.seed, 0..cfg.reps);
    Ok(UniqueMaxEstimate::from_tally(tally, cfg))
}

/// `P(s*_n > t_n)` at the calibrated threshold.
pub fn estimate_exceed_threshold(
    model: &PayoffModel,
    n: usize,
    epsilon: f64,
    cfg: &McConfig,
) -> Result<EstimateCi> {
    let t = threshold(model, n, epsilon)?;
    Ok(estimate_event(
        model,
        n,
        Event::Exceeds {
            y_threshold: t.t_n_lattice,
        },
        cfg,
    ))
}

/// `P(W_n(t_n) = 0)` at the calibrated threshold.
pub fn estimate_collision_free(
    model: &PayoffModel,
    n: usize,
    epsilon: f64,
    cfg: &McConfig,
) -> Result<EstimateCi> {
    let t = threshold(model, n, epsilon)?;
    Ok(estimate_event(
        model,
        n,
        Event::CollisionFree {
            y_threshold: t.t_n_lattice,
        },
        cfg,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn identical_streams_give_identical_outcomes() {
        let m = PayoffModel::chess(BigRational::new(1.into(), 3.into())).unwrap();
        let a = sample_tournament(&m, 7, &mut replication_rng(9, 4));
        let b = sample_tournament(&m, 7, &mut replication_rng(9, 4));
        assert_eq!(a, b);
        let c = sample_tournament(&m, 7, &mut replication_rng(9, 5));
        assert_ne!(a, c);
        let two = sample_tournament(&PayoffModel::classic(), 2, &mut replication_rng(1, 0));
        assert_eq!(two.games().len(), 1);
    }

    #[test]
    fn per_game_frequencies_match_probabilities() {
        let m = PayoffModel::chess(BigRational::new(1.into(), 4.into())).unwrap();
        let sampler = PayoffSampler::new(&m);
        let mut rng = replication_rng(123, 0);
        let draws = 100_000u32;
        let mut counts = [0u32; 3];
        for _ in 0..draws {
            counts[sampler.sample(&mut rng) as usize] += 1;
        }
        for (a, &c) in counts.iter().enumerate() {
            let p = m.probs_f64()[a];
            let sd = libm::sqrt(f64::from(draws) * p * (1.0 - p));
            assert!(
                (f64::from(c) - f64::from(draws) * p).abs() < 4.0 * sd,
                "atom {a}: {c}"
            );
        }
    }

    #[test]
    fn play_scores_matches_sampled_outcome() {
        let m = PayoffModel::uniform(3).unwrap();
        let sampler = PayoffSampler::new(&m);
        let mut scores = [0u32; 6];
        sampler.play_scores(&mut replication_rng(5, 2), &mut scores);
        let outcome = sample_tournament(&m, 6, &mut replication_rng(5, 2));
        assert_eq!(outcome.score_vector().y_scores, scores);
    }

    #[test]
    fn wilson_interval_edges() {
        let (lo, hi) = wilson_interval(0, 1, 0.95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.5 && hi < 1.0);
        let (lo, hi) = wilson_interval(1, 1, 0.95);
        assert!(lo > 0.0 && lo < 0.5);
        assert_eq!(hi, 1.0);
        let (lo, hi) = wilson_interval(50, 100, 0.95);
        assert!((lo - 0.40383153).abs() < 1e-6 && (hi - 0.59616847).abs() < 1e-6);
    }

    #[test]
    fn single_player_is_always_unique() {
        let cfg = McConfig::new(3, 10).unwrap();
        let e = estimate_unique_max(&PayoffModel::classic(), 1, &cfg).unwrap();
        assert_eq!(e.unique.estimate, 1.0);
    }

    #[test]
    fn unique_and_tie_partition_the_replications() {
        let cfg = McConfig::new(11, 5_000).unwrap();
        let e = estimate_unique_max(&PayoffModel::classic(), 5, &cfg).unwrap();
        assert_eq!(e.unique.successes + e.tie_at_max.successes, cfg.reps);
        assert!((e.unique.estimate - (1.0 - e.tie_at_max.estimate)).abs() < 1e-15);
    }

    #[test]
    fn classic_three_near_three_quarters() {
        let cfg = McConfig::new(1, 100_000).unwrap();
        let e = estimate_unique_max(&PayoffModel::classic(), 3, &cfg).unwrap();
        assert!((e.unique.estimate - 0.75).abs() < 3.0 * e.unique.wilson_sigma());
        let c = estimate_event(
            &PayoffModel::classic(),
            3,
            Event::CollisionFree { y_threshold: 0.5 },
            &cfg,
        );
        assert!((c.estimate - 0.75).abs() < 3.0 * c.wilson_sigma());
    }

    #[test]
    fn thresholds_above_support() {
        let cfg = McConfig::new(2, 1_000).unwrap();
        let m = PayoffModel::classic();
        // t_3 = 2.03 exceeds the two-game maximum
        assert_eq!(
            estimate_exceed_threshold(&m, 3, 1.0, &cfg)
                .unwrap()
                .estimate,
            0.0
        );
        assert_eq!(
            estimate_collision_free(&m, 3, 1.0, &cfg).unwrap().estimate,
            1.0
        );
        assert!(estimate_exceed_threshold(&m, 2, 1.0, &cfg).is_err());
    }

    #[test]
    fn single_replication_interval() {
        let cfg = McConfig::new(8, 1).unwrap();
        let e = estimate_event(&PayoffModel::classic(), 4, Event::UniqueMax, &cfg);
        assert!(e.estimate == 0.0 || e.estimate == 1.0);
        assert!(e.ci_low <= e.estimate && e.estimate <= e.ci_high);
        assert!(e.ci_high - e.ci_low > 0.5);
    }

    #[test]
    fn blocks_sum_to_the_whole_run() {
        let m = PayoffModel::uniform(2).unwrap();
        let whole = tally_range(&m, 6, Event::UniqueMax, 77, 0..1000);
        let parts = (0..10).fold(Tally::default(), |acc, b| {
            acc.merge(tally_range(
                &m,
                6,
                Event::UniqueMax,
                77,
                b * 100..(b + 1) * 100,
            ))
        });
        assert_eq!(whole, parts);
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(0, 0).is_err());
        assert!(McConfig::with_confidence(0, 5, 1.0).is_err());
    }
}
