//! Data-parallel drivers over the core engines.
//!
//! Work is split into fixed index blocks that do not depend on the thread
//! count, and block results are combined with exact associative merges, so
//! every result here equals its sequential counterpart bit for bit.

use std::ops::Range;

use rayon::prelude::*;
use uniqmax_core::enumeration::{
    Accumulator, CensusAcc, CensusTable, Enumeration, MaxScoreAcc, NdReport, UniqueMaxAcc,
    UniqueMaxReport, WnAcc, WnDistribution,
};
use uniqmax_core::exact_dist::threshold;
use uniqmax_core::monte_carlo::{
    tally_range, EstimateCi, Event, McConfig, Tally, UniqueMaxEstimate,
};
use uniqmax_core::{Error, PayoffModel, Result};

const ENUM_BLOCK: u64 = 1 << 14;
const MC_BLOCK: u64 = 1 << 10;

fn blocks(total: u64, size: u64) -> Vec<Range<u64>> {
    (0..total.div_ceil(size))
        .map(|b| b * size..((b + 1) * size).min(total))
        .collect()
}

/// Folds every outcome of `plan` in parallel blocks.
pub fn fold<A, F>(plan: &Enumeration<'_>, init: F) -> A
where
    A: Accumulator + Send,
    F: Fn() -> A + Sync,
{
    blocks(plan.outcome_count(), ENUM_BLOCK)
        .into_par_iter()
        .map(|r| plan.fold_range(r, init()))
        .reduce(&init, |mut a, b| {
            a.merge(b);
            a
        })
}

pub fn exact_unique_max(model: &PayoffModel, n: usize, cap: u64) -> Result<UniqueMaxReport> {
    if n == 0 {
        return Err(Error::Domain("r_n needs at least one player".into()));
    }
    let plan = Enumeration::new(model, n, cap)?;
    Ok(fold(&plan, UniqueMaxAcc::default).finish(&plan))
}

pub fn score_census(model: &PayoffModel, n: usize, cap: u64) -> Result<CensusTable> {
    let plan = Enumeration::new(model, n, cap)?;
    Ok(fold(&plan, CensusAcc::default).finish(&plan))
}

pub fn nd_inequality_check(model: &PayoffModel, n: usize, cap: u64) -> Result<NdReport> {
    if n == 0 {
        return Err(Error::Domain(
            "negative-dependence check needs at least one player".into(),
        ));
    }
    let plan = Enumeration::new(model, n, cap)?;
    fold(&plan, MaxScoreAcc::default).finish(&plan)
}

pub fn wn_distribution_exact(
    model: &PayoffModel,
    n: usize,
    y_threshold: f64,
    cap: u64,
) -> Result<WnDistribution> {
    let plan = Enumeration::new(model, n, cap)?;
    Ok(fold(&plan, || WnAcc::new(y_threshold)).finish(&plan))
}

pub fn tally(model: &PayoffModel, n: usize, event: Event, seed: u64, reps: u64) -> Tally {
    blocks(reps, MC_BLOCK)
        .into_par_iter()
        .map(|r| tally_range(model, n, event, seed, r))
        .reduce(Tally::default, Tally::merge)
}

pub fn estimate_event(model: &PayoffModel, n: usize, event: Event, cfg: &McConfig) -> EstimateCi {
    EstimateCi::from_counts(tally(model, n, event, cfg.seed, cfg.reps).hits, cfg)
}

pub fn estimate_unique_max(
    model: &PayoffModel,
    n: usize,
    cfg: &McConfig,
) -> Result<UniqueMaxEstimate> {
    if n == 0 {
        return Err(Error::Domain("r_n needs at least one player".into()));
    }
    let t = tally(model, n, Event::UniqueMax, cfg.seed, cfg.reps);
    Ok(UniqueMaxEstimate::from_tally(t, cfg))
}

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

/// Maps `f` over `items` in parallel, keeping input order.
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}
