//! The `uniqmax` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use uniqmax_core::asymptotics::{
    claim2_check, lattice_ceil, llt_gaussian, llt_sup_error, moderate_deviation_ratio, ratio_point,
    RatioQuantity,
};
use uniqmax_core::enumeration::{outcome_count, DEFAULT_OUTCOME_CAP};
use uniqmax_core::exact_dist::{
    expected_wn_exact, expected_wn_upper, prop1_lower_bound, score_pmf, threshold, Mode, Quantity,
};
use uniqmax_core::monte_carlo::{EstimateCi, Event, McConfig};
use uniqmax_core::rational::format_rational;
use uniqmax_core::Error;

use crate::modelspec::{load_model_file, parse_alias, ResolvedModel};
use crate::output::{fmt_f64, Document, RunManifest};
use crate::parallel;

pub const MAX_OUTCOMES_ENV: &str = "UNIQMAX_MAX_OUTCOMES";

#[derive(Debug, Parser)]
#[command(
    name = "uniqmax",
    version,
    about = "Unique maximum scores in random round-robin tournaments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Payoff model: classic, chess:<p_draw>, or uniform:<k>
    #[arg(long, global = true, default_value = "classic")]
    pub model: String,
    /// JSON model document {"k": .., "probs": ["p/q", ..]}; overrides --model
    #[arg(long, global = true)]
    pub model_file: Option<PathBuf>,
    /// Threshold parameter epsilon > 0
    #[arg(long, global = true, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct NArgs {
    /// Number of players
    #[arg(long, conflicts_with = "grid")]
    pub n: Option<usize>,
    /// n1:n2:step (inclusive) or a comma-separated list
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Explicit threshold in score units instead of t_n
    #[arg(long, conflicts_with = "y_threshold")]
    pub threshold: Option<f64>,
    /// Explicit threshold on the Y = k * score lattice
    #[arg(long)]
    pub y_threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact r_n by full enumeration
    ExactR(NArgs),
    /// Exact distribution of the sorted score sequence
    Census(NArgs),
    /// Joint CDF of all scores against the product of marginals
    NdCheck(NArgs),
    /// Exact distribution of W_n, the number of pairs tied above a threshold
    WnDist {
        #[command(flatten)]
        n: NArgs,
        #[command(flatten)]
        threshold: ThresholdArgs,
    },
    /// One player's score distribution over n games
    Pmf {
        /// Number of games
        #[arg(long)]
        n_games: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// The threshold t_n
    Threshold(NArgs),
    /// E[W_n] by conditioning on the shared game
    WnExact {
        #[command(flatten)]
        n: NArgs,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// E[W_n(t_n)] next to its upper bound RHS_n
    WnBound {
        #[command(flatten)]
        n: NArgs,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// Lower bound 1 - (1 - p)^n for P(max score > t_n)
    Prop1Bound {
        #[command(flatten)]
        n: NArgs,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// Monte Carlo estimate of r_n
    McUnique {
        #[command(flatten)]
        n: NArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Monte Carlo estimate of P(max score > t_n)
    McExceed {
        #[command(flatten)]
        n: NArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Monte Carlo estimate of P(W_n(t_n) = 0)
    McCollisionFree {
        #[command(flatten)]
        n: NArgs,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Exact tail P(s_1(n) > t_n) against its large-n form
    TailCompare {
        #[command(flatten)]
        n: NArgs,
        #[arg(long, value_enum, default_value = "float")]
        mode: ModeArg,
    },
    /// Exact point probabilities against the Gaussian local approximation
    LltCompare {
        /// Number of games (or use --grid)
        #[arg(long, conflicts_with = "grid")]
        n_games: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value = "float")]
        mode: ModeArg,
    },
    /// Monotonicity P_n(x) >= P_n(x+1) of lattice point probabilities
    Claim2 {
        #[command(flatten)]
        n: NArgs,
        /// Comma-separated positive x values
        #[arg(long, default_value = "0.5,1,1.5,2,2.5")]
        x_grid: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// P(s_1(n-1) = ceil(t_{n-1} - 1)) against its large-n form
    Claim3Compare {
        #[command(flatten)]
        n: NArgs,
        #[arg(long, value_enum, default_value = "float")]
        mode: ModeArg,
    },
    /// RHS_n against its large-n form
    RhsCompare {
        #[command(flatten)]
        n: NArgs,
        #[arg(long, value_enum, default_value = "float")]
        mode: ModeArg,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidModel(_) | Error::Parse(_) => 2,
                Error::Domain(_) | Error::InvalidOutcome(_) => 3,
                Error::Infeasible { .. } | Error::Resource { .. } => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}

/// Expands `a:b:step` (inclusive) or `a,b,c` into ascending values.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "invalid --grid {spec:?}: expected n1:n2:step or a comma list"
        ))
    };
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let mut values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi] => (num(lo)?, num(hi)?, 1),
            [lo, hi, step] => (num(lo)?, num(hi)?, num(step)?),
            _ => return Err(bad()),
        };
        if step == 0 || lo > hi {
            return Err(bad());
        }
        (lo..=hi).step_by(step).collect::<Vec<_>>()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

fn n_values(n: &NArgs) -> Result<Vec<usize>, CliError> {
    match (&n.n, &n.grid) {
        (Some(v), None) => Ok(vec![*v]),
        (None, Some(g)) => parse_grid(g),
        _ => Err(CliError::Usage("one of --n or --grid is required".into())),
    }
}

fn parse_x_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            let x: f64 = s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid --x-grid value {s:?}")))?;
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::Usage(format!(
                    "--x-grid values must be positive, got {s:?}"
                )))
            }
        })
        .collect()
}

/// Enumeration cap, from `UNIQMAX_MAX_OUTCOMES` when set.
pub fn outcome_cap() -> Result<u64, CliError> {
    match std::env::var(MAX_OUTCOMES_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{MAX_OUTCOMES_ENV}={v:?} is not a non-negative integer"
            ))
        }),
        Err(_) => Ok(DEFAULT_OUTCOME_CAP),
    }
}

fn resolve_model(g: &GlobalArgs) -> Result<ResolvedModel, CliError> {
    let resolved = match &g.model_file {
        Some(path) => load_model_file(path),
        None => parse_alias(&g.model),
    };
    resolved.map_err(|e| CliError::Usage(e.message))
}

fn quantity_json(q: &Quantity) -> Value {
    match q {
        Quantity::Exact(r) => Value::String(format_rational(r)),
        Quantity::Float(x) => json!(x),
    }
}

fn quantity_cell(q: &Quantity) -> String {
    match q {
        Quantity::Exact(r) => format_rational(r),
        Quantity::Float(x) => fmt_f64(*x),
    }
}

fn record(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(
        pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}

fn estimate_record(op: &str, label: &str, n: usize, epsilon: Option<f64>, e: &EstimateCi) -> Value {
    record(vec![
        ("op", json!(op)),
        ("model", json!(label)),
        ("n", json!(n)),
        ("epsilon", epsilon.map_or(Value::Null, |x| json!(x))),
        ("seed", json!(e.seed)),
        ("reps", json!(e.reps)),
        ("successes", json!(e.successes)),
        ("estimate", json!(e.estimate)),
        ("ci", json!([e.ci_low, e.ci_high])),
        ("confidence", json!(e.confidence)),
    ])
}

/// Explicit lattice threshold from the override flags, if any.
fn explicit_y(t: &ThresholdArgs, k: u32) -> Option<f64> {
    t.y_threshold.or(t.threshold.map(|s| f64::from(k) * s))
}

fn try_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>, CliError>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U, CliError> + Sync + Send,
{
    parallel::map_ordered(items, f).into_iter().collect()
}

fn common_manifest(name: &str, g: &GlobalArgs, model: &ResolvedModel) -> RunManifest {
    let mut m = RunManifest::new(name);
    m.param("model", &model.label)
        .param("model_law", &model.model);
    if let Some(out) = &g.out {
        m.param("out", out.display());
    }
    m
}

/// Runs one parsed command and returns the document it produces.
pub fn execute(cli: &Cli) -> Result<Document, CliError> {
    let g = &cli.global;
    if !(g.epsilon > 0.0 && g.epsilon.is_finite()) {
        return Err(CliError::Usage(format!(
            "--epsilon must be positive, got {}",
            g.epsilon
        )));
    }
    let rm = resolve_model(g)?;
    let model = &rm.model;
    let label = rm.label.as_str();
    let eps = g.epsilon;
    let k = model.k();

    match &cli.command {
        Command::ExactR(n) => {
            let ns = n_values(n)?;
            let cap = outcome_cap()?;
            let mut man = common_manifest("exact-r", g, &rm);
            man.param("n", ns_label(&ns)).param("max_outcomes", cap);
            let mut doc = Document::json(&man);
            for &n in &ns {
                let r = parallel::exact_unique_max(model, n, cap)?;
                doc.push_record(record(vec![
                    ("op", json!("exact-r")),
                    ("model", json!(label)),
                    ("n", json!(n)),
                    ("outcomes", json!(outcome_count(k, n))),
                    ("r_n", json!(format_rational(&r.r_n))),
                    ("p_tie_at_max", json!(format_rational(&r.p_tie_at_max))),
                ]));
            }
            Ok(doc)
        }
        Command::Census(n) => {
            let n = single(n)?;
            let cap = outcome_cap()?;
            let table = parallel::score_census(model, n, cap)?;
            let mut man = common_manifest("census", g, &rm);
            man.param("n", n).param("max_outcomes", cap);
            let mut doc = Document::csv(&man, &["scores", "count", "prob_num", "prob_den"]);
            for (key, e) in &table.entries {
                let scores = key.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                doc.push_row(vec![
                    scores,
                    e.count.to_string(),
                    e.probability.numer().to_string(),
                    e.probability.denom().to_string(),
                ]);
            }
            Ok(doc)
        }
        Command::NdCheck(n) => {
            let n = single(n)?;
            let cap = outcome_cap()?;
            let report = parallel::nd_inequality_check(model, n, cap)?;
            let mut man = common_manifest("nd-check", g, &rm);
            man.param("n", n).param("max_outcomes", cap);
            let mut doc = Document::csv(&man, &["x", "lhs", "rhs", "lhs_minus_rhs"]);
            doc.add_meta("max_lhs_minus_rhs", format_rational(&report.max_diff));
            doc.add_meta("holds", report.holds());
            for row in &report.rows {
                doc.push_row(vec![
                    row.x.to_string(),
                    format_rational(&row.lhs),
                    format_rational(&row.rhs),
                    format_rational(&row.diff()),
                ]);
            }
            Ok(doc)
        }
        Command::WnDist { n, threshold: targ } => {
            let n = single(n)?;
            let cap = outcome_cap()?;
            let y = match explicit_y(targ, k) {
                Some(y) => y,
                None => threshold(model, n, eps)?.t_n_lattice,
            };
            let dist = parallel::wn_distribution_exact(model, n, y, cap)?;
            let mut man = common_manifest("wn-dist", g, &rm);
            man.param("n", n)
                .param("epsilon", fmt_f64(eps))
                .param("y_threshold", fmt_f64(y));
            let mut doc = Document::csv(&man, &["w", "prob_num", "prob_den"]);
            doc.add_meta("mean", format_rational(&dist.mean()));
            for (w, p) in &dist.probs {
                doc.push_row(vec![
                    w.to_string(),
                    p.numer().to_string(),
                    p.denom().to_string(),
                ]);
            }
            Ok(doc)
        }
        Command::Pmf { n_games, mode } => {
            let mode: Mode = (*mode).into();
            let pmf = score_pmf(model, *n_games, mode)?;
            let mut man = common_manifest("pmf", g, &rm);
            man.param("n_games", n_games).param("mode", mode);
            let mut doc = match mode {
                Mode::Exact => Document::csv(&man, &["y", "mass_num", "mass_den"]),
                Mode::Float => Document::csv(&man, &["y", "mass"]),
            };
            if mode == Mode::Float {
                doc.add_meta("drift", fmt_f64(pmf.drift()));
                doc.add_meta("quality_warning", pmf.quality_warning());
            }
            match pmf.to_rationals() {
                Some(masses) => {
                    for (y, p) in masses.iter().enumerate() {
                        doc.push_row(vec![
                            y.to_string(),
                            p.numer().to_string(),
                            p.denom().to_string(),
                        ]);
                    }
                }
                None => {
                    for (y, p) in pmf.to_f64_vec().iter().enumerate() {
                        doc.push_row(vec![y.to_string(), fmt_f64(*p)]);
                    }
                }
            }
            Ok(doc)
        }
        Command::Threshold(n) => {
            let ns = n_values(n)?;
            let mut man = common_manifest("threshold", g, &rm);
            man.param("n", ns_label(&ns)).param("epsilon", fmt_f64(eps));
            let mut doc = Document::json(&man);
            for &n in &ns {
                let t = threshold(model, n, eps)?;
                doc.push_record(record(vec![
                    ("op", json!("threshold")),
                    ("model", json!(label)),
                    ("n", json!(n)),
                    ("epsilon", json!(eps)),
                    ("x_n", json!(t.x_n)),
                    ("t_n", json!(t.t_n)),
                    ("t_n_lattice", json!(t.t_n_lattice)),
                    (
                        "moderate_deviation_ratio",
                        json!(moderate_deviation_ratio(&t)),
                    ),
                ]));
            }
            Ok(doc)
        }
        Command::WnExact {
            n,
            threshold: targ,
            mode,
        } => {
            let ns = n_values(n)?;
            let mode: Mode = (*mode).into();
            let explicit = explicit_y(targ, k);
            let rows = try_map(&ns, |&n| {
                let y = match explicit {
                    Some(y) => y,
                    None => threshold(model, n, eps)?.t_n_lattice,
                };
                Ok((n, y, expected_wn_exact(model, n, y, mode)?))
            })?;
            let mut man = common_manifest("wn-exact", g, &rm);
            man.param("n", ns_label(&ns))
                .param("epsilon", fmt_f64(eps))
                .param("mode", mode);
            if let Some(y) = explicit {
                man.param("y_threshold", fmt_f64(y));
            }
            let mut doc = Document::json(&man);
            for (n, y, v) in rows {
                doc.push_record(record(vec![
                    ("op", json!("wn-exact")),
                    ("model", json!(label)),
                    ("n", json!(n)),
                    (
                        "epsilon",
                        if explicit.is_some() {
                            Value::Null
                        } else {
                            json!(eps)
                        },
                    ),
                    ("y_threshold", json!(y)),
                    ("mode", json!(mode.to_string())),
                    ("e_wn", quantity_json(&v)),
                ]));
            }
            Ok(doc)
        }
        Command::WnBound { n, mode } => {
            let ns = n_values(n)?;
            let mode: Mode = (*mode).into();
            let rows = try_map(&ns, |&n| {
                let t = threshold(model, n, eps)?;
                let exact = expected_wn_exact(model, n, t.t_n_lattice, mode)?;
                let upper = expected_wn_upper(model, n, eps, mode)?;
                Ok((n, exact, upper))
            })?;
            let mut man = common_manifest("wn-bound", g, &rm);
            man.param("n", ns_label(&ns))
                .param("epsilon", fmt_f64(eps))
                .param("mode", mode);
            let mut doc = Document::json(&man);
            for (n, exact, upper) in rows {
                let holds = match (exact.as_exact(), upper.as_exact()) {
                    (Some(a), Some(b)) => a <= b,
                    _ => exact.to_f64() <= upper.to_f64(),
                };
                doc.push_record(record(vec![
                    ("op", json!("wn-bound")),
                    ("model", json!(label)),
                    ("n", json!(n)),
                    ("epsilon", json!(eps)),
                    ("mode", json!(mode.to_string())),
                    ("e_wn", quantity_json(&exact)),
                    ("rhs_n", quantity_json(&upper)),
                    ("holds", json!(holds)),
                ]));
            }
            Ok(doc)
        }
        Command::Prop1Bound { n, mode } => {
            let ns = n_values(n)?;
            let mode: Mode = (*mode).into();
            let rows = try_map(&ns, |&n| Ok((n, prop1_lower_bound(model, n, eps, mode)?)))?;
            let mut man = common_manifest("prop1-bound", g, &rm);
            man.param("n", ns_label(&ns))
                .param("epsilon", fmt_f64(eps))
                .param("mode", mode);
            let mut doc = Document::json(&man);
            for (n, b) in rows {
                doc.push_record(record(vec![
                    ("op", json!("prop1-bound")),
                    ("model", json!(label)),
                    ("n", json!(n)),
                    ("epsilon", json!(eps)),
                    ("mode", json!(mode.to_string())),
                    ("t_n", json!(b.threshold.t_n)),
                    ("tail", quantity_json(&b.tail)),
                    ("bound", quantity_json(&b.bound)),
                    ("bound_f64", json!(b.bound.to_f64())),
                    ("exp_bound", json!(b.exp_bound)),
                ]));
            }
            Ok(doc)
        }
        Command::McUnique { n, mc } => {
            let ns = n_values(n)?;
            let cfg = mc_config(mc)?;
            let mut man = common_manifest("mc-unique", g, &rm);
            mc_manifest(&mut man, &ns, &cfg);
            let mut doc = Document::json(&man);
            for &n in &ns {
                let e = parallel::estimate_unique_max(model, n, &cfg)?;
                let mut rec = estimate_record("mc-unique", label, n, None, &e.unique);
                rec["tie_at_max_estimate"] = json!(e.tie_at_max.estimate);
                doc.push_record(rec);
            }
            Ok(doc)
        }
        Command::McExceed { n, mc } => {
            let ns = n_values(n)?;
            let cfg = mc_config(mc)?;
            let mut man = common_manifest("mc-exceed", g, &rm);
            mc_manifest(&mut man, &ns, &cfg);
            man.param("epsilon", fmt_f64(eps));
            let mut doc = Document::json(&man);
            for &n in &ns {
                let t = threshold(model, n, eps)?;
                let e = parallel::estimate_event(
                    model,
                    n,
                    Event::Exceeds {
                        y_threshold: t.t_n_lattice,
                    },
                    &cfg,
                );
                let mut rec = estimate_record("mc-exceed", label, n, Some(eps), &e);
                rec["t_n"] = json!(t.t_n);
                doc.push_record(rec);
            }
            Ok(doc)
        }
        Command::McCollisionFree {
            n,
            threshold: targ,
            mc,
        } => {
            let ns = n_values(n)?;
            let cfg = mc_config(mc)?;
            let explicit = explicit_y(targ, k);
            let mut man = common_manifest("mc-collision-free", g, &rm);
            mc_manifest(&mut man, &ns, &cfg);
            man.param("epsilon", fmt_f64(eps));
            if let Some(y) = explicit {
                man.param("y_threshold", fmt_f64(y));
            }
            let mut doc = Document::json(&man);
            for &n in &ns {
                let y = match explicit {
                    Some(y) => y,
                    None => threshold(model, n, eps)?.t_n_lattice,
                };
                let e = parallel::estimate_event(
                    model,
                    n,
                    Event::CollisionFree { y_threshold: y },
                    &cfg,
                );
                let eps_field = if explicit.is_some() { None } else { Some(eps) };
                let mut rec = estimate_record("mc-collision-free", label, n, eps_field, &e);
                rec["y_threshold"] = json!(y);
                doc.push_record(rec);
            }
            Ok(doc)
        }
        Command::TailCompare { n, mode } => {
            ratio_command("tail-compare", RatioQuantity::Tail, g, &rm, n, *mode)
        }
        Command::Claim3Compare { n, mode } => {
            ratio_command("claim3-compare", RatioQuantity::Claim3, g, &rm, n, *mode)
        }
        Command::RhsCompare { n, mode } => {
            ratio_command("rhs-compare", RatioQuantity::Rhs, g, &rm, n, *mode)
        }
        Command::LltCompare {
            n_games,
            grid,
            mode,
        } => {
            let ms = n_values(&NArgs {
                n: *n_games,
                grid: grid.clone(),
            })?;
            let mode: Mode = (*mode).into();
            let rows = try_map(&ms, |&m| {
                let pmf = score_pmf(model, m, mode)?;
                let err = llt_sup_error(model, &pmf)?;
                let y_mid = lattice_ceil(k, m as f64 / 2.0);
                let exact = pmf.mass_f64(y_mid);
                let asym = llt_gaussian(model, m, y_mid);
                Ok((m, exact, asym, err))
            })?;
            let mut man = common_manifest("llt-compare", g, &rm);
            man.param("n_games", ns_label(&ms))
                .param("mode", mode)
                .param("quantity", "llt");
            let mut doc = Document::csv(
                &man,
                &[
                    "n",
                    "exact",
                    "asymptotic",
                    "ratio",
                    "sup_error",
                    "scaled_sup_error",
                    "argmax_y",
                ],
            );
            for (m, exact, asym, err) in rows {
                doc.push_row(vec![
                    m.to_string(),
                    fmt_f64(exact),
                    fmt_f64(asym),
                    fmt_f64(exact / asym),
                    fmt_f64(err.sup_error),
                    fmt_f64(err.scaled),
                    err.argmax_y.to_string(),
                ]);
            }
            Ok(doc)
        }
        Command::Claim2 { n, x_grid, mode } => {
            let ns = n_values(n)?;
            let xs = parse_x_grid(x_grid)?;
            let mode: Mode = (*mode).into();
            let reports = try_map(&ns, |&n| Ok(claim2_check(model, n, &xs, mode)?))?;
            let mut man = common_manifest("claim2", g, &rm);
            man.param("n", ns_label(&ns))
                .param("x_grid", x_grid)
                .param("mode", mode);
            let mut doc = Document::csv(
                &man,
                &[
                    "n",
                    "x",
                    "y_x",
                    "p_x",
                    "y_x1",
                    "p_x1",
                    "gaussian_x",
                    "violation",
                ],
            );
            let total: usize = reports.iter().map(|r| r.violations()).sum();
            doc.add_meta("violations", total);
            for r in &reports {
                for p in &r.points {
                    doc.push_row(vec![
                        r.n.to_string(),
                        fmt_f64(p.x),
                        p.y_x.to_string(),
                        quantity_cell(&p.p_x),
                        p.y_x1.to_string(),
                        quantity_cell(&p.p_x1),
                        fmt_f64(p.gaussian_x),
                        p.violation.to_string(),
                    ]);
                }
            }
            Ok(doc)
        }
    }
}

fn single(n: &NArgs) -> Result<usize, CliError> {
    match n_values(n)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(CliError::Usage("this subcommand takes a single --n".into())),
    }
}

fn ns_label(ns: &[usize]) -> String {
    ns.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn mc_config(mc: &McArgs) -> Result<McConfig, CliError> {
    McConfig::with_confidence(mc.seed, mc.reps, mc.confidence)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn mc_manifest(man: &mut RunManifest, ns: &[usize], cfg: &McConfig) {
    man.param("n", ns_label(ns))
        .param("seed", cfg.seed)
        .param("reps", cfg.reps)
        .param("confidence", fmt_f64(cfg.confidence));
}

fn ratio_command(
    name: &str,
    quantity: RatioQuantity,
    g: &GlobalArgs,
    rm: &ResolvedModel,
    n: &NArgs,
    mode: ModeArg,
) -> Result<Document, CliError> {
    let ns = n_values(n)?;
    let mode: Mode = mode.into();
    let rows = try_map(&ns, |&n| {
        Ok((n, ratio_point(quantity, &rm.model, n, g.epsilon, mode)?))
    })?;
    let mut man = common_manifest(name, g, rm);
    man.param("n", ns_label(&ns))
        .param("epsilon", fmt_f64(g.epsilon))
        .param("mode", mode)
        .param("quantity", quantity.name());
    let mut doc = Document::csv(&man, &["n", "exact", "asymptotic", "ratio"]);
    for (n, (exact, asym)) in rows {
        doc.push_row(vec![
            n.to_string(),
            fmt_f64(exact),
            fmt_f64(asym),
            fmt_f64(exact / asym),
        ]);
    }
    Ok(doc)
}

/// Parses `args`, runs the command, writes its output, and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = execute(&cli).and_then(|doc| {
        let text = doc.serialize();
        match &cli.global.out {
            Some(path) => std::fs::write(path, text)?,
            None => {
                use std::io::Write;
                std::io::stdout().lock().write_all(text.as_bytes())?;
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
