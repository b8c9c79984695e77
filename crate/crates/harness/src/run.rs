//! Runs an algorithm over a trace with per-step invariant checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use clap::ValueEnum;
use dynsteiner::amortized::{bad_levels, DeleteError, StepCase};
use dynsteiner::dynamic::DynError;
use dynsteiner::lipschitz::level_rows;
use dynsteiner::oracle::{dual_lower_bound, opt_steiner, DEFAULT_TERMINAL_LIMIT};
use dynsteiner::{AmortizedDeleter, DynamicSteiner, LipschitzDeleter, Metric, MetricError, VertexId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{Request, Trace, TraceError};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Amortized,
    Lipschitz,
    Dynamic,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Amortized, Algo::Lipschitz, Algo::Dynamic];

    pub fn deletion_only(self) -> bool {
        self != Algo::Dynamic
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Amortized => "amortized",
            Algo::Lipschitz => "lipschitz",
            Algo::Dynamic => "dynamic",
        })
    }
}

/// `Fast` checks the headline bounds; `Full` adds the structural checks,
/// the exact oracle where the alive set is small, and the potential
/// accounting after every step.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Checks {
    Fast,
    Full,
}

#[derive(Copy, Clone, Debug)]
pub struct RunConfig {
    pub checks: Checks,
    /// Stop at the first failed check instead of recording it.
    pub fail_fast: bool,
    /// Largest alive set handed to the exact oracle.
    pub opt_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { checks: Checks::Full, fail_fast: false, opt_limit: DEFAULT_TERMINAL_LIMIT }
    }
}

impl RunConfig {
    pub fn with_checks(checks: Checks) -> Self {
        RunConfig { checks, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub t: usize,
    pub algo: Algo,
    pub cost: u64,
    pub mst: u64,
    pub opt: Option<u64>,
    /// Packing lower bound in quarters; amortized runs only.
    pub lb: Option<u128>,
    pub churn: usize,
    pub swaps: usize,
    pub splices: usize,
    pub zt: usize,
    pub fails: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algo: Option<Algo>,
    pub steps: usize,
    pub vertices: usize,
    pub total_churn: usize,
    pub max_churn: usize,
    pub total_zt: usize,
    pub total_swaps: usize,
    pub total_splices: usize,
    pub rebuilds: usize,
    /// Largest `|F'_{t-1} \ F'_t|` and `|F'_t \ F_t|` (lipschitz).
    pub max_full_dropped: usize,
    pub max_tail: usize,
    /// (step, level) pairs with at least 36 edges above the level.
    pub key_invariant_levels: usize,
    pub max_cost_over_mst: f64,
    pub max_cost_over_opt: Option<f64>,
    pub opt_steps: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub steps: Vec<StepReport>,
    pub summary: Summary,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.summary.failures == 0
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Delete(#[from] DeleteError),
    #[error(transparent)]
    Dynamic(#[from] DynError),
    #[error("step {t}: invariant failed: {message}")]
    Invariant { t: usize, message: String },
}

impl RunError {
    pub fn is_invariant(&self) -> bool {
        matches!(self, RunError::Invariant { .. } | RunError::Delete(DeleteError::InternalInvariantBroken(_)))
    }
}

struct Collector {
    cfg: RunConfig,
    algo: Algo,
    steps: Vec<StepReport>,
    summary: Summary,
}

impl Collector {
    fn new(algo: Algo, cfg: RunConfig) -> Self {
        Collector { cfg, algo, steps: Vec::new(), summary: Summary { algo: Some(algo), ..Summary::default() } }
    }

    fn push(&mut self, mut row: StepReport) -> Result<(), RunError> {
        for f in &mut row.fails {
            *f = f.replace(';', ",");
        }
        let s = &mut self.summary;
        s.steps += 1;
        s.total_churn += row.churn;
        s.max_churn = s.max_churn.max(row.churn);
        s.total_zt += row.zt;
        s.total_swaps += row.swaps;
        s.total_splices += row.splices;
        if row.mst > 0 {
            s.max_cost_over_mst = s.max_cost_over_mst.max(row.cost as f64 / row.mst as f64);
        }
        if let Some(opt) = row.opt {
            s.opt_steps += 1;
            let ratio = match (row.cost, opt) {
                (0, _) => 0.0,
                (_, 0) => f64::INFINITY,
                (c, o) => c as f64 / o as f64,
            };
            s.max_cost_over_opt = Some(s.max_cost_over_opt.map_or(ratio, |m| m.max(ratio)));
        }
        if !row.fails.is_empty() {
            s.failures += row.fails.len();
            if s.first_failure.is_none() {
                s.first_failure = Some(format!("t={}: {}", row.t, row.fails[0]));
            }
            if self.cfg.fail_fast {
                return Err(RunError::Invariant { t: row.t, message: row.fails.join("; ") });
            }
        }
        self.steps.push(row);
        Ok(())
    }

    /// Failures that only make sense over the whole run are attached to
    /// the last row.
    fn finish(mut self, fails: Vec<String>) -> Result<RunOutput, RunError> {
        if !fails.is_empty() {
            let t = self.steps.last().map_or(0, |r| r.t);
            self.summary.failures += fails.len();
            if self.summary.first_failure.is_none() {
                self.summary.first_failure = Some(format!("t={t}: {}", fails[0]));
            }
            if self.cfg.fail_fast {
                return Err(RunError::Invariant { t, message: fails.join("; ") });
            }
            if let Some(last) = self.steps.last_mut() {
                last.fails.extend(fails);
            }
        }
        Ok(RunOutput { steps: self.steps, summary: self.summary })
    }

    fn row(&self, t: usize) -> StepReport {
        StepReport {
            t,
            algo: self.algo,
            cost: 0,
            mst: 0,
            opt: None,
            lb: None,
            churn: 0,
            swaps: 0,
            splices: 0,
            zt: 0,
            fails: Vec::new(),
        }
    }

    /// MST and, with full checks and a small alive set, OPT together with
    /// the oracle-side sanity checks.
    fn measure(&self, row: &mut StepReport, m: &Metric, alive: &BTreeSet<VertexId>) {
        row.mst = m.mst_cost(alive).unwrap_or(0);
        if self.cfg.checks == Checks::Full && alive.len() <= self.cfg.opt_limit {
            match opt_steiner(m, alive) {
                Ok(r) => {
                    row.opt = Some(r.cost);
                    if row.mst > 2 * r.cost {
                        row.fails.push(format!("MST {} > 2·OPT {}", row.mst, r.cost));
                    }
                    if let Some(lb) = row.lb {
                        if lb > 4 * r.cost as u128 {
                            row.fails.push(format!("lower bound {lb}/4 > OPT {}", r.cost));
                        }
                    }
                }
                Err(e) => row.fails.push(format!("oracle: {e}")),
            }
        }
    }
}

fn init_metric(trace: &Trace) -> Result<Metric, RunError> {
    trace.validate_deletion_only()?;
    let (points, dist) = trace.init().ok_or(TraceError::MissingInit)?;
    Ok(Metric::validate(points, dist)?)
}

fn deletions(trace: &Trace) -> impl Iterator<Item = (usize, VertexId)> + '_ {
    trace.requests.iter().enumerate().filter_map(|(t, r)| match r {
        Request::Del { id } => Some((t, *id)),
        _ => None,
    })
}

pub fn run(trace: &Trace, algo: Algo, cfg: RunConfig) -> Result<RunOutput, RunError> {
    match algo {
        Algo::Amortized => run_amortized(trace, cfg),
        Algo::Lipschitz => run_lipschitz(trace, cfg),
        Algo::Dynamic => run_dynamic(trace, cfg),
    }
}

fn run_amortized(trace: &Trace, cfg: RunConfig) -> Result<RunOutput, RunError> {
    let metric = init_metric(trace)?;
    let n = metric.len();
    let mut st = AmortizedDeleter::new(metric);
    let mut c = Collector::new(Algo::Amortized, cfg);
    c.summary.vertices = n;
    let check = |st: &AmortizedDeleter, row: &mut StepReport| {
        row.cost = st.tree().cost();
        row.lb = Some(dual_lower_bound(st.clustering()).0);
        let bad = bad_levels(st.clustering());
        if !bad.is_empty() {
            row.fails.push(format!("bad levels {bad:?}"));
        }
        if cfg.checks == Checks::Full {
            row.fails.extend(st.violations());
        }
    };
    let mut row = c.row(0);
    check(&st, &mut row);
    c.measure(&mut row, st.metric(), &st.alive());
    c.push(row)?;
    for (t, v) in deletions(trace) {
        let step = st.delete(v)?;
        let mut row = c.row(t);
        row.churn = step.churn;
        row.zt = step.zt.len();
        if row.churn > 3 * row.zt {
            row.fails.push(format!("churn {} > 3·|Z_t| = {}", row.churn, 3 * row.zt));
        }
        if let StepCase::Rebuild { .. } = step.case {
            c.summary.rebuilds += 1;
        }
        check(&st, &mut row);
        c.measure(&mut row, st.metric(), &st.alive());
        c.push(row)?;
    }
    let mut fails = Vec::new();
    if c.summary.total_churn > 3 * n {
        fails.push(format!("total churn {} > 3n = {}", c.summary.total_churn, 3 * n));
    }
    if c.summary.total_zt > n {
        fails.push(format!("Σ|Z_t| = {} > n = {n}", c.summary.total_zt));
    }
    c.finish(fails)
}

fn run_lipschitz(trace: &Trace, cfg: RunConfig) -> Result<RunOutput, RunError> {
    let metric = init_metric(trace)?;
    let mut st = LipschitzDeleter::new(metric);
    let conf = *st.config();
    let mut c = Collector::new(Algo::Lipschitz, cfg);
    c.summary.vertices = st.metric().len();
    let key_invariant = |st: &LipschitzDeleter, row: &mut StepReport| -> usize {
        let mut exercised = 0;
        for r in level_rows(st.clustering(), conf.goodness) {
            if r.m_above >= conf.min_edges {
                exercised += 1;
                if r.m_above > conf.goodness * r.alive + conf.slack {
                    row.fails.push(format!("level {}: m_above {} > 3·{} + {}", r.level, r.m_above, r.alive, conf.slack));
                }
            }
        }
        exercised
    };
    let mut row = c.row(0);
    row.cost = st.forest().cost();
    c.summary.key_invariant_levels += key_invariant(&st, &mut row);
    if cfg.checks == Checks::Full {
        row.fails.extend(st.violations());
    }
    c.measure(&mut row, st.metric(), &st.alive());
    c.push(row)?;
    for (t, v) in deletions(trace) {
        let step = st.delete(v)?;
        let mut row = c.row(t);
        row.cost = st.forest().cost();
        row.churn = step.churn;
        row.zt = step.zt.len();
        if step.case != StepCase::Lazy {
            c.summary.rebuilds += 1;
        }
        c.summary.max_full_dropped = c.summary.max_full_dropped.max(step.full_dropped);
        c.summary.max_tail = c.summary.max_tail.max(step.tail);
        if step.churn > conf.churn_bound {
            row.fails.push(format!("churn {} > {}", step.churn, conf.churn_bound));
        }
        if step.full_dropped > conf.drop_bound {
            row.fails.push(format!("|F'_prev \\ F'| = {} > {}", step.full_dropped, conf.drop_bound));
        }
        if step.tail > conf.tail_bound {
            row.fails.push(format!("|F' \\ F| = {} > {}", step.tail, conf.tail_bound));
        }
        c.summary.key_invariant_levels += key_invariant(&st, &mut row);
        if cfg.checks == Checks::Full {
            row.fails.extend(st.violations());
            row.fails.extend(st.check_step(&step));
        }
        c.measure(&mut row, st.metric(), &st.alive());
        c.push(row)?;
    }
    c.finish(Vec::new())
}

fn run_dynamic(trace: &Trace, cfg: RunConfig) -> Result<RunOutput, RunError> {
    trace.validate()?;
    let mut st = DynamicSteiner::new();
    let mut c = Collector::new(Algo::Dynamic, cfg);
    for (t, r) in trace.requests.iter().enumerate() {
        let (swaps, splices, churn) = match r {
            Request::Init { points, dist } => {
                // Points arrive one by one in id order.
                let lookup: BTreeMap<(VertexId, VertexId), u64> =
                    dist.iter().flat_map(|&(a, b, d)| [((a, b), d), ((b, a), d)]).collect();
                let mut sorted = points.clone();
                sorted.sort();
                let (mut sw, mut sp, mut ch) = (0, 0, 0);
                for (i, &p) in sorted.iter().enumerate() {
                    let d = sorted[..i].iter().map(|&q| (q, lookup[&(p, q)])).collect();
                    let s = st.add(p, &d)?;
                    (sw, sp, ch) = (sw + s.swaps, sp + s.splices, ch + s.churn);
                }
                (sw, sp, ch)
            }
            Request::Add { id, dist } => {
                let s = st.add(*id, dist)?;
                (s.swaps, s.splices, s.churn)
            }
            Request::Del { id } => {
                let s = st.remove(*id)?;
                (s.swaps, s.splices, s.churn)
            }
        };
        let mut row = c.row(t);
        (row.swaps, row.splices, row.churn) = (swaps, splices, churn);
        row.cost = st.cost();
        for &u in st.steiner() {
            if st.tree().degree(u) < 3 {
                row.fails.push(format!("Steiner vertex {u} has degree {}", st.tree().degree(u)));
            }
        }
        c.measure(&mut row, st.metric(), st.alive());
        if row.cost as u128 > 4 * row.mst as u128 {
            row.fails.push(format!("cost {} > 4·MST {}", row.cost, row.mst));
        }
        if cfg.checks == Checks::Full {
            row.fails.extend(st.violations().into_iter().filter(|f| !f.starts_with("Steiner vertex") && !f.starts_with("cost")));
            row.fails.extend(st.potential_violations());
        }
        c.push(row)?;
    }
    c.summary.vertices = st.metric().len();
    let fails = if cfg.checks == Checks::Fast { st.potential_violations() } else { Vec::new() };
    c.finish(fails)
}
