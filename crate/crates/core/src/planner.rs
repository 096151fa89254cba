//! Search loop: alternate solution queries with guided expansion.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;
use tohtn_sat::{backend_by_name, AmoConfig, SatError};

use crate::dt::DecompositionTree;
use crate::encoder::{EncodeError, Encoder, EncoderConfig, QueryOutcome, QueryRecord};
use crate::inference::Inference;
use crate::model::Problem;
use crate::pdt::{Pdt, PdtError, SlotId};
use crate::verify::{verify, Violation};

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Pdt(#[from] PdtError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("unknown expansion strategy `{0}`")]
    UnknownStrategy(String),
    #[error("solver returned a plan the validator rejects: {0:?}")]
    Rejected(Vec<Violation>),
    #[error("relaxed model without abstract leaves at layer {0}")]
    NoTargets(usize),
}

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    /// Registered expansion strategy, see [`STRATEGIES`].
    pub mode: String,
    pub amo: AmoConfig,
    pub mutex: bool,
    pub mandpre_prune: bool,
    /// Block recursive methods in the first phase.
    pub blocking: bool,
    pub max_rounds: Option<usize>,
    pub timeout: Option<Duration>,
    pub seed: u64,
    pub backend: String,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            mode: "greedy".into(),
            amo: AmoConfig::default(),
            mutex: true,
            mandpre_prune: true,
            blocking: true,
            max_rounds: None,
            timeout: Some(Duration::from_secs(600)),
            seed: 0,
            backend: "cdcl".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanOutcome {
    Solved(DecompositionTree),
    Unsolvable,
    Timeout,
}

impl PlanOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            PlanOutcome::Solved(_) => "solved",
            PlanOutcome::Unsolvable => "unsolvable",
            PlanOutcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunStats {
    pub mode: String,
    pub amo: String,
    pub outcome: String,
    pub methods_developed: usize,
    pub rounds: usize,
    pub layers: usize,
    pub reinsertion_rounds: usize,
    /// The first phase ran out of candidates while methods were blocked.
    pub blocked_phase_exhausted: bool,
    pub blocked_pairs: usize,
    pub mutex_groups: usize,
    pub vars: u32,
    pub clauses: usize,
    pub plan_length: Option<usize>,
    /// Leaf labels of each relaxed plan used for expansion, in order.
    pub relaxed_plans: Vec<Vec<String>>,
    pub queries: Vec<QueryRecord>,
    pub search_seconds: f64,
}

/// Chooses what to expand once the solution query of a layer failed.
pub trait ExpansionStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn select(&self, search: &mut Search<'_>) -> Result<Selection, PlannerError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Expand(Vec<SlotId>),
    /// No extension of the current structure can hold a solution.
    Exhausted,
    Interrupted,
}

/// Expand the abstract leaves of the first relaxed solution found.
pub struct Greedy;

/// Expand every pending slot; never pose relaxed queries.
pub struct BreadthFirst;

impl ExpansionStrategy for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn select(&self, s: &mut Search<'_>) -> Result<Selection, PlannerError> {
        match s.enc.solve_relaxed(s.problem, &s.pdt, s.deadline)? {
            QueryOutcome::Unsat => Ok(Selection::Exhausted),
            QueryOutcome::Interrupted => Ok(Selection::Interrupted),
            QueryOutcome::Found(c) => {
                if c.targets.is_empty() {
                    return Err(PlannerError::NoTargets(s.pdt.num_layers() - 1));
                }
                s.stats
                    .relaxed_plans
                    .push(c.plan.iter().map(|&t| s.problem.task_ref_label(t)).collect());
                Ok(Selection::Expand(c.targets))
            }
        }
    }
}

impl ExpansionStrategy for BreadthFirst {
    fn name(&self) -> &'static str {
        "bfs"
    }

    fn select(&self, s: &mut Search<'_>) -> Result<Selection, PlannerError> {
        let pending = s.pdt.pending();
        Ok(if pending.is_empty() {
            Selection::Exhausted
        } else {
            Selection::Expand(pending)
        })
    }
}

pub type StrategyCtor = fn() -> Box<dyn ExpansionStrategy>;

pub static STRATEGIES: &[(&str, StrategyCtor)] = &[("greedy", || Box::new(Greedy)), ("bfs", || Box::new(BreadthFirst))];

pub fn strategy_by_name(name: &str) -> Result<Box<dyn ExpansionStrategy>, PlannerError> {
    STRATEGIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ctor)| ctor())
        .ok_or_else(|| PlannerError::UnknownStrategy(name.to_string()))
}

/// State visible to a strategy during one phase.
pub struct Search<'a> {
    pub problem: &'a Problem,
    pub inference: &'a Inference,
    pub pdt: Pdt,
    pub enc: Encoder,
    pub deadline: Option<Instant>,
    pub stats: &'a mut RunStats,
}

pub struct PlanResult {
    pub outcome: PlanOutcome,
    pub stats: RunStats,
    /// Structure and encoder of the last phase.
    pub pdt: Pdt,
    pub encoder: Encoder,
}

pub fn plan(p: &Problem, cfg: &PlannerConfig) -> Result<PlanResult, PlannerError> {
    let inf = Inference::compute(p, cfg.mutex);
    plan_with(p, &inf, cfg)
}

pub fn plan_with(p: &Problem, inf: &Inference, cfg: &PlannerConfig) -> Result<PlanResult, PlannerError> {
    let strategy = strategy_by_name(&cfg.mode)?;
    let start = Instant::now();
    let deadline = cfg.timeout.map(|t| start + t);
    let mut stats = RunStats {
        mode: strategy.name().to_string(),
        amo: cfg.amo.name().to_string(),
        mutex_groups: inf.mutexes.len(),
        ..RunStats::default()
    };
    let enc_cfg = EncoderConfig {
        amo: cfg.amo,
        mandpre_prune: cfg.mandpre_prune,
    };
    let mut developed_before = 0;
    let mut phase = 0;
    loop {
        let mut pdt = Pdt::new(p, cfg.blocking && phase == 0);
        pdt.relaxation_round = phase;
        let enc = Encoder::new(p, inf, &pdt, enc_cfg, backend_by_name(&cfg.backend, cfg.seed)?)?;
        let mut search = Search {
            problem: p,
            inference: inf,
            pdt,
            enc,
            deadline,
            stats: &mut stats,
        };
        let outcome = run_phase(&mut search, strategy.as_ref(), cfg)?;
        let Search { pdt, enc, .. } = search;
        stats.methods_developed = developed_before + pdt.methods_developed;
        stats.layers = pdt.num_layers();
        stats.blocked_pairs = stats.blocked_pairs.max(pdt.blocked.len());
        let finish = |outcome: PlanOutcome, mut stats: RunStats, pdt: Pdt, enc: Encoder| {
            stats.outcome = outcome.name().to_string();
            stats.vars = enc.num_vars();
            stats.clauses = enc.num_clauses();
            stats.queries.extend(enc.history.iter().cloned());
            stats.search_seconds = start.elapsed().as_secs_f64();
            if let PlanOutcome::Solved(dt) = &outcome {
                stats.plan_length = dt
                    .primitive_plan()
                    .map(|pl| pl.iter().filter(|&&a| !p.actions[a].guard).count());
            }
            Ok(PlanResult {
                outcome,
                stats,
                pdt,
                encoder: enc,
            })
        };
        match outcome {
            PhaseEnd::Exhausted if phase == 0 && !pdt.blocked.is_empty() => {
                stats.blocked_phase_exhausted = true;
                stats.reinsertion_rounds += 1;
                stats.queries.extend(enc.history.iter().cloned());
                developed_before += pdt.methods_developed;
                phase += 1;
            }
            PhaseEnd::Exhausted => return finish(PlanOutcome::Unsolvable, stats, pdt, enc),
            PhaseEnd::Interrupted => return finish(PlanOutcome::Timeout, stats, pdt, enc),
            PhaseEnd::Solved(dt) => return finish(PlanOutcome::Solved(dt), stats, pdt, enc),
        }
    }
}

enum PhaseEnd {
    Solved(DecompositionTree),
    Exhausted,
    Interrupted,
}

fn run_phase(s: &mut Search<'_>, strategy: &dyn ExpansionStrategy, cfg: &PlannerConfig) -> Result<PhaseEnd, PlannerError> {
    loop {
        if s.deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(PhaseEnd::Interrupted);
        }
        if cfg.max_rounds.is_some_and(|m| s.stats.rounds >= m) {
            return Ok(PhaseEnd::Interrupted);
        }
        s.stats.rounds += 1;
        match s.enc.solve_solution(s.problem, &s.pdt, s.deadline)? {
            QueryOutcome::Found(c) => {
                verify(s.problem, &c.tree).map_err(PlannerError::Rejected)?;
                return Ok(PhaseEnd::Solved(c.tree));
            }
            QueryOutcome::Interrupted => return Ok(PhaseEnd::Interrupted),
            QueryOutcome::Unsat => {}
        }
        match strategy.select(s)? {
            Selection::Expand(targets) => {
                s.pdt.expand(s.problem, &s.inference.recursion, &targets)?;
                s.enc.encode_layer(s.problem, s.inference, &s.pdt)?;
            }
            Selection::Exhausted => return Ok(PhaseEnd::Exhausted),
            Selection::Interrupted => return Ok(PhaseEnd::Interrupted),
        }
    }
}
