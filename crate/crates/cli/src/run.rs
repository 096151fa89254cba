use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use tohtn_core::hddl::{self, GroundOptions};
use tohtn_core::inference::Inference;
use tohtn_core::model::Problem;
use tohtn_core::plan_format::{parse_plan, write_plan};
use tohtn_core::planner::{plan_with, PlanOutcome, PlanResult, PlannerConfig, RunStats};
use tohtn_core::verify::verify;
use tohtn_sat::AmoConfig;

use crate::{PlannerArgs, RunArgs, Status, Switch};

#[derive(Debug, Serialize)]
pub struct Report {
    pub domain: String,
    pub problem: Option<String>,
    pub facts: usize,
    pub actions: usize,
    pub tasks: usize,
    pub methods: usize,
    pub ground_seconds: f64,
    pub inference_seconds: f64,
    /// Wall time of the whole pipeline, grounding included.
    pub total_seconds: f64,
    #[serde(flatten)]
    pub run: RunStats,
}

pub struct Solved {
    pub problem: Problem,
    pub result: PlanResult,
    pub report: Report,
}

pub fn planner_config(a: &PlannerArgs, budget: Option<Duration>) -> Result<PlannerConfig> {
    Ok(PlannerConfig {
        mode: a.mode.clone(),
        amo: AmoConfig::from_name(&a.amo)?,
        mutex: !a.no_mutex,
        mandpre_prune: a.mandpre_prune == Switch::On,
        max_rounds: a.max_rounds,
        timeout: budget,
        seed: a.seed,
        ..PlannerConfig::default()
    })
}

pub fn timeout(a: &PlannerArgs) -> Result<Duration> {
    Duration::try_from_secs_f64(a.timeout).with_context(|| format!("invalid timeout {}", a.timeout))
}

pub fn load(domain: &Path, problem: Option<&Path>, a: &PlannerArgs) -> Result<Problem> {
    let opts = GroundOptions {
        max_instances: a.max_instances,
        ..GroundOptions::default()
    };
    Ok(hddl::load(domain, problem, &opts)?)
}

/// Loads, grounds and plans under one wall-clock budget. Errors are input
/// errors; planner failures come back inside the result.
pub fn solve(domain: &Path, problem: Option<&Path>, a: &PlannerArgs) -> Result<Result<Solved>> {
    let start = Instant::now();
    let limit = timeout(a)?;
    let p = load(domain, problem, a)?;
    let ground_seconds = start.elapsed().as_secs_f64();
    Ok(plan_loaded(p, a, start, limit, ground_seconds, domain, problem))
}

fn plan_loaded(
    p: Problem,
    a: &PlannerArgs,
    start: Instant,
    limit: Duration,
    ground_seconds: f64,
    domain: &Path,
    problem: Option<&Path>,
) -> Result<Solved> {
    let t = Instant::now();
    let inf = Inference::compute(&p, !a.no_mutex);
    let inference_seconds = t.elapsed().as_secs_f64();
    let cfg = planner_config(a, Some(limit.saturating_sub(start.elapsed())))?;
    let result = plan_with(&p, &inf, &cfg)?;
    let report = Report {
        domain: domain.display().to_string(),
        problem: problem.map(|p| p.display().to_string()),
        facts: p.facts.len(),
        actions: p.actions.len(),
        tasks: p.tasks.len(),
        methods: p.methods.len(),
        ground_seconds,
        inference_seconds,
        total_seconds: start.elapsed().as_secs_f64(),
        run: result.stats.clone(),
    };
    Ok(Solved {
        problem: p,
        result,
        report,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn main(args: &RunArgs) -> Status {
    let Some(domain) = args.domain.as_deref() else {
        eprintln!("error: missing DOMAIN");
        return Status::InputError;
    };
    let problem = args.problem.as_deref();
    if let Some(plan_file) = &args.validate_only {
        return validate(domain, problem, plan_file, &args.planner);
    }
    let solved = match solve(domain, problem, &args.planner) {
        Err(e) => {
            eprintln!("error: {e:#}");
            return Status::InputError;
        }
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            return Status::Internal;
        }
        Ok(Ok(s)) => s,
    };
    match emit(args, &solved) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::InputError
        }
    }
}

fn emit(args: &RunArgs, s: &Solved) -> Result<Status> {
    let p = &s.problem;
    let r = &s.result;
    if let Some(path) = &args.dump_profiles {
        let inf = Inference::compute(p, !args.planner.no_mutex);
        let text = inf.dump(p);
        if path.as_os_str() == "-" {
            eprint!("{text}");
        } else {
            write_file(path, &text)?;
        }
    }
    if let Some(path) = &args.stats {
        write_file(path, &serde_json::to_string_pretty(&s.report)?)?;
    }
    let tree = match &r.outcome {
        PlanOutcome::Solved(dt) => Some(dt),
        _ => None,
    };
    if let Some(path) = &args.emit_dot {
        write_file(path, &r.pdt.to_dot(p, tree))?;
    }
    if let Some(path) = &args.dump_cnf {
        let mut f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        r.encoder.write_dimacs(&mut f)?;
        f.flush()?;
    }
    let st = &r.stats;
    eprintln!(
        "{} after {:.3}s: {} rounds, {} layers, {} methods developed, {} reinsertions",
        st.outcome, s.report.total_seconds, st.rounds, st.layers, st.methods_developed, st.reinsertion_rounds
    );
    Ok(match tree {
        Some(dt) => {
            let text = write_plan(p, dt);
            print!("{text}");
            if let Some(path) = &args.plan {
                write_file(path, &text)?;
            }
            Status::Solved
        }
        None if r.outcome == PlanOutcome::Unsolvable => Status::Unsolvable,
        None => Status::Timeout,
    })
}

fn validate(domain: &Path, problem: Option<&Path>, plan_file: &Path, a: &PlannerArgs) -> Status {
    let loaded = load(domain, problem, a).and_then(|p| {
        let text = fs::read_to_string(plan_file).with_context(|| format!("cannot read {}", plan_file.display()))?;
        Ok((p, text))
    });
    let (p, text) = match loaded {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Status::InputError;
        }
    };
    match check(&p, &text) {
        Ok(()) => {
            println!("plan valid");
            Status::Solved
        }
        Err(e) => {
            println!("plan invalid");
            println!("{e:#}");
            Status::Unsolvable
        }
    }
}

fn check(p: &Problem, text: &str) -> Result<()> {
    let dt = parse_plan(p, text)?;
    if let Err(vs) = verify(p, &dt) {
        let lines: Vec<String> = vs.iter().map(|v| format!("  {v}")).collect();
        bail!("{} violation(s):\n{}", vs.len(), lines.join("\n"));
    }
    Ok(())
}
