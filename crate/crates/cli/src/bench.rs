use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use tohtn_core::manifest::{parse_manifest, Instance};
use tohtn_core::planner::PlanOutcome;
use tohtn_core::score::{ipc_score, quality_score, ScoreRow};

use crate::run::{self, Solved};
use crate::{PlannerArgs, Status, Switch};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Instance list: `name group domain [problem]` per line.
    pub manifest: PathBuf,
    /// Comma-separated configurations: a mode optionally followed by
    /// `+nomutex`, `+mandpre=off` or `+amo=NAME`.
    #[arg(long, default_value = "greedy,bfs", value_delimiter = ',')]
    pub configs: Vec<String>,
    /// Score table; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Per-domain sums; standard error when absent.
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub planner: PlannerArgs,
}

#[derive(Debug, Serialize)]
pub struct SummaryRow {
    pub domain: String,
    pub config: String,
    pub instances: usize,
    pub solved: usize,
    pub ipc_score: f64,
    pub quality_score: f64,
    pub ipc_normalized: f64,
    pub quality_normalized: f64,
}

/// Applies a configuration name such as `greedy+amo=binary+nomutex`.
pub fn apply_config(base: &PlannerArgs, name: &str) -> Result<PlannerArgs> {
    let mut a = base.clone();
    let mut parts = name.split('+');
    a.mode = parts.next().unwrap_or_default().to_string();
    if !["greedy", "bfs"].contains(&a.mode.as_str()) {
        bail!("unknown mode `{}` in configuration `{name}`", a.mode);
    }
    for part in parts {
        match part.split_once('=') {
            None if part == "nomutex" => a.no_mutex = true,
            Some(("amo", v)) => a.amo = v.to_string(),
            Some(("mandpre", "on")) => a.mandpre_prune = Switch::On,
            Some(("mandpre", "off")) => a.mandpre_prune = Switch::Off,
            _ => bail!("unknown option `{part}` in configuration `{name}`"),
        }
    }
    run::planner_config(&a, None)?;
    Ok(a)
}

struct Run {
    instance: usize,
    config: usize,
    solved: bool,
    seconds: f64,
    plan_length: Option<usize>,
    methods_developed: usize,
}

fn run_one(inst: &Instance, a: &PlannerArgs) -> (bool, f64, Option<usize>, usize) {
    match run::solve(&inst.domain, inst.problem.as_deref(), a) {
        Ok(Ok(Solved { result, report, .. })) => {
            let solved = matches!(result.outcome, PlanOutcome::Solved(_));
            let st = &result.stats;
            (solved, report.total_seconds, st.plan_length, st.methods_developed)
        }
        Ok(Err(e)) | Err(e) => {
            eprintln!("{}: {e:#}", inst.name);
            (false, 0.0, None, 0)
        }
    }
}

fn score(
    instances: &[Instance],
    configs: &[String],
    runs: &[Run],
    limit: f64,
) -> Result<(Vec<ScoreRow>, Vec<SummaryRow>)> {
    // best length over all configurations, per instance
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.solved) {
        if let Some(len) = r.plan_length {
            let e = best.entry(r.instance).or_insert(len);
            *e = (*e).min(len);
        }
    }
    let mut rows = Vec::new();
    for r in runs {
        let inst = &instances[r.instance];
        let c_ref = best.get(&r.instance).copied().unwrap_or(0);
        rows.push(ScoreRow {
            instance: inst.name.clone(),
            domain: inst.group.clone(),
            config: configs[r.config].clone(),
            solved: r.solved,
            seconds: r.seconds,
            plan_length: r.plan_length,
            methods_developed: r.methods_developed,
            ipc_score: ipc_score(r.seconds, limit, r.solved)?,
            quality_score: quality_score(r.plan_length.unwrap_or(0), c_ref, r.solved),
        });
    }

    let mut groups: BTreeMap<(String, String), Vec<&ScoreRow>> = BTreeMap::new();
    for row in &rows {
        groups
            .entry((row.config.clone(), row.domain.clone()))
            .or_default()
            .push(row);
    }
    let mut summary = Vec::new();
    for config in configs {
        let mut total = SummaryRow {
            domain: "*".into(),
            config: config.clone(),
            instances: 0,
            solved: 0,
            ipc_score: 0.0,
            quality_score: 0.0,
            ipc_normalized: 0.0,
            quality_normalized: 0.0,
        };
        for ((c, domain), rs) in &groups {
            if c != config {
                continue;
            }
            let n = rs.len();
            let ipc: f64 = rs.iter().map(|r| r.ipc_score).sum();
            let quality: f64 = rs.iter().map(|r| r.quality_score).sum();
            let row = SummaryRow {
                domain: domain.clone(),
                config: config.clone(),
                instances: n,
                solved: rs.iter().filter(|r| r.solved).count(),
                ipc_score: ipc,
                quality_score: quality,
                ipc_normalized: ipc / n as f64,
                quality_normalized: quality / n as f64,
            };
            total.instances += row.instances;
            total.solved += row.solved;
            total.ipc_score += row.ipc_score;
            total.quality_score += row.quality_score;
            total.ipc_normalized += row.ipc_normalized;
            total.quality_normalized += row.quality_normalized;
            summary.push(row);
        }
        summary.push(total);
    }
    Ok((rows, summary))
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T], fallback: Box<dyn io::Write>) -> Result<()> {
    let sink: Box<dyn io::Write> = match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("cannot write {}", p.display()))?),
        None => fallback,
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&args.manifest).with_context(|| format!("cannot read {}", args.manifest.display()))?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let instances = parse_manifest(&text, base)?;
    let configs: Vec<(String, PlannerArgs)> = args
        .configs
        .iter()
        .map(|c| Ok((c.clone(), apply_config(&args.planner, c)?)))
        .collect::<Result<_>>()?;
    ipc_score(1.0, args.planner.timeout, true)?;

    let mut runs = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for (k, (name, a)) in configs.iter().enumerate() {
            let (solved, seconds, plan_length, methods_developed) = run_one(inst, a);
            eprintln!("{} {name}: {} in {seconds:.3}s", inst.name, if solved { "solved" } else { "unsolved" });
            runs.push(Run {
                instance: i,
                config: k,
                solved,
                seconds,
                plan_length,
                methods_developed,
            });
        }
    }
    let names: Vec<String> = configs.into_iter().map(|(n, _)| n).collect();
    let (rows, summary) = score(&instances, &names, &runs, args.planner.timeout)?;
    write_csv(args.out.as_deref(), &rows, Box::new(io::stdout()))?;
    write_csv(args.summary.as_deref(), &summary, Box::new(io::stderr()))?;
    Ok(())
}

pub fn main(args: &BenchArgs) -> Status {
    match bench(args) {
        Ok(()) => Status::Solved,
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::InputError
        }
    }
}
