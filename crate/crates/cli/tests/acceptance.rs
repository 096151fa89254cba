//! Acceptance harness. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tohtn_core::hddl;
use tohtn_core::inference::Inference;
use tohtn_core::manifest::{parse_manifest, Instance};
use tohtn_core::model::{Problem, State};
use tohtn_core::planner::{plan, PlanOutcome, PlannerConfig};
use tohtn_core::score::{ipc_score, quality_score};
use tohtn_oracle::{random_problem, reachable_states, refinements, solvable, RandomParams};
use tohtn_sat::amo::REGISTRY;
use tohtn_sat::{Lit, Session, SolveOutcome};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn suite() -> Vec<(Instance, Problem)> {
    let base = fixtures();
    let text = std::fs::read_to_string(base.join("suite.manifest")).unwrap();
    parse_manifest(&text, &base)
        .unwrap()
        .into_iter()
        .map(|i| {
            let p = hddl::load(&i.domain, i.problem.as_deref(), &Default::default()).unwrap();
            (i, p)
        })
        .collect()
}

fn instance(name: &str) -> Instance {
    suite().into_iter().find(|(i, _)| i.name == name).unwrap().0
}

fn tohtn(inst: &Instance, extra: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tohtn"));
    cmd.arg(&inst.domain);
    if let Some(p) = &inst.problem {
        cmd.arg(p);
    }
    cmd.args(["--timeout", "30"]).args(extra);
    cmd.output().expect("run tohtn")
}

fn stats(inst: &Instance, dir: &Path, extra: &[&str]) -> (i32, Value) {
    let tag: String = extra.concat().chars().filter(char::is_ascii_alphanumeric).collect();
    let path = dir.join(format!("{}-{tag}.json", inst.name));
    let mut args = vec!["--stats", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = tohtn(inst, &args);
    let v = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    (out.status.code().unwrap(), v)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn sat_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut sat, total) = (0, 500);
    for k in 0..total {
        let n = rng.gen_range(3..=20u32);
        let m = rng.gen_range(n as usize * 3..=n as usize * 6);
        let clauses: Vec<Vec<i32>> = (0..m)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let v = rng.gen_range(1..=n) as i32;
                        if rng.gen_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect();
        // bit masks per clause: positive and negative occurrences
        let masks: Vec<(u32, u32)> = clauses
            .iter()
            .map(|c| {
                c.iter().fold((0, 0), |(p, q), &x| {
                    let b = 1 << (x.unsigned_abs() - 1);
                    if x > 0 {
                        (p | b, q)
                    } else {
                        (p, q | b)
                    }
                })
            })
            .collect();
        let truth = (0u32..1 << n).any(|a| masks.iter().all(|&(p, q)| a & p != 0 || !a & q != 0));
        let mut s = Session::default();
        for _ in 0..n {
            s.new_var();
        }
        for c in &clauses {
            let lits: Vec<Lit> = c.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect();
            s.add_clause(&lits).unwrap();
        }
        let got = s.solve(&[]).unwrap() == SolveOutcome::Sat;
        ensure(got == truth, format!("instance {k}: solver {got}, truth table {truth}"))?;
        if got {
            let model = s.model().unwrap();
            ensure(s.clauses().iter().all(|c| model.satisfies(c)), format!("instance {k}: bad model"))?;
            sat += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, format!("took {secs:.1}s"))?;
    Ok(format!("{total}/{total} agree ({sat} sat), {secs:.2}s"))
}

fn amo_projection() -> Check {
    for (name, cfg) in REGISTRY {
        for n in 2..=8u32 {
            let mut s = Session::default();
            let vars: Vec<Lit> = (0..n).map(|_| s.new_var()).collect();
            cfg.encoder().encode(&mut s, &vars).unwrap();
            let mut count = 0;
            while s.solve(&[]).unwrap() == SolveOutcome::Sat {
                count += 1;
                let m = s.model().unwrap();
                let block: Vec<Lit> = vars.iter().map(|&v| if m.lit(v) { !v } else { v }).collect();
                s.add_clause(&block).unwrap();
            }
            ensure(count == n + 1, format!("{name} n={n}: {count} projected models"))?;
        }
    }
    Ok(format!("{} schemes, n = 2..8", REGISTRY.len()))
}

fn soundness(dir: &Path) -> Check {
    let mut plans = 0;
    let mut groups = std::collections::BTreeSet::new();
    for (inst, _) in suite() {
        groups.insert(inst.group.clone());
        for mode in ["greedy", "bfs"] {
            let path = dir.join(format!("{}-{mode}.plan", inst.name));
            let out = tohtn(&inst, &["--mode", mode, "--plan", path.to_str().unwrap()]);
            match out.status.code() {
                Some(0) => {
                    let check = tohtn(&inst, &["--validate-only", path.to_str().unwrap()]);
                    ensure(
                        check.status.code() == Some(0),
                        format!("{} {mode}: {}", inst.name, String::from_utf8_lossy(&check.stdout)),
                    )?;
                    plans += 1;
                }
                Some(1) => ensure(inst.name == "unsolvable", format!("{} {mode}: unsolvable", inst.name))?,
                c => return Err(format!("{} {mode}: exit {c:?}", inst.name)),
            }
        }
    }
    ensure(groups.len() >= 8, format!("only {} domains", groups.len()))?;
    Ok(format!("{plans} plans over {} domains, 0 violations", groups.len()))
}

fn completeness() -> Check {
    let start = Instant::now();
    let prm = RandomParams::default();
    let mut checked = 0;
    let (mut yes, mut no) = (0, 0);
    for seed in 0.. {
        if checked == 20 {
            break;
        }
        let p = random_problem(1000 + seed, &prm);
        let Some(truth) = solvable(&p, 5, false, 10_000) else { continue };
        let r = plan(&p, &PlannerConfig::default()).unwrap();
        let got = match r.outcome {
            PlanOutcome::Solved(_) => true,
            PlanOutcome::Unsolvable => false,
            PlanOutcome::Timeout => return Err(format!("seed {seed}: timeout")),
        };
        ensure(got == truth, format!("seed {seed}: planner {got}, enumeration {truth}"))?;
        checked += 1;
        if truth {
            yes += 1;
        } else {
            no += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1}s"))?;
    Ok(format!("20/20 agree ({yes} solvable, {no} unsolvable), {secs:.2}s"))
}

fn guidance(dir: &Path) -> Check {
    let mut parts = Vec::new();
    for w in [4, 8, 16] {
        let inst = instance(&format!("wide{w}"));
        let mut dev = Vec::new();
        for mode in ["greedy", "bfs"] {
            let t = Instant::now();
            let (code, v) = stats(&inst, dir, &["--mode", mode]);
            let secs = t.elapsed().as_secs_f64();
            ensure(code == 0, format!("w={w} {mode}: exit {code}"))?;
            ensure(secs < 10.0, format!("w={w} {mode}: {secs:.1}s"))?;
            dev.push(v["methods_developed"].as_u64().unwrap());
        }
        ensure(2 * dev[0] <= dev[1], format!("w={w}: greedy {} vs bfs {}", dev[0], dev[1]))?;
        parts.push(format!("w={w} {}/{}", dev[0], dev[1]));
    }
    Ok(parts.join(", "))
}

fn all_states(n: usize) -> Vec<State> {
    (0..1u32 << n)
        .map(|bits| State::from_facts(n, (0..n).filter(|&f| bits >> f & 1 == 1)))
        .collect()
}

fn inference() -> Check {
    let (mut tasks, mut refs) = (0, 0);
    for (inst, p) in suite() {
        let inf = Inference::compute(&p, false);
        let states = if p.facts.len() <= 12 {
            all_states(p.facts.len())
        } else {
            reachable_states(&p, 100_000).ok_or(format!("{}: state space too large", inst.name))?
        };
        for t in 0..p.tasks.len() {
            tasks += 1;
            let prof = &inf.profiles[t];
            let r = refinements(&p, t, 6, false, 100_000);
            for plan in &r.plans {
                refs += 1;
                for &a in plan {
                    let act = &p.actions[a];
                    ensure(
                        act.eff_pos.iter().all(|f| prof.poss_eff_pos.contains(f))
                            && act.eff_neg.iter().all(|f| prof.poss_eff_neg.contains(f)),
                        format!("{}: {} escapes poss_eff", p.tasks[t].label(), act.label()),
                    )?;
                }
                for s in states.iter().filter(|s| !s.holds_all(&prof.mand_pre)) {
                    ensure(
                        !matches!(p.apply_seq(s, plan), Ok(Some(_))),
                        format!("{}: runs without its mandatory preconditions", p.tasks[t].label()),
                    )?;
                }
            }
        }
    }
    Ok(format!("{tasks} tasks, {refs} refinements, 0 violations"))
}

fn mutexes(dir: &Path) -> Check {
    let mut groups = 0;
    for (inst, p) in suite() {
        let inf = Inference::compute(&p, true);
        let states = reachable_states(&p, 100_000).ok_or(format!("{}: state space too large", inst.name))?;
        for g in &inf.mutexes {
            groups += 1;
            for s in &states {
                let n = g.0.iter().filter(|&&f| s.contains(f)).count();
                ensure(n <= 1, format!("{}: group {:?} violated", inst.name, g.0))?;
            }
        }
        let (with, _) = stats(&inst, dir, &[]);
        let (without, _) = stats(&inst, dir, &["--no-mutex"]);
        ensure(with == without, format!("{}: exit {with} vs {without} with --no-mutex", inst.name))?;
    }
    ensure(groups > 0, "no mutex groups inferred")?;
    Ok(format!("{groups} group(s) hold; --no-mutex verdicts identical"))
}

fn reinsertion(dir: &Path) -> Check {
    let (code, v) = stats(&instance("reinsert"), dir, &[]);
    ensure(code == 0, format!("reinsert: exit {code}"))?;
    ensure(
        v["blocked_phase_exhausted"] == true && v["reinsertion_rounds"] == 1,
        format!("reinsert: {} / {}", v["blocked_phase_exhausted"], v["reinsertion_rounds"]),
    )?;
    let (code, v) = stats(&instance("tower"), dir, &[]);
    ensure(code == 0, format!("tower: exit {code}"))?;
    ensure(v["reinsertion_rounds"] == 0, "tower needed reinsertion")?;
    ensure(v["blocked_pairs"].as_u64() > Some(0), "tower blocked nothing")?;
    Ok("nested instance solved after 1 reinsertion; tower solved with none".into())
}

fn scoring() -> Check {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let cases = [
        (ipc_score(1.0, 600.0, true).unwrap(), 1.0),
        (ipc_score(600.0, 600.0, true).unwrap(), 0.0),
        (ipc_score(600f64.sqrt(), 600.0, true).unwrap(), 0.5),
        (ipc_score(5.0, 600.0, false).unwrap(), 0.0),
        (quality_score(7, 7, true), 1.0),
        (quality_score(14, 7, true), 0.5),
        (quality_score(7, 7, false), 0.0),
        (quality_score(0, 0, true), 1.0),
        (quality_score(3, 0, true), 0.0),
    ];
    for (i, (got, want)) in cases.iter().enumerate() {
        ensure(close(*got, *want), format!("case {i}: {got} != {want}"))?;
    }
    ensure(ipc_score(1.0, 1.0, true).is_err(), "T = 1 accepted")?;
    Ok(format!("{} analytic cases", cases.len()))
}

fn determinism(dir: &Path) -> Check {
    let mut n = 0;
    for (inst, _) in suite() {
        for mode in ["greedy", "bfs"] {
            let mut runs = Vec::new();
            for k in 0..2 {
                let plan = dir.join(format!("det-{}-{mode}-{k}.plan", inst.name));
                let (_, v) = stats(&inst, dir, &["--mode", mode, "--seed", "42", "--plan", plan.to_str().unwrap()]);
                let text = std::fs::read(&plan).unwrap_or_default();
                runs.push((text, v["methods_developed"].clone()));
            }
            ensure(runs[0] == runs[1], format!("{} {mode} differs between runs", inst.name))?;
            n += 1;
        }
    }
    Ok(format!("{n} run pairs identical"))
}

fn walkthrough(dir: &Path) -> Check {
    let (code, v) = stats(&instance("seven-actions"), dir, &[]);
    ensure(code == 0, format!("exit {code}"))?;
    let rp = &v["relaxed_plans"];
    ensure(rp[0] == serde_json::json!(["T_root"]), format!("round 1: {}", rp[0]))?;
    ensure(
        rp[1] == serde_json::json!(["A_0", "T_2"]) || rp[1] == serde_json::json!(["T_3", "A_1", "T_5"]),
        format!("round 2: {}", rp[1]),
    )?;
    ensure(v["plan_length"] == 3, format!("plan length {}", v["plan_length"]))?;
    Ok(format!("relaxed plans {} then {}, 3-action plan", rp[0], rp[1]))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: Vec<Criterion> = vec![
        ("SAT oracle agreement", Box::new(sat_oracle)),
        ("AMO projection equivalence", Box::new(amo_projection)),
        ("planner soundness", Box::new(|| soundness(d))),
        ("planner completeness", Box::new(completeness)),
        ("guidance trend", Box::new(|| guidance(d))),
        ("inference soundness", Box::new(inference)),
        ("mutex validity", Box::new(|| mutexes(d))),
        ("reinsertion", Box::new(|| reinsertion(d))),
        ("scoring formulas", Box::new(scoring)),
        ("determinism", Box::new(|| determinism(d))),
        ("walkthrough fidelity", Box::new(|| walkthrough(d))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
