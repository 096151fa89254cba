//! Test instance generators.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tohtn_core::model::{AbstractTask, Action, Fact, Method, Problem, State, TaskRef};

#[derive(Debug, Clone, Copy)]
pub struct RandomParams {
    pub facts: usize,
    pub actions: usize,
    /// Abstract tasks below the root, split evenly over `levels`.
    pub tasks: usize,
    pub levels: usize,
    pub max_methods: usize,
    pub max_subtasks: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            facts: 5,
            actions: 6,
            tasks: 4,
            levels: 2,
            max_methods: 2,
            max_subtasks: 2,
        }
    }
}

/// A random non-recursive problem. Tasks only refer to tasks of deeper
/// levels, so every refinement has at most `levels + 1` method layers.
pub fn random_problem(seed: u64, prm: &RandomParams) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = prm.facts;
    let facts = (0..nf).map(|i| Fact::new(format!("f{i}"), vec![])).collect();
    let pick = |rng: &mut ChaCha8Rng, lo: usize, hi: usize| -> Vec<usize> {
        let k = rng.gen_range(lo..=hi);
        let mut all: Vec<usize> = (0..nf).collect();
        all.shuffle(rng);
        all.truncate(k);
        all
    };
    let actions = (0..prm.actions)
        .map(|i| {
            let pre = pick(&mut rng, 0, 2);
            let add = pick(&mut rng, 1, 2);
            let del = pick(&mut rng, 0, 1);
            Action::new(format!("a{i}"), pre, add, del)
        })
        .collect::<Vec<_>>();

    // task 0 is the root at level 0; the rest are spread over 1..=levels
    let per = prm.tasks.div_ceil(prm.levels.max(1)).max(1);
    let level_of = |t: usize| if t == 0 { 0 } else { 1 + (t - 1) / per };
    let ntasks = prm.tasks + 1;
    let mut tasks: Vec<AbstractTask> = (0..ntasks)
        .map(|t| AbstractTask {
            name: format!("t{t}"),
            args: vec![],
            methods: vec![],
        })
        .collect();
    let mut methods = Vec::new();
    for (t, task) in tasks.iter_mut().enumerate() {
        let deeper: Vec<usize> = (0..ntasks).filter(|&u| level_of(u) > level_of(t)).collect();
        let nm = rng.gen_range(1..=prm.max_methods);
        for _ in 0..nm {
            let len = rng.gen_range(if t == 0 { 1 } else { 0 }..=prm.max_subtasks);
            let subtasks = (0..len)
                .map(|_| {
                    if !deeper.is_empty() && rng.gen_bool(0.5) {
                        TaskRef::Abstract(*deeper.choose(&mut rng).unwrap())
                    } else {
                        TaskRef::Primitive(rng.gen_range(0..prm.actions))
                    }
                })
                .collect();
            task.methods.push(methods.len());
            methods.push(Method {
                name: format!("m{}", methods.len()),
                args: vec![],
                task: t,
                subtasks,
            });
        }
    }
    let init = State::from_facts(nf, pick(&mut rng, 1, 2));
    let goal = {
        let mut g = pick(&mut rng, 1, 2);
        g.sort_unstable();
        g
    };
    Problem {
        facts,
        actions,
        tasks,
        methods,
        root: 0,
        init,
        goal,
    }
}

/// Ground text of the wide-choice family. A chain of `depth` tasks where
/// each task has one useful method and `width` decoy methods; every decoy
/// leads to a task with three action-only refinements that never advance
/// the chain.
pub fn wide_choice(width: usize, depth: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "; wide-choice family, width {width}, depth {depth}");
    for i in 0..depth {
        let _ = writeln!(out, "action step_{i} pre s{i} add s{} del s{i}", i + 1);
        for j in 0..width {
            for k in 0..3 {
                let _ = writeln!(out, "action idle_{i}_{j}_{k} pre s{i} add junk{i}");
            }
        }
    }
    for i in 0..depth {
        if i + 1 < depth {
            let _ = writeln!(out, "method useful_{i} T{i} : step_{i} T{}", i + 1);
        } else {
            let _ = writeln!(out, "method useful_{i} T{i} : step_{i}");
        }
        for j in 0..width {
            let _ = writeln!(out, "method decoy_{i}_{j} T{i} : D{i}_{j}");
            for k in 0..3 {
                let _ = writeln!(out, "method idle_{i}_{j}_{k} D{i}_{j} : idle_{i}_{j}_{k}");
            }
        }
    }
    let _ = writeln!(out, "init s0");
    let _ = writeln!(out, "goal s{depth}");
    let _ = writeln!(out, "root T0");
    out
}
