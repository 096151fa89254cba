//! Reachability pruning of a ground problem.
//!
//! Alternates a top-down hierarchy sweep from the root with a
//! delete-relaxed forward closure over the surviving actions, until the
//! hierarchically reachable part stops shrinking.

use fixedbitset::FixedBitSet;

use crate::model::{AbstractTask, Action, Method, Problem, State, TaskRef};

struct Reach {
    tasks: FixedBitSet,
    methods: FixedBitSet,
    actions: FixedBitSet,
}

fn hierarchy(p: &Problem, allowed: &FixedBitSet) -> Reach {
    let mut r = Reach {
        tasks: FixedBitSet::with_capacity(p.tasks.len()),
        methods: FixedBitSet::with_capacity(p.methods.len()),
        actions: FixedBitSet::with_capacity(p.actions.len()),
    };
    let mut stack = vec![p.root];
    r.tasks.insert(p.root);
    while let Some(t) = stack.pop() {
        for &m in &p.tasks[t].methods {
            if !allowed.contains(m) {
                continue;
            }
            r.methods.insert(m);
            for &s in &p.methods[m].subtasks {
                match s {
                    TaskRef::Primitive(a) => r.actions.insert(a),
                    TaskRef::Abstract(c) => {
                        if !r.tasks.put(c) {
                            stack.push(c);
                        }
                    }
                }
            }
        }
    }
    r
}

fn relaxed_closure(p: &Problem, actions: &FixedBitSet) -> FixedBitSet {
    let mut reached: FixedBitSet = p.init.facts().collect();
    reached.grow(p.facts.len());
    let mut changed = true;
    while changed {
        changed = false;
        for a in actions.ones() {
            let act = &p.actions[a];
            if act.precond.iter().all(|&f| reached.contains(f)) {
                for &f in &act.eff_pos {
                    changed |= !reached.put(f);
                }
            }
        }
    }
    reached
}

/// Methods whose every subtask is an applicable action or a refinable task.
fn alive_methods(p: &Problem, reach: &Reach, facts: &FixedBitSet) -> FixedBitSet {
    let mut alive_actions = FixedBitSet::with_capacity(p.actions.len());
    for a in reach.actions.ones() {
        if p.actions[a].precond.iter().all(|&f| facts.contains(f)) {
            alive_actions.insert(a);
        }
    }
    let mut alive_tasks = FixedBitSet::with_capacity(p.tasks.len());
    let mut alive = FixedBitSet::with_capacity(p.methods.len());
    let mut changed = true;
    while changed {
        changed = false;
        for m in reach.methods.ones() {
            if alive.contains(m) {
                continue;
            }
            let ok = p.methods[m].subtasks.iter().all(|s| match *s {
                TaskRef::Primitive(a) => alive_actions.contains(a),
                TaskRef::Abstract(t) => alive_tasks.contains(t),
            });
            if ok {
                alive.insert(m);
                alive_tasks.insert(p.methods[m].task);
                changed = true;
            }
        }
    }
    alive
}

/// Removes everything that cannot occur in a solution DT. An unrefinable
/// root survives with an empty method list.
pub fn prune(p: &Problem) -> Problem {
    let mut all = FixedBitSet::with_capacity(p.methods.len());
    all.insert_range(..);
    let mut reach = hierarchy(p, &all);
    loop {
        let facts = relaxed_closure(p, &reach.actions);
        let alive = alive_methods(p, &reach, &facts);
        let next = hierarchy(p, &alive);
        let stable = next.methods == reach.methods && next.tasks == reach.tasks && next.actions == reach.actions;
        reach = next;
        if stable {
            break;
        }
    }
    restrict(p, &reach)
}

fn remap(keep: &FixedBitSet) -> Vec<Option<usize>> {
    let mut map = vec![None; keep.len()];
    for (new, old) in keep.ones().enumerate() {
        map[old] = Some(new);
    }
    map
}

fn restrict(p: &Problem, reach: &Reach) -> Problem {
    let mut used = FixedBitSet::with_capacity(p.facts.len());
    for a in reach.actions.ones() {
        let act = &p.actions[a];
        for &f in act.precond.iter().chain(&act.eff_pos).chain(&act.eff_neg) {
            used.insert(f);
        }
    }
    for &g in &p.goal {
        used.insert(g);
    }
    let fmap = remap(&used);
    let amap = remap(&reach.actions);
    let tmap = remap(&reach.tasks);
    let mmap = remap(&reach.methods);
    let f = |x: &usize| fmap[*x].expect("used fact");

    let facts = used.ones().map(|i| p.facts[i].clone()).collect();
    let actions = reach
        .actions
        .ones()
        .map(|a| {
            let old = &p.actions[a];
            Action {
                name: old.name.clone(),
                args: old.args.clone(),
                precond: old.precond.iter().map(f).collect(),
                eff_pos: old.eff_pos.iter().map(f).collect(),
                eff_neg: old.eff_neg.iter().map(f).collect(),
                guard: old.guard,
            }
        })
        .collect();
    let tasks = reach
        .tasks
        .ones()
        .map(|t| AbstractTask {
            name: p.tasks[t].name.clone(),
            args: p.tasks[t].args.clone(),
            methods: p.tasks[t].methods.iter().filter_map(|&m| mmap[m]).collect(),
        })
        .collect();
    let methods = reach
        .methods
        .ones()
        .map(|m| {
            let old = &p.methods[m];
            Method {
                name: old.name.clone(),
                args: old.args.clone(),
                task: tmap[old.task].expect("task of kept method"),
                subtasks: old
                    .subtasks
                    .iter()
                    .map(|s| match *s {
                        TaskRef::Primitive(a) => TaskRef::Primitive(amap[a].expect("kept action")),
                        TaskRef::Abstract(t) => TaskRef::Abstract(tmap[t].expect("kept task")),
                    })
                    .collect(),
            }
        })
        .collect();
    let init = State::from_facts(used.count_ones(..), p.init.facts().filter_map(|x| fmap[x]));
    Problem {
        facts,
        actions,
        tasks,
        methods,
        root: tmap[p.root].expect("root kept"),
        init,
        goal: p.goal.iter().map(f).collect(),
    }
}
