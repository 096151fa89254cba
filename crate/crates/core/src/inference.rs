//! Per-task knowledge for the relaxed encoding: recursion structure,
//! possible effects, mandatory preconditions and mutex groups.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::model::{FactId, Problem, TaskId, TaskRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionInfo {
    /// SCC index per task. SCCs are numbered callees-first.
    pub scc: Vec<usize>,
    pub recursive: Vec<bool>,
    /// Tasks of each SCC, in ascending id order.
    pub components: Vec<Vec<TaskId>>,
}

impl RecursionInfo {
    pub fn same_scc(&self, a: TaskId, b: TaskId) -> bool {
        self.scc[a] == self.scc[b]
    }

    pub fn any_recursive(&self) -> bool {
        self.recursive.iter().any(|&r| r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskProfile {
    pub task: TaskId,
    pub mand_pre: Vec<FactId>,
    pub poss_eff_pos: Vec<FactId>,
    pub poss_eff_neg: Vec<FactId>,
}

/// Facts of which at most one holds in every reachable state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MutexGroup(pub Vec<FactId>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inference {
    pub recursion: RecursionInfo,
    pub profiles: Vec<TaskProfile>,
    pub mutexes: Vec<MutexGroup>,
}

impl Inference {
    pub fn compute(p: &Problem, mutex: bool) -> Self {
        let recursion = compute_recursion(p);
        let (pos, neg) = compute_poss_effects(p, &recursion);
        let mand = compute_mandatory_preconditions(p, &recursion);
        let profiles = (0..p.tasks.len())
            .map(|t| TaskProfile {
                task: t,
                mand_pre: mand[t].ones().collect(),
                poss_eff_pos: pos[t].ones().collect(),
                poss_eff_neg: neg[t].ones().collect(),
            })
            .collect();
        let mutexes = if mutex { compute_mutex_groups(p) } else { Vec::new() };
        Inference {
            recursion,
            profiles,
            mutexes,
        }
    }

    /// One line per task, then one line per mutex group.
    pub fn dump(&self, p: &Problem) -> String {
        let names = |fs: &[FactId]| fs.iter().map(|&f| p.facts[f].to_string()).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        for prof in &self.profiles {
            let _ = writeln!(
                out,
                "task {} recursive={} mand_pre=[{}] poss_eff_pos=[{}] poss_eff_neg=[{}]",
                p.tasks[prof.task].label(),
                self.recursion.recursive[prof.task],
                names(&prof.mand_pre),
                names(&prof.poss_eff_pos),
                names(&prof.poss_eff_neg)
            );
        }
        for g in &self.mutexes {
            let _ = writeln!(out, "mutex [{}]", names(&g.0));
        }
        out
    }
}

pub fn compute_recursion(p: &Problem) -> RecursionInfo {
    let mut g = DiGraph::<TaskId, ()>::with_capacity(p.tasks.len(), 0);
    let nodes: Vec<_> = (0..p.tasks.len()).map(|t| g.add_node(t)).collect();
    let mut self_loop = vec![false; p.tasks.len()];
    for m in &p.methods {
        for s in &m.subtasks {
            if let TaskRef::Abstract(c) = *s {
                if c == m.task {
                    self_loop[c] = true;
                }
                g.update_edge(nodes[m.task], nodes[c], ());
            }
        }
    }
    // tarjan_scc yields components in reverse topological order: callees first.
    let sccs = tarjan_scc(&g);
    let mut scc = vec![0; p.tasks.len()];
    let mut recursive = vec![false; p.tasks.len()];
    let mut components = Vec::with_capacity(sccs.len());
    for (i, comp) in sccs.iter().enumerate() {
        let mut tasks: Vec<TaskId> = comp.iter().map(|n| g[*n]).collect();
        tasks.sort_unstable();
        for &t in &tasks {
            scc[t] = i;
            recursive[t] = tasks.len() > 1 || self_loop[t];
        }
        components.push(tasks);
    }
    RecursionInfo {
        scc,
        recursive,
        components,
    }
}

/// Least fixpoint of the union equations, one SCC at a time.
pub fn compute_poss_effects(p: &Problem, r: &RecursionInfo) -> (Vec<FixedBitSet>, Vec<FixedBitSet>) {
    let nf = p.facts.len();
    let mut pos = vec![FixedBitSet::with_capacity(nf); p.tasks.len()];
    let mut neg = vec![FixedBitSet::with_capacity(nf); p.tasks.len()];
    for comp in &r.components {
        let mut changed = true;
        while changed {
            changed = false;
            for &t in comp {
                let mut add = pos[t].clone();
                let mut del = neg[t].clone();
                for &m in &p.tasks[t].methods {
                    for s in &p.methods[m].subtasks {
                        match *s {
                            TaskRef::Primitive(a) => {
                                add.extend(p.actions[a].eff_pos.iter().copied());
                                del.extend(p.actions[a].eff_neg.iter().copied());
                            }
                            TaskRef::Abstract(c) => {
                                add.union_with(&pos[c]);
                                del.union_with(&neg[c]);
                            }
                        }
                    }
                }
                if add != pos[t] || del != neg[t] {
                    pos[t] = add;
                    neg[t] = del;
                    changed = true;
                }
            }
        }
    }
    (pos, neg)
}

/// Greatest fixpoint of the first-subtask intersection equations.
pub fn compute_mandatory_preconditions(p: &Problem, r: &RecursionInfo) -> Vec<FixedBitSet> {
    let nf = p.facts.len();
    let mut full = FixedBitSet::with_capacity(nf);
    full.insert_range(..);
    let mut mand = vec![full.clone(); p.tasks.len()];
    for comp in &r.components {
        let mut changed = true;
        while changed {
            changed = false;
            for &t in comp {
                let mut acc = full.clone();
                for &m in &p.tasks[t].methods {
                    match p.methods[m].subtasks.first() {
                        None => acc.clear(),
                        Some(TaskRef::Primitive(a)) => {
                            let pre: FixedBitSet = {
                                let mut b = FixedBitSet::with_capacity(nf);
                                b.extend(p.actions[*a].precond.iter().copied());
                                b
                            };
                            acc.intersect_with(&pre);
                        }
                        Some(TaskRef::Abstract(c)) => {
                            let c_set = mand[*c].clone();
                            acc.intersect_with(&c_set);
                        }
                    }
                }
                if acc != mand[t] {
                    mand[t] = acc;
                    changed = true;
                }
            }
        }
    }
    mand
}

/// Grounded invariant synthesis. Candidates gather facts of one predicate
/// that agree on every argument but one; a candidate is kept when the
/// at-most-one property holds initially and every action preserves it.
pub fn compute_mutex_groups(p: &Problem) -> Vec<MutexGroup> {
    let mut candidates: BTreeMap<(String, usize, Vec<String>), Vec<FactId>> = BTreeMap::new();
    for (id, f) in p.facts.iter().enumerate() {
        for i in 0..f.args.len() {
            let mut rest = f.args.clone();
            rest.remove(i);
            candidates.entry((f.name.clone(), i, rest)).or_default().push(id);
        }
    }
    let mut out = BTreeSet::new();
    for group in candidates.into_values() {
        if group.len() >= 2 && is_inductive(p, &group) {
            out.insert(MutexGroup(group));
        }
    }
    out.into_iter().collect()
}

pub fn is_inductive(p: &Problem, group: &[FactId]) -> bool {
    let member = |f: &FactId| group.binary_search(f).is_ok();
    if p.init.facts().filter(member).count() > 1 {
        return false;
    }
    p.actions.iter().all(|a| {
        let added: Vec<FactId> = a.eff_pos.iter().copied().filter(member).collect();
        match added.as_slice() {
            [] => true,
            [f] => {
                a.precond.contains(f)
                    || a.precond
                        .iter()
                        .any(|g| member(g) && a.eff_neg.contains(g))
            }
            _ => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hddl::text::parse_ground;

    fn inf(text: &str) -> (Problem, Inference) {
        let p = parse_ground("t", text).unwrap();
        let i = Inference::compute(&p, true);
        (p, i)
    }

    #[test]
    fn self_loop_and_cycle() {
        let (p, i) = inf("action a\nmethod m t : a t\nmethod n t :\nmethod u1 u : v\nmethod v1 v : u\nmethod v2 v : a\nmethod r root : t u\nroot root");
        let t = p.find_task("t").unwrap();
        let u = p.find_task("u").unwrap();
        let v = p.find_task("v").unwrap();
        let root = p.find_task("root").unwrap();
        assert!(i.recursion.recursive[t]);
        assert!(i.recursion.recursive[u] && i.recursion.recursive[v]);
        assert!(i.recursion.same_scc(u, v));
        assert!(!i.recursion.recursive[root]);
    }

    #[test]
    fn single_method_profile_is_action_effect() {
        let (p, i) = inf("action a pre x add y del x\nmethod m t : a\ninit x\nroot t");
        let prof = &i.profiles[p.root];
        assert_eq!(prof.poss_eff_pos, vec![p.find_fact("y").unwrap()]);
        assert_eq!(prof.poss_eff_neg, vec![p.find_fact("x").unwrap()]);
        assert_eq!(prof.mand_pre, vec![p.find_fact("x").unwrap()]);
    }

    #[test]
    fn empty_method_clears_mand_pre() {
        let (p, i) = inf("action a pre x add y\nmethod m t : a\nmethod e t :\nroot t");
        assert!(i.profiles[p.root].mand_pre.is_empty());
    }

    #[test]
    fn recursive_mand_pre_reaches_fixpoint() {
        // t -> <t, b> | <a>: every refinement starts with a
        let (p, i) = inf("action a pre x add y\naction b pre y\nmethod m1 t : t b\nmethod m2 t : a\nroot t");
        assert_eq!(i.profiles[p.root].mand_pre, vec![p.find_fact("x").unwrap()]);
    }

    #[test]
    fn add_only_domain_has_no_groups() {
        let (_, i) = inf("action a add p(o1)\naction b add p(o2)\nmethod m t : a b\nroot t");
        assert!(i.mutexes.is_empty());
    }

    #[test]
    fn moving_token_is_a_group() {
        let (p, i) = inf(
            "action go12 pre at(o,l1) add at(o,l2) del at(o,l1)\naction go21 pre at(o,l2) add at(o,l1) del at(o,l2)\nmethod m t : go12 go21\ninit at(o,l1)\nroot t",
        );
        assert_eq!(i.mutexes.len(), 1);
        assert_eq!(i.mutexes[0].0.len(), 2);
        assert!(i.dump(&p).contains("mutex [at(o,l1) at(o,l2)]"));
    }
}
