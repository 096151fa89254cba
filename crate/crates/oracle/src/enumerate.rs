//! Refinement enumeration by recursive cartesian products.

use std::collections::BTreeSet;

use tohtn_core::model::{ActionId, Problem, TaskId, TaskRef};

#[derive(Debug, Clone, Default)]
pub struct Refinements {
    /// Distinct primitive plans.
    pub plans: BTreeSet<Vec<ActionId>>,
    /// Set when the combination budget ran out; `plans` is then partial.
    pub truncated: bool,
}

struct Ctx<'a> {
    p: &'a Problem,
    blocking: bool,
    budget: usize,
    truncated: bool,
}

impl Ctx<'_> {
    /// Plans of `t` using at most `depth` nested method applications.
    /// `path` holds the ancestor tasks of this occurrence.
    fn task(&mut self, t: TaskId, depth: usize, path: &mut Vec<TaskId>) -> BTreeSet<Vec<ActionId>> {
        let mut out = BTreeSet::new();
        if depth == 0 {
            return out;
        }
        path.push(t);
        for &m in &self.p.tasks[t].methods {
            let subs = &self.p.methods[m].subtasks;
            if self.blocking
                && subs
                    .iter()
                    .any(|s| matches!(*s, TaskRef::Abstract(c) if path.contains(&c)))
            {
                continue;
            }
            let mut partial: BTreeSet<Vec<ActionId>> = BTreeSet::from([Vec::new()]);
            for &s in subs {
                let options: BTreeSet<Vec<ActionId>> = match s {
                    TaskRef::Primitive(a) => BTreeSet::from([vec![a]]),
                    TaskRef::Abstract(c) => self.task(c, depth - 1, path),
                };
                let mut next = BTreeSet::new();
                for pre in &partial {
                    for o in &options {
                        if self.budget == 0 {
                            self.truncated = true;
                            break;
                        }
                        self.budget -= 1;
                        let mut v = pre.clone();
                        v.extend(o);
                        next.insert(v);
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            out.extend(partial);
        }
        path.pop();
        out
    }
}

/// All primitive refinements of `task` up to `depth` method applications
/// along any path. With `blocking`, a method is skipped when one of its
/// subtasks repeats the task it refines or any ancestor.
pub fn refinements(p: &Problem, task: TaskId, depth: usize, blocking: bool, budget: usize) -> Refinements {
    let mut ctx = Ctx {
        p,
        blocking,
        budget,
        truncated: false,
    };
    let plans = ctx.task(task, depth, &mut Vec::new());
    Refinements {
        plans,
        truncated: ctx.truncated,
    }
}

/// Whether some decomposition of the root within `depth` yields an
/// executable plan reaching the goal; `None` when the budget ran out
/// before a solution was seen.
pub fn solvable(p: &Problem, depth: usize, blocking: bool, budget: usize) -> Option<bool> {
    let r = refinements(p, p.root, depth, blocking, budget);
    let found = r.plans.iter().any(|plan| is_solution(p, plan));
    if found {
        Some(true)
    } else if r.truncated {
        None
    } else {
        Some(false)
    }
}

pub fn is_solution(p: &Problem, plan: &[ActionId]) -> bool {
    matches!(p.apply_seq(&p.init, plan), Ok(Some(s)) if p.is_goal(&s))
}

/// Valid plans of the root within `depth`.
pub fn solution_plans(p: &Problem, depth: usize, blocking: bool, budget: usize) -> BTreeSet<Vec<ActionId>> {
    refinements(p, p.root, depth, blocking, budget)
        .plans
        .into_iter()
        .filter(|plan| is_solution(p, plan))
        .collect()
}
