//! Explicit-state breadth-first reachability.

use std::collections::{HashSet, VecDeque};

use tohtn_core::model::{Problem, State};

/// Every state reachable from the initial state by applying actions in any
/// order, or `None` beyond `cap` states.
pub fn reachable_states(p: &Problem, cap: usize) -> Option<Vec<State>> {
    let key = |s: &State| s.facts().collect::<Vec<_>>();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([key(&p.init)]);
    let mut out = vec![p.init.clone()];
    let mut queue = VecDeque::from([p.init.clone()]);
    while let Some(s) = queue.pop_front() {
        for a in 0..p.actions.len() {
            if let Ok(Some(n)) = p.apply(&s, a) {
                if seen.insert(key(&n)) {
                    if out.len() >= cap {
                        return None;
                    }
                    out.push(n.clone());
                    queue.push_back(n);
                }
            }
        }
    }
    Some(out)
}
