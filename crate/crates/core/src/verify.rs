//! Independent plan validator: re-checks a decomposition tree against the
//! problem without consulting the encoder or the solver.

use std::fmt;

use crate::dt::DecompositionTree;
use crate::model::{Problem, TaskRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A node id out of range, or a node reached twice.
    Malformed { node: usize },
    /// The root is not labelled with the initial task.
    RootLabel,
    /// Abstract node with children but no method, or a method of another task.
    WrongMethod { node: usize },
    /// Children do not match the method's subtasks.
    ChildMismatch { node: usize, index: usize },
    /// An action node with children.
    PrimitiveWithChildren { node: usize },
    /// The leaf sequence contains an abstract task.
    AbstractLeaf { node: usize },
    /// The plan's action at this position is inapplicable.
    NotExecutable { position: usize },
    /// Goal facts missing in the final state.
    GoalNotReached { missing: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Malformed { node } => write!(f, "node {node}: dangling or shared node"),
            Violation::RootLabel => write!(f, "root is not the initial task"),
            Violation::WrongMethod { node } => write!(f, "node {node}: method missing or belongs to another task"),
            Violation::ChildMismatch { node, index } => {
                write!(f, "node {node}: child {index} does not match the method's subtask")
            }
            Violation::PrimitiveWithChildren { node } => write!(f, "node {node}: action with children"),
            Violation::AbstractLeaf { node } => write!(f, "node {node}: plan contains an abstract task"),
            Violation::NotExecutable { position } => write!(f, "plan step {position}: precondition not satisfied"),
            Violation::GoalNotReached { missing } => write!(f, "goal not reached: {}", missing.join(", ")),
        }
    }
}

/// Checks the labelling rules of a decomposition tree and that its plan is
/// primitive, executable from the initial state and reaches the goal.
pub fn verify(p: &Problem, dt: &DecompositionTree) -> Result<(), Vec<Violation>> {
    let mut v = Vec::new();
    if dt.root >= dt.nodes.len() {
        return Err(vec![Violation::Malformed { node: dt.root }]);
    }
    if dt.nodes[dt.root].task != TaskRef::Abstract(p.root) {
        v.push(Violation::RootLabel);
    }
    let mut seen = vec![false; dt.nodes.len()];
    let mut stack = vec![dt.root];
    while let Some(n) = stack.pop() {
        if std::mem::replace(&mut seen[n], true) {
            v.push(Violation::Malformed { node: n });
            continue;
        }
        let node = &dt.nodes[n];
        if let Some(&bad) = node.children.iter().find(|&&c| c >= dt.nodes.len()) {
            v.push(Violation::Malformed { node: bad });
            continue;
        }
        match node.task {
            TaskRef::Primitive(a) => {
                if a >= p.actions.len() {
                    v.push(Violation::Malformed { node: n });
                }
                if !node.children.is_empty() || node.method.is_some() {
                    v.push(Violation::PrimitiveWithChildren { node: n });
                }
            }
            TaskRef::Abstract(t) => match node.method {
                None if node.children.is_empty() => {}
                None => v.push(Violation::WrongMethod { node: n }),
                Some(m) => {
                    if m >= p.methods.len() || p.methods[m].task != t {
                        v.push(Violation::WrongMethod { node: n });
                        continue;
                    }
                    let subs = &p.methods[m].subtasks;
                    for i in 0..subs.len().max(node.children.len()) {
                        let ok = matches!((subs.get(i), node.children.get(i)),
                            (Some(&s), Some(&c)) if dt.nodes[c].task == s);
                        if !ok {
                            v.push(Violation::ChildMismatch { node: n, index: i });
                        }
                    }
                }
            },
        }
        stack.extend(node.children.iter().rev());
    }
    if !v.is_empty() {
        return Err(v);
    }

    let mut plan = Vec::new();
    for n in dt.leaf_nodes() {
        match dt.nodes[n].task {
            TaskRef::Primitive(a) => plan.push(a),
            TaskRef::Abstract(_) => v.push(Violation::AbstractLeaf { node: n }),
        }
    }
    if !v.is_empty() {
        return Err(v);
    }
    let mut state = p.init.clone();
    for (i, &a) in plan.iter().enumerate() {
        match p.apply(&state, a) {
            Ok(Some(next)) => state = next,
            _ => return Err(vec![Violation::NotExecutable { position: i }]),
        }
    }
    let missing: Vec<String> = p
        .goal
        .iter()
        .filter(|&&g| !state.contains(g))
        .map(|&g| p.facts[g].to_string())
        .collect();
    if !missing.is_empty() {
        return Err(vec![Violation::GoalNotReached { missing }]);
    }
    Ok(())
}
