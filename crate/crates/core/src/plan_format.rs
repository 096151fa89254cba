//! Hierarchical plan text in the IPC exchange layout.
//!
//! ```text
//! ==>
//! 0 (drive truck a b)
//! root 2
//! 2 deliver p -> m-deliver 3 0
//! 3 get-to truck b -> m-noop
//! <==
//! ```
//!
//! Guard actions compiled from method preconditions are omitted on output
//! and restored when reading.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::dt::{DecompositionTree, DtNode};
use crate::model::{compact_label, spaced_label, MethodId, Problem, TaskRef};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanFormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown action `{label}`")]
    UnknownAction { line: usize, label: String },
    #[error("line {line}: unknown task `{label}`")]
    UnknownTask { line: usize, label: String },
    #[error("line {line}: no method `{name}` of `{task}` matches the listed children")]
    UnknownMethod { line: usize, task: String, name: String },
    #[error("node id {0} is referenced but never defined")]
    Undefined(usize),
    #[error("plan has no root line")]
    NoRoot,
}

pub fn method_label(p: &Problem, m: MethodId) -> String {
    compact_label(&p.methods[m].name, &p.methods[m].args)
}

/// Renders a solved tree. Leaves are numbered first in plan order, then
/// abstract nodes in preorder.
pub fn write_plan(p: &Problem, dt: &DecompositionTree) -> String {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut out = String::from("==>\n");
    let mut next = 0;
    for n in dt.leaf_nodes() {
        if let TaskRef::Primitive(a) = dt.nodes[n].task {
            let act = &p.actions[a];
            if act.guard {
                continue;
            }
            ids.insert(n, next);
            let _ = writeln!(out, "{next} ({})", spaced_label(&act.name, &act.args));
            next += 1;
        }
    }
    let mut order = Vec::new();
    let mut stack = vec![dt.root];
    while let Some(n) = stack.pop() {
        if dt.nodes[n].task.is_abstract() {
            ids.insert(n, next);
            next += 1;
            order.push(n);
        }
        stack.extend(dt.nodes[n].children.iter().rev());
    }
    let _ = writeln!(out, "root {}", ids[&dt.root]);
    for n in order {
        let node = &dt.nodes[n];
        let TaskRef::Abstract(t) = node.task else { unreachable!() };
        let _ = write!(out, "{} {}", ids[&n], spaced_label(&p.tasks[t].name, &p.tasks[t].args));
        if let Some(m) = node.method {
            let _ = write!(out, " -> {}", method_label(p, m));
            for c in &node.children {
                if let Some(id) = ids.get(c) {
                    let _ = write!(out, " {id}");
                }
            }
        }
        out.push('\n');
    }
    out.push_str("<==\n");
    out
}

enum Entry {
    Action(usize),
    Task {
        line: usize,
        task: usize,
        method: Option<(String, Vec<usize>)>,
    },
}

/// Reads a plan written by [`write_plan`] back into a tree over `p`.
pub fn parse_plan(p: &Problem, text: &str) -> Result<DecompositionTree, PlanFormatError> {
    let action_index: HashMap<String, usize> = p
        .actions
        .iter()
        .enumerate()
        .map(|(i, a)| (spaced_label(&a.name, &a.args), i))
        .collect();
    let task_index: HashMap<String, usize> = p
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (spaced_label(&t.name, &t.args), i))
        .collect();
    let syntax = |line: usize, msg: &str| PlanFormatError::Syntax {
        line,
        msg: msg.to_string(),
    };
    let parse_id = |line: usize, s: &str| s.parse::<usize>().map_err(|_| syntax(line, "expected a node id"));

    let mut entries: HashMap<usize, Entry> = HashMap::new();
    let mut root = None;
    let mut inside = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split(';').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        match l {
            "==>" => {
                inside = true;
                continue;
            }
            "<==" => break,
            _ if !inside => continue,
            _ => {}
        }
        if let Some(rest) = l.strip_prefix("root") {
            let ids: Vec<&str> = rest.split_whitespace().collect();
            match ids.as_slice() {
                [id] => root = Some(parse_id(line, id)?),
                _ => return Err(syntax(line, "expected exactly one root id")),
            }
            continue;
        }
        let (id, rest) = l.split_once(char::is_whitespace).ok_or_else(|| syntax(line, "missing label"))?;
        let id = parse_id(line, id)?;
        let rest = rest.trim();
        let entry = if let Some(inner) = rest.strip_prefix('(') {
            let label = inner
                .strip_suffix(')')
                .ok_or_else(|| syntax(line, "unterminated action"))?
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            let a = *action_index
                .get(&label)
                .ok_or(PlanFormatError::UnknownAction { line, label })?;
            Entry::Action(a)
        } else {
            let (head, tail) = match rest.split_once("->") {
                Some((h, t)) => (h, Some(t)),
                None => (rest, None),
            };
            let label = head.split_whitespace().collect::<Vec<_>>().join(" ");
            let task = *task_index
                .get(&label)
                .ok_or(PlanFormatError::UnknownTask { line, label })?;
            let method = match tail {
                None => None,
                Some(t) => {
                    let mut words = t.split_whitespace();
                    let name = words.next().ok_or_else(|| syntax(line, "missing method name"))?;
                    let kids = words.map(|w| parse_id(line, w)).collect::<Result<Vec<_>, _>>()?;
                    Some((name.to_string(), kids))
                }
            };
            Entry::Task { line, task, method }
        };
        if entries.insert(id, entry).is_some() {
            return Err(syntax(line, "duplicate node id"));
        }
    }
    let root = root.ok_or(PlanFormatError::NoRoot)?;

    let mut dt = DecompositionTree {
        nodes: Vec::new(),
        root: 0,
    };
    let mut built: HashMap<usize, usize> = HashMap::new();
    dt.root = build(p, &entries, root, &mut dt, &mut built, 0)?;
    Ok(dt)
}

fn build(
    p: &Problem,
    entries: &HashMap<usize, Entry>,
    id: usize,
    dt: &mut DecompositionTree,
    built: &mut HashMap<usize, usize>,
    depth: usize,
) -> Result<usize, PlanFormatError> {
    // A repeated or cyclic reference produces a shared node; the validator
    // reports it as malformed.
    if let Some(&n) = built.get(&id) {
        return Ok(n);
    }
    if depth > entries.len() {
        return Err(PlanFormatError::Undefined(id));
    }
    let entry = entries.get(&id).ok_or(PlanFormatError::Undefined(id))?;
    let n = match entry {
        Entry::Action(a) => dt.push(DtNode::new(TaskRef::Primitive(*a))),
        Entry::Task { line, task, method } => {
            let n = dt.push(DtNode::new(TaskRef::Abstract(*task)));
            built.insert(id, n);
            if let Some((name, kids)) = method {
                let mut children = Vec::new();
                for &k in kids {
                    children.push(build(p, entries, k, dt, built, depth + 1)?);
                }
                let m = pick_method(p, dt, *task, name, &children).ok_or_else(|| PlanFormatError::UnknownMethod {
                    line: *line,
                    task: p.tasks[*task].label(),
                    name: name.clone(),
                })?;
                if let Some(&TaskRef::Primitive(g)) = p.methods[m].subtasks.first() {
                    if p.actions[g].guard {
                        let gn = dt.push(DtNode::new(TaskRef::Primitive(g)));
                        children.insert(0, gn);
                    }
                }
                dt.nodes[n].method = Some(m);
                dt.nodes[n].children = children;
            }
            n
        }
    };
    built.insert(id, n);
    Ok(n)
}

/// The method of `task` with the given name or label whose non-guard
/// subtasks match the children's labels.
fn pick_method(p: &Problem, dt: &DecompositionTree, task: usize, name: &str, children: &[usize]) -> Option<MethodId> {
    let labels: Vec<TaskRef> = children.iter().map(|&c| dt.nodes[c].task).collect();
    p.tasks[task].methods.iter().copied().find(|&m| {
        let method = &p.methods[m];
        if method.name != name && method_label(p, m) != name {
            return false;
        }
        let visible: Vec<TaskRef> = method
            .subtasks
            .iter()
            .copied()
            .filter(|s| !matches!(*s, TaskRef::Primitive(a) if p.actions[a].guard))
            .collect();
        visible == labels
    })
}
