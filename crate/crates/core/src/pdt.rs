//! Path decomposition tree in its aggregated grid form.
//!
//! A slot is one grid position. It holds every operation that may occur
//! there at the current degree of refinement. Slots persist from layer to
//! layer until they are expanded; expansion replaces a slot by child slots,
//! one per subtask index of the longest applicable method.
//!
//! Abstract operations carry a recursion context: the tasks of the same
//! strongly connected component found on the path above them. A method whose
//! subtasks repeat one of those tasks, or the task itself, is blocked until
//! reinsertion switches blocking off.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::dt::DecompositionTree;
use crate::inference::RecursionInfo;
use crate::model::{ActionId, MethodId, Problem, TaskId, TaskRef};

pub type SlotId = usize;
pub type CtxId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PdtError {
    #[error("slot {0} is not pending")]
    NotPending(SlotId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Blank,
    Action(ActionId),
    Task(TaskId, CtxId),
}

impl Op {
    pub fn task_ref(self) -> Option<TaskRef> {
        match self {
            Op::Blank => None,
            Op::Action(a) => Some(TaskRef::Primitive(a)),
            Op::Task(t, _) => Some(TaskRef::Abstract(t)),
        }
    }

    pub fn is_abstract(self) -> bool {
        matches!(self, Op::Task(..))
    }
}

/// A method developed under one abstract op of a slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodEntry {
    /// Index into the owning slot's `ops`.
    pub op: usize,
    pub method: MethodId,
    /// Operation required at each child slot; blanks pad short methods.
    pub children: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub parent: Option<(SlotId, usize)>,
    /// Layer in which the slot first appears.
    pub layer: usize,
    /// Sorted, deduplicated.
    pub ops: Vec<Op>,
    pub methods: Vec<MethodEntry>,
    pub children: Vec<SlotId>,
}

impl Slot {
    pub fn is_expanded(&self) -> bool {
        !self.children.is_empty()
    }

    pub fn is_pending(&self) -> bool {
        !self.is_expanded() && self.ops.iter().any(|o| o.is_abstract())
    }

    pub fn op_index(&self, op: Op) -> Option<usize> {
        self.ops.binary_search(&op).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPosition {
    pub slot: SlotId,
    pub candidates: Vec<Op>,
    pub parent: Option<(SlotId, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub layers: Vec<Vec<GridPosition>>,
}

#[derive(Debug, Clone)]
pub struct Pdt {
    pub slots: Vec<Slot>,
    /// Slot sequence of each layer, left to right.
    pub layers: Vec<Vec<SlotId>>,
    /// `(ancestor task, method)` pairs excluded so far.
    pub blocked: BTreeSet<(TaskId, MethodId)>,
    pub blocking: bool,
    pub relaxation_round: usize,
    pub methods_developed: usize,
    contexts: Vec<Vec<TaskId>>,
    ctx_index: HashMap<Vec<TaskId>, CtxId>,
}

impl Pdt {
    /// A single pending root slot labelled with the initial task.
    pub fn new(p: &Problem, blocking: bool) -> Self {
        let mut pdt = Pdt {
            slots: Vec::new(),
            layers: Vec::new(),
            blocked: BTreeSet::new(),
            blocking,
            relaxation_round: 0,
            methods_developed: 0,
            contexts: Vec::new(),
            ctx_index: HashMap::new(),
        };
        let empty = pdt.intern_ctx(Vec::new());
        pdt.slots.push(Slot {
            parent: None,
            layer: 0,
            ops: vec![Op::Task(p.root, empty)],
            methods: Vec::new(),
            children: Vec::new(),
        });
        pdt.layers.push(vec![0]);
        pdt
    }

    fn intern_ctx(&mut self, ctx: Vec<TaskId>) -> CtxId {
        if let Some(&c) = self.ctx_index.get(&ctx) {
            return c;
        }
        self.contexts.push(ctx.clone());
        self.ctx_index.insert(ctx, self.contexts.len() - 1);
        self.contexts.len() - 1
    }

    pub fn context(&self, c: CtxId) -> &[TaskId] {
        &self.contexts[c]
    }

    pub fn root(&self) -> SlotId {
        0
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn frontier(&self) -> &[SlotId] {
        self.layers.last().expect("at least one layer")
    }

    pub fn pending(&self) -> Vec<SlotId> {
        self.frontier().iter().copied().filter(|&s| self.slots[s].is_pending()).collect()
    }

    /// Methods of `task` split into allowed and blocked at an occurrence
    /// with context `ctx`.
    pub fn blocked_methods(&self, p: &Problem, task: TaskId, ctx: CtxId) -> (Vec<MethodId>, Vec<(TaskId, MethodId)>) {
        let mut allowed = Vec::new();
        let mut blocked = Vec::new();
        let ancestors = &self.contexts[ctx];
        for &m in &p.tasks[task].methods {
            let hit = if self.blocking {
                p.methods[m].subtasks.iter().find_map(|s| match *s {
                    TaskRef::Abstract(c) if c == task || ancestors.binary_search(&c).is_ok() => Some(c),
                    _ => None,
                })
            } else {
                None
            };
            match hit {
                Some(c) => blocked.push((c, m)),
                None => allowed.push(m),
            }
        }
        (allowed, blocked)
    }

    /// Expands the target slots of the last layer and appends a new layer.
    /// Returns the slots created.
    pub fn expand(&mut self, p: &Problem, rec: &RecursionInfo, targets: &[SlotId]) -> Result<Vec<SlotId>, PdtError> {
        let frontier: BTreeSet<SlotId> = self.frontier().iter().copied().collect();
        for &t in targets {
            if !frontier.contains(&t) || !self.slots[t].is_pending() {
                return Err(PdtError::NotPending(t));
            }
        }
        let targets: BTreeSet<SlotId> = targets.iter().copied().collect();
        let layer = self.layers.len();
        let mut next = Vec::new();
        let mut created = Vec::new();
        for s in self.frontier().to_vec() {
            if targets.contains(&s) {
                let kids = self.expand_slot(p, rec, s, layer);
                next.extend(&kids);
                created.extend(kids);
            } else {
                next.push(s);
            }
        }
        self.layers.push(next);
        Ok(created)
    }

    fn expand_slot(&mut self, p: &Problem, rec: &RecursionInfo, s: SlotId, layer: usize) -> Vec<SlotId> {
        let ops = self.slots[s].ops.clone();
        let mut entries = Vec::new();
        for (oi, &op) in ops.iter().enumerate() {
            let Op::Task(t, ctx) = op else { continue };
            let (allowed, blocked) = self.blocked_methods(p, t, ctx);
            self.blocked.extend(blocked);
            for m in allowed {
                let children: Vec<Op> = p.methods[m]
                    .subtasks
                    .iter()
                    .map(|st| match *st {
                        TaskRef::Primitive(a) => Op::Action(a),
                        TaskRef::Abstract(c) => {
                            let child_ctx = if self.blocking && rec.same_scc(c, t) {
                                let mut v = self.contexts[ctx].clone();
                                if let Err(i) = v.binary_search(&t) {
                                    v.insert(i, t);
                                }
                                self.intern_ctx(v)
                            } else {
                                self.intern_ctx(Vec::new())
                            };
                            Op::Task(c, child_ctx)
                        }
                    })
                    .collect();
                entries.push(MethodEntry {
                    op: oi,
                    method: m,
                    children,
                });
            }
        }
        let k = entries.iter().map(|e| e.children.len()).max().unwrap_or(0).max(1);
        let mut child_ops: Vec<BTreeSet<Op>> = vec![BTreeSet::new(); k];
        for &op in &ops {
            match op {
                Op::Blank => child_ops.iter_mut().for_each(|c| {
                    c.insert(Op::Blank);
                }),
                Op::Action(_) => {
                    child_ops[0].insert(op);
                    child_ops[1..].iter_mut().for_each(|c| {
                        c.insert(Op::Blank);
                    });
                }
                Op::Task(..) => {}
            }
        }
        for e in &mut entries {
            e.children.resize(k, Op::Blank);
            for (i, &c) in e.children.iter().enumerate() {
                child_ops[i].insert(c);
            }
        }
        // A child slot must offer something even when every method was
        // blocked; the blank keeps the grid well formed.
        for c in &mut child_ops {
            if c.is_empty() {
                c.insert(Op::Blank);
            }
        }
        self.methods_developed += entries.len();
        let first = self.slots.len();
        for (i, ops) in child_ops.into_iter().enumerate() {
            self.slots.push(Slot {
                parent: Some((s, i)),
                layer,
                ops: ops.into_iter().collect(),
                methods: Vec::new(),
                children: Vec::new(),
            });
        }
        let kids: Vec<SlotId> = (first..first + k).collect();
        self.slots[s].methods = entries;
        self.slots[s].children = kids.clone();
        kids
    }

    pub fn project_grid(&self) -> Grid {
        Grid {
            layers: self
                .layers
                .iter()
                .map(|l| {
                    l.iter()
                        .map(|&s| GridPosition {
                            slot: s,
                            candidates: self.slots[s].ops.clone(),
                            parent: self.slots[s].parent,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Graphviz rendering: one node per slot operation and per developed
    /// method. Nodes used by `highlight` are filled grey.
    pub fn to_dot(&self, p: &Problem, highlight: Option<&DecompositionTree>) -> String {
        let mut used_ops: BTreeSet<(SlotId, Op)> = BTreeSet::new();
        let mut used_methods: BTreeSet<(SlotId, MethodId)> = BTreeSet::new();
        if let Some(dt) = highlight {
            for n in &dt.nodes {
                if let (Some(slot), Some(op)) = (n.slot, n.op) {
                    used_ops.insert((slot, op));
                    if let Some(m) = n.method {
                        used_methods.insert((slot, m));
                    }
                }
            }
        }
        let op_label = |op: Op| match op {
            Op::Blank => "blank".to_string(),
            Op::Action(a) => p.actions[a].label(),
            Op::Task(t, _) => p.tasks[t].label(),
        };
        let mut out = String::from("digraph pdt {\n  node [fontname=\"monospace\"];\n");
        for (s, slot) in self.slots.iter().enumerate() {
            for (oi, &op) in slot.ops.iter().enumerate() {
                if op == Op::Blank {
                    continue;
                }
                let style = if used_ops.contains(&(s, op)) { ", style=filled, fillcolor=grey" } else { "" };
                let shape = if op.is_abstract() { "box" } else { "plaintext" };
                let _ = writeln!(out, "  o{s}_{oi} [label=\"{}\", shape={shape}{style}];", op_label(op).replace('"', "'"));
            }
            for (mi, e) in slot.methods.iter().enumerate() {
                let style = if used_methods.contains(&(s, e.method)) { ", style=filled, fillcolor=grey" } else { "" };
                let _ = writeln!(out, "  m{s}_{mi} [label=\"{}\", shape=ellipse{style}];", p.methods[e.method].label().replace('"', "'"));
                let _ = writeln!(out, "  o{s}_{} -> m{s}_{mi};", e.op);
                for (i, &c) in e.children.iter().enumerate() {
                    if c == Op::Blank {
                        continue;
                    }
                    let child = slot.children[i];
                    let ci = self.slots[child].op_index(c).expect("child op present");
                    let _ = writeln!(out, "  m{s}_{mi} -> o{child}_{ci};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hddl::text::parse_ground;
    use crate::inference::compute_recursion;

    const EXAMPLE: &str = "
action a0 pre start add z del start
action a1 pre x add y
action a2 pre start add x
action a3 pre y add goal
method m1 root : a0 t2
method m2 root : t3 a1 t5
method m3 t3 : a2
method m5 t5 : a3
method m6 t5 : t8
method m4 t2 : a0
method m8 t8 : a1
init start
goal goal
root root
";

    #[test]
    fn fresh_pdt_has_one_pending_root() {
        let p = parse_ground("example", EXAMPLE).unwrap();
        let pdt = Pdt::new(&p, true);
        assert_eq!(pdt.slots.len(), 1);
        assert_eq!(pdt.pending(), vec![0]);
        let g = pdt.project_grid();
        assert_eq!(g.layers.len(), 1);
        assert_eq!(g.layers[0][0].candidates, vec![Op::Task(p.root, 0)]);
    }

    #[test]
    fn first_expansion_pads_to_longest_method() {
        let p = parse_ground("example", EXAMPLE).unwrap();
        let rec = compute_recursion(&p);
        let mut pdt = Pdt::new(&p, true);
        pdt.expand(&p, &rec, &[0]).unwrap();
        let g = pdt.project_grid();
        assert_eq!(g.layers[1].len(), 3);
        let a0 = Op::Action(p.find_action("a0").unwrap());
        let t3 = Op::Task(p.find_task("t3").unwrap(), 0);
        assert!(g.layers[1][0].candidates.contains(&a0));
        assert!(g.layers[1][0].candidates.contains(&t3));
        assert!(g.layers[1][2].candidates.contains(&Op::Blank));
        assert_eq!(pdt.methods_developed, 2);
        assert!(pdt.expand(&p, &rec, &[0]).is_err());
    }

    #[test]
    fn self_recursive_method_is_blocked_at_its_task() {
        let p = parse_ground("r", "action a\naction b\nmethod rec t : a t\nmethod base t : b\nroot t").unwrap();
        let rec = compute_recursion(&p);
        let mut pdt = Pdt::new(&p, true);
        pdt.expand(&p, &rec, &[0]).unwrap();
        assert_eq!(pdt.methods_developed, 1);
        assert_eq!(pdt.blocked.len(), 1);
        assert!(pdt.pending().is_empty());

        let mut open = Pdt::new(&p, false);
        open.expand(&p, &rec, &[0]).unwrap();
        assert_eq!(open.methods_developed, 2);
        assert_eq!(open.pending().len(), 1);
    }

    #[test]
    fn empty_method_leaves_blank_child() {
        let p = parse_ground("e", "method e t :\nroot t").unwrap();
        let rec = compute_recursion(&p);
        let mut pdt = Pdt::new(&p, true);
        pdt.expand(&p, &rec, &[0]).unwrap();
        assert_eq!(pdt.frontier().len(), 1);
        assert_eq!(pdt.slots[pdt.frontier()[0]].ops, vec![Op::Blank]);
        assert!(pdt.pending().is_empty());
    }
}
