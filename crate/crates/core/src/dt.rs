//! Decomposition trees.

use crate::model::{ActionId, MethodId, TaskId, TaskRef};
use crate::pdt::{Op, SlotId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtNode {
    pub task: TaskRef,
    /// Method applied to an abstract node; `None` for actions and for
    /// abstract leaves of a relaxed tree.
    pub method: Option<MethodId>,
    pub children: Vec<usize>,
    /// Grid provenance when decoded from a model.
    pub slot: Option<SlotId>,
    pub op: Option<Op>,
}

impl DtNode {
    pub fn new(task: TaskRef) -> Self {
        DtNode {
            task,
            method: None,
            children: Vec::new(),
            slot: None,
            op: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTree {
    pub nodes: Vec<DtNode>,
    pub root: usize,
}

impl DecompositionTree {
    /// A tree holding only an undeveloped root.
    pub fn leaf(task: TaskId) -> Self {
        DecompositionTree {
            nodes: vec![DtNode::new(TaskRef::Abstract(task))],
            root: 0,
        }
    }

    pub fn push(&mut self, node: DtNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Leaf labels left to right. Cycles are cut by a visited set so a
    /// malformed tree cannot hang the walk.
    pub fn leaves(&self) -> Vec<TaskRef> {
        self.leaf_nodes().into_iter().map(|n| self.nodes[n].task).collect()
    }

    pub fn leaf_nodes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if n >= self.nodes.len() || std::mem::replace(&mut seen[n], true) {
                continue;
            }
            let node = &self.nodes[n];
            if node.children.is_empty() {
                // an abstract node refined by an empty method yields nothing
                if node.method.is_none() {
                    out.push(n);
                }
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }

    /// The leaf sequence when every leaf is an action.
    pub fn primitive_plan(&self) -> Option<Vec<ActionId>> {
        self.leaves()
            .into_iter()
            .map(|t| match t {
                TaskRef::Primitive(a) => Some(a),
                TaskRef::Abstract(_) => None,
            })
            .collect()
    }

    pub fn abstract_leaves(&self) -> Vec<usize> {
        self.leaf_nodes()
            .into_iter()
            .filter(|&n| self.nodes[n].task.is_abstract())
            .collect()
    }

    /// Number of method applications.
    pub fn num_methods(&self) -> usize {
        self.nodes.iter().filter(|n| n.method.is_some()).count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecompositionTree, n: usize, d: usize) -> usize {
            if d > t.nodes.len() {
                return d;
            }
            t.nodes[n].children.iter().map(|&c| go(t, c, d + 1)).max().unwrap_or(d)
        }
        go(self, self.root, 1)
    }
}
