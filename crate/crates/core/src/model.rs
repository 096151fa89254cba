//! Ground totally-ordered HTN problems and their execution semantics.
//!
//! Everything is interned to dense indices: facts, actions, abstract tasks
//! and methods each live in their own `Vec` and refer to each other by
//! position.

use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub type FactId = usize;
pub type ActionId = usize;
pub type TaskId = usize;
pub type MethodId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("action id {0} out of range")]
    BadAction(ActionId),
    #[error("abstract task id {0} out of range")]
    BadTask(TaskId),
    #[error("fact id {0} out of range")]
    BadFact(FactId),
    #[error("method {method} refers to task {task}, which does not list it")]
    MethodNotListed { method: MethodId, task: TaskId },
    #[error("method id {0} out of range")]
    BadMethod(MethodId),
}

/// A ground atom. `args` is empty for propositional fixtures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub name: String,
    pub args: Vec<String>,
}

impl Fact {
    pub fn new(name: impl Into<String>, args: Vec<String>) -> Self {
        Fact {
            name: name.into(),
            args,
        }
    }
}

/// `name(a,b)` or just `name` when there are no arguments.
pub fn compact_label(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{}({})", name, args.join(","))
    }
}

/// `name a b`, the form used in plan files.
pub fn spaced_label(name: &str, args: &[String]) -> String {
    let mut s = name.to_string();
    for a in args {
        s.push(' ');
        s.push_str(a);
    }
    s
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&compact_label(&self.name, &self.args))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub args: Vec<String>,
    pub precond: Vec<FactId>,
    pub eff_pos: Vec<FactId>,
    pub eff_neg: Vec<FactId>,
    /// Compiled method precondition: no effects, never printed in plans.
    pub guard: bool,
}

impl Action {
    pub fn new(name: impl Into<String>, precond: Vec<FactId>, eff_pos: Vec<FactId>, eff_neg: Vec<FactId>) -> Self {
        let mut a = Action {
            name: name.into(),
            args: Vec::new(),
            precond,
            eff_pos,
            eff_neg,
            guard: false,
        };
        a.normalize();
        a
    }

    /// Sorts the fact lists and resolves add/delete overlap in favour of the add.
    pub fn normalize(&mut self) {
        for v in [&mut self.precond, &mut self.eff_pos, &mut self.eff_neg] {
            v.sort_unstable();
            v.dedup();
        }
        let pos = &self.eff_pos;
        self.eff_neg.retain(|f| pos.binary_search(f).is_err());
    }

    pub fn label(&self) -> String {
        compact_label(&self.name, &self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractTask {
    pub name: String,
    pub args: Vec<String>,
    pub methods: Vec<MethodId>,
}

impl AbstractTask {
    pub fn label(&self) -> String {
        compact_label(&self.name, &self.args)
    }

    /// A task left without methods by grounding cannot be refined.
    pub fn is_unrefinable(&self) -> bool {
        self.methods.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub name: String,
    pub args: Vec<String>,
    pub task: TaskId,
    pub subtasks: Vec<TaskRef>,
}

impl Method {
    pub fn label(&self) -> String {
        compact_label(&self.name, &self.args)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskRef {
    Primitive(ActionId),
    Abstract(TaskId),
}

impl TaskRef {
    pub fn is_abstract(self) -> bool {
        matches!(self, TaskRef::Abstract(_))
    }
}

/// A world state: one bit per fact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State(FixedBitSet);

impl State {
    pub fn empty(num_facts: usize) -> Self {
        State(FixedBitSet::with_capacity(num_facts))
    }

    pub fn from_facts(num_facts: usize, facts: impl IntoIterator<Item = FactId>) -> Self {
        let mut s = State::empty(num_facts);
        for f in facts {
            s.0.insert(f);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, f: FactId) -> bool {
        self.0.contains(f)
    }

    pub fn insert(&mut self, f: FactId) {
        self.0.insert(f);
    }

    pub fn remove(&mut self, f: FactId) {
        self.0.set(f, false);
    }

    pub fn holds_all(&self, facts: &[FactId]) -> bool {
        facts.iter().all(|&f| self.0.contains(f))
    }

    pub fn facts(&self) -> impl Iterator<Item = FactId> + '_ {
        self.0.ones()
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub facts: Vec<Fact>,
    pub actions: Vec<Action>,
    pub tasks: Vec<AbstractTask>,
    pub methods: Vec<Method>,
    pub root: TaskId,
    pub init: State,
    pub goal: Vec<FactId>,
}

impl Problem {
    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    /// Checks every cross reference.
    pub fn validate(&self) -> Result<(), ModelError> {
        let nf = self.facts.len();
        if self.root >= self.tasks.len() {
            return Err(ModelError::BadTask(self.root));
        }
        if self.init.len() != nf {
            return Err(ModelError::BadFact(self.init.len()));
        }
        for &g in &self.goal {
            if g >= nf {
                return Err(ModelError::BadFact(g));
            }
        }
        for a in &self.actions {
            for &f in a.precond.iter().chain(&a.eff_pos).chain(&a.eff_neg) {
                if f >= nf {
                    return Err(ModelError::BadFact(f));
                }
            }
        }
        for (tid, t) in self.tasks.iter().enumerate() {
            for &m in &t.methods {
                let method = self.methods.get(m).ok_or(ModelError::BadMethod(m))?;
                if method.task != tid {
                    return Err(ModelError::MethodNotListed { method: m, task: tid });
                }
            }
        }
        for (mid, m) in self.methods.iter().enumerate() {
            let t = self.tasks.get(m.task).ok_or(ModelError::BadTask(m.task))?;
            if !t.methods.contains(&mid) {
                return Err(ModelError::MethodNotListed { method: mid, task: m.task });
            }
            for st in &m.subtasks {
                match *st {
                    TaskRef::Primitive(a) if a >= self.actions.len() => return Err(ModelError::BadAction(a)),
                    TaskRef::Abstract(t) if t >= self.tasks.len() => return Err(ModelError::BadTask(t)),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn action(&self, a: ActionId) -> Result<&Action, ModelError> {
        self.actions.get(a).ok_or(ModelError::BadAction(a))
    }

    /// γ(s, a): `None` when a precondition is missing.
    pub fn apply(&self, s: &State, a: ActionId) -> Result<Option<State>, ModelError> {
        let act = self.action(a)?;
        if !s.holds_all(&act.precond) {
            return Ok(None);
        }
        let mut next = s.clone();
        for &f in &act.eff_neg {
            next.remove(f);
        }
        for &f in &act.eff_pos {
            next.insert(f);
        }
        Ok(Some(next))
    }

    /// Left fold of [`Problem::apply`]; `None` as soon as a step is inapplicable.
    pub fn apply_seq(&self, s: &State, plan: &[ActionId]) -> Result<Option<State>, ModelError> {
        let mut cur = s.clone();
        for &a in plan {
            match self.apply(&cur, a)? {
                Some(n) => cur = n,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    pub fn is_goal(&self, s: &State) -> bool {
        s.holds_all(&self.goal)
    }

    pub fn task_ref_label(&self, t: TaskRef) -> String {
        match t {
            TaskRef::Primitive(a) => self.actions[a].label(),
            TaskRef::Abstract(t) => self.tasks[t].label(),
        }
    }

    pub fn find_action(&self, label: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a.label() == label)
    }

    pub fn find_task(&self, label: &str) -> Option<TaskId> {
        self.tasks.iter().position(|t| t.label() == label)
    }

    pub fn find_fact(&self, label: &str) -> Option<FactId> {
        self.facts.iter().position(|f| f.to_string() == label)
    }

    pub fn find_method(&self, label: &str) -> Option<MethodId> {
        self.methods.iter().position(|m| m.label() == label)
    }
}
