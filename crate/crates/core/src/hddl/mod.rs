//! Front end: a totally-ordered HDDL subset and a plain-text ground format.
//!
//! Supported HDDL: `:typing`, STRIPS actions, negative preconditions,
//! equality constraints, totally ordered methods (`:ordered-subtasks`, or
//! `:subtasks` with at most one entry) and method preconditions. Method
//! preconditions are compiled into a zero-effect guard action placed in
//! front of the method's subtasks.

mod ground;
mod parse;
mod prune;
pub mod sexpr;
pub mod text;

use std::path::Path;

use thiserror::Error;

pub use ground::{ground, GroundOptions};
pub use parse::{parse, parse_domain, parse_problem};
pub use prune::prune;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HddlError {
    #[error("{file}:{line}: {msg}")]
    Lex { file: String, line: usize, msg: String },
    #[error("{file}:{line}: {msg}")]
    Syntax { file: String, line: usize, msg: String },
    #[error("{file}:{line}: unsupported construct `{construct}`")]
    Unsupported {
        file: String,
        line: usize,
        construct: String,
    },
    #[error("{file}:{line}: {msg}")]
    Mismatch { file: String, line: usize, msg: String },
    #[error("grounding aborted: more than {cap} instantiations of {what}")]
    TooManyInstances { what: String, cap: usize },
    #[error("{0}")]
    Model(#[from] crate::model::ModelError),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

fn read(path: &Path) -> Result<String, HddlError> {
    std::fs::read_to_string(path).map_err(|e| HddlError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

/// Loads a problem from an HDDL domain and problem pair, or from a single
/// file in the ground text format when `problem` is `None`.
pub fn load(domain: &Path, problem: Option<&Path>, opts: &GroundOptions) -> Result<crate::model::Problem, HddlError> {
    let dtext = read(domain)?;
    let dname = domain.display().to_string();
    match problem {
        None => text::parse_ground(&dname, &dtext),
        Some(pp) => {
            let ptext = read(pp)?;
            let d = parse_domain(&dname, &dtext)?;
            let p = parse_problem(&pp.display().to_string(), &ptext)?;
            ground(&d, &p, opts)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
    /// `(= a b)` when the flag is true, `(not (= a b))` otherwise.
    Eq(Term, Term, bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<Param>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDecl {
    pub name: String,
    pub params: Vec<Param>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub precondition: Vec<Literal>,
    pub effects: Vec<Literal>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub task: Atom,
    pub precondition: Vec<Literal>,
    pub subtasks: Vec<Atom>,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LiftedDomain {
    pub name: String,
    /// `(type, parent)`; everything ultimately derives from `object`.
    pub types: Vec<(String, String)>,
    pub constants: Vec<(String, String)>,
    pub predicates: Vec<PredicateDecl>,
    pub tasks: Vec<TaskDecl>,
    pub methods: Vec<MethodDecl>,
    pub actions: Vec<ActionDecl>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LiftedProblem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<(String, String)>,
    pub init: Vec<(String, Vec<String>)>,
    pub goal: Vec<(String, Vec<String>)>,
    /// Top-level task network, in order.
    pub tasks: Vec<(String, Vec<String>)>,
}
