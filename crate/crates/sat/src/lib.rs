//! Incremental SAT solving for the planner.
//!
//! [`Session`] is the handle the encoder talks to: a monotonically growing
//! clause store on top of a pluggable [`SatBackend`], queried repeatedly
//! under assumption literals. The bundled [`cdcl::CdclSolver`] is the
//! reference backend. [`amo`] holds the at-most-one encodings.

pub mod amo;
pub mod cdcl;
pub mod dimacs;
mod lit;

use std::time::Instant;

use thiserror::Error;

pub use amo::{AmoConfig, AmoEncoding, AmoScheme, GroupRule};
pub use lit::{Lit, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatError {
    #[error("literal {0} uses a variable that was never allocated")]
    UnallocatedVar(i32),
    #[error("empty clause added to the store")]
    EmptyClause,
    #[error("unknown SAT backend `{0}`")]
    UnknownBackend(String),
    #[error("unknown at-most-one scheme `{0}`")]
    UnknownAmoScheme(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat,
    Unsat,
    /// The deadline passed before a verdict was reached.
    Interrupted,
}

/// The contract every solver backend implements.
pub trait SatBackend: Send {
    fn name(&self) -> &'static str;
    fn new_var(&mut self) -> Var;
    /// Clauses are permanent. An empty clause makes the store unsatisfiable.
    fn add_clause(&mut self, lits: &[Lit]);
    fn solve(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> SolveOutcome;
    /// Value of `v` in the model of the last `Sat` answer.
    fn model_value(&self, v: Var) -> bool;
}

type BackendCtor = fn(u64) -> Box<dyn SatBackend>;

/// Backends selectable by name.
pub const BACKENDS: &[(&str, BackendCtor)] = &[("cdcl", |seed| Box::new(cdcl::CdclSolver::new(seed)))];

pub fn backend_by_name(name: &str, seed: u64) -> Result<Box<dyn SatBackend>, SatError> {
    BACKENDS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ctor)| ctor(seed))
        .ok_or_else(|| SatError::UnknownBackend(name.to_string()))
}

/// Anything clauses can be emitted into. Encoders are written against this
/// so they can target a live session or a plain clause list.
pub trait ClauseSink {
    fn fresh_var(&mut self) -> Var;
    fn emit(&mut self, lits: &[Lit]) -> Result<(), SatError>;
}

/// A model snapshot, indexed by variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn value(&self, v: Var) -> bool {
        self.0[v.index()]
    }

    pub fn lit(&self, l: Lit) -> bool {
        self.value(l.var()) == l.is_positive()
    }

    pub fn satisfies(&self, clause: &[Lit]) -> bool {
        clause.iter().any(|&l| self.lit(l))
    }

    pub fn num_vars(&self) -> usize {
        self.0.len() - 1
    }
}

/// Incremental session: variable counter, clause store, backend.
pub struct Session {
    backend: Box<dyn SatBackend>,
    num_vars: u32,
    store: Vec<Vec<Lit>>,
    model: Option<Model>,
    keep_store: bool,
}

impl Default for Session {
    fn default() -> Self {
        Session::new(Box::new(cdcl::CdclSolver::new(0)))
    }
}

impl Session {
    pub fn new(backend: Box<dyn SatBackend>) -> Self {
        Session {
            backend,
            num_vars: 0,
            store: Vec::new(),
            model: None,
            keep_store: true,
        }
    }

    pub fn with_seed(seed: u64) -> Self {
        Session::new(Box::new(cdcl::CdclSolver::new(seed)))
    }

    /// Stop mirroring clauses on the Rust side. DIMACS dumps and
    /// [`Session::clauses`] become empty afterwards.
    pub fn discard_store(&mut self) {
        self.keep_store = false;
        self.store = Vec::new();
    }

    pub fn backend_name(&self) -> &'static str {
        self.backend.name()
    }

    pub fn new_var(&mut self) -> Lit {
        let v = self.backend.new_var();
        self.num_vars += 1;
        debug_assert_eq!(v.0, self.num_vars);
        v.pos()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.store.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.store
    }

    fn check(&self, l: Lit) -> Result<(), SatError> {
        if l.var().0 == 0 || l.var().0 > self.num_vars {
            return Err(SatError::UnallocatedVar(l.to_dimacs()));
        }
        Ok(())
    }

    /// Adds a clause permanently. An empty clause is accepted and makes every
    /// later query UNSAT, but it is also reported as [`SatError::EmptyClause`].
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        for &l in lits {
            self.check(l)?;
        }
        if self.keep_store {
            self.store.push(lits.to_vec());
        }
        self.backend.add_clause(lits);
        if lits.is_empty() {
            return Err(SatError::EmptyClause);
        }
        Ok(())
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome, SatError> {
        self.solve_until(assumptions, None)
    }

    pub fn solve_until(
        &mut self,
        assumptions: &[Lit],
        deadline: Option<Instant>,
    ) -> Result<SolveOutcome, SatError> {
        for &l in assumptions {
            self.check(l)?;
        }
        let outcome = self.backend.solve(assumptions, deadline);
        self.model = match outcome {
            SolveOutcome::Sat => {
                let mut m = Vec::with_capacity(self.num_vars as usize + 1);
                m.push(false);
                for v in 1..=self.num_vars {
                    m.push(self.backend.model_value(Var(v)));
                }
                Some(Model(m))
            }
            _ => None,
        };
        Ok(outcome)
    }

    /// Model of the last query, if it was SAT.
    pub fn model(&self) -> Option<&Model> {
        self.model.as_ref()
    }
}

impl ClauseSink for Session {
    fn fresh_var(&mut self) -> Var {
        self.new_var().var()
    }

    fn emit(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        self.add_clause(lits)
    }
}

/// A plain clause list with its own variable counter.
#[derive(Debug, Default, Clone)]
pub struct ClauseList {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

impl ClauseList {
    pub fn with_vars(num_vars: u32) -> Self {
        ClauseList {
            num_vars,
            clauses: Vec::new(),
        }
    }
}

impl ClauseSink for ClauseList {
    fn fresh_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    fn emit(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        self.clauses.push(lits.to_vec());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_var_starts_at_one_and_is_fresh() {
        let mut s = Session::default();
        let a = s.new_var();
        assert_eq!(a.to_dimacs(), 1);
        let b = s.new_var();
        assert_ne!(a, b);
        s.add_clause(&[a, b]).unwrap();
        let c = s.new_var();
        assert_eq!(c.to_dimacs(), 3);
    }

    #[test]
    fn contradicting_units_are_unsat() {
        let mut s = Session::default();
        let x = s.new_var();
        s.add_clause(&[x]).unwrap();
        s.add_clause(&[!x]).unwrap();
        assert_eq!(s.solve(&[]).unwrap(), SolveOutcome::Unsat);
    }

    #[test]
    fn tautology_is_accepted() {
        let mut s = Session::default();
        let x = s.new_var();
        s.add_clause(&[x, !x]).unwrap();
        assert_eq!(s.solve(&[]).unwrap(), SolveOutcome::Sat);
    }

    #[test]
    fn unit_propagates_into_model() {
        let mut s = Session::default();
        let x = s.new_var();
        let y = s.new_var();
        s.add_clause(&[!x]).unwrap();
        s.add_clause(&[x, y]).unwrap();
        assert_eq!(s.solve(&[]).unwrap(), SolveOutcome::Sat);
        let m = s.model().unwrap();
        assert!(!m.lit(x));
        assert!(m.lit(y));
    }

    #[test]
    fn assumption_forces_other_literal() {
        let mut s = Session::default();
        let x = s.new_var();
        let y = s.new_var();
        s.add_clause(&[x, y]).unwrap();
        assert_eq!(s.solve(&[!x]).unwrap(), SolveOutcome::Sat);
        assert!(s.model().unwrap().lit(y));
    }

    #[test]
    fn unit_chain_against_assumption_is_unsat() {
        let mut s = Session::default();
        let x = s.new_var();
        let y = s.new_var();
        s.add_clause(&[x]).unwrap();
        s.add_clause(&[!x, y]).unwrap();
        assert_eq!(s.solve(&[!y]).unwrap(), SolveOutcome::Unsat);
        assert_eq!(s.solve(&[]).unwrap(), SolveOutcome::Sat);
    }

    #[test]
    fn unallocated_variable_is_rejected() {
        let mut s = Session::default();
        s.new_var();
        let bogus = Lit::from_dimacs(2).unwrap();
        assert_eq!(s.add_clause(&[bogus]), Err(SatError::UnallocatedVar(2)));
        assert_eq!(s.solve(&[bogus]), Err(SatError::UnallocatedVar(2)));
    }

    #[test]
    fn empty_clause_reported_and_store_unsat() {
        let mut s = Session::default();
        s.new_var();
        assert_eq!(s.add_clause(&[]), Err(SatError::EmptyClause));
        assert_eq!(s.solve(&[]).unwrap(), SolveOutcome::Unsat);
    }

    #[test]
    fn backend_registry_lookup() {
        assert!(backend_by_name("cdcl", 0).is_ok());
        assert!(matches!(
            backend_by_name("glucose", 0),
            Err(SatError::UnknownBackend(_))
        ));
    }
}
