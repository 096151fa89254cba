//! Incremental propositional encoding of the grid.
//!
//! Every slot owns one selection variable per operation. Fact variables live
//! on boundaries between consecutive slots; a boundary is a vector of
//! literals, one per fact, and a fact that nothing at a slot can change
//! keeps the literal of the previous boundary. The first child of an
//! expanded slot starts at its parent's start boundary and the last child
//! ends at its parent's end boundary, so clauses of earlier layers stay
//! valid without copying.
//!
//! Per layer `l` two assumption literals select the query: `A_l` forbids
//! abstract operations on the frontier, `R_l` allows them as relaxed
//! actions. Both require the goal at the final boundary.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;
use tohtn_sat::{dimacs, AmoConfig, Lit, SatBackend, SatError, Session, SolveOutcome};

use crate::dt::{DecompositionTree, DtNode};
use crate::inference::Inference;
use crate::model::{FactId, Problem, TaskRef};
use crate::pdt::{Op, Pdt, SlotId};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("solver: {0}")]
    Sat(#[from] SatError),
    #[error("decoding failed: {0}")]
    Decode(String),
    #[error("decoded plan is invalid: {0}")]
    BadPlan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    pub amo: AmoConfig,
    /// Apply mandatory preconditions of abstract operations in solution
    /// queries too, not only in relaxed ones.
    pub mandpre_prune: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            amo: AmoConfig::default(),
            mandpre_prune: true,
        }
    }
}

/// A decoded decomposition tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtCandidate {
    pub tree: DecompositionTree,
    /// Leaves left to right; only actions when `relaxed` is false.
    pub plan: Vec<TaskRef>,
    /// Frontier slots holding the abstract leaves.
    pub targets: Vec<SlotId>,
    pub relaxed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryOutcome {
    Found(DtCandidate),
    Unsat,
    Interrupted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub layer: usize,
    pub kind: &'static str,
    pub verdict: &'static str,
    pub vars: u32,
    pub clauses: usize,
    pub seconds: f64,
}

pub struct Encoder {
    session: Session,
    cfg: EncoderConfig,
    nf: usize,
    /// Guards mandatory preconditions when they apply to relaxed queries only.
    rel: Lit,
    op_vars: Vec<Vec<Lit>>,
    method_vars: Vec<Vec<Lit>>,
    slot_bounds: Vec<(usize, usize)>,
    bounds: Vec<Vec<Lit>>,
    solution_lits: Vec<Lit>,
    relaxed_lits: Vec<Lit>,
    mutex_seen: HashSet<Vec<Lit>>,
    clauses: usize,
    pub history: Vec<QueryRecord>,
}

fn op_effects<'a>(p: &'a Problem, inf: &'a Inference, op: Op) -> (&'a [FactId], &'a [FactId]) {
    match op {
        Op::Blank => (&[], &[]),
        Op::Action(a) => (&p.actions[a].eff_pos, &p.actions[a].eff_neg),
        Op::Task(t, _) => (&inf.profiles[t].poss_eff_pos, &inf.profiles[t].poss_eff_neg),
    }
}

impl Encoder {
    /// Encodes layer 0: the root slot between the initial and final boundary.
    pub fn new(
        p: &Problem,
        inf: &Inference,
        pdt: &Pdt,
        cfg: EncoderConfig,
        backend: Box<dyn SatBackend>,
    ) -> Result<Self, EncodeError> {
        let mut session = Session::new(backend);
        let rel = session.new_var();
        let mut enc = Encoder {
            session,
            cfg,
            nf: p.facts.len(),
            rel,
            op_vars: Vec::new(),
            method_vars: Vec::new(),
            slot_bounds: Vec::new(),
            bounds: Vec::new(),
            solution_lits: Vec::new(),
            relaxed_lits: Vec::new(),
            mutex_seen: HashSet::new(),
            clauses: 0,
            history: Vec::new(),
        };
        let init: Vec<Lit> = (0..enc.nf).map(|_| enc.session.new_var()).collect();
        for (f, &l) in init.iter().enumerate() {
            enc.clause(&[if p.init.contains(f) { l } else { !l }])?;
        }
        enc.bounds.push(init);
        enc.mutexes_at(inf, 0)?;
        enc.encode_slot(p, inf, pdt, pdt.root(), 0, None)?;
        enc.open_layer(p, pdt, 0)?;
        Ok(enc)
    }

    fn clause(&mut self, lits: &[Lit]) -> Result<(), EncodeError> {
        self.clauses += 1;
        self.session.add_clause(lits)?;
        Ok(())
    }

    fn amo(&mut self, lits: &[Lit]) -> Result<(), EncodeError> {
        if lits.len() < 2 {
            return Ok(());
        }
        let before = self.session.num_clauses();
        self.cfg.amo.encoder().encode(&mut self.session, lits)?;
        self.clauses += self.session.num_clauses().saturating_sub(before);
        Ok(())
    }

    pub fn num_vars(&self) -> u32 {
        self.session.num_vars()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses
    }

    pub fn layers(&self) -> usize {
        self.solution_lits.len()
    }

    pub fn write_dimacs<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        dimacs::write_cnf(out, self.session.num_vars(), self.session.clauses())
    }

    fn mutexes_at(&mut self, inf: &Inference, b: usize) -> Result<(), EncodeError> {
        for g in &inf.mutexes {
            let mut lits: Vec<Lit> = g.0.iter().map(|&f| self.bounds[b][f]).collect();
            lits.sort_unstable();
            if self.mutex_seen.insert(lits.clone()) {
                self.amo(&lits)?;
            }
        }
        Ok(())
    }

    /// Allocates the slot's variables and adds its local clauses between
    /// boundary `start` and `end` (fresh when `None`). Returns the end
    /// boundary.
    fn encode_slot(
        &mut self,
        p: &Problem,
        inf: &Inference,
        pdt: &Pdt,
        s: SlotId,
        start: usize,
        end: Option<usize>,
    ) -> Result<usize, EncodeError> {
        let slot = &pdt.slots[s];
        debug_assert_eq!(self.op_vars.len(), s);
        let vars: Vec<Lit> = slot.ops.iter().map(|_| self.session.new_var()).collect();
        self.clause(&vars)?;
        self.amo(&vars)?;

        let mut changeable = FixedBitSet::with_capacity(self.nf);
        for &op in &slot.ops {
            let (add, del) = op_effects(p, inf, op);
            changeable.extend(add.iter().copied());
            changeable.extend(del.iter().copied());
        }
        let created = end.is_none();
        let end = match end {
            Some(e) => e,
            None => {
                let b: Vec<Lit> = (0..self.nf)
                    .map(|f| {
                        if changeable.contains(f) {
                            self.session.new_var()
                        } else {
                            self.bounds[start][f]
                        }
                    })
                    .collect();
                self.bounds.push(b);
                self.bounds.len() - 1
            }
        };

        for (&op, &x) in slot.ops.iter().zip(&vars) {
            match op {
                Op::Blank => {}
                Op::Action(a) => {
                    let act = &p.actions[a];
                    for &f in &act.precond {
                        self.clause(&[!x, self.bounds[start][f]])?;
                    }
                    for &f in &act.eff_pos {
                        self.clause(&[!x, self.bounds[end][f]])?;
                    }
                    for &f in &act.eff_neg {
                        self.clause(&[!x, !self.bounds[end][f]])?;
                    }
                }
                Op::Task(t, _) => {
                    if p.tasks[t].methods.is_empty() {
                        self.clause(&[!x])?;
                        continue;
                    }
                    for &f in &inf.profiles[t].mand_pre {
                        let b = self.bounds[start][f];
                        if self.cfg.mandpre_prune {
                            self.clause(&[!x, b])?;
                        } else {
                            self.clause(&[!x, !self.rel, b])?;
                        }
                    }
                }
            }
        }

        // Frame axioms: a flip needs a supporting operation.
        for f in 0..self.nf {
            let (b0, b1) = (self.bounds[start][f], self.bounds[end][f]);
            if b0 == b1 {
                continue;
            }
            let mut up = vec![b0, !b1];
            let mut down = vec![!b0, b1];
            for (&op, &x) in slot.ops.iter().zip(&vars) {
                let (add, del) = op_effects(p, inf, op);
                if add.binary_search(&f).is_ok() {
                    up.push(x);
                }
                if del.binary_search(&f).is_ok() {
                    down.push(x);
                }
            }
            self.clause(&up)?;
            self.clause(&down)?;
        }

        self.op_vars.push(vars);
        self.method_vars.push(Vec::new());
        self.slot_bounds.push((start, end));
        if created {
            self.mutexes_at(inf, end)?;
        }
        Ok(end)
    }

    /// Adds the assumption literals of layer `l`.
    fn open_layer(&mut self, p: &Problem, pdt: &Pdt, l: usize) -> Result<(), EncodeError> {
        if let (Some(&a), Some(&r)) = (self.solution_lits.last(), self.relaxed_lits.last()) {
            self.clause(&[!a])?;
            self.clause(&[!r])?;
        }
        let a = self.session.new_var();
        let r = self.session.new_var();
        for &s in &pdt.layers[l] {
            let slot = &pdt.slots[s];
            if slot.is_expanded() && slot.children.iter().all(|&c| c < self.op_vars.len()) {
                continue;
            }
            for (oi, op) in slot.ops.iter().enumerate() {
                if op.is_abstract() {
                    self.clause(&[!a, !self.op_vars[s][oi]])?;
                }
            }
        }
        let fin = self.slot_bounds[pdt.root()].1;
        for &g in &p.goal {
            let gl = self.bounds[fin][g];
            self.clause(&[!a, gl])?;
            self.clause(&[!r, gl])?;
        }
        self.solution_lits.push(a);
        self.relaxed_lits.push(r);
        Ok(())
    }

    /// Encodes the newest layer of `pdt`; every earlier layer must already
    /// be encoded.
    pub fn encode_layer(&mut self, p: &Problem, inf: &Inference, pdt: &Pdt) -> Result<(), EncodeError> {
        let l = pdt.num_layers() - 1;
        assert_eq!(l, self.layers(), "layers must be encoded in order");
        let parents: Vec<SlotId> = pdt.layers[l - 1]
            .iter()
            .copied()
            .filter(|&s| pdt.slots[s].is_expanded() && pdt.slots[pdt.slots[s].children[0]].layer == l)
            .collect();
        for s in parents {
            let (start, end) = self.slot_bounds[s];
            let kids = pdt.slots[s].children.clone();
            let mut b = start;
            for (i, &c) in kids.iter().enumerate() {
                let fixed_end = if i + 1 == kids.len() { Some(end) } else { None };
                b = self.encode_slot(p, inf, pdt, c, b, fixed_end)?;
            }
            self.link(pdt, s)?;
        }
        self.open_layer(p, pdt, l)
    }

    /// Hierarchy clauses between an expanded slot and its children.
    fn link(&mut self, pdt: &Pdt, s: SlotId) -> Result<(), EncodeError> {
        let slot = &pdt.slots[s];
        let child_lit = |enc: &Encoder, i: usize, op: Op| -> Lit {
            let c = slot.children[i];
            let oi = pdt.slots[c].op_index(op).expect("child op present");
            enc.op_vars[c][oi]
        };
        let mut ys = Vec::with_capacity(slot.methods.len());
        for _ in &slot.methods {
            ys.push(self.session.new_var());
        }
        for (oi, &op) in slot.ops.iter().enumerate() {
            let x = self.op_vars[s][oi];
            match op {
                Op::Blank => {
                    for i in 0..slot.children.len() {
                        let c = child_lit(self, i, Op::Blank);
                        self.clause(&[!x, c])?;
                    }
                }
                Op::Action(_) => {
                    for i in 0..slot.children.len() {
                        let c = child_lit(self, i, if i == 0 { op } else { Op::Blank });
                        self.clause(&[!x, c])?;
                    }
                }
                Op::Task(..) => {
                    let mut alo = vec![!x];
                    for (e, &y) in slot.methods.iter().zip(&ys) {
                        if e.op != oi {
                            continue;
                        }
                        alo.push(y);
                        self.clause(&[!y, x])?;
                        for (i, &cop) in e.children.iter().enumerate() {
                            let c = child_lit(self, i, cop);
                            self.clause(&[!y, c])?;
                        }
                    }
                    self.clause(&alo)?;
                }
            }
        }
        self.amo(&ys)?;
        self.method_vars[s] = ys;
        Ok(())
    }

    fn run(
        &mut self,
        p: &Problem,
        pdt: &Pdt,
        relaxed: bool,
        deadline: Option<Instant>,
    ) -> Result<QueryOutcome, EncodeError> {
        let l = self.layers() - 1;
        let assumptions = if relaxed {
            [self.relaxed_lits[l], self.rel]
        } else {
            [self.solution_lits[l], !self.rel]
        };
        let t0 = Instant::now();
        let outcome = self.session.solve_until(&assumptions, deadline)?;
        let verdict = match outcome {
            SolveOutcome::Sat => "sat",
            SolveOutcome::Unsat => "unsat",
            SolveOutcome::Interrupted => "interrupted",
        };
        self.history.push(QueryRecord {
            layer: l,
            kind: if relaxed { "relaxed" } else { "solution" },
            verdict,
            vars: self.session.num_vars(),
            clauses: self.clauses,
            seconds: t0.elapsed().as_secs_f64(),
        });
        match outcome {
            SolveOutcome::Unsat => Ok(QueryOutcome::Unsat),
            SolveOutcome::Interrupted => Ok(QueryOutcome::Interrupted),
            SolveOutcome::Sat => {
                let cand = self.decode(pdt, relaxed)?;
                if !relaxed {
                    check_plan(p, &cand)?;
                }
                Ok(QueryOutcome::Found(cand))
            }
        }
    }

    /// Solution query on the newest layer. A returned candidate has been
    /// re-executed from the initial state.
    pub fn solve_solution(
        &mut self,
        p: &Problem,
        pdt: &Pdt,
        deadline: Option<Instant>,
    ) -> Result<QueryOutcome, EncodeError> {
        self.run(p, pdt, false, deadline)
    }

    /// Relaxed query on the newest layer.
    pub fn solve_relaxed(
        &mut self,
        p: &Problem,
        pdt: &Pdt,
        deadline: Option<Instant>,
    ) -> Result<QueryOutcome, EncodeError> {
        self.run(p, pdt, true, deadline)
    }

    /// Solves under extra assumptions on the newest layer's solution query,
    /// returning only the verdict. Used for consistency checks.
    pub fn solution_sat_with(&mut self, extra: &[Lit]) -> Result<bool, EncodeError> {
        let l = self.layers() - 1;
        let mut a = vec![self.solution_lits[l], !self.rel];
        a.extend_from_slice(extra);
        Ok(self.session.solve(&a)? == SolveOutcome::Sat)
    }

    /// Literals selecting each method of a decoded tree.
    pub fn method_literals(&self, pdt: &Pdt, dt: &DecompositionTree) -> Vec<Lit> {
        let mut out = Vec::new();
        for n in &dt.nodes {
            if let (Some(s), Some(op), Some(m)) = (n.slot, n.op, n.method) {
                let oi = pdt.slots[s].op_index(op).expect("op present");
                if let Some(k) = pdt.slots[s].methods.iter().position(|e| e.op == oi && e.method == m) {
                    out.push(self.method_vars[s][k]);
                }
            }
        }
        out
    }

    /// Walks the model top-down from the root slot.
    pub fn decode(&self, pdt: &Pdt, relaxed: bool) -> Result<DtCandidate, EncodeError> {
        let model = self
            .session
            .model()
            .ok_or_else(|| EncodeError::Decode("no model".into()))?;
        let mut tree = DecompositionTree {
            nodes: Vec::new(),
            root: 0,
        };
        let mut targets = Vec::new();
        let root = self
            .decode_slot(pdt, model, pdt.root(), &mut tree, &mut targets)?
            .ok_or_else(|| EncodeError::Decode("root slot decoded to blank".into()))?;
        tree.root = root;
        let plan = tree.leaves();
        if !relaxed && plan.iter().any(|t| t.is_abstract()) {
            return Err(EncodeError::Decode("abstract task in a solution plan".into()));
        }
        Ok(DtCandidate {
            tree,
            plan,
            targets,
            relaxed,
        })
    }

    fn decode_slot(
        &self,
        pdt: &Pdt,
        model: &tohtn_sat::Model,
        s: SlotId,
        tree: &mut DecompositionTree,
        targets: &mut Vec<SlotId>,
    ) -> Result<Option<usize>, EncodeError> {
        let slot = &pdt.slots[s];
        let chosen: Vec<usize> = (0..slot.ops.len()).filter(|&i| model.lit(self.op_vars[s][i])).collect();
        let [oi] = chosen[..] else {
            return Err(EncodeError::Decode(format!("slot {s} selects {} operations", chosen.len())));
        };
        let op = slot.ops[oi];
        let Some(task) = op.task_ref() else { return Ok(None) };
        let mut node = DtNode::new(task);
        node.slot = Some(s);
        node.op = Some(op);
        let encoded = slot.is_expanded() && slot.children.iter().all(|&c| c < self.op_vars.len());
        if op.is_abstract() {
            if encoded {
                let picked: Vec<usize> = slot
                    .methods
                    .iter()
                    .enumerate()
                    .filter(|(k, e)| e.op == oi && model.lit(self.method_vars[s][*k]))
                    .map(|(k, _)| k)
                    .collect();
                let [k] = picked[..] else {
                    return Err(EncodeError::Decode(format!("slot {s} selects {} methods", picked.len())));
                };
                let entry = &slot.methods[k];
                node.method = Some(entry.method);
                for (i, &cop) in entry.children.iter().enumerate() {
                    if cop == Op::Blank {
                        continue;
                    }
                    let c = self
                        .decode_slot(pdt, model, slot.children[i], tree, targets)?
                        .ok_or_else(|| EncodeError::Decode(format!("child {i} of slot {s} is blank")))?;
                    node.children.push(c);
                }
            } else {
                targets.push(s);
            }
        }
        Ok(Some(tree.push(node)))
    }
}

fn check_plan(p: &Problem, cand: &DtCandidate) -> Result<(), EncodeError> {
    let plan = cand
        .tree
        .primitive_plan()
        .ok_or_else(|| EncodeError::BadPlan("abstract leaf".into()))?;
    match p.apply_seq(&p.init, &plan) {
        Ok(Some(s)) if p.is_goal(&s) => Ok(()),
        Ok(Some(_)) => Err(EncodeError::BadPlan("goal not reached".into())),
        _ => Err(EncodeError::BadPlan("plan not executable".into())),
    }
}
