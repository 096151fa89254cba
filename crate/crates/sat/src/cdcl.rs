//! Reference CDCL backend.
//!
//! Two-watched-literal propagation, first-UIP learning with basic clause
//! minimization, VSIDS with lowest-index tie breaking, phase saving and Luby
//! restarts. Assumptions are decided first, one per decision level, in the
//! order given. Learned clauses never depend on assumptions, so they stay
//! valid across calls.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Lit, SatBackend, SolveOutcome, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

type ClauseRef = u32;

#[derive(Clone, Copy)]
struct Watch {
    cref: ClauseRef,
    blocker: Lit,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
}

/// Max-heap on activity; ties go to the lowest variable index.
#[derive(Default)]
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarOrder {
    fn better(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn insert(&mut self, act: &[f64], v: u32) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.sift_up(act, i);
    }

    fn bumped(&mut self, act: &[f64], v: u32) {
        if let Some(i) = self.pos[v as usize] {
            self.sift_up(act, i);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = Some(0);
            self.sift_down(act, 0);
        }
        Some(top)
    }

    fn sift_up(&mut self, act: &[f64], mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let pv = self.heap[parent];
            if !Self::better(act, v, pv) {
                break;
            }
            self.heap[i] = pv;
            self.pos[pv as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn sift_down(&mut self, act: &[f64], mut i: usize) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && Self::better(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            let cv = self.heap[child];
            if !Self::better(act, cv, v) {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

const RESTART_BASE: f64 = 100.0;
const VAR_DECAY: f64 = 0.95;

pub struct CdclSolver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    order: VarOrder,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    var_inc: f64,
    num_vars: u32,
    ok: bool,
    model: Vec<bool>,
    rng: Option<ChaCha8Rng>,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

impl Default for CdclSolver {
    fn default() -> Self {
        Self::new(0)
    }
}

impl CdclSolver {
    /// `seed == 0` gives the plain deterministic heuristic; any other seed
    /// perturbs initial activities reproducibly.
    pub fn new(seed: u64) -> Self {
        let mut s = CdclSolver {
            clauses: Vec::new(),
            watches: vec![Vec::new(), Vec::new()],
            assigns: vec![Value::Undef],
            level: vec![0],
            reason: vec![None],
            polarity: vec![false],
            activity: vec![0.0],
            seen: vec![false],
            order: VarOrder::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            num_vars: 0,
            ok: true,
            model: vec![false],
            rng: (seed != 0).then(|| ChaCha8Rng::seed_from_u64(seed)),
            conflicts: 0,
            decisions: 0,
            propagations: 0,
        };
        s.order.grow(1);
        s
    }

    #[inline]
    fn value(&self, l: Lit) -> Value {
        match self.assigns[l.var().index()] {
            Value::Undef => Value::Undef,
            Value::True if l.is_positive() => Value::True,
            Value::False if !l.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], Value::Undef);
        self.assigns[v] = if l.is_positive() {
            Value::True
        } else {
            Value::False
        };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v] = Value::Undef;
            self.reason[v] = None;
            self.polarity[v] = l.is_positive();
            self.order.insert(&self.activity, v as u32);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn attach(&mut self, cref: ClauseRef) {
        let c = &self.clauses[cref as usize].lits;
        let (a, b) = (c[0], c[1]);
        self.watches[a.code()].push(Watch { cref, blocker: b });
        self.watches[b.code()].push(Watch { cref, blocker: a });
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() && conflict.is_none() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                let lits = &mut self.clauses[cref as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let first_val = match self.assigns[first.var().index()] {
                    Value::Undef => Value::Undef,
                    Value::True if first.is_positive() => Value::True,
                    Value::False if !first.is_positive() => Value::True,
                    _ => Value::False,
                };
                if first != w.blocker && first_val == Value::True {
                    ws[j] = Watch {
                        cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    let l = lits[k];
                    let is_false = match self.assigns[l.var().index()] {
                        Value::Undef => false,
                        Value::True => !l.is_positive(),
                        Value::False => l.is_positive(),
                    };
                    if !is_false {
                        lits.swap(1, k);
                        let nw = lits[1];
                        self.watches[nw.code()].push(Watch {
                            cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch {
                    cref,
                    blocker: first,
                };
                j += 1;
                if first_val == Value::False {
                    conflict = Some(cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
        }
        conflict
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(&self.activity, v as u32);
    }

    fn analyze(&mut self, mut confl: ClauseRef) -> (Vec<Lit>, u32) {
        let mut out: Vec<Lit> = vec![Lit::new(Var(1), true)];
        let mut path_count = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level();
        loop {
            let start = usize::from(p.is_some());
            let n = self.clauses[confl as usize].lits.len();
            for k in start..n {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path_count += 1;
                    } else {
                        out.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[lit.var().index()] = false;
            path_count -= 1;
            if path_count == 0 {
                break;
            }
            confl = self.reason[lit.var().index()].expect("implied literal has a reason");
        }
        out[0] = !p.unwrap();

        // basic minimization: drop literals whose reason is subsumed by the clause
        let mut kept = vec![out[0]];
        for &l in &out[1..] {
            let v = l.var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..].iter().all(|q| {
                    let qv = q.var().index();
                    self.seen[qv] || self.level[qv] == 0
                }),
            };
            if !redundant {
                kept.push(l);
            }
        }
        for l in &out {
            self.seen[l.var().index()] = false;
        }
        let mut out = kept;

        let bt = if out.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..out.len() {
                if self.level[out[i].var().index()] > self.level[out[max_i].var().index()] {
                    max_i = i;
                }
            }
            out.swap(1, max_i);
            self.level[out[1].var().index()]
        };
        (out, bt)
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == Value::Undef {
                return Some(Lit::new(Var(v), self.polarity[v as usize]));
            }
        }
        None
    }

    fn search(
        &mut self,
        assumptions: &[Lit],
        conflict_limit: u64,
        deadline: Option<Instant>,
    ) -> Option<SolveOutcome> {
        let mut local_conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                local_conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SolveOutcome::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.clauses.len() as ClauseRef;
                    let first = learnt[0];
                    self.clauses.push(Clause {
                        lits: learnt,
                        learnt: true,
                    });
                    self.attach(cref);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                if local_conflicts.is_multiple_of(256) {
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            self.cancel_until(0);
                            return Some(SolveOutcome::Interrupted);
                        }
                    }
                }
            } else {
                if local_conflicts >= conflict_limit {
                    self.cancel_until(0);
                    return None;
                }
                let mut next = None;
                while (self.decision_level() as usize) < assumptions.len() {
                    let a = assumptions[self.decision_level() as usize];
                    match self.value(a) {
                        Value::True => self.trail_lim.push(self.trail.len()),
                        Value::False => {
                            self.cancel_until(0);
                            return Some(SolveOutcome::Unsat);
                        }
                        Value::Undef => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(l) => l,
                    None => {
                        self.decisions += 1;
                        if self.decisions.is_multiple_of(4096) {
                            if let Some(d) = deadline {
                                if Instant::now() >= d {
                                    self.cancel_until(0);
                                    return Some(SolveOutcome::Interrupted);
                                }
                            }
                        }
                        match self.pick_branch() {
                            Some(l) => l,
                            None => {
                                for v in 1..=self.num_vars as usize {
                                    self.model[v] = self.assigns[v] == Value::True;
                                }
                                self.cancel_until(0);
                                return Some(SolveOutcome::Sat);
                            }
                        }
                    }
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, None);
            }
        }
    }

    pub fn num_learnts(&self) -> usize {
        self.clauses.iter().filter(|c| c.learnt).count()
    }
}

impl SatBackend for CdclSolver {
    fn name(&self) -> &'static str {
        "cdcl"
    }

    fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        let v = self.num_vars;
        let jitter = match self.rng.as_mut() {
            Some(r) => r.gen::<f64>() * 1e-5,
            None => 0.0,
        };
        self.assigns.push(Value::Undef);
        self.level.push(0);
        self.reason.push(None);
        self.polarity.push(false);
        self.activity.push(jitter);
        self.seen.push(false);
        self.model.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.grow(v as usize + 1);
        self.order.insert(&self.activity, v);
        Var(v)
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        for w in c.windows(2) {
            if w[0] == !w[1] {
                return;
            }
        }
        let mut simplified = Vec::with_capacity(c.len());
        for &l in &c {
            match self.value(l) {
                Value::True => return,
                Value::False => {}
                Value::Undef => simplified.push(l),
            }
        }
        match simplified.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(simplified[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                let cref = self.clauses.len() as ClauseRef;
                self.clauses.push(Clause {
                    lits: simplified,
                    learnt: false,
                });
                self.attach(cref);
            }
        }
    }

    fn solve(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> SolveOutcome {
        if !self.ok {
            return SolveOutcome::Unsat;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveOutcome::Unsat;
        }
        let mut restarts = 0u64;
        loop {
            let limit = (luby(2.0, restarts) * RESTART_BASE) as u64;
            if let Some(outcome) = self.search(assumptions, limit, deadline) {
                return outcome;
            }
            restarts += 1;
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    return SolveOutcome::Interrupted;
                }
            }
        }
    }

    fn model_value(&self, v: Var) -> bool {
        self.model[v.index()]
    }
}
