//! Type-consistent instantiation of a lifted domain.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::*;
use crate::model::{AbstractTask, Action, Fact, FactId, Method, Problem, State, TaskRef};

#[derive(Debug, Clone)]
pub struct GroundOptions {
    /// Abort when any single schema produces more instantiations than this.
    pub max_instances: usize,
    /// Run reachability pruning after instantiation.
    pub prune: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_instances: 500_000,
            prune: true,
        }
    }
}

type Key = (String, Vec<String>);

struct Universe {
    objects: Vec<String>,
    index: HashMap<String, usize>,
    by_type: HashMap<String, Vec<usize>>,
}

impl Universe {
    fn new(d: &LiftedDomain, p: &LiftedProblem) -> Result<Self, HddlError> {
        let parents: HashMap<&str, &str> = d.types.iter().map(|(t, p)| (t.as_str(), p.as_str())).collect();
        let mut typed: HashMap<String, String> = HashMap::new();
        for (o, t) in d.constants.iter().chain(&p.objects) {
            if t != "object" && !parents.contains_key(t.as_str()) {
                return Err(HddlError::Mismatch {
                    file: "problem".into(),
                    line: 0,
                    msg: format!("object `{o}` has undeclared type `{t}`"),
                });
            }
            typed.insert(o.clone(), t.clone());
        }
        let mut objects: Vec<String> = typed.keys().cloned().collect();
        objects.sort();
        let index = objects.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        let mut by_type: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, o) in objects.iter().enumerate() {
            let mut t = typed[o].as_str();
            let mut guard = 0;
            loop {
                by_type.entry(t.to_string()).or_default().push(i);
                if t == "object" || guard > parents.len() {
                    break;
                }
                t = parents.get(t).copied().unwrap_or("object");
                guard += 1;
            }
        }
        by_type.entry("object".into()).or_default().dedup();
        Ok(Universe {
            objects,
            index,
            by_type,
        })
    }

    fn of_type(&self, ty: &str) -> &[usize] {
        self.by_type.get(ty).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

struct Binder<'a> {
    uni: &'a Universe,
    static_init: &'a HashSet<(String, Vec<usize>)>,
    fluent: &'a HashSet<String>,
    cap: usize,
}

enum Resolved {
    Obj(usize),
    Var(usize),
}

/// Polarity, predicate (`None` for equality) and resolved arguments.
type StaticCheck<'a> = (bool, Option<&'a str>, Vec<Resolved>);

impl Binder<'_> {
    fn resolve(&self, t: &Term, params: &[Param]) -> Option<Resolved> {
        match t {
            Term::Var(v) => params.iter().position(|p| &p.name == v).map(Resolved::Var),
            Term::Const(c) => self.uni.index.get(c).map(|&i| Resolved::Obj(i)),
        }
    }

    fn value(r: &Resolved, binding: &[usize]) -> usize {
        match *r {
            Resolved::Obj(o) => o,
            Resolved::Var(i) => binding[i],
        }
    }

    /// All bindings of `params` satisfying the static literals among `lits`.
    /// A literal is checked as soon as its last variable is bound.
    fn bindings(&self, what: &str, params: &[Param], lits: &[Literal]) -> Result<Vec<Vec<usize>>, HddlError> {
        let n = params.len();
        let mut checks: Vec<Vec<StaticCheck<'_>>> = (0..=n).map(|_| Vec::new()).collect();
        for l in lits {
            let (positive, pred, terms): (bool, Option<&str>, Vec<&Term>) = match l {
                Literal::Pos(a) if !self.fluent.contains(&a.pred) => (true, Some(a.pred.as_str()), a.args.iter().collect()),
                Literal::Neg(a) if !self.fluent.contains(&a.pred) => (false, Some(a.pred.as_str()), a.args.iter().collect()),
                Literal::Eq(x, y, pos) => (*pos, None, vec![x, y]),
                _ => continue,
            };
            let mut resolved = Vec::new();
            for t in terms {
                match self.resolve(t, params) {
                    Some(r) => resolved.push(r),
                    // unknown constant: the literal can only be false
                    None if positive => return Ok(Vec::new()),
                    None => continue,
                }
            }
            let level = resolved
                .iter()
                .filter_map(|r| match r {
                    Resolved::Var(i) => Some(*i + 1),
                    Resolved::Obj(_) => None,
                })
                .max()
                .unwrap_or(0);
            checks[level].push((positive, pred, resolved));
        }
        let holds = |c: &(bool, Option<&str>, Vec<Resolved>), b: &[usize]| -> bool {
            let (positive, pred, args) = c;
            let truth = match pred {
                None => Self::value(&args[0], b) == Self::value(&args[1], b),
                Some(p) => {
                    let vals: Vec<usize> = args.iter().map(|r| Self::value(r, b)).collect();
                    self.static_init.contains(&(p.to_string(), vals))
                }
            };
            truth == *positive
        };
        let mut out = Vec::new();
        if !checks[0].iter().all(|c| holds(c, &[])) {
            return Ok(out);
        }
        let mut binding = vec![0usize; n];
        self.extend(0, params, &checks, &holds, &mut binding, &mut out, what)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend<F>(
        &self,
        k: usize,
        params: &[Param],
        checks: &[Vec<StaticCheck<'_>>],
        holds: &F,
        binding: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        what: &str,
    ) -> Result<(), HddlError>
    where
        F: Fn(&(bool, Option<&str>, Vec<Resolved>), &[usize]) -> bool,
    {
        if k == params.len() {
            if out.len() >= self.cap {
                return Err(HddlError::TooManyInstances {
                    what: what.to_string(),
                    cap: self.cap,
                });
            }
            out.push(binding.clone());
            return Ok(());
        }
        for &o in self.uni.of_type(&params[k].ty) {
            binding[k] = o;
            if checks[k + 1].iter().all(|c| holds(c, binding)) {
                self.extend(k + 1, params, checks, holds, binding, out, what)?;
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Facts {
    list: Vec<Fact>,
    index: HashMap<Key, FactId>,
}

impl Facts {
    fn intern(&mut self, pred: &str, args: Vec<String>) -> FactId {
        let key = (pred.to_string(), args);
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.list.len();
        self.list.push(Fact::new(key.0.clone(), key.1.clone()));
        self.index.insert(key, id);
        id
    }
}

struct RawAction {
    name: String,
    args: Vec<String>,
    pre: Vec<FactId>,
    neg_pre: Vec<FactId>,
    add: Vec<FactId>,
    del: Vec<FactId>,
    guard: bool,
}

pub fn ground(d: &LiftedDomain, p: &LiftedProblem, opts: &GroundOptions) -> Result<Problem, HddlError> {
    let uni = Universe::new(d, p)?;
    let unknown = |o: &str| HddlError::Mismatch {
        file: "problem".into(),
        line: 0,
        msg: format!("unknown object `{o}`"),
    };
    let obj_ids = |args: &[String]| -> Result<Vec<usize>, HddlError> {
        args.iter().map(|a| uni.index.get(a).copied().ok_or_else(|| unknown(a))).collect()
    };

    let fluent: HashSet<String> = d
        .actions
        .iter()
        .flat_map(|a| a.effects.iter())
        .filter_map(|l| match l {
            Literal::Pos(a) | Literal::Neg(a) => Some(a.pred.clone()),
            Literal::Eq(..) => None,
        })
        .collect();
    let arity: HashMap<&str, usize> = d.predicates.iter().map(|p| (p.name.as_str(), p.params.len())).collect();
    for (pred, args) in p.init.iter().chain(&p.goal) {
        match arity.get(pred.as_str()) {
            Some(&n) if n == args.len() => {}
            _ => {
                return Err(HddlError::Mismatch {
                    file: "problem".into(),
                    line: 0,
                    msg: format!("`{pred}` with {} arguments is not a declared predicate", args.len()),
                })
            }
        }
    }
    let mut static_init: HashSet<(String, Vec<usize>)> = HashSet::new();
    let mut facts = Facts::default();
    let mut init_facts: Vec<FactId> = Vec::new();
    for (pred, args) in &p.init {
        let ids = obj_ids(args)?;
        if fluent.contains(pred) {
            init_facts.push(facts.intern(pred, args.clone()));
        } else {
            static_init.insert((pred.clone(), ids));
        }
    }
    let binder = Binder {
        uni: &uni,
        static_init: &static_init,
        fluent: &fluent,
        cap: opts.max_instances,
    };
    let name_of = |t: &Term, params: &[Param], b: &[usize]| -> String {
        match t {
            Term::Var(v) => uni.objects[b[params.iter().position(|p| &p.name == v).unwrap()]].clone(),
            Term::Const(c) => c.clone(),
        }
    };

    // Actions.
    let mut actions: Vec<RawAction> = Vec::new();
    let mut action_index: HashMap<Key, usize> = HashMap::new();
    let mut negated: BTreeSet<FactId> = BTreeSet::new();
    for a in &d.actions {
        for b in binder.bindings(&a.name, &a.params, &a.precondition)? {
            let args: Vec<String> = b.iter().map(|&o| uni.objects[o].clone()).collect();
            let mut ra = RawAction {
                name: a.name.clone(),
                args: args.clone(),
                pre: Vec::new(),
                neg_pre: Vec::new(),
                add: Vec::new(),
                del: Vec::new(),
                guard: false,
            };
            for l in &a.precondition {
                match l {
                    Literal::Pos(at) if fluent.contains(&at.pred) => {
                        let fa = at.args.iter().map(|t| name_of(t, &a.params, &b)).collect();
                        ra.pre.push(facts.intern(&at.pred, fa));
                    }
                    Literal::Neg(at) if fluent.contains(&at.pred) => {
                        let fa = at.args.iter().map(|t| name_of(t, &a.params, &b)).collect();
                        let f = facts.intern(&at.pred, fa);
                        negated.insert(f);
                        ra.neg_pre.push(f);
                    }
                    _ => {}
                }
            }
            for l in &a.effects {
                if let Literal::Pos(at) | Literal::Neg(at) = l {
                    let fa = at.args.iter().map(|t| name_of(t, &a.params, &b)).collect();
                    let f = facts.intern(&at.pred, fa);
                    if matches!(l, Literal::Pos(_)) {
                        ra.add.push(f);
                    } else {
                        ra.del.push(f);
                    }
                }
            }
            action_index.insert((a.name.clone(), args), actions.len());
            actions.push(ra);
        }
    }

    // Methods.
    let action_names: HashSet<&str> = d.actions.iter().map(|a| a.name.as_str()).collect();
    let mut tasks: Vec<AbstractTask> = Vec::new();
    let mut task_index: HashMap<Key, usize> = HashMap::new();
    let mut intern_task = |tasks: &mut Vec<AbstractTask>, key: Key| -> usize {
        if let Some(&t) = task_index.get(&key) {
            return t;
        }
        let id = tasks.len();
        tasks.push(AbstractTask {
            name: key.0.clone(),
            args: key.1.clone(),
            methods: Vec::new(),
        });
        task_index.insert(key, id);
        id
    };
    let mut methods: Vec<Method> = Vec::new();
    let mut guards: Vec<(usize, RawAction)> = Vec::new();
    for m in &d.methods {
        'binding: for b in binder.bindings(&m.name, &m.params, &m.precondition)? {
            let margs: Vec<String> = b.iter().map(|&o| uni.objects[o].clone()).collect();
            let mut subtasks = Vec::new();
            for s in &m.subtasks {
                let sargs: Vec<String> = s.args.iter().map(|t| name_of(t, &m.params, &b)).collect();
                if action_names.contains(s.pred.as_str()) {
                    match action_index.get(&(s.pred.clone(), sargs)) {
                        Some(&ai) => subtasks.push(TaskRef::Primitive(ai)),
                        None => continue 'binding,
                    }
                } else {
                    subtasks.push(TaskRef::Abstract(intern_task(&mut tasks, (s.pred.clone(), sargs))));
                }
            }
            let targs: Vec<String> = m.task.args.iter().map(|t| name_of(t, &m.params, &b)).collect();
            let task = intern_task(&mut tasks, (m.task.pred.clone(), targs));
            let mut guard = RawAction {
                name: format!("guard_{}", m.name),
                args: margs.clone(),
                pre: Vec::new(),
                neg_pre: Vec::new(),
                add: Vec::new(),
                del: Vec::new(),
                guard: true,
            };
            for l in &m.precondition {
                match l {
                    Literal::Pos(at) if fluent.contains(&at.pred) => {
                        let fa = at.args.iter().map(|t| name_of(t, &m.params, &b)).collect();
                        guard.pre.push(facts.intern(&at.pred, fa));
                    }
                    Literal::Neg(at) if fluent.contains(&at.pred) => {
                        let fa = at.args.iter().map(|t| name_of(t, &m.params, &b)).collect();
                        let f = facts.intern(&at.pred, fa);
                        negated.insert(f);
                        guard.neg_pre.push(f);
                    }
                    _ => {}
                }
            }
            let mid = methods.len();
            if !guard.pre.is_empty() || !guard.neg_pre.is_empty() {
                guards.push((mid, guard));
            }
            tasks[task].methods.push(mid);
            methods.push(Method {
                name: m.name.clone(),
                args: margs,
                task,
                subtasks,
            });
        }
    }

    // Top-level network.
    let mut top = Vec::new();
    for (name, args) in &p.tasks {
        obj_ids(args)?;
        if action_names.contains(name.as_str()) {
            match action_index.get(&(name.clone(), args.clone())) {
                Some(&ai) => top.push(TaskRef::Primitive(ai)),
                None => {
                    return Err(HddlError::Mismatch {
                        file: "problem".into(),
                        line: 0,
                        msg: format!("initial task `{name}` is an inapplicable action"),
                    })
                }
            }
        } else if d.tasks.iter().any(|t| &t.name == name && t.params.len() == args.len()) {
            top.push(TaskRef::Abstract(intern_task(&mut tasks, (name.clone(), args.clone()))));
        } else {
            return Err(HddlError::Mismatch {
                file: "problem".into(),
                line: 0,
                msg: format!("initial task `{name}` is not declared"),
            });
        }
    }
    let root = match top.as_slice() {
        [TaskRef::Abstract(t)] => *t,
        _ => {
            let t = intern_task(&mut tasks, ("__top".to_string(), Vec::new()));
            let mid = methods.len();
            tasks[t].methods.push(mid);
            methods.push(Method {
                name: "__top_method".into(),
                args: Vec::new(),
                task: t,
                subtasks: top,
            });
            t
        }
    };

    // Goal.
    let mut goal = Vec::new();
    for (pred, args) in &p.goal {
        let ids = obj_ids(args)?;
        if !fluent.contains(pred) && static_init.contains(&(pred.clone(), ids)) {
            continue;
        }
        goal.push(facts.intern(pred, args.clone()));
    }

    // Guards go after the ordinary actions; fix up method subtasks.
    for (mid, g) in guards {
        let gid = actions.len();
        actions.push(g);
        methods[mid].subtasks.insert(0, TaskRef::Primitive(gid));
    }

    // Complement facts for negative preconditions.
    let mut complement: HashMap<FactId, FactId> = HashMap::new();
    for &f in &negated {
        let fact = facts.list[f].clone();
        let c = facts.intern(&format!("~{}", fact.name), fact.args);
        complement.insert(f, c);
    }
    let nf = facts.list.len();
    let mut init = State::from_facts(nf, init_facts.iter().copied());
    for (&f, &c) in &complement {
        if !init.contains(f) {
            init.insert(c);
        }
    }
    let actions: Vec<Action> = actions
        .into_iter()
        .map(|ra| {
            let mut pre = ra.pre;
            pre.extend(ra.neg_pre.iter().map(|f| complement[f]));
            let mut add = ra.add.clone();
            let mut del = ra.del.clone();
            for f in &ra.add {
                if let Some(&c) = complement.get(f) {
                    del.push(c);
                }
            }
            for f in &ra.del {
                if let Some(&c) = complement.get(f) {
                    if !ra.add.contains(f) {
                        add.push(c);
                    }
                }
            }
            let mut a = Action::new(ra.name, pre, add, del);
            a.args = ra.args;
            a.guard = ra.guard;
            a
        })
        .collect();

    let problem = Problem {
        facts: facts.list,
        actions,
        tasks,
        methods,
        root,
        init,
        goal,
    };
    problem.validate()?;
    Ok(if opts.prune { prune(&problem) } else { problem })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hddl::parse;

    const TAXI_DOMAIN: &str = include_str!("../../fixtures/taxi/domain.hddl");
    const TAXI_PROBLEM: &str = include_str!("../../fixtures/taxi/problem.hddl");

    fn taxi() -> Problem {
        let (d, p) = parse(TAXI_DOMAIN, TAXI_PROBLEM).unwrap();
        ground(&d, &p, &GroundOptions::default()).unwrap()
    }

    #[test]
    fn taxi_methods_use_booth_streets_only() {
        let p = taxi();
        let root = &p.tasks[p.root];
        assert_eq!(root.name, "call_taxi");
        assert!(!root.methods.is_empty());
        let mut booths = BTreeSet::new();
        for &m in &root.methods {
            let method = &p.methods[m];
            let call = method
                .subtasks
                .iter()
                .find_map(|s| match *s {
                    TaskRef::Primitive(a) if p.actions[a].name == "call" => Some(a),
                    _ => None,
                })
                .expect("every method ends with a call");
            booths.insert(p.actions[call].args[1].clone());
        }
        assert_eq!(booths.into_iter().collect::<Vec<_>>(), vec!["street1", "street2"]);
    }

    #[test]
    fn method_precondition_becomes_guard() {
        let p = taxi();
        for m in &p.methods {
            let TaskRef::Primitive(g) = m.subtasks[0] else { panic!("guard expected") };
            let guard = &p.actions[g];
            assert!(guard.guard);
            assert_eq!(guard.name, format!("guard_{}", m.name));
            assert!(guard.eff_pos.is_empty() && guard.eff_neg.is_empty());
            assert!(!guard.precond.is_empty());
        }
    }

    #[test]
    fn empty_type_removes_action() {
        let domain = r#"(define (domain d) (:types a b)
            (:predicates (p ?x - a) (q))
            (:task t :parameters ())
            (:method m :parameters (?x - a) :task (t) :ordered-subtasks (and (act ?x)))
            (:method m2 :parameters (?y - b) :task (t) :ordered-subtasks (and (act2 ?y)))
            (:action act :parameters (?x - a) :effect (p ?x))
            (:action act2 :parameters (?y - b) :effect (q)))"#;
        let problem = "(define (problem p) (:domain d) (:objects o - b) (:htn :ordered-subtasks (t)) (:init))";
        let (d, p) = parse(domain, problem).unwrap();
        let g = ground(&d, &p, &GroundOptions::default()).unwrap();
        assert!(g.actions.iter().all(|a| a.name != "act"));
        assert_eq!(g.actions.len(), 1);
    }

    #[test]
    fn negative_precondition_uses_complement() {
        let domain = r#"(define (domain d)
            (:predicates (done))
            (:task t :parameters ())
            (:method m :parameters () :task (t) :ordered-subtasks (and (finish)))
            (:action finish :parameters () :precondition (not (done)) :effect (done)))"#;
        let problem = "(define (problem p) (:domain d) (:htn :ordered-subtasks (t)) (:init) (:goal (done)))";
        let (d, p) = parse(domain, problem).unwrap();
        let g = ground(&d, &p, &GroundOptions::default()).unwrap();
        let done = g.find_fact("done").unwrap();
        let not_done = g.find_fact("~done").unwrap();
        assert!(g.init.contains(not_done));
        let a = &g.actions[0];
        assert_eq!(a.precond, vec![not_done]);
        assert_eq!(a.eff_pos, vec![done]);
        assert_eq!(a.eff_neg, vec![not_done]);
    }

    #[test]
    fn multiple_top_tasks_get_synthetic_root() {
        let domain = r#"(define (domain d) (:predicates (a) (b))
            (:task t :parameters ())
            (:method m :parameters () :task (t) :ordered-subtasks (and (x)))
            (:action x :parameters () :effect (a))
            (:action y :parameters () :effect (b)))"#;
        let problem = "(define (problem p) (:domain d) (:htn :ordered-subtasks (and (t) (y))) (:init))";
        let (d, p) = parse(domain, problem).unwrap();
        let g = ground(&d, &p, &GroundOptions::default()).unwrap();
        assert_eq!(g.tasks[g.root].name, "__top");
        let m = &g.methods[g.tasks[g.root].methods[0]];
        assert_eq!(m.subtasks.len(), 2);
    }

    #[test]
    fn instantiation_cap_aborts() {
        let domain = r#"(define (domain d) (:predicates (p ?x ?y ?z))
            (:task t :parameters ())
            (:method m :parameters () :task (t) :ordered-subtasks ())
            (:action a :parameters (?x ?y ?z) :effect (p ?x ?y ?z)))"#;
        let problem = "(define (problem p) (:domain d) (:objects o1 o2 o3 o4 o5) (:htn :ordered-subtasks (t)) (:init))";
        let (d, p) = parse(domain, problem).unwrap();
        let opts = GroundOptions {
            max_instances: 100,
            prune: true,
        };
        assert!(matches!(ground(&d, &p, &opts), Err(HddlError::TooManyInstances { cap: 100, .. })));
    }

    #[test]
    fn grounding_is_deterministic() {
        assert_eq!(taxi(), taxi());
    }
}
