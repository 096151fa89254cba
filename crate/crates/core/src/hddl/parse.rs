use std::collections::{HashMap, HashSet};

use super::sexpr::{self, SExpr};
use super::*;

struct Ctx<'a> {
    file: &'a str,
}

impl Ctx<'_> {
    fn syntax(&self, line: usize, msg: impl Into<String>) -> HddlError {
        HddlError::Syntax {
            file: self.file.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn unsupported(&self, line: usize, construct: impl Into<String>) -> HddlError {
        HddlError::Unsupported {
            file: self.file.to_string(),
            line,
            construct: construct.into(),
        }
    }

    fn mismatch(&self, line: usize, msg: impl Into<String>) -> HddlError {
        HddlError::Mismatch {
            file: self.file.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn list<'e>(&self, e: &'e SExpr, what: &str) -> Result<&'e [SExpr], HddlError> {
        e.list().ok_or_else(|| self.syntax(e.line(), format!("expected a list for {what}")))
    }

    fn atom<'e>(&self, e: &'e SExpr, what: &str) -> Result<&'e str, HddlError> {
        e.atom().ok_or_else(|| self.syntax(e.line(), format!("expected a name for {what}")))
    }

    /// `a b - t c` style lists, defaulting to `object`.
    fn typed_list(&self, items: &[SExpr]) -> Result<Vec<(String, String)>, HddlError> {
        let mut out = Vec::new();
        let mut pending: Vec<String> = Vec::new();
        let mut i = 0;
        while i < items.len() {
            let e = &items[i];
            match e {
                SExpr::Atom(a, _) if a == "-" => {
                    let ty = items.get(i + 1).ok_or_else(|| self.syntax(e.line(), "dangling `-`"))?;
                    let ty = match ty {
                        SExpr::Atom(t, _) => t.clone(),
                        SExpr::List(..) => {
                            let head = ty.head().unwrap_or("");
                            return Err(self.unsupported(ty.line(), format!("({head} ...) type")));
                        }
                    };
                    for n in pending.drain(..) {
                        out.push((n, ty.clone()));
                    }
                    i += 2;
                }
                SExpr::Atom(a, _) => {
                    pending.push(a.clone());
                    i += 1;
                }
                SExpr::List(..) => return Err(self.syntax(e.line(), "unexpected list in typed list")),
            }
        }
        for n in pending {
            out.push((n, "object".to_string()));
        }
        Ok(out)
    }

    fn params(&self, e: &SExpr) -> Result<Vec<Param>, HddlError> {
        let items = self.list(e, ":parameters")?;
        self.typed_list(items)?
            .into_iter()
            .map(|(name, ty)| {
                if !name.starts_with('?') {
                    return Err(self.syntax(e.line(), format!("parameter `{name}` must start with `?`")));
                }
                Ok(Param { name, ty })
            })
            .collect()
    }

    fn term(&self, e: &SExpr) -> Result<Term, HddlError> {
        let a = self.atom(e, "a term")?;
        Ok(if a.starts_with('?') {
            Term::Var(a.to_string())
        } else {
            Term::Const(a.to_string())
        })
    }

    fn atom_expr(&self, e: &SExpr) -> Result<Atom, HddlError> {
        let items = self.list(e, "an atom")?;
        let pred = self.atom(items.first().ok_or_else(|| self.syntax(e.line(), "empty atom"))?, "a predicate")?;
        let args = items[1..].iter().map(|t| self.term(t)).collect::<Result<_, _>>()?;
        Ok(Atom {
            pred: pred.to_string(),
            args,
        })
    }

    fn condition(&self, e: &SExpr, out: &mut Vec<Literal>) -> Result<(), HddlError> {
        let items = self.list(e, "a condition")?;
        let Some(head) = items.first() else {
            return Ok(());
        };
        match head.atom() {
            Some("and") => {
                for c in &items[1..] {
                    self.condition(c, out)?;
                }
            }
            Some("not") => {
                let inner = items
                    .get(1)
                    .filter(|_| items.len() == 2)
                    .ok_or_else(|| self.syntax(e.line(), "`not` takes one argument"))?;
                match inner.head() {
                    Some("=") => {
                        let (a, b) = self.eq_args(inner)?;
                        out.push(Literal::Eq(a, b, false));
                    }
                    Some(h @ ("and" | "or" | "not" | "forall" | "exists" | "imply" | "when")) => {
                        return Err(self.unsupported(inner.line(), format!("not ({h} ...)")));
                    }
                    _ => out.push(Literal::Neg(self.atom_expr(inner)?)),
                }
            }
            Some("=") => {
                let (a, b) = self.eq_args(e)?;
                out.push(Literal::Eq(a, b, true));
            }
            Some(h @ ("or" | "forall" | "exists" | "imply" | "when" | "preference")) => {
                return Err(self.unsupported(e.line(), h));
            }
            _ => out.push(Literal::Pos(self.atom_expr(e)?)),
        }
        Ok(())
    }

    fn eq_args(&self, e: &SExpr) -> Result<(Term, Term), HddlError> {
        let items = self.list(e, "=")?;
        if items.len() != 3 {
            return Err(self.syntax(e.line(), "`=` takes two arguments"));
        }
        Ok((self.term(&items[1])?, self.term(&items[2])?))
    }

    fn effect(&self, e: &SExpr, out: &mut Vec<Literal>) -> Result<(), HddlError> {
        let items = self.list(e, "an effect")?;
        let Some(head) = items.first() else {
            return Ok(());
        };
        match head.atom() {
            Some("and") => {
                for c in &items[1..] {
                    self.effect(c, out)?;
                }
            }
            Some("not") => {
                let inner = items
                    .get(1)
                    .filter(|_| items.len() == 2)
                    .ok_or_else(|| self.syntax(e.line(), "`not` takes one argument"))?;
                if let Some(h @ ("and" | "forall" | "when" | "=")) = inner.head() {
                    return Err(self.unsupported(inner.line(), format!("not ({h} ...)")));
                }
                out.push(Literal::Neg(self.atom_expr(inner)?));
            }
            Some(h @ ("forall" | "when" | "increase" | "decrease" | "assign" | "or" | "=")) => {
                return Err(self.unsupported(e.line(), h));
            }
            _ => out.push(Literal::Pos(self.atom_expr(e)?)),
        }
        Ok(())
    }

    /// Totally ordered task network. Accepts `(and (t1 (a ?x)) ...)`, a bare
    /// `(a ?x)`, `(t1 (a ?x))` or `()`.
    fn task_network(&self, e: &SExpr) -> Result<Vec<Atom>, HddlError> {
        let items = self.list(e, "a task network")?;
        if items.is_empty() {
            return Ok(Vec::new());
        }
        let entries: Vec<&SExpr> = if e.head() == Some("and") {
            items[1..].iter().collect()
        } else {
            vec![e]
        };
        entries.into_iter().map(|s| self.subtask(s)).collect()
    }

    fn subtask(&self, e: &SExpr) -> Result<Atom, HddlError> {
        let items = self.list(e, "a subtask")?;
        if items.len() == 2 && items[0].atom().is_some() && items[1].list().is_some() {
            return self.atom_expr(&items[1]);
        }
        self.atom_expr(e)
    }
}

/// Key/value pairs after a header, e.g. `:parameters (...) :task (...)`.
fn keyword_pairs<'e>(ctx: &Ctx, items: &'e [SExpr]) -> Result<Vec<(&'e str, &'e SExpr)>, HddlError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let k = ctx.atom(&items[i], "a keyword")?;
        if !k.starts_with(':') {
            return Err(ctx.syntax(items[i].line(), format!("expected a keyword, found `{k}`")));
        }
        let v = items
            .get(i + 1)
            .ok_or_else(|| ctx.syntax(items[i].line(), format!("missing value for `{k}`")))?;
        out.push((k, v));
        i += 2;
    }
    Ok(out)
}

fn expect_define<'e>(ctx: &Ctx, root: &'e SExpr, kind: &str) -> Result<(String, &'e [SExpr]), HddlError> {
    let items = ctx.list(root, "define")?;
    if items.first().and_then(|a| a.atom()) != Some("define") {
        return Err(ctx.syntax(root.line(), "expected `(define ...)`"));
    }
    let header = items.get(1).ok_or_else(|| ctx.syntax(root.line(), "missing header"))?;
    let h = ctx.list(header, "header")?;
    if h.len() != 2 || h[0].atom() != Some(kind) {
        return Err(ctx.syntax(header.line(), format!("expected `({kind} NAME)`")));
    }
    Ok((ctx.atom(&h[1], "name")?.to_string(), &items[2..]))
}

pub fn parse_domain(file: &str, text: &str) -> Result<LiftedDomain, HddlError> {
    let ctx = Ctx { file };
    let root = sexpr::parse(file, text)?;
    let (name, sections) = expect_define(&ctx, &root, "domain")?;
    let mut d = LiftedDomain {
        name,
        ..Default::default()
    };
    for sec in sections {
        let items = ctx.list(sec, "a domain section")?;
        let key = items.first().and_then(|a| a.atom()).unwrap_or("");
        match key {
            ":requirements" => {}
            ":types" => d.types.extend(ctx.typed_list(&items[1..])?),
            ":constants" => d.constants.extend(ctx.typed_list(&items[1..])?),
            ":predicates" => {
                for p in &items[1..] {
                    let pi = ctx.list(p, "a predicate")?;
                    let name = ctx.atom(pi.first().ok_or_else(|| ctx.syntax(p.line(), "empty predicate"))?, "predicate")?;
                    let params = ctx.params(&SExpr::List(pi[1..].to_vec(), p.line()))?;
                    d.predicates.push(PredicateDecl {
                        name: name.to_string(),
                        params,
                    });
                }
            }
            ":task" => {
                let name = ctx.atom(items.get(1).ok_or_else(|| ctx.syntax(sec.line(), "task without name"))?, "task")?;
                let mut params = Vec::new();
                for (k, v) in keyword_pairs(&ctx, &items[2..])? {
                    match k {
                        ":parameters" => params = ctx.params(v)?,
                        other => return Err(ctx.unsupported(v.line(), format!(":task {other}"))),
                    }
                }
                d.tasks.push(TaskDecl {
                    name: name.to_string(),
                    params,
                });
            }
            ":action" => {
                let name = ctx.atom(items.get(1).ok_or_else(|| ctx.syntax(sec.line(), "action without name"))?, "action")?;
                let mut a = ActionDecl {
                    name: name.to_string(),
                    params: Vec::new(),
                    precondition: Vec::new(),
                    effects: Vec::new(),
                    line: sec.line(),
                };
                for (k, v) in keyword_pairs(&ctx, &items[2..])? {
                    match k {
                        ":parameters" => a.params = ctx.params(v)?,
                        ":precondition" => ctx.condition(v, &mut a.precondition)?,
                        ":effect" => ctx.effect(v, &mut a.effects)?,
                        other => return Err(ctx.unsupported(v.line(), format!(":action {other}"))),
                    }
                }
                d.actions.push(a);
            }
            ":method" => {
                let name = ctx.atom(items.get(1).ok_or_else(|| ctx.syntax(sec.line(), "method without name"))?, "method")?;
                let mut params = Vec::new();
                let mut task = None;
                let mut precondition = Vec::new();
                let mut subtasks = Vec::new();
                for (k, v) in keyword_pairs(&ctx, &items[2..])? {
                    match k {
                        ":parameters" => params = ctx.params(v)?,
                        ":task" => task = Some(ctx.atom_expr(v)?),
                        ":precondition" | ":constraints" => ctx.condition(v, &mut precondition)?,
                        ":ordered-subtasks" | ":ordered-tasks" => subtasks = ctx.task_network(v)?,
                        ":subtasks" | ":tasks" => {
                            subtasks = ctx.task_network(v)?;
                            if subtasks.len() > 1 {
                                return Err(ctx.unsupported(v.line(), format!("{k} with more than one unordered subtask")));
                            }
                        }
                        ":ordering" => {
                            let is_empty = v.list().map(|l| l.is_empty() || (l.len() == 1 && v.head() == Some("and"))).unwrap_or(false);
                            if !is_empty {
                                return Err(ctx.unsupported(v.line(), ":ordering"));
                            }
                        }
                        other => return Err(ctx.unsupported(v.line(), format!(":method {other}"))),
                    }
                }
                let task = task.ok_or_else(|| ctx.syntax(sec.line(), format!("method `{name}` has no :task")))?;
                d.methods.push(MethodDecl {
                    name: name.to_string(),
                    params,
                    task,
                    precondition,
                    subtasks,
                    line: sec.line(),
                });
            }
            other => return Err(ctx.unsupported(sec.line(), other.to_string())),
        }
    }
    check_domain(&ctx, &d)?;
    Ok(d)
}

fn check_domain(ctx: &Ctx, d: &LiftedDomain) -> Result<(), HddlError> {
    let mut types: HashSet<&str> = HashSet::from(["object"]);
    for (t, _) in &d.types {
        types.insert(t);
    }
    for (t, parent) in &d.types {
        if !types.contains(parent.as_str()) {
            return Err(ctx.mismatch(0, format!("type `{t}` derives from undeclared type `{parent}`")));
        }
    }
    let consts: HashSet<&str> = d.constants.iter().map(|(c, _)| c.as_str()).collect();
    let preds: HashMap<&str, usize> = d.predicates.iter().map(|p| (p.name.as_str(), p.params.len())).collect();
    let mut tasks: HashMap<&str, usize> = d.tasks.iter().map(|t| (t.name.as_str(), t.params.len())).collect();
    let actions: HashMap<&str, usize> = d.actions.iter().map(|a| (a.name.as_str(), a.params.len())).collect();
    for a in &d.actions {
        tasks.entry(a.name.as_str()).or_insert(a.params.len());
    }

    let check_params = |params: &[Param], line: usize| -> Result<(), HddlError> {
        for p in params {
            if !types.contains(p.ty.as_str()) {
                return Err(ctx.mismatch(line, format!("parameter {} has undeclared type `{}`", p.name, p.ty)));
            }
        }
        Ok(())
    };
    let check_terms = |args: &[Term], params: &[Param], line: usize| -> Result<(), HddlError> {
        for t in args {
            match t {
                Term::Var(v) if !params.iter().any(|p| &p.name == v) => {
                    return Err(ctx.mismatch(line, format!("undeclared variable `{v}`")));
                }
                Term::Const(c) if !consts.contains(c.as_str()) => {
                    return Err(ctx.mismatch(line, format!("unknown constant `{c}`")));
                }
                _ => {}
            }
        }
        Ok(())
    };
    let check_lits = |lits: &[Literal], params: &[Param], line: usize| -> Result<(), HddlError> {
        for l in lits {
            match l {
                Literal::Pos(a) | Literal::Neg(a) => {
                    let arity = preds
                        .get(a.pred.as_str())
                        .ok_or_else(|| ctx.mismatch(line, format!("undeclared predicate `{}`", a.pred)))?;
                    if *arity != a.args.len() {
                        return Err(ctx.mismatch(
                            line,
                            format!("predicate `{}` takes {} arguments, got {}", a.pred, arity, a.args.len()),
                        ));
                    }
                    check_terms(&a.args, params, line)?;
                }
                Literal::Eq(x, y, _) => check_terms(&[x.clone(), y.clone()], params, line)?,
            }
        }
        Ok(())
    };

    for a in &d.actions {
        check_params(&a.params, a.line)?;
        check_lits(&a.precondition, &a.params, a.line)?;
        check_lits(&a.effects, &a.params, a.line)?;
        if a.effects.iter().any(|l| matches!(l, Literal::Eq(..))) {
            return Err(ctx.unsupported(a.line, "equality in effects"));
        }
    }
    for m in &d.methods {
        check_params(&m.params, m.line)?;
        let declared = d.tasks.iter().find(|t| t.name == m.task.pred).ok_or_else(|| {
            ctx.mismatch(m.line, format!("method `{}` decomposes undeclared task `{}`", m.name, m.task.pred))
        })?;
        if declared.params.len() != m.task.args.len() {
            return Err(ctx.mismatch(m.line, format!("task `{}` arity mismatch in method `{}`", m.task.pred, m.name)));
        }
        check_terms(&m.task.args, &m.params, m.line)?;
        check_lits(&m.precondition, &m.params, m.line)?;
        for s in &m.subtasks {
            let arity = tasks
                .get(s.pred.as_str())
                .ok_or_else(|| ctx.mismatch(m.line, format!("subtask `{}` is neither a task nor an action", s.pred)))?;
            if *arity != s.args.len() {
                return Err(ctx.mismatch(m.line, format!("subtask `{}` takes {} arguments, got {}", s.pred, arity, s.args.len())));
            }
            check_terms(&s.args, &m.params, m.line)?;
        }
    }
    let _ = actions;
    Ok(())
}

pub fn parse_problem(file: &str, text: &str) -> Result<LiftedProblem, HddlError> {
    let ctx = Ctx { file };
    let root = sexpr::parse(file, text)?;
    let (name, sections) = expect_define(&ctx, &root, "problem")?;
    let mut p = LiftedProblem {
        name,
        ..Default::default()
    };
    let ground_atom = |e: &SExpr| -> Result<(String, Vec<String>), HddlError> {
        let a = ctx.atom_expr(e)?;
        let args = a
            .args
            .into_iter()
            .map(|t| match t {
                Term::Const(c) => Ok(c),
                Term::Var(v) => Err(ctx.unsupported(e.line(), format!("variable {v} in problem"))),
            })
            .collect::<Result<_, _>>()?;
        Ok((a.pred, args))
    };
    for sec in sections {
        let items = ctx.list(sec, "a problem section")?;
        let key = items.first().and_then(|a| a.atom()).unwrap_or("");
        match key {
            ":domain" => p.domain = ctx.atom(items.get(1).ok_or_else(|| ctx.syntax(sec.line(), "missing domain"))?, "domain")?.to_string(),
            ":requirements" => {}
            ":objects" => p.objects.extend(ctx.typed_list(&items[1..])?),
            ":init" => {
                for f in &items[1..] {
                    if f.head() == Some("not") || f.head() == Some("=") {
                        return Err(ctx.unsupported(f.line(), format!("{} in :init", f.head().unwrap())));
                    }
                    p.init.push(ground_atom(f)?);
                }
            }
            ":goal" => {
                let mut lits = Vec::new();
                ctx.condition(items.get(1).ok_or_else(|| ctx.syntax(sec.line(), "empty :goal"))?, &mut lits)?;
                for l in lits {
                    match l {
                        Literal::Pos(a) => {
                            let args = a
                                .args
                                .into_iter()
                                .map(|t| match t {
                                    Term::Const(c) => Ok(c),
                                    Term::Var(v) => Err(ctx.unsupported(sec.line(), format!("variable {v} in goal"))),
                                })
                                .collect::<Result<_, _>>()?;
                            p.goal.push((a.pred, args));
                        }
                        _ => return Err(ctx.unsupported(sec.line(), "negative or equality goal")),
                    }
                }
            }
            ":htn" => {
                for (k, v) in keyword_pairs(&ctx, &items[1..])? {
                    match k {
                        ":parameters" => {
                            if !ctx.params(v)?.is_empty() {
                                return Err(ctx.unsupported(v.line(), ":htn :parameters"));
                            }
                        }
                        ":ordered-subtasks" | ":ordered-tasks" | ":subtasks" | ":tasks" => {
                            let net = ctx.task_network(v)?;
                            if (k == ":subtasks" || k == ":tasks") && net.len() > 1 {
                                return Err(ctx.unsupported(v.line(), format!("{k} with more than one unordered task")));
                            }
                            for a in net {
                                let args = a
                                    .args
                                    .into_iter()
                                    .map(|t| match t {
                                        Term::Const(c) => Ok(c),
                                        Term::Var(x) => Err(ctx.unsupported(v.line(), format!("variable {x} in :htn"))),
                                    })
                                    .collect::<Result<_, _>>()?;
                                p.tasks.push((a.pred, args));
                            }
                        }
                        ":ordering" => {
                            if v.list().map(|l| !l.is_empty()).unwrap_or(true) {
                                return Err(ctx.unsupported(v.line(), ":ordering"));
                            }
                        }
                        other => return Err(ctx.unsupported(v.line(), format!(":htn {other}"))),
                    }
                }
            }
            other => return Err(ctx.unsupported(sec.line(), other.to_string())),
        }
    }
    Ok(p)
}

/// Parses a domain and a problem file.
pub fn parse(domain_text: &str, problem_text: &str) -> Result<(LiftedDomain, LiftedProblem), HddlError> {
    Ok((parse_domain("domain", domain_text)?, parse_problem("problem", problem_text)?))
}
