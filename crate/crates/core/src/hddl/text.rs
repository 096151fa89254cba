//! Line-oriented ground format.
//!
//! ```text
//! ; comment
//! fact f                       optional, fixes fact order
//! action a pre p q add r del p
//! guard g pre p                zero-effect action hidden from plans
//! task t                       optional, fixes task order
//! method m t : a t2            subtasks by name, actions or tasks
//! init p q
//! goal r
//! root t
//! ```
//!
//! A name may carry arguments as `name(a,b)`. Facts and tasks are declared
//! implicitly on first use; a subtask name that is not an action is a task.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::HddlError;
use crate::model::{compact_label, AbstractTask, Action, Fact, Method, Problem, State, TaskRef};

fn split_label(label: &str) -> (String, Vec<String>) {
    match label.find('(') {
        Some(i) if label.ends_with(')') => {
            let inner = &label[i + 1..label.len() - 1];
            let args = if inner.is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|s| s.trim().to_string()).collect()
            };
            (label[..i].to_string(), args)
        }
        _ => (label.to_string(), Vec::new()),
    }
}

#[derive(Default)]
struct Builder {
    facts: Vec<Fact>,
    fact_index: HashMap<String, usize>,
    task_order: Vec<String>,
}

impl Builder {
    fn fact(&mut self, label: &str) -> usize {
        if let Some(&f) = self.fact_index.get(label) {
            return f;
        }
        let (name, args) = split_label(label);
        self.facts.push(Fact::new(name, args));
        self.fact_index.insert(label.to_string(), self.facts.len() - 1);
        self.facts.len() - 1
    }
}

struct RawMethod {
    label: String,
    task: String,
    subtasks: Vec<String>,
    line: usize,
}

pub fn parse_ground(file: &str, text: &str) -> Result<Problem, HddlError> {
    let err = |line: usize, msg: String| HddlError::Syntax {
        file: file.to_string(),
        line,
        msg,
    };
    let mut b = Builder::default();
    let mut actions: Vec<Action> = Vec::new();
    let mut action_index: HashMap<String, usize> = HashMap::new();
    let mut raw_methods: Vec<RawMethod> = Vec::new();
    let mut init = Vec::new();
    let mut goal = Vec::new();
    let mut root: Option<(String, usize)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(';').next().unwrap_or("");
        let mut words = content.split_whitespace();
        let Some(kind) = words.next() else { continue };
        let rest: Vec<&str> = words.collect();
        match kind {
            "fact" => {
                for f in &rest {
                    b.fact(f);
                }
            }
            "action" | "guard" => {
                let (&label, tail) = rest
                    .split_first()
                    .ok_or_else(|| err(line, format!("{kind} without a name")))?;
                if action_index.contains_key(label) {
                    return Err(err(line, format!("duplicate action `{label}`")));
                }
                let mut lists: [Vec<usize>; 3] = Default::default();
                let mut section: Option<usize> = None;
                for &w in tail {
                    match w {
                        "pre" => section = Some(0),
                        "add" if kind == "action" => section = Some(1),
                        "del" if kind == "action" => section = Some(2),
                        _ => match section {
                            Some(s) => lists[s].push(b.fact(w)),
                            None => return Err(err(line, format!("fact `{w}` outside pre/add/del"))),
                        },
                    }
                }
                let [pre, add, del] = lists;
                let (name, args) = split_label(label);
                let mut a = Action::new(name, pre, add, del);
                a.args = args;
                a.guard = kind == "guard";
                action_index.insert(label.to_string(), actions.len());
                actions.push(a);
            }
            "task" => b.task_order.extend(rest.iter().map(|s| s.to_string())),
            "method" => {
                if rest.len() < 3 || rest[2] != ":" {
                    return Err(err(line, "expected `method <name> <task> : <subtasks>`".into()));
                }
                raw_methods.push(RawMethod {
                    label: rest[0].to_string(),
                    task: rest[1].to_string(),
                    subtasks: rest[3..].iter().map(|s| s.to_string()).collect(),
                    line,
                });
            }
            "init" => init.extend(rest.iter().map(|f| b.fact(f))),
            "goal" => goal.extend(rest.iter().map(|f| b.fact(f))),
            "root" => match rest.as_slice() {
                [t] => root = Some((t.to_string(), line)),
                _ => return Err(err(line, "expected `root <task>`".into())),
            },
            other => return Err(err(line, format!("unknown record `{other}`"))),
        }
    }

    let mut tasks: Vec<AbstractTask> = Vec::new();
    let mut task_index: HashMap<String, usize> = HashMap::new();
    let mut task_id = |label: &str, tasks: &mut Vec<AbstractTask>| -> usize {
        if let Some(&t) = task_index.get(label) {
            return t;
        }
        let (name, args) = split_label(label);
        tasks.push(AbstractTask {
            name,
            args,
            methods: Vec::new(),
        });
        task_index.insert(label.to_string(), tasks.len() - 1);
        tasks.len() - 1
    };
    for t in std::mem::take(&mut b.task_order) {
        if action_index.contains_key(&t) {
            return Err(err(0, format!("`{t}` is declared both as action and task")));
        }
        task_id(&t, &mut tasks);
    }
    let mut methods = Vec::new();
    for rm in raw_methods {
        if action_index.contains_key(&rm.task) {
            return Err(err(rm.line, format!("method head `{}` is an action", rm.task)));
        }
        let task = task_id(&rm.task, &mut tasks);
        let subtasks = rm
            .subtasks
            .iter()
            .map(|s| match action_index.get(s) {
                Some(&a) => TaskRef::Primitive(a),
                None => TaskRef::Abstract(task_id(s, &mut tasks)),
            })
            .collect();
        let (name, args) = split_label(&rm.label);
        tasks[task].methods.push(methods.len());
        methods.push(Method {
            name,
            args,
            task,
            subtasks,
        });
    }
    let (root_label, root_line) = root.ok_or_else(|| err(0, "missing `root` record".into()))?;
    if action_index.contains_key(&root_label) {
        return Err(err(root_line, "root must be an abstract task".into()));
    }
    let root = task_id(&root_label, &mut tasks);
    goal.sort_unstable();
    goal.dedup();
    let nf = b.facts.len();
    let p = Problem {
        facts: b.facts,
        actions,
        tasks,
        methods,
        root,
        init: State::from_facts(nf, init),
        goal,
    };
    p.validate()?;
    Ok(p)
}

/// Writes `p` in the format read by [`parse_ground`].
pub fn write_ground(p: &Problem) -> String {
    let mut out = String::new();
    let facts = |ids: &[usize]| ids.iter().map(|&f| p.facts[f].to_string()).collect::<Vec<_>>().join(" ");
    if !p.facts.is_empty() {
        let _ = writeln!(out, "fact {}", facts(&(0..p.facts.len()).collect::<Vec<_>>()));
    }
    for a in &p.actions {
        let kind = if a.guard { "guard" } else { "action" };
        let _ = write!(out, "{kind} {}", compact_label(&a.name, &a.args));
        for (kw, list) in [("pre", &a.precond), ("add", &a.eff_pos), ("del", &a.eff_neg)] {
            if !list.is_empty() {
                let _ = write!(out, " {kw} {}", facts(list));
            }
        }
        out.push('\n');
    }
    if !p.tasks.is_empty() {
        let labels: Vec<String> = p.tasks.iter().map(|t| compact_label(&t.name, &t.args)).collect();
        let _ = writeln!(out, "task {}", labels.join(" "));
    }
    for m in &p.methods {
        let _ = write!(
            out,
            "method {} {} :",
            compact_label(&m.name, &m.args),
            compact_label(&p.tasks[m.task].name, &p.tasks[m.task].args)
        );
        for &s in &m.subtasks {
            let label = match s {
                TaskRef::Primitive(a) => compact_label(&p.actions[a].name, &p.actions[a].args),
                TaskRef::Abstract(t) => compact_label(&p.tasks[t].name, &p.tasks[t].args),
            };
            let _ = write!(out, " {label}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "init {}", facts(&p.init.facts().collect::<Vec<_>>()));
    let _ = writeln!(out, "goal {}", facts(&p.goal));
    let _ = writeln!(out, "root {}", compact_label(&p.tasks[p.root].name, &p.tasks[p.root].args));
    out
}
