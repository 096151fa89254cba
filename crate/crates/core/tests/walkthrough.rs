//! Step-by-step run of the seven-action example hierarchy, plus inference
//! checks on the taxi domain.

mod common;

use common::{config, fixture, ground_text};
use tohtn_core::encoder::{Encoder, EncoderConfig, QueryOutcome};
use tohtn_core::inference::Inference;
use tohtn_core::model::{Problem, TaskRef};
use tohtn_core::pdt::{Op, Pdt};
use tohtn_core::planner::{plan, PlanOutcome};
use tohtn_sat::backend_by_name;

fn label(p: &Problem, op: Op) -> String {
    op.task_ref().map(|t| p.task_ref_label(t)).unwrap_or_default()
}

fn labels(p: &Problem, plan: &[TaskRef]) -> Vec<String> {
    plan.iter().map(|&t| p.task_ref_label(t)).collect()
}

fn setup(p: &Problem) -> (Inference, Pdt, Encoder) {
    let inf = Inference::compute(p, true);
    let pdt = Pdt::new(p, true);
    let enc = Encoder::new(p, &inf, &pdt, EncoderConfig::default(), backend_by_name("cdcl", 0).unwrap()).unwrap();
    (inf, pdt, enc)
}

#[test]
fn guided_expansion_trace() {
    let p = ground_text("seven_actions.htn");
    let (inf, mut pdt, mut enc) = setup(&p);

    assert_eq!(enc.solve_solution(&p, &pdt, None).unwrap(), QueryOutcome::Unsat);
    let QueryOutcome::Found(c) = enc.solve_relaxed(&p, &pdt, None).unwrap() else {
        panic!("relaxed layer 0 must be satisfiable")
    };
    assert_eq!(labels(&p, &c.plan), ["T_root"]);

    pdt.expand(&p, &inf.recursion, &c.targets).unwrap();
    enc.encode_layer(&p, &inf, &pdt).unwrap();
    let grid = pdt.project_grid();
    assert_eq!(grid.layers[1].len(), 3);
    let first: Vec<String> = grid.layers[1][0].candidates.iter().map(|&o| label(&p, o)).collect();
    assert!(first.contains(&"A_0".to_string()) && first.contains(&"T_3".to_string()), "{first:?}");

    assert_eq!(enc.solve_solution(&p, &pdt, None).unwrap(), QueryOutcome::Unsat);
    let QueryOutcome::Found(c) = enc.solve_relaxed(&p, &pdt, None).unwrap() else {
        panic!("relaxed layer 1 must be satisfiable")
    };
    let second = labels(&p, &c.plan);
    assert!(second == ["A_0", "T_2"] || second == ["T_3", "A_1", "T_5"], "{second:?}");

    pdt.expand(&p, &inf.recursion, &c.targets).unwrap();
    enc.encode_layer(&p, &inf, &pdt).unwrap();
    let mut pending: Vec<String> = pdt
        .pending()
        .into_iter()
        .flat_map(|s| pdt.slots[s].ops.clone())
        .filter(|o| o.is_abstract())
        .map(|o| label(&p, o))
        .collect();
    pending.sort();
    pending.dedup();
    assert_eq!(pending, ["T_2", "T_8"]);

    let QueryOutcome::Found(c) = enc.solve_solution(&p, &pdt, None).unwrap() else {
        panic!("layer 2 must hold a solution")
    };
    assert_eq!(labels(&p, &c.plan), ["A_2", "A_1", "A_3"]);
}

#[test]
fn planner_matches_the_trace() {
    let p = ground_text("seven_actions.htn");
    let r = plan(&p, &config("greedy")).unwrap();
    assert_eq!(r.stats.rounds, 3);
    assert_eq!(r.stats.relaxed_plans[0], ["T_root"]);
    assert_eq!(r.stats.relaxed_plans.len(), 2);
    let PlanOutcome::Solved(dt) = r.outcome else { panic!() };
    assert_eq!(dt.primitive_plan().unwrap().len(), 3);

    let b = plan(&p, &config("bfs")).unwrap();
    assert!(r.stats.methods_developed < b.stats.methods_developed);
}

#[test]
fn decoded_tree_is_consistent_with_the_formula() {
    let p = ground_text("seven_actions.htn");
    let r = plan(&p, &config("greedy")).unwrap();
    let PlanOutcome::Solved(dt) = &r.outcome else { panic!() };
    let mut enc = r.encoder;
    let lits = enc.method_literals(&r.pdt, dt);
    assert_eq!(lits.len(), dt.num_methods());
    assert!(enc.solution_sat_with(&lits).unwrap());
    let negated: Vec<_> = lits.iter().map(|&l| !l).collect();
    // Some method of the found tree is forced, so not every literal can flip.
    assert!(!enc.solution_sat_with(&negated).unwrap());
}

#[test]
fn taxi_profiles_and_mutexes() {
    let p = fixture("taxi");
    let inf = Inference::compute(&p, true);
    let fact = |l: &str| p.find_fact(l).unwrap_or_else(|| panic!("fact {l}"));
    let call = p.find_task("call_taxi").expect("call_taxi task");
    let pos = &inf.profiles[call].poss_eff_pos;
    for street in ["street1", "street2"] {
        assert!(pos.contains(&fact(&format!("at(p,{street})"))), "call_taxi may reach {street}");
    }
    assert!(pos.contains(&fact("taxi-called(p)")));
    assert!(!pos.contains(&fact("at(p,street3)")));
    let at_p: Vec<usize> = ["street1", "street2", "street3"]
        .iter()
        .map(|s| fact(&format!("at(p,{s})")))
        .collect();
    assert!(
        inf.mutexes.iter().any(|g| at_p.iter().all(|f| g.0.contains(f))),
        "{}",
        inf.dump(&p)
    );
}
