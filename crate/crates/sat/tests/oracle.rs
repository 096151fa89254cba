//! Solver and AMO checks against exhaustive enumeration.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tohtn_sat::{amo::REGISTRY, Lit, Session, SolveOutcome};

fn truth_table_sat(num_vars: u32, clauses: &[Vec<i32>]) -> bool {
    (0u64..1 << num_vars).any(|bits| {
        clauses.iter().all(|c| {
            c.iter().any(|&x| {
                let val = (bits >> (x.unsigned_abs() - 1)) & 1 == 1;
                val == (x > 0)
            })
        })
    })
}

fn random_3cnf(rng: &mut ChaCha8Rng, max_vars: u32, max_clauses: usize) -> (u32, Vec<Vec<i32>>) {
    let n = rng.gen_range(3..=max_vars);
    let m = rng.gen_range(1..=max_clauses);
    let clauses = (0..m)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let v = rng.gen_range(1..=n) as i32;
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    (n, clauses)
}

fn to_lits(c: &[i32]) -> Vec<Lit> {
    c.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect()
}

fn load(num_vars: u32, clauses: &[Vec<i32>]) -> Session {
    let mut s = Session::default();
    for _ in 0..num_vars {
        s.new_var();
    }
    for c in clauses {
        s.add_clause(&to_lits(c)).unwrap();
    }
    s
}

fn assert_model_sound(s: &Session, assumptions: &[Lit]) {
    let m = s.model().expect("model after SAT");
    for c in s.clauses() {
        assert!(m.satisfies(c), "model violates stored clause {c:?}");
    }
    for &a in assumptions {
        assert!(m.lit(a), "model violates assumption {a}");
    }
}

#[test]
fn random_3cnf_matches_truth_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a7);
    let mut sat_count = 0;
    for _ in 0..500 {
        let (n, clauses) = random_3cnf(&mut rng, 20, 85);
        let expected = truth_table_sat(n, &clauses);
        let mut s = load(n, &clauses);
        let got = s.solve(&[]).unwrap();
        assert_eq!(got == SolveOutcome::Sat, expected, "{n} vars, {clauses:?}");
        if expected {
            sat_count += 1;
            assert_model_sound(&s, &[]);
        }
    }
    // both verdicts must be exercised for the comparison to mean anything
    assert!(sat_count > 50 && sat_count < 450, "sat_count = {sat_count}");
}

#[test]
fn incremental_steps_match_fresh_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..60 {
        let n = rng.gen_range(4..=12u32);
        let mut s = load(n, &[]);
        let mut all: Vec<Vec<i32>> = Vec::new();
        for _ in 0..30 {
            let (_, batch) = random_3cnf(&mut rng, n, 3);
            let batch: Vec<Vec<i32>> = batch
                .into_iter()
                .map(|c| c.into_iter().map(|x| x.signum() * ((x.abs() - 1) % n as i32 + 1)).collect())
                .collect();
            for c in &batch {
                s.add_clause(&to_lits(c)).unwrap();
                all.push(c.clone());
            }
            let k = rng.gen_range(0..=2);
            let assumptions: Vec<i32> = (0..k)
                .map(|_| {
                    let v = rng.gen_range(1..=n) as i32;
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            let mut with_units = all.clone();
            with_units.extend(assumptions.iter().map(|&a| vec![a]));
            let expected = truth_table_sat(n, &with_units);
            let a = to_lits(&assumptions);
            let got = s.solve(&a).unwrap();
            assert_eq!(got == SolveOutcome::Sat, expected);
            if expected {
                assert_model_sound(&s, &a);
            }
        }
    }
}

/// Counts distinct assignments to `vars` among all models, enumerating with
/// blocking clauses over `vars` only.
fn projected_model_count(s: &mut Session, vars: &[Lit]) -> usize {
    let mut count = 0;
    while s.solve(&[]).unwrap() == SolveOutcome::Sat {
        count += 1;
        let m = s.model().unwrap();
        let block: Vec<Lit> = vars.iter().map(|&v| if m.lit(v) { !v } else { v }).collect();
        s.add_clause(&block).unwrap();
    }
    count
}

#[test]
fn amo_projection_counts_are_n_plus_one() {
    for (name, cfg) in REGISTRY {
        for n in 2..=8u32 {
            let mut s = Session::default();
            let vars: Vec<Lit> = (0..n).map(|_| s.new_var()).collect();
            cfg.encoder().encode(&mut s, &vars).unwrap();
            assert_eq!(
                projected_model_count(&mut s, &vars),
                n as usize + 1,
                "{name} n={n}"
            );
        }
    }
}

#[test]
fn amo_schemes_agree_on_every_assignment() {
    for n in 2..=8u32 {
        for bits in 0u32..1 << n {
            let ones = bits.count_ones();
            for (name, cfg) in REGISTRY {
                let mut s = Session::default();
                let vars: Vec<Lit> = (0..n).map(|_| s.new_var()).collect();
                cfg.encoder().encode(&mut s, &vars).unwrap();
                let assumptions: Vec<Lit> = vars
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if bits >> i & 1 == 1 { v } else { !v })
                    .collect();
                let sat = s.solve(&assumptions).unwrap() == SolveOutcome::Sat;
                assert_eq!(sat, ones <= 1, "{name} n={n} bits={bits:b}");
            }
        }
    }
}

proptest! {
    #[test]
    fn solver_is_deterministic(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, clauses) = random_3cnf(&mut rng, 14, 60);
        let mut a = load(n, &clauses);
        let mut b = load(n, &clauses);
        let ra = a.solve(&[]).unwrap();
        let rb = b.solve(&[]).unwrap();
        prop_assert_eq!(ra, rb);
        prop_assert_eq!(a.model(), b.model());
    }
}
