use super::*;
use crate::dsl::parse_activity;
use crate::expr::Value;
use crate::fixtures::{self, LOOP_WITH_BRANCH, WHILE_LOOP};
use crate::structure::{emit_outline, emit_pseudocode, reduce};
use crate::testkit::{random_env, random_graph, GenConfig};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn env_i(i: i64) -> Env {
    Env::new().with("i", Value::Int(i))
}

fn fixture(name: &str) -> ActivityGraph {
    parse_activity(fixtures::ACTIVITIES.iter().find(|(n, _)| *n == name).unwrap().1).unwrap()
}

#[test]
fn while_loop_runs_three_times() {
    let g = parse_activity(WHILE_LOOP).unwrap();
    let t = run(&g, &env_i(0), DEFAULT_BUDGET);
    assert_eq!(t.steps, vec!["work"; 3]);
    assert_eq!(t.final_env, env_i(3));
    assert_eq!(t.terminated, Termination::Completed);
}

#[test]
fn while_loop_skips_body_when_false() {
    let g = parse_activity(WHILE_LOOP).unwrap();
    let t = run(&g, &env_i(3), DEFAULT_BUDGET);
    assert!(t.steps.is_empty());
    assert_eq!(t.terminated, Termination::Completed);
}

#[test]
fn unbound_guard_is_a_guard_error() {
    let g = parse_activity(WHILE_LOOP).unwrap();
    let t = run(&g, &Env::new(), DEFAULT_BUDGET);
    assert_eq!(t.terminated, Termination::GuardError);
    assert!(t.detail.unwrap().contains('i'));
    let p = run_pseudocode(&emit_pseudocode(&reduce(&g).unwrap()), &Env::new(), DEFAULT_BUDGET).unwrap();
    assert_eq!(p.terminated, Termination::GuardError);
}

#[test]
fn small_budget_exhausts() {
    let g = parse_activity(WHILE_LOOP).unwrap();
    let t = run(&g, &env_i(0), 5);
    assert_eq!(t.terminated, Termination::BudgetExhausted);
    let p = run_pseudocode("while (true) { do spin; } // #1", &Env::new(), 50).unwrap();
    assert_eq!(p.terminated, Termination::BudgetExhausted);
    assert!(p.steps.len() <= 50);
}

#[test]
fn pseudocode_basics() {
    let skip = run_pseudocode("skip;", &Env::new(), DEFAULT_BUDGET).unwrap();
    assert!(skip.steps.is_empty());
    assert_eq!(skip.terminated, Termination::Completed);
    let ab = run_pseudocode("do a; do b;", &Env::new(), DEFAULT_BUDGET).unwrap();
    assert_eq!(ab.steps, vec!["a", "b"]);
    assert_eq!(ab.terminated, Termination::Completed);
}

#[test]
fn canonical_and_outline_parse_alike() {
    let t = reduce(&parse_activity(LOOP_WITH_BRANCH).unwrap()).unwrap();
    let canonical = parse_pseudocode(&emit_pseudocode(&t)).unwrap();
    let outline = parse_pseudocode(&emit_outline(&t)).unwrap();
    assert_eq!(canonical.len(), 2);
    assert_eq!(outline.len(), 2);
    assert!(matches!(&canonical[1], Stmt::While { number: 1, .. }));
    let Stmt::Do { effect, .. } = &canonical[0] else { panic!() };
    assert_eq!(effect.len(), 1);
}

#[test]
fn pseudocode_parse_errors_have_positions() {
    let e = parse_pseudocode("do a;\nwhile (i < ) { do b; } // #1").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(parse_pseudocode("if (x) { do a; }").is_err());
    assert!(parse_pseudocode("par { do a; }").is_err());
    assert!(parse_pseudocode("frobnicate;").is_err());
    assert!(parse_pseudocode("do a; }").is_err());
}

#[test]
fn loop_with_branch_trace() {
    let g = parse_activity(LOOP_WITH_BRANCH).unwrap();
    let t = run(&g, &env_i(0), DEFAULT_BUDGET);
    assert_eq!(t.terminated, Termination::Completed);
    assert_eq!(
        t.steps,
        [
            "reset",
            "count small",
            "advance",
            "count small",
            "advance",
            "count big",
            "advance",
            "count big",
            "advance"
        ]
    );
    let p = run_pseudocode(&emit_pseudocode(&reduce(&g).unwrap()), &env_i(0), DEFAULT_BUDGET).unwrap();
    assert!(p.same_outcome(&t), "{p:?}\n{t:?}");
}

#[test]
fn parallel_arms_interleave() {
    let g = fixture("parallel.act");
    let opts = SimOptions {
        check_conservation: true,
        ..SimOptions::default()
    };
    let t = run_with(&g, &Env::new(), opts);
    assert_eq!(t.terminated, Termination::Completed);
    assert_eq!(t.steps, ["prepare", "left", "right", "right again", "finish"]);
    let p = run_pseudocode(&emit_pseudocode(&reduce(&g).unwrap()), &Env::new(), DEFAULT_BUDGET).unwrap();
    assert!(p.same_outcome(&t));
}

#[test]
fn loop_node_and_dowhile() {
    let t = run(&fixture("loopnode.act"), &Env::new().with("k", Value::Int(1)), DEFAULT_BUDGET);
    assert_eq!(t.steps, ["tick", "tick"]);
    assert_eq!(t.final_env.get("k"), Some(Value::Int(3)));
    let d = run(&fixture("dowhile.act"), &Env::new().with("n", Value::Int(0)), DEFAULT_BUDGET);
    assert_eq!(d.steps, ["ask"]);
    assert_eq!(d.terminated, Termination::Completed);
}

#[test]
fn missing_join_arrival_deadlocks() {
    let g = parse_activity(
        "activity \"J\" { start s; fork f; action a \"a\"; action b \"b\"; join j; end e;\n\
         flow s -> f; flow f -> a; flow a -> j; flow b -> j; flow j -> e; }",
    )
    .unwrap();
    let t = run(&g, &Env::new(), DEFAULT_BUDGET);
    assert_eq!(t.terminated, Termination::Deadlock);
    assert_eq!(t.steps, ["a"]);
}

#[test]
fn overlapping_guards_are_reported() {
    let text = WHILE_LOOP.replace("guard \"i >= 3\"", "guard \"i >= 0\"");
    let g = parse_activity(&text).unwrap();
    let t = run(&g, &env_i(0), DEFAULT_BUDGET);
    assert_eq!(t.terminated, Termination::GuardError, "{t:?}");
}

#[test]
fn flow_final_consumes_one_token() {
    let g = parse_activity(
        "activity \"F\" { start s; fork f; action a \"a\"; action b \"b\"; flowfinal ff; end e;\n\
         flow s -> f; flow f -> a; flow f -> b; flow a -> ff; flow b -> e; }",
    )
    .unwrap();
    let opts = SimOptions {
        check_conservation: true,
        ..SimOptions::default()
    };
    let t = run_with(&g, &Env::new(), opts);
    assert_eq!(t.terminated, Termination::Completed);
    assert_eq!(t.steps, ["a", "b"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn diagram_and_program_agree(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (_, g) = random_graph(&mut rng, GenConfig::default());
        let program = emit_pseudocode(&reduce(&g).unwrap());
        for _ in 0..3 {
            let env = random_env(&mut rng);
            let opts = SimOptions { check_conservation: true, ..SimOptions::default() };
            let d = run_with(&g, &env, opts);
            let p = run_pseudocode(&program, &env, DEFAULT_BUDGET).unwrap();
            prop_assert_eq!(d.terminated, Termination::Completed, "{:?}\n{}", d, program);
            prop_assert!(d.same_outcome(&p), "{:?}\n{:?}\n{}", d, p, program);
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (_, g) = random_graph(&mut rng, GenConfig::default());
        let env = random_env(&mut rng);
        prop_assert_eq!(run(&g, &env, DEFAULT_BUDGET), run(&g, &env, DEFAULT_BUDGET));
    }

    #[test]
    fn larger_budget_extends_the_trace(seed in any::<u64>(), small in 0u64..60) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (_, g) = random_graph(&mut rng, GenConfig::default());
        let env = random_env(&mut rng);
        let short = run(&g, &env, small);
        let long = run(&g, &env, small + 40);
        prop_assert!(long.steps.starts_with(&short.steps));
        if short.terminated != Termination::BudgetExhausted {
            prop_assert_eq!(short, long);
        }
    }
}
