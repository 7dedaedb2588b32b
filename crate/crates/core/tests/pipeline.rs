use wellform_core::dsl::{parse_activity, parse_sequence, print_activity};
use wellform_core::expr::{Env, Value};
use wellform_core::lint::lint;
use wellform_core::seqdiag::check_consistency;
use wellform_core::sim::{run, run_pseudocode, Termination, DEFAULT_BUDGET};
use wellform_core::structure::{emit_pseudocode, reduce};

const LOOP_WITH_BRANCH: &str = include_str!("../../../corpus/activity/loop_with_branch.act");
const LOOP_WITH_BRANCH_SEQ: &str = include_str!("../../../corpus/sequence/loop_with_branch.seq");

#[test]
fn parse_lint_reduce_run_compare() {
    let g = parse_activity(LOOP_WITH_BRANCH).unwrap();
    assert!(lint(&g).well_formed);
    let program = emit_pseudocode(&reduce(&g).unwrap());

    let env = Env::new().with("i", Value::Int(0));
    let d = run(&g, &env, DEFAULT_BUDGET);
    assert_eq!(d.terminated, Termination::Completed);
    // i = 0, 1 take the small arm (+1 each); i = 2, 3 take the big arm (+10 each).
    assert_eq!(d.final_env.get("total"), Some(Value::Int(22)));
    assert_eq!(d.final_env.get("i"), Some(Value::Int(4)));
    assert_eq!(d.steps.iter().filter(|s| *s == "advance").count(), 4);
    assert_eq!(run_pseudocode(&program, &env, DEFAULT_BUDGET).unwrap(), d);

    let s = parse_sequence(LOOP_WITH_BRANCH_SEQ).unwrap();
    assert!(check_consistency(&g, &s).unwrap().consistent);
}

#[test]
fn printed_corpus_parses_back() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    for sub in ["activity", "mutations"] {
        for entry in std::fs::read_dir(dir.join(sub)).unwrap() {
            let path = entry.unwrap().path();
            let g = parse_activity(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let again = parse_activity(&print_activity(&g)).unwrap();
            assert_eq!(again, g, "{}", path.display());
        }
    }
}
