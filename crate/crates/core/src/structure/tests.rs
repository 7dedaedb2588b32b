use super::*;
use crate::dsl::parse_activity;
use crate::fixtures::{self, LOOP_WITH_BRANCH, WHILE_LOOP};
use crate::testkit::{random_graph, GenConfig};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::collections::BTreeSet;

fn act(id: &str, label: &str, effect: Option<&str>) -> StructNode {
    StructNode::Act {
        id: id.into(),
        label: label.into(),
        effect: effect.map(String::from),
    }
}

#[test]
fn while_fixture_reduces_to_single_loop() {
    let t = reduce(&parse_activity(WHILE_LOOP).unwrap()).unwrap();
    let expected = StructNode::Seq {
        children: vec![StructNode::While {
            number: 1,
            cond: "i < 3".into(),
            anchor: "d1".into(),
            body: Box::new(act("body", "work", Some("i = i + 1"))),
            loop_node: false,
        }],
    };
    assert_eq!(t.root, expected);
    assert_eq!(emit_outline(&t), "while (i < 3) { do work; } // #1");
    assert_eq!(emit_pseudocode(&t), "while (i < 3) {\n  do work; // i = i + 1\n} // #1\n");
}

#[test]
fn single_action() {
    let g = parse_activity("activity \"A\" { start s; action a \"step\"; end e; flow s->a; flow a->e; }").unwrap();
    let t = reduce(&g).unwrap();
    assert_eq!(t.root, StructNode::Seq { children: vec![act("a", "step", None)] });
    assert_eq!(emit_pseudocode(&t), "do step;\n");
}

#[test]
fn empty_activity_is_skip() {
    let g = parse_activity("activity \"E\" { start s; end e; flow s -> e }").unwrap();
    let t = reduce(&g).unwrap();
    assert_eq!(t.root, StructNode::Seq { children: vec![StructNode::Skip] });
    assert_eq!(emit_pseudocode(&t), "skip;\n");
    assert!(is_well_formed(&g));
}

#[test]
fn back_edge_to_decision_leaves_residue() {
    let text = WHILE_LOOP.replace("flow body -> m1", "flow body -> d1");
    let r = reduce(&parse_activity(&text).unwrap()).unwrap_err();
    assert!(r.remaining_nodes.contains("d1"), "{r}");
    assert!(!r.remaining_edges.is_empty());
}

#[test]
fn two_finals_are_not_well_formed() {
    let text = WHILE_LOOP.replace("  end e\n", "  end e\n  end e2\n");
    assert!(!is_well_formed(&parse_activity(&text).unwrap()));
    assert!(is_well_formed(&parse_activity(WHILE_LOOP).unwrap()));
}

#[test]
fn loop_with_nested_branch() {
    let t = reduce(&parse_activity(LOOP_WITH_BRANCH).unwrap()).unwrap();
    let StructNode::Seq { children } = &t.root else { panic!() };
    assert_eq!(children.len(), 2);
    let StructNode::While { number: 1, body, .. } = &children[1] else {
        panic!("{:?}", children[1])
    };
    let StructNode::Seq { children: inner } = body.as_ref() else { panic!() };
    assert!(matches!(&inner[0], StructNode::If { number: 2, else_branch: Some(_), .. }));
    assert_eq!(
        emit_outline(&t),
        "do reset; while (i < 4) { if (i < 2) { do count small; } else { do count big; } // #2 do advance; } // #1"
    );
}

#[test]
fn one_armed_if_prints_no_else() {
    let g = parse_activity(fixtures::ACTIVITIES.iter().find(|(n, _)| *n == "guarded_step.act").unwrap().1).unwrap();
    let t = reduce(&g).unwrap();
    assert_eq!(
        emit_pseudocode(&t),
        "if (late) {\n  do send reminder; // sent = true\n} // #1\n"
    );
}

#[test]
fn dowhile_parallel_and_loop_node() {
    let get = |name: &str| {
        let text = fixtures::ACTIVITIES.iter().find(|(n, _)| *n == name).unwrap().1;
        reduce(&parse_activity(text).unwrap()).unwrap()
    };
    assert_eq!(
        emit_pseudocode(&get("dowhile.act")),
        "dowhile {\n  do ask; // n = n - 1\n} (n > 0) // #1\n"
    );
    assert_eq!(
        emit_outline(&get("parallel.act")),
        "do prepare; par { do left; || do right; do right again; } do finish;"
    );
    assert_eq!(
        emit_pseudocode(&get("loopnode.act")),
        "while (k < 3) {\n  do tick; // k = k + 1\n} // #1\n"
    );
}

#[test]
fn every_action_appears_once() {
    for (name, text) in fixtures::ACTIVITIES {
        let g = parse_activity(text).unwrap();
        let t = reduce(&g).unwrap_or_else(|r| panic!("{name}: {r}"));
        let mut want: Vec<&str> = g
            .all_graphs()
            .iter()
            .flat_map(|h| h.nodes_of(crate::model::NodeKind::Action).map(|n| n.id.as_str()))
            .collect();
        let mut got = t.action_ids();
        want.sort();
        got.sort();
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn broken_mutations_leave_residue() {
    for (name, text) in fixtures::MUTATIONS {
        let g = parse_activity(text).unwrap();
        assert!(reduce(&g).is_err() || !crate::lint::lint(&g).well_formed, "{name}");
    }
    let broken_pairing = ["m19_number_machine.act", "m20_dowhile.act"];
    for (name, text) in fixtures::MUTATIONS.iter().filter(|(n, _)| broken_pairing.contains(n)) {
        assert!(reduce(&parse_activity(text).unwrap()).is_err(), "{name}");
    }
}

#[test]
fn unannotated_decision_is_stuck() {
    let text = WHILE_LOOP.replace("  annot while #1 open d1 close m1 cond \"i < 3\"\n", "");
    let r = reduce(&parse_activity(&text).unwrap()).unwrap_err();
    assert_eq!(
        r.remaining_nodes,
        BTreeSet::from(["d1".to_string(), "m1".to_string()])
    );
    assert!(r.stuck_reason.contains("d1"));
}

/// Every admissible application order yields the same program.
fn all_orders(r: Reducer, seen: &mut BTreeSet<Result<String, BTreeSet<String>>>, budget: &mut usize) {
    let mut r = r;
    let cands = r.candidates();
    if cands.is_empty() {
        seen.insert(r.finish().map(|t| emit_pseudocode(&t)).map_err(|res| res.remaining_nodes));
        return;
    }
    for c in cands {
        if *budget == 0 {
            return;
        }
        *budget -= 1;
        let mut next = r.clone();
        next.apply(&c);
        all_orders(next, seen, budget);
    }
}

#[test]
fn confluence_on_small_graphs() {
    let mut graphs: Vec<ActivityGraph> = fixtures::ACTIVITIES
        .iter()
        .map(|(_, t)| parse_activity(t).unwrap())
        .filter(|g| g.nodes.len() <= 10)
        .collect();
    let mut rng = StdRng::seed_from_u64(7);
    let cfg = GenConfig {
        max_nodes: 10,
        ..GenConfig::default()
    };
    graphs.extend((0..40).map(|_| random_graph(&mut rng, cfg).1));
    for g in graphs {
        let mut seen = BTreeSet::new();
        let mut budget = 20_000;
        all_orders(Reducer::new(&g), &mut seen, &mut budget);
        assert_eq!(seen.len(), 1, "{}: {seen:?}", g.name);
        assert!(seen.iter().next().unwrap().is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_graphs_reduce_back(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (tree, g) = random_graph(&mut rng, GenConfig::default());
        prop_assert!(crate::model::validate_refs(&g).is_empty());
        let back = reduce(&g).map_err(|r| TestCaseError::fail(format!("{r}\n{}", crate::dsl::print_activity(&g))))?;
        prop_assert_eq!(back.action_ids(), tree.action_ids());
        prop_assert_eq!(&back, &tree);
        let report = crate::lint::lint(&g);
        prop_assert!(report.well_formed, "{:?}\n{}", report.diagnostics, crate::dsl::print_activity(&g));
    }
}
