use super::*;
use crate::dsl::parse_activity;
use crate::fixtures::{self, WHILE_LOOP};
use proptest::prelude::*;

fn rules(report: &LintReport) -> Vec<&'static str> {
    report.diagnostics.iter().map(|d| d.rule).collect()
}

fn with_extra(stmts: &str) -> ActivityGraph {
    let text = WHILE_LOOP.trim_end().trim_end_matches('}').to_string() + stmts + "\n}\n";
    parse_activity(&text).unwrap()
}

#[test]
fn while_fixture_is_clean() {
    let r = lint(&parse_activity(WHILE_LOOP).unwrap());
    assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    assert!(r.well_formed);
}

#[test]
fn second_end_node_fires_w2_once() {
    let g = with_extra("\n  end e2\n  flow d1 -> e2 guard \"i > 100\"");
    let r = lint(&g);
    assert_eq!(rules(&r), [W2_SINGLE_FINAL]);
    assert_eq!(r.diagnostics[0].locus, "e2");
    assert!(!r.well_formed);
}

#[test]
fn missing_guard_fires_w5_at_edge() {
    let text = WHILE_LOOP.replace("flow d1 -> e guard \"i >= 3\"", "flow d1 -> e");
    let r = lint(&parse_activity(&text).unwrap());
    assert_eq!(rules(&r), [W5_GUARDS_TOTAL]);
    assert_eq!(r.diagnostics[0].locus, "d1->e");
}

#[test]
fn two_flows_into_one_action() {
    let text = r#"activity "a" {
  start s; action a "one"; action b "two"; end e
  decision d; merge m
  flow s -> d
  flow d -> a guard "x"
  flow d -> b guard "not x"
  flow a -> b
  flow b -> m
  flow m -> e
  annot if #1 open d close m cond "x"
}"#;
    let r = lint(&parse_activity(text).unwrap());
    assert!(r.diagnostics.iter().any(|d| d.rule == W3_TOKEN_DISCIPLINE && d.locus == "b"));
    assert!(r.diagnostics.iter().any(|d| d.rule == W3_TOKEN_DISCIPLINE && d.locus == "m"));
    assert!(!r.well_formed);
}

#[test]
fn annotation_rules() {
    let no_annot = WHILE_LOOP.replace("annot while #1 open d1 close m1 cond \"i < 3\"", "");
    let r = lint(&parse_activity(&no_annot).unwrap());
    assert_eq!(rules(&r), [W6_ANNOT_PRESENT]);
    assert_eq!(r.diagnostics[0].locus, "d1");

    let wrong_close = WHILE_LOOP.replace("close m1", "close body");
    let r = lint(&parse_activity(&wrong_close).unwrap());
    assert_eq!(rules(&r), [W7_ANNOT_PAIRED]);

    let dup = with_extra("\n  annot while #1 open m1 close m1 cond \"i < 3\"");
    assert!(lint(&dup).has_rule(W7_ANNOT_PAIRED));
}

#[test]
fn fork_join_regions() {
    let ok = r#"activity "p" {
  start s; fork f; action a "a"; action b "b"; flowfinal x; action c "c"; join j; end e
  fork g
  flow s -> f
  flow f -> a
  flow f -> g
  flow g -> b
  flow g -> c
  flow b -> x
  flow c -> j
  flow a -> j
  flow j -> e
}"#;
    // g's arm to a flow final never joins
    let r = lint(&parse_activity(ok).unwrap());
    assert!(r.has_rule(W4_FORK_JOIN_MATCHED));

    let good = r#"activity "p" {
  start s; fork f; action a "a"; action b "b"; join j; end e
  flow s -> f
  flow f -> a
  flow f -> b
  flow a -> j
  flow b -> j
  flow j -> e
}"#;
    let r = lint(&parse_activity(good).unwrap());
    assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    assert!(r.well_formed);
}

#[test]
fn fork_to_uneven_join_counts() {
    let text = r#"activity "p" {
  start s; fork f; action a "a"; action b "b"; action c "c"; join j; end e
  flow s -> f
  flow f -> a
  flow f -> b
  flow f -> c
  flow a -> j
  flow b -> j
  flow c -> j
  flow j -> e
  fork f2; join j2
}"#;
    let r = lint(&parse_activity(text).unwrap());
    assert!(r.diagnostics.iter().any(|d| d.rule == W4_FORK_JOIN_MATCHED && d.locus == "j2"));
    assert!(r.diagnostics.iter().all(|d| d.locus != "f"));
}

#[test]
fn flowfinal_outside_fork() {
    let text = r#"activity "p" {
  start s; decision d; action a "a"; flowfinal x; end e
  flow s -> d
  flow d -> a guard "k"
  flow d -> x guard "not k"
  flow a -> e
  annot if #1 open d close a cond "k"
}"#;
    let r = lint(&parse_activity(text).unwrap());
    assert!(r.diagnostics.iter().any(|d| d.rule == W9_FLOWFINAL_SCOPE && d.locus == "x"));
}

#[test]
fn unreachable_node() {
    let g = with_extra("\n  action z \"orphan\"");
    let r = lint(&g);
    assert!(r.diagnostics.iter().any(|d| d.rule == W8_REACHABLE && d.locus == "z"));
}

#[test]
fn missing_initial_reports_graph() {
    let r = lint(&parse_activity("activity \"bare\" { end e }").unwrap());
    assert!(r.diagnostics.iter().any(|d| d.rule == W1_SINGLE_INITIAL && d.locus == "bare"));
}

#[test]
fn reference_problems_short_circuit() {
    let g = with_extra("\n  flow body -> x9");
    let r = lint(&g);
    assert_eq!(rules(&r), ["REF-TARGET"]);
    assert!(!r.well_formed);
}

#[test]
fn postdominators_of_branch() {
    let g = parse_activity(
        r#"activity "b" {
  start s; decision d; action a "a"; action b "b"; merge m; end e
  flow s -> d; flow d -> a guard "x"; flow d -> b guard "not x"
  flow a -> m; flow b -> m; flow m -> e
}"#,
    )
    .unwrap();
    let v = View::new(&g);
    let ip = v.immediate_postdominators();
    assert_eq!(ip["d"], "m");
    assert_eq!(ip["a"], "m");
    assert_eq!(ip["s"], "d");
    assert_eq!(ip["m"], "e");
}

#[test]
fn corpus_fixtures_are_well_formed() {
    for (name, text) in fixtures::ACTIVITIES {
        let g = parse_activity(text).unwrap();
        let r = lint(&g);
        assert!(r.well_formed, "{name}: {:?}", r.diagnostics);
    }
}

#[test]
fn loci_exist_in_graph() {
    for (_, text) in fixtures::MUTATIONS {
        let g = parse_activity(text).unwrap();
        let mut ids: Vec<String> = vec![g.name.clone()];
        for graph in g.all_graphs() {
            ids.push(graph.name.clone());
            ids.extend(graph.nodes.iter().map(|n| n.id.clone()));
            ids.extend(graph.edges.iter().map(|e| e.id.clone()));
            ids.extend(graph.annotations.iter().map(|a| format!("#{}", a.number)));
        }
        for d in lint(&g).diagnostics {
            assert!(ids.contains(&d.locus), "{} not in graph", d.locus);
        }
    }
}

proptest! {
    #[test]
    fn permutation_stable(idx in 0usize..64, rot in 0usize..16, rev in any::<bool>()) {
        let all: Vec<&str> = fixtures::ACTIVITIES.iter().chain(fixtures::MUTATIONS).map(|(_, t)| *t).collect();
        let g = parse_activity(all[idx % all.len()]).unwrap();
        let mut h = g.clone();
        let n = h.nodes.len();
        h.nodes.rotate_left(rot % n);
        if rev {
            h.edges.reverse();
            h.annotations.reverse();
        }
        prop_assert_eq!(lint(&g), lint(&h));
    }
}
