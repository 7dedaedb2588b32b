//! Stable rule identifiers and their explanations.

use thiserror::Error;

pub const W1_SINGLE_INITIAL: &str = "W1-SINGLE-INITIAL";
pub const W2_SINGLE_FINAL: &str = "W2-SINGLE-FINAL";
pub const W3_TOKEN_DISCIPLINE: &str = "W3-TOKEN-DISCIPLINE";
pub const W4_FORK_JOIN_MATCHED: &str = "W4-FORK-JOIN-MATCHED";
pub const W5_GUARDS_TOTAL: &str = "W5-GUARDS-TOTAL";
pub const W6_ANNOT_PRESENT: &str = "W6-ANNOT-PRESENT";
pub const W7_ANNOT_PAIRED: &str = "W7-ANNOT-PAIRED";
pub const W8_REACHABLE: &str = "W8-REACHABLE";
pub const W9_FLOWFINAL_SCOPE: &str = "W9-FLOWFINAL-SCOPE";

pub const S1_CROSSOVER: &str = "S1-CROSSOVER";
pub const S2_OPERAND_GAP: &str = "S2-OPERAND-GAP";
pub const S3_NUMBER_DUP: &str = "S3-NUMBER-DUP";

pub const C1_MISSING: &str = "C1-MISSING";
pub const C2_EXTRA: &str = "C2-EXTRA";
pub const C3_ORDER: &str = "C3-ORDER";
pub const C4_KIND: &str = "C4-KIND";
pub const C5_CONDITION: &str = "C5-CONDITION";

use crate::model::{REF_BODY, REF_DUPLICATE, REF_EFFECT, REF_GUARD, REF_SOURCE, REF_TARGET};

const CATALOG: &[(&str, &str)] = &[
    (
        W1_SINGLE_INITIAL,
        "An activity has exactly one initial node. The single token that drives a \
         structured control flow must come from one place.",
    ),
    (
        W2_SINGLE_FINAL,
        "An activity has only one end symbol (activity final node). Branches and loops \
         merge back before the end, so the diagram reads like one program with one exit.",
    ),
    (
        W3_TOKEN_DISCIPLINE,
        "Only one token travels a single control flow. Actions and loop nodes have exactly \
         one incoming and one outgoing flow; a decision has one incoming and at least two \
         outgoing flows; a merge has at least two incoming and one outgoing flow; forks and \
         joins mirror them. Multiple control flows entering one action node hide an implicit \
         merge or join.",
    ),
    (
        W4_FORK_JOIN_MATCHED,
        "Concurrency is the sanctioned exception to the single token: every fork needs one \
         join that all of its outgoing paths reach before any other join, and that join \
         collects exactly as many flows as the fork emits.",
    ),
    (
        W5_GUARDS_TOTAL,
        "Every flow leaving a decision carries a guard. A missing decision node description \
         leaves the branch condition ambiguous; write a clear condition such as `i > 1`.",
    ),
    (
        W6_ANNOT_PRESENT,
        "Every decision or loop node that opens a branch or loop carries exactly one comment \
         naming the control structure (if, while, do-while, for) and its condition.",
    ),
    (
        W7_ANNOT_PAIRED,
        "Branch and loop numbering is mandatory and paired: the opening diamond and the \
         closing merge carry the same number, the number is used once, and the closing \
         merge really closes the structure the opening node starts.",
    ),
    (
        W8_REACHABLE,
        "Every node lies on a path from the initial node to a final node. Unreachable or \
         dead-end nodes cannot be translated into a program.",
    ),
    (
        W9_FLOWFINAL_SCOPE,
        "Flow final nodes are only used inside a fork/join region, where they end one \
         concurrent flow without ending the activity.",
    ),
    (
        S1_CROSSOVER,
        "Combined fragments in a sequence diagram nest like boxes: two fragments are either \
         disjoint or one contains the other. Crossing boxes have no structured reading.",
    ),
    (
        S2_OPERAND_GAP,
        "The operands of an alt or par fragment cover the whole fragment without gaps or \
         overlaps; other fragment kinds have no operands.",
    ),
    (
        S3_NUMBER_DUP,
        "Each combined fragment carries its own number, matching the numbered branch or loop \
         of the activity diagram it mirrors.",
    ),
    (
        C1_MISSING,
        "An element of the activity diagram has no counterpart in the sequence diagram; the \
         two diagrams must correspond one to one.",
    ),
    (
        C2_EXTRA,
        "An element of the sequence diagram has no counterpart in the activity diagram; the \
         two diagrams must correspond one to one.",
    ),
    (
        C3_ORDER,
        "Both diagrams contain the element, but at different positions in the order of \
         execution.",
    ),
    (
        C4_KIND,
        "A branch, loop, or parallel structure of the activity diagram is mirrored by a \
         fragment of a different kind or with a different number.",
    ),
    (
        C5_CONDITION,
        "A branch or loop and its mirroring fragment state different conditions.",
    ),
    (REF_DUPLICATE, "Node and flow ids are unique within a diagram."),
    (REF_SOURCE, "Every flow starts at a declared node."),
    (REF_TARGET, "Every flow ends at a declared node."),
    (
        REF_GUARD,
        "Guards belong on flows leaving a decision or loop node; other flows carry none.",
    ),
    (REF_EFFECT, "Only actions carry effect statements."),
    (REF_BODY, "Only loop nodes carry a nested body, and every loop node has one."),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule id `{0}`")]
pub struct UnknownRule(pub String);

/// Human-readable explanation of a rule id.
pub fn explain(rule: &str) -> Result<&'static str, UnknownRule> {
    CATALOG
        .iter()
        .find(|(id, _)| *id == rule)
        .map(|(_, text)| *text)
        .ok_or_else(|| UnknownRule(rule.to_string()))
}

/// Every rule id in the catalog.
pub fn rule_ids() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(id, _)| *id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn explain_examples() {
        assert!(explain(W2_SINGLE_FINAL).unwrap().contains("one end symbol"));
        assert!(explain(W5_GUARDS_TOTAL).unwrap().contains("decision node description"));
        assert_eq!(explain("W0-NOPE"), Err(UnknownRule("W0-NOPE".into())));
    }

    #[test]
    fn ids_are_unique_and_explained() {
        let ids: BTreeSet<_> = rule_ids().collect();
        assert_eq!(ids.len(), CATALOG.len());
        for id in ids {
            assert!(!explain(id).unwrap().is_empty());
        }
    }
}
