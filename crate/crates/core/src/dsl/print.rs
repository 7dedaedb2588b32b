//! Canonical text rendering. Parsing the output yields an equal model.

use std::fmt::Write;

use super::quote;
use crate::model::{ActivityGraph, NodeKind, SequenceModel};

/// Renders `g` with nodes first, then flows, then annotations, each in model order.
pub fn print_activity(g: &ActivityGraph) -> String {
    let mut out = format!("activity {} {{\n", quote(&g.name));
    activity_body(g, 1, &mut out);
    out.push_str("}\n");
    out
}

fn activity_body(g: &ActivityGraph, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for n in &g.nodes {
        let _ = write!(out, "{pad}{} {}", n.kind.keyword(), n.id);
        match n.kind {
            NodeKind::Action => {
                let _ = write!(out, " {}", quote(&n.label));
                if let Some(effect) = &n.effect {
                    let _ = write!(out, " effect {}", quote(effect));
                }
            }
            NodeKind::LoopNode => {
                let _ = writeln!(out, " {} {{", quote(&n.label));
                if let Some(body) = &n.body {
                    activity_body(body, depth + 1, out);
                }
                let _ = write!(out, "{pad}}}");
            }
            _ => {}
        }
        out.push('\n');
    }
    for e in &g.edges {
        let _ = write!(out, "{pad}flow {} -> {}", e.source, e.target);
        if let Some(guard) = &e.guard {
            let _ = write!(out, " guard {}", quote(guard));
        }
        out.push('\n');
    }
    for a in &g.annotations {
        let _ = writeln!(
            out,
            "{pad}annot {} #{} open {} close {} cond {}",
            a.construct.keyword(),
            a.number,
            a.open_node,
            a.close_node,
            quote(&a.condition)
        );
    }
}

/// Renders `s` with fragments re-nested from their spans.
///
/// Fragments must nest properly; equal spans nest in model order.
pub fn print_sequence(s: &SequenceModel) -> String {
    let mut out = format!("sequence {} {{\n", quote(&s.name));
    for l in &s.lifelines {
        let _ = writeln!(out, "  lifeline {} {}", l.id, quote(&l.label));
    }
    let mut order: Vec<usize> = (0..s.fragments.len()).collect();
    order.sort_by_key(|&i| {
        let sp = s.fragments[i].span;
        (sp.start, std::cmp::Reverse(sp.end), i)
    });
    let mut stack: Vec<usize> = Vec::new();
    for (i, ev) in s.events.iter().enumerate() {
        for &f in &stack {
            let frag = &s.fragments[f];
            if let Some(op) = frag.operands.iter().skip(1).find(|o| o.span.start == i) {
                let pad = "  ".repeat(stack.iter().position(|&x| x == f).unwrap() + 1);
                let _ = writeln!(out, "{pad}operand {}", quote(op.guard.as_deref().unwrap_or("")));
            }
        }
        for &f in order.iter().filter(|&&f| s.fragments[f].span.start == i) {
            let frag = &s.fragments[f];
            let pad = "  ".repeat(stack.len() + 1);
            let _ = writeln!(
                out,
                "{pad}fragment {} #{} cond {} {{",
                frag.kind.keyword(),
                frag.number,
                quote(&frag.condition)
            );
            stack.push(f);
        }
        let pad = "  ".repeat(stack.len() + 1);
        let _ = writeln!(
            out,
            "{pad}msg {} {} -> {} {} {}",
            ev.id,
            ev.from,
            ev.to,
            quote(&ev.label),
            ev.kind.keyword()
        );
        while let Some(pos) = stack.iter().rposition(|&f| s.fragments[f].span.end == i) {
            stack.remove(pos);
            let pad = "  ".repeat(stack.len() + 1);
            let _ = writeln!(out, "{pad}}}");
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_activity, parse_sequence};
    use crate::fixtures;

    #[test]
    fn activity_round_trip_on_fixtures() {
        for (name, text) in fixtures::ACTIVITIES {
            let g = parse_activity(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let printed = print_activity(&g);
            let again = parse_activity(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
            assert_eq!(g, again, "{name}");
            assert_eq!(printed, print_activity(&again));
        }
    }

    #[test]
    fn sequence_round_trip_on_fixtures() {
        for (name, text) in fixtures::SEQUENCES {
            let s = parse_sequence(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let printed = print_sequence(&s);
            let again = parse_sequence(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
            assert_eq!(s, again, "{name}");
        }
    }

    #[test]
    fn escapes_survive() {
        let g = parse_activity(r#"activity "q\"x" { action a "say \"hi\"\\"; }"#).unwrap();
        assert_eq!(parse_activity(&print_activity(&g)).unwrap(), g);
    }
}
