use std::collections::BTreeSet;

use super::lexer::{Cursor, Source, Tok, Token};
use super::ParseError;
use crate::expr::{parse_effect, parse_expr};
use crate::model::{ActivityGraph, Construct, ControlAnnotation, Node, NodeKind};

/// Parses one `activity "<name>" { ... }` diagram.
pub fn parse_activity(input: &str) -> Result<ActivityGraph, ParseError> {
    let src = Source::new(input);
    let mut cur = Cursor::new(&src)?;
    cur.skip_separators();
    cur.keyword("activity")?;
    let (name, _) = cur.string("a diagram name string")?;
    let open = cur.expect(Tok::LBrace)?;
    let mut declared = BTreeSet::new();
    let g = block(&mut cur, name, &open, "activity", &mut declared)?;
    cur.expect_end()?;
    Ok(g)
}

fn block(
    cur: &mut Cursor<'_, '_>,
    name: String,
    open: &Token,
    what: &str,
    declared: &mut BTreeSet<String>,
) -> Result<ActivityGraph, ParseError> {
    let mut g = ActivityGraph::new(name);
    loop {
        cur.skip_separators();
        let t = cur.next();
        let word = match &t.tok {
            Tok::RBrace => return Ok(g),
            Tok::Eof => {
                return Err(cur.error_at(
                    &t,
                    format!("unclosed `{what}` block opened at line {}", open.line),
                ))
            }
            Tok::Word(w) => w.clone(),
            _ => return Err(cur.unexpected(&t, "a statement keyword")),
        };
        match word.as_str() {
            "flow" => {
                let (source, _) = cur.ident("a source node id")?;
                cur.expect(Tok::Arrow)?;
                let (target, _) = cur.ident("a target node id")?;
                let guard = if cur.eat_keyword("guard") {
                    let (text, st) = cur.string("a guard string")?;
                    check_condition(cur, &text, &st, "guard", true)?;
                    Some(text)
                } else {
                    None
                };
                g.add_edge(source, target, guard);
            }
            "annot" => {
                let (cword, ct) = cur.ident("a construct (if, while, dowhile, for)")?;
                let construct = Construct::from_keyword(&cword).ok_or_else(|| {
                    cur.error_at(&ct, format!("unknown construct `{cword}`; expected if, while, dowhile or for"))
                })?;
                let number = cur.hash_number()?;
                cur.keyword("open")?;
                let (open_node, _) = cur.ident("the opening node id")?;
                cur.keyword("close")?;
                let (close_node, _) = cur.ident("the closing node id")?;
                cur.keyword("cond")?;
                let (condition, st) = cur.string("a condition string")?;
                check_condition(cur, &condition, &st, "condition", false)?;
                g.annotations.push(ControlAnnotation {
                    construct,
                    number,
                    open_node,
                    close_node,
                    condition,
                });
            }
            w => {
                let kind = NodeKind::from_keyword(w)
                    .ok_or_else(|| cur.error_at(&t, format!("unknown keyword `{w}`")))?;
                let (id, idt) = cur.ident("a node id")?;
                if !declared.insert(id.clone()) {
                    return Err(cur.error_at(&idt, format!("duplicate node id `{id}`")));
                }
                let mut node = Node::new(id.clone(), kind);
                match kind {
                    NodeKind::Action => {
                        node.label = cur.string("an action label string")?.0;
                        if cur.eat_keyword("effect") {
                            let (text, st) = cur.string("an effect string")?;
                            if let Err(e) = parse_effect(&text) {
                                return Err(cur.string_error(
                                    &st,
                                    e.offset,
                                    format!("malformed effect: {}", e.message),
                                ));
                            }
                            node.effect = Some(text);
                        }
                    }
                    NodeKind::LoopNode => {
                        let (cond, st) = cur.string("a loop condition string")?;
                        check_condition(cur, &cond, &st, "loop condition", false)?;
                        node.label = cond;
                        let open = cur.expect(Tok::LBrace)?;
                        let body = block(cur, id, &open, "loopnode", declared)?;
                        node.body = Some(Box::new(body));
                    }
                    _ => {}
                }
                g.add_node(node);
            }
        }
        cur.end_statement()?;
    }
}

fn check_condition(
    cur: &Cursor<'_, '_>,
    text: &str,
    t: &Token,
    what: &str,
    allow_else: bool,
) -> Result<(), ParseError> {
    if allow_else && text.trim() == "else" {
        return Ok(());
    }
    parse_expr(text)
        .map(|_| ())
        .map_err(|e| cur.string_error(t, e.offset, format!("malformed {what}: {}", e.message)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::WHILE_LOOP;

    #[test]
    fn minimal_sentence() {
        let g = parse_activity(
            "activity \"A\" { start s; action a \"step\"; end e; flow s->a; flow a->e; }",
        )
        .unwrap();
        assert_eq!(g.name, "A");
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.edges[0].id, "s->a");
    }

    #[test]
    fn unknown_keyword() {
        let err = parse_activity("activity \"A\" { strat s; }").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("strat"), "{}", err.message);
    }

    #[test]
    fn while_fixture_counts() {
        let g = parse_activity(WHILE_LOOP).unwrap();
        // hand count: decision d1, merge m1, one annotation
        assert_eq!(g.nodes_of(NodeKind::Decision).count(), 1);
        assert_eq!(g.nodes_of(NodeKind::Merge).count(), 1);
        assert_eq!(g.nodes.len(), 5);
        assert_eq!(g.edges.len(), 5);
        assert_eq!(g.annotations.len(), 1);
        let a = &g.annotations[0];
        assert_eq!((a.construct, a.number), (Construct::While, 1));
        assert_eq!(g.node("body").unwrap().effect.as_deref(), Some("i = i + 1"));
    }

    #[test]
    fn malformed_guard_points_into_string() {
        let err = parse_activity("activity \"A\" {\n  flow a -> b guard \"i <\"\n}").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("malformed guard"));
        assert!(err.column > 20);
    }

    #[test]
    fn duplicate_and_unclosed() {
        let err = parse_activity("activity \"A\" {\n start s\n end s\n}").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("duplicate"));
        let err = parse_activity("activity \"A\" {\n start s\n").unwrap_err();
        assert!(err.message.contains("unclosed"));
        assert_eq!(err.line, 3);
    }

    #[test]
    fn loopnode_body_and_else_guard() {
        let g = parse_activity(
            r#"activity "L" {
  start s
  loopnode l "i < 2" {
    start bs; action w "work" effect "i = i + 1"; end be
    flow bs -> w; flow w -> be
  }
  end e
  flow s -> l
  flow l -> e
  annot while #1 open l close l cond "i < 2"
}"#,
        )
        .unwrap();
        let body = g.node("l").unwrap().body.as_ref().unwrap();
        assert_eq!(body.nodes.len(), 3);
        assert_eq!(body.name, "l");
        assert!(parse_activity("activity \"A\" { decision d; flow d -> d guard \"else\" }").is_ok());
    }

    #[test]
    fn trailing_input_and_missing_terminator() {
        assert!(parse_activity("activity \"A\" { } extra").is_err());
        let err = parse_activity("activity \"A\" { start s end e }").unwrap_err();
        assert!(err.message.contains("`;` or end of line"), "{}", err.message);
        assert!(parse_activity("activity \"A\" { annot loop #1 open a close b cond \"x\" }").is_err());
        assert!(parse_activity("activity \"A\" { annot if #0 open a close b cond \"x\" }").is_err());
    }
}
