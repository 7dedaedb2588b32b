use std::collections::BTreeSet;

use super::lexer::{Cursor, Source, Tok, Token};
use super::ParseError;
use crate::model::{
    Fragment, FragmentKind, Lifeline, MessageEvent, MessageKind, Operand, SequenceModel, Span,
};

struct Open {
    kind: FragmentKind,
    number: u32,
    condition: String,
    id: String,
    first: usize,
    /// Start index and guard of each operand opened so far.
    operands: Vec<(usize, Option<String>, Token)>,
    opened: Token,
}

struct State {
    model: SequenceModel,
    /// Lifeline references checked once the whole diagram is read.
    refs: Vec<(String, Token)>,
    message_ids: BTreeSet<String>,
    fragment_count: usize,
}

/// Parses one `sequence "<name>" { ... }` diagram.
///
/// Messages receive order indices in textual order; fragment spans follow
/// block structure.
pub fn parse_sequence(input: &str) -> Result<SequenceModel, ParseError> {
    let src = Source::new(input);
    let mut cur = Cursor::new(&src)?;
    cur.skip_separators();
    cur.keyword("sequence")?;
    let (name, _) = cur.string("a diagram name string")?;
    let open = cur.expect(Tok::LBrace)?;
    let mut st = State {
        model: SequenceModel {
            name,
            ..Default::default()
        },
        refs: Vec::new(),
        message_ids: BTreeSet::new(),
        fragment_count: 0,
    };
    block(&mut cur, &mut st, None, &open)?;
    cur.expect_end()?;
    let declared: BTreeSet<&str> = st.model.lifelines.iter().map(|l| l.id.as_str()).collect();
    for (id, t) in &st.refs {
        if !declared.contains(id.as_str()) {
            return Err(cur.error_at(t, format!("message references undeclared lifeline `{id}`")));
        }
    }
    st.model.fragments.sort_by_key(|f| {
        f.id[1..].parse::<usize>().unwrap_or(usize::MAX)
    });
    Ok(st.model)
}

fn block(
    cur: &mut Cursor<'_, '_>,
    st: &mut State,
    mut frag: Option<&mut Open>,
    open: &Token,
) -> Result<(), ParseError> {
    loop {
        cur.skip_separators();
        let t = cur.next();
        let word = match &t.tok {
            Tok::RBrace => return Ok(()),
            Tok::Eof => {
                let what = if frag.is_some() { "fragment" } else { "sequence" };
                return Err(cur.error_at(
                    &t,
                    format!("unclosed `{what}` block opened at line {}", open.line),
                ));
            }
            Tok::Word(w) => w.clone(),
            _ => return Err(cur.unexpected(&t, "a statement keyword")),
        };
        match word.as_str() {
            "lifeline" => {
                let (id, idt) = cur.ident("a lifeline id")?;
                if st.model.lifelines.iter().any(|l| l.id == id) {
                    return Err(cur.error_at(&idt, format!("duplicate lifeline id `{id}`")));
                }
                let (label, _) = cur.string("a lifeline label string")?;
                st.model.lifelines.push(Lifeline { id, label });
            }
            "msg" => {
                let (id, idt) = cur.ident("a message id")?;
                if !st.message_ids.insert(id.clone()) {
                    return Err(cur.error_at(&idt, format!("duplicate message id `{id}`")));
                }
                let (from, ft) = cur.ident("a sender lifeline id")?;
                cur.expect(Tok::Arrow)?;
                let (to, tt) = cur.ident("a receiver lifeline id")?;
                let (label, _) = cur.string("a message label string")?;
                let (kw, kt) = cur.ident("a message kind (sync, async, reply)")?;
                let kind = match kw.as_str() {
                    "sync" => MessageKind::Sync,
                    "async" => MessageKind::Async,
                    "reply" => MessageKind::Reply,
                    _ => {
                        return Err(cur.error_at(
                            &kt,
                            format!("unknown message kind `{kw}`; expected sync, async or reply"),
                        ))
                    }
                };
                st.refs.push((from.clone(), ft));
                st.refs.push((to.clone(), tt));
                let order = st.model.events.len();
                st.model.events.push(MessageEvent {
                    id,
                    from,
                    to,
                    label,
                    kind,
                    order,
                });
            }
            "fragment" => {
                let (kw, kt) = cur.ident("a fragment kind (alt, opt, loop, par)")?;
                let kind = FragmentKind::from_keyword(&kw).ok_or_else(|| {
                    cur.error_at(&kt, format!("unknown fragment kind `{kw}`; expected alt, opt, loop or par"))
                })?;
                let number = cur.hash_number()?;
                cur.keyword("cond")?;
                let (condition, _) = cur.string("a condition string")?;
                let brace = cur.expect(Tok::LBrace)?;
                st.fragment_count += 1;
                let first = st.model.events.len();
                let mut inner = Open {
                    kind,
                    number,
                    condition,
                    id: format!("F{}", st.fragment_count),
                    first,
                    operands: vec![(first, None, t.clone())],
                    opened: t.clone(),
                };
                block(cur, st, Some(&mut inner), &brace)?;
                close(cur, st, inner)?;
            }
            "operand" => {
                let (guard, _) = cur.string("an operand guard string")?;
                let here = st.model.events.len();
                match frag.as_deref_mut() {
                    Some(f) if matches!(f.kind, FragmentKind::Alt | FragmentKind::Par) => {
                        let (start, _, _) = f.operands.last().expect("first operand");
                        if *start == here {
                            return Err(cur.error_at(&t, "empty operand before this separator"));
                        }
                        f.operands.push((here, Some(guard), t.clone()));
                    }
                    Some(f) => {
                        return Err(cur.error_at(
                            &t,
                            format!("`operand` is only allowed in alt and par fragments, not {}", f.kind.keyword()),
                        ))
                    }
                    None => return Err(cur.error_at(&t, "`operand` outside of a fragment")),
                }
            }
            w => return Err(cur.error_at(&t, format!("unknown keyword `{w}`"))),
        }
        cur.end_statement()?;
    }
}

fn close(cur: &Cursor<'_, '_>, st: &mut State, f: Open) -> Result<(), ParseError> {
    let after = st.model.events.len();
    if after == f.first {
        return Err(cur.error_at(&f.opened, format!("fragment {} contains no messages", f.id)));
    }
    let (last_start, _, last_tok) = f.operands.last().expect("first operand");
    if *last_start == after {
        return Err(cur.error_at(last_tok, "empty operand after this separator"));
    }
    let separated = f.operands.len() > 1;
    let operands = if separated || f.kind == FragmentKind::Alt {
        let ends: Vec<usize> = f.operands.iter().skip(1).map(|(s, _, _)| *s).chain([after]).collect();
        f.operands
            .into_iter()
            .zip(ends)
            .map(|((start, guard, _), end)| Operand {
                span: Span::new(start, end - 1),
                guard,
            })
            .collect()
    } else {
        Vec::new()
    };
    st.model.fragments.push(Fragment {
        id: f.id,
        kind: f.kind,
        number: f.number,
        condition: f.condition,
        span: Span::new(f.first, after - 1),
        operands,
    });
    Ok(())
}
