use super::lexer::{Cursor, Source, Tok};
use super::ParseError;
use crate::grading::{Competency, Mode, Rubric, RubricItem, Taxonomy};
use crate::model::normalize_label;

/// Parses a grading key:
///
/// ```text
/// rubric "<name>" mode <mode> {
///   item "<key>" [kind "<element kind>"] [points <n>]
///   competency A, B
///   taxonomy apply
///   reference "<reference.act>"
/// }
/// ```
///
/// Points default to 1. Keys are normalized except in `element_diff` mode,
/// where they name reference element ids verbatim.
pub fn parse_rubric(input: &str) -> Result<Rubric, ParseError> {
    let src = Source::new(input);
    let mut cur = Cursor::new(&src)?;
    cur.skip_separators();
    cur.keyword("rubric")?;
    let (name, _) = cur.string("a rubric name string")?;
    cur.keyword("mode")?;
    let (mode_word, mt) = cur.ident("a grading mode")?;
    let mode = Mode::from_keyword(&mode_word).ok_or_else(|| {
        cur.error_at(
            &mt,
            format!("unknown mode `{mode_word}`; expected element_diff, annotation, hotspot or placement"),
        )
    })?;
    let open = cur.expect(Tok::LBrace)?;
    let mut rubric = Rubric::new(name, mode);
    loop {
        cur.skip_separators();
        let t = cur.next();
        let word = match &t.tok {
            Tok::RBrace => break,
            Tok::Eof => {
                return Err(cur.error_at(
                    &t,
                    format!("unclosed `rubric` block opened at line {}", open.line),
                ))
            }
            Tok::Word(w) => w.clone(),
            _ => return Err(cur.unexpected(&t, "a statement keyword")),
        };
        match word.as_str() {
            "item" => {
                let (raw, kt) = cur.string("an item key string")?;
                let key = if mode == Mode::ElementDiff {
                    raw.trim().to_string()
                } else {
                    normalize_label(&raw)
                };
                if key.is_empty() {
                    return Err(cur.error_at(&kt, "item keys must not be empty"));
                }
                let kind = if cur.eat_keyword("kind") {
                    Some(normalize_label(&cur.string("an element kind string")?.0))
                } else {
                    None
                };
                if mode == Mode::Placement && kind.is_none() {
                    return Err(cur.error_at(&kt, "placement items need `kind \"<element kind>\"`"));
                }
                let points = if cur.eat_keyword("points") {
                    let pt = cur.next();
                    let Tok::Number(n) = &pt.tok else {
                        return Err(cur.unexpected(&pt, "a point value"));
                    };
                    let v: f64 = n.parse().map_err(|_| cur.error_at(&pt, "malformed point value"))?;
                    if v < 0.0 || !v.is_finite() {
                        return Err(cur.error_at(&pt, format!("negative points `{n}` are not allowed")));
                    }
                    v
                } else {
                    1.0
                };
                rubric.items.push(RubricItem { key, kind, points });
            }
            "competency" => loop {
                let (letter, lt) = cur.ident("a competency letter A..O")?;
                let c = Competency::parse(&letter).ok_or_else(|| {
                    cur.error_at(&lt, format!("unknown competency `{letter}`; expected a letter A..O"))
                })?;
                if !rubric.competency.contains(&c) {
                    rubric.competency.push(c);
                }
                if !matches!(cur.peek().tok, Tok::Comma) {
                    break;
                }
                cur.next();
            },
            "taxonomy" => {
                let (level, lt) = cur.ident("a taxonomy level")?;
                rubric.taxonomy = Some(Taxonomy::from_keyword(&level).ok_or_else(|| {
                    cur.error_at(
                        &lt,
                        format!("unknown taxonomy level `{level}`; expected remember, understand, apply, analyze, evaluate or create"),
                    )
                })?);
            }
            "reference" => {
                rubric.reference = Some(cur.string("a reference file path")?.0);
            }
            w => return Err(cur.error_at(&t, format!("unknown keyword `{w}`"))),
        }
        cur.end_statement()?;
    }
    cur.expect_end()?;
    Ok(rubric)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotation_rubric() {
        let r = parse_rubric(
            r#"rubric "relationships" mode annotation {
  item "extend"
  item "UC-1"
  competency E, I
  taxonomy apply
}"#,
        )
        .unwrap();
        assert_eq!(r.mode, Mode::Annotation);
        assert_eq!(r.items.len(), 2);
        assert_eq!(r.items[1].key, "uc-1");
        assert_eq!(r.max_points(), 2.0);
        assert_eq!(r.taxonomy, Some(Taxonomy::Apply));
        assert_eq!(r.competency.len(), 2);
    }

    #[test]
    fn placement_rubric_of_seven() {
        let body: String = (1..=7)
            .map(|i| format!("  item \"s{i}\" kind \"message\" points 1\n"))
            .collect();
        let r = parse_rubric(&format!("rubric \"seq\" mode placement {{\n{body}}}")).unwrap();
        assert_eq!(r.max_points(), 7.0);
    }

    #[test]
    fn empty_body() {
        let r = parse_rubric("rubric \"e\" mode hotspot { }").unwrap();
        assert!(r.items.is_empty());
        assert_eq!(r.max_points(), 0.0);
    }

    #[test]
    fn errors() {
        let e = parse_rubric("rubric \"x\" mode essay { }").unwrap_err();
        assert!(e.message.contains("essay"));
        let e = parse_rubric("rubric \"x\" mode hotspot {\n item \"a\" points -1\n}").unwrap_err();
        assert!(e.message.contains("negative"));
        assert_eq!(e.line, 2);
        assert!(parse_rubric("rubric \"x\" mode placement { item \"s1\" }").is_err());
        assert!(parse_rubric("rubric \"x\" mode hotspot { competency Z }").is_err());
        assert!(parse_rubric("rubric \"x\" mode hotspot { item \" \" }").is_err());
    }

    #[test]
    fn element_diff_keys_stay_verbatim() {
        let r = parse_rubric(
            "rubric \"x\" mode element_diff { reference \"ref.act\"; item \"Body\" points 2.5 }",
        )
        .unwrap();
        assert_eq!(r.items[0].key, "Body");
        assert_eq!(r.items[0].points, 2.5);
        assert_eq!(r.reference.as_deref(), Some("ref.act"));
    }
}
