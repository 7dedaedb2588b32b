//! Text formats for activity diagrams, sequence diagrams, and rubrics.
//!
//! All three share one lexical layer: `;` or a newline ends a statement,
//! `"..."` is a string with `\"`, `\\`, `\n`, `\t` escapes, `#` followed by
//! digits is a number marker (`#1`), and any other `#` starts a comment that
//! runs to the end of the line.
//!
//! ```text
//! activity "while" {
//!   start s
//!   merge m1
//!   decision d1
//!   action body "work" effect "i = i + 1"
//!   end e
//!   flow s -> m1
//!   flow m1 -> d1
//!   flow d1 -> body guard "i < 3"
//!   flow body -> m1
//!   flow d1 -> e guard "i >= 3"
//!   annot while #1 open d1 close m1 cond "i < 3"
//! }
//! ```
//!
//! Lexical problems (unknown keywords, malformed guards, duplicate ids,
//! unclosed blocks) are [`ParseError`]s. Dangling references are left for
//! [`crate::model::validate_refs`] and the linter.

mod activity;
mod lexer;
mod print;
mod rubric;
mod sequence;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use activity::parse_activity;
pub use print::{print_activity, print_sequence};
pub use rubric::parse_rubric;
pub use sequence::parse_sequence;

#[cfg(test)]
pub(crate) use lexer::{tokenize, Source, Tok};

/// A syntax error with a 1-based position and the offending line.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl ParseError {
    /// Multi-line rendering with the source line and a caret.
    pub fn render(&self, file: &str) -> String {
        let caret = " ".repeat(self.column.saturating_sub(1));
        format!(
            "{file}:{}:{}: error: {}\n  | {}\n  | {caret}^",
            self.line, self.column, self.message, self.snippet
        )
    }
}

/// Byte ranges of every token in `input`, excluding newlines and end of input.
///
/// Exposed so callers can build token-deletion mutants of a fixture.
pub fn token_spans(input: &str) -> Result<Vec<(usize, usize, usize)>, ParseError> {
    let src = lexer::Source::new(input);
    Ok(lexer::tokenize(&src)?
        .into_iter()
        .filter(|t| !matches!(t.tok, lexer::Tok::Newline | lexer::Tok::Eof))
        .map(|t| (t.start, t.end, t.line))
        .collect())
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_digits_is_a_number_other_hash_is_a_comment() {
        let src = Source::new("annot while #12 # trailing comment\n# whole line\nx");
        let toks: Vec<Tok> = tokenize(&src).unwrap().into_iter().map(|t| t.tok).collect();
        assert_eq!(
            toks,
            vec![
                Tok::Word("annot".into()),
                Tok::Word("while".into()),
                Tok::Hash(12),
                Tok::Newline,
                Tok::Newline,
                Tok::Word("x".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn strings_and_arrows() {
        let src = Source::new(r#"flow a->b guard "x \"q\" \\""#);
        let toks: Vec<Tok> = tokenize(&src).unwrap().into_iter().map(|t| t.tok).collect();
        assert_eq!(toks[2], Tok::Arrow);
        assert_eq!(toks[5], Tok::Str("x \"q\" \\".into()));
        assert_eq!(quote("x \"q\" \\"), r#""x \"q\" \\""#);
    }

    #[test]
    fn unterminated_string_position() {
        let err = parse_activity("activity \"A\" {\n  action a \"oops\n}").unwrap_err();
        assert_eq!((err.line, err.column), (2, 12));
        assert_eq!(err.snippet, "  action a \"oops");
    }
}
