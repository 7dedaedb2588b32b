use std::fmt;

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Word(String),
    Str(String),
    Number(String),
    /// `#12`: a `#` immediately followed by digits.
    Hash(u32),
    LBrace,
    RBrace,
    Arrow,
    Semi,
    Comma,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Str(s) => write!(f, "string \"{s}\""),
            Tok::Number(n) => write!(f, "number {n}"),
            Tok::Hash(n) => write!(f, "`#{n}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    /// Byte range in the source (used by mutation tests).
    pub start: usize,
    pub end: usize,
}

pub(crate) struct Source<'a> {
    pub text: &'a str,
    lines: Vec<&'a str>,
}

impl<'a> Source<'a> {
    pub fn new(text: &'a str) -> Self {
        Source {
            text,
            lines: text.split('\n').collect(),
        }
    }

    pub fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        let snippet = self
            .lines
            .get(line.saturating_sub(1))
            .map(|l| l.trim_end_matches('\r').to_string())
            .unwrap_or_default();
        ParseError {
            line,
            column,
            message: message.into(),
            snippet,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(src: &Source<'_>) -> Result<Vec<Token>, ParseError> {
    let text = src.text;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |(b, _)| *b);
    while i < chars.len() {
        let c = chars[i].1;
        let (tline, tcol, tstart) = (line, col, byte_at(i));
        let push = |tok: Tok, next: usize, out: &mut Vec<Token>| {
            out.push(Token {
                tok,
                line: tline,
                column: tcol,
                start: tstart,
                end: byte_at(next),
            });
        };
        match c {
            '\n' => {
                push(Tok::Newline, i + 1, &mut out);
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                if j > i + 1 {
                    let digits: String = chars[i + 1..j].iter().map(|(_, c)| c).collect();
                    let n = digits
                        .parse()
                        .map_err(|_| src.error(tline, tcol, format!("number `#{digits}` is too large")))?;
                    push(Tok::Hash(n), j, &mut out);
                    col += j - i;
                    i = j;
                } else {
                    // comment to end of line
                    while i < chars.len() && chars[i].1 != '\n' {
                        i += 1;
                        col += 1;
                    }
                }
                continue;
            }
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                loop {
                    match chars.get(j).map(|(_, c)| *c) {
                        None | Some('\n') => {
                            return Err(src.error(tline, tcol, "unterminated string literal"));
                        }
                        Some('"') => break,
                        Some('\\') => {
                            let esc = chars.get(j + 1).map(|(_, c)| *c);
                            match esc {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                _ => {
                                    return Err(src.error(
                                        tline,
                                        col + (j - i),
                                        "unknown escape sequence in string",
                                    ))
                                }
                            }
                            j += 2;
                        }
                        Some(c) => {
                            s.push(c);
                            j += 1;
                        }
                    }
                }
                push(Tok::Str(s), j + 1, &mut out);
                col += j + 1 - i;
                i = j + 1;
                continue;
            }
            '{' | '}' | ';' | ',' => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ';' => Tok::Semi,
                    _ => Tok::Comma,
                };
                push(tok, i + 1, &mut out);
                i += 1;
                col += 1;
                continue;
            }
            '-' if chars.get(i + 1).map(|(_, c)| *c) == Some('>') => {
                push(Tok::Arrow, i + 2, &mut out);
                i += 2;
                col += 2;
                continue;
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].1.is_ascii_digit() || chars[j].1 == '.') {
                    j += 1;
                }
                let lit: String = chars[i..j].iter().map(|(_, c)| c).collect();
                if lit.parse::<f64>().is_err() {
                    return Err(src.error(tline, tcol, format!("malformed number `{lit}`")));
                }
                push(Tok::Number(lit), j, &mut out);
                col += j - i;
                i = j;
                continue;
            }
            c if is_ident_start(c) => {
                let mut j = i + 1;
                while j < chars.len() && is_ident_char(chars[j].1) {
                    j += 1;
                }
                let w: String = chars[i..j].iter().map(|(_, c)| c).collect();
                push(Tok::Word(w), j, &mut out);
                col += j - i;
                i = j;
                continue;
            }
            other => {
                return Err(src.error(tline, tcol, format!("unexpected character `{other}`")));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
        start: text.len(),
        end: text.len(),
    });
    Ok(out)
}

/// Cursor over a token stream with statement-level helpers shared by all three grammars.
pub(crate) struct Cursor<'s, 'a> {
    pub src: &'s Source<'a>,
    toks: Vec<Token>,
    pos: usize,
}

impl<'s, 'a> Cursor<'s, 'a> {
    pub fn new(src: &'s Source<'a>) -> Result<Self, ParseError> {
        Ok(Cursor {
            src,
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error_at(&self, t: &Token, message: impl Into<String>) -> ParseError {
        self.src.error(t.line, t.column, message)
    }

    pub fn unexpected(&self, t: &Token, wanted: &str) -> ParseError {
        self.error_at(t, format!("expected {wanted}, found {}", t.tok))
    }

    /// Skips statement separators (`;` and newlines).
    pub fn skip_separators(&mut self) {
        while matches!(self.peek().tok, Tok::Newline | Tok::Semi) {
            self.next();
        }
    }

    /// After a statement: the next token must end it.
    pub fn end_statement(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::Semi | Tok::Newline | Tok::RBrace | Tok::Eof => Ok(()),
            _ => {
                let t = self.peek().clone();
                Err(self.unexpected(&t, "`;` or end of line"))
            }
        }
    }

    pub fn keyword(&mut self, word: &str) -> Result<Token, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Word(w) if w == word => Ok(t),
            _ => Err(self.unexpected(&t, &format!("`{word}`"))),
        }
    }

    pub fn eat_keyword(&mut self, word: &str) -> bool {
        if matches!(&self.peek().tok, Tok::Word(w) if w == word) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Word(w) => Ok((w.clone(), t)),
            _ => Err(self.unexpected(&t, what)),
        }
    }

    pub fn string(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Str(s) => Ok((s.clone(), t)),
            _ => Err(self.unexpected(&t, what)),
        }
    }

    pub fn hash_number(&mut self) -> Result<u32, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Hash(n) if n > 0 => Ok(n),
            Tok::Hash(_) => Err(self.error_at(&t, "numbers must be positive")),
            _ => Err(self.unexpected(&t, "a number such as `#1`")),
        }
    }

    pub fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(self.unexpected(&t, &tok.to_string()))
        }
    }

    /// Only separators and comments may follow the closing brace of a diagram.
    pub fn expect_end(&mut self) -> Result<(), ParseError> {
        self.skip_separators();
        let t = self.peek().clone();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected(&t, "end of input"))
        }
    }

    /// Error for a string whose content fails to parse, pointing inside the literal.
    pub fn string_error(&self, t: &Token, offset: usize, message: String) -> ParseError {
        self.src.error(t.line, t.column + 1 + offset, message)
    }
}
