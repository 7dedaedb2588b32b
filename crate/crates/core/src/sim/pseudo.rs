//! Parser and interpreter for emitted pseudocode.
//!
//! Accepts both the canonical multi-line form and the one-line outline.
//! After `do <label>;` a `// ...` comment up to the end of the line is the
//! action's effect list.

use thiserror::Error;

use super::{schedule, Machine, Termination, Trace, TurnEnd};
use crate::expr::{apply_effect, parse_effect, parse_expr, Assignment, Env, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct PseudoParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Do {
        label: String,
        effect: Vec<Assignment>,
    },
    Skip,
    If {
        number: u32,
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
    While {
        number: u32,
        cond: Expr,
        body: Vec<Stmt>,
    },
    DoWhile {
        number: u32,
        cond: Expr,
        body: Vec<Stmt>,
    },
    Par(Vec<Vec<Stmt>>),
}

pub type Program = Vec<Stmt>;

pub fn parse_pseudocode(text: &str) -> Result<Program, PseudoParseError> {
    let mut p = Parser { text, pos: 0 };
    let prog = p.block()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error(format!("unexpected `{}`", p.rest().chars().next().unwrap_or(' '))));
    }
    Ok(prog)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn error(&self, message: impl Into<String>) -> PseudoParseError {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        PseudoParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn skip_inline_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start_matches([' ', '\t']).len();
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), PseudoParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    /// A keyword followed by a non-identifier character.
    fn keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = self.rest();
        let ok = rest.starts_with(word)
            && !rest[word.len()..]
                .chars()
                .next()
                .is_some_and(|c| c.is_alphanumeric() || c == '_');
        if ok {
            self.pos += word.len();
        }
        ok
    }

    fn block(&mut self) -> Result<Vec<Stmt>, PseudoParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let rest = self.rest();
            if rest.is_empty() || rest.starts_with('}') || rest.starts_with("||") {
                return Ok(out);
            }
            out.push(self.statement()?);
        }
    }

    fn braced(&mut self) -> Result<Vec<Stmt>, PseudoParseError> {
        self.expect("{")?;
        let body = self.block()?;
        self.expect("}")?;
        Ok(body)
    }

    fn condition(&mut self) -> Result<Expr, PseudoParseError> {
        self.expect("(")?;
        let start = self.pos;
        let mut depth = 1;
        for (i, c) in self.rest().char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '\n' => break,
                _ => {}
            }
            if depth == 0 {
                let text = &self.text[start..start + i];
                let e = parse_expr(text).map_err(|e| {
                    self.pos = start + e.offset.min(text.len());
                    self.error(format!("bad condition `{text}`: {}", e.message))
                })?;
                self.pos = start + i + 1;
                return Ok(e);
            }
        }
        Err(self.error("unbalanced parentheses in condition"))
    }

    fn number(&mut self) -> Result<u32, PseudoParseError> {
        self.expect("//")?;
        self.expect("#")?;
        let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
        let n = digits.parse().map_err(|_| self.error("expected a block number after `#`"))?;
        self.pos += digits.len();
        Ok(n)
    }

    fn statement(&mut self) -> Result<Stmt, PseudoParseError> {
        if self.keyword("do") {
            self.skip_inline_ws();
            let end = self.rest().find(';').ok_or_else(|| self.error("`do` without `;`"))?;
            let label = self.rest()[..end].trim().to_string();
            if label.is_empty() || label.contains('\n') {
                return Err(self.error("`do` needs a label on the same line"));
            }
            self.pos += end + 1;
            self.skip_inline_ws();
            let mut effect = Vec::new();
            if self.rest().starts_with("//") {
                self.pos += 2;
                let line_end = self.rest().find('\n').unwrap_or(self.rest().len());
                let text = self.rest()[..line_end].trim();
                effect = parse_effect(text).map_err(|e| self.error(format!("bad effect `{text}`: {}", e.message)))?;
                self.pos += line_end;
            }
            return Ok(Stmt::Do { label, effect });
        }
        if self.keyword("skip") {
            self.expect(";")?;
            return Ok(Stmt::Skip);
        }
        if self.keyword("if") {
            let cond = self.condition()?;
            let then_branch = self.braced()?;
            let else_branch = if self.keyword("else") {
                Some(self.braced()?)
            } else {
                None
            };
            let number = self.number()?;
            return Ok(Stmt::If {
                number,
                cond,
                then_branch,
                else_branch,
            });
        }
        if self.keyword("while") {
            let cond = self.condition()?;
            let body = self.braced()?;
            let number = self.number()?;
            return Ok(Stmt::While { number, cond, body });
        }
        if self.keyword("dowhile") {
            let body = self.braced()?;
            let cond = self.condition()?;
            let number = self.number()?;
            return Ok(Stmt::DoWhile { number, cond, body });
        }
        if self.keyword("par") {
            self.expect("{")?;
            let mut arms = vec![self.block()?];
            while self.eat("||") {
                arms.push(self.block()?);
            }
            self.expect("}")?;
            if arms.len() < 2 {
                return Err(self.error("`par` needs at least two arms separated by `||`"));
            }
            return Ok(Stmt::Par(arms));
        }
        let word: String = self.rest().chars().take_while(|c| !c.is_whitespace()).collect();
        Err(self.error(format!("unknown statement `{word}`")))
    }
}

/// Parses and runs `program`; parse failures are reported separately from trace outcomes.
pub fn run_pseudocode(program: &str, init: &Env, budget: u64) -> Result<Trace, PseudoParseError> {
    let prog = parse_pseudocode(program)?;
    let mut m = Interp {
        env: init.clone(),
        steps: Vec::new(),
        count: 0,
        budget,
        joins: Vec::new(),
    };
    let main = Thread {
        frames: vec![Frame {
            body: &prog,
            pc: 0,
            exit: Exit::Block,
        }],
        join: None,
    };
    let (terminated, detail) = schedule(&mut m, main);
    Ok(Trace {
        steps: m.steps,
        final_env: m.env,
        terminated,
        detail,
    })
}

enum Exit<'p> {
    Block,
    /// Re-test the loop condition when the body ends.
    Loop(&'p Expr),
}

struct Frame<'p> {
    body: &'p [Stmt],
    pc: usize,
    exit: Exit<'p>,
}

struct Thread<'p> {
    frames: Vec<Frame<'p>>,
    join: Option<usize>,
}

struct ParJoin<'p> {
    remaining: usize,
    cont: Vec<Frame<'p>>,
    parent: Option<usize>,
}

struct Interp<'p> {
    env: Env,
    steps: Vec<String>,
    count: u64,
    budget: u64,
    joins: Vec<ParJoin<'p>>,
}

impl Interp<'_> {
    /// Counts one statement; `Some` once the budget is used up.
    fn tick<T>(&mut self) -> Option<TurnEnd<T>> {
        self.count += 1;
        (self.count > self.budget).then(|| {
            TurnEnd::Halt(
                Termination::BudgetExhausted,
                Some(format!("budget of {} statements used up", self.budget)),
            )
        })
    }

    fn test(&self, cond: &Expr) -> Result<bool, String> {
        match cond.eval(&self.env) {
            Ok(crate::expr::Value::Bool(b)) => Ok(b),
            Ok(v) => Err(format!("condition `{cond}` evaluated to {v}, not a boolean")),
            Err(e) => Err(format!("condition `{cond}`: {e}")),
        }
    }
}

fn halt<T>(term: Termination, msg: String) -> TurnEnd<T> {
    TurnEnd::Halt(term, Some(msg))
}

impl<'p> Machine for Interp<'p> {
    type Thread = Thread<'p>;

    fn turn(&mut self, t: &mut Thread<'p>) -> TurnEnd<Thread<'p>> {
        loop {
            let Some(frame) = t.frames.last_mut() else {
                let Some(j) = t.join else {
                    return TurnEnd::Halt(Termination::Completed, None);
                };
                let join = &mut self.joins[j];
                join.remaining -= 1;
                if join.remaining > 0 {
                    return TurnEnd::Retire;
                }
                t.frames = std::mem::take(&mut join.cont);
                t.join = join.parent;
                continue;
            };
            if frame.pc == frame.body.len() {
                match frame.exit {
                    Exit::Block => {
                        t.frames.pop();
                    }
                    Exit::Loop(cond) => {
                        if let Some(end) = self.tick() {
                            return end;
                        }
                        match self.test(cond) {
                            Ok(true) => t.frames.last_mut().expect("frame").pc = 0,
                            Ok(false) => {
                                t.frames.pop();
                            }
                            Err(msg) => return halt(Termination::GuardError, msg),
                        }
                    }
                }
                continue;
            }
            let stmt: &'p Stmt = &frame.body[frame.pc];
            frame.pc += 1;
            if let Some(end) = self.tick() {
                return end;
            }
            match stmt {
                Stmt::Do { label, effect } => {
                    self.steps.push(label.clone());
                    if let Err(e) = apply_effect(effect, &mut self.env) {
                        return halt(Termination::GuardError, format!("effect of `{label}`: {e}"));
                    }
                    return TurnEnd::Yield;
                }
                Stmt::Skip => {}
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                    ..
                } => {
                    let branch = match self.test(cond) {
                        Ok(true) => Some(then_branch),
                        Ok(false) => else_branch.as_ref(),
                        Err(msg) => return halt(Termination::GuardError, msg),
                    };
                    if let Some(b) = branch {
                        t.frames.push(Frame {
                            body: b,
                            pc: 0,
                            exit: Exit::Block,
                        });
                    }
                }
                Stmt::While { cond, body, .. } => match self.test(cond) {
                    Ok(true) => t.frames.push(Frame {
                        body,
                        pc: 0,
                        exit: Exit::Loop(cond),
                    }),
                    Ok(false) => {}
                    Err(msg) => return halt(Termination::GuardError, msg),
                },
                Stmt::DoWhile { cond, body, .. } => t.frames.push(Frame {
                    body,
                    pc: 0,
                    exit: Exit::Loop(cond),
                }),
                Stmt::Par(arms) => {
                    let j = self.joins.len();
                    self.joins.push(ParJoin {
                        remaining: arms.len(),
                        cont: std::mem::take(&mut t.frames),
                        parent: t.join,
                    });
                    return TurnEnd::Spawn(
                        arms.iter()
                            .map(|a| Thread {
                                frames: vec![Frame {
                                    body: a,
                                    pc: 0,
                                    exit: Exit::Block,
                                }],
                                join: Some(j),
                            })
                            .collect(),
                    );
                }
            }
        }
    }
}
