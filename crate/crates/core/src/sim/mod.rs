//! Token-game execution of activity graphs and of emitted pseudocode.
//!
//! Both interpreters share one scheduler. Threads take turns in round-robin
//! order; a turn lasts until the thread executes one action (or `do`
//! statement), forks, waits at a join, or finishes. Threads created by a fork
//! start in the next round, in fork-edge (or `par` arm) order. The last
//! thread to reach a join carries on past it within the same turn. Since
//! only actions change the environment and every turn contains at most one
//! action, a graph and its structured program produce the same trace.

mod pseudo;

use std::collections::BTreeMap;

use serde::Serialize;

pub use pseudo::{parse_pseudocode, run_pseudocode, Program, PseudoParseError, Stmt};

use crate::expr::{apply_effect, eval_guard, parse_effect, Env, EvalError};
use crate::model::{ActivityGraph, Edge, Node, NodeKind};

pub const DEFAULT_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Termination {
    Completed,
    BudgetExhausted,
    GuardError,
    Deadlock,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::BudgetExhausted => "budgetExhausted",
            Termination::GuardError => "guardError",
            Termination::Deadlock => "deadlock",
        }
    }
}

/// What a run did: executed action labels, the final bindings, and how it ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Trace {
    pub steps: Vec<String>,
    pub final_env: Env,
    pub terminated: Termination,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Trace {
    /// Steps, final environment, and termination agree (details may differ).
    pub fn same_outcome(&self, other: &Trace) -> bool {
        self.steps == other.steps && self.final_env == other.final_env && self.terminated == other.terminated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub budget: u64,
    /// Re-check token conservation after every turn; a violation panics.
    pub check_conservation: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            budget: DEFAULT_BUDGET,
            check_conservation: false,
        }
    }
}

/// How a turn ended.
pub(crate) enum TurnEnd<T> {
    /// Executed an action; run again next round.
    Yield,
    /// The thread is replaced by these threads, which start next round.
    Spawn(Vec<T>),
    /// The thread is gone (parked at a join, consumed, or finished an arm).
    Retire,
    Halt(Termination, Option<String>),
}

pub(crate) trait Machine {
    type Thread;
    fn turn(&mut self, t: &mut Self::Thread) -> TurnEnd<Self::Thread>;
    fn after_turn(&mut self, _live: usize) {}
}

pub(crate) fn schedule<M: Machine>(m: &mut M, main: M::Thread) -> (Termination, Option<String>) {
    let mut queue = vec![main];
    while !queue.is_empty() {
        let mut next = Vec::with_capacity(queue.len());
        let mut pending = queue.len();
        for mut t in queue {
            pending -= 1;
            let end = m.turn(&mut t);
            match end {
                TurnEnd::Yield => next.push(t),
                TurnEnd::Spawn(children) => next.extend(children),
                TurnEnd::Retire => {}
                TurnEnd::Halt(term, detail) => return (term, detail),
            }
            m.after_turn(next.len() + pending);
        }
        queue = next;
    }
    (Termination::Deadlock, Some("no token can move".into()))
}

/// Runs `g` from `init` with the default options and the given visit budget.
pub fn run(g: &ActivityGraph, init: &Env, budget: u64) -> Trace {
    run_with(
        g,
        init,
        SimOptions {
            budget,
            ..SimOptions::default()
        },
    )
}

pub fn run_with(g: &ActivityGraph, init: &Env, opts: SimOptions) -> Trace {
    let flat = Flat::new(g);
    let mut m = Diagram {
        flat: &flat,
        env: init.clone(),
        steps: Vec::new(),
        visits: 0,
        opts,
        arrivals: BTreeMap::new(),
        expected_tokens: 1,
        parked: 0,
    };
    let Some(start) = flat.start.clone() else {
        return Trace {
            steps: Vec::new(),
            final_env: init.clone(),
            terminated: Termination::Deadlock,
            detail: Some("the activity has no initial node".into()),
        };
    };
    let (terminated, detail) = schedule(&mut m, Token::At(start));
    Trace {
        steps: m.steps,
        final_env: m.env,
        terminated,
        detail,
    }
}

/// All nodes and flows of a graph and its loop-node bodies in one index.
struct Flat<'g> {
    nodes: BTreeMap<&'g str, &'g Node>,
    outs: BTreeMap<&'g str, Vec<&'g Edge>>,
    in_degree: BTreeMap<&'g str, usize>,
    /// Loop node of every body-level initial and final node.
    owner: BTreeMap<&'g str, &'g str>,
    /// Entry (initial node) of every loop-node body.
    body_start: BTreeMap<&'g str, &'g str>,
    start: Option<String>,
}

impl<'g> Flat<'g> {
    fn new(g: &'g ActivityGraph) -> Self {
        let mut f = Flat {
            nodes: BTreeMap::new(),
            outs: BTreeMap::new(),
            in_degree: BTreeMap::new(),
            owner: BTreeMap::new(),
            body_start: BTreeMap::new(),
            start: g
                .nodes_of(NodeKind::Initial)
                .map(|n| n.id.as_str())
                .min()
                .map(String::from),
        };
        f.add(g, None);
        f
    }

    fn add(&mut self, g: &'g ActivityGraph, owner: Option<&'g str>) {
        for n in &g.nodes {
            self.nodes.entry(&n.id).or_insert(n);
            if let Some(o) = owner {
                if matches!(n.kind, NodeKind::Initial | NodeKind::ActivityFinal) {
                    self.owner.insert(&n.id, o);
                }
            }
            if let Some(body) = &n.body {
                if let Some(s) = body.nodes_of(NodeKind::Initial).map(|b| b.id.as_str()).min() {
                    self.body_start.insert(&n.id, s);
                }
                self.add(body, Some(&n.id));
            }
        }
        for e in &g.edges {
            self.outs.entry(&e.source).or_default().push(e);
            *self.in_degree.entry(&e.target).or_default() += 1;
        }
    }

    fn outs(&self, id: &str) -> &[&'g Edge] {
        self.outs.get(id).map_or(&[], Vec::as_slice)
    }
}

enum Token {
    /// About to visit this node.
    At(String),
}

struct Diagram<'f, 'g> {
    flat: &'f Flat<'g>,
    env: Env,
    steps: Vec<String>,
    visits: u64,
    opts: SimOptions,
    arrivals: BTreeMap<String, usize>,
    /// Tokens that should exist: one, plus forked extras, minus joined and consumed ones.
    expected_tokens: i64,
    parked: i64,
}

impl Diagram<'_, '_> {
    /// Successors of `id` reached by plain (unguarded) flows.
    fn follow(&mut self, id: &str, t: &mut Token) -> Option<TurnEnd<Token>> {
        let outs = self.flat.outs(id);
        match outs {
            [] => {
                self.expected_tokens -= 1;
                Some(TurnEnd::Retire)
            }
            [e] => {
                *t = Token::At(e.target.clone());
                None
            }
            many => {
                // several outgoing flows without a fork still split the token
                self.expected_tokens += many.len() as i64 - 1;
                Some(TurnEnd::Spawn(many.iter().map(|e| Token::At(e.target.clone())).collect()))
            }
        }
    }

    fn guard_error(&self, msg: String) -> TurnEnd<Token> {
        TurnEnd::Halt(Termination::GuardError, Some(msg))
    }

    fn choose(&self, id: &str) -> Result<String, String> {
        let outs = self.flat.outs(id);
        let mut taken: Vec<&Edge> = Vec::new();
        let mut fallback: Vec<&Edge> = Vec::new();
        for e in outs {
            match e.guard.as_deref().map(str::trim) {
                None | Some("else") => fallback.push(e),
                Some(g) => match eval_guard(g, &self.env) {
                    Ok(true) => taken.push(e),
                    Ok(false) => {}
                    Err(err) => return Err(format!("guard `{g}` on `{}`: {err}", e.id)),
                },
            }
        }
        match (taken.as_slice(), fallback.as_slice()) {
            ([e], _) => Ok(e.target.clone()),
            ([], [e]) => Ok(e.target.clone()),
            ([], []) => Err(format!("no guard leaving decision `{id}` holds in {{{}}}", self.env)),
            ([], _) => Err(format!("decision `{id}` has several unguarded or else flows")),
            (many, _) => {
                let ids: Vec<&str> = many.iter().map(|e| e.id.as_str()).collect();
                Err(format!("guards of {} hold at the same time", ids.join(", ")))
            }
        }
    }
}

impl Machine for Diagram<'_, '_> {
    type Thread = Token;

    fn turn(&mut self, t: &mut Token) -> TurnEnd<Token> {
        loop {
            let Token::At(id) = &*t;
            let id = id.clone();
            self.visits += 1;
            if self.visits > self.opts.budget {
                return TurnEnd::Halt(
                    Termination::BudgetExhausted,
                    Some(format!("budget of {} node visits used up", self.opts.budget)),
                );
            }
            let Some(node) = self.flat.nodes.get(id.as_str()).copied() else {
                return TurnEnd::Halt(Termination::Deadlock, Some(format!("token reached unknown node `{id}`")));
            };
            match node.kind {
                NodeKind::Initial | NodeKind::Merge => {
                    if let Some(end) = self.follow(&id, t) {
                        return end;
                    }
                }
                NodeKind::Action => {
                    self.steps.push(node.label.clone());
                    if let Some(effect) = &node.effect {
                        let result = parse_effect(effect)
                            .map_err(EvalError::from)
                            .and_then(|a| apply_effect(&a, &mut self.env));
                        if let Err(err) = result {
                            return self.guard_error(format!("effect of `{id}`: {err}"));
                        }
                    }
                    return self.follow(&id, t).unwrap_or(TurnEnd::Yield);
                }
                NodeKind::Decision => match self.choose(&id) {
                    Ok(next) => *t = Token::At(next),
                    Err(msg) => return self.guard_error(msg),
                },
                NodeKind::LoopNode => match eval_guard(&node.label, &self.env) {
                    Ok(true) => match self.flat.body_start.get(id.as_str()) {
                        Some(s) => *t = Token::At(s.to_string()),
                        None => {
                            return TurnEnd::Halt(
                                Termination::Deadlock,
                                Some(format!("loop node `{id}` has no body entry")),
                            )
                        }
                    },
                    Ok(false) => {
                        let outs = self.flat.outs(&id);
                        if let Some(g) = outs.first().and_then(|e| e.guard.as_deref()) {
                            match eval_guard(g, &self.env) {
                                Ok(true) => {}
                                Ok(false) => {
                                    return self.guard_error(format!("exit guard `{g}` of loop node `{id}` is false"))
                                }
                                Err(err) => return self.guard_error(format!("exit guard `{g}`: {err}")),
                            }
                        }
                        if let Some(end) = self.follow(&id, t) {
                            return end;
                        }
                    }
                    Err(err) => return self.guard_error(format!("loop condition of `{id}`: {err}")),
                },
                NodeKind::Fork => {
                    let outs = self.flat.outs(&id);
                    if outs.is_empty() {
                        self.expected_tokens -= 1;
                        return TurnEnd::Retire;
                    }
                    self.expected_tokens += outs.len() as i64 - 1;
                    return TurnEnd::Spawn(outs.iter().map(|e| Token::At(e.target.clone())).collect());
                }
                NodeKind::Join => {
                    let need = self.flat.in_degree.get(id.as_str()).copied().unwrap_or(0);
                    let count = self.arrivals.entry(id.clone()).or_default();
                    *count += 1;
                    if *count < need {
                        self.parked += 1;
                        return TurnEnd::Retire;
                    }
                    *count = 0;
                    self.parked -= need as i64 - 1;
                    self.expected_tokens -= need as i64 - 1;
                    if let Some(end) = self.follow(&id, t) {
                        return end;
                    }
                }
                NodeKind::FlowFinal => {
                    self.expected_tokens -= 1;
                    return TurnEnd::Retire;
                }
                NodeKind::ActivityFinal => match self.flat.owner.get(id.as_str()) {
                    Some(loop_node) => *t = Token::At(loop_node.to_string()),
                    None => return TurnEnd::Halt(Termination::Completed, None),
                },
            }
        }
    }

    fn after_turn(&mut self, live: usize) {
        if self.opts.check_conservation {
            assert_eq!(
                live as i64 + self.parked,
                self.expected_tokens,
                "token conservation violated: {live} live and {} parked tokens",
                self.parked
            );
        }
    }
}

#[cfg(test)]
mod tests;
