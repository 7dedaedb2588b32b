//! Well-formedness rules for activity diagrams.
//!
//! [`lint`] applies the whole rule catalog (see [`catalog`]) to a graph and
//! every loop-node body nested in it. All rules currently report errors; a
//! report is well-formed only when no error fires and the graph also reduces
//! to structured code.

pub mod catalog;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use catalog::{explain, rule_ids, UnknownRule};
use catalog::*;

use crate::model::{validate_refs, ActivityGraph, Construct, ControlAnnotation, NodeKind};
use crate::structure::reduce;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One rule violation located at a node, flow, or annotation.
///
/// Annotation-level problems are located at the annotation's opening node
/// when it exists; graph-level problems (no initial node at all) at the graph
/// name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Diagnostic {
    pub rule: &'static str,
    pub severity: Severity,
    pub locus: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(rule: &'static str, locus: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            rule,
            severity: Severity::Error,
            locus: locus.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LintReport {
    pub diagnostics: Vec<Diagnostic>,
    pub well_formed: bool,
}

impl LintReport {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.diagnostics.iter().any(|d| d.rule == rule)
    }
}

/// Checks `g` against the rule catalog.
///
/// Reference problems (see [`validate_refs`]) short-circuit the other rules,
/// since they make degrees and paths meaningless.
pub fn lint(g: &ActivityGraph) -> LintReport {
    let mut diagnostics = lint_rules(g);
    if !diagnostics.is_empty() && diagnostics.iter().all(|d| d.rule.starts_with("REF-")) {
        return LintReport {
            diagnostics,
            well_formed: false,
        };
    }
    let clean = !diagnostics.iter().any(|d| d.severity == Severity::Error);
    let well_formed = clean && reduce(g).is_ok();
    diagnostics.sort();
    LintReport {
        diagnostics,
        well_formed,
    }
}

/// The rule diagnostics alone, without the structuring check.
pub(crate) fn lint_rules(g: &ActivityGraph) -> Vec<Diagnostic> {
    let refs = validate_refs(g);
    if !refs.is_empty() {
        return refs;
    }
    let mut out = Vec::new();
    for graph in g.all_graphs() {
        let view = View::new(graph);
        single_initial(&view, &mut out);
        single_final(&view, &mut out);
        token_discipline(&view, &mut out);
        let regions = fork_join(&view, &mut out);
        guards_total(&view, &mut out);
        annotations_present(&view, &mut out);
        annotations_paired(&view, &mut out);
        reachable(&view, &mut out);
        flowfinal_scope(&view, &regions, &mut out);
    }
    duplicate_numbers(g, &mut out);
    out.sort();
    out
}

/// Adjacency for one graph (not its nested bodies).
pub(crate) struct View<'g> {
    pub g: &'g ActivityGraph,
    pub kind: BTreeMap<&'g str, NodeKind>,
    pub succ: BTreeMap<&'g str, Vec<&'g str>>,
    pub pred: BTreeMap<&'g str, Vec<&'g str>>,
}

impl<'g> View<'g> {
    pub fn new(g: &'g ActivityGraph) -> Self {
        let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut pred: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut kind = BTreeMap::new();
        for n in &g.nodes {
            kind.insert(n.id.as_str(), n.kind);
            succ.entry(&n.id).or_default();
            pred.entry(&n.id).or_default();
        }
        for e in &g.edges {
            succ.entry(&e.source).or_default().push(&e.target);
            pred.entry(&e.target).or_default().push(&e.source);
        }
        View { g, kind, succ, pred }
    }

    fn ids_of(&self, k: NodeKind) -> Vec<&'g str> {
        self.kind.iter().filter(|(_, kk)| **kk == k).map(|(id, _)| *id).collect()
    }

    fn out_degree(&self, id: &str) -> usize {
        self.succ.get(id).map_or(0, Vec::len)
    }

    fn in_degree(&self, id: &str) -> usize {
        self.pred.get(id).map_or(0, Vec::len)
    }

    pub fn forward_from(&self, roots: &[&'g str]) -> BTreeSet<&'g str> {
        closure(roots, &self.succ)
    }

    pub fn backward_from(&self, roots: &[&'g str]) -> BTreeSet<&'g str> {
        closure(roots, &self.pred)
    }

    fn sinks(&self) -> Vec<&'g str> {
        let mut v = self.ids_of(NodeKind::ActivityFinal);
        v.extend(self.ids_of(NodeKind::FlowFinal));
        v
    }

    /// Immediate post-dominator of every node that reaches a final node.
    pub fn immediate_postdominators(&self) -> BTreeMap<&'g str, &'g str> {
        let sinks = self.sinks();
        let live: BTreeSet<&str> = self.backward_from(&sinks);
        const EXIT: &str = "";
        let mut pdom: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let mut all: BTreeSet<&str> = live.clone();
        all.insert(EXIT);
        for &n in &live {
            pdom.insert(n, all.clone());
        }
        pdom.insert(EXIT, [EXIT].into());
        let mut changed = true;
        while changed {
            changed = false;
            for &n in &live {
                let succs: Vec<&str> = if sinks.contains(&n) {
                    vec![EXIT]
                } else {
                    self.succ[n].iter().copied().filter(|s| live.contains(s)).collect()
                };
                let mut acc: Option<BTreeSet<&str>> = None;
                for s in succs {
                    let ps = &pdom[s];
                    acc = Some(match acc {
                        None => ps.clone(),
                        Some(a) => a.intersection(ps).copied().collect(),
                    });
                }
                let mut next = acc.unwrap_or_default();
                next.insert(n);
                if next != pdom[n] {
                    pdom.insert(n, next);
                    changed = true;
                }
            }
        }
        let mut out = BTreeMap::new();
        for &n in &live {
            let strict: Vec<&str> = pdom[n].iter().copied().filter(|&p| p != n && p != EXIT).collect();
            // the closest strict post-dominator is the one post-dominated by all others
            if let Some(&ip) = strict.iter().max_by_key(|p| pdom[**p].len()) {
                out.insert(n, ip);
            }
        }
        out
    }
}

fn closure<'g>(roots: &[&'g str], adj: &BTreeMap<&'g str, Vec<&'g str>>) -> BTreeSet<&'g str> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<&str> = roots.to_vec();
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            if let Some(next) = adj.get(n) {
                stack.extend(next.iter().copied());
            }
        }
    }
    seen
}

fn single_initial(v: &View<'_>, out: &mut Vec<Diagnostic>) {
    let initials = v.ids_of(NodeKind::Initial);
    if initials.is_empty() {
        out.push(Diagnostic::error(
            W1_SINGLE_INITIAL,
            &v.g.name,
            format!("activity `{}` has no initial node", v.g.name),
        ));
    }
    for extra in initials.iter().skip(1) {
        out.push(Diagnostic::error(
            W1_SINGLE_INITIAL,
            *extra,
            format!("`{extra}` is an additional initial node; `{}` already starts the activity", initials[0]),
        ));
    }
}

fn single_final(v: &View<'_>, out: &mut Vec<Diagnostic>) {
    let finals = v.ids_of(NodeKind::ActivityFinal);
    if finals.is_empty() {
        out.push(Diagnostic::error(
            W2_SINGLE_FINAL,
            &v.g.name,
            format!("activity `{}` has no end symbol", v.g.name),
        ));
        return;
    }
    let reached = v.forward_from(&v.ids_of(NodeKind::Initial));
    let keep = finals
        .iter()
        .find(|f| reached.contains(*f))
        .unwrap_or(&finals[0]);
    for f in finals.iter().filter(|f| *f != keep) {
        out.push(Diagnostic::error(
            W2_SINGLE_FINAL,
            *f,
            format!("`{f}` is a second end symbol; `{keep}` already ends the activity"),
        ));
    }
}

fn token_discipline(v: &View<'_>, out: &mut Vec<Diagnostic>) {
    use NodeKind::*;
    for (&id, &kind) in &v.kind {
        let (din, dout) = (v.in_degree(id), v.out_degree(id));
        // (min in, max in, min out, max out)
        let (lo_in, hi_in, lo_out, hi_out) = match kind {
            Initial => (0, 0, 1, 1),
            ActivityFinal | FlowFinal => (1, usize::MAX, 0, 0),
            Action | LoopNode => (1, 1, 1, 1),
            Decision | Fork => (1, 1, 2, usize::MAX),
            Merge | Join => (2, usize::MAX, 1, 1),
        };
        let mut problems = Vec::new();
        if din < lo_in || din > hi_in {
            problems.push(format!("{din} incoming flows (expected {})", bounds(lo_in, hi_in)));
        }
        if dout < lo_out || dout > hi_out {
            problems.push(format!("{dout} outgoing flows (expected {})", bounds(lo_out, hi_out)));
        }
        if !problems.is_empty() {
            out.push(Diagnostic::error(
                W3_TOKEN_DISCIPLINE,
                id,
                format!("{kind} `{id}` has {}", problems.join(" and ")),
            ));
        }
    }
}

fn bounds(lo: usize, hi: usize) -> String {
    match (lo, hi) {
        (l, h) if l == h => format!("exactly {l}"),
        (l, usize::MAX) => format!("at least {l}"),
        (l, h) => format!("{l} to {h}"),
    }
}

/// Result of exploring one fork: the join all arms reach and the nodes in between.
#[derive(Debug, Clone)]
pub(crate) struct ForkRegion<'g> {
    pub join: &'g str,
    pub nodes: BTreeSet<&'g str>,
}

struct ForkMatcher<'v, 'g> {
    v: &'v View<'g>,
    memo: BTreeMap<&'g str, Result<ForkRegion<'g>, String>>,
    active: BTreeSet<&'g str>,
}

impl<'v, 'g> ForkMatcher<'v, 'g> {
    fn matched(&mut self, fork: &'g str) -> Result<ForkRegion<'g>, String> {
        if let Some(r) = self.memo.get(fork) {
            return r.clone();
        }
        if !self.active.insert(fork) {
            return Err(format!("fork `{fork}` is re-entered before its join"));
        }
        let r = self.explore(fork);
        self.active.remove(fork);
        self.memo.insert(fork, r.clone());
        r
    }

    fn explore(&mut self, fork: &'g str) -> Result<ForkRegion<'g>, String> {
        let v = self.v;
        let mut joins: BTreeSet<&str> = BTreeSet::new();
        let mut nodes: BTreeSet<&str> = BTreeSet::new();
        for &arm in &v.succ[fork] {
            let mut stack = vec![arm];
            let mut seen = BTreeSet::new();
            while let Some(n) = stack.pop() {
                if !seen.insert(n) {
                    continue;
                }
                match v.kind[n] {
                    NodeKind::Join => {
                        joins.insert(n);
                    }
                    NodeKind::ActivityFinal => {
                        return Err(format!(
                            "a path from fork `{fork}` reaches end symbol `{n}` before any join"
                        ));
                    }
                    NodeKind::Fork => {
                        let inner = self
                            .matched(n)
                            .map_err(|e| format!("nested fork `{n}` is unmatched: {e}"))?;
                        nodes.insert(n);
                        nodes.extend(inner.nodes.iter().copied());
                        nodes.insert(inner.join);
                        seen.extend(inner.nodes.iter().copied());
                        seen.insert(inner.join);
                        stack.extend(v.succ[inner.join].iter().copied());
                    }
                    _ => {
                        nodes.insert(n);
                        stack.extend(v.succ[n].iter().copied());
                    }
                }
            }
        }
        let join = match joins.len() {
            0 => return Err(format!("no path from fork `{fork}` reaches a join")),
            1 => *joins.iter().next().expect("one join"),
            _ => {
                let list: Vec<_> = joins.iter().map(|j| format!("`{j}`")).collect();
                return Err(format!(
                    "paths from fork `{fork}` reach different joins first ({})",
                    list.join(", ")
                ));
            }
        };
        Ok(ForkRegion { join, nodes })
    }
}

/// Checks fork/join pairing and returns the region of every fork whose arms agree on a join.
fn fork_join<'g>(v: &View<'g>, out: &mut Vec<Diagnostic>) -> Vec<ForkRegion<'g>> {
    let mut m = ForkMatcher {
        v,
        memo: BTreeMap::new(),
        active: BTreeSet::new(),
    };
    let mut regions = Vec::new();
    let mut claimed: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for fork in v.ids_of(NodeKind::Fork) {
        match m.matched(fork) {
            Ok(region) => {
                let (k, joined) = (v.out_degree(fork), v.in_degree(region.join));
                if k != joined {
                    out.push(Diagnostic::error(
                        W4_FORK_JOIN_MATCHED,
                        fork,
                        format!(
                            "fork `{fork}` emits {k} tokens but its join `{}` collects {joined}",
                            region.join
                        ),
                    ));
                } else {
                    claimed.entry(region.join).or_default().push(fork);
                }
                regions.push(region);
            }
            Err(reason) => out.push(Diagnostic::error(W4_FORK_JOIN_MATCHED, fork, reason)),
        }
    }
    for join in v.ids_of(NodeKind::Join) {
        match claimed.get(join).map(Vec::as_slice) {
            Some([_]) => {}
            Some(forks) => out.push(Diagnostic::error(
                W4_FORK_JOIN_MATCHED,
                join,
                format!("join `{join}` is claimed by {} forks", forks.len()),
            )),
            None => out.push(Diagnostic::error(
                W4_FORK_JOIN_MATCHED,
                join,
                format!("join `{join}` has no matching fork"),
            )),
        }
    }
    regions
}

fn guards_total(v: &View<'_>, out: &mut Vec<Diagnostic>) {
    for e in &v.g.edges {
        if v.kind.get(e.source.as_str()) == Some(&NodeKind::Decision) && e.guard.is_none() {
            out.push(Diagnostic::error(
                W5_GUARDS_TOTAL,
                &e.id,
                format!("flow `{}` leaves decision `{}` without a guard", e.id, e.source),
            ));
        }
    }
}

fn annotations_present(v: &View<'_>, out: &mut Vec<Diagnostic>) {
    for (&id, &kind) in &v.kind {
        if !matches!(kind, NodeKind::Decision | NodeKind::LoopNode) {
            continue;
        }
        let n = v.g.annotations.iter().filter(|a| a.open_node == id).count();
        match n {
            1 => {}
            0 => out.push(Diagnostic::error(
                W6_ANNOT_PRESENT,
                id,
                format!("{kind} `{id}` has no control annotation (construct, number, condition)"),
            )),
            n => out.push(Diagnostic::error(
                W6_ANNOT_PRESENT,
                id,
                format!("{kind} `{id}` is opened by {n} annotations"),
            )),
        }
    }
}

fn annotation_locus(v: &View<'_>, a: &ControlAnnotation) -> String {
    if v.kind.contains_key(a.open_node.as_str()) {
        a.open_node.clone()
    } else if v.kind.contains_key(a.close_node.as_str()) {
        a.close_node.clone()
    } else {
        format!("#{}", a.number)
    }
}

fn annotations_paired(v: &View<'_>, out: &mut Vec<Diagnostic>) {
    let ipdom = v.immediate_postdominators();
    for a in &v.g.annotations {
        let locus = annotation_locus(v, a);
        let n = a.number;
        let mut fail = |msg: String| out.push(Diagnostic::error(W7_ANNOT_PAIRED, locus.clone(), msg));
        let open = v.kind.get(a.open_node.as_str()).copied();
        let close = v.kind.get(a.close_node.as_str()).copied();
        match (open, close) {
            (None, _) => fail(format!("annotation #{n} opens at unknown node `{}`", a.open_node)),
            (_, None) => fail(format!("annotation #{n} closes at unknown node `{}`", a.close_node)),
            (Some(NodeKind::LoopNode), Some(_)) => {
                if a.close_node != a.open_node {
                    fail(format!(
                        "annotation #{n} opens loop node `{}` but closes at `{}`",
                        a.open_node, a.close_node
                    ));
                } else if !matches!(a.construct, Construct::While | Construct::For) {
                    fail(format!(
                        "annotation #{n} labels loop node `{}` as `{}`; loop nodes test first (while/for)",
                        a.open_node,
                        a.construct.keyword()
                    ));
                }
            }
            (Some(NodeKind::Decision), Some(NodeKind::Merge)) => {
                let (d, m) = (a.open_node.as_str(), a.close_node.as_str());
                let has_edge = |s: &str, t: &str| v.succ[s].contains(&t);
                match a.construct {
                    Construct::If => {
                        if ipdom.get(d) != Some(&m) {
                            fail(format!("merge `{m}` does not rejoin the branches opened by `{d}` (#{n})"));
                        }
                    }
                    Construct::While | Construct::For => {
                        if !has_edge(m, d) {
                            fail(format!("loop #{n}: merge `{m}` does not lead directly into loop head `{d}`"));
                        }
                    }
                    Construct::DoWhile => {
                        if !has_edge(d, m) {
                            fail(format!("do-while #{n}: decision `{d}` has no back flow to merge `{m}`"));
                        }
                    }
                }
            }
            (Some(ok), Some(ck)) => fail(format!(
                "annotation #{n} must open at a decision and close at a merge, found {ok} `{}` and {ck} `{}`",
                a.open_node, a.close_node
            )),
        }
    }
}

fn duplicate_numbers(g: &ActivityGraph, out: &mut Vec<Diagnostic>) {
    let mut by_number: BTreeMap<u32, Vec<(String, &str)>> = BTreeMap::new();
    for graph in g.all_graphs() {
        let v = View::new(graph);
        for a in &graph.annotations {
            by_number
                .entry(a.number)
                .or_default()
                .push((annotation_locus(&v, a), a.open_node.as_str()));
        }
    }
    for (number, mut uses) in by_number {
        uses.sort();
        let first = uses[0].1;
        for (locus, _) in uses.iter().skip(1) {
            out.push(Diagnostic::error(
                W7_ANNOT_PAIRED,
                locus.clone(),
                format!("number #{number} is already used by the annotation opened at `{first}`"),
            ));
        }
    }
}

fn reachable(v: &View<'_>, out: &mut Vec<Diagnostic>) {
    let initials = v.ids_of(NodeKind::Initial);
    let sinks = v.sinks();
    let fwd = (!initials.is_empty()).then(|| v.forward_from(&initials));
    let bwd = (!v.ids_of(NodeKind::ActivityFinal).is_empty()).then(|| v.backward_from(&sinks));
    for &id in v.kind.keys() {
        let from_start = fwd.as_ref().is_none_or(|s| s.contains(id));
        let to_end = bwd.as_ref().is_none_or(|s| s.contains(id));
        let msg = match (from_start, to_end) {
            (true, true) => continue,
            (false, true) => format!("`{id}` cannot be reached from the initial node"),
            (true, false) => format!("no path leads from `{id}` to a final node"),
            (false, false) => format!("`{id}` is disconnected from the initial and final nodes"),
        };
        out.push(Diagnostic::error(W8_REACHABLE, id, msg));
    }
}

fn flowfinal_scope(v: &View<'_>, regions: &[ForkRegion<'_>], out: &mut Vec<Diagnostic>) {
    for ff in v.ids_of(NodeKind::FlowFinal) {
        if !regions.iter().any(|r| r.nodes.contains(ff)) {
            out.push(Diagnostic::error(
                W9_FLOWFINAL_SCOPE,
                ff,
                format!("flow final `{ff}` is outside every fork/join region"),
            ));
        }
    }
}

#[cfg(test)]
mod tests;
