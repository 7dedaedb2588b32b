//! Sequence-diagram checks: fragment nesting and activity/sequence consistency.
//!
//! Consistency compares the structured form of an activity diagram with the
//! fragment structure of a sequence diagram. Actions correspond to messages
//! with the same normalized label; a branch corresponds to an `alt` (two
//! arms) or an `opt`/one-operand `alt` (one arm), a loop to a `loop`
//! fragment with the same number, and a parallel block to a `par` fragment.
//! Lifelines take no part in the comparison. Blocks without any action have
//! no visible counterpart and are ignored.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{conditions_equal, negate};
use crate::lint::catalog::{
    C1_MISSING, C2_EXTRA, C3_ORDER, C4_KIND, C5_CONDITION, S1_CROSSOVER, S2_OPERAND_GAP, S3_NUMBER_DUP,
};
use crate::lint::{lint, Diagnostic};
use crate::model::{
    normalize_label, ActivityGraph, Fragment, FragmentKind, Lifeline, MessageEvent, MessageKind, Operand,
    SequenceModel, Span,
};
use crate::structure::{reduce, ReductionTree, StructNode};

/// Fragment nesting problems of `s`, sorted.
pub fn check_nesting(s: &SequenceModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let frags = &s.fragments;
    for (i, a) in frags.iter().enumerate() {
        for b in &frags[i + 1..] {
            if !(a.span.disjoint(&b.span) || a.span.contains(&b.span) || b.span.contains(&a.span)) {
                out.push(Diagnostic::error(
                    S1_CROSSOVER,
                    a.id.clone(),
                    format!(
                        "fragments {} ({}..{}) and {} ({}..{}) cross",
                        a.id, a.span.start, a.span.end, b.id, b.span.start, b.span.end
                    ),
                ));
            }
        }
        for b in frags {
            if a.span.contains(&b.span) && a.span != b.span {
                if let Some(op) = a.operands.iter().find(|o| !o.span.disjoint(&b.span) && !o.span.contains(&b.span)) {
                    out.push(Diagnostic::error(
                        S1_CROSSOVER,
                        b.id.clone(),
                        format!(
                            "fragment {} crosses the operand boundary of {} at {}..{}",
                            b.id, a.id, op.span.start, op.span.end
                        ),
                    ));
                }
            }
        }
        if let Some(msg) = operand_gap(a) {
            out.push(Diagnostic::error(S2_OPERAND_GAP, a.id.clone(), msg));
        }
    }
    let mut by_number: BTreeMap<u32, Vec<&Fragment>> = BTreeMap::new();
    for f in frags {
        by_number.entry(f.number).or_default().push(f);
    }
    for (n, fs) in by_number {
        let first = fs[0];
        for f in &fs[1..] {
            out.push(Diagnostic::error(
                S3_NUMBER_DUP,
                f.id.clone(),
                format!("fragment {} reuses number #{n} of {}", f.id, first.id),
            ));
        }
    }
    out.sort();
    out.dedup();
    out
}

fn operand_gap(f: &Fragment) -> Option<String> {
    if f.operands.is_empty() {
        return (f.kind == FragmentKind::Alt).then(|| format!("alt fragment {} has no operands", f.id));
    }
    if !matches!(f.kind, FragmentKind::Alt | FragmentKind::Par) {
        return Some(format!("{} fragment {} cannot have operands", f.kind.keyword(), f.id));
    }
    let mut next = f.span.start;
    for op in &f.operands {
        if op.span.start != next || op.span.end < op.span.start {
            return Some(format!(
                "operands of {} leave a gap or overlap at message {next}",
                f.id
            ));
        }
        next = op.span.end + 1;
    }
    (next != f.span.end + 1).then(|| format!("operands of {} stop before the end of the fragment", f.id))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConsistencyReport {
    /// Activity element id paired with sequence element id.
    pub matched_pairs: Vec<(String, String)>,
    pub mismatches: Vec<Diagnostic>,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsistencyError {
    #[error("the activity diagram is not well-formed ({} problems)", .0.len())]
    NotWellFormed(Vec<Diagnostic>),
    #[error("the sequence diagram's fragments do not nest ({} problems)", .0.len())]
    BadNesting(Vec<Diagnostic>),
}

/// Compares a well-formed activity diagram with a properly nested sequence diagram.
pub fn check_consistency(a: &ActivityGraph, s: &SequenceModel) -> Result<ConsistencyReport, ConsistencyError> {
    let report = lint(a);
    if !report.well_formed {
        return Err(ConsistencyError::NotWellFormed(report.diagnostics));
    }
    let nesting = check_nesting(s);
    if !nesting.is_empty() {
        return Err(ConsistencyError::BadNesting(nesting));
    }
    let tree = reduce(a).map_err(|r| {
        ConsistencyError::NotWellFormed(vec![Diagnostic::error(
            crate::lint::catalog::W7_ANNOT_PAIRED,
            a.name.clone(),
            r.to_string(),
        )])
    })?;
    Ok(compare_shapes(&tree_shape(&tree), &sequence_shape(s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Class {
    Branch,
    Loop,
    Par,
}

impl Class {
    fn name(self) -> &'static str {
        match self {
            Class::Branch => "branch",
            Class::Loop => "loop",
            Class::Par => "parallel block",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Key {
    Msg(String),
    Frag(Class, Option<u32>),
}

/// The comparable skeleton shared by reduction trees and sequence diagrams.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Shape {
    pub key: Key,
    pub id: String,
    pub cond: Option<String>,
    pub arms: Vec<Vec<Shape>>,
}

impl Shape {
    fn describe(&self) -> String {
        match &self.key {
            Key::Msg(label) => format!("`{label}`"),
            Key::Frag(c, Some(n)) => format!("{} #{n}", c.name()),
            Key::Frag(c, None) => c.name().to_string(),
        }
    }
}

pub(crate) fn tree_shape(t: &ReductionTree) -> Vec<Shape> {
    let mut out = Vec::new();
    node_shape(&t.root, &mut out);
    out
}

fn node_shape(n: &StructNode, out: &mut Vec<Shape>) {
    let arm = |n: &StructNode| {
        let mut v = Vec::new();
        node_shape(n, &mut v);
        v
    };
    match n {
        StructNode::Seq { children } => children.iter().for_each(|c| node_shape(c, out)),
        StructNode::Skip => {}
        StructNode::Act { id, label, .. } => out.push(Shape {
            key: Key::Msg(normalize_label(label)),
            id: id.clone(),
            cond: None,
            arms: Vec::new(),
        }),
        StructNode::If {
            number,
            cond,
            anchor,
            then_branch,
            else_branch,
        } => {
            let then_arm = arm(then_branch);
            let else_arm = else_branch.as_deref().map(arm).unwrap_or_default();
            let cond = if then_arm.is_empty() && !else_arm.is_empty() {
                negate(cond)
            } else {
                cond.clone()
            };
            push_frag(out, Class::Branch, Some(*number), anchor, Some(cond), vec![then_arm, else_arm]);
        }
        StructNode::While {
            number,
            cond,
            anchor,
            body,
            ..
        }
        | StructNode::DoWhile {
            number,
            cond,
            anchor,
            body,
        } => push_frag(out, Class::Loop, Some(*number), anchor, Some(cond.clone()), vec![arm(body)]),
        StructNode::Par { anchor, children } => {
            push_frag(out, Class::Par, None, anchor, None, children.iter().map(arm).collect())
        }
    }
}

fn push_frag(out: &mut Vec<Shape>, class: Class, number: Option<u32>, id: &str, cond: Option<String>, arms: Vec<Vec<Shape>>) {
    let arms: Vec<Vec<Shape>> = arms.into_iter().filter(|a| !a.is_empty()).collect();
    if !arms.is_empty() {
        out.push(Shape {
            key: Key::Frag(class, number),
            id: id.to_string(),
            cond,
            arms,
        });
    }
}

/// Rebuilds the fragment tree of a properly nested sequence diagram.
pub(crate) fn sequence_shape(s: &SequenceModel) -> Vec<Shape> {
    let mut order: Vec<usize> = (0..s.fragments.len()).collect();
    order.sort_by_key(|&i| {
        let sp = s.fragments[i].span;
        (sp.start, std::cmp::Reverse(sp.end), i)
    });
    if s.events.is_empty() {
        return Vec::new();
    }
    items(s, Span::new(0, s.events.len() - 1), &order)
}

fn items(s: &SequenceModel, range: Span, frags: &[usize]) -> Vec<Shape> {
    let mut out = Vec::new();
    let mut i = range.start;
    let mut k = 0;
    while i <= range.end {
        while k < frags.len() && s.fragments[frags[k]].span.start < i {
            k += 1;
        }
        if k < frags.len() && s.fragments[frags[k]].span.start == i {
            let f = &s.fragments[frags[k]];
            let mut j = k + 1;
            while j < frags.len() && f.span.contains(&s.fragments[frags[j]].span) {
                j += 1;
            }
            let inner = &frags[k + 1..j];
            out.push(fragment_shape(s, f, inner));
            i = f.span.end + 1;
            k = j;
        } else {
            let e = &s.events[i];
            out.push(Shape {
                key: Key::Msg(normalize_label(&e.label)),
                id: e.id.clone(),
                cond: None,
                arms: Vec::new(),
            });
            i += 1;
        }
    }
    out
}

fn fragment_shape(s: &SequenceModel, f: &Fragment, inner: &[usize]) -> Shape {
    let within = |sp: Span| -> Vec<usize> {
        inner
            .iter()
            .copied()
            .filter(|&j| sp.contains(&s.fragments[j].span))
            .collect()
    };
    let arms = if f.operands.is_empty() {
        vec![items(s, f.span, inner)]
    } else {
        f.operands.iter().map(|o| items(s, o.span, &within(o.span))).collect()
    };
    let (class, number, cond) = match f.kind {
        FragmentKind::Alt | FragmentKind::Opt => (Class::Branch, Some(f.number), Some(f.condition.clone())),
        FragmentKind::Loop => (Class::Loop, Some(f.number), Some(f.condition.clone())),
        FragmentKind::Par => (Class::Par, None, None),
    };
    Shape {
        key: Key::Frag(class, number),
        id: f.id.clone(),
        cond,
        arms,
    }
}

/// Aligns `left` (activity) against `right` (sequence) level by level.
pub(crate) fn compare_shapes(left: &[Shape], right: &[Shape]) -> ConsistencyReport {
    let mut r = ConsistencyReport {
        matched_pairs: Vec::new(),
        mismatches: Vec::new(),
        consistent: true,
    };
    compare_level(left, right, &mut r);
    r.consistent = r.mismatches.is_empty();
    r
}

fn lcs(left: &[Shape], right: &[Shape]) -> Vec<(usize, usize)> {
    let (n, m) = (left.len(), right.len());
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[i][j] = if left[i].key == right[j].key {
                dp[i + 1][j + 1] + 1
            } else {
                dp[i + 1][j].max(dp[i][j + 1])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut pairs = Vec::new();
    while i < n && j < m {
        if left[i].key == right[j].key {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if dp[i + 1][j] >= dp[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

fn compare_level(left: &[Shape], right: &[Shape], r: &mut ConsistencyReport) {
    let pairs = lcs(left, right);
    for &(i, j) in &pairs {
        compare_pair(&left[i], &right[j], r);
    }
    // Unmatched elements, tagged with the gap (number of matches before them).
    let gap_of = |idx: usize, side: fn(&(usize, usize)) -> usize| pairs.iter().filter(|p| side(p) < idx).count();
    let lpaired: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let rpaired: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let mut lu: Vec<(usize, usize)> = (0..left.len())
        .filter(|i| !lpaired.contains(i))
        .map(|i| (gap_of(i, |p| p.0), i))
        .collect();
    let mut ru: Vec<(usize, usize)> = (0..right.len())
        .filter(|j| !rpaired.contains(j))
        .map(|j| (gap_of(j, |p| p.1), j))
        .collect();

    let mut misplaced = Vec::new();
    lu.retain(|&(_, i)| match ru.iter().position(|&(_, j)| right[j].key == left[i].key) {
        Some(p) => {
            misplaced.push((i, ru.remove(p).1));
            false
        }
        None => true,
    });
    for (i, j) in misplaced {
        r.matched_pairs.push((left[i].id.clone(), right[j].id.clone()));
        r.mismatches.push(Diagnostic::error(
            C3_ORDER,
            left[i].id.clone(),
            format!(
                "{} ({}) appears at a different position as {}",
                left[i].describe(),
                left[i].id,
                right[j].id
            ),
        ));
    }

    let mut kinds = Vec::new();
    lu.retain(|&(g, i)| {
        if matches!(left[i].key, Key::Msg(_)) {
            return true;
        }
        match ru.iter().position(|&(h, j)| h == g && matches!(right[j].key, Key::Frag(..))) {
            Some(p) => {
                kinds.push((i, ru.remove(p).1));
                false
            }
            None => true,
        }
    });
    for (i, j) in kinds {
        r.mismatches.push(Diagnostic::error(
            C4_KIND,
            left[i].id.clone(),
            format!(
                "{} ({}) is mirrored by {} ({})",
                left[i].describe(),
                left[i].id,
                right[j].describe(),
                right[j].id
            ),
        ));
    }
    for (_, i) in lu {
        r.mismatches.push(Diagnostic::error(
            C1_MISSING,
            left[i].id.clone(),
            format!("{} ({}) has no counterpart", left[i].describe(), left[i].id),
        ));
    }
    for (_, j) in ru {
        r.mismatches.push(Diagnostic::error(
            C2_EXTRA,
            right[j].id.clone(),
            format!("{} ({}) has no counterpart", right[j].describe(), right[j].id),
        ));
    }
}

fn compare_pair(a: &Shape, b: &Shape, r: &mut ConsistencyReport) {
    r.matched_pairs.push((a.id.clone(), b.id.clone()));
    if let (Some(ca), Some(cb)) = (&a.cond, &b.cond) {
        if !conditions_equal(ca, cb) {
            r.mismatches.push(Diagnostic::error(
                C5_CONDITION,
                a.id.clone(),
                format!("{} ({}) tests `{ca}` but {} tests `{cb}`", a.describe(), a.id, b.id),
            ));
            return;
        }
    }
    if a.arms.len() != b.arms.len() {
        r.mismatches.push(Diagnostic::error(
            C4_KIND,
            a.id.clone(),
            format!(
                "{} ({}) has {} arm(s) but {} has {}",
                a.describe(),
                a.id,
                a.arms.len(),
                b.id,
                b.arms.len()
            ),
        ));
        return;
    }
    for (x, y) in a.arms.iter().zip(&b.arms) {
        compare_level(x, y, r);
    }
}

/// A sequence diagram mirroring `t` on a single lifeline.
///
/// Branch and loop fragments keep the block numbers; parallel fragments are
/// numbered after the largest of them.
pub fn sequence_from_tree(t: &ReductionTree, name: &str) -> SequenceModel {
    let mut g = SeqGen {
        model: SequenceModel {
            name: name.to_string(),
            lifelines: vec![Lifeline {
                id: "sys".into(),
                label: "System".into(),
            }],
            ..Default::default()
        },
        next_par: max_number(&t.root) + 1,
        opened: 0,
    };
    g.node(&t.root);
    g.model.fragments.sort_by_key(|f| f.id[1..].parse::<usize>().unwrap_or(usize::MAX));
    // Blocks without messages leave holes in the numbering.
    for (k, f) in g.model.fragments.iter_mut().enumerate() {
        f.id = format!("F{}", k + 1);
    }
    g.model
}

fn max_number(n: &StructNode) -> u32 {
    match n {
        StructNode::Seq { children } | StructNode::Par { children, .. } => {
            children.iter().map(max_number).max().unwrap_or(0)
        }
        StructNode::Act { .. } | StructNode::Skip => 0,
        StructNode::If {
            number,
            then_branch,
            else_branch,
            ..
        } => (*number)
            .max(max_number(then_branch))
            .max(else_branch.as_deref().map_or(0, max_number)),
        StructNode::While { number, body, .. } | StructNode::DoWhile { number, body, .. } => {
            (*number).max(max_number(body))
        }
    }
}

struct SeqGen {
    model: SequenceModel,
    next_par: u32,
    opened: usize,
}

impl SeqGen {
    fn here(&self) -> usize {
        self.model.events.len()
    }

    /// Emits `n`; returns the span it covered, if any message was emitted.
    fn node(&mut self, n: &StructNode) -> Option<Span> {
        let start = self.here();
        match n {
            StructNode::Seq { children } => {
                for c in children {
                    self.node(c);
                }
            }
            StructNode::Skip => {}
            StructNode::Act { label, .. } => {
                let order = self.here();
                self.model.events.push(MessageEvent {
                    id: format!("m{}", order + 1),
                    from: "sys".into(),
                    to: "sys".into(),
                    label: label.clone(),
                    kind: MessageKind::Sync,
                    order,
                });
            }
            StructNode::If {
                number,
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                let slot = self.reserve();
                let a = self.node(then_branch);
                let b = else_branch.as_deref().and_then(|e| self.node(e));
                match (a, b) {
                    (Some(a), Some(b)) => self.fill(
                        slot,
                        FragmentKind::Alt,
                        *number,
                        cond.clone(),
                        vec![(a, None), (b, Some("else".to_string()))],
                    ),
                    (Some(a), None) => self.fill(slot, FragmentKind::Opt, *number, cond.clone(), vec![(a, None)]),
                    (None, Some(b)) => self.fill(slot, FragmentKind::Opt, *number, negate(cond), vec![(b, None)]),
                    (None, None) => {}
                }
            }
            StructNode::While { number, cond, body, .. } | StructNode::DoWhile { number, cond, body, .. } => {
                let slot = self.reserve();
                if let Some(sp) = self.node(body) {
                    self.fill(slot, FragmentKind::Loop, *number, cond.clone(), vec![(sp, None)]);
                }
            }
            StructNode::Par { children, .. } => {
                let slot = self.reserve();
                let arms: Vec<(Span, Option<String>)> = children
                    .iter()
                    .filter_map(|c| self.node(c))
                    .enumerate()
                    .map(|(k, sp)| (sp, (k > 0).then(String::new)))
                    .collect();
                if !arms.is_empty() {
                    let number = self.next_par;
                    self.next_par += 1;
                    self.fill(slot, FragmentKind::Par, number, String::new(), arms);
                }
            }
        }
        (self.here() > start).then(|| Span::new(start, self.here() - 1))
    }

    /// Fragment ids follow opening order, so a slot is taken before the body is emitted.
    fn reserve(&mut self) -> usize {
        self.opened += 1;
        self.opened
    }

    fn fill(&mut self, slot: usize, kind: FragmentKind, number: u32, condition: String, arms: Vec<(Span, Option<String>)>) {
        let span = Span::new(arms[0].0.start, arms[arms.len() - 1].0.end);
        let operands = if kind == FragmentKind::Alt || arms.len() > 1 {
            arms.into_iter().map(|(span, guard)| Operand { span, guard }).collect()
        } else {
            Vec::new()
        };
        self.model.fragments.push(Fragment {
            id: format!("F{slot}"),
            kind,
            number,
            condition,
            span,
            operands,
        });
    }
}
