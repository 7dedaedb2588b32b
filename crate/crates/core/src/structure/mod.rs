//! Reduction of activity graphs to sequence/branch/loop/parallel trees.
//!
//! [`reduce`] rewrites a working copy of the graph with a fixed pattern set
//! until a single block spans the initial and final node. Every pattern only
//! matches when its inner parts are already blocks, so any applicable pattern
//! is innermost; among those the one anchored at the lowest node id is
//! applied first. A graph that gets stuck yields a [`Residue`] listing the
//! control nodes that could not be absorbed.

mod emit;
mod lower;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use emit::{emit_outline, emit_pseudocode};
pub use lower::lower;

use crate::expr::{conditions_equal, negate};
use crate::model::{ActivityGraph, Construct, ControlAnnotation, Node, NodeKind};

/// One block of structured control flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum StructNode {
    Seq {
        children: Vec<StructNode>,
    },
    Act {
        id: String,
        label: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        effect: Option<String>,
    },
    #[serde(rename_all = "camelCase")]
    If {
        number: u32,
        cond: String,
        anchor: String,
        then_branch: Box<StructNode>,
        #[serde(skip_serializing_if = "Option::is_none")]
        else_branch: Option<Box<StructNode>>,
    },
    #[serde(rename_all = "camelCase")]
    While {
        number: u32,
        cond: String,
        anchor: String,
        body: Box<StructNode>,
        /// Drawn as a loop node rather than a diamond/merge pair.
        loop_node: bool,
    },
    DoWhile {
        number: u32,
        cond: String,
        anchor: String,
        body: Box<StructNode>,
    },
    Par {
        anchor: String,
        children: Vec<StructNode>,
    },
    Skip,
}

impl StructNode {
    /// Builds a sequence, flattening nested sequences and dropping skips.
    pub fn seq(parts: Vec<StructNode>) -> StructNode {
        let mut children = Vec::new();
        for p in parts {
            match p {
                StructNode::Seq { children: inner } => children.extend(inner),
                StructNode::Skip => {}
                other => children.push(other),
            }
        }
        match children.len() {
            0 => StructNode::Skip,
            1 => children.pop().expect("one child"),
            _ => StructNode::Seq { children },
        }
    }

    /// Action ids in leftmost (textual) order.
    pub fn action_ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let StructNode::Act { id, .. } = n {
                out.push(id.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a StructNode)) {
        f(self);
        match self {
            StructNode::Seq { children } | StructNode::Par { children, .. } => {
                children.iter().for_each(|c| c.walk(f))
            }
            StructNode::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.walk(f);
                if let Some(e) = else_branch {
                    e.walk(f);
                }
            }
            StructNode::While { body, .. } | StructNode::DoWhile { body, .. } => body.walk(f),
            StructNode::Act { .. } | StructNode::Skip => {}
        }
    }

    /// Maximum nesting depth of branch, loop, and parallel blocks.
    pub fn depth(&self) -> usize {
        match self {
            StructNode::Seq { children } => children.iter().map(Self::depth).max().unwrap_or(0),
            StructNode::Act { .. } | StructNode::Skip => 0,
            StructNode::If {
                then_branch,
                else_branch,
                ..
            } => 1 + then_branch.depth().max(else_branch.as_ref().map_or(0, |e| e.depth())),
            StructNode::While { body, .. } | StructNode::DoWhile { body, .. } => 1 + body.depth(),
            StructNode::Par { children, .. } => {
                1 + children.iter().map(Self::depth).max().unwrap_or(0)
            }
        }
    }
}

/// Result of a successful reduction; the root is always a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionTree {
    pub root: StructNode,
}

impl ReductionTree {
    pub fn new(block: StructNode) -> Self {
        let children = match StructNode::seq(vec![block]) {
            StructNode::Seq { children } => children,
            StructNode::Skip => vec![StructNode::Skip],
            other => vec![other],
        };
        ReductionTree {
            root: StructNode::Seq { children },
        }
    }

    pub fn action_ids(&self) -> Vec<&str> {
        self.root.action_ids()
    }
}

/// The part of a graph no pattern could absorb.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Residue {
    pub remaining_nodes: BTreeSet<String>,
    pub remaining_edges: BTreeSet<String>,
    pub stuck_reason: String,
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes: Vec<&str> = self.remaining_nodes.iter().map(String::as_str).collect();
        write!(f, "{} (remaining: {})", self.stuck_reason, nodes.join(", "))
    }
}

/// Reduces `g` to a tree, or returns the irreducible remainder.
pub fn reduce(g: &ActivityGraph) -> Result<ReductionTree, Residue> {
    let mut r = Reducer::new(g);
    while let Some(rw) = r.candidates().into_iter().next() {
        r.apply(&rw);
    }
    r.finish()
}

/// True iff `g` passes every lint rule and reduces.
pub fn is_well_formed(g: &ActivityGraph) -> bool {
    crate::lint::lint(g).well_formed
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    Seq,
    If,
    While,
    DoWhile,
    Par,
    LoopNode,
}

/// One applicable pattern instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rewrite {
    pub anchor: String,
    pub pattern: Pattern,
}

#[derive(Debug, Clone)]
enum WNode {
    Initial,
    Final,
    Control(NodeKind),
    LoopNode(Node),
    Block(StructNode),
}

#[derive(Debug, Clone)]
struct WEdge {
    id: String,
    source: String,
    target: String,
    guard: Option<String>,
}

/// Working copy of one graph level during reduction.
///
/// Exposed so tests can drive the rewrite system in any admissible order.
#[derive(Debug, Clone)]
pub struct Reducer {
    nodes: BTreeMap<String, WNode>,
    edges: Vec<WEdge>,
    annotations: Vec<ControlAnnotation>,
    /// Residues of loop-node bodies that failed to reduce.
    body_residue: BTreeMap<String, Residue>,
}

/// Arm of a branch or loop: the block on it, if any.
struct Arm {
    edge: usize,
    block: Option<String>,
}

impl Reducer {
    pub fn new(g: &ActivityGraph) -> Self {
        let mut nodes = BTreeMap::new();
        for n in &g.nodes {
            let w = match n.kind {
                NodeKind::Initial => WNode::Initial,
                NodeKind::ActivityFinal => WNode::Final,
                NodeKind::Action => WNode::Block(StructNode::Act {
                    id: n.id.clone(),
                    label: n.label.clone(),
                    effect: n.effect.clone(),
                }),
                NodeKind::LoopNode => WNode::LoopNode(n.clone()),
                k => WNode::Control(k),
            };
            // duplicate ids are a reference problem; the first declaration wins here
            nodes.entry(n.id.clone()).or_insert(w);
        }
        let edges = g
            .edges
            .iter()
            .map(|e| WEdge {
                id: e.id.clone(),
                source: e.source.clone(),
                target: e.target.clone(),
                guard: e.guard.clone(),
            })
            .collect();
        Reducer {
            nodes,
            edges,
            annotations: g.annotations.clone(),
            body_residue: BTreeMap::new(),
        }
    }

    fn outs(&self, id: &str) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].source == id).collect()
    }

    fn ins(&self, id: &str) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].target == id).collect()
    }

    fn is_block(&self, id: &str) -> bool {
        matches!(self.nodes.get(id), Some(WNode::Block(_)))
    }

    fn is_kind(&self, id: &str, kind: NodeKind) -> bool {
        matches!(self.nodes.get(id), Some(WNode::Control(k)) if *k == kind)
    }

    /// The single annotation opened at `id`, if exactly one exists.
    fn annotation(&self, id: &str) -> Option<&ControlAnnotation> {
        let mut it = self.annotations.iter().filter(|a| a.open_node == id);
        let a = it.next()?;
        it.next().is_none().then_some(a)
    }

    /// Edge `i` leads to `close` either directly or through one block.
    fn arm_to(&self, i: usize, close: &str) -> Option<Arm> {
        let e = &self.edges[i];
        if e.target == close {
            return Some(Arm { edge: i, block: None });
        }
        let b = e.target.as_str();
        if !self.is_block(b) || self.ins(b) != [i] {
            return None;
        }
        let outs = self.outs(b);
        (outs.len() == 1 && self.edges[outs[0]].target == close).then(|| Arm {
            edge: i,
            block: Some(b.to_string()),
        })
    }

    fn take_block(&mut self, id: &Option<String>) -> StructNode {
        match id.as_ref().and_then(|b| self.nodes.remove(b)) {
            Some(WNode::Block(s)) => s,
            _ => StructNode::Skip,
        }
    }

    /// Every pattern instance applicable right now, in application order.
    pub fn candidates(&mut self) -> Vec<Rewrite> {
        let ids: Vec<String> = self.nodes.keys().cloned().collect();
        let mut out = Vec::new();
        for id in ids {
            let pattern = match &self.nodes[&id] {
                WNode::Block(_) => self.match_seq(&id).map(|_| Pattern::Seq),
                WNode::LoopNode(_) => self.match_loop_node(&id).then_some(Pattern::LoopNode),
                WNode::Control(NodeKind::Decision) => match self.annotation(&id).map(|a| a.construct) {
                    Some(Construct::If) => self.match_if(&id).map(|_| Pattern::If),
                    Some(Construct::While | Construct::For) => {
                        self.match_while(&id).map(|_| Pattern::While)
                    }
                    Some(Construct::DoWhile) => self.match_dowhile(&id).map(|_| Pattern::DoWhile),
                    None => None,
                },
                WNode::Control(NodeKind::Fork) => self.match_par(&id).map(|_| Pattern::Par),
                _ => None,
            };
            if let Some(pattern) = pattern {
                out.push(Rewrite { anchor: id, pattern });
            }
        }
        out
    }

    /// Applies one rewrite returned by [`Reducer::candidates`].
    pub fn apply(&mut self, rw: &Rewrite) {
        let id = rw.anchor.as_str();
        match rw.pattern {
            Pattern::Seq => {
                let next = self.match_seq(id).expect("seq candidate");
                let first = self.take_block(&Some(id.to_string()));
                let second = self.take_block(&Some(next.clone()));
                self.edges.retain(|e| !(e.source == id && e.target == next));
                self.resource(&next, id);
                self.nodes.insert(id.to_string(), WNode::Block(StructNode::seq(vec![first, second])));
            }
            Pattern::If => {
                let (merge, arms) = self.match_if(id).expect("if candidate");
                let a = self.annotation(id).expect("annotated").clone();
                let then_idx = then_arm(&arms.iter().map(|x| self.edges[x.edge].guard.clone()).collect::<Vec<_>>(), &a.condition);
                let guards: Vec<Option<String>> = arms.iter().map(|x| self.edges[x.edge].guard.clone()).collect();
                let mut bodies: Vec<StructNode> = arms.iter().map(|x| self.take_block(&x.block)).collect();
                let (mut t, mut ti) = (then_idx, 1 - then_idx);
                // a direct arm to the merge becomes the missing else
                if bodies[t] == StructNode::Skip && bodies[ti] != StructNode::Skip {
                    std::mem::swap(&mut t, &mut ti);
                }
                let cond = arm_condition(&guards, t, &a.condition);
                let else_body = std::mem::replace(&mut bodies[ti], StructNode::Skip);
                let then_body = std::mem::replace(&mut bodies[t], StructNode::Skip);
                let block = StructNode::If {
                    number: a.number,
                    cond,
                    anchor: id.to_string(),
                    then_branch: Box::new(then_body),
                    else_branch: (else_body != StructNode::Skip).then(|| Box::new(else_body)),
                };
                let internal: BTreeSet<String> =
                    arms.iter().filter_map(|x| x.block.clone()).chain([merge.clone()]).collect();
                self.edges.retain(|e| {
                    !(e.source == id || internal.contains(&e.source)) || e.source == merge
                });
                self.resource(&merge, id);
                self.nodes.remove(&merge);
                self.nodes.insert(id.to_string(), WNode::Block(block));
            }
            Pattern::While => {
                let m = self.match_while(id).expect("while candidate");
                let a = self.annotation(id).expect("annotated").clone();
                let guards = [self.edges[m.body.edge].guard.clone(), self.edges[m.exit].guard.clone()];
                let cond = arm_condition(&guards, 0, &a.condition);
                let body = self.take_block(&m.body.block);
                let block = StructNode::While {
                    number: a.number,
                    cond,
                    anchor: id.to_string(),
                    body: Box::new(body),
                    loop_node: false,
                };
                self.close_loop(id, &m, block);
            }
            Pattern::DoWhile => {
                let m = self.match_dowhile(id).expect("dowhile candidate");
                let a = self.annotation(id).expect("annotated").clone();
                let guards = [self.edges[m.body.edge].guard.clone(), self.edges[m.exit].guard.clone()];
                let cond = arm_condition(&guards, 0, &a.condition);
                let body = self.take_block(&m.body.block);
                let block = StructNode::DoWhile {
                    number: a.number,
                    cond,
                    anchor: id.to_string(),
                    body: Box::new(body),
                };
                self.close_loop(id, &m, block);
            }
            Pattern::Par => {
                let (join, arms) = self.match_par(id).expect("par candidate");
                let children: Vec<StructNode> = arms.iter().map(|x| self.take_block(&x.block)).collect();
                let internal: BTreeSet<String> = arms.iter().filter_map(|x| x.block.clone()).collect();
                self.edges
                    .retain(|e| e.source != id && !internal.contains(&e.source));
                self.resource(&join, id);
                self.nodes.remove(&join);
                self.nodes.insert(
                    id.to_string(),
                    WNode::Block(StructNode::Par {
                        anchor: id.to_string(),
                        children,
                    }),
                );
            }
            Pattern::LoopNode => {
                let Some(WNode::LoopNode(node)) = self.nodes.get(id).cloned() else {
                    panic!("loop node candidate")
                };
                let a = self.annotation(id).expect("annotated").clone();
                let body = reduce(node.body.as_deref().expect("loop node body")).expect("reducible body");
                self.nodes.insert(
                    id.to_string(),
                    WNode::Block(StructNode::While {
                        number: a.number,
                        cond: node.label.clone(),
                        anchor: id.to_string(),
                        body: Box::new(StructNode::seq(vec![body.root])),
                        loop_node: true,
                    }),
                );
                for e in &mut self.edges {
                    if e.source == id {
                        e.guard = None;
                    }
                }
            }
        }
    }

    /// Moves every flow leaving `from` to leave `to` instead, dropping guards.
    fn resource(&mut self, from: &str, to: &str) {
        for e in &mut self.edges {
            if e.source == from {
                e.source = to.to_string();
                e.guard = None;
            }
        }
    }

    fn close_loop(&mut self, id: &str, m: &LoopMatch, block: StructNode) {
        let entry_id = self.edges[m.entry].id.clone();
        let exit_id = self.edges[m.exit].id.clone();
        let merge = m.merge.clone();
        let body = m.body.block.clone();
        self.edges.retain(|e| {
            if e.id == entry_id || e.id == exit_id {
                return true;
            }
            let touches = |n: &str| n == id || n == merge || body.as_deref() == Some(n);
            !(touches(&e.source) && touches(&e.target))
        });
        for e in &mut self.edges {
            if e.id == entry_id {
                e.target = id.to_string();
            }
            if e.id == exit_id {
                e.guard = None;
            }
        }
        self.nodes.remove(&merge);
        self.nodes.insert(id.to_string(), WNode::Block(block));
    }

    fn match_seq(&self, id: &str) -> Option<String> {
        let outs = self.outs(id);
        let [o] = outs.as_slice() else { return None };
        let next = &self.edges[*o].target;
        (next != id && self.is_block(next) && self.ins(next) == [*o]).then(|| next.clone())
    }

    fn match_if(&self, id: &str) -> Option<(String, Vec<Arm>)> {
        let a = self.annotation(id)?;
        let merge = a.close_node.clone();
        if !self.is_kind(&merge, NodeKind::Merge) || merge == id {
            return None;
        }
        let outs = self.outs(id);
        if outs.len() != 2 || self.ins(id).len() != 1 {
            return None;
        }
        let arms: Vec<Arm> = outs.iter().map(|&i| self.arm_to(i, &merge)).collect::<Option<_>>()?;
        if arms[0].block.is_some() && arms[0].block == arms[1].block {
            return None;
        }
        let into_merge: BTreeSet<usize> = self.ins(&merge).into_iter().collect();
        let expected: BTreeSet<usize> = arms
            .iter()
            .map(|x| match &x.block {
                None => x.edge,
                Some(b) => self.outs(b)[0],
            })
            .collect();
        (into_merge == expected && expected.len() == 2 && self.outs(&merge).len() == 1)
            .then_some((merge, arms))
    }

    fn match_while(&self, id: &str) -> Option<LoopMatch> {
        let a = self.annotation(id)?;
        let merge = a.close_node.clone();
        if !self.is_kind(&merge, NodeKind::Merge) {
            return None;
        }
        let m_outs = self.outs(&merge);
        if m_outs.len() != 1 || self.edges[m_outs[0]].target != id || self.ins(id) != m_outs {
            return None;
        }
        let outs = self.outs(id);
        if outs.len() != 2 {
            return None;
        }
        let body_arms: Vec<Arm> = outs.iter().filter_map(|&i| self.arm_to(i, &merge)).collect();
        let body = match body_arms.len() {
            1 => body_arms.into_iter().next()?,
            2 => {
                let guards: Vec<Option<String>> = outs.iter().map(|&i| self.edges[i].guard.clone()).collect();
                let t = then_arm(&guards, &a.condition);
                body_arms.into_iter().nth(t)?
            }
            _ => return None,
        };
        let exit = *outs.iter().find(|&&i| i != body.edge)?;
        let back = match &body.block {
            None => body.edge,
            Some(b) => self.outs(b)[0],
        };
        self.loop_entry(&merge, back).map(|entry| LoopMatch {
            merge,
            body,
            exit,
            entry,
        })
    }

    fn match_dowhile(&self, id: &str) -> Option<LoopMatch> {
        let a = self.annotation(id)?;
        let merge = a.close_node.clone();
        if !self.is_kind(&merge, NodeKind::Merge) {
            return None;
        }
        let m_outs = self.outs(&merge);
        let [m_out] = m_outs.as_slice() else { return None };
        let body = self.arm_to(*m_out, id)?;
        let into_d = match &body.block {
            None => *m_out,
            Some(b) => self.outs(b)[0],
        };
        if self.ins(id) != [into_d] {
            return None;
        }
        let outs = self.outs(id);
        if outs.len() != 2 {
            return None;
        }
        let backs: Vec<usize> = outs.iter().copied().filter(|&i| self.edges[i].target == merge).collect();
        let [back] = backs.as_slice() else { return None };
        let exit = *outs.iter().find(|&&i| i != *back)?;
        self.loop_entry(&merge, *back).map(|entry| LoopMatch {
            merge,
            body: Arm {
                edge: *back,
                block: body.block,
            },
            exit,
            entry,
        })
    }

    /// The merge has exactly the back flow plus one entry flow; returns the entry.
    fn loop_entry(&self, merge: &str, back: usize) -> Option<usize> {
        let ins = self.ins(merge);
        if ins.len() != 2 || !ins.contains(&back) {
            return None;
        }
        ins.into_iter().find(|&i| i != back)
    }

    fn match_par(&self, id: &str) -> Option<(String, Vec<Arm>)> {
        let outs = self.outs(id);
        if outs.len() < 2 || self.ins(id).len() != 1 {
            return None;
        }
        let first = &self.edges[outs[0]].target;
        let join = if self.is_kind(first, NodeKind::Join) {
            first.clone()
        } else {
            let o = self.outs(first);
            if o.len() != 1 {
                return None;
            }
            self.edges[o[0]].target.clone()
        };
        if !self.is_kind(&join, NodeKind::Join) {
            return None;
        }
        let arms: Vec<Arm> = outs.iter().map(|&i| self.arm_to(i, &join)).collect::<Option<_>>()?;
        let blocks: BTreeSet<&String> = arms.iter().filter_map(|x| x.block.as_ref()).collect();
        if blocks.len() != arms.iter().filter(|x| x.block.is_some()).count() {
            return None;
        }
        (self.ins(&join).len() == arms.len() && self.outs(&join).len() == 1).then_some((join, arms))
    }

    fn match_loop_node(&mut self, id: &str) -> bool {
        let Some(WNode::LoopNode(node)) = self.nodes.get(id) else {
            return false;
        };
        let annotated = self.annotation(id).is_some_and(|a| {
            a.close_node == id && matches!(a.construct, Construct::While | Construct::For)
        });
        if !annotated {
            return false;
        }
        let Some(body) = node.body.as_deref() else { return false };
        match reduce(body) {
            Ok(_) => true,
            Err(r) => {
                self.body_residue.insert(id.to_string(), r);
                false
            }
        }
    }

    /// Final check once no pattern applies.
    pub fn finish(&self) -> Result<ReductionTree, Residue> {
        let initials: Vec<&String> = self.ids(|n| matches!(n, WNode::Initial));
        let finals: Vec<&String> = self.ids(|n| matches!(n, WNode::Final));
        if let ([i], [f]) = (initials.as_slice(), finals.as_slice()) {
            let outs = self.outs(i);
            match self.nodes.len() {
                2 if outs.len() == 1 && self.edges[outs[0]].target == **f && self.edges.len() == 1 => {
                    return Ok(ReductionTree::new(StructNode::Skip));
                }
                3 if self.edges.len() == 2 && outs.len() == 1 => {
                    let b = &self.edges[outs[0]].target;
                    let b_outs = self.outs(b);
                    if let (Some(WNode::Block(s)), [o]) = (self.nodes.get(b), b_outs.as_slice()) {
                        if self.edges[*o].target == **f {
                            return Ok(ReductionTree::new(s.clone()));
                        }
                    }
                }
                _ => {}
            }
        }
        Err(self.residue(&initials, &finals))
    }

    fn ids(&self, pred: impl Fn(&WNode) -> bool) -> Vec<&String> {
        self.nodes.iter().filter(|(_, n)| pred(n)).map(|(id, _)| id).collect()
    }

    fn residue(&self, initials: &[&String], finals: &[&String]) -> Residue {
        let mut remaining: BTreeSet<String> = self
            .ids(|n| matches!(n, WNode::Control(_) | WNode::LoopNode(_)))
            .into_iter()
            .cloned()
            .collect();
        if initials.len() != 1 {
            remaining.extend(initials.iter().map(|s| s.to_string()));
        }
        if finals.len() != 1 {
            remaining.extend(finals.iter().map(|s| s.to_string()));
        }
        let mut reasons = Vec::new();
        for (loop_id, r) in &self.body_residue {
            if matches!(self.nodes.get(loop_id), Some(WNode::LoopNode(_))) {
                remaining.extend(r.remaining_nodes.iter().cloned());
                reasons.push(format!("body of loop node `{loop_id}`: {}", r.stuck_reason));
            }
        }
        if remaining.is_empty() {
            remaining = self.nodes.keys().cloned().collect();
        }
        let remaining_edges = self
            .edges
            .iter()
            .filter(|e| remaining.contains(&e.source) || remaining.contains(&e.target))
            .map(|e| e.id.clone())
            .collect();
        reasons.extend(
            remaining
                .iter()
                .filter_map(|id| self.stuck_hint(id))
                .take(3),
        );
        if reasons.is_empty() {
            reasons.push("the graph does not collapse to one block between one initial and one final node".into());
        }
        Residue {
            remaining_nodes: remaining,
            remaining_edges,
            stuck_reason: format!("no pattern applies: {}", reasons.join("; ")),
        }
    }

    fn stuck_hint(&self, id: &str) -> Option<String> {
        let node = self.nodes.get(id)?;
        let opened = self.annotations.iter().filter(|a| a.open_node == id).count();
        Some(match node {
            WNode::Control(k @ NodeKind::Decision) if opened != 1 => {
                format!("{k} `{id}` is opened by {opened} annotations")
            }
            WNode::Control(NodeKind::Decision) => {
                let a = self.annotation(id)?;
                format!(
                    "{} #{} at `{id}` does not close cleanly at `{}`",
                    a.construct.keyword(),
                    a.number,
                    a.close_node
                )
            }
            WNode::Control(k @ (NodeKind::Merge | NodeKind::Join)) => {
                format!("{k} `{id}` is not closed by any matching branch, loop, or fork")
            }
            WNode::Control(k @ NodeKind::Fork) => format!("{k} `{id}` has arms that do not meet at one join"),
            WNode::LoopNode(_) => format!("loop node `{id}` lacks a while/for annotation or a structured body"),
            _ => return None,
        })
    }
}

struct LoopMatch {
    merge: String,
    /// For while loops the decision's body arm; for do-while loops the back flow and the body block.
    body: Arm,
    exit: usize,
    entry: usize,
}

/// Index of the arm whose guard states the annotation condition, else 0.
fn then_arm(guards: &[Option<String>], annotated: &str) -> usize {
    guards
        .iter()
        .position(|g| g.as_deref().is_some_and(|g| conditions_equal(g, annotated)))
        .unwrap_or(0)
}

/// Condition under which arm `i` of a two-way split is taken.
fn arm_condition(guards: &[Option<String>], i: usize, annotated: &str) -> String {
    let other = guards.get(1 - i).cloned().flatten();
    match guards[i].as_deref() {
        Some(g) if g.trim() != "else" => g.to_string(),
        _ => match other {
            Some(o) if o.trim() != "else" => negate(&o),
            _ => annotated.to_string(),
        },
    }
}

#[cfg(test)]
mod tests;
