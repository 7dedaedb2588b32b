//! Flattening of reduction trees back into activity graphs.

use super::{ReductionTree, StructNode};
use crate::expr::negate;
use crate::model::{ActivityGraph, Construct, ControlAnnotation, Node, NodeKind};

/// Builds the activity graph a tree describes.
///
/// Actions keep their ids and opening nodes use the block anchors; closing
/// nodes get the anchor plus `_merge` or `_join`. The outer graph uses
/// `start` and `end`, loop-node bodies `<anchor>_start` and `<anchor>_end`.
/// Anchors and action ids must therefore be unique and distinct from those
/// generated names.
pub fn lower(t: &ReductionTree, name: &str) -> ActivityGraph {
    let mut g = ActivityGraph::new(name);
    g.add_node(Node::new("start", NodeKind::Initial));
    let last = emit(&t.root, Exit::plain("start"), &mut g);
    g.add_node(Node::new("end", NodeKind::ActivityFinal));
    last.connect(&mut g, "end");
    g
}

/// Where control leaves a lowered block, with the guard the next flow needs.
struct Exit {
    node: String,
    guard: Option<String>,
}

impl Exit {
    fn plain(node: &str) -> Self {
        Exit {
            node: node.to_string(),
            guard: None,
        }
    }

    fn guarded(node: &str, guard: String) -> Self {
        Exit {
            node: node.to_string(),
            guard: Some(guard),
        }
    }

    fn connect(self, g: &mut ActivityGraph, target: &str) {
        g.add_edge(self.node, target, self.guard);
    }
}

fn emit(n: &StructNode, from: Exit, g: &mut ActivityGraph) -> Exit {
    match n {
        StructNode::Seq { children } => children.iter().fold(from, |cur, c| emit(c, cur, g)),
        StructNode::Skip => from,
        StructNode::Act { id, label, effect } => {
            g.add_node(Node::action(id.clone(), label.clone(), effect.clone()));
            from.connect(g, id);
            Exit::plain(id)
        }
        StructNode::If {
            number,
            cond,
            anchor,
            then_branch,
            else_branch,
        } => {
            let merge = format!("{anchor}_merge");
            g.add_node(Node::new(anchor.clone(), NodeKind::Decision));
            from.connect(g, anchor);
            let t = emit(then_branch, Exit::guarded(anchor, cond.clone()), g);
            let e = match else_branch {
                Some(e) => emit(e, Exit::guarded(anchor, negate(cond)), g),
                None => Exit::guarded(anchor, negate(cond)),
            };
            g.add_node(Node::new(merge.clone(), NodeKind::Merge));
            t.connect(g, &merge);
            e.connect(g, &merge);
            annotate(g, Construct::If, *number, anchor, &merge, cond);
            Exit::plain(&merge)
        }
        StructNode::While {
            number,
            cond,
            anchor,
            body,
            loop_node: true,
        } => {
            let mut inner = ActivityGraph::new(anchor.clone());
            let start = format!("{anchor}_start");
            let end = format!("{anchor}_end");
            inner.add_node(Node::new(start.clone(), NodeKind::Initial));
            let last = emit(body, Exit::plain(&start), &mut inner);
            inner.add_node(Node::new(end.clone(), NodeKind::ActivityFinal));
            last.connect(&mut inner, &end);
            g.add_node(Node {
                label: cond.clone(),
                body: Some(Box::new(inner)),
                ..Node::new(anchor.clone(), NodeKind::LoopNode)
            });
            from.connect(g, anchor);
            annotate(g, Construct::While, *number, anchor, anchor, cond);
            Exit::plain(anchor)
        }
        StructNode::While {
            number,
            cond,
            anchor,
            body,
            loop_node: false,
        } => {
            let merge = format!("{anchor}_merge");
            g.add_node(Node::new(merge.clone(), NodeKind::Merge));
            from.connect(g, &merge);
            g.add_node(Node::new(anchor.clone(), NodeKind::Decision));
            g.add_edge(merge.clone(), anchor.clone(), None);
            emit(body, Exit::guarded(anchor, cond.clone()), g).connect(g, &merge);
            annotate(g, Construct::While, *number, anchor, &merge, cond);
            Exit::guarded(anchor, negate(cond))
        }
        StructNode::DoWhile {
            number,
            cond,
            anchor,
            body,
        } => {
            let merge = format!("{anchor}_merge");
            g.add_node(Node::new(merge.clone(), NodeKind::Merge));
            from.connect(g, &merge);
            let last = emit(body, Exit::plain(&merge), g);
            g.add_node(Node::new(anchor.clone(), NodeKind::Decision));
            last.connect(g, anchor);
            g.add_edge(anchor.clone(), merge.clone(), Some(cond.clone()));
            annotate(g, Construct::DoWhile, *number, anchor, &merge, cond);
            Exit::guarded(anchor, negate(cond))
        }
        StructNode::Par { anchor, children } => {
            let join = format!("{anchor}_join");
            g.add_node(Node::new(anchor.clone(), NodeKind::Fork));
            from.connect(g, anchor);
            let ends: Vec<Exit> = children
                .iter()
                .map(|c| emit(c, Exit::plain(anchor), g))
                .collect();
            g.add_node(Node::new(join.clone(), NodeKind::Join));
            for e in ends {
                e.connect(g, &join);
            }
            Exit::plain(&join)
        }
    }
}

fn annotate(g: &mut ActivityGraph, construct: Construct, number: u32, open: &str, close: &str, cond: &str) {
    g.annotations.push(ControlAnnotation {
        construct,
        number,
        open_node: open.to_string(),
        close_node: close.to_string(),
        condition: cond.to_string(),
    });
}
