//! Random structured programs and graph mutations for property tests.
//!
//! Trees are generated first and flattened with [`lower`], so every
//! generated graph is structured by construction. Loops count with their own
//! counter variable (`c1`, `c2`, ...) that an action resets before the loop
//! and another action advances at the end of the body, so every run
//! terminates. Data actions and branch conditions read and write `x` and `y`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::expr::{Env, Value};
use crate::model::{edge_id, ActivityGraph, NodeKind};
use crate::structure::{lower, ReductionTree, StructNode};

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    /// Upper bound on nodes in the lowered graph, nested bodies included.
    pub max_nodes: usize,
    /// Maximum nesting of branch, loop, and parallel blocks.
    pub max_depth: usize,
    pub allow_par: bool,
    pub allow_loop_node: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_nodes: 30,
            max_depth: 3,
            allow_par: true,
            allow_loop_node: true,
        }
    }
}

const EFFECTS: &[Option<&str>] = &[
    None,
    Some("x = x + 1"),
    Some("y = y + x"),
    Some("x = y - 2"),
    Some("y = 0 - y"),
    Some("x = x * 2 - y, y = y + 1"),
];

const CONDITIONS: &[&str] = &[
    "x > 0",
    "y <= x",
    "x == y",
    "not (x < 2)",
    "x > 0 and y > 0",
    "x != 1 or y < 0",
];

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    cfg: GenConfig,
    acts: usize,
    anchors: usize,
    numbers: u32,
    counters: usize,
    /// Soft node budget left; composites are only started while it lasts.
    budget: isize,
}

impl<R: Rng> Gen<'_, R> {
    fn act(&mut self, label: String, effect: Option<String>) -> StructNode {
        self.acts += 1;
        self.budget -= 1;
        StructNode::Act {
            id: format!("a{}", self.acts),
            label,
            effect,
        }
    }

    fn data_act(&mut self) -> StructNode {
        let effect = EFFECTS.choose(self.rng).copied().flatten().map(String::from);
        let label = format!("act {}", self.acts + 1);
        self.act(label, effect)
    }

    fn anchor(&mut self, prefix: &str) -> String {
        self.anchors += 1;
        format!("{prefix}{}", self.anchors)
    }

    fn number(&mut self) -> u32 {
        self.numbers += 1;
        self.numbers
    }

    fn block(&mut self, depth: usize) -> StructNode {
        let len = self.rng.gen_range(1..=3);
        let mut parts = Vec::new();
        for i in 0..len {
            if i > 0 && self.budget <= 0 {
                break;
            }
            parts.extend(self.statement(depth));
        }
        StructNode::seq(parts)
    }

    fn statement(&mut self, depth: usize) -> Vec<StructNode> {
        if depth >= self.cfg.max_depth || self.budget < 6 {
            return vec![self.data_act()];
        }
        match self.rng.gen_range(0..10) {
            0..=2 => vec![self.data_act()],
            3 | 4 => {
                let number = self.number();
                let anchor = self.anchor("d");
                self.budget -= 2;
                let cond = CONDITIONS.choose(self.rng).expect("conditions").to_string();
                let then_branch = Box::new(self.block(depth + 1));
                let else_branch = self.rng.gen_bool(0.5).then(|| Box::new(self.block(depth + 1)));
                vec![StructNode::If {
                    number,
                    cond,
                    anchor,
                    then_branch,
                    else_branch,
                }]
            }
            5..=7 => self.looped(depth),
            _ if self.cfg.allow_par => {
                let anchor = self.anchor("f");
                self.budget -= 2;
                let arms = self.rng.gen_range(2..=3);
                let children = (0..arms).map(|_| self.block(depth + 1)).collect();
                vec![StructNode::Par { anchor, children }]
            }
            _ => self.looped(depth),
        }
    }

    fn looped(&mut self, depth: usize) -> Vec<StructNode> {
        self.counters += 1;
        let c = format!("c{}", self.counters);
        let number = self.number();
        let init = self.act(format!("reset {c}"), Some(format!("{c} = 0")));
        let kind = self.rng.gen_range(0..if self.cfg.allow_loop_node { 3 } else { 2 });
        let (anchor, cost, bound) = match kind {
            0 => (self.anchor("d"), 2, self.rng.gen_range(0..=3)),
            1 => (self.anchor("d"), 2, self.rng.gen_range(1..=3)),
            _ => (self.anchor("L"), 3, self.rng.gen_range(0..=3)),
        };
        self.budget -= cost;
        let inner = self.block(depth + 1);
        let step = self.act(format!("advance {c}"), Some(format!("{c} = {c} + 1")));
        let body = Box::new(StructNode::seq(vec![inner, step]));
        let cond = format!("{c} < {bound}");
        let l = match kind {
            2 => StructNode::While {
                number,
                cond,
                anchor,
                body,
                loop_node: true,
            },
            0 => StructNode::While {
                number,
                cond,
                anchor,
                body,
                loop_node: false,
            },
            _ => StructNode::DoWhile {
                number,
                cond,
                anchor,
                body,
            },
        };
        vec![init, l]
    }
}

/// Number of nodes in `g` and every nested loop-node body.
pub fn node_count(g: &ActivityGraph) -> usize {
    g.all_graphs().iter().map(|h| h.nodes.len()).sum()
}

/// A random structured tree whose lowered graph respects `cfg`.
pub fn random_tree<R: Rng>(rng: &mut R, cfg: GenConfig) -> ReductionTree {
    loop {
        let mut g = Gen {
            rng: &mut *rng,
            cfg,
            acts: 0,
            anchors: 0,
            numbers: 0,
            counters: 0,
            budget: cfg.max_nodes as isize - 8,
        };
        let tree = ReductionTree::new(g.block(0));
        if tree.root.depth() <= cfg.max_depth && node_count(&lower(&tree, "generated")) <= cfg.max_nodes {
            return tree;
        }
    }
}

/// A random tree together with its lowered graph.
pub fn random_graph<R: Rng>(rng: &mut R, cfg: GenConfig) -> (ReductionTree, ActivityGraph) {
    let t = random_tree(rng, cfg);
    let g = lower(&t, "generated");
    (t, g)
}

/// Random bindings for the data variables `x` and `y`.
pub fn random_env<R: Rng>(rng: &mut R) -> Env {
    Env::new()
        .with("x", Value::Int(rng.gen_range(-3..=5)))
        .with("y", Value::Int(rng.gen_range(-3..=5)))
}

/// Breaks the pairing of one randomly chosen merge node.
///
/// Either one flow into the merge is redirected past it, or the annotation
/// closed by the merge is pointed at another node. Returns the mutated graph
/// and the merge id, or `None` when the graph has no merge.
pub fn break_merge_pairing<R: Rng>(g: &ActivityGraph, rng: &mut R) -> Option<(ActivityGraph, String)> {
    let merges: Vec<String> = g
        .all_graphs()
        .iter()
        .flat_map(|h| h.nodes_of(NodeKind::Merge).map(|n| n.id.clone()))
        .collect();
    let m = merges.choose(rng)?.clone();
    let mut out = g.clone();
    let redirect = rng.gen_bool(0.5);
    let graph = find_graph_mut(&mut out, &m).expect("merge exists");
    if redirect {
        let after = graph.outgoing(&m).next().map(|e| e.target.clone())?;
        let ins: Vec<usize> = (0..graph.edges.len()).filter(|&i| graph.edges[i].target == m).collect();
        let i = *ins.choose(rng)?;
        let others: Vec<String> = graph
            .edges
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, e)| e.id.clone())
            .collect();
        let e = &mut graph.edges[i];
        e.target = after;
        e.id = edge_id(&e.source, &e.target, others.iter().map(String::as_str));
    } else {
        let candidates: Vec<String> = graph
            .nodes
            .iter()
            .filter(|n| n.id != m && matches!(n.kind, NodeKind::Merge | NodeKind::Action | NodeKind::Decision))
            .map(|n| n.id.clone())
            .collect();
        let to = candidates.choose(rng)?.clone();
        let a = graph.annotations.iter_mut().find(|a| a.close_node == m)?;
        a.close_node = to;
    }
    Some((out, m))
}

fn find_graph_mut<'a>(g: &'a mut ActivityGraph, node: &str) -> Option<&'a mut ActivityGraph> {
    if g.nodes.iter().any(|n| n.id == node) {
        return Some(g);
    }
    for n in &mut g.nodes {
        if let Some(body) = n.body.as_deref_mut() {
            if let Some(found) = find_graph_mut(body, node) {
                return Some(found);
            }
        }
    }
    None
}
