//! Pseudocode printing.
//!
//! The canonical form puts one statement per line, indents two spaces per
//! level, and carries action effects as `// <effect>` comments so the
//! simulator can replay them. The outline form is the same program on one
//! line without effects, for summaries and quick comparison.

use super::{ReductionTree, StructNode};

/// Canonical multi-line pseudocode; ends with a newline.
pub fn emit_pseudocode(t: &ReductionTree) -> String {
    let mut out = String::new();
    block(&t.root, 0, &mut out);
    out
}

/// One-line pseudocode without effect comments.
pub fn emit_outline(t: &ReductionTree) -> String {
    let mut parts = Vec::new();
    inline(&t.root, &mut parts);
    parts.join(" ")
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

fn block(n: &StructNode, depth: usize, out: &mut String) {
    match n {
        StructNode::Seq { children } => children.iter().for_each(|c| block(c, depth, out)),
        StructNode::Skip => line(out, depth, "skip;"),
        StructNode::Act { label, effect, .. } => match effect {
            Some(e) => line(out, depth, &format!("do {label}; // {e}")),
            None => line(out, depth, &format!("do {label};")),
        },
        StructNode::If {
            number,
            cond,
            then_branch,
            else_branch,
            ..
        } => {
            line(out, depth, &format!("if ({cond}) {{"));
            block(then_branch, depth + 1, out);
            if let Some(e) = else_branch {
                line(out, depth, "} else {");
                block(e, depth + 1, out);
            }
            line(out, depth, &format!("}} // #{number}"));
        }
        StructNode::While {
            number, cond, body, ..
        } => {
            line(out, depth, &format!("while ({cond}) {{"));
            block(body, depth + 1, out);
            line(out, depth, &format!("}} // #{number}"));
        }
        StructNode::DoWhile {
            number, cond, body, ..
        } => {
            line(out, depth, "dowhile {");
            block(body, depth + 1, out);
            line(out, depth, &format!("}} ({cond}) // #{number}"));
        }
        StructNode::Par { children, .. } => {
            line(out, depth, "par {");
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    line(out, depth, "||");
                }
                block(c, depth + 1, out);
            }
            line(out, depth, "}");
        }
    }
}

fn inline(n: &StructNode, parts: &mut Vec<String>) {
    match n {
        StructNode::Seq { children } => children.iter().for_each(|c| inline(c, parts)),
        StructNode::Skip => parts.push("skip;".into()),
        StructNode::Act { label, .. } => parts.push(format!("do {label};")),
        StructNode::If {
            number,
            cond,
            then_branch,
            else_branch,
            ..
        } => {
            parts.push(format!("if ({cond}) {{"));
            inline(then_branch, parts);
            if let Some(e) = else_branch {
                parts.push("} else {".into());
                inline(e, parts);
            }
            parts.push(format!("}} // #{number}"));
        }
        StructNode::While {
            number, cond, body, ..
        } => {
            parts.push(format!("while ({cond}) {{"));
            inline(body, parts);
            parts.push(format!("}} // #{number}"));
        }
        StructNode::DoWhile {
            number, cond, body, ..
        } => {
            parts.push("dowhile {".into());
            inline(body, parts);
            parts.push(format!("}} ({cond}) // #{number}"));
        }
        StructNode::Par { children, .. } => {
            parts.push("par {".into());
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    parts.push("||".into());
                }
                inline(c, parts);
            }
            parts.push("}".into());
        }
    }
}
