use alloc::string::String;
use core::fmt::Write;

use super::DecisionTree;

/// Indented text form of a tree, two spaces per level.
pub fn render_tree(tree: &DecisionTree) -> String {
    let mut out = String::new();
    node(tree, 0, &mut out);
    out
}

fn line(out: &mut String, indent: usize, text: core::fmt::Arguments<'_>) {
    for _ in 0..indent {
        out.push_str("  ");
    }
    let _ = out.write_fmt(text);
    out.push('\n');
}

fn branch(out: &mut String, indent: usize, label: core::fmt::Arguments<'_>, sub: &DecisionTree) {
    match sub {
        DecisionTree::Fail => line(out, indent, format_args!("{label} fail")),
        DecisionTree::Ok(st) => line(out, indent, format_args!("{label} ok {st}")),
        _ => {
            line(out, indent, label);
            node(sub, indent + 1, out);
        }
    }
}

fn node(t: &DecisionTree, indent: usize, out: &mut String) {
    match t {
        DecisionTree::Fail => line(out, indent, format_args!("fail")),
        DecisionTree::Ok(st) => line(out, indent, format_args!("ok {st}")),
        DecisionTree::SplitStack {
            tail,
            on_empty,
            head,
            rest,
            on_cons,
        } => {
            line(out, indent, format_args!("stack {tail}"));
            branch(out, indent + 1, format_args!("empty =>"), on_empty);
            branch(
                out,
                indent + 1,
                format_args!("cons {head} :: {rest} =>"),
                on_cons,
            );
        }
        DecisionTree::SplitNat {
            expr,
            on_zero,
            pred,
            on_succ,
        } => {
            line(out, indent, format_args!("nat {expr}"));
            branch(out, indent + 1, format_args!("zero =>"), on_zero);
            branch(out, indent + 1, format_args!("succ {pred} =>"), on_succ);
        }
        DecisionTree::SplitBool {
            cond,
            on_true,
            on_false,
        } => {
            line(out, indent, format_args!("bool {cond}"));
            branch(out, indent + 1, format_args!("true =>"), on_true);
            branch(out, indent + 1, format_args!("false =>"), on_false);
        }
    }
}
