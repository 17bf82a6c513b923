use std::fmt::Write;

use serde::Serialize;

use super::{StateGraph, SupportGraph};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering of the explored graph; edges running P carry `[P:{ids}]`.
pub fn graph_to_dot(graph: &StateGraph) -> String {
    let mut out = String::from("digraph states {\n");
    for (i, label) in graph.labels.iter().enumerate() {
        let shape = if graph.starts.contains(&(i as u32)) { ",shape=box" } else { "" };
        writeln!(out, "  n{i} [label={}{shape}];", quote(label)).unwrap();
    }
    for (u, edges) in graph.edges.iter().enumerate() {
        for e in edges {
            let p = if e.execs.is_empty() { String::new() } else { format!(" [P:{}]", e.execs) };
            writeln!(out, "  n{u} -> n{} [label={}];", e.to, quote(&format!("{}{p}", e.choice))).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of the support quotient, nodes named by sorted support.
pub fn support_graph_to_dot(graph: &SupportGraph) -> String {
    let mut out = String::from("digraph supports {\n");
    for s in &graph.nodes {
        let shape = if graph.starts.contains(s) { " [shape=box]" } else { "" };
        writeln!(out, "  {}{shape};", quote(&s.to_string())).unwrap();
    }
    for ((a, b), exec) in &graph.edges {
        let label = if *exec { " [label=\"[P]\"]" } else { "" };
        writeln!(out, "  {} -> {}{label};", quote(&a.to_string()), quote(&b.to_string())).unwrap();
    }
    out.push_str("}\n");
    out
}

/// One JSON-lines record.
pub fn jsonl_line<T: Serialize>(item: &T) -> String {
    let mut s = serde_json::to_string(item).expect("reports serialize");
    s.push('\n');
    s
}
