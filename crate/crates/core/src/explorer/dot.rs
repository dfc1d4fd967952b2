use std::fmt::Write;

use super::StateGraph;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Deadlocks are red, terminal states doubled,
/// frontier states dashed.
pub fn to_dot(graph: &StateGraph) -> String {
    let mut out = String::from("digraph states {\n  node [shape=box, fontname=monospace];\n");
    for (id, state) in graph.states.iter().enumerate() {
        let mut attrs = vec![format!("label=\"s{id}\\n{}\"", escape(state.key.as_str()))];
        if state.flags.deadlock {
            attrs.push("color=red".into());
        }
        if state.flags.terminal {
            attrs.push("peripheries=2".into());
        }
        if state.flags.frontier {
            attrs.push("style=dashed".into());
        }
        let _ = writeln!(out, "  s{id} [{}];", attrs.join(", "));
    }
    for edge in &graph.edges {
        let _ = writeln!(
            out,
            "  s{} -> s{} [label=\"{}\"];",
            edge.from,
            edge.to,
            escape(&edge.label())
        );
    }
    out.push_str("}\n");
    out
}
