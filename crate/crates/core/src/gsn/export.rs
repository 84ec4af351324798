use std::fmt::Write;

use super::{ArgumentGraph, FORMAT_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportMode {
    /// A GSN document that parses back to an equal graph, statuses included.
    Document,
    /// Trivial Graph Format: one line per node, a `#` separator, one line per
    /// edge. Readable by yEd and most graph converters.
    Renderable,
}

pub fn export_graph(graph: &ArgumentGraph, mode: ExportMode) -> String {
    match mode {
        ExportMode::Document => document(graph),
        ExportMode::Renderable => renderable(graph),
    }
}

fn document(graph: &ArgumentGraph) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    for n in graph.nodes() {
        let _ = write!(out, "\nnode {} {}\n  statement: {}\n", n.id, n.kind, n.statement);
        if let Some(s) = n.status {
            let _ = writeln!(out, "  status: {s}");
        }
        if n.terminal {
            out.push_str("  terminal: true\n");
        }
        for v in &n.verdicts {
            let _ = write!(out, "  verdict: {} {} {}", v.outcome, v.source, v.timestamp);
            if !v.detail.is_empty() {
                let _ = write!(out, " {}", v.detail);
            }
            out.push('\n');
        }
    }
    if !graph.edges().is_empty() {
        out.push('\n');
        for e in graph.edges() {
            let _ = writeln!(out, "edge {} {} {}", e.from, e.kind, e.to);
        }
    }
    out
}

fn renderable(graph: &ArgumentGraph) -> String {
    let mut out = String::new();
    for n in graph.nodes() {
        let status = n.status.map(|s| s.as_str()).unwrap_or("-");
        let _ = writeln!(out, "{} [{}|{}] {}", n.id, n.kind, status, n.statement);
    }
    out.push_str("#\n");
    for e in graph.edges() {
        let _ = writeln!(out, "{} {} {}", e.from, e.to, e.kind);
    }
    out
}
