use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{ArgumentGraph, EdgeKind, NodeKind};

/// Structural rules checked by [`validate_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// Every goal is supported by a strategy or evidence.
    V1,
    /// Every strategy is challenged by a counter-hypothesis.
    V2,
    /// Every strategy has a subgoal or is marked terminal.
    V3,
    /// The SupportedBy/ChallengedBy subgraph is acyclic.
    V4,
    /// Every node is reachable from some goal.
    V5,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::V1 => "V1",
            Rule::V2 => "V2",
            Rule::V3 => "V3",
            Rule::V4 => "V4",
            Rule::V5 => "V5",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub node: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.rule, self.node, self.message)
    }
}

/// Returns every structural violation, sorted by rule and then by node
/// declaration order. An empty list means the graph is structurally valid.
pub fn validate_structure(graph: &ArgumentGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let order: HashMap<&str, usize> = graph.nodes().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();

    for node in graph.nodes() {
        let id = node.id.as_str();
        match node.kind {
            NodeKind::Goal => {
                if graph.targets(id, EdgeKind::SupportedBy).next().is_none() {
                    out.push(Violation {
                        rule: Rule::V1,
                        node: node.id.clone(),
                        message: "goal is not supported by any strategy or evidence".into(),
                    });
                }
            }
            NodeKind::Strategy => {
                if graph.targets(id, EdgeKind::ChallengedBy).next().is_none() {
                    out.push(Violation {
                        rule: Rule::V2,
                        node: node.id.clone(),
                        message: "strategy is not challenged by any counter-hypothesis".into(),
                    });
                }
                if !node.terminal && graph.targets(id, EdgeKind::SupportedBy).next().is_none() {
                    out.push(Violation {
                        rule: Rule::V3,
                        node: node.id.clone(),
                        message: "strategy has no subgoal and is not marked terminal".into(),
                    });
                }
            }
            _ => {}
        }
    }

    for cycle in cycles(graph) {
        let first = cycle
            .iter()
            .min_by_key(|id| order[id.as_str()])
            .cloned()
            .unwrap_or_default();
        let mut members = cycle;
        members.sort_by_key(|id| order[id.as_str()]);
        out.push(Violation {
            rule: Rule::V4,
            node: first,
            message: format!("cycle through {}", members.join(", ")),
        });
    }

    let reachable = reachable_from_goals(graph);
    for node in graph.nodes() {
        if !reachable.contains(node.id.as_str()) {
            out.push(Violation {
                rule: Rule::V5,
                node: node.id.clone(),
                message: "node is not reachable from any goal".into(),
            });
        }
    }

    out.sort_by_key(|v| (v.rule, order[v.node.as_str()]));
    out
}

fn reachable_from_goals(graph: &ArgumentGraph) -> HashSet<&str> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut stack: Vec<&str> = graph
        .nodes()
        .filter(|n| n.kind == NodeKind::Goal)
        .map(|n| n.id.as_str())
        .collect();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        for e in graph.edges().iter().filter(|e| e.from == id) {
            stack.push(e.to.as_str());
        }
    }
    seen
}

/// Strongly connected components of the structural subgraph that contain a
/// cycle (Tarjan).
fn cycles(graph: &ArgumentGraph) -> Vec<Vec<String>> {
    let ids: Vec<&str> = graph.nodes().map(|n| n.id.as_str()).collect();
    let index_of: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut succ = vec![Vec::new(); ids.len()];
    let mut self_loop = vec![false; ids.len()];
    for e in graph.edges().iter().filter(|e| e.kind.is_structural()) {
        let (a, b) = (index_of[e.from.as_str()], index_of[e.to.as_str()]);
        succ[a].push(b);
        if a == b {
            self_loop[a] = true;
        }
    }

    struct State {
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        comps: Vec<Vec<usize>>,
    }

    fn strongconnect(v: usize, succ: &[Vec<usize>], st: &mut State) {
        st.index[v] = Some(st.next);
        st.low[v] = st.next;
        st.next += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for &w in &succ[v] {
            match st.index[w] {
                None => {
                    strongconnect(w, succ, st);
                    st.low[v] = st.low[v].min(st.low[w]);
                }
                Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                _ => {}
            }
        }
        if Some(st.low[v]) == st.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = st.stack.pop() {
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            st.comps.push(comp);
        }
    }

    let n = ids.len();
    let mut st = State {
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        comps: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            strongconnect(v, &succ, &mut st);
        }
    }
    st.comps
        .into_iter()
        .filter(|c| c.len() > 1 || self_loop[c[0]])
        .map(|c| c.into_iter().map(|i| ids[i].to_string()).collect())
        .collect()
}
