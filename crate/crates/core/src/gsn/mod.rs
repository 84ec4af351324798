//! Goal Structuring Notation argument graphs.
//!
//! A graph is built from six node kinds connected by three edge kinds. The
//! argument is not proved directly: every strategy is challenged by one or
//! more counter-hypotheses, and the strategy only holds once each of them has
//! been refuted by evidence and all of its subgoals hold in turn.
//!
//! Graphs are values. [`ArgumentGraph::with_verdict`] and
//! [`propagate_status`] return new graphs and leave their input untouched.

mod export;
mod parse;
mod propagate;
mod validate;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use thiserror::Error;

pub use export::{export_graph, ExportMode};
pub use parse::{parse_graph, ParseError, ParseErrorKind};
pub use propagate::{propagate_status, top_goal_status, PropagateError};
pub use validate::{validate_structure, Rule, Violation};

/// Document header every GSN file starts with.
pub const FORMAT_HEADER: &str = "gsn-version: 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Goal,
    Strategy,
    CounterHypothesis,
    Evidence,
    Assumption,
    Context,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [
        NodeKind::Goal,
        NodeKind::Strategy,
        NodeKind::CounterHypothesis,
        NodeKind::Evidence,
        NodeKind::Assumption,
        NodeKind::Context,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Goal => "Goal",
            NodeKind::Strategy => "Strategy",
            NodeKind::CounterHypothesis => "CounterHypothesis",
            NodeKind::Evidence => "Evidence",
            NodeKind::Assumption => "Assumption",
            NodeKind::Context => "Context",
        }
    }

    /// Status a freshly parsed node of this kind starts with, if it carries one.
    pub fn initial_status(self) -> Option<NodeStatus> {
        match self {
            NodeKind::Goal | NodeKind::Strategy => Some(NodeStatus::Undetermined),
            NodeKind::CounterHypothesis => Some(NodeStatus::Open),
            NodeKind::Evidence | NodeKind::Assumption | NodeKind::Context => None,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    /// goal→strategy, goal→evidence, strategy→subgoal, counter-hypothesis→evidence
    SupportedBy,
    /// strategy→counter-hypothesis
    ChallengedBy,
    /// any→assumption/context
    InContextOf,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [
        EdgeKind::SupportedBy,
        EdgeKind::ChallengedBy,
        EdgeKind::InContextOf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::SupportedBy => "SupportedBy",
            EdgeKind::ChallengedBy => "ChallengedBy",
            EdgeKind::InContextOf => "InContextOf",
        }
    }

    /// Whether an edge of this kind may connect a `from` node to a `to` node.
    pub fn permits(self, from: NodeKind, to: NodeKind) -> bool {
        use NodeKind::*;
        match self {
            EdgeKind::SupportedBy => matches!(
                (from, to),
                (Goal, Strategy) | (Goal, Evidence) | (Strategy, Goal) | (CounterHypothesis, Evidence)
            ),
            EdgeKind::ChallengedBy => matches!((from, to), (Strategy, CounterHypothesis)),
            EdgeKind::InContextOf => matches!(to, Assumption | Context),
        }
    }

    /// Edges that carry argument structure, as opposed to documentation.
    pub fn is_structural(self) -> bool {
        !matches!(self, EdgeKind::InContextOf)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EdgeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeStatus {
    Supported,
    Undermined,
    Undetermined,
    Refuted,
    Confirmed,
    Open,
}

impl NodeStatus {
    pub const ALL: [NodeStatus; 6] = [
        NodeStatus::Supported,
        NodeStatus::Undermined,
        NodeStatus::Undetermined,
        NodeStatus::Refuted,
        NodeStatus::Confirmed,
        NodeStatus::Open,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Supported => "Supported",
            NodeStatus::Undermined => "Undermined",
            NodeStatus::Undetermined => "Undetermined",
            NodeStatus::Refuted => "Refuted",
            NodeStatus::Confirmed => "Confirmed",
            NodeStatus::Open => "Open",
        }
    }

    /// Whether a node of `kind` may carry this status.
    pub fn allowed_for(self, kind: NodeKind) -> bool {
        use NodeStatus::*;
        match kind {
            NodeKind::Goal | NodeKind::Strategy => {
                matches!(self, Supported | Undermined | Undetermined)
            }
            NodeKind::CounterHypothesis => matches!(self, Refuted | Confirmed | Open),
            _ => false,
        }
    }
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeStatus {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeStatus::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    /// The evidence refutes the counter-hypothesis it supports.
    Refuting,
    /// The evidence confirms the counter-hypothesis.
    Confirming,
    Inconclusive,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Refuting, Outcome::Confirming, Outcome::Inconclusive];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Refuting => "Refuting",
            Outcome::Confirming => "Confirming",
            Outcome::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Outcome::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceVerdict {
    /// Check identifier, or `manual`. A single whitespace-free token.
    pub source: String,
    pub outcome: Outcome,
    /// Single line of free text.
    pub detail: String,
    pub timestamp: i64,
}

impl EvidenceVerdict {
    pub fn new(source: impl Into<String>, outcome: Outcome, detail: impl Into<String>, timestamp: i64) -> Self {
        EvidenceVerdict {
            source: source.into(),
            outcome,
            detail: detail.into(),
            timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgumentNode {
    pub id: String,
    pub kind: NodeKind,
    pub statement: String,
    /// `None` for kinds that carry no status (evidence, assumptions, context).
    pub status: Option<NodeStatus>,
    /// Marks a strategy that is complete without subgoals.
    pub terminal: bool,
    pub verdicts: Vec<EvidenceVerdict>,
}

impl ArgumentNode {
    pub fn new(id: impl Into<String>, kind: NodeKind, statement: impl Into<String>) -> Self {
        ArgumentNode {
            id: id.into(),
            kind,
            statement: statement.into(),
            status: kind.initial_status(),
            terminal: false,
            verdicts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("unknown node id `{0}`")]
    UnknownId(String),
    #[error("node `{0}` is not an Evidence node")]
    NotEvidence(String),
    #[error("edge kind/endpoint mismatch: {from} ({from_kind}) -{kind}-> {to} ({to_kind})")]
    EdgeMismatch {
        from: String,
        from_kind: NodeKind,
        kind: EdgeKind,
        to: String,
        to_kind: NodeKind,
    },
    #[error("duplicate edge {from} -{kind}-> {to}")]
    DuplicateEdge { from: String, kind: EdgeKind, to: String },
    #[error("invalid node `{id}`: {reason}")]
    InvalidNode { id: String, reason: String },
}

/// Typed node/edge structure. Nodes keep declaration order; equality ignores it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArgumentGraph {
    nodes: IndexMap<String, ArgumentNode>,
    edges: Vec<Edge>,
}

fn check_token(id: &str, what: &str, value: &str) -> Result<(), GraphError> {
    if value.is_empty() || value.chars().any(char::is_whitespace) {
        return Err(GraphError::InvalidNode {
            id: id.to_string(),
            reason: format!("{what} must be a non-empty token without whitespace"),
        });
    }
    Ok(())
}

fn check_line(id: &str, what: &str, value: &str) -> Result<(), GraphError> {
    if value.contains(['\n', '\r']) || value.trim() != value {
        return Err(GraphError::InvalidNode {
            id: id.to_string(),
            reason: format!("{what} must be a single trimmed line"),
        });
    }
    Ok(())
}

impl ArgumentGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, node: ArgumentNode) -> Result<(), GraphError> {
        check_token(&node.id, "id", &node.id)?;
        if node.id.starts_with('#') {
            return Err(GraphError::InvalidNode {
                id: node.id,
                reason: "id must not start with `#`".into(),
            });
        }
        if node.statement.is_empty() {
            return Err(GraphError::InvalidNode {
                id: node.id,
                reason: "statement is empty".into(),
            });
        }
        check_line(&node.id, "statement", &node.statement)?;
        match node.status {
            Some(s) if !s.allowed_for(node.kind) => {
                return Err(GraphError::InvalidNode {
                    id: node.id.clone(),
                    reason: format!("status {s} not allowed for {}", node.kind),
                })
            }
            None if node.kind.initial_status().is_some() => {
                return Err(GraphError::InvalidNode {
                    id: node.id.clone(),
                    reason: format!("{} requires a status", node.kind),
                })
            }
            _ => {}
        }
        if node.terminal && node.kind != NodeKind::Strategy {
            return Err(GraphError::InvalidNode {
                id: node.id,
                reason: "only strategies can be terminal".into(),
            });
        }
        if !node.verdicts.is_empty() && node.kind != NodeKind::Evidence {
            return Err(GraphError::NotEvidence(node.id));
        }
        for v in &node.verdicts {
            check_token(&node.id, "verdict source", &v.source)?;
            check_line(&node.id, "verdict detail", &v.detail)?;
        }
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateId(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn add_edge(&mut self, from: &str, kind: EdgeKind, to: &str) -> Result<(), GraphError> {
        let from_kind = self
            .nodes
            .get(from)
            .ok_or_else(|| GraphError::UnknownId(from.to_string()))?
            .kind;
        let to_kind = self
            .nodes
            .get(to)
            .ok_or_else(|| GraphError::UnknownId(to.to_string()))?
            .kind;
        if !kind.permits(from_kind, to_kind) {
            return Err(GraphError::EdgeMismatch {
                from: from.to_string(),
                from_kind,
                kind,
                to: to.to_string(),
                to_kind,
            });
        }
        let edge = Edge {
            from: from.to_string(),
            to: to.to_string(),
            kind,
        };
        if self.edges.contains(&edge) {
            return Err(GraphError::DuplicateEdge {
                from: edge.from,
                kind,
                to: edge.to,
            });
        }
        self.edges.push(edge);
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&ArgumentNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ArgumentNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn status(&self, id: &str) -> Option<NodeStatus> {
        self.nodes.get(id).and_then(|n| n.status)
    }

    /// Targets of the out-edges of `id` with the given kind, in declaration order.
    pub fn targets<'a>(&'a self, id: &'a str, kind: EdgeKind) -> impl Iterator<Item = &'a ArgumentNode> + 'a {
        self.edges
            .iter()
            .filter(move |e| e.from == id && e.kind == kind)
            .filter_map(|e| self.nodes.get(&e.to))
    }

    /// Goals that are not the subgoal of any strategy.
    pub fn root_goals(&self) -> Vec<&ArgumentNode> {
        self.nodes
            .values()
            .filter(|n| n.kind == NodeKind::Goal)
            .filter(|n| {
                !self
                    .edges
                    .iter()
                    .any(|e| e.kind == EdgeKind::SupportedBy && e.to == n.id)
            })
            .collect()
    }

    /// Returns a copy of the graph with `verdict` appended to evidence node
    /// `evidence_id`. Statuses are left as they are.
    pub fn with_verdict(&self, evidence_id: &str, verdict: EvidenceVerdict) -> Result<ArgumentGraph, GraphError> {
        let node = self
            .nodes
            .get(evidence_id)
            .ok_or_else(|| GraphError::UnknownId(evidence_id.to_string()))?;
        if node.kind != NodeKind::Evidence {
            return Err(GraphError::NotEvidence(evidence_id.to_string()));
        }
        check_token(evidence_id, "verdict source", &verdict.source)?;
        check_line(evidence_id, "verdict detail", &verdict.detail)?;
        let mut out = self.clone();
        out.nodes[evidence_id].verdicts.push(verdict);
        Ok(out)
    }

    /// Copy of the graph with statuses replaced; used by propagation.
    pub(crate) fn with_statuses<F>(&self, mut status_of: F) -> ArgumentGraph
    where
        F: FnMut(&ArgumentNode) -> Option<NodeStatus>,
    {
        let mut out = self.clone();
        for node in out.nodes.values_mut() {
            node.status = status_of(node);
        }
        out
    }
}

/// Free-function form of [`ArgumentGraph::with_verdict`].
pub fn attach_verdict(
    graph: &ArgumentGraph,
    evidence_id: &str,
    verdict: EvidenceVerdict,
) -> Result<ArgumentGraph, GraphError> {
    graph.with_verdict(evidence_id, verdict)
}
