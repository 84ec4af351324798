use std::collections::HashMap;

use thiserror::Error;

use super::{validate_structure, ArgumentGraph, ArgumentNode, EdgeKind, NodeKind, NodeStatus, Outcome, Violation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PropagateError {
    #[error("graph has {} structural violation(s); first: {}", .0.len(), .0[0])]
    StructuralViolations(Vec<Violation>),
}

/// Pessimistic reading of a set of verdicts: any confirmation wins.
fn verdict_reading<'a>(verdicts: impl Iterator<Item = &'a Outcome>) -> Option<Outcome> {
    let mut refuted = false;
    for o in verdicts {
        match o {
            Outcome::Confirming => return Some(Outcome::Confirming),
            Outcome::Refuting => refuted = true,
            Outcome::Inconclusive => {}
        }
    }
    refuted.then_some(Outcome::Refuting)
}

fn evidence_verdicts<'a>(graph: &'a ArgumentGraph, id: &'a str) -> impl Iterator<Item = &'a Outcome> + 'a {
    graph
        .targets(id, EdgeKind::SupportedBy)
        .filter(|n| n.kind == NodeKind::Evidence)
        .flat_map(|n| n.verdicts.iter().map(|v| &v.outcome))
}

fn step(graph: &ArgumentGraph, current: &HashMap<String, Option<NodeStatus>>, node: &ArgumentNode) -> Option<NodeStatus> {
    let id = node.id.as_str();
    let status_of = |n: &ArgumentNode| current[&n.id];
    match node.kind {
        NodeKind::CounterHypothesis => Some(match verdict_reading(evidence_verdicts(graph, id)) {
            Some(Outcome::Confirming) => NodeStatus::Confirmed,
            Some(_) => NodeStatus::Refuted,
            None => NodeStatus::Open,
        }),
        NodeKind::Strategy => {
            let chs: Vec<_> = graph.targets(id, EdgeKind::ChallengedBy).map(status_of).collect();
            let subs: Vec<_> = graph.targets(id, EdgeKind::SupportedBy).map(status_of).collect();
            let undermined = chs.contains(&Some(NodeStatus::Confirmed)) || subs.contains(&Some(NodeStatus::Undermined));
            let supported = chs.iter().all(|s| *s == Some(NodeStatus::Refuted))
                && subs.iter().all(|s| *s == Some(NodeStatus::Supported));
            Some(if undermined {
                NodeStatus::Undermined
            } else if supported {
                NodeStatus::Supported
            } else {
                NodeStatus::Undetermined
            })
        }
        NodeKind::Goal => {
            let supporters: Vec<NodeStatus> = graph
                .targets(id, EdgeKind::SupportedBy)
                .map(|n| match n.kind {
                    // Direct evidence reads as a claim without a counter-hypothesis.
                    NodeKind::Evidence => match verdict_reading(n.verdicts.iter().map(|v| &v.outcome)) {
                        Some(Outcome::Confirming) => NodeStatus::Undermined,
                        Some(_) => NodeStatus::Supported,
                        None => NodeStatus::Undetermined,
                    },
                    _ => status_of(n).unwrap_or(NodeStatus::Undetermined),
                })
                .collect();
            Some(if supporters.contains(&NodeStatus::Supported) {
                NodeStatus::Supported
            } else if !supporters.is_empty() && supporters.iter().all(|s| *s == NodeStatus::Undermined) {
                NodeStatus::Undermined
            } else {
                NodeStatus::Undetermined
            })
        }
        NodeKind::Evidence | NodeKind::Assumption | NodeKind::Context => None,
    }
}

/// Recomputes every status from the attached verdicts.
///
/// Statuses already present in `graph` are discarded; iteration starts from
/// Undetermined/Open and repeats until no status changes. The result differs
/// from the input only in status fields.
pub fn propagate_status(graph: &ArgumentGraph) -> Result<ArgumentGraph, PropagateError> {
    let violations = validate_structure(graph);
    if !violations.is_empty() {
        return Err(PropagateError::StructuralViolations(violations));
    }
    let mut current: HashMap<String, Option<NodeStatus>> =
        graph.nodes().map(|n| (n.id.clone(), n.kind.initial_status())).collect();
    // Acyclic, so the fixpoint is reached after at most depth + 1 rounds.
    for _ in 0..=graph.len() {
        let next: HashMap<String, Option<NodeStatus>> =
            graph.nodes().map(|n| (n.id.clone(), step(graph, &current, n))).collect();
        if next == current {
            break;
        }
        current = next;
    }
    Ok(graph.with_statuses(|n| current[&n.id]))
}

/// Combined status of the root goals: Undermined if any root is undermined,
/// Supported if all are supported, otherwise Undetermined. `None` when the
/// graph has no goal.
pub fn top_goal_status(graph: &ArgumentGraph) -> Option<NodeStatus> {
    let roots = graph.root_goals();
    if roots.is_empty() {
        return None;
    }
    let statuses: Vec<_> = roots.iter().map(|n| n.status.unwrap_or(NodeStatus::Undetermined)).collect();
    Some(if statuses.contains(&NodeStatus::Undermined) {
        NodeStatus::Undermined
    } else if statuses.iter().all(|s| *s == NodeStatus::Supported) {
        NodeStatus::Supported
    } else {
        NodeStatus::Undetermined
    })
}
