use std::fmt;

use thiserror::Error;

use super::{ArgumentGraph, ArgumentNode, EdgeKind, EvidenceVerdict, GraphError, NodeKind, NodeStatus, Outcome, FORMAT_HEADER};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown node kind `{0}`")]
    UnknownNodeKind(String),
    #[error("unknown edge kind `{0}`")]
    UnknownEdgeKind(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parse failure with a 1-based line and column.
#[derive(Debug, Error, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.kind)
    }
}

/// Whitespace-separated tokens paired with their 1-based column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

struct NodeDraft {
    line: usize,
    node: ArgumentNode,
    has_statement: bool,
    has_status: bool,
    has_terminal: bool,
}

struct PendingEdge {
    line: usize,
    from: String,
    kind: EdgeKind,
    to: String,
}

struct Parser {
    graph: ArgumentGraph,
    draft: Option<NodeDraft>,
    edges: Vec<PendingEdge>,
    header_seen: bool,
}

fn syntax(line: usize, column: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax(msg.into()),
    }
}

impl Parser {
    fn flush(&mut self) -> Result<(), ParseError> {
        if let Some(d) = self.draft.take() {
            if !d.has_statement {
                return Err(syntax(d.line, 1, format!("node `{}` has no statement", d.node.id)));
            }
            self.graph.add_node(d.node).map_err(|e| ParseError {
                line: d.line,
                column: 1,
                kind: e.into(),
            })?;
        }
        Ok(())
    }

    fn top_level(&mut self, lineno: usize, line: &str) -> Result<(), ParseError> {
        let toks = tokens(line);
        if !self.header_seen {
            if line.trim_end() == FORMAT_HEADER {
                self.header_seen = true;
                return Ok(());
            }
            return Err(syntax(lineno, 1, format!("expected header `{FORMAT_HEADER}`")));
        }
        self.flush()?;
        match toks.first().map(|t| t.1) {
            Some("node") => {
                if toks.len() != 3 {
                    return Err(syntax(lineno, 1, "expected `node <id> <kind>`"));
                }
                let (kcol, ktok) = toks[2];
                let kind: NodeKind = ktok.parse().map_err(|_| ParseError {
                    line: lineno,
                    column: kcol,
                    kind: ParseErrorKind::UnknownNodeKind(ktok.to_string()),
                })?;
                if self.graph.node(toks[1].1).is_some() {
                    return Err(ParseError {
                        line: lineno,
                        column: toks[1].0,
                        kind: GraphError::DuplicateId(toks[1].1.to_string()).into(),
                    });
                }
                self.draft = Some(NodeDraft {
                    line: lineno,
                    node: ArgumentNode::new(toks[1].1, kind, "-"),
                    has_statement: false,
                    has_status: false,
                    has_terminal: false,
                });
                Ok(())
            }
            Some("edge") => {
                if toks.len() != 4 {
                    return Err(syntax(lineno, 1, "expected `edge <from> <kind> <to>`"));
                }
                let (kcol, ktok) = toks[2];
                let kind: EdgeKind = ktok.parse().map_err(|_| ParseError {
                    line: lineno,
                    column: kcol,
                    kind: ParseErrorKind::UnknownEdgeKind(ktok.to_string()),
                })?;
                self.edges.push(PendingEdge {
                    line: lineno,
                    from: toks[1].1.to_string(),
                    kind,
                    to: toks[3].1.to_string(),
                });
                Ok(())
            }
            Some(other) => Err(syntax(lineno, 1, format!("unexpected keyword `{other}`"))),
            None => Ok(()),
        }
    }

    fn attribute(&mut self, lineno: usize, line: &str) -> Result<(), ParseError> {
        let indent = line.len() - line.trim_start().len();
        let col = line[..indent].chars().count() + 1;
        let Some(draft) = self.draft.as_mut() else {
            return Err(syntax(lineno, col, "indented line outside a node block"));
        };
        let body = line.trim();
        let Some((key, value)) = body.split_once(':') else {
            return Err(syntax(lineno, col, "expected `<key>: <value>`"));
        };
        let value = value.trim();
        let vcol = col + key.chars().count() + 1 + (body[key.len() + 1..].len() - body[key.len() + 1..].trim_start().len());
        match key {
            "statement" => {
                if draft.has_statement {
                    return Err(syntax(lineno, col, "duplicate statement"));
                }
                if value.is_empty() {
                    return Err(syntax(lineno, vcol, "statement is empty"));
                }
                draft.node.statement = value.to_string();
                draft.has_statement = true;
            }
            "status" => {
                if draft.has_status {
                    return Err(syntax(lineno, col, "duplicate status"));
                }
                let status: NodeStatus = value
                    .parse()
                    .map_err(|_| syntax(lineno, vcol, format!("unknown status `{value}`")))?;
                if !status.allowed_for(draft.node.kind) {
                    return Err(syntax(
                        lineno,
                        vcol,
                        format!("status {status} not allowed for {}", draft.node.kind),
                    ));
                }
                draft.node.status = Some(status);
                draft.has_status = true;
            }
            "terminal" => {
                if draft.has_terminal {
                    return Err(syntax(lineno, col, "duplicate terminal flag"));
                }
                draft.node.terminal = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(syntax(lineno, vcol, "terminal must be `true` or `false`")),
                };
                if draft.node.terminal && draft.node.kind != NodeKind::Strategy {
                    return Err(syntax(lineno, col, "only strategies can be terminal"));
                }
                draft.has_terminal = true;
            }
            "verdict" => {
                if draft.node.kind != NodeKind::Evidence {
                    return Err(ParseError {
                        line: lineno,
                        column: col,
                        kind: GraphError::NotEvidence(draft.node.id.clone()).into(),
                    });
                }
                let mut parts = value.splitn(4, char::is_whitespace);
                let outcome = parts.next().unwrap_or("");
                let source = parts.next().unwrap_or("");
                let stamp = parts.next().unwrap_or("");
                let detail = parts.next().unwrap_or("").trim();
                let outcome: Outcome = outcome
                    .parse()
                    .map_err(|_| syntax(lineno, vcol, format!("unknown verdict outcome `{outcome}`")))?;
                if source.is_empty() {
                    return Err(syntax(lineno, vcol, "verdict is missing its source"));
                }
                let timestamp: i64 = stamp
                    .parse()
                    .map_err(|_| syntax(lineno, vcol, format!("bad verdict timestamp `{stamp}`")))?;
                draft
                    .node
                    .verdicts
                    .push(EvidenceVerdict::new(source, outcome, detail, timestamp));
            }
            other => return Err(syntax(lineno, col, format!("unknown attribute `{other}`"))),
        }
        Ok(())
    }
}

/// Parses a GSN document. Statuses default to Undetermined/Open when absent.
/// Cycles are accepted here and reported by
/// [`validate_structure`](super::validate_structure).
pub fn parse_graph(document: &str) -> Result<ArgumentGraph, ParseError> {
    let mut p = Parser {
        graph: ArgumentGraph::new(),
        draft: None,
        edges: Vec::new(),
        header_seen: false,
    };
    for (i, raw) in document.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if p.header_seen && raw.starts_with(char::is_whitespace) {
            p.attribute(lineno, raw)?;
        } else {
            p.top_level(lineno, raw)?;
        }
    }
    if !p.header_seen {
        return Err(syntax(1, 1, format!("missing header `{FORMAT_HEADER}`")));
    }
    p.flush()?;
    for e in std::mem::take(&mut p.edges) {
        p.graph.add_edge(&e.from, e.kind, &e.to).map_err(|err| ParseError {
            line: e.line,
            column: 1,
            kind: err.into(),
        })?;
    }
    Ok(p.graph)
}
