//! End-to-end evaluation: segment, detect, look for gaps, measure
//! saturation, turn the results into evidence verdicts and propagate them
//! through the argument graph.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coverage::{
    default_sizes, discovery_curve, fit_saturation, good_turing_coverage, bin_labels, CoverageError, CoverageEstimate,
    SaturationCurve, SaturationFit, DEFAULT_REPETITIONS,
};
use crate::detect::{
    detect_all, find_gaps, summarize, BaseScenarioInstance, ClassificationGap, DetectError, DetectParams,
    DetectionSummary, LintFinding, RuleSet, DEFAULT_RELEVANCE_RADIUS,
};
use crate::envelope::{check_spatial_coverage, segment, EnvelopingScenario, SegmentError, UncoveredSample};
use crate::gsn::{
    export_graph, propagate_status, top_goal_status, validate_structure, ArgumentGraph, EvidenceVerdict, ExportMode,
    GraphError, NodeKind, NodeStatus, Outcome, PropagateError, Violation,
};
use crate::trajectory::{Dataset, DatasetSchema, MapRegion, TrackId};
use crate::Execution;

/// Below this many observations a saturation check is always Inconclusive.
pub const MIN_SATURATION_SAMPLES: usize = 30;
/// Parameters that can be binned for saturation.
pub const KNOWN_PARAMETERS: [&str; 1] = ["start_speed"];
pub const DEFAULT_START_SPEED_BIN: f64 = 0.5;
pub const REPORT_HEADER: &str = "completeness-report: 1";

#[derive(Debug, Clone, PartialEq)]
pub enum SaturationTarget {
    Types,
    Parameter(String),
}

impl fmt::Display for SaturationTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SaturationTarget::Types => f.write_str("types"),
            SaturationTarget::Parameter(p) => write!(f, "parameter:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    GapFree,
    SpatialCoverage,
    RuleTotality,
    SaturationThreshold { target: SaturationTarget, threshold: f64 },
    Manual { outcome: Outcome, justification: String },
}

impl Check {
    /// Verdict source token.
    pub fn source(&self) -> &'static str {
        match self {
            Check::GapFree => "gap_free",
            Check::SpatialCoverage => "spatial_coverage",
            Check::RuleTotality => "rule_totality",
            Check::SaturationThreshold { .. } => "saturation_threshold",
            Check::Manual { .. } => "manual",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::GapFree => f.write_str("GapFree"),
            Check::SpatialCoverage => f.write_str("SpatialCoverage"),
            Check::RuleTotality => f.write_str("RuleTotality"),
            Check::SaturationThreshold { target, threshold } => write!(f, "SaturationThreshold({target}, {threshold})"),
            Check::Manual { outcome, justification } => write!(f, "Manual({outcome}, {justification})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceBinding {
    pub evidence_id: String,
    pub check: Check,
}

impl fmt::Display for EvidenceBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bind {} {}", self.evidence_id, self.check)
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct BindingParseError {
    pub line: usize,
    pub message: String,
}

/// Parses `bind <evidence_id> <Check>[(<args>)]` lines.
pub fn parse_bindings(text: &str) -> Result<Vec<EvidenceBinding>, BindingParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| BindingParseError { line: i + 1, message };
        let mut parts = line.splitn(3, char::is_whitespace);
        let (Some("bind"), Some(id), Some(check)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(format!("expected `bind <evidence_id> <check>`, got `{line}`")));
        };
        let check = parse_check(check.trim()).map_err(err)?;
        out.push(EvidenceBinding {
            evidence_id: id.to_string(),
            check,
        });
    }
    Ok(out)
}

fn parse_check(text: &str) -> Result<Check, String> {
    let (name, args) = match text.split_once('(') {
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("missing `)` in `{text}`"))?;
            (name.trim(), Some(inner))
        }
        None => (text, None),
    };
    let no_args = |c: Check| match args {
        None => Ok(c),
        Some(_) => Err(format!("`{name}` takes no arguments")),
    };
    match name {
        "GapFree" => no_args(Check::GapFree),
        "SpatialCoverage" => no_args(Check::SpatialCoverage),
        "RuleTotality" => no_args(Check::RuleTotality),
        "SaturationThreshold" => {
            let args = args.ok_or("SaturationThreshold needs `(<target>, <threshold>)`")?;
            let (target, thr) = args
                .split_once(',')
                .ok_or("SaturationThreshold needs `(<target>, <threshold>)`")?;
            let target = match target.trim() {
                "types" => SaturationTarget::Types,
                t => match t.strip_prefix("parameter:") {
                    Some(p) if KNOWN_PARAMETERS.contains(&p) => SaturationTarget::Parameter(p.to_string()),
                    Some(p) => return Err(format!("unknown parameter `{p}`; known: {}", KNOWN_PARAMETERS.join(", "))),
                    None => return Err(format!("target must be `types` or `parameter:<name>`, got `{t}`")),
                },
            };
            let threshold: f64 = thr
                .trim()
                .parse()
                .map_err(|_| format!("threshold `{}` is not a number", thr.trim()))?;
            if !(0.0..=1.0).contains(&threshold) {
                return Err(format!("threshold {threshold} outside [0, 1]"));
            }
            Ok(Check::SaturationThreshold { target, threshold })
        }
        "Manual" => {
            let args = args.ok_or("Manual needs `(<Outcome>, <justification>)`")?;
            let (outcome, justification) = args
                .split_once(',')
                .ok_or("Manual needs `(<Outcome>, <justification>)`")?;
            let outcome: Outcome = outcome
                .trim()
                .parse()
                .map_err(|_| format!("unknown outcome `{}`", outcome.trim()))?;
            let justification = justification.trim();
            if justification.is_empty() {
                return Err("Manual verdicts need a justification".into());
            }
            Ok(Check::Manual {
                outcome,
                justification: justification.to_string(),
            })
        }
        other => Err(format!("unknown check `{other}`")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub detect: DetectParams,
    pub relevance_radius: f64,
    /// Parameter name → bin width.
    pub bin_widths: BTreeMap<String, f64>,
    /// Sample sizes for every curve; sizes above a target's observation
    /// count are skipped. `None` uses [`default_sizes`].
    pub sizes: Option<Vec<usize>>,
    pub repetitions: usize,
    pub seed: u64,
    /// Written into every verdict.
    pub timestamp: i64,
    pub execution: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            detect: DetectParams::default(),
            relevance_radius: DEFAULT_RELEVANCE_RADIUS,
            bin_widths: BTreeMap::from([("start_speed".to_string(), DEFAULT_START_SPEED_BIN)]),
            sizes: None,
            repetitions: DEFAULT_REPETITIONS,
            seed: 0,
            timestamp: 0,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Inputs,
    Segment,
    Detect,
    Saturation,
    Verdicts,
    Propagate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Inputs => "inputs",
            Stage::Segment => "segment",
            Stage::Detect => "detect",
            Stage::Saturation => "saturation",
            Stage::Verdicts => "verdicts",
            Stage::Propagate => "propagate",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("inputs: graph has {} structural violation(s); first: {}", .0.len(), .0[0])]
    InvalidGraph(Vec<Violation>),
    #[error("inputs: binding for `{evidence_id}`: {source}")]
    UnresolvedBinding { evidence_id: String, source: GraphError },
    #[error("inputs: {0}")]
    BadConfig(String),
    #[error("segment: {0}")]
    Segment(#[from] SegmentError),
    #[error("detect: {0}")]
    Detect(#[from] DetectError),
    #[error("saturation `{target}`: {source}")]
    Coverage { target: String, source: CoverageError },
    #[error("verdicts: binding for `{evidence_id}` needs `{artifact}`, which was not computed")]
    MissingArtifact { evidence_id: String, artifact: String },
    #[error("verdicts: {0}")]
    Attach(GraphError),
    #[error("propagate: {0}")]
    Propagate(#[from] PropagateError),
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::InvalidGraph(_) | PipelineError::UnresolvedBinding { .. } | PipelineError::BadConfig(_) => {
                Stage::Inputs
            }
            PipelineError::Segment(_) => Stage::Segment,
            PipelineError::Detect(_) => Stage::Detect,
            PipelineError::Coverage { .. } => Stage::Saturation,
            PipelineError::MissingArtifact { .. } | PipelineError::Attach(_) => Stage::Verdicts,
            PipelineError::Propagate(_) => Stage::Propagate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub recording_id: String,
    pub frame_rate: f64,
    pub tracks: usize,
    pub track_points: usize,
    pub egos: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResults {
    pub dataset: DatasetSummary,
    pub region_count: usize,
    pub envelopes: Vec<EnvelopingScenario>,
    /// All instances, in envelope order.
    pub instances: Vec<BaseScenarioInstance>,
    pub gaps: Vec<ClassificationGap>,
    pub uncovered: Vec<UncoveredSample>,
    pub summary: DetectionSummary,
    pub lint: Vec<LintFinding>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationAnalysis {
    pub target: SaturationTarget,
    pub observations: usize,
    pub distinct: usize,
    /// `None` when there are no observations.
    pub curve: Option<SaturationCurve>,
    pub coverage: Option<CoverageEstimate>,
    /// `None` when the curve has fewer than three points.
    pub fit: Option<SaturationFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResults {
    pub detection: DetectionResults,
    pub saturation: Vec<SaturationAnalysis>,
}

impl AnalysisResults {
    pub fn saturation_for(&self, target: &SaturationTarget) -> Option<&SaturationAnalysis> {
        self.saturation.iter().find(|s| &s.target == target)
    }
}

fn check_config(config: &PipelineConfig) -> Result<(), PipelineError> {
    let bad = |m: String| Err(PipelineError::BadConfig(m));
    if !(config.relevance_radius.is_finite() && config.relevance_radius >= 0.0) {
        return bad(format!("relevance_radius must be >= 0, got {}", config.relevance_radius));
    }
    for (name, w) in &config.bin_widths {
        if !KNOWN_PARAMETERS.contains(&name.as_str()) {
            return bad(format!("unknown parameter `{name}`"));
        }
        if !(w.is_finite() && *w > 0.0) {
            return bad(format!("bin width for `{name}` must be > 0, got {w}"));
        }
    }
    if config.repetitions == 0 {
        return bad("repetitions must be >= 1".into());
    }
    if let Some(sizes) = &config.sizes {
        if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sizes must be positive and strictly increasing".into());
        }
    }
    Ok(())
}

/// Segments every vehicle track, detects base scenarios, and collects gaps,
/// spatially uncovered samples and rule lint findings.
pub fn run_detection(
    dataset: &Dataset,
    schema: &DatasetSchema,
    regions: &[MapRegion],
    rules: &RuleSet,
    config: &PipelineConfig,
) -> Result<DetectionResults, PipelineError> {
    check_config(config)?;
    let egos: Vec<TrackId> = dataset
        .tracks()
        .filter(|t| schema.is_vehicle(t.object_class()))
        .map(|t| t.track_id().clone())
        .collect();
    let envelopes = segment(dataset, regions, &egos)?;
    let per_envelope = detect_all(&envelopes, dataset, rules, &config.detect, config.execution)?;
    let mut gaps = Vec::new();
    for (env, inst) in envelopes.iter().zip(&per_envelope) {
        gaps.extend(find_gaps(env, inst, config.relevance_radius, dataset)?);
    }
    let instances: Vec<BaseScenarioInstance> = per_envelope.into_iter().flatten().collect();
    let summary = summarize(&instances, dataset)?;
    Ok(DetectionResults {
        dataset: DatasetSummary {
            recording_id: dataset.meta().recording_id.clone(),
            frame_rate: dataset.frame_rate(),
            tracks: dataset.track_count(),
            track_points: dataset.point_count(),
            egos: egos.len(),
        },
        region_count: regions.len(),
        envelopes,
        instances,
        gaps,
        uncovered: check_spatial_coverage(dataset, regions),
        summary,
        lint: rules.lint(&schema.classes),
    })
}

/// Curve, coverage estimate and fit for one list of labels.
pub fn label_saturation(
    target: SaturationTarget,
    labels: &[String],
    config: &PipelineConfig,
) -> Result<SaturationAnalysis, PipelineError> {
    let wrap = |source| PipelineError::Coverage {
        target: target.to_string(),
        source,
    };
    let n = labels.len();
    if n == 0 {
        return Ok(SaturationAnalysis {
            target,
            observations: 0,
            distinct: 0,
            curve: None,
            coverage: None,
            fit: None,
        });
    }
    let sizes: Vec<usize> = match &config.sizes {
        Some(s) => s.iter().copied().filter(|&k| k <= n).collect(),
        None => default_sizes(n),
    };
    let curve = if sizes.is_empty() {
        None
    } else {
        Some(discovery_curve(labels, &sizes, config.repetitions, config.seed, config.execution).map_err(wrap)?)
    };
    let fit = match &curve {
        Some(c) if c.sample_sizes.len() >= 3 => Some(fit_saturation(c).map_err(wrap)?),
        _ => None,
    };
    let mut distinct: Vec<&String> = labels.iter().collect();
    distinct.sort();
    distinct.dedup();
    Ok(SaturationAnalysis {
        observations: n,
        distinct: distinct.len(),
        coverage: Some(good_turing_coverage(labels).map_err(wrap)?),
        curve,
        fit,
        target,
    })
}

/// Saturation of base-scenario types and of every configured parameter.
pub fn run_saturation(
    detection: &DetectionResults,
    config: &PipelineConfig,
) -> Result<Vec<SaturationAnalysis>, PipelineError> {
    check_config(config)?;
    let types: Vec<String> = detection.instances.iter().map(|i| i.type_name.clone()).collect();
    let mut out = vec![label_saturation(SaturationTarget::Types, &types, config)?];
    for (name, &width) in &config.bin_widths {
        let target = SaturationTarget::Parameter(name.clone());
        // only start_speed is known; check_config rejects the rest
        let values: Vec<f64> = detection.summary.start_speeds.iter().map(|s| s.speed).collect();
        let labels = if values.is_empty() {
            Vec::new()
        } else {
            bin_labels(&values, width).map_err(|source| PipelineError::Coverage {
                target: target.to_string(),
                source,
            })?
        };
        out.push(label_saturation(target, &labels, config)?);
    }
    Ok(out)
}

/// Verdict of one binding, computed only from numbers that also appear in
/// the report.
pub fn evaluate_binding(
    binding: &EvidenceBinding,
    results: &AnalysisResults,
    timestamp: i64,
) -> Result<EvidenceVerdict, PipelineError> {
    let d = &results.detection;
    let (outcome, detail) = match &binding.check {
        Check::GapFree => {
            if d.envelopes.is_empty() {
                (Outcome::Inconclusive, "no enveloping scenarios".to_string())
            } else {
                let o = if d.gaps.is_empty() { Outcome::Refuting } else { Outcome::Confirming };
                (o, format!("{} gaps in {} envelopes", d.gaps.len(), d.envelopes.len()))
            }
        }
        Check::SpatialCoverage => {
            if d.dataset.track_points == 0 {
                (Outcome::Inconclusive, "no track points".to_string())
            } else {
                let o = if d.uncovered.is_empty() { Outcome::Refuting } else { Outcome::Confirming };
                (o, format!("{} of {} track points outside all regions", d.uncovered.len(), d.dataset.track_points))
            }
        }
        Check::RuleTotality => {
            let o = if d.lint.is_empty() { Outcome::Refuting } else { Outcome::Confirming };
            (o, format!("{} lint findings", d.lint.len()))
        }
        Check::SaturationThreshold { target, threshold } => {
            let s = results
                .saturation_for(target)
                .ok_or_else(|| PipelineError::MissingArtifact {
                    evidence_id: binding.evidence_id.clone(),
                    artifact: format!("saturation {target}"),
                })?;
            match &s.coverage {
                Some(c) if s.observations >= MIN_SATURATION_SAMPLES => {
                    let o = if c.estimate >= *threshold { Outcome::Refuting } else { Outcome::Confirming };
                    (o, format!("{target} coverage {} vs threshold {threshold} (N={})", c.estimate, c.total))
                }
                _ => (
                    Outcome::Inconclusive,
                    format!("{target}: N={} below minimum {MIN_SATURATION_SAMPLES}", s.observations),
                ),
            }
        }
        Check::Manual { outcome, justification } => (*outcome, justification.clone()),
    };
    Ok(EvidenceVerdict::new(binding.check.source(), outcome, detail, timestamp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundVerdict {
    pub binding: EvidenceBinding,
    pub verdict: EvidenceVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessReport {
    pub results: AnalysisResults,
    pub config: PipelineConfig,
    pub verdicts: Vec<BoundVerdict>,
    pub statuses: Vec<(String, NodeStatus)>,
    pub top_goal: Option<NodeStatus>,
    /// SHA-256 over the graph, rules, regions, bindings, config and track data.
    pub input_sha256: String,
}

pub struct PipelineInputs<'a> {
    pub graph: &'a ArgumentGraph,
    pub dataset: &'a Dataset,
    pub schema: &'a DatasetSchema,
    pub regions: &'a [MapRegion],
    pub rules: &'a RuleSet,
    pub bindings: &'a [EvidenceBinding],
}

/// Runs every stage and returns the updated graph with its report. The input
/// graph is never modified; on error nothing is returned.
pub fn run_pipeline(
    inputs: &PipelineInputs,
    config: &PipelineConfig,
) -> Result<(ArgumentGraph, CompletenessReport), PipelineError> {
    let violations = validate_structure(inputs.graph);
    if !violations.is_empty() {
        return Err(PipelineError::InvalidGraph(violations));
    }
    for b in inputs.bindings {
        match inputs.graph.node(&b.evidence_id) {
            Some(n) if n.kind == NodeKind::Evidence => {}
            Some(_) => {
                return Err(PipelineError::UnresolvedBinding {
                    evidence_id: b.evidence_id.clone(),
                    source: GraphError::NotEvidence(b.evidence_id.clone()),
                })
            }
            None => {
                return Err(PipelineError::UnresolvedBinding {
                    evidence_id: b.evidence_id.clone(),
                    source: GraphError::UnknownId(b.evidence_id.clone()),
                })
            }
        }
    }
    let detection = run_detection(inputs.dataset, inputs.schema, inputs.regions, inputs.rules, config)?;
    let saturation = run_saturation(&detection, config)?;
    let results = AnalysisResults { detection, saturation };

    let mut graph = inputs.graph.clone();
    let mut verdicts = Vec::with_capacity(inputs.bindings.len());
    for b in inputs.bindings {
        let verdict = evaluate_binding(b, &results, config.timestamp)?;
        graph = graph
            .with_verdict(&b.evidence_id, verdict.clone())
            .map_err(PipelineError::Attach)?;
        verdicts.push(BoundVerdict {
            binding: b.clone(),
            verdict,
        });
    }
    let graph = propagate_status(&graph)?;
    let statuses = graph.nodes().filter_map(|n| n.status.map(|s| (n.id.clone(), s))).collect();
    let report = CompletenessReport {
        top_goal: top_goal_status(&graph),
        input_sha256: input_fingerprint(inputs, config),
        results,
        config: config.clone(),
        verdicts,
        statuses,
    };
    Ok((graph, report))
}

fn input_fingerprint(inputs: &PipelineInputs, config: &PipelineConfig) -> String {
    let mut h = Sha256::new();
    let mut section = |name: &str, body: &[u8]| {
        h.update(name.as_bytes());
        h.update((body.len() as u64).to_le_bytes());
        h.update(body);
    };
    section("graph", export_graph(inputs.graph, ExportMode::Document).as_bytes());
    section("rules", inputs.rules.to_document().as_bytes());
    let mut regions = String::new();
    for r in inputs.regions {
        let _ = write!(regions, "{}", r.id());
        for [x, y] in r.vertices() {
            let _ = write!(regions, " {x},{y}");
        }
        regions.push('\n');
    }
    section("regions", regions.as_bytes());
    let bindings: String = inputs.bindings.iter().map(|b| format!("{b}\n")).collect();
    section("bindings", bindings.as_bytes());
    section("config", config_lines(config, &inputs.schema.classes).join("\n").as_bytes());
    let mut tracks = Vec::new();
    for t in inputs.dataset.tracks() {
        tracks.extend_from_slice(t.track_id().as_str().as_bytes());
        tracks.push(0);
        tracks.extend_from_slice(t.object_class().as_bytes());
        tracks.push(0);
        for p in t.points() {
            tracks.extend_from_slice(&p.frame.to_le_bytes());
            for v in [p.x, p.y, p.heading, p.speed] {
                tracks.extend_from_slice(&v.to_bits().to_le_bytes());
            }
        }
    }
    section("tracks", &tracks);
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn config_lines(config: &PipelineConfig, classes: &[String]) -> Vec<String> {
    let mut out = vec![
        format!("seed: {}", config.seed),
        format!("min_duration: {}", config.detect.min_duration),
        format!("bridge_gap: {}", config.detect.bridge_gap),
        format!("relevance_radius: {}", config.relevance_radius),
        format!("repetitions: {}", config.repetitions),
        format!(
            "sizes: {}",
            match &config.sizes {
                Some(s) => s.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
                None => "default".to_string(),
            }
        ),
    ];
    for (name, w) in &config.bin_widths {
        out.push(format!("bin_width.{name}: {w}"));
    }
    out.push(format!("classes: {}", classes.join(" ")));
    out.push(format!("timestamp: {}", config.timestamp));
    out
}

impl CompletenessReport {
    /// Structured UTF-8 text. Ends with a SHA-256 over all preceding lines.
    pub fn render(&self) -> String {
        let d = &self.results.detection;
        let mut s = String::new();
        let mut line = |text: String| {
            s.push_str(&text);
            s.push('\n');
        };
        line(REPORT_HEADER.to_string());
        line(format!("tool: {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
        line(format!("input_sha256: {}", self.input_sha256));

        line("\n[config]".into());
        // classes are part of the fingerprint, not repeated here
        for l in config_lines(&self.config, &[]).into_iter().filter(|l| !l.starts_with("classes")) {
            line(l);
        }

        line("\n[dataset]".into());
        line(format!("recording_id: {}", d.dataset.recording_id));
        line(format!("frame_rate: {}", d.dataset.frame_rate));
        line(format!("tracks: {}", d.dataset.tracks));
        line(format!("track_points: {}", d.dataset.track_points));
        line(format!("egos: {}", d.dataset.egos));

        line("\n[segmentation]".into());
        line(format!("regions: {}", d.region_count));
        line(format!("envelopes: {}", d.envelopes.len()));
        line(format!("truncated_envelopes: {}", d.envelopes.iter().filter(|e| e.is_truncated()).count()));
        line(format!("spatial_uncovered: {}", d.uncovered.len()));

        line("\n[detection]".into());
        line(format!("instances: {}", d.instances.len()));
        line(format!("retained_short: {}", d.instances.iter().filter(|i| i.retained_short).count()));
        for (t, c) in &d.summary.counts {
            line(format!("count.{t}: {c}"));
        }
        line(format!("gaps: {}", d.gaps.len()));
        line(format!("gap_frames: {}", d.gaps.iter().map(|g| g.end_frame - g.start_frame + 1).sum::<i64>()));
        for g in &d.gaps {
            let nearby: Vec<&str> = g.nearby_objects.iter().map(TrackId::as_str).collect();
            line(format!(
                "gap: {} {} {} [{}]",
                g.envelope_id,
                g.start_frame,
                g.end_frame,
                nearby.join(" ")
            ));
        }

        line("\n[rules]".into());
        line(format!("lint_findings: {}", d.lint.len()));
        for f in &d.lint {
            line(format!("lint: {f}"));
        }

        for sat in &self.results.saturation {
            line(format!("\n[saturation {}]", sat.target));
            line(format!("observations: {}", sat.observations));
            line(format!("distinct: {}", sat.distinct));
            match &sat.coverage {
                Some(c) => {
                    line(format!("coverage_method: {}", c.method));
                    line(format!("singletons: {}", c.singletons));
                    line(format!("coverage_estimate: {}", c.estimate));
                }
                None => line("coverage_estimate: none".into()),
            }
            match &sat.fit {
                Some(f) => line(format!("fit: k_hat={} tau_hat={} rmse={}", f.k_hat, f.tau_hat, f.rmse)),
                None => line("fit: none".into()),
            }
            if let Some(c) = &sat.curve {
                for ((n, m), sd) in c.sample_sizes.iter().zip(&c.mean_distinct).zip(&c.stddev) {
                    line(format!("curve: {n} {m} {sd}"));
                }
            }
        }

        line("\n[verdicts]".into());
        for v in &self.verdicts {
            line(format!(
                "verdict: {} {} {} | {}",
                v.binding.evidence_id, v.binding.check, v.verdict.outcome, v.verdict.detail
            ));
        }

        line("\n[statuses]".into());
        for (id, st) in &self.statuses {
            line(format!("status: {id} {st}"));
        }
        line(format!(
            "top_goal: {}",
            self.top_goal.map_or("none".to_string(), |s| s.to_string())
        ));

        let digest = hex(&Sha256::digest(s.as_bytes()));
        s.push_str(&format!("\nreport_sha256: {digest}\n"));
        s
    }
}
