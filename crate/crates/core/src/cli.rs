//! Command-line front end.
//!
//! Exit codes: 0 success (valid graph / no gaps / top goal Supported),
//! 1 structural violations, 2 tool error, 3 gaps found, 4 top goal
//! Undermined, 5 top goal Undetermined.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coverage::{expected_distinct, write_curve_csv, write_fit_csv, DEFAULT_REPETITIONS};
use crate::detect::{compile_rules, write_gaps_csv, write_instances_csv, RuleSet};
use crate::envelope::write_envelopes_csv;
use crate::gsn::{export_graph, parse_graph, validate_structure, ExportMode, NodeStatus};
use crate::kv;
use crate::pipeline::{
    label_saturation, parse_bindings, run_detection, run_pipeline, run_saturation, DetectionResults, PipelineConfig, PipelineError, PipelineInputs,
    SaturationAnalysis, SaturationTarget, KNOWN_PARAMETERS,
};
use crate::trajectory::{load_dataset, parse_regions, Dataset, DatasetSchema, MapRegion};
use crate::Execution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_GAPS: i32 = 3;
pub const EXIT_UNDERMINED: i32 = 4;
pub const EXIT_UNDETERMINED: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "scenario-completeness", version, about = "Completeness arguments for driving scenario concepts")]
pub struct Cli {
    /// Seed for all subsampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Config file of `key: value` lines; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub execution: Option<ExecutionArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExecutionArg {
    Serial,
    Parallel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and structurally validate a GSN document.
    Validate { graph: PathBuf },
    /// Segment, detect base scenarios and report classification gaps.
    Detect(DataArgs),
    /// Discovery curves, coverage estimates and saturation fits.
    Saturate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        sat: SaturationArgs,
    },
    /// Full pipeline: verdicts, status propagation, report.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        sat: SaturationArgs,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        bindings: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Recording prefix: `<prefix>_tracks.csv`, `<prefix>_tracksMeta.csv`,
    /// `<prefix>_recordingMeta.csv`.
    #[arg(long)]
    pub recording: Option<PathBuf>,
    #[arg(long)]
    pub regions: Option<PathBuf>,
    /// Rule document; the shipped defaults when omitted.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub min_duration: Option<f64>,
    #[arg(long)]
    pub bridge_gap: Option<f64>,
    #[arg(long)]
    pub relevance_radius: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SaturationArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// `<parameter>=<width>`, repeatable.
    #[arg(long = "bin-width")]
    pub bin_widths: Vec<String>,
    /// Read type labels (one per line) instead of running detection.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

/// Config file values, paths resolved against the file's directory.
#[derive(Debug, Default)]
struct ConfigFile {
    values: BTreeMap<String, String>,
    base: PathBuf,
}

const CONFIG_KEYS: [&str; 17] = [
    "recording",
    "regions",
    "rules",
    "schema",
    "graph",
    "bindings",
    "labels",
    "out",
    "seed",
    "execution",
    "min_duration",
    "bridge_gap",
    "relevance_radius",
    "sizes",
    "repetitions",
    "bin_width.start_speed",
    "timestamp",
];

impl ConfigFile {
    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let entries = kv::parse(&text).with_context(|| format!("config {}", path.display()))?;
        let mut values = BTreeMap::new();
        for e in entries {
            if !CONFIG_KEYS.contains(&e.key.as_str()) {
                bail!("config {}: line {}: unknown key `{}`", path.display(), e.line, e.key);
            }
            values.insert(e.key, e.value);
        }
        Ok(ConfigFile {
            values,
            base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(|v| self.base.join(v))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| anyhow::anyhow!("config key `{key}`: cannot parse `{v}`")))
            .transpose()
    }
}

struct RunContext {
    cfg: ConfigFile,
    out: PathBuf,
    seed: u64,
    execution: Execution,
}

fn pick_path(flag: &Option<PathBuf>, cfg: &ConfigFile, key: &str) -> Option<PathBuf> {
    flag.clone().or_else(|| cfg.path(key))
}

fn require(path: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.ok_or_else(|| anyhow::anyhow!("missing --{what} (or `{what}` in the config file)"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn recording_files(prefix: &Path) -> [PathBuf; 3] {
    let p = prefix.as_os_str().to_string_lossy().into_owned();
    [
        PathBuf::from(format!("{p}_tracks.csv")),
        PathBuf::from(format!("{p}_tracksMeta.csv")),
        PathBuf::from(format!("{p}_recordingMeta.csv")),
    ]
}

struct Loaded {
    dataset: Dataset,
    schema: DatasetSchema,
    regions: Vec<MapRegion>,
    rules: RuleSet,
    inputs: Vec<PathBuf>,
}

fn load_inputs(data: &DataArgs, ctx: &RunContext) -> Result<Loaded> {
    let schema_path = pick_path(&data.schema, &ctx.cfg, "schema");
    let schema = match &schema_path {
        Some(p) => DatasetSchema::parse(&read(p)?).with_context(|| format!("schema {}", p.display()))?,
        None => DatasetSchema::default(),
    };
    let recording = require(pick_path(&data.recording, &ctx.cfg, "recording"), "recording")?;
    let [tracks, meta, rec] = recording_files(&recording);
    let dataset = load_dataset(&tracks, &meta, &rec, &schema).context("loading recording")?;
    let regions_path = require(pick_path(&data.regions, &ctx.cfg, "regions"), "regions")?;
    let regions = parse_regions(&read(&regions_path)?).with_context(|| format!("regions {}", regions_path.display()))?;
    let rules_path = pick_path(&data.rules, &ctx.cfg, "rules");
    let rules = match &rules_path {
        Some(p) => compile_rules(&read(p)?).with_context(|| format!("rules {}", p.display()))?,
        None => RuleSet::default_rules(),
    };
    let mut inputs = vec![tracks, meta, rec, regions_path];
    inputs.extend(schema_path);
    inputs.extend(rules_path);
    Ok(Loaded {
        dataset,
        schema,
        regions,
        rules,
        inputs,
    })
}

fn pipeline_config(data: &DataArgs, sat: Option<&SaturationArgs>, ctx: &RunContext) -> Result<PipelineConfig> {
    let cfg = &ctx.cfg;
    let mut c = PipelineConfig {
        seed: ctx.seed,
        execution: ctx.execution,
        ..PipelineConfig::default()
    };
    c.detect.min_duration = data.min_duration.or(cfg.parsed("min_duration")?).unwrap_or(c.detect.min_duration);
    c.detect.bridge_gap = data.bridge_gap.or(cfg.parsed("bridge_gap")?).unwrap_or(c.detect.bridge_gap);
    c.relevance_radius = data
        .relevance_radius
        .or(cfg.parsed("relevance_radius")?)
        .unwrap_or(c.relevance_radius);
    c.timestamp = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v.trim().parse().context("SOURCE_DATE_EPOCH is not an integer")?,
        Err(_) => cfg.parsed("timestamp")?.unwrap_or(0),
    };
    c.repetitions = sat
        .and_then(|s| s.repetitions)
        .or(cfg.parsed("repetitions")?)
        .unwrap_or(DEFAULT_REPETITIONS);
    c.sizes = match sat.and_then(|s| s.sizes.clone()) {
        Some(s) => Some(s),
        None => cfg
            .values
            .get("sizes")
            .map(|v| {
                v.split([',', ' '])
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| anyhow::anyhow!("config key `sizes`: bad size `{t}`")))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?,
    };
    if let Some(w) = cfg.parsed::<f64>("bin_width.start_speed")? {
        c.bin_widths.insert("start_speed".into(), w);
    }
    for spec in sat.map(|s| s.bin_widths.as_slice()).unwrap_or_default() {
        let (name, w) = spec
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("--bin-width expects `<parameter>=<width>`, got `{spec}`"))?;
        if !KNOWN_PARAMETERS.contains(&name) {
            bail!("unknown parameter `{name}`; known: {}", KNOWN_PARAMETERS.join(", "));
        }
        let w: f64 = w.parse().with_context(|| format!("bad bin width `{w}`"))?;
        c.bin_widths.insert(name.to_string(), w);
    }
    Ok(c)
}

/// Files to write, committed only after every stage succeeded.
#[derive(Default)]
struct Outputs(Vec<(String, Vec<u8>)>);

impl Outputs {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.0.push((name.into(), bytes));
    }

    fn commit(self, dir: &Path, inputs: &[PathBuf]) -> Result<()> {
        let canon_dir = fs::canonicalize(dir).ok();
        for p in inputs {
            if p == dir || (canon_dir.is_some() && fs::canonicalize(p).ok() == canon_dir) {
                bail!("input {} is the output directory", p.display());
            }
        }
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let canon_dir = fs::canonicalize(dir)?;
        for (name, _) in &self.0 {
            let target = canon_dir.join(name);
            for p in inputs {
                if fs::canonicalize(p).ok().as_ref() == Some(&target) {
                    bail!("output {} would overwrite input {}", name, p.display());
                }
            }
        }
        for (name, bytes) in &self.0 {
            let tmp = dir.join(format!(".{name}.tmp"));
            fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, dir.join(name)).with_context(|| format!("writing {name}"))?;
        }
        Ok(())
    }
}

fn csv_bytes<F>(f: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn detection_outputs(out: &mut Outputs, d: &DetectionResults) -> Result<()> {
    out.add("envelopes.csv", csv_bytes(|b| write_envelopes_csv(b, &d.envelopes))?);
    out.add("instances.csv", csv_bytes(|b| write_instances_csv(b, &d.instances))?);
    out.add("gaps.csv", csv_bytes(|b| write_gaps_csv(b, &d.gaps))?);
    let mut unc = csv::Writer::from_writer(Vec::new());
    unc.write_record(["track_id", "frame", "x", "y"])?;
    for u in &d.uncovered {
        unc.write_record([u.track_id.as_str(), &u.frame.to_string(), &u.x.to_string(), &u.y.to_string()])?;
    }
    out.add("uncovered.csv", unc.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?);
    let mut s = String::new();
    s.push_str(&format!("envelopes: {}\n", d.envelopes.len()));
    s.push_str(&format!("instances: {}\n", d.instances.len()));
    for (t, c) in &d.summary.counts {
        s.push_str(&format!("count.{t}: {c}\n"));
    }
    s.push_str(&format!("gaps: {}\n", d.gaps.len()));
    s.push_str(&format!("spatial_uncovered: {}\n", d.uncovered.len()));
    s.push_str(&format!("lint_findings: {}\n", d.lint.len()));
    out.add("detect_summary.txt", s.into_bytes());
    Ok(())
}

fn file_stem(target: &SaturationTarget) -> String {
    match target {
        SaturationTarget::Types => "types".into(),
        SaturationTarget::Parameter(p) => p.clone(),
    }
}

fn saturation_outputs(out: &mut Outputs, sats: &[SaturationAnalysis], labels: &BTreeMap<String, Vec<String>>) -> Result<()> {
    let mut cov = String::from("target,method,singletons,total,estimate\n");
    for s in sats {
        let stem = file_stem(&s.target);
        if let Some(c) = &s.curve {
            let mut buf = Vec::new();
            write_curve_csv(&mut buf, c)?;
            out.add(format!("saturation_{stem}.csv"), buf);
            if let Some(l) = labels.get(&stem) {
                let mut r = String::from("n,expected_distinct\n");
                for &n in &c.sample_sizes {
                    r.push_str(&format!("{n},{}\n", expected_distinct(l, n)?));
                }
                out.add(format!("rarefaction_{stem}.csv"), r.into_bytes());
            }
        }
        if let Some(f) = &s.fit {
            let mut buf = Vec::new();
            write_fit_csv(&mut buf, f)?;
            out.add(format!("fit_{stem}.csv"), buf);
        }
        if let Some(c) = &s.coverage {
            cov.push_str(&format!("{},{},{},{},{}\n", s.target, c.method, c.singletons, c.total, c.estimate));
        }
    }
    out.add("coverage.csv", cov.into_bytes());
    Ok(())
}

fn detection_labels(d: &DetectionResults, config: &PipelineConfig) -> BTreeMap<String, Vec<String>> {
    let mut m = BTreeMap::new();
    m.insert("types".to_string(), d.instances.iter().map(|i| i.type_name.clone()).collect());
    if let Some(&w) = config.bin_widths.get("start_speed") {
        let speeds: Vec<f64> = d.summary.start_speeds.iter().map(|s| s.speed).collect();
        if let Ok(l) = crate::coverage::bin_labels(&speeds, w) {
            m.insert("start_speed".to_string(), l);
        }
    }
    m
}

fn cmd_validate(graph: &Path) -> Result<i32> {
    let g = parse_graph(&read(graph)?).with_context(|| format!("parsing {}", graph.display()))?;
    let violations = validate_structure(&g);
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("valid: {} nodes, {} edges", g.len(), g.edges().len());
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_VIOLATIONS)
    }
}

fn cmd_detect(data: &DataArgs, ctx: &RunContext) -> Result<i32> {
    let loaded = load_inputs(data, ctx)?;
    let config = pipeline_config(data, None, ctx)?;
    let d = run_detection(&loaded.dataset, &loaded.schema, &loaded.regions, &loaded.rules, &config)?;
    let mut out = Outputs::default();
    detection_outputs(&mut out, &d)?;
    out.commit(&ctx.out, &loaded.inputs)?;
    println!(
        "{} envelopes, {} instances, {} gaps",
        d.envelopes.len(),
        d.instances.len(),
        d.gaps.len()
    );
    Ok(if d.gaps.is_empty() { EXIT_OK } else { EXIT_GAPS })
}

fn cmd_saturate(data: &DataArgs, sat: &SaturationArgs, ctx: &RunContext) -> Result<i32> {
    let config = pipeline_config(data, Some(sat), ctx)?;
    let mut out = Outputs::default();
    let labels_path = pick_path(&sat.labels, &ctx.cfg, "labels");
    let (sats, labels, inputs) = match labels_path {
        Some(p) => {
            let labels: Vec<String> = read(&p)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from)
                .collect();
            let sats = vec![label_saturation(SaturationTarget::Types, &labels, &config)?];
            (sats, BTreeMap::from([("types".to_string(), labels)]), vec![p])
        }
        None => {
            let loaded = load_inputs(data, ctx)?;
            let d = run_detection(&loaded.dataset, &loaded.schema, &loaded.regions, &loaded.rules, &config)?;
            let sats = run_saturation(&d, &config)?;
            (sats, detection_labels(&d, &config), loaded.inputs)
        }
    };
    saturation_outputs(&mut out, &sats, &labels)?;
    out.commit(&ctx.out, &inputs)?;
    for s in &sats {
        match &s.coverage {
            Some(c) => println!("{}: N={} distinct={} coverage={}", s.target, s.observations, s.distinct, c.estimate),
            None => println!("{}: no observations", s.target),
        }
    }
    Ok(EXIT_OK)
}

fn cmd_evaluate(
    data: &DataArgs,
    sat: &SaturationArgs,
    graph: &Option<PathBuf>,
    bindings: &Option<PathBuf>,
    ctx: &RunContext,
) -> Result<i32> {
    let graph_path = require(pick_path(graph, &ctx.cfg, "graph"), "graph")?;
    let bindings_path = require(pick_path(bindings, &ctx.cfg, "bindings"), "bindings")?;
    let g = parse_graph(&read(&graph_path)?).with_context(|| format!("parsing {}", graph_path.display()))?;
    let b = parse_bindings(&read(&bindings_path)?).with_context(|| format!("bindings {}", bindings_path.display()))?;
    let loaded = load_inputs(data, ctx)?;
    let config = pipeline_config(data, Some(sat), ctx)?;
    let inputs = PipelineInputs {
        graph: &g,
        dataset: &loaded.dataset,
        schema: &loaded.schema,
        regions: &loaded.regions,
        rules: &loaded.rules,
        bindings: &b,
    };
    let (updated, report) = match run_pipeline(&inputs, &config) {
        Err(PipelineError::InvalidGraph(violations)) => {
            for v in &violations {
                println!("{v}");
            }
            return Ok(EXIT_VIOLATIONS);
        }
        r => r?,
    };
    let mut out = Outputs::default();
    detection_outputs(&mut out, &report.results.detection)?;
    saturation_outputs(
        &mut out,
        &report.results.saturation,
        &detection_labels(&report.results.detection, &config),
    )?;
    out.add("report.txt", report.render().into_bytes());
    out.add("graph.gsn", export_graph(&updated, ExportMode::Document).into_bytes());
    out.add("graph.tgf", export_graph(&updated, ExportMode::Renderable).into_bytes());
    let mut all_inputs = loaded.inputs;
    all_inputs.extend([graph_path, bindings_path]);
    out.commit(&ctx.out, &all_inputs)?;
    let top = report.top_goal;
    println!("top goal: {}", top.map_or("none".to_string(), |s| s.to_string()));
    Ok(match top {
        Some(NodeStatus::Supported) => EXIT_OK,
        Some(NodeStatus::Undermined) => EXIT_UNDERMINED,
        _ => EXIT_UNDETERMINED,
    })
}

fn dispatch(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let execution = match cli.execution {
        Some(ExecutionArg::Serial) => Execution::Serial,
        Some(ExecutionArg::Parallel) => Execution::Parallel,
        None => match cfg.values.get("execution").map(String::as_str) {
            None | Some("parallel") => Execution::Parallel,
            Some("serial") => Execution::Serial,
            Some(other) => bail!("config key `execution`: expected serial or parallel, got `{other}`"),
        },
    };
    let ctx = RunContext {
        out: cli.out.clone().or_else(|| cfg.path("out")).unwrap_or_else(|| PathBuf::from("out")),
        seed: match cli.seed {
            Some(s) => s,
            None => cfg.parsed("seed")?.unwrap_or(0),
        },
        execution,
        cfg,
    };
    match &cli.command {
        Command::Validate { graph } => cmd_validate(graph),
        Command::Detect(data) => cmd_detect(data, &ctx),
        Command::Saturate { data, sat } => cmd_saturate(data, sat, &ctx),
        Command::Evaluate {
            data,
            sat,
            graph,
            bindings,
        } => cmd_evaluate(data, sat, graph, bindings, &ctx),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e:#}");
            EXIT_ERROR
        }
    }
}
