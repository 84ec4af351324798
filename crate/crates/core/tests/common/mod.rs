#![allow(dead_code)]
//! Shared helpers for the integration tests: random argument graphs, an
//! independent recursive status evaluator, fixture access and a synthetic
//! recording generator.

pub mod frame_oracle;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scenario_completeness::gsn::{
    validate_structure, ArgumentGraph, ArgumentNode, EdgeKind, NodeKind, NodeStatus, Outcome,
};
use scenario_completeness::trajectory::{load_dataset, parse_regions, Dataset, DatasetSchema, MapRegion};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn scene_dirs() -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(fixtures().join("scenes"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    dirs
}

pub fn scene_prefix(dir: &Path) -> PathBuf {
    dir.join("00")
}

pub fn load_scene(dir: &Path) -> (Dataset, Vec<MapRegion>) {
    let p = |f: &str| dir.join(f);
    let ds = load_dataset(
        &p("00_tracks.csv"),
        &p("00_tracksMeta.csv"),
        &p("00_recordingMeta.csv"),
        &DatasetSchema::default(),
    )
    .unwrap();
    let regions = parse_regions(&fs::read_to_string(p("regions.txt")).unwrap()).unwrap();
    (ds, regions)
}

// ---------------------------------------------------------------------------
// Random argument graphs

const KIND_POOL: [NodeKind; 4] = [NodeKind::Goal, NodeKind::Strategy, NodeKind::CounterHypothesis, NodeKind::Evidence];

fn prefix(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Goal => "G",
        NodeKind::Strategy => "S",
        NodeKind::CounterHypothesis => "CH",
        NodeKind::Evidence => "E",
        NodeKind::Assumption => "A",
        NodeKind::Context => "C",
    }
}

/// One attempt: nodes in random kinds, edges only from lower to higher index
/// (so acyclic), strategies without subgoals marked terminal. `None` when
/// the result is not structurally valid.
fn attempt(rng: &mut ChaCha8Rng, max_nodes: usize) -> Option<ArgumentGraph> {
    let n = rng.gen_range(3..=max_nodes);
    let mut kinds = vec![NodeKind::Goal];
    for _ in 1..n {
        kinds.push(KIND_POOL[rng.gen_range(0..KIND_POOL.len())]);
    }
    let ids: Vec<String> = kinds.iter().enumerate().map(|(i, k)| format!("{}{i}", prefix(*k))).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for kind in [EdgeKind::SupportedBy, EdgeKind::ChallengedBy] {
                if kind.permits(kinds[i], kinds[j]) && rng.gen_bool(0.45) {
                    edges.push((i, kind, j));
                }
            }
        }
    }
    let mut g = ArgumentGraph::new();
    for (i, k) in kinds.iter().enumerate() {
        let mut node = ArgumentNode::new(ids[i].clone(), *k, format!("statement {i}"));
        if *k == NodeKind::Strategy {
            node.terminal = !edges.iter().any(|&(a, e, b)| a == i && e == EdgeKind::SupportedBy && kinds[b] == NodeKind::Goal);
        }
        g.add_node(node).unwrap();
    }
    for &(a, kind, b) in &edges {
        g.add_edge(&ids[a], kind, &ids[b]).unwrap();
    }
    if rng.gen_bool(0.2) {
        g.add_node(ArgumentNode::new("C-x", NodeKind::Context, "context")).unwrap();
        g.add_edge(&ids[0], EdgeKind::InContextOf, "C-x").unwrap();
    }
    validate_structure(&g).is_empty().then_some(g)
}

/// A structurally valid graph with at most `max_nodes` argument nodes (plus
/// possibly one context node), deterministic in `seed`.
pub fn random_valid_graph(seed: u64, max_nodes: usize) -> ArgumentGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(g) = attempt(&mut rng, max_nodes) {
            return g;
        }
    }
}

pub fn evidence_ids(g: &ArgumentGraph) -> Vec<String> {
    g.nodes().filter(|n| n.kind == NodeKind::Evidence).map(|n| n.id.clone()).collect()
}

/// Verdict sets tried for each evidence node.
pub fn verdict_options() -> Vec<Vec<Outcome>> {
    vec![
        vec![],
        vec![Outcome::Refuting],
        vec![Outcome::Confirming],
        vec![Outcome::Inconclusive],
        vec![Outcome::Refuting, Outcome::Confirming],
    ]
}

// ---------------------------------------------------------------------------
// Recursive status oracle, written directly from the status definitions.

pub struct Oracle<'a> {
    kinds: HashMap<&'a str, NodeKind>,
    out: HashMap<&'a str, Vec<(EdgeKind, &'a str)>>,
    verdicts: HashMap<&'a str, Vec<Outcome>>,
}

impl<'a> Oracle<'a> {
    pub fn new(g: &'a ArgumentGraph) -> Self {
        let mut out: HashMap<&str, Vec<(EdgeKind, &str)>> = HashMap::new();
        for e in g.edges() {
            out.entry(e.from.as_str()).or_default().push((e.kind, e.to.as_str()));
        }
        Oracle {
            kinds: g.nodes().map(|n| (n.id.as_str(), n.kind)).collect(),
            out,
            verdicts: g
                .nodes()
                .map(|n| (n.id.as_str(), n.verdicts.iter().map(|v| v.outcome).collect()))
                .collect(),
        }
    }

    fn children(&self, id: &str, kind: EdgeKind) -> Vec<&'a str> {
        self.out
            .get(id)
            .map(|v| v.iter().filter(|(k, _)| *k == kind).map(|(_, t)| *t).collect())
            .unwrap_or_default()
    }

    fn evidence_outcomes(&self, id: &str) -> Vec<Outcome> {
        self.verdicts[id].clone()
    }

    pub fn status(&self, id: &str) -> Option<NodeStatus> {
        match self.kinds[id] {
            NodeKind::CounterHypothesis => {
                let all: Vec<Outcome> = self
                    .children(id, EdgeKind::SupportedBy)
                    .into_iter()
                    .flat_map(|e| self.evidence_outcomes(e))
                    .collect();
                Some(if all.contains(&Outcome::Confirming) {
                    NodeStatus::Confirmed
                } else if all.contains(&Outcome::Refuting) {
                    NodeStatus::Refuted
                } else {
                    NodeStatus::Open
                })
            }
            NodeKind::Strategy => {
                let chs: Vec<NodeStatus> =
                    self.children(id, EdgeKind::ChallengedBy).into_iter().map(|c| self.status(c).unwrap()).collect();
                let subs: Vec<NodeStatus> =
                    self.children(id, EdgeKind::SupportedBy).into_iter().map(|c| self.status(c).unwrap()).collect();
                if chs.iter().any(|s| *s == NodeStatus::Confirmed) || subs.iter().any(|s| *s == NodeStatus::Undermined) {
                    Some(NodeStatus::Undermined)
                } else if chs.iter().all(|s| *s == NodeStatus::Refuted) && subs.iter().all(|s| *s == NodeStatus::Supported) {
                    Some(NodeStatus::Supported)
                } else {
                    Some(NodeStatus::Undetermined)
                }
            }
            NodeKind::Goal => {
                let sup: Vec<NodeStatus> = self
                    .children(id, EdgeKind::SupportedBy)
                    .into_iter()
                    .map(|c| match self.kinds[c] {
                        NodeKind::Evidence => {
                            let o = self.evidence_outcomes(c);
                            if o.contains(&Outcome::Confirming) {
                                NodeStatus::Undermined
                            } else if o.contains(&Outcome::Refuting) {
                                NodeStatus::Supported
                            } else {
                                NodeStatus::Undetermined
                            }
                        }
                        _ => self.status(c).unwrap(),
                    })
                    .collect();
                Some(if sup.contains(&NodeStatus::Supported) {
                    NodeStatus::Supported
                } else if !sup.is_empty() && sup.iter().all(|s| *s == NodeStatus::Undermined) {
                    NodeStatus::Undermined
                } else {
                    NodeStatus::Undetermined
                })
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Subsampling oracle

/// Mean distinct count over every size-`n` subset of `labels`, as a reduced
/// fraction (numerator, denominator).
pub fn enumerate_mean_distinct(labels: &[&str], n: usize) -> (u128, u128) {
    let total = labels.len();
    let (mut sum, mut count) = (0u128, 0u128);
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let mut seen: Vec<&str> = (0..total).filter(|i| mask >> i & 1 == 1).map(|i| labels[i]).collect();
        seen.sort();
        seen.dedup();
        sum += seen.len() as u128;
        count += 1;
    }
    let g = gcd(sum, count);
    (sum / g, count / g)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// Synthetic recordings

/// Writes an inD-layout recording with `tracks` straight-line tracks through
/// a 200 m × 200 m area split into four regions. Returns (prefix, regions
/// file, total track rows).
pub fn write_synthetic_recording(dir: &Path, tracks: usize, seed: u64) -> (PathBuf, PathBuf, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = ["car", "car", "car", "truck_bus", "pedestrian", "bicycle"];
    let mut meta = String::from("recordingId,trackId,initialFrame,finalFrame,numFrames,class\n");
    let mut rows: Vec<(i64, usize, String)> = Vec::new();
    for id in 0..tracks {
        let class = classes[rng.gen_range(0..classes.len())];
        let speed = match class {
            "pedestrian" => rng.gen_range(0.8..1.8),
            "bicycle" => rng.gen_range(3.0..6.0),
            _ => rng.gen_range(4.0..14.0),
        };
        let heading = rng.gen_range(0..4) as f64 * PI / 2.0 - PI + rng.gen_range(-0.05..0.05);
        let len = rng.gen_range(120..=260i64);
        let start = rng.gen_range(0..2_000i64);
        let (x0, y0) = (rng.gen_range(-80.0..80.0), rng.gen_range(-80.0..80.0));
        let _ = writeln!(meta, "0,{id},{start},{},{len},{class}", start + len - 1);
        for k in 0..len {
            let t = k as f64 / 25.0;
            // keep inside the area by reflecting at the border
            let reflect = |v: f64| {
                let m = (v + 100.0).rem_euclid(400.0);
                if m < 200.0 { m - 100.0 } else { 300.0 - m }
            };
            let x = reflect(x0 + heading.cos() * speed * t);
            let y = reflect(y0 + heading.sin() * speed * t);
            rows.push((
                start + k,
                id,
                format!(
                    "0,{id},{},{x:.4},{y:.4},{heading:.6},{:.4},{:.4}",
                    start + k,
                    heading.cos() * speed,
                    heading.sin() * speed
                ),
            ));
        }
    }
    rows.sort_by_key(|r| (r.0, r.1));
    let mut tracks_csv = String::from("recordingId,trackId,frame,xCenter,yCenter,heading,xVelocity,yVelocity\n");
    for (_, _, r) in &rows {
        tracks_csv.push_str(r);
        tracks_csv.push('\n');
    }
    fs::create_dir_all(dir).unwrap();
    let prefix = dir.join("00");
    fs::write(dir.join("00_tracks.csv"), tracks_csv).unwrap();
    fs::write(dir.join("00_tracksMeta.csv"), meta).unwrap();
    fs::write(dir.join("00_recordingMeta.csv"), "recordingId,locationId,frameRate\n0,1,25\n").unwrap();
    let regions = dir.join("regions.txt");
    fs::write(
        &regions,
        "region nw\n v -101 0\n v 0 0\n v 0 101\n v -101 101\n\
         region ne\n v 0 0\n v 101 0\n v 101 101\n v 0 101\n\
         region sw\n v -101 -101\n v 0 -101\n v 0 0\n v -101 0\n\
         region se\n v 0 -101\n v 101 -101\n v 101 0\n v 0 0\n",
    )
    .unwrap();
    (prefix, regions, rows.len())
}
