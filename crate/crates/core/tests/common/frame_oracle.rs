//! Per-frame rule evaluation written independently of the interval
//! detector.

use std::collections::{BTreeMap, BTreeSet};

use scenario_completeness::detect::{Atom, BaseScenarioInstance, Condition, DetectParams, RuleSet};
use scenario_completeness::envelope::EnvelopingScenario;
use scenario_completeness::trajectory::{Dataset, DatasetSchema, TrackId, TrackPoint};

pub type Key = (String, Option<TrackId>);

/// Atom evaluation through unit vectors and cosines instead of wrapped
/// angles.
pub fn atom_holds(a: &Atom, e: &TrackPoint, o: &TrackPoint) -> bool {
    let (dx, dy) = (o.x - e.x, o.y - e.y);
    let d = (dx * dx + dy * dy).sqrt();
    let (ux, uy) = (e.heading.cos(), e.heading.sin());
    let cos_bearing = if d == 0.0 { 1.0 } else { (dx * ux + dy * uy) / d };
    let cos_rel = (o.heading - e.heading).cos();
    match *a {
        Atom::DistanceBelow(r) => d < r,
        Atom::DistanceAtLeast(r) => d >= r,
        Atom::ObjectAhead(h) => cos_bearing >= h.cos(),
        Atom::ObjectBehind(h) => -cos_bearing >= h.cos(),
        Atom::HeadingAligned(t) => cos_rel >= t.cos(),
        Atom::HeadingOpposed(t) => -cos_rel >= t.cos(),
        Atom::HeadingCrossing(lo, hi) => cos_rel <= lo.cos() && cos_rel >= hi.cos(),
        Atom::EgoSpeedAtLeast(v) => e.speed >= v,
        Atom::ObjectSpeedAtLeast(v) => o.speed >= v,
    }
}

/// Per-frame set of (type, object) pairs whose rule holds.
pub fn brute_force(env: &EnvelopingScenario, ds: &Dataset, rules: &RuleSet) -> BTreeMap<i64, BTreeSet<Key>> {
    let ego = ds.track(&env.ego_id).unwrap();
    let mut out = BTreeMap::new();
    for f in env.frames() {
        let e = ego.at(f).unwrap();
        let mut set = BTreeSet::new();
        for rule in rules.rules() {
            match &rule.condition {
                Condition::EgoAlone { radius } => {
                    let alone = ds
                        .tracks()
                        .filter(|t| t.track_id() != &env.ego_id)
                        .filter_map(|t| t.at(f))
                        .all(|o| ((o.x - e.x).powi(2) + (o.y - e.y).powi(2)).sqrt() >= *radius);
                    if alone {
                        set.insert((rule.type_name.clone(), None));
                    }
                }
                Condition::Interaction { object_classes, predicates } => {
                    for t in ds.tracks().filter(|t| t.track_id() != &env.ego_id) {
                        if !object_classes.iter().any(|c| c == t.object_class()) {
                            continue;
                        }
                        if let Some(o) = t.at(f) {
                            if predicates.iter().all(|a| atom_holds(a, e, o)) {
                                set.insert((rule.type_name.clone(), Some(t.track_id().clone())));
                            }
                        }
                    }
                }
            }
        }
        out.insert(f, set);
    }
    out
}

pub fn expand(instances: &[BaseScenarioInstance]) -> BTreeMap<i64, BTreeSet<Key>> {
    let mut out: BTreeMap<i64, BTreeSet<Key>> = BTreeMap::new();
    for i in instances {
        for f in i.frames() {
            out.entry(f).or_default().insert((i.type_name.clone(), i.object_id.clone()));
        }
    }
    out
}

/// Frame-level bridging and short-interval removal.
pub fn smooth(
    per_frame: &BTreeMap<i64, BTreeSet<Key>>,
    fps: f64,
    params: &DetectParams,
) -> BTreeMap<i64, BTreeSet<Key>> {
    let frames: Vec<i64> = per_frame.keys().copied().collect();
    let keys: BTreeSet<Key> = per_frame.values().flatten().cloned().collect();
    let max_gap = (params.bridge_gap * fps + 1e-9).floor() as i64;
    // runs per key after bridging
    let mut runs: Vec<(Key, i64, i64)> = Vec::new();
    for k in &keys {
        let on: Vec<i64> = frames.iter().copied().filter(|f| per_frame[f].contains(k)).collect();
        let mut cur: Option<(i64, i64)> = None;
        for f in on {
            cur = match cur {
                Some((s, e)) if f - e - 1 <= max_gap => Some((s, f)),
                Some((s, e)) => {
                    runs.push((k.clone(), s, e));
                    Some((f, f))
                }
                None => Some((f, f)),
            };
        }
        if let Some((s, e)) = cur {
            runs.push((k.clone(), s, e));
        }
    }
    let short = |s: i64, e: i64| ((e - s + 1) as f64) / fps < params.min_duration - 1e-9;
    let long_frames: BTreeSet<i64> = runs.iter().filter(|r| !short(r.1, r.2)).flat_map(|r| r.1..=r.2).collect();
    let mut out: BTreeMap<i64, BTreeSet<Key>> = BTreeMap::new();
    for (k, s, e) in runs {
        if short(s, e) && (s..=e).all(|f| long_frames.contains(&f)) {
            continue;
        }
        for f in s..=e {
            out.entry(f).or_default().insert(k.clone());
        }
    }
    out
}

pub fn non_empty(m: BTreeMap<i64, BTreeSet<Key>>) -> BTreeMap<i64, BTreeSet<Key>> {
    m.into_iter().filter(|(_, v)| !v.is_empty()).collect()
}

pub fn egos(ds: &Dataset) -> Vec<TrackId> {
    let schema = DatasetSchema::default();
    ds.tracks().filter(|t| schema.is_vehicle(t.object_class())).map(|t| t.track_id().clone()).collect()
}
