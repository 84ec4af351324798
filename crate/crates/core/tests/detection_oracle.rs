mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use scenario_completeness::detect::{detect, find_gaps, summarize, DetectParams, RuleSet};
use scenario_completeness::envelope::{segment, EnvelopingScenario};
use scenario_completeness::trajectory::{Dataset, MapRegion, RecordingMeta, TrackId, TrackPoint, Trajectory};
use scenario_completeness::Execution;

use common::frame_oracle::{brute_force, egos, expand, non_empty, smooth};

fn check_envelope(env: &EnvelopingScenario, ds: &Dataset, rules: &RuleSet) {
    let raw = brute_force(env, ds, rules);

    let exact = detect(env, ds, rules, &DetectParams::exact()).unwrap();
    assert_eq!(expand(&exact), non_empty(raw.clone()), "{}", env.envelope_id);

    let params = DetectParams::default();
    let smoothed = detect(env, ds, rules, &params).unwrap();
    assert_eq!(expand(&smoothed), smooth(&raw, ds.frame_rate(), &params), "{}", env.envelope_id);

    // ordering and ids
    for (k, i) in smoothed.iter().enumerate() {
        assert_eq!(i.instance_id, format!("{}#{k}", env.envelope_id));
    }
    assert!(smoothed.windows(2).all(|w| {
        (w[0].start_frame, &w[0].type_name, &w[0].object_id) <= (w[1].start_frame, &w[1].type_name, &w[1].object_id)
    }));

    // gaps are exactly the frames with no instance
    let covered: BTreeSet<i64> = smoothed.iter().flat_map(|i| i.frames()).collect();
    let gaps = find_gaps(env, &smoothed, 50.0, ds).unwrap();
    let gap_frames: BTreeSet<i64> = gaps.iter().flat_map(|g| g.start_frame..=g.end_frame).collect();
    let want: BTreeSet<i64> = env.frames().filter(|f| !covered.contains(f)).collect();
    assert_eq!(gap_frames, want);
    for g in &gaps {
        let ego = ds.track(&env.ego_id).unwrap();
        let near: BTreeSet<TrackId> = (g.start_frame..=g.end_frame)
            .flat_map(|f| {
                let e = ego.at(f).unwrap();
                ds.tracks()
                    .filter(|t| t.track_id() != &env.ego_id)
                    .filter(move |t| t.at(f).is_some_and(|o| (o.x - e.x).hypot(o.y - e.y) < 50.0))
                    .map(|t| t.track_id().clone())
            })
            .collect();
        assert_eq!(g.nearby_objects, near.into_iter().collect::<Vec<_>>());
        assert!(g.start_frame == env.enter_frame || covered.contains(&(g.start_frame - 1)));
        assert!(g.end_frame == env.exit_frame || covered.contains(&(g.end_frame + 1)));
    }
}

#[test]
fn fixtures_match_frame_level_oracle() {
    let rules = RuleSet::default_rules();
    for dir in common::scene_dirs() {
        let (ds, regions) = common::load_scene(&dir);
        for env in segment(&ds, &regions, &egos(&ds)).unwrap() {
            check_envelope(&env, &ds, &rules);
        }
    }
}

#[test]
fn fixtures_are_gap_free_and_each_rule_is_needed() {
    let rules = RuleSet::default_rules();
    let params = DetectParams::default();
    for dir in common::scene_dirs() {
        let (ds, regions) = common::load_scene(&dir);
        let envs = segment(&ds, &regions, &egos(&ds)).unwrap();
        assert!(!envs.is_empty());
        let mut used = BTreeSet::new();
        for env in &envs {
            let inst = detect(env, &ds, &rules, &params).unwrap();
            assert!(find_gaps(env, &inst, 50.0, &ds).unwrap().is_empty(), "{}", dir.display());
            used.extend(inst.iter().map(|i| i.type_name.clone()));
        }
        for t in used.iter().filter(|t| *t != "ego_alone") {
            let reduced = rules.without(t).unwrap();
            let gaps: usize = envs
                .iter()
                .map(|env| {
                    let inst = detect(env, &ds, &reduced, &params).unwrap();
                    find_gaps(env, &inst, 50.0, &ds).unwrap().len()
                })
                .sum();
            assert!(gaps > 0, "{} without {t}", dir.display());
        }
    }
}

#[test]
fn serial_and_parallel_detection_agree() {
    let rules = RuleSet::default_rules();
    for dir in common::scene_dirs() {
        let (ds, regions) = common::load_scene(&dir);
        let envs = segment(&ds, &regions, &egos(&ds)).unwrap();
        let p = DetectParams::default();
        let a = scenario_completeness::detect::detect_all(&envs, &ds, &rules, &p, Execution::Serial).unwrap();
        let b = scenario_completeness::detect::detect_all(&envs, &ds, &rules, &p, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn start_speeds_come_from_the_first_frame() {
    let rules = RuleSet::default_rules();
    for dir in common::scene_dirs() {
        let (ds, regions) = common::load_scene(&dir);
        let envs = segment(&ds, &regions, &egos(&ds)).unwrap();
        let inst: Vec<_> = envs
            .iter()
            .flat_map(|e| detect(e, &ds, &rules, &DetectParams::default()).unwrap())
            .collect();
        let s = summarize(&inst, &ds).unwrap();
        assert_eq!(s.total, inst.len());
        assert_eq!(s.counts.values().sum::<usize>(), inst.len());
        for (i, sp) in inst.iter().zip(&s.start_speeds) {
            let who = i.object_id.as_ref().unwrap_or(&i.ego_id);
            assert_eq!(sp.speed, ds.track(who).unwrap().at(i.start_frame).unwrap().speed);
        }
    }
}

fn random_scene(objects: Vec<(usize, f64, f64, f64, f64, i64, usize)>) -> Dataset {
    let classes = ["car", "truck_bus", "pedestrian", "bicycle"];
    let mut tracks = vec![Trajectory::new(
        "1".into(),
        "car",
        (0..120)
            .map(|f| TrackPoint { frame: f, x: f as f64 * 0.6, y: 0.0, heading: 0.0, speed: 6.0 })
            .collect(),
    )
    .unwrap()];
    for (k, (class, x0, y0, heading, speed, start, len)) in objects.into_iter().enumerate() {
        let pts = (0..len as i64)
            .map(|i| TrackPoint {
                frame: start + i,
                x: x0 + heading.cos() * speed * i as f64 / 10.0,
                y: y0 + heading.sin() * speed * i as f64 / 10.0,
                heading,
                speed,
            })
            .collect();
        tracks.push(Trajectory::new(TrackId::new((k + 2).to_string()), classes[class], pts).unwrap());
    }
    let meta = RecordingMeta { recording_id: "0".into(), frame_rate: 10.0, location_id: "0".into() };
    Dataset::new(meta, tracks).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_scenes_match_frame_level_oracle(
        objects in prop::collection::vec(
            (0usize..4, -40.0..100.0f64, -30.0..30.0f64, -3.1..3.1f64, 0.0..12.0f64, 0i64..100, 1usize..100),
            0..3,
        ),
    ) {
        let ds = random_scene(objects);
        let region = MapRegion::new("all", vec![[-1e3, -1e3], [1e3, -1e3], [1e3, 1e3], [-1e3, 1e3]]).unwrap();
        let rules = RuleSet::default_rules();
        for env in segment(&ds, &[region], &egos(&ds)).unwrap() {
            check_envelope(&env, &ds, &rules);
        }
    }
}
