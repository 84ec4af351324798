//! Enveloping scenarios: the frames an ego spends inside one map region.

use std::io::Write;

use thiserror::Error;

use crate::trajectory::{Dataset, MapRegion, TrackId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopingScenario {
    pub envelope_id: String,
    pub region_id: String,
    pub ego_id: TrackId,
    pub enter_frame: i64,
    pub exit_frame: i64,
    /// The ego was already inside at its first recorded frame.
    pub truncated_start: bool,
    /// The ego was still inside at its last recorded frame.
    pub truncated_end: bool,
}

impl EnvelopingScenario {
    pub fn frames(&self) -> std::ops::RangeInclusive<i64> {
        self.enter_frame..=self.exit_frame
    }

    pub fn len(&self) -> usize {
        (self.exit_frame - self.enter_frame + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated_start || self.truncated_end
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SegmentError {
    #[error("regions `{0}` and `{1}` overlap")]
    OverlappingRegions(String, String),
    #[error("duplicate region id `{0}`")]
    DuplicateRegion(String),
    #[error("unknown ego track `{0}`")]
    UnknownEgo(TrackId),
}

/// Rejects duplicate ids and pairwise overlapping regions.
pub fn check_regions(regions: &[MapRegion]) -> Result<(), SegmentError> {
    for (i, a) in regions.iter().enumerate() {
        for b in &regions[i + 1..] {
            if a.id() == b.id() {
                return Err(SegmentError::DuplicateRegion(a.id().to_string()));
            }
            if a.overlaps(b) {
                let (x, y) = if a.id() <= b.id() { (a, b) } else { (b, a) };
                return Err(SegmentError::OverlappingRegions(x.id().to_string(), y.id().to_string()));
            }
        }
    }
    Ok(())
}

/// Cuts each ego's track into one envelope per maximal run of frames spent
/// inside a region. Output is sorted by (ego, enter frame, region).
pub fn segment(dataset: &Dataset, regions: &[MapRegion], ego_ids: &[TrackId]) -> Result<Vec<EnvelopingScenario>, SegmentError> {
    check_regions(regions)?;
    let mut out = Vec::new();
    for ego in ego_ids {
        let track = dataset.track(ego).ok_or_else(|| SegmentError::UnknownEgo(ego.clone()))?;
        let pts = track.points();
        for region in regions {
            let mut run: Option<usize> = None;
            for (i, p) in pts.iter().enumerate() {
                let inside = region.contains(p.x, p.y);
                match (inside, run) {
                    (true, None) => run = Some(i),
                    (false, Some(start)) => {
                        out.push(envelope(ego, region, pts[start].frame, pts[i - 1].frame, start == 0, false));
                        run = None;
                    }
                    _ => {}
                }
            }
            if let Some(start) = run {
                out.push(envelope(ego, region, pts[start].frame, track.last_frame(), start == 0, true));
            }
        }
    }
    out.sort_by(|a, b| {
        (&a.ego_id, a.enter_frame, &a.region_id).cmp(&(&b.ego_id, b.enter_frame, &b.region_id))
    });
    out.dedup_by(|a, b| a.envelope_id == b.envelope_id);
    Ok(out)
}

fn envelope(ego: &TrackId, region: &MapRegion, enter: i64, exit: i64, truncated_start: bool, truncated_end: bool) -> EnvelopingScenario {
    EnvelopingScenario {
        envelope_id: format!("{ego}/{}/{enter}", region.id()),
        region_id: region.id().to_string(),
        ego_id: ego.clone(),
        enter_frame: enter,
        exit_frame: exit,
        truncated_start,
        truncated_end,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncoveredSample {
    pub track_id: TrackId,
    pub frame: i64,
    pub x: f64,
    pub y: f64,
}

/// Every track point that lies in no region, in (track, frame) order.
pub fn check_spatial_coverage(dataset: &Dataset, regions: &[MapRegion]) -> Vec<UncoveredSample> {
    dataset
        .tracks()
        .flat_map(|t| {
            t.points()
                .iter()
                .filter(|p| !regions.iter().any(|r| r.contains(p.x, p.y)))
                .map(|p| UncoveredSample {
                    track_id: t.track_id().clone(),
                    frame: p.frame,
                    x: p.x,
                    y: p.y,
                })
        })
        .collect()
}

pub fn write_envelopes_csv<W: Write>(w: W, envelopes: &[EnvelopingScenario]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["envelope_id", "region_id", "ego_id", "enter_frame", "exit_frame"])?;
    for e in envelopes {
        wtr.write_record([
            e.envelope_id.as_str(),
            e.region_id.as_str(),
            e.ego_id.as_str(),
            &e.enter_frame.to_string(),
            &e.exit_frame.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{RecordingMeta, TrackPoint, Trajectory};

    fn square(id: &str, x0: f64, y0: f64, side: f64) -> MapRegion {
        MapRegion::new(id, vec![[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]]).unwrap()
    }

    fn dataset(xs: &[f64]) -> Dataset {
        let pts = xs
            .iter()
            .enumerate()
            .map(|(f, &x)| TrackPoint {
                frame: f as i64,
                x,
                y: 5.0,
                heading: 0.0,
                speed: 1.0,
            })
            .collect();
        let meta = RecordingMeta {
            recording_id: "0".into(),
            frame_rate: 10.0,
            location_id: "0".into(),
        };
        Dataset::new(meta, [Trajectory::new("1".into(), "car", pts).unwrap()]).unwrap()
    }

    #[test]
    fn single_crossing() {
        // x = frame - 5 + 0.5, inside [0, 10] for frames 5..=14
        let xs: Vec<f64> = (0..20).map(|f| f as f64 - 4.5).collect();
        let env = segment(&dataset(&xs), &[square("R", 0.0, 0.0, 10.0)], &["1".into()]).unwrap();
        assert_eq!(env.len(), 1);
        assert_eq!((env[0].enter_frame, env[0].exit_frame), (5, 14));
        assert!(!env[0].is_truncated());
    }

    #[test]
    fn re_entry_makes_two_envelopes() {
        let xs: Vec<f64> = (0..30)
            .map(|f| if (5..10).contains(&f) || (20..25).contains(&f) { 5.0 } else { 50.0 })
            .collect();
        let env = segment(&dataset(&xs), &[square("R", 0.0, 0.0, 10.0)], &["1".into()]).unwrap();
        let spans: Vec<_> = env.iter().map(|e| (e.enter_frame, e.exit_frame)).collect();
        assert_eq!(spans, [(5, 9), (20, 24)]);
    }

    #[test]
    fn never_inside_and_truncation() {
        let ds = dataset(&[50.0; 10]);
        assert!(segment(&ds, &[square("R", 0.0, 0.0, 10.0)], &["1".into()]).unwrap().is_empty());
        let ds = dataset(&[5.0; 10]);
        let env = segment(&ds, &[square("R", 0.0, 0.0, 10.0)], &["1".into()]).unwrap();
        assert!(env[0].truncated_start && env[0].truncated_end);
        assert_eq!(env[0].len(), 10);
    }

    #[test]
    fn shared_border_belongs_to_both_regions() {
        let ds = dataset(&[5.0, 10.0, 15.0]);
        let regions = [square("W", 0.0, 0.0, 10.0), square("E", 10.0, 0.0, 10.0)];
        let env = segment(&ds, &regions, &["1".into()]).unwrap();
        let got: Vec<_> = env.iter().map(|e| (e.region_id.as_str(), e.enter_frame, e.exit_frame)).collect();
        assert_eq!(got, [("W", 0, 1), ("E", 1, 2)]);
    }

    #[test]
    fn errors() {
        let ds = dataset(&[5.0]);
        let overlapping = [square("A", 0.0, 0.0, 10.0), square("B", 5.0, 0.0, 10.0)];
        assert_eq!(
            segment(&ds, &overlapping, &["1".into()]),
            Err(SegmentError::OverlappingRegions("A".into(), "B".into()))
        );
        assert_eq!(
            segment(&ds, &[square("A", 0.0, 0.0, 1.0)], &["9".into()]),
            Err(SegmentError::UnknownEgo("9".into()))
        );
    }

    #[test]
    fn coverage_reports_points_outside() {
        let ds = dataset(&[5.0, 15.0, 25.0]);
        assert_eq!(check_spatial_coverage(&ds, &[]).len(), 3);
        let regions = [square("W", 0.0, 0.0, 10.0), square("E", 10.0, 0.0, 10.0)];
        let gaps = check_spatial_coverage(&ds, &regions);
        assert_eq!(gaps.len(), 1);
        assert_eq!((gaps[0].frame, gaps[0].x), (2, 25.0));
    }

    #[test]
    fn csv_export() {
        let xs: Vec<f64> = (0..20).map(|f| f as f64 - 4.5).collect();
        let env = segment(&dataset(&xs), &[square("R", 0.0, 0.0, 10.0)], &["1".into()]).unwrap();
        let mut buf = Vec::new();
        write_envelopes_csv(&mut buf, &env).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "envelope_id,region_id,ego_id,enter_frame,exit_frame\n1/R/5,R,1,5,14\n"
        );
    }
}
