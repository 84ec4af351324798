//! Trajectory recordings in the inD column layout, plus map regions.
//!
//! Three CSV files make up one recording: the per-frame track rows, one
//! metadata row per track and one row of recording metadata. Header names
//! can be remapped with a [`DatasetSchema`]. Every object class must be on
//! the schema's whitelist; anything else is a load error rather than a
//! silent "other" bucket.

mod load;
mod region;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

pub use load::{load_dataset, load_dataset_from_readers, AngleUnit, DatasetSchema, LoadError, SchemaError};
pub use region::{parse_regions, point_in_region, MapRegion, RegionError};

/// Track identifier. Orders numerically when both ids are integers, so
/// `2 < 10`; non-numeric ids sort after numeric ones, lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrackId(String);

impl TrackId {
    pub fn new(id: impl Into<String>) -> Self {
        TrackId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<u64> {
        if self.0.len() > 1 && self.0.starts_with('0') {
            return None;
        }
        self.0.parse().ok()
    }
}

impl Ord for TrackId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for TrackId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TrackId {
    fn from(s: &str) -> Self {
        TrackId::new(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordingMeta {
    pub recording_id: String,
    /// Frames per second, strictly positive.
    pub frame_rate: f64,
    pub location_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub frame: i64,
    pub x: f64,
    pub y: f64,
    /// Radians in [-π, π).
    pub heading: f64,
    pub speed: f64,
}

/// Wraps an angle into [-π, π).
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("track `{0}` has no points")]
    Empty(TrackId),
    #[error("track `{track}`: frames not contiguous, expected {expected} found {found}")]
    NonContiguous { track: TrackId, expected: i64, found: i64 },
    #[error("track `{track}` frame {frame}: {reason}")]
    BadPoint { track: TrackId, frame: i64, reason: String },
    #[error("track `{track}`: frame {frame} outside [{first}, {last}]")]
    FrameOutOfRange { track: TrackId, frame: i64, first: i64, last: i64 },
    #[error("duplicate track id `{0}`")]
    DuplicateTrack(TrackId),
    #[error("frame rate must be positive, got {0}")]
    BadFrameRate(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    track_id: TrackId,
    object_class: String,
    points: Vec<TrackPoint>,
}

impl Trajectory {
    /// Points must be frame-ordered with step 1, finite, with non-negative
    /// speed. Headings are wrapped into [-π, π).
    pub fn new(track_id: TrackId, object_class: impl Into<String>, mut points: Vec<TrackPoint>) -> Result<Self, TrackError> {
        let Some(first) = points.first().map(|p| p.frame) else {
            return Err(TrackError::Empty(track_id));
        };
        for (i, p) in points.iter_mut().enumerate() {
            let expected = first + i as i64;
            if p.frame != expected {
                return Err(TrackError::NonContiguous {
                    track: track_id,
                    expected,
                    found: p.frame,
                });
            }
            if ![p.x, p.y, p.heading, p.speed].iter().all(|v| v.is_finite()) {
                return Err(TrackError::BadPoint {
                    track: track_id,
                    frame: p.frame,
                    reason: "non-finite value".into(),
                });
            }
            if p.speed < 0.0 {
                return Err(TrackError::BadPoint {
                    track: track_id,
                    frame: p.frame,
                    reason: "negative speed".into(),
                });
            }
            p.heading = wrap_angle(p.heading);
        }
        Ok(Trajectory {
            track_id,
            object_class: object_class.into(),
            points,
        })
    }

    pub fn track_id(&self) -> &TrackId {
        &self.track_id
    }

    pub fn object_class(&self) -> &str {
        &self.object_class
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn first_frame(&self) -> i64 {
        self.points[0].frame
    }

    pub fn last_frame(&self) -> i64 {
        self.points[self.points.len() - 1].frame
    }

    /// The point at `frame`, if the track exists then.
    pub fn at(&self, frame: i64) -> Option<&TrackPoint> {
        let idx = frame.checked_sub(self.first_frame())?;
        usize::try_from(idx).ok().and_then(|i| self.points.get(i))
    }

    pub fn position_at(&self, frame: i64) -> Result<&TrackPoint, TrackError> {
        self.at(frame).ok_or_else(|| TrackError::FrameOutOfRange {
            track: self.track_id.clone(),
            frame,
            first: self.first_frame(),
            last: self.last_frame(),
        })
    }
}

/// Free-function form of [`Trajectory::position_at`].
pub fn position_at(trajectory: &Trajectory, frame: i64) -> Result<&TrackPoint, TrackError> {
    trajectory.position_at(frame)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    meta: RecordingMeta,
    tracks: BTreeMap<TrackId, Trajectory>,
}

impl Dataset {
    pub fn new(meta: RecordingMeta, tracks: impl IntoIterator<Item = Trajectory>) -> Result<Self, TrackError> {
        if !(meta.frame_rate.is_finite() && meta.frame_rate > 0.0) {
            return Err(TrackError::BadFrameRate(meta.frame_rate));
        }
        let mut map = BTreeMap::new();
        for t in tracks {
            let id = t.track_id.clone();
            if map.insert(id.clone(), t).is_some() {
                return Err(TrackError::DuplicateTrack(id));
            }
        }
        Ok(Dataset { meta, tracks: map })
    }

    pub fn meta(&self) -> &RecordingMeta {
        &self.meta
    }

    pub fn frame_rate(&self) -> f64 {
        self.meta.frame_rate
    }

    pub fn track(&self, id: &TrackId) -> Option<&Trajectory> {
        self.tracks.get(id)
    }

    /// Tracks in id order.
    pub fn tracks(&self) -> impl Iterator<Item = &Trajectory> {
        self.tracks.values()
    }

    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    pub fn point_count(&self) -> usize {
        self.tracks.values().map(|t| t.points.len()).sum()
    }
}
