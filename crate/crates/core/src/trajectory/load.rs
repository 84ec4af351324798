use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{Dataset, RecordingMeta, TrackError, TrackId, TrackPoint, Trajectory};
use crate::kv;

/// Canonical column names, per file.
const TRACK_COLUMNS: [&str; 8] = [
    "recordingId",
    "trackId",
    "frame",
    "xCenter",
    "yCenter",
    "heading",
    "xVelocity",
    "yVelocity",
];
const META_COLUMNS: [&str; 4] = ["trackId", "class", "initialFrame", "finalFrame"];
const RECORDING_COLUMNS: [&str; 3] = ["recordingId", "frameRate", "locationId"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleUnit {
    #[default]
    Radians,
    Degrees,
}

/// Column mapping and class whitelist for a recording.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSchema {
    /// canonical name → header in the file; unmapped names are used as-is
    pub columns: HashMap<String, String>,
    /// Every object class that may appear.
    pub classes: Vec<String>,
    /// Classes whose tracks are iterated as ego.
    pub vehicle_classes: Vec<String>,
    pub heading_unit: AngleUnit,
}

impl Default for DatasetSchema {
    fn default() -> Self {
        DatasetSchema {
            columns: HashMap::new(),
            classes: ["car", "truck_bus", "pedestrian", "bicycle"].map(String::from).to_vec(),
            vehicle_classes: ["car", "truck_bus"].map(String::from).to_vec(),
            heading_unit: AngleUnit::Radians,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error(transparent)]
    Syntax(#[from] kv::KvError),
    #[error("line {line}: unknown schema key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {message}")]
    BadValue { line: usize, message: String },
}

impl DatasetSchema {
    /// Reads a schema file of `key: value` lines. Keys are canonical column
    /// names (value = header used in the files), `classes`,
    /// `vehicle_classes` (space-separated lists) and `heading_unit`
    /// (`radians` or `degrees`).
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let mut schema = DatasetSchema::default();
        let canonical: Vec<&str> = TRACK_COLUMNS
            .iter()
            .chain(META_COLUMNS.iter())
            .chain(RECORDING_COLUMNS.iter())
            .copied()
            .collect();
        for e in kv::parse(text)? {
            let list = |v: &str| v.split_whitespace().map(String::from).collect::<Vec<_>>();
            match e.key.as_str() {
                "classes" => schema.classes = list(&e.value),
                "vehicle_classes" => schema.vehicle_classes = list(&e.value),
                "heading_unit" => {
                    schema.heading_unit = match e.value.as_str() {
                        "radians" => AngleUnit::Radians,
                        "degrees" => AngleUnit::Degrees,
                        other => {
                            return Err(SchemaError::BadValue {
                                line: e.line,
                                message: format!("heading_unit must be radians or degrees, got `{other}`"),
                            })
                        }
                    }
                }
                k if canonical.contains(&k) => {
                    if e.value.is_empty() {
                        return Err(SchemaError::BadValue {
                            line: e.line,
                            message: format!("empty header name for `{k}`"),
                        });
                    }
                    schema.columns.insert(k.to_string(), e.value.clone());
                }
                _ => {
                    return Err(SchemaError::UnknownKey {
                        line: e.line,
                        key: e.key,
                    })
                }
            }
        }
        for class in schema.classes.iter().chain(&schema.vehicle_classes) {
            if class.starts_with('!') || class == "not" {
                return Err(SchemaError::BadValue {
                    line: 0,
                    message: format!("class `{class}` is a negation; list classes positively"),
                });
            }
        }
        if let Some(v) = schema.vehicle_classes.iter().find(|v| !schema.classes.contains(v)) {
            return Err(SchemaError::BadValue {
                line: 0,
                message: format!("vehicle class `{v}` is not in `classes`"),
            });
        }
        Ok(schema)
    }

    fn header<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.columns.get(canonical).map(String::as_str).unwrap_or(canonical)
    }

    pub fn is_vehicle(&self, class: &str) -> bool {
        self.vehicle_classes.iter().any(|c| c == class)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}: {source}")]
    Csv { file: String, source: csv::Error },
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file} row {row}: bad value `{value}` in column `{column}`")]
    BadValue { file: String, row: usize, column: String, value: String },
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error("track `{track}`: unknown object class `{class}` (not in the class whitelist)")]
    UnknownClass { track: TrackId, class: String },
    #[error("track `{0}` has rows but no metadata")]
    MissingMeta(TrackId),
    #[error("track `{0}` has metadata but no rows")]
    MissingPoints(TrackId),
    #[error("duplicate metadata for track `{0}`")]
    DuplicateMeta(TrackId),
    #[error("track `{track}`: metadata frames [{meta_first}, {meta_last}] differ from rows [{first}, {last}]")]
    SpanMismatch { track: TrackId, meta_first: i64, meta_last: i64, first: i64, last: i64 },
    #[error("recording metadata: {0}")]
    RecordingMeta(String),
    #[error("tracks belong to recording `{found}`, metadata describes `{expected}`")]
    RecordingMismatch { expected: String, found: String },
}

struct Table {
    file: String,
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(file: &str, reader: impl Read) -> Result<Self, LoadError> {
        let csv_err = |source| LoadError::Csv {
            file: file.to_string(),
            source,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = rdr.records().collect::<Result<Vec<_>, _>>().map_err(csv_err)?;
        Ok(Table {
            file: file.to_string(),
            headers,
            rows,
        })
    }

    fn column(&self, schema: &DatasetSchema, canonical: &str) -> Result<usize, LoadError> {
        let name = schema.header(canonical);
        self.headers.iter().position(|h| h == name).ok_or_else(|| LoadError::MissingColumn {
            file: self.file.clone(),
            column: name.to_string(),
        })
    }

    fn field<'a>(&self, row: usize, rec: &'a csv::StringRecord, idx: usize, column: &str) -> Result<&'a str, LoadError> {
        rec.get(idx).ok_or_else(|| LoadError::BadValue {
            file: self.file.clone(),
            row: row + 2,
            column: column.to_string(),
            value: String::new(),
        })
    }

    fn parse<T: std::str::FromStr>(&self, row: usize, rec: &csv::StringRecord, idx: usize, column: &str) -> Result<T, LoadError> {
        let raw = self.field(row, rec, idx, column)?;
        raw.parse().map_err(|_| LoadError::BadValue {
            file: self.file.clone(),
            row: row + 2,
            column: column.to_string(),
            value: raw.to_string(),
        })
    }
}

fn same_recording(a: &str, b: &str) -> bool {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn open(path: &Path) -> Result<File, LoadError> {
    File::open(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads one recording from its three CSV files.
pub fn load_dataset(
    tracks_file: &Path,
    tracks_meta_file: &Path,
    recording_meta_file: &Path,
    schema: &DatasetSchema,
) -> Result<Dataset, LoadError> {
    load_dataset_from_readers(
        open(tracks_file)?,
        open(tracks_meta_file)?,
        open(recording_meta_file)?,
        schema,
    )
}

pub fn load_dataset_from_readers(
    tracks: impl Read,
    tracks_meta: impl Read,
    recording_meta: impl Read,
    schema: &DatasetSchema,
) -> Result<Dataset, LoadError> {
    let rec = Table::read("recording meta", recording_meta)?;
    let [rid, rate, loc] = RECORDING_COLUMNS.map(|c| rec.column(schema, c));
    let (rid, rate, loc) = (rid?, rate?, loc?);
    if rec.rows.len() != 1 {
        return Err(LoadError::RecordingMeta(format!("expected exactly one row, found {}", rec.rows.len())));
    }
    let row = &rec.rows[0];
    let frame_rate: f64 = rec.parse(0, row, rate, "frameRate")?;
    if !(frame_rate.is_finite() && frame_rate > 0.0) {
        return Err(TrackError::BadFrameRate(frame_rate).into());
    }
    let meta = RecordingMeta {
        recording_id: rec.field(0, row, rid, "recordingId")?.to_string(),
        frame_rate,
        location_id: rec.field(0, row, loc, "locationId")?.to_string(),
    };

    let tm = Table::read("tracks meta", tracks_meta)?;
    let [tid, class, first, last] = META_COLUMNS.map(|c| tm.column(schema, c));
    let (tid, class, first, last) = (tid?, class?, first?, last?);
    let mut metas: BTreeMap<TrackId, (String, i64, i64)> = BTreeMap::new();
    for (i, r) in tm.rows.iter().enumerate() {
        let id = TrackId::new(tm.field(i, r, tid, "trackId")?);
        let c = tm.field(i, r, class, "class")?.to_string();
        let f0: i64 = tm.parse(i, r, first, "initialFrame")?;
        let f1: i64 = tm.parse(i, r, last, "finalFrame")?;
        if !schema.classes.contains(&c) {
            return Err(LoadError::UnknownClass { track: id, class: c });
        }
        if metas.insert(id.clone(), (c, f0, f1)).is_some() {
            return Err(LoadError::DuplicateMeta(id));
        }
    }

    let tt = Table::read("tracks", tracks)?;
    let cols: Vec<usize> = TRACK_COLUMNS
        .iter()
        .map(|c| tt.column(schema, c))
        .collect::<Result<_, _>>()?;
    let angle = |v: f64| match schema.heading_unit {
        AngleUnit::Radians => v,
        AngleUnit::Degrees => v.to_radians(),
    };
    let mut points: BTreeMap<TrackId, Vec<TrackPoint>> = BTreeMap::new();
    for (i, r) in tt.rows.iter().enumerate() {
        let recording = tt.field(i, r, cols[0], TRACK_COLUMNS[0])?;
        if !same_recording(recording, &meta.recording_id) {
            return Err(LoadError::RecordingMismatch {
                expected: meta.recording_id.clone(),
                found: recording.to_string(),
            });
        }
        let id = TrackId::new(tt.field(i, r, cols[1], TRACK_COLUMNS[1])?);
        let num = |k: usize| tt.parse::<f64>(i, r, cols[k], TRACK_COLUMNS[k]);
        let (vx, vy) = (num(6)?, num(7)?);
        let p = TrackPoint {
            frame: tt.parse(i, r, cols[2], TRACK_COLUMNS[2])?,
            x: num(3)?,
            y: num(4)?,
            heading: angle(num(5)?),
            speed: vx.hypot(vy),
        };
        points.entry(id).or_default().push(p);
    }

    let mut tracks = Vec::with_capacity(points.len());
    for (id, mut pts) in points {
        let Some((class, f0, f1)) = metas.remove(&id) else {
            return Err(LoadError::MissingMeta(id));
        };
        pts.sort_by_key(|p| p.frame);
        let t = Trajectory::new(id.clone(), class, pts)?;
        if (t.first_frame(), t.last_frame()) != (f0, f1) {
            return Err(LoadError::SpanMismatch {
                track: id,
                meta_first: f0,
                meta_last: f1,
                first: t.first_frame(),
                last: t.last_frame(),
            });
        }
        tracks.push(t);
    }
    if let Some(id) = metas.into_keys().next() {
        return Err(LoadError::MissingPoints(id));
    }
    Ok(Dataset::new(meta, tracks)?)
}
