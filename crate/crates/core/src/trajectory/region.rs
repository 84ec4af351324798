use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RegionError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("region `{id}`: {reason}")]
    Invalid { id: String, reason: String },
    #[error("duplicate region id `{0}`")]
    DuplicateId(String),
}

/// A simple polygon in metric map coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MapRegion {
    id: String,
    vertices: Vec<[f64; 2]>,
    scale: f64,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a[0] + t * dx, a[1] + t * dy);
    ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt()
}

/// Closed-segment intersection test, touching included.
fn segments_touch(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2], eps: f64) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    dist_to_segment(a, c, d) <= eps
        || dist_to_segment(b, c, d) <= eps
        || dist_to_segment(c, a, b) <= eps
        || dist_to_segment(d, a, b) <= eps
}

impl MapRegion {
    /// Builds a region, dropping a repeated closing vertex. The polygon must
    /// have at least three vertices, positive area and no self-intersections.
    pub fn new(id: impl Into<String>, mut vertices: Vec<[f64; 2]>) -> Result<MapRegion, RegionError> {
        let id = id.into();
        let invalid = |reason: &str| RegionError::Invalid {
            id: id.clone(),
            reason: reason.to_string(),
        };
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(invalid("id must be a non-empty token"));
        }
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(invalid("needs at least 3 vertices"));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite vertex"));
        }
        let scale = vertices.iter().flatten().fold(1.0_f64, |m, c| m.max(c.abs()));
        let region = MapRegion {
            id: id.clone(),
            vertices,
            scale,
        };
        if region.area() <= region.eps() * region.eps() {
            return Err(invalid("polygon has no area"));
        }
        if !region.is_simple() {
            return Err(invalid("polygon is self-intersecting"));
        }
        Ok(region)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn eps(&self) -> f64 {
        1e-9 * self.scale
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Unsigned shoelace area.
    pub fn area(&self) -> f64 {
        let twice: f64 = self.edges().map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum();
        twice.abs() / 2.0
    }

    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let eps = self.eps();
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            if dist_to_segment(a, b, b) <= eps {
                return false;
            }
            // Adjacent edges may only share their common vertex.
            let c = self.vertices[(i + 2) % n];
            if cross(a, b, c).abs() <= eps * self.scale {
                let dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]);
                if dot < 0.0 {
                    return false;
                }
            }
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_touch(a, b, c, d, eps) {
                    return false;
                }
            }
        }
        true
    }

    pub fn on_boundary(&self, x: f64, y: f64) -> bool {
        let eps = self.eps();
        self.edges().any(|(a, b)| dist_to_segment([x, y], a, b) <= eps)
    }

    /// Even-odd ray casting. Points on the boundary count as inside.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.on_boundary(x, y) || self.even_odd(x, y)
    }

    fn contains_strictly(&self, x: f64, y: f64) -> bool {
        !self.on_boundary(x, y) && self.even_odd(x, y)
    }

    fn even_odd(&self, x: f64, y: f64) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > y) != (b[1] > y) {
                let xi = (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0];
                if x < xi {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// A point strictly inside the polygon, found on a horizontal scanline
    /// between the two lowest distinct vertex heights.
    fn interior_point(&self) -> [f64; 2] {
        let mut ys: Vec<f64> = self.vertices.iter().map(|v| v[1]).collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let y = (ys[0] + ys[1]) / 2.0;
        let mut xs: Vec<f64> = self
            .edges()
            .filter(|(a, b)| (a[1] > y) != (b[1] > y))
            .map(|(a, b)| (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0])
            .collect();
        xs.sort_by(f64::total_cmp);
        [(xs[0] + xs[1]) / 2.0, y]
    }

    /// Whether any piece of this polygon's boundary runs through the strict
    /// interior of `other`.
    fn boundary_enters(&self, other: &MapRegion) -> bool {
        let eps = self.eps().max(other.eps());
        for (p, q) in self.edges() {
            let r = [q[0] - p[0], q[1] - p[1]];
            let len2 = r[0] * r[0] + r[1] * r[1];
            let mut ts = vec![0.0, 1.0];
            for (c, d) in other.edges() {
                let s = [d[0] - c[0], d[1] - c[1]];
                let denom = r[0] * s[1] - r[1] * s[0];
                let qp = [c[0] - p[0], c[1] - p[1]];
                if denom.abs() > f64::EPSILON * len2.sqrt() * (s[0].hypot(s[1])) {
                    let t = (qp[0] * s[1] - qp[1] * s[0]) / denom;
                    let u = (qp[0] * r[1] - qp[1] * r[0]) / denom;
                    if (0.0..=1.0).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
                        ts.push(t);
                    }
                }
                if dist_to_segment(c, p, q) <= eps {
                    ts.push(((c[0] - p[0]) * r[0] + (c[1] - p[1]) * r[1]) / len2);
                }
            }
            ts.sort_by(f64::total_cmp);
            for w in ts.windows(2) {
                if w[1] - w[0] <= 1e-12 {
                    continue;
                }
                let t = (w[0] + w[1]) / 2.0;
                if other.contains_strictly(p[0] + t * r[0], p[1] + t * r[1]) {
                    return true;
                }
            }
        }
        false
    }

    /// True when the interiors of the two polygons intersect. Polygons that
    /// only share boundary (a tiling) do not overlap.
    pub fn overlaps(&self, other: &MapRegion) -> bool {
        if self.boundary_enters(other) || other.boundary_enters(self) {
            return true;
        }
        // Neither boundary enters the other's interior: the regions are
        // either interior-disjoint or bounded by the same curve.
        let [x, y] = self.interior_point();
        other.contains_strictly(x, y)
    }
}

/// Free-function form of [`MapRegion::contains`].
pub fn point_in_region(region: &MapRegion, x: f64, y: f64) -> bool {
    region.contains(x, y)
}

/// Parses a region file: `region <id>` followed by `v <x> <y>` lines.
pub fn parse_regions(text: &str) -> Result<Vec<MapRegion>, RegionError> {
    let mut out: Vec<MapRegion> = Vec::new();
    let mut current: Option<(String, Vec<[f64; 2]>)> = None;
    let finish = |cur: Option<(String, Vec<[f64; 2]>)>, out: &mut Vec<MapRegion>| -> Result<(), RegionError> {
        if let Some((id, verts)) = cur {
            if out.iter().any(|r| r.id == id) {
                return Err(RegionError::DuplicateId(id));
            }
            out.push(MapRegion::new(id, verts)?);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let syntax = |message: String| RegionError::Syntax { line: i + 1, message };
        match toks[0] {
            "region" => {
                if toks.len() != 2 {
                    return Err(syntax("expected `region <id>`".into()));
                }
                finish(current.take(), &mut out)?;
                current = Some((toks[1].to_string(), Vec::new()));
            }
            "v" => {
                let Some((_, verts)) = current.as_mut() else {
                    return Err(syntax("vertex outside a region block".into()));
                };
                if toks.len() != 3 {
                    return Err(syntax("expected `v <x> <y>`".into()));
                }
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| syntax(format!("bad coordinate `{s}`")))
                };
                verts.push([parse(toks[1])?, parse(toks[2])?]);
            }
            other => return Err(syntax(format!("unexpected keyword `{other}`"))),
        }
    }
    finish(current.take(), &mut out)?;
    Ok(out)
}
