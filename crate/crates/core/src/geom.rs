// Copyright 2026 The colocate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Planar geometry: spatial objects, the transaction grid, buffer zones and
//! point-to-object distances.

use serde::{Deserialize, Serialize};

use crate::windfield::WindVector;
use crate::{Error, Result};

/// Mean Earth radius in km, used by the equirectangular projection.
const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Slack added to `extent / spacing` before flooring so that extents that are
/// an exact multiple of the spacing do not lose their last grid line to
/// rounding (e.g. `10.0 / 0.1`).
const GRID_COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point2D>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut bb = BoundingBox { min_x: first.x, min_y: first.y, max_x: first.x, max_y: first.y };
        for p in iter {
            bb.include(p);
        }
        Some(bb)
    }

    pub fn include(&mut self, p: &Point2D) {
        self.min_x = self.min_x.min(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_x = self.max_x.max(p.x);
        self.max_y = self.max_y.max(p.y);
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn expand(&self, margin: f64) -> BoundingBox {
        BoundingBox {
            min_x: self.min_x - margin,
            min_y: self.min_y - margin,
            max_x: self.max_x + margin,
            max_y: self.max_y + margin,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

/// Geometry of a spatial object. Polygon rings are stored without repeating
/// the first vertex; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "coords", rename_all = "lowercase")]
pub enum Shape {
    Point(Point2D),
    Polyline(Vec<Point2D>),
    Polygon(Vec<Point2D>),
}

impl Shape {
    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Point(_) => "point",
            Shape::Polyline(_) => "line",
            Shape::Polygon(_) => "polygon",
        }
    }

    pub fn vertices(&self) -> &[Point2D] {
        match self {
            Shape::Point(p) => std::slice::from_ref(p),
            Shape::Polyline(v) | Shape::Polygon(v) => v,
        }
    }

    /// First vertex; the anchor used when an object is relocated.
    pub fn anchor(&self) -> Point2D {
        self.vertices()[0]
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::of_points(self.vertices()).expect("shapes have at least one vertex")
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Shape {
        self.map_points(|p| Point2D::new(p.x + dx, p.y + dy))
    }

    /// Applies `f` to every vertex.
    pub fn map_points(&self, f: impl Fn(&Point2D) -> Point2D) -> Shape {
        match self {
            Shape::Point(p) => Shape::Point(f(p)),
            Shape::Polyline(v) => Shape::Polyline(v.iter().map(&f).collect()),
            Shape::Polygon(v) => Shape::Polygon(v.iter().map(&f).collect()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self.vertices().iter().find(|p| !p.is_finite()) {
            return Err(Error::validation(format!("non-finite coordinate ({}, {})", bad.x, bad.y)));
        }
        match self {
            Shape::Point(_) => Ok(()),
            Shape::Polyline(v) if v.len() < 2 => {
                Err(Error::validation(format!("polyline needs at least 2 vertices, got {}", v.len())))
            }
            Shape::Polyline(_) => Ok(()),
            Shape::Polygon(v) if v.len() < 3 => {
                Err(Error::validation(format!("polygon ring needs at least 3 distinct vertices, got {}", v.len())))
            }
            Shape::Polygon(v) => {
                if ring_self_intersects(v) {
                    Err(Error::validation("polygon ring is self-intersecting"))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// A feature instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialObject {
    pub id: String,
    pub feature: String,
    pub shape: Shape,
    /// Release quantity in kg.
    pub amount: Option<f64>,
    /// Buffer radius that overrides the amount-based radius.
    pub fixed_radius: Option<f64>,
}

impl SpatialObject {
    pub fn new(id: impl Into<String>, feature: impl Into<String>, shape: Shape) -> Self {
        SpatialObject { id: id.into(), feature: feature.into(), shape, amount: None, fixed_radius: None }
    }

    pub fn point(id: impl Into<String>, feature: impl Into<String>, at: Point2D) -> Self {
        Self::new(id, feature, Shape::Point(at))
    }

    pub fn with_amount(mut self, amount: f64) -> Self {
        self.amount = Some(amount);
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.fixed_radius = Some(radius);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ctx = |e: Error| match e {
            Error::Validation(m) => Error::Validation(format!("object {}: {m}", self.id)),
            other => other,
        };
        self.shape.validate().map_err(ctx)?;
        if let Some(a) = self.amount {
            if !(a.is_finite() && a >= 0.0) {
                return Err(ctx(Error::validation(format!("negative or non-finite amount {a}"))));
            }
        }
        if let Some(r) = self.fixed_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(ctx(Error::validation(format!("buffer radius must be > 0, got {r}"))));
            }
        }
        Ok(())
    }
}

/// Regular grid of sample points. Point `(i, j)` sits at
/// `(min_x + i * spacing, min_y + j * spacing)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64, spacing: f64) -> Result<Self> {
        let spec = GridSpec { min_x, min_y, max_x, max_y, spacing };
        spec.validate()?;
        Ok(spec)
    }

    pub fn covering(bbox: &BoundingBox, spacing: f64) -> Result<Self> {
        Self::new(bbox.min_x, bbox.min_y, bbox.max_x, bbox.max_y, spacing)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.min_x, self.min_y, self.max_x, self.max_y, self.spacing].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("grid bounds and spacing must be finite"));
        }
        if self.spacing.is_nan() || self.spacing <= 0.0 {
            return Err(Error::validation(format!("grid spacing must be > 0, got {}", self.spacing)));
        }
        if self.max_x < self.min_x || self.max_y < self.min_y {
            return Err(Error::validation("grid bounds are inverted"));
        }
        Ok(())
    }

    /// Number of grid columns (k1).
    pub fn columns(&self) -> usize {
        ((self.max_x - self.min_x) / self.spacing + GRID_COUNT_SLACK).floor() as usize + 1
    }

    /// Number of grid rows (k2).
    pub fn rows(&self) -> usize {
        ((self.max_y - self.min_y) / self.spacing + GRID_COUNT_SLACK).floor() as usize + 1
    }

    /// Total number of grid points (k3).
    pub fn len(&self) -> usize {
        self.columns() * self.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point_at(&self, col: usize, row: usize) -> Point2D {
        Point2D::new(self.min_x + col as f64 * self.spacing, self.min_y + row as f64 * self.spacing)
    }

    /// Row-major linear index.
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.columns() + col
    }

    pub fn point(&self, index: usize) -> Point2D {
        let cols = self.columns();
        self.point_at(index % cols, index / cols)
    }

    /// Inclusive column/row ranges of grid points that may fall inside
    /// `bbox`, clipped to the grid. `None` when the box misses the grid.
    pub fn cells_within(&self, bbox: &BoundingBox) -> Option<((usize, usize), (usize, usize))> {
        let span = |lo: f64, hi: f64, origin: f64, n: usize| -> Option<(usize, usize)> {
            let a = ((lo - origin) / self.spacing).floor().max(0.0);
            let b = ((hi - origin) / self.spacing).ceil();
            if b < 0.0 || a > (n - 1) as f64 {
                return None;
            }
            Some((a as usize, (b as usize).min(n - 1)))
        };
        let cols = span(bbox.min_x, bbox.max_x, self.min_x, self.columns())?;
        let rows = span(bbox.min_y, bbox.max_y, self.min_y, self.rows())?;
        Some((cols, rows))
    }
}

/// All grid points in row-major order.
pub fn make_grid(spec: &GridSpec) -> Result<Vec<Point2D>> {
    spec.validate()?;
    let (cols, rows) = (spec.columns(), spec.rows());
    let mut out = Vec::with_capacity(cols * rows);
    for row in 0..rows {
        for col in 0..cols {
            out.push(spec.point_at(col, row));
        }
    }
    Ok(out)
}

/// Buffer radius in km for a release of `amount` kg: the natural log of the
/// amount, never below `r_min`.
pub fn buffer_radius_from_amount(amount: f64, r_min: f64) -> Result<f64> {
    if !(amount.is_finite() && amount >= 0.0) {
        return Err(Error::validation(format!("release amount must be >= 0, got {amount}")));
    }
    if !(r_min.is_finite() && r_min > 0.0) {
        return Err(Error::validation(format!("r_min must be > 0, got {r_min}")));
    }
    // ln(0) = -inf, which the clamp absorbs.
    Ok(amount.ln().max(r_min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BufferShape {
    Circle {
        center: Point2D,
        radius: f64,
    },
    /// Wind-stretched zone. `source` lies on the major axis halfway between
    /// `center` and the upwind focus; `orientation` is the planar angle
    /// (radians, counter-clockwise from +x) of the downwind semi-axis.
    Ellipse {
        source: Point2D,
        center: Point2D,
        semi_major: f64,
        semi_minor: f64,
        orientation: f64,
    },
    /// Fixed-width zone around a polyline or polygon.
    Extended {
        base: Shape,
        radius: f64,
    },
}

impl BufferShape {
    pub fn bbox(&self) -> BoundingBox {
        match self {
            BufferShape::Circle { center, radius } => BoundingBox::of_points([center]).unwrap().expand(*radius),
            BufferShape::Ellipse { center, semi_major: a, semi_minor: b, orientation, .. } => {
                let (s, c) = orientation.sin_cos();
                let hx = (a * a * c * c + b * b * s * s).sqrt();
                let hy = (a * a * s * s + b * b * c * c).sqrt();
                BoundingBox { min_x: center.x - hx, min_y: center.y - hy, max_x: center.x + hx, max_y: center.y + hy }
            }
            BufferShape::Extended { base, radius } => base.bbox().expand(*radius),
        }
    }

    /// Largest distance from the buffer's source to its boundary.
    pub fn reach(&self) -> f64 {
        match self {
            BufferShape::Circle { radius, .. } | BufferShape::Extended { radius, .. } => *radius,
            BufferShape::Ellipse { semi_major: a, semi_minor: b, .. } => a + (a * a - b * b).sqrt() / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Buffer {
    pub owner: String,
    pub shape: BufferShape,
}

/// Stretches the circle of radius `r` around `source` along the wind.
///
/// The major semi-axis grows to `r + gamma * |v|` and the minor semi-axis
/// shrinks to `r^2 / a`, so the covered area stays `pi * r^2`. Wind
/// direction follows the meteorological convention (the bearing the wind
/// blows from), so the ellipse is pushed downwind, away from that bearing.
pub fn morph_to_ellipse(source: Point2D, r: f64, wind: WindVector, gamma: f64) -> BufferShape {
    let speed = wind.speed();
    let a = r + gamma * speed;
    if a.is_nan() || a <= r {
        return BufferShape::Circle { center: source, radius: r };
    }
    let b = r * r / a;
    let c = (a * a - b * b).sqrt();
    let (ux, uy) = (-wind.x / speed, -wind.y / speed);
    BufferShape::Ellipse {
        source,
        center: Point2D::new(source.x + ux * c / 2.0, source.y + uy * c / 2.0),
        semi_major: a,
        semi_minor: b,
        orientation: uy.atan2(ux),
    }
}

pub fn point_segment_distance(p: &Point2D, a: &Point2D, b: &Point2D) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&Point2D::new(a.x + t * dx, a.y + t * dy))
}

/// Even-odd ray casting. Points on the boundary count as inside.
pub fn point_in_polygon(p: &Point2D, ring: &[Point2D]) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let a = &ring[i];
        let b = &ring[(i + 1) % n];
        if point_segment_distance(p, a, b) == 0.0 {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn segments(vertices: &[Point2D], closed: bool) -> impl Iterator<Item = (&Point2D, &Point2D)> {
    let n = vertices.len();
    let count = if closed { n } else { n.saturating_sub(1) };
    (0..count).map(move |i| (&vertices[i], &vertices[(i + 1) % n]))
}

pub fn distance_to_shape(p: &Point2D, shape: &Shape) -> f64 {
    match shape {
        Shape::Point(q) => p.distance(q),
        Shape::Polyline(v) => {
            segments(v, false).map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
        }
        Shape::Polygon(v) => {
            if point_in_polygon(p, v) {
                0.0
            } else {
                segments(v, true).map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

pub fn distance_to_object(p: &Point2D, obj: &SpatialObject) -> f64 {
    distance_to_shape(p, &obj.shape)
}

/// Position of `p` inside the buffer as a fraction of the way from the
/// source to the boundary: 0 at the source, 1 on the boundary, `None`
/// outside. For ellipses the fraction is taken along the ray from the
/// source point through `p`.
pub fn normalized_buffer_distance(p: &Point2D, buffer: &BufferShape) -> Option<f64> {
    let x = match buffer {
        BufferShape::Circle { center, radius } => p.distance(center) / radius,
        BufferShape::Extended { base, radius } => distance_to_shape(p, base) / radius,
        BufferShape::Ellipse { source, center, semi_major: a, semi_minor: b, orientation } => {
            let d = p.distance(source);
            if d == 0.0 {
                return Some(0.0);
            }
            let (sin, cos) = orientation.sin_cos();
            // Work in the ellipse frame: major axis along +x, centred at origin.
            let to_local = |q: &Point2D| {
                let (dx, dy) = (q.x - center.x, q.y - center.y);
                (dx * cos + dy * sin, -dx * sin + dy * cos)
            };
            let (sx, sy) = to_local(source);
            let (px, py) = to_local(p);
            let (ux, uy) = ((px - sx) / d, (py - sy) / d);
            let qa = ux * ux / (a * a) + uy * uy / (b * b);
            let qb = 2.0 * (sx * ux / (a * a) + sy * uy / (b * b));
            let qc = sx * sx / (a * a) + sy * sy / (b * b) - 1.0;
            let t = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
            d / t
        }
    };
    // absorb rounding on the boundary itself
    (x <= 1.0 + 1e-12).then(|| x.min(1.0))
}

fn orientation(a: &Point2D, b: &Point2D, c: &Point2D) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: &Point2D, b: &Point2D, p: &Point2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

pub fn segments_intersect(a: &Point2D, b: &Point2D, c: &Point2D, d: &Point2D) -> bool {
    let (o1, o2) = (orientation(a, b, c), orientation(a, b, d));
    let (o3, o4) = (orientation(c, d, a), orientation(c, d, b));
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

fn ring_self_intersects(ring: &[Point2D]) -> bool {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (&ring[i], &ring[(i + 1) % n]);
        if a == b {
            return true;
        }
        for j in (i + 1)..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (&ring[j], &ring[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Equirectangular projection of `(longitude, latitude)` degrees to planar km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equirectangular {
    kx: f64,
}

impl Equirectangular {
    /// Projection centred on the mean latitude of `lon_lat`.
    pub fn centred_on(lon_lat: &[Point2D]) -> Self {
        let mean_lat =
            if lon_lat.is_empty() { 0.0 } else { lon_lat.iter().map(|p| p.y).sum::<f64>() / lon_lat.len() as f64 };
        Equirectangular { kx: EARTH_RADIUS_KM * mean_lat.to_radians().cos() }
    }

    pub fn project(&self, p: &Point2D) -> Point2D {
        Point2D::new(self.kx * p.x.to_radians(), EARTH_RADIUS_KM * p.y.to_radians())
    }
}

/// Projects `(longitude, latitude)` pairs centred on their mean latitude.
pub fn project_equirectangular(lon_lat: &[Point2D]) -> Vec<Point2D> {
    let proj = Equirectangular::centred_on(lon_lat);
    lon_lat.iter().map(|p| proj.project(p)).collect()
}
