//! Strokes, canvases, affine maps, and cubic Bézier evaluation.
//!
//! The canvas is the square [-1, 1]²; pixel (row i, col j) of a W×H grid
//! has its center at (-1 + (2j+1)/W, -1 + (2i+1)/H). A toroidal canvas
//! identifies opposite borders, so curves wrap with period 2 per axis.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point in canvas units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    #[inline]
    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }
}

/// Canvas border behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Planar,
    Toroidal,
}

/// Raster grid description: dimensions, channel count, and topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanvasSpec {
    pub width: u32,
    pub height: u32,
    pub channels: usize,
    pub topology: Topology,
}

impl CanvasSpec {
    pub fn new(width: u32, height: u32, channels: usize, topology: Topology) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("canvas", "width and height must be positive"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(
                "canvas",
                format!("channels must be 1 or 3, got {channels}"),
            ));
        }
        Ok(CanvasSpec {
            width,
            height,
            channels,
            topology,
        })
    }

    pub fn gray(width: u32, height: u32, topology: Topology) -> Self {
        CanvasSpec::new(width, height, 1, topology).expect("valid dims")
    }

    pub fn rgb(width: u32, height: u32, topology: Topology) -> Self {
        CanvasSpec::new(width, height, 3, topology).expect("valid dims")
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn value_count(&self) -> usize {
        self.pixel_count() * self.channels
    }

    /// Canvas coordinates of the center of pixel (row, col).
    #[inline]
    pub fn pixel_center(&self, row: u32, col: u32) -> Point {
        Point::new(
            -1.0 + (2 * col + 1) as f64 / self.width as f64,
            -1.0 + (2 * row + 1) as f64 / self.height as f64,
        )
    }

    /// Continuous pixel coordinates (col_f, row_f) of a canvas point;
    /// integer values land on pixel centers.
    #[inline]
    pub fn to_pixel_coords(&self, p: Point) -> (f64, f64) {
        (
            (p.x + 1.0) * self.width as f64 / 2.0 - 0.5,
            (p.y + 1.0) * self.height as f64 / 2.0 - 0.5,
        )
    }
}

/// A single parametric stroke: four cubic Bézier control points,
/// a per-channel color, and a width in canvas units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub control: [Point; 4],
    pub color: Vec<f64>,
    pub width: f64,
}

impl Stroke {
    pub fn new(control: [Point; 4], color: Vec<f64>, width: f64) -> Result<Self> {
        let s = Stroke {
            control,
            color,
            width,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, p) in self.control.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::invalid(
                    "stroke",
                    format!("control point {} is not finite", k + 1),
                ));
            }
        }
        if self.color.is_empty() {
            return Err(Error::invalid("stroke", "color has no channels"));
        }
        for (c, v) in self.color.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(v) {
                return Err(Error::invalid(
                    "stroke",
                    format!("color[{c}] = {v} outside [0, 1]"),
                ));
            }
        }
        if !self.width.is_finite() || self.width <= 0.0 || self.width > 1.0 {
            return Err(Error::invalid(
                "stroke",
                format!("width = {} outside (0, 1]", self.width),
            ));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.color.len()
    }

    /// Same geometry traversed end-to-start.
    pub fn reversed(&self) -> Stroke {
        Stroke {
            control: [
                self.control[3],
                self.control[2],
                self.control[1],
                self.control[0],
            ],
            color: self.color.clone(),
            width: self.width,
        }
    }
}

/// An ordered set of strokes. Index 0 is the topmost stroke when
/// compositing (its contribution is unattenuated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeSet {
    pub strokes: Vec<Stroke>,
}

impl StrokeSet {
    pub fn new(strokes: Vec<Stroke>) -> Result<Self> {
        if strokes.is_empty() {
            return Err(Error::invalid("stroke set", "must contain at least one stroke"));
        }
        let channels = strokes[0].channels();
        for (i, s) in strokes.iter().enumerate() {
            if s.channels() != channels {
                return Err(Error::invalid(
                    "stroke set",
                    format!(
                        "stroke {i} has {} color channels, expected {channels}",
                        s.channels()
                    ),
                ));
            }
        }
        Ok(StrokeSet { strokes })
    }

    pub fn len(&self) -> usize {
        self.strokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.strokes[0].channels()
    }

    pub fn validate(&self) -> Result<()> {
        if self.strokes.is_empty() {
            return Err(Error::invalid("stroke set", "must contain at least one stroke"));
        }
        for s in &self.strokes {
            s.validate()?;
        }
        Ok(())
    }
}

/// An affine map u ↦ linear·u + translation with invertible linear part.
/// `linear` is row-major: x' = l[0][0]·x + l[0][1]·y + translation[0].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

/// Relative tolerance for classifying a linear part as a similarity.
const SIMILARITY_TOL: f64 = 1e-9;

impl AffineMap {
    pub fn new(linear: [[f64; 2]; 2], translation: [f64; 2]) -> Result<Self> {
        let m = AffineMap {
            linear,
            translation,
        };
        if !m.det().is_finite() || m.det() == 0.0 {
            return Err(Error::invalid("affine map", "linear part is singular"));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        AffineMap {
            linear: [[1.0, 0.0], [0.0, 1.0]],
            translation: [0.0, 0.0],
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        AffineMap {
            linear: [[1.0, 0.0], [0.0, 1.0]],
            translation: [tx, ty],
        }
    }

    /// Counterclockwise rotation about the canvas origin.
    pub fn rotation(radians: f64) -> Self {
        let (s, c) = radians.sin_cos();
        AffineMap {
            linear: [[c, -s], [s, c]],
            translation: [0.0, 0.0],
        }
    }

    /// Exact quarter-turn rotation (k mod 4 quarter turns); the matrix
    /// entries are exactly 0 and ±1, unlike `rotation(k·π/2)`.
    pub fn quarter_turns(k: i32) -> Self {
        match k.rem_euclid(4) {
            0 => AffineMap::identity(),
            1 => AffineMap {
                linear: [[0.0, -1.0], [1.0, 0.0]],
                translation: [0.0, 0.0],
            },
            2 => AffineMap {
                linear: [[-1.0, 0.0], [0.0, -1.0]],
                translation: [0.0, 0.0],
            },
            _ => AffineMap {
                linear: [[0.0, 1.0], [-1.0, 0.0]],
                translation: [0.0, 0.0],
            },
        }
    }

    pub fn uniform_scale(s: f64) -> Self {
        AffineMap {
            linear: [[s, 0.0], [0.0, s]],
            translation: [0.0, 0.0],
        }
    }

    /// scale·R(θ) followed by translation.
    pub fn similarity(scale: f64, radians: f64, tx: f64, ty: f64) -> Self {
        let (s, c) = radians.sin_cos();
        AffineMap {
            linear: [[scale * c, -scale * s], [scale * s, scale * c]],
            translation: [tx, ty],
        }
    }

    pub fn det(&self) -> f64 {
        self.linear[0][0] * self.linear[1][1] - self.linear[0][1] * self.linear[1][0]
    }

    /// self ∘ other: `other` is applied first.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let a = self.linear;
        let b = other.linear;
        let linear = [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ];
        let t = other.translation;
        let translation = [
            a[0][0] * t[0] + a[0][1] * t[1] + self.translation[0],
            a[1][0] * t[0] + a[1][1] * t[1] + self.translation[1],
        ];
        AffineMap {
            linear,
            translation,
        }
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let det = self.det();
        if !det.is_finite() || det == 0.0 {
            return Err(Error::invalid("affine map", "linear part is singular"));
        }
        let l = self.linear;
        let inv = [
            [l[1][1] / det, -l[0][1] / det],
            [-l[1][0] / det, l[0][0] / det],
        ];
        let t = self.translation;
        let translation = [
            -(inv[0][0] * t[0] + inv[0][1] * t[1]),
            -(inv[1][0] * t[0] + inv[1][1] * t[1]),
        ];
        Ok(AffineMap {
            linear: inv,
            translation,
        })
    }

    /// Scale factor if the linear part is a similarity (possibly with
    /// reflection), i.e. columns orthogonal with equal norms.
    pub fn similarity_scale(&self) -> Option<f64> {
        let l = self.linear;
        let col_a = (l[0][0], l[1][0]);
        let col_b = (l[0][1], l[1][1]);
        let na = col_a.0 * col_a.0 + col_a.1 * col_a.1;
        let nb = col_b.0 * col_b.0 + col_b.1 * col_b.1;
        let dot = col_a.0 * col_b.0 + col_a.1 * col_b.1;
        let scale = na.max(nb).max(f64::MIN_POSITIVE);
        if (na - nb).abs() <= SIMILARITY_TOL * scale && dot.abs() <= SIMILARITY_TOL * scale {
            Some(self.det().abs().sqrt())
        } else {
            None
        }
    }

    pub fn is_isometry(&self) -> bool {
        matches!(self.similarity_scale(), Some(s) if (s - 1.0).abs() <= SIMILARITY_TOL)
    }
}

/// Apply an affine map to a point.
#[inline]
pub fn apply_affine_point(map: &AffineMap, p: Point) -> Point {
    Point::new(
        map.linear[0][0] * p.x + map.linear[0][1] * p.y + map.translation[0],
        map.linear[1][0] * p.x + map.linear[1][1] * p.y + map.translation[1],
    )
}

/// Apply an affine map to a stroke: control points move, color is kept,
/// and width scales by |det|^(1/2) when the linear part is a similarity
/// (the subgroup for which render equivariance is exact). For general
/// affine maps the width is left unchanged.
pub fn apply_affine_stroke(map: &AffineMap, stroke: &Stroke) -> Stroke {
    let control = [
        apply_affine_point(map, stroke.control[0]),
        apply_affine_point(map, stroke.control[1]),
        apply_affine_point(map, stroke.control[2]),
        apply_affine_point(map, stroke.control[3]),
    ];
    let width = match map.similarity_scale() {
        Some(s) => stroke.width * s,
        None => stroke.width,
    };
    Stroke {
        control,
        color: stroke.color.clone(),
        width,
    }
}

/// Apply an affine map to every stroke in a set.
pub fn apply_affine_stroke_set(map: &AffineMap, set: &StrokeSet) -> StrokeSet {
    StrokeSet {
        strokes: set
            .strokes
            .iter()
            .map(|s| apply_affine_stroke(map, s))
            .collect(),
    }
}

/// H×W×C raster with values in [0, 1], row-major, channel-interleaved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image {
    pub canvas: CanvasSpec,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(canvas: CanvasSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != canvas.value_count() {
            return Err(Error::ShapeMismatch(format!(
                "image data has {} values, canvas needs {}",
                data.len(),
                canvas.value_count()
            )));
        }
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(v) {
                return Err(Error::invalid(
                    "image",
                    format!("value {v} at flat index {i} outside [0, 1]"),
                ));
            }
        }
        Ok(Image { canvas, data })
    }

    pub fn constant(canvas: CanvasSpec, value: f64) -> Self {
        Image {
            canvas,
            data: vec![value; canvas.value_count()],
        }
    }

    #[inline]
    pub fn flat_index(&self, row: u32, col: u32, ch: usize) -> usize {
        (row as usize * self.canvas.width as usize + col as usize) * self.canvas.channels + ch
    }

    #[inline]
    pub fn get(&self, row: u32, col: u32, ch: usize) -> f64 {
        self.data[self.flat_index(row, col, ch)]
    }

    #[inline]
    pub fn set(&mut self, row: u32, col: u32, ch: usize, v: f64) {
        let i = self.flat_index(row, col, ch);
        self.data[i] = v;
    }

    /// Rec. 601 luminance; identity for single-channel images.
    pub fn luminance(&self, row: u32, col: u32) -> f64 {
        if self.canvas.channels == 1 {
            self.get(row, col, 0)
        } else {
            0.299 * self.get(row, col, 0) + 0.587 * self.get(row, col, 1)
                + 0.114 * self.get(row, col, 2)
        }
    }

    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Bernstein basis values (b1, b2, b3, b4) at parameter s.
#[inline]
pub fn bernstein(s: f64) -> [f64; 4] {
    let r = 1.0 - s;
    [r * r * r, 3.0 * s * r * r, 3.0 * s * s * r, s * s * s]
}

/// Evaluate the stroke's cubic Bézier curve at s ∈ [0, 1] using the
/// standard Bernstein basis, so C(0) = t1 and C(1) = t4 exactly.
pub fn bezier_point(stroke: &Stroke, s: f64) -> Result<Point> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(
            "bezier parameter",
            format!("s = {s} outside [0, 1]"),
        ));
    }
    let b = bernstein(s);
    let t = &stroke.control;
    Ok(Point::new(
        b[0] * t[0].x + b[1] * t[1].x + b[2] * t[2].x + b[3] * t[3].x,
        b[0] * t[0].y + b[1] * t[1].y + b[2] * t[2].y + b[3] * t[3].y,
    ))
}

/// Closest-point query result for one stroke.
#[derive(Debug, Clone, Copy)]
pub struct CurveDistance {
    /// Euclidean distance to the curve (minimum over wrap copies on
    /// toroidal canvases).
    pub distance: f64,
    /// Minimizing curve parameter in [0, 1].
    pub s: f64,
    /// Unit vector (C(s*) + offset - u) / distance, or (0, 0) at d = 0.
    /// This is the direction the curve point sits relative to the query,
    /// used for distance gradients.
    pub direction: (f64, f64),
}

/// Number of uniform seed samples for the closest-point search.
const DISTANCE_SAMPLES: usize = 32;
/// Newton refinement iteration cap.
const NEWTON_ITERS: usize = 8;

/// Control points relative to t1. Working in this local frame makes the
/// distance field bit-identical under exact translations of stroke and
/// query, which the equivariance checks rely on.
#[inline]
fn local_control(stroke: &Stroke) -> [Point; 4] {
    let t1 = stroke.control[0];
    [
        Point::new(0.0, 0.0),
        stroke.control[1].sub(t1),
        stroke.control[2].sub(t1),
        stroke.control[3].sub(t1),
    ]
}

#[inline]
fn eval_local(q: &[Point; 4], s: f64) -> Point {
    let b = bernstein(s);
    Point::new(
        b[0] * q[0].x + b[1] * q[1].x + b[2] * q[2].x + b[3] * q[3].x,
        b[0] * q[0].y + b[1] * q[1].y + b[2] * q[2].y + b[3] * q[3].y,
    )
}

#[inline]
fn eval_local_deriv(q: &[Point; 4], s: f64) -> Point {
    let r = 1.0 - s;
    let d1 = q[1].sub(q[0]).scale(3.0 * r * r);
    let d2 = q[2].sub(q[1]).scale(6.0 * s * r);
    let d3 = q[3].sub(q[2]).scale(3.0 * s * s);
    Point::new(d1.x + d2.x + d3.x, d1.y + d2.y + d3.y)
}

#[inline]
fn eval_local_second_deriv(q: &[Point; 4], s: f64) -> Point {
    let a = Point::new(
        q[2].x - 2.0 * q[1].x + q[0].x,
        q[2].y - 2.0 * q[1].y + q[0].y,
    );
    let b = Point::new(
        q[3].x - 2.0 * q[2].x + q[1].x,
        q[3].y - 2.0 * q[2].y + q[1].y,
    );
    Point::new(
        6.0 * ((1.0 - s) * a.x + s * b.x),
        6.0 * ((1.0 - s) * a.y + s * b.y),
    )
}

/// Closest point on the curve (local frame) to `v`: uniform sampling
/// followed by Newton on the derivative of squared distance, falling
/// back to the best sample if Newton fails to improve.
fn closest_point_local(q: &[Point; 4], v: Point) -> (f64, f64) {
    let mut best_s = 0.0;
    let mut best_d2 = f64::INFINITY;
    let step = 1.0 / (DISTANCE_SAMPLES - 1) as f64;
    for i in 0..DISTANCE_SAMPLES {
        let s = i as f64 * step;
        let d2 = eval_local(q, s).sub(v).dot(eval_local(q, s).sub(v));
        if d2 < best_d2 {
            best_d2 = d2;
            best_s = s;
        }
    }
    // Refine from the best sample and its neighbors; keep whatever wins.
    let starts = [best_s, (best_s - step).max(0.0), (best_s + step).min(1.0)];
    for &start in &starts {
        let mut s = start;
        for _ in 0..NEWTON_ITERS {
            let delta = eval_local(q, s).sub(v);
            let d1 = eval_local_deriv(q, s);
            let d2v = eval_local_second_deriv(q, s);
            let g1 = 2.0 * delta.dot(d1);
            let g2 = 2.0 * (d1.dot(d1) + delta.dot(d2v));
            if !(g2 > 0.0) {
                break;
            }
            let next = (s - g1 / g2).clamp(0.0, 1.0);
            if !next.is_finite() {
                break;
            }
            let moved = (next - s).abs();
            s = next;
            if moved < 1e-12 {
                break;
            }
        }
        let d2 = eval_local(q, s).sub(v).dot(eval_local(q, s).sub(v));
        if d2 < best_d2 {
            best_d2 = d2;
            best_s = s;
        }
    }
    (best_d2, best_s)
}

/// Wrap offsets to consider for a topology: the identity for planar
/// canvases, the 3×3 translated copies (period 2 per axis) for toroidal.
#[inline]
fn wrap_offsets(topology: Topology) -> &'static [(f64, f64)] {
    const PLANAR: [(f64, f64); 1] = [(0.0, 0.0)];
    const TOROIDAL: [(f64, f64); 9] = [
        (-2.0, -2.0),
        (0.0, -2.0),
        (2.0, -2.0),
        (-2.0, 0.0),
        (0.0, 0.0),
        (2.0, 0.0),
        (-2.0, 2.0),
        (0.0, 2.0),
        (2.0, 2.0),
    ];
    match topology {
        Topology::Planar => &PLANAR,
        Topology::Toroidal => &TOROIDAL,
    }
}

/// Full closest-point query against a stroke, including the direction
/// vector needed for gradients.
pub fn stroke_distance_full(stroke: &Stroke, point: Point, topology: Topology) -> CurveDistance {
    let q = local_control(stroke);
    let v = point.sub(stroke.control[0]);
    let mut best = CurveDistance {
        distance: f64::INFINITY,
        s: 0.0,
        direction: (0.0, 0.0),
    };
    let mut best_v = v;
    for &(ox, oy) in wrap_offsets(topology) {
        let v_off = Point::new(v.x - ox, v.y - oy);
        let (d2, s) = closest_point_local(&q, v_off);
        let d = d2.sqrt();
        if d < best.distance {
            best.distance = d;
            best.s = s;
            best_v = v_off;
        }
    }
    if best.distance > 0.0 {
        let c = eval_local(&q, best.s);
        best.direction = (
            (c.x - best_v.x) / best.distance,
            (c.y - best_v.y) / best.distance,
        );
    }
    best
}

/// Distance from a point to the stroke's curve and the minimizing
/// parameter. Accurate to about 1e-6 of the true minimum.
pub fn stroke_distance(stroke: &Stroke, point: Point, topology: Topology) -> (f64, f64) {
    let r = stroke_distance_full(stroke, point, topology);
    (r.distance, r.s)
}

/// Distance from a point to the axis-aligned bounding box of the
/// control points (zero inside). Since the curve lies in the control
/// hull, this lower-bounds the curve distance; the rasterizer uses it
/// to skip far pixels.
pub fn control_bbox_distance(stroke: &Stroke, point: Point) -> f64 {
    let xs = stroke.control.map(|p| p.x);
    let ys = stroke.control.map(|p| p.y);
    let (xmin, xmax) = min_max(&xs);
    let (ymin, ymax) = min_max(&ys);
    let dx = (xmin - point.x).max(0.0).max(point.x - xmax);
    let dy = (ymin - point.y).max(0.0).max(point.y - ymax);
    (dx * dx + dy * dy).sqrt()
}

#[inline]
fn min_max(v: &[f64; 4]) -> (f64, f64) {
    let mut lo = v[0];
    let mut hi = v[0];
    for &x in &v[1..] {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gray_stroke(control: [Point; 4]) -> Stroke {
        Stroke::new(control, vec![0.0], 0.1).unwrap()
    }

    fn line_stroke() -> Stroke {
        gray_stroke([
            Point::new(0.0, 0.0),
            Point::new(1.0 / 3.0, 0.0),
            Point::new(2.0 / 3.0, 0.0),
            Point::new(1.0, 0.0),
        ])
    }

    #[test]
    fn bezier_endpoints_interpolate() {
        let s = gray_stroke([
            Point::new(0.2, -0.4),
            Point::new(0.5, 0.9),
            Point::new(-0.7, 0.1),
            Point::new(0.3, 0.3),
        ]);
        let p0 = bezier_point(&s, 0.0).unwrap();
        let p1 = bezier_point(&s, 1.0).unwrap();
        assert_eq!((p0.x, p0.y), (0.2, -0.4));
        assert_eq!((p1.x, p1.y), (0.3, 0.3));
    }

    #[test]
    fn bezier_cubic_term_only() {
        // t1..t3 at the origin leaves only the s³ term: 0.125·(8, 8).
        let s = gray_stroke([
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(8.0, 8.0),
        ]);
        let p = bezier_point(&s, 0.5).unwrap();
        assert_eq!((p.x, p.y), (1.0, 1.0));
    }

    #[test]
    fn bezier_rejects_out_of_range() {
        let s = line_stroke();
        assert!(bezier_point(&s, -0.01).is_err());
        assert!(bezier_point(&s, 1.01).is_err());
    }

    #[test]
    fn distance_perpendicular_to_segment() {
        let (d, s_star) = stroke_distance(&line_stroke(), Point::new(0.5, 0.3), Topology::Planar);
        assert_abs_diff_eq!(d, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(s_star, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn distance_clamps_to_endpoint() {
        let (d, s_star) = stroke_distance(&line_stroke(), Point::new(-0.2, 0.0), Topology::Planar);
        assert_abs_diff_eq!(d, 0.2, epsilon = 1e-9);
        assert_eq!(s_star, 0.0);
    }

    #[test]
    fn distance_reversal_symmetric() {
        let s = gray_stroke([
            Point::new(-0.5, -0.2),
            Point::new(-0.1, 0.8),
            Point::new(0.4, -0.9),
            Point::new(0.7, 0.3),
        ]);
        let r = s.reversed();
        for &(px, py) in &[(0.0, 0.0), (0.3, 0.5), (-0.9, 0.4), (0.2, -0.7)] {
            let (da, _) = stroke_distance(&s, Point::new(px, py), Topology::Planar);
            let (db, _) = stroke_distance(&r, Point::new(px, py), Topology::Planar);
            assert_abs_diff_eq!(da, db, epsilon = 1e-12);
        }
    }

    #[test]
    fn toroidal_distance_wraps() {
        // Stroke hugging the left border; a point near the right border
        // is close through the seam.
        let s = gray_stroke([
            Point::new(-0.95, -0.5),
            Point::new(-0.95, -0.2),
            Point::new(-0.95, 0.2),
            Point::new(-0.95, 0.5),
        ]);
        let p = Point::new(0.95, 0.0);
        let (planar, _) = stroke_distance(&s, p, Topology::Planar);
        let (toroidal, _) = stroke_distance(&s, p, Topology::Toroidal);
        assert_abs_diff_eq!(planar, 1.9, epsilon = 1e-9);
        assert_abs_diff_eq!(toroidal, 0.1, epsilon = 1e-9);
    }

    #[test]
    fn affine_point_cases() {
        let p = Point::new(1.0, 0.0);
        let id = AffineMap::identity();
        let got = apply_affine_point(&id, p);
        assert_eq!((got.x, got.y), (1.0, 0.0));

        let tr = AffineMap::translation(0.5, 0.0);
        let got = apply_affine_point(&tr, Point::new(0.0, 0.0));
        assert_eq!((got.x, got.y), (0.5, 0.0));

        let rot = AffineMap::quarter_turns(1);
        let got = apply_affine_point(&rot, p);
        assert_eq!((got.x, got.y), (0.0, 1.0));
    }

    #[test]
    fn affine_stroke_width_rules() {
        let s = Stroke::new(
            [
                Point::new(0.0, 0.0),
                Point::new(0.1, 0.1),
                Point::new(0.2, 0.0),
                Point::new(0.3, 0.1),
            ],
            vec![0.5],
            0.2,
        )
        .unwrap();

        let id = AffineMap::identity();
        assert_eq!(apply_affine_stroke(&id, &s), s);

        let scale2 = AffineMap::uniform_scale(2.0);
        let scaled = apply_affine_stroke(&scale2, &s);
        assert_eq!(scaled.width, 0.4);
        assert_eq!(scaled.color, s.color);
        assert_eq!(scaled.control[3].x, 0.6);

        let rot = AffineMap::rotation(0.7);
        let rotated = apply_affine_stroke(&rot, &s);
        assert_abs_diff_eq!(rotated.width, 0.2, epsilon = 1e-12);

        // Shear is not a similarity: width untouched.
        let shear = AffineMap::new([[1.0, 0.5], [0.0, 1.0]], [0.0, 0.0]).unwrap();
        let sheared = apply_affine_stroke(&shear, &s);
        assert_eq!(sheared.width, 0.2);
    }

    #[test]
    fn affine_homomorphism() {
        let a = AffineMap::similarity(1.3, 0.4, 0.2, -0.1);
        let b = AffineMap::similarity(0.8, -1.1, -0.3, 0.5);
        let p = Point::new(0.37, -0.62);
        let lhs = apply_affine_point(&a.compose(&b), p);
        let rhs = apply_affine_point(&a, apply_affine_point(&b, p));
        assert_abs_diff_eq!(lhs.x, rhs.x, epsilon = 1e-12);
        assert_abs_diff_eq!(lhs.y, rhs.y, epsilon = 1e-12);
    }

    #[test]
    fn affine_inverse_roundtrip() {
        let a = AffineMap::new([[1.2, 0.3], [-0.4, 0.9]], [0.1, -0.7]).unwrap();
        let inv = a.inverse().unwrap();
        let p = Point::new(0.5, -0.25);
        let back = apply_affine_point(&inv, apply_affine_point(&a, p));
        assert_abs_diff_eq!(back.x, p.x, epsilon = 1e-12);
        assert_abs_diff_eq!(back.y, p.y, epsilon = 1e-12);
    }

    #[test]
    fn isometry_preserves_distance() {
        let s = gray_stroke([
            Point::new(-0.4, 0.1),
            Point::new(0.0, 0.6),
            Point::new(0.2, -0.5),
            Point::new(0.6, 0.2),
        ]);
        let u = Point::new(0.1, 0.3);
        let (d0, _) = stroke_distance(&s, u, Topology::Planar);
        for map in [
            AffineMap::rotation(0.93),
            AffineMap::translation(0.17, -0.41),
            AffineMap::similarity(1.0, -2.2, 0.05, 0.3),
        ] {
            let (d1, _) = stroke_distance(
                &apply_affine_stroke(&map, &s),
                apply_affine_point(&map, u),
                Topology::Planar,
            );
            assert_abs_diff_eq!(d0, d1, epsilon = 1e-10);
        }
    }

    #[test]
    fn pixel_center_mapping() {
        let canvas = CanvasSpec::gray(4, 4, Topology::Planar);
        let c = canvas.pixel_center(0, 0);
        assert_eq!((c.x, c.y), (-0.75, -0.75));
        let c = canvas.pixel_center(3, 3);
        assert_eq!((c.x, c.y), (0.75, 0.75));
        let (col_f, row_f) = canvas.to_pixel_coords(Point::new(0.75, -0.75));
        assert_eq!((col_f, row_f), (3.0, 0.0));
    }

    #[test]
    fn stroke_validation() {
        let control = [
            Point::new(0.0, 0.0),
            Point::new(0.1, 0.0),
            Point::new(0.2, 0.0),
            Point::new(0.3, 0.0),
        ];
        assert!(Stroke::new(control, vec![0.5], 0.1).is_ok());
        assert!(Stroke::new(control, vec![1.5], 0.1).is_err());
        assert!(Stroke::new(control, vec![0.5], 0.0).is_err());
        assert!(Stroke::new(control, vec![0.5], 1.5).is_err());
        assert!(Stroke::new(control, vec![], 0.1).is_err());
        let mut bad = control;
        bad[2] = Point::new(f64::NAN, 0.0);
        assert!(Stroke::new(bad, vec![0.5], 0.1).is_err());
    }

    #[test]
    fn bbox_distance_lower_bounds_curve() {
        let s = gray_stroke([
            Point::new(-0.3, -0.3),
            Point::new(0.0, 0.4),
            Point::new(0.3, -0.4),
            Point::new(0.5, 0.2),
        ]);
        for &(px, py) in &[(0.9, 0.9), (-0.8, 0.2), (0.0, 0.0), (0.4, -0.9)] {
            let p = Point::new(px, py);
            let (d, _) = stroke_distance(&s, p, Topology::Planar);
            assert!(control_bbox_distance(&s, p) <= d + 1e-12);
        }
    }
}
