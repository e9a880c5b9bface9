//! Hausdorff distance between closed polylines.

use crate::crystalline::CrystallinePolygon;
use crate::error::{Error, Result};
use crate::geom::{perimeter, point_segment_distance, Vec2};
use crate::smooth::SmoothCurve;

/// Anything that can be drawn as a closed polyline.
pub trait Outline {
    fn outline(&self) -> Vec<Vec2>;
}

impl Outline for CrystallinePolygon {
    fn outline(&self) -> Vec<Vec2> {
        self.vertices()
    }
}

impl Outline for SmoothCurve {
    fn outline(&self) -> Vec<Vec2> {
        self.points().to_vec()
    }
}

/// Samples along every edge of a closed polyline, no further apart than `spacing`.
fn densify(points: &[Vec2], spacing: f64) -> Vec<Vec2> {
    let n = points.len();
    let mut out = Vec::new();
    for j in 0..n {
        let a = points[j];
        let b = points[(j + 1) % n];
        let k = ((a.dist(b) / spacing).ceil() as usize).max(1);
        for i in 0..k {
            out.push(a + (b - a) * (i as f64 / k as f64));
        }
    }
    out
}

/// Distance from `p` to the closed polyline `poly`.
fn distance_to_polyline(p: Vec2, poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    for j in 0..n {
        best = best.min(point_segment_distance(p, poly[j], poly[(j + 1) % n]));
    }
    best
}

fn check(points: &[Vec2], which: &str) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Validation(format!(
            "hausdorff: {which} has {} points, needs at least 3",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain(format!("hausdorff: {which} has non-finite points")));
    }
    let p = perimeter(points);
    if !(p > 0.0) {
        return Err(Error::Validation(format!("hausdorff: {which} has zero perimeter")));
    }
    Ok(p)
}

/// Symmetric Hausdorff distance between two closed polylines.
///
/// Each polyline is densified with spacing at most `min(perimeters) / 1000`
/// and every sample is measured exactly against the segments of the other.
pub fn hausdorff(a: &[Vec2], b: &[Vec2]) -> Result<f64> {
    let pa = check(a, "first curve")?;
    let pb = check(b, "second curve")?;
    let spacing = pa.min(pb) / 1000.0;
    let directed = |from: &[Vec2], to: &[Vec2]| {
        densify(from, spacing)
            .into_iter()
            .map(|p| distance_to_polyline(p, to))
            .fold(0.0f64, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}
