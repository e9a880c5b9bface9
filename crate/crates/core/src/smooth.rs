//! Front tracking of closed polylines under smooth weighted curvature flow
//! `V = M(n) kappa_Phi` and under the isotropic power law `V = sgn(kappa) |kappa|^p`.
//!
//! Sign conventions: points run counterclockwise, `n` is the unit tangent
//! rotated clockwise (the outward normal), and curvature is negative on
//! convex curves so that `V n` points inward there.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::anisotropy::{Anisotropy, Elliptic};
use crate::driver::{Advance, EventKind, FlowEvent, FlowLaw};
use crate::error::{Error, Result};
use crate::geom::{is_simple, perimeter, signed_area, Vec2};

pub const MIN_POINTS: usize = 16;

/// Explicit-scheme safety factor in `dt <= 0.25 ds^2 / max(weight M)`.
pub const PARABOLIC_SAFETY: f64 = 0.25;

/// Curvatures above this magnitude stop a power-law run.
pub const KAPPA_CAP: f64 = 1e6;

/// Cap on `|kappa|^(p - 1)` in the power-law step bound.
pub const POWER_WEIGHT_CAP: f64 = 1e2;

/// Closed counterclockwise polyline with at least [`MIN_POINTS`] vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveFile", into = "CurveFile")]
pub struct SmoothCurve {
    points: Vec<Vec2>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CurveFile {
    points: Vec<Vec2>,
}

impl TryFrom<CurveFile> for SmoothCurve {
    type Error = Error;
    fn try_from(f: CurveFile) -> Result<Self> {
        SmoothCurve::new(f.points)
    }
}

impl From<SmoothCurve> for CurveFile {
    fn from(c: SmoothCurve) -> Self {
        CurveFile { points: c.points }
    }
}

/// Discrete frame and curvature at one vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalGeometry {
    pub tangent: Vec2,
    pub normal: Vec2,
    pub ds: f64,
    pub kappa: f64,
}

impl SmoothCurve {
    /// Checks point count, finiteness, positive edges, simplicity and orientation.
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < MIN_POINTS {
            return Err(Error::Validation(format!(
                "curve needs at least {MIN_POINTS} points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("curve has non-finite coordinates".into()));
        }
        let curve = SmoothCurve { points };
        curve.check_edges()?;
        if !is_simple(&curve.points) {
            return Err(Error::Validation("curve is self-intersecting".into()));
        }
        if signed_area(&curve.points) <= 0.0 {
            return Err(Error::Validation("curve must be counterclockwise".into()));
        }
        Ok(curve)
    }

    /// Skips the simplicity and orientation checks.
    pub(crate) fn from_points_unchecked(points: Vec<Vec2>) -> Self {
        SmoothCurve { points }
    }

    /// Circle of radius `r` sampled at `n` equally spaced angles starting at angle 0.
    pub fn circle(center: Vec2, r: f64, n: usize) -> Result<Self> {
        SmoothCurve::ellipse(center, r, r, n)
    }

    /// Axis-aligned ellipse sampled at equally spaced parameter angles.
    pub fn ellipse(center: Vec2, a: f64, b: f64, n: usize) -> Result<Self> {
        SmoothCurve::new(
            (0..n)
                .map(|k| {
                    let t = TAU * k as f64 / n as f64;
                    center + Vec2::new(a * t.cos(), b * t.sin())
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec2> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn perimeter(&self) -> f64 {
        perimeter(&self.points)
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.points.len() as f64;
        self.points.iter().fold(Vec2::ZERO, |a, p| a + *p) * (1.0 / n)
    }

    /// Mean distance of the vertices from their centroid.
    pub fn mean_radius(&self) -> f64 {
        let c = self.centroid();
        self.points.iter().map(|p| p.dist(c)).sum::<f64>() / self.points.len() as f64
    }

    pub fn min_edge(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|j| self.points[j].dist(self.points[(j + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// `sum_edges Phi(n_edge) |edge|`.
    pub fn energy(&self, phi: &Anisotropy) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|j| {
                let e = self.points[(j + 1) % n] - self.points[j];
                phi.value(e.rot_cw())
            })
            .sum()
    }

    fn check_edges(&self) -> Result<()> {
        let n = self.points.len();
        for j in 0..n {
            if self.points[j] == self.points[(j + 1) % n] {
                return Err(Error::DegenerateEdge(j));
            }
        }
        Ok(())
    }

    #[inline]
    fn at(&self, j: isize) -> Vec2 {
        let n = self.points.len() as isize;
        self.points[j.rem_euclid(n) as usize]
    }

    /// Outward unit normal of edge `j -> j + 1`.
    #[inline]
    fn edge_normal(&self, j: usize) -> Vec2 {
        (self.at(j as isize + 1) - self.points[j]).rot_cw().normalized()
    }

    /// Tangent, normal, dual length and turning-angle curvature at vertex `j`.
    pub fn discrete_geometry(&self, j: usize) -> Result<LocalGeometry> {
        let n = self.points.len();
        if n < MIN_POINTS {
            return Err(Error::Validation(format!("curve has only {n} points")));
        }
        let j = j % n;
        let prev = self.at(j as isize - 1);
        let cur = self.points[j];
        let next = self.at(j as isize + 1);
        let e0 = cur - prev;
        let e1 = next - cur;
        if e0.norm() == 0.0 {
            return Err(Error::DegenerateEdge((j + n - 1) % n));
        }
        if e1.norm() == 0.0 {
            return Err(Error::DegenerateEdge(j));
        }
        let chord = next - prev;
        let tangent = chord.normalized();
        let ds = 0.5 * (e0.norm() + e1.norm());
        let turning = e0.cross(e1).atan2(e0.dot(e1));
        Ok(LocalGeometry {
            tangent,
            normal: tangent.rot_cw(),
            ds,
            kappa: -turning / ds,
        })
    }

    /// `-T_j . (grad Phi(n_{j+1/2}) - grad Phi(n_{j-1/2})) / ds_j`.
    pub fn kappa_phi_discrete(&self, phi: &Anisotropy, j: usize) -> Result<f64> {
        let e = phi.as_elliptic().ok_or_else(|| {
            Error::Unsupported(
                "smooth weighted curvature needs an elliptic anisotropy; use the crystalline flow".into(),
            )
        })?;
        let g = self.discrete_geometry(j)?;
        let n = self.points.len();
        let j = j % n;
        let plus = e.gradient(self.edge_normal(j));
        let minus = e.gradient(self.edge_normal((j + n - 1) % n));
        Ok(-g.tangent.dot(plus - minus) / g.ds)
    }

    /// Resamples to `n` points at uniform arc length, starting at the first point.
    pub fn resample(&self, n: usize) -> Result<SmoothCurve> {
        if n < MIN_POINTS {
            return Err(Error::Validation(format!("resample needs at least {MIN_POINTS} points")));
        }
        Ok(SmoothCurve {
            points: resample_closed(&self.points, n),
        })
    }
}

/// Uniform arc-length resampling of a closed polyline.
fn resample_closed(points: &[Vec2], n: usize) -> Vec<Vec2> {
    let m = points.len();
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for j in 0..m {
        let l = points[j].dist(points[(j + 1) % m]);
        cum.push(cum[j] + l);
    }
    let total = cum[m];
    let mut out = Vec::with_capacity(n);
    out.push(points[0]);
    let mut seg = 0;
    for k in 1..n {
        let s = total * k as f64 / n as f64;
        while seg + 1 < m && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        let a = points[seg];
        let b = points[(seg + 1) % m];
        out.push(a + (b - a) * t);
    }
    out
}

/// Per-vertex frames and weighted curvatures for an elliptic energy.
struct WeightedStencil {
    normals: Vec<Vec2>,
    kappa_phi: Vec<f64>,
    min_edge: f64,
}

fn weighted_stencil(curve: &SmoothCurve, phi: &Elliptic) -> Result<WeightedStencil> {
    let pts = &curve.points;
    let n = pts.len();
    let mut edge_grad = Vec::with_capacity(n);
    let mut edge_len = Vec::with_capacity(n);
    for j in 0..n {
        let e = pts[(j + 1) % n] - pts[j];
        let l = e.norm();
        if l == 0.0 {
            return Err(Error::DegenerateEdge(j));
        }
        edge_len.push(l);
        edge_grad.push(phi.gradient(e.rot_cw() * (1.0 / l)));
    }
    let mut normals = Vec::with_capacity(n);
    let mut kappa_phi = Vec::with_capacity(n);
    for j in 0..n {
        let jm = (j + n - 1) % n;
        let t = (pts[(j + 1) % n] - pts[jm]).normalized();
        let ds = 0.5 * (edge_len[j] + edge_len[jm]);
        normals.push(t.rot_cw());
        kappa_phi.push(-t.dot(edge_grad[j] - edge_grad[jm]) / ds);
    }
    let min_edge = edge_len.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(WeightedStencil {
        normals,
        kappa_phi,
        min_edge,
    })
}

fn require_elliptic(phi: &Anisotropy) -> Result<&Elliptic> {
    phi.as_elliptic().ok_or_else(|| {
        Error::Unsupported("smooth flow needs an elliptic surface energy; use the crystalline flow".into())
    })
}

/// Explicit step bound `0.25 (min ds)^2 / max_j weight(n_j) M(n_j)`.
pub fn weighted_stability_bound(curve: &SmoothCurve, phi: &Anisotropy, mobility: &Anisotropy) -> Result<f64> {
    let e = require_elliptic(phi)?;
    let st = weighted_stencil(curve, e)?;
    Ok(weighted_bound(&st, e, mobility))
}

fn weighted_bound(st: &WeightedStencil, phi: &Elliptic, mobility: &Anisotropy) -> f64 {
    let diffusivity = st
        .normals
        .iter()
        .map(|n| phi.curvature_weight(*n) * mobility.value(*n))
        .fold(0.0f64, f64::max);
    PARABOLIC_SAFETY * st.min_edge * st.min_edge / diffusivity
}

/// Normal velocities `M(n_j) kappa_Phi,j` at every vertex.
pub fn weighted_velocities(curve: &SmoothCurve, phi: &Anisotropy, mobility: &Anisotropy) -> Result<Vec<Vec2>> {
    let e = require_elliptic(phi)?;
    let st = weighted_stencil(curve, e)?;
    Ok(st
        .normals
        .iter()
        .zip(&st.kappa_phi)
        .map(|(n, k)| *n * (mobility.value(*n) * k))
        .collect())
}

/// `x_j <- x_j + dt M(n_j) kappa_Phi,j n_j`, then uniform resampling.
pub fn step_weighted(curve: &SmoothCurve, phi: &Anisotropy, mobility: &Anisotropy, dt: f64) -> Result<SmoothCurve> {
    let e = require_elliptic(phi)?;
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("invalid time step {dt}")));
    }
    let st = weighted_stencil(curve, e)?;
    let bound = weighted_bound(&st, e, mobility);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::StabilityViolation { dt, bound });
    }
    let moved: Vec<Vec2> = curve
        .points
        .iter()
        .zip(st.normals.iter().zip(&st.kappa_phi))
        .map(|(x, (n, k))| *x + *n * (dt * mobility.value(*n) * k))
        .collect();
    Ok(SmoothCurve {
        points: resample_closed(&moved, curve.len()),
    })
}

fn check_exponent(exponent: f64) -> Result<()> {
    if (exponent - 1.0 / 3.0).abs() < 1e-12 || exponent == 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("power-law exponent must be 1/3 or 1, got {exponent}")))
    }
}

/// Isotropic curvature, normal and edge data for the power law. Uses the
/// Euclidean divergence stencil so that exponent 1 matches the weighted flow.
fn power_stencil(curve: &SmoothCurve) -> Result<WeightedStencil> {
    weighted_stencil(curve, &Elliptic::euclidean())
}

/// Explicit step bound for the power law, weight `min(|kappa|^(p-1), cap)`.
pub fn power_stability_bound(curve: &SmoothCurve, exponent: f64) -> Result<f64> {
    check_exponent(exponent)?;
    let st = power_stencil(curve)?;
    Ok(power_bound(&st, exponent))
}

fn power_bound(st: &WeightedStencil, exponent: f64) -> f64 {
    let w = st
        .kappa_phi
        .iter()
        .map(|k| k.abs().powf(exponent - 1.0).min(POWER_WEIGHT_CAP))
        .fold(0.0f64, f64::max);
    PARABOLIC_SAFETY * st.min_edge * st.min_edge / w
}

/// Power-law velocities `sgn(kappa) |kappa|^p n_j`.
pub fn power_velocities(curve: &SmoothCurve, exponent: f64) -> Result<Vec<Vec2>> {
    check_exponent(exponent)?;
    let st = power_stencil(curve)?;
    Ok(st
        .normals
        .iter()
        .zip(&st.kappa_phi)
        .map(|(n, k)| *n * (k.signum() * k.abs().powf(exponent)))
        .collect())
}

/// Outcome of a power-law step.
#[derive(Clone, Debug)]
pub enum PowerStep {
    Moved(SmoothCurve),
    /// Some `|kappa|` exceeded [`KAPPA_CAP`]; the curve was left in place.
    Singular { max_kappa: f64 },
}

/// `x_j <- x_j + dt sgn(kappa_j) |kappa_j|^p n_j`, then uniform resampling.
pub fn step_power(curve: &SmoothCurve, exponent: f64, dt: f64) -> Result<PowerStep> {
    check_exponent(exponent)?;
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("invalid time step {dt}")));
    }
    let st = power_stencil(curve)?;
    let max_kappa = st.kappa_phi.iter().fold(0.0f64, |a, k| a.max(k.abs()));
    if max_kappa > KAPPA_CAP {
        return Ok(PowerStep::Singular { max_kappa });
    }
    let bound = power_bound(&st, exponent);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::StabilityViolation { dt, bound });
    }
    let moved: Vec<Vec2> = curve
        .points
        .iter()
        .zip(st.normals.iter().zip(&st.kappa_phi))
        .map(|(x, (n, k))| *x + *n * (dt * k.signum() * k.abs().powf(exponent)))
        .collect();
    Ok(PowerStep::Moved(SmoothCurve {
        points: resample_closed(&moved, curve.len()),
    }))
}

fn extinct_or(state: SmoothCurve, dt: f64) -> Advance<SmoothCurve> {
    if state.area() <= 0.0 {
        Advance {
            state,
            dt_taken: dt,
            events: vec![FlowEvent {
                t: dt,
                kind: EventKind::Extinction,
                facet: None,
                detail: "enclosed area vanished".into(),
            }],
            stop: true,
        }
    } else {
        Advance {
            state,
            dt_taken: dt,
            events: Vec::new(),
            stop: false,
        }
    }
}

/// `V = M(n) kappa_Phi` for an elliptic energy.
#[derive(Clone, Debug)]
pub struct WeightedLaw {
    pub phi: Anisotropy,
    pub mobility: Anisotropy,
}

impl WeightedLaw {
    pub fn new(phi: Anisotropy, mobility: Anisotropy) -> Result<Self> {
        require_elliptic(&phi)?;
        Ok(WeightedLaw { phi, mobility })
    }
}

impl FlowLaw for WeightedLaw {
    type State = SmoothCurve;

    fn stable_dt(&self, s: &SmoothCurve) -> Result<f64> {
        weighted_stability_bound(s, &self.phi, &self.mobility)
    }

    fn advance(&self, s: &SmoothCurve, dt: f64) -> Result<Advance<SmoothCurve>> {
        let next = step_weighted(s, &self.phi, &self.mobility, dt)?;
        Ok(extinct_or(next, dt))
    }

    fn energy(&self, s: &SmoothCurve) -> f64 {
        s.energy(&self.phi)
    }

    fn area(&self, s: &SmoothCurve) -> f64 {
        s.area()
    }

    fn min_length(&self, s: &SmoothCurve) -> f64 {
        s.min_edge()
    }
}

/// `V = sgn(kappa) |kappa|^p` with Euclidean energy and unit mobility.
#[derive(Clone, Copy, Debug)]
pub struct PowerLaw {
    pub exponent: f64,
}

impl PowerLaw {
    pub fn new(exponent: f64) -> Result<Self> {
        check_exponent(exponent)?;
        Ok(PowerLaw { exponent })
    }
}

impl FlowLaw for PowerLaw {
    type State = SmoothCurve;

    fn stable_dt(&self, s: &SmoothCurve) -> Result<f64> {
        power_stability_bound(s, self.exponent)
    }

    fn advance(&self, s: &SmoothCurve, dt: f64) -> Result<Advance<SmoothCurve>> {
        match step_power(s, self.exponent, dt)? {
            PowerStep::Moved(next) => Ok(extinct_or(next, dt)),
            PowerStep::Singular { max_kappa } => Ok(Advance {
                state: s.clone(),
                dt_taken: 0.0,
                events: vec![FlowEvent {
                    t: 0.0,
                    kind: EventKind::SingularityStop,
                    facet: None,
                    detail: format!("|kappa| reached {max_kappa:e}"),
                }],
                stop: true,
            }),
        }
    }

    fn energy(&self, s: &SmoothCurve) -> f64 {
        s.perimeter()
    }

    fn area(&self, s: &SmoothCurve) -> f64 {
        s.area()
    }

    fn min_length(&self, s: &SmoothCurve) -> f64 {
        s.min_edge()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{evolve, Controls};
    use crate::geom::Mat2;

    fn unit_circle(n: usize) -> SmoothCurve {
        SmoothCurve::circle(Vec2::ZERO, 1.0, n).unwrap()
    }

    #[test]
    fn circle_curvature_is_negative_one() {
        let c = unit_circle(256);
        for j in 0..256 {
            let g = c.discrete_geometry(j).unwrap();
            assert!((g.kappa + 1.0).abs() < 1e-3, "{}", g.kappa);
        }
    }

    #[test]
    fn frame_at_angle_zero() {
        let g = unit_circle(256).discrete_geometry(0).unwrap();
        assert!((g.tangent - Vec2::new(0.0, 1.0)).norm() < 1e-14);
        assert!((g.normal - Vec2::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn colinear_vertex_has_zero_curvature() {
        // square sampled with several points per side
        let mut pts = Vec::new();
        for side in 0..4 {
            for k in 0..5 {
                let s = -1.0 + 0.4 * k as f64;
                pts.push(match side {
                    0 => Vec2::new(s, -1.0),
                    1 => Vec2::new(1.0, s),
                    2 => Vec2::new(-s, 1.0),
                    _ => Vec2::new(-1.0, -s),
                });
            }
        }
        let c = SmoothCurve::new(pts).unwrap();
        assert_eq!(c.discrete_geometry(2).unwrap().kappa, 0.0);
        assert!(c.discrete_geometry(5).unwrap().kappa < 0.0);
        let v = power_velocities(&c, 1.0 / 3.0).unwrap();
        assert_eq!(v[2], Vec2::ZERO);
    }

    #[test]
    fn degenerate_edge_is_reported() {
        let mut pts = unit_circle(32).into_points();
        pts[5] = pts[4];
        assert!(matches!(SmoothCurve::new(pts.clone()), Err(Error::DegenerateEdge(4))));
        let raw = SmoothCurve::from_points_unchecked(pts);
        assert!(matches!(raw.discrete_geometry(5), Err(Error::DegenerateEdge(4))));
    }

    #[test]
    fn construction_rejects_clockwise_and_short_curves() {
        let mut pts = unit_circle(32).into_points();
        pts.reverse();
        assert!(SmoothCurve::new(pts).is_err());
        assert!(SmoothCurve::circle(Vec2::ZERO, 1.0, 8).is_err());
    }

    #[test]
    fn weighted_curvature_examples() {
        let id = Anisotropy::euclidean();
        let c = unit_circle(256);
        for j in 0..256 {
            assert!((c.kappa_phi_discrete(&id, j).unwrap() + 1.0).abs() < 1e-3);
        }
        let c2 = SmoothCurve::circle(Vec2::ZERO, 2.0, 256).unwrap();
        assert!((c2.kappa_phi_discrete(&id, 17).unwrap() + 0.5).abs() < 1e-3);
        let g = Anisotropy::elliptic(Mat2::diag(4.0, 1.0)).unwrap();
        let c512 = unit_circle(512);
        // vertex 384 sits at angle 3pi/2, i.e. the point (0,-1)
        assert!((c512.points()[384] - Vec2::new(0.0, -1.0)).norm() < 1e-12);
        let k = c512.kappa_phi_discrete(&g, 384).unwrap();
        assert!((k + 4.0).abs() < 2e-2, "{k}");
    }

    #[test]
    fn crystalline_energy_is_rejected_by_smooth_stencil() {
        let sq = Anisotropy::regular(4, 1.0, 0.0).unwrap();
        assert!(matches!(
            unit_circle(32).kappa_phi_discrete(&sq, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn stability_violation_reports_bound() {
        let id = Anisotropy::euclidean();
        let c = unit_circle(64);
        let bound = weighted_stability_bound(&c, &id, &id).unwrap();
        match step_weighted(&c, &id, &id, 2.0 * bound) {
            Err(Error::StabilityViolation { bound: b, .. }) => assert_eq!(b, bound),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_step_only_resamples() {
        let id = Anisotropy::euclidean();
        let c = SmoothCurve::ellipse(Vec2::ZERO, 2.0, 1.0, 128).unwrap();
        let next = step_weighted(&c, &id, &id, 0.0).unwrap();
        let ds = c.perimeter() / 128.0;
        let h = crate::harness::hausdorff(c.points(), next.points()).unwrap();
        assert!(h <= ds * ds, "{h}");
    }

    #[test]
    fn exponent_one_matches_weighted_velocity() {
        let id = Anisotropy::euclidean();
        let c = SmoothCurve::ellipse(Vec2::new(0.2, 0.1), 1.5, 0.7, 200).unwrap();
        let a = weighted_velocities(&c, &id, &id).unwrap();
        let b = power_velocities(&c, 1.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((*x - *y).norm() <= 1e-12);
        }
    }

    #[test]
    fn power_rejects_other_exponents() {
        assert!(matches!(step_power(&unit_circle(32), 0.5, 1e-6), Err(Error::Domain(_))));
    }

    #[test]
    fn power_singularity_stops() {
        let c = SmoothCurve::circle(Vec2::ZERO, 1e-7, 32).unwrap();
        assert!(matches!(
            step_power(&c, 1.0 / 3.0, 0.0).unwrap(),
            PowerStep::Singular { .. }
        ));
    }

    #[test]
    fn resample_preserves_uniform_square() {
        let mut pts = Vec::new();
        for side in 0..4 {
            for k in 0..4 {
                let s = -1.0 + 0.5 * k as f64;
                pts.push(match side {
                    0 => Vec2::new(s, -1.0),
                    1 => Vec2::new(1.0, s),
                    2 => Vec2::new(-s, 1.0),
                    _ => Vec2::new(-1.0, -s),
                });
            }
        }
        let c = SmoothCurve::new(pts).unwrap();
        let r = c.resample(16).unwrap();
        for (a, b) in c.points().iter().zip(r.points()) {
            assert!((*a - *b).norm() < 1e-12);
        }
    }

    #[test]
    fn refinement_keeps_perimeter() {
        let c = unit_circle(256);
        let r = c.resample(512).unwrap();
        assert!(((r.perimeter() - c.perimeter()) / c.perimeter()).abs() <= 1e-4);
    }

    #[test]
    fn resampled_edges_are_uniform() {
        let c = SmoothCurve::ellipse(Vec2::ZERO, 3.0, 1.0, 300).unwrap();
        let r = c.resample(300).unwrap();
        let pts = r.points();
        let n = pts.len();
        let lens: Vec<f64> = (0..n).map(|j| pts[j].dist(pts[(j + 1) % n])).collect();
        let lo = lens.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = lens.iter().cloned().fold(0.0, f64::max);
        assert!((hi - lo) / hi < 0.01);
    }

    #[test]
    fn convex_curves_shrink_under_weighted_flow() {
        let phi = Anisotropy::elliptic(Mat2::new(2.0, 0.4, 0.4, 1.0)).unwrap();
        let mob = Anisotropy::elliptic(Mat2::diag(1.0, 3.0)).unwrap();
        let c = SmoothCurve::ellipse(Vec2::ZERO, 1.0, 0.6, 128).unwrap();
        for j in 0..128 {
            assert!(c.kappa_phi_discrete(&phi, j).unwrap() < 0.0);
        }
        let law = WeightedLaw::new(phi, mob).unwrap();
        let tr = evolve(&law, c, 0.05, &Controls::default().sampled(&[0.01, 0.02, 0.03, 0.04])).unwrap();
        for w in tr.records.windows(2) {
            assert!(w[1].area < w[0].area);
            assert!(w[1].energy <= w[0].energy);
        }
    }

    #[test]
    fn curve_json_round_trip() {
        let c = unit_circle(16);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.starts_with("{\"points\":[["));
        let back: SmoothCurve = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<SmoothCurve>(r#"{"points":[[0,0],[1,0],[0,1]]}"#).is_err());
    }
}
