//! Crystalline weighted curvature flow of admissible polygons.
//!
//! The state is a cyclic list of facets, each a supporting line `n . x = h`
//! with a unit outward normal taken from the fan of a crystalline energy.
//! Vertices and facet lengths are derived. Facet `i` moves with normal
//! velocity `V_i = M(n_i) * kappa_i` where `kappa_i = -sigma_i * Lambda(n_i) / l_i`.

use serde::{Deserialize, Serialize};

use crate::anisotropy::{angle_distance, Anisotropy, Crystalline, ANGLE_TOL};
use crate::driver::{self, Advance, Controls, EventKind, FlowEvent, FlowLaw, FlowTrace};
use crate::error::{Error, Result};
use crate::geom::{intersect_lines, is_simple, signed_area, Vec2};

/// Facets at or below this length are removed at an event.
pub const COLLAPSE_TOL: f64 = 1e-10;

/// Safety factor in the explicit step bound.
pub const STEP_SAFETY: f64 = 0.1;

/// A supporting line `normal . x = offset` of a polygon edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "FacetSpec", into = "FacetSpec")]
pub struct Facet {
    pub normal: Vec2,
    pub offset: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct FacetSpec {
    theta: f64,
    offset: f64,
}

impl From<FacetSpec> for Facet {
    fn from(s: FacetSpec) -> Self {
        Facet {
            normal: Vec2::from_angle(s.theta),
            offset: s.offset,
        }
    }
}

impl From<Facet> for FacetSpec {
    fn from(f: Facet) -> Self {
        FacetSpec {
            theta: f.normal.angle(),
            offset: f.offset,
        }
    }
}

impl Facet {
    pub fn new(theta: f64, offset: f64) -> Self {
        FacetSpec { theta, offset }.into()
    }
}

/// Closed counterclockwise polygon stored as facet supporting lines.
///
/// Vertex `i` is the intersection of facets `i - 1` and `i`, so facet `i`
/// spans vertices `i` and `i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrystallinePolygon {
    pub facets: Vec<Facet>,
}

/// One failed admissibility check. Corner `i` joins facets `i - 1` and `i`.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    TooFewFacets(usize),
    NormalNotInFan { facet: usize },
    ParallelNeighbors { corner: usize },
    NonPositiveLength { facet: usize, length: f64 },
    NotCounterclockwise { area: f64 },
    NotSimple,
    InadmissibleCorner { corner: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::TooFewFacets(n) => write!(f, "polygon has {n} facets, needs at least 3"),
            Violation::NormalNotInFan { facet } => {
                write!(f, "facet {facet}: normal is not a fan direction")
            }
            Violation::ParallelNeighbors { corner } => write!(
                f,
                "corner {corner}: adjacent facets are parallel and their lines do not intersect"
            ),
            Violation::NonPositiveLength { facet, length } => {
                write!(f, "facet {facet}: non-positive length {length:e}")
            }
            Violation::NotCounterclockwise { area } => {
                write!(f, "polygon is not counterclockwise (signed area {area:e})")
            }
            Violation::NotSimple => write!(f, "polygon is self-intersecting"),
            Violation::InadmissibleCorner { corner } => write!(
                f,
                "corner {corner}: incident normals are not adjacent in the fan"
            ),
        }
    }
}

/// All violations found by [`CrystallinePolygon::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport(pub Vec<Violation>);

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl From<ViolationReport> for Error {
    fn from(r: ViolationReport) -> Self {
        Error::Validation(r.to_string())
    }
}

impl CrystallinePolygon {
    pub fn new(facets: Vec<Facet>) -> Self {
        CrystallinePolygon { facets }
    }

    /// The Wulff polygon of `phi` scaled by `scale` about the origin.
    pub fn wulff(phi: &Crystalline, scale: f64) -> Self {
        CrystallinePolygon {
            facets: phi
                .fan()
                .iter()
                .zip(phi.normals())
                .map(|(d, n)| Facet {
                    normal: *n,
                    offset: scale * d.phi,
                })
                .collect(),
        }
    }

    /// Polygon through counterclockwise vertices; edge `i` runs from vertex `i` to `i + 1`.
    pub fn from_vertices(vertices: &[Vec2]) -> Self {
        let m = vertices.len();
        let facets = (0..m)
            .map(|i| {
                let a = vertices[i];
                let n = (vertices[(i + 1) % m] - a).rot_cw().normalized();
                Facet {
                    normal: n,
                    offset: n.dot(a),
                }
            })
            .collect();
        CrystallinePolygon { facets }
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    /// Vertex `i` = intersection of facets `i - 1` and `i`. Parallel neighbours yield NaN.
    pub fn vertices(&self) -> Vec<Vec2> {
        let m = self.facets.len();
        (0..m)
            .map(|i| {
                let a = self.facets[(i + m - 1) % m];
                let b = self.facets[i];
                intersect_lines(a.normal, a.offset, b.normal, b.offset)
                    .unwrap_or(Vec2::new(f64::NAN, f64::NAN))
            })
            .collect()
    }

    /// Signed facet lengths along the counterclockwise tangent.
    pub fn lengths(&self) -> Vec<f64> {
        let v = self.vertices();
        let m = v.len();
        (0..m)
            .map(|i| (v[(i + 1) % m] - v[i]).dot(self.facets[i].normal.rot_ccw()))
            .collect()
    }

    pub fn min_length(&self) -> f64 {
        self.lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Whether corner `i` (between facets `i - 1` and `i`) turns counterclockwise.
    pub fn corner_is_convex(&self, i: usize) -> bool {
        let m = self.facets.len();
        let prev = self.facets[(i + m - 1) % m].normal;
        prev.cross(self.facets[i % m].normal) > 0.0
    }

    /// Convexity indicator of facet `i`: +1 both ends convex, -1 both concave, 0 mixed.
    pub fn sigma(&self, i: usize) -> i8 {
        let m = self.facets.len();
        match (self.corner_is_convex(i), self.corner_is_convex((i + 1) % m)) {
            (true, true) => 1,
            (false, false) => -1,
            _ => 0,
        }
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices())
    }

    /// `sum_i Phi(n_i) l_i`.
    pub fn energy(&self, phi: &Anisotropy) -> f64 {
        self.facets
            .iter()
            .zip(self.lengths())
            .map(|(f, l)| phi.value(f.normal) * l)
            .sum()
    }

    pub fn translated(&self, b: Vec2) -> Self {
        CrystallinePolygon {
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    normal: f.normal,
                    offset: f.offset + f.normal.dot(b),
                })
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        CrystallinePolygon {
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    normal: f.normal,
                    offset: f.offset * s,
                })
                .collect(),
        }
    }

    /// Checks the polygon against the fan of `phi`.
    pub fn validate(&self, phi: &Crystalline) -> Result<(), ViolationReport> {
        let m = self.facets.len();
        if m < 3 {
            return Err(ViolationReport(vec![Violation::TooFewFacets(m)]));
        }
        let mut out = Vec::new();
        let idx: Vec<Option<usize>> = self.facets.iter().map(|f| phi.fan_index(f.normal)).collect();
        for (i, k) in idx.iter().enumerate() {
            if k.is_none() {
                out.push(Violation::NormalNotInFan { facet: i });
            }
        }
        for i in 0..m {
            let prev = self.facets[(i + m - 1) % m].normal;
            let cur = self.facets[i].normal;
            let a = angle_distance(prev.angle(), cur.angle());
            if a <= ANGLE_TOL || std::f64::consts::PI - a <= ANGLE_TOL {
                out.push(Violation::ParallelNeighbors { corner: i });
            }
        }
        if !out.iter().any(|v| matches!(v, Violation::ParallelNeighbors { .. })) {
            let lengths = self.lengths();
            let mut lengths_ok = true;
            for (i, &l) in lengths.iter().enumerate() {
                if !(l > 0.0) {
                    lengths_ok = false;
                    out.push(Violation::NonPositiveLength { facet: i, length: l });
                }
            }
            if lengths_ok {
                let v = self.vertices();
                let area = signed_area(&v);
                if !(area > 0.0) {
                    out.push(Violation::NotCounterclockwise { area });
                } else if !is_simple(&v) {
                    out.push(Violation::NotSimple);
                }
            }
            let fan_len = phi.fan().len();
            for i in 0..m {
                let (Some(kp), Some(k)) = (idx[(i + m - 1) % m], idx[i]) else {
                    continue;
                };
                let adjacent = if self.corner_is_convex(i) {
                    k == (kp + 1) % fan_len
                } else {
                    kp == (k + 1) % fan_len
                };
                if !adjacent {
                    out.push(Violation::InadmissibleCorner { corner: i });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(ViolationReport(out))
        }
    }
}

fn require_crystalline(phi: &Anisotropy) -> Result<&Crystalline> {
    phi.as_crystalline().ok_or_else(|| {
        Error::Unsupported("crystalline flow needs a crystalline surface energy".into())
    })
}

/// `Lambda_Phi(n)` for a facet normal that lies in the fan.
fn wulff_facet_length(phi: &Crystalline, n: Vec2) -> Result<f64> {
    phi.fan_index(n)
        .map(|k| phi.wulff().facet_lengths[k])
        .ok_or(Error::NotAFacet { angle: n.angle() })
}

/// Crystalline weighted curvature `-sigma_i Lambda(n_i) / l_i` of facet `i`.
pub fn facet_curvature(poly: &CrystallinePolygon, phi: &Anisotropy, i: usize) -> Result<f64> {
    let c = require_crystalline(phi)?;
    let l = poly.lengths()[i];
    curvature_with_length(poly, c, i, l)
}

fn curvature_with_length(poly: &CrystallinePolygon, phi: &Crystalline, i: usize, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::StateCorruption { facet: i, length: l });
    }
    let lambda = wulff_facet_length(phi, poly.facets[i].normal)?;
    Ok(-(poly.sigma(i) as f64) * lambda / l)
}

/// Normal velocity `M(n_i) * kappa_i` of facet `i`.
pub fn facet_velocity(
    poly: &CrystallinePolygon,
    phi: &Anisotropy,
    mobility: &Anisotropy,
    i: usize,
) -> Result<f64> {
    let kappa = facet_curvature(poly, phi, i)?;
    Ok(mobility.value(poly.facets[i].normal) * kappa)
}

/// Velocities of every facet.
pub fn velocities(poly: &CrystallinePolygon, phi: &Anisotropy, mobility: &Anisotropy) -> Result<Vec<f64>> {
    let c = require_crystalline(phi)?;
    poly.lengths()
        .into_iter()
        .enumerate()
        .map(|(i, l)| Ok(mobility.value(poly.facets[i].normal) * curvature_with_length(poly, c, i, l)?))
        .collect()
}

/// Largest admissible explicit step `0.1 min l / (max |V| (1 + max c))`
/// with corner coupling `c = 1/sin(a) + |cot(a)|`.
pub fn stability_bound(poly: &CrystallinePolygon, phi: &Anisotropy, mobility: &Anisotropy) -> Result<f64> {
    let v = velocities(poly, phi, mobility)?;
    let vmax = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if vmax == 0.0 {
        return Ok(f64::INFINITY);
    }
    let m = poly.facets.len();
    let mut coupling = 0.0f64;
    for i in 0..m {
        let a = poly.facets[(i + m - 1) % m].normal;
        let b = poly.facets[i].normal;
        let s = a.cross(b).abs();
        coupling = coupling.max((1.0 + a.dot(b).abs()) / s);
    }
    Ok(STEP_SAFETY * poly.min_length() / (vmax * (1.0 + coupling)))
}

/// Result of one explicit step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub polygon: CrystallinePolygon,
    /// Time actually advanced; shorter than requested when a facet collapsed.
    pub dt_taken: f64,
    /// Events, with `t` measured from the start of the step.
    pub events: Vec<FlowEvent>,
    pub extinct: bool,
}

/// One frozen-coefficient explicit Euler step of the offsets.
///
/// Facets that are already at or below [`COLLAPSE_TOL`] are removed first
/// without advancing time. A step that would drive a facet length negative
/// is bisected down to the collapse time.
pub fn step(poly: &CrystallinePolygon, phi: &Anisotropy, mobility: &Anisotropy, dt: f64) -> Result<StepOutcome> {
    let c = require_crystalline(phi)?;
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("invalid time step {dt}")));
    }
    if poly.lengths().iter().any(|&l| l <= COLLAPSE_TOL) {
        return collapse(poly, c, 0.0);
    }
    if dt == 0.0 {
        return Ok(StepOutcome {
            polygon: poly.clone(),
            dt_taken: 0.0,
            events: Vec::new(),
            extinct: false,
        });
    }
    let bound = stability_bound(poly, phi, mobility)?;
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::StabilityViolation { dt, bound });
    }
    advance_unchecked(poly, c, mobility, dt)
}

/// Step without the stability check. Exposed to the crate for exercising the bisection path.
pub(crate) fn advance_unchecked(
    poly: &CrystallinePolygon,
    phi: &Crystalline,
    mobility: &Anisotropy,
    dt: f64,
) -> Result<StepOutcome> {
    let lengths = poly.lengths();
    let v: Vec<f64> = lengths
        .iter()
        .enumerate()
        .map(|(i, &l)| Ok(mobility.value(poly.facets[i].normal) * curvature_with_length(poly, phi, i, l)?))
        .collect::<Result<_>>()?;
    let moved = |tau: f64| CrystallinePolygon {
        facets: poly
            .facets
            .iter()
            .zip(&v)
            .map(|(f, vi)| Facet {
                normal: f.normal,
                offset: f.offset + vi * tau,
            })
            .collect(),
    };

    let tentative = moved(dt);
    let min_len = tentative.min_length();
    if min_len > COLLAPSE_TOL {
        return Ok(StepOutcome {
            polygon: tentative,
            dt_taken: dt,
            events: Vec::new(),
            extinct: false,
        });
    }
    if min_len > 0.0 {
        return collapse(&tentative, phi, dt);
    }

    // lengths are affine in tau within a frozen step, so min length is continuous
    let (mut lo, mut hi) = (0.0, dt);
    let mut at_lo = poly.clone();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let cand = moved(mid);
        let ml = cand.min_length();
        if ml > 0.0 {
            lo = mid;
            at_lo = cand;
            if ml <= COLLAPSE_TOL {
                break;
            }
        } else {
            hi = mid;
        }
    }
    if at_lo.min_length() > COLLAPSE_TOL {
        // bisection bottomed out in floating point; collapse the shortest facet
        let ls = at_lo.lengths();
        let tol = ls.iter().cloned().fold(f64::INFINITY, f64::min);
        return collapse_with_tol(&at_lo, phi, lo, tol);
    }
    collapse(&at_lo, phi, lo)
}

fn collapse(poly: &CrystallinePolygon, phi: &Crystalline, t: f64) -> Result<StepOutcome> {
    collapse_with_tol(poly, phi, t, COLLAPSE_TOL)
}

/// Removes every facet of length `<= tol`, merging neighbours that become
/// parallel with the same normal.
fn collapse_with_tol(poly: &CrystallinePolygon, phi: &Crystalline, t: f64, tol: f64) -> Result<StepOutcome> {
    let lengths = poly.lengths();
    let mut events = Vec::new();
    let mut kept: Vec<(Facet, f64)> = Vec::new();
    for (i, (f, &l)) in poly.facets.iter().zip(&lengths).enumerate() {
        if l <= tol {
            events.push(FlowEvent {
                t,
                kind: EventKind::FacetCollapse,
                facet: Some(i),
                detail: format!("facet {i} (theta = {:.6}) vanished", f.normal.angle()),
            });
        } else {
            kept.push((*f, l));
        }
    }

    let extinct = |events: &mut Vec<FlowEvent>, remaining: usize| {
        events.push(FlowEvent {
            t,
            kind: EventKind::Extinction,
            facet: None,
            detail: format!("{remaining} facets remain"),
        });
    };

    if kept.len() < 3 {
        extinct(&mut events, kept.len());
        return Ok(StepOutcome {
            polygon: CrystallinePolygon::new(kept.into_iter().map(|(f, _)| f).collect()),
            dt_taken: t,
            events,
            extinct: true,
        });
    }

    // merge cyclic runs of equal normals
    let mut merged = true;
    while merged && kept.len() >= 2 {
        merged = false;
        let m = kept.len();
        for i in 0..m {
            let j = (i + 1) % m;
            if angle_distance(kept[i].0.normal.angle(), kept[j].0.normal.angle()) <= ANGLE_TOL {
                let (a, la) = kept[i];
                let (b, lb) = kept[j];
                let w = la + lb;
                let offset = if w > 0.0 {
                    (a.offset * la + b.offset * lb) / w
                } else {
                    0.5 * (a.offset + b.offset)
                };
                kept[i] = (
                    Facet {
                        normal: a.normal,
                        offset,
                    },
                    w,
                );
                kept.remove(j);
                merged = true;
                break;
            }
        }
    }

    let polygon = CrystallinePolygon::new(kept.into_iter().map(|(f, _)| f).collect());
    if polygon.len() < 3 {
        extinct(&mut events, polygon.len());
        return Ok(StepOutcome {
            polygon,
            dt_taken: t,
            events,
            extinct: true,
        });
    }
    if let Err(report) = polygon.validate(phi) {
        return Err(Error::UnsupportedTopology(format!(
            "after facet removal at t = {t:e}: {report}"
        )));
    }
    Ok(StepOutcome {
        polygon,
        dt_taken: t,
        events,
        extinct: false,
    })
}

/// Crystalline flow law for the generic driver.
#[derive(Clone, Debug)]
pub struct CrystallineLaw {
    pub phi: Anisotropy,
    pub mobility: Anisotropy,
}

impl CrystallineLaw {
    pub fn new(phi: Anisotropy, mobility: Anisotropy) -> Result<Self> {
        require_crystalline(&phi)?;
        Ok(CrystallineLaw { phi, mobility })
    }
}

impl FlowLaw for CrystallineLaw {
    type State = CrystallinePolygon;

    fn stable_dt(&self, s: &CrystallinePolygon) -> Result<f64> {
        if s.lengths().iter().any(|&l| l <= COLLAPSE_TOL) {
            // pending collapse is handled by a zero-length step
            return Ok(f64::INFINITY);
        }
        stability_bound(s, &self.phi, &self.mobility)
    }

    fn advance(&self, s: &CrystallinePolygon, dt: f64) -> Result<Advance<CrystallinePolygon>> {
        let out = step(s, &self.phi, &self.mobility, dt)?;
        Ok(Advance {
            state: out.polygon,
            dt_taken: out.dt_taken,
            events: out.events,
            stop: out.extinct,
        })
    }

    fn energy(&self, s: &CrystallinePolygon) -> f64 {
        s.energy(&self.phi)
    }

    fn area(&self, s: &CrystallinePolygon) -> f64 {
        s.area()
    }

    fn min_length(&self, s: &CrystallinePolygon) -> f64 {
        s.min_length()
    }
}

/// Evolves `poly` to `t_end` or extinction.
pub fn evolve(
    poly: &CrystallinePolygon,
    phi: &Anisotropy,
    mobility: &Anisotropy,
    t_end: f64,
    controls: &Controls,
) -> Result<FlowTrace<CrystallinePolygon>> {
    let c = require_crystalline(phi)?;
    poly.validate(c)?;
    let law = CrystallineLaw::new(phi.clone(), mobility.clone())?;
    driver::evolve(&law, poly.clone(), t_end, controls)
}
