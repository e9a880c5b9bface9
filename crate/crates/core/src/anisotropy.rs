//! Surface-energy and mobility functions on the plane.
//!
//! An [`Anisotropy`] is a positively 1-homogeneous convex function that is
//! positive away from the origin but need not be even. The same type serves as
//! the surface energy `Phi` and as the mobility `M` of a flow.
//!
//! Two families are supported:
//!
//! * **Elliptic**: `Phi(p) = sqrt(p^T G p)` for a symmetric positive-definite
//!   `G`. Smooth away from the origin, with closed-form gradient, curvature
//!   weight and Wulff ellipse `{x : x^T G^{-1} x <= 1}`.
//! * **Crystalline**: given by a fan of directions `theta_i` with support values
//!   `phi_i`. The Wulff shape is the polygon `{x : x . n_i <= phi_i}` and `Phi`
//!   off the fan is the support function of that polygon.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{intersect_lines, Mat2, Vec2};

/// Angular tolerance (radians) when matching a direction against a fan or facet normal.
pub const ANGLE_TOL: f64 = 1e-9;

/// Default number of sampled directions when polygonizing an elliptic Wulff shape.
pub const DEFAULT_WULFF_SAMPLES: usize = 360;

/// Absolute difference of two angles, wrapped into `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// One direction of a crystalline fan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FanDirection {
    pub theta: f64,
    pub phi: f64,
}

/// Convex polygon `W_Phi` with per-facet outward normals and lengths.
///
/// Vertices are counterclockwise and facet `i` spans vertices `i` and `i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffShape {
    pub vertices: Vec<Vec2>,
    pub facet_normals: Vec<Vec2>,
    pub facet_lengths: Vec<f64>,
}

impl WulffShape {
    /// Builds the shape from counterclockwise vertices.
    fn from_vertices(vertices: Vec<Vec2>) -> Self {
        let m = vertices.len();
        let mut facet_normals = Vec::with_capacity(m);
        let mut facet_lengths = Vec::with_capacity(m);
        for i in 0..m {
            let e = vertices[(i + 1) % m] - vertices[i];
            facet_lengths.push(e.norm());
            facet_normals.push(e.rot_cw().normalized());
        }
        WulffShape {
            vertices,
            facet_normals,
            facet_lengths,
        }
    }

    /// Support function `max_v v . p`.
    pub fn support(&self, p: Vec2) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Lambda_Phi(n)`: length of the facet with outward normal `n`.
    pub fn facet_length(&self, n: Vec2) -> Result<f64> {
        if !n.is_finite() || n.norm() == 0.0 {
            return Err(Error::Domain(format!("invalid direction {n:?}")));
        }
        let theta = n.angle();
        self.facet_normals
            .iter()
            .position(|fnorm| angle_distance(fnorm.angle(), theta) <= ANGLE_TOL)
            .map(|i| self.facet_lengths[i])
            .ok_or(Error::NotAFacet { angle: theta })
    }

    pub fn area(&self) -> f64 {
        crate::geom::signed_area(&self.vertices)
    }
}

/// `Phi(p) = sqrt(p^T G p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Elliptic {
    g: Mat2,
}

impl Elliptic {
    pub fn new(g: Mat2) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::Validation("G has non-finite entries".into()));
        }
        if !g.is_symmetric(1e-12) {
            return Err(Error::Validation(format!("G is not symmetric: {g:?}")));
        }
        let g = Mat2::new(g.a, 0.5 * (g.b + g.c), 0.5 * (g.b + g.c), g.d);
        if g.a <= 0.0 || g.det() <= 0.0 {
            return Err(Error::Validation(format!("G is not positive definite: {g:?}")));
        }
        Ok(Elliptic { g })
    }

    pub fn euclidean() -> Self {
        Elliptic { g: Mat2::IDENTITY }
    }

    pub fn matrix(&self) -> Mat2 {
        self.g
    }

    #[inline]
    pub fn value(&self, p: Vec2) -> f64 {
        self.g.quad(p).max(0.0).sqrt()
    }

    #[inline]
    pub fn gradient(&self, p: Vec2) -> Vec2 {
        let gp = self.g.mul_vec(p);
        gp * (1.0 / p.dot(gp).sqrt())
    }

    /// Second derivative of `Phi` along the unit tangent at the unit normal `n`.
    pub fn curvature_weight(&self, n: Vec2) -> f64 {
        let t = n.rot_ccw();
        let gn = self.g.mul_vec(n);
        let phi_sq = n.dot(gn);
        let phi = phi_sq.sqrt();
        let tgn = t.dot(gn);
        self.g.quad(t) / phi - tgn * tgn / (phi_sq * phi)
    }

    /// Mixed second derivative `d^2 Phi / (dt dn)` at the unit normal `n`.
    pub fn mixed_derivative(&self, n: Vec2) -> f64 {
        // Hessian H = G/Phi - (Gn)(Gn)^T/Phi^3 annihilates n by Euler's identity
        let t = n.rot_ccw();
        let gn = self.g.mul_vec(n);
        let phi_sq = n.dot(gn);
        let phi = phi_sq.sqrt();
        t.dot(gn) / phi - t.dot(gn) * n.dot(gn) / (phi_sq * phi)
    }

    /// Polygon inscribed in the Wulff ellipse, touching it at the points whose
    /// outward normals are `k` equally spaced directions starting at angle 0.
    pub fn wulff_shape(&self, k: usize) -> WulffShape {
        let vertices = (0..k)
            .map(|i| self.gradient(Vec2::from_angle(TAU * i as f64 / k as f64)))
            .collect();
        WulffShape::from_vertices(vertices)
    }
}

/// Piecewise-linear anisotropy given by its fan of facet directions.
#[derive(Clone, Debug, PartialEq)]
pub struct Crystalline {
    fan: Vec<FanDirection>,
    normals: Vec<Vec2>,
    wulff: WulffShape,
}

impl Crystalline {
    /// Validates the fan and builds its Wulff polygon.
    ///
    /// The fan must have at least three directions with strictly increasing
    /// angles in `[0, 2pi)`, consecutive gaps below `pi`, positive support
    /// values, and every direction must contribute a facet of positive length.
    pub fn new(fan: Vec<FanDirection>) -> Result<Self> {
        let m = fan.len();
        if m < 3 {
            return Err(Error::Validation(format!(
                "crystalline fan needs at least 3 directions, got {m}"
            )));
        }
        for (i, d) in fan.iter().enumerate() {
            if !d.theta.is_finite() || !(0.0..TAU).contains(&d.theta) {
                return Err(Error::Validation(format!(
                    "fan direction {i}: angle {} outside [0, 2pi)",
                    d.theta
                )));
            }
            if !d.phi.is_finite() || d.phi <= 0.0 {
                return Err(Error::Validation(format!(
                    "fan direction {i}: support value {} must be positive",
                    d.phi
                )));
            }
            if i > 0 && d.theta <= fan[i - 1].theta {
                return Err(Error::Validation(format!(
                    "fan direction {i}: angles must be strictly increasing (duplicate or unsorted)"
                )));
            }
        }
        for i in 0..m {
            let next = if i + 1 < m {
                fan[i + 1].theta
            } else {
                fan[0].theta + TAU
            };
            if next - fan[i].theta >= PI {
                return Err(Error::Validation(format!(
                    "gap after fan direction {i} is not below pi; the Wulff shape would be unbounded"
                )));
            }
        }

        let normals: Vec<Vec2> = fan.iter().map(|d| Vec2::from_angle(d.theta)).collect();
        let scale = fan.iter().map(|d| d.phi).fold(0.0, f64::max);
        let vertices: Vec<Vec2> = (0..m)
            .map(|i| {
                let j = (i + m - 1) % m;
                intersect_lines(normals[j], fan[j].phi, normals[i], fan[i].phi)
                    .expect("consecutive fan directions are not parallel")
            })
            .collect();
        for i in 0..m {
            let signed = (vertices[(i + 1) % m] - vertices[i]).dot(normals[i].rot_ccw());
            if signed <= 1e-12 * scale {
                return Err(Error::Validation(format!(
                    "fan direction {i} (theta = {}) is redundant: its half-plane does not touch the Wulff polygon in a facet",
                    fan[i].theta
                )));
            }
        }
        let mut wulff = WulffShape::from_vertices(vertices);
        // keep the exact fan normals rather than normals recovered from edges
        wulff.facet_normals.clone_from(&normals);
        Ok(Crystalline {
            fan,
            normals,
            wulff,
        })
    }

    /// Crystalline function whose Wulff polygon has the given vertices.
    ///
    /// Vertices may be in either orientation; the origin must lie strictly inside.
    pub fn from_wulff_vertices(vertices: &[Vec2]) -> Result<Self> {
        let mut vs = vertices.to_vec();
        if crate::geom::signed_area(&vs) < 0.0 {
            vs.reverse();
        }
        let m = vs.len();
        let mut fan: Vec<FanDirection> = (0..m)
            .map(|i| {
                let n = (vs[(i + 1) % m] - vs[i]).rot_cw().normalized();
                FanDirection {
                    theta: n.angle(),
                    phi: n.dot(vs[i]),
                }
            })
            .collect();
        fan.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        Crystalline::new(fan)
    }

    pub fn fan(&self) -> &[FanDirection] {
        &self.fan
    }

    pub fn normals(&self) -> &[Vec2] {
        &self.normals
    }

    pub fn wulff(&self) -> &WulffShape {
        &self.wulff
    }

    /// Index of the fan direction matching `n` within [`ANGLE_TOL`].
    pub fn fan_index(&self, n: Vec2) -> Option<usize> {
        let theta = n.angle();
        self.fan
            .iter()
            .position(|d| angle_distance(d.theta, theta) <= ANGLE_TOL)
    }

    #[inline]
    pub fn value(&self, p: Vec2) -> f64 {
        self.wulff.support(p)
    }
}

/// A surface energy or mobility function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnisotropySpec", into = "AnisotropySpec")]
pub enum Anisotropy {
    Elliptic(Elliptic),
    Crystalline(Crystalline),
}

/// On-disk form of an [`Anisotropy`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AnisotropySpec {
    Elliptic {
        #[serde(rename = "G")]
        g: Mat2,
    },
    Crystalline {
        fan: Vec<FanDirection>,
    },
}

impl TryFrom<AnisotropySpec> for Anisotropy {
    type Error = Error;

    fn try_from(spec: AnisotropySpec) -> Result<Self> {
        match spec {
            AnisotropySpec::Elliptic { g } => Elliptic::new(g).map(Anisotropy::Elliptic),
            AnisotropySpec::Crystalline { fan } => Crystalline::new(fan).map(Anisotropy::Crystalline),
        }
    }
}

impl From<Anisotropy> for AnisotropySpec {
    fn from(a: Anisotropy) -> Self {
        match a {
            Anisotropy::Elliptic(e) => AnisotropySpec::Elliptic { g: e.g },
            Anisotropy::Crystalline(c) => AnisotropySpec::Crystalline { fan: c.fan },
        }
    }
}

impl Anisotropy {
    pub fn euclidean() -> Self {
        Anisotropy::Elliptic(Elliptic::euclidean())
    }

    pub fn elliptic(g: Mat2) -> Result<Self> {
        Elliptic::new(g).map(Anisotropy::Elliptic)
    }

    pub fn crystalline(fan: Vec<FanDirection>) -> Result<Self> {
        Crystalline::new(fan).map(Anisotropy::Crystalline)
    }

    /// Crystalline fan from `(theta, phi)` pairs.
    pub fn from_fan(pairs: &[(f64, f64)]) -> Result<Self> {
        Anisotropy::crystalline(
            pairs
                .iter()
                .map(|&(theta, phi)| FanDirection { theta, phi })
                .collect(),
        )
    }

    /// Regular `m`-gon fan with all support values equal to `phi`, first direction at `offset`.
    pub fn regular(m: usize, phi: f64, offset: f64) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = (0..m)
            .map(|i| ((offset + TAU * i as f64 / m as f64).rem_euclid(TAU), phi))
            .collect();
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Anisotropy::from_fan(&pairs)
    }

    pub fn as_elliptic(&self) -> Option<&Elliptic> {
        match self {
            Anisotropy::Elliptic(e) => Some(e),
            Anisotropy::Crystalline(_) => None,
        }
    }

    pub fn as_crystalline(&self) -> Option<&Crystalline> {
        match self {
            Anisotropy::Crystalline(c) => Some(c),
            Anisotropy::Elliptic(_) => None,
        }
    }

    pub fn is_crystalline(&self) -> bool {
        matches!(self, Anisotropy::Crystalline(_))
    }

    /// `Phi(p)`, rejecting non-finite input.
    pub fn eval(&self, p: Vec2) -> Result<f64> {
        if !p.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {p:?}")));
        }
        Ok(self.value(p))
    }

    /// `Phi(p)` without input checks.
    #[inline]
    pub fn value(&self, p: Vec2) -> f64 {
        match self {
            Anisotropy::Elliptic(e) => e.value(p),
            Anisotropy::Crystalline(c) => c.value(p),
        }
    }

    /// `grad Phi(p) = G p / Phi(p)`; elliptic only.
    pub fn gradient(&self, p: Vec2) -> Result<Vec2> {
        let e = self.require_elliptic("gradient")?;
        if !p.is_finite() || p.norm() == 0.0 {
            return Err(Error::Domain(format!("gradient needs a finite nonzero vector, got {p:?}")));
        }
        Ok(e.gradient(p))
    }

    /// Second derivative of `Phi` along the unit tangent at unit normal `n`; elliptic only.
    pub fn curvature_weight(&self, n: Vec2) -> Result<f64> {
        let e = self.require_elliptic("curvature_weight")?;
        if !n.is_finite() || (n.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("curvature weight needs a unit vector, got {n:?}")));
        }
        Ok(e.curvature_weight(n))
    }

    /// Wulff shape; elliptic functions are polygonized with [`DEFAULT_WULFF_SAMPLES`] tangencies.
    pub fn wulff_shape(&self) -> WulffShape {
        self.wulff_shape_sampled(DEFAULT_WULFF_SAMPLES)
    }

    /// Wulff shape with `k` sampled tangency directions for the elliptic family.
    /// Crystalline shapes are exact and ignore `k`.
    pub fn wulff_shape_sampled(&self, k: usize) -> WulffShape {
        match self {
            Anisotropy::Elliptic(e) => e.wulff_shape(k.max(3)),
            Anisotropy::Crystalline(c) => c.wulff.clone(),
        }
    }

    /// `Phi_A(q) = Phi(L^T q)`.
    pub fn pullback(&self, l: &Mat2) -> Result<Self> {
        let det = l.det();
        if !l.is_finite() || det.abs() <= 1e-12 {
            return Err(Error::SingularMap { det });
        }
        match self {
            Anisotropy::Elliptic(e) => {
                let g = l.mul_mat(&e.g).mul_mat(&l.transpose());
                Anisotropy::elliptic(Mat2::new(g.a, 0.5 * (g.b + g.c), 0.5 * (g.b + g.c), g.d))
            }
            Anisotropy::Crystalline(c) => {
                if *l == Mat2::IDENTITY {
                    return Ok(self.clone());
                }
                let mapped: Vec<Vec2> = c.wulff.vertices.iter().map(|v| l.mul_vec(*v)).collect();
                Crystalline::from_wulff_vertices(&mapped).map(Anisotropy::Crystalline)
            }
        }
    }

    fn require_elliptic(&self, op: &str) -> Result<&Elliptic> {
        self.as_elliptic().ok_or_else(|| {
            Error::Unsupported(format!("{op} is undefined for crystalline anisotropies"))
        })
    }
}
