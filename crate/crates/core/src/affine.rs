//! Affine maps `A(x) = L x + b` acting on points, curves, polygons and
//! (by pullback) on anisotropies.

use serde::{Deserialize, Serialize};

use crate::anisotropy::{Anisotropy, Crystalline};
use crate::crystalline::{CrystallinePolygon, Facet};
use crate::error::{Error, Result};
use crate::geom::{Mat2, Vec2};
use crate::smooth::SmoothCurve;

/// Largest condition number accepted by the verification harness.
pub const MAX_CONDITION: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapFile", into = "MapFile")]
pub struct AffineMap {
    l: Mat2,
    b: Vec2,
}

/// On-disk form `{"L": [[a, b], [c, d]], "b": [tx, ty]}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct MapFile {
    #[serde(rename = "L")]
    l: Mat2,
    #[serde(default)]
    b: Vec2,
}

impl TryFrom<MapFile> for AffineMap {
    type Error = Error;
    fn try_from(f: MapFile) -> Result<Self> {
        AffineMap::new(f.l, f.b)
    }
}

impl From<AffineMap> for MapFile {
    fn from(a: AffineMap) -> Self {
        MapFile { l: a.l, b: a.b }
    }
}

impl AffineMap {
    pub fn new(l: Mat2, b: Vec2) -> Result<Self> {
        let det = l.det();
        if !l.is_finite() || !b.is_finite() || !(det.abs() >= 1e-12) {
            return Err(Error::SingularMap { det });
        }
        Ok(AffineMap { l, b })
    }

    pub fn linear(l: Mat2) -> Result<Self> {
        AffineMap::new(l, Vec2::ZERO)
    }

    pub fn identity() -> Self {
        AffineMap {
            l: Mat2::IDENTITY,
            b: Vec2::ZERO,
        }
    }

    pub fn matrix(&self) -> Mat2 {
        self.l
    }

    pub fn translation(&self) -> Vec2 {
        self.b
    }

    pub fn det(&self) -> f64 {
        self.l.det()
    }

    pub fn condition_number(&self) -> f64 {
        self.l.condition_number()
    }

    /// Rejects maps whose condition number exceeds [`MAX_CONDITION`].
    pub fn check_conditioning(&self) -> Result<()> {
        let cond = self.condition_number();
        if cond > MAX_CONDITION {
            return Err(Error::IllConditioned { cond });
        }
        Ok(())
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            l: self.l.mul_mat(&other.l),
            b: self.l.mul_vec(other.b) + self.b,
        }
    }

    #[inline]
    pub fn apply_point(&self, x: Vec2) -> Vec2 {
        self.l.mul_vec(x) + self.b
    }

    pub fn apply_points(&self, xs: &[Vec2]) -> Vec<Vec2> {
        xs.iter().map(|x| self.apply_point(*x)).collect()
    }

    /// Maps a curve; index order is reversed when `det L < 0` so it stays counterclockwise.
    pub fn apply_curve(&self, curve: &SmoothCurve) -> SmoothCurve {
        let mut pts = self.apply_points(curve.points());
        if self.det() < 0.0 {
            pts.reverse();
        }
        SmoothCurve::from_points_unchecked(pts)
    }

    /// Maps a polygon governed by a crystalline energy whose pullback under
    /// this map is `phi_a`. Image normals are snapped onto the fan of `phi_a`.
    pub fn apply_polygon(&self, poly: &CrystallinePolygon, phi_a: &Crystalline) -> Result<CrystallinePolygon> {
        let vertices = poly.vertices();
        let mut facets = Vec::with_capacity(poly.len());
        for (i, f) in poly.facets.iter().enumerate() {
            let q = conormal(&self.l, f.normal)?;
            let k = phi_a.fan_index(q).ok_or_else(|| {
                Error::Validation(format!(
                    "image of facet {i} (theta = {}) has no matching direction in the pulled-back fan",
                    q.angle()
                ))
            })?;
            let normal = phi_a.normals()[k];
            facets.push(Facet {
                normal,
                offset: self.apply_point(vertices[i]).dot(normal),
            });
        }
        if self.det() < 0.0 {
            facets.reverse();
        }
        Ok(CrystallinePolygon::new(facets))
    }

    /// `Phi_A(q) = Phi(L^T q)`.
    pub fn pullback(&self, phi: &Anisotropy) -> Result<Anisotropy> {
        phi.pullback(&self.l)
    }
}

/// Unit normal of the image of a line with unit normal `n`: `L^{-T} n / |L^{-T} n|`.
pub fn conormal(l: &Mat2, n: Vec2) -> Result<Vec2> {
    let inv = l.inverse().ok_or(Error::SingularMap { det: l.det() })?;
    Ok(inv.transpose().mul_vec(n).normalized())
}

/// `|L^T q|`: a normal displacement `ds` of the preimage becomes `|L^T q| ds`
/// along the image normal `q`.
pub fn normal_displacement_factor(l: &Mat2, q: Vec2) -> f64 {
    l.transpose().mul_vec(q).norm()
}
