//! Shared generators for the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use wulffflow::crystalline::CrystallinePolygon;
use wulffflow::{AffineMap, Anisotropy, Crystalline, Facet, Mat2, Vec2};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn square_fan() -> Anisotropy {
    Anisotropy::regular(4, 1.0, 0.0).unwrap()
}

pub fn rotation(a: f64) -> Mat2 {
    let (s, c) = a.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Random linear map with singular values in `[0.5, 2]`, reflecting half the time.
pub fn random_matrix(r: &mut StdRng) -> Mat2 {
    let d = Mat2::diag(r.gen_range(0.5..2.0), r.gen_range(0.5..2.0));
    let flip = if r.gen_bool(0.5) { Mat2::diag(-1.0, 1.0) } else { Mat2::IDENTITY };
    rotation(r.gen_range(0.0..TAU))
        .mul_mat(&d)
        .mul_mat(&flip)
        .mul_mat(&rotation(r.gen_range(0.0..TAU)))
}

pub fn random_map(r: &mut StdRng) -> AffineMap {
    let b = Vec2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    AffineMap::new(random_matrix(r), b).unwrap()
}

/// Random crystalline energy with 3 to 8 essential fan directions, not necessarily even.
/// Angular gaps stay below `0.8 pi` so the Wulff polygon remains of moderate size.
pub fn random_fan(r: &mut StdRng) -> Anisotropy {
    loop {
        let m = r.gen_range(3..=8);
        let mut thetas: Vec<f64> = (0..m).map(|_| r.gen_range(0.0..TAU)).collect();
        thetas.sort_by(f64::total_cmp);
        let wrap = thetas[0] + TAU - thetas[m - 1];
        if thetas.windows(2).map(|w| w[1] - w[0]).chain([wrap]).any(|g| g > 0.8 * std::f64::consts::PI) {
            continue;
        }
        let pairs: Vec<(f64, f64)> = thetas.iter().map(|&t| (t, r.gen_range(0.5..1.5))).collect();
        if let Ok(phi) = Anisotropy::from_fan(&pairs) {
            return phi;
        }
    }
}

/// Random symmetric positive-definite energy.
pub fn random_elliptic(r: &mut StdRng) -> Anisotropy {
    let l = random_matrix(r);
    Anisotropy::elliptic(l.mul_mat(&l.transpose())).unwrap()
}

/// Convex admissible polygon for `phi`: its Wulff shape with perturbed offsets.
pub fn random_convex_polygon(r: &mut StdRng, phi: &Crystalline) -> CrystallinePolygon {
    let base = CrystallinePolygon::wulff(phi, r.gen_range(0.5..2.0));
    let shift = Vec2::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    loop {
        let facets = base
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal,
                offset: f.offset * r.gen_range(0.8..1.2),
            })
            .collect();
        let p = CrystallinePolygon::new(facets).translated(shift);
        if p.validate(phi).is_ok() {
            return p;
        }
    }
}

/// Random L-shaped or U-shaped rectilinear polygon, admissible for the square fan.
pub fn random_staircase(r: &mut StdRng) -> CrystallinePolygon {
    let w = r.gen_range(2.0..4.0);
    let h = r.gen_range(2.0..4.0);
    let a = r.gen_range(0.5..w - 0.5);
    let b = r.gen_range(0.5..h - 0.5);
    let pts: Vec<(f64, f64)> = if r.gen_bool(0.5) {
        vec![(0.0, 0.0), (w, 0.0), (w, b), (a, b), (a, h), (0.0, h)]
    } else {
        let c = r.gen_range(a + 0.2..w - 0.2);
        vec![(0.0, 0.0), (w, 0.0), (w, h), (c, h), (c, b), (a, b), (a, h), (0.0, h)]
    };
    let v: Vec<Vec2> = pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
    CrystallinePolygon::from_vertices(&v)
}

/// Smooth star-shaped closed curve `r(theta) = 1 + sum a_k cos(k theta + b_k)`.
pub fn random_smooth_points(r: &mut StdRng, n: usize) -> Vec<Vec2> {
    let modes: Vec<(f64, f64)> = (2..5).map(|_| (r.gen_range(0.0..0.08), r.gen_range(0.0..TAU))).collect();
    (0..n)
        .map(|j| {
            let t = TAU * j as f64 / n as f64;
            let rad = 1.0
                + modes
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| a * ((k + 2) as f64 * t + b).cos())
                    .sum::<f64>();
            Vec2::new(rad * t.cos(), rad * t.sin())
        })
        .collect()
}

/// Largest distance from a point of `a` to the nearest point of `b`, both ways.
pub fn vertex_set_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    let one = |x: &[Vec2], y: &[Vec2]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    one(a, b).max(one(b, a))
}

