//! Scenario files: what to run, on which data, for how long.
//!
//! ```json
//! {
//!   "flow": "crystalline",
//!   "phi": "square_fan.json",
//!   "mobility": "square_fan.json",
//!   "initial": {"shape": "wulff", "scale": 1.0},
//!   "t_end": 0.4,
//!   "dt": 1e-5,
//!   "sample_times": [0.1, 0.2, 0.4],
//!   "output": "out/wulff_square"
//! }
//! ```
//!
//! `phi`, `mobility`, `initial` and `map` each accept either an inline
//! object or a path relative to the scenario file. The mobility defaults to
//! `phi`. Power-law runs ignore `phi` and `mobility`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::affine::AffineMap;
use crate::anisotropy::Anisotropy;
use crate::crystalline::CrystallinePolygon;
use crate::driver::Controls;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::smooth::SmoothCurve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Crystalline,
    Smooth,
    Power,
}

/// Initial data of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Polygon(CrystallinePolygon),
    Curve(SmoothCurve),
}

/// Generated initial shapes.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
enum ShapeSpec {
    /// Wulff polygon of the crystalline energy, scaled and translated.
    Wulff {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        center: Vec2,
    },
    Circle {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: Vec2,
        points: usize,
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: Vec2,
        points: usize,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    flow: FlowKind,
    #[serde(default)]
    phi: Option<Value>,
    #[serde(default)]
    mobility: Option<Value>,
    initial: Value,
    #[serde(default)]
    map: Option<Value>,
    #[serde(default)]
    exponent: Option<f64>,
    t_end: f64,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    cfl: Option<f64>,
    #[serde(default)]
    sample_times: Vec<f64>,
    #[serde(default)]
    output: Option<PathBuf>,
}

/// A fully resolved scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub flow: FlowKind,
    pub phi: Anisotropy,
    pub mobility: Anisotropy,
    /// Power-law exponent; 1 for the other flow kinds.
    pub exponent: f64,
    pub initial: Geometry,
    pub map: Option<AffineMap>,
    pub t_end: f64,
    pub controls: Controls,
    pub output: PathBuf,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Resolves an inline object or a file reference.
fn resolve<T: DeserializeOwned>(v: Value, base: &Path, what: &str) -> Result<T> {
    let (value, origin) = match v {
        Value::String(rel) => {
            let path = base.join(rel);
            (read_json(&path)?, path)
        }
        other => (other, PathBuf::from(format!("<inline {what}>"))),
    };
    serde_json::from_value(value).map_err(|source| Error::Parse { path: origin, source })
}

fn resolve_geometry(v: Value, base: &Path, phi: &Anisotropy) -> Result<Geometry> {
    let v = match v {
        Value::String(rel) => read_json(&base.join(rel))?,
        other => other,
    };
    let origin = || PathBuf::from("<initial geometry>");
    let parse = |source| Error::Parse { path: origin(), source };
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Validation("initial geometry must be a JSON object".into()))?;
    if obj.contains_key("facets") {
        return serde_json::from_value(v).map(Geometry::Polygon).map_err(parse);
    }
    if obj.contains_key("points") && !obj.contains_key("shape") {
        return serde_json::from_value(v).map(Geometry::Curve).map_err(parse);
    }
    let shape: ShapeSpec = serde_json::from_value(v).map_err(parse)?;
    Ok(match shape {
        ShapeSpec::Wulff { scale, center } => {
            let c = phi.as_crystalline().ok_or_else(|| {
                Error::Validation("a wulff initial shape needs a crystalline phi".into())
            })?;
            Geometry::Polygon(CrystallinePolygon::wulff(c, scale).translated(center))
        }
        ShapeSpec::Circle {
            radius,
            center,
            points,
        } => Geometry::Curve(SmoothCurve::circle(center, radius, points)?),
        ShapeSpec::Ellipse { a, b, center, points } => {
            Geometry::Curve(SmoothCurve::ellipse(center, a, b, points)?)
        }
    })
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Scenario::from_json_str(&text, base).map_err(|e| match e {
            Error::Parse { path: p, source } if p.as_os_str().is_empty() => Error::Parse {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    /// Parses a scenario; relative file references resolve against `base`.
    pub fn from_json_str(text: &str, base: &Path) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|source| Error::Parse {
            path: PathBuf::new(),
            source,
        })?;

        let phi = match (file.flow, file.phi) {
            (_, Some(v)) => resolve::<Anisotropy>(v, base, "phi")?,
            (FlowKind::Power, None) => Anisotropy::euclidean(),
            (_, None) => return Err(Error::Validation("scenario needs a phi".into())),
        };
        let mobility = match file.mobility {
            Some(v) => resolve::<Anisotropy>(v, base, "mobility")?,
            None => phi.clone(),
        };
        let initial = resolve_geometry(file.initial, base, &phi)?;
        let map = file
            .map
            .map(|v| resolve::<AffineMap>(v, base, "map"))
            .transpose()?;

        let exponent = match file.flow {
            FlowKind::Power => file.exponent.unwrap_or(1.0 / 3.0),
            _ => {
                if file.exponent.is_some() {
                    return Err(Error::Validation("exponent applies only to power flows".into()));
                }
                1.0
            }
        };

        match (file.flow, &phi, &initial) {
            (FlowKind::Crystalline, Anisotropy::Crystalline(c), Geometry::Polygon(p)) => {
                p.validate(c)?;
            }
            (FlowKind::Crystalline, _, _) => {
                return Err(Error::Validation(
                    "crystalline flow needs a crystalline phi and a polygon".into(),
                ))
            }
            (FlowKind::Smooth, Anisotropy::Elliptic(_), Geometry::Curve(_)) => {}
            (FlowKind::Smooth, _, _) => {
                return Err(Error::Validation(
                    "smooth flow needs an elliptic phi and a curve".into(),
                ))
            }
            (FlowKind::Power, _, Geometry::Curve(_)) => {
                crate::smooth::PowerLaw::new(exponent)?;
            }
            (FlowKind::Power, _, _) => {
                return Err(Error::Validation("power flow needs a curve".into()))
            }
        }

        let mut controls = Controls::default();
        if let Some(dt) = file.dt {
            controls.dt = dt;
        }
        if let Some(cfl) = file.cfl {
            controls.cfl = cfl;
        }
        controls.sample_times = file.sample_times;
        controls.check()?;
        if !(file.t_end >= 0.0) || !file.t_end.is_finite() {
            return Err(Error::Validation(format!("invalid t_end {}", file.t_end)));
        }

        Ok(Scenario {
            flow: file.flow,
            phi,
            mobility,
            exponent,
            initial,
            map,
            t_end: file.t_end,
            controls,
            output: base.join(file.output.unwrap_or_else(|| PathBuf::from("out"))),
        })
    }

    /// Number of curve points for smooth runs.
    pub fn resolution(&self) -> Option<usize> {
        match &self.initial {
            Geometry::Curve(c) => Some(c.len()),
            Geometry::Polygon(_) => None,
        }
    }
}
