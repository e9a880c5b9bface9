//! Motion of plane curves by weighted mean curvature with mobility, in
//! crystalline and smooth form, plus a harness that checks the flows commute
//! with affine maps once energy and mobility are pulled back.
//!
//! ```
//! use wulffflow::{Anisotropy, CrystallinePolygon, Controls};
//!
//! let phi = Anisotropy::regular(4, 1.0, 0.0).unwrap();
//! let square = CrystallinePolygon::wulff(phi.as_crystalline().unwrap(), 1.0);
//! let trace = wulffflow::crystalline::evolve(&square, &phi, &phi, 0.1, &Controls::with_dt(1e-4)).unwrap();
//! let lambda = trace.last().unwrap().snapshot.facets[0].offset;
//! assert!((lambda - (1.0f64 - 0.2).sqrt()).abs() < 1e-3);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod anisotropy;
pub mod crystalline;
pub mod driver;
pub mod error;
pub mod geom;
pub mod harness;
pub mod smooth;

pub use affine::AffineMap;
pub use anisotropy::{Anisotropy, Crystalline, Elliptic, FanDirection, WulffShape};
pub use crystalline::{CrystallineLaw, CrystallinePolygon, Facet};
pub use driver::{Controls, EventKind, FlowEvent, FlowLaw, FlowTrace};
pub use error::{Error, Result};
pub use geom::{Mat2, Vec2};
pub use smooth::{PowerLaw, SmoothCurve, WeightedLaw};
