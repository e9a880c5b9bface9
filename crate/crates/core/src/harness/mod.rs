//! Verification experiments: twin runs under affine maps, refinement
//! studies, scenario files and output.

pub mod export;
pub mod metric;
pub mod pair;
pub mod scenario;

pub use metric::{hausdorff, Outline};
pub use pair::{
    compare_st, convergence_order, run_pair, simulate, twin_run, ConvergenceTable, DefectRow,
    EquivarianceReport, Simulation, SlopeFit,
};
pub use scenario::{FlowKind, Geometry, Scenario};
