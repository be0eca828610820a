//! Tile graphs of expanding circle maps and the level-increasing random walks on them.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the command line lives in the `tilewalk` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ergodics;
pub mod error;
pub mod graph;
pub mod green;
pub mod kernel;
pub mod martin;
pub mod numeric;
pub mod symbolic;

pub use ergodics::{
    cylinder_invariance_check, dimension_report, drift_report, empirical_harmonic_measure, green_drift_estimate,
    quasi_invariance_check, sample_path, sample_paths, ColumnGreen, CylinderReport, DimensionReport, DriftReport,
    EmpiricalMeasure, PathSample, QuasiInvarianceReport, RootGreen,
};
pub use error::{Error, Result};
pub use graph::{build_graph, ComparabilityReport, HalfInteger, HyperbolicityReport, TileGraph, DEFAULT_VERTEX_BUDGET};
pub use green::{
    check_multiplicative, enumerate_paths, green_column, green_table, martin_kernel, random_quadruple,
    shadow_and_neighbors, shadow_geometry, GreenCache, GreenColumn, GreenTable, MultiplicativeReport, NeighborSet,
    ShadowGeometry,
};
pub use kernel::{
    drift_exact, extend_by_equivariance, parse_rational, validate_assumptions, DoublingKernel, EquivariantKernel,
    Kernel, KernelSpec, KernelTable, MaterializedKernel, Transition, TransitionKernel, ValidationReport,
};
pub use martin::{
    classify_doubling_boundary, growth_factor, martin_trace, standard_window, BoundaryClassification, MartinTrace,
    Ray, Side, Verdict, TRACE_TOLERANCE,
};
pub use numeric::rational_to_f64;
pub use symbolic::{max_level_for, CircleRealization, GeometricOracle, SftMatrix, Symbol, TileInterval, Word};
