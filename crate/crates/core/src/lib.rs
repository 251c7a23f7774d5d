//! Charging-station siting toolkit.
//!
//! The pipeline: geographic sites in, distance matrices via haversine or an
//! OSRM table service ([`distance`]), a three-term placement objective and
//! its QUBO compilation ([`model`], [`qubo`]), exact/annealing/baseline
//! solvers with best-of-N selection ([`solvers`]), and per-station metrics
//! plus GeoJSON export ([`report`]). [`generator`] builds deterministic
//! synthetic benchmark instances and [`files`] holds the versioned on-disk
//! formats.
//!
//! Numeric types are generic over [`Scalar`] (any `f32`/`f64`-like float);
//! the `*F64` aliases below pin the common double-precision choice.

pub mod distance;
pub mod files;
pub mod generator;
pub mod matrix;
pub mod model;
pub mod qubo;
pub mod report;
pub mod scalar;
pub mod solvers;

pub use matrix::Matrix;
pub use model::{
    objective_components, Assignment, GeoPoint, ModelError, ObjectiveTerms, ProblemInstance, Site,
    SiteKind, Weights,
};
pub use qubo::{build_qubo, Qubo};
pub use scalar::Scalar;
pub use solvers::{
    anneal_qubo, best_of, solve_exact, solve_greedy, solve_random, solve_sa_qubo, solve_sa_swap,
    AnnealSchedule, SolveReport, SolverError,
};

pub type MatrixF64 = Matrix<f64>;
pub type GeoPointF64 = GeoPoint<f64>;
pub type SiteF64 = Site<f64>;
pub type ProblemInstanceF64 = ProblemInstance<f64>;
pub type WeightsF64 = Weights<f64>;
pub type ObjectiveTermsF64 = ObjectiveTerms<f64>;
pub type QuboF64 = Qubo<f64>;
pub type SolveReportF64 = SolveReport<f64>;
pub type DistanceMatrixSetF64 = distance::DistanceMatrixSet<f64>;
pub type SolutionSummaryF64 = report::SolutionSummary<f64>;
