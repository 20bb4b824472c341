//! Mutual information of Gaussian bosonic communication channels.
//!
//! The crate has two independent routes to every number it reports:
//!
//! * a phase-space engine ([`gaussian`], [`detection`], [`schemes`]) that
//!   propagates first and second moments of the alphabet through the
//!   amplifier and the detector and evaluates the Gaussian mutual information;
//! * a catalog of closed-form expressions ([`closed_forms`]).
//!
//! [`optimize`] searches free squeezing variances and crossing photon numbers,
//! [`montecarlo`] is a sampling oracle for the engine, and [`verify`] bundles
//! the consistency checks run by the command-line tool.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below name the common instantiations.

pub mod closed_forms;
pub mod detection;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod montecarlo;
pub mod optimize;
pub mod scalar;
pub mod schemes;
pub mod verify;

pub use closed_forms::{formula_mi, high_gain_limit, optimal_variance};
pub use detection::{
    bell, gaussian_mi, heterodyne, homodyne, joint_statistics, JointStatistics, MeasurementModel,
    ModulationModel,
};
pub use error::{Error, Result};
pub use gaussian::{
    AmpTarget, Channel, GaussianMap, GaussianState, PhysicalityReport, Quadrature, SymplecticOp,
};
pub use linalg::Matrix;
pub use montecarlo::{estimate_mi, McConfig, McEstimate};
pub use optimize::{
    crossing_threshold, maximize_variance, threshold_curve, OptimizationResult, ThresholdCurve,
};
pub use scalar::{LogBase, Scalar};
pub use schemes::{build_scheme, evaluate, photon_budget, SchemeId, SchemeSpec};

pub type GaussianState64 = GaussianState<f64>;
pub type GaussianState32 = GaussianState<f32>;
pub type SymplecticOp64 = SymplecticOp<f64>;
pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type JointStatistics64 = JointStatistics<f64>;
pub type SchemeSpec64 = SchemeSpec<f64>;
pub type SchemeSpec32 = SchemeSpec<f32>;
