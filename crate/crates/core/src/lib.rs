//! Channel models, scheduling and optimizers for IRS-assisted UAV links.
//!
//! Everything is generic over the float type; the aliases below fix it to
//! `f64`, and [`f32`] does the same for single precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod deployment;
pub mod error;
pub mod irs;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod schedule;
mod simplex;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Position = channel::Position3D<f64>;
pub type Radio = channel::RadioParams<f64>;
pub type PathLoss = channel::PathLossModel<f64>;
pub type Surface = irs::IrsSurface<f64>;
pub type Rates = schedule::RateMatrix<f64>;
pub type TdmaSchedule = schedule::Schedule<f64>;
pub type Path = trajectory::Trajectory<f64>;
pub type Constraints = trajectory::TrajectoryConstraints<f64>;
pub type CollectionModel = trajectory::DataCollectionModel<f64>;
pub type Mission = trajectory::MissionResult<f64>;
pub type Deployment = deployment::DeploymentModel<f64>;
pub type Placement = deployment::DeploymentResult<f64>;
pub type ScenarioFile = scenario::Scenario<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type Position = crate::channel::Position3D<f32>;
    pub type Radio = crate::channel::RadioParams<f32>;
    pub type Rates = crate::schedule::RateMatrix<f32>;
    pub type Path = crate::trajectory::Trajectory<f32>;
    pub type CollectionModel = crate::trajectory::DataCollectionModel<f32>;
    pub type Deployment = crate::deployment::DeploymentModel<f32>;
    pub type ScenarioFile = crate::scenario::Scenario<f32>;
}
