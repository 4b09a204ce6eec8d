pub mod analysis;
pub mod controller;
pub mod edlm;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod plants;
pub mod predictor;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Pjm64 = edlm::Pjm<f64>;
pub type Pjm32 = edlm::Pjm<f32>;
pub type History64 = edlm::HistoryWindow<f64>;
pub type History32 = edlm::HistoryWindow<f32>;
pub type Controller64 = controller::ControllerConfig<f64>;
pub type Controller32 = controller::ControllerConfig<f32>;
pub type Estimator64 = estimator::EstimatorState<f64>;
pub type Estimator32 = estimator::EstimatorState<f32>;
pub type Plant64 = plants::PlantDef<f64>;
pub type Plant32 = plants::PlantDef<f32>;
