//! Sand hypoplasticity element tests and genetic calibration of the model
//! parameters.

// negated comparisons deliberately treat NaN as failing the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod element;
pub mod ga;
pub mod metrics;
pub mod model;
pub mod num;
pub mod refine;
pub mod stats;
pub mod tensor;

pub use element::{simulate, SimError, TestKind, TestSpec, Trajectory};
pub use ga::{Bounds, CalibrationResult, GaConfig, GaError, Genome};
pub use metrics::{CostBreakdown, CostModel, CostWeights, ExperimentalDataset, ExperimentalTest};
pub use model::{ElementState, HypoParams, ModelError, SearchParams};
pub use num::Real;
pub use stats::{run_ensemble, EnsembleResult, Summary};

pub type Params = HypoParams<f64>;
pub type Params32 = HypoParams<f32>;
pub type State = ElementState<f64>;
pub type State32 = ElementState<f32>;
pub type Spec = TestSpec<f64>;
pub type Spec32 = TestSpec<f32>;
pub type Dataset = ExperimentalDataset<f64>;
pub type Dataset32 = ExperimentalDataset<f32>;
