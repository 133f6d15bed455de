//! Attractor networks whose neurons carry `Q` internal bit-variables.
//!
//! Each neuron exposes a single real number, its characteristic value
//! `f(s_i^1, ..., s_i^Q)`, to the rest of the network. Every internal bit is
//! updated synchronously by a Heaviside unit (with `H(0) = 1`) on the field
//!
//! ```text
//! sum_{j != i} W_ij^a f_j + sum_{b != a} L_i^{ab} s_i^b - theta_i^a
//! ```
//!
//! where the intra-neuron couplings `L` are optional.
//!
//! Modules:
//!
//! * [`model`]: states, pattern sets, weight tensors, network construction
//! * [`characteristic`]: characteristic functions, moments, admissibility checks
//! * [`dynamics`]: local fields, synchronous steps, attractors, margins
//! * [`learning`]: Hebb rules and a margin perceptron
//! * [`capacity`]: replica-symmetric capacity equations
//! * [`baseline`]: multi-state Hopfield comparison network
//! * [`experiments`]: basin curves and the feed-forward reading
//! * [`cli`]: command-line front end
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod baseline;
pub mod capacity;
pub mod characteristic;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod learning;
pub mod model;
pub mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use model::{PatternSet, StateMatrix};
pub use scalar::Scalar;
pub use seed::RunSeed;

pub type Network = model::Network<f64>;
pub type GanSpec = model::GanSpec<f64>;
pub type WeightTensor = model::WeightTensor<f64>;
pub type InternalCouplings = model::InternalCouplings<f64>;
pub type CharacteristicSpec = characteristic::CharacteristicSpec<f64>;
pub type LearnConfig = learning::LearnConfig<f64>;
pub type CapacityParams = capacity::CapacityParams<f64>;
pub type CapacitySolution = capacity::CapacitySolution<f64>;
pub type BasinConfig = experiments::BasinConfig<f64>;
pub type BasinCurve = experiments::BasinCurve<f64>;
pub type MultiStateNetwork = baseline::MultiStateNetwork<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type Network = crate::model::Network<f32>;
    pub type GanSpec = crate::model::GanSpec<f32>;
    pub type WeightTensor = crate::model::WeightTensor<f32>;
    pub type InternalCouplings = crate::model::InternalCouplings<f32>;
    pub type CharacteristicSpec = crate::characteristic::CharacteristicSpec<f32>;
    pub type LearnConfig = crate::learning::LearnConfig<f32>;
    pub type CapacityParams = crate::capacity::CapacityParams<f32>;
    pub type CapacitySolution = crate::capacity::CapacitySolution<f32>;
    pub type BasinConfig = crate::experiments::BasinConfig<f32>;
    pub type BasinCurve = crate::experiments::BasinCurve<f32>;
    pub type MultiStateNetwork = crate::baseline::MultiStateNetwork<f32>;
}
