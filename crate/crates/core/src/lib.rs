//! Exponentially small waves behind piecewise-linear ships at low Froude
//! number: leading-order flow, singulants and Stokes lines, late-order
//! divergence data, assembled wave predictions, and two nonlinear
//! free-surface solvers used to check them.

pub mod bie;
pub mod error;
pub mod hilbert;
pub mod hull;
pub mod lateorder;
pub mod measure;
pub mod ode;
pub mod quad;
pub mod scalar;
pub mod sim;
pub mod singulant;
pub mod solution;
pub mod stokes;
pub mod sweep;
pub mod wave;

pub use error::{Error, ErrorClass, Result};
pub use hull::{Hull, HullSpec};
pub use lateorder::{DivergenceData, OmegaCache};
pub use scalar::{Cx, Real};

pub type Hull64 = Hull<f64>;
pub type Hull32 = Hull<f32>;
pub type HullSpec64 = HullSpec<f64>;
