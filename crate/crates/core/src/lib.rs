//! Boundary control of linear hyperbolic systems: certificates, transport
//! simulation, quantized measurements and Lyapunov monitoring.

pub mod certificate;
pub mod controller;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod monitor;
pub mod quantizer;
pub mod signals;
pub mod solver;

pub use error::{Error, Result};
