//! Numerical laboratory for discrete rough truncated Hilbert transforms.
//!
//! The crate builds the operators `H_M = sum_s H_s` over dyadic scales, where
//! each transform block is `sum_m phi(m^alpha/s) (delta_[m^alpha] - delta_-[m^alpha]) / m`,
//! and studies them numerically: resolvent kernels and their expansion in
//! `delta_0, H, H^2` plus a Calderon-Zygmund remainder, building-block axiom
//! checks, the dyadic Calderon-Zygmund decomposition, and weak-l1 sweeps.

pub mod cli;
pub mod cz;
pub mod error;
pub mod params;
pub mod resolvent;
pub mod kernel;
pub mod sweep;
pub mod weak;

pub use error::{Error, Result};
pub use kernel::{ComplexKernel, Kernel};
pub use params::{validate, Mode, Params, RawParams, ScaleGrid};
