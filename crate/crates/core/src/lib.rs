//! Simultaneous synchronization and parameter identification of coupled
//! dynamical systems.
//!
//! A *drive* system `ẋ = f(x) + F(x)θ` runs free; an identical *response*
//! system `ẏ = f(y) + F(y)α + U` receives the drive state through a
//! synchronization input `U` and adapts its parameter estimate `α` online.
//! This crate provides:
//!
//! - parameter-affine model definitions with built-in Lorenz and Rössler
//!   instances ([`models`]),
//! - synchronization controllers and adaptation laws, including the
//!   delay-augmented law that identifies more parameters than the state
//!   dimension by stacking time-delayed copies of the drive state
//!   ([`controllers`], [`adaptation`]),
//! - a fixed-step coupled simulator with a delay-history buffer
//!   ([`simulator`]),
//! - convergence analytics: Lyapunov functions, Gram-matrix rank
//!   diagnostics, time-to-threshold tables and noise statistics
//!   ([`analysis`]),
//! - an experiment harness that runs method sweeps from a config file and
//!   writes CSV traces and reports ([`experiment`]).
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! the aliases at the crate root fix `f64`, which is what the CLI and the
//! bundled experiments use.

pub mod adaptation;
pub mod analysis;
pub mod controllers;
pub mod error;
pub mod experiment;
pub mod gains;
pub mod models;
pub mod reference;
pub mod scalar;
pub mod simulator;

pub use error::Error;

/// Double-precision state vector.
pub type StateVec = nalgebra::DVector<f64>;
/// Double-precision parameter vector.
pub type ParamVec = nalgebra::DVector<f64>;
/// Double-precision parameter-affine model.
pub type Model = models::ParametricModel<f64>;
/// Double-precision symmetric positive definite gain.
pub type Gain = gains::Gain<f64>;
/// Double-precision simulation setup.
pub type Setup = simulator::SimSetup<f64>;
/// Double-precision simulation trace.
pub type Trace = simulator::Trace<f64>;
