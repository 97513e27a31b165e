//! LuGre friction estimation for a pendulum-on-a-box.
//!
//! Simulation of the ground-truth system, noisy dataset generation,
//! black-box and physics-embedded friction networks with forward-mode
//! input derivatives, classical LuGre identification and the evaluation
//! harness. Numerical code is generic over `f32`/`f64` via [`Scalar`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod eval;
pub mod friction;
pub mod ident;
pub mod nn;
pub mod numerics;
pub mod pinn;
pub mod scalar;
pub mod systems;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LuGreParams64 = friction::LuGreParams<f64>;
pub type LuGreParams32 = friction::LuGreParams<f32>;
pub type PoBParams64 = systems::PoBParams<f64>;
pub type Mlp64 = nn::Mlp<f64>;
pub type Mlp32 = nn::Mlp<f32>;
pub type PinnModel64 = pinn::PinnModel<f64>;
pub type PinnModel32 = pinn::PinnModel<f32>;
pub type TrainedModel64 = pinn::TrainedModel<f64>;
pub type TrainedModel32 = pinn::TrainedModel<f32>;
