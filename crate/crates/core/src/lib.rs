//! Noiseless bounding networks for noisy memoryless wireless networks.
//!
//! A noisy network is decomposed into point-to-point links, MACs and BCs;
//! each piece is replaced by bit pipes and hyper-arcs whose capacity region
//! contains (upper model) or is contained in (lower model) that of the
//! original. Flow computations on the resulting networks give capacity
//! outer and inner bounds.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assemble;
pub mod bc_models;
pub mod benchmarks;
pub mod decouple;
pub mod error;
pub mod experiments;
pub mod flowcalc;
pub mod info;
pub mod mac_models;
pub mod netmodel;

pub use error::{Error, Result};
pub use info::Rate;
