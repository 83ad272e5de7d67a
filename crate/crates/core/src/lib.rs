//! Discrete-event simulator of an SDN-controlled LTE network.
//!
//! Radio access (SINR, resource blocks, scheduling) and a capacity-limited
//! switched backhaul are modelled together so that handover policies can be
//! compared on both access and backhaul load.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backhaul;
pub mod config;
pub mod controller;
pub mod engine;
pub mod error;
pub mod handover;
pub mod ids;
pub mod load;
pub mod metrics;
pub mod mobility;
pub mod radio;
pub mod report;
pub mod rng;
pub mod scheduler;
pub mod topology;

pub use error::{Error, Result};
