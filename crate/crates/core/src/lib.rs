//! Modelling and design of hybrid distributed-Raman/EDFA amplified
//! ultra-wideband WDM links.
//!
//! The pipeline runs [`raman`] (power evolution per span and ASE chaining),
//! [`nli`] (nonlinear interference from the resulting power profiles) and
//! [`budget`] (SNR and throughput). [`design`] wraps it as a cost for the
//! particle swarm in [`pso`], and [`report`] reads and writes the CSV/JSON
//! artefacts.

pub mod budget;
pub mod config;
pub mod design;
pub mod error;
pub mod nli;
pub mod ode;
pub mod pipeline;
pub mod pso;
pub mod raman;
pub mod report;
pub mod table;
pub mod units;

pub use error::{Error, Result};
