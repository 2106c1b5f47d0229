//! Chiplet I/O design-space exploration.
//!
//! The crate is organised bottom-up:
//!
//! - [`techlib`]: packaging generation tables and geometry types
//! - [`extraction`]: compact RLC models for channels and pads
//! - [`mna`]: a small nonlinear transient simulator
//! - [`esd`]: charged-device-model benches and protection-diode sizing
//! - [`dsl`]: direct-signaling-link crosstalk benches and eye metrics
//! - [`explorer`]: analytical I/O area and bandwidth models

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsl;
pub mod esd;
pub mod explorer;
pub mod extraction;
pub mod mna;
pub mod techlib;
pub mod units;
