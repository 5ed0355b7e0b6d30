// SPDX-License-Identifier: Apache-2.0

//! Modeling toolkit for a 3D-stacked near-memory AI accelerator.
//!
//! The crate is split along the physical layers of the machine:
//!
//! - [`interconnect`]: wire density, bandwidth and transfer energy of
//!   interposer, TSV and hybrid-bonded (HITOC) die-to-die links.
//! - [`workload`]: layer geometry and exact MAC/byte accounting, with a
//!   bundled ResNet50 description.
//! - [`unimem`]: pooled DRAM arrays whose interleaving hides array latency.
//! - [`archsim`]: a discrete-event simulator of the weight-stationary
//!   DSU/VPU dataflow, plus roofline cross-check, energy model and sweeps.
//! - [`techscale`]: chip database, per-area normalization and process-node
//!   projection.
//! - [`econ`]: dies per wafer, yield, die cost and cost per TOPS.
//! - [`report`]: reconciliation of computed tables against published values.
//!
//! Every default (machine config, chip table, cost basis, scaling tables)
//! lives in a bundled JSON file under `data/`; see [`presets`].

// Range checks are written as `!(x > 0.0)` so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod archsim;
pub mod econ;
pub mod error;
pub mod format;
pub mod interconnect;
pub mod presets;
pub mod report;
pub mod techscale;
pub mod unimem;
pub mod workload;

pub use error::{Error, Result};
