// SPDX-License-Identifier: Apache-2.0

//! Discrete-event simulation of the weight-stationary DSU/VPU dataflow.
//!
//! A model runs layer by layer under one central controller. Each layer is
//! planned into phase lengths and tiles ([`schedule`]), then all tiles of
//! all layers flow through a single deterministic event loop ([`engine`]).
//! [`roofline`] gives an independent bound classification and [`energy`]
//! turns traffic and time into joules.

pub mod config;
pub mod energy;
pub mod engine;
pub mod roofline;
pub mod schedule;
pub mod sim;
pub mod sweep;

pub use config::{derive_clock, validate_config, ArchConfig, Diagnostic, Severity};
pub use energy::{calibrate_energy_mac, energy_breakdown, energy_report, EnergyBreakdown, Traffic};
pub use roofline::{roofline_check, RooflineReport};
pub use schedule::{
    plan_layer, schedule_layer, Bottleneck, LayerPlan, LayerSim, LayerTraffic, PhaseCycles,
};
pub use sim::{simulate_model, SimResult};
pub use sweep::{run_sweep, sweep_csv, Assignments, SweepAxis, SweepRow};
