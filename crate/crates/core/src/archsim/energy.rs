// SPDX-License-Identifier: Apache-2.0

//! Energy model: MAC energy, DRAM and fabric traffic energy, static power.

use serde::{Deserialize, Serialize};

use super::config::ArchConfig;
use super::schedule::LayerTraffic;
use super::sim::{simulate_model, SimResult};
use crate::error::{Error, Result};
use crate::workload::ModelSpec;

/// What a window of execution did, for energy accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Traffic {
    pub macs: u64,
    pub dram_bits: u64,
    pub fabric_bits: u64,
}

impl From<LayerTraffic> for Traffic {
    fn from(t: LayerTraffic) -> Self {
        Traffic {
            macs: t.macs,
            dram_bits: t.dram_bytes() * 8,
            fabric_bits: t.fabric_bytes() * 8,
        }
    }
}

impl std::ops::Add for Traffic {
    type Output = Traffic;
    fn add(self, o: Traffic) -> Traffic {
        Traffic {
            macs: self.macs + o.macs,
            dram_bits: self.dram_bits + o.dram_bits,
            fabric_bits: self.fabric_bits + o.fabric_bits,
        }
    }
}

/// Joules by component over a window of `seconds`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub mac_j: f64,
    pub dram_j: f64,
    pub fabric_j: f64,
    pub static_j: f64,
    pub total_j: f64,
    pub seconds: f64,
    pub avg_power_w: f64,
}

pub fn energy_breakdown(traffic: &Traffic, seconds: f64, arch: &ArchConfig) -> EnergyBreakdown {
    let mac_j = traffic.macs as f64 * arch.energy_mac_pj * 1e-12;
    let dram_j = traffic.dram_bits as f64 * arch.energy_dram_pj_per_bit * 1e-12;
    let fabric_j = traffic.fabric_bits as f64 * arch.energy_fabric_pj_per_bit * 1e-12;
    let static_j = arch.static_power_w * seconds;
    let total_j = mac_j + dram_j + fabric_j + static_j;
    EnergyBreakdown {
        mac_j,
        dram_j,
        fabric_j,
        static_j,
        total_j,
        seconds,
        avg_power_w: if seconds > 0.0 {
            total_j / seconds
        } else {
            0.0
        },
    }
}

/// Whole-run energy and average power of a simulation.
pub fn energy_report(result: &SimResult, arch: &ArchConfig) -> EnergyBreakdown {
    let traffic = result
        .per_layer
        .iter()
        .map(|l| Traffic::from(l.traffic))
        .fold(Traffic::default(), |a, b| a + b);
    energy_breakdown(&traffic, result.seconds, arch)
}

/// Solves for the per-MAC energy (pJ) that makes `model` average
/// `target_power_w` on `arch`. Used once to calibrate the bundled preset.
pub fn calibrate_energy_mac(
    model: &ModelSpec,
    arch: &ArchConfig,
    batch: u64,
    target_power_w: f64,
) -> Result<f64> {
    let result = simulate_model(model, arch, batch)?;
    let mut zero = arch.clone();
    zero.energy_mac_pj = 0.0;
    let rest = energy_report(&result, &zero);
    let macs: u64 = result.per_layer.iter().map(|l| l.traffic.macs).sum();
    let budget = target_power_w * result.seconds - rest.total_j;
    if macs == 0 || budget <= 0.0 {
        return Err(Error::Config(format!(
            "cannot reach {target_power_w} W: non-MAC energy alone averages {:.3} W",
            rest.avg_power_w
        )));
    }
    Ok(budget / macs as f64 * 1e12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn idle_window_draws_static_power() {
        let arch = presets::arch("sunrise-40nm").unwrap();
        let e = energy_breakdown(&Traffic::default(), 0.25, &arch);
        assert_eq!(e.avg_power_w, arch.static_power_w);
        assert_eq!(e.mac_j + e.dram_j + e.fabric_j, 0.0);
    }

    #[test]
    fn fabric_traffic_is_linear() {
        let arch = presets::arch("sunrise-40nm").unwrap();
        let t = Traffic {
            macs: 1000,
            dram_bits: 4096,
            fabric_bits: 1 << 20,
        };
        let doubled = Traffic {
            fabric_bits: 2 << 20,
            ..t
        };
        let a = energy_breakdown(&t, 1e-3, &arch);
        let b = energy_breakdown(&doubled, 1e-3, &arch);
        let expect = (1u64 << 20) as f64 * 0.02e-12;
        assert_eq!(arch.energy_fabric_pj_per_bit, 0.02);
        assert!((b.total_j - a.total_j - expect).abs() < 1e-18);
    }

    #[test]
    fn additive_over_windows() {
        let arch = presets::arch("sunrise-40nm").unwrap();
        let a = Traffic {
            macs: 123,
            dram_bits: 456,
            fabric_bits: 789,
        };
        let b = Traffic {
            macs: 1000,
            dram_bits: 2000,
            fabric_bits: 3000,
        };
        let ea = energy_breakdown(&a, 1e-6, &arch);
        let eb = energy_breakdown(&b, 2e-6, &arch);
        let eab = energy_breakdown(&(a + b), 3e-6, &arch);
        assert!((ea.total_j + eb.total_j - eab.total_j).abs() < 1e-15);
    }
}
