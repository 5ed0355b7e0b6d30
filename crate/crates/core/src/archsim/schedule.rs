// SPDX-License-Identifier: Apache-2.0

//! Weight-stationary mapping of one layer onto the machine.
//!
//! Output channels are dealt round-robin to VPUs, so the busiest VPU owns
//! `ceil(out_c / vpu_count)` of them. Each VPU keeps its weights resident
//! and consumes the broadcast input features; results return over the
//! fabric to the DSU arrays. Per-VPU intermediate data never crosses the
//! fabric.
//!
//! Phase lengths, in cycles:
//!
//! | phase       | length                                                   |
//! |-------------|----------------------------------------------------------|
//! | compute     | `ceil(slots / macs_per_vpu)` for the busiest VPU         |
//! | broadcast   | `ceil(input_bytes / fabric_rate)`                        |
//! | weight load | `ceil(weight_bytes / vpu_pool_rate)`                     |
//! | writeback   | `ceil(out_bytes / fabric_rate + out_bytes / dsu_pool_rate)` |
//! | ingress     | `ceil(input_bytes / host_rate)`, input layer only, opt-in |
//!
//! `slots` pads each dot product to a multiple of `vector_lanes`. The layer
//! is cut into tiles that flow through the phases double-buffered; the
//! pipeline fill is the longest single-phase tile.

use serde::{Deserialize, Serialize};

use super::config::ArchConfig;
use super::energy::EnergyBreakdown;
use super::engine;
use crate::error::Result;
use crate::workload::{layer_feature_bytes, layer_macs, layer_weight_bytes, LayerKind, LayerSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bottleneck {
    Compute,
    Broadcast,
    DramWeights,
    DramWriteback,
    Ingress,
}

impl Bottleneck {
    pub const ALL: [Bottleneck; 5] = [
        Bottleneck::Compute,
        Bottleneck::Broadcast,
        Bottleneck::DramWeights,
        Bottleneck::DramWriteback,
        Bottleneck::Ingress,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Bottleneck::Compute => "compute",
            Bottleneck::Broadcast => "broadcast",
            Bottleneck::DramWeights => "dram_weights",
            Bottleneck::DramWriteback => "dram_writeback",
            Bottleneck::Ingress => "ingress",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCycles {
    pub compute: u64,
    pub broadcast: u64,
    pub weight_load: u64,
    pub writeback: u64,
    pub ingress: u64,
}

impl PhaseCycles {
    pub fn get(&self, b: Bottleneck) -> u64 {
        match b {
            Bottleneck::Compute => self.compute,
            Bottleneck::Broadcast => self.broadcast,
            Bottleneck::DramWeights => self.weight_load,
            Bottleneck::DramWriteback => self.writeback,
            Bottleneck::Ingress => self.ingress,
        }
    }

    pub fn max(&self) -> u64 {
        Bottleneck::ALL
            .iter()
            .map(|&b| self.get(b))
            .max()
            .unwrap_or(0)
    }

    /// Longest phase; ties go to the earlier class in [`Bottleneck::ALL`],
    /// so compute wins any tie.
    pub fn bottleneck(&self) -> Bottleneck {
        let mut best = Bottleneck::Compute;
        for b in Bottleneck::ALL {
            if self.get(b) > self.get(best) {
                best = b;
            }
        }
        best
    }
}

/// Operation and byte counts for one layer at the simulated batch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerTraffic {
    pub macs: u64,
    pub vector_ops: u64,
    pub weight_bytes: u64,
    pub input_bytes: u64,
    pub output_bytes: u64,
    pub ingress_bytes: u64,
}

impl LayerTraffic {
    /// Broadcast plus result return; each feature byte crosses once.
    pub fn fabric_bytes(&self) -> u64 {
        self.input_bytes + self.output_bytes
    }

    /// Weight reads, feature reads from the DSU arrays and result writes.
    pub fn dram_bytes(&self) -> u64 {
        self.weight_bytes + self.input_bytes + self.output_bytes
    }
}

/// Everything the event engine needs about one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerPlan {
    pub name: String,
    pub phases: PhaseCycles,
    pub tiles: u64,
    pub traffic: LayerTraffic,
    /// MAC slots available while the layer computes: `vpus * macs_per_vpu`.
    pub machine_macs: u64,
}

impl LayerPlan {
    /// Cycles of `total` that fall in tile `i` (remainder to the first tiles).
    pub fn tile_share(&self, total: u64, i: u64) -> u64 {
        total / self.tiles + u64::from(i < total % self.tiles)
    }

    pub fn pipeline_fill(&self) -> u64 {
        Bottleneck::ALL
            .iter()
            .map(|&b| self.phases.get(b).div_ceil(self.tiles))
            .max()
            .unwrap_or(0)
    }
}

fn ceil_cycles(bytes: u64, per_cycle: f64) -> u64 {
    if bytes == 0 {
        0
    } else {
        (bytes as f64 / per_cycle).ceil() as u64
    }
}

/// Builds the phase lengths and tiling for `layer`. `is_input` marks the
/// layer fed by the host.
pub fn plan_layer(layer: &LayerSpec, arch: &ArchConfig, batch: u64, is_input: bool) -> LayerPlan {
    let batch = batch.max(1);
    let vpus = arch.vpu_count;
    let channels_per_vpu = layer.out_c.div_ceil(vpus);
    let positions = layer.out_h() * layer.out_w() * batch;
    let (input, output) = layer_feature_bytes(layer);
    let macs = layer_macs(layer) * batch;
    let vector_ops = layer.vector_ops() * batch;

    let compute = match layer.kind {
        LayerKind::Conv2d | LayerKind::FullyConnected => {
            // sparsity shortens the effective dot product
            let reduction = (layer.reduction_len() as f64 * layer.density).ceil() as u64;
            let lanes = arch.vector_lanes;
            let slots = positions * channels_per_vpu * reduction.div_ceil(lanes) * lanes;
            slots.div_ceil(arch.macs_per_vpu)
        }
        LayerKind::Pool | LayerKind::ElementWise => {
            let per_channel = vector_ops / layer.out_c;
            (per_channel * channels_per_vpu).div_ceil(arch.macs_per_vpu)
        }
    };

    let input_bytes = input * batch;
    let output_bytes = output * batch;
    let weight_bytes = layer_weight_bytes(layer);
    let ingress_bytes = if is_input && arch.include_ingress {
        input_bytes
    } else {
        0
    };
    let fabric = arch.fabric_bytes_per_cycle();
    let writeback = if output_bytes == 0 {
        0
    } else {
        (output_bytes as f64 / fabric + output_bytes as f64 / arch.writeback_dram_bytes_per_cycle())
            .ceil() as u64
    };
    let phases = PhaseCycles {
        compute,
        broadcast: ceil_cycles(input_bytes, fabric),
        weight_load: ceil_cycles(weight_bytes, arch.weight_bytes_per_cycle()),
        writeback,
        ingress: ceil_cycles(ingress_bytes, arch.ingress_bytes_per_cycle()),
    };
    let tiles =
        (channels_per_vpu * layer.out_h() * batch).clamp(1, arch.max_tiles_per_layer.max(1));

    LayerPlan {
        name: layer.name.clone(),
        phases,
        tiles,
        traffic: LayerTraffic {
            macs,
            vector_ops,
            weight_bytes,
            input_bytes,
            output_bytes,
            ingress_bytes,
        },
        machine_macs: arch.total_macs(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSim {
    pub layer: String,
    pub compute_cycles: u64,
    pub broadcast_cycles: u64,
    pub weight_load_cycles: u64,
    pub writeback_cycles: u64,
    pub ingress_cycles: u64,
    pub tiles: u64,
    pub pipeline_fill: u64,
    /// Cycles this layer adds to the run (end of its last writeback minus
    /// the previous layer's).
    pub total_cycles: u64,
    pub bottleneck: Bottleneck,
    pub vpu_utilization: f64,
    pub traffic: LayerTraffic,
    pub energy: EnergyBreakdown,
}

impl LayerSim {
    pub fn phases(&self) -> PhaseCycles {
        PhaseCycles {
            compute: self.compute_cycles,
            broadcast: self.broadcast_cycles,
            weight_load: self.weight_load_cycles,
            writeback: self.writeback_cycles,
            ingress: self.ingress_cycles,
        }
    }

    pub(crate) fn from_plan(plan: &LayerPlan, total_cycles: u64, arch: &ArchConfig) -> Self {
        let ops = plan.traffic.macs + plan.traffic.vector_ops;
        let capacity = total_cycles as f64 * plan.machine_macs as f64;
        let vpu_utilization = if capacity > 0.0 {
            ops as f64 / capacity
        } else {
            0.0
        };
        let seconds = total_cycles as f64 / arch.clock_hz();
        LayerSim {
            layer: plan.name.clone(),
            compute_cycles: plan.phases.compute,
            broadcast_cycles: plan.phases.broadcast,
            weight_load_cycles: plan.phases.weight_load,
            writeback_cycles: plan.phases.writeback,
            ingress_cycles: plan.phases.ingress,
            tiles: plan.tiles,
            pipeline_fill: plan.pipeline_fill(),
            total_cycles,
            bottleneck: plan.phases.bottleneck(),
            vpu_utilization,
            traffic: plan.traffic,
            energy: super::energy::energy_breakdown(&plan.traffic.into(), seconds, arch),
        }
    }
}

/// Runs one layer through the event engine as a standalone model.
pub fn schedule_layer(layer: &LayerSpec, arch: &ArchConfig) -> Result<LayerSim> {
    layer.validate()?;
    arch.check()?;
    let plan = plan_layer(layer, arch, 1, true);
    let timeline = engine::run(std::slice::from_ref(&plan), arch.buffer_depth);
    Ok(LayerSim::from_plan(&plan, timeline.makespan, arch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    /// 64 VPUs x 512 MACs with effectively unlimited data paths.
    pub(crate) fn compute_only_arch() -> ArchConfig {
        let mut arch = presets::arch("sunrise-40nm").unwrap();
        arch.vector_lanes = 1;
        arch.dsu_vpu_bandwidth_bytes_per_s = 1e21;
        arch.vpu_pool.bus_limit_bytes_per_cycle = 1e12;
        arch.vpu_pool.array_count = 1 << 40;
        arch.dsu_pool.bus_limit_bytes_per_cycle = 1e12;
        arch.dsu_pool.array_count = 1 << 40;
        arch
    }

    #[test]
    fn balanced_compute_bound_layer() {
        // 65,536 MACs over 64 output channels: 1,024 MACs per VPU
        let layer = LayerSpec::conv("l", 4, 64, 1, 64, 1, 0);
        assert_eq!(layer_macs(&layer), 65_536);
        let sim = schedule_layer(&layer, &compute_only_arch()).unwrap();
        assert_eq!(sim.compute_cycles, 2);
        assert_eq!(sim.bottleneck, Bottleneck::Compute);
    }

    #[test]
    fn single_channel_starves_vpus() {
        let layer = LayerSpec::conv("l", 16, 64, 3, 1, 1, 1);
        let sim = schedule_layer(&layer, &compute_only_arch()).unwrap();
        assert!(sim.vpu_utilization <= 1.0 / 64.0);
        assert!(sim.vpu_utilization > 0.0);
    }

    #[test]
    fn lanes_pad_short_reductions() {
        let mut arch = compute_only_arch();
        let layer = LayerSpec::conv("l", 8, 64, 1, 64, 1, 0);
        let dense = schedule_layer(&layer, &arch).unwrap().compute_cycles;
        arch.vector_lanes = 512;
        let padded = schedule_layer(&layer, &arch).unwrap().compute_cycles;
        assert_eq!(padded, dense * 8);
    }

    #[test]
    fn trivial_layer() {
        let layer = LayerSpec::conv("unit", 1, 1, 1, 1, 1, 0);
        let arch = presets::arch("sunrise-40nm").unwrap();
        let sim = schedule_layer(&layer, &arch).unwrap();
        assert_eq!(sim.tiles, 1);
        assert_eq!(sim.compute_cycles, 1);
        assert_eq!(sim.pipeline_fill, 1);
        let closed = sim.phases().max() + sim.pipeline_fill;
        assert_eq!(closed, 2);
        assert!(sim.total_cycles.abs_diff(closed) <= sim.pipeline_fill);
    }

    #[test]
    fn broadcast_halves_with_double_bandwidth() {
        let layer = LayerSpec::conv("wide", 128, 64, 1, 1, 1, 0);
        let mut arch = presets::arch("sunrise-40nm").unwrap();
        arch.dsu_vpu_bandwidth_bytes_per_s = 1e9;
        let slow = schedule_layer(&layer, &arch).unwrap();
        assert_eq!(slow.bottleneck, Bottleneck::Broadcast);
        arch.dsu_vpu_bandwidth_bytes_per_s = 2e9;
        let fast = schedule_layer(&layer, &arch).unwrap();
        assert_eq!(fast.broadcast_cycles * 2, slow.broadcast_cycles);
    }

    #[test]
    fn tie_goes_to_compute() {
        let p = PhaseCycles {
            compute: 5,
            broadcast: 5,
            weight_load: 5,
            writeback: 5,
            ingress: 5,
        };
        assert_eq!(p.bottleneck(), Bottleneck::Compute);
        let p = PhaseCycles {
            compute: 1,
            weight_load: 7,
            writeback: 7,
            ..Default::default()
        };
        assert_eq!(p.bottleneck(), Bottleneck::DramWeights);
    }

    #[test]
    fn zero_bandwidth_config_rejected() {
        let mut arch = presets::arch("sunrise-40nm").unwrap();
        arch.dsu_vpu_bandwidth_bytes_per_s = 0.0;
        let layer = LayerSpec::conv("l", 4, 4, 1, 4, 1, 0);
        assert!(schedule_layer(&layer, &arch).is_err());
    }

    #[test]
    fn fabric_conservation() {
        let layer = LayerSpec::conv("l", 28, 128, 3, 128, 1, 1);
        let arch = presets::arch("sunrise-40nm").unwrap();
        let sim = schedule_layer(&layer, &arch).unwrap();
        let (i, o) = layer_feature_bytes(&layer);
        assert!(sim.traffic.fabric_bytes() >= i + o);
    }
}
