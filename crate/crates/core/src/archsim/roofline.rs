// SPDX-License-Identifier: Apache-2.0

//! Roofline classification of a layer, independent of the event engine.
//!
//! For each data path the layer's arithmetic intensity (operations per
//! byte moved on that path) is compared with the machine balance
//! (attainable operations per cycle over the path's bytes per cycle). The
//! layer is compute bound when every intensity reaches its balance;
//! otherwise it is bound by the path falling furthest below.
//!
//! The compute roof is the peak derated by the layer's mapping efficiency
//! (idle VPUs when channels do not divide evenly, padded vector lanes).
//! When one schedule phase is at least twice every other, the roofline
//! class agrees with [`super::schedule_layer`]'s bottleneck.

use serde::{Deserialize, Serialize};

use super::config::ArchConfig;
use super::schedule::Bottleneck;
use crate::workload::{layer_feature_bytes, layer_macs, layer_weight_bytes, LayerKind, LayerSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRoof {
    pub path: Bottleneck,
    pub bytes: u64,
    pub bytes_per_cycle: f64,
    /// Operations per byte; infinite when the path carries nothing.
    pub intensity: f64,
    /// Attainable operations per cycle over bytes per cycle.
    pub balance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RooflineReport {
    pub bound: Bottleneck,
    pub ops: u64,
    pub mapping_efficiency: f64,
    pub attainable_ops_per_cycle: f64,
    pub paths: Vec<PathRoof>,
}

/// Fraction of the MAC array doing useful work for this layer's shape.
pub fn mapping_efficiency(layer: &LayerSpec, arch: &ArchConfig) -> f64 {
    let vpus = arch.vpu_count as f64;
    let oc = layer.out_c as f64;
    let channel_balance = oc / ((oc / vpus).ceil() * vpus);
    match layer.kind {
        LayerKind::Conv2d | LayerKind::FullyConnected => {
            let effective = layer.reduction_len() as f64 * layer.density;
            let lanes = arch.vector_lanes as f64;
            let lane_fill = effective / ((effective.ceil() / lanes).ceil() * lanes);
            channel_balance * lane_fill
        }
        LayerKind::Pool | LayerKind::ElementWise => channel_balance,
    }
}

pub fn roofline_check(layer: &LayerSpec, arch: &ArchConfig) -> RooflineReport {
    let ops = match layer.kind {
        LayerKind::Conv2d | LayerKind::FullyConnected => layer_macs(layer),
        LayerKind::Pool | LayerKind::ElementWise => layer.vector_ops(),
    };
    let efficiency = mapping_efficiency(layer, arch);
    let attainable = arch.total_macs() as f64 * efficiency;
    let (input, output) = layer_feature_bytes(layer);
    let writeback_rate =
        1.0 / (1.0 / arch.fabric_bytes_per_cycle() + 1.0 / arch.writeback_dram_bytes_per_cycle());
    let mut paths = vec![
        (Bottleneck::Broadcast, input, arch.fabric_bytes_per_cycle()),
        (
            Bottleneck::DramWeights,
            layer_weight_bytes(layer),
            arch.weight_bytes_per_cycle(),
        ),
        (Bottleneck::DramWriteback, output, writeback_rate),
    ];
    if arch.include_ingress {
        paths.push((Bottleneck::Ingress, input, arch.ingress_bytes_per_cycle()));
    }
    let paths: Vec<PathRoof> = paths
        .into_iter()
        .map(|(path, bytes, rate)| PathRoof {
            path,
            bytes,
            bytes_per_cycle: rate,
            intensity: if bytes == 0 {
                f64::INFINITY
            } else {
                ops as f64 / bytes as f64
            },
            balance: attainable / rate,
        })
        .collect();

    // ratios within rounding of 1 are a tie, which goes to compute
    let mut bound = Bottleneck::Compute;
    let mut worst = 1.0 - 1e-9;
    for p in &paths {
        let ratio = p.intensity / p.balance;
        if ratio < worst {
            worst = ratio;
            bound = p.path;
        }
    }
    RooflineReport {
        bound,
        ops,
        mapping_efficiency: efficiency,
        attainable_ops_per_cycle: attainable,
        paths,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn deep_convolution_is_compute_bound() {
        let arch = presets::arch("sunrise-40nm").unwrap();
        let l = LayerSpec::conv("deep", 14, 1024, 3, 1024, 1, 1);
        let r = roofline_check(&l, &arch);
        assert_eq!(r.bound, Bottleneck::Compute);
        assert!(r.paths.iter().all(|p| p.intensity > p.balance));
    }

    #[test]
    fn thin_pointwise_on_large_map_is_memory_bound() {
        let mut arch = presets::arch("sunrise-40nm").unwrap();
        arch.vector_lanes = 1;
        // 1x1 conv, 1 -> 64 channels: one MAC per output byte written back
        let l = LayerSpec::conv("thin", 512, 1, 1, 64, 1, 0);
        let r = roofline_check(&l, &arch);
        assert_eq!(r.bound, Bottleneck::DramWriteback);
    }

    #[test]
    fn exact_balance_is_compute() {
        let mut arch = presets::arch("sunrise-40nm").unwrap();
        arch.vector_lanes = 1;
        let l = LayerSpec::conv("l", 16, 64, 1, 32, 1, 0);
        let ops = layer_macs(&l) as f64;
        let (input, _) = layer_feature_bytes(&l);
        // fabric rate such that broadcast intensity equals its balance
        let attainable = arch.total_macs() as f64 * mapping_efficiency(&l, &arch);
        let rate = attainable * input as f64 / ops;
        arch.dsu_vpu_bandwidth_bytes_per_s = rate * arch.clock_hz();
        let r = roofline_check(&l, &arch);
        let b = r
            .paths
            .iter()
            .find(|p| p.path == Bottleneck::Broadcast)
            .unwrap();
        assert!((b.intensity / b.balance - 1.0).abs() < 1e-12);
        assert_eq!(r.bound, Bottleneck::Compute);
    }
}
