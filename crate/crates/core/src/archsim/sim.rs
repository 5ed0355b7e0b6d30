// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::config::ArchConfig;
use super::energy::{energy_report, EnergyBreakdown};
use super::engine;
use super::schedule::{plan_layer, LayerSim};
use crate::error::{Error, Result};
use crate::workload::ModelSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub model: String,
    pub arch: String,
    pub batch: u64,
    pub per_layer: Vec<LayerSim>,
    pub total_cycles: u64,
    pub seconds: f64,
    /// Inferences per second, host ingress excluded unless the config
    /// folds it in.
    pub throughput: f64,
    pub effective_tops: f64,
    pub peak_tops: f64,
    pub avg_power_w: f64,
    pub energy_per_inference_j: f64,
    pub energy: EnergyBreakdown,
    /// Inferences per second the host link alone could feed.
    pub ingress_bound_throughput: f64,
    pub events: u64,
}

/// Runs `model` on `arch`, layer after layer, in one event loop.
///
/// Weights of later layers prefetch while earlier layers compute whenever
/// input buffers are free; broadcast of a layer waits for the previous
/// layer's results.
pub fn simulate_model(model: &ModelSpec, arch: &ArchConfig, batch: u64) -> Result<SimResult> {
    if model.layers.is_empty() {
        return Err(Error::validation(
            format!("model '{}'", model.name),
            "model has no layers",
        ));
    }
    if batch == 0 {
        return Err(Error::validation("batch", "batch must be >= 1"));
    }
    model.validate()?;
    arch.check()?;

    let plans: Vec<_> = model
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| plan_layer(l, arch, batch, i == 0))
        .collect();
    let timeline = engine::run(&plans, arch.buffer_depth);

    let mut prev_end = 0;
    let per_layer: Vec<LayerSim> = plans
        .iter()
        .zip(&timeline.layer_end)
        .map(|(plan, &end)| {
            let sim = LayerSim::from_plan(plan, end - prev_end, arch);
            prev_end = end;
            sim
        })
        .collect();

    let total_cycles = timeline.makespan;
    let seconds = total_cycles as f64 / arch.clock_hz();
    let macs: u64 = per_layer.iter().map(|l| l.traffic.macs).sum();
    let throughput = batch as f64 / seconds;
    let effective_tops = 2.0 * macs as f64 / seconds / 1e12;
    let peak_tops = arch.peak_tops();
    assert!(
        effective_tops <= peak_tops * (1.0 + 1e-12),
        "effective {effective_tops} TOPS exceeds peak {peak_tops} TOPS"
    );

    let mut result = SimResult {
        model: model.name.clone(),
        arch: arch.name.clone(),
        batch,
        per_layer,
        total_cycles,
        seconds,
        throughput,
        effective_tops,
        peak_tops,
        avg_power_w: 0.0,
        energy_per_inference_j: 0.0,
        energy: EnergyBreakdown::default(),
        ingress_bound_throughput: arch.host_ingress_bytes_per_s / model.input_bytes as f64,
        events: timeline.events,
    };
    let energy = energy_report(&result, arch);
    result.avg_power_w = energy.avg_power_w;
    result.energy_per_inference_j = energy.total_j / batch as f64;
    result.energy = energy;
    Ok(result)
}

impl SimResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// One row per layer.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "layer",
            "compute_cycles",
            "broadcast_cycles",
            "weight_load_cycles",
            "writeback_cycles",
            "ingress_cycles",
            "tiles",
            "pipeline_fill",
            "total_cycles",
            "bottleneck",
            "vpu_utilization",
            "macs",
            "weight_bytes",
            "input_bytes",
            "output_bytes",
            "energy_j",
        ])
        .expect("in-memory csv");
        for l in &self.per_layer {
            w.write_record([
                l.layer.clone(),
                l.compute_cycles.to_string(),
                l.broadcast_cycles.to_string(),
                l.weight_load_cycles.to_string(),
                l.writeback_cycles.to_string(),
                l.ingress_cycles.to_string(),
                l.tiles.to_string(),
                l.pipeline_fill.to_string(),
                l.total_cycles.to_string(),
                l.bottleneck.as_str().to_string(),
                format!("{:.6}", l.vpu_utilization),
                l.traffic.macs.to_string(),
                l.traffic.weight_bytes.to_string(),
                l.traffic.input_bytes.to_string(),
                l.traffic.output_bytes.to_string(),
                format!("{:.6e}", l.energy.total_j),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} on {} (batch {}): {:.1} inferences/s, {} cycles, {:.2} effective TOPS of {:.2} peak, {:.2} W, ingress-bound {:.1} inferences/s",
            self.model,
            self.arch,
            self.batch,
            self.throughput,
            self.total_cycles,
            self.effective_tops,
            self.peak_tops,
            self.avg_power_w,
            self.ingress_bound_throughput
        )
    }
}
