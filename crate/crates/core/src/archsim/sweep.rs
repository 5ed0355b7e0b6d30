// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps over [`ArchConfig`] fields.
//!
//! A sweep is the cartesian product of its axes, enumerated with the last
//! axis varying fastest. Points run in parallel; rows come back in
//! enumeration order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ArchConfig;
use super::sim::{simulate_model, SimResult};
use crate::error::{Error, Result};
use crate::workload::ModelSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    /// Dotted path into the config, e.g. `vpu_count` or `vpu_pool.array_count`.
    pub field: String,
    pub values: Vec<Value>,
}

impl SweepAxis {
    /// Parses `field=v1,v2,...` or `field=start:stop:step` (inclusive).
    pub fn parse(spec: &str) -> Result<Self> {
        let (field, rhs) = spec.split_once('=').ok_or_else(|| {
            Error::validation("--vary", format!("expected FIELD=VALUES, got '{spec}'"))
        })?;
        let field = field.trim().to_string();
        if field.is_empty() {
            return Err(Error::validation("--vary", "empty field name"));
        }
        let parse_num = |s: &str| -> Result<Value> {
            serde_json::from_str::<Value>(s.trim())
                .ok()
                .filter(Value::is_number)
                .ok_or_else(|| {
                    Error::validation(format!("--vary {field}"), format!("'{s}' is not a number"))
                })
        };
        let values = if rhs.contains(':') {
            let parts: Vec<&str> = rhs.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::validation(
                    format!("--vary {field}"),
                    "ranges are start:stop:step",
                ));
            }
            let nums: Vec<Value> = parts.iter().map(|p| parse_num(p)).collect::<Result<_>>()?;
            range_values(&field, &nums[0], &nums[1], &nums[2])?
        } else {
            rhs.split(',').map(parse_num).collect::<Result<Vec<_>>>()?
        };
        if values.is_empty() {
            return Err(Error::validation(format!("--vary {field}"), "no values"));
        }
        Ok(SweepAxis { field, values })
    }
}

fn range_values(field: &str, start: &Value, stop: &Value, step: &Value) -> Result<Vec<Value>> {
    let ctx = || format!("--vary {field}");
    if let (Some(a), Some(b), Some(s)) = (start.as_u64(), stop.as_u64(), step.as_u64()) {
        if s == 0 {
            return Err(Error::validation(ctx(), "step must be positive"));
        }
        return Ok((a..=b).step_by(s as usize).map(Value::from).collect());
    }
    let (a, b, s) = (
        start.as_f64().unwrap_or(0.0),
        stop.as_f64().unwrap_or(0.0),
        step.as_f64().unwrap_or(0.0),
    );
    if !(s > 0.0) {
        return Err(Error::validation(ctx(), "step must be positive"));
    }
    let count = ((b - a) / s + 1e-9).floor();
    if count < 0.0 {
        return Ok(Vec::new());
    }
    Ok((0..=count as u64)
        .map(|i| Value::from(a + i as f64 * s))
        .collect())
}

/// Returns a copy of `base` with `field` set to `value`.
pub fn apply(base: &ArchConfig, field: &str, value: &Value) -> Result<ArchConfig> {
    let mut json = serde_json::to_value(base).expect("config serializes");
    let pointer = format!("/{}", field.replace('.', "/"));
    match json.pointer_mut(&pointer) {
        Some(slot) if !slot.is_object() => *slot = value.clone(),
        _ => {
            return Err(Error::validation(
                format!("--vary {field}"),
                "not a numeric field of the architecture config",
            ))
        }
    }
    serde_json::from_value(json)
        .map_err(|e| Error::validation(format!("--vary {field}={value}"), e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub assignments: Assignments,
    pub result: SimResult,
}

/// Field assignments of one sweep point.
pub type Assignments = Vec<(String, Value)>;

pub fn sweep_points(
    base: &ArchConfig,
    axes: &[SweepAxis],
) -> Result<Vec<(Assignments, ArchConfig)>> {
    let mut points: Vec<(Assignments, ArchConfig)> = vec![(Vec::new(), base.clone())];
    for axis in axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for (assign, cfg) in &points {
            for v in &axis.values {
                let mut a = assign.clone();
                a.push((axis.field.clone(), v.clone()));
                next.push((a, apply(cfg, &axis.field, v)?));
            }
        }
        points = next;
    }
    Ok(points)
}

/// Simulates every point. With `fixed_total_macs`, `macs_per_vpu` is
/// rescaled at each point so `vpu_count * macs_per_vpu` stays at the base
/// config's total.
pub fn run_sweep(
    base: &ArchConfig,
    model: &ModelSpec,
    batch: u64,
    axes: &[SweepAxis],
    fixed_total_macs: bool,
) -> Result<Vec<SweepRow>> {
    let total = base.total_macs();
    let mut points = sweep_points(base, axes)?;
    if fixed_total_macs {
        for (assign, cfg) in &mut points {
            if cfg.vpu_count == 0 || !total.is_multiple_of(cfg.vpu_count) {
                return Err(Error::validation(
                    format!("sweep point {assign:?}"),
                    format!(
                        "{total} MACs do not divide evenly over {} VPUs",
                        cfg.vpu_count
                    ),
                ));
            }
            cfg.macs_per_vpu = total / cfg.vpu_count;
            cfg.vector_lanes = cfg.vector_lanes.min(cfg.macs_per_vpu);
        }
    }
    points
        .into_par_iter()
        .map(|(assignments, cfg)| {
            simulate_model(model, &cfg, batch).map(|result| SweepRow {
                assignments,
                result,
            })
        })
        .collect()
}

/// Summary rows as CSV: one column per swept field, then the headline
/// metrics.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = rows
        .first()
        .map(|r| r.assignments.iter().map(|(f, _)| f.clone()).collect())
        .unwrap_or_default();
    header.extend(
        [
            "throughput",
            "total_cycles",
            "effective_tops",
            "peak_tops",
            "avg_power_w",
            "energy_per_inference_j",
        ]
        .map(String::from),
    );
    w.write_record(&header).expect("in-memory csv");
    for row in rows {
        let mut rec: Vec<String> = row.assignments.iter().map(|(_, v)| v.to_string()).collect();
        let r = &row.result;
        rec.push(format!("{:.3}", r.throughput));
        rec.push(r.total_cycles.to_string());
        rec.push(format!("{:.4}", r.effective_tops));
        rec.push(format!("{:.4}", r.peak_tops));
        rec.push(format!("{:.4}", r.avg_power_w));
        rec.push(format!("{:.6e}", r.energy_per_inference_j));
        w.write_record(&rec).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::workload::load_model;

    #[test]
    fn parse_lists_and_ranges() {
        let a = SweepAxis::parse("vpu_count=16,32,64,128").unwrap();
        assert_eq!(
            a.values,
            vec![
                Value::from(16),
                Value::from(32),
                Value::from(64),
                Value::from(128)
            ]
        );
        let r = SweepAxis::parse("vpu_pool.array_count=1000:4000:1000").unwrap();
        assert_eq!(r.values.len(), 4);
        let f = SweepAxis::parse("clock_ghz=0.2:0.4:0.1").unwrap();
        assert_eq!(f.values.len(), 3);
        assert!(SweepAxis::parse("vpu_count").is_err());
        assert!(SweepAxis::parse("vpu_count=abc").is_err());
    }

    #[test]
    fn unknown_field_rejected() {
        let base = presets::arch("sunrise-40nm").unwrap();
        assert!(apply(&base, "warp_drive", &Value::from(1)).is_err());
        assert!(apply(&base, "vpu_pool", &Value::from(1)).is_err());
        let c = apply(&base, "vpu_pool.array_count", &Value::from(10)).unwrap();
        assert_eq!(c.vpu_pool.array_count, 10);
    }

    #[test]
    fn rows_follow_declaration_order() {
        let base = presets::arch("sunrise-40nm").unwrap();
        let model = load_model("resnet50").unwrap();
        let axes = [SweepAxis::parse("vpu_count=128,16,64,32").unwrap()];
        let rows = run_sweep(&base, &model, 1, &axes, true).unwrap();
        let order: Vec<u64> = rows
            .iter()
            .map(|r| r.assignments[0].1.as_u64().unwrap())
            .collect();
        assert_eq!(order, vec![128, 16, 64, 32]);
        let again = run_sweep(&base, &model, 1, &axes, true).unwrap();
        assert_eq!(rows, again);
        assert_eq!(sweep_csv(&rows), sweep_csv(&again));
    }
}
