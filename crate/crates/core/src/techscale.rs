// SPDX-License-Identifier: Apache-2.0

//! Chip database, per-area normalization and process-node projection.
//!
//! CMOS node transitions form a tree (40-28-16-10-7 with a 16-12 branch).
//! Walking an edge forward multiplies density and `1 + perf_improvement`
//! and applies the `1 - power_reduction` residual; walking it backward
//! divides them out.
//!
//! Projection keeps die area fixed and applies one of two policies:
//!
//! - performance: transistors run faster at the new node. Per-area
//!   performance scales by `density * performance`; per-area power by
//!   `density * power * performance` (dynamic power tracks frequency).
//! - power reduction: iso-frequency. Performance scales by `density`, power
//!   by `density * power`.
//!
//! The performance policy is taken when its power density stays within the
//! policy cap. Energy efficiency is recomputed as performance over power.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DramNode {
    #[serde(rename = "3x")]
    ThreeX,
    #[serde(rename = "1x")]
    OneX,
    #[serde(rename = "1y")]
    OneY,
    #[serde(rename = "none")]
    None,
}

impl DramNode {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::from(s.to_ascii_lowercase())).map_err(|_| {
            Error::Unknown {
                kind: "DRAM process",
                name: s.to_string(),
            }
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DramNode::ThreeX => "3x",
            DramNode::OneX => "1x",
            DramNode::OneY => "1y",
            DramNode::None => "none",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryType {
    Dram,
    Sram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChipSpec {
    pub name: String,
    pub cmos_node_nm: u32,
    pub dram_node: DramNode,
    pub memory_type: MemoryType,
    pub die_area_mm2: f64,
    pub peak_tops: f64,
    pub memory_capacity_mb: f64,
    pub power_w: f64,
    /// `None` where no figure is published.
    pub memory_bandwidth_tb_s: Option<f64>,
}

impl ChipSpec {
    pub fn validate(&self) -> Result<()> {
        let ctx = || format!("chip '{}'", self.name);
        if !(self.die_area_mm2 > 0.0) {
            return Err(Error::Domain(format!(
                "{}: die area must be positive",
                ctx()
            )));
        }
        if !(self.power_w > 0.0) {
            return Err(Error::validation(ctx(), "power must be positive"));
        }
        if !(self.peak_tops >= 0.0) || !(self.memory_capacity_mb >= 0.0) {
            return Err(Error::validation(
                ctx(),
                "TOPS and capacity must be nonnegative",
            ));
        }
        if let Some(bw) = self.memory_bandwidth_tb_s {
            if !(bw > 0.0) {
                return Err(Error::validation(
                    ctx(),
                    "bandwidth must be positive when given",
                ));
            }
        }
        if self.memory_type == MemoryType::Dram && self.dram_node == DramNode::None {
            return Err(Error::validation(
                ctx(),
                "DRAM-based chip needs a DRAM process",
            ));
        }
        Ok(())
    }

    /// Watts per mm².
    pub fn power_density(&self) -> f64 {
        self.power_w / self.die_area_mm2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaMetrics {
    /// TOPS/mm².
    pub perf_per_area: f64,
    /// GB/s/mm²; `None` when the chip's bandwidth is unknown.
    pub bandwidth_per_area: Option<f64>,
    /// MB/mm².
    pub capacity_per_area: f64,
    /// TOPS/W.
    pub energy_efficiency: f64,
}

pub fn normalize_per_area(spec: &ChipSpec) -> Result<AreaMetrics> {
    spec.validate()?;
    let a = spec.die_area_mm2;
    Ok(AreaMetrics {
        perf_per_area: spec.peak_tops / a,
        bandwidth_per_area: spec.memory_bandwidth_tb_s.map(|bw| bw * 1000.0 / a),
        capacity_per_area: spec.memory_capacity_mb / a,
        energy_efficiency: spec.peak_tops / spec.power_w,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeTransition {
    pub from_nm: u32,
    pub to_nm: u32,
    pub density_ratio: f64,
    pub perf_improvement: f64,
    pub power_reduction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactors {
    pub density: f64,
    pub performance: f64,
    /// Residual power multiplier.
    pub power: f64,
}

impl ScaleFactors {
    pub const IDENTITY: ScaleFactors = ScaleFactors {
        density: 1.0,
        performance: 1.0,
        power: 1.0,
    };

    pub fn then(self, next: ScaleFactors) -> ScaleFactors {
        ScaleFactors {
            density: self.density * next.density,
            performance: self.performance * next.performance,
            power: self.power * next.power,
        }
    }

    fn inverse(self) -> ScaleFactors {
        ScaleFactors {
            density: 1.0 / self.density,
            performance: 1.0 / self.performance,
            power: 1.0 / self.power,
        }
    }
}

impl From<&NodeTransition> for ScaleFactors {
    fn from(t: &NodeTransition) -> Self {
        ScaleFactors {
            density: t.density_ratio,
            performance: 1.0 + t.perf_improvement,
            power: 1.0 - t.power_reduction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DramProcess {
    pub name: DramNode,
    pub density_gb_per_mm2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerPolicy {
    /// Highest projected W/mm² at which the performance policy is used.
    pub power_density_cap_w_per_mm2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingTables {
    pub cmos_transitions: Vec<NodeTransition>,
    pub dram_processes: Vec<DramProcess>,
    pub dram_to_sram_density_ratio: f64,
    pub power_policy: PowerPolicy,
}

impl ScalingTables {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let t: ScalingTables =
            serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
        for tr in &t.cmos_transitions {
            if !(tr.density_ratio >= 1.0)
                || !(0.0..1.0).contains(&tr.perf_improvement)
                || !(0.0..1.0).contains(&tr.power_reduction)
            {
                return Err(Error::validation(
                    format!("{context}: transition {} -> {} nm", tr.from_nm, tr.to_nm),
                    "density_ratio must be >= 1 and fractions in [0, 1)",
                ));
            }
        }
        Ok(t)
    }

    pub fn dram(&self, node: DramNode) -> Option<&DramProcess> {
        self.dram_processes.iter().find(|d| d.name == node)
    }

    pub fn nodes(&self) -> BTreeSet<u32> {
        self.cmos_transitions
            .iter()
            .flat_map(|t| [t.from_nm, t.to_nm])
            .collect()
    }
}

/// Composite scale factors from `from_nm` to `to_nm`.
///
/// Errors when the nodes are not connected, or when the result is a net
/// step back in density (projection only goes forward).
pub fn compose_transitions(
    from_nm: u32,
    to_nm: u32,
    table: &[NodeTransition],
) -> Result<ScaleFactors> {
    let factors = path_factors(from_nm, to_nm, table)?;
    if factors.density < 1.0 {
        return Err(Error::Domain(format!(
            "{from_nm} nm -> {to_nm} nm is a step back in density ({:.3}x)",
            factors.density
        )));
    }
    Ok(factors)
}

fn path_factors(from_nm: u32, to_nm: u32, table: &[NodeTransition]) -> Result<ScaleFactors> {
    if from_nm == to_nm {
        return Ok(ScaleFactors::IDENTITY);
    }
    let mut adj: HashMap<u32, Vec<(u32, ScaleFactors)>> = HashMap::new();
    for t in table {
        let f = ScaleFactors::from(t);
        adj.entry(t.from_nm).or_default().push((t.to_nm, f));
        adj.entry(t.to_nm)
            .or_default()
            .push((t.from_nm, f.inverse()));
    }
    let no_path = || {
        let nodes: BTreeSet<u32> = adj.keys().copied().collect();
        Error::NoPath {
            from: from_nm,
            to: to_nm,
            available: nodes
                .iter()
                .map(|n| format!("{n}"))
                .collect::<Vec<_>>()
                .join(", "),
        }
    };
    if !adj.contains_key(&from_nm) || !adj.contains_key(&to_nm) {
        return Err(no_path());
    }
    // BFS; the table is a tree so the path is unique
    let mut reached: HashMap<u32, ScaleFactors> =
        HashMap::from([(from_nm, ScaleFactors::IDENTITY)]);
    let mut queue = VecDeque::from([from_nm]);
    while let Some(node) = queue.pop_front() {
        let here = reached[&node];
        if node == to_nm {
            return Ok(here);
        }
        for &(next, f) in &adj[&node] {
            if let Entry::Vacant(slot) = reached.entry(next) {
                slot.insert(here.then(f));
                queue.push_back(next);
            }
        }
    }
    Err(no_path())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyPath {
    Performance,
    PowerReduction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub chip: String,
    pub from_nm: u32,
    pub to_nm: u32,
    pub target_dram: Option<DramNode>,
    pub factors: ScaleFactors,
    /// Capacity multiplier actually applied (DRAM or CMOS density ratio).
    pub capacity_factor: f64,
    pub policy: PolicyPath,
    /// Projected W/mm² under the chosen policy.
    pub power_density: f64,
    pub base: AreaMetrics,
    pub metrics: AreaMetrics,
}

pub fn project_chip(
    spec: &ChipSpec,
    target_cmos_nm: u32,
    target_dram: Option<&DramProcess>,
    policy: &PowerPolicy,
    tables: &ScalingTables,
) -> Result<Projection> {
    let base = normalize_per_area(spec)?;
    let f = compose_transitions(spec.cmos_node_nm, target_cmos_nm, &tables.cmos_transitions)?;

    let capacity_factor = match spec.memory_type {
        MemoryType::Sram => f.density,
        MemoryType::Dram => {
            let target = target_dram.ok_or_else(|| {
                Error::validation(
                    format!("chip '{}'", spec.name),
                    "DRAM-based chip needs a target DRAM process",
                )
            })?;
            let source = tables.dram(spec.dram_node).ok_or_else(|| Error::Unknown {
                kind: "DRAM process",
                name: spec.dram_node.as_str().to_string(),
            })?;
            target.density_gb_per_mm2 / source.density_gb_per_mm2
        }
    };

    let pd = spec.power_density();
    let fast_power = f.density * f.power * f.performance;
    let (policy_path, perf_factor, power_factor) =
        if pd * fast_power <= policy.power_density_cap_w_per_mm2 {
            (
                PolicyPath::Performance,
                f.density * f.performance,
                fast_power,
            )
        } else {
            (PolicyPath::PowerReduction, f.density, f.density * f.power)
        };
    let power_density = pd * power_factor;
    let metrics = AreaMetrics {
        perf_per_area: base.perf_per_area * perf_factor,
        bandwidth_per_area: base.bandwidth_per_area.map(|b| b * f.density),
        capacity_per_area: base.capacity_per_area * capacity_factor,
        // same as projected perf over projected power, exact at identity
        energy_efficiency: base.energy_efficiency * (perf_factor / power_factor),
    };
    Ok(Projection {
        chip: spec.name.clone(),
        from_nm: spec.cmos_node_nm,
        to_nm: target_cmos_nm,
        target_dram: target_dram.map(|d| d.name),
        factors: f,
        capacity_factor,
        policy: policy_path,
        power_density,
        base,
        metrics,
    })
}

/// Capacity per area an SRAM chip would reach with its memory area built
/// as DRAM instead, using the tables' DRAM:SRAM density ratio.
pub fn dram_equivalent_capacity(spec: &ChipSpec, tables: &ScalingTables) -> Result<f64> {
    let m = normalize_per_area(spec)?;
    Ok(match spec.memory_type {
        MemoryType::Sram => m.capacity_per_area * tables.dram_to_sram_density_ratio,
        MemoryType::Dram => m.capacity_per_area,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChipDb {
    pub chips: Vec<ChipSpec>,
}

impl ChipDb {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let db: ChipDb =
            serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
        for c in &db.chips {
            c.validate()?;
        }
        Ok(db)
    }

    /// Appends the chips of a user file.
    pub fn extend_from_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let more = ChipDb::from_json(&text, &path.display().to_string())?;
        self.chips.extend(more.chips);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&ChipSpec> {
        let wanted = normalize_name(name);
        self.chips
            .iter()
            .find(|c| normalize_name(&c.name) == wanted)
            .ok_or_else(|| Error::Unknown {
                kind: "chip",
                name: name.to_string(),
            })
    }
}

fn normalize_name(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// The bundled chips.
pub fn chip_db() -> ChipDb {
    crate::presets::chips().expect("bundled chip table is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn tables() -> ScalingTables {
        presets::scaling().unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-12)
    }

    #[test]
    fn builtin_db() {
        let db = chip_db();
        assert_eq!(db.chips.len(), 4);
        assert_eq!(db.get("chip b").unwrap().memory_bandwidth_tb_s, None);
        assert_eq!(db.get("SUNRISE").unwrap().memory_type, MemoryType::Dram);
    }

    #[test]
    fn user_file_appends() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("more.json");
        std::fs::write(
            &path,
            r#"{"chips":[{"name":"Chip D","cmos_node_nm":10,"dram_node":"none","memory_type":"sram",
            "die_area_mm2":300,"peak_tops":100,"memory_capacity_mb":64,"power_w":75,"memory_bandwidth_tb_s":2}]}"#,
        )
        .unwrap();
        let mut db = chip_db();
        db.extend_from_file(&path).unwrap();
        assert_eq!(db.chips.len(), 5);
        assert!(db.get("chip d").is_ok());
    }

    #[test]
    fn per_area_rows() {
        let db = chip_db();
        let s = normalize_per_area(db.get("sunrise").unwrap()).unwrap();
        assert!(close(s.perf_per_area, 0.2273, 1e-3));
        assert!(close(s.bandwidth_per_area.unwrap(), 16.36, 1e-3));
        assert!(close(s.capacity_per_area, 5.11, 1e-3));
        assert!(close(s.energy_efficiency, 2.08, 2e-3));
        let a = normalize_per_area(db.get("chip a").unwrap()).unwrap();
        assert!(close(a.perf_per_area, 0.1525, 1e-9));
        assert!(close(a.bandwidth_per_area.unwrap(), 56.25, 1e-9));
        assert!(close(a.capacity_per_area, 0.375, 1e-9));
        assert!(close(a.energy_efficiency, 1.0167, 1e-4));
    }

    #[test]
    fn zero_tops_and_zero_area() {
        let mut c = chip_db().get("chip c").unwrap().clone();
        c.peak_tops = 0.0;
        let m = normalize_per_area(&c).unwrap();
        assert_eq!((m.perf_per_area, m.energy_efficiency), (0.0, 0.0));
        c.die_area_mm2 = 0.0;
        assert!(matches!(normalize_per_area(&c), Err(Error::Domain(_))));
    }

    #[test]
    fn compositions() {
        let t = tables();
        let f = compose_transitions(40, 7, &t.cmos_transitions).unwrap();
        assert!(close(f.density, 13.2, 1e-12));
        assert!(close(f.performance, 1.45 * 1.35 * 1.15 * 1.22, 1e-12));
        assert!(close(f.performance, 2.746, 1e-3));
        assert!(close(f.power, 0.0807, 1e-3));
        assert_eq!(
            compose_transitions(7, 7, &t.cmos_transitions).unwrap(),
            ScaleFactors::IDENTITY
        );
        let g = compose_transitions(16, 7, &t.cmos_transitions).unwrap();
        assert!(close(g.density, 3.3, 1e-12));
        assert!(close(g.performance, 1.403, 1e-3));
        assert!(close(g.power, 0.299, 1e-3));
        let b = compose_transitions(12, 7, &t.cmos_transitions).unwrap();
        assert!(close(b.density, 3.3 / 1.2, 1e-12));
    }

    #[test]
    fn missing_path_lists_nodes() {
        let t = tables();
        match compose_transitions(65, 7, &t.cmos_transitions) {
            Err(Error::NoPath { available, .. }) => assert!(available.contains("40")),
            other => panic!("{other:?}"),
        }
        assert!(compose_transitions(7, 40, &t.cmos_transitions).is_err());
    }

    #[test]
    fn sunrise_projection() {
        let t = tables();
        let sunrise = chip_db().get("sunrise").unwrap().clone();
        let p = project_chip(&sunrise, 7, t.dram(DramNode::OneY), &t.power_policy, &t).unwrap();
        assert!(close(p.capacity_factor, 5.925, 1e-9));
        assert!(close(p.metrics.capacity_per_area, 30.3, 0.01));
        assert!(close(p.metrics.bandwidth_per_area.unwrap(), 216.0, 0.01));
        assert_eq!(p.policy, PolicyPath::Performance);
        assert!(close(p.metrics.perf_per_area, 7.58, 0.15));
        assert!(project_chip(&sunrise, 7, None, &t.power_policy, &t).is_err());
    }

    #[test]
    fn identity_projection() {
        let t = tables();
        for chip in chip_db().chips {
            if chip.cmos_node_nm != 7 {
                continue;
            }
            let p = project_chip(&chip, 7, t.dram(DramNode::OneY), &t.power_policy, &t).unwrap();
            assert_eq!(p.metrics.perf_per_area, p.base.perf_per_area);
            assert_eq!(p.metrics.bandwidth_per_area, p.base.bandwidth_per_area);
            assert_eq!(p.metrics.capacity_per_area, p.base.capacity_per_area);
            assert_eq!(p.metrics.energy_efficiency, p.base.energy_efficiency);
        }
    }

    #[test]
    fn dram_sram_ratio() {
        let t = tables();
        assert_eq!(t.dram_to_sram_density_ratio, 14.0);
        let a = chip_db().get("chip a").unwrap().clone();
        assert!(close(
            dram_equivalent_capacity(&a, &t).unwrap(),
            0.375 * 14.0,
            1e-12
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const CHAIN: [u32; 5] = [40, 28, 16, 10, 7];

        proptest! {
            #[test]
            fn path_multiplicative(i in 0usize..5, j in 0usize..5, k in 0usize..5) {
                let mut idx = [i, j, k];
                idx.sort();
                let [a, b, c] = idx.map(|x| CHAIN[x]);
                let t = tables();
                let ab = compose_transitions(a, b, &t.cmos_transitions).unwrap();
                let bc = compose_transitions(b, c, &t.cmos_transitions).unwrap();
                let ac = compose_transitions(a, c, &t.cmos_transitions).unwrap();
                let composed = ab.then(bc);
                prop_assert!(close(composed.density, ac.density, 1e-12));
                prop_assert!(close(composed.performance, ac.performance, 1e-12));
                prop_assert!(close(composed.power, ac.power, 1e-12));
            }

            #[test]
            fn normalization_scale_invariant(k in 0.01f64..100.0, chip in 0usize..4) {
                let base = chip_db().chips[chip].clone();
                let mut scaled = base.clone();
                scaled.die_area_mm2 *= k;
                scaled.peak_tops *= k;
                scaled.memory_capacity_mb *= k;
                scaled.power_w *= k;
                scaled.memory_bandwidth_tb_s = base.memory_bandwidth_tb_s.map(|b| b * k);
                let m0 = normalize_per_area(&base).unwrap();
                let m1 = normalize_per_area(&scaled).unwrap();
                prop_assert!(close(m1.perf_per_area, m0.perf_per_area, 1e-12));
                prop_assert!(close(m1.capacity_per_area, m0.capacity_per_area, 1e-12));
                prop_assert!(close(m1.energy_efficiency, m0.energy_efficiency, 1e-12));
                match (m0.bandwidth_per_area, m1.bandwidth_per_area) {
                    (Some(a), Some(b)) => prop_assert!(close(b, a, 1e-12)),
                    (None, None) => {}
                    _ => prop_assert!(false),
                }
            }
        }
    }
}
