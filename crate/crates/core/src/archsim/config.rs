// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unimem::{sustained_bandwidth, DramArrayPool};

/// Highest clock accepted by [`derive_clock`] and config validation.
pub const MAX_CLOCK_GHZ: f64 = 10.0;

/// The simulated machine.
///
/// Bandwidths are bytes per second and energies picojoules; the pools give
/// per-cycle DRAM rates directly. `dram_bandwidth_total_bytes_per_s` is
/// the advertised aggregate and is only checked against the pools.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchConfig {
    pub name: String,
    pub vpu_count: u64,
    pub macs_per_vpu: u64,
    /// Width of one VPU dot-product pass along the reduction dimension.
    /// A reduction of length `r` occupies `ceil(r / lanes) * lanes` MAC
    /// slots; 1 means perfect packing.
    pub vector_lanes: u64,
    pub dsu_count: u64,
    pub clock_ghz: f64,
    /// Published peak, used only to cross-check `2 * MACs * clock`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_peak_tops: Option<f64>,
    /// MAC total the preset was built around; a mismatch is a warning.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_total_macs: Option<u64>,
    pub dsu_vpu_bandwidth_bytes_per_s: f64,
    pub dram_bandwidth_total_bytes_per_s: f64,
    pub vpu_pool: DramArrayPool,
    pub dsu_pool: DramArrayPool,
    pub host_ingress_bytes_per_s: f64,
    /// Fold host ingress into the first layer's pipeline.
    #[serde(default)]
    pub include_ingress: bool,
    pub energy_mac_pj: f64,
    pub energy_dram_pj_per_bit: f64,
    pub energy_fabric_pj_per_bit: f64,
    pub static_power_w: f64,
    #[serde(default = "default_buffer_depth")]
    pub buffer_depth: u64,
    #[serde(default = "default_max_tiles")]
    pub max_tiles_per_layer: u64,
}

fn default_buffer_depth() -> u64 {
    2
}

fn default_max_tiles() -> u64 {
    64
}

impl ArchConfig {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn total_macs(&self) -> u64 {
        self.vpu_count * self.macs_per_vpu
    }

    pub fn clock_hz(&self) -> f64 {
        self.clock_ghz * 1e9
    }

    /// `2 * MACs * clock`, in TOPS.
    pub fn peak_tops(&self) -> f64 {
        2.0 * self.total_macs() as f64 * self.clock_hz() / 1e12
    }

    pub fn fabric_bytes_per_cycle(&self) -> f64 {
        self.dsu_vpu_bandwidth_bytes_per_s / self.clock_hz()
    }

    pub fn ingress_bytes_per_cycle(&self) -> f64 {
        self.host_ingress_bytes_per_s / self.clock_hz()
    }

    /// Weight reads come from the VPU-side arrays.
    pub fn weight_bytes_per_cycle(&self) -> f64 {
        sustained_bandwidth(&self.vpu_pool)
    }

    /// Results land in the DSU-side arrays.
    pub fn writeback_dram_bytes_per_cycle(&self) -> f64 {
        sustained_bandwidth(&self.dsu_pool)
    }

    /// Fails on the first error-level diagnostic.
    pub fn check(&self) -> Result<()> {
        match validate_config(self)
            .into_iter()
            .find(|d| d.severity == Severity::Error)
        {
            Some(d) => Err(Error::Config(d.to_string())),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

/// Every invariant of [`ArchConfig`]. Nothing is repaired.
pub fn validate_config(arch: &ArchConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut error = |field: &str, message: String| {
        out.push(Diagnostic {
            severity: Severity::Error,
            field: field.to_string(),
            message,
        })
    };

    for (field, v) in [
        ("vpu_count", arch.vpu_count),
        ("macs_per_vpu", arch.macs_per_vpu),
        ("vector_lanes", arch.vector_lanes),
        ("dsu_count", arch.dsu_count),
        ("buffer_depth", arch.buffer_depth),
        ("max_tiles_per_layer", arch.max_tiles_per_layer),
    ] {
        if v == 0 {
            error(field, "must be >= 1".into());
        }
    }
    if arch.vector_lanes > arch.macs_per_vpu {
        error(
            "vector_lanes",
            format!(
                "{} lanes exceed macs_per_vpu {}",
                arch.vector_lanes, arch.macs_per_vpu
            ),
        );
    }
    if !(arch.clock_ghz > 0.0 && arch.clock_ghz <= MAX_CLOCK_GHZ) {
        error(
            "clock_ghz",
            format!("must lie in (0, {MAX_CLOCK_GHZ}], got {}", arch.clock_ghz),
        );
    }
    for (field, v) in [
        (
            "dsu_vpu_bandwidth_bytes_per_s",
            arch.dsu_vpu_bandwidth_bytes_per_s,
        ),
        (
            "dram_bandwidth_total_bytes_per_s",
            arch.dram_bandwidth_total_bytes_per_s,
        ),
        ("host_ingress_bytes_per_s", arch.host_ingress_bytes_per_s),
    ] {
        if !(v > 0.0) {
            error(field, format!("bandwidth must be positive, got {v}"));
        }
    }
    for (field, v) in [
        ("energy_mac_pj", arch.energy_mac_pj),
        ("energy_dram_pj_per_bit", arch.energy_dram_pj_per_bit),
        ("energy_fabric_pj_per_bit", arch.energy_fabric_pj_per_bit),
        ("static_power_w", arch.static_power_w),
    ] {
        if !(v >= 0.0) {
            error(field, format!("must be nonnegative, got {v}"));
        }
    }
    for (field, pool) in [("vpu_pool", &arch.vpu_pool), ("dsu_pool", &arch.dsu_pool)] {
        if let Err(Error::Validation { message, .. }) = pool.validate(field) {
            error(field, message);
        }
    }

    let mut warning = |field: &str, message: String| {
        out.push(Diagnostic {
            severity: Severity::Warning,
            field: field.to_string(),
            message,
        })
    };
    if let Some(expected) = arch.expected_total_macs {
        if arch.total_macs() != expected {
            warning(
                "vpu_count, macs_per_vpu",
                format!(
                    "vpu_count {} x macs_per_vpu {} = {} differs from the preset's {} MACs",
                    arch.vpu_count,
                    arch.macs_per_vpu,
                    arch.total_macs(),
                    expected
                ),
            );
        }
    }
    if let Some(nominal) = arch.nominal_peak_tops {
        let derived = arch.peak_tops();
        if (derived - nominal).abs() > 1e-3 * nominal {
            warning(
                "clock_ghz",
                format!("2 x MACs x clock = {derived:.3} TOPS, nominal peak is {nominal} TOPS"),
            );
        }
    }
    if arch.clock_ghz > 0.0 && arch.vpu_pool.bus_limit_bytes_per_cycle > 0.0 {
        let pools = (arch.weight_bytes_per_cycle() + arch.writeback_dram_bytes_per_cycle())
            * arch.clock_hz();
        let total = arch.dram_bandwidth_total_bytes_per_s;
        if total > 0.0 && (pools - total).abs() > 0.01 * total {
            warning(
                "dram_bandwidth_total_bytes_per_s",
                format!("pools sustain {pools:.4e} B/s at the configured clock, declared total is {total:.4e} B/s"),
            );
        }
    }
    out
}

/// Clock in GHz that makes `2 * total_macs * clock` equal `peak_tops`.
pub fn derive_clock(peak_tops: f64, total_macs: u64) -> Result<f64> {
    if !(peak_tops > 0.0) {
        return Err(Error::Domain(format!(
            "peak TOPS must be positive, got {peak_tops}"
        )));
    }
    if total_macs == 0 {
        return Err(Error::Domain("MAC count must be positive".into()));
    }
    let ghz = peak_tops * 1e12 / (2.0 * total_macs as f64) / 1e9;
    if ghz > MAX_CLOCK_GHZ {
        return Err(Error::Domain(format!(
            "derived clock {ghz} GHz is above the {MAX_CLOCK_GHZ} GHz sanity limit"
        )));
    }
    Ok(ghz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn sunrise_clock() {
        let ghz = derive_clock(25.0, 32_768).unwrap();
        assert!((ghz - 0.3815).abs() < 1e-4);
        assert_eq!(ghz, 0.3814697265625);
        assert!(derive_clock(2.0, 1).is_err());
        assert!(derive_clock(0.0, 32_768).is_err());
        assert!(derive_clock(25.0, 0).is_err());
    }

    #[test]
    fn bundled_config_is_clean() {
        let arch = presets::arch("sunrise-40nm").unwrap();
        assert_eq!(validate_config(&arch), vec![]);
        assert_eq!(arch.total_macs(), 32_768);
        assert!((arch.peak_tops() - 25.0).abs() < 1e-9);
        let pools = (arch.weight_bytes_per_cycle() + arch.writeback_dram_bytes_per_cycle())
            * arch.clock_hz();
        assert!((pools - 1.8e12).abs() < 1.0);
    }

    #[test]
    fn mac_total_mismatch_warns_with_both_fields() {
        let mut arch = presets::arch("sunrise-40nm").unwrap();
        arch.vpu_count = 32;
        let diags = validate_config(&arch);
        let d = diags
            .iter()
            .find(|d| d.field.contains("vpu_count"))
            .expect("warning");
        assert_eq!(d.severity, Severity::Warning);
        assert!(d.field.contains("macs_per_vpu"));
        arch.check().unwrap();
    }

    #[test]
    fn negative_bandwidth_is_error() {
        let mut arch = presets::arch("sunrise-40nm").unwrap();
        arch.dsu_vpu_bandwidth_bytes_per_s = -1.0;
        let diags = validate_config(&arch);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.field == "dsu_vpu_bandwidth_bytes_per_s"));
        assert!(matches!(arch.check(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = presets::arch("sunrise-40nm").unwrap().to_json();
        let bad = text.replacen("{", "{\n  \"turbo\": true,", 1);
        assert!(ArchConfig::from_json(&bad, "inline").is_err());
    }
}
