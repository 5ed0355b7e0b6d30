// SPDX-License-Identifier: Apache-2.0

//! Pooled DRAM arrays.
//!
//! A pool of `k` arrays, each returning `W` bytes per access after `L`
//! cycles, sustains `k * W / L` bytes per cycle under round-robin
//! interleaving, capped by the link that carries the data off the memory
//! wafer. Bank conflicts and DRAM timing protocols are not modeled:
//! weight-stationary traffic streams sequentially.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DramArrayPool {
    pub array_count: u64,
    /// Access round trip of one array, in core cycles.
    pub array_latency_cycles: u64,
    /// Bytes returned per array access.
    pub word_bytes: u64,
    pub array_capacity_bytes: u64,
    /// Ceiling of the bonded link serving this pool, bytes per cycle.
    pub bus_limit_bytes_per_cycle: f64,
    /// Multiplier on array throughput for refresh; 1.0 ignores refresh.
    #[serde(default = "no_derating")]
    pub refresh_derating: f64,
}

fn no_derating() -> f64 {
    1.0
}

impl DramArrayPool {
    pub fn validate(&self, context: &str) -> Result<()> {
        let err = |m: String| Err(Error::validation(context, m));
        if self.array_count == 0 {
            return err("array_count must be >= 1".into());
        }
        if self.array_latency_cycles == 0 {
            return err("array_latency_cycles must be >= 1".into());
        }
        if self.word_bytes == 0 {
            return err("word_bytes must be >= 1".into());
        }
        if !(self.bus_limit_bytes_per_cycle > 0.0) {
            return err(format!(
                "bus_limit_bytes_per_cycle must be positive, got {}",
                self.bus_limit_bytes_per_cycle
            ));
        }
        if !(self.refresh_derating > 0.0 && self.refresh_derating <= 1.0) {
            return err(format!(
                "refresh_derating must lie in (0, 1], got {}",
                self.refresh_derating
            ));
        }
        Ok(())
    }

    /// Raw interleaved rate of the arrays, before the bus cap.
    pub fn array_rate(&self) -> f64 {
        self.array_count as f64 * self.word_bytes as f64 / self.array_latency_cycles as f64
            * self.refresh_derating
    }
}

/// Bytes per cycle the pool sustains.
pub fn sustained_bandwidth(pool: &DramArrayPool) -> f64 {
    pool.array_rate().min(pool.bus_limit_bytes_per_cycle)
}

/// Smallest array count whose interleaved rate meets `demand` bytes/cycle.
pub fn arrays_to_saturate(demand: f64, array_latency_cycles: u64, word_bytes: u64) -> u64 {
    assert!(word_bytes > 0, "word_bytes must be positive");
    if demand <= 0.0 {
        return 0;
    }
    (demand * array_latency_cycles as f64 / word_bytes as f64).ceil() as u64
}

pub fn pool_capacity(pool: &DramArrayPool) -> u64 {
    pool.array_count * pool.array_capacity_bytes
}
