// SPDX-License-Identifier: Apache-2.0

//! Die-to-die data paths: interposer, TSV and hybrid wafer bonding (HITOC).
//!
//! Bandwidth is carried in bits per second. `1 TB/s = 8e12 b/s` when a
//! byte view is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TechKind {
    Interposer,
    Tsv,
    Hitoc,
    /// User-defined technology loaded from a parameter file.
    Custom,
}

/// Whether wires are laid out along a die edge or over an area.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimensionality {
    /// Side-by-side dies: density is wires per mm of edge.
    #[serde(rename = "edge1d")]
    Edge1D,
    /// Stacked dies: density is wires per mm².
    #[serde(rename = "area2d")]
    Area2D,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationTech {
    pub name: String,
    pub kind: TechKind,
    pub pitch_x_um: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch_y_um: Option<f64>,
    pub dimensionality: Dimensionality,
    pub energy_pj_per_bit: f64,
    pub max_io_freq_ghz: f64,
}

impl IntegrationTech {
    pub fn validate(&self) -> Result<()> {
        let ctx = || format!("technology '{}'", self.name);
        if !(self.pitch_x_um > 0.0) {
            return Err(Error::Domain(format!(
                "{}: pitch_x_um must be positive, got {}",
                ctx(),
                self.pitch_x_um
            )));
        }
        if self.dimensionality == Dimensionality::Area2D {
            match self.pitch_y_um {
                Some(p) if p > 0.0 => {}
                Some(p) => {
                    return Err(Error::Domain(format!(
                        "{}: pitch_y_um must be positive, got {p}",
                        ctx()
                    )))
                }
                None => {
                    return Err(Error::Domain(format!(
                        "{}: area technologies need pitch_y_um",
                        ctx()
                    )))
                }
            }
        }
        if !(self.energy_pj_per_bit > 0.0) {
            return Err(Error::Domain(format!(
                "{}: energy_pj_per_bit must be positive",
                ctx()
            )));
        }
        if !(self.max_io_freq_ghz > 0.0) {
            return Err(Error::Domain(format!(
                "{}: max_io_freq_ghz must be positive",
                ctx()
            )));
        }
        Ok(())
    }
}

/// How much of a die is given over to die-to-die connections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionBudget {
    pub die_area_mm2: f64,
    pub connection_area_fraction: f64,
    pub io_frequency_ghz: f64,
    #[serde(default = "one")]
    pub bits_per_wire_per_cycle: u32,
    /// Usable edge length for edge technologies. When absent it is
    /// `sqrt(die_area) * fraction * 100`, i.e. one die edge at the 1% point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_length_mm: Option<f64>,
}

fn one() -> u32 {
    1
}

impl ConnectionBudget {
    /// 100 mm² die, 1% connection area, 1 GHz single-data-rate I/O.
    pub fn reference() -> Self {
        ConnectionBudget {
            die_area_mm2: 100.0,
            connection_area_fraction: 0.01,
            io_frequency_ghz: 1.0,
            bits_per_wire_per_cycle: 1,
            edge_length_mm: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.die_area_mm2 > 0.0) {
            return Err(Error::Domain("die_area_mm2 must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.connection_area_fraction) {
            return Err(Error::Domain(
                "connection_area_fraction must lie in [0, 1]".into(),
            ));
        }
        if !(self.io_frequency_ghz > 0.0) {
            return Err(Error::Domain("io_frequency_ghz must be positive".into()));
        }
        if let Some(e) = self.edge_length_mm {
            if !(e >= 0.0) {
                return Err(Error::Domain("edge_length_mm must be nonnegative".into()));
            }
        }
        Ok(())
    }

    /// Connection area (mm²) for area techs.
    pub fn connection_area_mm2(&self) -> f64 {
        self.die_area_mm2 * self.connection_area_fraction
    }

    /// Usable edge (mm) for edge techs.
    pub fn usable_edge_mm(&self) -> f64 {
        self.edge_length_mm
            .unwrap_or_else(|| self.die_area_mm2.sqrt() * self.connection_area_fraction * 100.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Bandwidth {
    pub bits_per_second: f64,
}

impl Bandwidth {
    pub fn terabytes_per_second(&self) -> f64 {
        self.bits_per_second / 8e12
    }
}

/// Wires per mm² (area) or per mm of edge (edge).
pub fn wire_density(tech: &IntegrationTech) -> Result<f64> {
    tech.validate()?;
    let per_mm_x = 1000.0 / tech.pitch_x_um;
    Ok(match tech.dimensionality {
        Dimensionality::Edge1D => per_mm_x.floor(),
        Dimensionality::Area2D => {
            let pitch_y = tech.pitch_y_um.expect("validated");
            per_mm_x * (1000.0 / pitch_y)
        }
    })
}

/// Number of wires a budget buys for a technology.
pub fn wire_count(tech: &IntegrationTech, budget: &ConnectionBudget) -> Result<f64> {
    budget.validate()?;
    let density = wire_density(tech)?;
    Ok(match tech.dimensionality {
        Dimensionality::Edge1D => density * budget.usable_edge_mm(),
        Dimensionality::Area2D => density * budget.connection_area_mm2(),
    })
}

pub fn aggregate_bandwidth(tech: &IntegrationTech, budget: &ConnectionBudget) -> Result<Bandwidth> {
    let wires = wire_count(tech, budget)?;
    Ok(Bandwidth {
        bits_per_second: wires
            * budget.io_frequency_ghz
            * 1e9
            * f64::from(budget.bits_per_wire_per_cycle),
    })
}

/// Energy in picojoules to move `bits` across the link.
pub fn transfer_energy(tech: &IntegrationTech, bits: u64) -> f64 {
    bits as f64 * tech.energy_pj_per_bit
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechFile {
    pub technologies: Vec<IntegrationTech>,
}

impl TechFile {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let file: TechFile =
            serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
        for t in &file.technologies {
            t.validate()?;
        }
        Ok(file)
    }

    pub fn get(&self, kind: TechKind) -> Option<&IntegrationTech> {
        self.technologies.iter().find(|t| t.kind == kind)
    }

    pub fn by_name(&self, name: &str) -> Option<&IntegrationTech> {
        self.technologies
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(name))
    }
}
