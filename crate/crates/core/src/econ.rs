// SPDX-License-Identifier: Apache-2.0

//! Die cost from wafer cost, gross dies per wafer and defect-limited yield.
//!
//! Chips whose memory sits on a bonded DRAM wafer pay for two wafers: the
//! logic share and the DRAM share, each over its own good-die count, then
//! divided by the bonding yield. DRAM repair is modeled as a floor on the
//! DRAM die yield.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::techscale::{ChipSpec, DramNode, MemoryType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YieldModel {
    Poisson,
    Murphy,
}

fn default_diameter() -> f64 {
    300.0
}

fn default_model() -> YieldModel {
    YieldModel::Poisson
}

/// Per-node logic wafer economics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBasis {
    pub node_nm: u32,
    pub nre_usd: f64,
    pub wafer_cost_usd: f64,
    #[serde(default = "default_diameter")]
    pub wafer_diameter_mm: f64,
    pub defect_density_per_mm2: f64,
    #[serde(default = "default_model")]
    pub yield_model: YieldModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DramWaferBasis {
    pub dram_node: DramNode,
    pub wafer_cost_usd: f64,
    #[serde(default = "default_diameter")]
    pub wafer_diameter_mm: f64,
    pub defect_density_per_mm2: f64,
    #[serde(default = "default_model")]
    pub yield_model: YieldModel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondingParams {
    pub bonding_yield: f64,
    /// Effective DRAM die yield after repair never drops below this.
    pub dram_yield_floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBasisFile {
    pub note: String,
    pub nodes: Vec<CostBasis>,
    pub dram_wafers: Vec<DramWaferBasis>,
    pub bonding: BondingParams,
}

impl CostBasisFile {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let f: CostBasisFile =
            serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
        for n in &f.nodes {
            let ctx = format!("{context}: node {} nm", n.node_nm);
            check_wafer(
                &ctx,
                n.wafer_cost_usd,
                n.wafer_diameter_mm,
                n.defect_density_per_mm2,
            )?;
            if !(n.nre_usd >= 0.0) {
                return Err(Error::validation(ctx, "nre_usd must be nonnegative"));
            }
        }
        for d in &f.dram_wafers {
            let ctx = format!("{context}: DRAM {}", d.dram_node.as_str());
            check_wafer(
                &ctx,
                d.wafer_cost_usd,
                d.wafer_diameter_mm,
                d.defect_density_per_mm2,
            )?;
        }
        let b = f.bonding;
        if !(b.bonding_yield > 0.0 && b.bonding_yield <= 1.0)
            || !(0.0..=1.0).contains(&b.dram_yield_floor)
        {
            return Err(Error::validation(
                format!("{context}: bonding"),
                "yields must lie in (0, 1]",
            ));
        }
        Ok(f)
    }

    pub fn node(&self, node_nm: u32) -> Result<&CostBasis> {
        self.nodes
            .iter()
            .find(|n| n.node_nm == node_nm)
            .ok_or_else(|| Error::Unknown {
                kind: "cost basis node",
                name: format!("{node_nm} nm"),
            })
    }

    pub fn dram(&self, node: DramNode) -> Result<&DramWaferBasis> {
        self.dram_wafers
            .iter()
            .find(|d| d.dram_node == node)
            .ok_or_else(|| Error::Unknown {
                kind: "DRAM wafer basis",
                name: node.as_str().to_string(),
            })
    }
}

fn check_wafer(ctx: &str, cost: f64, diameter: f64, d0: f64) -> Result<()> {
    if !(cost >= 0.0) || !(diameter > 0.0) || !(d0 >= 0.0) {
        return Err(Error::validation(
            ctx,
            "wafer cost and defect density must be nonnegative, diameter positive",
        ));
    }
    Ok(())
}

/// Gross dies per wafer, with the usual edge-loss correction.
pub fn dies_per_wafer(die_area_mm2: f64, wafer_diameter_mm: f64) -> Result<u64> {
    if !(die_area_mm2 > 0.0) || !(wafer_diameter_mm > 0.0) {
        return Err(Error::Domain(
            "die area and wafer diameter must be positive".into(),
        ));
    }
    let d = wafer_diameter_mm;
    let n = PI * (d / 2.0).powi(2) / die_area_mm2 - PI * d / (2.0 * die_area_mm2).sqrt();
    Ok(if n > 0.0 { n.floor() as u64 } else { 0 })
}

pub fn die_yield(die_area_mm2: f64, defect_density_per_mm2: f64, model: YieldModel) -> f64 {
    let ad = die_area_mm2 * defect_density_per_mm2;
    if ad == 0.0 {
        return 1.0;
    }
    match model {
        YieldModel::Poisson => (-ad).exp(),
        YieldModel::Murphy => ((1.0 - (-ad).exp()) / ad).powi(2),
    }
}

/// Cost of one good die from a single wafer type.
pub fn wafer_die_cost(
    die_area_mm2: f64,
    wafer_cost_usd: f64,
    wafer_diameter_mm: f64,
    yield_fraction: f64,
) -> Result<f64> {
    let dpw = dies_per_wafer(die_area_mm2, wafer_diameter_mm)?;
    if dpw == 0 {
        return Err(Error::Domain(format!(
            "a {die_area_mm2} mm² die does not fit on a {wafer_diameter_mm} mm wafer"
        )));
    }
    if wafer_cost_usd == 0.0 {
        return Ok(0.0);
    }
    Ok(wafer_cost_usd / (dpw as f64 * yield_fraction))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DieCost {
    pub logic_usd: f64,
    /// DRAM wafer share before the bonding yield, for bonded chips.
    pub dram_usd: Option<f64>,
    pub total_usd: f64,
}

pub fn die_cost(spec: &ChipSpec, basis: &CostBasisFile) -> Result<DieCost> {
    spec.validate()?;
    let node = basis.node(spec.cmos_node_nm)?;
    let area = spec.die_area_mm2;
    let logic = wafer_die_cost(
        area,
        node.wafer_cost_usd,
        node.wafer_diameter_mm,
        die_yield(area, node.defect_density_per_mm2, node.yield_model),
    )?;
    if spec.memory_type == MemoryType::Sram {
        return Ok(DieCost {
            logic_usd: logic,
            dram_usd: None,
            total_usd: logic,
        });
    }
    let dram = basis.dram(spec.dram_node)?;
    let raw = die_yield(area, dram.defect_density_per_mm2, dram.yield_model);
    let dram_usd = wafer_die_cost(
        area,
        dram.wafer_cost_usd,
        dram.wafer_diameter_mm,
        raw.max(basis.bonding.dram_yield_floor),
    )?;
    Ok(DieCost {
        logic_usd: logic,
        dram_usd: Some(dram_usd),
        total_usd: (logic + dram_usd) / basis.bonding.bonding_yield,
    })
}

pub fn cost_per_tops(die_cost_usd: f64, peak_tops: f64) -> Result<f64> {
    if !(peak_tops > 0.0) {
        return Err(Error::Domain("peak TOPS must be positive".into()));
    }
    Ok(die_cost_usd / peak_tops)
}

pub fn nre(node_nm: u32, basis: &CostBasisFile) -> Result<f64> {
    basis.node(node_nm).map(|n| n.nre_usd)
}

/// Wafer cost that makes a single-wafer die of `die_area_mm2` cost
/// `target_usd`; the inverse of [`wafer_die_cost`].
pub fn fit_wafer_cost(
    target_usd: f64,
    die_area_mm2: f64,
    wafer_diameter_mm: f64,
    yield_fraction: f64,
) -> Result<f64> {
    let dpw = dies_per_wafer(die_area_mm2, wafer_diameter_mm)?;
    Ok(target_usd * dpw as f64 * yield_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::techscale::chip_db;

    /// Counts whole square dies on a grid inside the wafer, best of a few
    /// grid offsets.
    fn grid_count(area: f64, diameter: f64) -> u64 {
        let s = area.sqrt();
        let r = diameter / 2.0;
        let n = (diameter / s).ceil() as i64 + 2;
        let mut best = 0;
        for ox in 0..4 {
            for oy in 0..4 {
                let (dx, dy) = (ox as f64 * s / 4.0, oy as f64 * s / 4.0);
                let mut count = 0;
                for i in -n..n {
                    for j in -n..n {
                        let x0 = i as f64 * s + dx;
                        let y0 = j as f64 * s + dy;
                        let inside = [(x0, y0), (x0 + s, y0), (x0, y0 + s), (x0 + s, y0 + s)]
                            .iter()
                            .all(|(x, y)| x * x + y * y <= r * r);
                        count += inside as u64;
                    }
                }
                best = best.max(count);
            }
        }
        best
    }

    #[test]
    fn gross_die_formula() {
        assert_eq!(dies_per_wafer(110.0, 300.0).unwrap(), 579);
        assert_eq!(dies_per_wafer(800.0, 300.0).unwrap(), 64);
        assert_eq!(dies_per_wafer(456.0, 300.0).unwrap(), 123);
        assert_eq!(dies_per_wafer(709.0, 300.0).unwrap(), 74);
        assert_eq!(dies_per_wafer(80_000.0, 300.0).unwrap(), 0);
        assert!(dies_per_wafer(0.0, 300.0).is_err());
    }

    #[test]
    fn gross_die_formula_against_grid_placement() {
        // the edge-loss term undercounts large dies; the check covers small ones
        for area in [25.0, 50.0, 110.0, 200.0] {
            let f = dies_per_wafer(area, 300.0).unwrap() as f64;
            let g = grid_count(area, 300.0) as f64;
            assert!(
                (f - g).abs() / g <= 0.05,
                "area {area}: formula {f}, grid {g}"
            );
        }
    }

    #[test]
    fn yields() {
        assert_eq!(die_yield(110.0, 0.0, YieldModel::Poisson), 1.0);
        assert_eq!(die_yield(110.0, 0.0, YieldModel::Murphy), 1.0);
        assert!((die_yield(110.0, 0.001, YieldModel::Poisson) - 0.896).abs() < 5e-4);
    }

    #[test]
    fn bundled_basis_rows() {
        let basis = presets::cost_basis().unwrap();
        let db = chip_db();
        let sunrise = die_cost(db.get("sunrise").unwrap(), &basis).unwrap();
        assert!(sunrise.dram_usd.is_some());
        assert!((sunrise.total_usd - 11.0).abs() / 11.0 < 0.2);
        let c = die_cost(db.get("chip c").unwrap(), &basis).unwrap();
        assert!((c.total_usd - 336.0).abs() / 336.0 < 0.2);
        assert_eq!(nre(40, &basis).unwrap(), 2.2e6);
        assert_eq!(nre(7, &basis).unwrap(), 24e6);
        assert!(nre(65, &basis).is_err());
    }

    #[test]
    fn free_wafer() {
        assert_eq!(wafer_die_cost(110.0, 0.0, 300.0, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn fit_inverts_cost() {
        let y = die_yield(456.0, 0.002, YieldModel::Poisson);
        let w = fit_wafer_cost(336.0, 456.0, 300.0, y).unwrap();
        assert!((wafer_die_cost(456.0, w, 300.0, y).unwrap() - 336.0).abs() < 1e-9);
    }

    #[test]
    fn murphy_at_least_poisson_on_grid() {
        for i in 1..=200 {
            let ad = i as f64 * 0.025;
            assert!(
                die_yield(ad, 1.0, YieldModel::Murphy) >= die_yield(ad, 1.0, YieldModel::Poisson)
            );
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn murphy_dominates_poisson(a in 1.0f64..2000.0, d0 in 1e-6f64..0.01) {
                prop_assert!(die_yield(a, d0, YieldModel::Murphy) >= die_yield(a, d0, YieldModel::Poisson));
            }

            #[test]
            fn cost_increases_with_area(a in 10.0f64..1500.0, extra in 1.0f64..200.0, d0 in 1e-4f64..0.005) {
                let c = |area: f64| {
                    wafer_die_cost(area, 5000.0, 300.0, die_yield(area, d0, YieldModel::Poisson)).unwrap()
                };
                prop_assert!(c(a + extra) > c(a));
            }

            #[test]
            fn cost_increases_with_defects(a in 10.0f64..1500.0, d0 in 0.0f64..0.005, extra in 1e-5f64..0.005) {
                let c = |d: f64| {
                    wafer_die_cost(a, 5000.0, 300.0, die_yield(a, d, YieldModel::Murphy)).unwrap()
                };
                prop_assert!(c(d0 + extra) > c(d0));
            }

            #[test]
            fn cost_per_tops_homogeneous(cost in 0.0f64..1e4, tops in 0.1f64..1e3, k in 0.01f64..100.0) {
                let a = cost_per_tops(cost, tops).unwrap();
                let b = cost_per_tops(cost * k, tops * k).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
