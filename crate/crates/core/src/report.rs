// SPDX-License-Identifier: Apache-2.0

//! Published reference tables, reconciliation against computed values, and
//! CSV / JSON / Markdown emitters.
//!
//! Published cells are kept as the text that was printed (`"0.23"`,
//! `"1.2e4"`, `"no data"`), so the number of displayed decimals is known.
//! A cell counts as reproduced when its relative deviation is within the
//! cell's tolerance, or when the computed value rounds to the printed text.
//!
//! Numbers in CSV and Markdown are formatted with [`sig3`]. JSON keeps full
//! precision and round-trips byte for byte.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::econ::{cost_per_tops, die_cost, nre, CostBasisFile};
use crate::error::{Error, Result};
use crate::format::sig3;
use crate::interconnect::{aggregate_bandwidth, wire_density, ConnectionBudget, TechFile};
use crate::presets;
use crate::techscale::{
    normalize_per_area, project_chip, AreaMetrics, ChipDb, DramNode, ScalingTables,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
}

impl TableId {
    pub const ALL: [TableId; 7] = [
        TableId::T1,
        TableId::T2,
        TableId::T3,
        TableId::T4,
        TableId::T5,
        TableId::T6,
        TableId::T7,
    ];

    /// Accepts `T3`, `t3` or `3`.
    pub fn parse(s: &str) -> Result<Self> {
        let digits = s.trim().trim_start_matches(['T', 't']);
        match digits.parse::<usize>() {
            Ok(n @ 1..=7) => Ok(Self::ALL[n - 1]),
            _ => Err(Error::Unknown {
                kind: "table id (expected T1..T7)",
                name: s.to_string(),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        ["T1", "T2", "T3", "T4", "T5", "T6", "T7"][*self as usize]
    }

    /// Rows and columns the table must have.
    fn shape(&self) -> (usize, usize) {
        match self {
            TableId::T1 => (3, 3),
            TableId::T2 => (6, 4),
            TableId::T3 | TableId::T7 => (4, 4),
            TableId::T4 => (4, 3),
            TableId::T5 => (5, 3),
            TableId::T6 => (1, 3),
        }
    }
}

pub const NO_DATA: &str = "no data";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedRow {
    pub label: String,
    pub cells: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedTable {
    pub id: TableId,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<PublishedRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedTables {
    pub tables: Vec<PublishedTable>,
}

impl PublishedTables {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let t: PublishedTables =
            serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
        for id in TableId::ALL {
            let table = t.get(id)?;
            let (rows, cols) = id.shape();
            let ctx = format!("{context}: {}", id.as_str());
            if table.rows.len() != rows || table.columns.len() != cols {
                return Err(Error::validation(
                    ctx,
                    format!("expected {rows} rows x {cols} columns"),
                ));
            }
            if let Some(r) = table.rows.iter().find(|r| r.cells.len() != cols) {
                return Err(Error::validation(
                    ctx,
                    format!("row '{}' has {} cells", r.label, r.cells.len()),
                ));
            }
        }
        Ok(t)
    }

    pub fn get(&self, id: TableId) -> Result<&PublishedTable> {
        self.tables
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| Error::Unknown {
                kind: "published table",
                name: id.as_str().to_string(),
            })
    }
}

/// Parses a printed number: plain decimal or `mantissa e exponent`.
pub fn parse_published(text: &str) -> Option<f64> {
    text.trim().parse::<f64>().ok()
}

/// True when `value` printed at the precision of `text` gives `text`.
pub fn rounds_to(value: f64, text: &str) -> bool {
    let t = text.trim().to_ascii_lowercase();
    let (mantissa, exp) = match t.split_once('e') {
        Some((m, e)) => match e.parse::<i32>() {
            Ok(e) => (m, e),
            Err(_) => return false,
        },
        None => (t.as_str(), 0),
    };
    let Ok(m) = mantissa.parse::<f64>() else {
        return false;
    };
    let decimals = mantissa.split_once('.').map_or(0, |(_, d)| d.len()) as i32;
    let scale = 10f64.powi(decimals);
    let scaled = value / 10f64.powi(exp);
    ((scaled * scale).round() - (m * scale).round()).abs() < 0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Reproduced,
    /// Outside tolerance; reported, documented in the notes.
    Deviates,
    /// No published value.
    NoData,
    /// Not a computed quantity (model inputs, text cells).
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRecon {
    pub row: String,
    pub column: String,
    pub published: String,
    pub computed: Option<f64>,
    /// `|computed - published| / published * 100`.
    pub deviation_percent: Option<f64>,
    pub tolerance_percent: Option<f64>,
    pub status: CellStatus,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reconciliation {
    pub table_id: TableId,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    /// Row-major.
    pub cells: Vec<CellRecon>,
    pub notes: Vec<String>,
}

impl Reconciliation {
    pub fn cell(&self, row: usize, col: usize) -> &CellRecon {
        &self.cells[row * self.columns.len() + col]
    }

    pub fn find(&self, row: &str, column: &str) -> Option<&CellRecon> {
        self.cells
            .iter()
            .find(|c| c.row == row && c.column == column)
    }
}

/// Everything a reconciliation reads.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub chips: ChipDb,
    pub techs: TechFile,
    pub scaling: ScalingTables,
    pub cost: CostBasisFile,
    pub published: PublishedTables,
}

impl Inputs {
    pub fn bundled() -> Result<Self> {
        Ok(Inputs {
            chips: presets::chips()?,
            techs: presets::technologies()?,
            scaling: presets::scaling()?,
            cost: presets::cost_basis()?,
            published: presets::published_tables()?,
        })
    }
}

/// What the model says about one cell.
enum Cell {
    Value { value: f64, tolerance: f64 },
    Unknown(String),
    Input(String),
}

const EXACT: f64 = 1e-9;

fn value(value: f64, tolerance: f64) -> Cell {
    Cell::Value { value, tolerance }
}

fn judge(row: &str, column: &str, published: &str, cell: Cell) -> CellRecon {
    let mut out = CellRecon {
        row: row.to_string(),
        column: column.to_string(),
        published: published.to_string(),
        computed: None,
        deviation_percent: None,
        tolerance_percent: None,
        status: CellStatus::NotApplicable,
        reason: None,
    };
    let (computed, tolerance) = match cell {
        Cell::Input(reason) => {
            out.reason = Some(reason);
            return out;
        }
        Cell::Unknown(reason) => {
            out.reason = Some(reason);
            if published == NO_DATA {
                out.status = CellStatus::NoData;
            }
            return out;
        }
        Cell::Value { value, tolerance } => (value, tolerance),
    };
    out.computed = Some(computed);
    out.tolerance_percent = Some(tolerance);
    let Some(p) = parse_published(published) else {
        out.status = CellStatus::NoData;
        out.reason = Some("no published value".into());
        return out;
    };
    let within = if p != 0.0 {
        let dev = (computed - p).abs() / p.abs() * 100.0;
        out.deviation_percent = Some(dev);
        dev <= tolerance
    } else {
        computed == 0.0
    };
    out.status = if within || rounds_to(computed, published) {
        CellStatus::Reproduced
    } else {
        CellStatus::Deviates
    };
    out
}

fn chip_name(label: &str) -> &str {
    label.split(" (").next().unwrap_or(label).trim()
}

/// `"28 nm vs. 40 nm"` to `(40, 28)`.
fn transition_nodes(label: &str) -> Option<(u32, u32)> {
    let (to, from) = label.split_once("vs.")?;
    let num = |s: &str| s.trim().trim_end_matches("nm").trim().parse::<u32>().ok();
    Some((num(from)?, num(to)?))
}

fn area_cells(m: &AreaMetrics, tolerances: [f64; 4]) -> [Cell; 4] {
    [
        value(m.perf_per_area, tolerances[0]),
        match m.bandwidth_per_area {
            Some(b) => value(b, tolerances[1]),
            None => Cell::Unknown("bandwidth not published for this chip".into()),
        },
        value(m.capacity_per_area, tolerances[2]),
        value(m.energy_efficiency, tolerances[3]),
    ]
}

fn compute_cells(table: &PublishedTable, inputs: &Inputs) -> Result<(Vec<Vec<Cell>>, Vec<String>)> {
    let mut notes = Vec::new();
    let mut cells: Vec<Vec<Cell>> = Vec::new();
    match table.id {
        TableId::T1 => {
            let budget = ConnectionBudget::reference();
            let mut pitch = Vec::new();
            let mut density = Vec::new();
            let mut bandwidth = Vec::new();
            for col in &table.columns {
                let tech = inputs.techs.by_name(col).ok_or_else(|| Error::Unknown {
                    kind: "technology",
                    name: col.clone(),
                })?;
                pitch.push(Cell::Input("technology parameter".into()));
                let tol = if col.eq_ignore_ascii_case("tsv") {
                    5.0
                } else {
                    EXACT
                };
                density.push(value(wire_density(tech)?, tol));
                bandwidth.push(value(
                    aggregate_bandwidth(tech, &budget)?.terabytes_per_second(),
                    EXACT,
                ));
            }
            cells.extend([pitch, density, bandwidth]);
            notes.push(
                "Interposer density is wires per mm of die edge, floor(1000 / pitch). Usable edge defaults to sqrt(die area) x fraction x 100 mm."
                    .into(),
            );
            notes.push(
                "Bandwidth = wires x 1 GHz x 1 bit, with 1 TB = 8e12 bits, for a 100 mm2 die and 1% connection area. The published bandwidth row does not follow a single bit/byte convention, so its deviations are reported, not corrected."
                    .into(),
            );
        }
        TableId::T2 => {
            let chips: Vec<_> = table
                .columns
                .iter()
                .map(|c| inputs.chips.get(chip_name(c)))
                .collect::<Result<_>>()?;
            let row = |f: &dyn Fn(&crate::techscale::ChipSpec) -> Option<f64>| -> Vec<Cell> {
                chips
                    .iter()
                    .map(|c| match f(c) {
                        Some(v) => value(v, EXACT),
                        None => Cell::Unknown("bandwidth not published for this chip".into()),
                    })
                    .collect()
            };
            cells.push(row(&|c| Some(c.cmos_node_nm as f64)));
            cells.push(row(&|c| Some(c.die_area_mm2)));
            cells.push(row(&|c| Some(c.peak_tops)));
            cells.push(row(&|c| Some(c.memory_capacity_mb)));
            cells.push(row(&|c| Some(c.power_w)));
            cells.push(row(&|c| c.memory_bandwidth_tb_s));
            notes.push(
                "Sunrise capacity is 4.5 Gb = 562.5 MB; the published 560 is rounded.".into(),
            );
        }
        TableId::T3 => {
            for r in &table.rows {
                let m = normalize_per_area(inputs.chips.get(chip_name(&r.label))?)?;
                cells.push(area_cells(&m, [2.0; 4]).into());
            }
            notes.push(
                "Bandwidth per area is in GB/s/mm2. The published unit label reads MB/s/mm2, which cannot hold for 1.8 TB/s over 110 mm2."
                    .into(),
            );
            notes.push(
                "Reproduced means within 2% or equal at the published number of decimals.".into(),
            );
        }
        TableId::T4 => {
            for r in &table.rows {
                let chip = inputs.chips.get(chip_name(&r.label))?;
                let cost = die_cost(chip, &inputs.cost)?.total_usd;
                cells.push(vec![
                    value(nre(chip.cmos_node_nm, &inputs.cost)?, EXACT),
                    value(cost, 20.0),
                    value(cost_per_tops(cost, chip.peak_tops)?, 3.0),
                ]);
            }
            notes.push(format!("Cost basis: {}", inputs.cost.note));
            notes.push(
                "Sunrise die cost pays for a logic wafer and a bonded DRAM wafer, divided by the bonding yield."
                    .into(),
            );
            notes.push(
                "Published cost per TOPS for Chips A and B equals die cost over roughly twice the peak TOPS; computed values use the listed peak."
                    .into(),
            );
        }
        TableId::T5 => {
            for r in &table.rows {
                let (from, to) = transition_nodes(&r.label).ok_or_else(|| {
                    Error::validation(format!("T5 row '{}'", r.label), "expected 'X nm vs. Y nm'")
                })?;
                let t = inputs
                    .scaling
                    .cmos_transitions
                    .iter()
                    .find(|t| t.from_nm == from && t.to_nm == to);
                cells.push(match t {
                    Some(t) => vec![
                        value(t.density_ratio, EXACT),
                        value(t.perf_improvement * 100.0, EXACT),
                        value(t.power_reduction * 100.0, EXACT),
                    ],
                    None => (0..3)
                        .map(|_| Cell::Unknown(format!("no {from} -> {to} nm transition loaded")))
                        .collect(),
                });
            }
        }
        TableId::T6 => {
            let row = table
                .columns
                .iter()
                .map(|c| {
                    let node = DramNode::parse(c)?;
                    Ok(match inputs.scaling.dram(node) {
                        Some(d) => value(d.density_gb_per_mm2, EXACT),
                        None => Cell::Unknown(format!("no {c} DRAM process loaded")),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(row);
        }
        TableId::T7 => {
            let s = &inputs.scaling;
            let target = s.dram(DramNode::OneY);
            for r in &table.rows {
                let name = chip_name(&r.label);
                let chip = inputs.chips.get(name)?;
                let p = project_chip(chip, 7, target, &s.power_policy, s)?;
                let tol = if name.eq_ignore_ascii_case("sunrise") {
                    [15.0, 1.0, 1.0, 2.0]
                } else {
                    [2.0; 4]
                };
                cells.push(area_cells(&p.metrics, tol).into());
            }
            notes.push(format!(
                "Performance scaling (density x speed) is used while projected power density stays at or below {} W/mm2; otherwise iso-frequency power reduction (density only, power residual applied).",
                s.power_policy.power_density_cap_w_per_mm2
            ));
            notes.push(
                "DRAM-based capacity scales by the DRAM density ratio (3x to 1y: 5.925); SRAM capacity and all bandwidth scale by CMOS density."
                    .into(),
            );
            notes.push(
                "Sunrise energy efficiency and the Chip A and B rows do not follow from the listed scaling factors under one consistent chain; deviations are reported, not forced."
                    .into(),
            );
        }
    }
    Ok((cells, notes))
}

/// Reconciles one table against the bundled data.
pub fn reconcile(id: TableId) -> Result<Reconciliation> {
    reconcile_with(id, &Inputs::bundled()?)
}

pub fn reconcile_with(id: TableId, inputs: &Inputs) -> Result<Reconciliation> {
    let table = inputs.published.get(id)?;
    let (computed, notes) = compute_cells(table, inputs)?;
    let mut cells = Vec::new();
    for (row, values) in table.rows.iter().zip(computed) {
        for ((column, published), cell) in table.columns.iter().zip(&row.cells).zip(values) {
            cells.push(judge(&row.label, column, published, cell));
        }
    }
    Ok(Reconciliation {
        table_id: id,
        title: table.title.clone(),
        columns: table.columns.clone(),
        rows: table.rows.iter().map(|r| r.label.clone()).collect(),
        cells,
        notes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "md" | "markdown" => Ok(Format::Markdown),
            _ => Err(Error::Unknown {
                kind: "format (csv, json, md)",
                name: s.to_string(),
            }),
        }
    }
}

pub fn emit(recon: &Reconciliation, format: Format) -> String {
    emit_all(std::slice::from_ref(recon), format)
}

/// Several reconciliations in one document: CSV rows share one header,
/// JSON is an array, Markdown sections follow each other.
pub fn emit_all(recons: &[Reconciliation], format: Format) -> String {
    match format {
        Format::Csv => emit_csv(recons),
        Format::Json => {
            let mut s = if recons.len() == 1 {
                serde_json::to_string_pretty(&recons[0])
            } else {
                serde_json::to_string_pretty(recons)
            }
            .expect("reconciliation serializes");
            s.push('\n');
            s
        }
        Format::Markdown => recons
            .iter()
            .map(emit_markdown)
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig3).unwrap_or_default()
}

fn status_str(s: CellStatus) -> &'static str {
    match s {
        CellStatus::Reproduced => "reproduced",
        CellStatus::Deviates => "deviates",
        CellStatus::NoData => "no_data",
        CellStatus::NotApplicable => "not_applicable",
    }
}

fn emit_csv(recons: &[Reconciliation]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "table",
        "row",
        "column",
        "computed",
        "published",
        "deviation_percent",
        "tolerance_percent",
        "status",
        "reason",
    ])
    .expect("in-memory csv");
    for r in recons {
        for c in &r.cells {
            w.write_record([
                r.table_id.as_str(),
                &c.row,
                &c.column,
                &opt(c.computed),
                &c.published,
                &opt(c.deviation_percent),
                &opt(c.tolerance_percent),
                status_str(c.status),
                c.reason.as_deref().unwrap_or(""),
            ])
            .expect("in-memory csv");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn markdown_cell(c: &CellRecon) -> String {
    match c.status {
        CellStatus::NotApplicable if c.computed.is_none() => format!("{} (input)", c.published),
        CellStatus::NoData if c.computed.is_none() => NO_DATA.to_string(),
        CellStatus::NoData => format!("{} vs {NO_DATA}", opt(c.computed)),
        _ => {
            let dev = c
                .deviation_percent
                .map(|d| format!(" ({}%)", sig3(d)))
                .unwrap_or_default();
            let flag = if c.status == CellStatus::Deviates {
                " *"
            } else {
                ""
            };
            format!("{} vs {}{dev}{flag}", opt(c.computed), c.published)
        }
    }
}

fn emit_markdown(r: &Reconciliation) -> String {
    let mut grid: Vec<Vec<String>> = Vec::with_capacity(r.rows.len() + 1);
    let mut header = vec![String::new()];
    header.extend(r.columns.iter().cloned());
    grid.push(header);
    for (i, label) in r.rows.iter().enumerate() {
        let mut line = vec![label.clone()];
        line.extend((0..r.columns.len()).map(|j| markdown_cell(r.cell(i, j))));
        grid.push(line);
    }
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|j| {
            grid.iter()
                .map(|row| row[j].chars().count())
                .max()
                .unwrap_or(0)
                .max(3)
        })
        .collect();
    let render = |row: &[String]| -> String {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        format!("| {} |\n", cells.join(" | "))
    };

    let mut out = String::new();
    let _ = writeln!(out, "### {}: {}\n", r.table_id.as_str(), r.title);
    out.push_str(&render(&grid[0]));
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "| {} |", rule.join(" | "));
    for row in &grid[1..] {
        out.push_str(&render(row));
    }
    out.push_str("\nCells read `computed vs published (deviation)`; `*` marks a deviation beyond tolerance.\n");
    if !r.notes.is_empty() {
        out.push_str("\nNotes:\n\n");
        for n in &r.notes {
            let _ = writeln!(out, "- {n}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<Reconciliation> {
        TableId::ALL
            .iter()
            .map(|&id| reconcile(id).unwrap())
            .collect()
    }

    #[test]
    fn table_ids() {
        assert_eq!(TableId::parse("t3").unwrap(), TableId::T3);
        assert_eq!(TableId::parse("7").unwrap(), TableId::T7);
        assert!(TableId::parse("T8").is_err());
        assert!(TableId::parse("x").is_err());
    }

    #[test]
    fn rounding_rule() {
        assert!(rounds_to(0.1763, "0.18"));
        assert!(rounds_to(11815.0, "1.2e4"));
        assert!(rounds_to(15e6, "15e6"));
        assert!(!rounds_to(562.5, "560"));
        assert!(!rounds_to(0.44, "0.43"));
    }

    #[test]
    fn shapes_and_no_data_cells() {
        let p = presets::published_tables().unwrap();
        assert_eq!(p.get(TableId::T2).unwrap().rows[5].cells[2], NO_DATA);
        let t2 = reconcile(TableId::T2).unwrap();
        assert_eq!(
            t2.find("Memory bandwidth (TB/s)", "Chip B").unwrap().status,
            CellStatus::NoData
        );
        assert_eq!(t2.cells.len(), 24);
    }

    #[test]
    fn t3_reproduces() {
        let r = reconcile(TableId::T3).unwrap();
        let reproduced = r
            .cells
            .iter()
            .filter(|c| c.status == CellStatus::Reproduced)
            .count();
        assert_eq!(reproduced, 15);
        assert_eq!(r.cell(2, 1).status, CellStatus::NoData);
    }

    #[test]
    fn t7_flags_rather_than_fails() {
        let r = reconcile(TableId::T7).unwrap();
        let a = r.find("Chip A", "Peak performance (TOPS/mm2)").unwrap();
        assert_eq!(a.status, CellStatus::Deviates);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn every_cell_is_accounted_for() {
        for r in all() {
            assert_eq!(r.cells.len(), r.rows.len() * r.columns.len());
            for c in &r.cells {
                match c.status {
                    CellStatus::Reproduced | CellStatus::Deviates => {
                        assert!(c.computed.is_some(), "{:?}", c);
                        assert!(c.deviation_percent.is_some() || c.published.trim() == "0");
                    }
                    CellStatus::NoData | CellStatus::NotApplicable => {
                        assert!(c.reason.is_some(), "{:?}", c)
                    }
                }
            }
        }
    }

    #[test]
    fn deviation_definition() {
        for r in all() {
            for c in &r.cells {
                if let (Some(x), Some(d), Some(p)) = (
                    c.computed,
                    c.deviation_percent,
                    parse_published(&c.published),
                ) {
                    assert!((d - (x - p).abs() / p.abs() * 100.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn emitters_are_deterministic() {
        let a = reconcile(TableId::T4).unwrap();
        let b = reconcile(TableId::T4).unwrap();
        for f in [Format::Csv, Format::Json, Format::Markdown] {
            assert_eq!(emit(&a, f), emit(&b, f));
        }
    }

    #[test]
    fn json_round_trip() {
        for r in all() {
            let text = emit(&r, Format::Json);
            let back: Reconciliation = serde_json::from_str(&text).unwrap();
            assert_eq!(emit(&back, Format::Json), text);
        }
    }

    #[test]
    fn markdown_layout_and_notes() {
        let mut r = reconcile(TableId::T3).unwrap();
        let md = emit(&r, Format::Markdown);
        let header = md.lines().find(|l| l.starts_with('|')).unwrap();
        assert!(header.contains("Peak performance") && header.contains("Energy efficiency"));
        assert!(md.contains("| Sunrise (40nm)"));
        assert!(md.contains("Notes:"));
        let widths: Vec<usize> = md
            .lines()
            .filter(|l| l.starts_with('|'))
            .map(|l| l.chars().count())
            .collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]));
        r.notes.clear();
        assert!(!emit(&r, Format::Markdown).contains("Notes"));
    }

    #[test]
    fn csv_has_one_line_per_cell() {
        let r = reconcile(TableId::T1).unwrap();
        assert_eq!(emit(&r, Format::Csv).lines().count(), 1 + 9);
    }
}
