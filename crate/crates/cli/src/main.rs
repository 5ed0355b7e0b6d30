// SPDX-License-Identifier: Apache-2.0

//! `sunrise`: reference tables, simulation, projection, cost and sweeps.
//!
//! Exit status: 0 on success, 1 on invalid input or usage, 2 on I/O
//! failure.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sunrise_core::archsim::{
    run_sweep, simulate_model, validate_config, ArchConfig, Severity, SweepAxis,
};
use sunrise_core::econ::{die_cost, CostBasisFile};
use sunrise_core::format::sig3;
use sunrise_core::interconnect::{
    aggregate_bandwidth, wire_count, wire_density, ConnectionBudget, TechFile,
};
use sunrise_core::presets;
use sunrise_core::report::{self, emit_all, reconcile_with, Inputs, TableId};
use sunrise_core::techscale::{project_chip, ChipDb, DramNode, ScalingTables};
use sunrise_core::workload::{load_model, ModelSpec};

#[derive(Parser)]
#[command(
    name = "sunrise",
    version,
    about = "Near-memory accelerator modeling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconcile computed values against the reference tables T1..T7.
    Tables(TablesArgs),
    /// Simulate a model on an architecture.
    Simulate(SimulateArgs),
    /// Project chips to another CMOS / DRAM process.
    Project(ProjectArgs),
    /// Die cost, cost per TOPS and NRE.
    Cost(CostArgs),
    /// Simulate over a grid of architecture parameters.
    Sweep(SweepArgs),
    /// Wire density, bandwidth and energy of die-to-die data paths.
    Interconnect(InterconnectArgs),
    /// Check a config or data file and list diagnostics.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
    #[value(alias = "markdown")]
    Md,
}

impl From<TableFormat> for report::Format {
    fn from(f: TableFormat) -> Self {
        match f {
            TableFormat::Csv => report::Format::Csv,
            TableFormat::Json => report::Format::Json,
            TableFormat::Md => report::Format::Markdown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Csv,
    Json,
}

/// Replacement data files; bundled data is used for anything not given.
#[derive(Args)]
struct DataArgs {
    /// Extra chips appended to the bundled chip table.
    #[arg(long, value_name = "FILE")]
    chips: Option<String>,
    /// Node scaling tables.
    #[arg(long, value_name = "FILE")]
    scaling: Option<String>,
    /// Wafer cost basis.
    #[arg(long, value_name = "FILE")]
    cost_basis: Option<String>,
    /// Interconnect technology file.
    #[arg(long, value_name = "FILE")]
    tech_file: Option<String>,
}

impl DataArgs {
    fn chips(&self) -> Result<ChipDb> {
        let mut db = presets::chips()?;
        if let Some(p) = &self.chips {
            db.extend_from_file(&presets::resolve(p))?;
        }
        Ok(db)
    }

    fn scaling(&self) -> Result<ScalingTables> {
        Ok(match &self.scaling {
            Some(p) => presets::scaling_from(p)?,
            None => presets::scaling()?,
        })
    }

    fn cost(&self) -> Result<CostBasisFile> {
        Ok(match &self.cost_basis {
            Some(p) => presets::cost_basis_from(p)?,
            None => presets::cost_basis()?,
        })
    }

    fn techs(&self) -> Result<TechFile> {
        Ok(match &self.tech_file {
            Some(p) => presets::technologies_from(p)?,
            None => presets::technologies()?,
        })
    }

    fn inputs(&self) -> Result<Inputs> {
        Ok(Inputs {
            chips: self.chips()?,
            techs: self.techs()?,
            scaling: self.scaling()?,
            cost: self.cost()?,
            published: presets::published_tables()?,
        })
    }
}

#[derive(Args)]
struct TablesArgs {
    /// Table id (T1..T7); all tables when omitted.
    #[arg(long)]
    id: Option<String>,
    #[arg(long, value_enum, default_value = "md")]
    format: TableFormat,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Bundled model name (resnet50) or model JSON file.
    #[arg(long, default_value = "resnet50")]
    model: String,
    /// Bundled architecture name (sunrise-40nm) or config JSON file.
    #[arg(long, default_value = "sunrise-40nm")]
    arch: String,
    #[arg(long, default_value_t = 1)]
    batch: u64,
    /// Fold host ingress into the first layer.
    #[arg(long)]
    include_ingress: bool,
    /// `csv`: summary line then one row per layer. `json`: full result.
    #[arg(long, value_enum, default_value = "csv")]
    format: DataFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Chip name, or `all`.
    #[arg(long, default_value = "all")]
    chip: String,
    /// Target CMOS node, e.g. `7nm` or `7`.
    #[arg(long, default_value = "7nm")]
    to: String,
    /// Target DRAM process for DRAM-based chips.
    #[arg(long, default_value = "1y")]
    dram: String,
    /// Power-density cap (W/mm2) for the performance policy; overrides the scaling file.
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: DataFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct CostArgs {
    /// Chip name, or `all` for the full reconciliation.
    #[arg(long, default_value = "all")]
    chip: String,
    #[arg(long, value_enum, default_value = "md")]
    format: TableFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "sunrise-40nm")]
    arch: String,
    #[arg(long, default_value = "resnet50")]
    model: String,
    /// `FIELD=v1,v2,...` or `FIELD=start:stop:step`; repeat for a grid.
    /// Nested fields use dots, e.g. `vpu_pool.array_count=1000,2000`.
    #[arg(long, required = true)]
    vary: Vec<String>,
    #[arg(long, default_value_t = 1)]
    batch: u64,
    /// Rescale macs_per_vpu so the MAC total stays fixed at every point.
    #[arg(long)]
    fixed_total_macs: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InterconnectArgs {
    /// Technology name, or `all`.
    #[arg(long, default_value = "all")]
    tech: String,
    #[arg(long, default_value_t = 100.0)]
    die_area: f64,
    /// Fraction of the die given to connections.
    #[arg(long, default_value_t = 0.01)]
    fraction: f64,
    /// I/O frequency in GHz.
    #[arg(long, default_value_t = 1.0)]
    freq: f64,
    #[arg(long, default_value_t = 1)]
    bits_per_wire: u32,
    /// Usable edge (mm) for edge technologies.
    #[arg(long)]
    edge_mm: Option<f64>,
    #[arg(long, value_name = "FILE")]
    tech_file: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileKind {
    Arch,
    Model,
    Chips,
    Scaling,
    Cost,
    Tech,
}

#[derive(Args)]
struct ValidateArgs {
    /// File path or bundled name.
    path: String,
    #[arg(long, value_enum, default_value = "arch")]
    kind: FileKind,
}

/// Validation findings that should exit 1 after printing.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn write_out(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing stdout")
        }
    }
}

fn node_nm(s: &str) -> Result<u32> {
    s.trim()
        .trim_end_matches("nm")
        .trim()
        .parse()
        .map_err(|_| Invalid(format!("--to: expected a node such as 7nm, got '{s}'")).into())
}

fn tables(a: TablesArgs) -> Result<()> {
    let inputs = a.data.inputs()?;
    let ids = match &a.id {
        Some(id) => vec![TableId::parse(id)?],
        None => TableId::ALL.to_vec(),
    };
    let recons = ids
        .iter()
        .map(|&id| reconcile_with(id, &inputs))
        .collect::<sunrise_core::Result<Vec<_>>>()?;
    write_out(&a.output, &emit_all(&recons, a.format.into()))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let model: ModelSpec = load_model(&a.model)?;
    let mut arch: ArchConfig = presets::arch(&a.arch)?;
    if a.include_ingress {
        arch.include_ingress = true;
    }
    let r = simulate_model(&model, &arch, a.batch)?;
    let text = match a.format {
        DataFormat::Json => r.to_json() + "\n",
        DataFormat::Csv => format!("# {}\n{}", r.summary_line(), r.to_csv()),
    };
    write_out(&a.output, &text)
}

fn project(a: ProjectArgs) -> Result<()> {
    let db = a.data.chips()?;
    let tables = a.data.scaling()?;
    let target = node_nm(&a.to)?;
    let dram = tables.dram(DramNode::parse(&a.dram)?).cloned();
    let mut policy = tables.power_policy;
    if let Some(cap) = a.cap {
        if cap.is_nan() || cap <= 0.0 {
            return Err(Invalid(format!("--cap must be positive, got {cap}")).into());
        }
        policy.power_density_cap_w_per_mm2 = cap;
    }
    let chips = if a.chip.eq_ignore_ascii_case("all") {
        db.chips.iter().collect::<Vec<_>>()
    } else {
        vec![db.get(&a.chip)?]
    };
    let projections = chips
        .into_iter()
        .map(|c| project_chip(c, target, dram.as_ref(), &policy, &tables))
        .collect::<sunrise_core::Result<Vec<_>>>()?;
    let text = match a.format {
        DataFormat::Json => serde_json::to_string_pretty(&projections)? + "\n",
        DataFormat::Csv => {
            let mut s = String::from(
                "chip,from_nm,to_nm,policy,power_density_w_per_mm2,perf_tops_per_mm2,bandwidth_gb_s_per_mm2,capacity_mb_per_mm2,efficiency_tops_per_w\n",
            );
            for p in &projections {
                let m = &p.metrics;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    p.chip,
                    p.from_nm,
                    p.to_nm,
                    serde_json::to_value(p.policy)?.as_str().unwrap_or_default(),
                    sig3(p.power_density),
                    sig3(m.perf_per_area),
                    m.bandwidth_per_area
                        .map(sig3)
                        .unwrap_or_else(|| report::NO_DATA.into()),
                    sig3(m.capacity_per_area),
                    sig3(m.energy_efficiency)
                );
            }
            s
        }
    };
    write_out(&a.output, &text)
}

fn cost(a: CostArgs) -> Result<()> {
    if a.chip.eq_ignore_ascii_case("all") {
        let r = reconcile_with(TableId::T4, &a.data.inputs()?)?;
        return write_out(&a.output, &report::emit(&r, a.format.into()));
    }
    let db = a.data.chips()?;
    let basis = a.data.cost()?;
    let chip = db.get(&a.chip)?;
    let c = die_cost(chip, &basis)?;
    let nre = sunrise_core::econ::nre(chip.cmos_node_nm, &basis)?;
    let cpt = sunrise_core::econ::cost_per_tops(c.total_usd, chip.peak_tops)?;
    let text = match a.format {
        TableFormat::Json => {
            let v = serde_json::json!({
                "chip": chip.name,
                "nre_usd": nre,
                "die_cost": c,
                "cost_per_tops_usd": cpt,
            });
            serde_json::to_string_pretty(&v)? + "\n"
        }
        TableFormat::Csv => format!(
            "chip,nre_usd,logic_usd,dram_usd,die_cost_usd,cost_per_tops_usd\n{},{},{},{},{},{}\n",
            chip.name,
            sig3(nre),
            sig3(c.logic_usd),
            c.dram_usd.map(sig3).unwrap_or_default(),
            sig3(c.total_usd),
            sig3(cpt)
        ),
        TableFormat::Md => {
            let mut s = format!("### Cost: {}\n\n| item | USD |\n| --- | --- |\n", chip.name);
            let _ = writeln!(s, "| NRE | {} |", sig3(nre));
            let _ = writeln!(s, "| logic wafer share | {} |", sig3(c.logic_usd));
            if let Some(d) = c.dram_usd {
                let _ = writeln!(s, "| DRAM wafer share | {} |", sig3(d));
            }
            let _ = writeln!(s, "| die cost | {} |", sig3(c.total_usd));
            let _ = writeln!(s, "| cost per TOPS | {} |", sig3(cpt));
            s
        }
    };
    write_out(&a.output, &text)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let arch = presets::arch(&a.arch)?;
    let model = load_model(&a.model)?;
    let axes = a
        .vary
        .iter()
        .map(|v| SweepAxis::parse(v))
        .collect::<sunrise_core::Result<Vec<_>>>()?;
    let rows = run_sweep(&arch, &model, a.batch, &axes, a.fixed_total_macs)?;
    write_out(&a.output, &sunrise_core::archsim::sweep_csv(&rows))
}

fn interconnect(a: InterconnectArgs) -> Result<()> {
    let techs = match &a.tech_file {
        Some(p) => presets::technologies_from(p)?,
        None => presets::technologies()?,
    };
    let budget = ConnectionBudget {
        die_area_mm2: a.die_area,
        connection_area_fraction: a.fraction,
        io_frequency_ghz: a.freq,
        bits_per_wire_per_cycle: a.bits_per_wire,
        edge_length_mm: a.edge_mm,
    };
    budget.validate()?;
    let selected: Vec<_> = if a.tech.eq_ignore_ascii_case("all") {
        techs.technologies.iter().collect()
    } else {
        vec![techs
            .by_name(&a.tech)
            .ok_or_else(|| sunrise_core::Error::Unknown {
                kind: "technology",
                name: a.tech.clone(),
            })?]
    };
    let mut s = String::from("technology,layout,density,wires,bandwidth_tb_s,energy_pj_per_bit\n");
    for t in selected {
        let layout = serde_json::to_value(t.dimensionality)?;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            t.name,
            layout.as_str().unwrap_or_default(),
            sig3(wire_density(t)?),
            sig3(wire_count(t, &budget)?),
            sig3(aggregate_bandwidth(t, &budget)?.terabytes_per_second()),
            t.energy_pj_per_bit
        );
    }
    write_out(&a.output, &s)
}

fn validate(a: ValidateArgs) -> Result<()> {
    let mut out = String::new();
    match a.kind {
        FileKind::Arch => {
            let arch = presets::arch(&a.path)?;
            let diags = validate_config(&arch);
            for d in &diags {
                let _ = writeln!(out, "{d}");
            }
            let errors = diags
                .iter()
                .filter(|d| d.severity == Severity::Error)
                .count();
            let _ = writeln!(
                out,
                "{}: {} error(s), {} warning(s)",
                a.path,
                errors,
                diags.len() - errors
            );
            write_out(&None, &out)?;
            if errors > 0 {
                bail!(Invalid(format!("{}: {errors} error(s)", a.path)));
            }
            return Ok(());
        }
        FileKind::Model => {
            load_model(&a.path)?;
        }
        FileKind::Chips => {
            let (text, p) = presets::read(&a.path)?;
            ChipDb::from_json(&text, &p.display().to_string())?;
        }
        FileKind::Scaling => {
            presets::scaling_from(&a.path)?;
        }
        FileKind::Cost => {
            presets::cost_basis_from(&a.path)?;
        }
        FileKind::Tech => {
            presets::technologies_from(&a.path)?;
        }
    }
    write_out(&None, &format!("{}: 0 error(s), 0 warning(s)\n", a.path))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<sunrise_core::Error>() {
            return if core.is_io() { 2 } else { 1 };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Tables(a) => tables(a),
        Command::Simulate(a) => simulate(a),
        Command::Project(a) => project(a),
        Command::Cost(a) => cost(a),
        Command::Sweep(a) => sweep(a),
        Command::Interconnect(a) => interconnect(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
