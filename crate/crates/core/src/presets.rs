// SPDX-License-Identifier: Apache-2.0

//! Bundled data files and file lookup.
//!
//! Every default the tools rely on lives in `data/*.json` and is compiled
//! in. Relative paths that do not exist in the working directory are
//! looked up in the directories listed in `SUNRISE_CONFIG_PATH`
//! (`:`-separated on Unix), with and without a `.json` suffix.

use std::path::{Path, PathBuf};

use crate::archsim::ArchConfig;
use crate::econ::CostBasisFile;
use crate::error::{Error, Result};
use crate::interconnect::TechFile;
use crate::report::PublishedTables;
use crate::techscale::{ChipDb, ScalingTables};
use crate::workload::ModelSpec;

pub const CONFIG_PATH_ENV: &str = "SUNRISE_CONFIG_PATH";

pub const SUNRISE_40NM: &str = include_str!("../data/sunrise-40nm.json");
pub const RESNET50: &str = include_str!("../data/resnet50.json");
pub const INTERCONNECT: &str = include_str!("../data/interconnect.json");
pub const CHIPS: &str = include_str!("../data/chips.json");
pub const SCALING: &str = include_str!("../data/scaling.json");
pub const COST_BASIS: &str = include_str!("../data/cost_basis.json");
pub const PUBLISHED_TABLES: &str = include_str!("../data/published_tables.json");

pub const ARCH_NAMES: &[&str] = &["sunrise-40nm"];
pub const MODEL_NAMES: &[&str] = &["resnet50"];

/// Finds `path` directly or under the config search path. Returns the
/// path unchanged when nothing matches, so the caller's I/O error names
/// what the user typed.
pub fn resolve(path: &str) -> PathBuf {
    let direct = PathBuf::from(path);
    if direct.exists() || direct.is_absolute() {
        return direct;
    }
    if let Some(dirs) = std::env::var_os(CONFIG_PATH_ENV) {
        for dir in std::env::split_paths(&dirs) {
            for candidate in [dir.join(path), dir.join(format!("{path}.json"))] {
                if candidate.is_file() {
                    return candidate;
                }
            }
        }
    }
    direct
}

/// Reads a file found through [`resolve`].
pub fn read(path: &str) -> Result<(String, PathBuf)> {
    let p = resolve(path);
    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    Ok((text, p))
}

fn context(p: &Path) -> String {
    p.display().to_string()
}

/// A bundled architecture by name, or a config file.
pub fn arch(name_or_path: &str) -> Result<ArchConfig> {
    if name_or_path == "sunrise-40nm" {
        return ArchConfig::from_json(SUNRISE_40NM, "bundled sunrise-40nm");
    }
    let (text, p) = read(name_or_path)?;
    ArchConfig::from_json(&text, &context(&p))
}

pub fn bundled_model(name: &str) -> Option<Result<ModelSpec>> {
    match name.to_ascii_lowercase().as_str() {
        "resnet50" | "resnet-50" => Some(ModelSpec::from_json(RESNET50, "bundled resnet50")),
        _ => None,
    }
}

pub fn technologies() -> Result<TechFile> {
    TechFile::from_json(INTERCONNECT, "bundled interconnect.json")
}

pub fn technologies_from(path: &str) -> Result<TechFile> {
    let (text, p) = read(path)?;
    TechFile::from_json(&text, &context(&p))
}

pub fn chips() -> Result<ChipDb> {
    ChipDb::from_json(CHIPS, "bundled chips.json")
}

pub fn scaling() -> Result<ScalingTables> {
    ScalingTables::from_json(SCALING, "bundled scaling.json")
}

pub fn scaling_from(path: &str) -> Result<ScalingTables> {
    let (text, p) = read(path)?;
    ScalingTables::from_json(&text, &context(&p))
}

pub fn cost_basis() -> Result<CostBasisFile> {
    CostBasisFile::from_json(COST_BASIS, "bundled cost_basis.json")
}

pub fn cost_basis_from(path: &str) -> Result<CostBasisFile> {
    let (text, p) = read(path)?;
    CostBasisFile::from_json(&text, &context(&p))
}

pub fn published_tables() -> Result<PublishedTables> {
    PublishedTables::from_json(PUBLISHED_TABLES, "bundled published_tables.json")
}
