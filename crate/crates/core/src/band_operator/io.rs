//! Operator dumps: a JSON header plus a CSV of nonzero entries with
//! columns `x_index,y_index,re,im`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BandOperator, Domain, DomainSpec, Kernel};
use crate::error::{Error, Result};
use crate::group_metric::GroupSpec;
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpHeader {
    pub group: GroupSpec,
    pub domain: DomainSpec,
    pub propagation: u32,
    pub seed: Option<u64>,
    /// Path of the entries CSV, relative to the header.
    pub entries_file: String,
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`; returns the header path.
pub fn write_dump(op: &BandOperator, group: &GroupSpec, seed: Option<u64>, dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let entries_file = format!("{stem}.csv");
    let mut w = csv::Writer::from_path(dir.join(&entries_file))?;
    w.write_record(["x_index", "y_index", "re", "im"])?;
    let mut rows = Vec::new();
    op.for_each_entry(|i, j, v| rows.push((i, j, v)));
    for (i, j, v) in rows {
        w.write_record([i.to_string(), j.to_string(), v.re.to_string(), v.im.to_string()])?;
    }
    w.flush()?;
    let header = DumpHeader {
        group: group.clone(),
        domain: op.domain().spec(),
        propagation: op.propagation(),
        seed,
        entries_file,
    };
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&header)? + "\n")?;
    Ok(path)
}

/// Reads a dump, building its group and domain.
pub fn read_dump(header_path: &Path) -> Result<(BandOperator, DumpHeader)> {
    let header: DumpHeader = serde_json::from_str(&fs::read_to_string(header_path)?)?;
    let group = Arc::new(header.group.build()?);
    let domain = Domain::new(group, header.domain)?;
    let op = read_entries(domain, &header, header_path)?;
    Ok((op, header))
}

/// Reads a dump onto an existing domain, which must match the header.
pub fn read_dump_on(domain: Arc<Domain>, header_path: &Path) -> Result<BandOperator> {
    let header: DumpHeader = serde_json::from_str(&fs::read_to_string(header_path)?)?;
    if header.domain != domain.spec() || header.group.group_kind()? != domain.group().kind() {
        return Err(Error::DomainMismatch);
    }
    read_entries(domain, &header, header_path)
}

fn read_entries(domain: Arc<Domain>, header: &DumpHeader, header_path: &Path) -> Result<BandOperator> {
    let base = header_path.parent().unwrap_or(Path::new("."));
    let mut r = csv::Reader::from_path(base.join(&header.entries_file))?;
    let mut entries = Vec::new();
    for rec in r.deserialize() {
        let (i, j, re, im): (usize, usize, f64, f64) = rec?;
        entries.push((i, j, C64::new(re, im)));
    }
    BandOperator::from_entries(domain, header.propagation, entries)
}
