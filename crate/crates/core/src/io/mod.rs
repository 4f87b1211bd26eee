//! File formats, serialized records, SVG rendering and the timing harness
//! behind the command-line tool.

pub mod csv;
pub mod rdsb;
pub mod record;
pub mod svg;
pub mod timing;

use std::fs;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel::Dataset;

pub use record::{BoundRecord, DatasetFingerprint, KernelRecord, SelectionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Rdsb,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "rdsb" => Ok(Format::Rdsb),
            other => Err(Error::invalid(format!("unknown format '{other}' (expected csv or rdsb)"))),
        }
    }
}

impl Format {
    /// `.rdsb` files are binary; everything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("rdsb") => Format::Rdsb,
            _ => Format::Csv,
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: Option<Format>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format.unwrap_or_else(|| Format::from_path(path)) {
        Format::Csv => csv::parse(&bytes),
        Format::Rdsb => rdsb::decode(&bytes),
    }
}

pub fn save_dataset(path: impl AsRef<Path>, dataset: &Dataset, format: Option<Format>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format.unwrap_or_else(|| Format::from_path(path)) {
        Format::Csv => csv::write(dataset).into_bytes(),
        Format::Rdsb => rdsb::encode(dataset),
    };
    write_atomic(path, &bytes)
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("output path '{}' has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// SHA-256 over the label-free binary encoding of the feature matrix.
pub fn content_hash(dataset: &Dataset) -> String {
    let mut h = Sha256::new();
    h.update(rdsb::MAGIC);
    h.update([rdsb::VERSION]);
    h.update((dataset.n() as u32).to_le_bytes());
    h.update((dataset.d() as u32).to_le_bytes());
    for v in dataset.features() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}
