//! Boundary-data specification files.
//!
//! A flat `key=value` text with exactly the keys `f_minus`, `f_plus`, `g1` and
//! `g2`. A value is either an expression in `x` and `y` or `csv:<path>` naming
//! a node table; relative paths are resolved against the specification's
//! directory. Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::boundary_data::csv::field_from_csv;
use crate::boundary_data::expr::field_from_expr;
use crate::boundary_data::BoundaryData;
use crate::error::{MhsError, Result};
use crate::spectral_core::{ScalarField2, TorusGrid2};

/// Keys of a data specification, in file order.
pub const KEYS: [&str; 4] = ["f_minus", "f_plus", "g1", "g2"];

/// Parsed specification: one source per key.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub sources: BTreeMap<String, String>,
    pub base_dir: PathBuf,
}

impl DataSpec {
    /// Parses the text of a specification.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut sources = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| MhsError::Parse(format!("data line {}: expected key=value", no + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(MhsError::Parse(format!("data line {}: unknown key {key:?}", no + 1)));
            }
            if sources.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(MhsError::Parse(format!("data line {}: duplicate key {key:?}", no + 1)));
            }
        }
        if let Some(missing) = KEYS.iter().find(|k| !sources.contains_key(**k)) {
            return Err(MhsError::Parse(format!("data specification lacks {missing}")));
        }
        Ok(Self {
            sources,
            base_dir: base_dir.to_path_buf(),
        })
    }

    /// Reads a specification file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &dir)
    }

    fn field(&self, key: &str, grid: TorusGrid2) -> Result<ScalarField2> {
        let src = &self.sources[key];
        let field = match src.strip_prefix("csv:") {
            Some(p) => {
                let path = self.base_dir.join(p.trim());
                let f = field_from_csv(&path)?;
                if f.grid != grid {
                    return Err(MhsError::GridMismatch(format!(
                        "{key}: table {} is {}x{}, configured grid is {}x{}",
                        path.display(),
                        f.grid.n_x,
                        f.grid.n_y,
                        grid.n_x,
                        grid.n_y
                    )));
                }
                f
            }
            None => field_from_expr(src, grid)?,
        };
        Ok(field)
    }

    /// Samples all four fields on `grid`.
    pub fn build(&self, grid: TorusGrid2) -> Result<BoundaryData> {
        BoundaryData::new(
            self.field("f_minus", grid)?,
            self.field("f_plus", grid)?,
            self.field("g1", grid)?,
            self.field("g2", grid)?,
        )
    }
}
