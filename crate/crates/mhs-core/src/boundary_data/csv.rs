//! Boundary fields from CSV node tables.
//!
//! The first record is the header `nx,ny`, the second holds the two sizes,
//! and the remaining fields (any number per record) are the `n_x·n_y` node
//! values in row-major order with `x` fastest.

use std::io::Read;
use std::path::Path;

use crate::error::{MhsError, Result};
use crate::spectral_core::{ScalarField2, TorusGrid2};

/// Parses a node table from a reader.
pub fn field_from_csv_reader(reader: impl Read) -> Result<ScalarField2> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| MhsError::Parse(format!("csv header: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "nx" || &headers[1] != "ny" {
        return Err(MhsError::Parse(format!(
            "csv header must be \"nx,ny\", found {:?}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut numbers = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| MhsError::Parse(format!("csv: {e}")))?;
        for field in rec.iter().filter(|f| !f.is_empty()) {
            let v: f64 = field
                .parse()
                .map_err(|e| MhsError::Parse(format!("csv value {field:?}: {e}")))?;
            numbers.push(v);
        }
    }
    if numbers.len() < 2 {
        return Err(MhsError::Parse("csv is missing the grid sizes".into()));
    }
    let as_size = |v: f64| -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(MhsError::Parse(format!("grid size {v} is not an integer")))
        }
    };
    let grid = TorusGrid2::new(as_size(numbers[0])?, as_size(numbers[1])?)?;
    let values = numbers.split_off(2);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MhsError::Parse("csv contains non-finite values".into()));
    }
    ScalarField2::from_values(grid, values)
        .map_err(|e| MhsError::Parse(format!("csv value count: {e}")))
}

/// Reads a node table from a file.
pub fn field_from_csv(path: &Path) -> Result<ScalarField2> {
    let file = std::fs::File::open(path)?;
    field_from_csv_reader(file)
}

/// Writes a field in the node-table format.
pub fn field_to_csv(field: &ScalarField2) -> String {
    let mut out = format!("nx,ny\n{},{}\n", field.grid.n_x, field.grid.n_y);
    for row in field.values.chunks(field.grid.n_x) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
