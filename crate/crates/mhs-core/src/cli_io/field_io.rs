//! Binary field files.
//!
//! A file is a 64-byte little-endian header followed by the node values of
//! every component as little-endian `f64`, component after component, each in
//! row-major order (layer, then `y`, then `x` fastest).
//!
//! | bytes  | content                                   |
//! |--------|-------------------------------------------|
//! | 0..4   | magic `MHSF`                              |
//! | 4..8   | format version (`u32`)                    |
//! | 8..16  | `n_x` (`u64`)                             |
//! | 16..24 | `n_y` (`u64`)                             |
//! | 24..32 | `n_z` (`u64`), 0 for a surface field      |
//! | 32..40 | `L` (`f64`), 0 for a surface field        |
//! | 40..48 | number of components (`u64`)              |
//! | 48..64 | reserved, zero                            |

use std::io::{Read, Write};
use std::path::Path;

use crate::current_equation::CurrentBoundary;
use crate::error::{MhsError, Result};
use crate::spectral_core::{ScalarField2, ScalarField3, SlabGrid3, TorusGrid2, VectorField3};

/// File magic.
pub const MAGIC: &[u8; 4] = b"MHSF";
/// Current format version.
pub const VERSION: u32 = 1;
/// Header size in bytes.
pub const HEADER_LEN: usize = 64;

/// Decoded field file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub grid: TorusGrid2,
    /// z-intervals, 0 for a surface field.
    pub n_z: usize,
    pub l: f64,
    pub comps: Vec<Vec<f64>>,
}

impl FieldFile {
    /// Nodes per component.
    pub fn nodes(&self) -> usize {
        let layers = if self.n_z == 0 { 1 } else { self.n_z + 1 };
        self.grid.len() * layers
    }

    /// Serializes header and values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.nodes() * self.comps.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for v in [self.grid.n_x, self.grid.n_y, self.n_z] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.l.to_le_bytes());
        out.extend_from_slice(&(self.comps.len() as u64).to_le_bytes());
        out.resize(HEADER_LEN, 0);
        for c in &self.comps {
            for v in c {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Parses a complete file image.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(MhsError::Format(format!("file of {} bytes has no header", bytes.len())));
        }
        if &bytes[0..4] != MAGIC {
            return Err(MhsError::Format("bad magic, expected MHSF".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != VERSION {
            return Err(MhsError::Format(format!("unsupported version {version}")));
        }
        if bytes[48..HEADER_LEN].iter().any(|&b| b != 0) {
            return Err(MhsError::Format("reserved header bytes are not zero".into()));
        }
        let size = |v: u64, what: &str| -> Result<usize> {
            usize::try_from(v).map_err(|_| MhsError::Format(format!("{what} = {v} is too large")))
        };
        let grid = TorusGrid2::new(size(u64_at(8), "n_x")?, size(u64_at(16), "n_y")?)
            .map_err(|e| MhsError::Format(e.to_string()))?;
        let n_z = size(u64_at(24), "n_z")?;
        let l = f64::from_le_bytes(bytes[32..40].try_into().expect("8 bytes"));
        let n_comp = size(u64_at(40), "component count")?;
        let mut file = Self {
            grid,
            n_z,
            l,
            comps: Vec::new(),
        };
        let nodes = file.nodes();
        let expected = nodes
            .checked_mul(n_comp)
            .and_then(|v| v.checked_mul(8))
            .and_then(|v| v.checked_add(HEADER_LEN))
            .ok_or_else(|| MhsError::Format("header sizes overflow".into()))?;
        if bytes.len() != expected {
            return Err(MhsError::Format(format!(
                "expected {expected} bytes for {n_comp} components of {nodes} nodes, found {}",
                bytes.len()
            )));
        }
        file.comps = bytes[HEADER_LEN..]
            .chunks_exact(8 * nodes.max(1))
            .take(n_comp)
            .map(|chunk| {
                chunk
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                    .collect()
            })
            .collect();
        file.comps.resize(n_comp, Vec::new());
        Ok(file)
    }

    /// Writes the file image to `w`.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    /// Reads a complete file image from `r`.
    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    /// Writes to a path.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Reads from a path.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// File of a volume field.
    pub fn from_volume(v: &VectorField3) -> Self {
        Self {
            grid: v.grid.base,
            n_z: v.grid.n_z,
            l: v.grid.l,
            comps: v.comps.iter().map(|c| c.values.clone()).collect(),
        }
    }

    /// File of surface fields on a common grid.
    pub fn from_surface(fields: &[&ScalarField2]) -> Result<Self> {
        let grid = fields
            .first()
            .map(|f| f.grid)
            .ok_or_else(|| MhsError::Format("no surface fields to write".into()))?;
        if fields.iter().any(|f| f.grid != grid) {
            return Err(MhsError::GridMismatch("surface fields on different grids".into()));
        }
        Ok(Self {
            grid,
            n_z: 0,
            l: 0.0,
            comps: fields.iter().map(|f| f.values.clone()).collect(),
        })
    }

    /// Volume field, checking the grid and component count.
    pub fn into_volume(self, expected_comps: usize) -> Result<VectorField3> {
        if self.n_z == 0 {
            return Err(MhsError::Format("expected a volume field, found a surface field".into()));
        }
        if self.comps.len() != expected_comps {
            return Err(MhsError::Format(format!(
                "expected {expected_comps} components, found {}",
                self.comps.len()
            )));
        }
        let grid = SlabGrid3::new(self.grid, self.n_z, self.l).map_err(|e| MhsError::Format(e.to_string()))?;
        let comps = self
            .comps
            .into_iter()
            .map(|values| ScalarField3::from_values(grid, values))
            .collect::<Result<Vec<_>>>()?;
        VectorField3::from_comps(comps)
    }

    /// Surface fields, checking the component count.
    pub fn into_surface(self, expected_comps: usize) -> Result<Vec<ScalarField2>> {
        if self.n_z != 0 {
            return Err(MhsError::Format("expected a surface field, found a volume field".into()));
        }
        if self.comps.len() != expected_comps {
            return Err(MhsError::Format(format!(
                "expected {expected_comps} components, found {}",
                self.comps.len()
            )));
        }
        let grid = self.grid;
        self.comps
            .into_iter()
            .map(|values| ScalarField2::from_values(grid, values))
            .collect()
    }
}

/// File of an inflow current.
pub fn current_to_file(j0: &CurrentBoundary) -> Result<FieldFile> {
    FieldFile::from_surface(&[&j0.j0_1, &j0.j0_2, &j0.j0_3])
}

/// Inflow current from a file.
pub fn current_from_file(file: FieldFile) -> Result<CurrentBoundary> {
    let mut c = file.into_surface(3)?.into_iter();
    let mut next = || c.next().expect("three components");
    Ok(CurrentBoundary {
        j0_1: next(),
        j0_2: next(),
        j0_3: next(),
    })
}
