//! Meshes, oriented simplicial complexes and their boundaries.

mod boundary;
mod complex;
mod off;

pub use boundary::{extract_boundary, BoundaryComplex};
pub use complex::{build_complex, validate_manifold, Incidence, ManifoldReport, SimplicialComplex};
pub use off::{parse_off, read_off, write_off};

use crate::error::{Error, Result};

/// Vertex coordinates plus top-dimensional cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMesh {
    pub coords: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    pub dim: usize,
}

impl RawMesh {
    pub fn new(coords: Vec<Vec<f64>>, cells: Vec<Vec<usize>>, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidMesh(format!("dimension {dim} not in 1..=3")));
        }
        let cdim = coords.first().map(|p| p.len()).unwrap_or(dim);
        if coords.iter().any(|p| p.len() != cdim) {
            return Err(Error::InvalidMesh("inconsistent coordinate dimension".into()));
        }
        if cdim < dim {
            return Err(Error::InvalidMesh(format!(
                "coordinate dimension {cdim} is smaller than n = {dim}"
            )));
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMesh("non-finite coordinate".into()));
        }
        for (ci, c) in cells.iter().enumerate() {
            if c.len() != dim + 1 {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci} has {} vertices, expected {}",
                    c.len(),
                    dim + 1
                )));
            }
            if let Some(&v) = c.iter().find(|&&v| v >= coords.len()) {
                return Err(Error::InvalidMesh(format!("cell {ci}: vertex {v} out of range")));
            }
            let mut s = c.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != c.len() {
                return Err(Error::InvalidMesh(format!("cell {ci} repeats a vertex")));
            }
        }
        if cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        Ok(RawMesh { coords, cells, dim })
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.first().map(|p| p.len()).unwrap_or(self.dim)
    }
}
