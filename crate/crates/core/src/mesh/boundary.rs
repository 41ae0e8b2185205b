use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::{RawMesh, SimplicialComplex};
use crate::error::Result;

/// Boundary (n−1)-simplices with induced orientation, and the trace
/// selection matrix on 0-cochains.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComplex {
    dim: usize,
    faces: Vec<usize>,
    cells: Vec<usize>,
    signs: Vec<i8>,
    vertices: Vec<usize>,
    local: Vec<Option<usize>>,
    trace: CsrMatrix<f64>,
}

pub fn extract_boundary(cx: &SimplicialComplex) -> BoundaryComplex {
    let n = cx.dim();
    let cof = cx.top_cofaces();
    let orient = cx.orientation();
    let mut faces = Vec::new();
    let mut cells = Vec::new();
    let mut signs = Vec::new();
    for (f, c) in cof.iter().enumerate() {
        if let [(t, s)] = c.as_slice() {
            faces.push(f);
            cells.push(*t);
            signs.push(orient[*t] * *s);
        }
    }
    let mut vertices: Vec<usize> = faces
        .iter()
        .flat_map(|&f| cx.simplex(n - 1, f).iter().copied())
        .collect();
    vertices.sort_unstable();
    vertices.dedup();
    let mut local = vec![None; cx.count(0)];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = Some(i);
    }
    let mut coo = CooMatrix::new(vertices.len(), cx.count(0));
    for (i, &v) in vertices.iter().enumerate() {
        coo.push(i, v, 1.0);
    }
    BoundaryComplex {
        dim: n,
        faces,
        cells,
        signs,
        vertices,
        local,
        trace: CsrMatrix::from(&coo),
    }
}

impl BoundaryComplex {
    /// Dimension of the parent complex.
    pub fn parent_dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Indices of the boundary (n−1)-simplices in the parent complex.
    pub fn faces(&self) -> &[usize] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// The unique top simplex containing each boundary face.
    pub fn face_cells(&self) -> &[usize] {
        &self.cells
    }

    /// Induced orientation of each boundary face relative to ascending order.
    pub fn face_signs(&self) -> &[i8] {
        &self.signs
    }

    /// Boundary vertex ids (ascending); row order of T.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn local_index(&self, v: usize) -> Option<usize> {
        self.local.get(v).copied().flatten()
    }

    /// Selection matrix T (boundary vertices × vertices).
    pub fn trace_matrix(&self) -> &CsrMatrix<f64> {
        &self.trace
    }

    /// Oriented boundary faces as vertex lists; an odd permutation of the
    /// ascending order encodes a negative induced sign.
    pub fn oriented_faces(&self, cx: &SimplicialComplex) -> Vec<Vec<usize>> {
        self.faces
            .iter()
            .zip(&self.signs)
            .map(|(&f, &s)| {
                let mut v = cx.simplex(self.dim - 1, f).to_vec();
                if s < 0 {
                    if v.len() >= 2 {
                        v.swap(0, 1);
                    }
                }
                v
            })
            .collect()
    }

    /// Signed boundary of the oriented boundary chain; empty when closed.
    pub fn boundary_of_boundary(&self, cx: &SimplicialComplex) -> Vec<(Vec<usize>, i64)> {
        if self.dim < 2 {
            return Vec::new();
        }
        let mut acc: std::collections::BTreeMap<Vec<usize>, i64> = Default::default();
        for (&f, &s) in self.faces.iter().zip(&self.signs) {
            let verts = cx.simplex(self.dim - 1, f);
            for skip in 0..verts.len() {
                let face: Vec<usize> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let sign = if skip % 2 == 0 { 1 } else { -1 };
                *acc.entry(face).or_default() += s as i64 * sign;
            }
        }
        acc.into_iter().filter(|&(_, c)| c != 0).collect()
    }

    /// The boundary as a closed (n−1)-mesh; vertex i is `vertices()[i]`.
    pub fn to_raw_mesh(&self, cx: &SimplicialComplex) -> Option<Result<RawMesh>> {
        if self.dim < 2 || self.is_empty() {
            return None;
        }
        let coords = self.vertices.iter().map(|&v| cx.point(v).to_vec()).collect();
        let cells = self
            .oriented_faces(cx)
            .into_iter()
            .map(|f| f.into_iter().map(|v| self.local[v].unwrap()).collect())
            .collect();
        Some(RawMesh::new(coords, cells, self.dim - 1))
    }
}
