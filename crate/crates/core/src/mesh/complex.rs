use std::collections::VecDeque;

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::RawMesh;
use crate::error::{Error, Result};

/// Integer signed incidence matrix, rows = (k+1)-simplices, cols = k-simplices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incidence {
    pub rows: Vec<Vec<(usize, i8)>>,
    pub ncols: usize,
}

impl Incidence {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, s)| s as f64 * x[j]).sum())
            .collect()
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows.len());
        let mut out = vec![0.0; self.ncols];
        for (r, &yi) in self.rows.iter().zip(y) {
            for &(j, s) in r {
                out[j] += s as f64 * yi;
            }
        }
        out
    }

    /// Exact integer product `self · inner`.
    pub fn compose(&self, inner: &Incidence) -> Vec<Vec<(usize, i64)>> {
        assert_eq!(self.ncols, inner.rows.len());
        self.rows
            .iter()
            .map(|r| {
                let mut acc = vec![0i64; inner.ncols];
                let mut touched = Vec::new();
                for &(m, s) in r {
                    for &(j, t) in &inner.rows[m] {
                        if acc[j] == 0 {
                            touched.push(j);
                        }
                        acc[j] += s as i64 * t as i64;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                touched
                    .into_iter()
                    .filter(|&j| acc[j] != 0)
                    .map(|j| (j, acc[j]))
                    .collect()
            })
            .collect()
    }

    pub fn to_csr(&self) -> CsrMatrix<f64> {
        let mut coo = CooMatrix::new(self.rows.len(), self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, s) in r {
                coo.push(i, j, s as f64);
            }
        }
        CsrMatrix::from(&coo)
    }

    pub fn to_dense(&self) -> Vec<Vec<i8>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0i8; self.ncols];
                for &(j, s) in r {
                    d[j] = s;
                }
                d
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    dim: usize,
    coords: Vec<Vec<f64>>,
    // simplices[k] is flat with stride k+1, sorted lexicographically
    simplices: Vec<Vec<usize>>,
    incidence: Vec<Incidence>,
    orientation: Vec<i8>,
}

impl SimplicialComplex {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords[0].len()
    }

    pub fn point(&self, v: usize) -> &[f64] {
        &self.coords[v]
    }

    pub fn count(&self, k: usize) -> usize {
        if k > self.dim {
            0
        } else {
            self.simplices[k].len() / (k + 1)
        }
    }

    pub fn simplex(&self, k: usize, i: usize) -> &[usize] {
        &self.simplices[k][i * (k + 1)..(i + 1) * (k + 1)]
    }

    pub fn simplices(&self, k: usize) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.simplices[k].chunks_exact(k + 1)
    }

    /// Index of the simplex with the given vertices in ascending order.
    pub fn find(&self, verts: &[usize]) -> Option<usize> {
        let k = verts.len().checked_sub(1)?;
        if k > self.dim {
            return None;
        }
        let n = self.count(k);
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.simplex(k, mid).cmp(verts) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// D_k for k in 0..n.
    pub fn incidence(&self, k: usize) -> Result<&Incidence> {
        self.incidence.get(k).ok_or(Error::InvalidDegree {
            degree: k,
            dim: self.dim,
        })
    }

    /// Orientation (+1/−1) of each top simplex relative to ascending order.
    pub fn orientation(&self) -> &[i8] {
        &self.orientation
    }

    /// Top simplices adjacent to each (n−1)-simplex, with the incidence sign.
    pub fn top_cofaces(&self) -> Vec<Vec<(usize, i8)>> {
        let d = &self.incidence[self.dim - 1];
        let mut cof = vec![Vec::new(); d.ncols];
        for (t, r) in d.rows.iter().enumerate() {
            for &(f, s) in r {
                cof[f].push((t, s));
            }
        }
        cof
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim)
            .map(|k| {
                let c = self.count(k) as i64;
                if k % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }
}

fn faces_of(simplices: &[usize], k: usize) -> Vec<usize> {
    // all k-faces (stride k+1) of (k+1)-simplices, sorted and deduplicated
    let mut faces: Vec<Vec<usize>> = simplices
        .chunks_exact(k + 2)
        .flat_map(|s| {
            (0..s.len()).map(move |skip| {
                s.iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect::<Vec<usize>>()
            })
        })
        .collect();
    faces.sort_unstable();
    faces.dedup();
    faces.concat()
}

pub fn build_complex(mesh: &RawMesh) -> Result<SimplicialComplex> {
    let n = mesh.dim;
    let mut top: Vec<Vec<usize>> = mesh
        .cells
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c
        })
        .collect();
    top.sort_unstable();
    top.dedup();

    let mut simplices = vec![Vec::new(); n + 1];
    simplices[n] = top.concat();
    for k in (0..n).rev() {
        simplices[k] = faces_of(&simplices[k + 1], k);
    }
    // vertex i is 0-simplex i
    if simplices[0].len() != mesh.coords.len() {
        let used: std::collections::BTreeSet<usize> = simplices[0].iter().copied().collect();
        let v = (0..mesh.coords.len()).find(|v| !used.contains(v)).unwrap_or(0);
        return Err(Error::InvalidMesh(format!("vertex {v} belongs to no cell")));
    }

    let mut cx = SimplicialComplex {
        dim: n,
        coords: mesh.coords.clone(),
        simplices,
        incidence: Vec::with_capacity(n),
        orientation: Vec::new(),
    };

    for k in 0..n {
        let rows = cx
            .simplices(k + 1)
            .map(|s| {
                (0..s.len())
                    .map(|skip| {
                        let face: Vec<usize> = s
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != skip)
                            .map(|(_, &v)| v)
                            .collect();
                        let j = cx.find(&face).expect("face enumerated");
                        (j, if skip % 2 == 0 { 1i8 } else { -1i8 })
                    })
                    .collect::<Vec<_>>()
            })
            .map(|mut r| {
                r.sort_unstable();
                r
            })
            .collect();
        let inc = Incidence {
            rows,
            ncols: cx.count(k),
        };
        cx.incidence.push(inc);
    }

    let cof = cx.top_cofaces();
    if let Some((f, c)) = cof.iter().enumerate().find(|(_, c)| c.len() > 2) {
        return Err(Error::NonManifold {
            degree: n - 1,
            index: f,
            count: c.len(),
        });
    }
    cx.orientation = orient(&cx, &cof)?;
    Ok(cx)
}

/// Greedy breadth-first propagation of top-simplex orientations across
/// interior faces.
fn orient(cx: &SimplicialComplex, cof: &[Vec<(usize, i8)>]) -> Result<Vec<i8>> {
    let nt = cx.count(cx.dim);
    let d = &cx.incidence[cx.dim - 1];
    let mut o = vec![0i8; nt];
    let mut queue = VecDeque::new();
    for seed in 0..nt {
        if o[seed] != 0 {
            continue;
        }
        o[seed] = 1;
        queue.push_back(seed);
        while let Some(t) = queue.pop_front() {
            for &(f, s) in &d.rows[t] {
                for &(u, su) in &cof[f] {
                    if u == t {
                        continue;
                    }
                    // induced orientations on f must cancel
                    let want = -o[t] * s * su;
                    if o[u] == 0 {
                        o[u] = want;
                        queue.push_back(u);
                    } else if o[u] != want {
                        return Err(Error::NonOrientable { face: f });
                    }
                }
            }
        }
    }
    Ok(o)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldReport {
    pub dim: usize,
    pub counts: Vec<usize>,
    pub boundary_vertices: usize,
    pub boundary_faces: usize,
    pub orientable: bool,
    pub euler_characteristic: i64,
}

impl std::fmt::Display for ManifoldReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "dimension: {}", self.dim)?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(f, "{k}-simplices: {c}")?;
        }
        writeln!(f, "boundary vertices: {}", self.boundary_vertices)?;
        writeln!(f, "boundary faces: {}", self.boundary_faces)?;
        writeln!(f, "orientable: {}", self.orientable)?;
        write!(f, "euler characteristic: {}", self.euler_characteristic)
    }
}

pub fn validate_manifold(cx: &SimplicialComplex) -> ManifoldReport {
    let bd = super::extract_boundary(cx);
    ManifoldReport {
        dim: cx.dim(),
        counts: (0..=cx.dim()).map(|k| cx.count(k)).collect(),
        boundary_vertices: bd.vertex_count(),
        boundary_faces: bd.face_count(),
        orientable: cx.orientation().iter().all(|&o| o != 0),
        euler_characteristic: cx.euler_characteristic(),
    }
}
