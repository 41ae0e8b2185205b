//! Exterior derivative, traces, codifferential and the Green identity.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::geometry::outward_conormal;
use crate::mesh::{build_complex, extract_boundary, BoundaryComplex, RawMesh, SimplicialComplex};
use crate::metric::{boundary_face_weights, weighted_dot, DualKind, HodgeMetric};

/// Trace T (selection) and normal trace N on boundary 0-cochains.
#[derive(Debug, Clone)]
pub struct TraceOperators {
    t: CsrMatrix<f64>,
    n: CsrMatrix<f64>,
    normals: Vec<Vec<f64>>,
}

impl TraceOperators {
    pub fn assemble(
        cx: &SimplicialComplex,
        bd: &BoundaryComplex,
        metric: &HodgeMetric,
        exec: Execution,
    ) -> Self {
        let normals = boundary_normals(cx, bd, metric);
        let n = normal_trace_matrix(cx, bd, &normals, exec);
        TraceOperators {
            t: bd.trace_matrix().clone(),
            n,
            normals,
        }
    }

    pub fn t(&self) -> &CsrMatrix<f64> {
        &self.t
    }

    pub fn n(&self) -> &CsrMatrix<f64> {
        &self.n
    }

    /// Dual-measure-weighted outward normal at each boundary vertex.
    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    /// Numerical rank of N, singular values below `rel_tol`·σ_max dropped.
    pub fn normal_trace_rank(&self, rel_tol: f64) -> usize {
        if self.n.nrows() == 0 {
            return 0;
        }
        let dense = csr_to_dense(&self.n);
        let sv = dense.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > rel_tol * smax).count()
    }
}

pub fn csr_to_dense(m: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        d[(i, j)] += *v;
    }
    d
}

pub fn spmv(m: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(m.ncols(), x.len());
    m.row_iter()
        .map(|r| r.col_indices().iter().zip(r.values()).map(|(&j, v)| v * x[j]).sum())
        .collect()
}

pub fn spmv_t(m: &CsrMatrix<f64>, y: &[f64]) -> Vec<f64> {
    assert_eq!(m.nrows(), y.len());
    let mut out = vec![0.0; m.ncols()];
    for (r, &yi) in m.row_iter().zip(y) {
        for (&j, v) in r.col_indices().iter().zip(r.values()) {
            out[j] += v * yi;
        }
    }
    out
}

fn boundary_normals(cx: &SimplicialComplex, bd: &BoundaryComplex, metric: &HodgeMetric) -> Vec<Vec<f64>> {
    let n = cx.dim();
    let d = cx.ambient_dim();
    let weights = boundary_face_weights(cx, bd, metric.kind());
    let mut acc = vec![vec![0.0; d]; bd.vertex_count()];
    for ((&f, &t), row) in bd.faces().iter().zip(bd.face_cells()).zip(&weights) {
        let face = cx.simplex(n - 1, f);
        let opp = *cx.simplex(n, t).iter().find(|v| !face.contains(v)).unwrap();
        let pts: Vec<&[f64]> = face.iter().map(|&v| cx.point(v)).collect();
        let nf = outward_conormal(&pts, cx.point(opp));
        for &(v, w) in row {
            let a = &mut acc[bd.local_index(v).unwrap()];
            for (a, c) in a.iter_mut().zip(&nf) {
                *a += w * c;
            }
        }
    }
    for (a, &m) in acc.iter_mut().zip(metric.boundary()) {
        for c in a.iter_mut() {
            *c /= m;
        }
    }
    acc
}

fn monomials(y: &[f64], quadratic: bool) -> Vec<f64> {
    let mut out = y.to_vec();
    if quadratic {
        for i in 0..y.len() {
            for j in i..y.len() {
                out.push(if i == j { 0.5 * y[i] * y[i] } else { y[i] * y[j] });
            }
        }
    }
    out
}

/// Rows of N: at each boundary vertex, a local least-squares quadratic
/// (linear on small patches) is fitted to the edge values of μ on a
/// 2-ring patch, and its gradient is taken against the vertex normal.
fn normal_trace_matrix(
    cx: &SimplicialComplex,
    bd: &BoundaryComplex,
    normals: &[Vec<f64>],
    exec: Execution,
) -> CsrMatrix<f64> {
    let nv = cx.count(0);
    let ne = cx.count(1);
    let n = cx.dim();
    let d = cx.ambient_dim();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (e, s) in cx.simplices(1).enumerate() {
        adj[s[0]].push((s[1], e));
        adj[s[1]].push((s[0], e));
    }
    let nquad = n + n * (n + 1) / 2;

    let rows = map_range(exec, bd.vertex_count(), |b| {
        let v = bd.vertices()[b];
        let mut inside = vec![false; nv];
        let mut patch = vec![v];
        inside[v] = true;
        let grow = |patch: &mut Vec<usize>, inside: &mut Vec<bool>| {
            let frontier: Vec<usize> = patch.clone();
            let before = patch.len();
            for w in frontier {
                for &(u, _) in &adj[w] {
                    if !inside[u] {
                        inside[u] = true;
                        patch.push(u);
                    }
                }
            }
            patch.len() > before
        };
        let edges_of = |patch: &[usize], inside: &[bool]| -> Vec<usize> {
            let mut es: Vec<usize> = patch
                .iter()
                .flat_map(|&w| adj[w].iter().filter(|&&(u, _)| inside[u]).map(|&(_, e)| e))
                .collect();
            es.sort_unstable();
            es.dedup();
            es
        };
        grow(&mut patch, &mut inside);
        grow(&mut patch, &mut inside);
        let mut edges = edges_of(&patch, &inside);
        while edges.len() < nquad + 3 && grow(&mut patch, &mut inside) {
            edges = edges_of(&patch, &inside);
        }

        let x0 = cx.point(v);
        let h = edges
            .iter()
            .map(|&e| {
                let s = cx.simplex(1, e);
                crate::geometry::norm(&crate::geometry::sub(cx.point(s[0]), cx.point(s[1])))
            })
            .sum::<f64>()
            / edges.len() as f64;

        // tangent frame: principal directions of the patch offsets
        let frame: DMatrix<f64> = if d == n {
            DMatrix::identity(d, n)
        } else {
            let off = DMatrix::from_fn(d, patch.len(), |r, c| cx.point(patch[c])[r] - x0[r]);
            let svd = off.svd(true, false);
            let u = svd.u.unwrap();
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
            DMatrix::from_fn(d, n, |r, c| u[(r, order[c])])
        };
        let local = |p: &[f64]| -> Vec<f64> {
            let rel = DVector::from_fn(d, |r, _| (p[r] - x0[r]) / h);
            (frame.transpose() * rel).iter().copied().collect()
        };

        let design = |quadratic: bool| {
            let p = if quadratic { nquad } else { n };
            DMatrix::from_fn(edges.len(), p, |r, c| {
                let s = cx.simplex(1, edges[r]);
                monomials(&local(cx.point(s[1])), quadratic)[c]
                    - monomials(&local(cx.point(s[0])), quadratic)[c]
            })
        };
        let well_posed = |a: &DMatrix<f64>| {
            let sv = a.singular_values();
            let smax = sv.iter().cloned().fold(0.0, f64::max);
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            a.nrows() >= a.ncols() && smin > 1e-8 * smax
        };
        let mut a = design(true);
        if edges.len() < nquad + 2 || !well_posed(&a) {
            a = design(false);
        }
        let pinv = a
            .clone()
            .pseudo_inverse(1e-12 * a.norm())
            .expect("pseudo-inverse");
        let nloc = frame.transpose() * DVector::from_column_slice(&normals[b]);
        let mut row = Vec::with_capacity(edges.len());
        for (c, &e) in edges.iter().enumerate() {
            let w: f64 = (0..n).map(|i| nloc[i] * pinv[(i, c)]).sum::<f64>() / h;
            row.push((e, w));
        }
        row
    });

    let mut coo = CooMatrix::new(bd.vertex_count(), ne);
    for (b, row) in rows.into_iter().enumerate() {
        for (e, w) in row {
            coo.push(b, e, w);
        }
    }
    CsrMatrix::from(&coo)
}

/// Complex, boundary, metric and traces assembled from one mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub complex: SimplicialComplex,
    pub boundary: BoundaryComplex,
    pub metric: HodgeMetric,
    pub traces: TraceOperators,
}

impl Discretization {
    pub fn new(mesh: &RawMesh, kind: DualKind) -> Result<Self> {
        Self::with_execution(mesh, kind, Execution::default())
    }

    pub fn with_execution(mesh: &RawMesh, kind: DualKind, exec: Execution) -> Result<Self> {
        let complex = build_complex(mesh)?;
        let boundary = extract_boundary(&complex);
        let metric = HodgeMetric::with_execution(&complex, &boundary, kind, exec)?;
        let traces = TraceOperators::assemble(&complex, &boundary, &metric, exec);
        Ok(Discretization {
            complex,
            boundary,
            metric,
            traces,
        })
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    fn check(&self, c: &Cochain, degree: usize) -> Result<()> {
        if c.degree != degree {
            return Err(Error::DegreeMismatch {
                left: c.degree,
                right: degree,
            });
        }
        if c.len() != self.complex.count(degree) {
            return Err(Error::Shape(format!(
                "{degree}-cochain has {} values, expected {}",
                c.len(),
                self.complex.count(degree)
            )));
        }
        Ok(())
    }

    pub fn exterior_derivative(&self, c: &Cochain) -> Result<Cochain> {
        let n = self.dim();
        if c.degree >= n {
            return Err(Error::InvalidDegree {
                degree: c.degree + 1,
                dim: n,
            });
        }
        self.check(c, c.degree)?;
        let d = self.complex.incidence(c.degree)?;
        Ok(Cochain {
            degree: c.degree + 1,
            values: d.apply(&c.values),
        })
    }

    pub fn trace(&self, omega: &Cochain) -> Result<Vec<f64>> {
        self.check(omega, 0)?;
        if self.boundary.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        Ok(spmv(self.traces.t(), &omega.values))
    }

    pub fn normal_trace(&self, mu: &Cochain) -> Result<Vec<f64>> {
        self.check(mu, 1)?;
        if self.boundary.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        Ok(spmv(self.traces.n(), &mu.values))
    }

    /// Degree 1: M_0^{-1}(D_0ᵀ M_1 μ − Tᵀ M∂ N μ). Higher degrees: the
    /// interior form M_{k−1}^{-1} D_{k−1}ᵀ M_k μ.
    pub fn codifferential(&self, mu: &Cochain) -> Result<Cochain> {
        let k = mu.degree;
        if k == 0 {
            return Err(Error::InvalidDegree { degree: 0, dim: self.dim() });
        }
        self.check(mu, k)?;
        let mk = self.metric.hodge(k)?;
        let mprev = self.metric.hodge(k - 1)?;
        let weighted: Vec<f64> = mk.iter().zip(&mu.values).map(|(m, x)| m * x).collect();
        let mut out = self.complex.incidence(k - 1)?.apply_transpose(&weighted);
        if k == 1 && !self.boundary.is_empty() {
            let flux = spmv(self.traces.n(), &mu.values);
            let wb: Vec<f64> = flux.iter().zip(self.metric.boundary()).map(|(f, m)| f * m).collect();
            for (o, c) in out.iter_mut().zip(spmv_t(self.traces.t(), &wb)) {
                *o -= c;
            }
        }
        for (o, m) in out.iter_mut().zip(mprev) {
            *o /= m;
        }
        Ok(Cochain {
            degree: k - 1,
            values: out,
        })
    }

    /// (−1)^k ⋆^{-1} d̃ ⋆ with the dual derivative d̃ = (−1)^k D_{k−1}ᵀ and
    /// ⋆^{-1} = (−1)^{(n−j)j} ⋆ on dual j-cochains. No boundary correction.
    pub fn codifferential_via_star(&self, mu: &Cochain) -> Result<Cochain> {
        let k = mu.degree;
        let n = self.dim();
        if k == 0 {
            return Err(Error::InvalidDegree { degree: 0, dim: n });
        }
        self.check(mu, k)?;
        let sgn = |p: usize| if p % 2 == 0 { 1.0 } else { -1.0 };
        let starred: Vec<f64> = self
            .metric
            .star(k)?
            .iter()
            .zip(&mu.values)
            .map(|(s, x)| s * x)
            .collect();
        let dual_d: Vec<f64> = self
            .complex
            .incidence(k - 1)?
            .apply_transpose(&starred)
            .into_iter()
            .map(|x| sgn(k) * x)
            .collect();
        let j = n - k + 1;
        let inv: Vec<f64> = self
            .metric
            .star_inv(j)?
            .into_iter()
            .map(|s| sgn((n - j) * j) * s)
            .collect();
        Ok(Cochain {
            degree: k - 1,
            values: inv.iter().zip(&dual_d).map(|(s, x)| sgn(k) * s * x).collect(),
        })
    }

    /// ⟨dω, μ⟩ − ⟨ω, δμ⟩ − (Tω)ᵀ M∂ (Nμ).
    pub fn green_residual(&self, omega: &Cochain, mu: &Cochain) -> Result<f64> {
        self.check(omega, 0)?;
        self.check(mu, 1)?;
        let m0 = self.metric.hodge(0)?;
        let m1 = self.metric.hodge(1)?;
        let d_omega = self.exterior_derivative(omega)?;
        let delta_mu = self.codifferential(mu)?;
        let mut r = weighted_dot(m1, &d_omega.values, &mu.values) - weighted_dot(m0, &omega.values, &delta_mu.values);
        if !self.boundary.is_empty() {
            let t = spmv(self.traces.t(), &omega.values);
            let f = spmv(self.traces.n(), &mu.values);
            r -= weighted_dot(self.metric.boundary(), &t, &f);
        }
        Ok(r)
    }

    /// ‖c‖ in the M_k inner product.
    pub fn norm(&self, c: &Cochain) -> Result<f64> {
        Ok(self.metric.inner_product(c, c)?.sqrt())
    }
}
