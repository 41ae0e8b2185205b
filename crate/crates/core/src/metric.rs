//! Primal/dual volumes, diagonal Hodge matrices and material weights.

use crate::cochain::Cochain;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::geometry::{barycenter, circumcenter, diameter, dot, norm, simplex_volume, sub};
use crate::mesh::{BoundaryComplex, SimplicialComplex};

/// Dual cell construction.
///
/// `Barycentric` duals are positive on any non-degenerate mesh.
/// `Circumcentric` duals (signed, Voronoi-type) give the consistent
/// diagonal star and require a mesh on which every dual volume is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualKind {
    #[default]
    Barycentric,
    Circumcentric,
}

impl std::str::FromStr for DualKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "barycentric" => Ok(DualKind::Barycentric),
            "circumcentric" => Ok(DualKind::Circumcentric),
            _ => Err(Error::InvalidMesh(format!("unknown dual kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeMetric {
    dim: usize,
    ambient: usize,
    kind: DualKind,
    primal: Vec<Vec<f64>>,
    dual: Vec<Vec<f64>>,
    hodge: Vec<Vec<f64>>,
    boundary: Vec<f64>,
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

fn center(kind: DualKind, pts: &[&[f64]]) -> Vec<f64> {
    match kind {
        DualKind::Barycentric => barycenter(pts),
        DualKind::Circumcentric => circumcenter(pts),
    }
}

/// Volume of the part of the dual of `sigma` lying inside the simplex `top`
/// (both given as vertex lists, `sigma` ⊂ `top`).
pub fn dual_fragment(kind: DualKind, coords: &[Vec<f64>], sigma: &[usize], top: &[usize]) -> f64 {
    let rest: Vec<usize> = top.iter().copied().filter(|v| !sigma.contains(v)).collect();
    if rest.is_empty() {
        return 1.0;
    }
    let m = rest.len();
    let mut total = 0.0;
    for order in permutations(&rest) {
        let mut tau: Vec<usize> = sigma.to_vec();
        let mut centers = Vec::with_capacity(m + 1);
        let pts = |t: &[usize]| t.iter().map(|&v| coords[v].as_slice()).collect::<Vec<_>>();
        centers.push(center(kind, &pts(&tau)));
        for &r in &order {
            tau.push(r);
            centers.push(center(kind, &pts(&tau)));
        }
        total += match kind {
            DualKind::Barycentric => {
                let cp: Vec<&[f64]> = centers.iter().map(|c| c.as_slice()).collect();
                simplex_volume(&cp)
            }
            DualKind::Circumcentric => {
                // consecutive circumcenter steps are mutually orthogonal
                let mut v = 1.0;
                for (i, &r) in order.iter().enumerate() {
                    let step = sub(&centers[i + 1], &centers[i]);
                    let toward = sub(&coords[r], &centers[i]);
                    let s = if dot(&step, &toward) < 0.0 { -1.0 } else { 1.0 };
                    v *= s * norm(&step) / (i + 1) as f64;
                }
                v
            }
        };
    }
    total
}

fn subsets(verts: &[usize], size: usize) -> Vec<Vec<usize>> {
    let n = verts.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == size {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| verts[i]).collect());
        }
    }
    out
}

/// Dual weight of each vertex inside each boundary face (the boundary's
/// own dual cells). Rows follow `bd.faces()`.
pub fn boundary_face_weights(
    cx: &SimplicialComplex,
    bd: &BoundaryComplex,
    kind: DualKind,
) -> Vec<Vec<(usize, f64)>> {
    let n = cx.dim();
    bd.faces()
        .iter()
        .map(|&f| {
            let verts = cx.simplex(n - 1, f);
            verts
                .iter()
                .map(|&v| (v, dual_fragment(kind, cx.coords(), &[v], verts)))
                .collect()
        })
        .collect()
}

impl HodgeMetric {
    pub fn new(cx: &SimplicialComplex, bd: &BoundaryComplex, kind: DualKind) -> Result<Self> {
        Self::with_execution(cx, bd, kind, Execution::default())
    }

    pub fn with_execution(
        cx: &SimplicialComplex,
        bd: &BoundaryComplex,
        kind: DualKind,
        exec: Execution,
    ) -> Result<Self> {
        let n = cx.dim();
        let coords = cx.coords();

        let mut primal = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let vols = map_range(exec, cx.count(k), |i| {
                let pts: Vec<&[f64]> = cx.simplex(k, i).iter().map(|&v| coords[v].as_slice()).collect();
                (simplex_volume(&pts), diameter(&pts))
            });
            let mut out = Vec::with_capacity(vols.len());
            for (i, (vol, diam)) in vols.into_iter().enumerate() {
                if k > 0 && !(vol > 1e-12 * diam.powi(k as i32)) {
                    return Err(Error::DegenerateSimplex { degree: k, index: i });
                }
                out.push(vol);
            }
            primal.push(out);
        }

        // per top simplex: (degree, index, fragment) contributions
        let contrib = map_range(exec, cx.count(n), |t| {
            let top = cx.simplex(n, t);
            let mut c = Vec::new();
            for k in 0..=n {
                for sigma in subsets(top, k + 1) {
                    let idx = cx.find(&sigma).expect("face of top simplex");
                    c.push((k, idx, dual_fragment(kind, coords, &sigma, top)));
                }
            }
            c
        });
        let mut dual: Vec<Vec<f64>> = (0..=n).map(|k| vec![0.0; cx.count(k)]).collect();
        for c in contrib {
            for (k, i, v) in c {
                dual[k][i] += v;
            }
        }

        let hmax = primal[1].iter().cloned().fold(0.0, f64::max);
        let mut hodge = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let scale = hmax.powi((n - k) as i32);
            let mut hk = Vec::with_capacity(cx.count(k));
            for i in 0..cx.count(k) {
                let d = dual[k][i];
                if !(d > 1e-12 * scale) {
                    return Err(Error::NonPositiveDual {
                        degree: k,
                        index: i,
                        value: d,
                    });
                }
                hk.push(d / primal[k][i]);
            }
            hodge.push(hk);
        }

        let mut boundary = vec![0.0; bd.vertex_count()];
        for row in boundary_face_weights(cx, bd, kind) {
            for (v, w) in row {
                boundary[bd.local_index(v).unwrap()] += w;
            }
        }
        if let Some(i) = boundary.iter().position(|&w| !(w > 0.0)) {
            return Err(Error::NonPositiveDual {
                degree: 0,
                index: bd.vertices()[i],
                value: boundary[i],
            });
        }

        Ok(HodgeMetric {
            dim: n,
            ambient: cx.ambient_dim(),
            kind,
            primal,
            dual,
            hodge,
            boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn kind(&self) -> DualKind {
        self.kind
    }

    fn check_degree(&self, k: usize) -> Result<()> {
        if k > self.dim {
            Err(Error::InvalidDegree {
                degree: k,
                dim: self.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn primal_volumes(&self, k: usize) -> Result<&[f64]> {
        self.check_degree(k)?;
        Ok(&self.primal[k])
    }

    /// Dual (n−k)-volumes, indexed by the primal k-simplex.
    pub fn dual_volumes(&self, k: usize) -> Result<&[f64]> {
        self.check_degree(k)?;
        Ok(&self.dual[k])
    }

    /// Diagonal of M_k.
    pub fn hodge(&self, k: usize) -> Result<&[f64]> {
        self.check_degree(k)?;
        Ok(&self.hodge[k])
    }

    /// Diagonal of M∂ on boundary vertices (row order of T).
    pub fn boundary(&self) -> &[f64] {
        &self.boundary
    }

    /// Primal k-cochain to dual (n−k)-cochain: the diagonal M_k.
    pub fn star(&self, k: usize) -> Result<Vec<f64>> {
        Ok(self.hodge(k)?.to_vec())
    }

    /// Dual j-cochain back to primal (n−j)-cochain, with
    /// star_inv(n−k)·star(k) = (−1)^{k(n−k)}.
    pub fn star_inv(&self, j: usize) -> Result<Vec<f64>> {
        self.check_degree(j)?;
        let k = self.dim - j;
        let sign = if (k * j) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(self.hodge[k].iter().map(|m| sign / m).collect())
    }

    pub fn inner_product(&self, a: &Cochain, b: &Cochain) -> Result<f64> {
        if a.degree != b.degree {
            return Err(Error::DegreeMismatch {
                left: a.degree,
                right: b.degree,
            });
        }
        let m = self.hodge(a.degree)?;
        if a.len() != m.len() || b.len() != m.len() {
            return Err(Error::Shape("cochain length does not match the metric".into()));
        }
        Ok(weighted_dot(m, &a.values, &b.values))
    }

    /// Σ_i |σ_i*| over degree-k duals; equals |M| for every k.
    pub fn total_dual_volume(&self, k: usize) -> Result<f64> {
        Ok(self.dual_volumes(k)?.iter().sum())
    }

    pub fn total_volume(&self) -> f64 {
        self.primal[self.dim].iter().sum()
    }

    pub fn shortest_edge(&self) -> f64 {
        self.primal[1].iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn longest_edge(&self) -> f64 {
        self.primal[1].iter().cloned().fold(0.0, f64::max)
    }
}

pub fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// Mass density per vertex and Young modulus per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialFields {
    pub rho: Vec<f64>,
    pub young: Vec<f64>,
}

impl MaterialFields {
    pub fn new(rho: Vec<f64>, young: Vec<f64>) -> Result<Self> {
        if let Some(i) = rho.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidMaterial(format!("rho[{i}] = {} is not positive", rho[i])));
        }
        if let Some(i) = young.iter().position(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidMaterial(format!(
                "young[{i}] = {} is not positive",
                young[i]
            )));
        }
        Ok(MaterialFields { rho, young })
    }

    pub fn uniform(cx: &SimplicialComplex, rho: f64, young: f64) -> Result<Self> {
        Self::new(vec![rho; cx.count(0)], vec![young; cx.count(1)])
    }

    pub fn identity(cx: &SimplicialComplex) -> Self {
        MaterialFields {
            rho: vec![1.0; cx.count(0)],
            young: vec![1.0; cx.count(1)],
        }
    }

    pub fn check(&self, cx: &SimplicialComplex) -> Result<()> {
        if self.rho.len() != cx.count(0) || self.young.len() != cx.count(1) {
            return Err(Error::Shape(format!(
                "materials sized ({}, {}), complex has ({}, {})",
                self.rho.len(),
                self.young.len(),
                cx.count(0),
                cx.count(1)
            )));
        }
        Ok(())
    }
}

/// Diagonals of E0 = M_0·diag(1/ρ) and E1 = M_1·diag(T).
pub fn material_matrices(metric: &HodgeMetric, fields: &MaterialFields) -> Result<(Vec<f64>, Vec<f64>)> {
    let fields = MaterialFields::new(fields.rho.clone(), fields.young.clone())?;
    let m0 = metric.hodge(0)?;
    let m1 = metric.hodge(1)?;
    if fields.rho.len() != m0.len() || fields.young.len() != m1.len() {
        return Err(Error::Shape("material fields do not match the metric".into()));
    }
    let e0 = m0.iter().zip(&fields.rho).map(|(m, r)| m / r).collect();
    let e1 = m1.iter().zip(&fields.young).map(|(m, t)| m * t).collect();
    Ok((e0, e1))
}
