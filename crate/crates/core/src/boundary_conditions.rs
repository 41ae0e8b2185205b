//! Boundary operator pairs (V1, V2), their admissibility test and the
//! state constraint they impose.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::metric::MaterialFields;
use crate::operators::TraceOperators;

pub const DEFAULT_ADMISSIBILITY_TOL: f64 = 1e-10;

/// V1, V2 : boundary 0-cochains → R^K, imposing V1·tr ω + V2·tr⋆ ν = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BcSpec {
    v1: DMatrix<f64>,
    v2: DMatrix<f64>,
    label: String,
}

impl BcSpec {
    pub fn new(v1: DMatrix<f64>, v2: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if v1.shape() != v2.shape() {
            return Err(Error::InvalidBc(format!(
                "'{label}': V1 is {:?} but V2 is {:?}",
                v1.shape(),
                v2.shape()
            )));
        }
        if v1.ncols() > 0 && v1.iter().chain(v2.iter()).all(|&x| x == 0.0) {
            return Err(Error::InvalidBc(format!("'{label}': [V1 V2] is zero")));
        }
        if v1.iter().chain(v2.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidBc(format!("'{label}': non-finite entry")));
        }
        Ok(BcSpec { v1, v2, label })
    }

    /// (I, 0): the boundary velocity vanishes.
    pub fn velocity_zero(nb: usize) -> Self {
        BcSpec {
            v1: DMatrix::identity(nb, nb),
            v2: DMatrix::zeros(nb, nb),
            label: "velocity_zero".into(),
        }
    }

    /// (0, I): the normal flux vanishes.
    pub fn normal_zero(nb: usize) -> Self {
        BcSpec {
            v1: DMatrix::zeros(nb, nb),
            v2: DMatrix::identity(nb, nb),
            label: "normal_zero".into(),
        }
    }

    /// (I, c·I).
    pub fn impedance(nb: usize, c: f64) -> Result<Self> {
        Self::new(
            DMatrix::identity(nb, nb),
            DMatrix::identity(nb, nb) * c,
            format!("impedance(c={c})"),
        )
    }

    pub fn v1(&self) -> &DMatrix<f64> {
        &self.v1
    }

    pub fn v2(&self) -> &DMatrix<f64> {
        &self.v2
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Dimension K of the auxiliary space.
    pub fn rows(&self) -> usize {
        self.v1.nrows()
    }

    /// Number of boundary vertices N∂.
    pub fn boundary_dim(&self) -> usize {
        self.v1.ncols()
    }

    /// (P·V1, P·V2): same constraint set for invertible P.
    pub fn transformed(&self, p: &DMatrix<f64>) -> Result<Self> {
        if p.ncols() != self.rows() {
            return Err(Error::Shape("transform does not match K".into()));
        }
        Self::new(p * &self.v1, p * &self.v2, self.label.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// Largest eigenvalue of the kernel pairing S.
    pub kernel_max_eigenvalue: f64,
    pub kernel_condition: bool,
    pub kernel_tolerance: f64,
    /// Smallest eigenvalue of G = V1 V2* + V2 V1*.
    pub operator_min_eigenvalue: f64,
    pub operator_inequality: bool,
    pub operator_tolerance: f64,
    /// Pairing vanishes on the kernel (energy-conserving).
    pub conservative: bool,
    pub kernel_dim: usize,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.kernel_condition && self.operator_inequality
    }
}

impl std::fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pf = |b: bool| if b { "pass" } else { "fail" };
        writeln!(
            f,
            "kernel condition: {} (max eigenvalue {:e}, tol {:e}, kernel dim {})",
            pf(self.kernel_condition),
            self.kernel_max_eigenvalue,
            self.kernel_tolerance,
            self.kernel_dim
        )?;
        writeln!(
            f,
            "operator inequality: {} (min eigenvalue {:e}, tol {:e})",
            pf(self.operator_inequality),
            self.operator_min_eigenvalue,
            self.operator_tolerance
        )?;
        write!(f, "conservative: {}", self.conservative)
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Orthonormal basis (columns) of the nullspace of `w`.
fn nullspace(w: &DMatrix<f64>) -> DMatrix<f64> {
    let ncols = w.ncols();
    if w.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    // orthonormal row-space basis, then the complementary eigenspace of I − QQᵀ
    let svd = w.transpose().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .collect();
    let q = DMatrix::from_fn(ncols, keep.len(), |r, c| u[(r, keep[c])]);
    let p = DMatrix::identity(ncols, ncols) - &q * q.transpose();
    let eig = SymmetricEigen::new(p);
    let cols: Vec<usize> = (0..ncols).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    DMatrix::from_fn(ncols, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])])
}

fn extreme_eigenvalues(m: DMatrix<f64>) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let e = SymmetricEigen::new(m).eigenvalues;
    let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Tests both sufficient conditions. `rel_tol` scales the natural bound of
/// each form: λ_max(M∂) for the kernel pairing, 2‖V1‖‖V2‖/λ_min(M∂) for G.
pub fn check_admissible(bc: &BcSpec, mb: &[f64], rel_tol: f64) -> Result<AdmissibilityReport> {
    let nb = bc.boundary_dim();
    if mb.len() != nb {
        return Err(Error::Shape(format!(
            "'{}' acts on {nb} boundary values, boundary has {}",
            bc.label,
            mb.len()
        )));
    }
    let k = bc.rows();
    let mut w = DMatrix::zeros(k, 2 * nb);
    w.view_mut((0, 0), (k, nb)).copy_from(&bc.v1);
    w.view_mut((0, nb), (k, nb)).copy_from(&bc.v2);
    let z = nullspace(&w);
    let theta = z.rows(0, nb);
    let sigma = z.rows(nb, nb);
    let mbd = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(mb));
    let pair = theta.transpose() * &mbd * sigma;
    let s = (&pair + pair.transpose()) * 0.5;
    let (s_lo, s_hi) = extreme_eigenvalues(s);

    let mbinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(nb, mb.iter().map(|m| 1.0 / m)));
    let a = &bc.v1 * &mbinv * bc.v2.transpose();
    let g = &a + a.transpose();
    let (g_lo, _) = extreme_eigenvalues(g);

    let mb_max = mb.iter().cloned().fold(0.0, f64::max);
    let mbinv_max = mb.iter().map(|m| 1.0 / m).fold(0.0, f64::max);
    let kernel_tol = rel_tol * mb_max;
    let operator_tol = rel_tol * 2.0 * spectral_norm(&bc.v1) * spectral_norm(&bc.v2) * mbinv_max;

    Ok(AdmissibilityReport {
        kernel_max_eigenvalue: s_hi,
        kernel_condition: s_hi <= kernel_tol,
        kernel_tolerance: kernel_tol,
        operator_min_eigenvalue: g_lo,
        operator_inequality: g_lo >= -operator_tol,
        operator_tolerance: operator_tol,
        conservative: s_hi.abs().max(s_lo.abs()) <= kernel_tol,
        kernel_dim: z.ncols(),
    })
}

/// C = [V1·T·diag(1/ρ), V2·N·diag(T)] acting on the stacked state (ω, ν).
pub fn constraint_matrix(bc: &BcSpec, traces: &TraceOperators, materials: &MaterialFields) -> Result<DMatrix<f64>> {
    let t = traces.t();
    let n = traces.n();
    let nb = t.nrows();
    let nv = t.ncols();
    let ne = n.ncols();
    if bc.boundary_dim() != nb {
        return Err(Error::Shape(format!(
            "'{}' acts on {} boundary values, boundary has {nb}",
            bc.label,
            bc.boundary_dim()
        )));
    }
    if materials.rho.len() != nv || materials.young.len() != ne {
        return Err(Error::Shape("material fields do not match the traces".into()));
    }
    let k = bc.rows();
    let mut c = DMatrix::zeros(k, nv + ne);
    for (b, v, w) in t.triplet_iter() {
        for r in 0..k {
            c[(r, v)] += bc.v1[(r, b)] * w / materials.rho[v];
        }
    }
    for (b, e, w) in n.triplet_iter() {
        for r in 0..k {
            c[(r, nv + e)] += bc.v2[(r, b)] * w * materials.young[e];
        }
    }
    Ok(c)
}
