//! The Hodge wave system and its constrained implicit-midpoint integrator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::boundary_conditions::{check_admissible, constraint_matrix, BcSpec, DEFAULT_ADMISSIBILITY_TOL};
use crate::error::{Error, Result};
use crate::metric::{weighted_dot, MaterialFields};
use crate::operators::{spmv, Discretization};

pub const DEFAULT_SOLVER_TOL: f64 = 1e-12;

/// ω = ρ·u_t on vertices, ν = du on edges.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub omega: Vec<f64>,
    pub nu: Vec<f64>,
    pub time: f64,
}

impl State {
    pub fn zeros(nv: usize, ne: usize) -> Self {
        State {
            omega: vec![0.0; nv],
            nu: vec![0.0; ne],
            time: 0.0,
        }
    }

    pub fn stacked(&self) -> Vec<f64> {
        let mut x = self.omega.clone();
        x.extend_from_slice(&self.nu);
        x
    }

    pub fn from_stacked(x: &[f64], nv: usize, time: f64) -> Self {
        State {
            omega: x[..nv].to_vec(),
            nu: x[nv..].to_vec(),
            time,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        State {
            omega: self.omega.iter().map(|x| s * x).collect(),
            nu: self.nu.iter().map(|x| s * x).collect(),
            time: self.time,
        }
    }
}

/// ω = diag(ρ)·v0, ν = D_0·u0.
pub fn initial_state(disc: &Discretization, u0: &[f64], v0: &[f64], materials: &MaterialFields) -> Result<State> {
    let nv = disc.complex.count(0);
    if u0.len() != nv || v0.len() != nv || materials.rho.len() != nv {
        return Err(Error::Shape(format!(
            "initial samples sized ({}, {}), mesh has {nv} vertices",
            u0.len(),
            v0.len()
        )));
    }
    Ok(State {
        omega: v0.iter().zip(&materials.rho).map(|(v, r)| r * v).collect(),
        nu: disc.complex.incidence(0)?.apply(u0),
        time: 0.0,
    })
}

/// Block operator A on (ω, ν) with the energy weights H = diag(M_0/ρ, M_1·T)
/// and the constraint C of the active boundary condition.
#[derive(Debug, Clone)]
pub struct Generator<'a> {
    disc: &'a Discretization,
    materials: MaterialFields,
    h0: Vec<f64>,
    h1: Vec<f64>,
    // D_0ᵀ M_1 − Tᵀ M∂ N  (nv × ne)
    flux: CsrMatrix<f64>,
    d0: CsrMatrix<f64>,
    bc: Option<BcSpec>,
    c: DMatrix<f64>,
}

fn scale_rows(m: &CsrMatrix<f64>, s: &[f64]) -> CsrMatrix<f64> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        coo.push(i, j, v * s[i]);
    }
    CsrMatrix::from(&coo)
}

fn scale_cols(m: &CsrMatrix<f64>, s: &[f64]) -> CsrMatrix<f64> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        coo.push(i, j, v * s[j]);
    }
    CsrMatrix::from(&coo)
}

pub fn assemble_generator<'a>(
    disc: &'a Discretization,
    materials: &MaterialFields,
    bc: Option<&BcSpec>,
) -> Result<Generator<'a>> {
    let cx = &disc.complex;
    materials.check(cx)?;
    let materials = MaterialFields::new(materials.rho.clone(), materials.young.clone())?;
    let m0 = disc.metric.hodge(0)?;
    let m1 = disc.metric.hodge(1)?;
    let d0 = cx.incidence(0)?.to_csr();
    let mut flux = d0.transpose();
    flux = scale_cols(&flux, m1);
    if !disc.boundary.is_empty() {
        let tmn = disc.traces.t().transpose() * scale_rows(disc.traces.n(), disc.metric.boundary());
        flux = &flux - &tmn;
    }
    let nv = cx.count(0);
    let ne = cx.count(1);
    let c = match bc {
        Some(bc) => constraint_matrix(bc, &disc.traces, &materials)?,
        None => DMatrix::zeros(0, nv + ne),
    };
    Ok(Generator {
        disc,
        h0: m0.iter().zip(&materials.rho).map(|(m, r)| m / r).collect(),
        h1: m1.iter().zip(&materials.young).map(|(m, t)| m * t).collect(),
        materials,
        flux,
        d0,
        bc: bc.cloned(),
        c,
    })
}

impl<'a> Generator<'a> {
    pub fn discretization(&self) -> &'a Discretization {
        self.disc
    }

    pub fn materials(&self) -> &MaterialFields {
        &self.materials
    }

    pub fn bc(&self) -> Option<&BcSpec> {
        self.bc.as_ref()
    }

    pub fn bc_label(&self) -> &str {
        self.bc.as_ref().map(|b| b.label()).unwrap_or("none")
    }

    pub fn nv(&self) -> usize {
        self.h0.len()
    }

    pub fn ne(&self) -> usize {
        self.h1.len()
    }

    /// Energy weights (M_0/ρ, M_1·T).
    pub fn energy_weights(&self) -> (&[f64], &[f64]) {
        (&self.h0, &self.h1)
    }

    pub fn constraint(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Efforts (ω/ρ, T·ν).
    pub fn efforts(&self, x: &State) -> (Vec<f64>, Vec<f64>) {
        (
            x.omega.iter().zip(&self.materials.rho).map(|(w, r)| w / r).collect(),
            x.nu.iter().zip(&self.materials.young).map(|(n, t)| n * t).collect(),
        )
    }

    pub fn apply(&self, x: &State) -> State {
        let (eo, en) = self.efforts(x);
        let m0 = self.disc.metric.hodge(0).unwrap();
        let top = spmv(&self.flux, &en);
        State {
            omega: top.iter().zip(m0).map(|(f, m)| -f / m).collect(),
            nu: spmv(&self.d0, &eo),
            time: x.time,
        }
    }

    pub fn energy_form(&self, x: &State, y: &State) -> f64 {
        weighted_dot(&self.h0, &x.omega, &y.omega) + weighted_dot(&self.h1, &x.nu, &y.nu)
    }

    pub fn energy(&self, x: &State) -> f64 {
        0.5 * self.energy_form(x, x)
    }

    /// (T e_ω(y))ᵀ M∂ (N e_ν(x)).
    fn half_pairing(&self, x: &State, y: &State) -> f64 {
        if self.disc.boundary.is_empty() {
            return 0.0;
        }
        let (_, en) = self.efforts(x);
        let (eo, _) = self.efforts(y);
        let t = spmv(self.disc.traces.t(), &eo);
        let f = spmv(self.disc.traces.n(), &en);
        weighted_dot(self.disc.metric.boundary(), &t, &f)
    }

    /// Boundary terms of ⟨Ax, y⟩_E + ⟨x, Ay⟩_E.
    pub fn boundary_pairing(&self, x: &State, y: &State) -> f64 {
        self.half_pairing(x, y) + self.half_pairing(y, x)
    }

    /// P = (T e_ω)ᵀ M∂ (N e_ν), with dE/dt = P.
    pub fn boundary_power(&self, x: &State) -> f64 {
        self.half_pairing(x, x)
    }

    pub fn constraint_residual(&self, x: &State) -> Vec<f64> {
        let s = DVector::from_vec(x.stacked());
        (&self.c * s).iter().copied().collect()
    }

    /// 0.5 · shortest edge · √(min ρ / max T).
    pub fn default_dt(&self) -> f64 {
        let rmin = self.materials.rho.iter().cloned().fold(f64::INFINITY, f64::min);
        let tmax = self.materials.young.iter().cloned().fold(0.0, f64::max);
        0.5 * self.disc.metric.shortest_edge() * (rmin / tmax).sqrt()
    }
}

fn csr_times_dense(m: &CsrMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), d.ncols());
    for (i, j, v) in m.triplet_iter() {
        for c in 0..d.ncols() {
            out[(i, c)] += v * d[(j, c)];
        }
    }
    out
}

/// Implicit midpoint with constraints at the midpoint:
/// (2/dt)·H·y − H·A·y − Cᵀλ = (2/dt)·H·x, C·y = 0, x⁺ = 2y − x.
/// The ν-block is eliminated exactly; the reduced system is factored once.
pub struct MidpointStepper<'g, 'a> {
    gen: &'g Generator<'a>,
    dt: f64,
    tol: f64,
    // R = diag(1/ρ)·flux·diag(T)
    r: CsrMatrix<f64>,
    // D_0·diag(1/ρ)
    drho: CsrMatrix<f64>,
    ca: DMatrix<f64>,
    cb: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<'g, 'a> MidpointStepper<'g, 'a> {
    pub fn new(gen: &'g Generator<'a>, dt: f64, tol: f64) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidStep(dt));
        }
        let nv = gen.nv();
        let ne = gen.ne();
        let rho_inv: Vec<f64> = gen.materials.rho.iter().map(|r| 1.0 / r).collect();
        let r = scale_cols(&scale_rows(&gen.flux, &rho_inv), &gen.materials.young);
        let drho = scale_cols(&gen.d0, &rho_inv);

        // row-compress C in the H^{-1} metric so redundant rows drop out
        let hinv: Vec<f64> = gen.h0.iter().chain(&gen.h1).map(|h| 1.0 / h).collect();
        let c = &gen.c;
        let kc = if c.nrows() == 0 {
            DMatrix::zeros(0, nv + ne)
        } else {
            let mut ch = c.clone();
            for (j, w) in hinv.iter().enumerate() {
                ch.column_mut(j).scale_mut(*w);
            }
            let gram = &ch * c.transpose();
            let eig = SymmetricEigen::new(gram);
            let emax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let keep: Vec<usize> = (0..eig.eigenvalues.len())
                .filter(|&i| emax > 0.0 && eig.eigenvalues[i] > 1e-12 * emax)
                .collect();
            let q = DMatrix::from_fn(c.nrows(), keep.len(), |r, k| eig.eigenvectors[(r, keep[k])]);
            q.transpose() * c
        };
        let k = kc.nrows();
        let ca = kc.columns(0, nv).into_owned();
        let cb = kc.columns(nv, ne).into_owned();

        let half = 0.5 * dt;
        let mut m = DMatrix::zeros(nv + k, nv + k);
        let rd = &r * &drho;
        for (i, j, v) in rd.triplet_iter() {
            m[(i, j)] += half * v;
        }
        for i in 0..nv {
            m[(i, i)] += 2.0 / dt * gen.h0[i];
        }
        if k > 0 {
            let mut cbh = cb.transpose();
            for (e, h) in gen.h1.iter().enumerate() {
                cbh.row_mut(e).scale_mut(1.0 / h);
            }
            let k12 = csr_times_dense(&r, &cbh) * half - ca.transpose();
            m.view_mut((0, nv), (nv, k)).copy_from(&k12);
            let k21 = csr_times_dense(&drho.transpose(), &cb.transpose()).transpose() * half + &ca;
            m.view_mut((nv, 0), (k, nv)).copy_from(&k21);
            let k22 = &cb * &cbh * half;
            m.view_mut((nv, nv), (k, k)).copy_from(&k22);
        }
        let lu = m.lu();
        let diag = lu.u().diagonal();
        let umax = diag.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let umin = diag.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        if !(umin > 1e-14 * umax) {
            return Err(Error::SingularSaddle {
                label: gen.bc_label().to_string(),
            });
        }
        Ok(MidpointStepper {
            gen,
            dt,
            tol,
            r,
            drho,
            ca,
            cb,
            lu,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Solves the full saddle system for rhs (ra, rb, rc).
    fn solve(&self, ra: &[f64], rb: &[f64], rc: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let nv = self.gen.nv();
        let k = self.ca.nrows();
        let half = 0.5 * self.dt;
        let h1 = &self.gen.h1;
        let rb_h: Vec<f64> = rb.iter().zip(h1).map(|(r, h)| r / h).collect();
        let r_rb = spmv(&self.r, &rb_h);
        let mut rhs = DVector::zeros(nv + k);
        for i in 0..nv {
            rhs[i] = ra[i] - half * r_rb[i];
        }
        if k > 0 {
            let cb_rb = &self.cb * DVector::from_column_slice(&rb_h);
            for i in 0..k {
                rhs[nv + i] = rc[i] - half * cb_rb[i];
            }
        }
        let sol = self.lu.solve(&rhs).ok_or_else(|| Error::SingularSaddle {
            label: self.gen.bc_label().to_string(),
        })?;
        let a: Vec<f64> = sol.rows(0, nv).iter().copied().collect();
        let lam: Vec<f64> = sol.rows(nv, k).iter().copied().collect();
        // b = (dt/2)·H1^{-1}·(rb + S a + Cbᵀλ), with H1^{-1}·S = D_0·diag(1/ρ)
        let mut b: Vec<f64> = spmv(&self.drho, &a);
        let cbl: Vec<f64> = if k > 0 {
            (self.cb.transpose() * DVector::from_column_slice(&lam)).iter().copied().collect()
        } else {
            vec![0.0; b.len()]
        };
        for e in 0..b.len() {
            b[e] = half * (rb_h[e] + b[e] + cbl[e] / h1[e]);
        }
        Ok((a, b, lam))
    }

    fn residual(
        &self,
        (a, b, lam): (&[f64], &[f64], &[f64]),
        (ra, rb, rc): (&[f64], &[f64], &[f64]),
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let g = self.gen;
        let two = 2.0 / self.dt;
        let k = self.ca.nrows();
        let lamv = DVector::from_column_slice(lam);
        let rbv = spmv(&self.r, b);
        let cal: Vec<f64> = if k > 0 {
            (self.ca.transpose() * &lamv).iter().copied().collect()
        } else {
            vec![0.0; a.len()]
        };
        let res_a = (0..a.len())
            .map(|i| ra[i] - (two * g.h0[i] * a[i] + rbv[i] - cal[i]))
            .collect();
        let sa = spmv(&self.drho, a);
        let cbl: Vec<f64> = if k > 0 {
            (self.cb.transpose() * &lamv).iter().copied().collect()
        } else {
            vec![0.0; b.len()]
        };
        let res_b = (0..b.len())
            .map(|e| rb[e] - (-g.h1[e] * sa[e] + two * g.h1[e] * b[e] - cbl[e]))
            .collect();
        let res_c = if k > 0 {
            let cy = &self.ca * DVector::from_column_slice(a) + &self.cb * DVector::from_column_slice(b);
            (0..k).map(|i| rc[i] - cy[i]).collect()
        } else {
            Vec::new()
        };
        (res_a, res_b, res_c)
    }

    /// One step; returns the new state and the relative saddle residual.
    pub fn step(&self, x: &State) -> Result<(State, f64)> {
        let g = self.gen;
        let two = 2.0 / self.dt;
        let ra: Vec<f64> = x.omega.iter().zip(&g.h0).map(|(w, h)| two * h * w).collect();
        let rb: Vec<f64> = x.nu.iter().zip(&g.h1).map(|(n, h)| two * h * n).collect();
        let rc = vec![0.0; self.ca.nrows()];
        let rnorm = norm3(&ra, &rb, &rc);
        if rnorm == 0.0 {
            return Ok((
                State {
                    time: x.time + self.dt,
                    ..x.clone()
                },
                0.0,
            ));
        }
        if !rnorm.is_finite() {
            return Err(Error::NonFinite { time: x.time });
        }
        let (mut a, mut b, mut lam) = self.solve(&ra, &rb, &rc)?;
        let mut rel = f64::INFINITY;
        for _ in 0..6 {
            let (ea, eb, ec) = self.residual((&a, &b, &lam), (&ra, &rb, &rc));
            rel = norm3(&ea, &eb, &ec) / rnorm;
            if rel <= 0.01 * self.tol {
                break;
            }
            let (da, db, dl) = self.solve(&ea, &eb, &ec)?;
            add(&mut a, &da);
            add(&mut b, &db);
            add(&mut lam, &dl);
        }
        let (ea, eb, ec) = self.residual((&a, &b, &lam), (&ra, &rb, &rc));
        rel = rel.min(norm3(&ea, &eb, &ec) / rnorm);
        if !(rel <= self.tol) {
            return Err(Error::SolverResidual {
                residual: rel,
                tolerance: self.tol,
            });
        }
        Ok((
            State {
                omega: a.iter().zip(&x.omega).map(|(y, w)| 2.0 * y - w).collect(),
                nu: b.iter().zip(&x.nu).map(|(y, n)| 2.0 * y - n).collect(),
                time: x.time + self.dt,
            },
            rel,
        ))
    }
}

fn add(x: &mut [f64], d: &[f64]) {
    for (x, d) in x.iter_mut().zip(d) {
        *x += d;
    }
}

fn norm3(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a.iter().chain(b).chain(c).map(|x| x * x).sum::<f64>().sqrt()
}

/// Convenience single step (factors the system each call).
pub fn step_midpoint(x: &State, dt: f64, gen: &Generator) -> Result<State> {
    Ok(MidpointStepper::new(gen, dt, DEFAULT_SOLVER_TOL)?.step(x)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Skip the admissibility check.
    pub unsafe_bc: bool,
    /// Keep every `stride`-th state (0 keeps only the initial state).
    pub stride: usize,
    pub solver_tol: f64,
    pub admissibility_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            unsafe_bc: false,
            stride: 0,
            solver_tol: DEFAULT_SOLVER_TOL,
            admissibility_tol: DEFAULT_ADMISSIBILITY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub dt: f64,
    /// (step, state) samples.
    pub states: Vec<(usize, State)>,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub power: Vec<f64>,
    /// Relative saddle residual of the step that produced each entry (0 for the initial state).
    pub residuals: Vec<f64>,
    pub last: Option<State>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.energy.len().saturating_sub(1)
    }

    /// max_n |E_n − E_0| / E_0.
    pub fn max_relative_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0
    }

    /// E_{n+1} ≤ E_n + tol·E_0 for every step.
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        let e0 = self.energy[0];
        self.energy.windows(2).all(|w| w[1] <= w[0] + tol * e0)
    }

    pub fn final_state(&self) -> Option<&State> {
        self.last.as_ref()
    }
}

/// Runs `steps` midpoint steps; on failure returns what was computed so far
/// together with the error.
pub fn simulate_partial(
    gen: &Generator,
    initial: &State,
    dt: f64,
    steps: usize,
    opts: SimOptions,
) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory {
        dt,
        ..Default::default()
    };
    let record = |traj: &mut Trajectory, step: usize, x: &State, res: f64| {
        traj.times.push(x.time);
        traj.energy.push(gen.energy(x));
        traj.power.push(gen.boundary_power(x));
        traj.residuals.push(res);
        if step == 0 || (opts.stride > 0 && step % opts.stride == 0) {
            traj.states.push((step, x.clone()));
        }
    };
    record(&mut traj, 0, initial, 0.0);
    traj.last = Some(initial.clone());
    if !(dt > 0.0 && dt.is_finite()) {
        return (traj, Some(Error::InvalidStep(dt)));
    }
    if !opts.unsafe_bc {
        if let Some(bc) = gen.bc() {
            match check_admissible(bc, gen.disc.metric.boundary(), opts.admissibility_tol) {
                Ok(rep) if rep.admissible() => {}
                Ok(_) => {
                    return (
                        traj,
                        Some(Error::Inadmissible {
                            label: bc.label().to_string(),
                        }),
                    )
                }
                Err(e) => return (traj, Some(e)),
            }
        }
    }
    if steps == 0 {
        return (traj, None);
    }
    let stepper = match MidpointStepper::new(gen, dt, opts.solver_tol) {
        Ok(s) => s,
        Err(e) => return (traj, Some(e)),
    };
    let mut x = initial.clone();
    for n in 1..=steps {
        match stepper.step(&x) {
            Ok((next, res)) => {
                x = next;
                // keep the clock exact rather than accumulated
                x.time = initial.time + n as f64 * dt;
                record(&mut traj, n, &x, res);
            }
            Err(e) => {
                traj.last = Some(x);
                return (traj, Some(e));
            }
        }
    }
    traj.last = Some(x);
    (traj, None)
}

pub fn simulate(gen: &Generator, initial: &State, dt: f64, steps: usize, opts: SimOptions) -> Result<Trajectory> {
    match simulate_partial(gen, initial, dt, steps, opts) {
        (t, None) => Ok(t),
        (_, Some(e)) => Err(e),
    }
}
