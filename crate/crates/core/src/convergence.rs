//! Refinement sweeps against analytic solutions.

use crate::boundary_conditions::BcSpec;
use crate::dynamics::{assemble_generator, initial_state, simulate, SimOptions};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::mesh::RawMesh;
use crate::metric::{weighted_dot, DualKind, MaterialFields};
use crate::operators::Discretization;
use crate::profiles::Profile;

/// Which boundary condition to build once the boundary size is known.
#[derive(Debug, Clone, PartialEq)]
pub enum BcKind {
    None,
    VelocityZero,
    NormalZero,
    Impedance(f64),
}

impl BcKind {
    pub fn build(&self, nb: usize) -> Result<Option<BcSpec>> {
        if nb == 0 {
            return Ok(None);
        }
        Ok(match self {
            BcKind::None => None,
            BcKind::VelocityZero => Some(BcSpec::velocity_zero(nb)),
            BcKind::NormalZero => Some(BcSpec::normal_zero(nb)),
            BcKind::Impedance(c) => Some(BcSpec::impedance(nb, *c)?),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub mesh: RawMesh,
    /// Nominal mesh size; the longest edge when `None`.
    pub h: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub dual: DualKind,
    pub profile: Profile,
    pub bc: BcKind,
    pub rho: f64,
    pub young: f64,
    /// dt = dt_factor·h, rounded so that end_time is hit exactly.
    pub dt_factor: f64,
    pub end_time: f64,
    pub options: SimOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub l2_error_omega: f64,
    /// Order against the previous (coarser) level.
    pub observed_order: Option<f64>,
}

fn run_level(level: &Level, cfg: &SweepConfig) -> Result<(f64, f64, usize, f64)> {
    let disc = Discretization::new(&level.mesh, cfg.dual)?;
    let cx = &disc.complex;
    let h = level.h.unwrap_or_else(|| disc.metric.longest_edge());
    let steps = ((cfg.end_time / (cfg.dt_factor * h)).round() as usize).max(1);
    let dt = cfg.end_time / steps as f64;
    let materials = MaterialFields::uniform(cx, cfg.rho, cfg.young)?;
    let bc = cfg.bc.build(disc.boundary.vertex_count())?;
    let gen = assemble_generator(&disc, &materials, bc.as_ref())?;
    let (u0, v0) = cfg.profile.samples(cx)?;
    let x0 = initial_state(&disc, &u0, &v0, &materials)?;
    let traj = simulate(&gen, &x0, dt, steps, cfg.options)?;
    let exact = cfg
        .profile
        .exact_omega(cx, cfg.rho, cfg.young, cfg.end_time)?
        .ok_or_else(|| Error::Shape("profile has no analytic solution".into()))?;
    let last = traj.final_state().expect("trajectory has a final state");
    let diff: Vec<f64> = last.omega.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let err = weighted_dot(disc.metric.hodge(0)?, &diff, &diff).sqrt();
    Ok((h, dt, steps, err))
}

/// Runs every level (concurrently when `exec` is parallel) and computes
/// observed orders between successive levels.
pub fn converge(levels: &[Level], cfg: &SweepConfig, exec: Execution) -> Result<Vec<ConvergenceRow>> {
    if levels.is_empty() {
        return Err(Error::Shape("no refinement levels".into()));
    }
    if matches!(cfg.profile, Profile::GaussianBump { .. }) {
        return Err(Error::Shape("profile has no analytic solution".into()));
    }
    let results = map_slice(exec, levels, |l| run_level(l, cfg));
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for r in results {
        let (h, dt, steps, err) = r?;
        let observed_order = rows
            .last()
            .map(|p: &ConvergenceRow| (p.l2_error_omega / err).ln() / (p.h / h).ln());
        rows.push(ConvergenceRow {
            h,
            dt,
            steps,
            l2_error_omega: err,
            observed_order,
        });
    }
    Ok(rows)
}
