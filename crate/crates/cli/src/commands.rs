use std::path::Path;

use hodgewave::convergence::{converge, SweepConfig};
use hodgewave::dynamics::simulate_partial;
use hodgewave::{
    assemble_generator, build_complex, check_admissible, initial_state, validate_manifold, Cochain,
    Discretization, Execution, SimOptions,
};

use crate::config::{BcChoice, RunConfig};
use crate::output;
use crate::CliError;

pub struct Overrides {
    pub unsafe_bc: bool,
    pub snapshots: Option<usize>,
    pub out: Option<std::path::PathBuf>,
}

/// Fixed pseudo-random test values.
fn probe(n: usize, seed: f64) -> Vec<f64> {
    (0..n).map(|i| ((i as f64 + 1.0) * seed).sin()).collect()
}

pub fn check_mesh(cfg: &RunConfig) -> Result<(), CliError> {
    let mesh = cfg.mesh()?;
    let cx = build_complex(&mesh)?;
    println!("{}", validate_manifold(&cx));

    let mut ok = true;
    for k in 0..cx.dim().saturating_sub(1) {
        let dd = cx.incidence(k + 1)?.compose(cx.incidence(k)?);
        let nonzero = dd.iter().filter(|r| !r.is_empty()).count();
        println!("d{}·d{} = 0: {}", k + 1, k, if nonzero == 0 { "pass" } else { "fail" });
        ok &= nonzero == 0;
    }

    let disc = Discretization::with_execution(&mesh, cfg.dual()?, Execution::Sequential)?;
    let w = Cochain::new(&disc.complex, 0, probe(cx.count(0), 0.731))?;
    let mu = Cochain::new(&disc.complex, 1, probe(cx.count(1), 1.913))?;
    let rel = disc.green_residual(&w, &mu)?.abs() / (disc.norm(&w)? * disc.norm(&mu)?);
    let green = rel <= 1e-12;
    println!(
        "green identity: {} (relative residual {rel:.3e})",
        if green { "pass" } else { "fail" }
    );
    ok &= green;
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid("mesh self-test failed"))
    }
}

pub fn check_bc(cfg: &RunConfig) -> Result<(), CliError> {
    let disc = Discretization::with_execution(&cfg.mesh()?, cfg.dual()?, Execution::Sequential)?;
    let nb = disc.boundary.vertex_count();
    let bc = match cfg.bc(nb)? {
        Some(bc) => bc,
        None if nb == 0 => {
            println!("closed mesh: no boundary condition to check");
            return Ok(());
        }
        None => return Err(CliError::invalid("no [bc] kind given")),
    };
    let report = check_admissible(&bc, disc.metric.boundary(), cfg.tolerances()?.admissibility)?;
    println!("boundary condition: {}", bc.label());
    println!("{report}");
    if report.admissible() {
        println!(
            "admissible ({})",
            if report.conservative { "conservative" } else { "dissipative" }
        );
        Ok(())
    } else {
        Err(CliError::invalid(format!("boundary condition '{}' is not admissible by the sufficient test", bc.label())))
    }
}

pub fn simulate(cfg: &RunConfig, ov: &Overrides) -> Result<(), CliError> {
    let disc = Discretization::with_execution(&cfg.mesh()?, cfg.dual()?, Execution::Sequential)?;
    let materials = cfg.materials(&disc.complex)?;
    let bc = cfg.bc(disc.boundary.vertex_count())?;
    let gen = assemble_generator(&disc, &materials, bc.as_ref())?;
    let (u0, v0) = cfg.samples(&disc.complex)?;
    let x0 = initial_state(&disc, &u0, &v0, &materials)?;
    let dt = cfg.dt()?.unwrap_or_else(|| gen.default_dt());
    let steps = cfg.steps()?;
    let tol = cfg.tolerances()?;
    let opts = SimOptions {
        unsafe_bc: ov.unsafe_bc,
        stride: ov.snapshots.map(Ok).unwrap_or_else(|| cfg.snapshots())?,
        solver_tol: tol.solver,
        admissibility_tol: tol.admissibility,
    };
    let out = ov.out.clone().unwrap_or_else(|| cfg.out_dir());

    let (traj, err) = simulate_partial(&gen, &x0, dt, steps, opts);
    if let Some(e @ hodgewave::Error::Inadmissible { .. }) = &err {
        if traj.steps() == 0 {
            return Err(CliError::from(e.clone()));
        }
    }
    output::ensure_dir(&out)?;
    let energy = output::write_energy(&out, &traj, err.is_some())?;
    for (step, x) in &traj.states {
        output::write_state(&out, *step, x)?;
    }
    println!("boundary condition: {}", gen.bc_label());
    println!("dt = {dt:e}, steps = {}", traj.steps());
    println!("wrote {}", energy.display());
    if let Some(e) = err {
        return Err(CliError::runtime(format!("stopped after {} steps: {e}", traj.steps())));
    }
    println!("final energy {:e} (initial {:e})", traj.energy[traj.steps()], traj.energy[0]);
    println!("max relative drift {:.3e}", traj.max_relative_drift());
    println!("nonincreasing: {}", traj.is_nonincreasing(1e-10));
    Ok(())
}

pub fn converge_cmd(cfg: &RunConfig, ov: &Overrides) -> Result<(), CliError> {
    let levels = cfg.levels()?;
    let (rho, young) = cfg.uniform_material()?;
    let bc = match cfg.bc_choice()? {
        BcChoice::None => hodgewave::convergence::BcKind::None,
        BcChoice::Named(k) => k,
        BcChoice::Custom { .. } => return Err(CliError::invalid("converge does not take a custom bc")),
    };
    let tol = cfg.tolerances()?;
    let sweep = SweepConfig {
        dual: cfg.dual()?,
        profile: cfg.profile()?,
        bc,
        rho,
        young,
        dt_factor: cfg.dt_factor()?,
        end_time: cfg.end_time()?,
        options: SimOptions {
            unsafe_bc: ov.unsafe_bc,
            stride: 0,
            solver_tol: tol.solver,
            admissibility_tol: tol.admissibility,
        },
    };
    let rows = converge(&levels, &sweep, Execution::default())?;
    let out = ov.out.clone().unwrap_or_else(|| cfg.out_dir());
    output::ensure_dir(&out)?;
    let path = output::write_convergence(&out, &rows)?;
    println!("{:>12} {:>12} {:>8} {:>14} {:>8}", "h", "dt", "steps", "l2_error", "order");
    for r in &rows {
        let order = r.observed_order.map(|o| format!("{o:.3}")).unwrap_or_default();
        println!("{:>12.4e} {:>12.4e} {:>8} {:>14.6e} {:>8}", r.h, r.dt, r.steps, r.l2_error_omega, order);
    }
    println!("wrote {}", path.display());
    Ok(())
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    RunConfig::load(path)
}
