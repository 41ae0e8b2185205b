use std::path::{Path, PathBuf};

use hodgewave::convergence::ConvergenceRow;
use hodgewave::{State, Trajectory};

use crate::CliError;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn io(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::runtime(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))
}

/// energy.csv, or energy.partial.csv when the run stopped early.
pub fn write_energy(dir: &Path, traj: &Trajectory, partial: bool) -> Result<PathBuf, CliError> {
    let path = dir.join(if partial { "energy.partial.csv" } else { "energy.csv" });
    let mut w = writer(&path)?;
    w.write_record(["step", "time", "energy", "boundary_power", "solver_residual"])
        .map_err(io(&path))?;
    for n in 0..traj.energy.len() {
        w.write_record([
            n.to_string(),
            num(traj.times[n]),
            num(traj.energy[n]),
            num(traj.power[n]),
            num(traj.residuals[n]),
        ])
        .map_err(io(&path))?;
    }
    finish(w, &path)?;
    Ok(path)
}

pub fn write_state(dir: &Path, step: usize, x: &State) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("state_{step}.csv"));
    let mut w = writer(&path)?;
    w.write_record(["simplex_kind", "index", "value"]).map_err(io(&path))?;
    for (kind, values) in [("vertex", &x.omega), ("edge", &x.nu)] {
        for (i, v) in values.iter().enumerate() {
            w.write_record([kind.to_string(), i.to_string(), num(*v)])
                .map_err(io(&path))?;
        }
    }
    finish(w, &path)?;
    Ok(path)
}

pub fn write_convergence(dir: &Path, rows: &[ConvergenceRow]) -> Result<PathBuf, CliError> {
    let path = dir.join("convergence.csv");
    let mut w = writer(&path)?;
    w.write_record(["h", "dt", "l2_error_omega", "observed_order"])
        .map_err(io(&path))?;
    for r in rows {
        w.write_record([
            num(r.h),
            num(r.dt),
            num(r.l2_error_omega),
            r.observed_order.map(num).unwrap_or_default(),
        ])
        .map_err(io(&path))?;
    }
    finish(w, &path)?;
    Ok(path)
}
