//! INI run configuration. Relative paths resolve against the config file.

use std::path::{Path, PathBuf};

use hodgewave::boundary_conditions::DEFAULT_ADMISSIBILITY_TOL;
use hodgewave::convergence::{BcKind, Level};
use hodgewave::dynamics::DEFAULT_SOLVER_TOL;
use hodgewave::{BcSpec, DualKind, MaterialFields, Profile, RawMesh, SimplicialComplex};
use ini::Ini;
use nalgebra::DMatrix;

use crate::CliError;

pub struct RunConfig {
    base: PathBuf,
    ini: Ini,
}

/// Boundary condition as written in the config, before the boundary size is known.
pub enum BcChoice {
    None,
    Named(BcKind),
    Custom { v1: PathBuf, v2: PathBuf },
}

pub struct Tolerances {
    pub admissibility: f64,
    pub solver: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let ini = Ini::load_from_file(path)
            .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(RunConfig { base, ini })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
    }

    fn require(&self, section: &str, key: &str) -> Result<&str, CliError> {
        self.get(section, key)
            .ok_or_else(|| CliError::invalid(format!("missing [{section}] {key}")))
    }

    pub fn number(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        self.get(section, key)
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::invalid(format!("[{section}] {key} = '{s}' is not a number")))
            })
            .transpose()
    }

    fn positive(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        match self.number(section, key)? {
            Some(x) if x <= 0.0 => Err(CliError::invalid(format!("[{section}] {key} must be positive"))),
            other => Ok(other),
        }
    }

    pub fn integer(&self, section: &str, key: &str) -> Result<Option<usize>, CliError> {
        self.get(section, key)
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| CliError::invalid(format!("[{section}] {key} = '{s}' is not a count")))
            })
            .transpose()
    }

    pub fn path(&self, raw: &str) -> PathBuf {
        let p = Path::new(raw);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn existing(&self, section: &str, key: &str) -> Result<Option<PathBuf>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => {
                let p = self.path(raw);
                if p.is_file() {
                    Ok(Some(p))
                } else {
                    Err(CliError::invalid(format!("[{section}] {key}: {} does not exist", p.display())))
                }
            }
        }
    }

    pub fn mesh_path(&self) -> Result<PathBuf, CliError> {
        self.existing("mesh", "path")?
            .ok_or_else(|| CliError::invalid("missing [mesh] path"))
    }

    pub fn mesh(&self) -> Result<RawMesh, CliError> {
        let p = self.mesh_path()?;
        hodgewave::read_off(&p).map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))
    }

    pub fn dual(&self) -> Result<DualKind, CliError> {
        self.get("mesh", "dual")
            .unwrap_or("barycentric")
            .parse()
            .map_err(CliError::from)
    }

    /// Uniform (rho, young) when both are constants.
    pub fn uniform_material(&self) -> Result<(f64, f64), CliError> {
        if self.get("material", "rho_csv").is_some() || self.get("material", "young_csv").is_some() {
            return Err(CliError::invalid("converge needs constant [material] rho and young"));
        }
        Ok((
            self.positive("material", "rho")?.unwrap_or(1.0),
            self.positive("material", "young")?.unwrap_or(1.0),
        ))
    }

    pub fn materials(&self, cx: &SimplicialComplex) -> Result<MaterialFields, CliError> {
        let field = |key: &str, csv_key: &str, n: usize| -> Result<Vec<f64>, CliError> {
            match self.existing("material", csv_key)? {
                Some(p) => read_indexed(&p, n),
                None => Ok(vec![self.positive("material", key)?.unwrap_or(1.0); n]),
            }
        };
        let rho = field("rho", "rho_csv", cx.count(0))?;
        let young = field("young", "young_csv", cx.count(1))?;
        Ok(MaterialFields::new(rho, young)?)
    }

    pub fn bc_choice(&self) -> Result<BcChoice, CliError> {
        let kind = match self.get("bc", "kind") {
            None => return Ok(BcChoice::None),
            Some(k) => k,
        };
        Ok(match kind {
            "none" => BcChoice::None,
            "velocity_zero" => BcChoice::Named(BcKind::VelocityZero),
            "normal_zero" => BcChoice::Named(BcKind::NormalZero),
            "impedance" => BcChoice::Named(BcKind::Impedance(self.number("bc", "c")?.unwrap_or(1.0))),
            "custom" => BcChoice::Custom {
                v1: self.existing("bc", "v1")?.ok_or_else(|| CliError::invalid("custom bc needs [bc] v1"))?,
                v2: self.existing("bc", "v2")?.ok_or_else(|| CliError::invalid("custom bc needs [bc] v2"))?,
            },
            other => {
                return Err(CliError::invalid(format!(
                    "unknown bc kind '{other}' (expected velocity_zero, normal_zero, impedance, custom or none)"
                )))
            }
        })
    }

    /// The boundary condition for a boundary of `nb` vertices; none on closed meshes.
    pub fn bc(&self, nb: usize) -> Result<Option<BcSpec>, CliError> {
        match self.bc_choice()? {
            BcChoice::None => Ok(None),
            BcChoice::Named(kind) => Ok(kind.build(nb)?),
            BcChoice::Custom { v1, v2 } => {
                let v1 = read_matrix(&v1)?;
                let v2 = read_matrix(&v2)?;
                if v1.ncols() != nb {
                    return Err(CliError::invalid(format!(
                        "custom V1 has {} columns, boundary has {nb} vertices",
                        v1.ncols()
                    )));
                }
                Ok(Some(BcSpec::new(v1, v2, "custom")?))
            }
        }
    }

    pub fn profile(&self) -> Result<Profile, CliError> {
        let name = self.require("initial", "profile")?;
        let param = |k: &str| self.number("initial", k).ok().flatten();
        Ok(Profile::by_name(name, param)?)
    }

    /// Initial (u0, v0) vertex samples, from CSV files or a named profile.
    pub fn samples(&self, cx: &SimplicialComplex) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let nv = cx.count(0);
        if let Some(p) = self.existing("initial", "u0_csv")? {
            let u0 = read_indexed(&p, nv)?;
            let v0 = match self.existing("initial", "v0_csv")? {
                Some(p) => read_indexed(&p, nv)?,
                None => vec![0.0; nv],
            };
            return Ok((u0, v0));
        }
        Ok(self.profile()?.samples(cx)?)
    }

    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        Ok(Tolerances {
            admissibility: self
                .positive("tolerance", "admissibility")?
                .unwrap_or(DEFAULT_ADMISSIBILITY_TOL),
            solver: self.positive("tolerance", "solver")?.unwrap_or(DEFAULT_SOLVER_TOL),
        })
    }

    pub fn dt(&self) -> Result<Option<f64>, CliError> {
        self.positive("run", "dt")
    }

    pub fn steps(&self) -> Result<usize, CliError> {
        Ok(self.integer("run", "steps")?.unwrap_or(0))
    }

    pub fn snapshots(&self) -> Result<usize, CliError> {
        Ok(self.integer("run", "snapshots")?.unwrap_or(0))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.path(self.get("run", "out").unwrap_or("out"))
    }

    pub fn levels(&self) -> Result<Vec<Level>, CliError> {
        let meshes = split_list(self.require("converge", "meshes")?);
        let hs: Vec<f64> = match self.get("converge", "h") {
            None => Vec::new(),
            Some(s) => split_list(s)
                .iter()
                .map(|x| {
                    x.parse::<f64>()
                        .ok()
                        .filter(|h| *h > 0.0)
                        .ok_or_else(|| CliError::invalid(format!("[converge] h entry '{x}' is not a positive number")))
                })
                .collect::<Result<_, _>>()?,
        };
        if !hs.is_empty() && hs.len() != meshes.len() {
            return Err(CliError::invalid("[converge] h must list one value per mesh"));
        }
        meshes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let p = self.path(m);
                let mesh = hodgewave::read_off(&p).map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?;
                Ok(Level {
                    mesh,
                    h: hs.get(i).copied(),
                })
            })
            .collect()
    }

    pub fn dt_factor(&self) -> Result<f64, CliError> {
        Ok(self.positive("converge", "dt_factor")?.unwrap_or(0.5))
    }

    pub fn end_time(&self) -> Result<f64, CliError> {
        self.positive("converge", "end_time")?
            .ok_or_else(|| CliError::invalid("missing [converge] end_time"))
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, CliError> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// `simplex_index,value` rows covering 0..n exactly once. A non-numeric
/// first row is taken as a header.
pub fn read_indexed(path: &Path, n: usize) -> Result<Vec<f64>, CliError> {
    let bad = |line: u64, msg: &str| CliError::invalid(format!("{}:{line}: {msg}", path.display()));
    let mut out = vec![f64::NAN; n];
    for (row, rec) in csv_reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 2 {
            return Err(bad(line, "expected simplex_index,value"));
        }
        let idx = match rec[0].parse::<usize>() {
            Ok(i) => i,
            Err(_) if row == 0 => continue,
            Err(_) => return Err(bad(line, "bad index")),
        };
        let v: f64 = rec[1].parse().map_err(|_| bad(line, "bad value"))?;
        if idx >= n {
            return Err(bad(line, &format!("index {idx} out of range (expected < {n})")));
        }
        if !out[idx].is_nan() {
            return Err(bad(line, &format!("index {idx} repeated")));
        }
        out[idx] = v;
    }
    if let Some(i) = out.iter().position(|x| x.is_nan()) {
        return Err(CliError::invalid(format!("{}: no value for index {i}", path.display())));
    }
    Ok(out)
}

/// Dense row-major matrix, no header.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in csv_reader(path)?.records() {
        let rec = rec.map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::invalid(format!("{}: ragged rows", path.display())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::invalid(format!("{}: empty matrix", path.display())));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_iterator(r, c, rows.into_iter().flatten()))
}
