//! Named analytic initial conditions and their exact solutions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::SimplicialComplex;

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// u = A·cos(mπ(x − x_min)/Lx)·cos(c·mπ·t/Lx), zero initial velocity.
    StandingWaveX { amplitude: f64, mode: f64 },
    /// u0 = A·exp(−|x − c|²/(2w²)), zero initial velocity. Center and
    /// width default to the bounding-box center and 0.1 × its diagonal.
    GaussianBump {
        amplitude: f64,
        center: Option<Vec<f64>>,
        width: Option<f64>,
    },
    /// u0 = A·z/R on a sphere of radius R about the vertex centroid.
    SphereL1 { amplitude: f64 },
}

pub const PROFILE_NAMES: [&str; 3] = ["standing_wave_x", "gaussian_bump", "sphere_l1"];

fn bbox(cx: &SimplicialComplex) -> (Vec<f64>, Vec<f64>) {
    let d = cx.ambient_dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in cx.coords() {
        for i in 0..d {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

fn sphere_frame(cx: &SimplicialComplex) -> Result<(Vec<f64>, f64)> {
    if cx.ambient_dim() < 3 {
        return Err(Error::Shape("sphere_l1 needs 3D coordinates".into()));
    }
    let nv = cx.count(0) as f64;
    let c: Vec<f64> = (0..3).map(|i| cx.coords().iter().map(|p| p[i]).sum::<f64>() / nv).collect();
    let r = cx
        .coords()
        .iter()
        .map(|p| (0..3).map(|i| (p[i] - c[i]).powi(2)).sum::<f64>().sqrt())
        .sum::<f64>()
        / nv;
    Ok((c, r))
}

impl Profile {
    /// Looks up a profile by name; `param` supplies optional numeric
    /// parameters (amplitude, mode, width, center_x/y/z).
    pub fn by_name(name: &str, param: impl Fn(&str) -> Option<f64>) -> Result<Self> {
        let amplitude = param("amplitude").unwrap_or(1.0);
        match name {
            "standing_wave_x" => Ok(Profile::StandingWaveX {
                amplitude,
                mode: param("mode").unwrap_or(1.0),
            }),
            "gaussian_bump" => {
                let center = match (param("center_x"), param("center_y")) {
                    (Some(x), Some(y)) => Some(vec![x, y, param("center_z").unwrap_or(0.0)]),
                    _ => None,
                };
                Ok(Profile::GaussianBump {
                    amplitude,
                    center,
                    width: param("width"),
                })
            }
            "sphere_l1" => Ok(Profile::SphereL1 { amplitude }),
            _ => Err(Error::UnknownProfile(name.to_string())),
        }
    }

    /// Initial displacement and velocity samples at the vertices.
    pub fn samples(&self, cx: &SimplicialComplex) -> Result<(Vec<f64>, Vec<f64>)> {
        let nv = cx.count(0);
        let u0 = match self {
            Profile::StandingWaveX { amplitude, mode } => {
                let (lo, hi) = bbox(cx);
                let k = mode * PI / (hi[0] - lo[0]);
                cx.coords().iter().map(|p| amplitude * (k * (p[0] - lo[0])).cos()).collect()
            }
            Profile::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                let (lo, hi) = bbox(cx);
                let d = lo.len();
                let c: Vec<f64> = match center {
                    Some(c) => (0..d).map(|i| c.get(i).copied().unwrap_or(0.0)).collect(),
                    None => (0..d).map(|i| 0.5 * (lo[i] + hi[i])).collect(),
                };
                let diag = (0..d).map(|i| (hi[i] - lo[i]).powi(2)).sum::<f64>().sqrt();
                let w = width.unwrap_or(0.1 * diag);
                cx.coords()
                    .iter()
                    .map(|p| {
                        let r2: f64 = (0..d).map(|i| (p[i] - c[i]).powi(2)).sum();
                        amplitude * (-r2 / (2.0 * w * w)).exp()
                    })
                    .collect()
            }
            Profile::SphereL1 { amplitude } => {
                let (c, r) = sphere_frame(cx)?;
                cx.coords().iter().map(|p| amplitude * (p[2] - c[2]) / r).collect()
            }
        };
        Ok((u0, vec![0.0; nv]))
    }

    /// Exact ω = ρ·u_t at time t for uniform materials (ρ, T); `None` when
    /// the profile has no closed form.
    pub fn exact_omega(&self, cx: &SimplicialComplex, rho: f64, young: f64, t: f64) -> Result<Option<Vec<f64>>> {
        let c = (young / rho).sqrt();
        Ok(match self {
            Profile::StandingWaveX { amplitude, mode } => {
                let (lo, hi) = bbox(cx);
                let k = mode * PI / (hi[0] - lo[0]);
                let s = -rho * amplitude * c * k * (c * k * t).sin();
                Some(cx.coords().iter().map(|p| s * (k * (p[0] - lo[0])).cos()).collect())
            }
            Profile::SphereL1 { amplitude } => {
                let (ctr, r) = sphere_frame(cx)?;
                let w = c * 2f64.sqrt() / r;
                let s = -rho * amplitude * w * (w * t).sin();
                Some(cx.coords().iter().map(|p| s * (p[2] - ctr[2]) / r).collect())
            }
            Profile::GaussianBump { .. } => None,
        })
    }

    /// Angular frequency of the exact solution, if any.
    pub fn frequency(&self, cx: &SimplicialComplex, rho: f64, young: f64) -> Result<Option<f64>> {
        let c = (young / rho).sqrt();
        Ok(match self {
            Profile::StandingWaveX { mode, .. } => {
                let (lo, hi) = bbox(cx);
                Some(c * mode * PI / (hi[0] - lo[0]))
            }
            Profile::SphereL1 { .. } => Some(c * 2f64.sqrt() / sphere_frame(cx)?.1),
            Profile::GaussianBump { .. } => None,
        })
    }
}
