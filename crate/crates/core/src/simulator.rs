//! Simulation of the moving-maximum process at a finite set of sites.
//!
//! `Z(t) = max_j φ(X_j - t) / Y_j` over a unit-rate Poisson process
//! `{(X_j, Y_j)}` on space × (0, ∞). Two point generators are provided.
//!
//! * [`Scheme::Mixture`] draws `X_j` from the mixture `g = (1/d) Σ φ(· - t_i)`
//!   and sets `Y_j = Γ_j g(X_j)` with `Γ_j` the arrival times of a unit Poisson
//!   process; the image is again a unit-rate process on all of space. Since
//!   `φ(X - t_i) / g(X) <= d`, no later point can matter once
//!   `d / Γ_j` drops below the smallest running maximum, so the draw is exact.
//! * [`Scheme::Window`] draws `X_j` uniformly on a box around the sites that
//!   misses less than `tail_mass_tol` of each kernel, with `Y_j = Γ_j / |W|`,
//!   and stops once `φ_max |W| / Γ_j` falls below the smallest running maximum.

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelModel, Sampler};
use crate::observations::Observations;
use crate::sites::SiteSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Exact sampling through the kernel mixture centred at the sites.
    #[default]
    Mixture,
    /// Uniform points on a truncated spatial window.
    Window,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mixture" => Ok(Scheme::Mixture),
            "window" => Ok(Scheme::Window),
            _ => Err(format!("unknown scheme '{s}', expected mixture or window")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Window half-margin around the sites; `None` derives it from
    /// `tail_mass_tol`. Only used by [`Scheme::Window`].
    pub window_margin: Option<f64>,
    pub tail_mass_tol: f64,
    /// Poisson points allowed per replication before giving up.
    pub max_points: usize,
    pub scheme: Scheme,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            window_margin: None,
            tail_mass_tol: 1e-8,
            max_points: 10_000_000,
            scheme: Scheme::Mixture,
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        SimConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_mass_tol > 0.0 && self.tail_mass_tol <= 1e-3) {
            return Err(Error::InvalidParameter {
                name: "tail_mass_tol",
                value: self.tail_mass_tol,
                reason: "must lie in (0, 1e-3]",
            });
        }
        if self.max_points < 1000 {
            return Err(Error::InvalidParameter {
                name: "max_points",
                value: self.max_points as f64,
                reason: "must be at least 1000",
            });
        }
        if let Some(m) = self.window_margin {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "window_margin",
                    value: m,
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(())
    }
}

/// Random stream for replication `index`: the ChaCha stream id carries the
/// index, so every replication is reproducible on its own.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `n` independent replications of `(Z(t_1), .., Z(t_d))`.
///
/// Replications run in parallel; the output does not depend on the number
/// of worker threads.
pub fn simulate(model: &KernelModel, sites: &SiteSet, n: usize, cfg: &SimConfig) -> Result<Observations> {
    simulate_with_stats(model, sites, n, cfg).map(|(z, _)| z)
}

/// Poisson point usage of one [`simulate_with_stats`] call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub scheme: Scheme,
    pub total_points: u64,
    pub max_points_per_replication: usize,
    /// Bound on the kernel mass outside the window per site: zero for the
    /// exact scheme, unknown for a user-set window margin.
    pub truncated_mass: Option<f64>,
}

/// [`simulate`] that also reports how many points were generated.
pub fn simulate_with_stats(
    model: &KernelModel,
    sites: &SiteSet,
    n: usize,
    cfg: &SimConfig,
) -> Result<(Observations, SimStats)> {
    model.validate()?;
    cfg.validate()?;
    if sites.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: sites.dim(),
        });
    }
    sites.require_distinct()?;
    if n == 0 {
        return Err(Error::domain("number of replications must be positive"));
    }
    let engine = Engine::new(model, sites, cfg);
    let rows: Vec<(Vec<f64>, usize)> = (0..n)
        .into_par_iter()
        .map(|i| engine.replicate(i))
        .collect::<Result<_>>()?;
    let stats = SimStats {
        scheme: cfg.scheme,
        total_points: rows.iter().map(|r| r.1 as u64).sum(),
        max_points_per_replication: rows.iter().map(|r| r.1).max().unwrap_or(0),
        truncated_mass: match (cfg.scheme, cfg.window_margin) {
            (Scheme::Mixture, _) => Some(0.0),
            (Scheme::Window, None) => Some(cfg.tail_mass_tol),
            (Scheme::Window, Some(_)) => None,
        },
    };
    let data = rows.into_iter().flat_map(|r| r.0).collect();
    Ok((Observations::new(sites.len(), data).expect("rows have d values"), stats))
}

struct Engine<'a> {
    kernel: Kernel,
    sampler: Sampler,
    sites: &'a [[f64; 2]],
    dim: usize,
    cfg: SimConfig,
    // window scheme: lower corner, side lengths and area
    lo: [f64; 2],
    side: [f64; 2],
    area: f64,
}

impl<'a> Engine<'a> {
    fn new(model: &KernelModel, sites: &'a SiteSet, cfg: &SimConfig) -> Self {
        let pts = sites.points();
        let dim = model.dim();
        let margin = cfg.window_margin.unwrap_or_else(|| model.tail_radius(cfg.tail_mass_tol));
        let mut lo = [0.0; 2];
        let mut side = [0.0; 2];
        for k in 0..dim {
            let min = pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let max = pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            lo[k] = min - margin;
            side[k] = max - min + 2.0 * margin;
        }
        let area = side[..dim].iter().product();
        Engine {
            kernel: Kernel::new(model),
            sampler: Sampler::new(model),
            sites: pts,
            dim,
            cfg: *cfg,
            lo,
            side,
            area,
        }
    }

    fn replicate(&self, index: usize) -> Result<(Vec<f64>, usize)> {
        let mut rng = replication_rng(self.cfg.seed, index as u64);
        match self.cfg.scheme {
            Scheme::Mixture => self.mixture(&mut rng, index),
            Scheme::Window => self.window(&mut rng, index),
        }
    }

    fn mixture<R: Rng>(&self, rng: &mut R, index: usize) -> Result<(Vec<f64>, usize)> {
        let d = self.sites.len();
        let bound = d as f64;
        let mut z = vec![0.0; d];
        let mut vals = vec![0.0; d];
        let mut gamma = 0.0;
        for used in 0..self.cfg.max_points {
            gamma += <Exp1 as Distribution<f64>>::sample(&Exp1, rng);
            let zmin = z.iter().copied().fold(f64::INFINITY, f64::min);
            if bound / gamma < zmin {
                return Ok((z, used));
            }
            let centre = self.sites[rng.gen_range(0..d)];
            let u = self.sampler.draw(rng);
            let x = [centre[0] + u[0], centre[1] + u[1]];
            let mut g = 0.0;
            for (v, s) in vals.iter_mut().zip(self.sites) {
                *v = self.kernel.eval(x[0] - s[0], x[1] - s[1]);
                g += *v;
            }
            let scale = bound / (gamma * g);
            for (zi, v) in z.iter_mut().zip(&vals) {
                *zi = zi.max(v * scale);
            }
        }
        Err(Error::SimulationBudget {
            replication: index,
            max_points: self.cfg.max_points,
        })
    }

    fn window<R: Rng>(&self, rng: &mut R, index: usize) -> Result<(Vec<f64>, usize)> {
        let d = self.sites.len();
        let peak = self.kernel.peak();
        let mut z = vec![0.0; d];
        let mut gamma = 0.0;
        for used in 0..self.cfg.max_points {
            gamma += <Exp1 as Distribution<f64>>::sample(&Exp1, rng);
            let zmin = z.iter().copied().fold(f64::INFINITY, f64::min);
            if peak * self.area / gamma < zmin {
                return Ok((z, used));
            }
            let mut x = [0.0; 2];
            for (k, xk) in x.iter_mut().enumerate().take(self.dim) {
                *xk = self.lo[k] + self.side[k] * rng.gen::<f64>();
            }
            let scale = self.area / gamma;
            for (zi, s) in z.iter_mut().zip(self.sites) {
                *zi = zi.max(self.kernel.eval(x[0] - s[0], x[1] - s[1]) * scale);
            }
        }
        Err(Error::SimulationBudget {
            replication: index,
            max_points: self.cfg.max_points,
        })
    }
}

/// Maps unit Fréchet values to GEV margins, `μ + σ (z^γ - 1) / γ` per site,
/// with `μ + σ log z` when `γ = 0`.
pub fn transform_to_gev(z: &Observations, gamma: &[f64], mu: &[f64], sigma: &[f64]) -> Result<Observations> {
    let d = z.d();
    for (name, v) in [("gamma", gamma), ("mu", mu), ("sigma", sigma)] {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain(format!("{name} must be finite")));
        }
    }
    if let Some(&s) = sigma.iter().find(|&&s| s <= 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: s,
            reason: "must be positive",
        });
    }
    let mut out = Vec::with_capacity(z.as_slice().len());
    for row in z.rows() {
        for j in 0..d {
            let x = row[j];
            if !(x > 0.0) {
                return Err(Error::domain(format!("value {x} is not positive")));
            }
            out.push(mu[j] + sigma[j] * box_cox(x, gamma[j]));
        }
    }
    Observations::new(d, out)
}

/// `(x^γ - 1) / γ`, continuous at `γ = 0`.
fn box_cox(x: f64, gamma: f64) -> f64 {
    let l = x.ln();
    if gamma == 0.0 {
        l
    } else {
        (gamma * l).exp_m1() / gamma
    }
}
