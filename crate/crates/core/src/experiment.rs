//! Repeated simulate-then-estimate runs for checking the sampling behaviour
//! of the estimators.

use crate::error::{Error, Result};
use crate::estimation::{self, asymptotic_variance_pair, joint_range_variance, EstimateOptions, Estimator};
use crate::exactdist::PairDependence;
use crate::kernels::KernelModel;
use crate::simulator::{simulate, SimConfig};
use crate::sites::SiteSet;
use crate::stats::{anderson_darling_normal, mean, variance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    /// True model; must have a scalar `beta`.
    pub model: KernelModel,
    pub sites: SiteSet,
    pub n: usize,
    pub k: usize,
    pub runs: usize,
    /// Run `i` simulates with seed `seed ^ i`.
    pub seed: u64,
    pub estimator: Estimator,
    pub sim: SimConfig,
    pub beta_max: Option<f64>,
}

/// One simulate-then-estimate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub run: usize,
    pub seed: u64,
    pub beta_hat: Option<f64>,
    /// `√k (β̂ - β)`.
    pub scaled_error: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub model: KernelModel,
    pub estimator: Estimator,
    pub n: usize,
    pub k: usize,
    pub runs: usize,
    pub failures: usize,
    pub beta: f64,
    /// Moments of `√k (β̂ - β)` over the successful runs.
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub ad_statistic: Option<f64>,
    pub ad_p_value: Option<f64>,
    pub ad_rejects_1pct: Option<bool>,
    /// Delta-method prediction of the variance, when one applies.
    pub var_delta: Option<f64>,
    /// Four times `var_delta`.
    pub var_four_delta: Option<f64>,
    pub ratio_to_delta: Option<f64>,
    pub ratio_to_four_delta: Option<f64>,
    /// Candidates whose ratio lies in `[0.5, 2]`.
    pub matching: Vec<String>,
    /// `√k (β_k - β)`, where `β_k` inverts the exact joint exceedance
    /// probability at level `k/n` instead of its limit. This is the bias the
    /// estimator has at a finite threshold.
    pub threshold_bias: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McOutcome {
    pub rows: Vec<McRow>,
    pub summary: McSummary,
}

impl McOutcome {
    /// Per-run table `run,seed,beta_hat,scaled_error,error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "run,seed,beta_hat,scaled_error,error")?;
        let num = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
        for r in &self.rows {
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            writeln!(w, "{},{},{},{},{}", r.run, r.seed, num(r.beta_hat), num(r.scaled_error), err)?;
        }
        Ok(())
    }
}

impl McConfig {
    fn validate(&self) -> Result<f64> {
        self.model.validate()?;
        let beta = self.model.beta().ok_or(Error::UnsupportedModel {
            model: self.model.tag(),
            what: "the Monte Carlo harness tracks a scalar beta",
        })?;
        if self.runs == 0 {
            return Err(Error::domain("at least one run is required"));
        }
        if self.k < 1 || self.k >= self.n {
            return Err(Error::domain(format!("k = {} must satisfy 1 <= k < n = {}", self.k, self.n)));
        }
        self.sim.validate()?;
        Ok(beta)
    }
}

/// Runs the experiment. Failed runs are recorded, not fatal.
pub fn run(cfg: &McConfig) -> Result<McOutcome> {
    let beta = cfg.validate()?;
    let opts = EstimateOptions {
        k: cfg.k,
        beta_max: cfg.beta_max,
        variances: false,
    };
    let root_k = (cfg.k as f64).sqrt();
    let rows: Vec<McRow> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let seed = cfg.seed ^ run as u64;
            let sim = SimConfig { seed, ..cfg.sim };
            let fit = simulate(&cfg.model, &cfg.sites, cfg.n, &sim)
                .and_then(|z| estimation::estimate(&z, &cfg.sites, &cfg.model, cfg.estimator, &opts));
            match fit.map(|r| r.beta_hat) {
                Ok(Some(b)) => McRow {
                    run,
                    seed,
                    beta_hat: Some(b),
                    scaled_error: Some(root_k * (b - beta)),
                    error: None,
                },
                Ok(None) => McRow {
                    run,
                    seed,
                    beta_hat: None,
                    scaled_error: None,
                    error: Some("estimator returned no scalar beta".into()),
                },
                Err(e) => McRow {
                    run,
                    seed,
                    beta_hat: None,
                    scaled_error: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let errors: Vec<f64> = rows.iter().filter_map(|r| r.scaled_error).collect();
    let (var_delta, var_four_delta) = predicted_variance(cfg)?;
    let m = (!errors.is_empty()).then(|| mean(&errors));
    let v = (errors.len() >= 2).then(|| variance(&errors));
    let ad = (errors.len() >= 8).then(|| anderson_darling_normal(&errors));
    let ratio = |p: Option<f64>| v.zip(p).map(|(v, p)| v / p);
    let (rd, rp) = (ratio(var_delta), ratio(var_four_delta));
    let mut matching = Vec::new();
    for (name, r) in [("delta", rd), ("four-delta", rp)] {
        if r.is_some_and(|r| (0.5..=2.0).contains(&r)) {
            matching.push(name.to_string());
        }
    }
    let summary = McSummary {
        model: cfg.model,
        estimator: cfg.estimator,
        n: cfg.n,
        k: cfg.k,
        runs: cfg.runs,
        failures: cfg.runs - errors.len(),
        beta,
        mean: m,
        variance: v,
        ad_statistic: ad.map(|t| t.statistic),
        ad_p_value: ad.map(|t| t.p_value),
        ad_rejects_1pct: ad.map(|t| t.rejects_at_1pct()),
        var_delta,
        var_four_delta,
        ratio_to_delta: rd,
        ratio_to_four_delta: rp,
        matching,
        threshold_bias: threshold_bias(cfg, beta).map(|b| b * root_k),
    };
    Ok(McOutcome { rows, summary })
}

/// Asymptotic variance candidates for `√k (β̂ - β)`. The averaged pairwise
/// estimators only have one when a single pair is involved.
fn predicted_variance(cfg: &McConfig) -> Result<(Option<f64>, Option<f64>)> {
    let single_pair = cfg.sites.len() == 2;
    match cfg.estimator {
        Estimator::Pairwise | Estimator::Exp2d if single_pair => {
            let pd = PairDependence::between(cfg.model, &cfg.sites, 0, 1)?;
            let v = asymptotic_variance_pair(&pd)?;
            Ok((Some(v.var_delta), v.var_four_delta))
        }
        Estimator::Range => {
            let beta = cfg.model.beta().expect("validated");
            let range = cfg.sites.range()?;
            let vb = joint_range_variance(&cfg.model, &cfg.sites)?;
            let slope = range * cfg.model.marginal_pdf(0.5 * beta * range)?;
            let vd = vb / (slope * slope);
            Ok((Some(vd), Some(4.0 * vd)))
        }
        _ => Ok((None, None)),
    }
}

/// `β_k - β` for a single pair: the value the inversion returns when fed the
/// exact joint exceedance probability at marginal level `p = k/n`, divided
/// by `p`, instead of the limit `R(1, 1)`.
fn threshold_bias(cfg: &McConfig, beta: f64) -> Option<f64> {
    if cfg.sites.len() != 2 || !matches!(cfg.estimator, Estimator::Pairwise | Estimator::Range) {
        return None;
    }
    let pd = PairDependence::between(cfg.model, &cfg.sites, 0, 1).ok()?;
    let p = cfg.k as f64 / cfg.n as f64;
    // unit Fréchet level u with P(Z > u) = p
    let u = -1.0 / (-p).ln_1p();
    let v = pd.neg_log_cdf(u, u).ok()?;
    // P(Z1 > u, Z2 > u) = 1 - 2 e^{-1/u} + e^{-V(u, u)}
    let joint = 1.0 - 2.0 * (-1.0 / u).exp() + (-v).exp();
    let r_k = joint / p;
    let delta = cfg.sites.distance(0, 1);
    let b = estimation::invert_marginal_relation(&cfg.model, delta, r_k.min(1.0)).ok()?;
    Some(b - beta)
}
