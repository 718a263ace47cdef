//! Plug-in asymptotic variances of the rank estimators.
//!
//! `B` denotes the Gaussian limit of `√k (R̂ - R)` at `x = (1, 1)`. Two
//! candidate constants are carried for the parameter estimators: the plain
//! delta-method one and a four times larger one. The Monte Carlo harness is
//! what tells them apart.

use crate::error::{Error, Result};
use crate::exactdist::PairDependence;
use crate::kernels::KernelModel;
use crate::oracle::r_numeric;
use crate::sites::SiteSet;
use crate::special::normal_pdf;
use serde::{Deserialize, Serialize};

const PARTIAL_STEP: f64 = 1e-6;
const ORACLE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairVariance {
    /// `Var B(1, 1)`.
    pub var_b: f64,
    /// Delta-method variance of `√k (β̂ - β)`, or of `√k (Q̂ - Q)` for the
    /// general normal kernel.
    pub var_delta: f64,
    /// Four times `var_delta`; absent for the general normal kernel where
    /// both constants coincide.
    pub var_four_delta: Option<f64>,
}

/// `Var B(1, 1) = L + L1² + L2² - 2 L1 - 2 L2 + 2 L1 L2 R` with `L` and its
/// partials at `(1, 1)`.
pub fn var_b_from_parts(l: f64, l1: f64, l2: f64, r: f64) -> f64 {
    l + l1 * l1 + l2 * l2 - 2.0 * l1 - 2.0 * l2 + 2.0 * l1 * l2 * r
}

fn var_b(pd: &PairDependence) -> Result<f64> {
    let h = PARTIAL_STEP;
    let l = pd.l(1.0, 1.0)?;
    let l1 = (pd.l(1.0 + h, 1.0)? - pd.l(1.0 - h, 1.0)?) / (2.0 * h);
    let l2 = (pd.l(1.0, 1.0 + h)? - pd.l(1.0, 1.0 - h)?) / (2.0 * h);
    Ok(var_b_from_parts(l, l1, l2, 2.0 - l).max(0.0))
}

/// Variance of the pairwise estimator for one pair at the true model.
pub fn asymptotic_variance_pair(pd: &PairDependence) -> Result<PairVariance> {
    let vb = var_b(pd)?;
    let t = pd.displacement();
    let dist = t.iter().map(|v| v * v).sum::<f64>().sqrt();
    let slope = match *pd.model() {
        KernelModel::GeneralNormal2D { .. } => {
            // Q = (2 u)², u = Φ⁻¹(1 - R/2): dQ/dR = -4 u / φ(u)
            let u = -crate::special::normal_quantile(0.5 * pd.r11());
            let d = 4.0 * u / normal_pdf(u);
            return Ok(PairVariance {
                var_b: vb,
                var_delta: vb * d * d,
                var_four_delta: None,
            });
        }
        KernelModel::Exp2D { beta } => {
            let (a, b) = (t[0].abs(), t[1].abs());
            let (m, s) = (a.min(b), a + b);
            (0.5 * m - 0.5 * s * (1.0 + 0.5 * beta * m)) * (-0.5 * beta * s).exp()
        }
        model => {
            let beta = model.beta().expect("single-scale model");
            -dist * model.marginal_pdf(0.5 * beta * dist)?
        }
    };
    if !(slope.abs() > 0.0) || !slope.is_finite() {
        return Err(Error::domain("the relation between R(1, 1) and beta is flat here"));
    }
    let var_delta = vb / (slope * slope);
    Ok(PairVariance {
        var_b: vb,
        var_delta,
        var_four_delta: Some(4.0 * var_delta),
    })
}

/// `Var` of the limit of `√k (R̂ - R)` for the joint exceedance share of all
/// sites at `x = (1, .., 1)`:
/// `R + Σ R_j² + 2 Σ_{j<m} R_j R_m R_jm - 2 R Σ R_j`, where `R_j` are the
/// partials of the d-site `R` and `R_jm` the pairwise `R(1, 1)`.
pub fn joint_range_variance(model: &KernelModel, sites: &SiteSet) -> Result<f64> {
    let d = sites.len();
    let ones = vec![1.0; d];
    let r = r_numeric(model, sites, &ones)?;
    let mut partial = Vec::with_capacity(d);
    for j in 0..d {
        let mut x = ones.clone();
        x[j] = 1.0 + ORACLE_STEP;
        let up = r_numeric(model, sites, &x)?;
        x[j] = 1.0 - ORACLE_STEP;
        let down = r_numeric(model, sites, &x)?;
        partial.push((up - down) / (2.0 * ORACLE_STEP));
    }
    let mut v = r + partial.iter().map(|p| p * p).sum::<f64>() - 2.0 * r * partial.iter().sum::<f64>();
    for (j, m) in sites.pairs() {
        v += 2.0 * partial[j] * partial[m] * PairDependence::between(*model, sites, j, m)?.r11();
    }
    Ok(v.max(0.0))
}
