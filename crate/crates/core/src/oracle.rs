//! Brute-force evaluation of the d-site tail functions by quadrature.
//!
//! `L(x) = ∫ max_i x_i φ(s - t_i) ds` and `R(x) = ∫ min_i x_i φ(s - t_i) ds`,
//! over the line or the plane. Nothing here uses the closed forms, so these
//! integrals serve as an independent reference for them.

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelModel};
use crate::quadrature::Quadrature;
use crate::sites::SiteSet;
use std::cell::Cell;

const OUTER_TOL: f64 = 1e-11;
const INNER_TOL: f64 = 1e-13;

#[derive(Clone, Copy, PartialEq)]
enum Extreme {
    Max,
    Min,
}

/// `L_{t_1..t_d}(x_1, .., x_d)`; zero weights drop their site.
pub fn l_numeric(model: &KernelModel, sites: &SiteSet, x: &[f64]) -> Result<f64> {
    check(model, sites, x)?;
    if x.iter().sum::<f64>() == 0.0 {
        return Err(Error::domain("all weights are zero"));
    }
    integrate(model, sites, x, Extreme::Max)
}

/// `R_{t_1..t_d}(x_1, .., x_d)` as the integral of the pointwise minimum.
pub fn r_numeric(model: &KernelModel, sites: &SiteSet, x: &[f64]) -> Result<f64> {
    check(model, sites, x)?;
    if x.contains(&0.0) {
        return Err(Error::domain("all weights must be positive"));
    }
    integrate(model, sites, x, Extreme::Min)
}

/// `2 ∫_{range/2}^∞ φ(s) ds` for a kernel on the line, integrated directly.
pub fn r_numeric_range(model: &KernelModel, sites: &SiteSet) -> Result<f64> {
    model.validate()?;
    if model.dim() != 1 || sites.dim() != 1 {
        return Err(Error::UnsupportedModel {
            model: model.tag(),
            what: "the range identity holds on the line",
        });
    }
    let k = Kernel::new(model);
    let half = 0.5 * sites.range()?;
    let q = Quadrature::with_tol(INNER_TOL, INNER_TOL);
    Ok(2.0 * q.integrate(|s| k.eval(s, 0.0), half, f64::INFINITY)?.value)
}

fn check(model: &KernelModel, sites: &SiteSet, x: &[f64]) -> Result<()> {
    model.validate()?;
    if sites.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: sites.dim(),
        });
    }
    if x.len() != sites.len() {
        return Err(Error::DimensionMismatch {
            expected: sites.len(),
            found: x.len(),
        });
    }
    if x.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain("weights must be nonnegative and finite"));
    }
    Ok(())
}

/// Sorted distinct values with infinite ends, for use as panel breaks.
fn breaks(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mut b = Vec::with_capacity(v.len() + 2);
    b.push(f64::NEG_INFINITY);
    b.extend(v);
    b.push(f64::INFINITY);
    b
}

fn integrate(model: &KernelModel, sites: &SiteSet, x: &[f64], how: Extreme) -> Result<f64> {
    let k = Kernel::new(model);
    let active: Vec<([f64; 2], f64)> = sites
        .points()
        .iter()
        .zip(x)
        .filter(|(_, &w)| w > 0.0)
        .map(|(p, &w)| (*p, w))
        .collect();
    let pick = |s1: f64, s2: f64| {
        let vals = active.iter().map(|(p, w)| w * k.eval(s1 - p[0], s2 - p[1]));
        match how {
            Extreme::Max => vals.fold(0.0, f64::max),
            Extreme::Min => vals.fold(f64::INFINITY, f64::min),
        }
    };
    let xb = breaks(active.iter().map(|(p, _)| p[0]).collect());
    if model.dim() == 1 {
        let q = Quadrature::with_tol(OUTER_TOL, OUTER_TOL);
        return Ok(q.integrate_pieces(|s| pick(s, 0.0), &xb)?.value);
    }
    let yb = breaks(active.iter().map(|(p, _)| p[1]).collect());
    let inner_q = Quadrature::with_tol(INNER_TOL, INNER_TOL);
    let failure = Cell::new(None);
    let inner = |s2: f64| match inner_q.integrate_pieces(|s1| pick(s1, s2), &xb) {
        Ok(v) => v.value,
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let outer = Quadrature::with_tol(OUTER_TOL, OUTER_TOL).integrate_pieces(inner, &yb)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(outer.value)
}
