//! Student kernels on the line and in the plane.
//!
//! Work in kernel units with `a = beta |t|`. For `w1 < w2` put
//! `x = (w1/w2)^(1/m)` with `m` the density exponent. Site 0 dominates outside
//! a ball `D1` centred at `t/(1-x)` and site `t` dominates inside it; the
//! ball seen from site `t` is `D2 = D1 - t`. Both share the squared radius
//! `(x a^2 - c (1-x)^2) / (1-x)^2`, where `c` is the marginal degrees of
//! freedom. Then `V = (1 - P{T in D1})/w1 + P{T in D2}/w2`.

use super::{Shape, EQUAL_WEIGHT_TOL};
use crate::error::Result;
use crate::quadrature::Quadrature;
use crate::special::{student_cdf, student_sf};
use std::f64::consts::PI;

pub(super) fn neg_log_cdf(shape: &Shape, w1: f64, w2: f64) -> Result<f64> {
    let Shape::Student { a, c, m, planar, .. } = *shape else {
        unreachable!()
    };
    // exchangeable in (w1, w2) because the kernel is symmetric
    let (w1, w2) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
    let ln_ratio = (w1 / w2).ln();
    if -ln_ratio <= EQUAL_WEIGHT_TOL {
        return Ok((1.0 / w1 + 1.0 / w2) * student_cdf(0.5 * a, c));
    }
    let omx = -(ln_ratio / m).exp_m1();
    let x = 1.0 - omx;
    let s2 = x * a * a - c * omx * omx;
    if s2 <= 0.0 {
        return Ok(1.0 / w1);
    }
    let s = s2.sqrt();
    let (p1, p2) = if planar {
        let r = s / omx;
        let p1 = disk_prob(c, a / omx, r, (a * a + c * omx) / omx)?;
        let p2 = disk_prob(c, a * x / omx, r, c - x * a * a / omx)?;
        (p1, p2)
    } else {
        // interval endpoints rearranged to avoid cancellation
        let p1 = student_sf((a * a + c * omx) / (a + s), c) - student_sf((a + s) / omx, c);
        let p2 = student_sf((c * omx - x * a * a) / (a * x + s), c) - student_sf((a * x + s) / omx, c);
        (p1, p2)
    };
    Ok((1.0 - p1) / w1 + p2 / w2)
}

/// `χ(s)` on the line, following the four-branch form with the interval
/// probabilities evaluated for `x = s^(-1/m)` on either side of 1.
pub(super) fn chi(shape: &Shape, s: f64) -> f64 {
    let Shape::Student { a, c, m, b1, b2, .. } = *shape else {
        unreachable!()
    };
    let ln_s = s.ln();
    if ln_s.abs() <= EQUAL_WEIGHT_TOL {
        return -2.0 * student_sf(0.5 * a, c);
    }
    if ln_s <= -m * b2.ln() {
        return -s;
    }
    if ln_s > -m * b1.ln() {
        return -1.0;
    }
    if ln_s < 0.0 {
        // x > 1: the interval lies to the left of both sites
        let y = (-ln_s / m).exp_m1();
        let x = 1.0 + y;
        let r = (x * a * a - c * y * y).max(0.0).sqrt();
        let p1 = student_cdf((a * a - c * y) / (r + a), c) - student_sf((a + r) / y, c);
        let p2 = student_sf((x * a * a + c * y) / (r + a * x), c) - student_sf((a * x + r) / y, c);
        s * p1 - s - p2
    } else {
        let omx = -(-ln_s / m).exp_m1();
        let x = 1.0 - omx;
        let r = (x * a * a - c * omx * omx).max(0.0).sqrt();
        let p1 = student_sf((a * a + c * omx) / (a + r), c) - student_sf((a + r) / omx, c);
        let p2 = student_sf((c * omx - x * a * a) / (a * x + r), c) - student_sf((a * x + r) / omx, c);
        -s * p1 - 1.0 + p2
    }
}

/// Probability that the isotropic bivariate t vector with `c` marginal
/// degrees of freedom falls in the disk of radius `r` whose centre is at
/// distance `d` from the origin. `k = d^2 - r^2` is passed in separately
/// because callers can form it without cancellation.
///
/// The angular integral is done exactly: at radius `ρ` the circle meets the
/// disk in an arc of `arccos((ρ² + k) / (2ρd)) / π` of its length. What is
/// left is a one-dimensional integral against the radial law, taken in the
/// radial survival variable `v = (1 + ρ²/c)^(-c/2)`.
pub(crate) fn disk_prob(c: f64, d: f64, r: f64, k: f64) -> Result<f64> {
    let half = 0.5 * c;
    let surv = |rho: f64| (-half * (rho * rho / c).ln_1p()).exp();
    let radius = |v: f64| (c * (-v.ln() / half).exp_m1()).max(0.0).sqrt();
    let frac = |v: f64| {
        let rho = radius(v);
        if rho == 0.0 {
            return if k < 0.0 { 1.0 } else { 0.0 };
        }
        let cos = 0.5 * rho / d + 0.5 * k / (rho * d);
        cos.clamp(-1.0, 1.0).acos() / PI
    };
    let inner = if k < 0.0 {
        // origin inside the disk: full circles up to r - d
        1.0 - surv(-k / (r + d))
    } else {
        0.0
    };
    let lo = k.abs() / (d + r);
    let hi = d + r;
    let (v_hi, v_lo) = (surv(lo), surv(hi));
    if v_hi <= v_lo {
        return Ok(inner);
    }
    let q = Quadrature::with_tol(1e-13, 1e-11);
    let ring = q.integrate(frac, v_lo, v_hi)?.value;
    Ok((inner + ring).clamp(0.0, 1.0))
}
