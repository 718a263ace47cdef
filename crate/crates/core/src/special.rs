//! Distribution functions for the standardized kernel marginals.
//!
//! `erfc` and `lgamma` come from `libm`, the regularized incomplete beta and
//! the starting guess for Φ⁻¹ from `statrs`. Tail-accurate survival functions
//! and safeguarded quantile inversion are layered on top here.

use libm::erfc;
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF Φ.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(x) without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Φ⁻¹(p) for p in (0, 1), polished with Newton steps.
pub fn normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..2 {
        let d = normal_pdf(x);
        if d == 0.0 || !x.is_finite() {
            break;
        }
        // residual taken on the smaller tail
        let step = if x > 0.0 {
            ((1.0 - p) - normal_sf(x)) / d
        } else {
            (normal_cdf(x) - p) / d
        };
        x -= step;
    }
    x
}

/// Standard Laplace CDF, density e^{-|x|}/2.
pub fn laplace_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * x.exp()
    } else {
        1.0 - 0.5 * (-x).exp()
    }
}

pub fn laplace_sf(x: f64) -> f64 {
    laplace_cdf(-x)
}

pub fn laplace_quantile(p: f64) -> f64 {
    if p < 0.5 {
        (2.0 * p).ln()
    } else {
        -(2.0 * (1.0 - p)).ln()
    }
}

/// Student-t density with `nu` (possibly non-integer) degrees of freedom.
pub fn student_pdf(x: f64, nu: f64) -> f64 {
    let ln_c = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
    (ln_c - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp()
}

/// Student-t CDF.
pub fn student_cdf(x: f64, nu: f64) -> f64 {
    if x > 0.0 {
        1.0 - student_sf(x, nu)
    } else {
        student_sf(-x, nu)
    }
}

/// Upper tail P{T > x}, accurate far into the tail.
pub fn student_sf(x: f64, nu: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    if x.is_infinite() {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    let x2 = x * x;
    let half = if x2 < nu {
        // central region: the complementary form keeps relative accuracy near 1/2
        0.5 - 0.5 * beta_reg(0.5, 0.5 * nu, x2 / (nu + x2))
    } else {
        0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x2))
    };
    if x > 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// Student-t quantile by safeguarded Newton iteration.
pub fn student_quantile(p: f64, nu: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if nu == 1.0 {
        return (PI * (p - 0.5)).tan();
    }
    if nu == 2.0 {
        let a = 4.0 * p * (1.0 - p);
        return 2.0 * (p - 0.5) * (2.0 / a).sqrt();
    }
    // solve on the upper half and reflect
    let (q, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    let start = -normal_quantile(q);
    let x = invert_decreasing(|x| student_sf(x, nu), |x| -student_pdf(x, nu), q, start.max(0.0));
    sign * x
}

/// Finds x ≥ 0 with `sf(x) = target` for a strictly decreasing tail function,
/// mixing Newton steps with bisection on a maintained bracket.
pub(crate) fn invert_decreasing<S, D>(sf: S, dsf: D, target: f64, start: f64) -> f64
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut lo = 0.0;
    let mut hi = start.max(1.0);
    while sf(hi) > target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut x = start.clamp(lo, hi);
    for _ in 0..200 {
        let f = sf(x) - target;
        if f == 0.0 {
            return x;
        }
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dsf(x);
        let mut next = if d != 0.0 { x - f / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return next;
        }
        x = next;
    }
    x
}
