//! Closed-form bivariate distributions of the moving-maximum process.
//!
//! Everything is expressed through `V(w1, w2) = -log P{Z(0) <= w1, Z(t) <= w2}`
//! for unit Fréchet margins. The tail dependence functions follow as
//! `L(x1, x2) = V(1/x1, 1/x2)` and `R = x1 + x2 - L`.

mod spectral;
mod student;

pub use spectral::{
    huisler_reiss_mc_check, numeric_spectral_density, numeric_spectral_density_with_step, spectral_density_exp1d,
    spectral_density_normal1d, ExpSpectrum, McEstimate, NormalSpectrum,
};

use crate::error::{Error, Result};
use crate::kernels::KernelModel;
use crate::sites::SiteSet;
use crate::special::{normal_cdf, normal_sf, student_sf};

/// Relative gap below which `w1` and `w2` are treated as equal by the
/// Student models.
pub(crate) const EQUAL_WEIGHT_TOL: f64 = 1e-12;

/// A model together with the displacement between two sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDependence {
    model: KernelModel,
    displacement: [f64; 2],
    shape: Shape,
}

/// Standardized geometry of the pair, with region boundaries precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Shape {
    Complete,
    /// Normal kernels; `a` is the distance in kernel units.
    Normal { a: f64 },
    Exp1 { a: f64 },
    /// Product Laplace kernel; `a`, `b` are the scaled coordinate gaps.
    Exp2 { a: f64, b: f64 },
    /// Student kernels with marginal degrees of freedom `c` and exponent `m`
    /// of the density; `b1 < 1 < b2` bound the mixed region.
    Student { a: f64, c: f64, m: f64, planar: bool, b1: f64, b2: f64 },
}

impl PairDependence {
    /// `t` must have the model's dimension.
    pub fn new(model: KernelModel, t: &[f64]) -> Result<Self> {
        model.validate()?;
        if t.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: t.len(),
            });
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("displacement must be finite"));
        }
        let d = if t.len() == 1 { [t[0], 0.0] } else { [t[0], t[1]] };
        let dist = d[0].hypot(d[1]);
        let shape = if dist == 0.0 {
            Shape::Complete
        } else {
            match model {
                KernelModel::Normal1D { beta } | KernelModel::Normal2D { beta } => Shape::Normal { a: beta * dist },
                KernelModel::GeneralNormal2D { beta1, beta2, rho } => {
                    // Mahalanobis length of t under the kernel covariance
                    let (u, v) = (beta1 * d[0], beta2 * d[1]);
                    let q = (u * u - 2.0 * rho * u * v + v * v) / (1.0 - rho * rho);
                    Shape::Normal { a: q.sqrt() }
                }
                KernelModel::DoubleExp1D { beta } => Shape::Exp1 { a: beta * dist },
                KernelModel::Exp2D { beta } => Shape::Exp2 {
                    a: beta * d[0].abs(),
                    b: beta * d[1].abs(),
                },
                KernelModel::StudentT1D { beta, nu } => {
                    let nu = nu as f64;
                    student_shape(beta * dist, nu, 0.5 * (nu + 1.0), false)
                }
                KernelModel::StudentT2D { beta, alpha } => {
                    student_shape(beta * dist, 2.0 * (alpha - 1.0), alpha, true)
                }
            }
        };
        Ok(PairDependence {
            model,
            displacement: d,
            shape,
        })
    }

    /// The pair formed by sites `j` and `m` of `sites`.
    pub fn between(model: KernelModel, sites: &SiteSet, j: usize, m: usize) -> Result<Self> {
        if sites.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: sites.dim(),
            });
        }
        Self::new(model, &sites.displacement(j, m))
    }

    pub fn model(&self) -> &KernelModel {
        &self.model
    }

    pub fn displacement(&self) -> &[f64] {
        &self.displacement[..self.model.dim()]
    }

    pub(crate) fn shape(&self) -> Shape {
        self.shape
    }

    /// The pair `(b1, b2)` of the Student models, `None` otherwise.
    pub fn student_bounds(&self) -> Option<(f64, f64)> {
        match self.shape {
            Shape::Student { b1, b2, .. } => Some((b1, b2)),
            _ => None,
        }
    }

    /// Values of `w2 / w1` at which the piecewise formula changes branch,
    /// in increasing order. Empty for smooth models.
    pub fn region_boundaries(&self) -> Vec<f64> {
        match self.shape {
            Shape::Complete | Shape::Normal { .. } => vec![],
            Shape::Exp1 { a } => vec![(-a).exp(), a.exp()],
            Shape::Exp2 { a, b } => {
                let (s, g) = (a + b, (a - b).abs());
                let mut v = vec![(-s).exp(), (-g).exp(), g.exp(), s.exp()];
                v.dedup();
                v
            }
            Shape::Student { m, b1, b2, .. } => vec![b2.powf(-m), b1.powf(-m)],
        }
    }

    /// `-log P{Z(0) <= w1, Z(t) <= w2}`.
    pub fn neg_log_cdf(&self, w1: f64, w2: f64) -> Result<f64> {
        if !(w1 > 0.0) || !(w2 > 0.0) {
            return Err(Error::domain(format!("arguments must be positive, got ({w1}, {w2})")));
        }
        if w1.is_infinite() || w2.is_infinite() {
            return Ok(1.0 / w1 + 1.0 / w2);
        }
        let v = match self.shape {
            Shape::Complete => (1.0 / w1).max(1.0 / w2),
            Shape::Normal { a } => {
                let l = (w2 / w1).ln() / a;
                normal_cdf(0.5 * a + l) / w1 + normal_cdf(0.5 * a - l) / w2
            }
            Shape::Exp1 { a } => {
                let l = (w2 / w1).ln();
                if l < -a {
                    1.0 / w2
                } else if l >= a {
                    1.0 / w1
                } else {
                    1.0 / w1 + 1.0 / w2 - (-0.5 * a).exp() / (w1 * w2).sqrt()
                }
            }
            Shape::Exp2 { a, b } => exp2_neg_log_cdf(a, b, w1, w2),
            Shape::Student { .. } => student::neg_log_cdf(&self.shape, w1, w2)?,
        };
        // the closed forms respect the Fréchet bounds up to rounding
        Ok(v.clamp((1.0 / w1).max(1.0 / w2), 1.0 / w1 + 1.0 / w2))
    }

    /// Stable tail dependence function `L(x1, x2)`.
    pub fn l(&self, x1: f64, x2: f64) -> Result<f64> {
        check_tail_args(x1, x2)?;
        if x1 == 0.0 {
            return Ok(x2);
        }
        if x2 == 0.0 {
            return Ok(x1);
        }
        self.neg_log_cdf(1.0 / x1, 1.0 / x2)
    }

    /// `R(x1, x2) = x1 + x2 - L(x1, x2)`.
    pub fn r(&self, x1: f64, x2: f64) -> Result<f64> {
        let l = self.l(x1, x2)?;
        Ok((x1 + x2 - l).max(0.0))
    }

    /// The tail dependence coefficient `R(1, 1)`.
    pub fn r11(&self) -> f64 {
        match self.shape {
            Shape::Complete => 1.0,
            Shape::Normal { a } => 2.0 * normal_sf(0.5 * a),
            Shape::Exp1 { a } => (-0.5 * a).exp(),
            Shape::Exp2 { a, b } => (1.0 + 0.5 * a.min(b)) * (-0.5 * (a + b)).exp(),
            Shape::Student { a, c, .. } => 2.0 * student_sf(0.5 * a, c),
        }
    }

    /// Dependence function `χ(s)` of the one-dimensional models, defined by
    /// `V(w1, w2) = 1/w1 + 1/w2 + χ(w2/w1)/w2`.
    pub fn chi(&self, s: f64) -> Result<f64> {
        if self.model.dim() != 1 {
            return Err(Error::UnsupportedModel {
                model: self.model.tag(),
                what: "the dependence function is defined for models on the line",
            });
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("chi argument must be positive, got {s}")));
        }
        Ok(match self.shape {
            Shape::Complete => -(s.min(1.0)),
            Shape::Normal { a } => {
                let l = s.ln() / a;
                -s * normal_cdf(-0.5 * a - l) - normal_cdf(-0.5 * a + l)
            }
            Shape::Exp1 { a } => {
                if s <= (-a).exp() {
                    -s
                } else if s <= a.exp() {
                    -(-0.5 * a).exp() * s.sqrt()
                } else {
                    -1.0
                }
            }
            Shape::Student { .. } => student::chi(&self.shape, s),
            Shape::Exp2 { .. } => unreachable!(),
        })
    }
}

fn student_shape(a: f64, c: f64, m: f64, planar: bool) -> Shape {
    let h = a * a / (2.0 * c);
    let g = a / c.sqrt() * (1.0 + 0.5 * h).sqrt();
    // b1 * b2 = 1; take b1 from the reciprocal to avoid cancellation
    let b2 = 1.0 + h + g;
    Shape::Student {
        a,
        c,
        m,
        planar,
        b1: 1.0 / b2,
        b2,
    }
}

fn check_tail_args(x1: f64, x2: f64) -> Result<()> {
    if !(x1 >= 0.0 && x2 >= 0.0) || !x1.is_finite() || !x2.is_finite() {
        return Err(Error::domain(format!("arguments must be nonnegative and finite, got ({x1}, {x2})")));
    }
    if x1 + x2 == 0.0 {
        return Err(Error::domain("both arguments are zero"));
    }
    Ok(())
}

/// Five-region formula for the product Laplace kernel; `a`, `b` are the
/// scaled absolute coordinate gaps.
fn exp2_neg_log_cdf(a: f64, b: f64, w1: f64, w2: f64) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    let s = a + b;
    let l = (w1 / w2).ln();
    let joint = |bracket: f64| 1.0 / w1 + 1.0 / w2 - (-0.5 * s).exp() / (w1 * w2).sqrt() * bracket;
    if l < -s {
        1.0 / w1
    } else if l < lo - hi {
        joint(1.0 + 0.25 * s + 0.25 * l)
    } else if l < hi - lo {
        joint(1.0 + 0.5 * lo)
    } else if l < s {
        joint(1.0 + 0.25 * s - 0.25 * l)
    } else {
        1.0 / w2
    }
}

/// `R_{t_1..t_d}(1, .., 1)` for a model on the line: twice the marginal tail
/// at half the scaled site range.
pub fn r_multi_ones(model: &KernelModel, sites: &SiteSet) -> Result<f64> {
    model.validate()?;
    if model.dim() != 1 || sites.dim() != 1 {
        return Err(Error::UnsupportedModel {
            model: model.tag(),
            what: "the range identity holds for models on the line",
        });
    }
    if sites.len() < 2 {
        return Err(Error::domain("at least two sites are required"));
    }
    let beta = model.beta().expect("one-dimensional models have a scalar beta");
    let half = 0.5 * beta * sites.range()?;
    Ok(2.0 * model.marginal_sf(half)?)
}
