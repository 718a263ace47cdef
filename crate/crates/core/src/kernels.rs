//! The unimodal kernel densities driving the moving-maximum construction.
//!
//! Every family is parameterized by an inverse length scale: the kernel with
//! parameter `beta` is `beta^dim * phi0(beta * u)` where `phi0` is the
//! standardized form. The general normal kernel carries two scales and a
//! correlation instead.

use crate::error::{Error, Result};
use crate::special::{self, ln_gamma};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One of the seven kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum KernelModel {
    /// Normal density on the line.
    #[serde(rename = "normal1d")]
    Normal1D { beta: f64 },
    /// Double exponential (Laplace) density on the line.
    #[serde(rename = "dexp1d")]
    DoubleExp1D { beta: f64 },
    /// Student-t density on the line with integer degrees of freedom.
    #[serde(rename = "t1d")]
    StudentT1D { beta: f64, nu: u32 },
    /// Isotropic normal density in the plane.
    #[serde(rename = "normal2d")]
    Normal2D { beta: f64 },
    /// Product of two Laplace densities in the plane.
    #[serde(rename = "exp2d")]
    Exp2D { beta: f64 },
    /// Isotropic bivariate t density, polynomial tail exponent `alpha > 1`.
    #[serde(rename = "t2d")]
    StudentT2D { beta: f64, alpha: f64 },
    /// Bivariate normal with inverse scales `beta1`, `beta2` and correlation `rho`.
    #[serde(rename = "gnormal2d")]
    GeneralNormal2D { beta1: f64, beta2: f64, rho: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

impl KernelModel {
    pub fn normal1d(beta: f64) -> Result<Self> {
        Self::Normal1D { beta }.validated()
    }

    pub fn dexp1d(beta: f64) -> Result<Self> {
        Self::DoubleExp1D { beta }.validated()
    }

    pub fn t1d(beta: f64, nu: u32) -> Result<Self> {
        Self::StudentT1D { beta, nu }.validated()
    }

    pub fn normal2d(beta: f64) -> Result<Self> {
        Self::Normal2D { beta }.validated()
    }

    pub fn exp2d(beta: f64) -> Result<Self> {
        Self::Exp2D { beta }.validated()
    }

    pub fn t2d(beta: f64, alpha: f64) -> Result<Self> {
        Self::StudentT2D { beta, alpha }.validated()
    }

    pub fn gnormal2d(beta1: f64, beta2: f64, rho: f64) -> Result<Self> {
        Self::GeneralNormal2D { beta1, beta2, rho }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter domain of the family.
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelModel::Normal1D { beta }
            | KernelModel::DoubleExp1D { beta }
            | KernelModel::Normal2D { beta }
            | KernelModel::Exp2D { beta } => positive("beta", beta),
            KernelModel::StudentT1D { beta, nu } => {
                positive("beta", beta)?;
                if nu == 0 {
                    return Err(Error::InvalidParameter {
                        name: "nu",
                        value: 0.0,
                        reason: "must be a positive integer",
                    });
                }
                Ok(())
            }
            KernelModel::StudentT2D { beta, alpha } => {
                positive("beta", beta)?;
                if !(alpha > 1.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "alpha",
                        value: alpha,
                        reason: "must exceed 1",
                    });
                }
                Ok(())
            }
            KernelModel::GeneralNormal2D { beta1, beta2, rho } => {
                positive("beta1", beta1)?;
                positive("beta2", beta2)?;
                if !(rho > -1.0 && rho < 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "rho",
                        value: rho,
                        reason: "must lie in (-1, 1)",
                    });
                }
                Ok(())
            }
        }
    }

    /// Short tag used in config files and reports.
    pub fn tag(&self) -> &'static str {
        match self {
            KernelModel::Normal1D { .. } => "normal1d",
            KernelModel::DoubleExp1D { .. } => "dexp1d",
            KernelModel::StudentT1D { .. } => "t1d",
            KernelModel::Normal2D { .. } => "normal2d",
            KernelModel::Exp2D { .. } => "exp2d",
            KernelModel::StudentT2D { .. } => "t2d",
            KernelModel::GeneralNormal2D { .. } => "gnormal2d",
        }
    }

    /// Spatial dimension, 1 or 2.
    pub fn dim(&self) -> usize {
        match self {
            KernelModel::Normal1D { .. } | KernelModel::DoubleExp1D { .. } | KernelModel::StudentT1D { .. } => 1,
            _ => 2,
        }
    }

    /// The single dependence parameter, absent for the general normal model.
    pub fn beta(&self) -> Option<f64> {
        match *self {
            KernelModel::Normal1D { beta }
            | KernelModel::DoubleExp1D { beta }
            | KernelModel::StudentT1D { beta, .. }
            | KernelModel::Normal2D { beta }
            | KernelModel::Exp2D { beta }
            | KernelModel::StudentT2D { beta, .. } => Some(beta),
            KernelModel::GeneralNormal2D { .. } => None,
        }
    }

    /// Same family and shape parameters with a different `beta`.
    ///
    /// The general normal model is returned unchanged.
    pub fn with_beta(&self, beta: f64) -> Self {
        let mut m = *self;
        match &mut m {
            KernelModel::Normal1D { beta: b }
            | KernelModel::DoubleExp1D { beta: b }
            | KernelModel::StudentT1D { beta: b, .. }
            | KernelModel::Normal2D { beta: b }
            | KernelModel::Exp2D { beta: b }
            | KernelModel::StudentT2D { beta: b, .. } => *b = beta,
            KernelModel::GeneralNormal2D { .. } => {}
        }
        m
    }

    /// Kernel density at `u` (length must equal [`dim`](Self::dim)).
    pub fn density(&self, u: &[f64]) -> Result<f64> {
        self.validate()?;
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        let k = Kernel::new(self);
        Ok(if u.len() == 1 { k.eval(u[0], 0.0) } else { k.eval(u[0], u[1]) })
    }

    fn no_scalar_marginal(&self) -> Result<()> {
        if let KernelModel::GeneralNormal2D { .. } = self {
            Err(Error::UnsupportedModel {
                model: "gnormal2d",
                what: "no common scalar marginal",
            })
        } else {
            Ok(())
        }
    }

    fn marginal_dof(&self) -> f64 {
        match *self {
            KernelModel::StudentT1D { nu, .. } => nu as f64,
            KernelModel::StudentT2D { alpha, .. } => 2.0 * (alpha - 1.0),
            _ => f64::NAN,
        }
    }

    /// CDF of the one-dimensional marginal of the standardized kernel (β = 1).
    ///
    /// Normal kernels give Φ, the exponential kernels a standard Laplace, the
    /// t-models a Student-t with `nu` resp. `2(alpha - 1)` degrees of freedom.
    pub fn marginal_cdf(&self, u: f64) -> Result<f64> {
        self.no_scalar_marginal()?;
        Ok(match self {
            KernelModel::Normal1D { .. } | KernelModel::Normal2D { .. } => special::normal_cdf(u),
            KernelModel::DoubleExp1D { .. } | KernelModel::Exp2D { .. } => special::laplace_cdf(u),
            _ => special::student_cdf(u, self.marginal_dof()),
        })
    }

    /// Upper tail `1 - F(u)` of the standardized marginal.
    pub fn marginal_sf(&self, u: f64) -> Result<f64> {
        self.marginal_cdf(-u)
    }

    /// Density of the standardized marginal, `F'(u)`.
    pub fn marginal_pdf(&self, u: f64) -> Result<f64> {
        self.no_scalar_marginal()?;
        Ok(match self {
            KernelModel::Normal1D { .. } | KernelModel::Normal2D { .. } => special::normal_pdf(u),
            KernelModel::DoubleExp1D { .. } | KernelModel::Exp2D { .. } => 0.5 * (-u.abs()).exp(),
            _ => special::student_pdf(u, self.marginal_dof()),
        })
    }

    /// Quantile `F⁻¹(p)` of the standardized marginal.
    pub fn marginal_quantile(&self, p: f64) -> Result<f64> {
        self.no_scalar_marginal()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("probability {p} outside (0, 1)")));
        }
        Ok(match self {
            KernelModel::Normal1D { .. } | KernelModel::Normal2D { .. } => special::normal_quantile(p),
            KernelModel::DoubleExp1D { .. } | KernelModel::Exp2D { .. } => special::laplace_quantile(p),
            _ => special::student_quantile(p, self.marginal_dof()),
        })
    }

    /// Half-width `r` such that the kernel puts less than `tol` mass outside
    /// `[-r, r]^dim`.
    pub fn tail_radius(&self, tol: f64) -> f64 {
        let (scale, dim) = match *self {
            KernelModel::GeneralNormal2D { beta1, beta2, .. } => {
                // coordinate marginals are N(0, 1/beta_i^2)
                let r = -special::normal_quantile(tol / 16.0);
                return r / beta1.min(beta2);
            }
            _ => (self.beta().unwrap(), self.dim() as f64),
        };
        // union bound over coordinates and both signs
        let q = tol / (4.0 * dim);
        let z = match self {
            KernelModel::Normal1D { .. } | KernelModel::Normal2D { .. } => -special::normal_quantile(q),
            KernelModel::DoubleExp1D { .. } | KernelModel::Exp2D { .. } => -special::laplace_quantile(q),
            _ => -special::student_quantile(q, self.marginal_dof()),
        };
        z / scale
    }

    /// Draws one point from the kernel density.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        Sampler::new(self).draw(rng)
    }
}

/// Kernel with its normalizing constants evaluated once, for hot loops.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    family: Family,
    scale: f64,
    norm: f64,
    // t-models: exponent and dof scale; general normal: quadratic form entries
    p1: f64,
    p2: f64,
    p3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    Normal1,
    Laplace1,
    Student1,
    Normal2,
    Laplace2,
    Student2,
    GenNormal2,
}

impl Kernel {
    pub(crate) fn new(model: &KernelModel) -> Self {
        let zero = Kernel {
            family: Family::Normal1,
            scale: 0.0,
            norm: 0.0,
            p1: 0.0,
            p2: 0.0,
            p3: 0.0,
        };
        match *model {
            KernelModel::Normal1D { beta } => Kernel {
                family: Family::Normal1,
                scale: beta,
                norm: beta / (2.0 * PI).sqrt(),
                ..zero
            },
            KernelModel::DoubleExp1D { beta } => Kernel {
                family: Family::Laplace1,
                scale: beta,
                norm: 0.5 * beta,
                ..zero
            },
            KernelModel::StudentT1D { beta, nu } => {
                let nu = nu as f64;
                let ln_c = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (PI * nu).ln();
                Kernel {
                    family: Family::Student1,
                    scale: beta,
                    norm: beta * ln_c.exp(),
                    p1: 0.5 * (nu + 1.0),
                    p2: nu,
                    ..zero
                }
            }
            KernelModel::Normal2D { beta } => Kernel {
                family: Family::Normal2,
                scale: beta,
                norm: beta * beta / (2.0 * PI),
                ..zero
            },
            KernelModel::Exp2D { beta } => Kernel {
                family: Family::Laplace2,
                scale: beta,
                norm: 0.25 * beta * beta,
                ..zero
            },
            KernelModel::StudentT2D { beta, alpha } => Kernel {
                family: Family::Student2,
                scale: beta,
                norm: beta * beta / (2.0 * PI),
                p1: alpha,
                p2: 2.0 * (alpha - 1.0),
                ..zero
            },
            KernelModel::GeneralNormal2D { beta1, beta2, rho } => {
                let s = 1.0 - rho * rho;
                Kernel {
                    family: Family::GenNormal2,
                    scale: 1.0,
                    norm: beta1 * beta2 / (2.0 * PI * s.sqrt()),
                    p1: beta1 * beta1 / s,
                    p2: -2.0 * rho * beta1 * beta2 / s,
                    p3: beta2 * beta2 / s,
                }
            }
        }
    }

    /// Density at (x, y); y is ignored for one-dimensional kernels.
    #[inline]
    pub(crate) fn eval(&self, x: f64, y: f64) -> f64 {
        let b = self.scale;
        match self.family {
            Family::Normal1 => self.norm * (-0.5 * b * b * x * x).exp(),
            Family::Laplace1 => self.norm * (-b * x.abs()).exp(),
            Family::Student1 => self.norm * (-self.p1 * (b * b * x * x / self.p2).ln_1p()).exp(),
            Family::Normal2 => self.norm * (-0.5 * b * b * (x * x + y * y)).exp(),
            Family::Laplace2 => self.norm * (-b * (x.abs() + y.abs())).exp(),
            Family::Student2 => self.norm * (-self.p1 * (b * b * (x * x + y * y) / self.p2).ln_1p()).exp(),
            Family::GenNormal2 => self.norm * (-0.5 * (self.p1 * x * x + self.p2 * x * y + self.p3 * y * y)).exp(),
        }
    }

    /// Density at the mode.
    pub(crate) fn peak(&self) -> f64 {
        self.norm
    }
}

/// Pre-built random variate generators for one kernel.
#[derive(Debug, Clone)]
pub(crate) struct Sampler {
    model: KernelModel,
    student: Option<StudentT<f64>>,
    chi2: Option<ChiSquared<f64>>,
}

impl Sampler {
    pub(crate) fn new(model: &KernelModel) -> Self {
        let (student, chi2) = match *model {
            KernelModel::StudentT1D { nu, .. } => (Some(StudentT::new(nu as f64).expect("nu > 0")), None),
            KernelModel::StudentT2D { alpha, .. } => (None, Some(ChiSquared::new(2.0 * (alpha - 1.0)).expect("alpha > 1"))),
            _ => (None, None),
        };
        Sampler {
            model: *model,
            student,
            chi2,
        }
    }

    #[inline]
    fn laplace<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        if rng.gen::<bool>() {
            e
        } else {
            -e
        }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match self.model {
            KernelModel::Normal1D { beta } => {
                let z: f64 = StandardNormal.sample(rng);
                [z / beta, 0.0]
            }
            KernelModel::DoubleExp1D { beta } => [Self::laplace(rng) / beta, 0.0],
            KernelModel::StudentT1D { beta, .. } => [self.student.as_ref().unwrap().sample(rng) / beta, 0.0],
            KernelModel::Normal2D { beta } => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                [z1 / beta, z2 / beta]
            }
            KernelModel::Exp2D { beta } => [Self::laplace(rng) / beta, Self::laplace(rng) / beta],
            KernelModel::StudentT2D { beta, alpha } => {
                let dof = 2.0 * (alpha - 1.0);
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                let v = self.chi2.as_ref().unwrap().sample(rng);
                let s = (dof / v).sqrt() / beta;
                [z1 * s, z2 * s]
            }
            KernelModel::GeneralNormal2D { beta1, beta2, rho } => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                [z1 / beta1, (rho * z1 + (1.0 - rho * rho).sqrt() * z2) / beta2]
            }
        }
    }
}
