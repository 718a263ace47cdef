//! Spectral densities of the pair `(Z(0), Z(t))` in the angular coordinate
//! `θ`, with `(w1, w2) = r (cos θ, sin θ)`.

use super::{PairDependence, Shape};
use crate::error::{Error, Result};
use crate::kernels::KernelModel;
use crate::special::normal_pdf;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::FRAC_PI_2;

/// Spectral measure of the double exponential model on the line: a density
/// on an interval plus two atoms at its endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSpectrum {
    a: f64,
}

impl ExpSpectrum {
    /// Density at `θ`; zero outside the support interval.
    pub fn density(&self, theta: f64) -> f64 {
        let (lo, hi) = self.support();
        if theta <= lo || theta >= hi {
            return 0.0;
        }
        0.25 * (-0.5 * self.a).exp() * (theta.sin() * theta.cos()).powf(-1.5)
    }

    /// Open interval carrying the density.
    pub fn support(&self) -> (f64, f64) {
        ((-self.a).exp().atan(), self.a.exp().atan())
    }

    /// Mass of each endpoint atom.
    pub fn atom_mass(&self) -> f64 {
        0.5 * (1.0 + (-2.0 * self.a).exp()).sqrt()
    }

    /// `(θ, mass)` for both atoms.
    pub fn atoms(&self) -> [(f64, f64); 2] {
        let (lo, hi) = self.support();
        [(lo, self.atom_mass()), (hi, self.atom_mass())]
    }
}

/// Spectral density of the normal model on the line; it has no atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalSpectrum {
    a: f64,
}

impl NormalSpectrum {
    pub fn density(&self, theta: f64) -> f64 {
        if theta <= 0.0 || theta >= FRAC_PI_2 {
            return 0.0;
        }
        let a = self.a;
        let (s, c) = theta.sin_cos();
        let l = theta.tan().ln();
        let first = (0.5 - l / (a * a)) * normal_pdf(0.5 * a + l / a) / c;
        let second = (0.5 + l / (a * a)) * normal_pdf(0.5 * a - l / a) / s;
        (first + second) / (a * s * c)
    }
}

fn degenerate_or_wrong(pd: &PairDependence, want: &'static str) -> Result<f64> {
    match (pd.model(), pd.shape()) {
        (_, Shape::Complete) => Err(Error::DegenerateSpectrum),
        (KernelModel::DoubleExp1D { .. }, Shape::Exp1 { a }) if want == "dexp1d" => Ok(a),
        (KernelModel::Normal1D { .. }, Shape::Normal { a }) if want == "normal1d" => Ok(a),
        (m, _) => Err(Error::UnsupportedModel {
            model: m.tag(),
            what: if want == "dexp1d" {
                "closed-form spectral density exists for dexp1d only"
            } else {
                "closed-form spectral density exists for normal1d only"
            },
        }),
    }
}

pub fn spectral_density_exp1d(pd: &PairDependence) -> Result<ExpSpectrum> {
    degenerate_or_wrong(pd, "dexp1d").map(|a| ExpSpectrum { a })
}

pub fn spectral_density_normal1d(pd: &PairDependence) -> Result<NormalSpectrum> {
    degenerate_or_wrong(pd, "normal1d").map(|a| NormalSpectrum { a })
}

/// Spectral density at `θ` from the mixed second derivative of
/// `V = -log P` on the unit circle, `s(θ) = -∂²V/∂w1∂w2`.
///
/// The step is picked from the distance to the nearest branch boundary of
/// `V` and refined twice with Richardson extrapolation.
pub fn numeric_spectral_density(pd: &PairDependence, theta: f64) -> Result<f64> {
    let h = max_step(pd, theta)?;
    let d = |k: f64| mixed_difference(pd, theta, h / k);
    let (d1, d2, d4) = (d(1.0)?, d(2.0)?, d(4.0)?);
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    // one more extrapolation level for the O(h^4) term
    Ok(((16.0 * r2 - r1) / 15.0).max(0.0))
}

/// One Richardson-extrapolated difference with starting step `h`.
pub fn numeric_spectral_density_with_step(pd: &PairDependence, theta: f64, h: f64) -> Result<f64> {
    let hmax = max_step(pd, theta)?;
    if !(h > 0.0 && h <= hmax) {
        return Err(Error::domain(format!("step {h} outside (0, {hmax}]")));
    }
    let d1 = mixed_difference(pd, theta, h)?;
    let d2 = mixed_difference(pd, theta, 0.5 * h)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

fn max_step(pd: &PairDependence, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::domain(format!("angle {theta} outside (0, π/2)")));
    }
    if let Shape::Complete = pd.shape() {
        return Err(Error::DegenerateSpectrum);
    }
    let (s, c) = theta.sin_cos();
    let mut h = 0.02 * s.min(c);
    for ratio in pd.region_boundaries() {
        let gap = (theta - ratio.atan()).abs();
        if gap < 1e-6 {
            return Err(Error::AtomLocation { theta });
        }
        // the stencil spans angles within about sqrt(2) h of theta
        h = h.min(0.3 * gap);
    }
    Ok(h)
}

fn mixed_difference(pd: &PairDependence, theta: f64, h: f64) -> Result<f64> {
    let (w2, w1) = theta.sin_cos();
    let v = |dx: f64, dy: f64| pd.neg_log_cdf(w1 + dx, w2 + dy);
    let num = v(h, h)? - v(h, -h)? - v(-h, h)? + v(-h, -h)?;
    Ok(-num / (4.0 * h * h))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo evaluation of `V(w1, w2)` for the normal model on the line
/// through `E max{1/w1, exp(N βt - β²t²/2)/w2}` with `N` standard normal.
pub fn huisler_reiss_mc_check(pd: &PairDependence, w1: f64, w2: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    let a = match (pd.model(), pd.shape()) {
        (KernelModel::Normal1D { .. }, Shape::Normal { a }) => a,
        (KernelModel::Normal1D { .. }, _) => 0.0,
        (m, _) => {
            return Err(Error::UnsupportedModel {
                model: m.tag(),
                what: "the Gaussian representation applies to normal1d",
            })
        }
    };
    if samples < 10_000 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: samples as f64,
            reason: "must be at least 10000",
        });
    }
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(Error::domain(format!("arguments must be positive, got ({w1}, {w2})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let n: f64 = StandardNormal.sample(&mut rng);
        let y = (1.0 / w1).max((n * a - 0.5 * a * a).exp() / w2);
        sum += y;
        sum2 += y * y;
    }
    let k = samples as f64;
    let mean = sum / k;
    let var = ((sum2 - k * mean * mean) / (k - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / k).sqrt(),
    })
}
