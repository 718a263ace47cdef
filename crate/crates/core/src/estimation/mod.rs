//! Rank-based estimation of tail dependence and of the kernel scale.
//!
//! Every estimator starts from `R̂`, the share of the `k` largest values per
//! site that exceed jointly, and inverts a model relation between `R(1, 1)`
//! and the kernel parameters pair by pair.

mod variance;

pub use variance::{asymptotic_variance_pair, joint_range_variance, var_b_from_parts, PairVariance};

use crate::error::{Error, Result};
use crate::exactdist::PairDependence;
use crate::kernels::KernelModel;
use crate::observations::Observations;
use crate::sites::SiteSet;
use crate::special::normal_quantile;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Per-column ranks `1..=n`, ties broken by row order.
#[derive(Debug, Clone)]
pub struct Ranks {
    n: usize,
    /// For each column, row indices sorted by increasing value.
    order: Vec<Vec<u32>>,
}

impl Ranks {
    pub fn new(obs: &Observations) -> Self {
        let n = obs.n();
        let order = (0..obs.d())
            .map(|j| {
                let col = obs.column(j);
                let mut idx: Vec<u32> = (0..n as u32).collect();
                // stable sort keeps row order among equal values
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect();
        Ranks { n, order }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.order.len()
    }

    /// `R̂(x)` over the selected columns: the number of rows lying among the
    /// `[k x_j]` largest values of every selected column `j`, divided by `k`.
    pub fn r_hat(&self, sites: &[usize], x: &[f64], k: usize) -> Result<f64> {
        let n = self.n;
        if k < 1 || k >= n {
            return Err(Error::domain(format!("k = {k} must satisfy 1 <= k < n = {n}")));
        }
        if sites.is_empty() || sites.len() != x.len() {
            return Err(Error::domain("site and weight lists must be nonempty and of equal length"));
        }
        let mut seen = vec![false; self.d()];
        for &j in sites {
            if j >= self.d() {
                return Err(Error::domain(format!("site index {j} out of range")));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::domain(format!("site index {j} repeated")));
            }
        }
        let mut hits = vec![0u16; n];
        for (&j, &xj) in sites.iter().zip(x) {
            if !(xj > 0.0) || !xj.is_finite() {
                return Err(Error::domain(format!("weight {xj} must be positive and finite")));
            }
            let top = (k as f64 * xj).floor();
            if top < 1.0 || top > n as f64 {
                return Err(Error::domain(format!("[k x] = {top} outside 1..={n}")));
            }
            for &row in &self.order[j][n - top as usize..] {
                hits[row as usize] += 1;
            }
        }
        let all = sites.len() as u16;
        let count = hits.iter().filter(|&&h| h == all).count();
        Ok(count as f64 / k as f64)
    }

    fn r11(&self, j: usize, m: usize, k: usize) -> Result<f64> {
        self.r_hat(&[j, m], &[1.0, 1.0], k)
    }
}

/// `R̂` for one set of columns; see [`Ranks::r_hat`].
pub fn r_hat(obs: &Observations, sites: &[usize], x: &[f64], k: usize) -> Result<f64> {
    Ranks::new(obs).r_hat(sites, x, k)
}

/// Which relation is inverted to estimate the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Average of the pairwise inversions of the marginal relation.
    Pairwise,
    /// One inversion of the joint exceedance share over all sites on the line.
    Range,
    /// Pairwise inversion of the product Laplace relation.
    Exp2d,
    /// Least-squares fit of the quadratic form of the general normal kernel.
    GeneralNormal,
}

impl Estimator {
    /// Default estimator for a model family.
    pub fn default_for(model: &KernelModel) -> Self {
        match model {
            KernelModel::Exp2D { .. } => Estimator::Exp2d,
            KernelModel::GeneralNormal2D { .. } => Estimator::GeneralNormal,
            _ => Estimator::Pairwise,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Estimator::Pairwise => "pairwise",
            Estimator::Range => "range",
            Estimator::Exp2d => "exp2d",
            Estimator::GeneralNormal => "general-normal",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pairwise" => Ok(Estimator::Pairwise),
            "range" => Ok(Estimator::Range),
            "exp2d" => Ok(Estimator::Exp2d),
            "general-normal" => Ok(Estimator::GeneralNormal),
            _ => Err(format!("unknown estimator '{s}'")),
        }
    }
}

/// Estimation settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub k: usize,
    /// Upper end of the search interval for `beta`; `None` means
    /// `1e3 / (smallest site distance)`.
    pub beta_max: Option<f64>,
    /// Attach plug-in asymptotic variances to the report.
    pub variances: bool,
}

impl EstimateOptions {
    pub fn new(k: usize) -> Self {
        EstimateOptions {
            k,
            beta_max: None,
            variances: true,
        }
    }
}

/// One site pair in a report. Site indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub j: usize,
    pub m: usize,
    pub distance: f64,
    pub r_hat: f64,
    /// Pairwise parameter estimate; `None` when the pair is flagged
    /// independent (`r_hat = 0`). For the general normal fit this is `Q̂`.
    pub beta_hat_pair: Option<f64>,
    pub independent: bool,
    /// `R(1, 1)` implied by the fitted model.
    pub model_r: Option<f64>,
    /// `r_hat - model_r`.
    pub gap: Option<f64>,
    pub variance: Option<PairVariance>,
}

/// Parameters of the general normal kernel with the least-squares vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralNormalEstimate {
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub a: [f64; 3],
}

/// Joint-statistic variance for the range estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointVariance {
    pub r_hat: f64,
    pub var_b: f64,
    pub var_delta: f64,
    pub var_four_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: Estimator,
    /// Model family with the fitted parameters filled in.
    pub fitted: KernelModel,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub beta_hat: Option<f64>,
    pub general_normal: Option<GeneralNormalEstimate>,
    pub joint: Option<JointVariance>,
    /// Pairs whose estimate hit the upper search bound.
    pub clamped_pairs: usize,
    pub excluded_pairs: usize,
    pub max_abs_gap: Option<f64>,
    pub pairs: Vec<PairEstimate>,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-pair table `j,m,distance,R_hat,beta_hat_pair,gap`.
    pub fn write_pairs_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "j,m,distance,R_hat,beta_hat_pair,gap")?;
        for p in &self.pairs {
            let beta = p.beta_hat_pair.map_or("inf".to_string(), |b| format!("{b:.16e}"));
            let gap = p.gap.map_or("nan".to_string(), |g| format!("{g:.16e}"));
            writeln!(w, "{},{},{:.16e},{:.16e},{},{}", p.j, p.m, p.distance, p.r_hat, beta, gap)?;
        }
        Ok(())
    }
}

fn check_inputs(obs: &Observations, sites: &SiteSet, opts: &EstimateOptions) -> Result<()> {
    if obs.d() != sites.len() {
        return Err(Error::DimensionMismatch {
            expected: sites.len(),
            found: obs.d(),
        });
    }
    if obs.d() < 2 {
        return Err(Error::domain("dependence estimation needs at least two sites"));
    }
    if obs.n() < 2 {
        return Err(Error::domain("at least two replications are required"));
    }
    if opts.k < 1 || opts.k >= obs.n() {
        return Err(Error::domain(format!("k = {} must satisfy 1 <= k < n = {}", opts.k, obs.n())));
    }
    sites.require_distinct()
}

fn beta_max(sites: &SiteSet, opts: &EstimateOptions) -> f64 {
    opts.beta_max.unwrap_or(1e3 / sites.min_distance())
}

/// Inverts `R(1, 1) = 2 (1 - F(β Δ / 2))` for a single-scale model at
/// distance `delta`; `F` is the standardized marginal.
pub fn invert_marginal_relation(model: &KernelModel, delta: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    if !(delta > 0.0) {
        return Err(Error::domain("pair distance must be positive"));
    }
    if r == 0.0 {
        return Err(Error::Independence);
    }
    if r == 1.0 {
        return Ok(0.0);
    }
    // F⁻¹(1 - r/2) = -F⁻¹(r/2) by symmetry, without cancellation
    let u = -model.marginal_quantile(0.5 * r)?;
    Ok(2.0 * u / delta)
}

/// `R(1, 1)` of the product Laplace kernel at gaps `(a, b)`.
pub fn exp2d_r11(beta: f64, a: f64, b: f64) -> f64 {
    (1.0 + 0.5 * beta * a.min(b)) * (-0.5 * beta * (a + b)).exp()
}

/// Solves `exp2d_r11(β, a, b) = r` by bisection on `(0, beta_max]`.
/// Returns the root and whether it was clamped at `beta_max`.
pub fn invert_exp2d_relation(a: f64, b: f64, r: f64, beta_max: f64) -> Result<(f64, bool)> {
    check_r(r)?;
    let (a, b) = (a.abs(), b.abs());
    if a + b == 0.0 {
        return Err(Error::domain("coincident sites have no exp2d relation"));
    }
    if r == 0.0 {
        return Err(Error::Independence);
    }
    if r == 1.0 {
        return Ok((0.0, false));
    }
    if exp2d_r11(beta_max, a, b) >= r {
        return Ok((beta_max, true));
    }
    let (mut lo, mut hi) = (0.0f64, beta_max);
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exp2d_r11(mid, a, b) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), false))
}

fn check_r(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("R(1, 1) = {r} outside [0, 1]")));
    }
    Ok(())
}

/// Least-squares fit of the general normal kernel from pairwise `Q` values,
/// `Q = Δᵀ Σ⁻¹ Δ` with design rows `(Δ1², Δ1 Δ2, Δ2²)`.
pub fn fit_general_normal(displacements: &[[f64; 2]], q: &[f64]) -> Result<GeneralNormalEstimate> {
    if displacements.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: displacements.len(),
            found: q.len(),
        });
    }
    let rows = displacements.len();
    if rows < 3 {
        return Err(Error::DesignDeficiency(format!(
            "{rows} usable pairs; three are needed for the three unknowns"
        )));
    }
    let g = DMatrix::from_fn(rows, 3, |i, c| {
        let [d1, d2] = displacements[i];
        [d1 * d1, d1 * d2, d2 * d2][c]
    });
    let svd = g.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
    if rank < 3 {
        return Err(Error::DesignDeficiency(format!(
            "design matrix has rank {rank} < 3; the pair displacements are collinear or too few distinct directions"
        )));
    }
    let a = svd
        .solve(&DVector::from_column_slice(q), 0.0)
        .map_err(|e| Error::DesignDeficiency(e.to_string()))?;
    let a = [a[0], a[1], a[2]];
    let infeasible = Error::InfeasibleEstimate { a };
    if !(a[0] > 0.0 && a[2] > 0.0) {
        return Err(infeasible);
    }
    let b1sq = a[0] - a[1] * a[1] / (4.0 * a[2]);
    let b2sq = a[2] - a[1] * a[1] / (4.0 * a[0]);
    if !(b1sq > 0.0 && b2sq > 0.0) {
        return Err(infeasible);
    }
    Ok(GeneralNormalEstimate {
        beta1: b1sq.sqrt(),
        beta2: b2sq.sqrt(),
        rho: -a[1] / (2.0 * (a[0] * a[2]).sqrt()),
        a,
    })
}

/// `Q = (2 Φ⁻¹(1 - r/2))²` for the general normal fit.
pub fn q_from_r(r: f64) -> Result<f64> {
    check_r(r)?;
    if r == 0.0 {
        return Err(Error::Independence);
    }
    if r == 1.0 {
        return Ok(0.0);
    }
    let u = -normal_quantile(0.5 * r);
    Ok(4.0 * u * u)
}

fn pair_skeleton(sites: &SiteSet, ranks: &Ranks, k: usize) -> Result<Vec<PairEstimate>> {
    sites
        .pairs()
        .map(|(j, m)| {
            let r = ranks.r11(j, m, k)?;
            Ok(PairEstimate {
                j: j + 1,
                m: m + 1,
                distance: sites.distance(j, m),
                r_hat: r,
                beta_hat_pair: None,
                independent: r == 0.0,
                model_r: None,
                gap: None,
                variance: None,
            })
        })
        .collect()
}

fn mean_of_pairs(pairs: &[PairEstimate]) -> Result<f64> {
    let used: Vec<f64> = pairs.iter().filter_map(|p| p.beta_hat_pair).collect();
    if used.is_empty() {
        return Err(Error::EstimationFailure(
            "every site pair has zero joint exceedances".to_string(),
        ));
    }
    Ok(used.iter().sum::<f64>() / used.len() as f64)
}

/// Averaged pairwise estimator for the single-scale models other than the
/// product Laplace kernel.
pub fn beta_hat_pairwise(
    obs: &Observations,
    sites: &SiteSet,
    model: &KernelModel,
    opts: &EstimateOptions,
) -> Result<EstimateReport> {
    check_inputs(obs, sites, opts)?;
    check_model(model, sites)?;
    if matches!(model, KernelModel::Exp2D { .. } | KernelModel::GeneralNormal2D { .. }) {
        return Err(Error::UnsupportedModel {
            model: model.tag(),
            what: "the pairwise marginal inversion; use the exp2d or general-normal estimator",
        });
    }
    let ranks = Ranks::new(obs);
    let mut pairs = pair_skeleton(sites, &ranks, opts.k)?;
    for p in pairs.iter_mut().filter(|p| !p.independent) {
        p.beta_hat_pair = Some(invert_marginal_relation(model, p.distance, p.r_hat)?);
    }
    let beta = mean_of_pairs(&pairs)?;
    finish(Estimator::Pairwise, model.with_beta(beta), obs, sites, opts, pairs, 0, None)
}

/// Single-statistic estimator for sites on the line, based on the joint
/// exceedance share of all sites and the site range.
pub fn beta_hat_range(
    obs: &Observations,
    sites: &SiteSet,
    model: &KernelModel,
    opts: &EstimateOptions,
) -> Result<EstimateReport> {
    check_inputs(obs, sites, opts)?;
    check_model(model, sites)?;
    if model.dim() != 1 {
        return Err(Error::UnsupportedModel {
            model: model.tag(),
            what: "the range estimator needs sites on the line",
        });
    }
    let ranks = Ranks::new(obs);
    let all: Vec<usize> = (0..obs.d()).collect();
    let joint = ranks.r_hat(&all, &vec![1.0; all.len()], opts.k)?;
    if joint == 0.0 {
        return Err(Error::Independence);
    }
    let range = sites.range()?;
    let beta = invert_marginal_relation(model, range, joint)?;
    let fitted = model.with_beta(beta);
    let mut pairs = pair_skeleton(sites, &ranks, opts.k)?;
    for p in pairs.iter_mut().filter(|p| !p.independent) {
        p.beta_hat_pair = Some(invert_marginal_relation(model, p.distance, p.r_hat)?);
    }
    let joint_var = if opts.variances && beta > 0.0 {
        let var_b = joint_range_variance(&fitted, sites)?;
        let u = 0.5 * beta * range;
        let slope = range * fitted.marginal_pdf(u)?;
        let var_delta = var_b / (slope * slope);
        Some(JointVariance {
            r_hat: joint,
            var_b,
            var_delta,
            var_four_delta: 4.0 * var_delta,
        })
    } else {
        None
    };
    finish(Estimator::Range, fitted, obs, sites, opts, pairs, 0, joint_var)
}

/// Averaged pairwise estimator for the product Laplace kernel.
pub fn beta_hat_exp2d(obs: &Observations, sites: &SiteSet, opts: &EstimateOptions) -> Result<EstimateReport> {
    check_inputs(obs, sites, opts)?;
    if sites.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: sites.dim(),
        });
    }
    let bmax = beta_max(sites, opts);
    let ranks = Ranks::new(obs);
    let mut pairs = pair_skeleton(sites, &ranks, opts.k)?;
    let mut clamped = 0;
    for p in pairs.iter_mut().filter(|p| !p.independent) {
        let t = sites.displacement(p.j - 1, p.m - 1);
        let (b, hit) = invert_exp2d_relation(t[0], t[1], p.r_hat, bmax)?;
        clamped += hit as usize;
        p.beta_hat_pair = Some(b);
    }
    let beta = mean_of_pairs(&pairs)?;
    let fitted = KernelModel::Exp2D { beta };
    finish(Estimator::Exp2d, fitted, obs, sites, opts, pairs, clamped, None)
}

/// Least-squares fit of `(β1, β2, ρ)` for the general normal kernel.
pub fn general_normal_fit(obs: &Observations, sites: &SiteSet, opts: &EstimateOptions) -> Result<EstimateReport> {
    check_inputs(obs, sites, opts)?;
    if sites.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: sites.dim(),
        });
    }
    let ranks = Ranks::new(obs);
    let mut pairs = pair_skeleton(sites, &ranks, opts.k)?;
    let mut disp = Vec::new();
    let mut q = Vec::new();
    for p in pairs.iter_mut().filter(|p| !p.independent) {
        let t = sites.displacement(p.j - 1, p.m - 1);
        let qj = q_from_r(p.r_hat)?;
        p.beta_hat_pair = Some(qj);
        disp.push([t[0], t[1]]);
        q.push(qj);
    }
    let fit = fit_general_normal(&disp, &q)?;
    let fitted = KernelModel::gnormal2d(fit.beta1, fit.beta2, fit.rho).map_err(|_| Error::InfeasibleEstimate { a: fit.a })?;
    let mut report = finish(Estimator::GeneralNormal, fitted, obs, sites, opts, pairs, 0, None)?;
    report.beta_hat = None;
    report.general_normal = Some(fit);
    Ok(report)
}

/// Runs `estimator` for `model` with the given options.
pub fn estimate(
    obs: &Observations,
    sites: &SiteSet,
    model: &KernelModel,
    estimator: Estimator,
    opts: &EstimateOptions,
) -> Result<EstimateReport> {
    check_model(model, sites)?;
    match estimator {
        Estimator::Pairwise => beta_hat_pairwise(obs, sites, model, opts),
        Estimator::Range => beta_hat_range(obs, sites, model, opts),
        Estimator::Exp2d => beta_hat_exp2d(obs, sites, opts),
        Estimator::GeneralNormal => general_normal_fit(obs, sites, opts),
    }
}

fn check_model(model: &KernelModel, sites: &SiteSet) -> Result<()> {
    if model.dim() != sites.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: sites.dim(),
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn finish(
    estimator: Estimator,
    fitted: KernelModel,
    obs: &Observations,
    sites: &SiteSet,
    opts: &EstimateOptions,
    mut pairs: Vec<PairEstimate>,
    clamped: usize,
    joint: Option<JointVariance>,
) -> Result<EstimateReport> {
    let excluded = pairs.iter().filter(|p| p.independent).count();
    let mut max_gap: Option<f64> = None;
    // β̂ = 0 is complete dependence, which no kernel represents
    let complete = fitted.beta() == Some(0.0);
    for p in pairs.iter_mut() {
        if complete {
            p.model_r = Some(1.0);
            p.gap = Some(p.r_hat - 1.0);
            max_gap = Some(max_gap.unwrap_or(0.0).max(1.0 - p.r_hat));
            continue;
        }
        let pd = PairDependence::between(fitted, sites, p.j - 1, p.m - 1)?;
        let r = pd.r11();
        p.model_r = Some(r);
        p.gap = Some(p.r_hat - r);
        max_gap = Some(max_gap.unwrap_or(0.0).max((p.r_hat - r).abs()));
        if opts.variances {
            p.variance = asymptotic_variance_pair(&pd).ok();
        }
    }
    Ok(EstimateReport {
        estimator,
        fitted,
        n: obs.n(),
        d: obs.d(),
        k: opts.k,
        beta_hat: fitted.beta(),
        general_normal: None,
        joint,
        clamped_pairs: clamped,
        excluded_pairs: excluded,
        max_abs_gap: max_gap,
        pairs,
    })
}

/// Model-implied against empirical `R(1, 1)` for every pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub pairs: Vec<DiagnosticRow>,
    pub max_abs_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub j: usize,
    pub m: usize,
    pub distance: f64,
    pub r_hat: f64,
    pub model_r: f64,
    pub gap: f64,
}

/// Compares `R̂(1, 1)` with `R(1, 1)` of `fitted` for every pair of sites.
pub fn model_diagnostic(obs: &Observations, sites: &SiteSet, fitted: &KernelModel, k: usize) -> Result<Diagnostic> {
    check_inputs(obs, sites, &EstimateOptions::new(k))?;
    check_model(fitted, sites)?;
    let ranks = Ranks::new(obs);
    let mut rows = Vec::new();
    let mut max_gap: f64 = 0.0;
    for (j, m) in sites.pairs() {
        let r_hat = ranks.r11(j, m, k)?;
        let model_r = PairDependence::between(*fitted, sites, j, m)?.r11();
        let gap = r_hat - model_r;
        max_gap = max_gap.max(gap.abs());
        rows.push(DiagnosticRow {
            j: j + 1,
            m: m + 1,
            distance: sites.distance(j, m),
            r_hat,
            model_r,
            gap,
        });
    }
    Ok(Diagnostic {
        pairs: rows,
        max_abs_gap: max_gap,
    })
}
