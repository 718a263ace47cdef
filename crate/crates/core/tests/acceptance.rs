//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach the
//! terminal. Lines tagged `info` report checks outside the numbered list.
//! A failing criterion is reported, not hidden; set `ACCEPTANCE_STRICT=1` to
//! also turn it into a nonzero exit status.

use maxstable::estimation::{
    self, fit_general_normal, invert_exp2d_relation, invert_marginal_relation, q_from_r, EstimateOptions, Estimator,
};
use maxstable::exactdist::{
    numeric_spectral_density, r_multi_ones, spectral_density_exp1d, spectral_density_normal1d, PairDependence,
};
use maxstable::experiment::{self, McConfig};
use maxstable::oracle::{l_numeric, r_numeric};
use maxstable::quadrature::Quadrature;
use maxstable::stats::{ks_critical_value, ks_statistic};
use maxstable::{simulate, KernelModel, Observations, SimConfig, SiteSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

// pinned tolerances and sizes
const ORACLE_TOL: f64 = 1e-6;
const REDUCTION_TOL: f64 = 1e-10;
const SPECTRAL_RECON_TOL: f64 = 1e-6;
const SPECTRAL_NUMERIC_TOL: f64 = 1e-5;
// (1 + β/2) e^{-β} at β = 1, unit offsets on both axes
const EXP2D_R11: f64 = 1.5 * 0.36787944117144233;
const EXP2D_R11_TOL: f64 = 1e-7;
const COINCIDENT_TOL: f64 = 1e-9;
const SIM_N: usize = 10_000;
const KS_LEVEL: f64 = 0.01;
const BINOMIAL_SIGMAS: f64 = 3.0;
const EST_N: usize = 20_000;
const EST_K: usize = 500;
const CONSISTENCY_RUNS: usize = 100;
const CONSISTENCY_REL_ERR: f64 = 0.15;
const CONSISTENCY_MIN_PASS: usize = 90;
const GNORMAL_ABS_ERR: f64 = 0.2;
const GNORMAL_MIN_PASS: usize = 85;
const NORMALITY_RUNS: usize = 500;
const VARIANCE_BRACKET: (f64, f64) = (0.5, 2.0);
const RECOVERY_TOL: f64 = 1e-10;
const MC_MEAN_BOUND: f64 = 0.15;

type Criterion = fn(&mut Suite);

struct Suite {
    failed: Vec<String>,
}

impl Suite {
    fn record(&mut self, id: &str, title: &str, pass: bool, detail: String, started: Instant) {
        let secs = started.elapsed().as_secs_f64();
        println!("{} [{id}] {title}: {detail} ({secs:.1}s)", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }

    fn info(&self, id: &str, title: &str, pass: bool, detail: String) {
        println!("{} [{id}] (info) {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn pair_sites(t: &[f64]) -> SiteSet {
    if t.len() == 1 {
        SiteSet::new_1d(&[0.0, t[0]]).unwrap()
    } else {
        SiteSet::new_2d(&[[0.0, 0.0], [t[0], t[1]]]).unwrap()
    }
}

const BETAS: [f64; 5] = [0.3, 0.7, 1.0, 1.8, 3.0];
const W_GRID: [f64; 7] = [0.2, 0.4, 0.7, 1.0, 1.6, 3.0, 6.0];

fn family(name: &str, beta: f64) -> KernelModel {
    match name {
        "normal1d" => KernelModel::normal1d(beta),
        "dexp1d" => KernelModel::dexp1d(beta),
        "t1d" => KernelModel::t1d(beta, 3),
        "normal2d" => KernelModel::normal2d(beta),
        "exp2d" => KernelModel::exp2d(beta),
        "t2d" => KernelModel::t2d(beta, 2.5),
        "gnormal2d" => KernelModel::gnormal2d(beta, 1.5 * beta, 0.4),
        _ => unreachable!(),
    }
    .unwrap()
}

fn criterion_1(s: &mut Suite) {
    let start = Instant::now();
    let line: [[f64; 1]; 5] = [[0.25], [-0.8], [1.5], [2.5], [4.0]];
    let plane: [[f64; 2]; 5] = [[0.3, 0.1], [0.8, -0.5], [-1.2, 0.4], [1.5, 1.5], [0.0, 2.2]];
    let mut worst: (f64, String) = (0.0, String::new());
    let mut points = 0;
    for name in ["normal1d", "dexp1d", "t1d", "normal2d", "exp2d", "t2d", "gnormal2d"] {
        for &beta in &BETAS {
            let model = family(name, beta);
            let ts: Vec<&[f64]> = if model.dim() == 1 {
                line.iter().map(|t| &t[..]).collect()
            } else {
                plane.iter().map(|t| &t[..]).collect()
            };
            for t in ts {
                let pd = PairDependence::new(model, t).unwrap();
                let sites = pair_sites(t);
                for &w1 in &W_GRID {
                    for &w2 in &W_GRID {
                        let closed = pd.neg_log_cdf(w1, w2).unwrap();
                        let numeric = l_numeric(&model, &sites, &[1.0 / w1, 1.0 / w2]).unwrap();
                        let diff = (closed - numeric).abs();
                        points += 1;
                        if diff > worst.0 {
                            worst = (diff, format!("{name} beta={beta} t={t:?} w=({w1},{w2})"));
                        }
                    }
                }
            }
        }
    }
    s.record(
        "1",
        "closed form vs oracle quadrature",
        worst.0 < ORACLE_TOL,
        format!("max |diff| = {:.2e} over {points} points, at {} (tol {ORACLE_TOL:e})", worst.0, worst.1),
        start,
    );
}

fn criterion_2(s: &mut Suite) {
    let start = Instant::now();
    let grid = [0.3, 0.8, 1.0, 2.0, 5.0];
    let mut worst: f64 = 0.0;
    for &beta in &[0.5, 1.0, 2.0] {
        for &d in &[0.4, 1.0, 2.5] {
            let e2 = PairDependence::new(KernelModel::exp2d(beta).unwrap(), &[d, 0.0]).unwrap();
            let e2y = PairDependence::new(KernelModel::exp2d(beta).unwrap(), &[0.0, -d]).unwrap();
            let e1 = PairDependence::new(KernelModel::dexp1d(beta).unwrap(), &[d]).unwrap();
            let n_a = PairDependence::new(KernelModel::normal2d(beta).unwrap(), &[d, 0.0]).unwrap();
            let (c, sn) = (0.6 * d, 0.8 * d);
            let n_b = PairDependence::new(KernelModel::normal2d(beta).unwrap(), &[c, -sn]).unwrap();
            let n1 = PairDependence::new(KernelModel::normal1d(beta).unwrap(), &[d]).unwrap();
            let g = PairDependence::new(KernelModel::gnormal2d(beta, beta, 0.0).unwrap(), &[c, -sn]).unwrap();
            for &w1 in &grid {
                for &w2 in &grid {
                    let v = |p: &PairDependence| p.neg_log_cdf(w1, w2).unwrap();
                    for (a, b) in [(&e2, &e1), (&e2y, &e1), (&n_a, &n_b), (&n_b, &n1), (&g, &n_b)] {
                        worst = worst.max((v(a) - v(b)).abs());
                    }
                }
            }
        }
    }
    s.record(
        "2",
        "reduction identities (exp2d on an axis, normal2d radial, gnormal isotropic)",
        worst < REDUCTION_TOL,
        format!("max |diff| = {worst:.2e} (tol {REDUCTION_TOL:e})"),
        start,
    );
}

fn criterion_3(s: &mut Suite) {
    let start = Instant::now();
    let configs = [
        (0.5, 1.0),
        (1.0, 0.5),
        (1.0, 2.0),
        (2.0, 1.0),
        (0.3, 4.0),
        (1.5, 1.5),
        (0.8, 3.0),
        (3.0, 0.2),
        (1.0, 5.0),
        (0.2, 0.6),
    ];
    let q = Quadrature::default();
    let ws = [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)];
    let mut recon: f64 = 0.0;
    let mut numeric: f64 = 0.0;
    for &(beta, t) in &configs {
        let pe = PairDependence::new(KernelModel::dexp1d(beta).unwrap(), &[t]).unwrap();
        let pn = PairDependence::new(KernelModel::normal1d(beta).unwrap(), &[t]).unwrap();
        let se = spectral_density_exp1d(&pe).unwrap();
        let sn = spectral_density_normal1d(&pn).unwrap();
        for &(w1, w2) in &ws {
            let weight = |th: f64| (th.cos() / w1).max(th.sin() / w2);
            let (lo, hi) = se.support();
            let mut v = q.integrate(|th| weight(th) * se.density(th), lo, hi).unwrap().value;
            v += se.atoms().iter().map(|&(th, m)| m * weight(th)).sum::<f64>();
            recon = recon.max((v - pe.neg_log_cdf(w1, w2).unwrap()).abs());
            // Integrate in y = log tan θ, which spreads both the peak at π/4 and
            // the tails. θ near π/2 is not representable finely enough, so the
            // upper half uses the reflection θ -> π/2 - θ that swaps the sites.
            let y_kink = (w2 / w1).ln();
            let mut breaks = [f64::NEG_INFINITY, y_kink.min(0.0), y_kink.max(0.0), f64::INFINITY];
            breaks.sort_by(f64::total_cmp);
            let v = q
                .integrate_pieces(
                    |y| {
                        let th = (-y.abs()).exp().atan();
                        let (sin, cos) = if y <= 0.0 { th.sin_cos() } else { (th.cos(), th.sin()) };
                        (cos / w1).max(sin / w2) * sn.density(th) / (2.0 * y.cosh())
                    },
                    &breaks,
                )
                .unwrap()
                .value;
            recon = recon.max((v - pn.neg_log_cdf(w1, w2).unwrap()).abs());
        }
        let (lo, hi) = se.support();
        for f in [0.2, 0.5, 0.8] {
            let th = lo + f * (hi - lo);
            numeric = numeric.max((numeric_spectral_density(&pe, th).unwrap() - se.density(th)).abs());
            let th = f * FRAC_PI_2;
            numeric = numeric.max((numeric_spectral_density(&pn, th).unwrap() - sn.density(th)).abs());
        }
    }
    s.record(
        "3",
        "spectral reconstruction and numeric spectral density",
        recon < SPECTRAL_RECON_TOL && numeric < SPECTRAL_NUMERIC_TOL,
        format!(
            "reconstruction max |diff| = {recon:.2e} (tol {SPECTRAL_RECON_TOL:e}), numeric density max |diff| = {numeric:.2e} (tol {SPECTRAL_NUMERIC_TOL:e})"
        ),
        start,
    );
}

fn criterion_4(s: &mut Suite) {
    let start = Instant::now();
    let m = KernelModel::exp2d(1.0).unwrap();
    let r = r_numeric(&m, &pair_sites(&[1.0, 1.0]), &[1.0, 1.0]).unwrap();
    let same = r_numeric(&m, &SiteSet::new_2d(&[[0.0, 0.0], [0.0, 0.0]]).unwrap(), &[1.0, 1.0]).unwrap();
    let closed = PairDependence::new(m, &[1.0, 1.0]).unwrap().r11();
    let pass = (r - EXP2D_R11).abs() < EXP2D_R11_TOL && (same - 1.0).abs() < COINCIDENT_TOL && (closed - r).abs() < EXP2D_R11_TOL;
    s.record(
        "4",
        "exp2d R(1,1) factor arbitration by quadrature",
        pass,
        format!("oracle R = {r:.12} vs {EXP2D_R11:.12} (tol {EXP2D_R11_TOL:e}), closed form {closed:.12}, coincident sites R = {same:.12}"),
        start,
    );
}

fn criterion_5(s: &mut Suite) {
    let start = Instant::now();
    let ws = [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5), (1.5, 3.0), (0.7, 0.7)];
    let crit = ks_critical_value(SIM_N, KS_LEVEL);
    let mut ks_fail = Vec::new();
    let mut cdf_fail = Vec::new();
    let mut worst_ks: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut seed = 500;
    for name in ["normal1d", "dexp1d", "exp2d", "normal2d"] {
        for &beta in &[0.5, 1.0, 2.0] {
            let model = family(name, beta);
            let t: Vec<f64> = if model.dim() == 1 { vec![1.0] } else { vec![0.8, 0.6] };
            let sites = pair_sites(&t);
            seed += 1;
            let z = simulate(&model, &sites, SIM_N, &SimConfig::with_seed(seed)).unwrap();
            for j in 0..2 {
                let d = ks_statistic(&z.column(j), |x| (-1.0 / x).exp());
                worst_ks = worst_ks.max(d / crit);
                if d >= crit {
                    ks_fail.push(format!("{name} beta={beta} site {}", j + 1));
                }
            }
            let pd = PairDependence::new(model, &t).unwrap();
            for &(w1, w2) in &ws {
                let p = (-pd.neg_log_cdf(w1, w2).unwrap()).exp();
                let hits = z.rows().filter(|r| r[0] <= w1 && r[1] <= w2).count();
                let phat = hits as f64 / SIM_N as f64;
                let zscore = (phat - p).abs() / (p * (1.0 - p) / SIM_N as f64).sqrt();
                worst_z = worst_z.max(zscore);
                if zscore > BINOMIAL_SIGMAS {
                    cdf_fail.push(format!("{name} beta={beta} w=({w1},{w2}) z={zscore:.2}"));
                }
            }
        }
    }
    s.record(
        "5",
        "simulated margins (KS) and joint CDF (binomial sigmas)",
        ks_fail.is_empty() && cdf_fail.is_empty(),
        format!(
            "24 KS tests, max D/crit = {worst_ks:.3}, failures {ks_fail:?}; 60 CDF checks, max |z| = {worst_z:.2}, failures {cdf_fail:?}"
        ),
        start,
    );
}

struct ConsistencyCase {
    label: &'static str,
    model: &'static str,
    estimator: Estimator,
    sites: SiteSet,
}

fn criterion_6(s: &mut Suite) {
    let start = Instant::now();
    let line = SiteSet::new_1d(&[0.0, 1.0, 2.0]).unwrap();
    let tri = SiteSet::new_2d(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
    let cases = [
        ConsistencyCase { label: "pairwise/dexp1d", model: "dexp1d", estimator: Estimator::Pairwise, sites: line.clone() },
        ConsistencyCase { label: "pairwise/normal1d", model: "normal1d", estimator: Estimator::Pairwise, sites: line.clone() },
        ConsistencyCase { label: "pairwise/t1d", model: "t1d", estimator: Estimator::Pairwise, sites: line.clone() },
        ConsistencyCase { label: "range/dexp1d", model: "dexp1d", estimator: Estimator::Range, sites: line.clone() },
        ConsistencyCase { label: "range/normal1d", model: "normal1d", estimator: Estimator::Range, sites: line.clone() },
        ConsistencyCase { label: "pairwise/normal2d", model: "normal2d", estimator: Estimator::Pairwise, sites: tri.clone() },
        ConsistencyCase { label: "pairwise/t2d", model: "t2d", estimator: Estimator::Pairwise, sites: tri.clone() },
        ConsistencyCase { label: "exp2d", model: "exp2d", estimator: Estimator::Exp2d, sites: tri.clone() },
    ];
    let opts = EstimateOptions {
        k: EST_K,
        beta_max: None,
        variances: false,
    };
    let mut all_pass = true;
    let mut rows = Vec::new();
    for case in &cases {
        for &beta in &[0.5, 1.0, 2.0] {
            let model = family(case.model, beta);
            let good = (0..CONSISTENCY_RUNS)
                .filter(|&run| {
                    let z = simulate(&model, &case.sites, EST_N, &SimConfig::with_seed(60_000 + run as u64)).unwrap();
                    estimation::estimate(&z, &case.sites, &model, case.estimator, &opts)
                        .ok()
                        .and_then(|r| r.beta_hat)
                        .is_some_and(|b| ((b - beta) / beta).abs() < CONSISTENCY_REL_ERR)
                })
                .count();
            all_pass &= good >= CONSISTENCY_MIN_PASS;
            rows.push(format!("{}@{beta}:{good}", case.label));
        }
    }
    // general normal kernel on a five-site design
    let design = SiteSet::new_2d(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, -0.6]]).unwrap();
    let truth = KernelModel::gnormal2d(1.0, 2.0, 0.5).unwrap();
    let good = (0..CONSISTENCY_RUNS)
        .filter(|&run| {
            let z = simulate(&truth, &design, EST_N, &SimConfig::with_seed(70_000 + run as u64)).unwrap();
            estimation::general_normal_fit(&z, &design, &opts)
                .ok()
                .and_then(|r| r.general_normal)
                .is_some_and(|f| {
                    (f.beta1 - 1.0).abs() < GNORMAL_ABS_ERR
                        && (f.beta2 - 2.0).abs() < GNORMAL_ABS_ERR
                        && (f.rho - 0.5).abs() < GNORMAL_ABS_ERR
                })
        })
        .count();
    all_pass &= good >= GNORMAL_MIN_PASS;
    s.record(
        "6",
        "estimator consistency, n=20000 k=500, 100 runs per cell",
        all_pass,
        format!(
            "runs within {:.0}% of beta (need {CONSISTENCY_MIN_PASS}): {}; general normal within {GNORMAL_ABS_ERR} (need {GNORMAL_MIN_PASS}): {good}",
            CONSISTENCY_REL_ERR * 100.0,
            rows.join(" ")
        ),
        start,
    );
}

fn mc(model: KernelModel, sites: SiteSet, estimator: Estimator, seed: u64) -> experiment::McOutcome {
    let cfg = McConfig {
        model,
        sites,
        n: EST_N,
        k: EST_K,
        runs: NORMALITY_RUNS,
        seed,
        estimator,
        sim: SimConfig::default(),
        beta_max: None,
    };
    experiment::run(&cfg).unwrap()
}

fn criterion_7(s: &mut Suite) -> Option<experiment::McSummary> {
    let start = Instant::now();
    let cases = [
        ("dexp1d t=2", KernelModel::dexp1d(1.0).unwrap(), pair_sites(&[2.0]), Estimator::Pairwise),
        ("normal1d t=2", KernelModel::normal1d(1.0).unwrap(), pair_sites(&[2.0]), Estimator::Pairwise),
        ("t1d(3) t=2", KernelModel::t1d(1.0, 3).unwrap(), pair_sites(&[2.0]), Estimator::Pairwise),
        ("normal2d t=(1,1)", KernelModel::normal2d(1.0).unwrap(), pair_sites(&[1.0, 1.0]), Estimator::Pairwise),
        ("exp2d t=(1,0.5)", KernelModel::exp2d(1.0).unwrap(), pair_sites(&[1.0, 0.5]), Estimator::Exp2d),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut first = None;
    for (i, (label, model, sites, est)) in cases.into_iter().enumerate() {
        let out = mc(model, sites, est, 0x5eed_0000 + i as u64);
        let sm = &out.summary;
        let ok = sm.failures == 0
            && sm.ad_rejects_1pct == Some(false)
            && [sm.ratio_to_delta, sm.ratio_to_four_delta]
                .iter()
                .flatten()
                .any(|r| (VARIANCE_BRACKET.0..=VARIANCE_BRACKET.1).contains(r));
        pass &= ok;
        parts.push(format!(
            "{label}: {} A*={:.3} p={:.4} var={:.3} delta={:.3} (x{:.2}) four-delta={:.3} (x{:.2}) matching={:?}",
            if ok { "ok" } else { "FAILS" },
            sm.ad_statistic.unwrap_or(f64::NAN),
            sm.ad_p_value.unwrap_or(f64::NAN),
            sm.variance.unwrap_or(f64::NAN),
            sm.var_delta.unwrap_or(f64::NAN),
            sm.ratio_to_delta.unwrap_or(f64::NAN),
            sm.var_four_delta.unwrap_or(f64::NAN),
            sm.ratio_to_four_delta.unwrap_or(f64::NAN),
            sm.matching
        ));
        if first.is_none() {
            first = Some(out.summary);
        }
    }
    s.record(
        "7",
        "asymptotic normality and variance, 500 runs per pair",
        pass,
        parts.join("; "),
        start,
    );
    first
}

fn criterion_8(s: &mut Suite) {
    let start = Instant::now();
    let line = SiteSet::new_1d(&[0.0, 1.0, 3.0, 3.7]).unwrap();
    let plane = SiteSet::new_2d(&[[0.0, 0.0], [1.0, 0.5], [-0.4, 2.0], [0.9, -1.3]]).unwrap();
    let mut worst: f64 = 0.0;
    for &beta in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        for name in ["normal1d", "dexp1d", "t1d", "normal2d", "t2d", "exp2d"] {
            let m = family(name, beta);
            let sites = if m.dim() == 1 { &line } else { &plane };
            for (j, k) in sites.pairs() {
                let r = PairDependence::between(m, sites, j, k).unwrap().r11();
                let b = if name == "exp2d" {
                    let t = sites.displacement(j, k);
                    invert_exp2d_relation(t[0], t[1], r, 1e3).unwrap().0
                } else {
                    invert_marginal_relation(&m, sites.distance(j, k), r).unwrap()
                };
                worst = worst.max((b - beta).abs() / beta.max(1.0));
            }
            if m.dim() == 1 {
                let r = r_multi_ones(&m, sites).unwrap();
                let b = invert_marginal_relation(&m, sites.range().unwrap(), r).unwrap();
                worst = worst.max((b - beta).abs() / beta.max(1.0));
            }
        }
    }
    let mut worst_gn: f64 = 0.0;
    for &b1 in &[0.5, 1.0, 2.0] {
        for &b2 in &[0.5, 1.0, 2.0] {
            for &rho in &[-0.6, 0.0, 0.6] {
                let m = KernelModel::gnormal2d(b1, b2, rho).unwrap();
                let (disp, q): (Vec<[f64; 2]>, Vec<f64>) = plane
                    .pairs()
                    .map(|(j, k)| {
                        let t = plane.displacement(j, k);
                        let r = PairDependence::between(m, &plane, j, k).unwrap().r11();
                        ([t[0], t[1]], q_from_r(r).unwrap())
                    })
                    .unzip();
                let f = fit_general_normal(&disp, &q).unwrap();
                worst_gn = worst_gn.max((f.beta1 - b1).abs()).max((f.beta2 - b2).abs()).max((f.rho - rho).abs());
            }
        }
    }
    s.record(
        "8",
        "exact recovery from model R values",
        worst < RECOVERY_TOL && worst_gn < RECOVERY_TOL,
        format!("single-scale max rel err = {worst:.2e}, general normal 3x3x3 grid max err = {worst_gn:.2e} (tol {RECOVERY_TOL:e})"),
        start,
    );
}

fn transformed(z: &Observations) -> Observations {
    let d = z.d();
    let data = z
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &v)| if (i % d).is_multiple_of(2) { v.powi(3) } else { v.ln_1p() })
        .collect();
    Observations::new(d, data).unwrap()
}

fn criterion_9(s: &mut Suite) {
    let start = Instant::now();
    let line = SiteSet::new_1d(&[0.0, 0.6, 1.7, 2.1]).unwrap();
    let plane = SiteSet::new_2d(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.8, 0.9]]).unwrap();
    let cases = [
        (KernelModel::dexp1d(1.0).unwrap(), &line, Estimator::Pairwise),
        (KernelModel::t1d(1.0, 2).unwrap(), &line, Estimator::Range),
        (KernelModel::normal2d(1.0).unwrap(), &plane, Estimator::Pairwise),
        (KernelModel::exp2d(1.0).unwrap(), &plane, Estimator::Exp2d),
        (KernelModel::gnormal2d(1.0, 1.5, 0.3).unwrap(), &plane, Estimator::GeneralNormal),
    ];
    let mut checks = 0;
    let mut broken = Vec::new();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    for (ci, (model, sites, est)) in cases.iter().enumerate() {
        for seed in 0..10u64 {
            let cfg = SimConfig::with_seed(90_000 + seed);
            let z = simulate(model, sites, 3000, &cfg).unwrap();
            let again = pool.install(|| simulate(model, sites, 3000, &cfg)).unwrap();
            checks += 1;
            if z != again {
                broken.push(format!("case {ci} seed {seed}: simulation depends on threads"));
            }
            let prefix = simulate(model, sites, 1000, &cfg).unwrap();
            checks += 1;
            if prefix.as_slice() != &z.as_slice()[..prefix.as_slice().len()] {
                broken.push(format!("case {ci} seed {seed}: replications depend on n"));
            }
            let mut order: Vec<usize> = (0..z.n()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let rows: Vec<Vec<f64>> = order.iter().map(|&i| z.row(i).to_vec()).collect();
            let shuffled = Observations::from_rows(&rows).unwrap();
            for k in [30, 150] {
                let opts = EstimateOptions::new(k);
                let base = estimation::estimate(&z, sites, model, *est, &opts);
                let json = |r: &maxstable::Result<estimation::EstimateReport>| match r {
                    Ok(r) => r.to_json(),
                    Err(e) => e.to_string(),
                };
                let b = json(&base);
                for (what, other) in [("monotone transform", transformed(&z)), ("row shuffle", shuffled.clone())] {
                    checks += 1;
                    if json(&estimation::estimate(&other, sites, model, *est, &opts)) != b {
                        broken.push(format!("case {ci} seed {seed} k {k}: {what}"));
                    }
                }
                checks += 1;
                if json(&estimation::estimate(&z, sites, model, *est, &opts)) != b {
                    broken.push(format!("case {ci} seed {seed} k {k}: repeat"));
                }
            }
        }
    }
    s.record(
        "9",
        "rank invariance, permutation invariance and determinism",
        broken.is_empty(),
        format!("{checks} bit-identity checks, failures {broken:?}"),
        start,
    );
}

fn main() {
    // ACCEPTANCE_ONLY=3,7 runs a subset while iterating
    let only: Option<Vec<String>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').map(|x| x.trim().to_string()).collect());
    let want = |id: &str| only.as_ref().is_none_or(|o| o.iter().any(|x| x == id));
    let mut s = Suite { failed: Vec::new() };
    let simple: [(&str, Criterion); 8] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("8", criterion_8),
        ("9", criterion_9),
    ];
    let mut dexp = None;
    for (id, f) in simple {
        if id == "8" && want("7") {
            dexp = criterion_7(&mut s);
        }
        if want(id) {
            f(&mut s);
        }
    }

    // centring of √k(β̂ - β), reported but not gating
    if let Some(sm) = dexp {
        let mean = sm.mean.unwrap_or(f64::NAN);
        let bias = sm.threshold_bias.unwrap_or(f64::NAN);
        let se = (sm.variance.unwrap_or(f64::NAN) / NORMALITY_RUNS as f64).sqrt();
        s.info(
            "mc-mean",
            "dexp1d t=2 mean of sqrt(k)(beta_hat - beta) within 0.15 of 0",
            mean.abs() < MC_MEAN_BOUND,
            format!(
                "mean = {mean:.3} (se {se:.3}); the exact finite-level bias sqrt(k)(beta_k - beta) at k/n = {} is {bias:.3}, mean minus that bias = {:.3}",
                EST_K as f64 / EST_N as f64,
                mean - bias
            ),
        );
    }

    if s.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {:?}", s.failed);
        if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
