//! Flat `key = value` run configuration with `[section]` headers.
//!
//! ```text
//! [model]
//! family = dexp1d      # normal1d dexp1d t1d normal2d exp2d t2d gnormal2d
//! beta = 1.0           # plus nu (t1d), alpha (t2d), beta1 beta2 rho (gnormal2d)
//!
//! [sites]
//! x = 0, 2             # or: points = 0 0; 1 0; 0 1   or: file = sites.csv
//!
//! [sim]
//! n = 100
//! seed = 7
//! scheme = mixture     # or window; tail_mass_tol, window_margin, max_points
//!
//! [estimate]
//! k = 50               # or k_grid = 25, 50, 100; estimator; beta_max
//!
//! [mc]
//! runs = 500
//! ```
//!
//! `#` starts a comment. A relative sites file is resolved against the
//! directory of the config file.

use crate::error::{Error, Result};
use crate::estimation::Estimator;
use crate::kernels::KernelModel;
use crate::simulator::{Scheme, SimConfig};
use crate::sites::SiteSet;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

const SECTIONS: [&str; 5] = ["model", "sites", "sim", "estimate", "mc"];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub model: Option<KernelModel>,
    pub sites: Option<SiteSet>,
    pub n: Option<usize>,
    pub sim: SimConfig,
    pub k: Vec<usize>,
    pub estimator: Option<Estimator>,
    pub beta_max: Option<f64>,
    pub runs: Option<usize>,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

type Table = BTreeMap<(String, String), Entry>;

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(0, format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Parses config text; `base` resolves relative file paths.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let table = tokenize(text)?;
        let mut used = Vec::new();
        let mut get = |section: &str, key: &str| -> Option<Entry> {
            let k = (section.to_string(), key.to_string());
            used.push(k.clone());
            table.get(&k).cloned()
        };

        let model = parse_model(&mut get)?;
        let sites = parse_sites(&mut get, base)?;

        let n: Option<usize> = opt(get("sim", "n"))?;
        if let (Some(0), Some(e)) = (n, get("sim", "n")) {
            return Err(Error::config(e.line, "n must be positive"));
        }
        let mut sim = SimConfig::default();
        if let Some(seed) = opt(get("sim", "seed"))? {
            sim.seed = seed;
        }
        if let Some(s) = get("sim", "scheme") {
            sim.scheme = Scheme::from_str(&s.value).map_err(|m| Error::config(s.line, m))?;
        }
        if let Some(v) = opt(get("sim", "tail_mass_tol"))? {
            sim.tail_mass_tol = v;
        }
        sim.window_margin = opt(get("sim", "window_margin"))?;
        if let Some(v) = opt(get("sim", "max_points"))? {
            sim.max_points = v;
        }
        if let Err(e) = sim.validate() {
            let line = ["tail_mass_tol", "window_margin", "max_points"]
                .iter()
                .find_map(|k| get("sim", k).map(|e| e.line))
                .unwrap_or(0);
            return Err(Error::config(line, e));
        }

        let k = match (get("estimate", "k"), get("estimate", "k_grid")) {
            (Some(a), Some(_)) => return Err(Error::config(a.line, "give either k or k_grid, not both")),
            (Some(a), None) => vec![parse_value(&a)?],
            (None, Some(g)) => list(&g)?,
            (None, None) => Vec::new(),
        };
        for (kk, e) in k.iter().zip(get("estimate", "k").or(get("estimate", "k_grid"))) {
            if *kk == 0 {
                return Err(Error::config(e.line, "k must be positive"));
            }
        }
        let estimator = match get("estimate", "estimator") {
            Some(e) => Some(Estimator::from_str(&e.value).map_err(|m| Error::config(e.line, m))?),
            None => None,
        };
        let beta_max: Option<f64> = opt(get("estimate", "beta_max"))?;
        if let (Some(b), Some(e)) = (beta_max, get("estimate", "beta_max")) {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::config(e.line, "beta_max must be positive and finite"));
            }
        }

        let runs: Option<usize> = opt(get("mc", "runs"))?;
        if let (Some(0), Some(e)) = (runs, get("mc", "runs")) {
            return Err(Error::config(e.line, "runs must be positive"));
        }

        if let Some(((s, k), e)) = table.iter().find(|(key, _)| !used.contains(key)) {
            return Err(Error::config(e.line, format!("unknown key '{k}' in [{s}]")));
        }
        Ok(Config {
            model,
            sites,
            n,
            sim,
            k,
            estimator,
            beta_max,
            runs,
        })
    }

    pub fn require_model(&self) -> Result<KernelModel> {
        self.model.ok_or_else(|| missing("model", "family"))
    }

    pub fn require_sites(&self) -> Result<&SiteSet> {
        self.sites.as_ref().ok_or_else(|| missing("sites", "x, points or file"))
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| missing("sim", "n"))
    }

    pub fn require_k(&self) -> Result<usize> {
        match self.k.as_slice() {
            [k] => Ok(*k),
            [] => Err(missing("estimate", "k")),
            _ => Err(Error::config(0, "a single k is required here, not k_grid")),
        }
    }

    pub fn require_runs(&self) -> Result<usize> {
        self.runs.ok_or_else(|| missing("mc", "runs"))
    }
}

fn missing(section: &str, key: &str) -> Error {
    Error::config(0, format!("missing {key} in [{section}]"))
}

fn tokenize(text: &str) -> Result<Table> {
    let mut table = Table::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line, "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(Error::config(line, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("expected key = value, found '{body}'")))?;
        let sec = section
            .clone()
            .ok_or_else(|| Error::config(line, "key outside of any [section]"))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::config(line, "empty key"));
        }
        let entry = Entry {
            value: value.trim().to_string(),
            line,
        };
        if let Some(prev) = table.insert((sec.clone(), key.clone()), entry) {
            return Err(Error::config(line, format!("duplicate key '{key}' in [{sec}], first at line {}", prev.line)));
        }
    }
    Ok(table)
}

fn parse_value<T: FromStr>(e: &Entry) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    e.value
        .parse()
        .map_err(|err| Error::config(e.line, format!("cannot parse '{}': {err}", e.value)))
}

fn opt<T: FromStr>(e: Option<Entry>) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    e.as_ref().map(parse_value).transpose()
}

fn list<T: FromStr>(e: &Entry) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    e.value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|err| Error::config(e.line, format!("cannot parse '{}': {err}", v.trim())))
        })
        .collect()
}

fn parse_model(get: &mut impl FnMut(&str, &str) -> Option<Entry>) -> Result<Option<KernelModel>> {
    let Some(family) = get("model", "family") else {
        if let Some(e) = get("model", "beta") {
            return Err(Error::config(e.line, "model parameters given without family"));
        }
        return Ok(None);
    };
    let mut num = |key: &str| -> Result<(f64, usize)> {
        let e = get("model", key).ok_or_else(|| {
            Error::config(family.line, format!("model {} needs parameter {key}", family.value))
        })?;
        Ok((parse_value(&e)?, e.line))
    };
    let (model, line) = match family.value.as_str() {
        "normal1d" | "dexp1d" | "normal2d" | "exp2d" => {
            let (beta, line) = num("beta")?;
            let m = match family.value.as_str() {
                "normal1d" => KernelModel::Normal1D { beta },
                "dexp1d" => KernelModel::DoubleExp1D { beta },
                "normal2d" => KernelModel::Normal2D { beta },
                _ => KernelModel::Exp2D { beta },
            };
            (m, line)
        }
        "t1d" => {
            let (beta, line) = num("beta")?;
            let (nu, nu_line) = num("nu")?;
            if nu.fract() != 0.0 || !(1.0..=1e6).contains(&nu) {
                return Err(Error::config(nu_line, "nu must be a positive integer"));
            }
            (KernelModel::StudentT1D { beta, nu: nu as u32 }, line)
        }
        "t2d" => {
            let (beta, line) = num("beta")?;
            let (alpha, _) = num("alpha")?;
            (KernelModel::StudentT2D { beta, alpha }, line)
        }
        "gnormal2d" => {
            let (beta1, line) = num("beta1")?;
            let (beta2, _) = num("beta2")?;
            let (rho, _) = num("rho")?;
            (KernelModel::GeneralNormal2D { beta1, beta2, rho }, line)
        }
        other => return Err(Error::config(family.line, format!("unknown model family '{other}'"))),
    };
    model.validate().map_err(|e| Error::config(line, e))?;
    Ok(Some(model))
}

fn parse_sites(get: &mut impl FnMut(&str, &str) -> Option<Entry>, base: Option<&Path>) -> Result<Option<SiteSet>> {
    let given: Vec<(&str, Entry)> = ["x", "points", "file"]
        .into_iter()
        .filter_map(|k| get("sites", k).map(|e| (k, e)))
        .collect();
    let (key, e) = match given.as_slice() {
        [] => return Ok(None),
        [one] => one.clone(),
        [_, (_, second), ..] => return Err(Error::config(second.line, "give exactly one of x, points or file")),
    };
    let sites = match key {
        "x" => SiteSet::new_1d(&list::<f64>(&e)?),
        "points" => {
            let pts = e
                .value
                .split(';')
                .map(|p| {
                    let c: Vec<f64> = p
                        .split_whitespace()
                        .map(|v| v.parse::<f64>().map_err(|err| Error::config(e.line, format!("'{v}': {err}"))))
                        .collect::<Result<_>>()?;
                    match c[..] {
                        [x, y] => Ok([x, y]),
                        _ => Err(Error::config(e.line, format!("point '{}' needs two coordinates", p.trim()))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            SiteSet::new_2d(&pts)
        }
        _ => {
            let mut path = PathBuf::from(&e.value);
            if path.is_relative() {
                if let Some(b) = base {
                    path = b.join(path);
                }
            }
            let f = File::open(&path).map_err(|err| Error::config(e.line, format!("{}: {err}", path.display())))?;
            SiteSet::read_csv(BufReader::new(f))
        }
    };
    sites
        .and_then(|s| s.require_distinct().map(|_| Some(s)))
        .map_err(|err| Error::config(e.line, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[model]\nfamily = dexp1d\nbeta = 1\n\n[sites]\nx = 0, 2\n\n[sim]\nn = 100\nseed = 7\n";

    #[test]
    fn minimal() {
        let c = Config::parse(MINIMAL, None).unwrap();
        assert_eq!(c.model, Some(KernelModel::DoubleExp1D { beta: 1.0 }));
        assert_eq!(c.require_sites().unwrap().len(), 2);
        assert_eq!((c.n, c.sim.seed), (Some(100), 7));
        assert!(c.require_k().is_err());
    }

    #[test]
    fn all_sections() {
        let text = "# comment\n[model]\nfamily = gnormal2d\nbeta1 = 1\nbeta2 = 2 # inline\nrho = 0.5\n[sites]\npoints = 0 0; 1 0; 0 1\n\
                    [sim]\nn = 10\nscheme = window\ntail_mass_tol = 1e-6\n[estimate]\nk_grid = 2, 4\nestimator = general-normal\n[mc]\nruns = 3\n";
        let c = Config::parse(text, None).unwrap();
        assert_eq!(c.k, vec![2, 4]);
        assert_eq!(c.estimator, Some(Estimator::GeneralNormal));
        assert_eq!(c.sim.scheme, Scheme::Window);
        assert_eq!(c.require_runs().unwrap(), 3);
        assert_eq!(c.require_sites().unwrap().point(2), [0.0, 1.0]);
    }

    fn line_of(text: &str) -> usize {
        match Config::parse(text, None) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of("[model]\nfamily = dexp1d\nbeta = 0\n"), 3);
        assert_eq!(line_of("[model]\nfamily = blob\n"), 2);
        assert_eq!(line_of("[sim]\nn = 0\n"), 2);
        assert_eq!(line_of("[sim]\nn = -4\n"), 2);
        assert_eq!(line_of("\n[what]\n"), 2);
        assert_eq!(line_of("n = 3\n"), 1);
        assert_eq!(line_of("[sim]\nn = 3\nn = 4\n"), 3);
        assert_eq!(line_of("[sim]\nfoo = 3\n"), 2);
        assert_eq!(line_of("[sites]\nx = 0, 0\n"), 2);
        assert_eq!(line_of("[sites]\nx = 0\npoints = 1 1\n"), 3);
        assert_eq!(line_of("[sites]\npoints = 1 1 1\n"), 2);
        assert_eq!(line_of("[estimate]\nk = 1\nk_grid = 1, 2\n"), 2);
        assert_eq!(line_of("[model]\nfamily = t1d\nbeta = 1\nnu = 2.5\n"), 4);
        assert_eq!(line_of("[model]\nfamily = t1d\nbeta = 1\n"), 2);
        assert_eq!(line_of("[sim]\nscheme = grid\n"), 2);
        assert_eq!(line_of("[mc]\nruns = 0\n"), 2);
    }

    #[test]
    fn sites_file_is_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.csv"), "index,x\n1,0\n2,1.5\n").unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "[sites]\nfile = s.csv\n").unwrap();
        let c = Config::load(&cfg).unwrap();
        assert_eq!(c.require_sites().unwrap().distance(0, 1), 1.5);
        assert!(Config::load(&dir.path().join("missing.cfg")).is_err());
    }
}
