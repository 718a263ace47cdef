//! Globally adaptive 10/21-point Gauss–Kronrod quadrature.
//!
//! Pieces are given as a sorted list of breakpoints; the first and last may be
//! infinite, in which case the tail is mapped onto a finite interval with
//! `x = a + u / (1 - u)`. All pieces share one error budget: the interval with
//! the largest error estimate is bisected until the total error is below
//! tolerance.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 21-point Kronrod abscissae (positive half, last is the centre) and weights;
// the embedded 10-point Gauss rule uses the odd-indexed abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Value and error estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Finite,
    /// x = origin + u/(1-u), u in [0, 1)
    Upper(f64),
    /// x = origin - u/(1-u), u in [0, 1)
    Lower(f64),
}

impl Map {
    #[inline]
    fn eval<F: Fn(f64) -> f64>(&self, f: &F, u: f64) -> f64 {
        match *self {
            Map::Finite => f(u),
            Map::Upper(a) => {
                let v = 1.0 - u;
                let y = f(a + u / v);
                if y == 0.0 {
                    0.0
                } else {
                    y / (v * v)
                }
            }
            Map::Lower(b) => {
                let v = 1.0 - u;
                let y = f(b - u / v);
                if y == 0.0 {
                    0.0
                } else {
                    y / (v * v)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    map: Map,
    value: f64,
    error: f64,
    // position for deterministic summation order
    key: (usize, u64),
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.key.cmp(&self.key))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, map: Map, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = map.eval(f, centre);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv = [0.0; 20];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = map.eval(f, centre - dx);
        let f2 = map.eval(f, centre + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let abs_sum = abs_sum * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (value, err)
}

/// Adaptive integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_panels: 4000,
        }
    }
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    /// Integrates `f` over `[a, b]` (either end may be infinite).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        self.integrate_pieces(f, &[a, b])
    }

    /// Integrates over consecutive pieces `[p0, p1], [p1, p2], ...`.
    ///
    /// Breakpoints must be sorted; only the outermost may be infinite.
    /// Duplicated breakpoints are skipped.
    pub fn integrate_pieces<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<Integral> {
        assert!(breaks.len() >= 2, "need at least two breakpoints");
        let mut heap = BinaryHeap::new();
        for (i, w) in breaks.windows(2).enumerate() {
            let (lo, hi) = (w[0], w[1]);
            debug_assert!(lo <= hi, "breakpoints must be sorted");
            if lo == hi {
                continue;
            }
            let pieces: Vec<(Map, f64, f64)> = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => vec![(Map::Finite, lo, hi)],
                (true, false) => vec![(Map::Upper(lo), 0.0, 1.0)],
                (false, true) => vec![(Map::Lower(hi), 0.0, 1.0)],
                (false, false) => vec![(Map::Lower(0.0), 0.0, 1.0), (Map::Upper(0.0), 0.0, 1.0)],
            };
            for (j, (map, a, b)) in pieces.into_iter().enumerate() {
                let (value, error) = gauss_kronrod(&f, map, a, b);
                heap.push(Panel {
                    a,
                    b,
                    map,
                    value,
                    error,
                    key: (2 * i + j, 0),
                });
            }
        }
        let mut done: Vec<Panel> = Vec::new();
        let mut panels = heap.len();
        let (mut total, mut err) = totals(heap.iter());
        loop {
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                // confirm with an exact recount before accepting
                (total, err) = totals(heap.iter().chain(done.iter()));
                if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                    return Ok(Integral {
                        value: total,
                        abs_error: err,
                    });
                }
            }
            let Some(worst) = heap.pop() else {
                // nothing left to refine: roundoff-limited
                let (value, abs_error) = totals(done.iter());
                return Ok(Integral { value, abs_error });
            };
            if panels >= self.max_panels {
                let (estimate, error) = totals(heap.iter().chain(done.iter()).chain(std::iter::once(&worst)));
                return Err(Error::Quadrature { estimate, error });
            }
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-14 * worst.a.abs().max(1e-300) {
                done.push(worst);
                continue;
            }
            total -= worst.value;
            err -= worst.error;
            for (k, (a, b)) in [(worst.a, mid), (mid, worst.b)].into_iter().enumerate() {
                let (value, error) = gauss_kronrod(&f, worst.map, a, b);
                total += value;
                err += error;
                heap.push(Panel {
                    a,
                    b,
                    map: worst.map,
                    value,
                    error,
                    key: (worst.key.0, worst.key.1.wrapping_mul(2).wrapping_add(k as u64 + 1)),
                });
            }
            panels += 1;
            if panels % 64 == 0 {
                (total, err) = totals(heap.iter().chain(done.iter()));
            }
        }
    }
}

fn totals<'a>(panels: impl Iterator<Item = &'a Panel>) -> (f64, f64) {
    let mut list: Vec<&Panel> = panels.collect();
    list.sort_by(|x, y| {
        x.key
            .0
            .cmp(&y.key.0)
            .then(x.a.total_cmp(&y.a))
    });
    // Neumaier summation in positional order
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut err = 0.0;
    for p in list {
        let t = sum + p.value;
        if sum.abs() >= p.value.abs() {
            comp += (sum - t) + p.value;
        } else {
            comp += (p.value - t) + sum;
        }
        sum = t;
        err += p.error;
    }
    (sum + comp, err)
}

/// Convenience wrapper with default tolerances.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<Integral> {
    Quadrature::default().integrate(f, a, b)
}
