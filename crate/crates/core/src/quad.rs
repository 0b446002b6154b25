//! Globally adaptive 21-point Gauss–Kronrod quadrature and a composite
//! 10-point Gauss–Legendre rule, for real or complex integrands.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::spin::C64;

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
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
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

/// Values that can be integrated: `f64` and `C64`.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn modulus(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
}

/// Tolerances and evaluation budget for adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 0.0,
            max_evals: 2_000_000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

/// One 21-point Kronrod panel: (kronrod value, |kronrod − gauss|).
fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).modulus())
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]`, starting from `panels` equal subintervals and
/// bisecting the worst panel until the summed error estimate meets
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, panels: usize, cfg: &QuadConfig) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
            evaluations: 0,
        });
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(panels * 4);
    let mut evals = 0usize;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        let (value, error) = gk21(&f, lo, hi);
        evals += 21;
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    let (mut total, mut err) = heap
        .iter()
        .fold((T::zero(), 0.0), |(s, e), p| (s + p.value, e + p.error));
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.modulus());
        if err <= target {
            return Ok(Estimate {
                value: total,
                error: err,
                evaluations: evals,
            });
        }
        if evals + 42 > cfg.max_evals {
            return Err(Error::QuadratureNonConvergence {
                error: err,
                tolerance: target,
                evaluations: evals,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel cannot be split further in floating point
            return Err(Error::QuadratureNonConvergence {
                error: err,
                tolerance: target,
                evaluations: evals,
            });
        }
        total = total - worst.value;
        err -= worst.error;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk21(&f, lo, hi);
            total = total + value;
            err += error;
            heap.push(Panel {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
        evals += 42;
        if heap.len() % 256 == 0 {
            // resum to stop drift in the running totals
            (total, err) = heap
                .iter()
                .fold((T::zero(), 0.0), |(s, e), p| (s + p.value, e + p.error));
        }
        err = err.max(0.0);
    }
}

/// 10-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre_10() -> ([f64; 10], [f64; 10]) {
    let mut x = [0.0; 10];
    let mut w = [0.0; 10];
    for k in 0..5 {
        let node = XGK[2 * k + 1];
        x[k] = -node;
        x[9 - k] = node;
        w[k] = WG[k];
        w[9 - k] = WG[k];
    }
    (x, w)
}

/// Nodes and weights of the composite 10-point Gauss rule with `panels`
/// equal panels on `[a, b]`.
pub fn composite_gauss(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre_10();
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * 10);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for k in 0..10 {
            out.push((c + 0.5 * h * x[k], 0.5 * h * w[k]));
        }
    }
    out
}

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]`, ascending,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((-x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| x.powi(7) - 3.0 * x * x, 0.0, 2.0, 1, &QuadConfig::default()).unwrap();
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_moment() {
        // ∫₀^∞ ω³ e^{-ω²/8} dω = 32
        let r = integrate(|w: f64| w.powi(3) * (-w * w / 8.0).exp(), 0.0, 40.0, 4, &QuadConfig::default())
            .unwrap();
        assert!((r.value - 32.0).abs() < 1e-9);
    }

    #[test]
    fn oscillatory_complex() {
        // ∫₀^{2π·50} e^{ix} dx = 0
        let r = integrate(|x: f64| C64::from_polar(1.0, x), 0.0, 100.0 * std::f64::consts::PI, 50, &QuadConfig::default())
            .unwrap();
        assert!(r.value.norm() < 1e-9);
    }

    #[test]
    fn reports_budget_exhaustion() {
        let cfg = QuadConfig {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_evals: 200,
        };
        let r = integrate(|x: f64| x.abs().sqrt().recip(), 0.0, 1.0, 1, &cfg);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn gauss_legendre_rule() {
        for n in [1, 2, 5, 10, 37, 200] {
            let r = gauss_legendre(n);
            assert_eq!(r.len(), n);
            let w: f64 = r.iter().map(|p| p.1).sum();
            assert!((w - 2.0).abs() < 1e-12, "n = {n}");
            // exact through degree 2n - 1
            let deg = (2 * n - 2) as i32;
            let moment: f64 = r.iter().map(|p| p.1 * p.0.powi(deg)).sum();
            assert!((moment - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "n = {n}");
        }
        let (x10, w10) = gauss_legendre_10();
        for (k, p) in gauss_legendre(10).iter().enumerate() {
            assert!((p.0 - x10[k]).abs() < 1e-14 && (p.1 - w10[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn composite_gauss_integrates_exp() {
        let s: f64 = composite_gauss(0.0, 3.0, 6)
            .into_iter()
            .map(|(x, w)| w * x.exp())
            .sum();
        assert!((s - (3.0f64.exp() - 1.0)).abs() < 1e-13);
    }
}
