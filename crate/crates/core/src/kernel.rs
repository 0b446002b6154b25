//! Photon bath kernel: ultraviolet cutoff `χ`, radial density `F`, spectral
//! density `J`, the vacuum correlation `u(t)` and the half-line Fourier
//! coefficients `d_m`.
//!
//! Conventions: `u(t) = ∫₀^∞ J(ω) e^{-iωt} dω` with
//! `J(ω) = ω³ χ(ω)² / (3π²)`, and
//! `d_m = lim_{ε→0⁺} ∫₀^∞ u(t) e^{2imβt - εt} dt`.
//! Inserting the first formula into the second gives
//! `d_m = π J(2mβ) + i P∫₀^∞ J(ω)/(2mβ - ω) dω`, which is how the
//! coefficients are computed. The direct time integral is kept as
//! [`BathKernel::d_coefficient_time_side`] and the two are cross-checked.
//!
//! The sign of `Im d_m` (hence of the Lamb shift) follows from the
//! `e^{-iωt}` convention above. Flipping the convention of the field
//! scalar product conjugates `u` and flips every `Im d_m`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};
use crate::spin::C64;

/// A smooth, rapidly decaying ultraviolet cutoff `χ(|k|)`.
pub trait Cutoff: Send + Sync {
    /// `χ(r)` for `r ≥ 0`.
    fn value(&self, r: f64) -> f64;

    /// Radius beyond which `r³χ(r)²` is negligible at double precision.
    fn support(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutoffKind {
    Gaussian,
}

impl std::str::FromStr for CutoffKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(CutoffKind::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown cutoff kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for CutoffKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CutoffKind::Gaussian => f.write_str("gaussian"),
        }
    }
}

/// Cutoff selected by configuration; `gaussian` is `χ(r) = exp(-(r/λ)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSpec {
    kind: CutoffKind,
    lambda: f64,
}

impl CutoffSpec {
    pub fn new(kind: CutoffKind, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument("invalid cutoff".into()));
        }
        Ok(Self { kind, lambda })
    }

    pub fn gaussian(lambda: f64) -> Result<Self> {
        Self::new(CutoffKind::Gaussian, lambda)
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            kind: CutoffKind::Gaussian,
            lambda: 4.0,
        }
    }
}

impl Cutoff for CutoffSpec {
    fn value(&self, r: f64) -> f64 {
        match self.kind {
            CutoffKind::Gaussian => {
                let x = r / self.lambda;
                (-x * x).exp()
            }
        }
    }

    fn support(&self) -> f64 {
        match self.kind {
            // r³ e^{-2r²/λ²} < 1e-18 well before 5λ for λ ≳ 0.1
            CutoffKind::Gaussian => 5.0 * self.lambda,
        }
    }
}

/// `χ(r)`, rejecting negative radii.
pub fn chi<C: Cutoff + ?Sized>(cutoff: &C, r: f64) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::InvalidArgument(format!("negative radius {r}")));
    }
    Ok(cutoff.value(r))
}

/// Numerical settings for kernel evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSettings {
    /// Tolerances for every frequency integral.
    pub quad: QuadConfig,
    /// Stopping threshold for the principal-value excision loop.
    pub pv_tol: f64,
    /// Time-side oracle settings.
    pub abel: AbelSchedule,
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            pv_tol: 1e-10,
            abel: AbelSchedule::default(),
        }
    }
}

/// ε-schedule for the time-side oracle `∫₀^T u(t) e^{2imβt-εt} dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbelSchedule {
    /// Largest regulator; the schedule is `ε₀, ε₀/2, …`.
    pub eps0: f64,
    pub levels: usize,
    /// Time horizon of the integral.
    pub t_max: f64,
    /// Gauss panels per unit time.
    pub panels_per_unit: f64,
    /// Accepted Richardson residual.
    pub tolerance: f64,
}

impl Default for AbelSchedule {
    fn default() -> Self {
        Self {
            eps0: 0.02,
            levels: 5,
            t_max: 100.0,
            panels_per_unit: 2.0,
            tolerance: 1e-7,
        }
    }
}

/// Result of the time-side computation of one `d_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbelEstimate {
    pub m: i32,
    pub value: C64,
    pub schedule: Vec<f64>,
    pub raw: Vec<C64>,
    pub residual: f64,
    /// Bound on `∫_T^∞ |u|` from the last sampled values.
    pub tail_bound: f64,
}

/// The three coefficients `d_1, d_0, d_{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DCoefficients {
    d: [C64; 3],
    pub diagnostics: Vec<String>,
}

impl DCoefficients {
    pub fn new(d1: C64, d0: C64, d_minus1: C64) -> Self {
        Self {
            d: [d1, d0, d_minus1],
            diagnostics: Vec::new(),
        }
    }

    /// `d_m` for `m ∈ {1, 0, -1}`.
    pub fn get(&self, m: i32) -> Result<C64> {
        match m {
            1 => Ok(self.d[0]),
            0 => Ok(self.d[1]),
            -1 => Ok(self.d[2]),
            _ => Err(Error::IndexOutOfRange(m)),
        }
    }

    pub fn re_d1(&self) -> f64 {
        self.d[0].re
    }

    /// `Im d_1 - Im d_{-1}`.
    pub fn lamb_shift(&self) -> f64 {
        self.d[0].im - self.d[2].im
    }

    pub fn as_array(&self) -> [C64; 3] {
        self.d
    }
}

/// Photon correlation data for a given cutoff and Larmor scale `β`.
#[derive(Clone, Debug)]
pub struct BathKernel<C: Cutoff = CutoffSpec> {
    cutoff: C,
    beta: f64,
    settings: KernelSettings,
}

impl BathKernel<CutoffSpec> {
    /// The default configuration: gaussian cutoff with `λ = 4`, `β = 1`.
    pub fn standard() -> Self {
        Self::new(CutoffSpec::default(), 1.0).expect("default parameters are valid")
    }
}

impl<C: Cutoff> BathKernel<C> {
    pub fn new(cutoff: C, beta: f64) -> Result<Self> {
        Self::with_settings(cutoff, beta, KernelSettings::default())
    }

    pub fn with_settings(cutoff: C, beta: f64, settings: KernelSettings) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        Ok(Self {
            cutoff,
            beta,
            settings,
        })
    }

    pub fn cutoff(&self) -> &C {
        &self.cutoff
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn settings(&self) -> &KernelSettings {
        &self.settings
    }

    /// Whether `χ(2β) > 0`.
    pub fn fgr_holds(&self) -> bool {
        self.cutoff.value(2.0 * self.beta) > 0.0
    }

    /// `F(k) = (2/3) χ(|k|)² |k| / (2π)³`.
    pub fn radial_density(&self, k: [f64; 3]) -> f64 {
        let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let c = self.cutoff.value(r);
        2.0 / 3.0 * c * c * r / (2.0 * PI).powi(3)
    }

    pub(crate) fn j(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let c = self.cutoff.value(w);
        w * w * w * c * c / (3.0 * PI * PI)
    }

    /// `J(ω) = ω³χ(ω)²/(3π²)`.
    pub fn spectral_density(&self, w: f64) -> Result<f64> {
        if w < 0.0 || w.is_nan() {
            return Err(Error::InvalidArgument(format!("negative frequency {w}")));
        }
        Ok(self.j(w))
    }

    /// `∫₀^∞ J(ω) dω = u(0)`.
    pub fn total_weight(&self) -> Result<f64> {
        let w = self.cutoff.support();
        Ok(quad::integrate(|x| self.j(x), 0.0, w, 8, &self.settings.quad)?.value)
    }

    /// `u(t) = ∫₀^∞ J(ω) e^{-iωt} dω`.
    pub fn u_of_t(&self, t: f64) -> Result<C64> {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite time {t}")));
        }
        let w = self.cutoff.support();
        let panels = ((w * t.abs() / (2.0 * PI)).ceil() as usize + 8).min(1 << 16);
        let est = quad::integrate(
            |x| C64::from_polar(self.j(x), -x * t),
            0.0,
            w,
            panels,
            &self.settings.quad,
        )?;
        Ok(est.value)
    }

    /// `max_t |u(t)|(1 + t³)` over the given times.
    pub fn decay_constant(&self, times: &[f64]) -> Result<f64> {
        let mut best = 0.0f64;
        for &t in times {
            best = best.max(self.u_of_t(t)?.norm() * (1.0 + t.abs().powi(3)));
        }
        Ok(best)
    }

    /// `π ∫_{|k|=2β} F dμ = π · 4π(2β)² · F(2β)`.
    pub fn surface_integral(&self) -> f64 {
        let r = 2.0 * self.beta;
        PI * 4.0 * PI * r * r * self.radial_density([0.0, 0.0, r])
    }

    /// Frequency-side `d_m`.
    pub fn d_coefficient(&self, m: i32) -> Result<C64> {
        let a = 2.0 * m as f64 * self.beta;
        let w = self.cutoff.support();
        let q = &self.settings.quad;
        match m {
            1 => {
                let re = PI * self.j(a);
                let im = self.principal_value(a)?;
                Ok(C64::new(re, im))
            }
            0 => {
                let im = -quad::integrate(|x| if x > 0.0 { self.j(x) / x } else { 0.0 }, 0.0, w, 8, q)?.value;
                Ok(C64::new(0.0, im))
            }
            -1 => {
                let im = -quad::integrate(|x| self.j(x) / (x - a), 0.0, w, 8, q)?.value;
                Ok(C64::new(0.0, im))
            }
            _ => Err(Error::IndexOutOfRange(m)),
        }
    }

    pub fn d_coefficients(&self) -> Result<DCoefficients> {
        let mut d = DCoefficients::new(self.d_coefficient(1)?, self.d_coefficient(0)?, self.d_coefficient(-1)?);
        if !self.fgr_holds() {
            d.diagnostics.push("chi(2 beta) = 0: relaxation rate vanishes".into());
        }
        Ok(d)
    }

    /// `P∫₀^∞ J(ω)/(a - ω) dω` for `a > 0` by symmetric excision of
    /// `(a-δ, a+δ)`, halving `δ` until the excised contribution is below
    /// `pv_tol`. The two sides are folded onto `s = |ω - a|`, where the
    /// integrand `(J(a-s) - J(a+s))/s` is smooth.
    fn principal_value(&self, a: f64) -> Result<f64> {
        let q = &self.settings.quad;
        let w = self.cutoff.support().max(2.0 * a);
        let folded = |s: f64| (self.j(a - s) - self.j(a + s)) / s;
        let far = quad::integrate(|x| self.j(x) / (x - a), 2.0 * a, w, 8, q)?.value;
        let mut delta = 0.5 * a;
        let mut inner = quad::integrate(folded, delta, a, 4, q)?.value;
        let mut change = f64::INFINITY;
        for _ in 0..80 {
            let piece = quad::integrate(folded, 0.5 * delta, delta, 1, q)?.value;
            inner += piece;
            delta *= 0.5;
            change = piece.abs();
            if change < self.settings.pv_tol {
                return Ok(inner - far);
            }
        }
        Err(Error::PrincipalValueFailure {
            change,
            tolerance: self.settings.pv_tol,
        })
    }

    /// Sampled `u` on the composite Gauss nodes of `[0, t_max]`.
    pub fn sample_u(&self, schedule: &AbelSchedule) -> Result<Vec<(f64, f64, C64)>> {
        let panels = (schedule.t_max * schedule.panels_per_unit).ceil().max(1.0) as usize;
        quad::composite_gauss(0.0, schedule.t_max, panels)
            .into_iter()
            .map(|(t, w)| Ok((t, w, self.u_of_t(t)?)))
            .collect()
    }

    /// Time-side `d_m`: `∫₀^T u(t) e^{(2imβ-ε)t} dt` over the ε-schedule,
    /// extrapolated to `ε → 0` with a Richardson table in powers of ε.
    pub fn d_coefficient_time_side(&self, m: i32) -> Result<AbelEstimate> {
        let samples = self.sample_u(&self.settings.abel)?;
        self.d_time_side_from_samples(m, &samples)
    }

    pub fn d_time_side_from_samples(&self, m: i32, samples: &[(f64, f64, C64)]) -> Result<AbelEstimate> {
        if !(-1..=1).contains(&m) {
            return Err(Error::IndexOutOfRange(m));
        }
        let s = &self.settings.abel;
        let omega = 2.0 * m as f64 * self.beta;
        let schedule: Vec<f64> = (0..s.levels).map(|k| s.eps0 / 2f64.powi(k as i32)).collect();
        let raw: Vec<C64> = schedule
            .iter()
            .map(|&eps| {
                samples
                    .iter()
                    .map(|&(t, w, u)| u * C64::from_polar(w * (-eps * t).exp(), omega * t))
                    .sum()
            })
            .collect();
        // Richardson in h = ε with ratio 2: T[k][j] = (2^j T[k][j-1] - T[k-1][j-1]) / (2^j - 1)
        let mut table = vec![raw.clone()];
        for j in 1..raw.len() {
            let prev = &table[j - 1];
            let f = 2f64.powi(j as i32);
            let next: Vec<C64> = (1..prev.len()).map(|k| (prev[k] * f - prev[k - 1]) / (f - 1.0)).collect();
            table.push(next);
        }
        let value = table.last().unwrap()[0];
        let residual = if table.len() >= 2 {
            let a = table[table.len() - 2].last().copied().unwrap();
            (a - value).norm()
        } else {
            f64::INFINITY
        };
        if residual > s.tolerance {
            return Err(Error::ExtrapolationResidual {
                residual,
                tolerance: s.tolerance,
            });
        }
        let last_t = samples.last().map(|x| x.0).unwrap_or(0.0);
        let last_u = samples.last().map(|x| x.2.norm()).unwrap_or(0.0);
        // |u| ~ c/t⁴ ⇒ ∫_T^∞ |u| ≈ |u(T)| T / 3
        let tail_bound = last_u * last_t / 3.0;
        Ok(AbelEstimate {
            m,
            value,
            schedule,
            raw,
            residual,
            tail_bound,
        })
    }
}
