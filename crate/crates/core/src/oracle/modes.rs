//! Discretization of the photon bath into three independent families of
//! harmonic modes, one per field component.
//!
//! Cross-correlations between different field components vanish and the
//! autocorrelation `u(t)` is the same for every component, so each
//! component is replaced by its own comb of modes with
//! `λ_j² = J(ω_j) Δω_j`, giving the discrete kernel
//! `û(t) = Σ_j λ_j² e^{-iω_j t}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::{BathKernel, Cutoff};
use crate::quad::{self, gauss_legendre};
use crate::spin::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    Midpoint,
    Gauss,
}

impl std::str::FromStr for QuadratureRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Self::Midpoint),
            "gauss" => Ok(Self::Gauss),
            other => Err(Error::InvalidArgument(format!("unknown quadrature rule '{other}'"))),
        }
    }
}

impl std::fmt::Display for QuadratureRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Midpoint => "midpoint",
            Self::Gauss => "gauss",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub omega: f64,
    pub coupling: f64,
}

/// Three families of bath modes; channel `c` couples to `σ_{c+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    channels: [Vec<Mode>; 3],
}

/// Settings for [`discretize_bath`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathDiscretization {
    pub omega_max: f64,
    pub n_modes: usize,
    pub rule: QuadratureRule,
    /// Largest accepted `∫_{ω_max}^∞ J`.
    pub tail_tol: f64,
}

impl Default for BathDiscretization {
    fn default() -> Self {
        Self {
            omega_max: 16.0,
            n_modes: 200,
            rule: QuadratureRule::Midpoint,
            tail_tol: 1e-8,
        }
    }
}

/// How well `û` reproduces `u` on `[0, window]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelReproduction {
    pub window: f64,
    pub max_error: f64,
    /// `2π / Δω_max`, the earliest recurrence of the mode comb.
    pub recurrence_time: f64,
    pub tail_mass: f64,
}

impl ModeSet {
    /// The same comb in all three channels.
    pub fn uniform(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument("mode set must not be empty".into()));
        }
        if modes.iter().any(|m| !(m.omega > 0.0) || !(m.coupling >= 0.0)) {
            return Err(Error::InvalidArgument("modes need ω > 0 and λ ≥ 0".into()));
        }
        Ok(Self {
            channels: [modes.clone(), modes.clone(), modes],
        })
    }

    pub fn from_channels(channels: [Vec<Mode>; 3]) -> Result<Self> {
        let n = channels[0].len();
        if n == 0 || channels.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidArgument("channels need equal, nonzero mode counts".into()));
        }
        Ok(Self { channels })
    }

    pub fn channel(&self, c: usize) -> &[Mode] {
        &self.channels[c]
    }

    pub fn modes_per_channel(&self) -> usize {
        self.channels[0].len()
    }

    pub fn total_modes(&self) -> usize {
        3 * self.modes_per_channel()
    }

    /// Mode `q` of the pooled index `q = c·N + j`.
    pub fn pooled(&self, q: usize) -> (usize, Mode) {
        let n = self.modes_per_channel();
        (q / n, self.channels[q / n][q % n])
    }

    /// Keep only the couplings of channel `c` (frequencies unchanged).
    pub fn restricted_to_channel(&self, c: usize) -> Self {
        let mut out = self.clone();
        for (k, ch) in out.channels.iter_mut().enumerate() {
            if k != c {
                for m in ch.iter_mut() {
                    m.coupling = 0.0;
                }
            }
        }
        out
    }

    /// `û_c(t) = Σ_j λ_j² e^{-iω_j t}` for channel `c`.
    pub fn discrete_kernel(&self, c: usize, t: f64) -> C64 {
        self.channels[c]
            .iter()
            .map(|m| C64::from_polar(m.coupling * m.coupling, -m.omega * t))
            .sum()
    }

    /// Largest gap between neighbouring frequencies (and the lower edge).
    pub fn max_spacing(&self) -> f64 {
        let mut w: Vec<f64> = self.channels[0].iter().map(|m| m.omega).collect();
        w.sort_by(f64::total_cmp);
        let mut gap = 0.0f64;
        for p in w.windows(2) {
            gap = gap.max(p[1] - p[0]);
        }
        if w.len() == 1 {
            gap = w[0];
        }
        gap
    }

    /// `2π / Δω_max`.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.max_spacing()
    }

    /// `∫_0^T (T − τ) |û(τ) − u(τ)| dτ` by the trapezoid rule with step `dt`.
    ///
    /// At second order in `g` the reduced dynamics depend on the kernel only
    /// through double time integrals, so this moment bounds how far the comb
    /// can move them.
    pub fn kernel_mismatch_moment<C: Cutoff>(&self, kernel: &BathKernel<C>, window: f64, dt: f64) -> Result<f64> {
        let steps = (window / dt).ceil().max(1.0) as usize;
        let h = window / steps as f64;
        let mut acc = 0.0;
        for i in 0..=steps {
            let tau = h * i as f64;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            acc += w * (window - tau) * (self.discrete_kernel(0, tau) - kernel.u_of_t(tau)?).norm();
        }
        Ok(acc * h)
    }

    /// `max_{t ∈ [0, window]} |û(t) − u(t)|` on `samples + 1` points.
    pub fn reproduction_error<C: Cutoff>(&self, kernel: &BathKernel<C>, window: f64, samples: usize) -> Result<f64> {
        let samples = samples.max(1);
        let mut worst = 0.0f64;
        for i in 0..=samples {
            let t = window * i as f64 / samples as f64;
            let e = (self.discrete_kernel(0, t) - kernel.u_of_t(t)?).norm();
            worst = worst.max(e);
        }
        Ok(worst)
    }
}

/// Largest `T ≤ min(target, recurrence)` on a grid of step `dt` such that
/// `|û(t) − u(t)| ≤ tol` for every grid `t ≤ T`.
pub fn working_window<C: Cutoff>(kernel: &BathKernel<C>, modes: &ModeSet, target: f64, tol: f64, dt: f64) -> Result<f64> {
    if !(target > 0.0 && tol > 0.0 && dt > 0.0) {
        return Err(Error::InvalidArgument("window search needs positive target, tolerance and step".into()));
    }
    let limit = target.min(modes.recurrence_time());
    let mut last = 0.0;
    let mut t = 0.0;
    while t <= limit {
        if (modes.discrete_kernel(0, t) - kernel.u_of_t(t)?).norm() > tol {
            return Ok(last);
        }
        last = t;
        t += dt;
    }
    if (modes.discrete_kernel(0, limit) - kernel.u_of_t(limit)?).norm() > tol {
        return Ok(last);
    }
    Ok(limit)
}

/// Build a mode comb on `[0, ω_max]` reproducing `u` on `[0, window]`.
///
/// Fails if the spectral weight beyond `ω_max` exceeds the tail tolerance
/// or if `Δω · window > 2π` (the comb would recur inside the window).
pub fn discretize_bath<C: Cutoff>(
    kernel: &BathKernel<C>,
    spec: &BathDiscretization,
    window: f64,
) -> Result<(ModeSet, KernelReproduction)> {
    if spec.n_modes == 0 {
        return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
    }
    if !(spec.omega_max > 0.0) {
        return Err(Error::InvalidArgument("omega_max must be positive".into()));
    }
    let support = kernel.cutoff().support();
    let tail_mass = if support > spec.omega_max {
        quad::integrate(|w| kernel.j(w), spec.omega_max, support, 8, &kernel.settings().quad)?.value
    } else {
        0.0
    };
    if tail_mass > spec.tail_tol {
        return Err(Error::TailMass {
            tail: tail_mass,
            tolerance: spec.tail_tol,
        });
    }
    let n = spec.n_modes;
    let modes: Vec<Mode> = match spec.rule {
        QuadratureRule::Midpoint => {
            let h = spec.omega_max / n as f64;
            (0..n)
                .map(|j| {
                    let w = (j as f64 + 0.5) * h;
                    Mode {
                        omega: w,
                        coupling: (kernel.j(w) * h).sqrt(),
                    }
                })
                .collect()
        }
        QuadratureRule::Gauss => gauss_legendre(n)
            .into_iter()
            .map(|(x, wt)| {
                let w = 0.5 * spec.omega_max * (x + 1.0);
                Mode {
                    omega: w,
                    coupling: (kernel.j(w) * 0.5 * spec.omega_max * wt).sqrt(),
                }
            })
            .collect(),
    };
    let set = ModeSet::uniform(modes)?;
    let spacing = set.max_spacing();
    if spacing * window > 2.0 * PI * (1.0 + 1e-12) {
        return Err(Error::RecurrenceGuard {
            window,
            spacing,
            recurrence: 2.0 * PI / spacing,
        });
    }
    let max_error = set.reproduction_error(kernel, window, (window * 4.0).ceil() as usize)?;
    Ok((
        set,
        KernelReproduction {
            window,
            max_error,
            recurrence_time: 2.0 * PI / spacing,
            tail_mass,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_kernel_is_one_exponential() {
        let m = ModeSet::uniform(vec![Mode {
            omega: 2.0,
            coupling: 0.3,
        }])
        .unwrap();
        for &t in &[0.0, 0.4, 3.0] {
            let want = C64::from_polar(0.09, -2.0 * t);
            assert!((m.discrete_kernel(1, t) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn midpoint_comb_reproduces_total_weight() {
        let k = BathKernel::standard();
        let (m, rep) = discretize_bath(&k, &BathDiscretization::default(), 10.0).unwrap();
        assert_eq!(m.modes_per_channel(), 200);
        let u0 = 32.0 / (3.0 * PI * PI);
        // leading Euler–Maclaurin term of the midpoint rule, J'''(0) = 2/π²
        let h: f64 = 0.08;
        let em = -7.0 / 5760.0 * h.powi(4) * 2.0 / (PI * PI);
        let diff = m.discrete_kernel(0, 0.0).re - u0;
        assert!((diff - em).abs() < 1e-10, "{diff} vs {em}");
        assert!(rep.tail_mass < 1e-8);
        assert!((rep.recurrence_time - 2.0 * PI / 0.08).abs() < 1e-9);
    }

    #[test]
    fn guards() {
        let k = BathKernel::standard();
        let spec = BathDiscretization::default();
        assert!(matches!(discretize_bath(&k, &spec, 80.0), Err(Error::RecurrenceGuard { .. })));
        let short = BathDiscretization {
            omega_max: 6.0,
            ..spec
        };
        assert!(matches!(discretize_bath(&k, &short, 10.0), Err(Error::TailMass { .. })));
        let none = BathDiscretization { n_modes: 0, ..spec };
        assert!(discretize_bath(&k, &none, 1.0).is_err());
    }

    #[test]
    fn refinement_reduces_window_error() {
        let k = BathKernel::standard();
        let window = 30.0;
        let mut last = f64::INFINITY;
        for n in [100, 200, 400] {
            let spec = BathDiscretization {
                n_modes: n,
                ..Default::default()
            };
            let (_, rep) = discretize_bath(&k, &spec, window).unwrap();
            assert!(rep.max_error < last, "n = {n}: {} !< {last}", rep.max_error);
            last = rep.max_error;
        }
    }

    #[test]
    fn working_window_stops_before_recurrence() {
        let k = BathKernel::standard();
        let (m, _) = discretize_bath(&k, &BathDiscretization::default(), 1.0).unwrap();
        let w = working_window(&k, &m, 1e4, 1e-4, 0.05).unwrap();
        assert!(w > 40.0 && w < m.recurrence_time(), "{w}");
        assert_eq!(working_window(&k, &m, 5.0, 1e-4, 0.05).unwrap(), 5.0);
    }

    #[test]
    fn gauss_rule_weights_sum_to_u0() {
        let k = BathKernel::standard();
        let spec = BathDiscretization {
            rule: QuadratureRule::Gauss,
            n_modes: 120,
            ..Default::default()
        };
        let (m, _) = discretize_bath(&k, &spec, 10.0).unwrap();
        let u0 = 32.0 / (3.0 * PI * PI);
        assert!((m.discrete_kernel(2, 0.0).re - u0).abs() < 1e-9);
    }
}
