//! Reduced spin observables `σ₀(S(t, σ))` of the full model and their
//! distance to the approximate dynamics `e^{tg²L} γ_t σ`.

use super::evolve::{EvolveSettings, Evolver};
use super::hamiltonian::FullHamiltonian;
use crate::error::{Error, Result};
use crate::propagator::ApproxPropagator;
use crate::spin::{ladder_basis, larmor, SpinObservable, C64, ZERO};

/// Overlaps `⟨ψ_a(t)|s⟩⟨s'|ψ_b(t)⟩` summed over photon configurations, for
/// the two evolved vacuum states `ψ_a(t) = e^{-itH}(Ψ₀ ⊗ e_a)`.
///
/// Every `σ₀(S(t, σ))` at this `t` is a contraction of the frame with `σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinFrame {
    gram: [[[[C64; 2]; 2]; 2]; 2],
}

impl SpinFrame {
    pub fn from_states(up: &[C64], down: &[C64]) -> Self {
        let psi = [up, down];
        let mut gram = [[[[ZERO; 2]; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for (x, y) in psi[a].chunks_exact(2).zip(psi[b].chunks_exact(2)) {
                    for s in 0..2 {
                        for sp in 0..2 {
                            gram[a][b][s][sp] += x[s].conj() * y[sp];
                        }
                    }
                }
            }
        }
        Self { gram }
    }

    /// `σ₀(S(t, σ))_{ab} = ⟨ψ_a(t), (I ⊗ σ) ψ_b(t)⟩`.
    pub fn reduce(&self, sigma: &SpinObservable) -> SpinObservable {
        let mut rows = [[ZERO; 2]; 2];
        for (a, row) in rows.iter_mut().enumerate() {
            for (b, out) in row.iter_mut().enumerate() {
                for s in 0..2 {
                    for sp in 0..2 {
                        *out += sigma.entry(s, sp) * self.gram[a][b][s][sp];
                    }
                }
            }
        }
        SpinObservable::from_rows(rows)
    }
}

fn vacuum_states(h: &FullHamiltonian) -> Vec<Vec<C64>> {
    (0..2)
        .map(|s| {
            let mut v = vec![ZERO; h.dimension()];
            v[s] = C64::new(1.0, 0.0);
            v
        })
        .collect()
}

/// Spin frames at each of the ascending `times`.
pub fn spin_frames(h: &FullHamiltonian, times: &[f64], settings: &EvolveSettings) -> Result<Vec<SpinFrame>> {
    let evolver = Evolver::new(h, *settings);
    let mut states = vacuum_states(h);
    let mut frames = Vec::with_capacity(times.len());
    evolver.propagate(&mut states, times, |_, s| frames.push(SpinFrame::from_states(&s[0], &s[1])))?;
    Ok(frames)
}

/// `σ₀(S(t, σ))`.
pub fn reduced_observable(h: &FullHamiltonian, sigma: &SpinObservable, t: f64, settings: &EvolveSettings) -> Result<SpinObservable> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t ≥ 0, got {t}")));
    }
    Ok(spin_frames(h, &[t], settings)?[0].reduce(sigma))
}

/// `‖σ₀(S(t, γ_{-t}σ)) − Σ_m c_m e^{-2imβt} σ₀(S(t, σ(m)))‖` where
/// `σ = Σ_m c_m σ(m)`: the first side rotates `σ` before the reduction, the
/// second rotates the reduced ladder images afterwards.
pub fn sred_consistency(h: &FullHamiltonian, sigma: &SpinObservable, t: f64, settings: &EvolveSettings) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t ≥ 0, got {t}")));
    }
    let frame = spin_frames(h, &[t], settings)?[0];
    Ok(sred_defect(&frame, h.beta(), sigma, t))
}

fn sred_defect(frame: &SpinFrame, beta: f64, sigma: &SpinObservable, t: f64) -> f64 {
    let pre = frame.reduce(&larmor(-t, beta, sigma));
    let c = sigma.decompose().to_array();
    let basis = ladder_basis();
    let m = [0.0, 1.0, 0.0, -1.0];
    let mut post = SpinObservable::zero();
    for k in 0..4 {
        let phase = C64::from_polar(1.0, -2.0 * m[k] * beta * t);
        post = post + frame.reduce(&basis[k]).scale(c[k] * phase);
    }
    (pre - post).norm()
}

/// Settings for [`error_curve`].
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorCurveSettings {
    /// Ascending time grid; `E(g)` is the maximum over it.
    pub times: Vec<f64>,
    pub evolve: EvolveSettings,
    /// `∫_0^T (T − τ)|û − u| dτ` of the comb on the window, see
    /// [`ModeSet::kernel_mismatch_moment`](super::modes::ModeSet::kernel_mismatch_moment).
    pub kernel_moment: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub g: f64,
    /// `max_t ‖σ₀(S(t,σ)) − e^{tg²L}γ_tσ‖`.
    pub sup_error: f64,
    pub argmax_t: f64,
    /// `E(g) / g²` (infinite at `g = 0`).
    pub scaled: f64,
    /// Max over the second half of the window divided by the max over the first.
    pub growth: f64,
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveStatus {
    Conclusive,
    Inconclusive(String),
}

impl CurveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Conclusive => "conclusive",
            Self::Inconclusive(_) => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorCurve {
    pub times: Vec<f64>,
    pub rows: Vec<ErrorRow>,
    /// `E(0)`: what the propagation alone contributes.
    pub propagation_floor: f64,
    /// `12 g_min² ‖σ‖ · kernel_moment`: second-order effect of `û ≠ u`.
    pub kernel_floor: f64,
    pub floor: f64,
    pub status: CurveStatus,
    /// `(E/g²)(g_min) / (E/g²)(g_max)` over the nonzero couplings.
    pub ratio_consistency: Option<f64>,
    /// `max E/g² / min E/g²` over the nonzero couplings.
    pub scaled_spread: Option<f64>,
    /// Largest sred defect seen along the way.
    pub sred_defect: f64,
}

/// Sup-norm distance between the full and approximate reduced dynamics for
/// each coupling in `g_list`. `h` fixes the space and modes; its own
/// coupling is ignored.
pub fn error_curve(
    h: &FullHamiltonian,
    approx: &ApproxPropagator,
    sigma: &SpinObservable,
    g_list: &[f64],
    settings: &ErrorCurveSettings,
) -> Result<ErrorCurve> {
    if g_list.is_empty() {
        return Err(Error::InvalidArgument("g_list must not be empty".into()));
    }
    if g_list.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        return Err(Error::InvalidArgument("couplings must be finite and nonnegative".into()));
    }
    let times = &settings.times;
    if times.is_empty() {
        return Err(Error::InvalidArgument("time grid must not be empty".into()));
    }
    let mut sred = 0.0f64;
    let mut run = |g: f64| -> Result<ErrorRow> {
        let frames = spin_frames(&h.with_coupling(g), times, &settings.evolve)?;
        let mut trace = Vec::with_capacity(times.len());
        for (frame, &t) in frames.iter().zip(times) {
            let full = frame.reduce(sigma);
            let approx = approx.approx_heisenberg(t, g, sigma)?;
            trace.push((full - approx).norm());
            sred = sred.max(sred_defect(frame, h.beta(), sigma, t));
        }
        let (argmax, sup_error) = trace
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
        let half = times[times.len() - 1] / 2.0;
        let first = times.iter().zip(&trace).filter(|(t, _)| **t <= half).map(|(_, e)| *e).fold(0.0, f64::max);
        let second = times.iter().zip(&trace).filter(|(t, _)| **t > half).map(|(_, e)| *e).fold(0.0, f64::max);
        let growth = if first > 0.0 { second / first } else if second > 0.0 { f64::INFINITY } else { 1.0 };
        Ok(ErrorRow {
            g,
            sup_error,
            argmax_t: times[argmax],
            scaled: sup_error / (g * g),
            growth,
            trace,
        })
    };
    let propagation_floor = run(0.0)?.sup_error;
    let rows = g_list.iter().map(|&g| run(g)).collect::<Result<Vec<_>>>()?;

    let nonzero: Vec<&ErrorRow> = rows.iter().filter(|r| r.g > 0.0).collect();
    let g_min = nonzero.iter().map(|r| r.g).fold(f64::INFINITY, f64::min);
    let kernel_floor = if nonzero.is_empty() {
        0.0
    } else {
        12.0 * g_min * g_min * sigma.norm() * settings.kernel_moment
    };
    let floor = propagation_floor + kernel_floor;
    let by_g = |g: f64| nonzero.iter().find(|r| r.g == g).map(|r| r.scaled);
    let (ratio_consistency, scaled_spread) = if nonzero.len() >= 2 {
        let g_max = nonzero.iter().map(|r| r.g).fold(0.0, f64::max);
        let hi = nonzero.iter().map(|r| r.scaled).fold(0.0, f64::max);
        let lo = nonzero.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
        (Some(by_g(g_min).unwrap() / by_g(g_max).unwrap()), Some(hi / lo))
    } else {
        (None, None)
    };
    let status = if h.excitation_cap() == 0 {
        CurveStatus::Inconclusive("excitation cap 0 leaves no interaction channel open".into())
    } else if nonzero.is_empty() {
        CurveStatus::Inconclusive("no nonzero coupling".into())
    } else {
        let e_min = nonzero.iter().find(|r| r.g == g_min).unwrap().sup_error;
        if floor > e_min / 10.0 {
            CurveStatus::Inconclusive(format!("floor {floor:.3e} exceeds E(g_min)/10 = {:.3e}", e_min / 10.0))
        } else {
            CurveStatus::Conclusive
        }
    };
    Ok(ErrorCurve {
        times: times.clone(),
        rows,
        propagation_floor,
        kernel_floor,
        floor,
        status,
        ratio_consistency,
        scaled_spread,
        sred_defect: sred,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkls::build_generator;
    use crate::kernel::DCoefficients;
    use crate::oracle::hamiltonian::build_hamiltonian;
    use crate::oracle::modes::{Mode, ModeSet};
    use crate::oracle::space::TruncatedSpace;
    use crate::spin::{ladder, pauli};

    fn model(g: f64, cap: usize) -> FullHamiltonian {
        let modes = ModeSet::uniform(
            (0..8)
                .map(|j| Mode {
                    omega: 0.5 + 0.5 * j as f64,
                    coupling: 0.25,
                })
                .collect(),
        )
        .unwrap();
        let space = TruncatedSpace::new(24, cap, 1 << 16).unwrap();
        build_hamiltonian(&modes, 1.0, g, &space).unwrap()
    }

    fn general() -> SpinObservable {
        SpinObservable::from_rows([[C64::new(0.3, 0.0), C64::new(-0.2, 0.9)], [C64::new(1.1, 0.4), C64::new(-0.7, 0.0)]])
    }

    #[test]
    fn identity_time_returns_input() {
        let h = model(0.5, 2);
        let s = general();
        let r = reduced_observable(&h, &s, 0.0, &EvolveSettings::default()).unwrap();
        assert!((r - s).norm() < 1e-12);
    }

    #[test]
    fn free_ladder_rotates() {
        let h = model(0.0, 2);
        for m in [-1, 0, 1] {
            for &t in &[0.7, 4.0] {
                let r = reduced_observable(&h, &ladder(m).unwrap(), t, &EvolveSettings::default()).unwrap();
                let want = ladder(m).unwrap().scale(C64::from_polar(1.0, 2.0 * m as f64 * t));
                assert!((r - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_is_fixed() {
        let h = model(0.8, 2);
        let r = reduced_observable(&h, &SpinObservable::identity(), 2.5, &EvolveSettings::default()).unwrap();
        assert!((r - SpinObservable::identity()).norm() < 1e-10);
    }

    #[test]
    fn hermitian_stays_hermitian_and_bounded() {
        let h = model(0.6, 2);
        let frames = spin_frames(&h, &[0.5, 2.0, 6.0], &EvolveSettings::default()).unwrap();
        for f in frames {
            for j in 1..=3 {
                let r = f.reduce(&pauli(j).unwrap());
                assert!(r.hermiticity_defect() < 1e-12);
                let [lo, hi] = r.hermitian_eigenvalues();
                assert!(lo >= -1.0 - 1e-10 && hi <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn sred_paths_agree() {
        let free = model(0.0, 2);
        let s = general();
        let t = 1.9;
        let frame = spin_frames(&free, &[t], &EvolveSettings::default()).unwrap()[0];
        assert!((frame.reduce(&larmor(-t, 1.0, &s)) - s).norm() < 1e-12);
        assert!(sred_consistency(&free, &s, 0.0, &EvolveSettings::default()).unwrap() < 1e-14);
        let coupled = model(0.5, 2);
        assert!(sred_consistency(&coupled, &s, 5.0, &EvolveSettings::default()).unwrap() < 1e-8);
    }

    #[test]
    fn curve_of_unit_sits_on_floor_and_cap_zero_is_inconclusive() {
        let d = DCoefficients::new(C64::new(0.5, -0.6), C64::new(0.0, -0.3), C64::new(0.0, -0.2));
        let approx = ApproxPropagator::new(&build_generator(&d).unwrap(), 1.0).unwrap();
        let settings = ErrorCurveSettings {
            times: (0..=10).map(|k| k as f64 * 0.5).collect(),
            evolve: EvolveSettings::default(),
            kernel_moment: 1e-6,
        };
        let c = error_curve(&model(0.0, 2), &approx, &SpinObservable::identity(), &[0.2, 0.1], &settings).unwrap();
        assert!(c.rows.iter().all(|r| r.sup_error <= c.floor.max(1e-10)));
        let c0 = error_curve(&model(0.0, 0), &approx, &pauli(3).unwrap(), &[0.2, 0.1], &settings).unwrap();
        assert_eq!(c0.status.label(), "inconclusive");
        assert!(error_curve(&model(0.0, 1), &approx, &pauli(3).unwrap(), &[], &settings).is_err());
    }
}
