//! `ψ(t) = e^{-itH} ψ` by dense eigendecomposition for small spaces and by
//! adaptive short-iterative Lanczos steps otherwise.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::hamiltonian::FullHamiltonian;
use crate::error::{Error, Result};
use crate::spin::{C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagatorKind {
    /// Dense below `dense_threshold`, Krylov above.
    Auto,
    Dense,
    Krylov,
}

impl std::str::FromStr for PropagatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "dense" => Ok(Self::Dense),
            "krylov" => Ok(Self::Krylov),
            other => Err(Error::InvalidArgument(format!("unknown propagator '{other}'"))),
        }
    }
}

impl std::fmt::Display for PropagatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Auto => "auto",
            Self::Dense => "dense",
            Self::Krylov => "krylov",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveSettings {
    pub kind: PropagatorKind,
    pub dense_threshold: usize,
    pub krylov_dim: usize,
    /// Accepted Lanczos error per unit time.
    pub tolerance: f64,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self {
            kind: PropagatorKind::Auto,
            dense_threshold: 2000,
            krylov_dim: 24,
            tolerance: 1e-11,
        }
    }
}

/// Precomputed propagation data for one Hamiltonian.
pub struct Evolver<'a> {
    h: &'a FullHamiltonian,
    settings: EvolveSettings,
    dense: Option<(DVector<f64>, DMatrix<C64>)>,
}

impl<'a> Evolver<'a> {
    pub fn new(h: &'a FullHamiltonian, settings: EvolveSettings) -> Self {
        let use_dense = match settings.kind {
            PropagatorKind::Dense => true,
            PropagatorKind::Krylov => false,
            PropagatorKind::Auto => h.dimension() <= settings.dense_threshold,
        };
        let dense = use_dense.then(|| {
            let eig = SymmetricEigen::new(h.to_dense());
            (eig.eigenvalues, eig.eigenvectors)
        });
        Self { h, settings, dense }
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    /// `e^{-itH} ψ`.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Result<Vec<C64>> {
        let mut out = psi.to_vec();
        let mut states = vec![std::mem::take(&mut out)];
        self.propagate(&mut states, &[t], |_, _| {})?;
        Ok(states.pop().unwrap())
    }

    /// Advance every state through the ascending `times` (starting from
    /// `t = 0`), calling `visit(i, states)` at each `times[i]`.
    pub fn propagate<F>(&self, states: &mut [Vec<C64>], times: &[f64], mut visit: F) -> Result<()>
    where
        F: FnMut(usize, &[Vec<C64>]),
    {
        if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("times must be nonnegative and ascending".into()));
        }
        for s in states.iter() {
            if s.len() != self.h.dimension() {
                return Err(Error::InvalidArgument("state dimension mismatch".into()));
            }
        }
        if let Some((vals, vecs)) = &self.dense {
            let modal: Vec<DVector<C64>> = states
                .iter()
                .map(|s| vecs.adjoint() * DVector::from_column_slice(s))
                .collect();
            for (i, &t) in times.iter().enumerate() {
                for (s, m) in states.iter_mut().zip(&modal) {
                    let phased = DVector::from_iterator(
                        m.len(),
                        m.iter().zip(vals.iter()).map(|(c, &e)| c * C64::from_polar(1.0, -e * t)),
                    );
                    s.copy_from_slice((vecs * phased).as_slice());
                }
                visit(i, states);
            }
            return Ok(());
        }
        let mut lanczos = Lanczos::new(self.h.dimension(), self.settings.krylov_dim);
        let mut now = 0.0;
        for (i, &t) in times.iter().enumerate() {
            let dt = t - now;
            if dt > 0.0 {
                for s in states.iter_mut() {
                    lanczos.advance(self.h, s, dt, self.settings.tolerance)?;
                }
            }
            now = t;
            visit(i, states);
        }
        Ok(())
    }
}

/// `e^{-itH} ψ` for a normalized `ψ`.
pub fn evolve_state(h: &FullHamiltonian, psi: &[C64], t: f64, settings: &EvolveSettings) -> Result<Vec<C64>> {
    let n = norm(psi);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n));
    }
    Evolver::new(h, *settings).evolve(psi, t)
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

struct Lanczos {
    basis: Vec<Vec<C64>>,
    work: Vec<C64>,
}

impl Lanczos {
    fn new(dim: usize, m: usize) -> Self {
        let m = m.max(2);
        Self {
            basis: (0..=m).map(|_| vec![ZERO; dim]).collect(),
            work: vec![ZERO; dim],
        }
    }

    /// Replace `psi` by `e^{-i dt H} psi`, splitting `dt` into substeps whose
    /// a-posteriori error `β_m |[e^{-iτT}]_{m,1}| ‖ψ‖` stays below `tol·τ`.
    fn advance(&mut self, h: &FullHamiltonian, psi: &mut [C64], dt: f64, tol: f64) -> Result<()> {
        let mut remaining = dt;
        while remaining > 0.0 {
            let nrm = norm(psi);
            if nrm == 0.0 {
                return Ok(());
            }
            let m_max = self.basis.len() - 1;
            for (b, p) in self.basis[0].iter_mut().zip(psi.iter()) {
                *b = p / nrm;
            }
            let mut alpha = Vec::with_capacity(m_max);
            let mut beta = Vec::with_capacity(m_max);
            let mut m = m_max;
            for j in 0..m_max {
                h.apply(&self.basis[j], &mut self.work);
                if j > 0 {
                    let b = beta[j - 1];
                    for (w, v) in self.work.iter_mut().zip(&self.basis[j - 1]) {
                        *w -= v * b;
                    }
                }
                let a = inner(&self.basis[j], &self.work).re;
                for (w, v) in self.work.iter_mut().zip(&self.basis[j]) {
                    *w -= v * a;
                }
                // one local reorthogonalization pass
                let c = inner(&self.basis[j], &self.work);
                for (w, v) in self.work.iter_mut().zip(&self.basis[j]) {
                    *w -= v * c;
                }
                alpha.push(a + c.re);
                let b = norm(&self.work);
                beta.push(b);
                if b <= 1e-13 * (a.abs() + 1.0) {
                    m = j + 1;
                    break;
                }
                for (nv, w) in self.basis[j + 1].iter_mut().zip(&self.work) {
                    *nv = w / b;
                }
            }
            let exact = m < m_max || beta[m - 1] <= 1e-13;
            let mut t = DMatrix::<f64>::zeros(m, m);
            for j in 0..m {
                t[(j, j)] = alpha[j];
                if j + 1 < m {
                    t[(j, j + 1)] = beta[j];
                    t[(j + 1, j)] = beta[j];
                }
            }
            let eig = SymmetricEigen::new(t);
            let coeffs = |tau: f64| -> Vec<C64> {
                (0..m)
                    .map(|r| {
                        (0..m)
                            .map(|k| {
                                eig.eigenvectors[(r, k)]
                                    * eig.eigenvectors[(0, k)]
                                    * C64::from_polar(1.0, -tau * eig.eigenvalues[k])
                            })
                            .sum()
                    })
                    .collect()
            };
            let mut tau = remaining;
            let mut c = coeffs(tau);
            if !exact {
                let b_m = beta[m - 1];
                loop {
                    let err = b_m * c[m - 1].norm() * nrm;
                    if err <= tol * tau {
                        break;
                    }
                    tau *= 0.5;
                    if tau < 1e-9 * dt.max(1e-300) {
                        return Err(Error::KrylovNonConvergence { residual: err });
                    }
                    c = coeffs(tau);
                }
            }
            psi.fill(ZERO);
            for (j, cj) in c.iter().enumerate() {
                let f = cj * nrm;
                for (p, v) in psi.iter_mut().zip(&self.basis[j]) {
                    *p += v * f;
                }
            }
            remaining -= tau;
            if remaining < 1e-14 * dt {
                remaining = 0.0;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::hamiltonian::build_hamiltonian;
    use crate::oracle::modes::{Mode, ModeSet};
    use crate::oracle::space::TruncatedSpace;

    fn model(n: usize, cap: usize, g: f64) -> FullHamiltonian {
        let modes = ModeSet::uniform(
            (0..n)
                .map(|j| Mode {
                    omega: 0.3 + 6.0 * (j as f64 + 0.5) / n as f64,
                    coupling: 0.3 / (1.0 + j as f64).sqrt(),
                })
                .collect(),
        )
        .unwrap();
        let space = TruncatedSpace::new(3 * n, cap, 1 << 20).unwrap();
        build_hamiltonian(&modes, 1.0, g, &space).unwrap()
    }

    fn generic_state(dim: usize) -> Vec<C64> {
        let v: Vec<C64> = (0..dim)
            .map(|k| C64::from_polar(1.0 + (0.37 * k as f64).sin(), 0.7 * (k * k) as f64))
            .collect();
        let n = norm(&v);
        v.into_iter().map(|z| z / n).collect()
    }

    fn krylov() -> EvolveSettings {
        EvolveSettings {
            kind: PropagatorKind::Krylov,
            ..Default::default()
        }
    }

    #[test]
    fn free_vacuum_picks_up_zeeman_phases() {
        let h = model(4, 2, 0.0);
        for settings in [EvolveSettings::default(), krylov()] {
            for &t in &[0.5, 3.0, 10.0] {
                let mut psi = vec![ZERO; h.dimension()];
                psi[0] = C64::new(0.6, 0.0);
                psi[1] = C64::new(0.0, 0.8);
                let out = evolve_state(&h, &psi, t, &settings).unwrap();
                assert!((out[0] - psi[0] * C64::from_polar(1.0, -t)).norm() < 1e-12);
                assert!((out[1] - psi[1] * C64::from_polar(1.0, t)).norm() < 1e-12);
                assert!(out[2..].iter().all(|z| z.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn krylov_preserves_norm() {
        let h = model(20, 2, 0.5);
        let psi = generic_state(h.dimension());
        for &t in &[1.0, 10.0] {
            let out = evolve_state(&h, &psi, t, &krylov()).unwrap();
            assert!((norm(&out) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn group_property_and_agreement_with_dense() {
        let h = model(10, 2, 0.4);
        assert!(h.dimension() <= 2000);
        let psi = generic_state(h.dimension());
        let dense = EvolveSettings::default();
        let whole = evolve_state(&h, &psi, 3.5, &dense).unwrap();
        let split = evolve_state(&h, &evolve_state(&h, &psi, 1.25, &dense).unwrap(), 2.25, &dense).unwrap();
        let kry = evolve_state(&h, &psi, 3.5, &krylov()).unwrap();
        for ((a, b), c) in whole.iter().zip(&split).zip(&kry) {
            assert!((a - b).norm() < 1e-8);
            assert!((a - c).norm() < 1e-8);
        }
    }

    #[test]
    fn grid_sweep_matches_single_shots() {
        let h = model(6, 2, 0.6);
        let times = [0.0, 0.3, 1.1, 1.1, 4.0];
        let psi = generic_state(h.dimension());
        let ev = Evolver::new(&h, krylov());
        let mut states = vec![psi.clone()];
        let mut seen = Vec::new();
        ev.propagate(&mut states, &times, |i, s| seen.push((i, s[0].clone()))).unwrap();
        assert_eq!(seen.len(), times.len());
        for (i, s) in seen {
            let want = evolve_state(&h, &psi, times[i], &EvolveSettings::default()).unwrap();
            let d: f64 = s.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(d < 1e-9, "t = {}: {d}", times[i]);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let h = model(2, 1, 0.1);
        let psi = vec![ZERO; h.dimension()];
        assert!(matches!(evolve_state(&h, &psi, 1.0, &EvolveSettings::default()), Err(Error::NotNormalized(_))));
        let ev = Evolver::new(&h, EvolveSettings::default());
        let mut states = vec![generic_state(h.dimension())];
        assert!(ev.propagate(&mut states, &[1.0, 0.5], |_, _| {}).is_err());
        assert!("lanczos".parse::<PropagatorKind>().is_err());
    }
}
