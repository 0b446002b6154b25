//! The GKLS generator of spin relaxation, its spectrum and semigroup.
//!
//! `L(A) = Σ_m Re d_m [σ(m) A σ(m)† − ½{A, σ(m)σ(m)†}] − (i/2)[A, H_L]`
//! with `H_L = Σ_m Im d_m σ(m)σ(m)†`. All 4×4 representations act on
//! ladder coefficients `[c_I, c₊, c₀, c₋]` (see [`crate::spin::ladder_basis`]).
//! The coupling enters only through the scaled time `τ = t·g²`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};

use crate::error::{Error, Result};
use crate::kernel::DCoefficients;
use crate::spin::{ladder_basis, ladder_unchecked, LadderCoefficients, SpinObservable, C64, I, ONE, ZERO};

/// Largest eigenvector-matrix condition number accepted by the spectral
/// exponential before falling back to scaling and squaring.
const MAX_EIGVEC_CONDITION: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct GklsGenerator {
    matrix4: Matrix4<C64>,
    d: DCoefficients,
    h_l: SpinObservable,
}

/// An eigenvalue of `L` together with an eigenvector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenpair {
    pub value: C64,
    pub vector: SpinObservable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigensystem {
    pub pairs: Vec<Eigenpair>,
    /// Condition number of the eigenvector matrix in the ladder basis.
    pub condition: f64,
}

/// `e^{τL}` in the ladder basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Semigroup {
    tau: f64,
    matrix4: Matrix4<C64>,
}

/// Structural certificate of a semigroup element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpReport {
    pub min_choi_eigenvalue: f64,
    pub trace_defect: f64,
    pub unitality_defect: f64,
    pub hermiticity_defect: f64,
}

impl CpReport {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn passed(&self) -> bool {
        self.min_choi_eigenvalue >= -Self::TOLERANCE
            && self.trace_defect <= Self::TOLERANCE
            && self.unitality_defect <= Self::TOLERANCE
    }
}

/// Build `L` from the coefficients, rejecting negative relaxation rates.
pub fn build_generator(d: &DCoefficients) -> Result<GklsGenerator> {
    for m in [1, 0, -1] {
        let re = d.get(m)?.re;
        if re < 0.0 {
            return Err(Error::NegativeRate(re));
        }
    }
    Ok(GklsGenerator::from_coefficients_unchecked(d))
}

impl GklsGenerator {
    /// Build `L` without checking the sign of the rates. A negative rate
    /// yields a generator whose semigroup is not completely positive.
    pub fn from_coefficients_unchecked(d: &DCoefficients) -> Self {
        let mut h_l = SpinObservable::zero();
        for m in [1, 0, -1] {
            let s = ladder_unchecked(m);
            h_l = h_l + C64::new(d.get(m).unwrap().im, 0.0) * (s * s.adjoint());
        }
        let mut gen = Self {
            matrix4: Matrix4::zeros(),
            d: d.clone(),
            h_l,
        };
        let basis = ladder_basis();
        for (j, b) in basis.iter().enumerate() {
            let col = gen.apply_direct(b).decompose().to_array();
            for i in 0..4 {
                gen.matrix4[(i, j)] = col[i];
            }
        }
        gen
    }

    pub fn matrix4(&self) -> &Matrix4<C64> {
        &self.matrix4
    }

    pub fn coefficients(&self) -> &DCoefficients {
        &self.d
    }

    /// Lamb-shift Hamiltonian `H_L`.
    pub fn h_l(&self) -> &SpinObservable {
        &self.h_l
    }

    /// Evaluate the defining sum directly on 2×2 matrices.
    pub fn apply_direct(&self, a: &SpinObservable) -> SpinObservable {
        let mut out = SpinObservable::zero();
        for m in [1, 0, -1] {
            let rate = self.d.get(m).unwrap().re;
            if rate == 0.0 {
                continue;
            }
            let s = ladder_unchecked(m);
            let sd = s.adjoint();
            let jump = s * *a * sd - 0.5 * a.anticommutator(&(s * sd));
            out = out + rate * jump;
        }
        out - (0.5 * I) * a.commutator(&self.h_l)
    }

    /// `L(A)` through the 4×4 representation.
    pub fn apply(&self, a: &SpinObservable) -> SpinObservable {
        apply4(&self.matrix4, a)
    }

    /// Closed-form eigenpairs `{0 ↔ I, λ₊ ↔ σ(1), −2Re d₁ ↔ σ(0)+I, λ₋ ↔ σ(-1)}`
    /// with `λ± = −Re d₁ ± i(Im d₁ − Im d₋₁)`, valid when `Re d₀ = Re d₋₁ = 0`.
    pub fn closed_form_eigenpairs(&self) -> [Eigenpair; 4] {
        let r = self.d.re_d1();
        let s = self.d.lamb_shift();
        [
            Eigenpair {
                value: ZERO,
                vector: SpinObservable::identity(),
            },
            Eigenpair {
                value: C64::new(-r, s),
                vector: ladder_unchecked(1),
            },
            Eigenpair {
                value: C64::new(-2.0 * r, 0.0),
                vector: ladder_unchecked(0) + SpinObservable::identity(),
            },
            Eigenpair {
                value: C64::new(-r, -s),
                vector: ladder_unchecked(-1),
            },
        ]
    }

    /// Numerical eigendecomposition of the 4×4 representation.
    ///
    /// Eigenvalues come from a complex Schur form; eigenvectors are the
    /// right singular vectors of `M − λ` with the smallest singular values,
    /// taking as many as the multiplicity of each eigenvalue cluster.
    pub fn eigensystem(&self) -> Result<Eigensystem> {
        let m = self.matrix4;
        let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1e-300);
        let schur = m.schur();
        let (_, t) = schur.unpack();
        let values: Vec<C64> = (0..4).map(|i| t[(i, i)]).collect();

        let cluster_tol = 1e-9 * scale;
        let mut used = [false; 4];
        let mut pairs = Vec::with_capacity(4);
        for i in 0..4 {
            if used[i] {
                continue;
            }
            let group: Vec<usize> = (i..4)
                .filter(|&j| !used[j] && (values[j] - values[i]).norm() <= cluster_tol)
                .collect();
            let mean = group.iter().map(|&j| values[j]).sum::<C64>() / group.len() as f64;
            for &j in &group {
                used[j] = true;
            }
            let shifted = m - Matrix4::identity() * mean;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.expect("requested V^T");
            let mut order: Vec<usize> = (0..4).collect();
            order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
            for &k in order.iter().take(group.len()) {
                let v: Vector4<C64> = v_t.row(k).adjoint();
                // a snapped eigenvalue keeps exact zeros exact
                let value = if mean.norm() <= 1e-14 * scale { ZERO } else { mean };
                pairs.push(Eigenpair {
                    value,
                    vector: normalize_phase(LadderCoefficients::from_array([v[0], v[1], v[2], v[3]]).reconstruct()),
                });
            }
        }

        let mut vm = Matrix4::<C64>::zeros();
        for (j, p) in pairs.iter().enumerate() {
            let c = p.vector.decompose().to_array();
            for i in 0..4 {
                vm[(i, j)] = c[i];
            }
        }
        let sv = vm.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition < 1e12) {
            return Err(Error::Defective(condition));
        }
        Ok(Eigensystem { pairs, condition })
    }

    /// `min |Re λ|` over the nonzero eigenvalues of the closed form.
    pub fn spectral_gap(&self) -> f64 {
        self.closed_form_eigenpairs()
            .iter()
            .skip(1)
            .map(|p| p.value.re.abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// `e^{τL}`.
    pub fn semigroup(&self, tau: f64) -> Result<Semigroup> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
        }
        if tau == 0.0 {
            return Ok(Semigroup {
                tau,
                matrix4: Matrix4::identity(),
            });
        }
        let matrix4 = match self.eigensystem() {
            Ok(es) if es.condition < MAX_EIGVEC_CONDITION => spectral_exp(&es, tau)
                .unwrap_or_else(|| (self.matrix4 * C64::new(tau, 0.0)).exp()),
            _ => (self.matrix4 * C64::new(tau, 0.0)).exp(),
        };
        Ok(Semigroup { tau, matrix4 })
    }
}

fn spectral_exp(es: &Eigensystem, tau: f64) -> Option<Matrix4<C64>> {
    let mut v = Matrix4::<C64>::zeros();
    let mut d = Matrix4::<C64>::zeros();
    for (j, p) in es.pairs.iter().enumerate() {
        let c = p.vector.decompose().to_array();
        for i in 0..4 {
            v[(i, j)] = c[i];
        }
        d[(j, j)] = (p.value * tau).exp();
    }
    let inv = v.try_inverse()?;
    Some(v * d * inv)
}

/// Scale an eigenvector so that its largest ladder coefficient is real
/// positive; makes the output deterministic.
fn normalize_phase(a: SpinObservable) -> SpinObservable {
    let c = a.decompose().to_array();
    let big = c
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or(ONE);
    if big.norm() == 0.0 {
        return a;
    }
    a.scale(big.conj() / big.norm())
}

pub(crate) fn apply4(m: &Matrix4<C64>, a: &SpinObservable) -> SpinObservable {
    let c = Vector4::from(a.decompose().to_array());
    let out = m * c;
    LadderCoefficients::from_array([out[0], out[1], out[2], out[3]]).reconstruct()
}

impl Semigroup {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn matrix4(&self) -> &Matrix4<C64> {
        &self.matrix4
    }

    pub fn apply(&self, a: &SpinObservable) -> SpinObservable {
        apply4(&self.matrix4, a)
    }

    /// Composition `self ∘ other`.
    pub fn then(&self, other: &Semigroup) -> Semigroup {
        Semigroup {
            tau: self.tau + other.tau,
            matrix4: self.matrix4 * other.matrix4,
        }
    }
}

/// Certify the Schrödinger-picture dual of `S`: Choi positivity, trace
/// preservation, unitality of `S` and Hermiticity preservation.
///
/// The dual `S_*` satisfies `tr(S_*(ρ) A) = tr(ρ S(A))`, so
/// `S_*(E_ij)_{lk} = S(E_kl)_{ji}`. The Choi matrix is the unnormalized
/// `Σ_ij E_ij ⊗ S_*(E_ij)`.
pub fn verify_cp(s: &Semigroup) -> CpReport {
    let unit = |i: usize, j: usize| {
        let mut m = Matrix2::zeros();
        m[(i, j)] = ONE;
        SpinObservable::new(m)
    };
    let mut images = [[SpinObservable::zero(); 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            images[k][l] = s.apply(&unit(k, l));
        }
    }
    let mut choi = Matrix4::<C64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    choi[(2 * i + l, 2 * j + k)] = images[k][l].entry(j, i);
                }
            }
        }
    }
    let herm = (choi + choi.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let min_choi_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);

    // tr S_*(E_ij) = Σ_l S(E_ll)_{ji}
    let mut trace_defect = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let tr = images[0][0].entry(j, i) + images[1][1].entry(j, i);
            let want = if i == j { ONE } else { ZERO };
            trace_defect = trace_defect.max((tr - want).norm());
        }
    }
    let unitality_defect = (s.apply(&SpinObservable::identity()) - SpinObservable::identity()).max_abs();
    let hermiticity_defect = (1..=3)
        .map(|j| s.apply(&crate::spin::pauli(j).unwrap()).hermiticity_defect())
        .fold(0.0, f64::max);
    CpReport {
        min_choi_eigenvalue,
        trace_defect,
        unitality_defect,
        hermiticity_defect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::pauli;
    use proptest::prelude::*;

    fn sample_d() -> DCoefficients {
        DCoefficients::new(C64::new(0.5, 0.3), C64::new(0.0, -0.8), C64::new(0.0, -0.1))
    }

    fn close(a: &SpinObservable, b: &SpinObservable, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn fixed_identity_and_ladder_actions() {
        let d = sample_d();
        let l = build_generator(&d).unwrap();
        let r = 0.5;
        let s = 0.3 - (-0.1);
        assert!(l.apply(&SpinObservable::identity()).max_abs() < 1e-15);
        let p = ladder_unchecked(1);
        let z = ladder_unchecked(0);
        let m = ladder_unchecked(-1);
        let id = SpinObservable::identity();
        assert!(close(&l.apply(&p), &(C64::new(-r, s) * p), 1e-14));
        assert!(close(&l.apply(&m), &(C64::new(-r, -s) * m), 1e-14));
        assert!(close(&l.apply(&z), &((-2.0 * r) * (z + id)), 1e-14));
        assert!(close(&l.apply(&(z + id)), &((-2.0 * r) * (z + id)), 1e-14));
        assert_eq!(l.apply(&SpinObservable::zero()), SpinObservable::zero());
    }

    #[test]
    fn lamb_hamiltonian() {
        let l = build_generator(&sample_d()).unwrap();
        // H_L = 0.3(I+σ₀) − 0.8 I − 0.1(I−σ₀)
        let want = (0.3 - 0.8 - 0.1) * SpinObservable::identity() + (0.3 + 0.1) * pauli(3).unwrap();
        assert!(close(l.h_l(), &want, 1e-15));
    }

    #[test]
    fn rejects_negative_rate() {
        let d = DCoefficients::new(C64::new(-0.1, 0.0), ZERO, ZERO);
        assert!(matches!(build_generator(&d), Err(Error::NegativeRate(_))));
    }

    #[test]
    fn eigensystem_matches_closed_form() {
        let l = build_generator(&sample_d()).unwrap();
        let es = l.eigensystem().unwrap();
        assert_eq!(es.pairs.len(), 4);
        for want in l.closed_form_eigenpairs() {
            let got = es
                .pairs
                .iter()
                .find(|p| (p.value - want.value).norm() < 1e-10)
                .expect("eigenvalue present");
            // parallel eigenvectors: |⟨u, v⟩| = |u||v| in coefficient space
            let u = got.vector.decompose().to_array();
            let v = want.vector.decompose().to_array();
            let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            let nu: f64 = u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let nv: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!((dot.norm() - nu * nv).abs() < 1e-10);
        }
        assert!((l.spectral_gap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_zero_rate_is_still_diagonalizable() {
        let d = DCoefficients::new(C64::new(0.0, 0.2), ZERO, C64::new(0.0, 0.2));
        let l = build_generator(&d).unwrap();
        let es = l.eigensystem().unwrap();
        assert!(es.pairs.iter().all(|p| p.value.norm() < 1e-12));
        assert!(es.condition < 10.0);
    }

    #[test]
    fn semigroup_on_longitudinal_block() {
        let l = build_generator(&sample_d()).unwrap();
        let z = ladder_unchecked(0);
        let id = SpinObservable::identity();
        for &tau in &[0.0, 0.3, 2.0, 9.0] {
            let s = l.semigroup(tau).unwrap();
            let e = (-2.0 * 0.5 * tau).exp();
            let want = e * z + (e - 1.0) * id;
            assert!(close(&s.apply(&z), &want, 1e-12));
            assert!(close(&s.apply(&id), &id, 1e-12));
            // fallback path agrees
            let pade = (l.matrix4 * C64::new(tau, 0.0)).exp();
            assert!((pade - s.matrix4).iter().all(|x| x.norm() < 1e-12));
        }
        assert_eq!(*l.semigroup(0.0).unwrap().matrix4(), Matrix4::identity());
        assert!(l.semigroup(-1.0).is_err());
    }

    #[test]
    fn identity_channel_certificate() {
        let l = build_generator(&sample_d()).unwrap();
        let rep = verify_cp(&l.semigroup(0.0).unwrap());
        assert!(rep.min_choi_eigenvalue.abs() < 1e-14);
        assert_eq!(rep.trace_defect, 0.0);
        assert_eq!(rep.unitality_defect, 0.0);
        assert!(rep.passed());
    }

    #[test]
    fn negative_rate_breaks_complete_positivity() {
        let d = DCoefficients::new(C64::new(-0.5, 0.3), ZERO, ZERO);
        let l = GklsGenerator::from_coefficients_unchecked(&d);
        let rep = verify_cp(&l.semigroup(1.0).unwrap());
        assert!(rep.min_choi_eigenvalue < -1e-3);
        assert!(!rep.passed());
    }

    proptest! {
        #[test]
        fn direct_and_matrix_forms_agree(
            v in prop::array::uniform8(-2.0f64..2.0),
            r in 0.0f64..2.0, s1 in -2.0f64..2.0, s0 in -2.0f64..2.0, sm in -2.0f64..2.0,
        ) {
            let d = DCoefficients::new(C64::new(r, s1), C64::new(0.0, s0), C64::new(0.0, sm));
            let l = build_generator(&d).unwrap();
            let a = SpinObservable::from_rows([
                [C64::new(v[0], v[1]), C64::new(v[2], v[3])],
                [C64::new(v[4], v[5]), C64::new(v[6], v[7])],
            ]);
            prop_assert!(close(&l.apply(&a), &l.apply_direct(&a), 1e-12));
            prop_assert!(close(&l.apply(&a.adjoint()), &l.apply(&a).adjoint(), 1e-12));
        }

        #[test]
        fn semigroup_law(t1 in 0.0f64..5.0, t2 in 0.0f64..5.0, r in 0.01f64..2.0, s in -2.0f64..2.0) {
            let d = DCoefficients::new(C64::new(r, s), C64::new(0.0, 0.4), C64::new(0.0, -0.2));
            let l = build_generator(&d).unwrap();
            let a = l.semigroup(t1).unwrap();
            let b = l.semigroup(t2).unwrap();
            let ab = l.semigroup(t1 + t2).unwrap();
            prop_assert!((a.then(&b).matrix4 - ab.matrix4).iter().all(|x| x.norm() < 1e-10));
            prop_assert!(verify_cp(&ab).passed());
        }
    }
}
