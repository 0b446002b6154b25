use qsr::oracle::{
    build_hamiltonian, discretize_bath, reduced_observable, spin_frames, sred_consistency, BathDiscretization, EvolveSettings,
    ModeSet, TruncatedSpace,
};
use qsr::spin::{pauli, SpinObservable};
use qsr::{BathKernel, C64};

fn comb(n_modes: usize) -> ModeSet {
    let spec = BathDiscretization {
        n_modes,
        ..Default::default()
    };
    discretize_bath(&BathKernel::standard(), &spec, 1.0).unwrap().0
}

fn general() -> SpinObservable {
    SpinObservable::from_rows([[C64::new(0.4, 0.0), C64::new(0.3, -0.5)], [C64::new(-0.2, 0.8), C64::new(-1.0, 0.0)]])
}

/// Rotation by π/2 about z, taking σ₁ to σ₂ under conjugation.
fn quarter_turn() -> SpinObservable {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    SpinObservable::from_rows([[C64::new(r, -r), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(r, r)]])
}

#[test]
fn relabeling_the_coupled_channel() {
    let modes = comb(12);
    let space = TruncatedSpace::new(modes.total_modes(), 2, 1 << 20).unwrap();
    let only = |c| build_hamiltonian(&modes.restricted_to_channel(c), 1.0, 0.4, &space).unwrap();
    let (h1, h2) = (only(0), only(1));
    let u = quarter_turn();
    let s = general();
    for &t in &[1.0, 6.0] {
        let a = reduced_observable(&h2, &s, t, &EvolveSettings::default()).unwrap();
        let b = u.clone() * reduced_observable(&h1, &(u.adjoint() * s.clone() * u.clone()), t, &EvolveSettings::default()).unwrap() * u.adjoint();
        assert!((a - b).norm() < 1e-9, "t = {t}");
    }
}

#[test]
fn reduced_spectrum_stays_in_unit_interval() {
    let modes = comb(40);
    let space = TruncatedSpace::new(modes.total_modes(), 2, 1 << 20).unwrap();
    let h = build_hamiltonian(&modes, 1.0, 0.3, &space).unwrap();
    let times: Vec<f64> = (0..=20).map(|k| k as f64).collect();
    let obs = [pauli(1).unwrap(), pauli(2).unwrap(), pauli(3).unwrap()];
    for f in spin_frames(&h, &times, &EvolveSettings::default()).unwrap() {
        for s in &obs {
            let [lo, hi] = f.reduce(s).hermitian_eigenvalues();
            assert!(lo >= -1.0 - 1e-9 && hi <= 1.0 + 1e-9);
        }
        let unit = f.reduce(&SpinObservable::identity());
        assert!((unit - SpinObservable::identity()).norm() < 1e-9);
    }
}

#[test]
fn sred_defect_at_default_scale() {
    let modes = comb(200);
    let space = TruncatedSpace::new(modes.total_modes(), 2, 1 << 22).unwrap();
    let h = build_hamiltonian(&modes, 1.0, 0.1, &space).unwrap();
    let defect = sred_consistency(&h, &general(), 5.0, &EvolveSettings::default()).unwrap();
    assert!(defect < 1e-8, "{defect}");
}
