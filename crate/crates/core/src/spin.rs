//! Spin-1/2 operator algebra: Pauli matrices, the ladder basis
//! `{I, σ(1), σ(0), σ(-1)}`, the magnetic Hamiltonian and the free Larmor
//! evolution `γ_t A = e^{itH} A e^{-itH}`.
//!
//! The ladder elements keep the `1/√2` normalization
//! `σ(±1) = (σ₁ ± iσ₂)/√2`, so `σ(1) = [[0, √2], [0, 0]]`. They are not
//! orthonormal for the Hilbert–Schmidt product.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A linear operator on the spin space `C²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinObservable(Matrix2<C64>);

impl SpinObservable {
    pub fn new(m: Matrix2<C64>) -> Self {
        Self(m)
    }

    /// Build from row-major entries `[[a, b], [c, d]]`.
    pub fn from_rows(rows: [[C64; 2]; 2]) -> Self {
        Self(Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]))
    }

    pub fn from_real_rows(rows: [[f64; 2]; 2]) -> Self {
        Self(Matrix2::new(
            rows[0][0].into(),
            rows[0][1].into(),
            rows[1][0].into(),
            rows[1][1].into(),
        ))
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn zero() -> Self {
        Self(Matrix2::zeros())
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0[(0, 0)] + self.0[(1, 1)]
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(self.0 * c)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 + other.0 * self.0)
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        let g = self.0.adjoint() * self.0;
        let tr = (g[(0, 0)] + g[(1, 1)]).re;
        let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        (0.5 * (tr + disc)).max(0.0).sqrt()
    }

    /// Largest entry modulus, used for defect reporting.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    /// `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.0 - self.0.adjoint())
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Eigenvalues of a Hermitian observable in ascending order.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = self.0[(0, 1)];
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }

    /// `⟨a| A |b⟩` for spinors `a`, `b`.
    pub fn matrix_element(&self, a: &[C64; 2], b: &[C64; 2]) -> C64 {
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += a[i].conj() * self.0[(i, j)] * b[j];
            }
        }
        acc
    }

    /// Coefficients in the ladder basis.
    pub fn decompose(&self) -> LadderCoefficients {
        let m = &self.0;
        LadderCoefficients {
            identity: 0.5 * (m[(0, 0)] + m[(1, 1)]),
            plus: m[(0, 1)] / SQRT_2,
            zero: 0.5 * (m[(0, 0)] - m[(1, 1)]),
            minus: m[(1, 0)] / SQRT_2,
        }
    }
}

impl Add for SpinObservable {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for SpinObservable {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for SpinObservable {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Mul for SpinObservable {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Mul<SpinObservable> for C64 {
    type Output = SpinObservable;
    fn mul(self, rhs: SpinObservable) -> SpinObservable {
        rhs.scale(self)
    }
}

impl Mul<SpinObservable> for f64 {
    type Output = SpinObservable;
    fn mul(self, rhs: SpinObservable) -> SpinObservable {
        rhs.scale(C64::new(self, 0.0))
    }
}

impl fmt::Display for SpinObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            m[(0, 0)],
            m[(0, 1)],
            m[(1, 0)],
            m[(1, 1)]
        )
    }
}

/// Coefficients `(c_I, c₊, c₀, c₋)` of `A = c_I·I + c₊·σ(1) + c₀·σ(0) + c₋·σ(-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderCoefficients {
    pub identity: C64,
    pub plus: C64,
    pub zero: C64,
    pub minus: C64,
}

impl LadderCoefficients {
    /// Basis order used by every 4×4 representation in this crate.
    pub fn to_array(&self) -> [C64; 4] {
        [self.identity, self.plus, self.zero, self.minus]
    }

    pub fn from_array(c: [C64; 4]) -> Self {
        Self {
            identity: c[0],
            plus: c[1],
            zero: c[2],
            minus: c[3],
        }
    }

    pub fn reconstruct(&self) -> SpinObservable {
        let s = SQRT_2;
        SpinObservable::from_rows([
            [self.identity + self.zero, self.plus * s],
            [self.minus * s, self.identity - self.zero],
        ])
    }
}

/// The ladder basis `[I, σ(1), σ(0), σ(-1)]`.
pub fn ladder_basis() -> [SpinObservable; 4] {
    [
        SpinObservable::identity(),
        ladder_unchecked(1),
        ladder_unchecked(0),
        ladder_unchecked(-1),
    ]
}

/// Pauli matrix `σ_j` for `j ∈ {1, 2, 3}`.
pub fn pauli(j: usize) -> Result<SpinObservable> {
    match j {
        1 => Ok(SpinObservable::from_real_rows([[0.0, 1.0], [1.0, 0.0]])),
        2 => Ok(SpinObservable::from_rows([[ZERO, -I], [I, ZERO]])),
        3 => Ok(SpinObservable::from_real_rows([[1.0, 0.0], [0.0, -1.0]])),
        _ => Err(Error::IndexOutOfRange(j as i32)),
    }
}

/// Ladder operator `σ(m)` for `m ∈ {1, 0, -1}`.
pub fn ladder(m: i32) -> Result<SpinObservable> {
    match m {
        -1..=1 => Ok(ladder_unchecked(m)),
        _ => Err(Error::IndexOutOfRange(m)),
    }
}

pub(crate) fn ladder_unchecked(m: i32) -> SpinObservable {
    let s = C64::new(SQRT_2, 0.0);
    match m {
        1 => SpinObservable::from_rows([[ZERO, s], [ZERO, ZERO]]),
        0 => SpinObservable::from_real_rows([[1.0, 0.0], [0.0, -1.0]]),
        _ => SpinObservable::from_rows([[ZERO, ZERO], [s, ZERO]]),
    }
}

/// Constant external magnetic field, in units where it multiplies the
/// Pauli matrices directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExternalField {
    components: [f64; 3],
}

impl ExternalField {
    pub fn new(components: [f64; 3]) -> Result<Self> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("field components must be finite".into()));
        }
        Ok(Self { components })
    }

    /// The canonical configuration `(0, 0, β)`.
    pub fn along_z(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::NonCanonicalField(0.0, 0.0, beta));
        }
        Ok(Self {
            components: [0.0, 0.0, beta],
        })
    }

    pub fn components(&self) -> [f64; 3] {
        self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|&c| c == 0.0)
    }

    /// `β` if the field is `(0, 0, β)` with `β > 0`.
    pub fn canonical_beta(&self) -> Result<f64> {
        let [x, y, z] = self.components;
        if x == 0.0 && y == 0.0 && z > 0.0 {
            Ok(z)
        } else {
            Err(Error::NonCanonicalField(x, y, z))
        }
    }
}

/// `H_mag = Σ_m B_m σ_m`.
pub fn h_mag(field: &ExternalField) -> SpinObservable {
    let [bx, by, bz] = field.components;
    let sx = pauli(1).unwrap();
    let sy = pauli(2).unwrap();
    let sz = pauli(3).unwrap();
    bx * sx + by * sy + bz * sz
}

/// `γ_t A` for the canonical field `(0, 0, β)`, using
/// `e^{iβtσ₃} = diag(e^{iβt}, e^{-iβt})`.
pub fn free_evolve(t: f64, field: &ExternalField, a: &SpinObservable) -> Result<SpinObservable> {
    let beta = field.canonical_beta()?;
    Ok(larmor(t, beta, a))
}

/// Closed-form Larmor rotation; entry `(i, j)` picks up `e^{iβt(s_i - s_j)}`.
pub(crate) fn larmor(t: f64, beta: f64, a: &SpinObservable) -> SpinObservable {
    let m = a.matrix();
    let phase = C64::from_polar(1.0, 2.0 * beta * t);
    SpinObservable::from_rows([
        [m[(0, 0)], m[(0, 1)] * phase],
        [m[(1, 0)] * phase.conj(), m[(1, 1)]],
    ])
}

/// `γ_t A` for an arbitrary field, from
/// `e^{itB·σ} = cos(|B|t) I + i sin(|B|t) B̂·σ`.
pub fn free_evolve_general(t: f64, field: &ExternalField, a: &SpinObservable) -> SpinObservable {
    let u = spin_unitary(t, field);
    SpinObservable(u.0 * a.0 * u.0.adjoint())
}

/// `e^{itH_mag}`.
pub fn spin_unitary(t: f64, field: &ExternalField) -> SpinObservable {
    let b = field.components;
    let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    if norm == 0.0 {
        return SpinObservable::identity();
    }
    let n = SpinObservable::new(h_mag(field).0 / C64::new(norm, 0.0));
    let (s, c) = (norm * t).sin_cos();
    c * SpinObservable::identity() + (I * s) * n
}
