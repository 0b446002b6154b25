//! The approximate Heisenberg evolution `e^{tg²L} γ_t σ`, Bloch-vector
//! trajectories and the relaxation rates read off the spectrum of `L`.
//!
//! `L` is diagonalized once; each time point then costs four scalar
//! exponentials. Both `γ_t` and `e^{τL}` are block maps on
//! `span{σ(1)}`, `span{σ(-1)}`, `span{I, σ(0)}`, so they commute.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::gkls::GklsGenerator;
use crate::kernel::DCoefficients;
use crate::spin::{larmor, pauli, LadderCoefficients, SpinObservable, C64};

/// Imaginary parts of Bloch components below this are discarded.
pub const REALITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ApproxPropagator {
    beta: f64,
    vectors: Matrix4<C64>,
    inverse: Matrix4<C64>,
    values: Vector4<C64>,
}

impl ApproxPropagator {
    pub fn new(generator: &GklsGenerator, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::NonCanonicalField(0.0, 0.0, beta));
        }
        let es = generator.eigensystem()?;
        let mut vectors = Matrix4::<C64>::zeros();
        let mut values = Vector4::<C64>::zeros();
        for (j, p) in es.pairs.iter().enumerate() {
            let c = p.vector.decompose().to_array();
            for i in 0..4 {
                vectors[(i, j)] = c[i];
            }
            values[j] = p.value;
        }
        let inverse = vectors.try_inverse().ok_or(Error::Defective(es.condition))?;
        Ok(Self {
            beta,
            vectors,
            inverse,
            values,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `e^{tg²L} γ_t σ`.
    pub fn approx_heisenberg(&self, t: f64, g: f64, sigma: &SpinObservable) -> Result<SpinObservable> {
        if !(t >= 0.0 && t.is_finite()) || !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidArgument(format!("need t ≥ 0 and g ≥ 0, got t = {t}, g = {g}")));
        }
        let rotated = larmor(t, self.beta, sigma);
        if g == 0.0 {
            return Ok(rotated);
        }
        let tau = t * g * g;
        let c = Vector4::from(rotated.decompose().to_array());
        let mut modal = self.inverse * c;
        for j in 0..4 {
            modal[j] *= (self.values[j] * tau).exp();
        }
        let out = self.vectors * modal;
        Ok(LadderCoefficients::from_array([out[0], out[1], out[2], out[3]]).reconstruct())
    }

    /// Bloch vector `(⟨σ₁⟩, ⟨σ₂⟩, ⟨σ₃⟩)` at each time for initial spinor `a`.
    pub fn bloch_trajectory(&self, a: [C64; 2], times: &[f64], g: f64) -> Result<Trajectory> {
        let norm = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        check_times(times)?;
        let paulis = [pauli(1)?, pauli(2)?, pauli(3)?];
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let mut v = [0.0; 3];
            for (j, s) in paulis.iter().enumerate() {
                let e = self.approx_heisenberg(t, g, s)?.matrix_element(&a, &a);
                if e.im.abs() > REALITY_TOLERANCE {
                    return Err(Error::ComplexExpectation(e.im));
                }
                v[j] = e.re;
            }
            out.push(v);
        }
        Ok(Trajectory {
            times: times.to_vec(),
            values: TrajectoryValues::Bloch(out),
        })
    }

    /// `e^{tg²L}γ_tσ` at each time.
    pub fn observable_trajectory(&self, sigma: &SpinObservable, times: &[f64], g: f64) -> Result<Trajectory> {
        check_times(times)?;
        let values = times
            .iter()
            .map(|&t| self.approx_heisenberg(t, g, sigma))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            times: times.to_vec(),
            values: TrajectoryValues::Observable(values),
        })
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrajectoryValues {
    Bloch(Vec<[f64; 3]>),
    Observable(Vec<SpinObservable>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: TrajectoryValues,
}

impl Trajectory {
    pub fn bloch(&self) -> Option<&[[f64; 3]]> {
        match &self.values {
            TrajectoryValues::Bloch(v) => Some(v),
            _ => None,
        }
    }

    pub fn observables(&self) -> Option<&[SpinObservable]> {
        match &self.values {
            TrajectoryValues::Observable(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxationRates {
    /// `2g² Re d₁`, the decay rate of `⟨σ₃⟩ + 1`.
    pub longitudinal_rate: f64,
    /// `g² Re d₁`, the decay rate of the transverse components.
    pub transverse_rate: f64,
    /// `g²(Im d₁ − Im d₋₁)`, added to the Larmor frequency `2β`.
    pub frequency_shift: f64,
}

pub fn relaxation_rates(g: f64, d: &DCoefficients) -> RelaxationRates {
    let g2 = g * g;
    RelaxationRates {
        longitudinal_rate: 2.0 * g2 * d.re_d1(),
        transverse_rate: g2 * d.re_d1(),
        frequency_shift: g2 * d.lamb_shift(),
    }
}
