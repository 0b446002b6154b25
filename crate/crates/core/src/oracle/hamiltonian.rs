//! Sparse assembly of `H(g) = H_ph ⊗ I + I ⊗ βσ₃ + g Σ_c Φ_c ⊗ σ_c` on a
//! [`TruncatedSpace`].
//!
//! The field of channel `c` is the Segal field of the discretized mode
//! comb, `Φ_c = Σ_j λ_j (a_{jc} + a†_{jc}) / √2`, so that
//! `⟨Ψ₀, Φ_c(t) Φ_c(0) Ψ₀⟩ = û(t)/2`. With this normalization the
//! lowering part of the coupling, `a†(B(1)) ⊗ σ(-1)/√2`, emits into a mode
//! profile whose autocorrelation is `û`, matching the golden-rule rate
//! `2π J(2β)` of `⟨σ₃⟩ + 1`.
//! Creation operators that would exceed the cap are dropped.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::modes::ModeSet;
use super::space::TruncatedSpace;
use crate::error::{Error, Result};
use crate::spin::{C64, I, ONE, ZERO};

/// Compressed sparse rows.
#[derive(Clone, Debug, Default)]
pub struct Csr {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<C64>,
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len().saturating_sub(1)
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().map(|&c| c as usize).zip(self.vals[a..b].iter().copied())
    }
}

#[derive(Clone, Debug)]
pub struct FullHamiltonian {
    diagonal: Arc<Vec<f64>>,
    interaction: Arc<Csr>,
    g: f64,
    beta: f64,
    cap: usize,
}

/// `(σ_c)_{s' s}` for the three Pauli matrices, as `(s', value)` per input spin `s`.
fn pauli_action(c: usize, s: usize) -> (usize, C64) {
    match (c, s) {
        (0, 0) => (1, ONE),
        (0, _) => (0, ONE),
        (1, 0) => (1, I),
        (1, _) => (0, -I),
        (_, 0) => (0, ONE),
        _ => (1, -ONE),
    }
}

/// Assemble `H(g)` for the given modes, field strength `β` and coupling.
pub fn build_hamiltonian(modes: &ModeSet, beta: f64, g: f64, space: &TruncatedSpace) -> Result<FullHamiltonian> {
    if space.n_modes() != modes.total_modes() {
        return Err(Error::InvalidArgument(format!(
            "space has {} modes, mode set has {}",
            space.n_modes(),
            modes.total_modes()
        )));
    }
    if !(beta > 0.0) || !(g >= 0.0) {
        return Err(Error::InvalidArgument("need beta > 0 and g >= 0".into()));
    }
    let m = modes.total_modes();
    let pooled: Vec<(usize, f64, f64)> = (0..m)
        .map(|q| {
            let (c, mode) = modes.pooled(q);
            (c, mode.omega, mode.coupling * FRAC_1_SQRT_2)
        })
        .collect();
    let n_configs = space.n_configs();
    let dim = space.dimension();

    let mut diagonal = vec![0.0; dim];
    for k in 0..n_configs {
        let e: f64 = space.config(k).iter().map(|&q| pooled[q as usize].1).sum();
        diagonal[TruncatedSpace::flat(k, 0)] = e + beta;
        diagonal[TruncatedSpace::flat(k, 1)] = e - beta;
    }

    // V |k, s⟩ = Σ (target, amplitude); row r of V is the conjugate of
    // column r because V is Hermitian.
    let columns: Vec<Vec<(u32, C64)>> = (0..n_configs)
        .into_par_iter()
        .map(|k| {
            let occ = space.config(k);
            let mut out: Vec<(u32, C64)> = Vec::new();
            let mut scratch: Vec<u32> = Vec::with_capacity(occ.len() + 1);
            // annihilation: one entry per distinct occupied mode
            let mut i = 0;
            while i < occ.len() {
                let q = occ[i];
                let mut j = i;
                while j < occ.len() && occ[j] == q {
                    j += 1;
                }
                let mult = (j - i) as f64;
                let (c, _, lam) = pooled[q as usize];
                if lam != 0.0 {
                    scratch.clear();
                    scratch.extend_from_slice(&occ[..i]);
                    scratch.extend_from_slice(&occ[i + 1..]);
                    let target = space.config_index(&scratch).expect("removal stays in the space");
                    push_spin_pair(&mut out, target, c, lam * mult.sqrt());
                }
                i = j;
            }
            // creation
            if occ.len() < space.excitation_cap() {
                for (q, &(c, _, lam)) in pooled.iter().enumerate() {
                    if lam == 0.0 {
                        continue;
                    }
                    let q = q as u32;
                    let pos = occ.partition_point(|&x| x < q);
                    let mult = occ[pos..].iter().take_while(|&&x| x == q).count() as f64 + 1.0;
                    scratch.clear();
                    scratch.extend_from_slice(&occ[..pos]);
                    scratch.push(q);
                    scratch.extend_from_slice(&occ[pos..]);
                    let target = space.config_index(&scratch).expect("addition below the cap");
                    push_spin_pair(&mut out, target, c, lam * mult.sqrt());
                }
            }
            out
        })
        .collect();

    // Expand to per-spin rows. For input spin s on configuration k the
    // column entries are (2·target + s', amp · (σ_c)_{s' s}).
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for col in columns.iter() {
        for s in 0..2 {
            let start = cols.len();
            for &(tgt, amp_c) in col {
                // targets are packed as 3·config + channel, see push_spin_pair
                let (config, c) = (tgt / 3, (tgt % 3) as usize);
                let (sp, factor) = pauli_action(c, s);
                cols.push((2 * config as usize + sp) as u32);
                // row r = conj(column r)
                vals.push((amp_c * factor).conj());
            }
            sort_row(&mut cols[start..], &mut vals[start..]);
            row_ptr.push(cols.len());
        }
    }
    Ok(FullHamiltonian {
        diagonal: Arc::new(diagonal),
        interaction: Arc::new(Csr { row_ptr, cols, vals }),
        g,
        beta,
        cap: space.excitation_cap(),
    })
}

fn push_spin_pair(out: &mut Vec<(u32, C64)>, target: usize, channel: usize, amp: f64) {
    out.push(((3 * target + channel) as u32, C64::new(amp, 0.0)));
}

fn sort_row(cols: &mut [u32], vals: &mut [C64]) {
    let mut idx: Vec<usize> = (0..cols.len()).collect();
    idx.sort_by_key(|&i| cols[i]);
    let c: Vec<u32> = idx.iter().map(|&i| cols[i]).collect();
    let v: Vec<C64> = idx.iter().map(|&i| vals[i]).collect();
    cols.copy_from_slice(&c);
    vals.copy_from_slice(&v);
}

impl FullHamiltonian {
    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn excitation_cap(&self) -> usize {
        self.cap
    }

    pub fn nnz(&self) -> usize {
        self.interaction.nnz() + self.dimension()
    }

    /// Same structure, different coupling.
    pub fn with_coupling(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let v = &*self.interaction;
        let d = &*self.diagonal;
        let g = self.g;
        y.par_chunks_mut(4096).enumerate().for_each(|(chunk, ys)| {
            let base = chunk * 4096;
            for (k, yr) in ys.iter_mut().enumerate() {
                let r = base + k;
                let mut acc = x[r] * d[r];
                if g != 0.0 {
                    let mut s = ZERO;
                    for idx in v.row_ptr[r]..v.row_ptr[r + 1] {
                        s += v.vals[idx] * x[v.cols[idx] as usize];
                    }
                    acc += s * g;
                }
                *yr = acc;
            }
        });
    }

    /// Crude bounds on the spectrum from Gershgorin discs.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let v = &*self.interaction;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dimension() {
            let rad: f64 = v.row(r).map(|(_, z)| z.norm()).sum::<f64>() * self.g;
            lo = lo.min(self.diagonal[r] - rad);
            hi = hi.max(self.diagonal[r] + rad);
        }
        (lo, hi)
    }

    /// `max |H − H†|` over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let v = &*self.interaction;
        let mut map: HashMap<(usize, usize), C64> = HashMap::with_capacity(v.nnz());
        for r in 0..v.rows() {
            for (c, z) in v.row(r) {
                *map.entry((r, c)).or_insert(ZERO) += z;
            }
        }
        map.iter()
            .map(|(&(r, c), &z)| (z - map.get(&(c, r)).copied().unwrap_or(ZERO).conj()).norm() * self.g)
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] += C64::new(self.diagonal[r], 0.0);
            for (c, z) in self.interaction.row(r) {
                m[(r, c)] += z * self.g;
            }
        }
        m
    }
}
