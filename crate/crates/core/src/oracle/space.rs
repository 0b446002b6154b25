//! Photon-number-capped Fock space of a pool of modes, tensored with `C²`.
//!
//! A photon configuration is a nondecreasing list of pooled mode indices
//! (a multiset). Flat index = `2·configuration + spin`, spin 0 = up
//! (`σ₃ = +1`), spin 1 = down.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TruncatedSpace {
    n_modes: usize,
    cap: usize,
    configs: Vec<Box<[u32]>>,
    lookup: HashMap<Box<[u32]>, usize>,
}

/// `2 · Σ_{n=0..cap} C(M + n − 1, n)`, or `None` on overflow.
pub fn dimension_for(n_modes: usize, cap: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut term: u128 = 1; // C(M - 1, 0)
    for n in 0..=cap {
        if n > 0 {
            term = term * (n_modes as u128 + n as u128 - 1) / n as u128;
        }
        total = total.checked_add(usize::try_from(term).ok()?)?;
    }
    total.checked_mul(2)
}

impl TruncatedSpace {
    /// Enumerate all configurations with at most `cap` photons, refusing
    /// dimensions above `budget`.
    pub fn new(n_modes: usize, cap: usize, budget: usize) -> Result<Self> {
        let dimension = dimension_for(n_modes, cap).unwrap_or(usize::MAX);
        if dimension > budget {
            return Err(Error::DimensionBudget { dimension, budget });
        }
        let mut configs: Vec<Box<[u32]>> = Vec::with_capacity(dimension / 2);
        let mut current: Vec<u32> = Vec::with_capacity(cap);
        configs.push(Box::new([]));
        for n in 1..=cap {
            enumerate(n_modes as u32, n, 0, &mut current, &mut configs);
        }
        let lookup = configs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(Self {
            n_modes,
            cap,
            configs,
            lookup,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn excitation_cap(&self) -> usize {
        self.cap
    }

    pub fn n_configs(&self) -> usize {
        self.configs.len()
    }

    pub fn dimension(&self) -> usize {
        2 * self.configs.len()
    }

    pub fn config(&self, index: usize) -> &[u32] {
        &self.configs[index]
    }

    pub fn config_index(&self, occupation: &[u32]) -> Option<usize> {
        self.lookup.get(occupation).copied()
    }

    /// Flat index of the photon vacuum tensored with spin `s`.
    pub fn vacuum(&self, spin: usize) -> usize {
        spin
    }

    pub fn flat(config: usize, spin: usize) -> usize {
        2 * config + spin
    }

    pub fn split(flat: usize) -> (usize, usize) {
        (flat / 2, flat % 2)
    }
}

fn enumerate(m: u32, remaining: usize, start: u32, current: &mut Vec<u32>, out: &mut Vec<Box<[u32]>>) {
    if remaining == 0 {
        out.push(current.clone().into_boxed_slice());
        return;
    }
    for q in start..m {
        current.push(q);
        enumerate(m, remaining - 1, q, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_formula() {
        assert_eq!(dimension_for(3, 1), Some(8));
        assert_eq!(dimension_for(600, 2), Some(2 * (1 + 600 + 600 * 601 / 2)));
        assert_eq!(dimension_for(5, 0), Some(2));
        for (m, cap) in [(1, 3), (4, 2), (7, 3), (10, 2)] {
            let s = TruncatedSpace::new(m, cap, usize::MAX).unwrap();
            assert_eq!(Some(s.dimension()), dimension_for(m, cap));
        }
    }

    #[test]
    fn index_maps_are_inverse() {
        let s = TruncatedSpace::new(6, 3, usize::MAX).unwrap();
        for i in 0..s.n_configs() {
            assert_eq!(s.config_index(s.config(i)), Some(i));
            assert!(s.config(i).windows(2).all(|w| w[0] <= w[1]));
        }
        for f in 0..s.dimension() {
            let (c, sp) = TruncatedSpace::split(f);
            assert_eq!(TruncatedSpace::flat(c, sp), f);
        }
        assert_eq!(s.config_index(&[2, 1]), None);
    }

    #[test]
    fn budget() {
        assert!(matches!(
            TruncatedSpace::new(600, 2, 1000),
            Err(Error::DimensionBudget { dimension: 361_802, budget: 1000 })
        ));
    }
}
