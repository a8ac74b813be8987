//! Product-basis enumeration with parity blocking, and states expanded in it.
//!
//! Basis vectors are |m⟩_A |n⟩_F with quasispin projection m ∈ {−j, …, +j}
//! and boson number n < n_max. The conserved parity is (−1)^M with
//! M = n + m + j, so a single-parity block keeps only entries whose M has
//! the requested sign. Entries are ordered lexicographically by (n, m),
//! which keeps the Hamiltonian banded (couplings only change n by ±1).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::ModelParams;

pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    Both,
}

impl Parity {
    pub fn label(&self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Both => "both",
        }
    }
}

/// One basis vector |m⟩_A |n⟩_F; `two_m` is the doubled projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisEntry {
    pub two_m: i32,
    pub n: u32,
}

impl BasisEntry {
    pub fn m(&self) -> f64 {
        self.two_m as f64 / 2.0
    }

    /// Excitation count n* = m + j of the atomic part.
    pub fn n_star(&self, two_j: u32) -> u32 {
        ((self.two_m + two_j as i32) / 2) as u32
    }

    /// Conserved quantum number M = n + m + j.
    pub fn m_total(&self, two_j: u32) -> u32 {
        self.n + self.n_star(two_j)
    }
}

/// An ordered single- or both-parity slice of the product basis.
#[derive(Debug, Clone)]
pub struct BasisIndex {
    two_j: u32,
    n_max: u32,
    parity: Parity,
    entries: Vec<BasisEntry>,
    /// Index of the first entry of each boson row; length n_max + 1.
    row_offsets: Vec<usize>,
}

impl BasisIndex {
    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> BasisEntry {
        self.entries[idx]
    }

    /// Smallest excitation count present in boson row n (0 or 1 for a
    /// single-parity block).
    fn first_n_star(&self, n: u32) -> u32 {
        match self.parity {
            Parity::Both => 0,
            Parity::Even => n % 2,
            Parity::Odd => (n + 1) % 2,
        }
    }

    fn n_star_stride(&self) -> u32 {
        match self.parity {
            Parity::Both => 1,
            _ => 2,
        }
    }

    /// Position of |m⟩|n⟩ in this basis, if present.
    pub fn index_of(&self, two_m: i32, n: u32) -> Option<usize> {
        if n >= self.n_max || two_m.abs() > self.two_j as i32 {
            return None;
        }
        let n_star = two_m + self.two_j as i32;
        if n_star % 2 != 0 {
            return None;
        }
        let n_star = (n_star / 2) as u32;
        let first = self.first_n_star(n);
        let stride = self.n_star_stride();
        if n_star < first || (n_star - first) % stride != 0 {
            return None;
        }
        let pos = self.row_offsets[n as usize] + ((n_star - first) / stride) as usize;
        debug_assert_eq!(self.entries[pos], BasisEntry { two_m, n });
        Some(pos)
    }
}

/// Enumerate all (m, n) pairs with n < n_max and the requested parity,
/// ordered lexicographically by (n, m).
pub fn build_basis(params: &ModelParams, n_max: u32, parity: Parity) -> Result<BasisIndex> {
    params.validate()?;
    if n_max < 1 {
        return Err(Error::InvalidParams("n_max must be >= 1".into()));
    }
    let two_j = params.two_j;
    let mut entries = Vec::new();
    let mut row_offsets = Vec::with_capacity(n_max as usize + 1);
    for n in 0..n_max {
        row_offsets.push(entries.len());
        for n_star in 0..=two_j {
            let keep = match parity {
                Parity::Both => true,
                Parity::Even => (n + n_star) % 2 == 0,
                Parity::Odd => (n + n_star) % 2 == 1,
            };
            if keep {
                entries.push(BasisEntry { two_m: 2 * n_star as i32 - two_j as i32, n });
            }
        }
    }
    row_offsets.push(entries.len());
    Ok(BasisIndex { two_j, n_max, parity, entries, row_offsets })
}

/// A normalized real-amplitude state expanded over a [`BasisIndex`].
#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<BasisIndex>,
    coeffs: Vec<f64>,
}

impl QuantumState {
    /// Wrap a coefficient table, enforcing normalization to within 1e−12.
    pub fn new(basis: Arc<BasisIndex>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Mismatch(format!(
                "coefficient table length {} does not match basis size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        let norm_sq: f64 = coeffs.iter().map(|c| c * c).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!(
                "state not normalized: |norm^2 - 1| = {:.3e}",
                (norm_sq - 1.0).abs()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    /// Wrap and rescale to unit norm.
    pub fn normalized(basis: Arc<BasisIndex>, mut coeffs: Vec<f64>) -> Result<Self> {
        let norm_sq: f64 = coeffs.iter().map(|c| c * c).sum();
        if norm_sq <= 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        let inv = 1.0 / norm_sq.sqrt();
        coeffs.iter_mut().for_each(|c| *c *= inv);
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<BasisIndex> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Amplitude on |m⟩|n⟩, zero if outside the basis.
    pub fn amplitude(&self, two_m: i32, n: u32) -> f64 {
        self.basis.index_of(two_m, n).map_or(0.0, |i| self.coeffs[i])
    }

    /// ⟨J_z⟩ = Σ m |α_{mn}|².
    pub fn expect_jz(&self) -> f64 {
        self.basis
            .entries()
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| e.m() * c * c)
            .sum()
    }

    /// ⟨n⟩ = Σ n |α_{mn}|².
    pub fn expect_n(&self) -> f64 {
        self.basis
            .entries()
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| e.n as f64 * c * c)
            .sum()
    }

    /// Weight carried by the dominant M = n + m + j value.
    pub fn dominant_m_weight(&self) -> (u32, f64) {
        let two_j = self.basis.two_j();
        let max_m = self.basis.n_max() + two_j;
        let mut weights = vec![0.0f64; max_m as usize + 1];
        for (e, c) in self.basis.entries().iter().zip(&self.coeffs) {
            weights[e.m_total(two_j) as usize] += c * c;
        }
        let (best, w) = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        (best as u32, *w)
    }

    /// Overlap ⟨other|self⟩ between states over bases of the same quasispin.
    /// Entries are matched by (m, n), so the truncations may differ.
    pub fn overlap(&self, other: &QuantumState) -> Result<f64> {
        if self.basis.two_j() != other.basis.two_j() {
            return Err(Error::Mismatch("overlap between different quasispins".into()));
        }
        if Arc::ptr_eq(&self.basis, &other.basis) {
            return Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum());
        }
        let (small, big) = if self.basis.len() <= other.basis.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = 0.0;
        for (e, c) in small.basis.entries().iter().zip(&small.coeffs) {
            if let Some(i) = big.basis.index_of(e.two_m, e.n) {
                acc += c * big.coeffs[i];
            }
        }
        Ok(acc)
    }
}
