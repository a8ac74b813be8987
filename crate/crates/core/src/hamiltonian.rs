//! Hamiltonian matrices in symmetric banded storage.
//!
//! With the basis ordered lexicographically by (n, m) the interaction only
//! couples neighboring boson rows, so the matrix bandwidth never exceeds the
//! combined length of two rows. All matrix elements are real with the
//! standard ladder-operator phase convention.

use crate::basis::{BasisIndex, Parity};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Block label carried by a matrix (used only for bookkeeping/diagnostics).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockTag {
    Parity(Parity),
    SingleM(u32),
}

/// Real symmetric matrix in LAPACK lower-banded, column-major storage:
/// `ab[r + c*(kd+1)]` holds A[c+r, c] for 0 ≤ r ≤ kd.
#[derive(Debug, Clone)]
pub struct SymmetricBandedMatrix {
    dim: usize,
    kd: usize,
    ab: Vec<f64>,
    block: BlockTag,
}

impl SymmetricBandedMatrix {
    pub fn zeros(dim: usize, kd: usize, block: BlockTag) -> Self {
        Self { dim, kd, ab: vec![0.0; dim * (kd + 1)], block }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    pub fn block(&self) -> BlockTag {
        self.block
    }

    pub(crate) fn bands(&self) -> &[f64] {
        &self.ab
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if hi - lo > self.kd {
            0.0
        } else {
            self.ab[(hi - lo) + lo * (self.kd + 1)]
        }
    }

    /// Set A[i, j] and its transpose; the two stored values are the same
    /// memory cell, so symmetry is exact by construction.
    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        assert!(hi - lo <= self.kd, "entry ({i}, {j}) outside band kd = {}", self.kd);
        self.ab[(hi - lo) + lo * (self.kd + 1)] = value;
    }

    pub fn add_sym(&mut self, i: usize, j: usize, value: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        assert!(hi - lo <= self.kd, "entry ({i}, {j}) outside band kd = {}", self.kd);
        self.ab[(hi - lo) + lo * (self.kd + 1)] += value;
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let ld = self.kd + 1;
        y.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..self.dim {
            let xc = x[c];
            let rmax = self.kd.min(self.dim - 1 - c);
            let col = &self.ab[c * ld..c * ld + rmax + 1];
            y[c] += col[0] * xc;
            let mut acc = 0.0;
            for (r, &a) in col.iter().enumerate().skip(1) {
                y[c + r] += a * xc;
                acc += a * x[c + r];
            }
            y[c] += acc;
        }
    }

    /// x' A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        let ld = self.kd + 1;
        let mut acc = 0.0;
        for c in 0..self.dim {
            let xc = x[c];
            let rmax = self.kd.min(self.dim - 1 - c);
            let col = &self.ab[c * ld..c * ld + rmax + 1];
            acc += col[0] * xc * xc;
            let mut off = 0.0;
            for (r, &a) in col.iter().enumerate().skip(1) {
                off += a * x[c + r];
            }
            acc += 2.0 * off * xc;
        }
        acc
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0f64; self.dim];
        let ld = self.kd + 1;
        for c in 0..self.dim {
            let rmax = self.kd.min(self.dim - 1 - c);
            for r in 0..=rmax {
                let a = self.ab[r + c * ld].abs();
                sums[c] += a;
                if r > 0 {
                    sums[c + r] += a;
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Dense copy, for tests and small problems.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.dim * self.dim];
        for c in 0..self.dim {
            let rmax = self.kd.min(self.dim - 1 - c);
            for r in 0..=rmax {
                let v = self.ab[r + c * (self.kd + 1)];
                a[(c + r) + c * self.dim] = v;
                a[c + (c + r) * self.dim] = v;
            }
        }
        a
    }
}

/// J± matrix element √(j(j+1) − m(m±1)) from doubled arguments.
fn ladder_coeff(two_j: u32, two_m: i32, up: bool) -> f64 {
    let j = two_j as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    let m2 = if up { m + 1.0 } else { m - 1.0 };
    let v = j * (j + 1.0) - m * m2;
    if v <= 0.0 {
        0.0
    } else {
        v.sqrt()
    }
}

/// Couplings reachable from one basis entry: (target m shift, δ-weighted?).
const CO_ROTATING: bool = false;
const COUNTER_ROTATING: bool = true;

/// Largest index distance of any interaction coupling in this basis.
fn coupling_bandwidth(basis: &BasisIndex) -> usize {
    let mut kd = 0usize;
    for (idx, e) in basis.entries().iter().enumerate() {
        for (dm, _) in [(-2, CO_ROTATING), (2, COUNTER_ROTATING)] {
            if let Some(t) = basis.index_of(e.two_m + dm, e.n + 1) {
                kd = kd.max(t - idx);
            }
        }
    }
    kd
}

/// Assemble H = ω b†b + ω0 J_z + (λ/√N)[b†J− + bJ+ + δ b†J+ + δ bJ−]
/// over the given basis block.
pub fn build_hamiltonian(
    params: &ModelParams,
    basis: &BasisIndex,
) -> Result<SymmetricBandedMatrix> {
    if basis.two_j() != params.two_j {
        return Err(Error::Mismatch(format!(
            "basis built for two_j = {}, params have two_j = {}",
            basis.two_j(),
            params.two_j
        )));
    }
    let mut h = interaction_skeleton(params, basis, params.lambda / params.n().sqrt())?;
    for (idx, e) in basis.entries().iter().enumerate() {
        h.set_sym(idx, idx, params.omega * e.n as f64 + params.omega0 * e.m());
    }
    Ok(h)
}

/// The bare interaction H_int = b†J− + bJ+ + δ(b†J+ + bJ−), without the
/// λ/√N prefactor. Used for Hellmann–Feynman slopes and the λ → 0+ basis.
pub fn build_interaction(
    params: &ModelParams,
    basis: &BasisIndex,
) -> Result<SymmetricBandedMatrix> {
    if basis.two_j() != params.two_j {
        return Err(Error::Mismatch("basis/params quasispin mismatch".into()));
    }
    interaction_skeleton(params, basis, 1.0)
}

fn interaction_skeleton(
    params: &ModelParams,
    basis: &BasisIndex,
    strength: f64,
) -> Result<SymmetricBandedMatrix> {
    let two_j = params.two_j;
    let kd = if strength == 0.0 { 0 } else { coupling_bandwidth(basis) };
    let mut h = SymmetricBandedMatrix::zeros(basis.len(), kd, BlockTag::Parity(basis.parity()));
    if strength == 0.0 {
        return Ok(h);
    }
    for (idx, e) in basis.entries().iter().enumerate() {
        let boson = ((e.n + 1) as f64).sqrt();
        // co-rotating b†J−: (m, n) → (m−1, n+1)
        if let Some(t) = basis.index_of(e.two_m - 2, e.n + 1) {
            h.set_sym(idx, t, strength * boson * ladder_coeff(two_j, e.two_m, false));
        }
        // counter-rotating b†J+: (m, n) → (m+1, n+1), weighted by δ
        if params.delta != 0.0 {
            if let Some(t) = basis.index_of(e.two_m + 2, e.n + 1) {
                h.set_sym(
                    idx,
                    t,
                    strength * params.delta * boson * ladder_coeff(two_j, e.two_m, true),
                );
            }
        }
    }
    Ok(h)
}

/// Dimension of the fixed-M subspace, d(j, M) = min{2j, M} + 1.
pub fn single_m_dim(params: &ModelParams, m_total: u32) -> usize {
    params.two_j.min(m_total) as usize + 1
}

/// Tridiagonal δ = 0 Hamiltonian in a single M-subspace, in the ladder basis
/// |i⟩ = |m = −j+i⟩|n = M−i⟩: diagonal ω(M−i) + ω0(i−j), off-diagonal
/// λ√[(i+1)(2j−i)(M−i)/N].
pub fn build_single_m_hamiltonian(
    params: &ModelParams,
    m_total: u32,
) -> Result<SymmetricBandedMatrix> {
    params.validate()?;
    if params.delta != 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "single-M blocks exist only at delta = 0 (got delta = {})",
            params.delta
        )));
    }
    let d = single_m_dim(params, m_total);
    let j = params.j();
    let two_j = params.two_j as f64;
    let mm = m_total as f64;
    let kd = if d > 1 { 1 } else { 0 };
    let mut h = SymmetricBandedMatrix::zeros(d, kd, BlockTag::SingleM(m_total));
    for i in 0..d {
        let fi = i as f64;
        h.set_sym(i, i, params.omega * (mm - fi) + params.omega0 * (fi - j));
        if i + 1 < d {
            let off = params.lambda
                * ((fi + 1.0) * (two_j - fi) * (mm - fi) / params.n()).sqrt();
            h.set_sym(i, i + 1, off);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;

    #[test]
    fn free_hamiltonian_is_diagonal() {
        let p = ModelParams::symmetric(1.3, 0.7, 0.0, 0.4, 6).unwrap();
        let b = build_basis(&p, 5, Parity::Both).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        assert_eq!(h.bandwidth(), 0);
        for (i, e) in b.entries().iter().enumerate() {
            assert_eq!(h.get(i, i), 1.3 * e.n as f64 + 0.7 * e.m());
        }
    }

    #[test]
    fn single_quantum_ladder_element() {
        // j = 1/2 even block: element between (m = −1/2, n = 1) and
        // (m = +1/2, n = 0) is λ/√N · √1 · 1
        let p = ModelParams::new(1.0, 1.0, 0.8, 0.0, 1, 1).unwrap();
        let b = build_basis(&p, 2, Parity::Even).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        let i = b.index_of(-1, 1).unwrap();
        let j = b.index_of(1, 0).unwrap();
        assert!((h.get(i, j) - 0.8).abs() < 1e-15);
        assert!((h.get(j, i) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn parity_blocks_never_couple() {
        let p = ModelParams::symmetric(1.0, 1.0, 2.0, 0.7, 6).unwrap();
        let b = build_basis(&p, 10, Parity::Both).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        for i in 0..b.len() {
            for j in i..(i + h.bandwidth() + 1).min(b.len()) {
                if h.get(i, j) != 0.0 {
                    let pi = b.entry(i).m_total(6) % 2;
                    let pj = b.entry(j).m_total(6) % 2;
                    assert_eq!(pi, pj, "parity-violating element at ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn delta_zero_conserves_m_total() {
        let p = ModelParams::symmetric(1.0, 0.5, 1.7, 0.0, 4).unwrap();
        let b = build_basis(&p, 8, Parity::Both).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        for i in 0..b.len() {
            for j in i + 1..(i + h.bandwidth() + 1).min(b.len()) {
                if h.get(i, j) != 0.0 {
                    assert_eq!(b.entry(i).m_total(4), b.entry(j).m_total(4));
                }
            }
        }
    }

    #[test]
    fn hermiticity_is_exact() {
        let p = ModelParams::symmetric(1.0, 1.0, 2.5, 0.3, 8).unwrap();
        let b = build_basis(&p, 12, Parity::Even).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        let d = h.to_dense();
        let n = h.dim();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d[i + j * n].to_bits(), d[j + i * n].to_bits());
            }
        }
    }

    #[test]
    fn single_m_smallest_cases() {
        let p = ModelParams::symmetric(1.0, 1.0, 1.5, 0.0, 6).unwrap();
        // M = 0 → 1×1 matrix [−ω0 j]
        let h0 = build_single_m_hamiltonian(&p, 0).unwrap();
        assert_eq!(h0.dim(), 1);
        assert!((h0.get(0, 0) - (-3.0)).abs() < 1e-15);
        // M = 1, j = N/2: off-diagonal λ√(2j/N) = λ (since 2j = N)
        let h1 = build_single_m_hamiltonian(&p, 1).unwrap();
        assert_eq!(h1.dim(), 2);
        assert!((h1.get(0, 1) - 1.5).abs() < 1e-15);
        // M = 2j subspace has dimension 2j + 1
        let p40 = ModelParams::symmetric(1.0, 1.0, 1.5, 0.0, 40).unwrap();
        assert_eq!(build_single_m_hamiltonian(&p40, 40).unwrap().dim(), 41);
    }

    #[test]
    fn single_m_requires_delta_zero() {
        let p = ModelParams::symmetric(1.0, 1.0, 1.5, 0.2, 6).unwrap();
        assert!(matches!(
            build_single_m_hamiltonian(&p, 3),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn full_matrix_splits_into_single_m_blocks() {
        // permuting the δ = 0 matrix by M reproduces the tridiagonal blocks
        let p = ModelParams::symmetric(1.3, 0.9, 0.8, 0.0, 6).unwrap();
        let n_max = 9u32;
        let b = build_basis(&p, n_max, Parity::Both).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        for m_total in 0..n_max {
            // indices of this M-subspace ordered by i = m + j
            let mut idxs: Vec<(u32, usize)> = b
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, e)| e.m_total(6) == m_total && e.n < n_max)
                .map(|(i, e)| (e.n_star(6), i))
                .collect();
            idxs.sort();
            let hm = build_single_m_hamiltonian(&p, m_total).unwrap();
            assert_eq!(idxs.len(), hm.dim());
            for (a, &(_, ia)) in idxs.iter().enumerate() {
                for (c, &(_, ic)) in idxs.iter().enumerate() {
                    assert!(
                        (h.get(ia, ic) - hm.get(a, c)).abs() < 1e-14,
                        "mismatch at M = {m_total}, ({a}, {c})"
                    );
                }
            }
        }
    }

    #[test]
    fn matvec_and_quadratic_form_agree_with_dense() {
        let p = ModelParams::symmetric(1.0, 0.8, 1.9, 0.6, 4).unwrap();
        let b = build_basis(&p, 6, Parity::Odd).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        let n = h.dim();
        let d = h.to_dense();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.4).collect();
        let mut y = vec![0.0; n];
        h.matvec(&x, &mut y);
        let mut q = 0.0;
        for i in 0..n {
            let mut yi = 0.0;
            for j in 0..n {
                yi += d[i + j * n] * x[j];
            }
            assert!((y[i] - yi).abs() < 1e-12);
            q += x[i] * yi;
        }
        assert!((h.quadratic_form(&x) - q).abs() < 1e-12);
    }
}
