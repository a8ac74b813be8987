//! Model parameters.

use crate::error::{Error, Result};

/// The parameter tuple (ω, ω0, λ, δ, N, j) defining one model instance.
///
/// The quasispin is stored doubled (`two_j`) so half-integer values stay
/// exact. Energies are in arbitrary but consistent units; the interaction
/// strength enters the Hamiltonian as λ/√N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Field mode energy ω > 0.
    pub omega: f64,
    /// Atomic level splitting ω0 > 0.
    pub omega0: f64,
    /// Coupling strength λ ≥ 0.
    pub lambda: f64,
    /// Interpolation parameter δ ∈ [0, 1]; δ = 0 keeps only co-rotating
    /// terms, δ = 1 weights co- and counter-rotating terms equally.
    pub delta: f64,
    /// Atom count N.
    pub n_atoms: u32,
    /// Doubled quasispin 2j, with 2j ≤ N and 2j ≡ N (mod 2).
    pub two_j: u32,
}

impl ModelParams {
    pub fn new(
        omega: f64,
        omega0: f64,
        lambda: f64,
        delta: f64,
        n_atoms: u32,
        two_j: u32,
    ) -> Result<Self> {
        let p = Self { omega, omega0, lambda, delta, n_atoms, two_j };
        p.validate()?;
        Ok(p)
    }

    /// Fully symmetric instance with j = N/2.
    pub fn symmetric(
        omega: f64,
        omega0: f64,
        lambda: f64,
        delta: f64,
        n_atoms: u32,
    ) -> Result<Self> {
        Self::new(omega, omega0, lambda, delta, n_atoms, n_atoms)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParams(format!("omega = {} must be > 0", self.omega)));
        }
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::InvalidParams(format!("omega0 = {} must be > 0", self.omega0)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda = {} must be >= 0", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParams(format!("delta = {} must be in [0, 1]", self.delta)));
        }
        if self.n_atoms == 0 {
            return Err(Error::InvalidParams("n_atoms must be positive".into()));
        }
        if self.two_j > self.n_atoms || self.two_j % 2 != self.n_atoms % 2 {
            return Err(Error::InvalidParams(format!(
                "two_j = {} must satisfy two_j <= N and two_j == N (mod 2) with N = {}",
                self.two_j, self.n_atoms
            )));
        }
        Ok(())
    }

    /// Quasispin j as a float.
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Atom count as a float.
    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }

    /// Same instance at a different coupling.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Whether this instance lives in the fully symmetric subspace j = N/2.
    pub fn is_symmetric_subspace(&self) -> bool {
        self.two_j == self.n_atoms
    }

    /// Number of replicas R_j of the quasispin-j subspace inside the full
    /// 2^N atomic space: R_j = C(N, N/2 - j) · (2j+1) / (N/2 + j + 1).
    pub fn replica_count(&self) -> u128 {
        let n = self.n_atoms as u128;
        let k = ((self.n_atoms - self.two_j) / 2) as u128;
        let two_j = self.two_j as u128;
        // C(n, k) * (2j+1) / (n/2 + j + 1), kept exact by dividing as we go:
        // the product C(n, k) * (2j+1) is always divisible by (n+2j+2)/2.
        let mut num: u128 = two_j + 1;
        let mut den: u128 = (n + two_j + 2) / 2;
        for i in 0..k {
            num *= n - i;
            den *= i + 1;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
        debug_assert_eq!(den, 1);
        num / den
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_params() {
        let p = ModelParams::symmetric(1.0, 1.0, 2.5, 0.3, 40).unwrap();
        assert_eq!(p.j(), 20.0);
        assert!(p.is_symmetric_subspace());
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 0.5, 4, 4).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, 0.5, 4, 4).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 0.5, 4, 4).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1.5, 4, 4).is_err());
        // parity mismatch between 2j and N
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0.5, 4, 3).is_err());
        // 2j > N
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0.5, 4, 6).is_err());
    }

    #[test]
    fn replica_counts() {
        // j = N/2 subspace is unique
        let p = ModelParams::symmetric(1.0, 1.0, 0.0, 0.0, 40).unwrap();
        assert_eq!(p.replica_count(), 1);
        // N = 4: R_{j=1} = 3, R_{j=0} = 2
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 4, 2).unwrap();
        assert_eq!(p.replica_count(), 3);
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 4, 0).unwrap();
        assert_eq!(p.replica_count(), 2);
        // sum over j of R_j * (2j+1) = 2^N for N = 6
        let total: u128 = [0u32, 2, 4, 6]
            .iter()
            .map(|&tj| {
                let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 6, tj).unwrap();
                p.replica_count() * (tj as u128 + 1)
            })
            .sum();
        assert_eq!(total, 64);
    }
}
