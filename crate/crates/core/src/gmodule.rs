//! F₂[G]-modules for G cyclic of odd prime order p. F₂[G] ≅ F₂[X]/(X^p − 1)
//! splits as F₂ ⊕ ∏ F₂[X]/π(X) over the irreducible factors π ≠ X + 1,
//! and every module decomposes accordingly.

use thiserror::Error;

use crate::arith::modp::is_prime;
use crate::f2::{BitMatrix, Gf2Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GModuleError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("invalid action: {0}")]
    InvalidAction(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicGroupAlgebra {
    pub p: u64,
    /// irreducible factors of 1 + X + ... + X^(p−1), sorted
    pub factors: Vec<Gf2Poly>,
}

impl CyclicGroupAlgebra {
    pub fn simple_dims(&self) -> Vec<usize> {
        self.factors
            .iter()
            .map(|f| f.degree().expect("nonzero"))
            .collect()
    }
}

pub fn group_algebra(p: u64) -> Result<CyclicGroupAlgebra, GModuleError> {
    if p == 2 || !is_prime(p as u128) {
        return Err(GModuleError::NotOddPrime(p));
    }
    let xp1 = Gf2Poly::monomial(p as usize).add(&Gf2Poly::one());
    let x1 = Gf2Poly::from_u64(0b11);
    let factors = xp1
        .factor_squarefree()
        .into_iter()
        .filter(|f| *f != x1)
        .collect();
    Ok(CyclicGroupAlgebra { p, factors })
}

/// A module given by the matrix of a generator of G.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GModule {
    pub p: u64,
    pub action: BitMatrix,
}

impl GModule {
    pub fn new(p: u64, action: BitMatrix) -> Result<Self, GModuleError> {
        if p == 2 || !is_prime(p as u128) {
            return Err(GModuleError::NotOddPrime(p));
        }
        if !action.is_square() {
            return Err(GModuleError::InvalidAction(format!(
                "{}x{} matrix is not square",
                action.nrows(),
                action.ncols()
            )));
        }
        if !action.pow(p).is_identity() {
            return Err(GModuleError::InvalidAction(format!(
                "A^{p} is not the identity"
            )));
        }
        Ok(GModule { p, action })
    }

    pub fn dim(&self) -> usize {
        self.action.nrows()
    }

    pub fn direct_sum(&self, other: &GModule) -> GModule {
        GModule {
            p: self.p,
            action: self.action.direct_sum(&other.action),
        }
    }

    /// F₂[G] acting on itself by the cyclic shift.
    pub fn regular(p: u64) -> Result<Self, GModuleError> {
        let n = p as usize;
        let mut a = BitMatrix::zeros(n, n);
        for i in 0..n {
            a.set(i, (i + 1) % n, true);
        }
        GModule::new(p, a)
    }

    /// G acting trivially on F₂^n.
    pub fn trivial(p: u64, n: usize) -> Result<Self, GModuleError> {
        GModule::new(p, BitMatrix::identity(n))
    }

    /// F₂[X]/π(X) with X acting by multiplication (companion matrix of π).
    pub fn simple(p: u64, pi: &Gf2Poly) -> Result<Self, GModuleError> {
        let n = pi.degree().expect("nonzero");
        let mut a = BitMatrix::zeros(n, n);
        for i in 0..n {
            // row i is X · X^i reduced mod π
            let r = Gf2Poly::monomial(i + 1).rem(pi);
            for j in 0..n {
                a.set(i, j, r.coeff(j));
            }
        }
        GModule::new(p, a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub fixed_dim: usize,
    pub new_dim: usize,
    /// (π, d_π) with d_π = dim ker π(A) / deg π
    pub multiplicities: Vec<(Gf2Poly, usize)>,
}

pub fn split_module(b: &GModule) -> Result<Decomposition, GModuleError> {
    let alg = group_algebra(b.p)?;
    let n = b.dim();
    let id = BitMatrix::identity(n);
    let fixed_dim = n - b.action.add(&id).rank();
    let mut multiplicities = Vec::new();
    let mut covered = fixed_dim;
    for pi in alg.factors {
        let deg = pi.degree().expect("nonzero");
        let ker = n - pi.eval_matrix(&b.action).rank();
        if !ker.is_multiple_of(deg) {
            return Err(GModuleError::InvalidAction(format!(
                "kernel of {pi} has dimension {ker}, not a multiple of {deg}"
            )));
        }
        covered += ker;
        multiplicities.push((pi, ker / deg));
    }
    if covered != n {
        return Err(GModuleError::InvalidAction(format!(
            "isotypic parts cover {covered} of {n} dimensions"
        )));
    }
    Ok(Decomposition {
        fixed_dim,
        new_dim: n - fixed_dim,
        multiplicities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    RankStable,
    Inconclusive,
}

/// Rank over L equals rank over K as soon as some d_π vanishes.
pub fn rank_stability(multiplicities: &[(Gf2Poly, usize)]) -> StabilityVerdict {
    if multiplicities.is_empty() || multiplicities.iter().any(|(_, d)| *d == 0) {
        StabilityVerdict::RankStable
    } else {
        StabilityVerdict::Inconclusive
    }
}
