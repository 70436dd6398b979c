//! Prime sieves producing quadratic twists with prescribed 2-Selmer
//! behaviour, the semistable S3 family y² + y = x³ − x² + g(t), and
//! Frobenius density counts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Signed;
use thiserror::Error;

use crate::arith::modp::{inv_mod, is_prime, primes_up_to};
use crate::arith::{kronecker, split_power, Place};
use crate::curve::{Curve, CurveError, GaloisType, ReductionType, TwistDisc};
use crate::parity::{kramer_parity, ParityError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("curve has rational 2-torsion")]
    WrongTorsion,
    #[error("hypotheses fail: {0}")]
    HypothesesFail(String),
    #[error("no twist found below the bound")]
    NotFound,
    #[error("family curve at t0 = {0} fails the check; try another t0")]
    FamilyCheckFailed(i64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Parity(#[from] ParityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignCondition {
    Positive,
    Negative,
    /// +p if it passes, else −p
    Either,
}

/// Conditions on the twist discriminant d = ±p attached to a prime p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sieve {
    /// d mod m must lie in the listed residues
    pub modulus_classes: Vec<(u64, Vec<u64>)>,
    /// kronecker(d, q) must equal the given value
    pub qr_conditions: Vec<(u128, i8)>,
    pub frobenius_order: Option<u8>,
    pub sign: SignCondition,
}

impl Sieve {
    fn accepts_d(&self, d: i64) -> bool {
        self.modulus_classes
            .iter()
            .all(|(m, res)| res.contains(&(d.rem_euclid(*m as i64) as u64)))
            && self
                .qr_conditions
                .iter()
                .all(|(q, k)| kronecker(&BigInt::from(d), &BigInt::from(*q)).expect("q > 0") == *k)
    }

    /// The twist discriminant for p, if p passes.
    pub fn admit(&self, e: &Curve, p: u64, bad: &[u128]) -> Result<Option<i64>, CurveError> {
        if p == 2 || bad.contains(&(p as u128)) {
            return Ok(None);
        }
        let signs: &[i64] = match self.sign {
            SignCondition::Positive => &[1],
            SignCondition::Negative => &[-1],
            SignCondition::Either => &[1, -1],
        };
        let Some(d) = signs
            .iter()
            .map(|s| s * p as i64)
            .find(|d| self.accepts_d(*d))
        else {
            return Ok(None);
        };
        if let Some(k) = self.frobenius_order {
            if e.frobenius_order(p as u128)? != k {
                return Ok(None);
            }
        }
        Ok(Some(d))
    }

    /// (p, d) for every prime p ≤ x passing the sieve, ascending in p.
    pub fn run(&self, e: &Curve, x: u64) -> Result<Vec<(u64, i64)>, CurveError> {
        let bad = e.bad_primes_min()?;
        let mut out = Vec::new();
        for p in primes_up_to(x) {
            if let Some(d) = self.admit(e, p, &bad)? {
                out.push((p, d));
            }
        }
        Ok(out)
    }
}

fn require_no_two_torsion(e: &Curve) -> Result<Curve, SearchError> {
    let m = e.minimal_model()?;
    if m.two_division().torsion_dim_q != 0 {
        return Err(SearchError::WrongTorsion);
    }
    Ok(m)
}

/// Sieve for primes p whose twist keeps d2 fixed: p ≡ 1 mod 8, p a square
/// at odd additive and even-ord multiplicative primes, Frobenius of order 3.
pub fn stable_sieve(e: &Curve) -> Result<Sieve, SearchError> {
    let m = require_no_two_torsion(e)?;
    let mut qr = Vec::new();
    for r in m.bad_reduction()? {
        let q = r.place.prime().expect("finite");
        let needs_split = r.kind == ReductionType::Additive
            || (r.kind.is_multiplicative() && r.ord_delta_min % 2 == 0);
        if q != 2 && needs_split {
            qr.push((q, 1));
        }
    }
    Ok(Sieve {
        modulus_classes: vec![(8, vec![1])],
        qr_conditions: qr,
        frobenius_order: Some(3),
        sign: SignCondition::Positive,
    })
}

/// Primes p ≤ x with d2(E^p) = d2(E).
pub fn stable_twist_primes(e: &Curve, x: u64) -> Result<Vec<u64>, SearchError> {
    let m = require_no_two_torsion(e)?;
    Ok(stable_sieve(&m)?
        .run(&m, x)?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistinguishedPlace {
    Real,
    Multiplicative(u128),
}

/// v0 ∤ 2 with odd-ord multiplicative reduction (smallest such prime), or
/// the real place when Δ < 0.
pub fn distinguished_place(e: &Curve) -> Result<Option<DistinguishedPlace>, CurveError> {
    let m = e.minimal_model()?;
    for r in m.bad_reduction()? {
        let q = r.place.prime().expect("finite");
        if q != 2 && r.kind.is_multiplicative() && r.ord_delta_min % 2 == 1 {
            return Ok(Some(DistinguishedPlace::Multiplicative(q)));
        }
    }
    Ok(m.disc().is_negative().then_some(DistinguishedPlace::Real))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepCandidate {
    pub p: u64,
    pub d: TwistDisc,
    pub v0: DistinguishedPlace,
    /// d2(E^d) − d2(E) ∈ {−1, +1}
    pub shifts: [i32; 2],
    pub flip: u8,
}

/// Primes p ≤ x with Frobenius of order 2 such that Q(√±p) splits at 2 and
/// at every bad place other than v0, leaving v0 unramified.
pub fn step_twist_candidates(e: &Curve, x: u64) -> Result<Vec<StepCandidate>, SearchError> {
    let m = e.minimal_model()?;
    if m.two_division().galois_type != GaloisType::S3 {
        return Err(SearchError::HypothesesFail(
            "Galois group of the 2-division field is not S3".into(),
        ));
    }
    let Some(v0) = distinguished_place(&m)? else {
        return Err(SearchError::HypothesesFail(
            "no odd-ord multiplicative prime and Δ > 0".into(),
        ));
    };
    let qr = m
        .bad_primes_min()?
        .into_iter()
        .filter(|q| *q != 2 && DistinguishedPlace::Multiplicative(*q) != v0)
        .map(|q| (q, 1))
        .collect();
    let sieve = Sieve {
        modulus_classes: vec![(8, vec![1])],
        qr_conditions: qr,
        frobenius_order: Some(2),
        sign: match v0 {
            DistinguishedPlace::Real => SignCondition::Either,
            DistinguishedPlace::Multiplicative(_) => SignCondition::Positive,
        },
    };
    let mut out = Vec::new();
    for (p, d) in sieve.run(&m, x)? {
        let d = TwistDisc::new(d)?;
        let flip = kramer_parity(&m, d, None)?.flip;
        out.push(StepCandidate {
            p,
            d,
            v0,
            shifts: [-1, 1],
            flip,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipTwist {
    pub d: TwistDisc,
    pub v0: DistinguishedPlace,
    pub frobenius_order: u8,
}

/// A twist d = ±p with d2(E^d) of opposite parity. With v0 real, d = −p is
/// a square at 2 and at every bad prime; with v0 multiplicative, d = p is a
/// unit nonsquare at v0 and a square at 2 and the other bad primes. p must
/// have Frobenius of order 2 or 3 so that δ_v0 + δ_p = 1.
pub fn flip_twist(e: &Curve, x: u64) -> Result<FlipTwist, SearchError> {
    let m = require_no_two_torsion(e)?;
    let bad = m.bad_primes_min()?;
    let odd_bad: Vec<u128> = bad.iter().copied().filter(|q| *q != 2).collect();
    let mut attempts = vec![(
        DistinguishedPlace::Real,
        Sieve {
            modulus_classes: vec![(8, vec![1])],
            qr_conditions: odd_bad.iter().map(|q| (*q, 1)).collect(),
            frobenius_order: None,
            sign: SignCondition::Negative,
        },
    )];
    for r in m.bad_reduction()? {
        let q0 = r.place.prime().expect("finite");
        if q0 != 2 && r.kind.is_multiplicative() {
            attempts.push((
                DistinguishedPlace::Multiplicative(q0),
                Sieve {
                    modulus_classes: vec![(8, vec![1])],
                    qr_conditions: odd_bad
                        .iter()
                        .map(|q| (*q, if *q == q0 { -1 } else { 1 }))
                        .collect(),
                    frobenius_order: None,
                    sign: SignCondition::Positive,
                },
            ));
        }
    }
    for (v0, sieve) in attempts {
        for p in primes_up_to(x) {
            let Some(d) = sieve.admit(&m, p, &bad)? else {
                continue;
            };
            let order = m.frobenius_order(p as u128)?;
            if order == 1 {
                continue;
            }
            let d = TwistDisc::new(d)?;
            if kramer_parity(&m, d, None)?.flip == 1 {
                return Ok(FlipTwist {
                    d,
                    v0,
                    frobenius_order: order,
                });
            }
        }
    }
    Err(SearchError::NotFound)
}

/// y² + y = x³ − x² + t
pub fn family_member(t: &BigInt) -> Result<Curve, CurveError> {
    let z = BigInt::from(0);
    Curve::new([z.clone(), BigInt::from(-1), BigInt::from(1), z, t.clone()])
}

/// Smallest η ≥ 0 with ord_p(4η + 1) = 1.
pub fn family_eta(p: u64) -> Result<u64, SearchError> {
    if p == 2 || !is_prime(p as u128) {
        return Err(SearchError::NotOddPrime(p));
    }
    // 4η + 1 ≡ 0 mod p has a unique solution class; step by p until p² ∤ 4η + 1
    let p = p as u128;
    let inv4 = inv_mod(4, p);
    let mut eta = (p - inv4) % p;
    while (4 * eta + 1).is_multiple_of(p * p) {
        eta += p;
    }
    Ok(eta as u64)
}

/// E_{g(t0)} with g(t) = η + (4η+1)² t and η from [`family_eta`].
pub fn family_curve(p: u64, t0: i64) -> Result<Curve, SearchError> {
    let eta = family_eta(p)?;
    family_curve_with_eta(p, eta, t0)
}

/// E_{g(t0)} for a caller-chosen η, checked to be semistable with
/// multiplicative reduction and ord_p(Δ) = 1 at p and S3 2-division field.
pub fn family_curve_with_eta(p: u64, eta: u64, t0: i64) -> Result<Curve, SearchError> {
    if p == 2 || !is_prime(p as u128) {
        return Err(SearchError::NotOddPrime(p));
    }
    let eta = BigInt::from(eta);
    let k: BigInt = 4 * &eta + 1;
    let g = &eta + &k * &k * BigInt::from(t0);
    let e = family_member(&g)?;
    let r = e.reduction_type(Place::Finite(p as u128))?;
    let ok = e.is_semistable()?
        && r.kind.is_multiplicative()
        && r.ord_delta_min == 1
        && e.two_division().galois_type == GaloisType::S3;
    if ok {
        Ok(e)
    } else {
        Err(SearchError::FamilyCheckFailed(t0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub x: u64,
    pub galois_type: GaloisType,
    pub counts: BTreeMap<u8, u64>,
    pub expected: BTreeMap<u8, f64>,
    /// squarefree products of stable-sieve primes up to x
    pub n1_count: u64,
    pub exponent: f64,
}

impl DensityReport {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn fraction(&self, order: u8) -> f64 {
        let n = self.total();
        if n == 0 {
            return 0.0;
        }
        *self.counts.get(&order).unwrap_or(&0) as f64 / n as f64
    }
}

/// Frobenius order counts over good primes p ≤ x, split over `jobs` shards.
pub fn frobenius_counts(e: &Curve, x: u64, jobs: usize) -> Result<BTreeMap<u8, u64>, CurveError> {
    let m = e.minimal_model()?;
    let bad = m.bad_primes_min()?;
    let primes: Vec<u64> = primes_up_to(x)
        .into_iter()
        .filter(|p| *p != 2 && !bad.contains(&(*p as u128)))
        .collect();
    let jobs = jobs.max(1);
    let chunk = primes.len().div_ceil(jobs).max(1);
    let shards: Vec<Result<[u64; 3], CurveError>> = std::thread::scope(|s| {
        let handles: Vec<_> = primes
            .chunks(chunk)
            .map(|ps| {
                let m = &m;
                s.spawn(move || {
                    let mut c = [0u64; 3];
                    for p in ps {
                        c[m.frobenius_order(*p as u128)? as usize - 1] += 1;
                    }
                    Ok(c)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker"))
            .collect()
    });
    let mut counts = BTreeMap::new();
    for shard in shards {
        for (i, c) in shard?.into_iter().enumerate() {
            *counts.entry(i as u8 + 1).or_insert(0) += c;
        }
    }
    if m.two_division().galois_type == GaloisType::C3 {
        counts.remove(&2);
    }
    Ok(counts)
}

fn count_squarefree_products(primes: &[u64], bound: u64) -> u64 {
    fn go(primes: &[u64], start: usize, acc: u64, bound: u64) -> u64 {
        let mut n = 0;
        for i in start..primes.len() {
            match acc.checked_mul(primes[i]) {
                Some(v) if v <= bound => n += 1 + go(primes, i + 1, v, bound),
                _ => break,
            }
        }
        n
    }
    go(primes, 0, 1, bound)
}

pub fn density_scan(e: &Curve, x: u64, jobs: usize) -> Result<DensityReport, SearchError> {
    let m = require_no_two_torsion(e)?;
    let galois_type = m.two_division().galois_type;
    let (expected, exponent) = match galois_type {
        GaloisType::S3 => (
            BTreeMap::from([(1, 1.0 / 6.0), (2, 0.5), (3, 1.0 / 3.0)]),
            2.0 / 3.0,
        ),
        GaloisType::C3 => (BTreeMap::from([(1, 1.0 / 3.0), (3, 2.0 / 3.0)]), 1.0 / 3.0),
        _ => return Err(SearchError::WrongTorsion),
    };
    let counts = frobenius_counts(&m, x, jobs)?;
    let stable = stable_twist_primes(&m, x)?;
    Ok(DensityReport {
        x,
        galois_type,
        counts,
        expected,
        n1_count: count_squarefree_products(&stable, x),
        exponent,
    })
}

/// ord_p(n) for a nonzero integer, used by callers checking family output.
pub fn ord(n: &BigInt, p: u64) -> u32 {
    if n.is_positive() || n.is_negative() {
        split_power(n, p as u128).0
    } else {
        u32::MAX
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localdata::{admissible, Admissibility};
    use crate::parity::root_number;

    fn e0() -> Curve {
        Curve::from_i64([0, -1, 1, 0, 0]).unwrap()
    }

    #[test]
    fn stable_primes_are_admissible_with_empty_t() {
        let ps = stable_twist_primes(&e0(), 10_000).unwrap();
        assert!(!ps.is_empty());
        for p in &ps {
            assert_eq!(p % 8, 1);
            let d = TwistDisc::new(*p as i64).unwrap();
            assert_eq!(
                admissible(&e0(), d).unwrap(),
                Admissibility::Admissible { t: vec![] }
            );
        }
        assert!(stable_twist_primes(&e0(), 2).unwrap().is_empty());
        let full = Curve::from_i64([0, 0, 0, -1, 0]).unwrap();
        assert_eq!(
            stable_twist_primes(&full, 100),
            Err(SearchError::WrongTorsion)
        );
    }

    #[test]
    fn smallest_stable_prime_matches_cubic_irreducibility() {
        // first p ≡ 1 mod 8 where 4x³ − 4x² + 1 has no root mod p
        let first = primes_up_to(10_000)
            .into_iter()
            .filter(|p| p % 8 == 1 && *p != 11)
            .find(|p| (0..*p).all(|x| (4 * x * x * x + 4 * p * p * p - 4 * x * x + 1) % p != 0))
            .unwrap();
        assert_eq!(stable_twist_primes(&e0(), 10_000).unwrap()[0], first);
    }

    #[test]
    fn step_candidates() {
        let cs = step_twist_candidates(&e0(), 1000).unwrap();
        assert!(!cs.is_empty());
        assert!(cs.iter().all(|c| c.p != 7));
        for c in &cs {
            assert_eq!(c.v0, DistinguishedPlace::Multiplicative(11));
            assert_eq!(
                e0().local_two_torsion_dim(Place::Finite(c.p as u128))
                    .unwrap(),
                1
            );
            assert_eq!(c.flip, 1);
        }
        let c3 = Curve::from_i64([0, -1, 0, -2, 1]).unwrap();
        assert!(matches!(
            step_twist_candidates(&c3, 100),
            Err(SearchError::HypothesesFail(_))
        ));
    }

    #[test]
    fn flip_twist_changes_root_number() {
        let f = flip_twist(&e0(), 10_000).unwrap();
        let w0 = root_number(&e0()).unwrap().global;
        let w1 = root_number(&e0().twist(f.d).unwrap()).unwrap().global;
        assert_eq!(w0, -w1);
        assert_eq!(flip_twist(&e0(), 0), Err(SearchError::NotFound));
    }

    #[test]
    fn family_examples() {
        let e = family_curve_with_eta(11, 0, 0).unwrap();
        assert_eq!(e, e0());
        assert_eq!(e.disc(), &BigInt::from(-11));
        assert_eq!(family_eta(11).unwrap(), 8);
        assert_eq!(ord(&BigInt::from(4 * 8 + 1), 11), 1);
        let e = family_curve(11, 0).unwrap();
        assert_eq!(e.a()[4], BigInt::from(8));
        assert_eq!(family_curve(2, 0), Err(SearchError::NotOddPrime(2)));
        assert_eq!(family_eta(3).unwrap(), 5);
        assert_eq!(family_eta(5).unwrap(), 1);
    }

    #[test]
    fn squarefree_product_count() {
        assert_eq!(count_squarefree_products(&[2, 3, 5], 30), 7);
        assert_eq!(count_squarefree_products(&[2, 3, 5], 10), 5);
        assert_eq!(count_squarefree_products(&[], 10), 0);
    }

    #[test]
    fn density_small_range() {
        let r = density_scan(&e0(), 10, 2).unwrap();
        // good odd primes ≤ 10: 3, 5, 7
        assert_eq!(r.total(), 3);
        let mut direct = BTreeMap::new();
        for p in [3u128, 5, 7] {
            *direct.entry(e0().frobenius_order(p).unwrap()).or_insert(0) += 1;
        }
        assert_eq!(
            r.counts.iter().filter(|(_, c)| **c > 0).count(),
            direct.len()
        );
        for (k, v) in direct {
            assert_eq!(r.counts[&k], v);
        }
        assert_eq!(r.exponent, 2.0 / 3.0);
    }
}
