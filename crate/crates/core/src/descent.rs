//! Complete 2-descent for y^2 = (x - e1)(x - e2)(x - e3).
//!
//! Classes in H^1(Q, E[2]) are pairs (d1, d2) of square classes, the image
//! of a point being (x - e1, x - e2). A pair lies in Sel_2 when its image in
//! every completion falls inside the local Kummer image W_v. Global
//! candidates are supported on -1 and the primes of 2·∏(ei - ej); the local
//! images are computed exactly by residue-disc refinement (see
//! [`local_image`]).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::arith::{self, modp, Place};
use crate::curve::{Curve, CurveError, TwistDisc};
use crate::f2::{span_basis, BitMatrix, BitVec};
use crate::localdata::{admissible, Admissibility};

/// Largest |e_i| accepted.
pub const E_BOUND: i128 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescentError {
    #[error("roots must be pairwise distinct")]
    RepeatedRoot,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("twist is not admissible: {0}")]
    NotAdmissible(String),
    #[error("local image at {place} has dimension {got}, expected {expected}")]
    LocalImage {
        place: Place,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// y^2 = (x - e1)(x - e2)(x - e3) with distinct integer roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullTorsionCurve {
    e: [i128; 3],
    support: Vec<u128>,
}

impl FullTorsionCurve {
    pub fn new(e1: i128, e2: i128, e3: i128) -> Result<Self, DescentError> {
        let e = [e1, e2, e3];
        if e.iter().any(|x| x.abs() > E_BOUND) {
            return Err(DescentError::OutOfRange(format!(
                "|e_i| must be at most {E_BOUND}"
            )));
        }
        if e1 == e2 || e1 == e3 || e2 == e3 {
            return Err(DescentError::RepeatedRoot);
        }
        let mut support = BTreeSet::from([2u128]);
        for (a, b) in [(e1, e2), (e1, e3), (e2, e3)] {
            for (p, _) in arith::factor_u128(a.abs_diff(b)) {
                support.insert(p);
            }
        }
        Ok(FullTorsionCurve {
            e,
            support: support.into_iter().collect(),
        })
    }

    pub fn e(&self) -> [i128; 3] {
        self.e
    }

    /// Primes dividing 2·∏(ei - ej), ascending.
    pub fn bad_support(&self) -> &[u128] {
        &self.support
    }

    /// The same curve as a general Weierstrass model.
    pub fn curve(&self) -> Result<Curve, DescentError> {
        let [e1, e2, e3] = self.e.map(BigInt::from);
        let a2 = -(&e1 + &e2 + &e3);
        let a4 = &e1 * &e2 + &e1 * &e3 + &e2 * &e3;
        let a6 = -(&e1 * &e2 * &e3);
        Ok(Curve::with_hints(
            [BigInt::from(0), a2, BigInt::from(0), a4, a6],
            self.support.clone(),
        )?)
    }

    /// Quadratic twist by d: roots scale by d.
    pub fn twist(&self, d: TwistDisc) -> Result<Self, DescentError> {
        let d = d.value() as i128;
        let scaled: Option<Vec<i128>> = self.e.iter().map(|x| x.checked_mul(d)).collect();
        let s = scaled.ok_or_else(|| DescentError::OutOfRange("twisted roots overflow".into()))?;
        FullTorsionCurve::new(s[0], s[1], s[2])
    }

    /// Kummer images of the three nontrivial 2-torsion points.
    pub fn torsion_images(&self) -> [(i128, i128); 3] {
        let [e1, e2, e3] = self.e;
        [
            ((e1 - e2) * (e1 - e3), e1 - e2),
            (e2 - e1, (e2 - e1) * (e2 - e3)),
            (e3 - e1, e3 - e2),
        ]
    }
}

fn ord_i128(n: i128, p: u128) -> (u32, i128) {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut n = n;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (v, n)
}

/// Number of coordinates of Q_v^× / squares.
fn local_width(v: Place) -> usize {
    match v {
        Place::Real => 1,
        Place::Finite(2) => 3,
        Place::Finite(_) => 2,
    }
}

/// Coordinates of the class of a nonzero integer in Q_v^× / squares:
/// real: [negative]; odd p: [ord mod 2, unit is a nonresidue];
/// p = 2: [ord mod 2, u ≡ 3 mod 4, u ≡ ±3 mod 8].
fn local_class(n: i128, v: Place) -> Vec<bool> {
    match v {
        Place::Real => vec![n < 0],
        Place::Finite(2) => {
            let (e, u) = ord_i128(n, 2);
            let u8_ = u.rem_euclid(8);
            vec![e % 2 == 1, u8_ % 4 == 3, u8_ == 3 || u8_ == 5]
        }
        Place::Finite(p) => {
            let (e, u) = ord_i128(n, p);
            let r = u.rem_euclid(p as i128) as u128;
            vec![e % 2 == 1, modp::legendre(r, p) == -1]
        }
    }
}

fn local_class_big(n: &BigInt, v: Place) -> Vec<bool> {
    match v {
        Place::Real => vec![n < &BigInt::from(0)],
        Place::Finite(p) => {
            let (e, u) = arith::split_power(n, p);
            if p == 2 {
                let u8_ = arith::mod_u128(&u, 8);
                vec![e % 2 == 1, u8_ % 4 == 3, u8_ == 3 || u8_ == 5]
            } else {
                vec![e % 2 == 1, arith::legendre_big(&u, p) == -1]
            }
        }
    }
}

fn pair_vector(a: &[bool], b: &[bool]) -> BitVec {
    let mut bits = a.to_vec();
    bits.extend_from_slice(b);
    BitVec::from_bools(&bits)
}

/// Expected dimension of E(Q_v)/2E(Q_v) for full rational 2-torsion.
fn expected_local_dim(v: Place) -> usize {
    match v {
        Place::Real => 1,
        Place::Finite(2) => 3,
        Place::Finite(_) => 2,
    }
}

/// Basis of the local Kummer image W_v inside (Q_v^×/sq)^2.
///
/// For a finite place the x-line is covered by residue discs
/// a + p^k Z_p. On a disc avoiding every root e_i, the class of x - e_i is
/// constant once k ≥ ord(a - e_i) + c (c = 1 for odd p, 3 for p = 2, so that
/// the ratio lies in 1 + p^c Z_p); such a disc contributes the image of its
/// centre when f(centre) is a square. A disc around e_i of radius beyond
/// max_j ord(e_i - e_j) + c only contains points mapping to the image of
/// (e_i, 0), which is added directly. Points with ord(x) < 0 map to the
/// trivial class for odd p; for p = 2 the substitution x = X/4 (classes of
/// x - e_i equal those of X - 4e_i) brings every nontrivial class into
/// X ∈ Z_2. `slack` raises both thresholds and must not change the result.
pub fn local_image(
    curve: &FullTorsionCurve,
    v: Place,
    slack: u32,
) -> Result<Vec<BitVec>, DescentError> {
    let width = local_width(v);
    let mut images: Vec<BitVec> = curve
        .torsion_images()
        .iter()
        .map(|(a, b)| pair_vector(&local_class(*a, v), &local_class(*b, v)))
        .collect();
    if let Place::Finite(p) = v {
        let (roots, c) = if p == 2 {
            (curve.e.map(|x| 4 * x), 3)
        } else {
            (curve.e, 1)
        };
        let near: Vec<u32> = (0..3)
            .map(|i| {
                (0..3)
                    .filter(|j| *j != i)
                    .map(|j| ord_i128(roots[i] - roots[j], p).0)
                    .max()
                    .unwrap()
                    + c
                    + slack
            })
            .collect();
        let mut seen = BTreeSet::new();
        refine_disc(0, 0, p, &roots, &near, c + slack, v, &mut seen)?;
        images.extend(seen);
    }
    let basis = span_basis(&images, 2 * width);
    let expected = expected_local_dim(v);
    if basis.len() != expected {
        return Err(DescentError::LocalImage {
            place: v,
            got: basis.len(),
            expected,
        });
    }
    Ok(basis)
}

#[allow(clippy::too_many_arguments)]
fn refine_disc(
    a: i128,
    k: u32,
    p: u128,
    roots: &[i128; 3],
    near: &[u32],
    c: u32,
    v: Place,
    out: &mut BTreeSet<BitVec>,
) -> Result<(), DescentError> {
    let pk = (p as i128)
        .checked_pow(k)
        .ok_or_else(|| DescentError::OutOfRange(format!("disc radius {p}^{k}")))?;
    let mut depth = [0u32; 3];
    for i in 0..3 {
        let diff = a - roots[i];
        if diff == 0 || diff % pk == 0 {
            // disc contains e_i
            if k >= near[i] {
                return Ok(());
            }
            return subdivide(a, k, pk, p, roots, near, c, v, out);
        }
        depth[i] = ord_i128(diff, p).0;
    }
    if depth.iter().any(|m| k < m + c) {
        return subdivide(a, k, pk, p, roots, near, c, v, out);
    }
    let classes: Vec<Vec<bool>> = roots.iter().map(|r| local_class(a - r, v)).collect();
    let square = (0..classes[0].len()).all(|j| !(classes[0][j] ^ classes[1][j] ^ classes[2][j]));
    if square {
        out.insert(pair_vector(&classes[0], &classes[1]));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn subdivide(
    a: i128,
    k: u32,
    pk: i128,
    p: u128,
    roots: &[i128; 3],
    near: &[u32],
    c: u32,
    v: Place,
    out: &mut BTreeSet<BitVec>,
) -> Result<(), DescentError> {
    for r in 0..p as i128 {
        let child = r
            .checked_mul(pk)
            .and_then(|x| x.checked_add(a))
            .ok_or_else(|| DescentError::OutOfRange("disc centre overflow".into()))?;
        refine_disc(child, k + 1, p, roots, near, c, v, out)?;
    }
    Ok(())
}

/// Basis of Q(S, 2): -1 followed by the primes of S.
fn global_basis(support: &[u128]) -> Vec<BigInt> {
    let mut b = vec![BigInt::from(-1)];
    b.extend(support.iter().map(|p| BigInt::from(*p)));
    b
}

/// Matrix of the localization (Q(S,2))^2 → (Q_v^×/sq)^2; rows are
/// local coordinates, columns the global coordinates (d1 part then d2 part).
fn localization_matrix(basis: &[BigInt], v: Place) -> BitMatrix {
    let n = basis.len();
    let w = local_width(v);
    let mut m = BitMatrix::zeros(2 * w, 2 * n);
    for (i, b) in basis.iter().enumerate() {
        let cls = local_class_big(b, v);
        for (j, bit) in cls.iter().enumerate() {
            if *bit {
                m.set(j, i, true);
                m.set(w + j, n + i, true);
            }
        }
    }
    m
}

/// Rows expressing "local image lies in W" for the global coordinates.
fn condition_rows(w_basis: &[BitVec], loc: &BitMatrix) -> Vec<BitVec> {
    let width = loc.nrows();
    let annihilator = BitMatrix::from_rows(width, w_basis.to_vec()).kernel();
    let loc_t = loc.transpose();
    annihilator.iter().map(|y| loc_t.apply(y)).collect()
}

/// Everything needed to cut out Selmer-type subgroups over a given support.
struct DescentSystem {
    support: Vec<u128>,
    basis: Vec<BigInt>,
    ncols: usize,
}

impl DescentSystem {
    fn new(curve: &FullTorsionCurve, extra: &[u128]) -> Self {
        let mut support: BTreeSet<u128> = curve.support.iter().copied().collect();
        support.extend(extra.iter().copied());
        let support: Vec<u128> = support.into_iter().collect();
        let basis = global_basis(&support);
        let ncols = 2 * basis.len();
        DescentSystem {
            support,
            basis,
            ncols,
        }
    }

    fn places(&self) -> Vec<Place> {
        let mut v = vec![Place::Real];
        v.extend(self.support.iter().map(|p| Place::Finite(*p)));
        v
    }

    /// Subspace of (Q(S,2))^2 satisfying the local conditions at every place
    /// not in `relaxed` and trivial localization at every place in `strict`.
    fn solve(
        &self,
        curve: &FullTorsionCurve,
        relaxed: &[Place],
        strict: &[Place],
        slack: u32,
    ) -> Result<Vec<BitVec>, DescentError> {
        let mut m = BitMatrix::zeros(0, self.ncols);
        for v in self.places() {
            if relaxed.contains(&v) {
                continue;
            }
            let loc = localization_matrix(&self.basis, v);
            if strict.contains(&v) {
                for row in loc.rows() {
                    m.push_row(row.clone());
                }
            } else {
                let w = local_image(curve, v, slack)?;
                for row in condition_rows(&w, &loc) {
                    m.push_row(row);
                }
            }
        }
        Ok(span_basis(&m.kernel(), self.ncols))
    }

    fn to_pair(&self, x: &BitVec) -> (BigInt, BigInt) {
        let n = self.basis.len();
        let mut d1 = BigInt::one();
        let mut d2 = BigInt::one();
        for i in x.ones() {
            if i < n {
                d1 *= &self.basis[i];
            } else {
                d2 *= &self.basis[i - n];
            }
        }
        (d1, d2)
    }
}

/// Basis of Sel_2(E/Q).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentBasis {
    /// (d1, d2) as squarefree integers
    pub generators: Vec<(BigInt, BigInt)>,
    pub dim: u32,
    pub support: Vec<u128>,
}

pub fn sel2(curve: &FullTorsionCurve) -> Result<DescentBasis, DescentError> {
    sel2_with_slack(curve, 0)
}

/// [`sel2`] with the disc-refinement thresholds raised by `slack`.
pub fn sel2_with_slack(curve: &FullTorsionCurve, slack: u32) -> Result<DescentBasis, DescentError> {
    let sys = DescentSystem::new(curve, &[]);
    let sel = sys.solve(curve, &[], &[], slack)?;
    Ok(DescentBasis {
        generators: sel.iter().map(|x| sys.to_pair(x)).collect(),
        dim: sel.len() as u32,
        support: sys.support.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelmerSetup {
    pub t: Vec<Place>,
    pub d2: u32,
    pub dim_strict: u32,
    pub dim_relaxed: u32,
    pub dim_vt: u32,
}

fn extra_primes(t: &[Place]) -> Vec<u128> {
    t.iter().filter_map(|v| v.prime()).collect()
}

/// Strict and relaxed Selmer dimensions at a finite set of places T.
pub fn relaxed_strict(curve: &FullTorsionCurve, t: &[Place]) -> Result<SelmerSetup, DescentError> {
    let sys = DescentSystem::new(curve, &extra_primes(t));
    let sel = sys.solve(curve, &[], &[], 0)?;
    let relaxed = sys.solve(curve, t, &[], 0)?;
    let strict = sys.solve(curve, &[], t, 0)?;
    let d2 = sel.len() as u32;
    let dim_strict = strict.len() as u32;
    Ok(SelmerSetup {
        t: t.to_vec(),
        d2,
        dim_strict,
        dim_relaxed: relaxed.len() as u32,
        dim_vt: d2 - dim_strict,
    })
}

/// dim V_T, the image of Sel_2 under localization at the primes of T.
pub fn localize(curve: &FullTorsionCurve, t: &[u128]) -> Result<u32, DescentError> {
    if t.is_empty() {
        return Ok(0);
    }
    let sys = DescentSystem::new(curve, t);
    let sel = sys.solve(curve, &[], &[], 0)?;
    let mut stacked = BitMatrix::zeros(0, sys.ncols);
    for p in t {
        for row in localization_matrix(&sys.basis, Place::Finite(*p)).rows() {
            stacked.push_row(row.clone());
        }
    }
    let images: Vec<BitVec> = sel.iter().map(|x| stacked.apply(x)).collect();
    Ok(span_basis(&images, stacked.nrows()).len() as u32)
}

/// Both sides of the twist comparison d2(E^d) = d2(E) - dim V_T + dd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistComparison {
    pub t: Vec<u128>,
    /// Σ_{p∈T} dim H^1_f(Q_p, E[2])
    pub t_dim: u32,
    pub d2: u32,
    pub d2_twist: u32,
    pub dim_vt: u32,
    /// d2(E^d) - d2(E) + dim V_T
    pub dd: i64,
    pub in_range: bool,
    pub parity_ok: bool,
}

impl TwistComparison {
    pub fn holds(&self) -> bool {
        self.in_range && self.parity_ok
    }
}

pub fn verify_twist_comparison(
    curve: &FullTorsionCurve,
    d: TwistDisc,
) -> Result<TwistComparison, DescentError> {
    let e = curve.curve()?;
    let t = match admissible(&e, d)? {
        Admissibility::Admissible { t } => t,
        Admissibility::Violation { reason } => return Err(DescentError::NotAdmissible(reason)),
    };
    let twisted = curve.twist(d)?;
    let d2 = sel2(curve)?.dim;
    let d2_twist = sel2(&twisted)?.dim;
    let dim_vt = localize(curve, &t)?;
    // full 2-torsion: dim H^1_f(Q_p) = 2 at odd p
    let t_dim = 2 * t.len() as u32;
    let dd = d2_twist as i64 - d2 as i64 + dim_vt as i64;
    let room = t_dim as i64 - dim_vt as i64;
    Ok(TwistComparison {
        t,
        t_dim,
        d2,
        d2_twist,
        dim_vt,
        dd,
        in_range: 0 <= dd && dd <= room,
        parity_ok: (dd - room).rem_euclid(2) == 0,
    })
}
