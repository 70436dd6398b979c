//! Weierstrass models over Q: invariants, minimal models, reduction types
//! and 2-division data.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{
    self, factor, is_square, mod_u128, modp, padic::is_padic_square, split_power, ArithError, Place,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("singular model: discriminant is zero")]
    SingularModel,
    #[error("p = {0} divides 2 times the minimal discriminant")]
    BadReductionPrime(u128),
    #[error("twist parameter {0} is not a nonzero squarefree integer")]
    NotSquarefree(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Nonzero squarefree integer d, standing for Q(√d); d = 1 is the trivial
/// twist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwistDisc(i64);

impl TwistDisc {
    pub fn new(d: i64) -> Result<Self, CurveError> {
        if d == 0 || !arith::is_squarefree(&BigInt::from(d))? {
            return Err(CurveError::NotSquarefree(d.to_string()));
        }
        Ok(TwistDisc(d))
    }

    pub fn trivial() -> Self {
        TwistDisc(1)
    }

    pub fn value(self) -> i64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    pub fn is_trivial(self) -> bool {
        self.0 == 1
    }

    /// Primes dividing d.
    pub fn primes(self) -> Vec<u128> {
        arith::factor_u128(self.0.unsigned_abs() as u128)
            .into_iter()
            .map(|(p, _)| p)
            .collect()
    }

    /// Absolute discriminant of Q(√d): |d| when d ≡ 1 mod 4, else 4|d|.
    pub fn conductor(self) -> u64 {
        let a = self.0.unsigned_abs();
        if self.0.rem_euclid(4) == 1 {
            a
        } else {
            4 * a
        }
    }
}

impl fmt::Display for TwistDisc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionType {
    Good,
    MultSplit,
    MultNonsplit,
    Additive,
    RealPlace,
}

impl ReductionType {
    pub fn is_multiplicative(self) -> bool {
        matches!(self, ReductionType::MultSplit | ReductionType::MultNonsplit)
    }

    pub fn name(self) -> &'static str {
        match self {
            ReductionType::Good => "good",
            ReductionType::MultSplit => "mult_split",
            ReductionType::MultNonsplit => "mult_nonsplit",
            ReductionType::Additive => "additive",
            ReductionType::RealPlace => "real",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionPlace {
    pub place: Place,
    pub kind: ReductionType,
    /// ord_p of the minimal discriminant; 0 for good and real places.
    pub ord_delta_min: u32,
    /// sign of Δ, only meaningful at the real place
    pub real_sign_delta: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GaloisType {
    S3,
    C3,
    C2,
    /// trivial Galois action: full rational 2-torsion
    V,
}

impl GaloisType {
    pub fn name(self) -> &'static str {
        match self {
            GaloisType::S3 => "S3",
            GaloisType::C3 => "C3",
            GaloisType::C2 => "C2",
            GaloisType::V => "V",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoDivisionData {
    /// 4x^3 + b2 x^2 + 2 b4 x + b6, low degree first
    pub cubic: [BigInt; 4],
    pub galois_type: GaloisType,
    pub torsion_dim_q: u32,
    /// rational x-coordinates of the nontrivial 2-torsion points
    pub rational_roots: Vec<BigRational>,
}

/// Integral Weierstrass model y^2 + a1xy + a3y = x^3 + a2x^2 + a4x + a6.
#[derive(Debug, Clone)]
pub struct Curve {
    a: [BigInt; 5],
    b2: BigInt,
    b4: BigInt,
    b6: BigInt,
    b8: BigInt,
    c4: BigInt,
    c6: BigInt,
    disc: BigInt,
    j: BigRational,
    /// primes known to be the only candidates for large factors of Δ
    hints: Vec<u128>,
    known_minimal: bool,
    bad: OnceLock<Result<Vec<u128>, ArithError>>,
    minimal: OnceLock<Result<Box<Curve>, ArithError>>,
}

impl PartialEq for Curve {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
    }
}

impl Eq for Curve {}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", a.join(","))
    }
}

fn bi(n: i64) -> BigInt {
    BigInt::from(n)
}

impl Curve {
    pub fn new(a: [BigInt; 5]) -> Result<Self, CurveError> {
        Self::with_hints(a, Vec::new())
    }

    pub fn from_i64(a: [i64; 5]) -> Result<Self, CurveError> {
        Self::new(a.map(BigInt::from))
    }

    /// Build a curve whose discriminant is known to factor over `hints`
    /// apart from a cofactor below the factorization bound.
    pub fn with_hints(a: [BigInt; 5], mut hints: Vec<u128>) -> Result<Self, CurveError> {
        let [a1, a2, a3, a4, a6] = &a;
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = &b2 * &b2 - 24 * &b4;
        let c6: BigInt = 36 * &b2 * &b4 - &b2 * &b2 * &b2 - 216 * &b6;
        let disc: BigInt =
            9 * &b2 * &b4 * &b6 - &b2 * &b2 * &b8 - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6;
        if disc.is_zero() {
            return Err(CurveError::SingularModel);
        }
        let j = BigRational::new(&c4 * &c4 * &c4, disc.clone());
        hints.sort_unstable();
        hints.dedup();
        Ok(Curve {
            a,
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
            j,
            hints,
            known_minimal: false,
            bad: OnceLock::new(),
            minimal: OnceLock::new(),
        })
    }

    pub fn a(&self) -> &[BigInt; 5] {
        &self.a
    }
    pub fn b2(&self) -> &BigInt {
        &self.b2
    }
    pub fn b4(&self) -> &BigInt {
        &self.b4
    }
    pub fn b6(&self) -> &BigInt {
        &self.b6
    }
    pub fn b8(&self) -> &BigInt {
        &self.b8
    }
    pub fn c4(&self) -> &BigInt {
        &self.c4
    }
    pub fn c6(&self) -> &BigInt {
        &self.c6
    }
    pub fn disc(&self) -> &BigInt {
        &self.disc
    }
    pub fn j(&self) -> &BigRational {
        &self.j
    }
    pub fn hints(&self) -> &[u128] {
        &self.hints
    }

    /// Primes dividing Δ of this model, ascending.
    pub fn bad_primes(&self) -> Result<Vec<u128>, CurveError> {
        self.bad
            .get_or_init(|| primes_dividing(&self.disc, &self.hints))
            .clone()
            .map_err(CurveError::from)
    }

    /// Globally minimal model (Kraus conditions, Cremona's reconstruction).
    /// Returns the input model unchanged when it is already minimal.
    pub fn minimal_model(&self) -> Result<Curve, CurveError> {
        if self.known_minimal {
            return Ok(self.clone());
        }
        let res = self.minimal.get_or_init(|| {
            let bad = match self.bad_primes() {
                Ok(b) => b,
                Err(CurveError::Arith(e)) => return Err(e),
                Err(_) => unreachable!(),
            };
            let u = minimal_scaling(&self.c4, &self.c6, &self.disc, &bad);
            let mut m = if u.is_one() {
                let mut c = self.clone();
                c.minimal = OnceLock::new();
                c
            } else {
                let u4 = num_traits::pow(u.clone(), 4);
                let u6 = num_traits::pow(u, 6);
                let model = from_invariants(&(&self.c4 / u4), &(&self.c6 / u6), self.hints.clone())
                    .expect("Kraus reconstruction yields a nonsingular model");
                let _ = model.bad.set(Ok(bad));
                model
            };
            m.known_minimal = true;
            Ok(Box::new(m))
        });
        match res {
            Ok(b) => Ok((**b).clone()),
            Err(e) => Err(CurveError::Arith(e.clone())),
        }
    }

    pub fn is_minimal(&self) -> Result<bool, CurveError> {
        Ok(self.minimal_model()?.a == self.a)
    }

    /// Discriminant of the minimal model.
    pub fn minimal_disc(&self) -> Result<BigInt, CurveError> {
        Ok(self.minimal_model()?.disc)
    }

    /// Bad primes of the minimal model.
    pub fn bad_primes_min(&self) -> Result<Vec<u128>, CurveError> {
        let m = self.minimal_model()?;
        let mut out = Vec::new();
        for p in self.bad_primes()? {
            if (&m.disc % BigInt::from(p)).is_zero() {
                out.push(p);
            }
        }
        Ok(out)
    }

    pub fn reduction_type(&self, v: Place) -> Result<ReductionPlace, CurveError> {
        let m = self.minimal_model()?;
        let p = match v {
            Place::Real => {
                return Ok(ReductionPlace {
                    place: v,
                    kind: ReductionType::RealPlace,
                    ord_delta_min: 0,
                    real_sign_delta: arith::sign_of(&m.disc),
                })
            }
            Place::Finite(p) => p,
        };
        let ord = split_power(&m.disc, p).0;
        let kind = if ord == 0 {
            ReductionType::Good
        } else if !(&m.c4 % BigInt::from(p)).is_zero() {
            if is_padic_square(&-&m.c6, p) {
                ReductionType::MultSplit
            } else {
                ReductionType::MultNonsplit
            }
        } else {
            ReductionType::Additive
        };
        Ok(ReductionPlace {
            place: v,
            kind,
            ord_delta_min: ord,
            real_sign_delta: arith::sign_of(&m.disc),
        })
    }

    /// Reduction data at every bad prime of the minimal model, ascending.
    pub fn bad_reduction(&self) -> Result<Vec<ReductionPlace>, CurveError> {
        self.bad_primes_min()?
            .into_iter()
            .map(|p| self.reduction_type(Place::Finite(p)))
            .collect()
    }

    pub fn is_semistable(&self) -> Result<bool, CurveError> {
        Ok(self
            .bad_reduction()?
            .iter()
            .all(|r| r.kind != ReductionType::Additive))
    }

    /// X^3 + b2 X^2 + 8 b4 X + 16 b6, the 2-division cubic in X = 4x.
    fn monic_cubic(&self) -> [BigInt; 4] {
        [16 * &self.b6, 8 * &self.b4, self.b2.clone(), BigInt::one()]
    }

    pub fn two_division(&self) -> TwoDivisionData {
        let g = self.monic_cubic();
        let roots = integer_roots_monic_cubic(&g);
        let (galois_type, torsion_dim_q) = match roots.len() {
            0 if is_square(&self.disc) => (GaloisType::C3, 0),
            0 => (GaloisType::S3, 0),
            1 => (GaloisType::C2, 1),
            _ => (GaloisType::V, 2),
        };
        TwoDivisionData {
            cubic: [self.b6.clone(), 2 * &self.b4, self.b2.clone(), bi(4)],
            galois_type,
            torsion_dim_q,
            rational_roots: roots
                .into_iter()
                .map(|r| BigRational::new(r, bi(4)))
                .collect(),
        }
    }

    /// Order of Frobenius at p acting on E[2].
    pub fn frobenius_order(&self, p: u128) -> Result<u8, CurveError> {
        if p == 2 || (self.minimal_disc()? % BigInt::from(p)).is_zero() {
            return Err(CurveError::BadReductionPrime(p));
        }
        let g: Vec<u128> = self.monic_cubic().iter().map(|c| mod_u128(c, p)).collect();
        Ok(match modp::roots_mod_p(&g, p).len() {
            0 => 3,
            1 => 2,
            _ => 1,
        })
    }

    /// dim_F2 E(Q_v)[2].
    pub fn local_two_torsion_dim(&self, v: Place) -> Result<u32, CurveError> {
        match v {
            Place::Real => Ok(if self.disc.is_positive() { 2 } else { 1 }),
            Place::Finite(p) => {
                let g = self.monic_cubic();
                let n = arith::padic_root_count(&g, p)?;
                Ok(match n {
                    0 => 0,
                    1 => 1,
                    _ => 2,
                })
            }
        }
    }

    /// Quadratic twist by Q(√d), returned as a minimal model.
    pub fn twist(&self, d: TwistDisc) -> Result<Curve, CurveError> {
        if d.is_trivial() {
            return Ok(self.clone());
        }
        let db = d.big();
        let c4 = 1296 * &db * &db * &self.c4;
        let c6 = 46656 * &db * &db * &db * &self.c6;
        let mut hints = self.bad_primes()?;
        hints.extend(d.primes());
        hints.extend([2, 3]);
        hints.sort_unstable();
        hints.dedup();
        // c4 = 6^4 d^2 c4(E), c6 = 6^6 d^3 c6(E) are the invariants of
        // y^2 = x^3 - 27 d^2 c4 x - 54 d^3 c6
        let disc = (&c4 * &c4 * &c4 - &c6 * &c6) / 1728;
        let bad = primes_dividing(&disc, &hints)?;
        let u = minimal_scaling(&c4, &c6, &disc, &bad);
        let u4 = num_traits::pow(u.clone(), 4);
        let u6 = num_traits::pow(u, 6);
        let mut m = from_invariants(&(c4 / u4), &(c6 / u6), hints)?;
        m.known_minimal = true;
        Ok(m)
    }
}

/// Primes dividing a nonzero integer, trying `hints` before factoring the
/// remaining cofactor.
fn primes_dividing(n: &BigInt, hints: &[u128]) -> Result<Vec<u128>, ArithError> {
    let mut rest = n.abs();
    let mut out = Vec::new();
    for &p in hints {
        let (e, r) = split_power(&rest, p);
        if e > 0 {
            out.push(p);
            rest = r;
        }
    }
    out.extend(
        factor(&rest)
            .map_err(|_| ArithError::OutOfRange(n.to_string()))?
            .primes(),
    );
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Kraus's local conditions for (c4, c6) to come from an integral model.
fn kraus_ok(c4: &BigInt, c6: &BigInt, p: u128) -> bool {
    match p {
        2 => {
            if mod_u128(c6, 4) == 3 {
                return true;
            }
            let v4 = if c4.is_zero() {
                u32::MAX
            } else {
                split_power(c4, 2).0
            };
            let r = mod_u128(c6, 32);
            v4 >= 4 && (r == 0 || r == 8)
        }
        3 => c6.is_zero() || split_power(c6, 3).0 != 2,
        _ => true,
    }
}

/// Largest u such that (c4/u^4, c6/u^6) are invariants of an integral model.
fn minimal_scaling(c4: &BigInt, c6: &BigInt, disc: &BigInt, bad: &[u128]) -> BigInt {
    let mut u = BigInt::one();
    for &p in bad {
        let vd = split_power(disc, p).0 / 12;
        let v4 = if c4.is_zero() {
            u32::MAX
        } else {
            split_power(c4, p).0 / 4
        };
        let v6 = if c6.is_zero() {
            u32::MAX
        } else {
            split_power(c6, p).0 / 6
        };
        let kmax = vd.min(v4).min(v6);
        let pb = BigInt::from(p);
        for k in (0..=kmax).rev() {
            let pk = num_traits::pow(pb.clone(), k as usize);
            let c4k = c4 / num_traits::pow(pk.clone(), 4);
            let c6k = c6 / num_traits::pow(pk.clone(), 6);
            if kraus_ok(&c4k, &c6k, p) {
                u *= pk;
                break;
            }
        }
    }
    u
}

/// Integral model with the given invariants (Kraus conditions assumed).
fn from_invariants(c4: &BigInt, c6: &BigInt, hints: Vec<u128>) -> Result<Curve, CurveError> {
    let twelve = bi(12);
    let mut b2 = (-c6).mod_floor(&twelve);
    if b2 > bi(6) {
        b2 -= &twelve;
    }
    let b4 = (&b2 * &b2 - c4) / 24;
    let b6: BigInt = (-(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - c6) / 216;
    let a1 = b2.mod_floor(&bi(2));
    let a3 = b6.mod_floor(&bi(2));
    let a2 = (&b2 - &a1) / 4;
    let a4 = (&b4 - &a1 * &a3) / 2;
    let a6 = (&b6 - &a3) / 4;
    let e = Curve::with_hints([a1, a2, a3, a4, a6], hints)?;
    debug_assert_eq!(&e.c4, c4);
    debug_assert_eq!(&e.c6, c6);
    Ok(e)
}

fn eval(g: &[BigInt; 4], x: &BigInt) -> BigInt {
    g.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Integer roots of a monic integer cubic, ascending.
///
/// The cubic is monotone between its critical points, so each monotone
/// piece is searched by bisection; integers adjacent to the critical points
/// are checked directly.
fn integer_roots_monic_cubic(g: &[BigInt; 4]) -> Vec<BigInt> {
    let bound: BigInt = g.iter().map(|c| c.abs()).max().unwrap() + 1;
    let lo: BigInt = -&bound;
    let hi = bound;
    // g'(X) = 3X^2 + 2 c2 X + c1; roots (-2c2 ± sqrt(D)) / 6
    let dd: BigInt = 4 * &g[2] * &g[2] - 12 * &g[1];
    let mut cuts: Vec<BigInt> = Vec::new();
    if dd.is_positive() {
        let s = dd.sqrt();
        let six = bi(6);
        for t in [-&s - 1, -s.clone(), s.clone(), s + 1] {
            let num: BigInt = t - 2 * &g[2];
            cuts.push(num.div_floor(&six));
            cuts.push(num.div_ceil(&six));
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut roots = Vec::new();
    // endpoints of monotone pieces; each cut point is checked directly
    let mut edges = vec![lo.clone()];
    for c in &cuts {
        if eval(g, c).is_zero() {
            roots.push(c.clone());
        }
        edges.push(c.clone());
    }
    edges.push(hi);
    for w in edges.windows(2) {
        if let Some(r) = monotone_root(g, &w[0], &w[1]) {
            roots.push(r);
        }
    }
    roots.sort();
    roots.dedup();
    roots
}

fn monotone_root(g: &[BigInt; 4], lo: &BigInt, hi: &BigInt) -> Option<BigInt> {
    if lo > hi {
        return None;
    }
    let flo = eval(g, lo);
    let fhi = eval(g, hi);
    if flo.is_zero() {
        return Some(lo.clone());
    }
    if fhi.is_zero() {
        return Some(hi.clone());
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let (mut a, mut b) = (lo.clone(), hi.clone());
    let sa = flo.signum();
    while &b - &a > BigInt::one() {
        let m: BigInt = (&a + &b).div_floor(&bi(2));
        let fm = eval(g, &m);
        if fm.is_zero() {
            return Some(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    None
}

/// Conversion used by callers holding machine-size primes.
pub fn to_u64(p: u128) -> u64 {
    p.to_u64().expect("prime fits in 64 bits")
}
