//! Exact integer and symbol arithmetic: factorization, Kronecker and
//! Hilbert symbols, square classes.

pub mod modp;
pub mod padic;

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use padic::{padic_root_count, valuation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero input")]
    ZeroInput,
    #[error("kronecker symbol (0|0) is undefined")]
    BothZero,
    #[error("integer {0} exceeds the supported factorization bound 2^96")]
    OutOfRange(String),
    #[error("p-adic root counting did not stabilize at p = {0}")]
    PrecisionExhausted(u128),
}

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Real,
    Finite(u128),
}

impl Place {
    pub fn prime(self) -> Option<u128> {
        match self {
            Place::Real => None,
            Place::Finite(p) => Some(p),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i8,
    /// (prime, exponent), primes strictly increasing
    pub factors: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> Vec<u128> {
        self.factors.iter().map(|(p, _)| *p).collect()
    }

    pub fn value(&self) -> BigInt {
        let mut acc = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            acc *= num_traits::pow(BigInt::from(*p), *e as usize);
        }
        acc
    }
}

/// Largest magnitude accepted by [`factor`].
pub fn factor_bound() -> BigInt {
    BigInt::one() << 96
}

const TRIAL_LIMIT: u128 = 1_000_000;
const BIG_TRIAL_LIMIT: u64 = 10_000;

/// Complete factorization of a nonzero integer with |n| ≤ 2^96.
pub fn factor(n: &BigInt) -> Result<Factorization, ArithError> {
    if n.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut rest = n.abs();
    let mut small = Vec::new();
    if rest > factor_bound() {
        // large inputs are accepted when small primes bring them under the bound
        for p in modp::primes_up_to(BIG_TRIAL_LIMIT) {
            let (e, r) = split_power(&rest, p as u128);
            if e > 0 {
                small.push((p as u128, e));
                rest = r;
            }
        }
        if rest > factor_bound() {
            return Err(ArithError::OutOfRange(n.to_string()));
        }
    }
    let m = rest.to_u128().expect("bounded above");
    small.extend(factor_u128(m));
    Ok(Factorization {
        sign,
        factors: small,
    })
}

/// Factorization of a positive machine integer.
pub fn factor_u128(mut m: u128) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = Vec::new();
    if m <= 1 {
        return out;
    }
    let tz = m.trailing_zeros();
    if tz > 0 {
        out.push((2, tz));
        m >>= tz;
    }
    let mut p = 3u128;
    while p <= TRIAL_LIMIT && p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 2;
    }
    if m > 1 {
        let mut big = Vec::new();
        split_cofactor(m, &mut big);
        big.sort_unstable();
        for q in big {
            match out.last_mut() {
                Some((last, e)) if *last == q => *e += 1,
                _ => out.push((q, 1)),
            }
        }
    }
    out
}

fn split_cofactor(m: u128, out: &mut Vec<u128>) {
    if m == 1 {
        return;
    }
    if modp::is_prime(m) {
        out.push(m);
        return;
    }
    let d = pollard_brent(m);
    split_cofactor(d, out);
    split_cofactor(m / d, out);
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A nontrivial factor of an odd composite `n` (Brent's cycle variant).
fn pollard_brent(n: u128) -> u128 {
    use modp::{add_mod, mul_mod};
    let isqrt = integer_sqrt(n);
    if isqrt * isqrt == n {
        return isqrt;
    }
    for c in 1u128.. {
        let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
        let mut y = 2u128;
        let mut r = 1u64;
        let mut q = 1u128;
        let mut g = 1u128;
        let mut x = y;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0u64;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u128(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u128(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn integer_sqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Jacobi symbol `(a | n)` for odd positive `n`, arbitrary precision.
pub fn jacobi(a: &BigInt, n: &BigInt) -> i8 {
    debug_assert!(n.is_positive() && n.is_odd());
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut k = 1i8;
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        let n8 = n.mod_floor(&eight).to_u8().unwrap();
        if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
            k = -k;
        }
        if a.mod_floor(&four) == BigInt::from(3) && n8 % 4 == 3 {
            k = -k;
        }
        std::mem::swap(&mut a, &mut n);
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        k
    } else {
        0
    }
}

/// Kronecker symbol `(a | n)`.
pub fn kronecker(a: &BigInt, n: &BigInt) -> Result<i8, ArithError> {
    if a.is_zero() && n.is_zero() {
        return Err(ArithError::BothZero);
    }
    if n.is_zero() {
        return Ok(if a.abs().is_one() { 1 } else { 0 });
    }
    let mut result = 1i8;
    let mut n = n.clone();
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            result = -result;
        }
    }
    let v = n.trailing_zeros().unwrap_or(0);
    if v > 0 {
        if a.is_even() {
            return Ok(0);
        }
        let a8 = a.mod_floor(&BigInt::from(8)).to_u8().unwrap();
        if v % 2 == 1 && (a8 == 3 || a8 == 5) {
            result = -result;
        }
        n >>= v;
    }
    if n.is_one() {
        return Ok(result);
    }
    Ok(result * jacobi(a, &n))
}

/// Legendre symbol of a big integer modulo an odd prime.
pub fn legendre_big(a: &BigInt, p: u128) -> i8 {
    let r = a.mod_floor(&BigInt::from(p)).to_u128().unwrap();
    modp::legendre(r, p)
}

/// `n mod m` as a machine integer in `[0, m)`.
pub fn mod_u128(n: &BigInt, m: u128) -> u128 {
    n.mod_floor(&BigInt::from(m)).to_u128().unwrap()
}

/// Split off the full power of `p`: returns (ord_p(n), n / p^ord).
pub fn split_power(n: &BigInt, p: u128) -> (u32, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        n = q;
        e += 1;
    }
    (e, n)
}

/// Hilbert symbol of two nonzero integers at a place.
pub fn hilbert_int(a: &BigInt, b: &BigInt, v: Place) -> Result<i8, ArithError> {
    if a.is_zero() || b.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    match v {
        Place::Real => Ok(if a.is_negative() && b.is_negative() {
            -1
        } else {
            1
        }),
        Place::Finite(2) => {
            let (alpha, u) = split_power(a, 2);
            let (beta, w) = split_power(b, 2);
            let u8_ = mod_u128(&u, 8);
            let w8 = mod_u128(&w, 8);
            let eps = |x: u128| ((x - 1) / 2) & 1;
            let omega = |x: u128| ((x * x - 1) / 8) & 1;
            let e = eps(u8_) * eps(w8) + alpha as u128 * omega(w8) + beta as u128 * omega(u8_);
            Ok(if e.is_multiple_of(2) { 1 } else { -1 })
        }
        Place::Finite(p) => {
            let (alpha, u) = split_power(a, p);
            let (beta, w) = split_power(b, p);
            let mut s = 1i8;
            if (alpha as u128 * beta as u128) % 2 == 1 && p % 4 == 3 {
                s = -s;
            }
            if beta % 2 == 1 {
                s *= legendre_big(&u, p);
            }
            if alpha % 2 == 1 {
                s *= legendre_big(&w, p);
            }
            Ok(s)
        }
    }
}

/// Hilbert symbol `(a, b)_v` of nonzero rationals.
pub fn hilbert(a: &BigRational, b: &BigRational, v: Place) -> Result<i8, ArithError> {
    // x/y and x*y agree modulo squares
    let a = a.numer() * a.denom();
    let b = b.numer() * b.denom();
    hilbert_int(&a, &b, v)
}

/// Class of a nonzero rational integer in Q^×/(Q^×)^2, stored as its
/// squarefree representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass(BigInt);

impl SquareClass {
    pub fn representative(&self) -> &BigInt {
        &self.0
    }

    pub fn one() -> Self {
        SquareClass(BigInt::one())
    }

    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        // product of squarefree integers: divide out the square of the gcd
        let g = self.0.gcd(&other.0);
        SquareClass(&self.0 * &other.0 / (&g * &g))
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_one()
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn squarefree_part(n: &BigInt) -> Result<SquareClass, ArithError> {
    let fac = factor(n)?;
    let mut rep = BigInt::from(fac.sign);
    for (p, e) in fac.factors {
        if e % 2 == 1 {
            rep *= BigInt::from(p);
        }
    }
    Ok(SquareClass(rep))
}

pub fn is_squarefree(n: &BigInt) -> Result<bool, ArithError> {
    Ok(factor(n)?.factors.iter().all(|(_, e)| *e == 1))
}

/// Whether an integer is a perfect square (negative numbers are not).
pub fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

/// Sign of an integer as `i8` (0 for zero).
pub fn sign_of(n: &BigInt) -> i8 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
