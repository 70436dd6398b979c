//! Valuations and root counting in Z_p.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{mod_u128, modp, split_power, ArithError};

/// ord_p(n) for nonzero n.
pub fn valuation(n: &BigInt, p: u128) -> u32 {
    split_power(n, p).0
}

/// Maximum refinement depth before giving up.
pub const MAX_DEPTH: u32 = 1024;

/// Number of distinct roots in Z_p of an integer polynomial (coefficients
/// low degree first) with no repeated roots.
///
/// Each residue disc r + pZ_p containing a root mod p is refined by
/// substituting x = r + p·X and stripping content until a simple root mod p
/// remains (which lifts uniquely by Hensel) or the disc is empty.
pub fn padic_root_count(f: &[BigInt], p: u128) -> Result<usize, ArithError> {
    if f.iter().all(|c| c.is_zero()) {
        return Err(ArithError::ZeroInput);
    }
    count_in_disc(f, p, 0)
}

fn count_in_disc(f: &[BigInt], p: u128, depth: u32) -> Result<usize, ArithError> {
    if depth > MAX_DEPTH {
        return Err(ArithError::PrecisionExhausted(p));
    }
    let f = strip_content(f, p);
    let reduced: Vec<u128> = f.iter().map(|c| mod_u128(c, p)).collect();
    let deriv = modp::derivative_mod(&reduced, p);
    let mut count = 0;
    for r in modp::roots_mod_p(&reduced, p) {
        if modp::eval_mod(&deriv, r, p) != 0 {
            count += 1;
            continue;
        }
        let shifted = substitute_affine(&f, &BigInt::from(r), &BigInt::from(p));
        count += count_in_disc(&shifted, p, depth + 1)?;
    }
    Ok(count)
}

fn strip_content(f: &[BigInt], p: u128) -> Vec<BigInt> {
    let e = f
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| split_power(c, p).0)
        .min()
        .unwrap_or(0);
    if e == 0 {
        return f.to_vec();
    }
    let pe = num_traits::pow(BigInt::from(p), e as usize);
    f.iter().map(|c| c / &pe).collect()
}

/// Coefficients of f(r + s·X).
pub fn substitute_affine(f: &[BigInt], r: &BigInt, s: &BigInt) -> Vec<BigInt> {
    // Horner with polynomial arithmetic: acc = acc * (r + sX) + c
    let mut acc: Vec<BigInt> = Vec::new();
    for c in f.iter().rev() {
        let mut next = vec![BigInt::zero(); acc.len() + 1];
        for (i, a) in acc.iter().enumerate() {
            next[i] += a * r;
            next[i + 1] += a * s;
        }
        next[0] += c;
        acc = next;
    }
    acc
}

/// Whether a nonzero integer is a square in Q_p.
pub fn is_padic_square(n: &BigInt, p: u128) -> bool {
    let (e, u) = split_power(n, p);
    if e % 2 == 1 {
        return false;
    }
    if p == 2 {
        mod_u128(&u, 8) == 1
    } else {
        modp::legendre(mod_u128(&u, p), p) == 1
    }
}

/// Whether a nonzero integer is a square in R.
pub fn is_real_square(n: &BigInt) -> bool {
    n.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn poly(c: &[i64]) -> Vec<BigInt> {
        c.iter().map(|x| BigInt::from(*x)).collect()
    }

    #[test]
    fn counts_roots_of_split_cubic() {
        // x(x-1)(x+1) = x^3 - x
        let f = poly(&[0, -1, 0, 1]);
        for p in [2u128, 3, 5, 7, 17] {
            assert_eq!(padic_root_count(&f, p).unwrap(), 3, "p = {p}");
        }
    }

    #[test]
    fn close_roots_need_refinement() {
        // (x - 1)(x - 1 - 3^5)(x - 7): two roots congruent mod 3^5
        let a = 1 + 243;
        let g = {
            let r = [1i64, a, 7];
            let mut c = vec![BigInt::one()];
            for ri in r {
                let mut n = vec![BigInt::zero(); c.len() + 1];
                for (i, ci) in c.iter().enumerate() {
                    n[i] -= ci * BigInt::from(ri);
                    n[i + 1] += ci;
                }
                c = n;
            }
            c
        };
        assert_eq!(padic_root_count(&g, 3).unwrap(), 3);
    }

    #[test]
    fn quadratic_residue_roots() {
        // x^2 - 2 has roots in Q_7 (3^2 = 2 mod 7) but not in Q_3 or Q_5
        let f = poly(&[-2, 0, 1]);
        assert_eq!(padic_root_count(&f, 7).unwrap(), 2);
        assert_eq!(padic_root_count(&f, 3).unwrap(), 0);
        assert_eq!(padic_root_count(&f, 5).unwrap(), 0);
        // x^2 + 7 splits in Q_2 (-7 = 1 mod 8)
        assert_eq!(padic_root_count(&poly(&[7, 0, 1]), 2).unwrap(), 2);
        assert_eq!(padic_root_count(&poly(&[3, 0, 1]), 2).unwrap(), 0);
    }

    #[test]
    fn padic_squares() {
        assert!(is_padic_square(&BigInt::from(-7), 2));
        assert!(!is_padic_square(&BigInt::from(5), 2));
        assert!(is_padic_square(&BigInt::from(4 * 17), 2));
        assert!(!is_padic_square(&BigInt::from(-1), 3));
        assert!(is_padic_square(&BigInt::from(-1), 5));
    }
}
