//! Word-level modular arithmetic and small-degree polynomial root finding
//! over prime fields.
//!
//! Moduli are `u128` so that every prime admitted by [`super::factor`]
//! (up to 2^96) can be handled. Products are computed directly when the
//! modulus fits in 64 bits and by double-and-add otherwise.

/// `a * b mod m` for `a, b < m`.
pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a * b) % m;
    }
    if m < 1 << 96 {
        // Horner over 32-bit limbs of b: acc < 2^96 so acc << 32 fits
        let a = a % m;
        let b = b % m;
        let mut acc = 0u128;
        for shift in [64u32, 32, 0] {
            let limb = (b >> shift) & 0xffff_ffff;
            acc = ((acc << 32) % m + (a * limb) % m) % m;
        }
        return acc;
    }
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

#[inline]
pub fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    // m < 2^127 so a + b cannot overflow
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u128, b: u128, m: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo a prime `p`; `a` must be nonzero mod `p`.
pub fn inv_mod(a: u128, p: u128) -> u128 {
    pow_mod(a, p - 2, p)
}

/// Jacobi symbol `(a | n)` for odd `n > 0`.
pub fn jacobi(a: u128, n: u128) -> i8 {
    debug_assert!(n & 1 == 1);
    let mut a = a % n;
    let mut n = n;
    let mut k = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz & 1 == 1 && (n & 7 == 3 || n & 7 == 5) {
            k = -k;
        }
        if a & 3 == 3 && n & 3 == 3 {
            k = -k;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Legendre symbol for an odd prime `p`.
pub fn legendre(a: u128, p: u128) -> i8 {
    jacobi(a, p)
}

/// Square root modulo an odd prime (Tonelli–Shanks). Returns `None` for
/// non-residues.
pub fn sqrt_mod(a: u128, p: u128) -> Option<u128> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    if p & 3 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q & 1 == 0 {
        q >>= 1;
        s += 1;
    }
    let mut z = 2u128;
    while legendre(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mul_mod(b, b, p);
        }
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Dense polynomial over F_p, coefficients low degree first, no trailing zeros.
type Poly = Vec<u128>;

fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn poly_rem(f: &[u128], g: &[u128], p: u128) -> Poly {
    let mut r: Poly = f.to_vec();
    let dg = g.len() - 1;
    let lead_inv = inv_mod(g[dg], p);
    while r.len() > dg {
        let top = *r.last().unwrap();
        if top != 0 {
            let c = mul_mod(top, lead_inv, p);
            let shift = r.len() - 1 - dg;
            for (i, gi) in g.iter().enumerate() {
                r[shift + i] = sub_mod(r[shift + i], mul_mod(c, *gi, p), p);
            }
        }
        r.pop();
    }
    trim(r)
}

fn poly_mul_rem(a: &[u128], b: &[u128], m: &[u128], p: u128) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if *ai == 0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(*ai, *bj, p), p);
        }
    }
    poly_rem(&trim(out), m, p)
}

fn poly_pow_rem(base: &[u128], mut exp: u128, m: &[u128], p: u128) -> Poly {
    let mut acc: Poly = vec![1];
    let mut b = poly_rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = poly_mul_rem(&acc, &b, m, p);
        }
        b = poly_mul_rem(&b, &b, m, p);
        exp >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u128], b: &[u128], p: u128) -> Poly {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    // make monic
    if let Some(&lead) = a.last() {
        let inv = inv_mod(lead, p);
        for c in a.iter_mut() {
            *c = mul_mod(*c, inv, p);
        }
    }
    a
}

fn poly_sub_x(f: &[u128], p: u128) -> Poly {
    let mut f = f.to_vec();
    if f.len() < 2 {
        f.resize(2, 0);
    }
    f[1] = sub_mod(f[1], 1, p);
    trim(f)
}

fn poly_div_exact(f: &[u128], g: &[u128], p: u128) -> Poly {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    let lead_inv = inv_mod(g[dg], p);
    let mut q = vec![0u128; f.len() - dg];
    while r.len() > dg {
        let top = *r.last().unwrap();
        let c = mul_mod(top, lead_inv, p);
        let shift = r.len() - 1 - dg;
        q[shift] = c;
        for (i, gi) in g.iter().enumerate() {
            r[shift + i] = sub_mod(r[shift + i], mul_mod(c, *gi, p), p);
        }
        r.pop();
    }
    trim(q)
}

/// Evaluate a polynomial (low degree first) at `x` modulo `p`.
pub fn eval_mod(f: &[u128], x: u128, p: u128) -> u128 {
    f.iter()
        .rev()
        .fold(0u128, |acc, c| add_mod(mul_mod(acc, x, p), *c % p, p))
}

/// Formal derivative modulo `p`.
pub fn derivative_mod(f: &[u128], p: u128) -> Vec<u128> {
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| mul_mod((i as u128) % p, *c, p))
        .collect()
}

const BRUTE_FORCE_LIMIT: u128 = 1 << 10;

/// Distinct roots in F_p of a polynomial given low degree first.
///
/// Coefficients are reduced mod `p`. The zero polynomial has no roots by
/// convention (callers strip content before asking).
pub fn roots_mod_p(f: &[u128], p: u128) -> Vec<u128> {
    let f = trim(f.iter().map(|c| c % p).collect());
    if f.len() <= 1 {
        return Vec::new();
    }
    if p < BRUTE_FORCE_LIMIT {
        return (0..p).filter(|x| eval_mod(&f, *x, p) == 0).collect();
    }
    // product of the distinct linear factors: gcd(x^p - x, f)
    let xp = poly_pow_rem(&[0, 1], p, &f, p);
    let lin = poly_gcd(&f, &poly_sub_x(&xp, p), p);
    let mut roots = Vec::new();
    split_linear(&lin, p, &mut roots);
    roots.sort_unstable();
    roots
}

/// Split a monic product of distinct linear factors into its roots.
fn split_linear(f: &[u128], p: u128, out: &mut Vec<u128>) {
    let deg = f.len().saturating_sub(1);
    match deg {
        0 => {}
        1 => out.push(sub_mod(0, f[0], p)),
        2 => {
            // x^2 + b x + c
            let (c, b) = (f[0], f[1]);
            let disc = sub_mod(mul_mod(b, b, p), mul_mod(4, c, p), p);
            let s = sqrt_mod(disc, p).expect("split quadratic has square discriminant");
            let inv2 = inv_mod(2, p);
            let nb = sub_mod(0, b, p);
            out.push(mul_mod(add_mod(nb, s, p), inv2, p));
            out.push(mul_mod(sub_mod(nb, s, p), inv2, p));
        }
        _ => {
            // Cantor–Zassenhaus with deterministic shifts
            for a in 0..p {
                let h = poly_pow_rem(&[a, 1], (p - 1) / 2, f, p);
                let g = poly_gcd(f, &poly_sub_const(&h, 1, p), p);
                let dg = g.len().saturating_sub(1);
                if dg > 0 && dg < deg {
                    let cofactor = poly_div_exact(f, &g, p);
                    split_linear(&g, p, out);
                    split_linear(&poly_gcd(&cofactor, &cofactor, p), p, out);
                    return;
                }
            }
            unreachable!("Cantor–Zassenhaus failed to split a product of linear factors");
        }
    }
}

fn poly_sub_const(f: &[u128], c: u128, p: u128) -> Poly {
    let mut f = f.to_vec();
    if f.is_empty() {
        f.push(0);
    }
    f[0] = sub_mod(f[0], c, p);
    trim(f)
}

/// Deterministic Miller–Rabin. Exact below 3.3e24; above that the first 24
/// prime bases are used.
pub fn is_prime(n: u128) -> bool {
    const BASES: [u128; 24] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    ];
    if n < 2 {
        return false;
    }
    for &b in BASES.iter() {
        if n == b {
            return true;
        }
        if n.is_multiple_of(b) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    let rounds = if n < 3_317_044_064_679_887_385_961_981 {
        13
    } else {
        24
    };
    'outer: for &a in BASES.iter().take(rounds) {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Primes up to and including `n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_roundtrip_small_primes() {
        for &p in &[3u128, 5, 7, 13, 17, 97, 1009] {
            for a in 0..p {
                if let Some(r) = sqrt_mod(a, p) {
                    assert_eq!(mul_mod(r, r, p), a);
                } else {
                    assert_eq!(legendre(a, p), -1);
                }
            }
        }
    }

    #[test]
    fn roots_large_prime_match_construction() {
        let p: u128 = 1_000_003;
        // (x - 5)(x - 17)(x - 999_999)
        let r = [5u128, 17, 999_999];
        let mut f = vec![1u128];
        for ri in r {
            let neg = sub_mod(0, ri, p);
            let mut g = vec![0u128; f.len() + 1];
            for (i, c) in f.iter().enumerate() {
                g[i] = add_mod(g[i], mul_mod(*c, neg, p), p);
                g[i + 1] = add_mod(g[i + 1], *c, p);
            }
            f = g;
        }
        assert_eq!(roots_mod_p(&f, p), vec![5, 17, 999_999]);
        // x^2 + 1 has no roots for p = 3 mod 4 primes
        let q: u128 = 1_000_003;
        assert_eq!(q % 4, 3);
        assert!(roots_mod_p(&[1, 0, 1], q).is_empty());
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let primes = primes_up_to(20_000);
        let mut idx = 0;
        for n in 0..=20_000u128 {
            let expected = idx < primes.len() && primes[idx] as u128 == n;
            if expected {
                idx += 1;
            }
            assert_eq!(is_prime(n), expected, "n = {n}");
        }
        assert!(is_prime((1u128 << 89) - 1));
        assert!(!is_prime(((1u128 << 61) - 1) * ((1u128 << 31) - 1)));
    }

    #[test]
    fn wide_modulus_multiplication() {
        let m = (1u128 << 89) - 1;
        let a = m - 2;
        // (-2)^2 = 4
        assert_eq!(mul_mod(a, a, m), 4);
    }
}
