//! Linear algebra and polynomials over F_2.

use std::fmt;

/// Dense F_2 vector packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            v.set(i, *b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|i| self.get(*i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Dense F_2 matrix stored as packed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    ncols: usize,
    rows: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        BitMatrix {
            ncols,
            rows: vec![BitVec::zeros(ncols); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    pub fn from_rows(ncols: usize, rows: Vec<BitVec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == ncols));
        BitMatrix { ncols, rows }
    }

    /// Parse rows written as strings of '0'/'1'.
    pub fn from_row_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self, String> {
        let ncols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut out = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(format!("row {i} has length {}, expected {ncols}", r.len()));
            }
            let mut v = BitVec::zeros(ncols);
            for (j, ch) in r.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => v.set(j, true),
                    _ => return Err(format!("row {i} contains '{ch}'")),
                }
            }
            out.push(v);
        }
        Ok(BitMatrix { ncols, rows: out })
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.rows[i].set(j, b);
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.ncols);
        self.rows.push(row);
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols
    }

    pub fn add(&self, other: &BitMatrix) -> BitMatrix {
        let mut out = self.clone();
        for (a, b) in out.rows.iter_mut().zip(&other.rows) {
            a.xor_assign(b);
        }
        out
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.ncols, other.nrows());
        let mut out = BitMatrix::zeros(self.nrows(), other.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for k in row.ones() {
                out.rows[i].xor_assign(&other.rows[k]);
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.ncols);
        for k in v.ones() {
            out.xor_assign(&self.rows[k]);
        }
        out
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            out.set(i, row.dot(v));
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> BitMatrix {
        assert!(self.is_square());
        let mut acc = BitMatrix::identity(self.ncols);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.ncols, self.nrows());
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.ones() {
                out.rows[j].set(i, true);
            }
        }
        out
    }

    /// Reduced row echelon form with lowest-index pivoting; returns the
    /// pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.ncols {
            if r == self.rows.len() {
                break;
            }
            let Some(sel) = (r..self.rows.len()).find(|i| self.rows[*i].get(c)) else {
                continue;
            };
            self.rows.swap(r, sel);
            let pivot = self.rows[r].clone();
            for i in 0..self.rows.len() {
                if i != r && self.rows[i].get(c) {
                    self.rows[i].xor_assign(&pivot);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of { x : M x = 0 } in reduced form (one vector per free column).
    pub fn kernel(&self) -> Vec<BitVec> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.ncols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for f in (0..self.ncols).filter(|c| !is_pivot[*c]) {
            let mut v = BitVec::zeros(self.ncols);
            v.set(f, true);
            for (i, &pc) in pivots.iter().enumerate() {
                if m.rows[i].get(f) {
                    v.set(pc, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == BitMatrix::identity(self.ncols)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &BitMatrix) -> BitMatrix {
        let n = self.ncols + other.ncols;
        let mut out = BitMatrix::zeros(self.nrows() + other.nrows(), n);
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.ones() {
                out.rows[i].set(j, true);
            }
        }
        for (i, row) in other.rows.iter().enumerate() {
            for j in row.ones() {
                out.rows[self.nrows() + i].set(self.ncols + j, true);
            }
        }
        out
    }

    pub fn to_row_strings(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.to_string()).collect()
    }
}

/// Reduce a list of vectors to an echelon basis of their span.
pub fn span_basis(vectors: &[BitVec], len: usize) -> Vec<BitVec> {
    let mut m = BitMatrix::from_rows(len, vectors.to_vec());
    let r = m.rref().len();
    m.rows.truncate(r);
    m.rows
}

/// Polynomial over F_2, bit i is the coefficient of X^i.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Gf2Poly { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    pub fn x() -> Self {
        Self::monomial(1)
    }

    pub fn monomial(k: usize) -> Self {
        let mut words = vec![0u64; k / 64 + 1];
        words[k / 64] = 1 << (k % 64);
        Gf2Poly { words }
    }

    /// From the bits of an integer (bit i ↦ X^i).
    pub fn from_u64(bits: u64) -> Self {
        Gf2Poly { words: vec![bits] }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let top = self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - top.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let n = self.words.len().max(other.words.len());
        let words = (0..n)
            .map(|i| self.words.get(i).unwrap_or(&0) ^ other.words.get(i).unwrap_or(&0))
            .collect();
        Gf2Poly { words }.trimmed()
    }

    fn shl(&self, k: usize) -> Gf2Poly {
        if self.is_zero() {
            return self.clone();
        }
        let (wq, bq) = (k / 64, k % 64);
        let mut words = vec![0u64; self.words.len() + wq + 1];
        for (i, w) in self.words.iter().enumerate() {
            words[i + wq] |= w << bq;
            if bq > 0 {
                words[i + wq + 1] |= w >> (64 - bq);
            }
        }
        Gf2Poly { words }.trimmed()
    }

    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        let mut acc = Gf2Poly::zero();
        if let Some(d) = other.degree() {
            for i in 0..=d {
                if other.coeff(i) {
                    acc = acc.add(&self.shl(i));
                }
            }
        }
        acc
    }

    pub fn divrem(&self, divisor: &Gf2Poly) -> (Gf2Poly, Gf2Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let mut q = Gf2Poly::zero();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            q = q.add(&Gf2Poly::monomial(dr - dd));
            r = r.add(&divisor.shl(dr - dd));
        }
        (q, r)
    }

    pub fn rem(&self, m: &Gf2Poly) -> Gf2Poly {
        self.divrem(m).1
    }

    pub fn gcd(&self, other: &Gf2Poly) -> Gf2Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    pub fn mul_mod(&self, other: &Gf2Poly, m: &Gf2Poly) -> Gf2Poly {
        self.mul(other).rem(m)
    }

    /// self^(2^k) mod m
    pub fn frobenius_pow(&self, k: usize, m: &Gf2Poly) -> Gf2Poly {
        let mut acc = self.rem(m);
        for _ in 0..k {
            acc = acc.mul_mod(&acc, m);
        }
        acc
    }

    /// Evaluate at a square matrix.
    pub fn eval_matrix(&self, a: &BitMatrix) -> BitMatrix {
        let n = a.ncols();
        let mut acc = BitMatrix::zeros(n, n);
        if let Some(d) = self.degree() {
            for i in (0..=d).rev() {
                acc = acc.mul(a);
                if self.coeff(i) {
                    acc = acc.add(&BitMatrix::identity(n));
                }
            }
        }
        acc
    }

    /// Irreducible factors of a squarefree polynomial, sorted.
    pub fn factor_squarefree(&self) -> Vec<Gf2Poly> {
        let mut out = Vec::new();
        for (deg, prod) in self.distinct_degree() {
            equal_degree_split(&prod, deg, &mut out);
        }
        out.sort();
        out
    }

    /// Distinct-degree factorization: (d, product of all degree-d factors).
    fn distinct_degree(&self) -> Vec<(usize, Gf2Poly)> {
        let mut out = Vec::new();
        let mut f = self.clone();
        let mut h = Gf2Poly::x().rem(&f);
        let mut d = 0;
        while let Some(df) = f.degree() {
            if df < 2 * (d + 1) {
                if df > 0 {
                    out.push((df, f.clone()));
                }
                break;
            }
            d += 1;
            h = h.mul_mod(&h, &f);
            let g = f.gcd(&h.add(&Gf2Poly::x()));
            if g.degree().unwrap_or(0) > 0 {
                out.push((d, g.clone()));
                f = f.divrem(&g).0;
                h = h.rem(&f);
            }
        }
        out
    }
}

/// Split a product of distinct irreducibles of degree `d` (trace method).
fn equal_degree_split(f: &Gf2Poly, d: usize, out: &mut Vec<Gf2Poly>) {
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return;
    }
    if n == d {
        out.push(f.clone());
        return;
    }
    // deterministic sweep over small polynomials a; the trace
    // a + a^2 + ... + a^(2^(d-1)) splits f for some a of degree < n
    for bits in 2u64.. {
        let a = Gf2Poly::from_u64(bits).rem(f);
        let mut t = a.clone();
        let mut cur = a;
        for _ in 1..d {
            cur = cur.mul_mod(&cur, f);
            t = t.add(&cur);
        }
        let g = f.gcd(&t);
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && dg < n {
            let other = f.divrem(&g).0;
            equal_degree_split(&g, d, out);
            equal_degree_split(&other, d, out);
            return;
        }
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else {
            return write!(f, "0");
        };
        let mut terms = Vec::new();
        for i in (0..=d).rev() {
            if self.coeff(i) {
                terms.push(match i {
                    0 => "1".to_string(),
                    1 => "X".to_string(),
                    _ => format!("X^{i}"),
                });
            }
        }
        write!(f, "{}", terms.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_rank() {
        let m = BitMatrix::from_row_strings(&["1100", "0110", "1010"]).unwrap();
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.apply(v).is_zero());
        }
    }

    #[test]
    fn cyclic_shift_has_order_three() {
        let a = BitMatrix::from_row_strings(&["010", "001", "100"]).unwrap();
        assert!(!a.is_identity());
        assert!(a.pow(3).is_identity());
    }

    #[test]
    fn factor_x7_minus_1() {
        let f = Gf2Poly::monomial(7).add(&Gf2Poly::one());
        let fs = f.factor_squarefree();
        let degs: Vec<usize> = fs.iter().map(|g| g.degree().unwrap()).collect();
        assert_eq!(degs, vec![1, 3, 3]);
        let prod = fs.iter().fold(Gf2Poly::one(), |acc, g| acc.mul(g));
        assert_eq!(prod, f);
    }

    #[test]
    fn polynomial_at_matrix() {
        // X^2 + X + 1 annihilates the order-3 permutation on the sum-zero plane
        let a = BitMatrix::from_row_strings(&["01", "11"]).unwrap();
        let p = Gf2Poly::from_u64(0b111);
        assert!(p.eval_matrix(&a).rank() == 0);
    }
}
