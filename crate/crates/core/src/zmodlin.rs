//! Exact linear algebra over `Z/ℓ^s`.
//!
//! Row spans are kept in Howell normal form, which over a prime-power
//! modulus is a canonical echelon form: two matrices with the same row span
//! produce the same basis, and greedy reduction against the basis decides
//! membership. Everything uses the row-vector convention: a matrix `A`
//! acts by `v ↦ v·A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime-power modulus `m = ℓ^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modulus {
    m: u64,
    prime: u64,
    exp: u32,
}

impl Modulus {
    pub fn new(m: u64) -> Result<Self> {
        if m < 2 || m >= 1 << 32 {
            return Err(Error::InvalidModulus(m));
        }
        let prime = smallest_factor(m);
        let mut rest = m;
        let mut exp = 0;
        while rest % prime == 0 {
            rest /= prime;
            exp += 1;
        }
        if rest != 1 {
            return Err(Error::InvalidModulus(m));
        }
        Ok(Modulus { m, prime, exp })
    }

    pub fn prime_power(prime: u64, exp: u32) -> Result<Self> {
        let m = prime
            .checked_pow(exp)
            .ok_or(Error::InvalidModulus(u64::MAX))?;
        let md = Modulus::new(m)?;
        if md.prime != prime {
            return Err(Error::InvalidModulus(m));
        }
        Ok(md)
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn prime(&self) -> u64 {
        self.prime
    }

    #[inline]
    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// `ℓ^k` for `k ≤ s`.
    pub fn prime_pow(&self, k: u32) -> u64 {
        self.prime.pow(k.min(self.exp))
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.m
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.m as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.m
    }

    /// `ℓ`-adic valuation of a residue; `s` for zero.
    pub fn valuation(&self, x: u64) -> u32 {
        let mut x = x % self.m;
        if x == 0 {
            return self.exp;
        }
        let mut v = 0;
        while x % self.prime == 0 {
            x /= self.prime;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, x: u64) -> bool {
        x % self.prime != 0
    }

    pub fn inv(&self, x: u64) -> Option<u64> {
        let (g, s, _) = ext_gcd(x as i64 % self.m as i64, self.m as i64);
        (g == 1).then(|| self.reduce_i64(s))
    }
}

fn smallest_factor(n: u64) -> u64 {
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}

/// Extended Euclid: returns `(g, x, y)` with `a·x + b·y = g ≥ 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

pub type ZVec = Vec<u64>;

/// Dense row-major matrix of residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZMat {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ZMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = ZMat::zeros(n, n);
        for i in 0..n {
            a.data[i * n + i] = 1;
        }
        a
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ZMat { rows, cols, data }
    }

    /// Builds a matrix from rows of equal length, reducing entries mod `m`.
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R], cols: usize, m: Modulus) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend(r.iter().map(|&x| m.reduce(x)));
        }
        Ok(ZMat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_signed_rows(rows: &[Vec<i64>], m: Modulus) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let reduced: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| m.reduce_i64(x)).collect())
            .collect();
        ZMat::from_rows(&reduced, cols, m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<ZVec> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> ZMat {
        ZMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, other: &ZMat, m: Modulus) -> ZMat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = ZMat::zeros(self.rows, other.cols);
        let mv = m.value();
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o = (*o + a * b) % mv;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ZMat, m: Modulus) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| m.add(a, b))
            .collect();
        ZMat { data, ..*self }
    }

    pub fn sub(&self, other: &ZMat, m: Modulus) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| m.sub(a, b))
            .collect();
        ZMat { data, ..*self }
    }

    pub fn scale(&self, c: u64, m: Modulus) -> ZMat {
        let c = m.reduce(c);
        let data = self.data.iter().map(|&a| m.mul(a, c)).collect();
        ZMat { data, ..*self }
    }

    /// `self − c·I`.
    pub fn sub_scalar(&self, c: u64, m: Modulus) -> ZMat {
        assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            let v = out.get(i, i);
            out.set(i, i, m.sub(v, m.reduce(c)));
        }
        out
    }

    pub fn reduce_mod(&self, m: Modulus) -> ZMat {
        let data = self.data.iter().map(|&a| m.reduce(a)).collect();
        ZMat { data, ..*self }
    }

    /// `v·A` for a row vector `v`.
    pub fn apply(&self, v: &[u64], m: Modulus) -> ZVec {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0u64; self.cols];
        for (k, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(k)) {
                *o = (*o + a * b) % m.value();
            }
        }
        out
    }

    /// Columns of `self` followed by those of `other`.
    pub fn hstack(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.rows, other.rows);
        ZMat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        })
    }

    pub fn vstack(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        ZMat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Drops one row and one column.
    pub fn minor_matrix(&self, drop_row: usize, drop_col: usize) -> ZMat {
        ZMat::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            let si = if i < drop_row { i } else { i + 1 };
            let sj = if j < drop_col { j } else { j + 1 };
            self.get(si, sj)
        })
    }

    /// Nested rows, for serialization.
    pub fn to_nested(&self) -> Vec<Vec<u64>> {
        self.row_vecs()
    }
}

/// A submodule of `(Z/ℓ^s)^n` stored by its Howell basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Submodule {
    ambient_dim: usize,
    modulus: Modulus,
    basis: ZMat,
}

impl Submodule {
    pub fn zero(ambient_dim: usize, modulus: Modulus) -> Self {
        Submodule {
            ambient_dim,
            modulus,
            basis: ZMat::zeros(0, ambient_dim),
        }
    }

    pub fn full(ambient_dim: usize, modulus: Modulus) -> Self {
        Submodule {
            ambient_dim,
            modulus,
            basis: ZMat::identity(ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn basis(&self) -> &ZMat {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.rows() == 0
    }

    /// `(pivot column, ℓ-exponent of the pivot)` per basis row.
    pub fn pivots(&self) -> Vec<(usize, u32)> {
        (0..self.basis.rows())
            .map(|i| {
                let row = self.basis.row(i);
                let c = row.iter().position(|&x| x != 0).expect("nonzero row");
                (c, self.modulus.valuation(row[c]))
            })
            .collect()
    }

    /// `log_ℓ` of the number of elements.
    pub fn cardinality_exponent(&self) -> u32 {
        let s = self.modulus.exponent();
        self.pivots().iter().map(|&(_, k)| s - k).sum()
    }

    /// Number of cyclic summands of maximal order `ℓ^s`, i.e. the largest
    /// `r` such that the module contains a free submodule of rank `r`.
    pub fn free_rank(&self) -> usize {
        let m = self.modulus;
        let top = m.prime_pow(m.exponent() - 1);
        let scaled = self.basis.scale(top, m);
        howell_form(&scaled, m).cardinality_exponent() as usize
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        matches!(membership(v, self), Ok(Some(_)))
    }

    pub fn contains_module(&self, other: &Submodule) -> bool {
        other.ambient_dim == self.ambient_dim
            && (0..other.len()).all(|i| self.contains(other.basis.row(i)))
    }

    /// Image under `v ↦ v·op`.
    pub fn image(&self, op: &ZMat) -> Submodule {
        assert_eq!(op.rows(), self.ambient_dim);
        let img = self.basis.mul(op, self.modulus);
        howell_form(&img, self.modulus)
    }
}

/// Howell normal form of the row span of `a`.
pub fn howell_form(a: &ZMat, m: Modulus) -> Submodule {
    let cols = a.cols();
    let s = m.exponent();
    let mut pool: Vec<ZVec> = (0..a.rows())
        .map(|i| a.row(i).iter().map(|&x| m.reduce(x)).collect::<ZVec>())
        .filter(|r| r.iter().any(|&x| x != 0))
        .collect();
    let mut basis: Vec<(usize, ZVec)> = Vec::new();

    for col in 0..cols {
        let best = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r[col] != 0)
            .min_by_key(|(_, r)| m.valuation(r[col]))
            .map(|(i, _)| i);
        let Some(best) = best else { continue };
        let mut piv = pool.swap_remove(best);
        let k = m.valuation(piv[col]);
        let lk = m.prime_pow(k);
        let unit = m.inv(piv[col] / lk).expect("unit part");
        for x in piv.iter_mut() {
            *x = m.mul(*x, unit);
        }
        for r in pool.iter_mut() {
            let a = r[col];
            if a == 0 {
                continue;
            }
            let f = a / lk;
            for (x, &y) in r.iter_mut().zip(&piv) {
                *x = m.sub(*x, m.mul(f, y));
            }
        }
        if k > 0 {
            let ann = m.prime_pow(s - k);
            let extra: ZVec = piv.iter().map(|&x| m.mul(x, ann)).collect();
            pool.push(extra);
        }
        pool.retain(|r| r.iter().any(|&x| x != 0));
        basis.push((col, piv));
    }

    // Reduce entries above each pivot into [0, pivot).
    for i in 0..basis.len() {
        let (col, _) = basis[i];
        let lk = basis[i].1[col];
        for j in 0..i {
            let f = basis[j].1[col] / lk;
            if f == 0 {
                continue;
            }
            let (upper, lower) = basis.split_at_mut(i);
            for (x, &y) in upper[j].1.iter_mut().zip(&lower[0].1) {
                *x = m.sub(*x, m.mul(f, y));
            }
        }
    }

    let rows: Vec<ZVec> = basis.into_iter().map(|(_, r)| r).collect();
    Submodule {
        ambient_dim: cols,
        modulus: m,
        basis: ZMat::from_rows(&rows, cols, m).expect("row lengths"),
    }
}

/// Decides `v ∈ span(s)`; on success returns `c` with `c·basis = v`.
pub fn membership(v: &[u64], s: &Submodule) -> Result<Option<ZVec>> {
    if v.len() != s.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: s.ambient_dim,
            got: v.len(),
        });
    }
    let m = s.modulus;
    let mut rest: ZVec = v.iter().map(|&x| m.reduce(x)).collect();
    let mut coeffs = vec![0u64; s.len()];
    for (i, (col, k)) in s.pivots().into_iter().enumerate() {
        let a = rest[col];
        if a == 0 {
            continue;
        }
        if m.valuation(a) < k {
            return Ok(None);
        }
        let f = a / m.prime_pow(k);
        coeffs[i] = f;
        for (x, &y) in rest.iter_mut().zip(s.basis.row(i)) {
            *x = m.sub(*x, m.mul(f, y));
        }
    }
    Ok(rest.iter().all(|&x| x == 0).then_some(coeffs))
}

/// Left kernel `{x : x·a = 0}`.
pub fn kernel(a: &ZMat, m: Modulus) -> Submodule {
    let n = a.rows();
    let aug = a.reduce_mod(m).hstack(&ZMat::identity(n));
    let h = howell_form(&aug, m);
    let rows: Vec<ZVec> = (0..h.len())
        .map(|i| h.basis.row(i))
        .filter(|r| r[..a.cols()].iter().all(|&x| x == 0))
        .map(|r| r[a.cols()..].to_vec())
        .collect();
    howell_form(&ZMat::from_rows(&rows, n, m).expect("row lengths"), m)
}

pub fn module_sum(parts: &[Submodule]) -> Result<Submodule> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Precondition("module_sum of an empty list".into()))?;
    let mut stacked = ZMat::zeros(0, first.ambient_dim);
    for p in parts {
        if p.ambient_dim != first.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: first.ambient_dim,
                got: p.ambient_dim,
            });
        }
        stacked = stacked.vstack(&p.basis);
    }
    Ok(howell_form(&stacked, first.modulus))
}

/// Intersection via the Zassenhaus construction.
pub fn intersection(a: &Submodule, b: &Submodule) -> Result<Submodule> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim,
            got: b.ambient_dim,
        });
    }
    let n = a.ambient_dim;
    let m = a.modulus;
    let top = a.basis.hstack(&a.basis);
    let bottom = b.basis.hstack(&ZMat::zeros(b.len(), n));
    let h = howell_form(&top.vstack(&bottom), m);
    let rows: Vec<ZVec> = (0..h.len())
        .map(|i| h.basis.row(i))
        .filter(|r| r[..n].iter().all(|&x| x == 0))
        .map(|r| r[n..].to_vec())
        .collect();
    Ok(howell_form(&ZMat::from_rows(&rows, n, m)?, m))
}

/// Finds some `x` with `x·a = b`, if one exists.
pub fn solve(a: &ZMat, b: &[u64], m: Modulus) -> Result<Option<ZVec>> {
    if b.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            got: b.len(),
        });
    }
    let n = a.rows();
    let c = a.cols();
    let aug = a.reduce_mod(m).hstack(&ZMat::identity(n));
    let h = howell_form(&aug, m);
    let mut rest: ZVec = b.iter().map(|&x| m.reduce(x)).collect();
    let mut x = vec![0u64; n];
    for (i, (col, k)) in h.pivots().into_iter().enumerate() {
        if col >= c {
            break;
        }
        let val = rest[col];
        if val == 0 {
            continue;
        }
        if m.valuation(val) < k {
            return Ok(None);
        }
        let f = val / m.prime_pow(k);
        let row = h.basis.row(i);
        for (r, &y) in rest.iter_mut().zip(&row[..c]) {
            *r = m.sub(*r, m.mul(f, y));
        }
        for (xi, &y) in x.iter_mut().zip(&row[c..]) {
            *xi = m.add(*xi, m.mul(f, y));
        }
    }
    Ok(rest.iter().all(|&v| v == 0).then_some(x))
}

/// Determinant by elimination with minimal-valuation pivoting.
///
/// Over the local ring `Z/ℓ^s` every entry of the remaining block is a
/// multiple of the chosen pivot's `ℓ`-power, so only exact quotients occur.
pub fn det(a: &ZMat, m: Modulus) -> Result<u64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut w: Vec<ZVec> = a.reduce_mod(m).row_vecs();
    let mut acc = 1u64;
    for k in 0..n {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in w.iter().enumerate().skip(k) {
            for (j, &x) in row.iter().enumerate().skip(k) {
                if x != 0 {
                    let v = m.valuation(x);
                    if best.map_or(true, |b| v < b.2) {
                        best = Some((i, j, v));
                    }
                }
            }
            if matches!(best, Some((_, _, 0))) {
                break;
            }
        }
        let Some((pi, pj, v)) = best else {
            return Ok(0);
        };
        if pi != k {
            w.swap(pi, k);
            acc = m.neg(acc);
        }
        if pj != k {
            for row in w.iter_mut() {
                row.swap(pj, k);
            }
            acc = m.neg(acc);
        }
        let piv = w[k][k];
        acc = m.mul(acc, piv);
        if acc == 0 {
            return Ok(0);
        }
        let lv = m.prime_pow(v);
        let unit_inv = m.inv(piv / lv).expect("unit part");
        let (head, tail) = w.split_at_mut(k + 1);
        let prow = &head[k];
        for row in tail.iter_mut() {
            let x = row[k];
            if x == 0 {
                continue;
            }
            let f = m.mul(x / lv, unit_inv);
            for (t, &y) in row.iter_mut().zip(prow).skip(k) {
                *t = m.sub(*t, m.mul(f, y));
            }
        }
    }
    Ok(acc)
}

/// Determinant with one row and one column removed; the empty determinant is 1.
pub fn minor_det(a: &ZMat, drop_row: usize, drop_col: usize, m: Modulus) -> Result<u64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if drop_row >= a.rows() || drop_col >= a.cols() {
        return Err(Error::IndexOutOfRange {
            row: drop_row,
            col: drop_col,
            size: a.rows(),
        });
    }
    det(&a.minor_matrix(drop_row, drop_col), m)
}
