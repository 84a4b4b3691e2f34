//! `F_p`, `F_{p²}` and the canonical discrete logarithm onto `Z/ℓ^t`.
//!
//! All deterministic choices live in [`PrimeContext`]: the smallest primitive
//! root `g` fixes the logarithm (`dlog(x) = ind_g(x) mod ℓ^t`) and the smallest
//! quadratic non-residue fixes the model `F_{p²} = F_p[x]/(x² − qnr)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zmodlin::Modulus;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let (g, x, _) = crate::zmodlin::ext_gcd((a % p) as i64, p as i64);
    (g == 1).then(|| x.rem_euclid(p as i64) as u64)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Parameters `(p, ℓ, s)` together with every derived deterministic choice.
///
/// Note: `r` is `ℓ^t`, the largest power of `ℓ` dividing `p − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeContext {
    pub p: u64,
    pub ell: u64,
    pub s: u32,
    pub t: u32,
    pub r: u64,
    pub g: u64,
    pub qnr: u64,
}

impl PrimeContext {
    pub fn new(p: u64, ell: u64, s: u32) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidContext(msg));
        if !is_prime(p) {
            return bad(format!("p = {p} is not prime"));
        }
        if p < 11 {
            return bad(format!("p = {p} must be at least 11"));
        }
        if !is_prime(ell) {
            return bad(format!("ell = {ell} is not prime"));
        }
        if ell < 5 {
            return bad(format!("ell = {ell} must be at least 5"));
        }
        if (p - 1) % ell != 0 {
            return bad(format!("ell = {ell} does not divide p - 1 = {}", p - 1));
        }
        if p >= 1 << 31 {
            return bad(format!("p = {p} is too large"));
        }
        let mut t = 0;
        let mut rest = p - 1;
        while rest % ell == 0 {
            rest /= ell;
            t += 1;
        }
        if s < 1 || s > t {
            return bad(format!("s = {s} must satisfy 1 <= s <= t = {t}"));
        }
        let r = ell.pow(t);
        let factors = prime_factors(p - 1);
        let g = (2..p)
            .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
            .expect("primitive root exists");
        let qnr = (2..p)
            .find(|&a| pow_mod(a, (p - 1) / 2, p) == p - 1)
            .expect("non-residue exists");
        Ok(PrimeContext {
            p,
            ell,
            s,
            t,
            r,
            g,
            qnr,
        })
    }

    /// `Z/ℓ^t`, the coefficient ring of the L-matrix.
    pub fn r_modulus(&self) -> Modulus {
        Modulus::prime_power(self.ell, self.t).expect("valid prime power")
    }

    /// `Z/ℓ^s`, the coefficient ring of homology.
    pub fn s_modulus(&self) -> Modulus {
        Modulus::prime_power(self.ell, self.s).expect("valid prime power")
    }

    pub fn field(&self) -> Fp2 {
        Fp2 {
            p: self.p,
            qnr: self.qnr,
        }
    }

    /// `ind_g(x) mod ℓ^t` via Pohlig–Hellman on the `ℓ`-Sylow subgroup.
    pub fn dlog(&self, x: u64) -> Result<u64> {
        let p = self.p;
        let x = x % p;
        if x == 0 {
            return Err(Error::LogOfZero);
        }
        let cof = (p - 1) / self.r;
        let y = pow_mod(x, cof, p);
        let h = pow_mod(self.g, cof, p);
        let h_inv = inv_mod(h, p).expect("unit");
        // gamma has order ℓ
        let gamma = pow_mod(h, self.r / self.ell, p);
        let table: Vec<u64> = (0..self.ell)
            .scan(1u64, |acc, _| {
                let cur = *acc;
                *acc = *acc * gamma % p;
                Some(cur)
            })
            .collect();
        let mut k = 0u64;
        let mut lpow = 1u64;
        for i in 0..self.t {
            let z = y * pow_mod(h_inv, k, p) % p;
            let e = pow_mod(z, self.r / (lpow * self.ell), p);
            let digit = table
                .iter()
                .position(|&v| v == e)
                .expect("element of order dividing ell") as u64;
            k += digit * lpow;
            lpow *= self.ell;
            debug_assert!(i < self.t);
        }
        Ok(k % self.r)
    }

    /// `dlog` reduced further mod `ℓ^s`.
    pub fn dlog_s(&self, x: u64) -> Result<u64> {
        Ok(self.dlog(x)? % self.ell.pow(self.s))
    }
}

/// An element `c0 + c1·√qnr` of `F_{p²}`; serializes as `[c0, c1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct Fp2Elt {
    pub c0: u64,
    pub c1: u64,
}

impl From<[u64; 2]> for Fp2Elt {
    fn from(v: [u64; 2]) -> Self {
        Fp2Elt { c0: v[0], c1: v[1] }
    }
}

impl From<Fp2Elt> for [u64; 2] {
    fn from(e: Fp2Elt) -> Self {
        [e.c0, e.c1]
    }
}

impl Fp2Elt {
    pub const ZERO: Fp2Elt = Fp2Elt { c0: 0, c1: 0 };
    pub const ONE: Fp2Elt = Fp2Elt { c0: 1, c1: 0 };

    pub fn from_fp(c0: u64) -> Self {
        Fp2Elt { c0, c1: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }

    pub fn in_base_field(&self) -> bool {
        self.c1 == 0
    }
}

/// The field `F_p[x]/(x² − qnr)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp2 {
    pub p: u64,
    pub qnr: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Fp2 {
    pub fn elt(&self, c0: i64, c1: i64) -> Fp2Elt {
        let p = self.p as i64;
        Fp2Elt {
            c0: c0.rem_euclid(p) as u64,
            c1: c1.rem_euclid(p) as u64,
        }
    }

    #[inline]
    pub fn add(&self, a: Fp2Elt, b: Fp2Elt) -> Fp2Elt {
        Fp2Elt {
            c0: (a.c0 + b.c0) % self.p,
            c1: (a.c1 + b.c1) % self.p,
        }
    }

    #[inline]
    pub fn sub(&self, a: Fp2Elt, b: Fp2Elt) -> Fp2Elt {
        Fp2Elt {
            c0: (a.c0 + self.p - b.c0) % self.p,
            c1: (a.c1 + self.p - b.c1) % self.p,
        }
    }

    #[inline]
    pub fn neg(&self, a: Fp2Elt) -> Fp2Elt {
        self.sub(Fp2Elt::ZERO, a)
    }

    #[inline]
    pub fn mul(&self, a: Fp2Elt, b: Fp2Elt) -> Fp2Elt {
        let p = self.p;
        let c0 = (a.c0 * b.c0 + a.c1 * b.c1 % p * self.qnr) % p;
        let c1 = (a.c0 * b.c1 + a.c1 * b.c0) % p;
        Fp2Elt { c0, c1 }
    }

    pub fn scale(&self, a: Fp2Elt, k: u64) -> Fp2Elt {
        Fp2Elt {
            c0: a.c0 * (k % self.p) % self.p,
            c1: a.c1 * (k % self.p) % self.p,
        }
    }

    pub fn pow(&self, mut a: Fp2Elt, mut e: u64) -> Fp2Elt {
        let mut acc = Fp2Elt::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// `a^p = c0 − c1·√qnr`.
    pub fn frobenius(&self, a: Fp2Elt) -> Fp2Elt {
        Fp2Elt {
            c0: a.c0,
            c1: (self.p - a.c1) % self.p,
        }
    }

    /// `a^{p+1} = c0² − qnr·c1²`.
    pub fn norm(&self, a: Fp2Elt) -> u64 {
        let p = self.p;
        (a.c0 * a.c0 % p + p - a.c1 * a.c1 % p * self.qnr % p) % p
    }

    pub fn inv(&self, a: Fp2Elt) -> Result<Fp2Elt> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n_inv = inv_mod(self.norm(a), self.p).ok_or(Error::DivisionByZero)?;
        Ok(self.scale(self.frobenius(a), n_inv))
    }

    pub fn div(&self, a: Fp2Elt, b: Fp2Elt) -> Result<Fp2Elt> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn apply(&self, a: Fp2Elt, b: Fp2Elt, op: FieldOp) -> Result<Fp2Elt> {
        match op {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Sub => Ok(self.sub(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Div => self.div(a, b),
        }
    }

    /// Every element, in ascending `(c0, c1)` order.
    pub fn elements(&self) -> impl Iterator<Item = Fp2Elt> + '_ {
        let p = self.p;
        (0..p).flat_map(move |c0| (0..p).map(move |c1| Fp2Elt { c0, c1 }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_index(x: u64, g: u64, p: u64) -> u64 {
        let mut acc = 1;
        for k in 0..p - 1 {
            if acc == x {
                return k;
            }
            acc = acc * g % p;
        }
        unreachable!()
    }

    fn is_primitive_brute(g: u64, p: u64) -> bool {
        let mut acc = 1;
        for k in 1..p - 1 {
            acc = acc * g % p;
            if acc == 1 {
                return k == p - 1;
            }
        }
        true
    }

    #[test]
    fn context_examples() {
        let c = PrimeContext::new(11, 5, 1).unwrap();
        assert_eq!((c.t, c.r, c.g, c.qnr), (1, 5, 2, 2));
        let c = PrimeContext::new(101, 5, 2).unwrap();
        assert_eq!((c.t, c.r), (2, 25));
        assert!(PrimeContext::new(13, 5, 1).is_err());
        assert!(PrimeContext::new(31, 3, 1).is_err());
        assert!(PrimeContext::new(33, 5, 1).is_err());
        assert!(PrimeContext::new(11, 5, 2).is_err());
    }

    #[test]
    fn primitive_root_and_qnr_are_smallest() {
        for &(p, ell) in &[(11, 5), (31, 5), (41, 5), (61, 5), (29, 7), (43, 7), (23, 11), (181, 5)] {
            let c = PrimeContext::new(p, ell, 1).unwrap();
            let g = (2..p).find(|&g| is_primitive_brute(g, p)).unwrap();
            assert_eq!(c.g, g);
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            let qnr = (2..p).find(|a| !squares.contains(a)).unwrap();
            assert_eq!(c.qnr, qnr);
        }
    }

    #[test]
    fn dlog_examples() {
        let c = PrimeContext::new(11, 5, 1).unwrap();
        assert_eq!(c.dlog(1).unwrap(), 0);
        assert_eq!(c.dlog(2).unwrap(), 1);
        assert_eq!(c.dlog(4).unwrap(), 2);
        assert_eq!(c.dlog(0), Err(Error::LogOfZero));
    }

    #[test]
    fn dlog_is_surjective_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(p, ell) in &[(101, 5), (181, 5), (43, 7), (251, 5)] {
            let c = PrimeContext::new(p, ell, 1).unwrap();
            for _ in 0..500 {
                let x = rng.gen_range(1..p);
                let y = rng.gen_range(1..p);
                let lhs = c.dlog(x * y % p).unwrap();
                let rhs = (c.dlog(x).unwrap() + c.dlog(y).unwrap()) % c.r;
                assert_eq!(lhs, rhs);
            }
            let image: std::collections::BTreeSet<u64> =
                (1..p).map(|x| c.dlog(x).unwrap()).collect();
            assert_eq!(image.len() as u64, c.r);
        }
    }

    #[test]
    fn dlog_matches_index_search() {
        for p in (11..200).filter(|&p| is_prime(p)) {
            for ell in [5u64, 7, 11, 13] {
                let Ok(c) = PrimeContext::new(p, ell, 1) else { continue };
                for x in 1..p {
                    assert_eq!(c.dlog(x).unwrap(), brute_index(x, c.g, p) % c.r, "p={p} x={x}");
                }
            }
        }
    }

    #[test]
    fn power_sums_of_dlog_vanish() {
        for &(p, ell, s) in &[(11, 5, 1), (61, 5, 1), (101, 5, 2), (43, 7, 1), (23, 11, 1), (181, 5, 1)] {
            let c = PrimeContext::new(p, ell, s).unwrap();
            let r = c.r;
            let sq: u64 = (1..p).map(|a| c.dlog(a).unwrap().pow(2) % r).sum::<u64>() % r;
            let cu: u64 = (1..p).map(|a| c.dlog(a).unwrap().pow(3) % r).sum::<u64>() % r;
            assert_eq!((sq, cu), (0, 0), "p={p}");
        }
    }

    #[test]
    fn fp2_identities() {
        let c = PrimeContext::new(61, 5, 1).unwrap();
        let f = c.field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let root = Fp2Elt { c0: 0, c1: 1 };
        assert_eq!(f.mul(root, root), Fp2Elt::from_fp(c.qnr));
        assert_eq!(f.frobenius(root), Fp2Elt { c0: 0, c1: 60 });
        assert_eq!(f.norm(Fp2Elt::ONE), 1);
        assert_eq!(f.norm(root), (61 - c.qnr) % 61);
        assert_eq!(f.div(Fp2Elt::ONE, Fp2Elt::ZERO), Err(Error::DivisionByZero));
        for _ in 0..200 {
            let a = f.elt(rng.gen_range(0..61), rng.gen_range(0..61));
            let b = f.elt(rng.gen_range(0..61), rng.gen_range(0..61));
            assert_eq!(f.mul(a, Fp2Elt::ONE), a);
            assert_eq!(f.frobenius(f.frobenius(a)), a);
            assert_eq!(f.frobenius(a), f.pow(a, 61));
            assert_eq!(f.norm(f.mul(a, b)), f.norm(a) * f.norm(b) % 61);
            assert_eq!(f.norm(f.frobenius(a)), f.norm(a));
            assert_eq!(Fp2Elt::from_fp(f.norm(a)), f.pow(a, 62));
            if !a.is_zero() {
                assert_eq!(f.apply(a, a, FieldOp::Div).unwrap(), Fp2Elt::ONE);
                assert_eq!(pow_mod(f.norm(a), 60, 61), 1);
            }
            let s = f.apply(a, b, FieldOp::Add).unwrap();
            assert_eq!(f.apply(s, b, FieldOp::Sub).unwrap(), a);
        }
    }

    #[test]
    fn fp2_serializes_as_pair() {
        let e = Fp2Elt { c0: 3, c1: 9 };
        assert_eq!(serde_json::to_string(&e).unwrap(), "[3,9]");
        let back: Fp2Elt = serde_json::from_str("[3,9]").unwrap();
        assert_eq!(back, e);
    }
}
