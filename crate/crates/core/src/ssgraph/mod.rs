//! The supersingular module `N = Z[S]`: the supersingular set with its
//! automorphism weights, the L-matrix built from discrete logarithms of norms
//! of `j`-differences, Brandt matrices read off classical modular
//! polynomials, and a Hecke-polynomial expression of the L-matrix.

mod hecke_poly;
pub mod modpoly;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{inv_mod, Fp2, Fp2Elt, PrimeContext};
use crate::zmodlin::{Modulus, ZMat};

pub use hecke_poly::{hecke_polynomial_for_l, HeckePolynomial, HeckeTerm, PolyBudget};
pub use modpoly::ModularPolynomial;

/// Supersingular `j`-invariants in ascending `(c0, c1)` order with weights
/// `w_E = |Aut(E)|/2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupersingularSet {
    pub p: u64,
    pub qnr: u64,
    #[serde(rename = "S")]
    pub js: Vec<Fp2Elt>,
    pub weights: Vec<u8>,
}

/// `(p − 1)/12` rounded down plus the correction for `p mod 12`.
pub fn eichler_count(p: u64) -> usize {
    let eps = match p % 12 {
        1 => 0,
        5 | 7 => 1,
        11 => 2,
        _ => 0,
    };
    (p / 12) as usize + eps
}

/// `w = 3` at `j = 0`, `w = 2` at `j = 1728`, otherwise 1.
pub fn weight_of(j: Fp2Elt, p: u64) -> u8 {
    if j == Fp2Elt::ZERO {
        3
    } else if j == Fp2Elt::from_fp(1728 % p) {
        2
    } else {
        1
    }
}

/// Coefficients of `Σ_{i ≤ (p−1)/2} C((p−1)/2, i)² λ^i` mod `p`.
pub fn deuring_polynomial(p: u64) -> Vec<u64> {
    let m = (p - 1) / 2;
    let mut coeffs = Vec::with_capacity(m as usize + 1);
    let mut binom = 1u64;
    for i in 0..=m {
        coeffs.push(binom * binom % p);
        if i < m {
            binom = binom * ((m - i) % p) % p * inv_mod(i + 1, p).expect("i + 1 < p") % p;
        }
    }
    coeffs
}

/// `j = 2⁸(λ² − λ + 1)³ / (λ²(λ − 1)²)`.
pub fn legendre_j(field: &Fp2, lambda: Fp2Elt) -> Result<Fp2Elt> {
    let l2 = field.mul(lambda, lambda);
    let num_base = field.add(field.sub(l2, lambda), Fp2Elt::ONE);
    let num = field.scale(field.pow(num_base, 3), 256);
    let lm1 = field.sub(lambda, Fp2Elt::ONE);
    let den = field.mul(l2, field.mul(lm1, lm1));
    field.div(num, den)
}

/// Short Weierstrass coefficients `(a, b)` of a curve with invariant `j`.
pub fn curve_with_j(field: &Fp2, j: Fp2Elt) -> (Fp2Elt, Fp2Elt) {
    let c1728 = Fp2Elt::from_fp(1728 % field.p);
    if j == Fp2Elt::ZERO {
        (Fp2Elt::ZERO, Fp2Elt::ONE)
    } else if j == c1728 {
        (Fp2Elt::ONE, Fp2Elt::ZERO)
    } else {
        let d = field.sub(c1728, j);
        let k = field.mul(j, d);
        (field.scale(k, 3), field.scale(field.mul(k, d), 2))
    }
}

/// Hasse invariant test: the coefficient of `x^{p−1}` in `(x³ + ax + b)^{(p−1)/2}`
/// vanishes exactly for supersingular curves.
pub fn is_supersingular_j(field: &Fp2, j: Fp2Elt) -> bool {
    let p = field.p;
    let m = (p - 1) / 2;
    let (a, b) = curve_with_j(field, j);
    let mut fact = vec![1u64; m as usize + 1];
    for i in 1..=m as usize {
        fact[i] = fact[i - 1] * i as u64 % p;
    }
    let inv_fact: Vec<u64> = fact.iter().map(|&f| inv_mod(f, p).expect("unit")).collect();
    let mut total = Fp2Elt::ZERO;
    // x³ chosen i times, a·x chosen 2m − 3i times, b chosen 2i − m times
    for i in 0..=m {
        if 3 * i > 2 * m || 2 * i < m {
            continue;
        }
        let ja = 2 * m - 3 * i;
        let kb = 2 * i - m;
        let multinom = fact[m as usize] * inv_fact[i as usize] % p * inv_fact[ja as usize] % p
            * inv_fact[kb as usize]
            % p;
        let term = field.mul(field.pow(a, ja), field.pow(b, kb));
        total = field.add(total, field.scale(term, multinom));
    }
    total.is_zero()
}

/// Scans `F_{p²}` for roots of the Deuring polynomial and maps them to `j`.
pub fn enumerate_supersingular(ctx: &PrimeContext) -> SupersingularSet {
    let field = ctx.field();
    let p = ctx.p;
    let poly = deuring_polynomial(p);
    let mut js = BTreeSet::new();
    for lambda in field.elements() {
        let val = poly.iter().rev().fold(Fp2Elt::ZERO, |acc, &c| {
            field.add(field.mul(acc, lambda), Fp2Elt::from_fp(c))
        });
        if val.is_zero() {
            // λ ∉ {0, 1} since H(0) = 1 and H(1) = C(p−1, (p−1)/2) ≠ 0
            js.insert(legendre_j(&field, lambda).expect("lambda not 0 or 1"));
        }
    }
    let js: Vec<Fp2Elt> = js.into_iter().collect();
    let weights = js.iter().map(|&j| weight_of(j, p)).collect();
    SupersingularSet {
        p,
        qnr: ctx.qnr,
        js,
        weights,
    }
}

impl SupersingularSet {
    pub fn len(&self) -> usize {
        self.js.len()
    }

    pub fn is_empty(&self) -> bool {
        self.js.is_empty()
    }

    pub fn index_of(&self, j: Fp2Elt) -> Option<usize> {
        self.js.binary_search(&j).ok()
    }

    /// `Σ 1/w_E` as a reduced fraction.
    pub fn mass(&self) -> (u64, u64) {
        // denominators divide 6
        let num: u64 = self.weights.iter().map(|&w| 6 / u64::from(w)).sum();
        let g = gcd(num, 6);
        (num / g, 6 / g)
    }

    /// Checks every structural invariant; used before trusting cached data.
    pub fn validate(&self, ctx: &PrimeContext) -> Result<()> {
        let bad = |msg: String| Err(Error::SupersingularInvariant(msg));
        if self.p != ctx.p || self.qnr != ctx.qnr {
            return bad("field model does not match the context".into());
        }
        if self.js.len() != self.weights.len() {
            return bad("weights not aligned with j-invariants".into());
        }
        if !self.js.windows(2).all(|w| w[0] < w[1]) {
            return bad("j-invariants not strictly ascending".into());
        }
        if self.js.iter().any(|j| j.c0 >= self.p || j.c1 >= self.p) {
            return bad("unreduced coordinates".into());
        }
        if self.len() != eichler_count(self.p) {
            return bad(format!(
                "{} points, expected {}",
                self.len(),
                eichler_count(self.p)
            ));
        }
        for (&j, &w) in self.js.iter().zip(&self.weights) {
            if w != weight_of(j, self.p) {
                return bad(format!("wrong weight {w} at j = [{}, {}]", j.c0, j.c1));
            }
        }
        let (num, den) = self.mass();
        if num * 12 != (self.p - 1) * den {
            return bad(format!("mass {num}/{den} differs from (p-1)/12"));
        }
        let field = ctx.field();
        for &j in &self.js {
            if self.index_of(field.frobenius(j)).is_none() {
                return bad("not Frobenius-stable".into());
            }
            if !is_supersingular_j(&field, j) {
                return bad(format!("j = [{}, {}] is ordinary", j.c0, j.c1));
            }
        }
        if ctx.p % 12 == 1 && self.weights.iter().any(|&w| w != 1) {
            return bad("nontrivial weight although p = 1 mod 12".into());
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The refined L-invariant as a matrix over `Z/ℓ^t`; column `E` holds `ℒ([E])`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LMatrix {
    #[serde(with = "modulus_value")]
    pub modulus: Modulus,
    #[serde(with = "nested_matrix")]
    pub mat: ZMat,
}

impl LMatrix {
    pub fn is_symmetric(&self) -> bool {
        self.mat == self.mat.transpose()
    }

    pub fn column_sums_vanish(&self) -> bool {
        let m = self.modulus;
        (0..self.mat.cols()).all(|c| (0..self.mat.rows()).fold(0, |acc, r| m.add(acc, self.mat.get(r, c))) == 0)
    }

    /// The operator in the row-vector convention used by `zmodlin`.
    pub fn row_operator(&self, m: Modulus) -> ZMat {
        self.mat.transpose().reduce_mod(m)
    }
}

pub(crate) mod modulus_value {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::zmodlin::Modulus;

    pub fn serialize<S: Serializer>(m: &Modulus, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(m.value())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Modulus, D::Error> {
        let v = u64::deserialize(d)?;
        Modulus::new(v).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod nested_matrix {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::zmodlin::ZMat;

    pub fn serialize<S: Serializer>(a: &ZMat, s: S) -> Result<S::Ok, S::Error> {
        a.to_nested().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ZMat, D::Error> {
        let rows = Vec::<Vec<u64>>::deserialize(d)?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(ZMat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
    }
}

/// `ℒ([E]) = Σ_{E' ≠ E} w_{E'}^{-1}·dlog((j(E') − j(E))^{p+1})·([E'] − [E])`.
pub fn build_l_matrix(ctx: &PrimeContext, set: &SupersingularSet) -> LMatrix {
    let m = ctx.r_modulus();
    let field = ctx.field();
    let n = set.len();
    let mut mat = ZMat::zeros(n, n);
    for src in 0..n {
        let mut total = 0u64;
        for dst in 0..n {
            if dst == src {
                continue;
            }
            let diff = field.sub(set.js[dst], set.js[src]);
            let log = ctx.dlog(field.norm(diff)).expect("distinct j-invariants");
            let w_inv = m.inv(u64::from(set.weights[dst])).expect("weights are units");
            let coeff = m.mul(w_inv, log);
            mat.set(dst, src, coeff);
            total = m.add(total, coeff);
        }
        mat.set(src, src, m.neg(total));
    }
    LMatrix { modulus: m, mat }
}

/// Integer Brandt matrix: entry `(i, j)` is the multiplicity of `js[j]` among
/// the roots of `Φ_q(js[i], Y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandtMatrix {
    pub q: u64,
    pub mat: Vec<Vec<u64>>,
}

impl BrandtMatrix {
    pub fn to_zmat(&self, m: Modulus) -> ZMat {
        let n = self.mat.len();
        ZMat::from_fn(n, n, |i, j| m.reduce(self.mat[i][j]))
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.mat.iter().map(|r| r.iter().sum()).collect()
    }

    /// `B[i][j]·w_j = B[j][i]·w_i`.
    pub fn weight_symmetric(&self, weights: &[u8]) -> bool {
        let n = self.mat.len();
        (0..n).all(|i| {
            (0..n).all(|j| {
                self.mat[i][j] * u64::from(weights[j]) == self.mat[j][i] * u64::from(weights[i])
            })
        })
    }

    /// Integer product, for commutation checks.
    pub fn int_mul(&self, other: &BrandtMatrix) -> Vec<Vec<u64>> {
        let n = self.mat.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.mat[i][k] * other.mat[k][j]).sum())
                    .collect()
            })
            .collect()
    }
}

/// Multiplicity of `root` in a polynomial given by ascending coefficients.
fn root_multiplicity(field: &Fp2, coeffs: &[Fp2Elt], root: Fp2Elt) -> u64 {
    let mut poly = coeffs.to_vec();
    let mut mult = 0;
    while poly.len() > 1 {
        // synthetic division by (Y − root)
        let deg = poly.len() - 1;
        let mut quot = vec![Fp2Elt::ZERO; deg];
        let mut carry = Fp2Elt::ZERO;
        for k in (0..=deg).rev() {
            let cur = field.add(poly[k], field.mul(carry, root));
            if k == 0 {
                carry = cur;
            } else {
                quot[k - 1] = cur;
                carry = cur;
            }
        }
        if !carry.is_zero() {
            break;
        }
        mult += 1;
        poly = quot;
    }
    mult
}

pub fn brandt_matrix(ctx: &PrimeContext, set: &SupersingularSet, q: u64) -> Result<BrandtMatrix> {
    if q == ctx.p {
        return Err(Error::PrimeIsLevel(q));
    }
    let phi = ModularPolynomial::classical(q)?;
    let field = ctx.field();
    let n = set.len();
    let mut mat = vec![vec![0u64; n]; n];
    for (i, &ji) in set.js.iter().enumerate() {
        let coeffs = phi.specialize_x(&field, ji);
        for (k, &jk) in set.js.iter().enumerate() {
            mat[i][k] = root_multiplicity(&field, &coeffs, jk);
        }
        let total: u64 = mat[i].iter().sum();
        if total != q + 1 {
            return Err(Error::SupersingularInvariant(format!(
                "Phi_{q}(j_{i}, Y) has {total} roots in S, expected {}",
                q + 1
            )));
        }
    }
    Ok(BrandtMatrix { q, mat })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, ell: u64) -> PrimeContext {
        PrimeContext::new(p, ell, 1).unwrap()
    }

    #[test]
    fn small_supersingular_sets() {
        let s = enumerate_supersingular(&ctx(11, 5));
        assert_eq!(s.js, vec![Fp2Elt::from_fp(0), Fp2Elt::from_fp(1)]);
        assert_eq!(s.weights, vec![3, 2]);
        let c13 = PrimeContext {
            p: 13,
            ell: 5,
            s: 1,
            t: 1,
            r: 5,
            g: 2,
            qnr: 2,
        };
        let s = enumerate_supersingular(&c13);
        assert_eq!(s.js, vec![Fp2Elt::from_fp(5)]);
        let s = enumerate_supersingular(&ctx(61, 5));
        assert_eq!(s.len(), 5);
        assert!(s.weights.iter().all(|&w| w == 1));
    }

    #[test]
    fn deuring_small_case() {
        // p = 11: m = 5, C(5,i)^2 = 1, 25, 100, 100, 25, 1
        assert_eq!(deuring_polynomial(11), vec![1, 3, 1, 1, 3, 1]);
    }

    #[test]
    fn validate_catches_tampering() {
        let c = ctx(61, 5);
        let mut s = enumerate_supersingular(&c);
        s.validate(&c).unwrap();
        s.weights[0] = 2;
        assert!(s.validate(&c).is_err());
    }

    #[test]
    fn l_matrix_small_cases() {
        let c = ctx(11, 5);
        let s = enumerate_supersingular(&c);
        let l = build_l_matrix(&c, &s);
        assert!(l.mat.is_zero());
        assert_eq!((l.mat.rows(), l.mat.cols()), (2, 2));
        let c = ctx(61, 5);
        let l = build_l_matrix(&c, &enumerate_supersingular(&c));
        assert!(l.is_symmetric());
        assert!(l.column_sums_vanish());
    }

    #[test]
    fn brandt_p11_q2() {
        let c = ctx(11, 5);
        let s = enumerate_supersingular(&c);
        let b = brandt_matrix(&c, &s, 2).unwrap();
        assert_eq!(b.row_sums(), vec![3, 3]);
        assert_eq!(b.mat[0][1] * u64::from(s.weights[1]), b.mat[1][0] * u64::from(s.weights[0]));
        assert!(brandt_matrix(&c, &s, 11).is_err());
    }

    #[test]
    fn lmatrix_json_schema() {
        let c = ctx(11, 5);
        let l = build_l_matrix(&c, &enumerate_supersingular(&c));
        assert_eq!(
            serde_json::to_string(&l).unwrap(),
            r#"{"modulus":5,"mat":[[0,0],[0,0]]}"#
        );
        let s = enumerate_supersingular(&c);
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"p":11,"qnr":2,"S":[[0,0],[1,0]],"weights":[3,2]}"#
        );
    }
}
