//! Expressing the L-matrix as a polynomial in Brandt matrices over `Z/ℓ^s`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BrandtMatrix, LMatrix, SupersingularSet};
use crate::error::{Error, Result};
use crate::gfield::PrimeContext;
use crate::zmodlin::{howell_form, solve, Modulus, Submodule, ZMat};

/// One term `coeff · Π T_q` of a Hecke polynomial; `monomial` is a sorted
/// multiset of primes, empty for the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeTerm {
    pub coeff: u64,
    pub monomial: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckePolynomial {
    #[serde(with = "super::modulus_value")]
    pub modulus: Modulus,
    /// Dimension of the module the polynomial was verified on.
    pub dim: usize,
    pub terms: Vec<HeckeTerm>,
}

/// Search budget: total degree and the primes admitted into monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyBudget {
    pub max_degree: usize,
    pub primes: Vec<u64>,
}

impl Default for PolyBudget {
    fn default() -> Self {
        PolyBudget {
            max_degree: 6,
            primes: vec![2, 3, 5, 7],
        }
    }
}

impl HeckePolynomial {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn primes(&self) -> BTreeSet<u64> {
        self.terms.iter().flat_map(|t| t.monomial.iter().copied()).collect()
    }

    /// Substitutes `op(q)` for every `T_q`; all operators must be square of
    /// the same size `dim` and act on row vectors.
    pub fn eval_with(
        &self,
        dim: usize,
        m: Modulus,
        mut op: impl FnMut(u64) -> Result<ZMat>,
    ) -> Result<ZMat> {
        let mut cache: BTreeMap<u64, ZMat> = BTreeMap::new();
        let mut total = ZMat::zeros(dim, dim);
        for term in &self.terms {
            let mut prod = ZMat::identity(dim);
            for &q in &term.monomial {
                if let Entry::Vacant(slot) = cache.entry(q) {
                    let a = op(q)?;
                    if a.rows() != dim || a.cols() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: a.rows(),
                        });
                    }
                    slot.insert(a.reduce_mod(m));
                }
                prod = prod.mul(&cache[&q], m);
            }
            total = total.add(&prod.scale(term.coeff, m), m);
        }
        Ok(total)
    }

    /// Evaluation on `N ⊗ Z/ℓ^s` through integer Brandt matrices.
    pub fn eval_brandt(&self, brandts: &[BrandtMatrix]) -> Result<ZMat> {
        let m = self.modulus;
        self.eval_with(self.dim, m, |q| {
            brandts
                .iter()
                .find(|b| b.q == q)
                .map(|b| b.to_zmat(m))
                .ok_or(Error::UnsupportedLevel(q))
        })
    }
}

fn monomial_matrix(mono: &[u64], mats: &BTreeMap<u64, ZMat>, n: usize, m: Modulus) -> ZMat {
    mono.iter()
        .fold(ZMat::identity(n), |acc, q| acc.mul(&mats[q], m))
}

fn flatten(a: &ZMat) -> Vec<u64> {
    (0..a.rows()).flat_map(|i| a.row(i).to_vec()).collect()
}

/// Monomials of degree at most `max_degree` whose matrices are independent
/// modulo the span of those found before, in breadth-first order.
fn pruned_monomials(
    primes: &[u64],
    mats: &BTreeMap<u64, ZMat>,
    n: usize,
    max_degree: usize,
    m: Modulus,
) -> Vec<(Vec<u64>, ZMat)> {
    let mut kept: Vec<(Vec<u64>, ZMat)> = Vec::new();
    let mut span = Submodule::zero(n * n, m);
    let mut frontier: Vec<Vec<u64>> = vec![Vec::new()];
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    for _ in 0..=max_degree {
        let mut next = BTreeSet::new();
        for mono in frontier {
            if !seen.insert(mono.clone()) {
                continue;
            }
            let a = monomial_matrix(&mono, mats, n, m);
            let v = flatten(&a);
            if span.contains(&v) {
                continue;
            }
            let mut rows: Vec<Vec<u64>> = span.basis().row_vecs();
            rows.push(v);
            span = howell_form(&ZMat::from_rows(&rows, n * n, m).expect("reduced rows"), m);
            for &q in primes {
                let mut ext = mono.clone();
                ext.push(q);
                ext.sort_unstable();
                next.insert(ext);
            }
            kept.push((mono, a));
        }
        if next.is_empty() {
            break;
        }
        frontier = next.into_iter().collect();
    }
    kept
}

fn assemble(
    coeffs: &[u64],
    monos: &[(Vec<u64>, ZMat)],
    m: Modulus,
    n: usize,
) -> HeckePolynomial {
    let terms = coeffs
        .iter()
        .zip(monos)
        .filter(|(&c, _)| c != 0)
        .map(|(&c, (mono, _))| HeckeTerm {
            coeff: c,
            monomial: mono.clone(),
        })
        .collect();
    HeckePolynomial {
        modulus: m,
        dim: n,
        terms,
    }
}

fn combination(coeffs: &[u64], monos: &[(Vec<u64>, ZMat)], m: Modulus, n: usize) -> ZMat {
    coeffs
        .iter()
        .zip(monos)
        .fold(ZMat::zeros(n, n), |acc, (&c, (_, a))| acc.add(&a.scale(c, m), m))
}

/// Tries single test vectors first, then the full matrix system.
fn solve_stage(
    target: &ZMat,
    monos: &[(Vec<u64>, ZMat)],
    m: Modulus,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<u64>>> {
    let k = monos.len();
    let mut probes: Vec<Vec<u64>> = (0..n)
        .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
        .collect();
    for _ in 0..4 {
        probes.push((0..n).map(|_| rng.gen_range(0..m.value())).collect());
    }
    for v in &probes {
        let rows: Vec<Vec<u64>> = monos.iter().map(|(_, a)| a.apply(v, m)).collect();
        let lhs = ZMat::from_rows(&rows, n, m)?;
        if let Some(c) = solve(&lhs, &target.apply(v, m), m)? {
            if combination(&c, monos, m, n) == *target {
                return Ok(Some(c));
            }
        }
    }
    let rows: Vec<Vec<u64>> = monos.iter().map(|(_, a)| flatten(a)).collect();
    let lhs = ZMat::from_rows(&rows, n * n, m)?;
    let sol = solve(&lhs, &flatten(target), m)?;
    debug_assert!(sol.as_ref().is_none_or(|c| c.len() == k));
    Ok(sol.filter(|c| combination(c, monos, m, n) == *target))
}

/// Finds `P` with `P(B) = Lᵀ` over `Z/ℓ^s`, where `Lᵀ` is the row-vector form
/// of the L-matrix and `B_q` acts on row vectors. The search widens in
/// stages: more primes, then twice the degree.
pub fn hecke_polynomial_for_l(
    ctx: &PrimeContext,
    set: &SupersingularSet,
    l: &LMatrix,
    brandts: &[BrandtMatrix],
    budget: &PolyBudget,
) -> Result<HeckePolynomial> {
    let m = ctx.s_modulus();
    let n = set.len();
    let available: Vec<u64> = budget
        .primes
        .iter()
        .copied()
        .filter(|q| brandts.iter().any(|b| b.q == *q))
        .collect();
    let has = |q: u64| available.contains(&q);
    if !has(2) || !has(3) {
        return Err(Error::Precondition(
            "Brandt matrices for q = 2 and q = 3 are required".into(),
        ));
    }
    let target = l.row_operator(m);
    if target.is_zero() {
        return Ok(HeckePolynomial {
            modulus: m,
            dim: n,
            terms: Vec::new(),
        });
    }
    let mats: BTreeMap<u64, ZMat> = brandts
        .iter()
        .filter(|b| available.contains(&b.q))
        .map(|b| (b.q, b.to_zmat(m)))
        .collect();

    let mut stages: Vec<(Vec<u64>, usize)> = (2..=available.len())
        .map(|k| (available[..k].to_vec(), budget.max_degree))
        .collect();
    stages.push((available.clone(), 2 * budget.max_degree));

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.p ^ (ctx.ell << 32));
    for (primes, degree) in &stages {
        let monos = pruned_monomials(primes, &mats, n, *degree, m);
        if let Some(c) = solve_stage(&target, &monos, m, n, &mut rng)? {
            return Ok(assemble(&c, &monos, m, n));
        }
    }
    Err(Error::HeckePolynomialNotFound(format!(
        "p = {}, primes {:?}, degree {}",
        ctx.p,
        available,
        2 * budget.max_degree
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssgraph::{brandt_matrix, build_l_matrix, enumerate_supersingular};

    fn setup(p: u64, ell: u64, s: u32) -> (PrimeContext, SupersingularSet, LMatrix, Vec<BrandtMatrix>) {
        let ctx = PrimeContext::new(p, ell, s).unwrap();
        let set = enumerate_supersingular(&ctx);
        let l = build_l_matrix(&ctx, &set);
        let brandts = [2, 3, 5, 7]
            .iter()
            .filter(|&&q| q != p)
            .map(|&q| brandt_matrix(&ctx, &set, q).unwrap())
            .collect();
        (ctx, set, l, brandts)
    }

    #[test]
    fn zero_l_gives_zero_polynomial() {
        let (ctx, set, l, brandts) = setup(11, 5, 1);
        let poly = hecke_polynomial_for_l(&ctx, &set, &l, &brandts, &PolyBudget::default()).unwrap();
        assert!(poly.is_zero());
    }

    #[test]
    fn p61_polynomial_reproduces_l() {
        let (ctx, set, l, brandts) = setup(61, 5, 1);
        let poly = hecke_polynomial_for_l(&ctx, &set, &l, &brandts, &PolyBudget::default()).unwrap();
        let m = ctx.s_modulus();
        assert_eq!(poly.eval_brandt(&brandts).unwrap(), l.row_operator(m));
    }

    #[test]
    fn missing_small_primes_rejected() {
        let (ctx, set, l, brandts) = setup(61, 5, 1);
        let only5: Vec<BrandtMatrix> = brandts.into_iter().filter(|b| b.q == 5).collect();
        assert!(matches!(
            hecke_polynomial_for_l(&ctx, &set, &l, &only5, &PolyBudget::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn polynomial_json_roundtrip() {
        let (ctx, set, l, brandts) = setup(61, 5, 1);
        let poly = hecke_polynomial_for_l(&ctx, &set, &l, &brandts, &PolyBudget::default()).unwrap();
        let json = serde_json::to_string(&poly).unwrap();
        let back: HeckePolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, poly);
    }
}
