//! The Eisenstein ideal `I = (T_q − q − 1, U_p − 1)` acting on `H₊`, its
//! power filtration, the Mazur logarithm on `(H⁰)₊`, the winding vector and
//! the invariant `α(p, ℓ, s)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{is_prime, PrimeContext};
use crate::modsym::{Cusp, HeckeMatrix, HeckeOp, ManinSpace};
use crate::ssgraph::HeckePolynomial;
use crate::zmodlin::{howell_form, kernel, membership, module_sum, solve, Submodule, ZMat, ZVec};

/// `max(20, ⌈(p + 1)/6⌉)`.
pub fn default_prime_bound(p: u64) -> u64 {
    20.max((p + 1).div_ceil(6))
}

/// `T_q − (q + 1)` for primes `q ≤ bound`, `q ≠ p`, then `U_p − 1`. The
/// `op` label names the Hecke operator; the matrix is shifted by its
/// Eisenstein eigenvalue.
pub fn ideal_generators(space: &ManinSpace, bound: u64) -> Result<Vec<HeckeMatrix>> {
    let m = space.modulus();
    let mut gens = Vec::new();
    for q in (2..=bound).filter(|&q| is_prime(q) && q != space.p()) {
        let t = space.hecke_tq(q)?;
        gens.push(HeckeMatrix {
            op: HeckeOp::T(q),
            mat: t.mat.sub_scalar(q + 1, m),
        });
    }
    let (_, up) = space.atkin_lehner();
    gens.push(HeckeMatrix {
        op: HeckeOp::Up,
        mat: up.mat.sub_scalar(1, m),
    });
    Ok(gens)
}

fn same_module(a: &Submodule, b: &Submodule) -> bool {
    a.contains_module(b) && b.contains_module(a)
}

/// `chain[n] = I^n·H₊`, computed until two consecutive terms agree.
#[derive(Debug, Clone)]
pub struct IdealFiltration {
    pub chain: Vec<Submodule>,
    /// Least `n` with `chain[n] = chain[n + 1]`, if reached.
    pub stabilization_index: Option<usize>,
}

impl IdealFiltration {
    /// `I^n·H₊`, extended past the computed range by the stable value.
    pub fn level(&self, n: usize) -> Option<&Submodule> {
        match self.chain.get(n) {
            Some(s) => Some(s),
            None if self.stabilization_index.is_some() => self.chain.last(),
            None => None,
        }
    }

    pub fn is_descending(&self) -> bool {
        self.chain.windows(2).all(|w| w[0].contains_module(&w[1]))
    }
}

pub fn ideal_filtration(
    plus: &Submodule,
    gens: &[HeckeMatrix],
    n_max: usize,
) -> Result<IdealFiltration> {
    if n_max < 2 {
        return Err(Error::Precondition("filtration depth must be at least 2".into()));
    }
    let mut chain = vec![plus.clone()];
    let mut stabilization_index = None;
    for n in 0..n_max {
        let images: Vec<Submodule> = gens.iter().map(|g| chain[n].image(&g.mat)).collect();
        let next = module_sum(&images)?;
        if same_module(&next, &chain[n]) {
            stabilization_index = Some(n);
            break;
        }
        chain.push(next);
    }
    Ok(IdealFiltration {
        chain,
        stabilization_index,
    })
}

/// Rows `{∞, a/p}` for `a = 1, …, p − 1`.
fn level_fraction_rows(space: &ManinSpace) -> ZMat {
    let p = space.p() as i64;
    let rows: Vec<ZVec> = (1..p)
        .map(|a| space.path_symbol(Cusp::INFINITY, Cusp::new(a, p).expect("p > 0")))
        .collect();
    ZMat::from_rows(&rows, space.dim(), space.modulus()).expect("reduced coordinates")
}

fn dlog_vector(ctx: &PrimeContext) -> Result<ZVec> {
    (1..ctx.p).map(|a| ctx.dlog_s(a)).collect()
}

/// `Σ λ_a·{∞, a/p} ↦ Σ λ_a·log(a)` on `(H⁰)₊`.
#[derive(Debug, Clone)]
pub struct MazurLog {
    rows: ZMat,
    logs: ZVec,
    domain: Submodule,
}

impl MazurLog {
    pub fn new(ctx: &PrimeContext, space: &ManinSpace, plus_cuspidal: &Submodule) -> Result<Self> {
        let rows = level_fraction_rows(space);
        let logs = dlog_vector(ctx)?;
        let m = space.modulus();
        // relations among the spanning rows must have vanishing logarithm
        let rel = kernel(&rows, m);
        for i in 0..rel.len() {
            let val = dot(rel.basis().row(i), &logs, m);
            if val != 0 {
                return Err(Error::Precondition(
                    "logarithm does not factor through the level-fraction relations".into(),
                ));
            }
        }
        Ok(MazurLog {
            rows,
            logs,
            domain: plus_cuspidal.clone(),
        })
    }

    pub fn eval_coefficients(&self, lambda: &[u64]) -> u64 {
        dot(lambda, &self.logs, self.domain.modulus())
    }

    pub fn eval(&self, v: &[u64]) -> Result<u64> {
        if !self.domain.contains(v) {
            return Err(Error::NotInPlusCuspidal);
        }
        let m = self.domain.modulus();
        let lambda = solve(&self.rows, v, m)?.ok_or(Error::NotInPlusCuspidal)?;
        Ok(self.eval_coefficients(&lambda))
    }
}

fn dot(a: &[u64], b: &[u64], m: crate::zmodlin::Modulus) -> u64 {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| m.add(acc, m.mul(x, y)))
}

/// `½·(U_p + 1)·Σ_a log(a)·{a/p, ∞}`.
pub fn winding_rhs(ctx: &PrimeContext, space: &ManinSpace) -> Result<ZVec> {
    let m = space.modulus();
    let p = space.p() as i64;
    let mut acc = vec![0u64; space.dim()];
    for a in 1..p {
        let w = ctx.dlog_s(a as u64)?;
        let sym = space.path_symbol(Cusp::new(a, p).expect("p > 0"), Cusp::INFINITY);
        for (o, &c) in acc.iter_mut().zip(&sym) {
            *o = m.add(*o, m.mul(w, c));
        }
    }
    let (_, up) = space.atkin_lehner();
    let proj = up.mat.add(&ZMat::identity(space.dim()), m);
    let half = m.inv(2).expect("ell is odd");
    Ok(proj.apply(&acc, m).iter().map(|&c| m.mul(half, c)).collect())
}

/// `Σ_{k ≤ (p−1)/2} k·log(k) mod ℓ`.
pub fn merel_sum(ctx: &PrimeContext) -> Result<u64> {
    let ell = ctx.ell;
    let mut total = 0u64;
    for k in 1..=(ctx.p - 1) / 2 {
        total = (total + k % ell * (ctx.dlog(k)? % ell)) % ell;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct I2I3Verdict {
    pub chain2_eq_chain3: bool,
    pub merel_nonzero: bool,
}

impl I2I3Verdict {
    pub fn consistent(&self) -> bool {
        self.chain2_eq_chain3 == self.merel_nonzero
    }
}

/// Compares `I²·H₊ = I³·H₊` with the nonvanishing of the Merel sum.
pub fn i2_equals_i3_check(filtration: &IdealFiltration, merel: u64, s: u32) -> Result<I2I3Verdict> {
    if s != 1 {
        return Err(Error::Precondition("the criterion is stated mod ell (s = 1)".into()));
    }
    let (c2, c3) = match (filtration.level(2), filtration.level(3)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Precondition("filtration too short".into())),
    };
    Ok(I2I3Verdict {
        chain2_eq_chain3: same_module(c2, c3),
        merel_nonzero: merel != 0,
    })
}

/// Largest `n` with `v ∈ chain[n]`; `None` when `v` lies in the stable tail.
fn depth_of(filtration: &IdealFiltration, test: impl Fn(&Submodule) -> bool) -> Option<usize> {
    for (n, level) in filtration.chain.iter().enumerate() {
        if !test(level) {
            return Some(n.saturating_sub(1));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub p: u64,
    pub ell: u64,
    pub s: u32,
    /// The exact value, or the index from which membership persists.
    pub alpha: usize,
    pub stabilized: bool,
    pub merel_sum: u64,
    pub i2_eq_i3: bool,
    /// Combination of `chain[alpha]` basis rows giving the tested vector.
    #[serde(skip)]
    pub certificate: Option<ZVec>,
    /// Agreement of the operator-image method, when a polynomial was given.
    #[serde(skip)]
    pub method_cross_check: Option<bool>,
}

/// `α` from the position of `ℒ_s·{0,∞}` (given as `rhs`) in the filtration,
/// cross-checked against `ℒ_s·H₊` when a Hecke polynomial for `ℒ` is known.
pub fn alpha_compute(
    ctx: &PrimeContext,
    space: &ManinSpace,
    filtration: &IdealFiltration,
    rhs: &[u64],
    hecke_poly: Option<&HeckePolynomial>,
) -> Result<AlphaReport> {
    let stab = filtration
        .stabilization_index
        .ok_or_else(|| Error::Precondition("filtration did not stabilize".into()))?;
    if rhs.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: rhs.len(),
        });
    }
    let primary = depth_of(filtration, |lvl| lvl.contains(rhs));
    let (alpha, stabilized) = match primary {
        Some(n) => (n, false),
        None => (stab, true),
    };
    if primary == Some(0) && !filtration.chain[0].contains(rhs) {
        return Err(Error::Precondition("tested vector is not in H_+".into()));
    }
    let certificate = membership(rhs, &filtration.chain[alpha])?;

    let method_cross_check = match hecke_poly {
        None => None,
        Some(poly) => {
            let m = space.modulus();
            let op = poly.eval_with(space.dim(), m, |q| Ok(space.hecke_tq(q)?.mat))?;
            let image = filtration.chain[0].image(&op);
            let secondary = depth_of(filtration, |lvl| lvl.contains_module(&image));
            if secondary != primary {
                return Err(Error::AlphaDisagreement(format!(
                    "p = {}, ell = {}, s = {}: single vector gives {:?}, operator image gives {:?}",
                    ctx.p, ctx.ell, ctx.s, primary, secondary
                )));
            }
            Some(true)
        }
    };

    let merel = merel_sum(ctx)?;
    let i2_eq_i3 = match (filtration.level(2), filtration.level(3)) {
        (Some(a), Some(b)) => same_module(a, b),
        _ => false,
    };
    Ok(AlphaReport {
        p: ctx.p,
        ell: ctx.ell,
        s: ctx.s,
        alpha,
        stabilized,
        merel_sum: merel,
        i2_eq_i3,
        certificate,
        method_cross_check,
    })
}

/// Everything on the homology side needed for `α` and the identities.
#[derive(Debug, Clone)]
pub struct EisensteinData {
    pub plus: Submodule,
    pub cuspidal: Submodule,
    pub plus_cuspidal: Submodule,
    pub generators: Vec<HeckeMatrix>,
    pub filtration: IdealFiltration,
    pub rhs: ZVec,
}

impl EisensteinData {
    pub fn new(ctx: &PrimeContext, space: &ManinSpace, prime_bound: Option<u64>) -> Result<Self> {
        let star = space.star_involution();
        let (plus, cuspidal, plus_cuspidal) = space.plus_subspaces(&star)?;
        let bound = prime_bound.unwrap_or_else(|| default_prime_bound(ctx.p));
        let generators = ideal_generators(space, bound)?;
        let n_max = ctx.s as usize * (space.genus() + 1) + 2;
        let filtration = ideal_filtration(&plus, &generators, n_max)?;
        let rhs = winding_rhs(ctx, space)?;
        Ok(EisensteinData {
            plus,
            cuspidal,
            plus_cuspidal,
            generators,
            filtration,
            rhs,
        })
    }

    /// `|chain[1]/chain[2]|` as a power of `ℓ`.
    pub fn first_quotient_exponent(&self) -> Option<u32> {
        let a = self.filtration.level(1)?;
        let b = self.filtration.level(2)?;
        Some(a.cardinality_exponent() - b.cardinality_exponent())
    }
}

/// Howell span of explicit vectors.
pub fn span(vectors: &[ZVec], dim: usize, m: crate::zmodlin::Modulus) -> Result<Submodule> {
    Ok(howell_form(&ZMat::from_rows(vectors, dim, m)?, m))
}
