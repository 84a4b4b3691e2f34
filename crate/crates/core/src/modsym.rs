//! Manin-symbol presentation of `H = H₁(X₀(p), cusps; Z/ℓ^s)`.
//!
//! Generators are the points of `P¹(Z/p)`: index `c` stands for `[c:1]` and
//! index `p` for `[1:0]`. The symbol `[c:d]` is the class of `g·{0, ∞}` for
//! any `g ∈ SL₂(Z)` with bottom row `(c, d)`. All operators act on row
//! vectors of coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{inv_mod, PrimeContext};
use crate::zmodlin::{intersection, kernel, Modulus, Submodule, ZMat, ZVec};

/// A point of `P¹(Q)` in lowest terms with `den ≥ 0`; `∞ = 1/0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cusp {
    num: i64,
    den: i64,
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Cusp {
    pub const INFINITY: Cusp = Cusp { num: 1, den: 0 };
    pub const ZERO: Cusp = Cusp { num: 0, den: 1 };

    pub fn new(num: i64, den: i64) -> Result<Self> {
        if num == 0 && den == 0 {
            return Err(Error::Precondition("0/0 is not a cusp".into()));
        }
        let g = gcd_i64(num, den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 || (d == 0 && n < 0) {
            n = -n;
            d = -d;
        }
        Ok(Cusp { num: n, den: d })
    }

    pub fn integer(n: i64) -> Self {
        Cusp { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_infinity(&self) -> bool {
        self.den == 0
    }

    /// Möbius action of an integer matrix with nonzero determinant.
    pub fn transform(&self, g: [[i64; 2]; 2]) -> Cusp {
        let n = g[0][0] * self.num + g[0][1] * self.den;
        let d = g[1][0] * self.num + g[1][1] * self.den;
        Cusp::new(n, d).expect("nonsingular matrix")
    }

    /// The cusp of `X₀(p)` this point reduces to: `true` for `∞`.
    pub fn is_over_infinity(&self, p: u64) -> bool {
        self.den.rem_euclid(p as i64) == 0
    }
}

/// A formal sum of Manin generators.
pub type Chain = Vec<(usize, i64)>;

/// Operator labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeckeOp {
    T(u64),
    Up,
    Wp,
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeMatrix {
    pub op: HeckeOp,
    #[serde(with = "crate::ssgraph::nested_matrix")]
    pub mat: ZMat,
}

/// A degree-zero divisor `a·(∞) − a·(0)` on the two cusps, stored as `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CuspDivisor {
    pub infinity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManinSpace {
    p: u64,
    modulus: Modulus,
    /// Row `x` holds the coordinates of generator `x`.
    gen_coords: ZMat,
    /// Generator whose class is the `j`-th basis vector.
    basis_gens: Vec<usize>,
    boundary: ZVec,
    relation_count: usize,
}

/// `12g = p + 1 − 3ν₂ − 4ν₃` for prime level.
pub fn genus_x0(p: u64) -> u64 {
    let nu2 = match p % 4 {
        1 => 2,
        3 => 0,
        _ => 1,
    };
    let nu3 = match p % 3 {
        1 => 2,
        2 => 0,
        _ => 1,
    };
    (p + 1 - 3 * nu2 - 4 * nu3) / 12
}

impl ManinSpace {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.basis_gens.len()
    }

    pub fn num_generators(&self) -> usize {
        self.p as usize + 1
    }

    pub fn relation_count(&self) -> usize {
        self.relation_count
    }

    pub fn genus(&self) -> usize {
        (self.dim() - 1) / 2
    }

    pub fn basis_generators(&self) -> &[usize] {
        &self.basis_gens
    }

    /// Index of `[c:d]`.
    pub fn gen_index(&self, c: i64, d: i64) -> usize {
        let p = self.p as i64;
        let (c, d) = (c.rem_euclid(p) as u64, d.rem_euclid(p) as u64);
        assert!(c != 0 || d != 0, "[0:0] is not in P^1");
        if d == 0 {
            self.p as usize
        } else {
            (c * inv_mod(d, self.p).expect("d is a unit") % self.p) as usize
        }
    }

    /// Normalized bottom row `(c, d)` of generator `x`.
    pub fn gen_row(&self, x: usize) -> (i64, i64) {
        if x as u64 == self.p {
            (1, 0)
        } else {
            (x as i64, 1)
        }
    }

    /// `[c:d]·σ = [d:−c]`.
    pub fn sigma(&self, x: usize) -> usize {
        let (c, d) = self.gen_row(x);
        self.gen_index(d, -c)
    }

    /// `[c:d]·τ = [d:−c−d]`.
    pub fn tau(&self, x: usize) -> usize {
        let (c, d) = self.gen_row(x);
        self.gen_index(d, -c - d)
    }

    fn boundary_of_gen(&self, x: usize) -> u64 {
        let (c, d) = self.gen_row(x);
        let at_inf = |t: i64| i64::from(t.rem_euclid(self.p as i64) == 0);
        self.modulus.reduce_i64(at_inf(c) - at_inf(d))
    }

    /// Rechecks a presentation obtained from outside, e.g. a cache file.
    pub fn validate(&self, ctx: &PrimeContext) -> Result<()> {
        let bad = |msg: &str| Err(Error::Presentation(msg.to_string()));
        let m = ctx.s_modulus();
        let n = ctx.p as usize + 1;
        let d = 2 * genus_x0(ctx.p) as usize + 1;
        if self.p != ctx.p || self.modulus != m {
            return bad("context mismatch");
        }
        if self.gen_coords.rows() != n
            || self.gen_coords.cols() != d
            || self.basis_gens.len() != d
            || self.boundary.len() != d
        {
            return bad("shape mismatch");
        }
        if self.gen_coords.row_vecs().iter().flatten().any(|&c| c >= m.value()) {
            return bad("unreduced coordinates");
        }
        for (j, &x) in self.basis_gens.iter().enumerate() {
            if x >= n || (0..d).any(|k| self.gen_coords.get(x, k) != u64::from(j == k)) {
                return bad("basis generators are not unit vectors");
            }
            if self.boundary[j] != self.boundary_of_gen(x) {
                return bad("boundary mismatch");
            }
        }
        let zero = vec![0u64; d];
        for x in 0..n {
            if self.coords_of_chain(&[(x, 1), (self.sigma(x), 1)]) != zero {
                return bad("two-term relation violated");
            }
            let y = self.tau(x);
            if self.coords_of_chain(&[(x, 1), (y, 1), (self.tau(y), 1)]) != zero {
                return bad("three-term relation violated");
            }
        }
        Ok(())
    }

    pub fn coords_of_gen(&self, x: usize) -> &[u64] {
        self.gen_coords.row(x)
    }

    pub fn coords_of_chain(&self, chain: &[(usize, i64)]) -> ZVec {
        let m = self.modulus;
        let mut out = vec![0u64; self.dim()];
        for &(x, k) in chain {
            let k = m.reduce_i64(k);
            for (o, &c) in out.iter_mut().zip(self.gen_coords.row(x)) {
                *o = m.add(*o, m.mul(k, c));
            }
        }
        out
    }

    /// Generator chain of `{∞, r}` from the convergents of `r`.
    pub fn chain_from_infinity(&self, r: Cusp) -> Chain {
        if r.is_infinity() {
            return Vec::new();
        }
        let (mut n, mut d) = (r.num, r.den);
        let (mut q_prev, mut q_cur) = (0i64, 1i64);
        let mut chain = Vec::new();
        let mut k = 0u32;
        loop {
            let a = n.div_euclid(d);
            if k > 0 {
                let q_next = a * q_cur + q_prev;
                q_prev = q_cur;
                q_cur = q_next;
            }
            // bottom row of the k-th convergent matrix: (q_k, (−1)^{k−1} q_{k−1})
            let sign = if k % 2 == 1 { 1 } else { -1 };
            chain.push((self.gen_index(q_cur, sign * q_prev), 1));
            let rem = n - a * d;
            if rem == 0 {
                break;
            }
            (n, d) = (d, rem);
            k += 1;
        }
        chain
    }

    /// `{α, β} = {∞, β} − {∞, α}` as a generator chain.
    pub fn path_chain(&self, alpha: Cusp, beta: Cusp) -> Chain {
        let mut chain = self.chain_from_infinity(beta);
        chain.extend(self.chain_from_infinity(alpha).into_iter().map(|(x, k)| (x, -k)));
        chain
    }

    pub fn path_symbol(&self, alpha: Cusp, beta: Cusp) -> ZVec {
        self.coords_of_chain(&self.path_chain(alpha, beta))
    }

    /// Endpoints `(g·0, g·∞)` of the path represented by generator `x`.
    pub fn gen_endpoints(&self, x: usize) -> (Cusp, Cusp) {
        let (c, d) = self.gen_row(x);
        if d == 0 {
            (Cusp::INFINITY, Cusp::ZERO)
        } else if c == 0 {
            (Cusp::ZERO, Cusp::INFINITY)
        } else {
            (Cusp::ZERO, Cusp::new(1, c).expect("c nonzero"))
        }
    }

    /// Coefficient of `(∞)` in the boundary.
    pub fn boundary(&self, v: &[u64]) -> CuspDivisor {
        let m = self.modulus;
        let infinity = v
            .iter()
            .zip(&self.boundary)
            .fold(0, |acc, (&a, &b)| m.add(acc, m.mul(a, b)));
        CuspDivisor { infinity }
    }

    pub fn boundary_vector(&self) -> &[u64] {
        &self.boundary
    }

    /// Matrix of the operator sending basis generator `x` to `f(x)`.
    fn operator_from(&self, op: HeckeOp, mut f: impl FnMut(usize) -> Chain) -> HeckeMatrix {
        let rows: Vec<ZVec> = self
            .basis_gens
            .iter()
            .map(|&x| self.coords_of_chain(&f(x)))
            .collect();
        let mat = ZMat::from_rows(&rows, self.dim(), self.modulus).expect("reduced coordinates");
        HeckeMatrix { op, mat }
    }

    /// `{α, β} ↦ {−α, −β}`, i.e. `[c:d] ↦ [−c:d]`.
    pub fn star_involution(&self) -> HeckeMatrix {
        self.operator_from(HeckeOp::Star, |x| {
            let (c, d) = self.gen_row(x);
            vec![(self.gen_index(-c, d), 1)]
        })
    }

    /// `Σ_{M ∈ X_q} [(c, d)·M]` over `X_q = {ad − bc = q, a > b ≥ 0, d > c ≥ 0}`.
    pub fn heilbronn_chain(&self, x: usize, q: u64) -> Chain {
        let (u, v) = self.gen_row(x);
        let p = self.p as i64;
        let q = q as i64;
        let mut chain = Vec::new();
        for a in 1..=q {
            for d in 1..=q {
                for b in 0..a {
                    for c in 0..d {
                        if a * d - b * c != q {
                            continue;
                        }
                        let (s, t) = (u * a + v * c, u * b + v * d);
                        if s.rem_euclid(p) == 0 && t.rem_euclid(p) == 0 {
                            continue;
                        }
                        chain.push((self.gen_index(s, t), 1));
                    }
                }
            }
        }
        chain
    }

    /// `T_q{α,β} = Σ_j {(α+j)/q, (β+j)/q} + {qα, qβ}` on paths.
    pub fn hecke_path_chain(&self, alpha: Cusp, beta: Cusp, q: u64) -> Chain {
        let qi = q as i64;
        let mut chain = Vec::new();
        for j in 0..qi {
            let g = [[1, j], [0, qi]];
            chain.extend(self.path_chain(alpha.transform(g), beta.transform(g)));
        }
        let g = [[qi, 0], [0, 1]];
        chain.extend(self.path_chain(alpha.transform(g), beta.transform(g)));
        chain
    }

    pub fn hecke_tq(&self, q: u64) -> Result<HeckeMatrix> {
        if q == self.p {
            return Err(Error::PrimeIsLevel(q));
        }
        if !crate::gfield::is_prime(q) {
            return Err(Error::Precondition(format!("T_q needs prime q, got {q}")));
        }
        Ok(self.operator_from(HeckeOp::T(q), |x| self.heilbronn_chain(x, q)))
    }

    /// `w_p{α, β} = {−1/(pα), −1/(pβ)}` and `U_p = −w_p`.
    pub fn atkin_lehner(&self) -> (HeckeMatrix, HeckeMatrix) {
        let w = [[0, -1], [self.p as i64, 0]];
        let wp = self.operator_from(HeckeOp::Wp, |x| {
            let (a, b) = self.gen_endpoints(x);
            self.path_chain(a.transform(w), b.transform(w))
        });
        let m = self.modulus;
        let up = HeckeMatrix {
            op: HeckeOp::Up,
            mat: ZMat::zeros(self.dim(), self.dim()).sub(&wp.mat, m),
        };
        (wp, up)
    }

    /// `(H₊, H⁰, (H⁰)₊)`.
    pub fn plus_subspaces(&self, star: &HeckeMatrix) -> Result<(Submodule, Submodule, Submodule)> {
        let m = self.modulus;
        let n = self.dim();
        let plus = kernel(&star.mat.sub(&ZMat::identity(n), m), m);
        let bcol = ZMat::from_fn(n, 1, |i, _| self.boundary[i]);
        let cusp = kernel(&bcol, m);
        let both = intersection(&plus, &cusp)?;
        Ok((plus, cusp, both))
    }
}

/// Quotient of the free module on `P¹(Z/p)` by the two- and three-term
/// relations, coordinatized through a free basis of its dual.
pub fn build_presentation(ctx: &PrimeContext) -> Result<ManinSpace> {
    let p = ctx.p;
    let m = ctx.s_modulus();
    let n = p as usize + 1;
    let mut space = ManinSpace {
        p,
        modulus: m,
        gen_coords: ZMat::zeros(n, 0),
        basis_gens: Vec::new(),
        boundary: Vec::new(),
        relation_count: 0,
    };

    // ξ(x) = sign·ξ(rep)
    let mut rep: Vec<Option<(usize, i64)>> = vec![None; n];
    let mut free_index = vec![usize::MAX; n];
    let mut k = 0;
    for x in 0..n {
        let y = space.sigma(x);
        if y == x {
            continue;
        }
        if x < y {
            free_index[x] = k;
            k += 1;
            rep[x] = Some((x, 1));
            rep[y] = Some((x, -1));
        }
    }

    let mut rel_rows: Vec<Vec<i64>> = Vec::new();
    let mut seen = vec![false; n];
    for x in 0..n {
        if seen[x] {
            continue;
        }
        let orbit = [x, space.tau(x), space.tau(space.tau(x))];
        for &y in &orbit {
            seen[y] = true;
        }
        let mut row = vec![0i64; k];
        for &y in &orbit {
            if let Some((r, s)) = rep[y] {
                row[free_index[r]] += s;
            }
        }
        if row.iter().any(|&c| c != 0) {
            rel_rows.push(row);
        }
    }
    space.relation_count = rel_rows.len();

    // functionals on the free module vanishing on every relation
    let rel_t = ZMat::from_fn(k, rel_rows.len(), |i, j| m.reduce_i64(rel_rows[j][i]));
    let dual = kernel(&rel_t, m);
    let pivots = dual.pivots();
    if pivots.iter().any(|&(_, e)| e != 0) {
        return Err(Error::Presentation("homology is not free".into()));
    }
    let d = dual.len();
    let basis = dual.basis();
    let free_gen: Vec<usize> = {
        let mut v = vec![0; k];
        for x in 0..n {
            if free_index[x] != usize::MAX {
                v[free_index[x]] = x;
            }
        }
        v
    };
    space.basis_gens = pivots.iter().map(|&(col, _)| free_gen[col]).collect();
    space.gen_coords = ZMat::from_fn(n, d, |x, j| match rep[x] {
        None => 0,
        Some((r, s)) => {
            let c = basis.get(j, free_index[r]);
            if s > 0 {
                c
            } else {
                m.neg(c)
            }
        }
    });
    space.boundary = space.basis_gens.iter().map(|&x| space.boundary_of_gen(x)).collect();

    let g = genus_x0(p) as usize;
    if d != 2 * g + 1 {
        return Err(Error::Presentation(format!(
            "rank {d} differs from 2g + 1 = {}",
            2 * g + 1
        )));
    }
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: u64, ell: u64, s: u32) -> ManinSpace {
        build_presentation(&PrimeContext::new(p, ell, s).unwrap()).unwrap()
    }

    fn bare(p: u64, ell: u64, s: u32) -> ManinSpace {
        let ctx = PrimeContext {
            p,
            ell,
            s,
            t: s,
            r: ell.pow(s),
            g: 2,
            qnr: 2,
        };
        build_presentation(&ctx).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(space(11, 5, 1).dim(), 3);
        assert_eq!(space(61, 5, 1).dim(), 9);
        assert_eq!(bare(13, 5, 1).dim(), 1);
    }

    #[test]
    fn genus_formula() {
        let known = [(11, 1), (13, 0), (23, 2), (37, 2), (61, 4), (101, 8), (181, 14)];
        for (p, g) in known {
            assert_eq!(genus_x0(p), g, "p = {p}");
        }
    }

    #[test]
    fn basic_paths() {
        let h = space(11, 5, 1);
        assert!(h.path_symbol(Cusp::ZERO, Cusp::ZERO).iter().all(|&c| c == 0));
        assert_eq!(
            h.path_symbol(Cusp::ZERO, Cusp::INFINITY),
            h.coords_of_gen(h.gen_index(0, 1)).to_vec()
        );
        let a = h.path_symbol(Cusp::ZERO, Cusp::INFINITY);
        let b = h.path_symbol(Cusp::INFINITY, Cusp::ZERO);
        let m = h.modulus();
        assert!(a.iter().zip(&b).all(|(&x, &y)| m.add(x, y) == 0));
    }

    #[test]
    fn boundary_examples() {
        let h = space(11, 5, 1);
        let v = h.path_symbol(Cusp::ZERO, Cusp::INFINITY);
        assert_eq!(h.boundary(&v).infinity, 1);
        for a in 1..11 {
            let v = h.path_symbol(Cusp::new(a, 11).unwrap(), Cusp::INFINITY);
            assert_eq!(h.boundary(&v).infinity, 0);
        }
    }

    #[test]
    fn star_examples() {
        let h = space(11, 5, 1);
        let star = h.star_involution();
        let m = h.modulus();
        let z = h.path_symbol(Cusp::ZERO, Cusp::INFINITY);
        assert_eq!(star.mat.apply(&z, m), z);
        assert_eq!(star.mat.mul(&star.mat, m), ZMat::identity(3));
        let t2 = h.hecke_tq(2).unwrap();
        assert_eq!(star.mat.mul(&t2.mat, m), t2.mat.mul(&star.mat, m));
    }

    #[test]
    fn plus_ranks() {
        for (p, ranks) in [(11, (2, 2, 1)), (61, (5, 8, 4))] {
            let h = space(p, 5, 1);
            let (plus, cusp, both) = h.plus_subspaces(&h.star_involution()).unwrap();
            assert_eq!(
                (plus.free_rank(), cusp.free_rank(), both.free_rank()),
                ranks,
                "p = {p}"
            );
        }
    }

    #[test]
    fn hecke_examples() {
        let h = space(11, 5, 1);
        let m = h.modulus();
        let t2 = h.hecke_tq(2).unwrap().mat;
        let t3 = h.hecke_tq(3).unwrap().mat;
        assert_eq!(t2.mul(&t3, m), t3.mul(&t2, m));
        assert!(h.hecke_tq(11).is_err());
        let h13 = bare(13, 5, 1);
        assert_eq!(h13.hecke_tq(2).unwrap().mat.to_nested(), vec![vec![3]]);
    }

    #[test]
    fn t2_trace_for_level_11() {
        // eigenvalues: 3 (Eisenstein) and a_2 = −2 twice
        let h = bare(11, 7, 2);
        let m = h.modulus();
        let t2 = h.hecke_tq(2).unwrap().mat;
        let trace = (0..3).fold(0, |acc, i| m.add(acc, t2.get(i, i)));
        assert_eq!(trace, m.reduce_i64(-1));
    }

    #[test]
    fn atkin_lehner_examples() {
        let h = space(11, 5, 1);
        let m = h.modulus();
        let (wp, up) = h.atkin_lehner();
        assert_eq!(wp.mat.mul(&wp.mat, m), ZMat::identity(3));
        let z = h.path_symbol(Cusp::ZERO, Cusp::INFINITY);
        assert_eq!(up.mat.apply(&z, m), z);
        assert_eq!(wp.mat.apply(&z, m), h.path_symbol(Cusp::INFINITY, Cusp::ZERO));
        for a in 1..11i64 {
            let lhs = wp.mat.apply(&h.path_symbol(Cusp::ZERO, Cusp::new(1, a).unwrap()), m);
            let rhs = h.path_symbol(Cusp::INFINITY, Cusp::new(-a, 11).unwrap());
            assert_eq!(lhs, rhs, "a = {a}");
        }
    }

    #[test]
    fn validation_accepts_fresh_and_rejects_tampered() {
        let ctx = PrimeContext::new(61, 5, 1).unwrap();
        let h = build_presentation(&ctx).unwrap();
        h.validate(&ctx).unwrap();
        let json = serde_json::to_string(&h).unwrap();
        let back: ManinSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
        let mut bad = h.clone();
        let x = bad.num_generators() - 2;
        let c = bad.gen_coords.get(x, 0);
        bad.gen_coords.set(x, 0, (c + 1) % 5);
        assert!(bad.validate(&ctx).is_err());
    }

    #[test]
    fn cusp_normalization() {
        assert_eq!(Cusp::new(2, -4).unwrap(), Cusp::new(-1, 2).unwrap());
        assert_eq!(Cusp::new(-3, 0).unwrap(), Cusp::INFINITY);
        assert!(Cusp::new(0, 0).is_err());
    }
}
