//! Classical modular polynomials `Φ_q(X, Y)` for `q ∈ {2, 3, 5, 7}`.
//!
//! The integer coefficient tables live in `data/phi{q}.txt` (regenerated by
//! `scripts/gen_modpoly.py`). Coefficients are kept as decimal strings and
//! reduced on demand, so no big-integer arithmetic is needed here.

use crate::error::{Error, Result};
use crate::gfield::{Fp2, Fp2Elt};

const PHI2: &str = include_str!("../../data/phi2.txt");
const PHI3: &str = include_str!("../../data/phi3.txt");
const PHI5: &str = include_str!("../../data/phi5.txt");
const PHI7: &str = include_str!("../../data/phi7.txt");

pub const SUPPORTED_LEVELS: [u64; 4] = [2, 3, 5, 7];

#[derive(Debug, Clone)]
pub struct ModularPolynomial {
    level: u64,
    /// `(deg_X, deg_Y, decimal coefficient)`
    terms: Vec<(usize, usize, String)>,
}

fn decimal_mod(s: &str, n: u64) -> u64 {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let r = digits
        .bytes()
        .fold(0u128, |acc, b| (acc * 10 + u128::from(b - b'0')) % u128::from(n)) as u64;
    if neg {
        (n - r) % n
    } else {
        r
    }
}

impl ModularPolynomial {
    pub fn classical(level: u64) -> Result<Self> {
        let src = match level {
            2 => PHI2,
            3 => PHI3,
            5 => PHI5,
            7 => PHI7,
            _ => return Err(Error::UnsupportedLevel(level)),
        };
        let terms = src
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let mut it = l.split_whitespace();
                let a = it.next().and_then(|x| x.parse().ok()).expect("table degree");
                let b = it.next().and_then(|x| x.parse().ok()).expect("table degree");
                let c = it.next().expect("table coefficient").to_string();
                (a, b, c)
            })
            .collect();
        Ok(ModularPolynomial { level, terms })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.level as usize + 1
    }

    /// Dense coefficient grid `c[a][b]` reduced mod `n`.
    pub fn reduce(&self, n: u64) -> Vec<Vec<u64>> {
        let d = self.degree() + 1;
        let mut grid = vec![vec![0u64; d]; d];
        for (a, b, c) in &self.terms {
            grid[*a][*b] = decimal_mod(c, n);
        }
        grid
    }

    /// `Φ_q(X, Y) = Φ_q(Y, X)` on the stored integers.
    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|(a, b, c)| {
            self.terms
                .iter()
                .any(|(a2, b2, c2)| a2 == b && b2 == a && c2 == c)
        })
    }

    /// `Φ_q(X, Y) ≡ (X^q − Y)(X − Y^q) (mod q)`.
    pub fn kronecker_congruence_holds(&self) -> bool {
        let q = self.level as usize;
        let grid = self.reduce(self.level);
        let mut expect = vec![vec![0u64; q + 2]; q + 2];
        let neg_one = self.level - 1;
        expect[q + 1][0] = 1;
        expect[0][q + 1] = 1;
        expect[q][q] = neg_one;
        expect[1][1] = neg_one;
        grid == expect
    }

    /// Coefficients (ascending in `Y`) of `Φ_q(x, Y)` over `F_{p²}`.
    pub fn specialize_x(&self, field: &Fp2, x: Fp2Elt) -> Vec<Fp2Elt> {
        let grid = self.reduce(field.p);
        let d = self.degree();
        let mut xpow = vec![Fp2Elt::ONE; d + 1];
        for a in 1..=d {
            xpow[a] = field.mul(xpow[a - 1], x);
        }
        (0..=d)
            .map(|b| {
                (0..=d).fold(Fp2Elt::ZERO, |acc, a| {
                    field.add(acc, field.scale(xpow[a], grid[a][b]))
                })
            })
            .collect()
    }
}
