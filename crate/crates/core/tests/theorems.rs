//! Matrix-tree and logarithm invariants behind the verification routines.

use mtcircle::gfield::{is_prime, pow_mod, PrimeContext};
use mtcircle::theorems::{laplacian, spanning_tree_bruteforce, tree_weights, SupersingularData};
use mtcircle::zmodlin::{minor_det, Modulus};
use proptest::prelude::*;

fn symmetric_weights(mv: u64, n: usize) -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(0..mv, n * (n - 1) / 2).prop_map(move |upper| {
        let mut w = vec![vec![0u64; n]; n];
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                let x = it.next().unwrap();
                w[i][j] = x;
                w[j][i] = x;
            }
        }
        w
    })
}

fn weighted_graph() -> impl Strategy<Value = (Modulus, Vec<Vec<u64>>)> {
    (prop::sample::select(vec![5u64, 25, 7, 49, 11]), 2..=6usize)
        .prop_flat_map(|(mv, n)| symmetric_weights(mv, n).prop_map(move |w| (Modulus::new(mv).unwrap(), w)))
}

fn admissible_primes() -> Vec<(u64, u64)> {
    (11..400u64)
        .filter(|&p| is_prime(p))
        .filter_map(|p| (5..p).find(|&l| is_prime(l) && (p - 1) % l == 0).map(|l| (p, l)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_principal_minor_counts_weighted_trees((m, w) in weighted_graph()) {
        let brute = spanning_tree_bruteforce(&w, m, 8).unwrap();
        let lap = laplacian(&w, m);
        for i in 0..w.len() {
            prop_assert_eq!(minor_det(&lap, i, i, m).unwrap(), brute);
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero((m, w) in weighted_graph()) {
        let lap = laplacian(&w, m);
        for i in 0..w.len() {
            prop_assert_eq!(lap.row(i).iter().fold(0, |acc, &x| m.add(acc, x)), 0);
        }
    }

    #[test]
    fn dlog_is_a_homomorphism_onto_z_mod_r(
        k in 0..admissible_primes().len(),
        a in 1..u64::MAX,
        b in 1..u64::MAX,
    ) {
        let (p, ell) = admissible_primes()[k];
        let ctx = PrimeContext::new(p, ell, 1).unwrap();
        let (x, y) = (a % (p - 1) + 1, b % (p - 1) + 1);
        let (lx, ly) = (ctx.dlog(x).unwrap(), ctx.dlog(y).unwrap());
        prop_assert_eq!(ctx.dlog(x * y % p).unwrap(), (lx + ly) % ctx.r);
        let e = a % (p - 1);
        prop_assert_eq!(ctx.dlog(pow_mod(ctx.g, e, p)).unwrap(), e % ctx.r);
    }
}

#[test]
fn tree_weights_are_symmetric_with_zero_diagonal() {
    for (p, ell) in [(61u64, 5u64), (181, 5), (157, 13)] {
        let ctx = PrimeContext::new(p, ell, 1).unwrap();
        let ss = SupersingularData::new(&ctx).unwrap();
        let w = tree_weights(&ctx, &ss.set).unwrap();
        for i in 0..w.len() {
            assert_eq!(w[i][i], 0);
            for j in 0..w.len() {
                assert_eq!(w[i][j], w[j][i]);
            }
        }
    }
}
