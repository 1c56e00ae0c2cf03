//! Property tests for the container and kernel invariants.

use bregmf::kernel::KernelSpec;
use bregmf::matrix::{DenseMatrix, FactorPair, MaskedMatrix};
use proptest::prelude::*;

fn small_dim() -> impl Strategy<Value = usize> {
    1usize..6
}

proptest! {
    #[test]
    fn fro_norm_squared_equals_self_inner(
        (r, c) in (small_dim(), small_dim()),
        seed in any::<u64>(),
    ) {
        let m = {
            let mut rng = bregmf::rng::SplitMix64::new(seed);
            DenseMatrix::from_vec(r, c, (0..r * c).map(|_| rng.uniform(-100.0, 100.0)).collect())
                .unwrap()
        };
        let lhs = m.fro_norm() * m.fro_norm();
        let rhs = m.fro_inner(&m).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn gemm_is_associative(
        dims in (small_dim(), small_dim(), small_dim(), small_dim()),
        seed in any::<u64>(),
    ) {
        let (m, k, l, n) = dims;
        let mut rng = bregmf::rng::SplitMix64::new(seed);
        let mut rand = |r: usize, c: usize| {
            DenseMatrix::from_vec(r, c, (0..r * c).map(|_| rng.uniform(-2.0, 2.0)).collect())
                .unwrap()
        };
        let a = rand(m, k);
        let b = rand(k, l);
        let c = rand(l, n);
        let left = a.gemm(&b).unwrap().gemm(&c).unwrap();
        let right = a.gemm(&b.gemm(&c).unwrap()).unwrap();
        let err = left.sub(&right).unwrap().fro_norm();
        prop_assert!(err <= 1e-10 * (1.0 + left.fro_norm()));
    }

    #[test]
    fn masked_file_representation_round_trips(
        rows in 1usize..20,
        cols in 1usize..20,
        seed in any::<u64>(),
    ) {
        let mut rng = bregmf::rng::SplitMix64::new(seed);
        let mut entries = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                if rng.next_f64() < 0.3 {
                    entries.push((i, j, rng.uniform(-1e6, 1e6)));
                }
            }
        }
        let m = MaskedMatrix::from_triples(rows, cols, entries).unwrap();
        let back = MaskedMatrix::from_triples_str(&m.to_triples_string()).unwrap();
        prop_assert_eq!(m.shape(), back.shape());
        prop_assert_eq!(m.len(), back.len());
        for (a, b) in m.entries().iter().zip(back.entries()) {
            prop_assert_eq!((a.0, a.1), (b.0, b.1));
            prop_assert_eq!(a.2.to_bits(), b.2.to_bits());
        }
    }

    #[test]
    fn dense_csv_round_trips((r, c) in (small_dim(), small_dim()), seed in any::<u64>()) {
        let m = {
            let mut rng = bregmf::rng::SplitMix64::new(seed);
            DenseMatrix::from_vec(r, c, (0..r * c).map(|_| rng.uniform(-1e9, 1e9)).collect())
                .unwrap()
        };
        let back = DenseMatrix::from_csv_str(&m.to_csv_string()).unwrap();
        prop_assert_eq!(m, back);
    }

    #[test]
    fn bregman_distance_is_nonnegative_and_symmetrized(
        seed in any::<u64>(),
        c1 in 0.0f64..5.0,
        c2 in 0.0f64..5.0,
    ) {
        let mut rng = bregmf::rng::SplitMix64::new(seed);
        let mut pair = || {
            FactorPair::new(
                DenseMatrix::from_vec(3, 2, (0..6).map(|_| rng.uniform(-2.0, 2.0)).collect())
                    .unwrap(),
                DenseMatrix::from_vec(2, 4, (0..8).map(|_| rng.uniform(-2.0, 2.0)).collect())
                    .unwrap(),
            )
            .unwrap()
        };
        let x = pair();
        let y = pair();
        let k = KernelSpec::new(c1, c2, 0.0, 0.0).unwrap();
        let dxy = k.bregman_distance(&x, &y).unwrap();
        let dyx = k.bregman_distance(&y, &x).unwrap();
        let floor = |a: &FactorPair, b: &FactorPair| {
            -1e-12 * (1.0 + k.value(a).abs() + k.value(b).abs())
        };
        prop_assert!(dxy >= floor(&x, &y));
        prop_assert!(dyx >= floor(&y, &x));
        prop_assert!(dxy + dyx >= 0.0);
    }
}

// Non-proptest invariant: the soft threshold never grows magnitudes and
// keeps signs.
#[test]
fn soft_threshold_is_a_contraction() {
    let mut rng = bregmf::rng::SplitMix64::new(5);
    for _ in 0..200 {
        let m =
            DenseMatrix::from_vec(2, 3, (0..6).map(|_| rng.uniform(-3.0, 3.0)).collect()).unwrap();
        let theta = rng.uniform(0.0, 2.0);
        let s = bregmf::prox::soft_threshold(&m, theta);
        for (a, b) in m.data().iter().zip(s.data()) {
            assert!(b.abs() <= a.abs() + 1e-15);
            assert!(*b == 0.0 || a.signum() == b.signum());
        }
    }
}
