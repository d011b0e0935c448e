mod common;

use common::{max_diff, random_permutation, random_tensor, rng};
use ign_core::partitions::enumerate_partitions;
use ign_core::tensor::{
    embed_slice, invert_permutation, mean_over_axes, partition_norm, permute, replicate, slice, NormKind,
};
use ign_core::KTensor;
use proptest::prelude::*;
use rand::Rng;

const KINDS: [NormKind; 2] = [NormKind::L2, NormKind::Linf];

#[test]
fn diagonal_matrix_norm() {
    let x = KTensor::vector(vec![3.0, 4.0]).unwrap().diag_embed().unwrap();
    let v = partition_norm(&x, NormKind::L2).unwrap();
    assert!((v.components[0] - 5.0 / 2f64.sqrt()).abs() < 1e-12);
    assert!((v.components[1] - 2.5).abs() < 1e-12);
    let z = partition_norm(&KTensor::<f64>::zeros(3, 3, 2), NormKind::L2).unwrap();
    assert!(z.components.iter().all(|&c| c == 0.0));
}

#[test]
fn slices_stay_within_the_bound() {
    let mut r = rng(11);
    for _ in 0..100 {
        let k = r.gen_range(1..=4);
        let n = r.gen_range(2..=4);
        let d = r.gen_range(1..=2);
        let x = random_tensor(&mut r, k, n, d);
        for kind in KINDS {
            let eps = partition_norm(&x, kind).unwrap().max_component();
            for g in enumerate_partitions(k).unwrap() {
                let s = slice(&x, &g).unwrap();
                assert!(partition_norm(&s, kind).unwrap().bounded_by(eps, 1e-12), "{g} {kind}");
            }
        }
    }
}

#[test]
fn averaging_and_replication_never_increase_components() {
    let mut r = rng(12);
    for _ in 0..100 {
        let k = r.gen_range(1..=3);
        let n = r.gen_range(2..=5);
        let x = random_tensor(&mut r, k, n, 1);
        for kind in KINDS {
            let nx = partition_norm(&x, kind).unwrap();
            let eps = nx.max_component();
            let rep = replicate(&x, r.gen_range(1..=2));
            assert!(partition_norm(&rep, kind).unwrap().bounded_by(eps, 1e-9));
            // drop a random non-empty proper subset of axes
            let axes: Vec<usize> = (0..k).filter(|_| r.gen_bool(0.5)).collect();
            if !axes.is_empty() && axes.len() < k {
                let avg = mean_over_axes(&x, &axes).unwrap();
                assert!(partition_norm(&avg, kind).unwrap().bounded_by(eps, 1e-9));
            }
        }
    }
}

#[test]
fn embed_keeps_only_strict_positions() {
    let y = KTensor::matrix(3, (1..=9).map(f64::from).collect()).unwrap();
    let e = embed_slice(&y, &"{{1},{2}}".parse().unwrap()).unwrap();
    for i in 0..3 {
        assert_eq!(e.get(&[i, i], 0), 0.0);
        for j in (0..3).filter(|&j| j != i) {
            assert_eq!(e.get(&[i, j], 0), y.get(&[i, j], 0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_norm_is_a_seminorm_per_component(k in 1usize..=3, n in 2usize..=6, a in -4.0f64..4.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_tensor(&mut r, k, n, 1);
        let y = random_tensor(&mut r, k, n, 1);
        for kind in KINDS {
            let nx = partition_norm(&x, kind).unwrap();
            let ny = partition_norm(&y, kind).unwrap();
            let nax = partition_norm(&x.scale(a), kind).unwrap();
            let nsum = partition_norm(&x.add(&y).unwrap(), kind).unwrap();
            for i in 0..nx.components.len() {
                prop_assert!((nax.components[i] - a.abs() * nx.components[i]).abs() < 1e-9);
                prop_assert!(nsum.components[i] <= nx.components[i] + ny.components[i] + 1e-9);
                prop_assert!(nx.components[i] >= 0.0);
            }
        }
    }

    #[test]
    fn permutations_preserve_the_norm(k in 1usize..=3, n in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_tensor(&mut r, k, n, 2);
        let sigma = random_permutation(&mut r, n);
        let px = permute(&x, &sigma).unwrap();
        for kind in KINDS {
            let a = partition_norm(&x, kind).unwrap();
            let b = partition_norm(&px, kind).unwrap();
            for (u, v) in a.components.iter().zip(&b.components) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
        let back = permute(&px, &invert_permutation(&sigma)).unwrap();
        prop_assert_eq!(max_diff(&back, &x), 0.0);
    }
}
