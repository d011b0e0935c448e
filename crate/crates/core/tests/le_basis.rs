mod common;

use common::{max_diff, random_permutation, random_tensor, rng};
use ign_core::le_basis::{
    apply_basis, basis_ops, build_basis_matrix, build_weak_matrix, closed_form_2ign, table_orders, table_partition,
    table_rows, weak_from_strict, LEBasisOp,
};
use ign_core::tensor::{partition_norm, permute, NormKind};
use ign_core::{KTensor, Partition};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn order_pairs() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for l in 1..=3 {
        for m in 1..=3 {
            if l + m <= 5 {
                out.push((l, m));
            }
        }
    }
    out
}

#[test]
fn executor_matches_matrix_oracle() {
    let mut r = rng(1);
    for (l, m) in order_pairs().into_iter().chain([(2, 0), (3, 0)]) {
        for n in 2..=4 {
            for op in basis_ops(l, m).unwrap() {
                let mat = build_basis_matrix(op.gamma(), l, m, n).unwrap();
                for _ in 0..20 {
                    let x = random_tensor(&mut r, l, n, 1);
                    let fast = apply_basis(&op, &x).unwrap();
                    let slow = mat.apply(&x, m).unwrap();
                    assert!(max_diff(&fast, &slow) <= 1e-10, "{} l={l} m={m} n={n}", op.gamma());
                }
            }
        }
    }
}

#[test]
fn operator_count_and_independence() {
    for (l, m) in order_pairs() {
        let ops = basis_ops(l, m).unwrap();
        assert_eq!(ops.len() as u64, ign_core::bell(l + m).unwrap());
        let n = l + m;
        let size = n.pow((l + m) as u32);
        let cols: Vec<f64> = ops
            .iter()
            .flat_map(|op| build_basis_matrix(op.gamma(), l, m, n).unwrap().data.clone())
            .collect();
        let mat = DMatrix::from_column_slice(size, ops.len(), &cols);
        assert_eq!(mat.rank(1e-9), ops.len(), "l={l} m={m}");
    }
}

#[test]
fn identity_is_a_sum_of_two_strict_operators() {
    let mut r = rng(2);
    let id = LEBasisOp::new("{{1,3},{2,4}}".parse().unwrap(), 2, 2).unwrap();
    let diag = LEBasisOp::new(Partition::whole(4), 2, 2).unwrap();
    for _ in 0..10 {
        let x = random_tensor(&mut r, 2, 3, 1);
        let a = build_basis_matrix(id.gamma(), 2, 2, 3).unwrap().apply(&x, 2).unwrap();
        let b = build_basis_matrix(diag.gamma(), 2, 2, 3).unwrap().apply(&x, 2).unwrap();
        assert!(max_diff(&a.add(&b).unwrap(), &x) < 1e-12);
    }
}

#[test]
fn weak_expansion_matches_weak_oracle() {
    for (l, m) in order_pairs().into_iter().filter(|(l, m)| l + m <= 4) {
        for n in [2, 3] {
            for op in basis_ops(l, m).unwrap() {
                let weak = build_weak_matrix(op.gamma(), l, m, n).unwrap();
                let mut sum = vec![0.0; weak.data.len()];
                for term in weak_from_strict(op.gamma(), l, m).unwrap() {
                    let s = build_basis_matrix(&term.partition, l, m, n).unwrap();
                    let scale: f64 = term.value(n);
                    for (acc, v) in sum.iter_mut().zip(&s.data) {
                        *acc += scale * v;
                    }
                }
                let err = sum.iter().zip(&weak.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-12, "{} l={l} m={m} n={n}", op.gamma());
            }
        }
    }
}

#[test]
fn table_rows_equal_their_weak_operators() {
    let mut r = rng(3);
    for table in 1..=3 {
        let (l, m) = table_orders(table).unwrap();
        for row in 1..=table_rows(table).unwrap().len() {
            let gamma = table_partition(table, row).unwrap();
            for n in [2, 3, 5] {
                let x = random_tensor(&mut r, l, n, 1);
                let closed = closed_form_2ign(table, row, &x).unwrap();
                let weak = build_weak_matrix(&gamma, l, m, n).unwrap().apply(&x, m).unwrap();
                assert!(max_diff(&closed, &weak) < 1e-12, "table {table} row {row} n={n}");

                let mut strict_sum = KTensor::zeros(m, n, 1);
                for term in weak_from_strict(&gamma, l, m).unwrap() {
                    let op = LEBasisOp::new(term.partition.clone(), l, m).unwrap();
                    let y = apply_basis(&op, &x).unwrap().scale(term.value(n));
                    strict_sum = strict_sum.add(&y).unwrap();
                }
                assert!(max_diff(&closed, &strict_sum) < 1e-12, "table {table} row {row} n={n}");
            }
        }
    }
}

#[test]
fn closed_forms_do_not_expand_the_partition_norm() {
    let mut r = rng(4);
    for table in [1, 3] {
        for row in 1..=table_rows(table).unwrap().len() {
            for _ in 0..50 {
                let n = r.gen_range(2..8);
                let a = random_tensor(&mut r, 2, n, 1);
                let y = closed_form_2ign(table, row, &a).unwrap();
                for kind in [NormKind::L2, NormKind::Linf] {
                    let na = partition_norm(&a, kind).unwrap();
                    let ny = partition_norm(&y, kind).unwrap();
                    assert!(ny.bounded_by(na.max_component(), 1e-9), "table {table} row {row} {kind}");
                }
            }
        }
    }
}

#[test]
fn stability_under_the_partition_norm() {
    let mut r = rng(5);
    let eps = 0.3;
    for (l, m) in order_pairs() {
        let n = if l + m == 5 { 4 } else { 5 };
        let ops = basis_ops(l, m).unwrap();
        for _ in 0..200 {
            let x = random_tensor(&mut r, l, n, 1);
            for kind in [NormKind::L2, NormKind::Linf] {
                let scale = eps / partition_norm(&x, kind).unwrap().max_component();
                let xs = x.scale(scale);
                for op in &ops {
                    let y = apply_basis(op, &xs).unwrap();
                    let ny = partition_norm(&y, kind).unwrap();
                    assert!(ny.bounded_by(eps, 1e-9), "{} l={l} m={m} {kind}: {:?}", op.gamma(), ny.components);
                }
            }
        }
    }
}

use rand::Rng;

fn op_strategy() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=3, 1usize..=3).prop_filter("l + m <= 5", |(l, m)| l + m <= 5).prop_flat_map(|(l, m)| {
        let count = ign_core::bell(l + m).unwrap() as usize;
        (Just(l), Just(m), 0..count)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn operators_commute_with_permutations((l, m, which) in op_strategy(), n in 2usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let op = &basis_ops(l, m).unwrap()[which];
        let x = random_tensor(&mut r, l, n, 1);
        let sigma = random_permutation(&mut r, n);
        let lhs = apply_basis(op, &permute(&x, &sigma).unwrap()).unwrap();
        let rhs = permute(&apply_basis(op, &x).unwrap(), &sigma).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn operators_are_linear((l, m, which) in op_strategy(), n in 2usize..=4, a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let op = &basis_ops(l, m).unwrap()[which];
        let x = random_tensor(&mut r, l, n, 1);
        let y = random_tensor(&mut r, l, n, 1);
        let combo = x.scale(a).add(&y.scale(b)).unwrap();
        let lhs = apply_basis(op, &combo).unwrap();
        let rhs = apply_basis(op, &x).unwrap().scale(a).add(&apply_basis(op, &y).unwrap().scale(b)).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10);
    }
}
