//! Change of basis between strict-pattern operators `T` and weak-pattern
//! operators `W` (equal values inside blocks, no constraint across blocks).
//!
//! A tuple weakly matching `gamma` strictly matches exactly one partition
//! obtained by merging blocks of `gamma`, so
//! `W_gamma = sum_beta n^{|S1(beta)| - |S1(gamma)|} T_beta`
//! over those merged partitions `beta`. Möbius inversion on the partition
//! lattice gives the reverse direction.

use crate::error::{bail, Result};
use crate::partitions::{merges, mobius, partitions_of, Partition};
use crate::scalar::Scalar;

/// `coefficient * n^n_power` times the operator for `partition`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub partition: Partition,
    pub coefficient: i64,
    pub n_power: i32,
}

impl Term {
    pub fn value<T: Scalar>(&self, n: usize) -> T {
        T::of(self.coefficient as f64) * T::of_usize(n).powi(self.n_power)
    }
}

fn reduction_blocks(p: &Partition, l: usize) -> i32 {
    p.blocks().iter().filter(|b| b.iter().all(|&e| e <= l)).count() as i32
}

fn check(p: &Partition, l: usize, m: usize) -> Result<()> {
    if p.k() != l + m {
        bail!(Argument, "partition covers [{}], expected [{}]", p.k(), l + m);
    }
    if l + m > super::MAX_ORDER_SUM {
        bail!(Bounds, "l + m = {} exceeds {}", l + m, super::MAX_ORDER_SUM);
    }
    Ok(())
}

/// Strict operators summing to the weak operator for `gamma`. Coefficients
/// are all 1; the `n` powers account for the different normalizations.
pub fn weak_from_strict(gamma: &Partition, l: usize, m: usize) -> Result<Vec<Term>> {
    check(gamma, l, m)?;
    let s = reduction_blocks(gamma, l);
    Ok(partitions_of(l + m)
        .into_iter()
        .filter(|beta| merges(beta, gamma))
        .map(|beta| {
            let n_power = reduction_blocks(&beta, l) - s;
            Term { partition: beta, coefficient: 1, n_power }
        })
        .collect())
}

/// Weak operators whose combination equals the strict operator for `beta`.
pub fn strict_from_weak(beta: &Partition, l: usize, m: usize) -> Result<Vec<Term>> {
    check(beta, l, m)?;
    let s = reduction_blocks(beta, l);
    Ok(partitions_of(l + m)
        .into_iter()
        .filter(|gamma| merges(gamma, beta))
        .map(|gamma| Term {
            coefficient: mobius(beta, &gamma),
            n_power: reduction_blocks(&gamma, l) - s,
            partition: gamma,
        })
        .collect())
}

/// Rewrites `sum_beta c[beta] T_beta` as `sum_gamma w[gamma] W_gamma` at axis
/// size `n`. Both vectors follow canonical partition order.
pub fn strict_to_weak_coeffs<T: Scalar>(l: usize, m: usize, n: usize, strict: &[T]) -> Result<Vec<T>> {
    let parts = partitions_of(l + m);
    if strict.len() != parts.len() {
        bail!(Shape, "{} coefficients for {} partitions", strict.len(), parts.len());
    }
    let mut weak = vec![T::zero(); parts.len()];
    for (b, beta) in parts.iter().enumerate() {
        if strict[b] == T::zero() {
            continue;
        }
        for term in strict_from_weak(beta, l, m)? {
            let g = index_of(&parts, &term.partition);
            weak[g] += strict[b] * term.value::<T>(n);
        }
    }
    Ok(weak)
}

/// Inverse of [`strict_to_weak_coeffs`].
pub fn weak_to_strict_coeffs<T: Scalar>(l: usize, m: usize, n: usize, weak: &[T]) -> Result<Vec<T>> {
    let parts = partitions_of(l + m);
    if weak.len() != parts.len() {
        bail!(Shape, "{} coefficients for {} partitions", weak.len(), parts.len());
    }
    let mut strict = vec![T::zero(); parts.len()];
    for (g, gamma) in parts.iter().enumerate() {
        if weak[g] == T::zero() {
            continue;
        }
        for term in weak_from_strict(gamma, l, m)? {
            let b = index_of(&parts, &term.partition);
            strict[b] += weak[g] * term.value::<T>(n);
        }
    }
    Ok(strict)
}

fn index_of(parts: &[Partition], p: &Partition) -> usize {
    parts.iter().position(|q| q == p).expect("partition from the same enumeration")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn identity_expands_to_two_strict_ops() {
        let terms = weak_from_strict(&p("{{1,3},{2,4}}"), 2, 2).unwrap();
        let parts: Vec<String> = terms.iter().map(|t| t.partition.to_string()).collect();
        assert_eq!(parts, vec!["{{1,2,3,4}}", "{{1,3},{2,4}}"]);
        assert!(terms.iter().all(|t| t.n_power == 0));
    }

    #[test]
    fn whole_partition_is_its_own_expansion() {
        let terms = weak_from_strict(&Partition::whole(4), 2, 2).unwrap();
        assert_eq!(terms.len(), 1);
    }

    #[test]
    fn total_average_touches_everything() {
        let terms = weak_from_strict(&Partition::singletons(4), 2, 2).unwrap();
        assert_eq!(terms.len(), 15);
        // {{1,2},{3},{4}} keeps one reduction block out of two
        let t = terms.iter().find(|t| t.partition == p("{{1,2},{3},{4}}")).unwrap();
        assert_eq!(t.n_power, -1);
    }

    #[test]
    fn coefficient_maps_are_inverse() {
        let c: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let w = strict_to_weak_coeffs(2, 2, 7, &c).unwrap();
        let back = weak_to_strict_coeffs(2, 2, 7, &w).unwrap();
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
