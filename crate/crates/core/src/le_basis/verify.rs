//! Self-check of the operator code: the fast executor against the brute-force
//! matrices, permutation equivariance, linearity, the closed-form tables, and
//! stability under the partition norm.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{apply_basis, basis_ops, build_basis_matrix, closed_form_2ign, table_orders, table_partition, table_rows};
use super::{weak_from_strict, LEBasisOp};
use crate::error::{bail, Result};
use crate::tensor::{partition_norm, permute, KTensor, NormKind};

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Every `(l, m)` with `1 <= l + m <= max_order_sum` is checked.
    pub max_order_sum: usize,
    pub sizes: Vec<usize>,
    /// Random tensors per operator and size for the oracle, equivariance and
    /// linearity checks.
    pub samples: usize,
    /// Random tensors per order pair for the stability checks.
    pub stability_samples: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { max_order_sum: 5, sizes: vec![2, 3, 4], samples: 20, stability_samples: 200, tolerance: 1e-10, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// Largest error seen; for stability checks the largest excess over the
    /// bound (negative when every case is inside it).
    pub max_error: f64,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check { name, cases: 0, violations: 0, max_error: f64::NEG_INFINITY }
    }

    fn record(&mut self, err: f64, tol: f64) {
        self.cases += 1;
        self.max_error = self.max_error.max(err);
        if !(err <= tol) {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn random(rng: &mut ChaCha8Rng, order: usize, n: usize) -> KTensor<f64> {
    KTensor::from_fn(order, n, 1, |_, _| rng.gen_range(-1.0..1.0))
}

fn max_abs_diff(a: &KTensor<f64>, b: &KTensor<f64>) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn order_pairs(max: usize, min_each: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for l in min_each..=max {
        for m in min_each..=max {
            if (1..=max).contains(&(l + m)) {
                out.push((l, m));
            }
        }
    }
    out
}

/// Runs every check. Stability uses the largest configured size for
/// `l + m < 5` and the smallest size above 2 otherwise, which keeps the
/// default run in seconds.
pub fn verify_basis(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) || cfg.max_order_sum == 0 {
        bail!(Argument, "need positive sizes and a positive order sum");
    }
    let tol = cfg.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut oracle = Check::new("oracle");
    let mut equiv = Check::new("equivariance");
    let mut linear = Check::new("linearity");

    for (l, m) in order_pairs(cfg.max_order_sum, 0) {
        for &n in &cfg.sizes {
            for op in basis_ops(l, m)? {
                let mat = build_basis_matrix(op.gamma(), l, m, n)?;
                for _ in 0..cfg.samples {
                    let x = random(&mut rng, l, n);
                    let y = apply_basis(&op, &x)?;
                    oracle.record(max_abs_diff(&y, &mat.apply(&x, m)?), tol);

                    let mut sigma: Vec<usize> = (0..n).collect();
                    sigma.shuffle(&mut rng);
                    let lhs = apply_basis(&op, &permute(&x, &sigma)?)?;
                    equiv.record(max_abs_diff(&lhs, &permute(&y, &sigma)?), tol);

                    let z = random(&mut rng, l, n);
                    let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    let lhs = apply_basis(&op, &x.scale(a).add(&z.scale(b))?)?;
                    let rhs = y.scale(a).add(&apply_basis(&op, &z)?.scale(b))?;
                    linear.record(max_abs_diff(&lhs, &rhs), tol);
                }
            }
        }
    }

    let mut tables = Check::new("tables");
    let mut closed_norm = Check::new("closed-form-norm");
    for table in 1..=3 {
        let (l, m) = table_orders(table)?;
        for row in 1..=table_rows(table)?.len() {
            let gamma = table_partition(table, row)?;
            let terms = weak_from_strict(&gamma, l, m)?;
            for &n in &cfg.sizes {
                for _ in 0..cfg.samples {
                    let x = random(&mut rng, l, n);
                    let closed = closed_form_2ign(table, row, &x)?;
                    let mut sum = KTensor::zeros(m, n, 1);
                    for t in &terms {
                        sum = sum.add(&apply_basis(&LEBasisOp::new(t.partition.clone(), l, m)?, &x)?.scale(t.value(n)))?;
                    }
                    tables.record(max_abs_diff(&closed, &sum), tol);
                    for kind in [NormKind::L2, NormKind::Linf] {
                        let bound = partition_norm(&x, kind)?.max_component();
                        let got = partition_norm(&closed, kind)?.max_component();
                        closed_norm.record(got - bound, 1e-9);
                    }
                }
            }
        }
    }

    let eps = 0.3;
    let big = *cfg.sizes.iter().max().expect("non-empty");
    let small = cfg.sizes.iter().copied().filter(|&n| n > 2).min().unwrap_or(big);
    let mut stab = [Check::new("stability-l2"), Check::new("stability-linf")];
    for (l, m) in order_pairs(cfg.max_order_sum, 1) {
        let n = if l + m >= 5 { small } else { big };
        let ops = basis_ops(l, m)?;
        for _ in 0..cfg.stability_samples {
            let x = random(&mut rng, l, n);
            for (check, kind) in stab.iter_mut().zip([NormKind::L2, NormKind::Linf]) {
                let xs = x.scale(eps / partition_norm(&x, kind)?.max_component());
                for op in &ops {
                    let y = partition_norm(&apply_basis(op, &xs)?, kind)?;
                    check.record(y.max_component() - eps, 1e-9);
                }
            }
        }
    }

    let mut checks = vec![oracle, equiv, linear, tables, closed_norm];
    checks.extend(stab);
    Ok(VerifyReport { checks })
}
