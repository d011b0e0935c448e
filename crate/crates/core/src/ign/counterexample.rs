use super::{Activation, BasisKind, IgnModel, LayerSpec, OutputMode};
use crate::error::{bail, Result};
use crate::partitions::Partition;
use crate::scalar::Scalar;

/// Network that separates graphons bounded by `c_max` from their 0-1
/// samples.
///
/// The first layer subtracts a threshold `t = c_max + margin (1 - c_max)`
/// from every adjacency entry, ReLU keeps only entries above `t`, and the
/// readout averages the off-diagonal entries. Any weight matrix with entries
/// at most `c_max` maps to 0, while a 0-1 sample maps to about
/// `(1 - t) * edge density`.
pub fn counterexample_ign<T: Scalar>(c_max: f64, threshold_margin: f64) -> Result<IgnModel<T>> {
    if !(c_max > 0.0 && c_max < 1.0) {
        bail!(Argument, "c_max must lie in (0, 1), got {c_max}");
    }
    if !(threshold_margin > 0.0 && threshold_margin < 1.0) {
        bail!(Argument, "threshold margin must lie in (0, 1), got {threshold_margin}");
    }
    let t = T::of(c_max + threshold_margin * (1.0 - c_max));
    let p = |s: &str| s.parse::<Partition>();

    let mut shift = LayerSpec::<T>::zeros(2, 2, 1, 1)?.with_basis(BasisKind::Strict);
    shift.set_coeff(&p("{{1,3},{2,4}}")?, 0, 0, T::one())?;
    shift.set_coeff(&p("{{1,2,3,4}}")?, 0, 0, T::one())?;
    shift.set_bias(&p("{{1,2}}")?, 0, -t)?;
    shift.set_bias(&p("{{1},{2}}")?, 0, -t)?;

    let mut readout = LayerSpec::<T>::zeros(2, 0, 1, 1)?;
    readout.set_coeff(&p("{{1},{2}}")?, 0, 0, T::one())?;

    Ok(IgnModel { layers: vec![shift, readout], activation: Activation::Relu, output: OutputMode::Invariant })
}

/// Large-`n` value of the network on 0-1 samples of a graphon with mean edge
/// probability `p_bar`.
pub fn counterexample_limit(c_max: f64, threshold_margin: f64, p_bar: f64) -> f64 {
    (1.0 - c_max) * (1.0 - threshold_margin) * p_bar
}
