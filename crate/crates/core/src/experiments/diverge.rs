use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::graphon::{sample_bernoulli, GraphonModel};
use crate::ign::{counterexample_ign, counterexample_limit, forward};
use crate::metrics::median;
use crate::rng::{derive_seed, label_id};
use crate::tensor::KTensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceConfig {
    pub graphon: GraphonModel,
    pub sizes: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Threshold base; defaults to the graphon's maximum value.
    #[serde(default)]
    pub c_max: Option<f64>,
    #[serde(default = "half")]
    pub margin: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub n: usize,
    pub median_gap: f64,
    pub mean_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport {
    pub rows: Vec<DivergenceRow>,
    pub c_max: f64,
    pub margin: f64,
    /// Mean edge probability of the graphon.
    pub p_bar: f64,
    /// Large-`n` value of the gap.
    pub limit: f64,
}

/// Output gap of the thresholding network between 0-1 samples and the
/// weighted graphs at the same latents. The weighted output is exactly 0
/// whenever `W <= c_max`; the 0-1 output stays near the limit for every `n`.
pub fn divergence_demo(cfg: &DivergenceConfig) -> Result<DivergenceReport> {
    cfg.graphon.validate()?;
    if cfg.trials == 0 || cfg.sizes.is_empty() {
        bail!(Argument, "need at least one size and one trial");
    }
    let c_max = cfg.c_max.unwrap_or_else(|| {
        let m = cfg.graphon.max_value();
        if m > 0.0 { m } else { 0.5 }
    });
    let model = counterexample_ign::<f64>(c_max, cfg.margin)?;
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let mut gaps = Vec::with_capacity(cfg.trials);
        for t in 0..cfg.trials {
            let seed = derive_seed(&[cfg.base_seed, label_id("diverge"), n as u64, t as u64]);
            let g = sample_bernoulli(&cfg.graphon, None, n, seed, false)?;
            let weighted = KTensor::from_fn(2, n, 1, |idx, _| cfg.graphon.eval(g.latents[idx[0]], g.latents[idx[1]]));
            let a = forward(&model, &g.weights)?.data()[0];
            let b = forward(&model, &weighted)?.data()[0];
            gaps.push((a - b).abs());
        }
        rows.push(DivergenceRow {
            n,
            median_gap: median(&gaps).expect("trials >= 1"),
            mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
        });
    }
    let p_bar = cfg.graphon.mean_value();
    Ok(DivergenceReport { rows, c_max, margin: cfg.margin, p_bar, limit: counterexample_limit(c_max, cfg.margin, p_bar) })
}
