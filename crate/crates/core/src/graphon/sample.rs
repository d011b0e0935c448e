use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraphonModel, Signal};
use crate::error::{bail, Result};
use crate::ign::graph_input;
use crate::tensor::KTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    /// Latents on the grid `0, 1/n, ..., (n-1)/n`; weights are `W` itself.
    DeterministicGrid,
    /// Sorted uniform latents; weights are `W` at the latents.
    RandomLatent { seed: u64 },
    /// Sorted uniform latents; 0-1 edges drawn with probability `W`.
    Bernoulli { seed: u64, zero_diagonal: bool },
}

/// A finite graph drawn from a graphon, with its latent positions and an
/// optional node signal.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGraph {
    pub weights: KTensor<f64>,
    pub latents: Vec<f64>,
    pub signal: Option<KTensor<f64>>,
    pub mode: SampleMode,
}

impl SampledGraph {
    pub fn n(&self) -> usize {
        self.latents.len()
    }

    /// Network input `[A, Diag(x)]`.
    pub fn input(&self) -> Result<KTensor<f64>> {
        graph_input(&self.weights, self.signal.as_ref())
    }

    /// Same graph with different weights (e.g. smoothed estimates).
    pub fn with_weights(&self, weights: KTensor<f64>) -> Result<SampledGraph> {
        if weights.order() != 2 || weights.n() != self.n() || weights.channels() != 1 {
            bail!(Shape, "replacement weights must be a single-channel {0} x {0} matrix", self.n());
        }
        Ok(SampledGraph { weights, ..self.clone() })
    }
}

fn check(w: &GraphonModel, x: Option<&Signal>, n: usize) -> Result<()> {
    if n < 2 {
        bail!(Argument, "need at least 2 nodes, got {n}");
    }
    w.validate()?;
    if let Some(x) = x {
        x.validate()?;
    }
    Ok(())
}

fn evaluate(w: &GraphonModel, x: Option<&Signal>, latents: Vec<f64>, mode: SampleMode) -> SampledGraph {
    let n = latents.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = w.eval(latents[i], latents[j]);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    let weights = KTensor::matrix(n, data).expect("graphon values are finite");
    let signal = x.map(|x| KTensor::vector(latents.iter().map(|&u| x.eval(u)).collect()).expect("finite signal"));
    SampledGraph { weights, latents, signal, mode }
}

fn random_latents(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    u.sort_by(f64::total_cmp);
    u
}

/// Weights `W(u_i, u_j)` on the grid `u_i = (i - 1) / n`, `i = 1..n`.
pub fn sample_fixed(w: &GraphonModel, x: Option<&Signal>, n: usize) -> Result<SampledGraph> {
    check(w, x, n)?;
    let latents = (0..n).map(|i| i as f64 / n as f64).collect();
    Ok(evaluate(w, x, latents, SampleMode::DeterministicGrid))
}

/// Weights `W(u_(i), u_(j))` at sorted i.i.d. uniform latents.
pub fn sample_random_weights(w: &GraphonModel, x: Option<&Signal>, n: usize, seed: u64) -> Result<SampledGraph> {
    check(w, x, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latents = random_latents(&mut rng, n);
    Ok(evaluate(w, x, latents, SampleMode::RandomLatent { seed }))
}

/// 0-1 adjacency with `a_ij ~ Ber(W(u_(i), u_(j)))` independently for
/// `i <= j`, mirrored. Diagonal entries are drawn like any other pair unless
/// `zero_diagonal` is set.
pub fn sample_bernoulli(
    w: &GraphonModel,
    x: Option<&Signal>,
    n: usize,
    seed: u64,
    zero_diagonal: bool,
) -> Result<SampledGraph> {
    check(w, x, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latents = random_latents(&mut rng, n);
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let p = w.eval(latents[i], latents[j]);
            let draw: f64 = rng.gen();
            let edge = if draw < p { 1.0 } else { 0.0 };
            if i == j && zero_diagonal {
                continue;
            }
            data[i * n + j] = edge;
            data[j * n + i] = edge;
        }
    }
    let weights = KTensor::matrix(n, data).expect("0-1 entries");
    let signal = x.map(|x| KTensor::vector(latents.iter().map(|&u| x.eval(u)).collect()).expect("finite signal"));
    Ok(SampledGraph { weights, latents, signal, mode: SampleMode::Bernoulli { seed, zero_diagonal } })
}

/// How a finite graph is lifted back to a step graphon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockMode {
    /// Cells cut at the latent positions: `[0, u_2, ..., u_n, 1]`.
    LatentIntervals,
    /// Equal cells cut at `i / n`.
    EqualBlocks,
}

fn breakpoints(g: &SampledGraph, mode: BlockMode) -> Vec<f64> {
    let n = g.n();
    match mode {
        BlockMode::EqualBlocks => (0..=n).map(|i| i as f64 / n as f64).collect(),
        BlockMode::LatentIntervals => {
            let mut b = Vec::with_capacity(n + 1);
            b.push(0.0);
            b.extend_from_slice(&g.latents[1..]);
            b.push(1.0);
            b
        }
    }
}

/// Step graphon whose cell `(i, j)` carries `weights[i][j]`.
pub fn induce_graphon(g: &SampledGraph, mode: BlockMode) -> GraphonModel {
    let n = g.n();
    let values = (0..n).map(|i| (0..n).map(|j| g.weights.get(&[i, j], 0)).collect()).collect();
    GraphonModel::Grid { breakpoints: breakpoints(g, mode), values }
}

/// Step signal whose cell `i` carries `signal[i]`.
pub fn induce_signal(g: &SampledGraph, mode: BlockMode) -> Result<Signal> {
    let Some(x) = &g.signal else {
        bail!(Argument, "sampled graph carries no signal");
    };
    Ok(Signal::Grid { breakpoints: breakpoints(g, mode), values: x.data().to_vec() })
}
