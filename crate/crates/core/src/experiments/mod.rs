//! Error-versus-size experiments: feed graphs sampled from a graphon through
//! a fixed model and compare with the model's output on the graphon itself.
//!
//! Four input regimes are measured:
//! - `ew-fixed`: weights `W(i/n, j/n)` on the deterministic grid,
//! - `ew-random`: weights `W(u_i, u_j)` at sorted uniform latents,
//! - `ep-raw`: 0-1 edges drawn with probability `W(u_i, u_j)`,
//! - `ep-smoothed`: the same 0-1 graph after neighborhood smoothing.
//!
//! `ep-raw` and `ep-smoothed` share their Bernoulli samples trial by trial.

mod diverge;
mod model;
mod plot;

pub use diverge::{divergence_demo, DivergenceConfig, DivergenceReport, DivergenceRow};
pub use model::{BuiltModel, ModelRecord};
pub use plot::{plot_series, write_plot_csv, write_plot_svg, PlotPoint, GUIDE_RATES};

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::graphon::{sample_bernoulli, sample_fixed, sample_random_weights, GraphonModel, SampledGraph, Signal};
use crate::ign::{Arch, BasisKind, OutputMode};
use crate::metrics::{loglog_slope, median, mse_u, ErrorRecord};
use crate::rng::{derive_seed, label_id};
use crate::smoothing::{d_2inf, neighborhood_smoothing, SmoothingConfig};
use crate::tensor::KTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    EwFixed,
    EwRandom,
    EpRaw,
    EpSmoothed,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::EwFixed, Mode::EwRandom, Mode::EpRaw, Mode::EpSmoothed];

    pub fn name(self) -> &'static str {
        match self {
            Mode::EwFixed => "ew-fixed",
            Mode::EwRandom => "ew-random",
            Mode::EpRaw => "ep-raw",
            Mode::EpSmoothed => "ep-smoothed",
        }
    }

    /// Label keying the trial seeds. Both edge-probability modes use the same
    /// label so that they see identical samples.
    fn seed_label(self) -> &'static str {
        match self {
            Mode::EpRaw | Mode::EpSmoothed => "ep",
            m => m.name(),
        }
    }

    fn is_deterministic(self) -> bool {
        self == Mode::EwFixed
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown mode '{s}' (ew-fixed, ew-random, ep-raw, ep-smoothed)")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundTruthMode {
    /// The model on the deterministic grid sample of size `n_ref`.
    #[default]
    Grid,
    /// Mean output over `ground_truth_trials` random-latent samples of size
    /// `n_ref` (invariant outputs only).
    RandomAveraged,
}

/// Experiment description, read from a TOML file. Every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default = "ten")]
    pub trials: usize,
    #[serde(default = "default_n_ref")]
    pub n_ref: usize,
    #[serde(default)]
    pub ground_truth: GroundTruthMode,
    #[serde(default = "ten")]
    pub ground_truth_trials: usize,
    /// Whether the model reads a node signal next to the adjacency.
    #[serde(default = "yes")]
    pub with_signal: bool,
    #[serde(default = "identity")]
    pub signal: Signal,
    /// Zero the diagonal of Bernoulli samples instead of drawing self-loops.
    #[serde(default)]
    pub zero_diagonal: bool,
    #[serde(default)]
    pub smoothing: SmoothingConfig,
    #[serde(default = "default_graphons")]
    pub graphons: Vec<GraphonModel>,
    #[serde(default)]
    pub model: ModelRecord,
}

fn default_sizes() -> Vec<usize> {
    vec![32, 64, 128, 256, 512, 1024]
}

fn default_modes() -> Vec<Mode> {
    Mode::ALL.to_vec()
}

fn ten() -> usize {
    10
}

fn default_n_ref() -> usize {
    2048
}

fn yes() -> bool {
    true
}

fn identity() -> Signal {
    Signal::Identity
}

fn default_graphons() -> Vec<GraphonModel> {
    vec![GraphonModel::default_sbm(), GraphonModel::LipschitzAffine, GraphonModel::PiecewiseMod]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    /// The convergence figure setup: adjacency input only, strict-basis model
    /// with seed 1. `configs/convergence.toml` holds the same values.
    pub fn convergence_figure() -> Self {
        let arch = Arch { in_channels: 1, basis: BasisKind::Strict, ..Arch::default() };
        ExperimentConfig {
            with_signal: false,
            model: ModelRecord::Ign { seed: 1, a2: 1.0, arch },
            ..Self::default()
        }
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    /// Checks everything that can be checked before computing, and reports
    /// every problem at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.sizes.is_empty() {
            errs.push("sizes must not be empty".to_string());
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            errs.push(format!("sizes must be strictly ascending, got {:?}", self.sizes));
        }
        let min_size = if self.modes.contains(&Mode::EpSmoothed) { 8 } else { 2 };
        if let Some(&s) = self.sizes.iter().find(|&&s| s < min_size) {
            errs.push(format!("size {s} below the minimum {min_size}"));
        }
        if self.trials == 0 {
            errs.push("trials must be at least 1".into());
        }
        let max = self.sizes.iter().copied().max().unwrap_or(0);
        if self.n_ref < 2 * max || self.n_ref < 256 {
            errs.push(format!("n_ref {} must be at least 256 and twice the largest size {max}", self.n_ref));
        }
        if self.modes.is_empty() {
            errs.push("modes must not be empty".into());
        }
        let mut seen = self.modes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.modes.len() {
            errs.push("modes must not repeat".into());
        }
        if self.ground_truth == GroundTruthMode::RandomAveraged && self.ground_truth_trials == 0 {
            errs.push("ground_truth_trials must be at least 1".into());
        }
        if self.graphons.is_empty() {
            errs.push("graphons must not be empty".into());
        }
        for (i, g) in self.graphons.iter().enumerate() {
            if let Err(e) = g.validate() {
                errs.push(format!("graphons[{i}]: {e}"));
            }
        }
        if let Err(e) = self.signal.validate() {
            errs.push(format!("signal: {e}"));
        }
        if let Err(e) = self.smoothing.validate() {
            errs.push(format!("smoothing: {e}"));
        }
        match self.model.build() {
            Err(e) => errs.push(format!("model: {e}")),
            Ok(m) => {
                let want = self.with_signal as usize;
                if m.signal_channels() != want {
                    errs.push(format!(
                        "model reads {} signal channel(s) but with_signal = {}",
                        m.signal_channels(), self.with_signal
                    ));
                }
                if m.output_mode() == OutputMode::Equivariant && self.ground_truth == GroundTruthMode::RandomAveraged {
                    errs.push("random-averaged ground truth needs an invariant model".into());
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn signal(&self) -> Option<&Signal> {
        self.with_signal.then_some(&self.signal)
    }

    /// Column labels for the graphons, made unique by index when kinds repeat.
    pub fn graphon_labels(&self) -> Vec<String> {
        let kinds: Vec<&str> = self.graphons.iter().map(|g| g.kind_name()).collect();
        kinds
            .iter()
            .enumerate()
            .map(|(i, k)| if kinds.iter().filter(|o| *o == k).count() > 1 { format!("{k}-{i}") } else { k.to_string() })
            .collect()
    }
}

/// Seed for one trial, derived from the base seed and the trial's coordinates.
pub fn trial_seed(base: u64, graphon: usize, mode: Mode, n: usize, trial: usize) -> u64 {
    derive_seed(&[base, graphon as u64, label_id(mode.seed_label()), n as u64, trial as u64])
}

/// A per-curve statistic: a median at one size, or a log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model_id: String,
    pub graphon: String,
    pub mode: String,
    pub metric: String,
    pub statistic: String,
    pub n: Option<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<ErrorRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutput {
    /// Median of `metric` at each size for one curve, in size order.
    pub fn medians(&self, graphon: &str, mode: Mode, metric: &str) -> Vec<(usize, f64)> {
        self.summary
            .iter()
            .filter(|r| r.graphon == graphon && r.mode == mode.name() && r.metric == metric && r.statistic == "median")
            .map(|r| (r.n.expect("medians carry a size"), r.value))
            .collect()
    }

    pub fn slope(&self, graphon: &str, mode: Mode, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.graphon == graphon && r.mode == mode.name() && r.metric == metric && r.statistic == "slope")
            .map(|r| r.value)
    }
}

/// Output-space metric name for a model's readout.
pub fn primary_metric(mode: OutputMode) -> &'static str {
    match mode {
        OutputMode::Invariant => "output_l2",
        OutputMode::Equivariant => "mse_u",
    }
}

enum Truth {
    Invariant(KTensor<f64>),
    /// Node outputs on the grid `t / n_ref`.
    Equivariant(KTensor<f64>),
}

fn ground_truth(cfg: &ExperimentConfig, model: &BuiltModel, w: &GraphonModel, gidx: usize) -> Result<Truth> {
    let x = cfg.signal();
    let grid = || -> Result<KTensor<f64>> {
        let g = sample_fixed(w, x, cfg.n_ref)?;
        model.forward(&g.weights, g.signal.as_ref())
    };
    Ok(match (model.output_mode(), cfg.ground_truth) {
        (OutputMode::Equivariant, _) => Truth::Equivariant(grid()?),
        (OutputMode::Invariant, GroundTruthMode::Grid) => Truth::Invariant(grid()?),
        (OutputMode::Invariant, GroundTruthMode::RandomAveraged) => {
            let mut acc: Option<KTensor<f64>> = None;
            for t in 0..cfg.ground_truth_trials {
                let seed = derive_seed(&[cfg.base_seed, gidx as u64, label_id("ground-truth"), t as u64]);
                let g = sample_random_weights(w, x, cfg.n_ref, seed)?;
                let y = model.forward(&g.weights, g.signal.as_ref())?;
                acc = Some(match acc {
                    None => y,
                    Some(a) => a.add(&y)?,
                });
            }
            Truth::Invariant(acc.expect("at least one trial").scale(1.0 / cfg.ground_truth_trials as f64))
        }
    })
}

fn output_error(truth: &Truth, y: &KTensor<f64>, latents: &[f64]) -> Result<f64> {
    match truth {
        Truth::Invariant(t) => {
            // order-0 outputs remember their graph size; compare the vectors
            if t.channels() != y.channels() || y.order() != 0 {
                bail!(Shape, "invariant outputs differ in shape");
            }
            Ok(t.data().iter().zip(y.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        }
        Truth::Equivariant(t) => {
            let (n, n_ref) = (latents.len(), t.n());
            let scale = (n as f64).powf(-0.5);
            let f = KTensor::from_fn(1, n, t.channels(), |idx, c| {
                let node = ((latents[idx[0]] * n_ref as f64).floor() as usize).min(n_ref - 1);
                scale * t.get(&[node], c)
            });
            mse_u(&f, y)
        }
    }
}

fn sample(cfg: &ExperimentConfig, w: &GraphonModel, mode: Mode, n: usize, seed: u64) -> Result<SampledGraph> {
    let x = cfg.signal();
    let g = match mode {
        Mode::EwFixed => sample_fixed(w, x, n)?,
        Mode::EwRandom => sample_random_weights(w, x, n, seed)?,
        Mode::EpRaw | Mode::EpSmoothed => sample_bernoulli(w, x, n, seed, cfg.zero_diagonal)?,
    };
    if mode == Mode::EpSmoothed {
        let p = neighborhood_smoothing(&g.weights, &cfg.smoothing)?;
        return g.with_weights(p);
    }
    Ok(g)
}

/// Runs every (graphon, mode, size, trial) cell of the config and
/// summarizes each curve by per-size medians and a log-log slope.
///
/// Records come out in a fixed order (graphon, mode, size, trial, metric),
/// so identical configs give identical output.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let model_id = cfg.model.id();
    let metric = primary_metric(model.output_mode());
    let labels = cfg.graphon_labels();
    let mut modes = cfg.modes.clone();
    modes.sort();

    let mut records = Vec::new();
    for (gidx, (w, label)) in cfg.graphons.iter().zip(&labels).enumerate() {
        let truth = ground_truth(cfg, &model, w, gidx)?;
        for &mode in &modes {
            for &n in &cfg.sizes {
                let trials = if mode.is_deterministic() { 1 } else { cfg.trials };
                for trial in 0..trials {
                    let seed = if mode.is_deterministic() { 0 } else { trial_seed(cfg.base_seed, gidx, mode, n, trial) };
                    let g = sample(cfg, w, mode, n, seed)?;
                    let y = model.forward(&g.weights, g.signal.as_ref())?;
                    let mut push = |metric: &str, value: f64| {
                        records.push(ErrorRecord {
                            model_id: model_id.clone(),
                            graphon: label.clone(),
                            mode: mode.name().into(),
                            n,
                            seed,
                            metric: metric.into(),
                            value,
                        })
                    };
                    push(metric, output_error(&truth, &y, &g.latents)?);
                    if matches!(mode, Mode::EpRaw | Mode::EpSmoothed) {
                        let p = KTensor::from_fn(2, n, 1, |idx, _| w.eval(g.latents[idx[0]], g.latents[idx[1]]));
                        push("input_d2inf", d_2inf(&g.weights, &p)?);
                        push("input_l2", g.weights.sub(&p)?.frobenius() / n as f64);
                    }
                }
            }
        }
    }
    let summary = summarize(&records);
    Ok(ExperimentOutput { records, summary })
}

/// Per-size medians and the log-log slope of the medians for every
/// (model, graphon, mode, metric) curve. Slopes are omitted when fewer than
/// three sizes exist or some median is zero.
pub fn summarize(records: &[ErrorRecord]) -> Vec<SummaryRow> {
    let mut curves: BTreeMap<(String, String, String, String), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in records {
        let key = (r.model_id.clone(), r.graphon.clone(), r.mode.clone(), r.metric.clone());
        if !curves.contains_key(&key) {
            order.push(key.clone());
        }
        curves.entry(key).or_default().entry(r.n).or_default().push(r.value);
    }
    let mut rows = Vec::new();
    for key in order {
        let (model_id, graphon, mode, metric) = key.clone();
        let row = |statistic: &str, n: Option<usize>, value: f64| SummaryRow {
            model_id: model_id.clone(),
            graphon: graphon.clone(),
            mode: mode.clone(),
            metric: metric.clone(),
            statistic: statistic.into(),
            n,
            value,
        };
        let mut pts = Vec::new();
        for (&n, vals) in &curves[&key] {
            let m = median(vals).expect("non-empty");
            rows.push(row("median", Some(n), m));
            pts.push((n as f64, m));
        }
        if let Ok(s) = loglog_slope(&pts) {
            rows.push(row("slope", None, s));
        }
    }
    rows
}

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SNAPSHOT_FILE: &str = "config.snapshot";

/// Writes `records.csv`, `summary.csv` and `config.snapshot` into `dir`.
pub fn write_outputs(dir: impl AsRef<Path>, cfg: &ExperimentConfig, out: &ExperimentOutput) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_csv(dir.join(RECORDS_FILE), &out.records)?;
    write_csv(dir.join(SUMMARY_FILE), &out.summary)?;
    fs::write(dir.join(SNAPSHOT_FILE), cfg.to_toml()?)?;
    Ok(())
}

fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ErrorRecord>> {
    read_csv(path)
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    read_csv(path)
}

/// Fails unless `a` and `b` hold the same records in the same order.
pub fn check_identical(a: &[ErrorRecord], b: &[ErrorRecord]) -> Result<()> {
    if a.len() != b.len() {
        bail!(Validation, "record counts differ: {} vs {}", a.len(), b.len());
    }
    if let Some(i) = a.iter().zip(b).position(|(x, y)| x != y) {
        bail!(Validation, "records differ at row {i}: {:?} vs {:?}", a[i], b[i]);
    }
    Ok(())
}
