//! Graphons, graphon signals, and the ways of turning them into finite graphs.

mod operator;
mod sample;

pub use operator::{grid_points, integral_operator, sample_points, sampling_operator, Evaluable};
pub use sample::{
    induce_graphon, induce_signal, sample_bernoulli, sample_fixed, sample_random_weights, BlockMode, SampleMode,
    SampledGraph,
};

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};

/// A symmetric measurable `W: [0,1]^2 -> [0,1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphonModel {
    /// Erdős–Rényi: `W = p`.
    Constant { p: f64 },
    /// Stochastic block model. `block_sizes` are relative widths of the
    /// latent intervals (normalized to sum 1); block `i` is
    /// `[s_i, s_{i+1})`, the last one closed at 1.
    Sbm { block_sizes: Vec<f64>, probs: Vec<Vec<f64>> },
    /// `W(u, v) = (u + v + 1) / 4`.
    LipschitzAffine,
    /// `W(u, v) = ((u mod 1/3) + (v mod 1/3) + 1) / 4`.
    PiecewiseMod,
    /// Piecewise constant on cells `(b_i, b_{i+1}] x (b_j, b_{j+1}]`, the first
    /// cell closed at 0.
    Grid { breakpoints: Vec<f64>, values: Vec<Vec<f64>> },
}

impl GraphonModel {
    /// The two-block SBM used in the experiments.
    pub fn default_sbm() -> Self {
        GraphonModel::Sbm { block_sizes: vec![0.5, 0.5], probs: vec![vec![0.1, 0.25], vec![0.25, 0.4]] }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GraphonModel::Constant { .. } => "constant",
            GraphonModel::Sbm { .. } => "sbm",
            GraphonModel::LipschitzAffine => "lipschitz_affine",
            GraphonModel::PiecewiseMod => "piecewise_mod",
            GraphonModel::Grid { .. } => "grid",
        }
    }

    /// Checks ranges, shapes and symmetry of the parameters.
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        match self {
            GraphonModel::Constant { p } => {
                if !in_unit(*p) {
                    bail!(Argument, "constant graphon value {p} outside [0, 1]");
                }
            }
            GraphonModel::Sbm { block_sizes, probs } => {
                let k = block_sizes.len();
                if k == 0 || block_sizes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
                    bail!(Argument, "block sizes must be positive and finite");
                }
                check_square_symmetric(probs, k)?;
            }
            GraphonModel::Grid { breakpoints, values } => {
                let k = breakpoints.len().saturating_sub(1);
                if k == 0 || breakpoints[0] != 0.0 || breakpoints[k] != 1.0 {
                    bail!(Argument, "grid breakpoints must run from 0 to 1");
                }
                if breakpoints.windows(2).any(|w| w[1] < w[0]) {
                    bail!(Argument, "grid breakpoints must be non-decreasing");
                }
                check_square_symmetric(values, k)?;
            }
            GraphonModel::LipschitzAffine | GraphonModel::PiecewiseMod => {}
        }
        Ok(())
    }

    /// `W(u, v)` for `u, v` in `[0, 1]`.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            GraphonModel::Constant { p } => *p,
            GraphonModel::Sbm { block_sizes, probs } => {
                let total: f64 = block_sizes.iter().sum();
                let (a, b) = (sbm_block(block_sizes, total, u), sbm_block(block_sizes, total, v));
                probs[a][b]
            }
            GraphonModel::LipschitzAffine => (u + v + 1.0) / 4.0,
            GraphonModel::PiecewiseMod => {
                let third = 1.0 / 3.0;
                ((u % third) + (v % third) + 1.0) / 4.0
            }
            GraphonModel::Grid { breakpoints, values } => values[grid_cell(breakpoints, u)][grid_cell(breakpoints, v)],
        }
    }

    /// Lipschitz constant in the sense `|W(u,v) - W(u',v')| <= A1 max(|u-u'|, |v-v'|)`,
    /// when the model is Lipschitz on the whole square.
    pub fn lipschitz_constant_hint(&self) -> Option<f64> {
        match self {
            GraphonModel::Constant { .. } => Some(0.0),
            GraphonModel::LipschitzAffine => Some(0.5),
            _ => None,
        }
    }

    /// Largest value of `W`.
    pub fn max_value(&self) -> f64 {
        match self {
            GraphonModel::Constant { p } => *p,
            GraphonModel::Sbm { probs, .. } => probs.iter().flatten().copied().fold(0.0, f64::max),
            GraphonModel::LipschitzAffine => 0.75,
            GraphonModel::PiecewiseMod => 5.0 / 12.0,
            GraphonModel::Grid { values, .. } => values.iter().flatten().copied().fold(0.0, f64::max),
        }
    }

    /// `min_u int W(u, v) dv`, by midpoint quadrature on 1024 points.
    pub fn min_degree(&self) -> f64 {
        let m = 1024;
        let pts: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        pts.iter()
            .map(|&u| pts.iter().map(|&v| self.eval(u, v)).sum::<f64>() / m as f64)
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean edge probability `int int W`, by midpoint quadrature on 1024^2 points.
    pub fn mean_value(&self) -> f64 {
        let m = 1024;
        let pts: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        pts.iter().map(|&u| pts.iter().map(|&v| self.eval(u, v)).sum::<f64>()).sum::<f64>() / (m * m) as f64
    }

    /// Applies `f` to every value of a grid graphon (pointwise composition).
    pub fn map_grid(&self, f: impl Fn(f64) -> f64) -> Result<GraphonModel> {
        match self {
            GraphonModel::Grid { breakpoints, values } => Ok(GraphonModel::Grid {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect(),
            }),
            other => bail!(Argument, "pointwise maps are only materialized for grid graphons, not {}", other.kind_name()),
        }
    }
}

fn check_square_symmetric(m: &[Vec<f64>], k: usize) -> Result<()> {
    if m.len() != k || m.iter().any(|r| r.len() != k) {
        bail!(Shape, "expected a {k} x {k} matrix");
    }
    for i in 0..k {
        for j in 0..k {
            let v = m[i][j];
            if !(0.0..=1.0).contains(&v) {
                bail!(Argument, "value {v} at ({i}, {j}) outside [0, 1]");
            }
            if v != m[j][i] {
                bail!(Argument, "matrix not symmetric at ({i}, {j})");
            }
        }
    }
    Ok(())
}

fn sbm_block(sizes: &[f64], total: f64, u: f64) -> usize {
    let mut acc = 0.0;
    for (i, s) in sizes.iter().enumerate() {
        acc += s / total;
        if u < acc {
            return i;
        }
    }
    sizes.len() - 1
}

/// Index of the cell `(b_i, b_{i+1}]` containing `u` (cell 0 also holds 0).
pub(crate) fn grid_cell(breakpoints: &[f64], u: f64) -> usize {
    let k = breakpoints.len() - 1;
    breakpoints[1..].partition_point(|&b| b < u).min(k - 1)
}

/// A graphon signal `X: [0, 1] -> R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Signal {
    /// `X(u) = u`.
    Identity,
    Constant { c: f64 },
    /// Piecewise constant on `(b_i, b_{i+1}]`, the first cell closed at 0.
    Grid { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl Signal {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Signal::Identity => u,
            Signal::Constant { c } => *c,
            Signal::Grid { breakpoints, values } => values[grid_cell(breakpoints, u)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Signal::Constant { c } if !c.is_finite() => bail!(Argument, "signal constant must be finite"),
            Signal::Grid { breakpoints, values } => {
                let k = breakpoints.len().saturating_sub(1);
                if k == 0 || values.len() != k || breakpoints[0] != 0.0 || breakpoints[k] != 1.0 {
                    bail!(Argument, "signal grid needs breakpoints 0..1 and one value per cell");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl std::str::FromStr for GraphonModel {
    type Err = Error;

    /// Parses a built-in model name with default parameters.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "constant" | "er" => GraphonModel::Constant { p: 0.1 },
            "sbm" => GraphonModel::default_sbm(),
            "lipschitz_affine" | "lipschitz" => GraphonModel::LipschitzAffine,
            "piecewise_mod" | "piecewise" => GraphonModel::PiecewiseMod,
            other => bail!(Argument, "unknown graphon '{other}' (constant, sbm, lipschitz_affine, piecewise_mod)"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_in_values() {
        let w = GraphonModel::LipschitzAffine;
        assert_eq!(w.eval(0.0, 0.5), 0.375);
        let sbm = GraphonModel::default_sbm();
        assert_eq!(sbm.eval(0.1, 0.2), 0.1);
        assert_eq!(sbm.eval(0.1, 0.5), 0.25);
        assert_eq!(sbm.eval(0.9, 1.0), 0.4);
        let pm = GraphonModel::PiecewiseMod;
        assert!((pm.eval(0.5, 0.0) - (0.5 - 1.0 / 3.0 + 1.0) / 4.0).abs() < 1e-15);
        for m in [w, sbm, pm] {
            m.validate().unwrap();
            assert_eq!(m.eval(0.2, 0.7), m.eval(0.7, 0.2));
        }
    }

    #[test]
    fn grid_cells_are_right_closed() {
        let g = GraphonModel::Grid { breakpoints: vec![0.0, 0.5, 1.0], values: vec![vec![0.1, 0.2], vec![0.2, 0.3]] };
        g.validate().unwrap();
        assert_eq!(g.eval(0.0, 0.0), 0.1);
        assert_eq!(g.eval(0.5, 0.5), 0.1);
        assert_eq!(g.eval(0.5000001, 0.5), 0.2);
        assert_eq!(g.eval(1.0, 1.0), 0.3);
    }

    #[test]
    fn validation_failures() {
        assert!(GraphonModel::Constant { p: 1.5 }.validate().is_err());
        let asym = GraphonModel::Sbm { block_sizes: vec![1.0, 1.0], probs: vec![vec![0.1, 0.2], vec![0.3, 0.4]] };
        assert!(asym.validate().is_err());
        let bad = GraphonModel::Grid { breakpoints: vec![0.0, 0.7], values: vec![vec![0.1]] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn summaries() {
        assert!((GraphonModel::LipschitzAffine.mean_value() - 0.5).abs() < 1e-9);
        assert!((GraphonModel::default_sbm().min_degree() - 0.175).abs() < 1e-9);
        assert_eq!(GraphonModel::default_sbm().max_value(), 0.4);
    }
}
