use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ign_core::experiments::{
    divergence_demo, plot_series, read_summary, run_experiment, write_outputs, write_plot_csv, write_plot_svg,
    DivergenceConfig, ExperimentConfig, ModelRecord, SUMMARY_FILE,
};
use ign_core::graphon::{sample_bernoulli, sample_fixed, sample_random_weights};
use ign_core::ign::{Arch, BasisKind};
use ign_core::le_basis::{basis_ops, table_orders, table_partition, table_rows, verify_basis, VerifyConfig};
use ign_core::smoothing::{neighborhood_smoothing, SmoothingConfig};
use ign_core::tensor::{read_binary, write_binary, write_binary_to};
use ign_core::{GraphonModel, KTensor, Signal};

#[derive(Parser)]
#[command(name = "ign-graphon", version, about = "Invariant graph networks on graphs sampled from graphons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect or self-check the linear equivariant basis.
    #[command(subcommand)]
    Basis(BasisCommand),
    /// Estimate edge probabilities of a 0-1 graph by neighborhood smoothing.
    Smooth(SmoothArgs),
    /// Sample a graph from a graphon.
    Sample(SampleArgs),
    /// Print the record of a randomly initialized IGN.
    Model(ModelArgs),
    /// Run an error-versus-size experiment.
    Run(RunArgs),
    /// Turn an experiment summary into plot series.
    Plot(PlotArgs),
    /// Output gap of the thresholding network between 0-1 and weighted samples.
    Diverge(DivergeArgs),
}

#[derive(Subcommand)]
enum BasisCommand {
    /// List the basis operators from order `lin` to order `lout`.
    List {
        #[arg(long)]
        lin: usize,
        #[arg(long)]
        lout: usize,
    },
    /// Check the executor against the brute-force matrices, equivariance,
    /// linearity, the closed-form tables and norm stability.
    Verify {
        #[arg(long, default_value_t = 5)]
        max_order_sum: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SmoothArgs {
    /// Adjacency matrix in the tensor binary format.
    #[arg(long)]
    input: PathBuf,
    /// Bandwidth constant.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    no_symmetrize: bool,
    /// Output file; the estimate goes to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleMode {
    Grid,
    Random,
    Bernoulli,
}

#[derive(Args)]
struct SampleArgs {
    /// `sbm`, `lipschitz_affine`, `piecewise_mod`, `constant:<p>`, or a TOML
    /// file describing a graphon.
    #[arg(long)]
    graphon: String,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "grid")]
    mode: SampleMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    zero_diagonal: bool,
    /// Weights or adjacency, tensor binary format.
    #[arg(long)]
    output: PathBuf,
    /// Also write the signal `x(u) = u` at the latents.
    #[arg(long)]
    signal_output: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    seed: u64,
    /// Coefficients are drawn uniformly from `[-a2, a2]`.
    #[arg(long, default_value_t = 1.0)]
    a2: f64,
    #[arg(long, value_enum, default_value = "strict")]
    basis: BasisArg,
    /// Model reads the adjacency only, without a node signal channel.
    #[arg(long)]
    no_signal: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Strict,
    Weak,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotFormat {
    Csv,
    Svg,
}

#[derive(Args)]
struct PlotArgs {
    /// Results directory written by `run`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: PlotFormat,
    /// Defaults to `plot.csv` or `plot.svg` inside the results directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DivergeArgs {
    #[arg(long, default_value = "constant:0.1")]
    graphon: String,
    #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Threshold base; the graphon maximum when omitted.
    #[arg(long)]
    c_max: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    margin: f64,
}

fn parse_graphon(spec: &str) -> Result<GraphonModel> {
    let w = match spec {
        "sbm" => GraphonModel::default_sbm(),
        "lipschitz_affine" => GraphonModel::LipschitzAffine,
        "piecewise_mod" => GraphonModel::PiecewiseMod,
        s if s.starts_with("constant:") => {
            let p = s["constant:".len()..].parse().with_context(|| format!("bad constant in '{s}'"))?;
            GraphonModel::Constant { p }
        }
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("'{path}' is neither a graphon name nor a readable file"))?;
            toml::from_str(&text).with_context(|| format!("parsing graphon file {path}"))?
        }
    };
    w.validate()?;
    Ok(w)
}

fn braces(blocks: &[Vec<usize>]) -> String {
    let inner: Vec<String> =
        blocks.iter().map(|b| format!("{{{}}}", b.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))).collect();
    format!("{{{}}}", inner.join(","))
}

fn basis_list(lin: usize, lout: usize) -> Result<()> {
    let ops = basis_ops(lin, lout)?;
    let table = (1..=3).find(|&t| table_orders(t).ok() == Some((lin, lout)));
    println!("order {lin} -> order {lout}: {} operators (strict pattern)", ops.len());
    for (i, op) in ops.iter().enumerate() {
        let d = op.decomposition();
        print!(
            "{:>3}  {:<20} reduce {} align {} replicate {} scale n^-{}",
            i + 1,
            op.gamma().to_string(),
            braces(d.reduction()),
            braces(&d.alignment()),
            braces(d.replication()),
            op.normalization_exponent()
        );
        if let Some(t) = table {
            for (row, r) in table_rows(t)?.iter().enumerate() {
                if &table_partition(t, row + 1)? == op.gamma() {
                    print!("  weak form: {} ({})", r.formula, r.description);
                }
            }
        }
        println!();
    }
    Ok(())
}

fn basis_verify(max_order_sum: usize, seed: u64) -> Result<bool> {
    let report = verify_basis(&VerifyConfig { max_order_sum, seed, ..VerifyConfig::default() })?;
    for c in &report.checks {
        let status = if c.passed() { "ok" } else { "FAILED" };
        println!("{:<18} {:>7} cases {:>5} violations  max error {:.3e}  {status}", c.name, c.cases, c.violations, c.max_error);
    }
    Ok(report.passed())
}

fn smooth(args: &SmoothArgs) -> Result<()> {
    let a: KTensor<f64> = read_binary(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let cfg = SmoothingConfig { c_bandwidth: args.c, symmetrize: !args.no_symmetrize };
    let p = neighborhood_smoothing(&a, &cfg)?;
    match &args.output {
        Some(path) => write_binary(&p, path)?,
        None => write_binary_to(&p, std::io::BufWriter::new(std::io::stdout().lock()))?,
    }
    Ok(())
}

fn sample(args: &SampleArgs) -> Result<()> {
    let w = parse_graphon(&args.graphon)?;
    let x = Signal::Identity;
    let x = args.signal_output.as_ref().map(|_| &x);
    let g = match args.mode {
        SampleMode::Grid => sample_fixed(&w, x, args.n)?,
        SampleMode::Random => sample_random_weights(&w, x, args.n, args.seed)?,
        SampleMode::Bernoulli => sample_bernoulli(&w, x, args.n, args.seed, args.zero_diagonal)?,
    };
    write_binary(&g.weights, &args.output)?;
    if let (Some(path), Some(s)) = (&args.signal_output, &g.signal) {
        write_binary(s, path)?;
    }
    Ok(())
}

fn model(args: &ModelArgs) -> Result<()> {
    let basis = match args.basis {
        BasisArg::Strict => BasisKind::Strict,
        BasisArg::Weak => BasisKind::Weak,
    };
    let arch = Arch { in_channels: if args.no_signal { 1 } else { 2 }, basis, ..Arch::default() };
    let rec = ModelRecord::Ign { seed: args.seed, a2: args.a2, arch };
    rec.build()?;
    print!("{}", rec.to_text()?);
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    let out = run_experiment(&cfg)?;
    write_outputs(&args.out, &cfg, &out)?;
    for row in out.summary.iter().filter(|r| r.statistic == "slope") {
        println!("{:<18} {:<12} {:<12} slope {:+.3}", row.graphon, row.mode, row.metric, row.value);
    }
    eprintln!("{} records written to {}", out.records.len(), args.out.display());
    Ok(())
}

fn plot(args: &PlotArgs) -> Result<()> {
    let summary = read_summary(args.input.join(SUMMARY_FILE)).with_context(|| format!("reading {}", args.input.display()))?;
    let points = plot_series(&summary);
    if points.is_empty() {
        bail!("summary has no output-metric medians to plot");
    }
    let (default_name, write): (&str, fn(&Path, &[_]) -> ign_core::Result<()>) = match args.format {
        PlotFormat::Csv => ("plot.csv", |p, pts| write_plot_csv(p, pts)),
        PlotFormat::Svg => ("plot.svg", |p, pts| write_plot_svg(p, pts)),
    };
    let path = args.output.clone().unwrap_or_else(|| args.input.join(default_name));
    write(&path, &points)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn diverge(args: &DivergeArgs) -> Result<()> {
    let cfg = DivergenceConfig {
        graphon: parse_graphon(&args.graphon)?,
        sizes: args.sizes.clone(),
        trials: args.trials,
        base_seed: args.seed,
        c_max: args.c_max,
        margin: args.margin,
    };
    let report = divergence_demo(&cfg)?;
    println!("c_max {}  margin {}  mean edge probability {:.4}  limit {:.5}", report.c_max, report.margin, report.p_bar, report.limit);
    println!("{:>6} {:>12} {:>12}", "n", "median gap", "mean gap");
    for r in &report.rows {
        println!("{:>6} {:>12.5} {:>12.5}", r.n, r.median_gap, r.mean_gap);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Basis(BasisCommand::List { lin, lout }) => basis_list(*lin, *lout),
        Command::Basis(BasisCommand::Verify { max_order_sum, seed }) => match basis_verify(*max_order_sum, *seed) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::FAILURE,
            Err(e) => Err(e),
        },
        Command::Smooth(a) => smooth(a),
        Command::Sample(a) => sample(a),
        Command::Model(a) => model(a),
        Command::Run(a) => run(a),
        Command::Plot(a) => plot(a),
        Command::Diverge(a) => diverge(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
