use std::fs;

use ign_core::experiments::*;
use ign_core::ign::{Arch, BasisKind, LayerShape, OutputMode};
use ign_core::metrics::ErrorRecord;
use ign_core::{Error, GraphonModel};

fn small(graphons: Vec<GraphonModel>, with_signal: bool) -> ExperimentConfig {
    let arch = Arch {
        in_channels: 1 + with_signal as usize,
        hidden: vec![LayerShape { order: 2, width: 4 }; 2],
        basis: BasisKind::Strict,
        ..Arch::default()
    };
    ExperimentConfig {
        sizes: vec![16, 32, 64],
        trials: 3,
        n_ref: 256,
        with_signal,
        graphons,
        model: ModelRecord::Ign { seed: 3, a2: 1.0, arch },
        ..ExperimentConfig::default()
    }
}

fn output_rows(out: &ExperimentOutput) -> Vec<&ErrorRecord> {
    out.records.iter().filter(|r| r.metric == "output_l2").collect()
}

fn values_by_n(out: &ExperimentOutput, mode: &str) -> Vec<(usize, f64)> {
    output_rows(out).iter().filter(|r| r.mode == mode).map(|r| (r.n, r.value)).collect()
}

// A constant graphon yields the same weighted graph at any latents, and the
// all-ones graph is unchanged by Bernoulli sampling and by smoothing.
#[test]
fn constant_graphons_give_mode_independent_errors() {
    let out = run_experiment(&small(vec![GraphonModel::Constant { p: 0.3 }], false)).unwrap();
    let fixed = values_by_n(&out, "ew-fixed");
    for (n, v) in values_by_n(&out, "ew-random") {
        let want = fixed.iter().find(|p| p.0 == n).unwrap().1;
        assert!((v - want).abs() < 1e-12);
    }
    let out = run_experiment(&small(vec![GraphonModel::Constant { p: 1.0 }], false)).unwrap();
    let fixed = values_by_n(&out, "ew-fixed");
    for mode in ["ew-random", "ep-raw", "ep-smoothed"] {
        let got = values_by_n(&out, mode);
        assert_eq!(got.len(), 9);
        for (n, v) in got {
            assert!((v - fixed.iter().find(|p| p.0 == n).unwrap().1).abs() < 1e-12, "{mode} {n}");
        }
    }
    // the remaining error is pure discretization and shrinks with n
    assert!(fixed.windows(2).all(|w| w[1].1 < w[0].1), "{fixed:?}");
}

#[test]
fn records_are_ordered_and_counted() {
    let cfg = small(vec![GraphonModel::default_sbm(), GraphonModel::LipschitzAffine], true);
    let out = run_experiment(&cfg).unwrap();
    let rows = output_rows(&out);
    assert_eq!(rows.len(), 2 * 3 * (1 + 3 * 3));
    let ep = out.records.iter().filter(|r| r.mode.starts_with("ep")).count();
    assert_eq!(ep, 2 * 3 * 2 * 3 * 3);
    let modes: Vec<&str> = rows.iter().map(|r| r.mode.as_str()).collect();
    let mut sorted = modes.clone();
    sorted.dedup();
    assert_eq!(sorted, ["ew-fixed", "ew-random", "ep-raw", "ep-smoothed", "ew-fixed", "ew-random", "ep-raw", "ep-smoothed"]);
    assert!(rows.iter().all(|r| r.model_id == "ign-3" && r.value.is_finite()));
}

#[test]
fn edge_probability_modes_share_their_samples() {
    let out = run_experiment(&small(vec![GraphonModel::default_sbm()], true)).unwrap();
    let seeds = |mode: &str| -> Vec<u64> { output_rows(&out).iter().filter(|r| r.mode == mode).map(|r| r.seed).collect() };
    assert_eq!(seeds("ep-raw"), seeds("ep-smoothed"));
    assert_ne!(seeds("ep-raw"), seeds("ew-random"));
}

#[test]
fn reruns_write_identical_files() {
    let cfg = small(vec![GraphonModel::PiecewiseMod], true);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_outputs(d.path(), &cfg, &run_experiment(&cfg).unwrap()).unwrap();
    }
    for f in [RECORDS_FILE, SUMMARY_FILE, SNAPSHOT_FILE] {
        assert_eq!(fs::read(dirs[0].path().join(f)).unwrap(), fs::read(dirs[1].path().join(f)).unwrap(), "{f}");
    }
    let a = read_records(dirs[0].path().join(RECORDS_FILE)).unwrap();
    let b = read_records(dirs[1].path().join(RECORDS_FILE)).unwrap();
    check_identical(&a, &b).unwrap();
    let header = fs::read_to_string(dirs[0].path().join(RECORDS_FILE)).unwrap();
    assert!(header.starts_with("model_id,graphon,mode,n,seed,metric,value\n"));
}

#[test]
fn outputs_read_back_unchanged() {
    let cfg = small(vec![GraphonModel::LipschitzAffine], true);
    let out = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), &cfg, &out).unwrap();
    assert_eq!(read_records(dir.path().join(RECORDS_FILE)).unwrap(), out.records);
    assert_eq!(read_summary(dir.path().join(SUMMARY_FILE)).unwrap(), out.summary);
    assert_eq!(ExperimentConfig::load(dir.path().join(SNAPSHOT_FILE)).unwrap(), cfg);

    let mut changed = out.records.clone();
    changed[5].value += 1e-12;
    assert!(check_identical(&out.records, &changed).is_err());
    assert!(check_identical(&out.records, &out.records[1..]).is_err());
}

#[test]
fn summary_has_medians_and_slopes() {
    let out = run_experiment(&small(vec![GraphonModel::LipschitzAffine], true)).unwrap();
    let med = out.medians("lipschitz_affine", Mode::EwFixed, "output_l2");
    assert_eq!(med.iter().map(|p| p.0).collect::<Vec<_>>(), [16, 32, 64]);
    assert!(out.slope("lipschitz_affine", Mode::EwFixed, "output_l2").unwrap() < 0.0);
    let slopes = out.summary.iter().filter(|r| r.statistic == "slope").count();
    // four output curves plus two input metrics for each edge-probability mode
    assert_eq!(slopes, 4 + 2 * 2);
}

#[test]
fn equivariant_models_report_mse() {
    let mut cfg = small(vec![GraphonModel::default_sbm()], true);
    if let ModelRecord::Ign { arch, .. } = &mut cfg.model {
        arch.output = OutputMode::Equivariant;
    }
    let out = run_experiment(&cfg).unwrap();
    assert!(out.records.iter().any(|r| r.metric == "mse_u"));
    assert!(!out.records.iter().any(|r| r.metric == "output_l2"));

    cfg.ground_truth = GroundTruthMode::RandomAveraged;
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
}

#[test]
fn sgnn_models_run() {
    let mut cfg = small(vec![GraphonModel::default_sbm()], true);
    cfg.model = ModelRecord::from_text("kind = \"sgnn\"\nseed = 2\n").unwrap();
    let out = run_experiment(&cfg).unwrap();
    assert!(out.records.iter().all(|r| r.model_id == "sgnn-2" && r.value.is_finite()));
}

#[test]
fn validation_rejects_mismatched_signal() {
    let cfg = small(vec![GraphonModel::default_sbm()], false);
    let bad = ExperimentConfig { with_signal: true, ..cfg.clone() };
    assert!(matches!(bad.validate(), Err(Error::Config(_))));
    let bad = ExperimentConfig { n_ref: 100, sizes: vec![], ..cfg };
    match bad.validate() {
        Err(Error::Config(errs)) => assert!(errs.len() >= 2, "{errs:?}"),
        other => panic!("{other:?}"),
    }
    assert!(ExperimentConfig::from_toml("trails = 3").is_err());
}

#[test]
fn plot_files() {
    let cfg = small(vec![GraphonModel::default_sbm(), GraphonModel::PiecewiseMod], true);
    let out = run_experiment(&cfg).unwrap();
    let pts = plot_series(&out.summary);
    assert!(pts.iter().any(|p| p.series == "ep-smoothed"));
    let dir = tempfile::tempdir().unwrap();
    write_plot_csv(dir.path().join("plot.csv"), &pts).unwrap();
    write_plot_svg(dir.path().join("plot.svg"), &pts).unwrap();
    let csv = fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    assert_eq!(csv.lines().count(), pts.len() + 1);
    let svg = fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("sbm") && svg.contains("piecewise_mod"));
}

#[test]
fn divergence_gap_stays_at_its_limit() {
    let cfg = DivergenceConfig {
        graphon: GraphonModel::Constant { p: 0.1 },
        sizes: vec![64, 256],
        trials: 10,
        base_seed: 0,
        c_max: None,
        margin: 0.5,
    };
    let report = divergence_demo(&cfg).unwrap();
    assert_eq!(report.c_max, 0.1);
    assert!((report.limit - 0.9 * 0.5 * 0.1).abs() < 1e-12);
    for row in &report.rows {
        assert!((row.median_gap - report.limit).abs() < 0.2 * report.limit, "{row:?}");
    }
    assert!(divergence_demo(&DivergenceConfig { trials: 0, ..cfg }).is_err());
}
