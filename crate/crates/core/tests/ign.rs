mod common;

use common::{max_diff, random_permutation, random_tensor, rng};
use ign_core::graphon::{sample_bernoulli, sample_fixed, GraphonModel, Signal};
use ign_core::ign::{
    continuous_forward, counterexample_ign, counterexample_limit, forward, layer_apply, layer_apply_general,
    random_init, Activation, Arch, BasisKind, LayerShape, LayerSpec,
};
use ign_core::le_basis::build_basis_matrix;
use ign_core::tensor::{partition_norm, permute, NormKind};
use ign_core::{IgnModel, KTensor, OutputMode, Partition};
use proptest::prelude::*;
use rand::Rng;

fn p(s: &str) -> Partition {
    s.parse().unwrap()
}

fn random_layer(r: &mut impl Rng, l: usize, m: usize, din: usize, dout: usize, basis: BasisKind) -> LayerSpec<f64> {
    let mut spec = LayerSpec::zeros(l, m, din, dout).unwrap().with_basis(basis);
    for c in spec.coeffs.iter_mut().chain(spec.bias.iter_mut()) {
        *c = r.gen_range(-1.0..1.0);
    }
    spec
}

#[test]
fn closed_form_kernels_match_the_executor() {
    let mut r = rng(21);
    for (l, m) in [(2, 2), (1, 2), (2, 1), (2, 0)] {
        for basis in [BasisKind::Strict, BasisKind::Weak] {
            for n in [1, 2, 3, 5, 7] {
                let spec = random_layer(&mut r, l, m, 3, 2, basis);
                let x = random_tensor(&mut r, l, n, 3);
                let fast = layer_apply(&spec, &x).unwrap();
                let slow = layer_apply_general(&spec, &x).unwrap();
                assert!(max_diff(&fast, &slow) < 1e-12, "({l},{m}) {basis:?} n={n}");
            }
        }
    }
}

#[test]
fn identity_layer_copies_its_input() {
    let mut spec = LayerSpec::<f64>::zeros(2, 2, 1, 1).unwrap();
    spec.set_coeff(&p("{{1,3},{2,4}}"), 0, 0, 1.0).unwrap();
    spec.set_coeff(&p("{{1,2,3,4}}"), 0, 0, 1.0).unwrap();
    let x = random_tensor(&mut rng(22), 2, 6, 1);
    assert!(max_diff(&layer_apply(&spec, &x).unwrap(), &x) < 1e-15);

    let mut weak = LayerSpec::<f64>::zeros(2, 2, 1, 1).unwrap().with_basis(BasisKind::Weak);
    weak.set_coeff(&p("{{1,3},{2,4}}"), 0, 0, 1.0).unwrap();
    assert!(max_diff(&layer_apply(&weak, &x).unwrap(), &x) < 1e-15);
}

#[test]
fn off_diagonal_bias() {
    let mut spec = LayerSpec::<f64>::zeros(2, 2, 1, 1).unwrap();
    spec.set_bias(&p("{{1},{2}}"), 0, 0.7).unwrap();
    let y = layer_apply(&spec, &KTensor::zeros(2, 3, 1)).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(y.get(&[i, j], 0), if i == j { 0.0 } else { 0.7 });
        }
    }
}

#[test]
fn unit_coefficients_match_the_summed_oracle() {
    let n = 3;
    let mut spec = LayerSpec::<f64>::zeros(2, 2, 1, 1).unwrap();
    spec.coeffs.iter_mut().for_each(|c| *c = 1.0);
    let x = random_tensor(&mut rng(23), 2, n, 1);
    let mut want = KTensor::zeros(2, n, 1);
    for g in spec.partitions() {
        want = want.add(&build_basis_matrix(&g, 2, 2, n).unwrap().apply(&x, 2).unwrap()).unwrap();
    }
    assert!(max_diff(&layer_apply(&spec, &x).unwrap(), &want) < 1e-12);
}

#[test]
fn shape_errors() {
    let spec = LayerSpec::<f64>::zeros(2, 2, 2, 1).unwrap();
    assert!(layer_apply(&spec, &KTensor::zeros(2, 3, 1)).is_err());
    assert!(layer_apply(&spec, &KTensor::zeros(1, 3, 2)).is_err());
    let mut model: IgnModel<f64> = random_init(&Arch::default(), 1.0, 1).unwrap();
    model.layers.swap(1, 4);
    assert!(matches!(model.validate(), Err(ign_core::Error::Validation(_))));
}

fn total_mean_model() -> IgnModel<f64> {
    let mut head = LayerSpec::<f64>::zeros(2, 0, 1, 1).unwrap().with_basis(BasisKind::Weak);
    head.set_coeff(&p("{{1},{2}}"), 0, 0, 1.0).unwrap();
    IgnModel { layers: vec![head], activation: Activation::Relu, output: OutputMode::Invariant }
}

#[test]
fn single_mean_layer() {
    let a = KTensor::matrix(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    let y = forward(&total_mean_model(), &a).unwrap();
    assert_eq!(y.data(), &[0.5]);

    let zero_model: IgnModel<f64> = random_init(&Arch::default(), 1.0, 3).unwrap();
    let y = forward(&zero_model, &KTensor::zeros(2, 5, 2)).unwrap();
    assert!(y.data().iter().all(|&v| v == 0.0));
}

#[test]
fn surrogate_of_a_constant_graphon() {
    let w = GraphonModel::Constant { p: 0.3 };
    for n_ref in [256, 300] {
        let y = continuous_forward(&total_mean_model(), &w, None, n_ref).unwrap();
        assert!((y.data()[0] - 0.3).abs() < 1e-12);
    }
    assert!(continuous_forward(&total_mean_model(), &w, None, 100).is_err());
}

#[test]
fn activations_are_contractions_fixing_zero() {
    let mut r = rng(24);
    for act in Activation::ALL {
        assert_eq!(act.apply(0.0f64), 0.0);
        for _ in 0..1000 {
            let (x, y): (f64, f64) = (r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0));
            assert!((act.apply(x) - act.apply(y)).abs() <= (x - y).abs() + 1e-15);
        }
        assert_eq!(act.name().parse::<Activation>().unwrap(), act);
    }
}

#[test]
fn stability_constant_bounds_output_changes() {
    let mut r = rng(25);
    let arch = Arch { in_channels: 1, hidden: vec![LayerShape { order: 2, width: 3 }; 2], out_dim: 2, ..Arch::default() };
    for trial in 0..20 {
        let model: IgnModel<f64> = random_init(&arch, 0.5, trial).unwrap();
        let layers = model.layers.len() as i32;
        let c = (15.0 * model.max_abs_coeff() * model.max_width() as f64).powi(layers);
        let n = r.gen_range(3..9);
        let a = random_tensor(&mut r, 2, n, 1);
        let d = random_tensor(&mut r, 2, n, 1).scale(1e-3);
        let b = a.add(&d).unwrap();
        let eps = partition_norm(&d, NormKind::L2).unwrap().max_component();
        let ya = forward(&model, &a).unwrap();
        let yb = forward(&model, &b).unwrap();
        let dist = ya.sub(&yb).unwrap().frobenius();
        assert!(dist <= c * eps, "trial {trial}: {dist} > {c} * {eps}");
    }
}

#[test]
fn counterexample_separates_samples_from_weights() {
    let model: IgnModel<f64> = counterexample_ign(0.5, 0.5).unwrap();
    let w = GraphonModel::Constant { p: 0.1 };
    let smooth = forward(&model, &sample_fixed(&w, None, 64).unwrap().weights).unwrap();
    assert_eq!(smooth.data(), &[0.0]);
    let mut acc = 0.0;
    for seed in 0..10 {
        let g = sample_bernoulli(&w, None, 256, seed, false).unwrap();
        acc += forward(&model, &g.weights).unwrap().data()[0];
    }
    let limit = counterexample_limit(0.5, 0.5, 0.1);
    assert!((limit - 0.025).abs() < 1e-15);
    assert!((acc / 10.0 - limit).abs() < 0.2 * limit, "{}", acc / 10.0);
    let empty = sample_bernoulli(&GraphonModel::Constant { p: 0.0 }, None, 32, 1, false).unwrap();
    assert_eq!(forward(&model, &empty.weights).unwrap().data(), &[0.0]);
    assert!(counterexample_ign::<f64>(1.0, 0.5).is_err());
}

#[test]
fn single_precision_tracks_double() {
    let model: IgnModel<f64> = random_init(&Arch::default(), 1.0, 8).unwrap();
    let g = sample_fixed(&GraphonModel::default_sbm(), Some(&Signal::Identity), 24).unwrap();
    let x = g.input().unwrap();
    let y64 = forward(&model, &x).unwrap();
    let y32 = forward(&model.cast::<f32>(), &x.cast::<f32>()).unwrap();
    let rel = (y64.data()[0] - y32.data()[0] as f64).abs() / y64.data()[0].abs().max(1.0);
    assert!(rel < 1e-3, "{rel}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn invariant_and_equivariant_readouts(seed in any::<u64>(), n in 2usize..7, equivariant in any::<bool>()) {
        let mut r = rng(seed);
        let arch = Arch {
            in_channels: 2,
            hidden: vec![LayerShape { order: 2, width: 4 }, LayerShape { order: 1, width: 3 }, LayerShape { order: 2, width: 3 }],
            out_dim: 2,
            output: if equivariant { OutputMode::Equivariant } else { OutputMode::Invariant },
            activation: Activation::Tanh,
            basis: BasisKind::Strict,
        };
        let model: IgnModel<f64> = random_init(&arch, 1.0, seed).unwrap();
        let x = random_tensor(&mut r, 2, n, 2);
        let sigma = random_permutation(&mut r, n);
        let lhs = forward(&model, &permute(&x, &sigma).unwrap()).unwrap();
        let y = forward(&model, &x).unwrap();
        let rhs = if equivariant { permute(&y, &sigma).unwrap() } else { y };
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-9);
    }
}
