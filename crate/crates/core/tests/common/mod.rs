#![allow(dead_code)]

use ign_core::KTensor;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut impl Rng, order: usize, n: usize, channels: usize) -> KTensor<f64> {
    KTensor::from_fn(order, n, channels, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (0..n).collect();
    s.shuffle(rng);
    s
}

pub fn max_diff(a: &KTensor<f64>, b: &KTensor<f64>) -> f64 {
    assert_eq!((a.order(), a.n(), a.channels()), (b.order(), b.n(), b.channels()));
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
