//! Random Gaussian states shared by the integration tests.
#![allow(dead_code)]

use cvqkd::gaussian::{
    apply_beamsplitter, apply_squeezer, thermal_loss_channel, two_mode_squeezed, CovarianceMatrix,
};
use cvqkd::protocols::ChannelParams;
use rand::Rng;

/// A pure state: `pairs` TMSV pairs scrambled by random squeezers and beamsplitters.
pub fn random_pure_state<R: Rng>(rng: &mut R, pairs: usize) -> CovarianceMatrix {
    let tmsvs: Vec<CovarianceMatrix> = (0..pairs)
        .map(|_| two_mode_squeezed(rng.random_range(1.0..10.0)).unwrap())
        .collect();
    let refs: Vec<&CovarianceMatrix> = tmsvs.iter().collect();
    scramble(rng, CovarianceMatrix::direct_sum(&refs), 2 * pairs)
}

/// Applies `steps` random squeezers and beamsplitters.
pub fn scramble<R: Rng>(rng: &mut R, mut cm: CovarianceMatrix, steps: usize) -> CovarianceMatrix {
    let n = cm.n_modes();
    for _ in 0..steps {
        let a = rng.random_range(0..n);
        cm = apply_squeezer(&cm, a, rng.random_range(-0.5..0.5)).unwrap();
        if n > 1 {
            let b = (a + rng.random_range(1..n)) % n;
            cm = apply_beamsplitter(&cm, a, b, rng.random_range(0.0..=1.0)).unwrap();
        }
    }
    cm
}

pub fn random_channel<R: Rng>(rng: &mut R) -> ChannelParams {
    let t = rng.random_range(0.0..=1.0);
    ChannelParams::symmetric(t, rng.random_range(0.0..0.5)).unwrap()
}

/// A mixed state: a pure state with a thermal-loss channel on every mode.
pub fn random_mixed_state<R: Rng>(rng: &mut R, pairs: usize) -> CovarianceMatrix {
    let mut cm = random_pure_state(rng, pairs);
    for mode in 0..cm.n_modes() {
        cm = thermal_loss_channel(&cm, mode, &random_channel(rng)).unwrap();
    }
    cm
}
