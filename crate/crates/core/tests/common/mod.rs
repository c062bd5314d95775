#![allow(dead_code)]

use pscom_core::experiments::{dbm_to_watts, generate_channel_gains, RandomChannelSpec, DEFAULT_KNOTS};
use pscom_core::{ChannelState, CompLoadCurve, Knot, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub id: usize,
    pub channel: ChannelState,
    pub curve: CompLoadCurve,
    pub params: SystemParams,
}

pub fn default_curve() -> CompLoadCurve {
    CompLoadCurve::new(DEFAULT_KNOTS.iter().map(|&[e, l]| Knot::new(e, l)).collect()).unwrap()
}

/// Seeded instances cycling N through 1..=4, with random budget in
/// [1, 10] W and noise in [-100, -80] dBm.
pub fn seeded_instances(count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..count)
        .map(|id| {
            let n_users = 1 + id % 4;
            let channel = generate_channel_gains(&RandomChannelSpec {
                n_users,
                gain_min: 1e-10,
                gain_max: 1e-8,
                seed: 1000 + id as u64,
            })
            .unwrap();
            let params = SystemParams {
                p_max_w: rng.gen_range(1.0..10.0),
                noise_power_w: dbm_to_watts(rng.gen_range(-100.0..-80.0)),
                ..SystemParams::default()
            };
            Instance { id, channel, curve: default_curve(), params }
        })
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
