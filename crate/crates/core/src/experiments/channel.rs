use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ConfigError;
use crate::model::ChannelState;

/// Seeded log-uniform gain draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomChannelSpec {
    pub n_users: usize,
    pub gain_min: f64,
    pub gain_max: f64,
    pub seed: u64,
}

impl Default for RandomChannelSpec {
    /// Three users with path losses between −100 and −80 dB.
    fn default() -> Self {
        RandomChannelSpec { n_users: 3, gain_min: 1e-10, gain_max: 1e-8, seed: 42 }
    }
}

/// Where a scenario's gains come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    Explicit(Vec<f64>),
    Random(RandomChannelSpec),
}

impl ChannelSource {
    pub fn build(&self) -> Result<ChannelState, ConfigError> {
        match self {
            ChannelSource::Explicit(g) => {
                ChannelState::new(g.clone()).map_err(|e| ConfigError::new("channel.gains", e.to_string()))
            }
            ChannelSource::Random(spec) => generate_channel_gains(spec),
        }
    }

    /// Same source restricted or extended to `n_users`. Random draws are
    /// prefix-stable; explicit lists can only be truncated.
    pub fn with_users(&self, n_users: usize) -> Result<ChannelSource, ConfigError> {
        match self {
            ChannelSource::Explicit(g) if n_users <= g.len() && n_users > 0 => {
                Ok(ChannelSource::Explicit(g[..n_users].to_vec()))
            }
            ChannelSource::Explicit(g) => Err(ConfigError::new(
                "channel.gains",
                format!("{} users requested but only {} gains listed", n_users, g.len()),
            )),
            ChannelSource::Random(spec) => Ok(ChannelSource::Random(RandomChannelSpec { n_users, ..*spec })),
        }
    }
}

/// Draws `n_users` gains log-uniformly on `[gain_min, gain_max]`. Gains are
/// drawn one per user from a single stream, so the first `k` entries do not
/// depend on `n_users`.
pub fn generate_channel_gains(spec: &RandomChannelSpec) -> Result<ChannelState, ConfigError> {
    let RandomChannelSpec { n_users, gain_min, gain_max, seed } = *spec;
    if n_users == 0 {
        return Err(ConfigError::new("channel.n_users", "must be >= 1"));
    }
    if !(gain_min > 0.0 && gain_min.is_finite()) {
        return Err(ConfigError::new("channel.gain_min", "must be finite and > 0"));
    }
    if !(gain_max >= gain_min && gain_max.is_finite()) {
        return Err(ConfigError::new("channel.gain_max", "must be finite and >= gain_min"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ln_lo, ln_hi) = (gain_min.ln(), gain_max.ln());
    let gains = (0..n_users)
        .map(|_| {
            let u: f64 = rng.gen();
            if gain_min == gain_max {
                gain_min
            } else {
                (ln_lo + u * (ln_hi - ln_lo)).exp().clamp(gain_min, gain_max)
            }
        })
        .collect();
    ChannelState::new(gains).map_err(|e| ConfigError::new("channel", e.to_string()))
}
