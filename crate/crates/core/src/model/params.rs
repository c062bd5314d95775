use super::ModelError;

/// Global constants shared by every user and every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Shared channel bandwidth B (Hz).
    pub bandwidth_hz: f64,
    /// Receiver noise power σ² (W).
    pub noise_power_w: f64,
    /// Total power budget over all users, transmission plus computation (W).
    pub p_max_w: f64,
    /// Watts drawn per unit of computation load.
    pub p0_w_per_load: f64,
    /// Bisection stop threshold on the rate interval (bit/s).
    pub epsilon: f64,
    /// Number of equidistant power-proportion samples, endpoints included.
    pub m_beta_samples: usize,
    pub tau_lo_init: f64,
    pub tau_hi_init: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            bandwidth_hz: 10e6,
            noise_power_w: 1e-12,
            p_max_w: 6.0,
            p0_w_per_load: 1e-3,
            epsilon: 1e-4,
            m_beta_samples: 500,
            tau_lo_init: 1e-3,
            tau_hi_init: 1e10,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<(), ModelError> {
            Err(ModelError::InvalidParam { field, reason: reason.into() })
        }
        let finite = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_power_w", self.noise_power_w),
            ("p_max_w", self.p_max_w),
            ("p0_w_per_load", self.p0_w_per_load),
            ("epsilon", self.epsilon),
            ("tau_lo_init", self.tau_lo_init),
            ("tau_hi_init", self.tau_hi_init),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return bad(field, format!("must be finite, got {v}"));
            }
        }
        if self.bandwidth_hz <= 0.0 {
            return bad("bandwidth_hz", "must be > 0");
        }
        if self.noise_power_w <= 0.0 {
            return bad("noise_power_w", "must be > 0");
        }
        if self.p_max_w <= 0.0 {
            return bad("p_max_w", "must be > 0");
        }
        if self.p0_w_per_load < 0.0 {
            return bad("p0_w_per_load", "must be >= 0");
        }
        if self.epsilon <= 0.0 {
            return bad("epsilon", "must be > 0");
        }
        if self.m_beta_samples < 2 {
            return bad("m_beta_samples", "must be >= 2");
        }
        if self.tau_lo_init < 0.0 {
            return bad("tau_lo_init", "must be >= 0");
        }
        if self.tau_lo_init >= self.tau_hi_init {
            return bad("tau_hi_init", "must exceed tau_lo_init");
        }
        Ok(())
    }

    /// Budget ceiling including the relative comparison slack.
    pub fn budget_ceiling(&self) -> f64 {
        self.p_max_w * (1.0 + super::BUDGET_SLACK)
    }
}

/// Linear power gains `h_n`, one per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    gains: Vec<f64>,
}

impl ChannelState {
    pub fn new(gains: Vec<f64>) -> Result<Self, ModelError> {
        if gains.is_empty() {
            return Err(ModelError::EmptyChannel);
        }
        if let Some(&g) = gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(ModelError::NonPositiveGain(g));
        }
        Ok(ChannelState { gains })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn n_users(&self) -> usize {
        self.gains.len()
    }

    /// `Σ_n 1/h_n`.
    pub fn inverse_gain_sum(&self) -> f64 {
        self.gains.iter().map(|h| 1.0 / h).sum()
    }
}
