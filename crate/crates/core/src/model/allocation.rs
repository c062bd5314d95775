use std::fmt;

use super::{capacity_unchecked, ChannelState, CompLoadCurve, ModelError, SystemParams};

/// Per-user decision `(eta_n, p_t_n)` together with the derived computation
/// power, equivalent rate and the worst-user rate `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub eta: Vec<f64>,
    pub p_t_w: Vec<f64>,
    pub p_c_w: Vec<f64>,
    pub rates_bps: Vec<f64>,
    pub tau_bps: f64,
}

impl Allocation {
    /// Builds an allocation from already computed vectors. Only lengths are
    /// checked, so infeasible allocations can be represented and audited.
    pub fn from_parts(
        eta: Vec<f64>,
        p_t_w: Vec<f64>,
        p_c_w: Vec<f64>,
        rates_bps: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = eta.len();
        if n == 0 || p_t_w.len() != n || p_c_w.len() != n || rates_bps.len() != n {
            return Err(ModelError::LengthMismatch(format!(
                "eta={}, p_t={}, p_c={}, rates={}",
                n,
                p_t_w.len(),
                p_c_w.len(),
                rates_bps.len()
            )));
        }
        let tau_bps = min_rate(&rates_bps);
        Ok(Allocation { eta, p_t_w, p_c_w, rates_bps, tau_bps })
    }

    /// Derives computation power and rates from the decision variables.
    pub fn derive(
        eta: Vec<f64>,
        p_t_w: Vec<f64>,
        channel: &ChannelState,
        curve: &CompLoadCurve,
        params: &SystemParams,
    ) -> Result<Self, ModelError> {
        if eta.len() != channel.n_users() || p_t_w.len() != channel.n_users() {
            return Err(ModelError::LengthMismatch(format!(
                "users={}, eta={}, p_t={}",
                channel.n_users(),
                eta.len(),
                p_t_w.len()
            )));
        }
        let mut p_c_w = Vec::with_capacity(eta.len());
        let mut rates_bps = Vec::with_capacity(eta.len());
        for ((&e, &p), &h) in eta.iter().zip(&p_t_w).zip(channel.gains()) {
            if !(p >= 0.0) {
                return Err(ModelError::NegativePower(p));
            }
            p_c_w.push(curve.load(e)? * params.p0_w_per_load);
            rates_bps.push(capacity_unchecked(p, h, params) / e);
        }
        let tau_bps = min_rate(&rates_bps);
        Ok(Allocation { eta, p_t_w, p_c_w, rates_bps, tau_bps })
    }

    pub fn n_users(&self) -> usize {
        self.eta.len()
    }

    pub fn total_power(&self) -> f64 {
        total_power(self)
    }
}

fn min_rate(rates: &[f64]) -> f64 {
    rates.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `Σ_n (p_t_n + p_c_n)`.
pub fn total_power(alloc: &Allocation) -> f64 {
    alloc.p_t_w.iter().zip(&alloc.p_c_w).map(|(t, c)| t + c).sum()
}

/// A failed constraint of the allocation problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PowerBudget { total_w: f64, limit_w: f64 },
    NegativeTransmitPower { user: usize, p_t_w: f64 },
    RatioOutOfDomain { user: usize, eta: f64, floor: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PowerBudget { total_w, limit_w } => {
                write!(f, "power budget: total {total_w} W exceeds {limit_w} W")
            }
            Violation::NegativeTransmitPower { user, p_t_w } => {
                write!(f, "transmit power: user {user} has {p_t_w} W")
            }
            Violation::RatioOutOfDomain { user, eta, floor } => {
                write!(f, "compression ratio: user {user} has {eta}, outside [{floor}, 1]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Feasibility {
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the budget (with relative slack), transmit-power sign and
/// compression-ratio domain constraints.
pub fn check_feasible(alloc: &Allocation, params: &SystemParams, curve: &CompLoadCurve) -> Feasibility {
    let mut violations = Vec::new();
    let total_w = total_power(alloc);
    if !(total_w <= params.budget_ceiling()) {
        violations.push(Violation::PowerBudget { total_w, limit_w: params.p_max_w });
    }
    for (user, &p_t_w) in alloc.p_t_w.iter().enumerate() {
        if !(p_t_w >= 0.0) {
            violations.push(Violation::NegativeTransmitPower { user, p_t_w });
        }
    }
    let floor = curve.floor();
    for (user, &eta) in alloc.eta.iter().enumerate() {
        if !(eta >= floor && eta <= 1.0) {
            violations.push(Violation::RatioOutOfDomain { user, eta, floor });
        }
    }
    Feasibility { violations }
}

#[cfg(test)]
mod tests {
    use super::super::curve::default_curve;
    use super::*;
    use proptest::prelude::*;

    fn raw(p_t: Vec<f64>, p_c: Vec<f64>, eta: Vec<f64>) -> Allocation {
        let n = p_t.len();
        Allocation::from_parts(eta, p_t, p_c, vec![1.0; n]).unwrap()
    }

    #[test]
    fn total_power_examples() {
        assert_eq!(raw(vec![2.0], vec![1.0], vec![1.0]).total_power(), 3.0);
        assert_eq!(raw(vec![1.0, 2.0], vec![0.5, 0.5], vec![1.0; 2]).total_power(), 4.0);
        assert_eq!(raw(vec![0.0; 3], vec![0.0; 3], vec![1.0; 3]).total_power(), 0.0);
    }

    #[test]
    fn feasible_at_exact_budget() {
        let p = SystemParams::default();
        let a = raw(vec![3.0, 2.5], vec![0.0, 0.5], vec![1.0, 0.6]);
        assert!(check_feasible(&a, &p, &default_curve()).is_feasible());
    }

    #[test]
    fn reports_each_violation_with_index() {
        let p = SystemParams::default();
        let c = default_curve();
        let a = raw(vec![1.0, -0.1], vec![0.0, 0.0], vec![1.0, 1.0]);
        assert_eq!(
            check_feasible(&a, &p, &c).violations,
            vec![Violation::NegativeTransmitPower { user: 1, p_t_w: -0.1 }]
        );
        let a = raw(vec![1.0, 1.0], vec![0.0, 0.0], vec![0.1, 1.0]);
        assert_eq!(
            check_feasible(&a, &p, &c).violations,
            vec![Violation::RatioOutOfDomain { user: 0, eta: 0.1, floor: 0.2 }]
        );
        let a = raw(vec![5.0, 1.0], vec![0.0, 0.5], vec![1.0, 1.0]);
        assert!(matches!(check_feasible(&a, &p, &c).violations[..], [Violation::PowerBudget { .. }]));
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(Allocation::from_parts(vec![1.0], vec![1.0, 2.0], vec![0.0], vec![1.0]).is_err());
        assert!(Allocation::from_parts(vec![], vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn derive_populates_power_and_rates() {
        let p = SystemParams { bandwidth_hz: 1e7, noise_power_w: 1e-12, ..Default::default() };
        let ch = ChannelState::new(vec![1e-9, 1e-9]).unwrap();
        let a = Allocation::derive(vec![1.0, 0.5], vec![1e-3, 1e-3], &ch, &default_curve(), &p).unwrap();
        assert!((a.rates_bps[0] - 1e7).abs() < 1e-6);
        assert!((a.rates_bps[1] - 2e7).abs() < 1e-6);
        assert_eq!(a.tau_bps, a.rates_bps[0]);
        assert!((a.p_c_w[1] - 0.5).abs() < 1e-12);
        assert!(Allocation::derive(vec![0.1, 0.5], vec![1.0, 1.0], &ch, &default_curve(), &p).is_err());
    }

    proptest! {
        #[test]
        fn feasibility_monotone_in_budget(
            pt in proptest::collection::vec(0.0f64..3.0, 1..5),
            extra in 0.0f64..10.0,
        ) {
            let c = default_curve();
            let n = pt.len();
            let a = raw(pt, vec![0.1; n], vec![0.8; n]);
            let budget = a.total_power();
            let p = SystemParams { p_max_w: budget.max(1e-9), ..Default::default() };
            prop_assert!(check_feasible(&a, &p, &c).is_feasible());
            let bigger = SystemParams { p_max_w: p.p_max_w + extra, ..p };
            prop_assert!(check_feasible(&a, &bigger, &c).is_feasible());
        }

        #[test]
        fn derived_fields_recompute_bitwise(
            gains in proptest::collection::vec(1e-10f64..1e-8, 1..5),
            seed_eta in 0.2f64..=1.0,
            pt in 0.0f64..2.0,
        ) {
            let c = default_curve();
            let p = SystemParams::default();
            let n = gains.len();
            let ch = ChannelState::new(gains).unwrap();
            let a = Allocation::derive(vec![seed_eta; n], vec![pt; n], &ch, &c, &p).unwrap();
            let b = Allocation::derive(a.eta.clone(), a.p_t_w.clone(), &ch, &c, &p).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
