use rayon::prelude::*;

use super::bisection::{bisect_tau, budget_verdict, Verdict};
use super::{Candidate, Method, SolveReport, SolverError, Sweep};
use crate::model::{Allocation, ChannelState, CompLoadCurve, SystemParams};

/// Compression ratio a user needs to reach a rate target with a fixed
/// transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RequiredRatio {
    /// `eta` within `[D_S, 1]`. `clamped` is set when the capacity alone
    /// already exceeds the target and the raw ratio was above 1.
    Ratio { eta: f64, clamped: bool },
    /// The raw ratio falls below the load curve's floor.
    BelowFloor { eta: f64 },
}

/// `eta = (B / tau)·log2(1 + p_t·h/σ²)`, clamped to 1 from above.
pub fn eta_from_tau(
    tau: f64,
    p_t: f64,
    gain: f64,
    params: &SystemParams,
    curve: &CompLoadCurve,
) -> Result<RequiredRatio, SolverError> {
    if !(tau > 0.0) {
        return Err(SolverError::NonPositiveRate(tau));
    }
    let capacity = crate::model::channel_capacity(p_t, gain, params)?;
    Ok(classify_ratio(capacity / tau, curve.floor()))
}

fn classify_ratio(eta: f64, floor: f64) -> RequiredRatio {
    if eta >= 1.0 {
        RequiredRatio::Ratio { eta: 1.0, clamped: true }
    } else if eta >= floor {
        RequiredRatio::Ratio { eta, clamped: false }
    } else {
        RequiredRatio::BelowFloor { eta }
    }
}

/// `[0, beta_max]` with `beta_max = P^max / Σ 1/h_n`.
pub fn beta_range(channel: &ChannelState, params: &SystemParams) -> (f64, f64) {
    (0.0, params.p_max_w / channel.inverse_gain_sum())
}

/// `m` equidistant samples over `[0, beta_max]`, both endpoints included.
pub fn beta_grid(range: (f64, f64), m: usize) -> Vec<f64> {
    let (lo, hi) = range;
    let m = m.max(2);
    let last = (m - 1) as f64;
    (0..m).map(|k| if k == m - 1 { hi } else { lo + (hi - lo) * (k as f64 / last) }).collect()
}

/// Budget check for fixed `p_n = beta/h_n` at rate target `tau`.
///
/// While every user's capacity covers `tau` on its own (all ratios clamped
/// to 1) the power draw does not depend on `tau`, so a draw on budget there
/// is reported as `Within` rather than as an exact hit.
pub fn method1_verdict(
    beta: f64,
    tau: f64,
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
) -> Verdict {
    let floor = curve.floor();
    let mut p_sum = 0.0;
    let mut all_clamped = true;
    for &h in channel.gains() {
        let p_t = beta / h;
        let capacity = crate::model::capacity_unchecked(p_t, h, params);
        match classify_ratio(capacity / tau, floor) {
            RequiredRatio::BelowFloor { .. } => return Verdict::Over,
            RequiredRatio::Ratio { eta, clamped } => {
                all_clamped &= clamped;
                p_sum += p_t + curve.load_in_domain(eta) * params.p0_w_per_load;
            }
        }
    }
    match budget_verdict(p_sum, params) {
        Verdict::Tight if all_clamped => Verdict::Within,
        v => v,
    }
}

/// Proportional-power heuristic: grid over `beta`, bisect `tau` for each.
pub fn solve_method1(
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
) -> Result<SolveReport, SolverError> {
    params.validate()?;
    let betas = beta_grid(beta_range(channel, params), params.m_beta_samples);
    let sweep = betas
        .par_iter()
        .enumerate()
        .map(|(k, &beta)| {
            let out = bisect_tau(
                |tau| method1_verdict(beta, tau, channel, curve, params),
                params.tau_lo_init,
                params.tau_hi_init,
                params.epsilon,
            )?;
            let feasible = out.converged.then_some(&out);
            Ok::<_, SolverError>(Sweep::single(k as u64, feasible, out.iterations))
        })
        .try_reduce(Sweep::default, |a, b| Ok(a.merge(b)))?;

    let outer = betas.len() as u64;
    let Some((tau, index)) = sweep.best else {
        return infeasible_report(Method::Method1, channel, curve, params, outer, sweep.iterations);
    };
    let beta = betas[index as usize];
    let p_t: Vec<f64> = channel.gains().iter().map(|h| beta / h).collect();
    let eta: Vec<f64> = p_t
        .iter()
        .zip(channel.gains())
        .map(|(&p, &h)| match eta_from_tau(tau, p, h, params, curve)? {
            RequiredRatio::Ratio { eta, .. } => Ok(eta),
            // bisection only accepts targets with every ratio in range
            RequiredRatio::BelowFloor { eta } => Ok(eta),
        })
        .collect::<Result<_, SolverError>>()?;
    let allocation = Allocation::derive(eta, p_t, channel, curve, params)?;
    Ok(SolveReport {
        method: Method::Method1,
        tau_bps: allocation.tau_bps,
        allocation,
        feasible: true,
        outer_candidates_evaluated: outer,
        bisection_iterations_total: sweep.iterations,
        winner: Some(Candidate::Beta { index: index as usize, beta }),
    })
}

/// Zero-rate report used when no candidate fits the budget.
pub(super) fn infeasible_report(
    method: Method,
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
    outer: u64,
    iterations: u64,
) -> Result<SolveReport, SolverError> {
    let n = channel.n_users();
    let allocation = Allocation::derive(vec![1.0; n], vec![0.0; n], channel, curve, params)?;
    Ok(SolveReport {
        method,
        tau_bps: 0.0,
        allocation,
        feasible: false,
        outer_candidates_evaluated: outer,
        bisection_iterations_total: iterations,
        winner: None,
    })
}

#[cfg(test)]
/// Closed-form rate when every user receives power `beta/σ²` relative to
/// noise and no compression is applied.
pub(super) fn uncompressed_rate(beta: f64, params: &SystemParams) -> f64 {
    params.bandwidth_hz * (beta / params.noise_power_w).ln_1p() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::curve::default_curve;
    use crate::model::{check_feasible, Knot};

    fn params() -> SystemParams {
        SystemParams { bandwidth_hz: 1e7, noise_power_w: 1e-12, p_max_w: 6.0, ..Default::default() }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn eta_from_tau_examples() {
        let p = params();
        let c = default_curve();
        // p_t·h/σ² = 1
        assert_eq!(eta_from_tau(1e7, 1e-3, 1e-9, &p, &c).unwrap(), RequiredRatio::Ratio { eta: 1.0, clamped: true });
        match eta_from_tau(2e7, 1e-3, 1e-9, &p, &c).unwrap() {
            RequiredRatio::Ratio { eta, clamped: false } => assert!(rel(eta, 0.5) < 1e-15),
            r => panic!("{r:?}"),
        }
        match eta_from_tau(1e9, 1e-3, 1e-9, &p, &c).unwrap() {
            RequiredRatio::BelowFloor { eta } => assert!(rel(eta, 0.01) < 1e-12),
            r => panic!("{r:?}"),
        }
        assert!(matches!(eta_from_tau(0.0, 1.0, 1e-9, &p, &c), Err(SolverError::NonPositiveRate(_))));
    }

    #[test]
    fn beta_range_examples() {
        let p = params();
        let (lo, hi) = beta_range(&ChannelState::new(vec![1e-9, 2e-9]).unwrap(), &p);
        assert_eq!(lo, 0.0);
        assert!(rel(hi, 4e-9) < 1e-15);
        let (_, hi) = beta_range(&ChannelState::new(vec![1e-9]).unwrap(), &p);
        assert!(rel(hi, 6e-9) < 1e-15);
        let g = 3.7e-10;
        let (_, hi) = beta_range(&ChannelState::new(vec![g, g]).unwrap(), &p);
        assert!(rel(hi, 6.0 * g / 2.0) < 1e-15);
    }

    #[test]
    fn beta_grid_examples() {
        let g = beta_grid((0.0, 4e-9), 5);
        let want = [0.0, 1e-9, 2e-9, 3e-9, 4e-9];
        assert_eq!(g.len(), 5);
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() <= 1e-24);
        }
        assert_eq!(beta_grid((0.0, 7.0), 2), vec![0.0, 7.0]);
        let g = beta_grid((0.0, 1.0), 500);
        assert_eq!(g.len(), 500);
        assert_eq!(g[499], 1.0);
        assert!((g[1] - 1.0 / 499.0).abs() < 1e-18);
    }

    #[test]
    fn endpoint_beta_reaches_uncompressed_rate() {
        let p = params();
        let ch = ChannelState::new(vec![1e-9, 2e-9]).unwrap();
        let c = default_curve();
        let beta_max = beta_range(&ch, &p).1;
        let out =
            bisect_tau(|t| method1_verdict(beta_max, t, &ch, &c, &p), p.tau_lo_init, p.tau_hi_init, p.epsilon).unwrap();
        // mpmath: 1e7·log2(4001)
        assert!(rel(out.tau_bps, 119_661_449.133_456_02) < 1e-9, "{}", out.tau_bps);
    }

    #[test]
    fn report_is_feasible_and_beats_uncompressed() {
        let p = params();
        let ch = ChannelState::new(vec![1e-9, 2e-9]).unwrap();
        let c = default_curve();
        let r = solve_method1(&ch, &c, &p).unwrap();
        assert!(r.feasible);
        assert!(check_feasible(&r.allocation, &p, &c).is_feasible());
        assert!(r.tau_bps >= 119_661_449.133_456_02 - p.epsilon);
        assert_eq!(r.outer_candidates_evaluated, 500);
        assert!(matches!(r.winner, Some(Candidate::Beta { .. })));
    }

    #[test]
    fn single_user_beats_non_semantic() {
        let p = params();
        let ch = ChannelState::new(vec![1e-9]).unwrap();
        let c = default_curve();
        let r = solve_method1(&ch, &c, &p).unwrap();
        let closed = uncompressed_rate(6e-9, &p);
        assert!(r.tau_bps >= closed - p.epsilon);
    }

    #[test]
    fn vanishing_budget_gives_vanishing_rate() {
        let c = default_curve();
        let ch = ChannelState::new(vec![1e-9, 2e-9]).unwrap();
        let mut last = f64::INFINITY;
        for p_max in [1e-3, 1e-6, 1e-9, 1e-12] {
            let p = SystemParams { p_max_w: p_max, ..params() };
            let r = solve_method1(&ch, &c, &p).unwrap();
            assert!(r.tau_bps <= last);
            last = r.tau_bps;
        }
        assert!(last < 1e4, "{last}");
    }

    #[test]
    fn infeasible_everywhere_reports_zero() {
        // a lower bound no allocation can meet
        let p = SystemParams { p_max_w: 1e-15, tau_lo_init: 1e6, ..params() };
        let c = CompLoadCurve::new(vec![Knot::new(1.0, 0.0), Knot::new(0.5, 1.0)]).unwrap();
        let ch = ChannelState::new(vec![1e-9]).unwrap();
        let r = solve_method1(&ch, &c, &p).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.tau_bps, 0.0);
        assert!(r.winner.is_none());
    }
}
