use super::method1::infeasible_report;
use super::{Method, SolveReport, SolverError};
use crate::model::{capacity_unchecked, Allocation, ChannelState, CompLoadCurve, SystemParams};

/// Interval tolerance of the per-segment golden-section search, in `eta`.
const GOLDEN_TOL: f64 = 1e-9;

/// Rate of one user holding a fixed power share and compressing to `eta`.
fn share_rate(eta: f64, share_w: f64, gain: f64, curve: &CompLoadCurve, params: &SystemParams) -> f64 {
    let p_t = (share_w - curve.load_in_domain(eta) * params.p0_w_per_load).max(0.0);
    capacity_unchecked(p_t, gain, params) / eta
}

/// Maximises `f` on `[lo, hi]` by golden-section search; returns `(x, f(x))`.
fn golden_max(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Best compression ratio for a single user with a fixed power share.
///
/// Each segment's interior is searched by golden section; segment
/// endpoints and the budget-limited floor are compared explicitly, since the
/// objective has kinks at the knots. Returns `None` if the share is not
/// positive.
pub(crate) fn best_ratio_for_share(
    share_w: f64,
    gain: f64,
    curve: &CompLoadCurve,
    params: &SystemParams,
) -> Option<(f64, f64)> {
    if !(share_w > 0.0) {
        return None;
    }
    let eta_min =
        if params.p0_w_per_load > 0.0 { curve.min_eta_for_load(share_w / params.p0_w_per_load) } else { curve.floor() };
    let f = |eta: f64| share_rate(eta, share_w, gain, curve, params);
    let mut best = (1.0, f(1.0));
    let mut consider = |x: f64, v: f64| {
        if v > best.1 {
            best = (x, v);
        }
    };
    for seg in curve.segments() {
        let lo = seg.eta_lo.max(eta_min);
        let hi = seg.eta_hi;
        if lo > hi {
            continue;
        }
        consider(hi, f(hi));
        consider(lo, f(lo));
        if hi - lo > GOLDEN_TOL {
            let (x, v) = golden_max(lo, hi, f);
            consider(x, v);
        }
    }
    Some(best)
}

/// Equal-split baseline: each user gets `P^max/N` and independently picks
/// the compression ratio maximising its own equivalent rate.
pub fn solve_equal_power(
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
) -> Result<SolveReport, SolverError> {
    params.validate()?;
    let n = channel.n_users();
    let share_w = params.p_max_w / n as f64;
    let mut eta = Vec::with_capacity(n);
    let mut p_t = Vec::with_capacity(n);
    for &h in channel.gains() {
        let Some((e, _)) = best_ratio_for_share(share_w, h, curve, params) else {
            return infeasible_report(Method::EqualPower, channel, curve, params, n as u64, 0);
        };
        eta.push(e);
        p_t.push((share_w - curve.load_in_domain(e) * params.p0_w_per_load).max(0.0));
    }
    let allocation = Allocation::derive(eta, p_t, channel, curve, params)?;
    Ok(SolveReport {
        method: Method::EqualPower,
        tau_bps: allocation.tau_bps,
        allocation,
        feasible: true,
        outer_candidates_evaluated: n as u64,
        bisection_iterations_total: 0,
        winner: None,
    })
}

/// Uncompressed baseline: `eta = 1`, no computation, transmit power
/// inversely proportional to channel gain so every user sees the same SNR.
pub fn solve_non_semantic(channel: &ChannelState, params: &SystemParams) -> Result<SolveReport, SolverError> {
    params.validate()?;
    let beta_max = params.p_max_w / channel.inverse_gain_sum();
    let n = channel.n_users();
    let p_t_w: Vec<f64> = channel.gains().iter().map(|h| beta_max / h).collect();
    let rates_bps: Vec<f64> =
        p_t_w.iter().zip(channel.gains()).map(|(&p, &h)| capacity_unchecked(p, h, params)).collect();
    let allocation = Allocation::from_parts(vec![1.0; n], p_t_w, vec![0.0; n], rates_bps)?;
    Ok(SolveReport {
        method: Method::NonSemantic,
        tau_bps: allocation.tau_bps,
        allocation,
        feasible: true,
        outer_candidates_evaluated: 1,
        bisection_iterations_total: 0,
        winner: None,
    })
}
