use std::f64::consts::LN_2;

use rayon::prelude::*;

use super::bisection::{bisect_tau, budget_verdict, Verdict};
use super::method1::infeasible_report;
use super::{Candidate, Method, SolveReport, SolverError, Sweep};
use crate::model::{Allocation, ChannelState, CompLoadCurve, ModelError, SystemParams};

/// Largest user count the grid oracle accepts.
pub const ORACLE_MAX_USERS: usize = 3;

/// Exponent `tau·eta/B` above which transmit power is treated as unbounded.
const EXPONENT_CAP: f64 = 1024.0;

/// Transmit power reaching rate target `tau` at ratio `eta`:
/// `(2^(tau·eta/B) − 1)·σ²/h`. Returns `+inf` past the overflow guard.
pub fn p_t_from_tau(tau: f64, eta: f64, gain: f64, params: &SystemParams) -> Result<f64, SolverError> {
    if !(tau >= 0.0) {
        return Err(SolverError::NonPositiveRate(tau));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(ModelError::InvalidRatio(eta).into());
    }
    if !(gain > 0.0) {
        return Err(ModelError::NonPositiveGain(gain).into());
    }
    Ok(power_for_rate(tau * eta / params.bandwidth_hz, params.noise_power_w / gain))
}

#[inline]
fn power_for_rate(exponent: f64, noise_over_gain: f64) -> f64 {
    if exponent > EXPONENT_CAP {
        f64::INFINITY
    } else {
        (exponent * LN_2).exp_m1() * noise_over_gain
    }
}

/// Per-user candidate compression ratios, identical for every user and
/// listed in descending order starting at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaCandidateSet {
    values: Vec<f64>,
}

impl EtaCandidateSet {
    /// The curve's breakpoints `{1, D_1, …, D_S}`.
    pub fn breakpoints(curve: &CompLoadCurve) -> Self {
        EtaCandidateSet { values: curve.breakpoints() }
    }

    /// Breakpoints plus `points_per_segment` equidistant interior points in
    /// every segment.
    pub fn refined(curve: &CompLoadCurve, points_per_segment: usize) -> Self {
        let mut values = Vec::with_capacity(curve.n_segments() * (points_per_segment + 1) + 1);
        let step = (points_per_segment + 1) as f64;
        for seg in curve.segments() {
            values.push(seg.eta_hi);
            for j in 1..=points_per_segment {
                values.push(seg.eta_hi - (seg.eta_hi - seg.eta_lo) * (j as f64 / step));
            }
        }
        values.push(curve.floor());
        EtaCandidateSet { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `k^N`, or `None` on overflow.
    pub fn count(&self, n_users: usize) -> Option<u64> {
        let exp = u32::try_from(n_users).ok()?;
        (self.values.len() as u64).checked_pow(exp)
    }

    /// Digit indices of the `index`-th vector in lexicographic order, user 0
    /// most significant.
    fn digits(&self, mut index: u64, n_users: usize, out: &mut [usize]) {
        let k = self.values.len() as u64;
        for slot in out[..n_users].iter_mut().rev() {
            *slot = (index % k) as usize;
            index /= k;
        }
    }

    pub fn vector_at(&self, index: u64, n_users: usize) -> Vec<f64> {
        let mut digits = vec![0; n_users];
        self.digits(index, n_users, &mut digits);
        digits.iter().map(|&d| self.values[d]).collect()
    }

    pub fn into_vectors(self, n_users: usize) -> EtaVectors {
        let end = self.count(n_users).unwrap_or(u64::MAX);
        EtaVectors { set: self, n_users, next: 0, end }
    }
}

/// Cartesian product of a candidate set over all users.
#[derive(Debug, Clone)]
pub struct EtaVectors {
    set: EtaCandidateSet,
    n_users: usize,
    next: u64,
    end: u64,
}

impl Iterator for EtaVectors {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.next >= self.end {
            return None;
        }
        let v = self.set.vector_at(self.next, self.n_users);
        self.next += 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.end - self.next).unwrap_or(usize::MAX);
        (left, Some(left))
    }
}

/// All `(S+1)^N` breakpoint vectors in lexicographic order.
pub fn enumerate_eta_vectors(curve: &CompLoadCurve, n_users: usize) -> EtaVectors {
    EtaCandidateSet::breakpoints(curve).into_vectors(n_users)
}

/// Budget check for a fixed ratio vector at rate target `tau`.
pub fn method2_verdict(
    eta: &[f64],
    tau: f64,
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
) -> Verdict {
    let floor = curve.floor();
    if eta.len() != channel.n_users() || eta.iter().any(|&e| !(e >= floor && e <= 1.0)) {
        return Verdict::Over;
    }
    // same summation order as the search loop
    let mut p_sum: f64 = eta.iter().map(|&e| curve.load_in_domain(e) * params.p0_w_per_load).sum();
    for (&e, &h) in eta.iter().zip(channel.gains()) {
        p_sum += power_for_rate(tau * e / params.bandwidth_hz, params.noise_power_w / h);
    }
    budget_verdict(p_sum, params)
}

/// Breakpoint-enumeration heuristic over the full Cartesian product.
pub fn solve_method2(
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
) -> Result<SolveReport, SolverError> {
    solve_method2_with(channel, curve, params, false)
}

/// As [`solve_method2`]; with `shared_eta` every user takes the same
/// breakpoint, so only `S+1` vectors are tried.
pub fn solve_method2_with(
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
    shared_eta: bool,
) -> Result<SolveReport, SolverError> {
    let set = EtaCandidateSet::breakpoints(curve);
    search_vectors(Method::Method2, &set, shared_eta, channel, curve, params)
}

/// Grid oracle: breakpoint enumeration over a refined per-segment grid.
/// With `points_per_segment = 0` it coincides with [`solve_method2`].
pub fn solve_oracle(
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
    points_per_segment: usize,
) -> Result<SolveReport, SolverError> {
    if channel.n_users() > ORACLE_MAX_USERS {
        return Err(SolverError::OracleTooLarge { n_users: channel.n_users(), max: ORACLE_MAX_USERS });
    }
    let set = EtaCandidateSet::refined(curve, points_per_segment);
    search_vectors(Method::Oracle, &set, false, channel, curve, params)
}

fn search_vectors(
    method: Method,
    set: &EtaCandidateSet,
    shared: bool,
    channel: &ChannelState,
    curve: &CompLoadCurve,
    params: &SystemParams,
) -> Result<SolveReport, SolverError> {
    params.validate()?;
    let n = channel.n_users();
    let k = set.values().len();
    let total =
        if shared { k as u64 } else { set.count(n).ok_or(SolverError::CandidateOverflow { values: k, users: n })? };
    let vector = |index: u64| -> Vec<f64> {
        if shared {
            vec![set.values()[index as usize]; n]
        } else {
            set.vector_at(index, n)
        }
    };
    let comp_w: Vec<f64> = set.values().iter().map(|&v| curve.load_in_domain(v) * params.p0_w_per_load).collect();
    let noise_over_gain: Vec<f64> = channel.gains().iter().map(|h| params.noise_power_w / h).collect();

    let sweep = (0..total)
        .into_par_iter()
        .map_init(
            || vec![0usize; n],
            |digits, index| {
                if shared {
                    digits.iter_mut().for_each(|d| *d = index as usize);
                } else {
                    set.digits(index, n, digits);
                }
                let p_comp: f64 = digits.iter().map(|&d| comp_w[d]).sum();
                if budget_verdict(p_comp, params) == Verdict::Over {
                    return Ok::<_, SolverError>(Sweep::single(index, None, 0));
                }
                let out = bisect_tau(
                    |tau| {
                        let mut p_sum = p_comp;
                        for (&d, &ng) in digits.iter().zip(&noise_over_gain) {
                            p_sum += power_for_rate(tau * set.values()[d] / params.bandwidth_hz, ng);
                        }
                        budget_verdict(p_sum, params)
                    },
                    params.tau_lo_init,
                    params.tau_hi_init,
                    params.epsilon,
                )?;
                Ok(Sweep::single(index, out.converged.then_some(&out), out.iterations))
            },
        )
        .try_reduce(Sweep::default, |a, b| Ok(a.merge(b)))?;

    let Some((tau, index)) = sweep.best else {
        return infeasible_report(method, channel, curve, params, total, sweep.iterations);
    };
    let eta = vector(index);
    let p_t: Vec<f64> =
        eta.iter().zip(channel.gains()).map(|(&e, &h)| p_t_from_tau(tau, e, h, params)).collect::<Result<_, _>>()?;
    let allocation = Allocation::derive(eta.clone(), p_t, channel, curve, params)?;
    Ok(SolveReport {
        method,
        tau_bps: allocation.tau_bps,
        allocation,
        feasible: true,
        outer_candidates_evaluated: total,
        bisection_iterations_total: sweep.iterations,
        winner: Some(Candidate::EtaVector { index, eta }),
    })
}
