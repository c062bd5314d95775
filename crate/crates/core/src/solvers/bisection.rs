use super::SolverError;
use crate::model::SystemParams;

/// Relative overshoot of `P^max` still accepted by the bisection, so that
/// allocations summing to the budget up to rounding stay feasible.
pub const BUDGET_TOLERANCE: f64 = 1e-12;

/// Outcome of testing one rate target against the power budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Power strictly below budget: the target can be raised.
    Within,
    /// Power exactly on budget: stop here.
    Tight,
    /// Power above budget, or the target is unreachable.
    Over,
}

impl From<bool> for Verdict {
    fn from(feasible: bool) -> Self {
        if feasible {
            Verdict::Within
        } else {
            Verdict::Over
        }
    }
}

/// Classifies a total power draw against `P^max`. Only bitwise equality is
/// `Tight`; draws up to [`BUDGET_TOLERANCE`] above the budget are `Within`.
pub fn budget_verdict(p_sum: f64, params: &SystemParams) -> Verdict {
    let budget = params.p_max_w;
    if p_sum == budget {
        Verdict::Tight
    } else if p_sum <= budget * (1.0 + BUDGET_TOLERANCE) {
        Verdict::Within
    } else {
        // also catches NaN and +inf
        Verdict::Over
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOutcome {
    /// Largest target known to fit the budget: the final lower bound, or the
    /// midpoint at which the budget was met exactly.
    pub tau_bps: f64,
    pub iterations: u64,
    /// False only when the initial lower bound already exceeds the budget.
    pub converged: bool,
    pub exact_break: bool,
}

/// Feasibility bisection over `[lo, hi]`. `verdict_at` must be monotone:
/// feasible below some threshold and over budget above it.
pub fn bisect_tau<F>(mut verdict_at: F, lo: f64, hi: f64, epsilon: f64) -> Result<BisectionOutcome, SolverError>
where
    F: FnMut(f64) -> Verdict,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi && epsilon > 0.0) {
        return Err(SolverError::InvalidBounds { lo, hi, epsilon });
    }
    match verdict_at(lo) {
        Verdict::Over => {
            return Ok(BisectionOutcome { tau_bps: lo, iterations: 0, converged: false, exact_break: false })
        }
        Verdict::Tight => {
            return Ok(BisectionOutcome { tau_bps: lo, iterations: 0, converged: true, exact_break: true })
        }
        Verdict::Within => {}
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut iterations = 0;
    while hi - lo > epsilon {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        match verdict_at(mid) {
            Verdict::Within => lo = mid,
            Verdict::Over => hi = mid,
            Verdict::Tight => {
                return Ok(BisectionOutcome { tau_bps: mid, iterations, converged: true, exact_break: true })
            }
        }
    }
    Ok(BisectionOutcome { tau_bps: lo, iterations, converged: true, exact_break: false })
}
