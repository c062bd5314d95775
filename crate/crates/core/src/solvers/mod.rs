//! Max-min rate solvers.
//!
//! Every solver fixes part of the decision and bisects the common rate
//! target `tau` against the total-power budget:
//!
//! * [`solve_method1`] fixes transmit powers `p_n = beta / h_n` over a grid
//!   of `beta` and derives the compression ratio each user needs for `tau`.
//! * [`solve_method2`] fixes a compression-ratio vector drawn from the load
//!   curve's breakpoints and derives the transmit power each user needs.
//! * [`solve_oracle`] is `solve_method2` over a refined per-segment grid,
//!   used to validate both heuristics on small instances.
//! * [`solve_equal_power`] and [`solve_non_semantic`] are reference baselines.
//!
//! Outer candidate loops run on rayon; the reduction picks the highest
//! `tau` and breaks ties toward the lowest candidate index, so results do not
//! depend on the thread count.

mod baselines;
mod bisection;
mod method1;
mod method2;

pub use baselines::{solve_equal_power, solve_non_semantic};
pub use bisection::{bisect_tau, budget_verdict, BisectionOutcome, Verdict};
pub use method1::{beta_grid, beta_range, eta_from_tau, method1_verdict, solve_method1, RequiredRatio};
pub use method2::{
    enumerate_eta_vectors, method2_verdict, p_t_from_tau, solve_method2, solve_method2_with, solve_oracle,
    EtaCandidateSet, EtaVectors, ORACLE_MAX_USERS,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Allocation, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Method1,
    Method2,
    EqualPower,
    NonSemantic,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::Method1, Method::Method2, Method::EqualPower, Method::NonSemantic, Method::Oracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Method1 => "method1",
            Method::Method2 => "method2",
            Method::EqualPower => "equal_power",
            Method::NonSemantic => "non_semantic",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            format!("unknown method `{s}` (expected one of method1, method2, equal_power, non_semantic, oracle)")
        })
    }
}

/// Outer candidate that produced a solver's reported allocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    Beta { index: usize, beta: f64 },
    EtaVector { index: u64, eta: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    /// Achieved worst-user equivalent rate, equal to `allocation.tau_bps`.
    pub tau_bps: f64,
    pub allocation: Allocation,
    pub feasible: bool,
    pub outer_candidates_evaluated: u64,
    pub bisection_iterations_total: u64,
    pub winner: Option<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("bisection bounds must be finite with lo < hi and epsilon > 0 (lo={lo}, hi={hi}, epsilon={epsilon})")]
    InvalidBounds { lo: f64, hi: f64, epsilon: f64 },
    #[error("rate target must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("candidate count {values}^{users} overflows")]
    CandidateOverflow { values: usize, users: usize },
    #[error("oracle supports at most {max} users, got {n_users}")]
    OracleTooLarge { n_users: usize, max: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Best-so-far candidate in an outer loop, with work counters.
#[derive(Debug, Clone, Copy, Default)]
struct Sweep {
    best: Option<(f64, u64)>,
    iterations: u64,
}

impl Sweep {
    fn single(index: u64, outcome: Option<&BisectionOutcome>, iterations: u64) -> Self {
        Sweep { best: outcome.map(|o| (o.tau_bps, index)), iterations }
    }

    /// Higher tau wins; equal tau goes to the earlier candidate.
    fn merge(self, other: Sweep) -> Sweep {
        let best = match (self.best, other.best) {
            (Some(a), Some(b)) => {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
            (a, None) => a,
            (None, b) => b,
        };
        Sweep { best, iterations: self.iterations + other.iterations }
    }
}
