use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use super::channel::ChannelSource;
use super::config::{dbm_to_watts, ConfigError, Scenario};
use super::ExperimentError;
use crate::solvers::{
    solve_equal_power, solve_method1, solve_method2_with, solve_non_semantic, solve_oracle, EtaCandidateSet, Method,
    SolveReport, ORACLE_MAX_USERS,
};

/// Method-2 candidate count above which callers should warn.
pub const METHOD2_WARN_CANDIDATES: u64 = 1_000_000;
/// Method-2 candidate count above which runs are refused unless forced.
pub const METHOD2_MAX_CANDIDATES: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads for the solvers' outer loops; `None` uses rayon's
    /// global pool.
    pub jobs: Option<usize>,
    /// Run Method-2 even past [`METHOD2_MAX_CANDIDATES`].
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub report: SolveReport,
    pub wall_ms: f64,
}

/// All method runs on one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario_id: String,
    pub sweep: Option<(SweepParam, f64)>,
    pub gains: Vec<f64>,
    pub runs: Vec<MethodRun>,
}

/// Number of ratio vectors Method-2 would try on this scenario, or `None`
/// when it overflows `u64`.
pub fn method2_candidate_count(scenario: &Scenario) -> Option<u64> {
    let set = EtaCandidateSet::breakpoints(&scenario.curve);
    if scenario.method2_shared_eta {
        Some(set.values().len() as u64)
    } else {
        set.count(scenario.channel.n_users())
    }
}

fn check_method2_size(scenario: &Scenario, force: bool) -> Result<(), ExperimentError> {
    if !scenario.methods.contains(&Method::Method2) || force {
        return Ok(());
    }
    match method2_candidate_count(scenario) {
        Some(c) if c <= METHOD2_MAX_CANDIDATES => Ok(()),
        count => Err(ExperimentError::TooManyCandidates { count, limit: METHOD2_MAX_CANDIDATES }),
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, ExperimentError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ExperimentError::Threads(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every configured method on the scenario's instance.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<MethodRun>, ExperimentError> {
    if scenario.methods.is_empty() {
        return Err(ConfigError::new("methods", "must list at least one method").into());
    }
    check_method2_size(scenario, opts.force)?;
    if scenario.methods.contains(&Method::Oracle) && scenario.channel.n_users() > ORACLE_MAX_USERS {
        return Err(ConfigError::new(
            "methods",
            format!("oracle supports at most {ORACLE_MAX_USERS} users, scenario has {}", scenario.channel.n_users()),
        )
        .into());
    }
    with_pool(opts.jobs, || {
        scenario
            .methods
            .iter()
            .map(|&method| {
                let (ch, curve, p) = (&scenario.channel, &scenario.curve, &scenario.params);
                let start = Instant::now();
                let report = match method {
                    Method::Method1 => solve_method1(ch, curve, p),
                    Method::Method2 => solve_method2_with(ch, curve, p, scenario.method2_shared_eta),
                    Method::EqualPower => solve_equal_power(ch, curve, p),
                    Method::NonSemantic => solve_non_semantic(ch, p),
                    Method::Oracle => solve_oracle(ch, curve, p, scenario.oracle_points_per_segment),
                }
                .map_err(|source| ExperimentError::Solver { method, source })?;
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                Ok(MethodRun { report, wall_ms })
            })
            .collect()
    })?
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    /// Total power budget, W.
    PMax,
    /// Number of users; gains stay prefix-stable.
    NUsers,
    /// Noise power, dBm.
    NoisePower,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::PMax => "pmax",
            SweepParam::NUsers => "users",
            SweepParam::NoisePower => "noise",
        }
    }

    pub fn axis_label(self) -> &'static str {
        match self {
            SweepParam::PMax => "Total power budget (W)",
            SweepParam::NUsers => "Number of users",
            SweepParam::NoisePower => "Noise power (dBm)",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pmax" => Ok(SweepParam::PMax),
            "users" => Ok(SweepParam::NUsers),
            "noise" => Ok(SweepParam::NoisePower),
            _ => Err(format!("unknown sweep parameter `{s}` (expected pmax, users or noise)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    param: SweepParam,
    values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Result<Self, ConfigError> {
        if values.is_empty() {
            return Err(ConfigError::new("sweep.values", "must not be empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ConfigError::new(format!("sweep.values[{i}]"), "must be finite"));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(ConfigError::new("sweep.values", "must be strictly monotone"));
        }
        if param == SweepParam::NUsers {
            if let Some(i) = values.iter().position(|&v| v < 1.0 || v.fract() != 0.0) {
                return Err(ConfigError::new(format!("sweep.values[{i}]"), "user counts must be positive integers"));
            }
        }
        Ok(SweepSpec { param, values })
    }

    pub fn param(&self) -> SweepParam {
        self.param
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The scenario with the swept parameter overridden.
    pub fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario, ConfigError> {
        let mut s = base.clone();
        match self.param {
            SweepParam::PMax => {
                s.params.p_max_w = value;
                s.params.validate().map_err(|e| ConfigError::new("sweep.values", e.to_string()))?;
            }
            SweepParam::NoisePower => {
                s.params.noise_power_w = dbm_to_watts(value);
                s.params.validate().map_err(|e| ConfigError::new("sweep.values", e.to_string()))?;
            }
            SweepParam::NUsers => {
                let source: ChannelSource = base.channel_source.with_users(value as usize)?;
                s.channel = source.build()?;
                s.channel_source = source;
            }
        }
        Ok(s)
    }
}

/// Long-format sweep result: one [`ScenarioResult`] per sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: SweepParam,
    pub points: Vec<ScenarioResult>,
}

impl SweepTable {
    /// `(method, [(sweep value, tau)])` in first-appearance order.
    pub fn series(&self) -> Vec<(Method, Vec<(f64, f64)>)> {
        let mut out: Vec<(Method, Vec<(f64, f64)>)> = Vec::new();
        for point in &self.points {
            let x = point.sweep.map(|(_, v)| v).unwrap_or(f64::NAN);
            for run in &point.runs {
                let y = run.report.tau_bps;
                match out.iter_mut().find(|(m, _)| *m == run.report.method) {
                    Some((_, pts)) => pts.push((x, y)),
                    None => out.push((run.report.method, vec![(x, y)])),
                }
            }
        }
        out
    }

    pub fn into_results(self) -> Vec<ScenarioResult> {
        self.points
    }
}

/// Runs the scenario once per sweep value, in sweep order.
pub fn run_sweep(base: &Scenario, sweep: &SweepSpec, opts: &RunOptions) -> Result<SweepTable, ExperimentError> {
    let mut points = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let scenario = sweep.apply(base, value)?;
        let runs = run_scenario(&scenario, opts)?;
        points.push(ScenarioResult {
            scenario_id: format!("{}={}", sweep.param, value),
            sweep: Some((sweep.param, value)),
            gains: scenario.channel.gains().to_vec(),
            runs,
        });
    }
    Ok(SweepTable { param: sweep.param, points })
}

/// Wraps a single run for export.
pub fn scenario_result(id: &str, scenario: &Scenario, runs: Vec<MethodRun>) -> ScenarioResult {
    ScenarioResult { scenario_id: id.to_string(), sweep: None, gains: scenario.channel.gains().to_vec(), runs }
}
