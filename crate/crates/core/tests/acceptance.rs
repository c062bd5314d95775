//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{rel, seeded_instances, Instance};
use pscom_core::experiments::{
    export_csv, run_scenario, run_sweep, scenario_result, ExportOptions, MethodRun, RunOptions, ScenarioConfig,
    ScenarioResult, SweepParam, SweepSpec,
};
use pscom_core::solvers::{
    method1_verdict, method2_verdict, p_t_from_tau, solve_equal_power, solve_method1, solve_method2,
    solve_non_semantic, solve_oracle, Candidate, Method, SolveReport, Verdict,
};
use pscom_core::{channel_capacity, equivalent_rate, ChannelState, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("runtime {elapsed:?} exceeds {limit:?}"))
}

/// Non-semantic rate on h = [1e-9, 2e-9], σ² = 1e-12 W, B = 10 MHz,
/// P = 6 W equals 1e7·log2(4001).
fn closed_form_baseline() -> Outcome {
    let params = SystemParams { bandwidth_hz: 1e7, noise_power_w: 1e-12, p_max_w: 6.0, ..Default::default() };
    let channel = ChannelState::new(vec![1e-9, 2e-9]).unwrap();
    let start = Instant::now();
    let r = solve_non_semantic(&channel, &params).unwrap();
    let elapsed = start.elapsed();
    // mpmath, 30 digits: 119661449.133456018847538302903
    let want = 119_661_449.133_456_02;
    ensure(rel(r.tau_bps, want) <= 1e-9, || format!("tau {} vs {want}", r.tau_bps))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("tau = {:.10e} (rel err {:.1e}), {elapsed:?}", r.tau_bps, rel(r.tau_bps, want)))
}

/// Transmit power from a rate target, fed back through capacity and
/// equivalent rate, reproduces the target.
fn inverse_consistency() -> Outcome {
    let params = SystemParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let tau = 10f64.powf(rng.gen_range(3.0..9.5));
        let eta = rng.gen_range(0.2..=1.0);
        let h = 10f64.powf(rng.gen_range(-10.0..-8.0));
        let p_t = p_t_from_tau(tau, eta, h, &params).unwrap();
        let back = equivalent_rate(channel_capacity(p_t, h, &params).unwrap(), eta).unwrap();
        worst = worst.max(rel(back, tau));
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-9, || format!("worst relative error {worst:.3e}"))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("1000 triples, worst rel err {worst:.2e}, {elapsed:?}"))
}

struct Solved {
    inst: Instance,
    m1: SolveReport,
    m2: SolveReport,
    ns: SolveReport,
}

fn solve_all(instances: Vec<Instance>) -> Vec<Solved> {
    instances
        .into_iter()
        .map(|inst| {
            let m1 = solve_method1(&inst.channel, &inst.curve, &inst.params).unwrap();
            let m2 = solve_method2(&inst.channel, &inst.curve, &inst.params).unwrap();
            let ns = solve_non_semantic(&inst.channel, &inst.params).unwrap();
            Solved { inst, m1, m2, ns }
        })
        .collect()
}

/// At the winning candidate the budget holds at tau and fails at tau + 10ε.
fn bisection_certificate(solved: &[Solved]) -> Outcome {
    for s in solved {
        let (ch, c, p) = (&s.inst.channel, &s.inst.curve, &s.inst.params);
        let step = 10.0 * p.epsilon;
        let Some(Candidate::Beta { beta, .. }) = s.m1.winner else {
            return Err(format!("instance {}: method1 has no winner", s.inst.id));
        };
        let (at, above) =
            (method1_verdict(beta, s.m1.tau_bps, ch, c, p), method1_verdict(beta, s.m1.tau_bps + step, ch, c, p));
        ensure(at != Verdict::Over && above == Verdict::Over, || {
            format!("instance {}: method1 verdicts {at:?} at tau, {above:?} at tau+10eps", s.inst.id)
        })?;
        let Some(Candidate::EtaVector { eta, .. }) = &s.m2.winner else {
            return Err(format!("instance {}: method2 has no winner", s.inst.id));
        };
        let (at, above) =
            (method2_verdict(eta, s.m2.tau_bps, ch, c, p), method2_verdict(eta, s.m2.tau_bps + step, ch, c, p));
        ensure(at != Verdict::Over && above == Verdict::Over, || {
            format!("instance {}: method2 verdicts {at:?} at tau, {above:?} at tau+10eps", s.inst.id)
        })?;
    }
    Ok(format!("{} instances, both methods certified", solved.len()))
}

fn default_scenario_runs(jobs: Option<usize>) -> Vec<MethodRun> {
    let scenario = ScenarioConfig::default().resolve().unwrap();
    run_scenario(&scenario, &RunOptions { jobs, force: false }).unwrap()
}

fn tau_of(runs: &[MethodRun], m: Method) -> f64 {
    runs.iter().find(|r| r.report.method == m).unwrap().report.tau_bps
}

/// Both heuristics dominate the uncompressed baseline, and on the default
/// scenario method2 ≥ method1 > equal power.
fn dominance(solved: &[Solved]) -> Outcome {
    for s in solved {
        let eps = s.inst.params.epsilon;
        ensure(s.m1.tau_bps >= s.ns.tau_bps - eps, || {
            format!("instance {}: method1 {} < non_semantic {}", s.inst.id, s.m1.tau_bps, s.ns.tau_bps)
        })?;
        ensure(s.m2.tau_bps >= s.ns.tau_bps - eps, || {
            format!("instance {}: method2 {} < non_semantic {}", s.inst.id, s.m2.tau_bps, s.ns.tau_bps)
        })?;
    }
    let runs = default_scenario_runs(None);
    let eps = SystemParams::default().epsilon;
    let (m1, m2, ep) =
        (tau_of(&runs, Method::Method1), tau_of(&runs, Method::Method2), tau_of(&runs, Method::EqualPower));
    ensure(m2 >= m1 - eps, || format!("default: method2 {m2} < method1 {m1}"))?;
    ensure(m1 > ep && m2 > ep, || format!("default: equal_power {ep} not below method1 {m1} / method2 {m2}"))?;
    Ok(format!("{} instances; default m1={m1:.6e} m2={m2:.6e} ep={ep:.6e}", solved.len()))
}

/// Knots-only oracle equals method2; a 50-point-per-segment oracle on N = 2
/// is at least as good as either heuristic.
fn oracle_equivalence(solved: &[Solved]) -> Outcome {
    let mut knots_only = 0;
    let mut fine = 0;
    for s in solved.iter().filter(|s| s.inst.channel.n_users() <= 3) {
        let (ch, c, p) = (&s.inst.channel, &s.inst.curve, &s.inst.params);
        let o = solve_oracle(ch, c, p, 0).unwrap();
        ensure(rel(o.tau_bps, s.m2.tau_bps) <= 1e-9, || {
            format!("instance {}: knots-only oracle {} vs method2 {}", s.inst.id, o.tau_bps, s.m2.tau_bps)
        })?;
        knots_only += 1;
        if ch.n_users() == 2 && fine < 5 {
            let start = Instant::now();
            let o = solve_oracle(ch, c, p, 50).unwrap();
            within(start.elapsed(), Duration::from_secs(10))?;
            let best = s.m1.tau_bps.max(s.m2.tau_bps);
            ensure(o.tau_bps >= best - p.epsilon, || {
                format!("instance {}: fine oracle {} below heuristics {best}", s.inst.id, o.tau_bps)
            })?;
            fine += 1;
        }
    }
    Ok(format!("{knots_only} knots-only matches, {fine} fine-grid (N=2, 50 pts/segment) checks"))
}

fn check_trend(
    label: &str,
    table: &pscom_core::experiments::SweepTable,
    increasing: bool,
    eps: f64,
) -> Result<(), String> {
    for (m, pts) in table.series() {
        for w in pts.windows(2) {
            let ok = if increasing { w[1].1 >= w[0].1 - eps } else { w[1].1 <= w[0].1 + eps };
            ensure(ok, || format!("{label}: {m} goes {} -> {} between {} and {}", w[0].1, w[1].1, w[0].0, w[1].0))?;
        }
    }
    Ok(())
}

/// Sweep trends on the default seeded scenario.
fn trend_reproduction() -> Outcome {
    let base = ScenarioConfig::default().resolve().unwrap();
    let opts = RunOptions::default();
    let eps = base.params.epsilon;
    let start = Instant::now();

    let pmax =
        run_sweep(&base, &SweepSpec::new(SweepParam::PMax, vec![3.0, 4.0, 5.0, 6.0, 7.0]).unwrap(), &opts).unwrap();
    check_trend("pmax", &pmax, true, eps)?;
    let users_base = pscom_core::experiments::Scenario {
        params: SystemParams { p_max_w: 6.0, ..base.params.clone() },
        ..base.clone()
    };
    let users =
        run_sweep(&users_base, &SweepSpec::new(SweepParam::NUsers, (2..=7).map(f64::from).collect()).unwrap(), &opts)
            .unwrap();
    check_trend("users", &users, false, eps)?;
    let noise = run_sweep(
        &base,
        &SweepSpec::new(SweepParam::NoisePower, vec![-100.0, -95.0, -90.0, -85.0, -80.0]).unwrap(),
        &opts,
    )
    .unwrap();
    check_trend("noise", &noise, false, eps)?;

    let drops: Vec<(Method, f64)> =
        noise.series().into_iter().map(|(m, pts)| (m, (pts[0].1 - pts[pts.len() - 1].1) / pts[0].1)).collect();
    let ns_drop = drops.iter().find(|(m, _)| *m == Method::NonSemantic).unwrap().1;
    for &(m, d) in &drops {
        if m != Method::NonSemantic {
            ensure(ns_drop < d, || format!("non_semantic drop {ns_drop:.4} not below {m} drop {d:.4}"))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    let summary: Vec<String> = drops.iter().map(|(m, d)| format!("{m}={:.1}%", d * 100.0)).collect();
    Ok(format!("pmax/users/noise trends hold; noise drops {}; {elapsed:?}", summary.join(" ")))
}

/// Method2 allocations give every user the same rate to within 2ε.
fn equal_rate_structure(solved: &[Solved]) -> Outcome {
    let mut worst: f64 = 0.0;
    for s in solved {
        let rates = &s.m2.allocation.rates_bps;
        let spread = rates.iter().copied().fold(f64::MIN, f64::max) - rates.iter().copied().fold(f64::MAX, f64::min);
        ensure(spread <= 2.0 * s.inst.params.epsilon, || format!("instance {}: rate spread {spread}", s.inst.id))?;
        worst = worst.max(spread);
    }
    Ok(format!("{} instances, worst spread {worst:.2e} bit/s", solved.len()))
}

fn dominance_results(instances: &[Instance], jobs: Option<usize>) -> Vec<ScenarioResult> {
    let pool = jobs.map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap());
    let run = || {
        let mut out: Vec<ScenarioResult> = instances
            .iter()
            .map(|inst| {
                let runs = [
                    solve_method1(&inst.channel, &inst.curve, &inst.params),
                    solve_method2(&inst.channel, &inst.curve, &inst.params),
                    solve_equal_power(&inst.channel, &inst.curve, &inst.params),
                    solve_non_semantic(&inst.channel, &inst.params),
                ]
                .into_iter()
                .map(|r| MethodRun { report: r.unwrap(), wall_ms: 0.0 })
                .collect();
                ScenarioResult {
                    scenario_id: format!("instance-{}", inst.id),
                    sweep: None,
                    gains: inst.channel.gains().to_vec(),
                    runs,
                }
            })
            .collect();
        let scenario = ScenarioConfig::default().resolve().unwrap();
        out.push(scenario_result("default", &scenario, default_scenario_runs(jobs)));
        out
    };
    match pool {
        Some(p) => p.install(run),
        None => run(),
    }
}

/// CSVs from the dominance suite are identical across reruns and with a
/// single worker thread.
fn determinism(instances: &[Instance]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, jobs) in [None, None, Some(1)].into_iter().enumerate() {
        let results = dominance_results(instances, jobs);
        let paths = export_csv(&results, &dir.path().join(format!("run{k}")), &ExportOptions::default()).unwrap();
        files.push((std::fs::read(&paths.summary).unwrap(), std::fs::read(&paths.detail).unwrap()));
    }
    ensure(files[0] == files[1], || "summary/detail differ between identical runs".into())?;
    ensure(files[0] == files[2], || "summary/detail differ with one worker thread".into())?;
    Ok(format!("3 exports identical ({} + {} bytes)", files[0].0.len(), files[0].1.len()))
}

type Criterion<'a> = Box<dyn FnOnce() -> Outcome + 'a>;

fn main() {
    let start = Instant::now();
    let solved_start = Instant::now();
    let solved = solve_all(seeded_instances(100));
    let solve_time = solved_start.elapsed();

    let mut criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("C1 closed-form baseline", Box::new(closed_form_baseline)),
        ("C2 inverse consistency", Box::new(inverse_consistency)),
        (
            "C3 bisection certificate",
            Box::new(|| {
                within(solve_time, Duration::from_secs(30))?;
                bisection_certificate(&solved)
            }),
        ),
        (
            "C4 dominance",
            Box::new(|| {
                let t = Instant::now();
                let out = dominance(&solved)?;
                within(solve_time + t.elapsed(), Duration::from_secs(60))?;
                Ok(out)
            }),
        ),
        (
            "C5 oracle equivalence",
            Box::new(|| {
                let t = Instant::now();
                let out = oracle_equivalence(&solved)?;
                within(t.elapsed(), Duration::from_secs(60))?;
                Ok(out)
            }),
        ),
        ("C6 trend reproduction", Box::new(trend_reproduction)),
        ("C7 equal-rate structure", Box::new(|| equal_rate_structure(&solved))),
        ("C8 determinism", Box::new(|| determinism(&seeded_instances(100)))),
    ];

    let mut failed = 0;
    for (name, check) in criteria.drain(..) {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed in {:?}", 8 - failed, start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
