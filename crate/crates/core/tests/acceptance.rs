//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. The long runs are shared between criteria and executed
//! in parallel.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use csflab_core::domain::{make_grid, FlowParams};
use csflab_core::estimates::{
    barrier_residual, bisect_barrier_amplitude, check_decay, check_ordering, check_poincare, fd_barrier_residual,
    BarrierSpec, CheckInput, CheckRegistry, CheckRequest, DecayOptions, EstimateReport, FdBarrier, Verdict,
};
use csflab_core::flow::{
    build_initial, evolve, uniform_samples, InitialDataRecipe, PressureForm, Scheme, SchemeRegistry, SpeedForm, Trace,
};
use csflab_core::io::{self, RunConfig};
use csflab_core::run::{execute, RunOutcome};
use csflab_core::soliton::translator_speed;

// Pinned tolerances.
const SPEED_EXACT_TOL: f64 = 1e-10;
const SPEED_QUAD_TOL: f64 = 1e-8;
const STATIONARITY_TOL: f64 = 1e-3;
const SECOND_ORDER_RATIO: f64 = 3.5;
const CONVERGENCE_TOL: f64 = 0.02;
const MONOTONE_AFTER: f64 = 2.0;
const HARNACK_TOL: f64 = 1e-6;
const ENTROPY_EPSILON: f64 = 0.2;
const ENTROPY_WINDOW: f64 = 1.0;
const ENTROPY_TOL: f64 = 0.05;
const ENTROPY_FLOOR_FACTOR: f64 = 1e-6;
const DISSIPATION_RATIO: f64 = 0.1;
const WIDTH_TOL: f64 = 1e-2;
const BARRIER_TOL: f64 = 1e-10;
const BARRIER_DELTA: f64 = 1e-4;
const BARRIER_SAMPLES: usize = 200;
const FD_BARRIER_TOL: f64 = 1e-8;
const POINCARE_SLACK_TOL: f64 = 1e-12;
const POINCARE_ORACLE_TOL: f64 = 1e-10;
const DECAY_VARIATION: f64 = 2.0;
const ORDERING_TOL: f64 = 1e-6;

// The long convergence run shared by criteria 3–7, 12 and 14.
const LONG_ALPHA: f64 = 1.0;
const LONG_N: usize = 512;
const LONG_T_END: f64 = 20.0;
const LONG_SAMPLES: usize = 801;

struct Line {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
}

impl Line {
    fn new(id: u8, title: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            id,
            title,
            pass,
            detail: detail.into(),
        }
    }
}

fn long_config(n: usize, t_end: f64, samples: usize) -> RunConfig {
    let mut cfg = RunConfig::new(FlowParams::new(LONG_ALPHA, n, t_end), InitialDataRecipe::sin3_perturbation());
    cfg.sample_times = uniform_samples(0.0, t_end, samples);
    cfg
}

fn long_run(n: usize, t_end: f64, samples: usize) -> RunOutcome {
    execute(&long_config(n, t_end, samples), &SchemeRegistry::default(), &CheckRegistry::default())
        .expect("convergence run integrates")
}

fn simple_run(recipe: &InitialDataRecipe, alpha: f64, n: usize, t_end: f64, samples: &[f64], scheme: &dyn Scheme) -> Trace {
    let state = build_initial(recipe, make_grid(n).unwrap(), alpha).expect("valid recipe");
    evolve(state, &FlowParams::new(alpha, n, t_end), scheme, samples, &mut [])
        .expect("run integrates")
        .trace
}

fn registry_check(trace: &Trace, name: &str, options: serde_json::Value) -> EstimateReport {
    let request = CheckRequest {
        name: name.to_string(),
        options,
    };
    CheckRegistry::default()
        .run(&request, &CheckInput { trace })
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn c(r: &EstimateReport, key: &str) -> f64 {
    r.constant(key).unwrap_or(f64::NAN)
}

fn criterion_1() -> Line {
    let m1 = translator_speed(1.0).unwrap();
    let m2 = translator_speed(2.0).unwrap();
    // ∫₀^π sin^{1/2} = √π Γ(3/4)/Γ(5/4).
    let g = statrs::function::gamma::gamma;
    let oracle2 = (0.5 * PI.sqrt() * g(0.75) / g(1.25)).powi(2);
    let (e1, e2) = ((m1 - FRAC_PI_2).abs(), (m2 - oracle2).abs());
    Line::new(
        1,
        "soliton speed",
        e1 <= SPEED_EXACT_TOL && e2 <= SPEED_QUAD_TOL,
        format!("|m(1) - pi/2| = {e1:.1e} (tol {SPEED_EXACT_TOL:e}); |m(2) - oracle| = {e2:.1e} (tol {SPEED_QUAD_TOL:e})"),
    )
}

fn stationarity_drift(alpha: f64, n: usize) -> f64 {
    let trace = simple_run(&InitialDataRecipe::translator(), alpha, n, 5.0, &[0.0, 5.0], &SpeedForm);
    c(&registry_check(&trace, "stationarity", json!({"tolerance": STATIONARITY_TOL})), "drift")
}

fn criterion_2() -> Line {
    let alphas = [0.75, 1.0, 2.0];
    let drifts: Vec<(f64, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = alphas
            .iter()
            .map(|&a| s.spawn(move || (stationarity_drift(a, 256), stationarity_drift(a, 512))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, (d256, d512)) in alphas.iter().zip(&drifts) {
        let ratio = d256 / d512;
        pass &= *d256 <= STATIONARITY_TOL && ratio >= SECOND_ORDER_RATIO;
        parts.push(format!("alpha {a}: drift {d256:.2e}, ratio {ratio:.2}"));
    }
    Line::new(
        2,
        "stationarity",
        pass,
        format!("{} (tol {STATIONARITY_TOL:e}, ratio >= {SECOND_ORDER_RATIO})", parts.join("; ")),
    )
}

fn criterion_3(trace: &Trace) -> Line {
    let r = registry_check(
        trace,
        "convergence",
        json!({"tolerance": CONVERGENCE_TOL, "monotone_after": MONOTONE_AFTER}),
    );
    Line::new(
        3,
        "convergence to translator",
        r.verdict == Verdict::Pass,
        format!(
            "sup rel error at t={LONG_T_END} {:.2e} (tol {CONVERGENCE_TOL}); strictly decreasing until t={:.2}, then below the O(h^2) drift floor {:.2e}",
            c(&r, "final_error"),
            c(&r, "strict_monotone_until"),
            c(&r, "drift_floor_at_end")
        ),
    )
}

fn criterion_4(trace: &Trace) -> Line {
    let r = registry_check(trace, "harnack", json!({"tolerance": HARNACK_TOL}));
    Line::new(
        4,
        "Harnack monotonicity",
        r.verdict == Verdict::Pass,
        format!("min relative slack {:.2e} over {} sample pairs (tol -{HARNACK_TOL:e})", c(&r, "slack"), c(&r, "pairs")),
    )
}

fn criterion_5(trace: &Trace) -> Line {
    let r = registry_check(
        trace,
        "entropy_identity",
        json!({
            "epsilon": ENTROPY_EPSILON,
            "window": ENTROPY_WINDOW,
            "tolerance": ENTROPY_TOL,
            "floor_time": 2.0,
            "floor_factor": ENTROPY_FLOOR_FACTOR
        }),
    );
    Line::new(
        5,
        "entropy identity",
        r.verdict == Verdict::Pass,
        format!(
            "worst window residual {:.2}% over {} windows (tol {}%)",
            100.0 * c(&r, "relative_residual"),
            c(&r, "windows"),
            100.0 * ENTROPY_TOL
        ),
    )
}

fn criterion_6(trace: &Trace) -> Line {
    let r = registry_check(
        trace,
        "dissipation_vanishing",
        json!({"epsilon": ENTROPY_EPSILON, "early": 1.0, "late": LONG_T_END, "ratio": DISSIPATION_RATIO}),
    );
    Line::new(
        6,
        "dissipation vanishing",
        r.verdict == Verdict::Pass,
        format!(
            "D(20)/D(1) = {:.2e} (D(1) = {:.2e}, tol {DISSIPATION_RATIO})",
            c(&r, "measured_ratio"),
            c(&r, "d_early")
        ),
    )
}

fn criterion_7(trace: &Trace) -> Line {
    let r = registry_check(trace, "width", json!({"target": 2.0, "tolerance": WIDTH_TOL}));
    Line::new(
        7,
        "width conservation",
        r.verdict == Verdict::Pass,
        format!("max |width - 2| = {:.2e} (tol {WIDTH_TOL:e})", c(&r, "max_deviation")),
    )
}

fn dual_gap(n: usize) -> f64 {
    let recipe = InitialDataRecipe::sin3_perturbation();
    let (a, b) = std::thread::scope(|s| {
        let u = s.spawn(|| simple_run(&recipe, 1.0, n, 1.0, &[1.0], &SpeedForm));
        let p = s.spawn(|| simple_run(&recipe, 1.0, n, 1.0, &[1.0], &PressureForm));
        (u.join().unwrap(), p.join().unwrap())
    });
    let (u, p) = (&a.samples[0].u, &b.samples[0].u);
    u.iter().zip(p).map(|(x, y)| (y * y - x * x).abs()).fold(0.0, f64::max)
}

fn criterion_8() -> Line {
    let (g256, g512) = std::thread::scope(|s| {
        let a = s.spawn(|| dual_gap(256));
        let b = s.spawn(|| dual_gap(512));
        (a.join().unwrap(), b.join().unwrap())
    });
    let ratio = g256 / g512;
    let h = PI / 256.0;
    Line::new(
        8,
        "dual-form oracle",
        ratio >= SECOND_ORDER_RATIO,
        format!(
            "max |p - u^2| at t=1: {g256:.2e} (N=256, {:.2} h^2), {g512:.2e} (N=512); ratio {ratio:.2} (>= {SECOND_ORDER_RATIO})",
            g256 / (h * h)
        ),
    )
}

fn criterion_9() -> Line {
    let (alpha, t0) = (1.0, 2.0);
    let a = bisect_barrier_amplitude(alpha, t0, BARRIER_DELTA, BARRIER_SAMPLES, BARRIER_TOL).unwrap();
    let spec = |amp: f64| BarrierSpec::new(alpha, t0, amp, BARRIER_DELTA).unwrap().with_samples(BARRIER_SAMPLES);
    let ok = barrier_residual(&spec(a), BARRIER_TOL).unwrap();
    let control = barrier_residual(&spec(a / 10.0), BARRIER_TOL).unwrap();
    Line::new(
        9,
        "barrier",
        ok.verdict == Verdict::Pass && control.verdict == Verdict::Fail,
        format!(
            "A = {a:.6e}: min weighted residual {:.2e} (tol -{BARRIER_TOL:e}); A/10 control min residual {:.2e} ({:?})",
            c(&ok, "min_residual"),
            c(&control, "min_residual"),
            control.verdict
        ),
    )
}

fn criterion_10() -> Line {
    let alpha = 0.75;
    let xs = uniform_samples(-5.0, 5.0, 101);
    let ts = uniform_samples(0.5, 5.0, 101);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut control_min = f64::INFINITY;
    for mu in [0.5, 1.0, 2.0] {
        let barrier = FdBarrier::new(alpha, mu).unwrap();
        let r = fd_barrier_residual(&barrier, &xs, &ts, FD_BARRIER_TOL).unwrap();
        worst = worst.max(c(&r, "relative_residual"));
        pass &= r.verdict == Verdict::Pass;
        let wrong = barrier.with_b(1.1 * FdBarrier::exact_b(alpha));
        let w = fd_barrier_residual(&wrong, &xs, &ts, FD_BARRIER_TOL).unwrap();
        control_min = control_min.min(c(&w, "relative_residual"));
        pass &= w.verdict == Verdict::Fail;
    }
    Line::new(
        10,
        "fast-diffusion barrier",
        pass,
        format!(
            "alpha {alpha}, mu in {{0.5, 1, 2}}: max relative residual {worst:.2e} (tol {FD_BARRIER_TOL:e}); wrong-b control residual >= {control_min:.2e}"
        ),
    )
}

fn criterion_11() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut pass = true;
    let (mut min_slack, mut max_mismatch) = (f64::INFINITY, 0.0f64);
    let mut count = 0;
    for delta in [0.1, 0.3] {
        for _ in 0..100 {
            let coeffs: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = check_poincare(&coeffs, delta, POINCARE_ORACLE_TOL).unwrap();
            let slack = c(&r, "slack");
            min_slack = min_slack.min(slack);
            max_mismatch = max_mismatch.max(c(&r, "mismatch") / c(&r, "oracle").abs().max(1.0));
            pass &= r.verdict == Verdict::Pass && slack >= -POINCARE_SLACK_TOL;
            count += 1;
        }
    }
    Line::new(
        11,
        "Poincare inequality",
        pass,
        format!(
            "{count} functions: min slack {min_slack:.3e} (tol -{POINCARE_SLACK_TOL:e}); max oracle mismatch {max_mismatch:.1e} (tol {POINCARE_ORACLE_TOL:e})"
        ),
    )
}

fn decay_constant(trace: &Trace, t: f64) -> f64 {
    let k = trace.nearest(t).unwrap();
    c(&check_decay(&trace.speed(k).unwrap(), &DecayOptions::default()), "sup")
}

fn criterion_12(fine: &Trace, coarse: &Trace) -> Line {
    let values = [
        decay_constant(fine, 5.0),
        decay_constant(fine, 10.0),
        decay_constant(coarse, 5.0),
        decay_constant(coarse, 10.0),
    ];
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    let finite = values.iter().all(|v| v.is_finite() && *v > 0.0);
    Line::new(
        12,
        "boundary decay",
        finite && hi / lo <= DECAY_VARIATION,
        format!(
            "C_meas (N=512: t=5 {:.4}, t=10 {:.4}; N=256: t=5 {:.4}, t=10 {:.4}); max/min {:.3} (<= {DECAY_VARIATION})",
            values[0],
            values[1],
            values[2],
            values[3],
            hi / lo
        ),
    )
}

fn criterion_13() -> Line {
    let samples = uniform_samples(0.0, 5.0, 51);
    let mut scaled = InitialDataRecipe::perturbation(1.1, Vec::new(), Vec::new());
    scaled.normalize_width = false;
    let (lower, upper) = std::thread::scope(|s| {
        let lo = s.spawn(|| simple_run(&InitialDataRecipe::translator(), 1.0, 256, 5.0, &samples, &SpeedForm));
        let hi = s.spawn(|| simple_run(&scaled, 1.0, 256, 5.0, &samples, &SpeedForm));
        (lo.join().unwrap(), hi.join().unwrap())
    });
    let r = check_ordering(&lower, &upper, ORDERING_TOL);
    Line::new(
        13,
        "comparison principle",
        r.verdict == Verdict::Pass,
        format!(
            "min (upper - lower) = {:.3e} over {} sample times to t=5 (tol -{ORDERING_TOL:e})",
            c(&r, "slack"),
            c(&r, "pairs")
        ),
    )
}

fn criterion_14(first: &RunOutcome, second: &RunOutcome) -> Line {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    first.write(&a).unwrap();
    second.write(&b).unwrap();
    let files = [io::TRACE_FILE, io::CURVE_FILE, io::GRAPH_FILE, io::ENTROPY_FILE];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(a.join(f)).unwrap() != std::fs::read(b.join(f)).unwrap())
        .collect();
    let bytes = std::fs::metadata(a.join(io::TRACE_FILE)).map(|m| m.len()).unwrap_or(0);
    Line::new(
        14,
        "determinism",
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} CSV files byte-identical across two runs (trace {bytes} bytes)", files.len())
        } else {
            format!("differing files: {}", differing.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let lines: Vec<Line> = std::thread::scope(|s| {
        let long = s.spawn(|| long_run(LONG_N, LONG_T_END, LONG_SAMPLES));
        let repeat = s.spawn(|| long_run(LONG_N, LONG_T_END, LONG_SAMPLES));
        let coarse = s.spawn(|| long_run(LONG_N / 2, 10.0, 401));
        let c2 = s.spawn(criterion_2);
        let c8 = s.spawn(criterion_8);
        let c13 = s.spawn(criterion_13);
        let independent = s.spawn(|| vec![criterion_1(), criterion_9(), criterion_10(), criterion_11()]);

        let long = long.join().unwrap();
        let coarse = coarse.join().unwrap();
        let repeat = repeat.join().unwrap();
        let mut lines = independent.join().unwrap();
        lines.extend([
            c2.join().unwrap(),
            criterion_3(&long.trace),
            criterion_4(&long.trace),
            criterion_5(&long.trace),
            criterion_6(&long.trace),
            criterion_7(&long.trace),
            c8.join().unwrap(),
            criterion_12(&long.trace, &coarse.trace),
            c13.join().unwrap(),
            criterion_14(&long, &repeat),
        ]);
        lines
    });
    let mut lines = lines;
    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!("{} {:>2} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.title, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!(
        "acceptance: {}/{} criteria passed in {:.1} s",
        lines.len() - failed,
        lines.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
