//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fatune::analysis::{self, Subject};
use fatune::benchmarks::{make_problem, PenaltyConfig, Problem, ProblemId};
use fatune::firefly::{self, FaConfig, StepScale};
use fatune::sampling::{self, ParameterSample, RandomStream, SamplerKind};
use fatune::stats::{self, oracle, BlockMatrix};
use fatune::tuning::ExperimentReport;

const SEED: u64 = 1;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit_secs: f64) -> Outcome {
    let secs = elapsed.as_secs_f64();
    ensure!(secs < limit_secs, "took {secs:.2} s, limit {limit_secs} s");
    Ok(format!("{secs:.2} s"))
}

fn fatune(args: &[&str]) -> Result<(), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_fatune"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        output.status.success(),
        "fatune {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&output.stderr)
    );
    Ok(())
}

fn run_desk(dir: &Path, name: &str, settings: usize, threads: usize) -> Result<Vec<u8>, String> {
    let config = dir.join(format!("{name}.toml"));
    let text = format!("[experiment]\npreset = \"desk\"\nmaster_seed = {SEED}\n\n[tuning]\nnum_settings = {settings}\n");
    fs::write(&config, text).map_err(|e| e.to_string())?;
    let out = dir.join(name);
    let threads = threads.to_string();
    fatune(&["run", "--config", path(&config), "--threads", &threads, "--out", path(&out)])?;
    fs::read(out.join("report.json")).map_err(|e| e.to_string())
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn results(bytes: &[u8]) -> Result<ExperimentReport, String> {
    let mut json: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    serde_json::from_value(json["results"].take()).map_err(|e| e.to_string())
}

fn known_optima() -> Outcome {
    let start = Instant::now();
    let trid = make_problem("trid", None).map_err(|e| e.to_string())?;
    ensure!(trid.objective(&[4.0, 6.0, 6.0, 4.0]).unwrap() == -16.0, "trid(4,6,6,4) != -16");
    let spring = make_problem("spring", None).unwrap().objective(&[0.051690, 0.356750, 11.287126]).unwrap();
    ensure!((spring - 0.012665).abs() <= 1e-5, "spring {spring}");
    let truss = make_problem("truss", None).unwrap().objective(&[0.78853, 0.40866]).unwrap();
    ensure!((truss - 263.896).abs() <= 0.01, "truss {truss}");
    for (name, x) in [("sphere", vec![0.0; 10]), ("rosenbrock", vec![1.0; 10]), ("ackley", vec![0.0; 10])] {
        let f = make_problem(name, None).unwrap().objective(&x).unwrap();
        ensure!(f.abs() <= 1e-12, "{name} optimum {f}");
    }
    within(start.elapsed(), 1.0)
}

fn desk_targets(report: &ExperimentReport, elapsed: Duration) -> Outcome {
    let mut worst = Vec::new();
    for spec in &report.problems {
        let mut values = Vec::new();
        for &method in &report.methods {
            let cell = report.cell(method, spec.id).ok_or("missing cell")?;
            let best = cell.best_value();
            let ok = match spec.id {
                ProblemId::Truss => best <= 264.0,
                ProblemId::Trid => (best + 16.0).abs() <= 0.5,
                ProblemId::Spring => best <= 0.016,
                ProblemId::Sphere => best <= 1e-2,
                ProblemId::Ackley => best <= 0.5,
                ProblemId::Rosenbrock => best <= 1.0,
            };
            ensure!(ok, "{} {method}: best {best}", spec.id.name());
            values.push(best);
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        worst.push(format!("{} {max:.4e}", spec.id.label()));
    }
    let secs = elapsed.as_secs_f64();
    ensure!(secs < 600.0, "single-threaded run took {secs:.1} s");
    Ok(format!("worst per problem: {}; {secs:.1} s on 1 thread", worst.join(", ")))
}

fn welch_reproduction(report: &ExperimentReport) -> Outcome {
    let tests = analysis::pairwise_t_tests(report).map_err(|e| e.to_string())?;
    let problem_tests: Vec<_> = tests.iter().filter(|t| matches!(t.subject, Subject::Problem(_))).collect();
    ensure!(problem_tests.len() == 18, "{} problem t-tests", problem_tests.len());
    let passing = problem_tests.iter().filter(|t| t.result.p_value > 0.05).count();
    let min = problem_tests.iter().map(|t| t.result.p_value).fold(1.0, f64::min);
    ensure!(passing >= 15, "{passing}/18 with p > 0.05");
    Ok(format!("{passing}/18 with p > 0.05, smallest p = {min:.4}"))
}

fn parameter_reproduction(report: &ExperimentReport) -> Outcome {
    let parameter = |s: &Subject| matches!(s, Subject::Parameter(_));
    let friedman = analysis::friedman_tests(report).map_err(|e| e.to_string())?;
    let (rows, cols) = analysis::anova_tests(report).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for t in friedman.iter().filter(|t| parameter(&t.subject)) {
        ensure!(t.result.p_value > 0.05, "Friedman {} p = {}", t.subject.label(), t.result.p_value);
        detail.push(format!("Friedman {} {:.3}", t.subject.label(), t.result.p_value));
    }
    // The method (column) effect is the comparison between tuners; the row
    // effect compares problems and is reported only.
    for (r, c) in rows.iter().zip(&cols).filter(|(r, _)| parameter(&r.subject)) {
        ensure!(c.result.p_value > 0.05, "ANOVA {} method effect p = {}", c.subject.label(), c.result.p_value);
        detail.push(format!(
            "ANOVA {} {:.3} (problem effect {:.3})",
            c.subject.label(),
            c.result.p_value,
            r.result.p_value
        ));
    }
    ensure!(detail.len() == 6, "expected 3 Friedman and 3 ANOVA parameter tests");
    Ok(detail.join(", "))
}

fn oracle_suite() -> Outcome {
    let start = Instant::now();
    let cases = oracle::bundled_cases();
    ensure!(cases.len() >= 100, "only {} oracle cases", cases.len());
    let mut worst: f64 = 0.0;
    for case in &cases {
        let got = case.compute().map_err(|e| e.to_string())?;
        let err = (got - case.expected).abs();
        ensure!(err <= 1e-8, "{case:?}: got {got}");
        worst = worst.max(err);
    }
    let p = stats::t_two_sided_p(-1.0, 8.0).unwrap();
    ensure!((p - 0.3466).abs() < 5e-4, "t = -1, df = 8: p = {p}");
    let p = stats::chi2_sf(20.0, 2.0).unwrap();
    ensure!((p - 4.54e-5).abs() < 1e-7, "chi2 = 20: p = {p}");
    let friedman = stats::friedman(&BlockMatrix::from_rows(&vec![vec![1.0, 2.0, 3.0]; 10]).unwrap()).unwrap();
    ensure!(friedman.statistic == 20.0, "Friedman statistic {}", friedman.statistic);
    let p = 2.0 * stats::f_sf(4.0, 9.0, 9.0).unwrap();
    ensure!((p - 0.0510032607069508).abs() < 1e-10, "F = 4 on (9, 9): p = {p}");
    let timing = within(start.elapsed(), 5.0)?;
    Ok(format!("{} cases, max error {worst:.1e}; worked examples ok; {timing}", cases.len()))
}

fn sampler_suite() -> Outcome {
    let start = Instant::now();
    let sobol = sampling::draw_sobol(4, 1, &mut RandomStream::new(0), false).unwrap();
    ensure!(sobol.column(0) == [0.0, 0.5, 0.75, 0.25], "Sobol prefix {:?}", sobol.column(0));
    for n in [1, 4, 10, 100] {
        for seed in 0..20 {
            let set = sampling::draw_lhs(n, 5, &mut RandomStream::new(seed)).unwrap();
            for col in 0..5 {
                let mut strata: Vec<usize> = set.column(col).iter().map(|v| (v * n as f64).floor() as usize).collect();
                strata.sort_unstable();
                ensure!(strata == (0..n).collect::<Vec<_>>(), "LHS n = {n} seed {seed} column {col}");
            }
        }
    }
    let mc = sampling::draw_mc(50_000, 1, &mut RandomStream::new(SEED)).unwrap().column(0);
    let mean = mc.iter().sum::<f64>() / mc.len() as f64;
    let var = mc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (mc.len() - 1) as f64;
    ensure!((mean - 0.5).abs() < 0.01 && (var - 1.0 / 12.0).abs() < 0.002, "MC mean {mean} variance {var}");
    for kind in SamplerKind::ALL {
        for scramble in [false, true] {
            let a = sampling::draw(kind, 64, 3, &mut RandomStream::new(42), scramble).unwrap();
            let b = sampling::draw(kind, 64, 3, &mut RandomStream::new(42), scramble).unwrap();
            ensure!(a.values() == b.values(), "{kind} not deterministic");
            ensure!(a.values().iter().all(|v| (0.0..1.0).contains(v)), "{kind} outside [0, 1)");
        }
    }
    within(start.elapsed(), 5.0)
}

fn firefly_invariants() -> Outcome {
    let start = Instant::now();
    let penalty = PenaltyConfig::default();
    let names = ["sphere", "rosenbrock", "ackley", "trid", "spring", "truss"];
    for seed in 0..10u64 {
        let problem = make_problem(names[seed as usize % names.len()], None).unwrap();
        let theta = 0.9 + 0.01 * seed as f64;
        let mut config = FaConfig::new(20, 1000, ParameterSample { theta, beta: 1.0, gamma: 1.0 }, seed);
        if seed % 2 == 1 {
            config.step_scale = StepScale::Normalized;
        }
        let mut stream = RandomStream::new(seed);
        let mut state = firefly::init_population(&problem, &config, penalty, &mut stream).unwrap();
        let mut best = state.best_value();
        for t in 1..=1000 {
            firefly::step(&mut state, &problem, &config, penalty, &mut stream);
            ensure!(state.best_value() <= best, "seed {seed}: best rose at t = {t}");
            best = state.best_value();
            let expected = theta.powi(t);
            ensure!(
                (state.alpha() - expected).abs() <= 1e-12 * expected,
                "seed {seed}: alpha {} vs {expected} at t = {t}",
                state.alpha()
            );
            ensure!(state.positions().all(|x| problem.in_bounds(x)), "seed {seed}: out of bounds at t = {t}");
            ensure!(problem.in_bounds(state.best_point()), "seed {seed}: best point out of bounds");
        }
    }
    fixed_point(&make_problem("ackley", Some(5)).unwrap())?;
    within(start.elapsed(), 30.0)
}

fn fixed_point(problem: &Problem) -> Result<(), String> {
    let mut config = FaConfig::new(10, 50, ParameterSample { theta: 0.95, beta: 0.0, gamma: 1.0 }, 3);
    config.alpha0 = 0.0;
    let mut stream = RandomStream::new(3);
    let penalty = PenaltyConfig::default();
    let mut state = firefly::init_population(problem, &config, penalty, &mut stream).unwrap();
    let before: Vec<f64> = state.positions().flatten().copied().collect();
    for _ in 0..50 {
        firefly::step(&mut state, problem, &config, penalty, &mut stream);
    }
    let after: Vec<f64> = state.positions().flatten().copied().collect();
    ensure!(before == after, "β = 0, α = 0 moved the population");
    Ok(())
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut outcomes: Vec<(u32, &str, Outcome)> = Vec::new();

    outcomes.push((1, "known optima", guarded(known_optima)));

    let started = Instant::now();
    let desk_1 = run_desk(dir.path(), "desk_t1", 5, 1);
    let desk_elapsed = started.elapsed();
    let desk_4 = run_desk(dir.path(), "desk_t4", 5, 4);
    outcomes.push((
        2,
        "desk-scale tuned performance",
        guarded(|| desk_targets(&results(desk_1.as_ref().map_err(Clone::clone)?)?, desk_elapsed)),
    ));

    let ten = run_desk(dir.path(), "ten", 10, 4).and_then(|b| results(&b));
    outcomes.push((3, "pairwise t-tests between tuners", guarded(|| welch_reproduction(ten.as_ref().map_err(Clone::clone)?))));
    outcomes.push((4, "parameter tests between tuners", guarded(|| parameter_reproduction(ten.as_ref().map_err(Clone::clone)?))));

    outcomes.push((5, "statistics oracle suite", guarded(oracle_suite)));
    outcomes.push((6, "sampler suite", guarded(sampler_suite)));
    outcomes.push((7, "firefly invariants", guarded(firefly_invariants)));
    outcomes.push((
        8,
        "end-to-end determinism",
        guarded(|| {
            let (a, b) = (desk_1.clone()?, desk_4.clone()?);
            ensure!(a == b, "report.json differs between --threads 1 and --threads 4");
            Ok(format!("report.json identical across --threads 1 and 4 ({} bytes)", a.len()))
        }),
    ));

    let mut failed = 0;
    for (n, name, outcome) in &outcomes {
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL: {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
