use std::fs;
use std::path::{Path, PathBuf};

use fatune::analysis::{self, StatsSummary, TestFamily};
use fatune::benchmarks::{Problem, ProblemId};
use fatune::sampling::SamplerKind;
use fatune::stats::{self, oracle, BlockMatrix};
use fatune::tuning::{self, ExperimentReport, ProblemSpec};

use crate::config::{ConfigFile, ExperimentConfig, Preset};
use crate::error::{CliError, CliResult};
use crate::output::{self, fmt_f64, Written};
use crate::report::{ReportFile, REPORT_FILE};
use crate::svg;

/// Flag overrides shared by `run` and `extended`; they take precedence over
/// the config file and the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<SamplerKind>>,
    pub problems: Option<Vec<ProblemSpec>>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn load_config(flags: &Overrides) -> CliResult<ExperimentConfig> {
    let mut file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ConfigFile::parse(&text)?
        }
        None => ConfigFile::default(),
    };
    file.apply_env(|name| std::env::var(name).ok())?;
    if let Some(preset) = flags.preset {
        file.experiment.preset = Some(preset);
    }
    if let Some(seed) = flags.seed {
        file.experiment.master_seed = Some(crate::config::Seed(seed));
    }
    if let Some(methods) = &flags.methods {
        file.experiment.methods = Some(methods.clone());
    }
    if let Some(problems) = &flags.problems {
        file.benchmarks.problems = Some(problems.iter().map(ToString::to_string).collect());
    }
    if let Some(out) = &flags.out {
        file.experiment.output_dir = Some(out.clone());
    }
    ExperimentConfig::resolve(&file)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::config("--threads", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::config("--threads", e))?;
            Ok(pool.install(f))
        }
    }
}

pub fn run(flags: &Overrides) -> CliResult<()> {
    let config = load_config(flags)?;
    let plan = config.plan();
    let results = with_threads(flags.threads, || tuning::run_experiment(&plan))??;

    let dir = config.output_dir.clone();
    let config_toml = config.to_file().to_toml();
    let report = ReportFile::new(config, results);
    let tests = analysis::pairwise_t_tests(&report.results);
    let boxes = analysis::parameter_boxes(&report.results)?;

    output::ensure_dir(&dir)?;
    let mut written = Written::default();
    written.raw(dir.join(REPORT_FILE), report.to_json().as_bytes())?;
    written.raw(dir.join("config.toml"), config_toml.as_bytes())?;
    output::write_objective_tables(&dir, &report.results, &mut written)?;
    output::write_parameter_tables(&dir, &report.results, &mut written)?;
    match tests {
        Ok(tests) => output::write_pairwise_matrix(dir.join("t_test_matrix.csv"), &tests, &mut written)?,
        Err(e) => eprintln!("warning: t-test matrix skipped ({e})"),
    }
    write_boxplots(&dir, &boxes, &mut written)?;

    print_summary(&report.results);
    for path in &written.0 {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_summary(report: &ExperimentReport) {
    print!("{:<18}", "problem");
    for m in &report.methods {
        print!("{:>13} {:>13}", format!("{m} best"), format!("{m} mean"));
    }
    println!();
    for (p, spec) in report.problems.iter().enumerate() {
        let dimension = report.cells[p].dimension;
        print!("{:<18}", format!("{} {}:{dimension}", spec.id.label(), spec.id));
        for m in 0..report.methods.len() {
            let cell = &report.cells[m * report.problems.len() + p];
            print!("{:>13.4e} {:>13.4e}", cell.best_value(), cell.mean);
        }
        println!();
    }
}

fn load_report(path: &Path) -> CliResult<ReportFile> {
    let report = ReportFile::load(path)?;
    if !report.hash_matches() {
        eprintln!("warning: {} content hash does not match its contents", path.display());
    }
    Ok(report)
}

fn output_dir_for(report_path: &Path, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| {
        report_path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
    })
}

pub fn stats(report_path: &Path, families: &[TestFamily], out: Option<PathBuf>) -> CliResult<()> {
    let report = load_report(report_path)?;
    let summary = analysis::analyze(&report.results, families)?;
    let dir = output_dir_for(report_path, out);
    output::ensure_dir(&dir)?;

    let mut written = Written::default();
    if families.contains(&TestFamily::T) {
        output::write_pairwise(dir.join("t_tests.csv"), &summary.t_tests, &mut written)?;
        output::write_pairwise_matrix(dir.join("t_test_matrix.csv"), &summary.t_tests, &mut written)?;
    }
    if families.contains(&TestFamily::F) {
        output::write_pairwise(dir.join("f_tests.csv"), &summary.f_tests, &mut written)?;
        output::write_pairwise_matrix(dir.join("f_test_matrix.csv"), &summary.f_tests, &mut written)?;
    }
    if families.contains(&TestFamily::Friedman) {
        output::write_group(dir.join("friedman.csv"), &summary.friedman, &mut written)?;
    }
    if families.contains(&TestFamily::Anova) {
        output::write_anova(dir.join("anova.csv"), &summary.anova_rows, &summary.anova_columns, &mut written)?;
    }
    print_stats(&summary);
    for path in &written.0 {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_stats(summary: &StatsSummary) {
    for (title, tests) in [("t-tests", &summary.t_tests), ("F-tests", &summary.f_tests)] {
        if tests.is_empty() {
            continue;
        }
        println!("{title} (p-values)");
        for t in tests {
            println!("  {:<6} {:>3} vs {:<3}  p = {:.4}", t.subject.label(), t.first, t.second, t.result.p_value);
        }
    }
    if !summary.friedman.is_empty() {
        println!("Friedman tests (p-values)");
        for t in &summary.friedman {
            println!("  {:<6} chi2 = {:.4}  p = {:.4}", t.subject.label(), t.result.statistic, t.result.p_value);
        }
    }
    if !summary.anova_rows.is_empty() {
        println!("two-way ANOVA (p-values)");
        for (r, c) in summary.anova_rows.iter().zip(&summary.anova_columns) {
            println!("  {:<6} rows p = {:.4}  methods p = {:.4}", r.subject.label(), r.result.p_value, c.result.p_value);
        }
    }
}

fn write_boxplots(dir: &Path, boxes: &[analysis::BoxSummary], written: &mut Written) -> CliResult<()> {
    for b in boxes.iter().filter(|b| b.summary.is_none()) {
        eprintln!(
            "warning: {} / {} has {} value(s); box omitted",
            b.parameter.name(),
            b.method,
            b.values.len()
        );
    }
    output::write_boxplot_csv(dir.join("boxplot.csv"), boxes, written)?;
    written.raw(dir.join("boxplot.svg"), svg::render(boxes).as_bytes())
}

pub fn boxplot(report_path: &Path, out: Option<PathBuf>) -> CliResult<()> {
    let report = load_report(report_path)?;
    let boxes = analysis::parameter_boxes(&report.results)?;
    let dir = output_dir_for(report_path, out);
    output::ensure_dir(&dir)?;
    let mut written = Written::default();
    write_boxplots(&dir, &boxes, &mut written)?;
    for b in boxes.iter() {
        if let Some(s) = &b.summary {
            println!(
                "{:<6} {:<4} min {:.4}  q1 {:.4}  median {:.4}  q3 {:.4}  max {:.4}  outliers {}",
                b.parameter.name(),
                b.method,
                s.min,
                s.q1,
                s.median,
                s.q3,
                s.max,
                s.outliers.len()
            );
        }
    }
    for path in &written.0 {
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn extended(flags: &Overrides, problem: &str, n: usize) -> CliResult<()> {
    let config = load_config(flags)?;
    if n < 2 {
        return Err(CliError::config("--n", format!("needs at least 2 settings (got {n})")));
    }
    let mut spec: ProblemSpec = problem.parse().map_err(|e| CliError::config("--problem", e))?;
    if spec.dimension.is_none() {
        spec.dimension = config.problems.iter().find(|p| p.id == spec.id).and_then(|p| p.dimension);
    }
    spec.build(config.spring_g4).map_err(|e| CliError::config("--problem", e))?;

    let plan = config.plan();
    let runs = with_threads(flags.threads, || tuning::extended_runs(&plan, spec, n))??;
    let mut tests = Vec::new();
    for (i, &a) in runs.methods.iter().enumerate() {
        for (j, &b) in runs.methods.iter().enumerate().skip(i + 1) {
            tests.push((a, b, stats::two_sample_t(&runs.values[i], &runs.values[j])?));
        }
    }

    let dir = config.output_dir.clone();
    output::ensure_dir(&dir)?;
    let mut written = Written::default();
    let header: Vec<String> = runs.methods.iter().map(ToString::to_string).collect();
    let rows: Vec<Vec<String>> = (0..n).map(|s| runs.values.iter().map(|v| fmt_f64(v[s])).collect()).collect();
    written.csv(dir.join(format!("extended_{}.csv", spec.id)), &header, &rows)?;

    println!("{} settings per method on {}", n, spec);
    for (a, b, t) in &tests {
        println!("  {a} vs {b}: t = {:.4}, df = {:.2}, p = {:.4}", t.statistic, df_value(t.df), t.p_value);
    }
    for path in &written.0 {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn df_value(df: stats::Df) -> f64 {
    match df {
        stats::Df::One(d) | stats::Df::Two(d, _) => d,
    }
}

pub fn problems() -> CliResult<()> {
    println!("{:<4} {:<11} {:>3}  {:<34} {:>11}  known best", "id", "name", "D", "bounds", "constraints");
    for id in ProblemId::ALL {
        let p = Problem::new(id, None)?;
        let bounds = if p.lower_bounds().windows(2).all(|w| w[0] == w[1])
            && p.upper_bounds().windows(2).all(|w| w[0] == w[1])
        {
            format!("[{}, {}]^{}", p.lower_bounds()[0], p.upper_bounds()[0], p.dimension())
        } else {
            p.lower_bounds()
                .iter()
                .zip(p.upper_bounds())
                .map(|(l, u)| format!("[{l}, {u}]"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let best = p.known_best_value().map_or("-".to_string(), |v| v.to_string());
        println!(
            "{:<4} {:<11} {:>3}  {:<34} {:>11}  {}",
            id.label(),
            id.name(),
            p.dimension(),
            bounds,
            p.constraint_count(),
            best
        );
    }
    Ok(())
}

pub fn selftest() -> CliResult<()> {
    let cases = oracle::bundled_cases();
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for case in &cases {
        let err = (case.compute()? - case.expected).abs();
        worst = worst.max(err);
        if !(err <= case.tolerance) {
            failures += 1;
            eprintln!("FAIL {case:?}: error {err:e}");
        }
    }
    println!("{} CDF reference values, max |error| = {worst:.2e}", cases.len());

    let checks = worked_examples()?;
    for (name, got, expected, tol) in &checks {
        let ok = (got - expected).abs() <= *tol;
        if !ok {
            failures += 1;
        }
        println!("{} {name}: {got:.10} (expected {expected} ± {tol:e})", if ok { "ok  " } else { "FAIL" });
    }
    if failures > 0 {
        return Err(CliError::SelfTest(failures));
    }
    println!("selftest passed");
    Ok(())
}

type Check = (&'static str, f64, f64, f64);

fn worked_examples() -> CliResult<Vec<Check>> {
    let welch = stats::two_sample_t(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0])?;
    let paired = stats::paired_t(&[1.0, -1.0, 2.0, -2.0, 0.0, 3.0], &[0.0; 6])?;
    let base: Vec<f64> = (0..10).map(|i| ((i * 7) % 10) as f64).collect();
    let doubled: Vec<f64> = base.iter().map(|v| 2.0 * v).collect();
    let f = stats::f_test_variance(&doubled, &base)?;
    let ranked: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 10.0 + i as f64, 20.0 + i as f64]).collect();
    let friedman = stats::friedman(&BlockMatrix::from_rows(&ranked)?)?;
    Ok(vec![
        ("Welch t statistic", welch.statistic, -1.0, 1e-12),
        ("Welch p", welch.p_value, 0.346_593_507_087_334, 1e-10),
        ("paired t p", paired.p_value, 0.541_604_560_793_12, 1e-10),
        ("F(9,9) = 4 p", f.p_value, 0.051_003_260_706_950_8, 1e-10),
        ("Friedman chi2", friedman.statistic, 20.0, 1e-12),
        ("Friedman p", friedman.p_value, 4.539_992_976_248_485e-5, 1e-12),
        ("t cdf(2.228; 10)", stats::t_cdf(2.228, 10.0)?, 0.974_994_114_091_444_3, 1e-10),
    ])
}

/// Parses a comma-separated flag value into a list of test families.
pub fn parse_family(s: &str) -> Result<TestFamily, String> {
    s.parse().map_err(|e: fatune::Error| e.to_string())
}

pub fn parse_method(s: &str) -> Result<SamplerKind, String> {
    s.parse().map_err(|e: fatune::Error| e.to_string())
}

pub fn parse_problem(s: &str) -> Result<ProblemSpec, String> {
    s.parse().map_err(|e: fatune::Error| e.to_string())
}
