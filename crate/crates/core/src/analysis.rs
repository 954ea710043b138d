//! Statistical comparison of tuning methods over an [`ExperimentReport`],
//! plus five-number summaries for boxplots of the tuned parameters.

use serde::{Deserialize, Serialize};

use crate::benchmarks::ProblemId;
use crate::error::{Error, Result};
use crate::sampling::{ParameterSample, SamplerKind};
use crate::stats::{self, BlockMatrix, Df, TestKind, TestResult};
use crate::tuning::{CellReport, ExperimentReport};

/// One of the three tuned FA parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Theta,
    Beta,
    Gamma,
}

impl Parameter {
    pub const ALL: [Parameter; 3] = [Parameter::Theta, Parameter::Beta, Parameter::Gamma];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Theta => "theta",
            Parameter::Beta => "beta",
            Parameter::Gamma => "gamma",
        }
    }

    pub fn of(self, sample: &ParameterSample) -> f64 {
        match self {
            Parameter::Theta => sample.theta,
            Parameter::Beta => sample.beta,
            Parameter::Gamma => sample.gamma,
        }
    }
}

/// Which family of tests to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFamily {
    T,
    F,
    Friedman,
    Anova,
}

impl TestFamily {
    pub const ALL: [TestFamily; 4] = [TestFamily::T, TestFamily::F, TestFamily::Friedman, TestFamily::Anova];
}

impl std::str::FromStr for TestFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t" => Ok(TestFamily::T),
            "f" => Ok(TestFamily::F),
            "friedman" => Ok(TestFamily::Friedman),
            "anova" => Ok(TestFamily::Anova),
            _ => Err(Error::InvalidArgument(format!(
                "unknown test `{s}` (expected t, f, friedman or anova)"
            ))),
        }
    }
}

/// What a test was run on: a benchmark's best values or a parameter's
/// best-setting values across benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type", content = "name")]
pub enum Subject {
    Problem(ProblemId),
    Parameter(Parameter),
}

impl Subject {
    pub fn label(&self) -> String {
        match self {
            Subject::Problem(id) => id.label().to_string(),
            Subject::Parameter(p) => p.name().to_string(),
        }
    }
}

/// A test comparing two methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub subject: Subject,
    pub first: SamplerKind,
    pub second: SamplerKind,
    pub result: TestResult,
}

/// A test across all methods at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupTest {
    pub subject: Subject,
    pub result: TestResult,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub t_tests: Vec<PairwiseTest>,
    pub f_tests: Vec<PairwiseTest>,
    pub friedman: Vec<GroupTest>,
    /// Row (setting or problem) effects of two-way ANOVA.
    pub anova_rows: Vec<GroupTest>,
    /// Column (method) effects of two-way ANOVA.
    pub anova_columns: Vec<GroupTest>,
}

/// Ordered method pairs `(a, b)` with `a` listed before `b`.
pub fn method_pairs(methods: &[SamplerKind]) -> Vec<(SamplerKind, SamplerKind)> {
    let mut pairs = Vec::new();
    for (i, &a) in methods.iter().enumerate() {
        for &b in &methods[i + 1..] {
            pairs.push((a, b));
        }
    }
    pairs
}

fn cell(report: &ExperimentReport, method_index: usize, problem_index: usize) -> Result<&CellReport> {
    report
        .cells
        .get(method_index * report.problems.len() + problem_index)
        .ok_or_else(|| Error::MissingData("report has fewer cells than methods × problems".into()))
}

fn best_values(report: &ExperimentReport, m: usize, p: usize) -> Result<Vec<f64>> {
    Ok(cell(report, m, p)?.best_values())
}

/// Best-setting values of `param` across problems, one vector per method.
pub fn parameter_columns(report: &ExperimentReport, param: Parameter) -> Result<Vec<Vec<f64>>> {
    (0..report.methods.len())
        .map(|m| {
            (0..report.problems.len())
                .map(|p| cell(report, m, p).map(|c| param.of(&c.best_params)))
                .collect()
        })
        .collect()
}

fn require_methods(report: &ExperimentReport, needed: usize) -> Result<()> {
    if report.methods.len() < needed {
        return Err(Error::MissingData(format!(
            "report holds {} method(s); at least {needed} are needed to compare",
            report.methods.len()
        )));
    }
    Ok(())
}

/// F-test that maps zero variances to flagged boundary results instead of
/// failing: both zero gives p = 1, one zero gives p = 0.
pub fn f_test_or_boundary(x: &[f64], y: &[f64]) -> Result<TestResult> {
    match stats::f_test_variance(x, y) {
        Err(Error::DegenerateVariance) => {
            let spread = |v: &[f64]| v.iter().any(|a| *a != v[0]);
            let df = Df::Two((x.len() - 1) as f64, (y.len() - 1) as f64);
            let (statistic, p_value) = match (spread(x), spread(y)) {
                (false, false) => (1.0, 1.0),
                (false, true) => (0.0, 0.0),
                _ => (f64::INFINITY, 0.0),
            };
            Ok(TestResult {
                kind: TestKind::FVariance,
                statistic,
                df,
                p_value,
                degenerate: true,
            })
        }
        other => other,
    }
}

fn pairwise_over<F>(
    report: &ExperimentReport,
    subjects: &[(Subject, Vec<Vec<f64>>)],
    test: F,
) -> Result<Vec<PairwiseTest>>
where
    F: Fn(&[f64], &[f64]) -> Result<TestResult>,
{
    let mut out = Vec::new();
    for (subject, columns) in subjects {
        for (i, &a) in report.methods.iter().enumerate() {
            for (j, &b) in report.methods.iter().enumerate().skip(i + 1) {
                let result = test(&columns[i], &columns[j]).map_err(|e| missing(subject, e))?;
                out.push(PairwiseTest {
                    subject: *subject,
                    first: a,
                    second: b,
                    result,
                });
            }
        }
    }
    Ok(out)
}

/// Too-short samples and undersized block designs mean the report lacks the
/// data a test needs.
fn missing(subject: &Subject, e: Error) -> Error {
    match e {
        Error::InvalidArgument(msg) => Error::MissingData(format!("{}: {msg}", subject.label())),
        other => other,
    }
}

fn problem_subjects(report: &ExperimentReport) -> Result<Vec<(Subject, Vec<Vec<f64>>)>> {
    report
        .problems
        .iter()
        .enumerate()
        .map(|(p, spec)| {
            let columns = (0..report.methods.len())
                .map(|m| best_values(report, m, p))
                .collect::<Result<Vec<_>>>()?;
            Ok((Subject::Problem(spec.id), columns))
        })
        .collect()
}

fn parameter_subjects(report: &ExperimentReport) -> Result<Vec<(Subject, Vec<Vec<f64>>)>> {
    Parameter::ALL
        .iter()
        .map(|&param| Ok((Subject::Parameter(param), parameter_columns(report, param)?)))
        .collect()
}

fn group_over<F>(subjects: &[(Subject, Vec<Vec<f64>>)], test: F) -> Result<Vec<GroupTest>>
where
    F: Fn(&BlockMatrix) -> Result<TestResult>,
{
    subjects
        .iter()
        .map(|(subject, columns)| {
            let matrix = BlockMatrix::from_columns(columns).map_err(|e| missing(subject, e))?;
            Ok(GroupTest {
                subject: *subject,
                result: test(&matrix)?,
            })
        })
        .collect()
}

/// Welch t-tests between every method pair, per problem on the settings'
/// best values and per parameter on the best-setting values.
pub fn pairwise_t_tests(report: &ExperimentReport) -> Result<Vec<PairwiseTest>> {
    require_methods(report, 2)?;
    let mut subjects = problem_subjects(report)?;
    subjects.extend(parameter_subjects(report)?);
    pairwise_over(report, &subjects, stats::two_sample_t)
}

/// Variance-ratio tests between every method pair, per problem.
pub fn pairwise_f_tests(report: &ExperimentReport) -> Result<Vec<PairwiseTest>> {
    require_methods(report, 2)?;
    pairwise_over(report, &problem_subjects(report)?, f_test_or_boundary)
}

/// Friedman tests per problem (settings as blocks) and per parameter
/// (problems as blocks), methods as treatments.
pub fn friedman_tests(report: &ExperimentReport) -> Result<Vec<GroupTest>> {
    require_methods(report, 2)?;
    let mut subjects = problem_subjects(report)?;
    subjects.extend(parameter_subjects(report)?);
    group_over(&subjects, stats::friedman)
}

/// Two-way ANOVA on the same layouts as [`friedman_tests`]; returns
/// `(row effects, column effects)`.
pub fn anova_tests(report: &ExperimentReport) -> Result<(Vec<GroupTest>, Vec<GroupTest>)> {
    require_methods(report, 2)?;
    let mut subjects = problem_subjects(report)?;
    subjects.extend(parameter_subjects(report)?);
    let rows = group_over(&subjects, |m| stats::two_way_anova(m).map(|r| r.0))?;
    let cols = group_over(&subjects, |m| stats::two_way_anova(m).map(|r| r.1))?;
    Ok((rows, cols))
}

/// Runs the requested test families.
pub fn analyze(report: &ExperimentReport, families: &[TestFamily]) -> Result<StatsSummary> {
    let mut summary = StatsSummary::default();
    if families.contains(&TestFamily::T) {
        summary.t_tests = pairwise_t_tests(report)?;
    }
    if families.contains(&TestFamily::F) {
        summary.f_tests = pairwise_f_tests(report)?;
    }
    if families.contains(&TestFamily::Friedman) {
        summary.friedman = friedman_tests(report)?;
    }
    if families.contains(&TestFamily::Anova) {
        let (rows, cols) = anova_tests(report)?;
        summary.anova_rows = rows;
        summary.anova_columns = cols;
    }
    Ok(summary)
}

/// Quantile by linear interpolation between closest ranks (R type 7).
/// `sorted` must be non-empty and ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Boxplot statistics with Tukey's 1.5 IQR fences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Most extreme values inside the fences.
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

/// `None` when fewer than two finite values are given.
pub fn five_number(values: &[f64]) -> Option<FiveNumber> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.len() < 2 {
        return None;
    }
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || sorted.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v));
    Some(FiveNumber {
        min: sorted[0],
        q1,
        median: quantile_sorted(&sorted, 0.5),
        q3,
        max: sorted[sorted.len() - 1],
        lower_whisker: inside().next().unwrap_or(q1),
        upper_whisker: inside().last().unwrap_or(q3),
        outliers: sorted.iter().copied().filter(|v| !(lo_fence..=hi_fence).contains(v)).collect(),
    })
}

/// One box of a parameter boxplot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub parameter: Parameter,
    pub method: SamplerKind,
    pub values: Vec<f64>,
    /// `None` when there were too few values to draw a box.
    pub summary: Option<FiveNumber>,
}

/// Per parameter and method: the best-setting values over all problems.
pub fn parameter_boxes(report: &ExperimentReport) -> Result<Vec<BoxSummary>> {
    let mut boxes = Vec::new();
    for param in Parameter::ALL {
        let columns = parameter_columns(report, param)?;
        for (&method, values) in report.methods.iter().zip(columns) {
            boxes.push(BoxSummary {
                parameter: param,
                method,
                summary: five_number(&values),
                values,
            });
        }
    }
    Ok(boxes)
}
