//! Hypothesis tests used to compare tuning methods: Welch and paired t-tests,
//! the variance-ratio F-test, the Friedman rank test and two-way ANOVA
//! without replication. All p-values are two-sided where a direction exists.
//!
//! Zero-variance inputs do not raise errors (except in the F-test, where the
//! ratio itself is undefined). They return a boundary p-value of 0 or 1 and
//! set [`TestResult::degenerate`].

pub mod oracle;
mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use special::{beta_inc, chi2_cdf, chi2_sf, f_cdf, f_sf, gamma_inc, ln_beta, ln_gamma, t_cdf, t_two_sided_p};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    WelchT,
    PairedT,
    FVariance,
    Friedman,
    AnovaRows,
    AnovaColumns,
}

/// Degrees of freedom of a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Df {
    One(f64),
    Two(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: TestKind,
    pub statistic: f64,
    pub df: Df,
    pub p_value: f64,
    /// Set when a zero variance forced a boundary p-value.
    pub degenerate: bool,
}

impl TestResult {
    fn new(kind: TestKind, statistic: f64, df: Df, p_value: f64) -> Self {
        Self {
            kind,
            statistic,
            df,
            p_value: p_value.clamp(0.0, 1.0),
            degenerate: false,
        }
    }

    fn boundary(kind: TestKind, statistic: f64, df: Df, p_value: f64) -> Self {
        Self {
            degenerate: true,
            ..Self::new(kind, statistic, df, p_value)
        }
    }
}

fn check_sample(name: &str, values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "sample `{name}` needs at least 2 values (got {})",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("sample `{name}` contains non-finite values")));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the n − 1 divisor.
fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// Two-sample t-test with unequal variances (Welch–Satterthwaite df).
///
/// `t = (x̄ − ȳ) / sqrt(S_x²/N_x + S_y²/N_y)`.
pub fn two_sample_t(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_sample("x", x)?;
    check_sample("y", y)?;
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mx, my) = (mean(x), mean(y));
    let (vx, vy) = (variance(x) / nx, variance(y) / ny);
    let se2 = vx + vy;
    let diff = mx - my;
    if se2 == 0.0 {
        let df = Df::One(nx + ny - 2.0);
        return Ok(if diff == 0.0 {
            TestResult::boundary(TestKind::WelchT, 0.0, df, 1.0)
        } else {
            TestResult::boundary(TestKind::WelchT, diff.signum() * f64::INFINITY, df, 0.0)
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    Ok(TestResult::new(TestKind::WelchT, t, Df::One(df), t_two_sided_p(t, df)?))
}

/// Paired t-test: one-sample t on the differences `x_i − y_i`, df = N − 1.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_sample("x", x)?;
    check_sample("y", y)?;
    if x.len() != y.len() {
        return Err(Error::Shape {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let n = diffs.len() as f64;
    let md = mean(&diffs);
    let var = variance(&diffs);
    let df = n - 1.0;
    if var == 0.0 {
        return Ok(if md == 0.0 {
            TestResult::boundary(TestKind::PairedT, 0.0, Df::One(df), 1.0)
        } else {
            TestResult::boundary(TestKind::PairedT, md.signum() * f64::INFINITY, Df::One(df), 0.0)
        });
    }
    let t = md / (var / n).sqrt();
    Ok(TestResult::new(TestKind::PairedT, t, Df::One(df), t_two_sided_p(t, df)?))
}

/// Variance-ratio test `F = S_x² / S_y²` with df `(N_x − 1, N_y − 1)` and
/// two-sided p-value `2 min(CDF, 1 − CDF)`.
pub fn f_test_variance(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_sample("x", x)?;
    check_sample("y", y)?;
    let (vx, vy) = (variance(x), variance(y));
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let f = vx / vy;
    let (d1, d2) = ((x.len() - 1) as f64, (y.len() - 1) as f64);
    let lower = f_cdf(f, d1, d2)?;
    let upper = f_sf(f, d1, d2)?;
    Ok(TestResult::new(TestKind::FVariance, f, Df::Two(d1, d2), (2.0 * lower.min(upper)).min(1.0)))
}

/// `n` blocks (rows) × `k` treatments (columns) of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl BlockMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if n < 2 || k < 2 {
            return Err(Error::InvalidArgument(format!(
                "block design needs at least 2 rows and 2 columns (got {n} × {k})"
            )));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::Shape {
                expected: k,
                actual: bad.len(),
            });
        }
        let values: Vec<f64> = rows.concat();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("block design contains non-finite values".into()));
        }
        Ok(Self { rows: n, cols: k, values })
    }

    /// Builds the matrix from columns (one vector per treatment).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::Shape {
                expected: n,
                actual: bad.len(),
            });
        }
        let rows: Vec<Vec<f64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }
}

/// Ranks `1..=k` with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Friedman rank test with tie correction; chi-square approximation with
/// `k − 1` df.
pub fn friedman(data: &BlockMatrix) -> Result<TestResult> {
    let (n, k) = (data.rows() as f64, data.cols() as f64);
    let mut rank_sums = vec![0.0; data.cols()];
    let mut tie_sum = 0.0;
    for i in 0..data.rows() {
        let row = data.row(i);
        let ranks = average_ranks(row);
        for (sum, r) in rank_sums.iter_mut().zip(&ranks) {
            *sum += r;
        }
        let mut sorted = row.to_vec();
        sorted.sort_by(f64::total_cmp);
        for group in sorted.chunk_by(|a, b| a == b) {
            let t = group.len() as f64;
            tie_sum += t * t * t - t;
        }
    }
    let df = Df::One(k - 1.0);
    let correction = 1.0 - tie_sum / (n * (k * k * k - k));
    if correction <= 0.0 {
        // every row fully tied
        return Ok(TestResult::boundary(TestKind::Friedman, 0.0, df, 1.0));
    }
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
    let statistic = (raw / correction).max(0.0);
    Ok(TestResult::new(TestKind::Friedman, statistic, df, chi2_sf(statistic, k - 1.0)?))
}

/// Two-way ANOVA without replication. Returns `(row effect, column effect)`.
pub fn two_way_anova(data: &BlockMatrix) -> Result<(TestResult, TestResult)> {
    let (n, k) = (data.rows(), data.cols());
    let grand = data.values.iter().sum::<f64>() / (n * k) as f64;
    let row_means: Vec<f64> = (0..n).map(|i| mean(data.row(i))).collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| data.get(i, j)).sum::<f64>() / n as f64)
        .collect();

    let ss_rows = k as f64 * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols = n as f64 * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let mut ss_err = 0.0;
    for i in 0..n {
        for j in 0..k {
            ss_err += (data.get(i, j) - row_means[i] - col_means[j] + grand).powi(2);
        }
    }

    // Sums of squares at the level of rounding noise count as zero.
    let scale = data.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = (n * k) as f64 * (16.0 * f64::EPSILON * scale).powi(2);
    let clean = |ss: f64| if ss <= noise { 0.0 } else { ss };
    let (ss_rows, ss_cols, ss_err) = (clean(ss_rows), clean(ss_cols), clean(ss_err));

    let df_rows = (n - 1) as f64;
    let df_cols = (k - 1) as f64;
    let df_err = ((n - 1) * (k - 1)) as f64;
    let ms_err = ss_err / df_err;

    let effect = |kind: TestKind, ss: f64, df: f64| -> Result<TestResult> {
        let dfs = Df::Two(df, df_err);
        let ms = ss / df;
        if ms_err == 0.0 {
            return Ok(if ms == 0.0 {
                TestResult::boundary(kind, 0.0, dfs, 1.0)
            } else {
                TestResult::boundary(kind, f64::INFINITY, dfs, 0.0)
            });
        }
        let f = ms / ms_err;
        Ok(TestResult::new(kind, f, dfs, f_sf(f, df, df_err)?))
    };
    Ok((
        effect(TestKind::AnovaRows, ss_rows, df_rows)?,
        effect(TestKind::AnovaColumns, ss_cols, df_cols)?,
    ))
}
