//! File output: atomic writes and the CSV projections of a report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fatune::analysis::{self, BoxSummary, GroupTest, PairwiseTest, Parameter, Subject};
use fatune::sampling::SamplerKind;
use fatune::stats::{Df, TestResult};
use fatune::tuning::ExperimentReport;

use crate::error::{CliError, CliResult};

/// Shortest-exact is not guaranteed by every reader, so floats are written
/// with 17 significant digits, which always parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

/// Collects written paths so callers can list them.
#[derive(Debug, Default)]
pub struct Written(pub Vec<PathBuf>);

impl Written {
    pub fn csv(&mut self, path: PathBuf, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        write_atomic(&path, &csv_bytes(header, rows))?;
        self.0.push(path);
        Ok(())
    }

    pub fn raw(&mut self, path: PathBuf, bytes: &[u8]) -> CliResult<()> {
        write_atomic(&path, bytes)?;
        self.0.push(path);
        Ok(())
    }
}

fn strings<const N: usize>(items: [&str; N]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn objective_file(method: SamplerKind) -> String {
    format!("objectives_{}.csv", method.tag().to_ascii_lowercase())
}

/// One table per method: `run_index, f1..f6`, then `mean` and `sigma` rows.
pub fn write_objective_tables(dir: &Path, report: &ExperimentReport, out: &mut Written) -> CliResult<()> {
    let problems = report.problems.len();
    for (m, &method) in report.methods.iter().enumerate() {
        let cells = &report.cells[m * problems..(m + 1) * problems];
        let mut header = vec!["run_index".to_string()];
        header.extend(cells.iter().map(|c| c.problem.label().to_string()));
        let settings = cells.first().map_or(0, |c| c.rows.len());
        let mut rows: Vec<Vec<String>> = (0..settings)
            .map(|s| {
                let mut row = vec![(s + 1).to_string()];
                row.extend(cells.iter().map(|c| fmt_f64(c.rows[s].best_value)));
                row
            })
            .collect();
        let mut mean = vec!["mean".to_string()];
        mean.extend(cells.iter().map(|c| fmt_f64(c.mean)));
        let mut sigma = vec!["sigma".to_string()];
        sigma.extend(cells.iter().map(|c| c.sigma.map(fmt_f64).unwrap_or_default()));
        rows.push(mean);
        rows.push(sigma);
        out.csv(dir.join(objective_file(method)), &header, &rows)?;
    }
    Ok(())
}

/// One table per parameter: rows are problems, columns are methods.
pub fn write_parameter_tables(dir: &Path, report: &ExperimentReport, out: &mut Written) -> CliResult<()> {
    for param in Parameter::ALL {
        let columns = analysis::parameter_columns(report, param)?;
        let mut header = vec!["problem".to_string()];
        header.extend(report.methods.iter().map(|m| m.to_string()));
        let rows: Vec<Vec<String>> = report
            .problems
            .iter()
            .enumerate()
            .map(|(p, spec)| {
                let mut row = vec![spec.id.label().to_string()];
                row.extend(columns.iter().map(|c| fmt_f64(c[p])));
                row
            })
            .collect();
        out.csv(dir.join(format!("best_{}.csv", param.name())), &header, &rows)?;
    }
    Ok(())
}

fn df_fields(df: Df) -> [String; 2] {
    match df {
        Df::One(d) => [fmt_f64(d), String::new()],
        Df::Two(a, b) => [fmt_f64(a), fmt_f64(b)],
    }
}

fn result_fields(r: &TestResult) -> Vec<String> {
    let [df1, df2] = df_fields(r.df);
    vec![fmt_f64(r.statistic), df1, df2, fmt_f64(r.p_value), r.degenerate.to_string()]
}

/// Long form: one row per test.
pub fn write_pairwise(path: PathBuf, tests: &[PairwiseTest], out: &mut Written) -> CliResult<()> {
    let header = strings(["subject", "first", "second", "statistic", "df1", "df2", "p_value", "degenerate"]);
    let rows: Vec<Vec<String>> = tests
        .iter()
        .map(|t| {
            let mut row = vec![t.subject.label(), t.first.to_string(), t.second.to_string()];
            row.extend(result_fields(&t.result));
            row
        })
        .collect();
    out.csv(path, &header, &rows)
}

/// Matrix form: rows are problems, columns are method pairs, cells are
/// p-values. Parameter-level tests only appear in the long form.
pub fn write_pairwise_matrix(path: PathBuf, tests: &[PairwiseTest], out: &mut Written) -> CliResult<()> {
    let mut pairs: Vec<(SamplerKind, SamplerKind)> = Vec::new();
    let mut subjects = Vec::new();
    for t in tests.iter().filter(|t| matches!(t.subject, Subject::Problem(_))) {
        if !pairs.contains(&(t.first, t.second)) {
            pairs.push((t.first, t.second));
        }
        if !subjects.contains(&t.subject) {
            subjects.push(t.subject);
        }
    }
    let mut header = vec!["subject".to_string()];
    header.extend(pairs.iter().map(|(a, b)| format!("{a}-{b}")));
    let rows: Vec<Vec<String>> = subjects
        .iter()
        .map(|s| {
            let mut row = vec![s.label()];
            for pair in &pairs {
                let p = tests
                    .iter()
                    .find(|t| t.subject == *s && (t.first, t.second) == *pair)
                    .map(|t| fmt_f64(t.result.p_value));
                row.push(p.unwrap_or_default());
            }
            row
        })
        .collect();
    out.csv(path, &header, &rows)
}

pub fn write_group(path: PathBuf, tests: &[GroupTest], out: &mut Written) -> CliResult<()> {
    let header = strings(["subject", "statistic", "df1", "df2", "p_value", "degenerate"]);
    let rows: Vec<Vec<String>> = tests
        .iter()
        .map(|t| {
            let mut row = vec![t.subject.label()];
            row.extend(result_fields(&t.result));
            row
        })
        .collect();
    out.csv(path, &header, &rows)
}

pub fn write_anova(path: PathBuf, rows_effect: &[GroupTest], cols_effect: &[GroupTest], out: &mut Written) -> CliResult<()> {
    let header = strings(["subject", "effect", "statistic", "df1", "df2", "p_value", "degenerate"]);
    let mut rows = Vec::new();
    for (r, c) in rows_effect.iter().zip(cols_effect) {
        for (effect, t) in [("row", r), ("column", c)] {
            let mut row = vec![t.subject.label(), effect.to_string()];
            row.extend(result_fields(&t.result));
            rows.push(row);
        }
    }
    out.csv(path, &header, &rows)
}

pub fn write_boxplot_csv(path: PathBuf, boxes: &[BoxSummary], out: &mut Written) -> CliResult<()> {
    let header = strings([
        "parameter",
        "method",
        "n",
        "min",
        "q1",
        "median",
        "q3",
        "max",
        "lower_whisker",
        "upper_whisker",
        "outliers",
    ]);
    let rows: Vec<Vec<String>> = boxes
        .iter()
        .filter_map(|b| {
            let s = b.summary.as_ref()?;
            let mut row = vec![b.parameter.name().to_string(), b.method.to_string(), b.values.len().to_string()];
            row.extend([s.min, s.q1, s.median, s.q3, s.max, s.lower_whisker, s.upper_whisker].map(fmt_f64));
            row.push(s.outliers.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";"));
            Some(row)
        })
        .collect();
    out.csv(path, &header, &rows)
}
