//! Reference CDF values bundled with the crate, used by self-tests.
//!
//! Each line is `kind  x  df1  df2  cdf  tolerance`, tab separated, with
//! `kind` one of `t`, `f`, `chi2`; `df2` is ignored except for `f`.

use crate::error::{Error, Result};

use super::{chi2_cdf, f_cdf, t_cdf};

const BUNDLED: &str = include_str!("../../data/cdf_oracle.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    T,
    F,
    ChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCase {
    pub distribution: Distribution,
    pub x: f64,
    pub df1: f64,
    pub df2: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl OracleCase {
    /// The CDF value computed by this crate.
    pub fn compute(&self) -> Result<f64> {
        match self.distribution {
            Distribution::T => t_cdf(self.x, self.df1),
            Distribution::F => f_cdf(self.x, self.df1, self.df2),
            Distribution::ChiSquare => chi2_cdf(self.x, self.df1),
        }
    }
}

pub fn parse_oracle_table(text: &str) -> Result<Vec<OracleCase>> {
    let mut cases = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| Error::InvalidArgument(format!("oracle line {}: {reason}", n + 1));
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(bad("expected 6 tab-separated fields"));
        }
        let distribution = match fields[0] {
            "t" => Distribution::T,
            "f" => Distribution::F,
            "chi2" => Distribution::ChiSquare,
            other => return Err(bad(&format!("unknown distribution `{other}`"))),
        };
        let num = |i: usize| fields[i].parse::<f64>().map_err(|_| bad(&format!("field {} is not a number", i + 1)));
        cases.push(OracleCase {
            distribution,
            x: num(1)?,
            df1: num(2)?,
            df2: num(3)?,
            expected: num(4)?,
            tolerance: num(5)?,
        });
    }
    Ok(cases)
}

/// The cases shipped in `data/cdf_oracle.tsv`.
pub fn bundled_cases() -> Vec<OracleCase> {
    parse_oracle_table(BUNDLED).expect("bundled oracle table is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_parses() {
        let cases = bundled_cases();
        assert!(cases.len() >= 100);
        for kind in [Distribution::T, Distribution::F, Distribution::ChiSquare] {
            assert!(cases.iter().any(|c| c.distribution == kind));
        }
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(parse_oracle_table("t\t1\t2").is_err());
        assert!(parse_oracle_table("z\t1\t2\t0\t0.5\t1e-8").is_err());
        assert!(parse_oracle_table("t\tx\t2\t0\t0.5\t1e-8").is_err());
        assert_eq!(parse_oracle_table("# only a comment\n\n").unwrap(), vec![]);
    }
}
