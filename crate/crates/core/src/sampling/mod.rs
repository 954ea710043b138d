//! Point generation in the unit hypercube and scaling to FA parameter ranges.
//!
//! Three samplers produce [`UnitPointSet`]s: plain Monte Carlo, scrambled
//! Sobol quasi-Monte Carlo and Latin Hypercube Sampling. All of them draw
//! their randomness from a caller-owned [`RandomStream`].

mod rng;
mod sobol;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use rng::{RandomStream, SeedPath};
pub use sobol::{draw_sobol, max_dimension as sobol_max_dimension, parse_direction_table, DirectionEntry};

/// `n × d` matrix of values in `[0, 1)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPointSet {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl UnitPointSet {
    pub fn from_row_major(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * d {
            return Err(Error::Shape {
                expected: n * d,
                actual: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("unit point value {bad} outside [0, 1)")));
        }
        Ok(Self { n, d, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.d + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.d..(row + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.d)
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.rows().map(|r| r[col]).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Which sampler a tuner uses to draw parameter settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SamplerKind {
    #[serde(rename = "MC")]
    Mc,
    #[serde(rename = "QMC")]
    Qmc,
    #[serde(rename = "LHS")]
    Lhs,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [SamplerKind::Mc, SamplerKind::Qmc, SamplerKind::Lhs];

    pub fn tag(self) -> &'static str {
        match self {
            SamplerKind::Mc => "MC",
            SamplerKind::Qmc => "QMC",
            SamplerKind::Lhs => "LHS",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MC" => Ok(SamplerKind::Mc),
            "QMC" => Ok(SamplerKind::Qmc),
            "LHS" => Ok(SamplerKind::Lhs),
            other => Err(Error::InvalidArgument(format!(
                "unknown sampler `{other}` (expected MC, QMC or LHS)"
            ))),
        }
    }
}

fn check_size(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "sampler needs n >= 1 and d >= 1 (got n = {n}, d = {d})"
        )));
    }
    Ok(())
}

/// `n × d` independent uniforms, row by row.
pub fn draw_mc(n: usize, d: usize, stream: &mut RandomStream) -> Result<UnitPointSet> {
    check_size(n, d)?;
    let values = (0..n * d).map(|_| stream.uniform()).collect();
    UnitPointSet::from_row_major(n, d, values)
}

/// Latin Hypercube sample: in every dimension, sample `i` lands in stratum
/// `perm[i]` of `n` equal strata, uniformly within the stratum.
pub fn draw_lhs(n: usize, d: usize, stream: &mut RandomStream) -> Result<UnitPointSet> {
    check_size(n, d)?;
    let width = 1.0 / n as f64;
    let mut values = vec![0.0; n * d];
    let mut strata: Vec<usize> = (0..n).collect();
    for col in 0..d {
        strata.iter_mut().enumerate().for_each(|(i, s)| *s = i);
        stream.shuffle(&mut strata);
        for (row, &stratum) in strata.iter().enumerate() {
            let u = stream.uniform();
            let lower = stratum as f64 * width;
            let upper = (stratum + 1) as f64 * width;
            // (k + u) / n can round up to the stratum's upper edge.
            let mut v = (stratum as f64 + u) * width;
            if v >= upper {
                v = upper.next_down();
            }
            values[row * d + col] = v.max(lower);
        }
    }
    UnitPointSet::from_row_major(n, d, values)
}

/// Dispatches to the sampler named by `kind`. `scramble` only affects QMC.
pub fn draw(kind: SamplerKind, n: usize, d: usize, stream: &mut RandomStream, scramble: bool) -> Result<UnitPointSet> {
    match kind {
        SamplerKind::Mc => draw_mc(n, d, stream),
        SamplerKind::Qmc => draw_sobol(n, d, stream, scramble),
        SamplerKind::Lhs => draw_lhs(n, d, stream),
    }
}

/// Closed-open interval `[low, high)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        let interval = Self { low, high };
        interval.validate("interval")?;
        Ok(interval)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.low.is_finite() && self.high.is_finite() && self.low < self.high) {
            return Err(Error::InvalidArgument(format!(
                "{name} range needs finite low < high (got [{}, {}])",
                self.low, self.high
            )));
        }
        Ok(())
    }

    /// Affine image of `u ∈ [0, 1)`, kept strictly below `high`.
    pub fn scale(&self, u: f64) -> f64 {
        let v = self.low + u * (self.high - self.low);
        if v >= self.high {
            self.high.next_down()
        } else {
            v
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v < self.high
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.low + self.high)
    }
}

/// Sampling ranges for the three tuned FA parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRanges {
    pub theta: Interval,
    pub beta: Interval,
    pub gamma: Interval,
}

impl ParameterRanges {
    /// θ ∈ [0.9, 1.0], β ∈ [0, 1], γ ∈ [0.1, 2.5].
    pub fn standard() -> Self {
        Self {
            theta: Interval { low: 0.9, high: 1.0 },
            beta: Interval { low: 0.0, high: 1.0 },
            gamma: Interval { low: 0.1, high: 2.5 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.validate("theta")?;
        self.beta.validate("beta")?;
        self.gamma.validate("gamma")?;
        if self.theta.low <= 0.0 || self.theta.high > 1.0 {
            return Err(Error::InvalidArgument("theta range must lie within (0, 1]".into()));
        }
        if self.beta.low < 0.0 || self.gamma.low < 0.0 {
            return Err(Error::InvalidArgument("beta and gamma ranges must be non-negative".into()));
        }
        Ok(())
    }

    pub fn contains(&self, sample: &ParameterSample) -> bool {
        self.theta.contains(sample.theta) && self.beta.contains(sample.beta) && self.gamma.contains(sample.gamma)
    }
}

impl Default for ParameterRanges {
    fn default() -> Self {
        Self::standard()
    }
}

/// One FA setting drawn by a tuner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSample {
    /// Per-iteration decay factor of the randomization strength.
    pub theta: f64,
    /// Attractiveness.
    pub beta: f64,
    /// Light absorption coefficient.
    pub gamma: f64,
}

/// Maps each 3-column row `(u_θ, u_β, u_γ)` affinely onto `ranges`.
pub fn scale_to_ranges(points: &UnitPointSet, ranges: &ParameterRanges) -> Result<Vec<ParameterSample>> {
    if points.dimension() != 3 {
        return Err(Error::Shape {
            expected: 3,
            actual: points.dimension(),
        });
    }
    Ok(points
        .rows()
        .map(|u| ParameterSample {
            theta: ranges.theta.scale(u[0]),
            beta: ranges.beta.scale(u[1]),
            gamma: ranges.gamma.scale(u[2]),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_in_unit(set: &UnitPointSet) -> bool {
        set.values().iter().all(|v| (0.0..1.0).contains(v))
    }

    #[test]
    fn mc_range_and_determinism() {
        let a = draw_mc(10, 3, &mut RandomStream::new(42)).unwrap();
        let b = draw_mc(10, 3, &mut RandomStream::new(42)).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a.dimension(), 3);
        assert!(all_in_unit(&a));
        assert_eq!(a, b);
    }

    #[test]
    fn mc_mean_near_half() {
        let set = draw_mc(10_000, 1, &mut RandomStream::new(3)).unwrap();
        let mean = set.values().iter().sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn samplers_reject_empty_requests() {
        let mut s = RandomStream::new(1);
        assert!(matches!(draw_mc(0, 3, &mut s), Err(Error::InvalidArgument(_))));
        assert!(matches!(draw_mc(3, 0, &mut s), Err(Error::InvalidArgument(_))));
        assert!(matches!(draw_lhs(0, 2, &mut s), Err(Error::InvalidArgument(_))));
        assert!(matches!(draw_sobol(0, 2, &mut s, true), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn lhs_quartiles() {
        let set = draw_lhs(4, 2, &mut RandomStream::new(8)).unwrap();
        for col in 0..2 {
            let mut bins: Vec<usize> = set.column(col).iter().map(|v| (v * 4.0) as usize).collect();
            bins.sort_unstable();
            assert_eq!(bins, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn lhs_single_point() {
        let set = draw_lhs(1, 3, &mut RandomStream::new(8)).unwrap();
        assert_eq!(set.len(), 1);
        assert!(all_in_unit(&set));
    }

    #[test]
    fn lhs_deterministic() {
        let a = draw_lhs(10, 3, &mut RandomStream::new(7)).unwrap();
        let b = draw_lhs(10, 3, &mut RandomStream::new(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaling_midpoint_and_bounds() {
        let ranges = ParameterRanges::standard();
        let mid = UnitPointSet::from_row_major(1, 3, vec![0.5; 3]).unwrap();
        let p = scale_to_ranges(&mid, &ranges).unwrap()[0];
        assert!((p.theta - 0.95).abs() < 1e-15);
        assert!((p.beta - 0.5).abs() < 1e-15);
        assert!((p.gamma - 1.3).abs() < 1e-15);

        let zero = UnitPointSet::from_row_major(1, 3, vec![0.0; 3]).unwrap();
        let p = scale_to_ranges(&zero, &ranges).unwrap()[0];
        assert_eq!((p.theta, p.beta, p.gamma), (0.9, 0.0, 0.1));

        let top = UnitPointSet::from_row_major(1, 3, vec![1.0f64.next_down(); 3]).unwrap();
        let p = scale_to_ranges(&top, &ranges).unwrap()[0];
        assert!(p.theta < 1.0 && p.beta < 1.0 && p.gamma < 2.5);
        assert!(ranges.contains(&p));
    }

    #[test]
    fn scaling_requires_three_columns() {
        let set = UnitPointSet::from_row_major(2, 2, vec![0.1; 4]).unwrap();
        assert_eq!(
            scale_to_ranges(&set, &ParameterRanges::standard()).unwrap_err(),
            Error::Shape { expected: 3, actual: 2 }
        );
    }

    #[test]
    fn sampler_kind_round_trip() {
        for kind in SamplerKind::ALL {
            assert_eq!(kind.tag().parse::<SamplerKind>().unwrap(), kind);
        }
        assert!("halton".parse::<SamplerKind>().is_err());
    }

    #[test]
    fn ranges_validation() {
        let mut r = ParameterRanges::standard();
        assert!(r.validate().is_ok());
        r.beta = Interval { low: 1.0, high: 1.0 };
        assert!(r.validate().is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
    }
}
