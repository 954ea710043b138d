//! The six benchmark problems and penalty-method constraint handling.
//!
//! Four unconstrained test functions (sphere, Rosenbrock, Ackley, Trid) and
//! two constrained engineering designs (tension/compression spring,
//! three-bar truss). Constraints are inequalities `g_j(x) <= 0`.

use std::f64::consts::{E, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension used for sphere, Rosenbrock and Ackley when none is given.
pub const DEFAULT_DIMENSION: usize = 10;
/// Dimension used for Trid when none is given.
pub const DEFAULT_TRID_DIMENSION: usize = 4;

const TRUSS_LOAD: f64 = 2000.0;
const TRUSS_STRESS_LIMIT: f64 = 2000.0;
const TRUSS_MEMBER_LENGTH: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Sphere,
    Rosenbrock,
    Ackley,
    Trid,
    Spring,
    Truss,
}

impl ProblemId {
    pub const ALL: [ProblemId; 6] = [
        ProblemId::Sphere,
        ProblemId::Rosenbrock,
        ProblemId::Ackley,
        ProblemId::Trid,
        ProblemId::Spring,
        ProblemId::Truss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Sphere => "sphere",
            ProblemId::Rosenbrock => "rosenbrock",
            ProblemId::Ackley => "ackley",
            ProblemId::Trid => "trid",
            ProblemId::Spring => "spring",
            ProblemId::Truss => "truss",
        }
    }

    /// Column label used in result tables (`f1` .. `f6`).
    pub fn label(self) -> &'static str {
        match self {
            ProblemId::Sphere => "f1",
            ProblemId::Rosenbrock => "f2",
            ProblemId::Ackley => "f3",
            ProblemId::Trid => "f4",
            ProblemId::Spring => "f5",
            ProblemId::Truss => "f6",
        }
    }

    /// Dimension forced by the problem definition, if any.
    pub fn fixed_dimension(self) -> Option<usize> {
        match self {
            ProblemId::Spring => Some(3),
            ProblemId::Truss => Some(2),
            _ => None,
        }
    }

    pub fn constraint_count(self) -> usize {
        match self {
            ProblemId::Spring => 4,
            ProblemId::Truss => 3,
            _ => 0,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == key || p.label() == key)
            .ok_or_else(|| Error::UnknownProblem(s.trim().to_string()))
    }
}

/// Which form of the fourth spring constraint to use.
///
/// The printed form `(x1 + x2) / 1.5 <= 0` cannot be satisfied by any
/// in-bounds point; the corrected form `(x1 + x2) / 1.5 - 1 <= 0` is the one
/// the known best design satisfies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpringG4 {
    #[default]
    Corrected,
    Literal,
}

impl FromStr for SpringG4 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "corrected" => Ok(SpringG4::Corrected),
            "literal" => Ok(SpringG4::Literal),
            _ => Err(Error::InvalidArgument(format!(
                "unknown spring g4 form `{s}` (expected corrected or literal)"
            ))),
        }
    }
}

/// Penalty coefficient λ in `f(x) + λ Σ max(0, g_j(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda: f64,
}

impl PenaltyConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("penalty lambda must be positive (got {lambda})")));
        }
        Ok(Self { lambda })
    }
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self { lambda: 1000.0 }
    }
}

/// A benchmark problem with its box bounds and reference optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    id: ProblemId,
    dimension: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    known_best_value: Option<f64>,
    known_best_point: Option<Vec<f64>>,
    spring_g4: SpringG4,
}

/// Builds a problem by name. `dimension` is accepted only for sphere,
/// Rosenbrock, Ackley and Trid.
pub fn make_problem(name: &str, dimension: Option<usize>) -> Result<Problem> {
    Problem::new(name.parse()?, dimension)
}

/// Closed-form Trid optimum: value `-D(D+4)(D-1)/6` at `x_i = i(D+1-i)`.
pub fn trid_optimum(dimension: usize) -> Result<(f64, Vec<f64>)> {
    if dimension < 2 {
        return Err(Error::InvalidArgument(format!("Trid optimum needs D >= 2 (got {dimension})")));
    }
    let d = dimension as f64;
    let value = -d * (d + 4.0) * (d - 1.0) / 6.0;
    let point = (1..=dimension).map(|i| (i * (dimension + 1 - i)) as f64).collect();
    Ok((value, point))
}

impl Problem {
    pub fn new(id: ProblemId, dimension: Option<usize>) -> Result<Self> {
        let dimension = match (id.fixed_dimension(), dimension) {
            (Some(_), Some(_)) => return Err(Error::FixedDimension(id.name().to_string())),
            (Some(fixed), None) => fixed,
            (None, Some(0)) => {
                return Err(Error::InvalidArgument(format!("{id} needs a positive dimension")));
            }
            (None, Some(d)) => d,
            (None, None) if id == ProblemId::Trid => DEFAULT_TRID_DIMENSION,
            (None, None) => DEFAULT_DIMENSION,
        };

        let uniform = |low: f64, high: f64| (vec![low; dimension], vec![high; dimension]);
        let zero_optimum = (Some(0.0), Some(vec![0.0; dimension]));
        let ((lower, upper), (known_best_value, known_best_point)) = match id {
            ProblemId::Sphere => (uniform(-10.0, 10.0), zero_optimum),
            ProblemId::Rosenbrock => (uniform(-30.0, 30.0), (Some(0.0), Some(vec![1.0; dimension]))),
            ProblemId::Ackley => (uniform(-32.768, 32.768), zero_optimum),
            ProblemId::Trid => {
                let d2 = (dimension * dimension) as f64;
                let optimum = if dimension >= 2 {
                    let (value, point) = trid_optimum(dimension)?;
                    (Some(value), Some(point))
                } else {
                    (None, None)
                };
                (uniform(-d2, d2), optimum)
            }
            ProblemId::Spring => (
                (vec![0.05, 0.25, 2.0], vec![2.0, 1.3, 15.0]),
                (Some(0.012665), Some(vec![0.051690, 0.356750, 11.287126])),
            ),
            ProblemId::Truss => (
                uniform(0.001, 1.0),
                (Some(263.8958), Some(vec![0.78853, 0.40866])),
            ),
        };

        Ok(Self {
            id,
            dimension,
            lower,
            upper,
            known_best_value,
            known_best_point,
            spring_g4: SpringG4::Corrected,
        })
    }

    /// Switches the spring problem's fourth constraint form. No effect on
    /// other problems.
    pub fn with_spring_g4(mut self, form: SpringG4) -> Self {
        self.spring_g4 = form;
        self
    }

    pub fn id(&self) -> ProblemId {
        self.id
    }

    pub fn name(&self) -> &'static str {
        self.id.name()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    pub fn known_best_value(&self) -> Option<f64> {
        self.known_best_value
    }

    pub fn known_best_point(&self) -> Option<&[f64]> {
        self.known_best_point.as_deref()
    }

    pub fn constraint_count(&self) -> usize {
        self.id.constraint_count()
    }

    pub fn spring_g4(&self) -> SpringG4 {
        self.spring_g4
    }

    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.len() == self.dimension
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::Shape {
                expected: self.dimension,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Raw objective value (no penalty).
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.objective_unchecked(x))
    }

    /// Constraint values `g_j(x)`; non-finite values are reported as `+inf`.
    pub fn constraints(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = Vec::with_capacity(self.constraint_count());
        self.for_each_constraint(x, |g| out.push(g));
        Ok(out)
    }

    /// `f(x) + λ Σ max(0, g_j(x))`.
    pub fn penalized(&self, x: &[f64], penalty: PenaltyConfig) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.penalized_unchecked(x, penalty))
    }

    /// Largest constraint value, or `None` for unconstrained problems.
    pub fn max_violation(&self, x: &[f64]) -> Result<Option<f64>> {
        Ok(self.constraints(x)?.into_iter().reduce(f64::max))
    }

    pub(crate) fn penalized_unchecked(&self, x: &[f64], penalty: PenaltyConfig) -> f64 {
        let mut violation = 0.0;
        self.for_each_constraint(x, |g| violation += g.max(0.0));
        finite_or_inf(self.objective_unchecked(x) + penalty.lambda * violation)
    }

    fn objective_unchecked(&self, x: &[f64]) -> f64 {
        let value = match self.id {
            ProblemId::Sphere => x.iter().map(|v| v * v).sum(),
            ProblemId::Rosenbrock => {
                let valley: f64 = x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2)).sum();
                (1.0 - x[0]).powi(2) + valley
            }
            ProblemId::Ackley => {
                let d = x.len() as f64;
                let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
                let cos = x.iter().map(|v| (TAU * v).cos()).sum::<f64>() / d;
                -20.0 * (-0.2 * sq.sqrt()).exp() - cos.exp() + 20.0 + E
            }
            ProblemId::Trid => {
                let squares: f64 = x.iter().map(|v| (v - 1.0).powi(2)).sum();
                let products: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
                squares - products
            }
            ProblemId::Spring => (2.0 + x[2]) * x[0] * x[0] * x[1],
            ProblemId::Truss => TRUSS_MEMBER_LENGTH * (2.0 * SQRT_2 * x[0] + x[1]),
        };
        finite_or_inf(value)
    }

    fn for_each_constraint(&self, x: &[f64], mut sink: impl FnMut(f64)) {
        let mut emit = |g: f64| sink(finite_or_inf(g));
        match self.id {
            ProblemId::Spring => {
                let (x1, x2, x3) = (x[0], x[1], x[2]);
                emit(1.0 - x2.powi(3) * x3 / (71785.0 * x1.powi(4)));
                emit(
                    (4.0 * x2 * x2 - x1 * x2) / (12566.0 * (x2 * x1.powi(3) - x1.powi(4)))
                        + 1.0 / (5108.0 * x1 * x1)
                        - 1.0,
                );
                emit(1.0 - 140.45 * x1 / (x2 * x2 * x3));
                emit(match self.spring_g4 {
                    SpringG4::Corrected => (x1 + x2) / 1.5 - 1.0,
                    SpringG4::Literal => (x1 + x2) / 1.5,
                });
            }
            ProblemId::Truss => {
                let (x1, x2) = (x[0], x[1]);
                let denom = SQRT_2 * x1 * x1 + 2.0 * x1 * x2;
                emit((SQRT_2 * x1 + x2) * TRUSS_LOAD / denom - TRUSS_STRESS_LIMIT);
                emit(x2 * TRUSS_LOAD / denom - TRUSS_STRESS_LIMIT);
                emit(TRUSS_LOAD / (x1 + SQRT_2 * x2) - TRUSS_STRESS_LIMIT);
            }
            _ => {}
        }
    }
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trid_four() {
        let p = make_problem("trid", Some(4)).unwrap();
        assert_eq!(p.known_best_value(), Some(-16.0));
        assert_eq!(p.known_best_point(), Some(&[4.0, 6.0, 6.0, 4.0][..]));
        assert_eq!(p.objective(&[4.0, 6.0, 6.0, 4.0]).unwrap(), -16.0);
        assert_eq!(p.lower_bounds(), &[-16.0; 4]);
    }

    #[test]
    fn trid_optimum_closed_form() {
        assert_eq!(trid_optimum(4).unwrap(), (-16.0, vec![4.0, 6.0, 6.0, 4.0]));
        assert_eq!(trid_optimum(2).unwrap(), (-2.0, vec![2.0, 2.0]));
        let (value, point) = trid_optimum(6).unwrap();
        assert_eq!(value, -50.0);
        let p = make_problem("trid", Some(6)).unwrap();
        assert!((p.objective(&point).unwrap() + 50.0).abs() < 1e-9);
        assert!(trid_optimum(1).is_err());
    }

    #[test]
    fn known_optima() {
        let sphere = make_problem("sphere", None).unwrap();
        assert_eq!(sphere.dimension(), DEFAULT_DIMENSION);
        assert_eq!(sphere.objective(&[0.0; 10]).unwrap(), 0.0);
        let rosen = make_problem("rosenbrock", Some(5)).unwrap();
        assert_eq!(rosen.objective(&[1.0; 5]).unwrap(), 0.0);
        let ackley = make_problem("ackley", Some(3)).unwrap();
        assert!(ackley.objective(&[0.0; 3]).unwrap().abs() < 1e-12);

        let spring = make_problem("spring", None).unwrap();
        let f = spring.objective(&[0.051690, 0.356750, 11.287126]).unwrap();
        assert!((f - 0.012665).abs() < 1e-5);
        let truss = make_problem("truss", None).unwrap();
        let f = truss.objective(&[0.78853, 0.40866]).unwrap();
        assert!((f - 263.896).abs() < 0.01);
    }

    #[test]
    fn literature_points_are_feasible() {
        for name in ["spring", "truss"] {
            let p = make_problem(name, None).unwrap();
            let x = p.known_best_point().unwrap().to_vec();
            let g = p.constraints(&x).unwrap();
            assert_eq!(g.len(), p.constraint_count());
            assert!(g.iter().all(|&v| v <= 1e-3), "{name}: {g:?}");
        }
    }

    #[test]
    fn literal_spring_constraint_is_never_satisfied() {
        let p = make_problem("spring", None).unwrap().with_spring_g4(SpringG4::Literal);
        let g = p.constraints(&[0.051690, 0.356750, 11.287126]).unwrap();
        assert!(g[3] > 0.0);
    }

    #[test]
    fn bounds() {
        let spring = make_problem("spring", None).unwrap();
        assert_eq!(spring.lower_bounds(), &[0.05, 0.25, 2.0]);
        assert_eq!(spring.upper_bounds(), &[2.0, 1.3, 15.0]);
        let truss = make_problem("truss", None).unwrap();
        assert_eq!(truss.lower_bounds(), &[0.001, 0.001]);
        assert_eq!(truss.upper_bounds(), &[1.0, 1.0]);
        let ackley = make_problem("ackley", Some(2)).unwrap();
        assert_eq!(ackley.upper_bounds(), &[32.768, 32.768]);
        assert_eq!(make_problem("rosenbrock", Some(2)).unwrap().lower_bounds(), &[-30.0, -30.0]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_problem("rastrigin", None).unwrap_err(), Error::UnknownProblem("rastrigin".into()));
        assert_eq!(make_problem("spring", Some(3)).unwrap_err(), Error::FixedDimension("spring".into()));
        assert_eq!(make_problem("truss", Some(2)).unwrap_err(), Error::FixedDimension("truss".into()));
        assert!(make_problem("sphere", Some(0)).is_err());
        assert_eq!(make_problem("F4", None).unwrap().id(), ProblemId::Trid);
    }

    #[test]
    fn shape_errors() {
        let p = make_problem("sphere", Some(3)).unwrap();
        assert_eq!(p.objective(&[1.0, 2.0]).unwrap_err(), Error::Shape { expected: 3, actual: 2 });
        assert!(p.constraints(&[1.0]).is_err());
        assert!(p.penalized(&[1.0], PenaltyConfig::default()).is_err());
    }

    #[test]
    fn penalty_behaviour() {
        let lambda = PenaltyConfig::default();
        let sphere = make_problem("sphere", Some(2)).unwrap();
        assert!(sphere.constraints(&[1.0, 2.0]).unwrap().is_empty());
        assert_eq!(sphere.penalized(&[1.0, 2.0], lambda).unwrap(), 5.0);

        let truss = make_problem("truss", None).unwrap();
        let feasible = [0.9, 0.5];
        assert!(truss.constraints(&feasible).unwrap().iter().all(|&g| g <= 0.0));
        assert_eq!(
            truss.penalized(&feasible, lambda).unwrap(),
            truss.objective(&feasible).unwrap()
        );

        // substitution: g1 = 2000 * (sqrt2*0.001 + 0.001) / (sqrt2*1e-6 + 2e-6) - 2000 ≈ 1.0e6
        let tiny = [0.001, 0.001];
        let g = truss.constraints(&tiny).unwrap();
        let expected_g1 = (SQRT_2 * 0.001 + 0.001) * 2000.0 / (SQRT_2 * 1e-6 + 2e-6) - 2000.0;
        assert!((g[0] - expected_g1).abs() < 1e-6);
        assert!(truss.penalized(&tiny, lambda).unwrap() > 1e5);
    }

    #[test]
    fn non_finite_constraints_become_infinite() {
        let truss = make_problem("truss", None).unwrap();
        let g = truss.constraints(&[0.0, 0.0]).unwrap();
        assert!(g.iter().all(|v| *v == f64::INFINITY), "{g:?}");
        assert_eq!(truss.penalized(&[0.0, 0.0], PenaltyConfig::default()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn penalty_config_validation() {
        assert!(PenaltyConfig::new(0.0).is_err());
        assert!(PenaltyConfig::new(-1.0).is_err());
        assert_eq!(PenaltyConfig::new(1000.0).unwrap(), PenaltyConfig::default());
    }

    #[test]
    fn ackley_matches_definition_off_origin() {
        let p = make_problem("ackley", Some(2)).unwrap();
        let x = [1.0, -0.5];
        let expected = -20.0 * (-0.2 * ((1.0 + 0.25) / 2.0f64).sqrt()).exp()
            - (((2.0 * std::f64::consts::PI * 1.0).cos() + (2.0 * std::f64::consts::PI * -0.5).cos()) / 2.0).exp()
            + 20.0
            + E;
        assert!((p.objective(&x).unwrap() - expected).abs() < 1e-12);
    }
}
