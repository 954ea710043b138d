//! Firefly Algorithm for box-bounded minimization of a penalized objective.
//!
//! Each iteration sweeps all ordered pairs `(i, j)`. When firefly `j` is
//! brighter (lower penalized value) than firefly `i`, firefly `i` moves:
//!
//! ```text
//! x_i <- x_i + β exp(-γ r_ij²) (x_j - x_i) + α ε,   ε ~ N(0, I)
//! ```
//!
//! with `r_ij` the Euclidean distance between the current positions. The
//! randomization strength decays geometrically, `α_t = α0 θ^t`. After the
//! sweep positions are clamped to the bounds and re-evaluated.
//!
//! [`StepScale::Normalized`] measures distances and perturbations in units of
//! each coordinate's bound width instead, which is the same rule applied to
//! the problem mapped onto the unit cube.

use serde::{Deserialize, Serialize};

use crate::benchmarks::{PenaltyConfig, Problem};
use crate::error::{Error, Result};
use crate::sampling::{ParameterSample, RandomStream};

/// Units in which `r_ij` and the random step are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepScale {
    /// Raw coordinates.
    #[default]
    Literal,
    /// Coordinates divided by `upper - lower`.
    Normalized,
}

impl std::str::FromStr for StepScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "literal" => Ok(Self::Literal),
            "normalized" => Ok(Self::Normalized),
            _ => Err(Error::InvalidArgument(format!(
                "unknown step scale `{s}` (expected literal or normalized)"
            ))),
        }
    }
}

/// Control parameters for one FA execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    /// Decay factor of α per iteration, in `(0, 1)`.
    pub theta: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Initial randomization strength.
    pub alpha0: f64,
    pub step_scale: StepScale,
    pub seed: u64,
}

impl FaConfig {
    pub fn new(population_size: usize, max_iterations: usize, params: ParameterSample, seed: u64) -> Self {
        Self {
            population_size,
            max_iterations,
            theta: params.theta,
            beta: params.beta,
            gamma: params.gamma,
            alpha0: 1.0,
            step_scale: StepScale::Literal,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.population_size < 2 {
            return fail(format!("population size must be at least 2 (got {})", self.population_size));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return fail(format!("theta must lie in (0, 1) (got {})", self.theta));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return fail(format!("beta must be non-negative (got {})", self.beta));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma must be non-negative (got {})", self.gamma));
        }
        if !(self.alpha0 >= 0.0 && self.alpha0.is_finite()) {
            return fail(format!("alpha0 must be non-negative (got {})", self.alpha0));
        }
        Ok(())
    }

    /// `α0 θ^t`.
    pub fn alpha_at(&self, iteration: usize) -> f64 {
        self.alpha0 * self.theta.powf(iteration as f64)
    }
}

/// Population snapshot between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct FireflyState {
    dimension: usize,
    /// Row-major `n × D` positions.
    positions: Vec<f64>,
    fitness: Vec<f64>,
    iteration: usize,
    alpha: f64,
    best_point: Vec<f64>,
    best_value: f64,
    evaluations: u64,
}

impl FireflyState {
    pub fn population_size(&self) -> usize {
        self.fitness.len()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks(self.dimension)
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn best_point(&self) -> &[f64] {
        &self.best_point
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Overrides the randomization strength of the next iteration.
    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    fn evaluate_all(&mut self, problem: &Problem, penalty: PenaltyConfig) {
        for (x, f) in self.positions.chunks(self.dimension).zip(self.fitness.iter_mut()) {
            *f = problem.penalized_unchecked(x, penalty);
        }
        self.evaluations += self.fitness.len() as u64;
    }

    /// Strict improvement only, so ties keep the earlier incumbent.
    fn update_best(&mut self) {
        for (i, &f) in self.fitness.iter().enumerate() {
            if f < self.best_value {
                self.best_value = f;
                self.best_point
                    .copy_from_slice(&self.positions[i * self.dimension..(i + 1) * self.dimension]);
            }
        }
    }
}

/// Best-solution record of one FA execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub best_value: f64,
    pub best_point: Vec<f64>,
    /// Best value after initialization and after each iteration.
    pub history: Vec<f64>,
    pub evaluations: u64,
}

/// Uniform random population inside the bound box.
pub fn init_population(
    problem: &Problem,
    config: &FaConfig,
    penalty: PenaltyConfig,
    stream: &mut RandomStream,
) -> Result<FireflyState> {
    config.validate()?;
    let dimension = problem.dimension();
    let n = config.population_size;
    let mut positions = Vec::with_capacity(n * dimension);
    for _ in 0..n {
        for (lo, hi) in problem.lower_bounds().iter().zip(problem.upper_bounds()) {
            positions.push(lo + stream.uniform() * (hi - lo));
        }
    }
    let mut state = FireflyState {
        dimension,
        best_point: positions[..dimension].to_vec(),
        positions,
        fitness: vec![f64::INFINITY; n],
        iteration: 0,
        alpha: config.alpha0,
        best_value: f64::INFINITY,
        evaluations: 0,
    };
    state.evaluate_all(problem, penalty);
    state.update_best();
    Ok(state)
}

/// One FA iteration: pairwise attraction sweep, clamping, re-evaluation,
/// α decay and best tracking.
pub fn step(
    state: &mut FireflyState,
    problem: &Problem,
    config: &FaConfig,
    penalty: PenaltyConfig,
    stream: &mut RandomStream,
) {
    let d = state.dimension;
    let n = state.population_size();
    let alpha = state.alpha;
    let mut target = vec![0.0; d];
    let width: Vec<f64> = match config.step_scale {
        StepScale::Literal => vec![1.0; d],
        StepScale::Normalized => problem
            .lower_bounds()
            .iter()
            .zip(problem.upper_bounds())
            .map(|(lo, hi)| hi - lo)
            .collect(),
    };

    for i in 0..n {
        for j in 0..n {
            if !(state.fitness[j] < state.fitness[i]) {
                continue;
            }
            target.copy_from_slice(&state.positions[j * d..(j + 1) * d]);
            let xi = &mut state.positions[i * d..(i + 1) * d];
            let r2: f64 = xi
                .iter()
                .zip(&target)
                .zip(&width)
                .map(|((a, b), w)| ((a - b) / w).powi(2))
                .sum();
            let attraction = config.beta * (-config.gamma * r2).exp();
            for ((x, t), w) in xi.iter_mut().zip(&target).zip(&width) {
                *x += attraction * (t - *x) + alpha * w * stream.standard_normal();
            }
        }
    }

    for (k, x) in state.positions.iter_mut().enumerate() {
        let (lo, hi) = (problem.lower_bounds()[k % d], problem.upper_bounds()[k % d]);
        // NaN positions (possible only from non-finite inputs) go to the lower bound.
        *x = if x.is_nan() { lo } else { x.clamp(lo, hi) };
    }
    state.evaluate_all(problem, penalty);
    state.iteration += 1;
    state.alpha = config.alpha_at(state.iteration);
    state.update_best();
}

/// Runs `init_population` and then `max_iterations` steps, seeding the
/// stream from `config.seed`.
pub fn optimize(problem: &Problem, config: &FaConfig, penalty: PenaltyConfig) -> Result<RunOutcome> {
    optimize_with_stream(problem, config, penalty, &mut RandomStream::new(config.seed))
}

pub fn optimize_with_stream(
    problem: &Problem,
    config: &FaConfig,
    penalty: PenaltyConfig,
    stream: &mut RandomStream,
) -> Result<RunOutcome> {
    let mut state = init_population(problem, config, penalty, stream)?;
    let mut history = Vec::with_capacity(config.max_iterations + 1);
    history.push(state.best_value);
    for _ in 0..config.max_iterations {
        step(&mut state, problem, config, penalty, stream);
        history.push(state.best_value);
    }
    Ok(RunOutcome {
        best_value: state.best_value,
        best_point: state.best_point,
        history,
        evaluations: state.evaluations,
    })
}
