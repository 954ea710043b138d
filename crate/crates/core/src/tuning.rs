//! Experiment protocol: draw parameter settings with each sampler, run the
//! FA several times per setting, keep the best result per setting, and
//! collect the (method × problem × setting) result cube.
//!
//! Every FA call gets its own stream derived from
//! `(master seed, method, problem, setting, call)`, so results do not
//! depend on how work is scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{PenaltyConfig, Problem, ProblemId, SpringG4};
use crate::error::{Error, Result};
use crate::firefly::{self, FaConfig, StepScale};
use crate::sampling::{self, ParameterRanges, ParameterSample, SamplerKind, SeedPath};

/// A problem in the plan, with an optional dimension override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ProblemId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

impl ProblemSpec {
    pub fn new(id: ProblemId, dimension: Option<usize>) -> Self {
        Self { id, dimension }
    }

    pub fn build(&self, spring_g4: SpringG4) -> Result<Problem> {
        Ok(Problem::new(self.id, self.dimension)?.with_spring_g4(spring_g4))
    }

    /// All six problems at their default dimensions.
    pub fn all() -> Vec<ProblemSpec> {
        ProblemId::ALL.iter().map(|&id| ProblemSpec::new(id, None)).collect()
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dimension {
            Some(d) => write!(f, "{}:{d}", self.id),
            None => write!(f, "{}", self.id),
        }
    }
}

/// Parses `name` or `name:dimension`.
impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, dimension) = match s.trim().split_once(':') {
            Some((name, dim)) => {
                let dim = dim
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad dimension in `{s}`")))?;
                (name, Some(dim))
            }
            None => (s.trim(), None),
        };
        Ok(ProblemSpec::new(name.trim().parse()?, dimension))
    }
}

/// FA settings shared by every call; θ, β and γ come from the tuner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaBase {
    pub population_size: usize,
    pub max_iterations: usize,
    pub alpha0: f64,
    #[serde(default)]
    pub step_scale: StepScale,
}

impl FaBase {
    pub fn config(&self, params: ParameterSample, seed: u64) -> FaConfig {
        FaConfig {
            alpha0: self.alpha0,
            step_scale: self.step_scale,
            ..FaConfig::new(self.population_size, self.max_iterations, params, seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningPlan {
    pub methods: Vec<SamplerKind>,
    pub ranges: ParameterRanges,
    pub num_settings: usize,
    pub calls_per_setting: usize,
    pub fa: FaBase,
    pub master_seed: u64,
    pub problems: Vec<ProblemSpec>,
    pub penalty: PenaltyConfig,
    /// Apply the digital shift and matrix scramble to Sobol points.
    pub scramble: bool,
    /// Draw a fresh pool of settings for every problem instead of sharing
    /// one pool per method.
    pub redraw_per_problem: bool,
    pub spring_g4: SpringG4,
}

impl TuningPlan {
    /// 10 settings × 50 calls × 1000 iterations, population 20.
    ///
    /// Both presets move fireflies in normalized coordinates; with raw
    /// coordinates `exp(-γ r²)` vanishes on the wide benchmark boxes.
    pub fn paper_scale(master_seed: u64) -> Self {
        Self::with_scale(10, 50, 20, 1000, master_seed)
    }

    /// 5 settings × 10 calls × 250 iterations, population 20.
    pub fn desk_scale(master_seed: u64) -> Self {
        Self::with_scale(5, 10, 20, 250, master_seed)
    }

    fn with_scale(
        num_settings: usize,
        calls_per_setting: usize,
        population_size: usize,
        max_iterations: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            methods: SamplerKind::ALL.to_vec(),
            ranges: ParameterRanges::standard(),
            num_settings,
            calls_per_setting,
            fa: FaBase {
                population_size,
                max_iterations,
                alpha0: 1.0,
                step_scale: StepScale::Normalized,
            },
            master_seed,
            problems: ProblemSpec::all(),
            penalty: PenaltyConfig::default(),
            scramble: true,
            redraw_per_problem: false,
            spring_g4: SpringG4::Corrected,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.methods.is_empty() {
            return fail("plan needs at least one sampling method");
        }
        if self.problems.is_empty() {
            return fail("plan needs at least one problem");
        }
        for (i, spec) in self.problems.iter().enumerate() {
            if self.problems[..i].iter().any(|p| p.id == spec.id) {
                return Err(Error::InvalidArgument(format!("problem `{}` listed twice", spec.id)));
            }
        }
        for (i, method) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(method) {
                return Err(Error::InvalidArgument(format!("method {method} listed twice")));
            }
        }
        if self.num_settings == 0 {
            return fail("num_settings must be at least 1");
        }
        if self.calls_per_setting == 0 {
            return fail("calls_per_setting must be at least 1");
        }
        self.ranges.validate()?;
        PenaltyConfig::new(self.penalty.lambda)?;
        self.fa.config(self.ranges_midpoint(), 0).validate()
    }

    fn ranges_midpoint(&self) -> ParameterSample {
        ParameterSample {
            theta: self.ranges.theta.midpoint(),
            beta: self.ranges.beta.midpoint(),
            gamma: self.ranges.gamma.midpoint(),
        }
    }

    fn build_problems(&self) -> Result<Vec<Problem>> {
        self.problems.iter().map(|spec| spec.build(self.spring_g4)).collect()
    }
}

fn problem_tag(problem: &Problem) -> String {
    format!("{}:{}", problem.name(), problem.dimension())
}

/// Draws `plan.num_settings` parameter settings for `method`.
///
/// `problem` selects the per-problem pool when `redraw_per_problem` is set
/// and is ignored otherwise.
pub fn generate_settings(plan: &TuningPlan, method: SamplerKind, problem: Option<&Problem>) -> Result<Vec<ParameterSample>> {
    let mut path = SeedPath::new(plan.master_seed).tag("settings").tag(method.tag());
    if plan.redraw_per_problem {
        if let Some(problem) = problem {
            path = path.tag(&problem_tag(problem));
        }
    }
    let points = sampling::draw(method, plan.num_settings, 3, &mut path.stream(), plan.scramble)?;
    sampling::scale_to_ranges(&points, &plan.ranges)
}

/// Result of all FA calls for one parameter setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingResult {
    pub setting_index: usize,
    pub params: ParameterSample,
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub per_call_bests: Vec<f64>,
}

fn call_seed(plan: &TuningPlan, method: SamplerKind, problem: &Problem, setting: usize, call: usize) -> u64 {
    SeedPath::new(plan.master_seed)
        .tag("fa")
        .tag(method.tag())
        .tag(&problem_tag(problem))
        .index(setting as u64)
        .index(call as u64)
        .seed()
}

/// Runs the FA `plan.calls_per_setting` times with `params` and keeps the
/// best outcome. The earliest call wins ties.
pub fn evaluate_setting(
    problem: &Problem,
    params: ParameterSample,
    plan: &TuningPlan,
    method: SamplerKind,
    setting_index: usize,
) -> Result<SettingResult> {
    let outcomes = (0..plan.calls_per_setting)
        .map(|call| {
            let seed = call_seed(plan, method, problem, setting_index, call);
            firefly::optimize(problem, &plan.fa.config(params, seed), plan.penalty)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_setting(setting_index, params, outcomes))
}

fn assemble_setting(setting_index: usize, params: ParameterSample, outcomes: Vec<firefly::RunOutcome>) -> SettingResult {
    let per_call_bests: Vec<f64> = outcomes.iter().map(|o| o.best_value).collect();
    let mut best = 0;
    for (i, v) in per_call_bests.iter().enumerate() {
        if *v < per_call_bests[best] {
            best = i;
        }
    }
    SettingResult {
        setting_index,
        params,
        best_value: per_call_bests[best],
        best_point: outcomes[best].best_point.clone(),
        per_call_bests,
    }
}

/// All settings of one (method, problem) pair with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub method: SamplerKind,
    pub problem: ProblemId,
    pub dimension: usize,
    pub rows: Vec<SettingResult>,
    pub mean: f64,
    /// Sample standard deviation (n − 1 divisor); absent for a single row.
    pub sigma: Option<f64>,
    /// Index into `rows` of the setting with the lowest best value.
    pub best_row: usize,
    pub best_params: ParameterSample,
}

impl CellReport {
    pub fn new(method: SamplerKind, problem: &Problem, rows: Vec<SettingResult>) -> Self {
        let values = rows.iter().map(|r| r.best_value).collect::<Vec<_>>();
        let (mean, sigma) = mean_and_sd(&values);
        let mut best_row = 0;
        for (i, v) in values.iter().enumerate() {
            if *v < values[best_row] {
                best_row = i;
            }
        }
        Self {
            method,
            problem: problem.id(),
            dimension: problem.dimension(),
            best_params: rows[best_row].params,
            rows,
            mean,
            sigma,
            best_row,
        }
    }

    pub fn best_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.best_value).collect()
    }

    pub fn best_value(&self) -> f64 {
        self.rows[self.best_row].best_value
    }
}

/// Mean and sample standard deviation, summed in index order.
pub fn mean_and_sd(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    (mean, sd)
}

/// Full result cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub methods: Vec<SamplerKind>,
    pub problems: Vec<ProblemSpec>,
    /// Method-major: `cells[m * problems.len() + p]`.
    pub cells: Vec<CellReport>,
}

impl ExperimentReport {
    pub fn cell(&self, method: SamplerKind, problem: ProblemId) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.method == method && c.problem == problem)
    }

    pub fn cells_for(&self, method: SamplerKind) -> impl Iterator<Item = &CellReport> {
        self.cells.iter().filter(move |c| c.method == method)
    }
}

/// Runs the whole cube. Work units (method, problem, setting) run in
/// parallel on the current rayon pool; outputs are written by index.
pub fn run_experiment(plan: &TuningPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let problems = plan.build_problems()?;

    let mut pools: Vec<Vec<Vec<ParameterSample>>> = Vec::with_capacity(plan.methods.len());
    for &method in &plan.methods {
        let per_problem = if plan.redraw_per_problem {
            problems
                .iter()
                .map(|p| generate_settings(plan, method, Some(p)))
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![generate_settings(plan, method, None)?; problems.len()]
        };
        pools.push(per_problem);
    }

    let units: Vec<(usize, usize, usize)> = (0..plan.methods.len())
        .flat_map(|m| (0..problems.len()).flat_map(move |p| (0..plan.num_settings).map(move |s| (m, p, s))))
        .collect();

    let results = units
        .par_iter()
        .map(|&(m, p, s)| evaluate_setting(&problems[p], pools[m][p][s], plan, plan.methods[m], s))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = results.into_iter();
    let mut cells = Vec::with_capacity(plan.methods.len() * problems.len());
    for &method in &plan.methods {
        for problem in &problems {
            let cell_rows: Vec<SettingResult> = rows.by_ref().take(plan.num_settings).collect();
            cells.push(CellReport::new(method, problem, cell_rows));
        }
    }

    Ok(ExperimentReport {
        methods: plan.methods.clone(),
        problems: plan.problems.clone(),
        cells,
    })
}

/// Best values per method from a longer run on a single problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedRuns {
    pub problem: ProblemSpec,
    pub methods: Vec<SamplerKind>,
    /// `values[m][s]` is the best value of setting `s` under method `m`.
    pub values: Vec<Vec<f64>>,
}

/// Repeats the protocol on one problem with `num_settings` settings.
pub fn extended_runs(plan: &TuningPlan, problem: ProblemSpec, num_settings: usize) -> Result<ExtendedRuns> {
    let plan = TuningPlan {
        num_settings,
        problems: vec![problem],
        ..plan.clone()
    };
    let report = run_experiment(&plan)?;
    Ok(ExtendedRuns {
        problem,
        methods: report.methods.clone(),
        values: report.cells.iter().map(CellReport::best_values).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> TuningPlan {
        TuningPlan {
            num_settings: 3,
            calls_per_setting: 2,
            fa: FaBase {
                population_size: 6,
                max_iterations: 15,
                alpha0: 1.0,
                step_scale: StepScale::Literal,
            },
            problems: vec![
                ProblemSpec::new(ProblemId::Sphere, Some(2)),
                ProblemSpec::new(ProblemId::Truss, None),
            ],
            ..TuningPlan::desk_scale(11)
        }
    }

    #[test]
    fn problem_spec_text_round_trip() {
        let spec: ProblemSpec = "rosenbrock:4".parse().unwrap();
        assert_eq!(spec, ProblemSpec::new(ProblemId::Rosenbrock, Some(4)));
        assert_eq!(spec.to_string(), "rosenbrock:4");
        let spec: ProblemSpec = "f6".parse().unwrap();
        assert_eq!(spec.to_string(), "truss");
        assert!("sphere:x".parse::<ProblemSpec>().is_err());
        assert!("cube".parse::<ProblemSpec>().is_err());
    }

    #[test]
    fn duplicate_entries_rejected() {
        let mut plan = small_plan();
        plan.problems.push(ProblemSpec::new(ProblemId::Sphere, Some(3)));
        assert!(plan.validate().is_err());
        let mut plan = small_plan();
        plan.methods = vec![SamplerKind::Lhs, SamplerKind::Lhs];
        assert!(plan.validate().is_err());
    }

    #[test]
    fn settings_in_range_and_deterministic() {
        let plan = TuningPlan {
            num_settings: 10,
            ..small_plan()
        };
        for method in SamplerKind::ALL {
            let a = generate_settings(&plan, method, None).unwrap();
            assert_eq!(a.len(), 10);
            assert!(a.iter().all(|s| plan.ranges.contains(s)));
            assert_eq!(a, generate_settings(&plan, method, None).unwrap());
        }
    }

    #[test]
    fn lhs_settings_fill_theta_strata() {
        let plan = TuningPlan {
            num_settings: 10,
            ..small_plan()
        };
        let settings = generate_settings(&plan, SamplerKind::Lhs, None).unwrap();
        let mut strata: Vec<usize> = settings
            .iter()
            .map(|s| (((s.theta - 0.9) / 0.1) * 10.0).floor() as usize)
            .collect();
        strata.sort_unstable();
        assert_eq!(strata, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn single_call_setting_equals_the_run() {
        let plan = TuningPlan {
            calls_per_setting: 1,
            ..small_plan()
        };
        let problem = plan.problems[0].build(plan.spring_g4).unwrap();
        let params = generate_settings(&plan, SamplerKind::Mc, None).unwrap()[0];
        let result = evaluate_setting(&problem, params, &plan, SamplerKind::Mc, 0).unwrap();
        let seed = call_seed(&plan, SamplerKind::Mc, &problem, 0, 0);
        let run = firefly::optimize(&problem, &plan.fa.config(params, seed), plan.penalty).unwrap();
        assert_eq!(result.best_value, run.best_value);
        assert_eq!(result.best_point, run.best_point);
        assert_eq!(result.per_call_bests, vec![run.best_value]);
    }

    #[test]
    fn report_shape_and_summaries() {
        let plan = small_plan();
        let report = run_experiment(&plan).unwrap();
        assert_eq!(report.cells.len(), 3 * 2);
        for cell in &report.cells {
            assert_eq!(cell.rows.len(), 3);
            for row in &cell.rows {
                let min = row.per_call_bests.iter().cloned().fold(f64::INFINITY, f64::min);
                assert_eq!(row.best_value, min);
                assert_eq!(row.per_call_bests.len(), 2);
            }
            let (mean, sd) = mean_and_sd(&cell.best_values());
            assert!((mean - cell.mean).abs() <= 1e-12 * mean.abs().max(1.0));
            assert!((sd.unwrap() - cell.sigma.unwrap()).abs() <= 1e-12 * sd.unwrap().max(1.0));
            let min = cell.best_values().into_iter().fold(f64::INFINITY, f64::min);
            assert_eq!(cell.rows[cell.best_row].best_value, min);
            assert_eq!(cell.best_params, cell.rows[cell.best_row].params);
        }
    }

    #[test]
    fn mean_of_two_settings() {
        let plan = TuningPlan {
            methods: vec![SamplerKind::Qmc],
            num_settings: 2,
            calls_per_setting: 1,
            problems: vec![ProblemSpec::new(ProblemId::Sphere, Some(2))],
            ..small_plan()
        };
        let report = run_experiment(&plan).unwrap();
        let cell = &report.cells[0];
        let v = cell.best_values();
        assert_eq!(cell.mean, (v[0] + v[1]) / 2.0);
    }

    #[test]
    fn shared_pool_vs_redraw() {
        let plan = small_plan();
        let shared = run_experiment(&plan).unwrap();
        let a: Vec<_> = shared.cells[0].rows.iter().map(|r| r.params).collect();
        let b: Vec<_> = shared.cells[1].rows.iter().map(|r| r.params).collect();
        assert_eq!(a, b);

        let redraw = run_experiment(&TuningPlan {
            redraw_per_problem: true,
            ..plan
        })
        .unwrap();
        let a: Vec<_> = redraw.cells[0].rows.iter().map(|r| r.params).collect();
        let b: Vec<_> = redraw.cells[1].rows.iter().map(|r| r.params).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn setting_results_do_not_depend_on_execution_order() {
        let plan = small_plan();
        let report = run_experiment(&plan).unwrap();
        let problem = plan.problems[1].build(plan.spring_g4).unwrap();
        let cell = report.cell(SamplerKind::Lhs, ProblemId::Truss).unwrap();
        // evaluate settings back to front, one at a time
        for s in (0..plan.num_settings).rev() {
            let alone = evaluate_setting(&problem, cell.rows[s].params, &plan, SamplerKind::Lhs, s).unwrap();
            assert_eq!(alone, cell.rows[s]);
        }
    }

    #[test]
    fn invalid_plans_fail_before_running() {
        let mut plan = small_plan();
        plan.problems.push(ProblemSpec::new(ProblemId::Spring, Some(3)));
        assert_eq!(run_experiment(&plan).unwrap_err(), Error::FixedDimension("spring".into()));
        let plan = TuningPlan {
            num_settings: 0,
            ..small_plan()
        };
        assert!(run_experiment(&plan).is_err());
    }

    #[test]
    fn extended_shape() {
        let plan = small_plan();
        let ext = extended_runs(&plan, ProblemSpec::new(ProblemId::Sphere, Some(2)), 4).unwrap();
        assert_eq!(ext.values.len(), 3);
        assert!(ext.values.iter().all(|v| v.len() == 4));
        let one = extended_runs(&plan, ProblemSpec::new(ProblemId::Sphere, Some(2)), 1).unwrap();
        assert!(one.values.iter().all(|v| v.len() == 1));
    }
}
