//! Experiment configuration.
//!
//! A TOML file with one section per module. Every key is optional; missing
//! keys fall back to the chosen preset. Values are layered as
//! preset < file < environment (`FATUNE_<SECTION>_<KEY>`) < command-line flags.

use std::path::PathBuf;
use std::str::FromStr;

use fatune::benchmarks::{PenaltyConfig, SpringG4};
use fatune::firefly::StepScale;
use fatune::sampling::{Interval, ParameterRanges, SamplerKind};
use fatune::tuning::{FaBase, ProblemSpec, TuningPlan};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

pub const ENV_PREFIX: &str = "FATUNE";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "fatune-out";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 10 settings × 50 calls × 1000 iterations.
    Paper,
    /// 5 settings × 10 calls × 250 iterations.
    #[default]
    Desk,
}

impl Preset {
    pub fn plan(self, seed: u64) -> TuningPlan {
        match self {
            Preset::Paper => TuningPlan::paper_scale(seed),
            Preset::Desk => TuningPlan::desk_scale(seed),
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(format!("unknown preset `{s}` (expected paper or desk)")),
        }
    }
}

/// A 64-bit seed. TOML integers are signed, so seeds above `i64::MAX` are
/// written as strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(self.0) {
            Ok(v) => serializer.serialize_i64(v),
            Err(_) => serializer.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => Ok(Seed(v)),
            Repr::Text(s) => s.trim().parse().map(Seed).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<Seed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<SamplerKind>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_settings: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calls_per_setting: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub redraw_per_problem: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FireflySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_scale: Option<StepScale>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scramble: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarksSection {
    /// Entries are `name` or `name:dimension`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problems: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spring_g4: Option<SpringG4>,
}

/// The file as written, before defaults are filled in.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    pub tuning: TuningSection,
    pub firefly: FireflySection,
    pub sampling: SamplingSection,
    pub benchmarks: BenchmarksSection,
}

/// Every settable key as `section.key`.
pub const KEYS: [&str; 18] = [
    "experiment.preset",
    "experiment.master_seed",
    "experiment.methods",
    "experiment.output_dir",
    "tuning.num_settings",
    "tuning.calls_per_setting",
    "tuning.redraw_per_problem",
    "firefly.population",
    "firefly.iterations",
    "firefly.alpha0",
    "firefly.step_scale",
    "sampling.theta",
    "sampling.beta",
    "sampling.gamma",
    "sampling.scramble",
    "benchmarks.problems",
    "benchmarks.penalty_lambda",
    "benchmarks.spring_g4",
];

/// `experiment.master_seed` → `FATUNE_EXPERIMENT_MASTER_SEED`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}_{}", key.replace('.', "_").to_ascii_uppercase())
}

fn parse_value<T>(key: &str, value: &str) -> CliResult<T>
where
    T: FromStr,
    T::Err: ToString,
{
    value.trim().parse().map_err(|e: T::Err| CliError::config(key, e.to_string()))
}

fn parse_list(value: &str) -> Vec<&str> {
    value
        .trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|s| s.trim().trim_matches('"'))
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_pair(key: &str, value: &str) -> CliResult<[f64; 2]> {
    let parts = parse_list(value);
    if parts.len() != 2 {
        return Err(CliError::config(key, format!("expected `low,high`, got `{value}`")));
    }
    Ok([parse_value(key, parts[0])?, parse_value(key, parts[1])?])
}

fn toml_error(text: &str, err: toml::de::Error) -> CliError {
    let key = err
        .span()
        .and_then(|span| key_at(text, span.start))
        .unwrap_or_else(|| "config file".to_string());
    CliError::config(key, err.message())
}

/// `section.key` of the assignment on the line holding byte `offset`.
fn key_at(text: &str, offset: usize) -> Option<String> {
    let line_start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next()?;
    let (key, _) = line.split_once('=')?;
    let section = text[..line_start]
        .lines()
        .rev()
        .find_map(|l| l.trim().strip_prefix('[')?.strip_suffix(']').map(str::trim));
    Some(match section {
        Some(s) => format!("{s}.{}", key.trim()),
        None => key.trim().to_string(),
    })
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| toml_error(text, e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config values are representable in TOML")
    }

    /// Sets one key from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "experiment.preset" => self.experiment.preset = Some(parse_value(key, value)?),
            "experiment.master_seed" => self.experiment.master_seed = Some(Seed(parse_value(key, value)?)),
            "experiment.methods" => {
                self.experiment.methods = Some(
                    parse_list(value)
                        .into_iter()
                        .map(|m| parse_value(key, m))
                        .collect::<CliResult<_>>()?,
                )
            }
            "experiment.output_dir" => self.experiment.output_dir = Some(PathBuf::from(value.trim())),
            "tuning.num_settings" => self.tuning.num_settings = Some(parse_value(key, value)?),
            "tuning.calls_per_setting" => self.tuning.calls_per_setting = Some(parse_value(key, value)?),
            "tuning.redraw_per_problem" => self.tuning.redraw_per_problem = Some(parse_value(key, value)?),
            "firefly.population" => self.firefly.population = Some(parse_value(key, value)?),
            "firefly.iterations" => self.firefly.iterations = Some(parse_value(key, value)?),
            "firefly.alpha0" => self.firefly.alpha0 = Some(parse_value(key, value)?),
            "firefly.step_scale" => self.firefly.step_scale = Some(parse_value(key, value)?),
            "sampling.theta" => self.sampling.theta = Some(parse_pair(key, value)?),
            "sampling.beta" => self.sampling.beta = Some(parse_pair(key, value)?),
            "sampling.gamma" => self.sampling.gamma = Some(parse_pair(key, value)?),
            "sampling.scramble" => self.sampling.scramble = Some(parse_value(key, value)?),
            "benchmarks.problems" => {
                self.benchmarks.problems = Some(parse_list(value).into_iter().map(String::from).collect())
            }
            "benchmarks.penalty_lambda" => self.benchmarks.penalty_lambda = Some(parse_value(key, value)?),
            "benchmarks.spring_g4" => self.benchmarks.spring_g4 = Some(parse_value(key, value)?),
            _ => return Err(CliError::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies every `FATUNE_<SECTION>_<KEY>` variable `lookup` returns.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> CliResult<()> {
        for key in KEYS {
            if let Some(value) = lookup(&env_name(key)) {
                self.set(key, &value)?;
            }
        }
        Ok(())
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub master_seed: u64,
    pub methods: Vec<SamplerKind>,
    pub problems: Vec<ProblemSpec>,
    pub num_settings: usize,
    pub calls_per_setting: usize,
    pub redraw_per_problem: bool,
    pub population: usize,
    pub iterations: usize,
    pub alpha0: f64,
    pub step_scale: StepScale,
    pub ranges: ParameterRanges,
    pub scramble: bool,
    pub penalty_lambda: f64,
    pub spring_g4: SpringG4,
    /// Where outputs go; not part of the experiment's identity, so it is
    /// left out of serialized reports.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

fn positive(key: &str, value: usize, min: usize) -> CliResult<usize> {
    if value < min {
        return Err(CliError::config(key, format!("must be at least {min} (got {value})")));
    }
    Ok(value)
}

fn interval(key: &str, pair: [f64; 2]) -> CliResult<Interval> {
    Interval::new(pair[0], pair[1]).map_err(|e| CliError::config(key, e))
}

impl ExperimentConfig {
    /// Fills unset keys from the preset and validates every value.
    pub fn resolve(file: &ConfigFile) -> CliResult<Self> {
        let preset = file.experiment.preset.unwrap_or_default();
        let master_seed = file.experiment.master_seed.map_or(DEFAULT_SEED, |s| s.0);
        let base = preset.plan(master_seed);

        let methods = file.experiment.methods.clone().unwrap_or_else(|| base.methods.clone());
        if methods.is_empty() {
            return Err(CliError::config("experiment.methods", "at least one method is required"));
        }
        for (i, m) in methods.iter().enumerate() {
            if methods[..i].contains(m) {
                return Err(CliError::config("experiment.methods", format!("{m} listed twice")));
            }
        }

        let problems = match &file.benchmarks.problems {
            Some(names) => names
                .iter()
                .map(|n| n.parse::<ProblemSpec>().map_err(|e| CliError::config("benchmarks.problems", e)))
                .collect::<CliResult<Vec<_>>>()?,
            None => base.problems.clone(),
        };
        if problems.is_empty() {
            return Err(CliError::config("benchmarks.problems", "at least one problem is required"));
        }
        for (i, spec) in problems.iter().enumerate() {
            if problems[..i].iter().any(|p| p.id == spec.id) {
                return Err(CliError::config("benchmarks.problems", format!("`{}` listed twice", spec.id)));
            }
            spec.build(SpringG4::default())
                .map_err(|e| CliError::config("benchmarks.problems", e))?;
        }

        let ranges = ParameterRanges {
            theta: file.sampling.theta.map_or(Ok(base.ranges.theta), |p| interval("sampling.theta", p))?,
            beta: file.sampling.beta.map_or(Ok(base.ranges.beta), |p| interval("sampling.beta", p))?,
            gamma: file.sampling.gamma.map_or(Ok(base.ranges.gamma), |p| interval("sampling.gamma", p))?,
        };
        if !(ranges.theta.low > 0.0 && ranges.theta.high <= 1.0) {
            return Err(CliError::config("sampling.theta", "theta range must lie within (0, 1]"));
        }
        if ranges.beta.low < 0.0 {
            return Err(CliError::config("sampling.beta", "beta must be non-negative"));
        }
        if ranges.gamma.low < 0.0 {
            return Err(CliError::config("sampling.gamma", "gamma must be non-negative"));
        }

        let alpha0 = file.firefly.alpha0.unwrap_or(base.fa.alpha0);
        if !(alpha0 >= 0.0 && alpha0.is_finite()) {
            return Err(CliError::config("firefly.alpha0", "must be a non-negative finite number"));
        }
        let penalty_lambda = file.benchmarks.penalty_lambda.unwrap_or(base.penalty.lambda);
        PenaltyConfig::new(penalty_lambda).map_err(|e| CliError::config("benchmarks.penalty_lambda", e))?;

        Ok(Self {
            preset,
            master_seed,
            methods,
            problems,
            num_settings: positive(
                "tuning.num_settings",
                file.tuning.num_settings.unwrap_or(base.num_settings),
                1,
            )?,
            calls_per_setting: positive(
                "tuning.calls_per_setting",
                file.tuning.calls_per_setting.unwrap_or(base.calls_per_setting),
                1,
            )?,
            redraw_per_problem: file.tuning.redraw_per_problem.unwrap_or(base.redraw_per_problem),
            population: positive(
                "firefly.population",
                file.firefly.population.unwrap_or(base.fa.population_size),
                2,
            )?,
            iterations: positive(
                "firefly.iterations",
                file.firefly.iterations.unwrap_or(base.fa.max_iterations),
                1,
            )?,
            alpha0,
            step_scale: file.firefly.step_scale.unwrap_or(base.fa.step_scale),
            ranges,
            scramble: file.sampling.scramble.unwrap_or(base.scramble),
            penalty_lambda,
            spring_g4: file.benchmarks.spring_g4.unwrap_or(base.spring_g4),
            output_dir: file
                .experiment
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        })
    }

    /// The file that resolves back to this configuration.
    pub fn to_file(&self) -> ConfigFile {
        let pair = |i: Interval| Some([i.low, i.high]);
        ConfigFile {
            experiment: ExperimentSection {
                preset: Some(self.preset),
                master_seed: Some(Seed(self.master_seed)),
                methods: Some(self.methods.clone()),
                output_dir: Some(self.output_dir.clone()),
            },
            tuning: TuningSection {
                num_settings: Some(self.num_settings),
                calls_per_setting: Some(self.calls_per_setting),
                redraw_per_problem: Some(self.redraw_per_problem),
            },
            firefly: FireflySection {
                population: Some(self.population),
                iterations: Some(self.iterations),
                alpha0: Some(self.alpha0),
                step_scale: Some(self.step_scale),
            },
            sampling: SamplingSection {
                theta: pair(self.ranges.theta),
                beta: pair(self.ranges.beta),
                gamma: pair(self.ranges.gamma),
                scramble: Some(self.scramble),
            },
            benchmarks: BenchmarksSection {
                problems: Some(self.problems.iter().map(ToString::to_string).collect()),
                penalty_lambda: Some(self.penalty_lambda),
                spring_g4: Some(self.spring_g4),
            },
        }
    }

    pub fn plan(&self) -> TuningPlan {
        TuningPlan {
            methods: self.methods.clone(),
            ranges: self.ranges,
            num_settings: self.num_settings,
            calls_per_setting: self.calls_per_setting,
            fa: FaBase {
                population_size: self.population,
                max_iterations: self.iterations,
                alpha0: self.alpha0,
                step_scale: self.step_scale,
            },
            master_seed: self.master_seed,
            problems: self.problems.clone(),
            penalty: PenaltyConfig {
                lambda: self.penalty_lambda,
            },
            scramble: self.scramble,
            redraw_per_problem: self.redraw_per_problem,
            spring_g4: self.spring_g4,
        }
    }
}
