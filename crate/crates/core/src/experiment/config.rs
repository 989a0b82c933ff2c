use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{oamlprod, Potential, StartPrior, TimeVaryingLearner};
use crate::env::{EnvSpec, Environment};
use crate::error::{Error, Result};
use crate::learner::{AdaProdLearner, LearnerConfig};

/// Which acquisition rule a run uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    AdaprodPlus {
        #[serde(default)]
        initial_rate: Option<f64>,
        #[serde(default)]
        rate_numerator: Option<f64>,
    },
    OamlProd {
        #[serde(default)]
        initial_rate: Option<f64>,
        #[serde(default)]
        rate_numerator: Option<f64>,
    },
    AdaNormalHedge {
        #[serde(default)]
        uniform_prior: bool,
    },
    Squint {
        #[serde(default)]
        uniform_prior: bool,
    },
    Greedy,
    Uniform,
}

impl LearnerSpec {
    pub fn adaprod_plus() -> Self {
        LearnerSpec::AdaprodPlus {
            initial_rate: None,
            rate_numerator: None,
        }
    }

    pub fn oaml_prod() -> Self {
        LearnerSpec::OamlProd {
            initial_rate: None,
            rate_numerator: None,
        }
    }

    /// Column value used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::AdaprodPlus { .. } => "adaprod_plus",
            LearnerSpec::OamlProd { .. } => "oaml_prod",
            LearnerSpec::AdaNormalHedge { .. } => "ada_normal_hedge",
            LearnerSpec::Squint { .. } => "squint",
            LearnerSpec::Greedy => "greedy",
            LearnerSpec::Uniform => "uniform",
        }
    }

    pub(crate) fn build_prod(&self, n: usize) -> Result<Option<AdaProdLearner>> {
        let (mut config, initial, numerator) = match self {
            LearnerSpec::AdaprodPlus {
                initial_rate,
                rate_numerator,
            } => (LearnerConfig::adaprod_plus(n), initial_rate, rate_numerator),
            LearnerSpec::OamlProd {
                initial_rate: None,
                rate_numerator: None,
            } => return oamlprod(n).map(Some),
            LearnerSpec::OamlProd {
                initial_rate,
                rate_numerator,
            } => (LearnerConfig::optimistic_aml_prod(n), initial_rate, rate_numerator),
            _ => return Ok(None),
        };
        if let Some(v) = initial {
            config.initial_rate = *v;
        }
        if let Some(v) = numerator {
            config.rate_numerator = *v;
        }
        AdaProdLearner::with_config(n, config).map(Some)
    }

    pub(crate) fn build_time_varying(&self, n: usize) -> Result<Option<TimeVaryingLearner>> {
        let (potential, uniform) = match self {
            LearnerSpec::AdaNormalHedge { uniform_prior } => (Potential::AdaNormalHedge, *uniform_prior),
            LearnerSpec::Squint { uniform_prior } => (Potential::Squint, *uniform_prior),
            _ => return Ok(None),
        };
        let prior = if uniform {
            StartPrior::Uniform
        } else {
            StartPrior::InverseSquare
        };
        TimeVaryingLearner::new(n, potential, prior).map(Some)
    }
}

/// A fixed batch size or an explicit per-round schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BatchSize {
    Fixed(usize),
    Schedule(Vec<usize>),
}

fn default_run_id() -> String {
    "run".into()
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_true() -> bool {
    true
}

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_run_id")]
    pub run_id: String,
    pub learners: Vec<LearnerSpec>,
    pub env: EnvSpec,
    /// Points labeled uniformly at random before the first round.
    #[serde(default)]
    pub n_start: usize,
    pub batch: BatchSize,
    /// Labeling budget; with a fixed batch size it determines the number
    /// of rounds (the last batch may be smaller).
    #[serde(default)]
    pub n_end: Option<usize>,
    #[serde(default)]
    pub rounds: Option<usize>,
    /// When false, chosen points are not labeled and every point stays
    /// available every round.
    #[serde(default = "default_true")]
    pub sleeping: bool,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Free-form acquisition option; recorded in the summary only.
    #[serde(default)]
    pub option: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// A validated config: pool size and the batch size of every round.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub n: usize,
    pub batches: Vec<usize>,
}

impl RunPlan {
    pub fn rounds(&self) -> usize {
        self.batches.len()
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation(format!("config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every invariant of the config and derives the round plan.
    pub fn plan(&self) -> Result<RunPlan> {
        let invalid = |msg: String| Err(Error::Validation(msg));
        if self.learners.is_empty() {
            return invalid("at least one learner is required".into());
        }
        let names: HashSet<_> = self.learners.iter().map(LearnerSpec::name).collect();
        if names.len() != self.learners.len() {
            return invalid("each algorithm may appear only once per run".into());
        }
        if self.seeds.is_empty() {
            return invalid("at least one seed is required".into());
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return invalid("seeds must be distinct".into());
        }
        let env = self.build_env()?;
        let n = env.n();
        if self.n_start >= n {
            return invalid(format!("n_start = {} leaves no point of {n} unlabeled", self.n_start));
        }
        let batches = self.batch_schedule(n)?;
        if batches.is_empty() {
            return invalid("the run has no rounds".into());
        }
        if let Some(b) = batches.iter().find(|b| **b == 0) {
            return invalid(format!("batch size {b} must be at least 1"));
        }
        let available = n - self.n_start;
        if self.sleeping {
            let total: usize = batches.iter().sum();
            if total > available {
                return invalid(format!(
                    "n_start + sum of batches = {} exceeds the pool of {n}",
                    self.n_start + total
                ));
            }
        } else if let Some(b) = batches.iter().find(|b| **b > available) {
            return invalid(format!("batch of {b} exceeds the {available} unlabeled points"));
        }
        if let Some(h) = env.horizon() {
            if batches.len() > h {
                return invalid(format!("{} rounds requested from a {h}-round replay", batches.len()));
            }
        }
        for spec in &self.learners {
            spec.build_prod(n).map_err(as_validation)?;
            spec.build_time_varying(n).map_err(as_validation)?;
        }
        Ok(RunPlan { n, batches })
    }

    pub(crate) fn build_env(&self) -> Result<Box<dyn Environment>> {
        self.env.build().map_err(as_validation)
    }

    fn batch_schedule(&self, n: usize) -> Result<Vec<usize>> {
        match (&self.batch, self.rounds, self.n_end) {
            (BatchSize::Schedule(list), rounds, n_end) => {
                if rounds.is_some_and(|r| r != list.len()) {
                    return Err(Error::validation("rounds disagrees with the batch schedule length"));
                }
                if let Some(end) = n_end {
                    if self.sleeping && self.n_start + list.iter().sum::<usize>() != end {
                        return Err(Error::validation("batch schedule does not reach n_end"));
                    }
                }
                Ok(list.clone())
            }
            (BatchSize::Fixed(b), Some(rounds), None) => Ok(vec![*b; rounds]),
            (BatchSize::Fixed(_), Some(_), Some(_)) => Err(Error::validation(
                "give either rounds or n_end with a fixed batch size, not both",
            )),
            (BatchSize::Fixed(b), None, Some(end)) => {
                if !self.sleeping {
                    return Err(Error::validation("n_end needs sleeping mode; give rounds instead"));
                }
                if end > n || end <= self.n_start {
                    return Err(Error::validation(format!(
                        "n_end = {end} must lie in ({}, {n}]",
                        self.n_start
                    )));
                }
                if *b == 0 {
                    return Err(Error::validation("batch size must be at least 1"));
                }
                let budget = end - self.n_start;
                let mut batches = vec![*b; budget / b];
                if !budget.is_multiple_of(*b) {
                    batches.push(budget % b);
                }
                Ok(batches)
            }
            (BatchSize::Fixed(_), None, None) => {
                Err(Error::validation("a fixed batch size needs rounds or n_end"))
            }
        }
    }
}

fn as_validation(e: Error) -> Error {
    match e {
        Error::Io(msg) | Error::Contract(msg) => Error::Validation(msg),
        Error::Dimension { expected, got } => {
            Error::Validation(format!("dimension mismatch: expected {expected}, got {got}"))
        }
        other => other,
    }
}
