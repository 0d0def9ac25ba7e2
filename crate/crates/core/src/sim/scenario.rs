//! Scripted runs: a JSON list of steps executed against one cluster.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cluster::{ClusterState, MdsReport};
use super::manifest::CodeParams;
use super::SimError;
use crate::construction::Pattern;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub code: CodeParams,
    pub seed: u64,
    /// Payload file; without it ingest stores synthetic symbols.
    #[serde(default)]
    pub payload: Option<PathBuf>,
    /// Stripe count for synthetic ingest.
    #[serde(default = "one")]
    pub stripes: usize,
    #[serde(default)]
    pub steps: Vec<Step>,
}

fn one() -> usize {
    1
}

fn default_samples() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Ingest,
    Fail {
        nodes: Vec<usize>,
    },
    Repair {
        nodes: Vec<usize>,
        helpers: Vec<usize>,
        h: usize,
        d: usize,
    },
    Verify,
    VerifyMds {
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum StepOutcome {
    Ingest {
        stripes: usize,
        ell: usize,
        prime: u64,
    },
    Fail {
        failed: Vec<usize>,
    },
    Repair {
        pattern: Pattern,
        total: u64,
        cut_set_bound: u64,
        metered_bytes: u64,
        optimal: bool,
    },
    Verify,
    VerifyMds(MdsReport),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub steps: Vec<StepOutcome>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        let mut config: ScenarioConfig = serde_json::from_str(&text)?;
        if let (Some(p), Some(dir)) = (&config.payload, path.parent()) {
            if p.is_relative() {
                config.payload = Some(dir.join(p));
            }
        }
        Ok(config)
    }
}

/// Runs every step against a cluster under `workdir`. The first failing
/// step aborts the run; the error carries its 0-based index.
pub fn run_scenario(config: &ScenarioConfig, workdir: &Path) -> Result<ScenarioReport, SimError> {
    let mut report = ScenarioReport::default();
    let mut cluster: Option<ClusterState> = None;
    for (index, step) in config.steps.iter().enumerate() {
        let outcome = run_step(config, workdir, &mut cluster, step).map_err(|source| SimError::Step {
            index,
            source: Box::new(source),
        })?;
        report.steps.push(outcome);
    }
    Ok(report)
}

fn run_step(
    config: &ScenarioConfig,
    workdir: &Path,
    cluster: &mut Option<ClusterState>,
    step: &Step,
) -> Result<StepOutcome, SimError> {
    if let Step::Ingest = step {
        let state = match &config.payload {
            Some(path) => {
                let bytes = fs::read(path).map_err(|e| SimError::io(path, e))?;
                ClusterState::ingest(workdir, &config.code, &bytes, Some(config.seed))?
            }
            None => ClusterState::ingest_synthetic(workdir, &config.code, config.seed, config.stripes)?,
        };
        let m = state.manifest();
        let outcome = StepOutcome::Ingest {
            stripes: m.stripes,
            ell: m.ell,
            prime: m.prime,
        };
        *cluster = Some(state);
        return Ok(outcome);
    }
    let state = cluster
        .as_mut()
        .ok_or_else(|| SimError::Invalid("no cluster: run an ingest step first".into()))?;
    Ok(match step {
        Step::Ingest => unreachable!(),
        Step::Fail { nodes } => {
            state.fail_nodes(nodes)?;
            StepOutcome::Fail {
                failed: state.failed().to_vec(),
            }
        }
        Step::Repair { nodes, helpers, h, d } => {
            let pattern = Pattern::new(*h, *d);
            if nodes.len() != *h || helpers.len() != *d {
                return Err(SimError::Invalid(format!(
                    "{} failed and {} helpers do not match pattern {pattern}",
                    nodes.len(),
                    helpers.len()
                )));
            }
            let rep = state.run_repair(nodes, helpers, pattern)?;
            StepOutcome::Repair {
                pattern,
                total: rep.transcript.total,
                cut_set_bound: rep.bound.cut_set_bound,
                metered_bytes: rep.metered_bytes,
                optimal: rep.bound.conforming(),
            }
        }
        Step::Verify => {
            state.verify()?;
            StepOutcome::Verify
        }
        Step::VerifyMds { samples } => {
            let rep = state.verify_mds(*samples, config.seed)?;
            if rep.mismatches > 0 {
                return Err(SimError::Integrity(format!(
                    "{} of {} reconstructions disagree",
                    rep.mismatches, rep.samples
                )));
            }
            StepOutcome::VerifyMds(rep)
        }
    })
}
