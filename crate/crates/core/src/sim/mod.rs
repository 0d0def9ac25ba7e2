//! File-backed storage cluster: shards on disk, failure injection, metered
//! centralized repair and byte-exact verification.

mod cluster;
mod manifest;
mod meter;
mod scenario;
mod shard;

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use cluster::{ClusterState, MdsReport, NodeStatus, RepairReport};
pub use manifest::{CodeParams, DataMode, Manifest, MANIFEST_FILE, MANIFEST_VERSION, PAYLOAD_MIN_PRIME};
pub use meter::{ByteMeter, MeteredReader};
pub use scenario::{run_scenario, ScenarioConfig, ScenarioReport, Step, StepOutcome};
pub use shard::{Shard, ShardError, ShardHeader, FORMAT_VERSION, HEADER_LEN, MAGIC};

use crate::audit::AuditError;
use crate::construction::CodeError;
use crate::repair::RepairError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Repair(#[from] RepairError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{}: {source}", path.display())]
    Shard { path: PathBuf, source: ShardError },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{failed} failed nodes exceed r = {r}: data loss")]
    TooManyFailures { failed: usize, r: usize },
    #[error("node {node} is not {expected:?}")]
    NodeState { node: usize, expected: NodeStatus },
    #[error("restored node {node} does not match its recorded digest")]
    DigestMismatch { node: usize },
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("repair downloaded {} symbols against a bound of {} (metered {} bytes)",
        .0.transcript.total, .0.bound.cut_set_bound, .0.metered_bytes)]
    NotOptimal(Box<RepairReport>),
    #[error("step {index}: {source}")]
    Step { index: usize, source: Box<SimError> },
}

impl SimError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Whether the failure means stored or downloaded data is wrong (as
    /// opposed to a bad request).
    pub fn is_integrity(&self) -> bool {
        match self {
            SimError::Shard { .. }
            | SimError::DigestMismatch { .. }
            | SimError::Integrity(_)
            | SimError::NotOptimal(_)
            | SimError::Repair(RepairError::Inconsistent { .. })
            | SimError::Code(CodeError::Corrupted { .. }) => true,
            SimError::Step { source, .. } => source.is_integrity(),
            _ => false,
        }
    }
}
