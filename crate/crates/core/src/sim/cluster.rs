use std::fs;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::manifest::{CodeParams, DataMode, Manifest, LAMBDA_RULE_NAME, MANIFEST_VERSION, PAYLOAD_MIN_PRIME};
use super::meter::ByteMeter;
use super::shard::{write_atomic, Shard, ShardHeader, FORMAT_VERSION};
use super::SimError;
use crate::audit::{verify_transcript, BoundReport};
use crate::construction::{CodeSpec, Codeword, Pattern};
use crate::repair::{self, RepairTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NodeStatus {
    Alive,
    Failed,
}

/// A cluster rooted at a directory: `manifest.json` plus one
/// `node-XXX/stripe-XXXXXX.shard` file per node and stripe.
#[derive(Debug, Clone)]
pub struct ClusterState {
    root: PathBuf,
    spec: CodeSpec,
    manifest: Manifest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepairReport {
    pub transcript: RepairTranscript,
    pub bound: BoundReport,
    /// Bytes the center read from helper uploads.
    pub metered_bytes: u64,
    pub restored: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdsReport {
    pub samples: usize,
    pub mismatches: usize,
}

fn node_dir(root: &Path, node: usize) -> PathBuf {
    root.join(format!("node-{node:03}"))
}

fn shard_path(root: &Path, node: usize, stripe: usize) -> PathBuf {
    node_dir(root, node).join(format!("stripe-{stripe:06}.shard"))
}

const OUTBOX: &str = "outbox";

impl ClusterState {
    /// Stores real bytes, one per field element, over a field of at least
    /// 257 elements. Each stripe holds `k·ℓ` bytes; the tail is zero-padded.
    pub fn ingest(root: &Path, params: &CodeParams, payload: &[u8], seed: Option<u64>) -> Result<Self, SimError> {
        let spec = params.build(PAYLOAD_MIN_PRIME)?;
        let per_stripe = spec.k() * spec.ell();
        let stripes = payload.len().div_ceil(per_stripe).max(1);
        let padding = (stripes * per_stripe - payload.len()) as u64;
        let digest = hex::encode(Sha256::digest(payload));
        let ell = spec.ell();
        Self::write_new(root, spec, params, DataMode::Payload, stripes, payload.len() as u64, padding, digest, seed, |stripe| {
            let start = stripe * per_stripe;
            (0..params.k)
                .map(|j| {
                    (0..ell)
                        .map(|t| payload.get(start + j * ell + t).copied().unwrap_or(0) as u64)
                        .collect()
                })
                .collect()
        })
    }

    /// Stores seeded random symbols over the smallest admissible field.
    pub fn ingest_synthetic(root: &Path, params: &CodeParams, seed: u64, stripes: usize) -> Result<Self, SimError> {
        if stripes == 0 {
            return Err(SimError::Invalid("at least one stripe is required".into()));
        }
        let spec = params.build(0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(stripes);
        let mut hasher = Sha256::new();
        for _ in 0..stripes {
            let stripe = spec.random_data(&mut rng);
            for v in stripe.iter().flatten() {
                hasher.update(v.to_le_bytes());
            }
            data.push(stripe);
        }
        let digest = hex::encode(hasher.finalize());
        Self::write_new(root, spec, params, DataMode::Synthetic, stripes, 0, 0, digest, Some(seed), |s| {
            std::mem::take(&mut data[s])
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn write_new(
        root: &Path,
        spec: CodeSpec,
        params: &CodeParams,
        mode: DataMode,
        stripes: usize,
        payload_len: u64,
        padding: u64,
        content_digest: String,
        seed: Option<u64>,
        mut data: impl FnMut(usize) -> Vec<Vec<u64>>,
    ) -> Result<Self, SimError> {
        if spec.n() > u16::MAX as usize {
            return Err(SimError::Invalid(format!("n = {} does not fit the shard header", spec.n())));
        }
        for node in 1..=spec.n() {
            let dir = node_dir(root, node);
            fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
        }
        let mut hashers: Vec<Sha256> = (0..spec.n()).map(|_| Sha256::new()).collect();
        for stripe in 0..stripes {
            let cw = spec.encode(&data(stripe))?;
            for (i, col) in cw.into_columns().into_iter().enumerate() {
                let bytes = shard_for(&spec, i + 1, col).to_bytes();
                hashers[i].update(&bytes);
                let path = shard_path(root, i + 1, stripe);
                write_atomic(&path, &bytes).map_err(|e| SimError::io(&path, e))?;
            }
        }
        let manifest = Manifest {
            format_version: MANIFEST_VERSION,
            code: params.clone(),
            prime: spec.field().modulus(),
            lambda_rule: LAMBDA_RULE_NAME.to_string(),
            ell: spec.ell(),
            stripes,
            mode,
            payload_len,
            padding,
            content_digest,
            seed,
            node_digests: hashers.into_iter().map(|h| hex::encode(h.finalize())).collect(),
            failed: Vec::new(),
        };
        manifest.store(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            spec,
            manifest,
        })
    }

    pub fn open(root: &Path) -> Result<Self, SimError> {
        let manifest = Manifest::load(root)?;
        let spec = manifest.code.build(manifest.prime)?;
        if spec.field().modulus() != manifest.prime || spec.ell() != manifest.ell {
            return Err(SimError::Manifest(format!(
                "parameters give GF({}) and l={}, manifest records GF({}) and l={}",
                spec.field().modulus(),
                spec.ell(),
                manifest.prime,
                manifest.ell
            )));
        }
        if manifest.lambda_rule != LAMBDA_RULE_NAME {
            return Err(SimError::Manifest(format!("unknown lambda rule {:?}", manifest.lambda_rule)));
        }
        Ok(Self {
            root: root.to_path_buf(),
            spec,
            manifest,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn status(&self, node: usize) -> NodeStatus {
        if self.manifest.failed.contains(&node) {
            NodeStatus::Failed
        } else {
            NodeStatus::Alive
        }
    }

    pub fn failed(&self) -> &[usize] {
        &self.manifest.failed
    }

    pub fn alive(&self) -> Vec<usize> {
        (1..=self.spec.n())
            .filter(|&j| self.status(j) == NodeStatus::Alive)
            .collect()
    }

    pub fn shard_path(&self, node: usize, stripe: usize) -> PathBuf {
        shard_path(&self.root, node, stripe)
    }

    /// Reads and validates one shard of an alive node.
    pub fn read_shard(&self, node: usize, stripe: usize) -> Result<Shard, SimError> {
        let path = self.shard_path(node, stripe);
        let bytes = fs::read(&path).map_err(|e| SimError::io(&path, e))?;
        let shard = Shard::from_bytes(&bytes).map_err(|source| SimError::Shard { path: path.clone(), source })?;
        if shard.header != shard_for(&self.spec, node, Vec::new()).header {
            return Err(SimError::Integrity(format!("{} header does not match the cluster", path.display())));
        }
        Ok(shard)
    }

    /// Erases the shards of `nodes`.
    pub fn fail_nodes(&mut self, nodes: &[usize]) -> Result<(), SimError> {
        let mut next = self.manifest.failed.clone();
        for &node in nodes {
            self.spec.check_node(node)?;
            if next.contains(&node) {
                return Err(SimError::NodeState { node, expected: NodeStatus::Alive });
            }
            next.push(node);
        }
        if next.len() > self.spec.r() {
            return Err(SimError::TooManyFailures {
                failed: next.len(),
                r: self.spec.r(),
            });
        }
        for &node in nodes {
            let dir = node_dir(&self.root, node);
            match fs::remove_dir_all(&dir) {
                Ok(()) => {}
                Err(e) if e.kind() == ErrorKind::NotFound => {}
                Err(e) => return Err(SimError::io(&dir, e)),
            }
        }
        next.sort_unstable();
        self.manifest.failed = next;
        self.manifest.store(&self.root)
    }

    /// Rebuilds the failed nodes `failed` from `helpers`. Helpers aggregate
    /// their own shards into an upload file; the center reads only those
    /// uploads, through a byte meter.
    pub fn run_repair(&mut self, failed: &[usize], helpers: &[usize], pattern: Pattern) -> Result<RepairReport, SimError> {
        if failed.is_empty() {
            return Ok(self.empty_report(pattern));
        }
        for &node in failed {
            self.spec.check_node(node)?;
            if self.status(node) != NodeStatus::Failed {
                return Err(SimError::NodeState { node, expected: NodeStatus::Failed });
            }
        }
        for &node in helpers {
            self.spec.check_node(node)?;
            if self.status(node) != NodeStatus::Alive {
                return Err(SimError::NodeState { node, expected: NodeStatus::Alive });
            }
        }
        let plan = repair::plan(&self.spec, failed, helpers, pattern)?;
        let stripes = self.manifest.stripes;
        let outbox = self.root.join(OUTBOX);
        fs::create_dir_all(&outbox).map_err(|e| SimError::io(&outbox, e))?;

        // helper side, one thread per helper
        let uploads: Vec<PathBuf> = plan
            .helpers()
            .iter()
            .map(|&j| outbox.join(format!("helper-{j:03}.bin")))
            .collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = plan
                .helpers()
                .iter()
                .zip(&uploads)
                .map(|(&j, path)| {
                    let (this, plan) = (&*self, &plan);
                    scope.spawn(move || this.helper_upload(plan, j, path))
                })
                .collect();
            handles
                .into_iter()
                .try_for_each(|h| h.join().expect("helper thread panicked"))
        })?;

        // center side
        let meter = ByteMeter::new();
        let mut readers = uploads
            .iter()
            .map(|p| {
                fs::File::open(p)
                    .map(|f| BufReader::new(meter.wrap(f)))
                    .map_err(|e| SimError::io(p, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for &node in plan.failed() {
            let dir = node_dir(&self.root, node);
            fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
        }
        let per_helper = plan.per_helper_download();
        let mut hashers: Vec<Sha256> = plan.failed().iter().map(|_| Sha256::new()).collect();
        let mut transcript = RepairTranscript::empty(&self.spec, pattern);
        let mut buf = vec![0u8; per_helper * 8];
        for stripe in 0..stripes {
            let mut payloads = Vec::with_capacity(helpers.len());
            for ((&j, reader), path) in plan.helpers().iter().zip(&mut readers).zip(&uploads) {
                reader.read_exact(&mut buf).map_err(|e| SimError::io(path, e))?;
                let values = buf
                    .chunks_exact(8)
                    .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect();
                payloads.push(repair::HelperPayload { helper: j, values });
            }
            let outcome = repair::center_repair(&plan, &payloads)?;
            for (idx, (node, col)) in outcome.restored.into_iter().enumerate() {
                let bytes = shard_for(&self.spec, node, col).to_bytes();
                hashers[idx].update(&bytes);
                let path = self.shard_path(node, stripe);
                write_atomic(&path, &bytes).map_err(|e| SimError::io(&path, e))?;
            }
            transcript.merge(outcome.transcript);
        }
        for (reader, path) in readers.iter_mut().zip(&uploads) {
            if reader.read(&mut buf[..1]).map_err(|e| SimError::io(path, e))? != 0 {
                return Err(SimError::Integrity(format!("{} has trailing data", path.display())));
            }
        }
        drop(readers);
        fs::remove_dir_all(&outbox).map_err(|e| SimError::io(&outbox, e))?;

        for (&node, hasher) in plan.failed().iter().zip(hashers) {
            let got = hex::encode(hasher.finalize());
            if got != self.manifest.node_digests[node - 1] {
                return Err(SimError::DigestMismatch { node });
            }
        }
        self.manifest.failed.retain(|j| !plan.failed().contains(j));
        self.manifest.store(&self.root)?;

        let bound = verify_transcript(&transcript, &self.spec)?;
        let report = RepairReport {
            transcript,
            bound,
            metered_bytes: meter.bytes(),
            restored: plan.failed().to_vec(),
        };
        if !report.bound.conforming() || report.metered_bytes != report.transcript.total * 8 {
            return Err(SimError::NotOptimal(Box::new(report)));
        }
        Ok(report)
    }

    fn helper_upload(&self, plan: &repair::RepairPlan, helper: usize, path: &Path) -> Result<(), SimError> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let file = fs::File::create(&tmp).map_err(|e| SimError::io(&tmp, e))?;
        let mut out = BufWriter::new(file);
        for stripe in 0..self.manifest.stripes {
            let shard = self.read_shard(helper, stripe)?;
            let payload = repair::helper_aggregate(plan, helper, &shard.values)?;
            for v in payload.values {
                out.write_all(&v.to_le_bytes()).map_err(|e| SimError::io(&tmp, e))?;
            }
        }
        out.flush().map_err(|e| SimError::io(&tmp, e))?;
        drop(out);
        fs::rename(&tmp, path).map_err(|e| SimError::io(path, e))
    }

    fn empty_report(&self, pattern: Pattern) -> RepairReport {
        let transcript = RepairTranscript::empty(&self.spec, pattern);
        RepairReport {
            bound: BoundReport {
                pattern,
                sub_packetization: self.spec.ell(),
                stripes: 0,
                per_helper_bound: 0,
                cut_set_bound: 0,
                per_helper_min: 0,
                per_helper_max: 0,
                total: 0,
                optimal: true,
                uniform: true,
            },
            transcript,
            metered_bytes: 0,
            restored: Vec::new(),
        }
    }

    /// Full codeword of one stripe, rebuilt from `nodes` (at least `k` alive).
    fn stripe_from(&self, stripe: usize, nodes: &[usize]) -> Result<Codeword, SimError> {
        let shards = nodes
            .iter()
            .map(|&j| Ok((j, self.read_shard(j, stripe)?.values)))
            .collect::<Result<Vec<_>, SimError>>()?;
        let view: Vec<(usize, &[u64])> = shards.iter().map(|(j, v)| (*j, v.as_slice())).collect();
        Ok(self.spec.mds_reconstruct(&view)?)
    }

    fn data_columns(&self, stripe: usize) -> Result<Vec<Vec<u64>>, SimError> {
        let k = self.spec.k();
        if (1..=k).all(|j| self.status(j) == NodeStatus::Alive) {
            return (1..=k).map(|j| Ok(self.read_shard(j, stripe)?.values)).collect();
        }
        let alive = self.alive();
        if alive.len() < k {
            return Err(SimError::TooManyFailures {
                failed: self.manifest.failed.len(),
                r: self.spec.r(),
            });
        }
        let cw = self.stripe_from(stripe, &alive[..k])?;
        Ok(cw.into_columns().into_iter().take(k).collect())
    }

    /// Original payload bytes, decoded from any `k` alive nodes.
    pub fn extract(&self) -> Result<Vec<u8>, SimError> {
        if self.manifest.mode != DataMode::Payload {
            return Err(SimError::Invalid("synthetic clusters hold no payload".into()));
        }
        let mut out = Vec::with_capacity(self.manifest.stripes * self.spec.k() * self.spec.ell());
        for stripe in 0..self.manifest.stripes {
            for col in self.data_columns(stripe)? {
                out.extend(col.into_iter().map(|v| v as u8));
            }
        }
        out.truncate(self.manifest.payload_len as usize);
        if hex::encode(Sha256::digest(&out)) != self.manifest.content_digest {
            return Err(SimError::Integrity("extracted payload digest mismatch".into()));
        }
        Ok(out)
    }

    /// Checks every alive node's digest and the decoded content digest.
    pub fn verify(&self) -> Result<(), SimError> {
        for node in self.alive() {
            let mut hasher = Sha256::new();
            for stripe in 0..self.manifest.stripes {
                let path = self.shard_path(node, stripe);
                hasher.update(fs::read(&path).map_err(|e| SimError::io(&path, e))?);
            }
            if hex::encode(hasher.finalize()) != self.manifest.node_digests[node - 1] {
                return Err(SimError::DigestMismatch { node });
            }
        }
        match self.manifest.mode {
            DataMode::Payload => self.extract().map(|_| ()),
            DataMode::Synthetic => {
                let mut hasher = Sha256::new();
                for stripe in 0..self.manifest.stripes {
                    for v in self.data_columns(stripe)?.iter().flatten() {
                        hasher.update(v.to_le_bytes());
                    }
                }
                if hex::encode(hasher.finalize()) != self.manifest.content_digest {
                    return Err(SimError::Integrity("decoded data digest mismatch".into()));
                }
                Ok(())
            }
        }
    }

    /// Rebuilds random stripes from random `k`-subsets of alive nodes and
    /// compares against every alive shard.
    pub fn verify_mds(&self, samples: usize, seed: u64) -> Result<MdsReport, SimError> {
        let alive = self.alive();
        let k = self.spec.k();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mismatches = 0;
        for _ in 0..samples {
            let stripe = rng.gen_range(0..self.manifest.stripes);
            let mut subset: Vec<usize> = sample(&mut rng, alive.len(), k).into_iter().map(|i| alive[i]).collect();
            subset.sort_unstable();
            let cw = self.stripe_from(stripe, &subset)?;
            for &j in &alive {
                if cw.column(j) != self.read_shard(j, stripe)?.values.as_slice() {
                    mismatches += 1;
                    break;
                }
            }
        }
        Ok(MdsReport { samples, mismatches })
    }
}

fn shard_for(spec: &CodeSpec, node: usize, values: Vec<u64>) -> Shard {
    Shard {
        header: ShardHeader {
            version: FORMAT_VERSION,
            node: node as u16,
            n: spec.n() as u16,
            k: spec.k() as u16,
            family: spec.family(),
            ell: spec.ell() as u64,
            prime: spec.field().modulus(),
        },
        values,
    }
}
