use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use msr_core::audit::{self, subpacketization_table, AuditError};
use msr_core::construction::{CodeError, LAMBDA_RULE};
use msr_core::repair::{repair_codeword, RepairError};
use msr_core::sim::{run_scenario, ClusterState, CodeParams, ScenarioConfig, SimError};
use msr_core::{CodeSpec, Family, Pattern};
use rand::seq::{index::sample, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{Cli, ClusterArgs, CodeArgs, Command, SeedArg, TableFormat};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Display) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    fn integrity(message: impl Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        if e.is_integrity() {
            Failure::integrity(e)
        } else {
            Failure::invalid(e)
        }
    }
}

impl From<CodeError> for Failure {
    fn from(e: CodeError) -> Self {
        SimError::from(e).into()
    }
}

impl From<RepairError> for Failure {
    fn from(e: RepairError) -> Self {
        SimError::from(e).into()
    }
}

impl From<AuditError> for Failure {
    fn from(e: AuditError) -> Self {
        Failure::invalid(e)
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::invalid(format!("{}: {e}", path.display()))
}

fn require_seed(seed: &SeedArg) -> Result<u64> {
    seed.seed
        .ok_or_else(|| Failure::invalid("this command is randomized: pass --seed or set MSR_SEED"))
}

fn cluster_dir(args: &ClusterArgs) -> PathBuf {
    match (&args.dir, &args.manifest) {
        (Some(dir), _) => dir.clone(),
        (None, Some(m)) => m.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
        (None, None) => unreachable!("clap requires one of --dir/--manifest"),
    }
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn code_params(args: &CodeArgs) -> Result<CodeParams> {
    let (n, k) = (args.n, args.k);
    let mut patterns: Vec<Pattern> = args.d.iter().map(|&d| Pattern::new(args.h, d)).collect();
    patterns.extend(args.patterns.iter().copied());
    if args.all_patterns {
        if k == 0 || k >= n {
            return Err(Failure::invalid(format!("need 1 <= k < n (n={n}, k={k})")));
        }
        let r = n - k;
        let all: Vec<Pattern> = match args.family {
            Family::C1 => (k + 1..n).map(|d| Pattern::new(1, d)).collect(),
            Family::C2 => (1..=r)
                .flat_map(|h| (k..=n - h).filter(move |d| (d - k) % h == 0).map(move |d| Pattern::new(h, d)))
                .collect(),
            Family::C4 => (1..=r)
                .flat_map(|h| (k..=n - h).map(move |d| Pattern::new(h, d)))
                .collect(),
            other => {
                return Err(Failure::invalid(format!("--all-patterns is not available for {other}")));
            }
        };
        for p in all {
            if !patterns.contains(&p) {
                patterns.push(p);
            }
        }
    }
    if patterns.is_empty() {
        return Err(Failure::invalid("give at least one pattern (--d, --patterns or --all-patterns)"));
    }
    Ok(CodeParams {
        family: args.family,
        n,
        k,
        patterns,
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let json = cli.json;
    match cli.command {
        Command::Params(args) => params(&args, json),
        Command::Encode {
            code,
            out,
            input,
            synthetic,
            stripes,
            seed,
        } => encode(&code, &out, input.as_deref(), synthetic, stripes, &seed, json),
        Command::Fail { cluster, nodes } => {
            let mut state = ClusterState::open(&cluster_dir(&cluster))?;
            state.fail_nodes(&nodes)?;
            if json {
                print_json(&json!({ "failed": state.failed(), "alive": state.alive() }));
            } else {
                println!("failed nodes: {:?}", state.failed());
            }
            Ok(())
        }
        Command::Repair {
            cluster,
            nodes,
            helpers,
            h,
            d,
            report,
        } => repair(&cluster, &nodes, &helpers, h, d, report.as_deref(), json),
        Command::Verify { cluster } => {
            let state = ClusterState::open(&cluster_dir(&cluster))?;
            state.verify()?;
            if json {
                print_json(&json!({ "ok": true, "alive": state.alive() }));
            } else {
                println!("ok: {} alive node digests and content digest match", state.alive().len());
            }
            Ok(())
        }
        Command::VerifyMds { cluster, samples, seed } => {
            let seed = require_seed(&seed)?;
            let state = ClusterState::open(&cluster_dir(&cluster))?;
            let rep = state.verify_mds(samples, seed)?;
            if json {
                print_json(&json!({ "seed": seed, "report": rep }));
            } else {
                println!("seed {seed}: {} of {} reconstructions match", rep.samples - rep.mismatches, rep.samples);
            }
            if rep.mismatches > 0 {
                return Err(Failure::integrity(format!("{} reconstructions disagree", rep.mismatches)));
            }
            Ok(())
        }
        Command::Extract { cluster, output } => {
            let state = ClusterState::open(&cluster_dir(&cluster))?;
            let bytes = state.extract()?;
            fs::write(&output, &bytes).map_err(|e| io_err(&output, e))?;
            if json {
                print_json(&json!({ "bytes": bytes.len(), "output": output }));
            } else {
                println!("wrote {} bytes to {}", bytes.len(), output.display());
            }
            Ok(())
        }
        Command::Table { n, k, h, d, format } => {
            let report = subpacketization_table(n, k, h, d)?;
            match (json, format) {
                (true, _) | (_, TableFormat::Json) => print_json(&report),
                (false, TableFormat::Csv) => print!("{}", report.to_csv()),
                (false, TableFormat::Text) => print!("{}", report.to_text()),
            }
            Ok(())
        }
        Command::Selftest { seed } => selftest(require_seed(&seed)?, json),
        Command::Scenario {
            config,
            workdir,
            report,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let out = run_scenario(&cfg, &workdir)?;
            if let Some(path) = &report {
                let text = serde_json::to_string_pretty(&out).expect("serializable");
                fs::write(path, text).map_err(|e| io_err(path, e))?;
            }
            if json {
                print_json(&out);
            } else {
                for (i, step) in out.steps.iter().enumerate() {
                    println!("step {i}: {}", serde_json::to_string(step).expect("serializable"));
                }
            }
            Ok(())
        }
    }
}

fn params(args: &CodeArgs, json: bool) -> Result<()> {
    let p = code_params(args)?;
    let spec = CodeSpec::build(p.family, p.n, p.k, &p.patterns)?;
    let mut rows = Vec::new();
    for info in spec.patterns() {
        let pat = info.pattern;
        let (beta, gamma) = audit::cut_set(pat.h, pat.d, spec.k(), spec.ell() as u64)?;
        rows.push(json!({
            "h": pat.h,
            "d": pat.d,
            "delta": info.delta,
            "span": info.span,
            "scheme": info.scheme,
            "per_helper": beta,
            "total": gamma,
        }));
    }
    if json {
        print_json(&json!({
            "family": spec.family(),
            "n": spec.n(),
            "k": spec.k(),
            "r": spec.r(),
            "ell": spec.ell(),
            "base": spec.base(),
            "blocks": spec.blocks(),
            "prime": spec.field().modulus(),
            "lambda_rule": LAMBDA_RULE,
            "patterns": rows,
        }));
        return Ok(());
    }
    println!("family {}", spec.family());
    println!("n={} k={} r={}", spec.n(), spec.k(), spec.r());
    println!("ℓ={} = {}·{}^{}", spec.ell(), spec.blocks(), spec.base(), spec.n());
    println!("p={}", spec.field().modulus());
    println!("lambda rule {LAMBDA_RULE}");
    for row in &rows {
        println!(
            "pattern ({},{}): delta {}, per-helper {}, total {}",
            row["h"], row["d"], row["delta"], row["per_helper"], row["total"]
        );
    }
    Ok(())
}

fn encode(
    code: &CodeArgs,
    out: &Path,
    input: Option<&Path>,
    synthetic: bool,
    stripes: usize,
    seed: &SeedArg,
    json: bool,
) -> Result<()> {
    let p = code_params(code)?;
    if out.join(msr_core::sim::MANIFEST_FILE).exists() {
        return Err(Failure::invalid(format!("{} already holds a cluster", out.display())));
    }
    let state = match (input, synthetic) {
        (Some(path), false) => {
            let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
            ClusterState::ingest(out, &p, &bytes, seed.seed)?
        }
        (None, true) => ClusterState::ingest_synthetic(out, &p, require_seed(seed)?, stripes)?,
        _ => return Err(Failure::invalid("pass exactly one of --input or --synthetic")),
    };
    let m = state.manifest();
    if json {
        print_json(m);
    } else {
        println!(
            "encoded {} stripe(s) over GF({}), ℓ={}, into {}",
            m.stripes,
            m.prime,
            m.ell,
            out.display()
        );
        if let Some(s) = m.seed {
            println!("seed {s}");
        }
    }
    Ok(())
}

fn repair(
    cluster: &ClusterArgs,
    nodes: &[usize],
    helpers: &[usize],
    h: Option<usize>,
    d: Option<usize>,
    report: Option<&Path>,
    json: bool,
) -> Result<()> {
    let pattern = Pattern::new(h.unwrap_or(nodes.len()), d.unwrap_or(helpers.len()));
    if pattern.h != nodes.len() || pattern.d != helpers.len() {
        return Err(Failure::invalid(format!(
            "{} nodes and {} helpers do not match --h {} --d {}",
            nodes.len(),
            helpers.len(),
            pattern.h,
            pattern.d
        )));
    }
    let mut state = ClusterState::open(&cluster_dir(cluster))?;
    let (rep, failure) = match state.run_repair(nodes, helpers, pattern) {
        Ok(rep) => (rep, None),
        Err(SimError::NotOptimal(rep)) => {
            let msg = format!(
                "download {} is not at the bound {}",
                rep.transcript.total, rep.bound.cut_set_bound
            );
            (*rep, Some(Failure::integrity(msg)))
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = report {
        let text = serde_json::to_string_pretty(&rep).expect("serializable");
        fs::write(path, text).map_err(|e| io_err(path, e))?;
    }
    if json {
        print_json(&rep);
    } else {
        println!(
            "restored {:?}: downloaded {} symbols ({} per helper), bound {}, metered {} bytes, optimal {}",
            rep.restored,
            rep.transcript.total,
            rep.bound.per_helper_max,
            rep.bound.cut_set_bound,
            rep.metered_bytes,
            rep.bound.conforming()
        );
    }
    failure.map_or(Ok(()), Err)
}

fn selftest_cases() -> Vec<(Family, usize, usize, Vec<Pattern>)> {
    let p = |list: &[(usize, usize)]| list.iter().map(|&(h, d)| Pattern::new(h, d)).collect();
    vec![
        (Family::C1, 5, 2, p(&[(1, 3), (1, 4)])),
        (Family::C2, 5, 2, p(&[(1, 3), (1, 4), (3, 2)])),
        (Family::C3, 6, 2, p(&[(2, 4)])),
        (Family::C4, 5, 2, p(&[(1, 3), (2, 3), (1, 4)])),
        (Family::Hadamard, 6, 2, p(&[(3, 3)])),
    ]
}

fn selftest(seed: u64, json: bool) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results: Vec<Value> = Vec::new();
    let mut failures = 0;
    for (family, n, k, patterns) in selftest_cases() {
        let spec = CodeSpec::build(family, n, k, &patterns)?;
        let cw = spec.encode(&spec.random_data(&mut rng))?;
        let mut record = |check: String, ok: bool| {
            failures += usize::from(!ok);
            if !json {
                println!("{} {check}", if ok { "ok  " } else { "FAIL" });
            }
            results.push(json!({ "check": check, "ok": ok }));
        };

        let subset: Vec<usize> = {
            let mut s: Vec<usize> = sample(&mut rng, n, k).into_iter().map(|i| i + 1).collect();
            s.sort_unstable();
            s
        };
        let view: Vec<(usize, &[u64])> = subset.iter().map(|&j| (j, cw.column(j))).collect();
        let ok = spec.mds_reconstruct(&view).is_ok_and(|back| back == cw);
        record(format!("{family} n={n} k={k}: reconstruct from {subset:?}"), ok);

        for pat in &patterns {
            let mut order: Vec<usize> = (1..=n).collect();
            order.shuffle(&mut rng);
            let (failed, helpers) = (&order[..pat.h], &order[pat.h..pat.h + pat.d]);
            let ok = match repair_codeword(&spec, &cw, failed, helpers, *pat) {
                Ok(out) => {
                    out.restored.iter().all(|(j, col)| col.as_slice() == cw.column(*j))
                        && audit::verify_transcript(&out.transcript, &spec).is_ok_and(|r| r.conforming())
                }
                Err(_) => false,
            };
            record(format!("{family} n={n} k={k}: repair {pat} H={failed:?} R={helpers:?}"), ok);
        }
    }
    if json {
        print_json(&json!({ "seed": seed, "checks": results, "failures": failures }));
    } else {
        println!("seed {seed}: {} checks, {failures} failed", results.len());
    }
    if failures > 0 {
        return Err(Failure::integrity(format!("{failures} self-test checks failed")));
    }
    Ok(())
}
