use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use netcontract::balancing::{balance_with, BalanceOptions};
use netcontract::fhn::{certify, entrainment_check, random_initial_state, EntrainmentOptions, FhnConfig};
use netcontract::hierarchy::{block_bound_matrix, synthesize_gains, tridiagonal_gains, BlockNorm, BlockPartition};
use netcontract::io::{read_matrix, read_vector, write_matrix};
use netcontract::matrix::{abscissa_report, PerronOptions};
use netcontract::stabilization::{minimal_effort_stabilize, stabilize_blockwise};
use netcontract::{DVector, Error, MetzlerMatrix, Norm, Structure};
use serde_json::{json, Value};

use crate::manifest::{write_json, ManifestBuilder, RunManifest};
use crate::{Command, FhnCommand, FhnConfigArgs};

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Result JSON.
    #[arg(long, visible_alias = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Where to write the balanced matrix; defaults to `<output stem>.balanced.mtx`.
    #[arg(long, value_name = "PATH")]
    pub balanced: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilizeArgs {
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Cost weights; all ones when omitted.
    #[arg(long, value_name = "PATH")]
    pub weights: Option<PathBuf>,
    /// Target spectral abscissa of the closed loop.
    #[arg(long, allow_hyphen_values = true)]
    pub target: f64,
    #[arg(long, visible_alias = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Block sizes, e.g. "2,2,3".
    #[arg(long)]
    pub partition: String,
    /// Per-block norms ("1", "2", "inf"); a single entry applies to every block.
    #[arg(long, default_value = "2")]
    pub norms: String,
    /// Bound matrix, Matrix Market for `.mtx` and CSV otherwise.
    #[arg(long, visible_alias = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long, value_name = "PATH")]
    pub jhat: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub weights: Option<PathBuf>,
    /// Requested contraction rate (positive).
    #[arg(long)]
    pub rate: f64,
    /// Use the closed-form gains for tridiagonal bounds (unit weights).
    #[arg(long)]
    pub tridiagonal: bool,
    #[arg(long, visible_alias = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Trajectory CSV.
    #[arg(long, visible_alias = "output", value_name = "PATH")]
    pub out: PathBuf,
    /// Overrides the config seed for the random initial state.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EntrainArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Number of random initial conditions.
    #[arg(long, default_value_t = 2)]
    pub trajectories: usize,
    /// First seed; trajectory `k` uses `seed + k`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input period; taken from the config input when omitted.
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long, visible_alias = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

pub fn run(command: &Command) -> Result<RunManifest> {
    match command {
        Command::Balance(a) => run_balance(a),
        Command::Stabilize(a) => run_stabilize(a),
        Command::Bound(a) => run_bound(a),
        Command::Synthesize(a) => run_synthesize(a),
        Command::Fhn(FhnCommand::Simulate(a)) => run_simulate(a),
        Command::Fhn(FhnCommand::Certify(a)) => run_certify(a),
        Command::Fhn(FhnCommand::Gains(a)) => run_gains(a),
        Command::Fhn(FhnCommand::Entrain(a)) => run_entrain(a),
    }
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn load_metzler(path: &Path) -> Result<MetzlerMatrix> {
    let m = read_matrix(path)?;
    MetzlerMatrix::new(m).with_context(|| format!("{}", path.display()))
}

fn load_weights(path: Option<&Path>, n: usize) -> Result<Vec<f64>> {
    match path {
        None => Ok(vec![1.0; n]),
        Some(p) => {
            let w = read_vector(p)?;
            if w.len() != n {
                bail!("{}: expected {n} weights, found {}", p.display(), w.len());
            }
            Ok(w)
        }
    }
}

fn load_config(path: &Path) -> Result<FhnConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn save_result(path: Option<&Path>, value: &Value) -> Result<()> {
    match path {
        Some(p) => write_json(p, value),
        None => Ok(()),
    }
}

fn run_balance(args: &BalanceArgs) -> Result<RunManifest> {
    let builder = ManifestBuilder::new("balance", json!({ "tol": args.tol })).input("input", &args.input);
    let a = load_metzler(&args.input)?;
    let r = balance_with(&a, &BalanceOptions::with_tol(args.tol))?;
    let balanced_path = args.balanced.clone().or_else(|| {
        args.output.as_ref().map(|o| {
            let stem = o.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            o.with_file_name(format!("{stem}.balanced.mtx"))
        })
    });
    if let Some(p) = &balanced_path {
        write_matrix(p, &r.balanced)?;
    }
    let result = json!({
        "d": vec_of(&r.d),
        "residual": r.residual,
        "iterations": r.iterations,
        "clamped": r.clamped,
        "balanced_matrix_path": balanced_path.as_ref().map(|p| p.display().to_string()),
    });
    save_result(args.output.as_deref(), &result)?;
    Ok(builder.finish(true, result))
}

fn run_stabilize(args: &StabilizeArgs) -> Result<RunManifest> {
    let mut builder =
        ManifestBuilder::new("stabilize", json!({ "target": args.target })).input("input", &args.input);
    if let Some(w) = &args.weights {
        builder = builder.input("weights", w);
    }
    let a = load_metzler(&args.input)?;
    let w = load_weights(args.weights.as_deref(), a.dim())?;
    let blockwise = matches!(a.structure(), Structure::CompletelyReducible(_));
    let r = if blockwise {
        stabilize_blockwise(&a, &w, args.target)?
    } else {
        minimal_effort_stabilize(&a, &w, args.target)?
    };
    let feasible = r.feasible();
    let result = json!({
        "ell_star": vec_of(&r.ell_star),
        "d_star": vec_of(&r.d_star),
        "target": r.target,
        "achieved": r.achieved,
        "cost": r.cost,
        "positive_gains": r.positive_gains,
        "eigen_residual": r.eigen_residual,
        "balance_residual": r.balance_residual,
        "blockwise": blockwise,
        "feasible": feasible,
    });
    save_result(args.output.as_deref(), &result)?;
    if !feasible {
        eprintln!("certificate failed: achieved abscissa {} misses target {}", r.achieved, r.target);
    }
    Ok(builder.finish(feasible, result))
}

fn parse_partition(sizes: &str, norms: &str) -> Result<BlockPartition> {
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad block size '{s}'")))
        .collect::<Result<_>>()?;
    let mut norms: Vec<Norm> = norms
        .split(',')
        .map(|s| s.trim().parse::<Norm>().map_err(|e| anyhow::anyhow!("{e}")))
        .collect::<Result<_>>()?;
    if norms.len() == 1 {
        norms = vec![norms[0]; sizes.len()];
    }
    if norms.len() != sizes.len() {
        bail!("{} norms given for {} blocks", norms.len(), sizes.len());
    }
    Ok(BlockPartition::new(sizes, norms.into_iter().map(BlockNorm::plain).collect())?)
}

fn run_bound(args: &BoundArgs) -> Result<RunManifest> {
    let builder = ManifestBuilder::new(
        "bound",
        json!({ "partition": args.partition, "norms": args.norms }),
    )
    .input("input", &args.input);
    let a = read_matrix(&args.input)?;
    let partition = parse_partition(&args.partition, &args.norms)?;
    let b = block_bound_matrix(&a, &partition)?;
    if let Some(p) = &args.output {
        write_matrix(p, b.entries())?;
    }
    let report = abscissa_report(&b, &PerronOptions::default())?;
    let rows: Vec<Vec<f64>> = b.entries().row_iter().map(|r| r.iter().copied().collect()).collect();
    let result = json!({
        "bound": rows,
        "abscissa": report.value,
        "structure": report.structure,
        "hurwitz": report.value < 0.0,
        "output_path": args.output.as_ref().map(|p| p.display().to_string()),
    });
    Ok(builder.finish(true, result))
}

fn run_synthesize(args: &SynthesizeArgs) -> Result<RunManifest> {
    let mut builder = ManifestBuilder::new(
        "synthesize",
        json!({ "rate": args.rate, "tridiagonal": args.tridiagonal }),
    )
    .input("jhat", &args.jhat);
    if let Some(w) = &args.weights {
        builder = builder.input("weights", w);
    }
    let j = load_metzler(&args.jhat)?;
    let w = load_weights(args.weights.as_deref(), j.dim())?;
    let outcome = if args.tridiagonal {
        if w.iter().any(|&v| v != 1.0) {
            bail!("closed-form tridiagonal gains assume unit weights");
        }
        tridiagonal_gains(&j, args.rate).map(|v| {
            let closed = j.minus_diagonal(v.as_slice()).expect("dimensions match");
            let alpha = abscissa_report(&closed, &PerronOptions::default()).map(|r| r.value).unwrap_or(f64::NAN);
            json!({
                "v_star": vec_of(&v),
                "rate": args.rate,
                "cost": v.sum(),
                "closed_loop_abscissa": alpha,
                "method": "tridiagonal",
            })
        })
    } else {
        synthesize_gains(&j, &w, args.rate).map(|g| {
            json!({
                "v_star": vec_of(&g.v_star),
                "rate": g.rate,
                "cost": g.cost,
                "closed_loop_abscissa": g.closed_loop_abscissa,
                "d": vec_of(&g.d),
                "hypothesis_holds": g.hypothesis_holds,
                "method": "balancing",
            })
        })
    };
    match outcome {
        Ok(result) => {
            save_result(args.output.as_deref(), &result)?;
            Ok(builder.finish(true, result))
        }
        Err(Error::HypothesisViolated(msg)) => {
            eprintln!("certificate failed: {msg}");
            let result = json!({ "hypothesis_violated": msg });
            save_result(args.output.as_deref(), &result)?;
            Ok(builder.finish(false, result))
        }
        Err(e) => Err(e.into()),
    }
}

fn run_simulate(args: &SimulateArgs) -> Result<RunManifest> {
    let mut cfg = load_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let t_end = args.t_end.unwrap_or(cfg.t_end);
    let step = args.step.unwrap_or(cfg.step);
    let builder = ManifestBuilder::new(
        "fhn simulate",
        json!({ "seed": cfg.seed, "t_end": t_end, "step": step }),
    )
    .input("config", &args.config);
    let x0 = cfg.initial_state()?;
    let tr = netcontract::fhn::simulate(&cfg, &x0, t_end, step)?;
    let file = std::fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    tr.write_csv(std::io::BufWriter::new(file))
        .with_context(|| format!("writing {}", args.out.display()))?;
    let result = json!({
        "samples": tr.len(),
        "x0": x0,
        "final_state": tr.states.last(),
        "trajectory_path": args.out.display().to_string(),
    });
    Ok(builder.finish(true, result))
}

fn run_certify(args: &FhnConfigArgs) -> Result<RunManifest> {
    let builder = ManifestBuilder::new("fhn certify", json!({})).input("config", &args.config);
    let cfg = load_config(&args.config)?;
    let cert = certify(&cfg)?;
    let result = serde_json::to_value(&cert)?;
    save_result(args.output.as_deref(), &result)?;
    if !cert.passed {
        let failed: Vec<&str> = cert.failed_checks().map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            eprintln!(
                "certificate failed: certified rate {} below requested {}",
                cert.eta_certified, cert.eta_requested
            );
        } else {
            eprintln!("certificate failed: {}", failed.join("; "));
        }
    }
    Ok(builder.finish(cert.passed, result))
}

fn run_gains(args: &FhnConfigArgs) -> Result<RunManifest> {
    let builder = ManifestBuilder::new("fhn gains", json!({})).input("config", &args.config);
    let cfg = load_config(&args.config)?;
    let lap = netcontract::fhn::laplacian(&cfg.adjacency_matrix()?)?;
    match netcontract::fhn::fhn_gains(&lap, cfg.c, cfg.gamma, cfg.eta) {
        Ok(g) => {
            let result = json!({ "gains": vec_of(&g), "eta": cfg.eta });
            save_result(args.output.as_deref(), &result)?;
            Ok(builder.finish(true, result))
        }
        Err(Error::HypothesisViolated(msg)) => {
            eprintln!("certificate failed: {msg}");
            Ok(builder.finish(false, json!({ "hypothesis_violated": msg })))
        }
        Err(e) => Err(e.into()),
    }
}

fn run_entrain(args: &EntrainArgs) -> Result<RunManifest> {
    let cfg = load_config(&args.config)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let period = match args.period.or_else(|| cfg.input.period()) {
        Some(p) => p,
        None => bail!("input is not periodic; pass --period"),
    };
    if args.trajectories < 2 {
        bail!("need at least two trajectories");
    }
    let builder = ManifestBuilder::new(
        "fhn entrain",
        json!({ "seed": seed, "trajectories": args.trajectories, "period": period }),
    )
    .input("config", &args.config);
    let net = cfg.network()?;
    let trs = (0..args.trajectories as u64)
        .map(|k| net.simulate(&random_initial_state(cfg.n, seed + k), cfg.t_end, cfg.step))
        .collect::<Result<Vec<_>, _>>()?;
    let report = entrainment_check(&cfg, &trs, period, &EntrainmentOptions::default())?;
    let passed = report.contraction_ok && report.periodic_ok;
    let result = serde_json::to_value(&report)?;
    save_result(args.output.as_deref(), &result)?;
    if !passed {
        eprintln!(
            "certificate failed: contraction_ok = {}, periodic_ok = {}",
            report.contraction_ok, report.periodic_ok
        );
    }
    Ok(builder.finish(passed, result))
}
