//! Subcommands and their JSON reports.

use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use owcoreset::centers::{CenterProvider, Exact1dCenters, SampledCenters, DEFAULT_NUM_SAMPLES};
use owcoreset::coreset_nd::{
    build_pcentrum_coreset_detailed, build_simultaneous_coreset_detailed, CoresetParams,
};
use owcoreset::objective::{cost_p, cost_v};
use owcoreset::verify::{
    certified_piece_lower_bound, claim_check, coreset_error, cost_p_many, profile_pieces,
    random_center_sets, reference_piece_bound, sqrt_instance, Objective,
};
use owcoreset::{Point, WeightVector, WeightedPoints};

use crate::io;
use crate::synth;

/// Number of times each timed section runs; the median is reported.
const TIMING_REPEATS: usize = 3;

#[derive(Debug, Parser)]
#[command(
    name = "owcoreset",
    version,
    about = "Coresets for ordered weighted clustering"
)]
pub struct Cli {
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a coreset for the top-p cost.
    Build(BuildArgs),
    /// Build one coreset for every ordered weighted objective.
    BuildSimultaneous(SimultaneousArgs),
    /// Compare a coreset against its dataset on random center sets.
    Eval(EvalArgs),
    /// Build and check a coreset for the square-root instance.
    Hardness(HardnessArgs),
    /// Write a seeded Gaussian mixture as a point file.
    Generate(GenerateArgs),
}

/// A value of `p`, either absolute or a fraction of `n` such as `0.1n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PSpec {
    Absolute(u64),
    Fraction(f64),
}

impl FromStr for PSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some(f) = s.strip_suffix('n') {
            let f = if f.is_empty() {
                1.0
            } else {
                f.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?
            };
            if !(f.is_finite() && f > 0.0 && f <= 1.0) {
                return Err(format!("{s:?}: fraction must lie in (0, 1]"));
            }
            Ok(PSpec::Fraction(f))
        } else {
            let p = s.parse::<u64>().map_err(|e| format!("{s:?}: {e}"))?;
            if p == 0 {
                return Err("p must be at least 1".into());
            }
            Ok(PSpec::Absolute(p))
        }
    }
}

impl PSpec {
    /// `p` for a dataset of total weight `n`; fractions round up.
    pub fn resolve(self, n: u64) -> Result<u64> {
        let p = match self {
            PSpec::Absolute(p) => p,
            PSpec::Fraction(f) => ((f * n as f64).ceil() as u64).max(1),
        };
        if p > n {
            bail!("p = {p} exceeds the dataset size {n}");
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Coreset CSV to write.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Absolute `p` or a fraction of `n`, e.g. `0.1n`.
    #[arg(long)]
    pub p: PSpec,
    #[arg(long)]
    pub eps: f64,
    /// Candidate subsets tried by the center heuristic.
    #[arg(long, default_value_t = DEFAULT_NUM_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    /// Multiplier on both splitting thresholds.
    #[arg(long, default_value_t = 1.0)]
    pub slack: f64,
    /// Direction net resolution; defaults to `eps`.
    #[arg(long)]
    pub net_eps: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimultaneousArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_NUM_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub slack: f64,
    #[arg(long)]
    pub net_eps: Option<f64>,
    /// Use the exact one-center solver (requires `d = 1`, `k = 1`).
    #[arg(long)]
    pub exact_1d: bool,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ObjectiveArgs {
    /// Top-p cost for one `p`.
    #[arg(long)]
    pub p: Option<PSpec>,
    /// Comma-separated values of `p`; the maximum error is reported.
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<PSpec>>,
    /// Every `p` from 1 to `n`.
    #[arg(long)]
    pub all_p: bool,
    /// Power-law rank weights `1 / i^alpha`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Rank weights, one per row.
    #[arg(long)]
    pub weights_file: Option<PathBuf>,
    /// Unit rank weights (k-median).
    #[arg(long)]
    pub ones: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub coreset: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[arg(long, default_value_t = 100)]
    pub eval_centers: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct HardnessArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub slack: f64,
    /// Endpoints of the interval used for the linear-piece check.
    #[arg(long, default_value_t = 1000)]
    pub claim_a: u64,
    #[arg(long, default_value_t = 30000)]
    pub claim_b: u64,
    /// Write the instance as a point file.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Write the coreset.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 4)]
    pub clusters: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

/// Files written so far, removed again if the command fails.
#[derive(Debug, Default)]
struct Outputs(Vec<PathBuf>);

impl Outputs {
    fn record(&mut self, path: &Path) {
        self.0.push(path.to_path_buf());
    }

    fn remove_all(&self) {
        for p in &self.0 {
            let _ = std::fs::remove_file(p);
        }
    }
}

/// Run a parsed command line and write its report.
pub fn run(cli: &Cli) -> Result<()> {
    let mut outputs = Outputs::default();
    let result = execute(&cli.command, &mut outputs).and_then(|report| {
        let text = serde_json::to_string_pretty(&Value::Object(report))? + "\n";
        match &cli.report {
            Some(path) => {
                io::write_atomic(path, |w| w.write_all(text.as_bytes()))?;
                outputs.record(path);
            }
            None => print!("{text}"),
        }
        Ok(())
    });
    if result.is_err() {
        outputs.remove_all();
    }
    result
}

/// Run one command and return its report without writing it.
fn execute(command: &Command, outputs: &mut Outputs) -> Result<Map<String, Value>> {
    match command {
        Command::Build(a) => cmd_build(a, outputs),
        Command::BuildSimultaneous(a) => cmd_build_simultaneous(a, outputs),
        Command::Eval(a) => cmd_eval(a),
        Command::Hardness(a) => cmd_hardness(a, outputs),
        Command::Generate(a) => cmd_generate(a, outputs),
    }
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("reports are built from object literals"),
    }
}

/// Run `f` several times and return its first result with the median
/// wall time in milliseconds.
fn timed<T>(mut f: impl FnMut() -> owcoreset::Result<T>) -> Result<(T, f64)> {
    let mut times = Vec::with_capacity(TIMING_REPEATS);
    let mut first = None;
    for _ in 0..TIMING_REPEATS {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        first.get_or_insert(out);
    }
    times.sort_by(f64::total_cmp);
    Ok((first.expect("at least one run"), times[times.len() / 2]))
}

fn params(eps: f64, slack: f64, net_eps: Option<f64>) -> CoresetParams {
    let p = CoresetParams::new(eps).with_slack(slack);
    match net_eps {
        Some(e) => p.with_net_eps(e),
        None => p,
    }
}

fn cmd_build(a: &BuildArgs, outputs: &mut Outputs) -> Result<Map<String, Value>> {
    let data = io::ingest_csv(&a.input)?;
    let n = data.total_weight();
    let p = a.p.resolve(n)?;
    let params = params(a.eps, a.slack, a.net_eps);
    let provider = SampledCenters::new(a.seed).with_samples(a.samples);
    let (build, ms) = timed(|| build_pcentrum_coreset_detailed(&data, a.k, p, &params, &provider))?;
    io::write_coreset(&a.output, &build.coreset)?;
    outputs.record(&a.output);
    Ok(object(json!({
        "command": "build",
        "n": n,
        "d": data.dim(),
        "k": a.k,
        "p": p,
        "eps": a.eps,
        "net_eps": params.net_eps(),
        "slack": a.slack,
        "samples": a.samples,
        "seed": a.seed,
        "coreset_size": build.coreset.size(),
        "num_lines": build.projection.lines.len(),
        "center_cost": build.centers.objective,
        "build_ms": ms,
    })))
}

fn cmd_build_simultaneous(
    a: &SimultaneousArgs,
    outputs: &mut Outputs,
) -> Result<Map<String, Value>> {
    let data = io::ingest_csv(&a.input)?;
    let params = params(a.eps, a.slack, a.net_eps);
    let sampled = SampledCenters::new(a.seed).with_samples(a.samples);
    let exact = Exact1dCenters::new();
    let provider: &dyn CenterProvider = if a.exact_1d { &exact } else { &sampled };
    let (build, ms) = timed(|| build_simultaneous_coreset_detailed(&data, a.k, &params, provider))?;
    io::write_coreset(&a.output, &build.coreset)?;
    outputs.record(&a.output);
    Ok(object(json!({
        "command": "build-simultaneous",
        "n": data.total_weight(),
        "d": data.dim(),
        "k": a.k,
        "p_grid": build.grid,
        "eps": a.eps,
        "net_eps": params.net_eps(),
        "slack": a.slack,
        "samples": a.samples,
        "seed": a.seed,
        "centers": if a.exact_1d { "exact-1d" } else { "sampled" },
        "coreset_size": build.coreset.size(),
        "num_lines": build.num_lines,
        "build_ms": ms,
    })))
}

fn resolve_objective(o: &ObjectiveArgs, n: u64) -> Result<(Objective, String)> {
    if let Some(p) = o.p {
        let p = p.resolve(n)?;
        return Ok((Objective::TopP(p), format!("top-p, p = {p}")));
    }
    if let Some(list) = &o.p_list {
        let ps = list
            .iter()
            .map(|p| p.resolve(n))
            .collect::<Result<Vec<_>>>()?;
        let desc = format!("top-p, p in {ps:?}");
        return Ok((Objective::TopPList(ps), desc));
    }
    if o.all_p {
        return Ok((
            Objective::TopPList((1..=n).collect()),
            "top-p, every p".into(),
        ));
    }
    let len = usize::try_from(n).context("dataset too large for a rank-weight vector")?;
    if let Some(alpha) = o.alpha {
        return Ok((
            Objective::Weights(WeightVector::power_law(len, alpha)?),
            format!("power law, alpha = {alpha}"),
        ));
    }
    if let Some(path) = &o.weights_file {
        let v = WeightVector::new(io::read_weights(path)?)?;
        return Ok((
            Objective::Weights(v),
            format!("weights from {}", path.display()),
        ));
    }
    if o.ones {
        return Ok((
            Objective::Weights(WeightVector::ones(len)),
            "unit weights".into(),
        ));
    }
    bail!("no objective given")
}

/// Total objective over all center sets, the work timed by `eval`.
fn evaluate<D: WeightedPoints + ?Sized>(
    data: &D,
    center_sets: &[Vec<Point>],
    objective: &Objective,
) -> owcoreset::Result<f64> {
    let mut total = 0.0;
    for centers in center_sets {
        total += match objective {
            Objective::TopP(p) => cost_p(data, centers, *p)?,
            Objective::TopPList(ps) => cost_p_many(data, centers, ps)?.iter().sum(),
            Objective::Weights(v) => cost_v(data, centers, v)?,
        };
    }
    Ok(black_box(total))
}

fn cmd_eval(a: &EvalArgs) -> Result<Map<String, Value>> {
    let data = io::ingest_csv(&a.input)?;
    let coreset = io::read_coreset(&a.coreset)?;
    let n = data.total_weight();
    if coreset.dim() != data.dim() || coreset.total_weight() != n {
        bail!(
            "coreset ({} points of total weight {} in R^{}) does not match the dataset ({n} points in R^{})",
            coreset.size(),
            coreset.total_weight(),
            coreset.dim(),
            data.dim()
        );
    }
    if a.eval_centers == 0 {
        bail!("--eval-centers must be at least 1");
    }
    let (objective, desc) = resolve_objective(&a.objective, n)?;
    let center_sets = random_center_sets(&data, a.k, a.eval_centers, a.seed);
    let report = coreset_error(&data, &coreset, &center_sets, &objective)?;
    let (_, t_x) = timed(|| evaluate(&data, &center_sets, &objective))?;
    let (_, t_c) = timed(|| evaluate(&coreset, &center_sets, &objective))?;
    Ok(object(json!({
        "command": "eval",
        "n": n,
        "d": data.dim(),
        "k": a.k,
        "objective": desc,
        "coreset_size": coreset.size(),
        "seed": a.seed,
        "num_centers": report.num_centers,
        "emp_err": report.max_error,
        "argmax_center": report.argmax_center,
        "argmax_p": report.argmax_p,
        "T_X_ms": t_x,
        "T_Xprime_ms": t_c,
        "speedup": t_x / t_c,
    })))
}

fn cmd_hardness(a: &HardnessArgs, outputs: &mut Outputs) -> Result<Map<String, Value>> {
    let data = sqrt_instance(a.n)?;
    if let Some(path) = &a.instance {
        io::write_points(path, &data)?;
        outputs.record(path);
    }
    let params = CoresetParams::new(a.eps).with_slack(a.slack);
    let build = build_simultaneous_coreset_detailed(&data, 1, &params, &Exact1dCenters::new())?;
    if let Some(path) = &a.output {
        io::write_coreset(path, &build.coreset)?;
        outputs.record(path);
    }
    let origin = Point::new(vec![0.0])?;
    let exact = profile_pieces(&data, &origin)?;
    let approx = profile_pieces(&build.coreset, &origin)?;
    let (err, worst_p) = exact.max_error(&approx)?;
    let n = a.n as u64;
    let mut report = object(json!({
        "command": "hardness",
        "n": n,
        "eps": a.eps,
        "slack": a.slack,
        "coreset_size": build.coreset.size(),
        "grid_len": build.grid.len(),
        "worst_p_error": err,
        "worst_p": worst_p,
        "passes_eps": err <= a.eps,
        "pieces": approx.pieces,
        "reference_bound": reference_piece_bound(n, a.eps),
        "certified_bound": certified_piece_lower_bound(n, a.eps),
        "claim_a": a.claim_a,
        "claim_b": a.claim_b,
    }));
    match claim_check(a.claim_a, a.claim_b, a.eps) {
        Ok(c) => {
            report.insert("claim_p_hat".into(), json!(c.p_hat));
            report.insert("claim_ratio".into(), json!(c.ratio));
            report.insert("claim_violated".into(), json!(c.violated));
        }
        Err(e) => {
            report.insert("claim_error".into(), json!(e.to_string()));
        }
    }
    Ok(report)
}

fn cmd_generate(a: &GenerateArgs, outputs: &mut Outputs) -> Result<Map<String, Value>> {
    if a.n == 0 || a.d == 0 {
        bail!("--n and --d must be at least 1");
    }
    let data = synth::gaussian_mixture(a.n, a.d, a.clusters, a.seed)?;
    io::write_points(&a.output, &data)?;
    outputs.record(&a.output);
    Ok(object(json!({
        "command": "generate",
        "n": a.n,
        "d": a.d,
        "clusters": a.clusters,
        "seed": a.seed,
    })))
}
