//! The `ecoc` command-line front end.
//!
//! Subcommands wire the library pipeline together: `exhaustive` and `toy`
//! produce inputs, `stats` reports pair-separation and cover compression,
//! `design` runs the selection chain (enumerate, filter, classify pairs,
//! cover, model, solve), and `eval`/`attack` train the classification
//! pipeline and measure clean or adversarial accuracy.
//!
//! Every run writes a manifest recording the invocation, the resolved
//! parameters, and a SHA-256 digest of each artifact. One seed governs a
//! run; per-module seeds are derived from it by labeled hashing, and
//! `--deterministic` pins thread count and zeroes wall-clock report
//! fields so reruns are byte-identical.
//!
//! Exit codes: 0 success, 2 validation or usage error, 3 infeasible
//! outcome, 4 feasible-but-unproven at a resource limit.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::attack::{pgd_sweep, AttackConfig, LossKind, SweepReport};
use crate::classify::{
    evaluate, make_gaussian_toy, train, BinaryLearnerSpec, Dataset, LearnerKind, PredictMode,
    TrainedEcoc,
};
use crate::codebook::Codebook;
use crate::conflict::{
    build_graph, classify_pairs, edge_clique_cover, infeasible_count_closed_form, validate_cover,
    UpperBound,
};
use crate::model::build_ip3;
use crate::solve::{certify, solve_exact, solve_local_search, SolveStatus, SolverConfig};
use crate::{derive_seed, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_TIME_LIMIT: i32 = 4;

/// Environment variable naming the default configuration file, used when
/// `--config` is absent.
pub const CONFIG_ENV: &str = "ECOC_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "ecoc",
    about = "Design and evaluate error-correcting output codebooks",
    version
)]
pub struct Cli {
    /// KEY=VALUE configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Single-threaded execution with zeroed wall-clock report fields,
    /// for byte-identical reruns.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Where the run manifest is written.
    #[arg(long, global = true, default_value = "ecoc-manifest.json")]
    manifest: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the canonical exhaustive codebook for k classes.
    Exhaustive(ExhaustiveArgs),
    /// Select codebook columns maximizing the minimum row distance.
    Design(DesignArgs),
    /// Pair-separation counts, closed-form check, and cover compression.
    Stats(StatsArgs),
    /// Generate the synthetic 2d Gaussian ring dataset.
    Toy(ToyArgs),
    /// Train per-column learners and report accuracy per decode mode.
    Eval(EvalArgs),
    /// Train, then run a projected-gradient epsilon sweep.
    Attack(AttackArgs),
}

#[derive(Debug, Args)]
struct ExhaustiveArgs {
    /// Number of classes (2..=26).
    #[arg(long)]
    k: Option<usize>,
    /// Output path; .json selects JSON, anything else CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Number of classes.
    #[arg(long)]
    k: Option<usize>,
    /// Column budget.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Minimum pairwise column distance.
    #[arg(long)]
    rho: Option<u32>,
    /// Optional maximum pairwise column distance.
    #[arg(long)]
    upper: Option<f64>,
    /// Keep only columns whose sign counts differ by at most tau.
    #[arg(long)]
    tau: Option<u32>,
    /// Solution method: exact | local-search.
    #[arg(long)]
    method: Option<String>,
    /// Solver wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Solver node limit.
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where the selected codebook is written.
    #[arg(long)]
    out_codebook: Option<PathBuf>,
    /// Where the solution report JSON is written.
    #[arg(long)]
    out_solution: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    rho: Option<u32>,
    #[arg(long)]
    upper: Option<f64>,
    /// Seed for the cover heuristic.
    #[arg(long)]
    seed: Option<u64>,
    /// Optional JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional one-row CSV mirror.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ToyArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n_per_class: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Circle radius the class means sit on.
    #[arg(long)]
    radius: Option<f64>,
    /// Isotropic noise level.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LearnerArgs {
    /// logistic | rbf-features-logistic | nearest-centroid.
    #[arg(long)]
    learner: Option<String>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    /// Fourier feature count (rbf-features-logistic).
    #[arg(long)]
    n_features: Option<usize>,
    /// RBF bandwidth (rbf-features-logistic).
    #[arg(long)]
    kernel_width: Option<f64>,
    /// Learner-internal seed, combined with the run seed.
    #[arg(long)]
    learner_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Training dataset CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Codebook file (.json or CSV).
    #[arg(long)]
    codebook: Option<PathBuf>,
    /// Held-out evaluation CSV; defaults to the training data.
    #[arg(long)]
    test_data: Option<PathBuf>,
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// hamming | scores-raw | scores-normalized.
    #[arg(long)]
    mode: Option<String>,
    /// Report JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional trained-model JSON path.
    #[arg(long)]
    out_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[command(flatten)]
    eval: EvalArgs,
    /// Comma-separated increasing radii, e.g. 0,0.05,0.1,0.2.
    #[arg(long)]
    epsilons: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// Per-step magnitude; defaults to 2.5 * epsilon / steps.
    #[arg(long)]
    step_size: Option<f64>,
    /// cross-entropy | margin.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    random_start: bool,
    /// Optional CSV mirror of the per-epsilon table.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

/// KEY=VALUE pairs from the configuration file; `#` starts a comment.
#[derive(Debug, Default)]
struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    fn parse(text: &str, source_name: &str) -> Result<FileConfig> {
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::format(source_name, idx + 1, format!("expected KEY=VALUE, got '{line}'")));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    fn load(explicit: Option<&Path>) -> Result<FileConfig> {
        let path = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV).map(PathBuf::from),
        };
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| with_path(e.into(), &p))?;
                FileConfig::parse(&text, &p.display().to_string())
            }
            None => Ok(FileConfig::default()),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e: T::Err| {
                Error::invalid("config", format!("bad value '{raw}' for '{key}': {e}"))
            }),
        }
    }

    /// Flag precedence: a set command-line flag wins, else the file value,
    /// else the default.
    fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(flag.or(self.get(key)?).unwrap_or(default))
    }

    fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        Ok(flag.or(self.get(key)?))
    }

    fn required<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.resolve_opt(flag, key)?
            .ok_or_else(|| Error::invalid("config", format!("missing required parameter '{key}'")))
    }

    fn resolve_flag(&self, set: bool, key: &str) -> Result<bool> {
        Ok(set || self.get(key)?.unwrap_or(false))
    }
}

fn parse_keyed<T: FromStr<Err = String>>(value: &str, what: &'static str) -> Result<T> {
    value.parse().map_err(|e: String| Error::invalid(what, e))
}

/// Bare IO errors drop the offending path; put it back for CLI surfaces.
fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::invalid("file", format!("{}: {io}", path.display())),
        other => other,
    }
}

fn parse_epsilon_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::invalid("epsilons", format!("bad radius '{s}'")))
        })
        .collect()
}

#[derive(Serialize)]
struct ManifestArtifact {
    role: String,
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    invocation: Vec<String>,
    deterministic: bool,
    parameters: serde_json::Map<String, serde_json::Value>,
    artifacts: Vec<ManifestArtifact>,
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Accumulates resolved parameters and produced artifacts for the run
/// manifest.
struct RunContext {
    command: &'static str,
    invocation: Vec<String>,
    deterministic: bool,
    manifest_path: PathBuf,
    parameters: serde_json::Map<String, serde_json::Value>,
    artifacts: Vec<(String, PathBuf)>,
}

impl RunContext {
    fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    fn artifact(&mut self, role: &str, path: &Path) {
        self.artifacts.push((role.to_string(), path.to_path_buf()));
    }

    fn write_manifest(&self) -> Result<()> {
        let mut artifacts = Vec::with_capacity(self.artifacts.len());
        for (role, path) in &self.artifacts {
            artifacts.push(ManifestArtifact {
                role: role.clone(),
                path: path.display().to_string(),
                sha256: sha256_hex(path)?,
            });
        }
        let manifest = RunManifest {
            command: self.command.to_string(),
            invocation: self.invocation.clone(),
            deterministic: self.deterministic,
            parameters: self.parameters.clone(),
            artifacts,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialization is infallible");
        text.push('\n');
        std::fs::write(&self.manifest_path, text)?;
        Ok(())
    }
}

fn write_codebook(m: &Codebook, path: &Path) -> Result<()> {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        m.write_json(path)
    } else {
        m.write_csv(path)
    }
}

fn read_codebook(path: &Path) -> Result<Codebook> {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        Codebook::read_json(path)
    } else {
        Codebook::read_csv(path)
    }
}

fn upper_bound(v: Option<f64>) -> UpperBound {
    match v {
        Some(u) => UpperBound::Value(u),
        None => UpperBound::Inactive,
    }
}

/// Maps a solver status to the documented exit code.
fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::FeasibleTimeLimit => EXIT_TIME_LIMIT,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::UnboundedGuard => EXIT_VALIDATION,
    }
}

fn cmd_exhaustive(args: ExhaustiveArgs, file: &FileConfig, ctx: &mut RunContext) -> Result<i32> {
    let k = file.required(args.k, "k")?;
    let out = file.resolve(args.out, "out", PathBuf::from(format!("exhaustive-k{k}.csv")))?;
    let m = Codebook::exhaustive(k)?;
    write_codebook(&m, &out)?;
    ctx.param("k", k);
    ctx.param("out", out.display().to_string());
    ctx.artifact("codebook", &out);
    println!("wrote {} x {} exhaustive codebook to {}", m.k(), m.n_columns(), out.display());
    Ok(EXIT_OK)
}

fn cmd_toy(args: ToyArgs, file: &FileConfig, ctx: &mut RunContext) -> Result<i32> {
    let k = file.resolve(args.k, "k", 10)?;
    let n_per_class = file.resolve(args.n_per_class, "n-per-class", 200)?;
    let seed = file.resolve(args.seed, "seed", 0)?;
    let radius = file.resolve(args.radius, "radius", 4.0)?;
    let sigma = file.resolve(args.sigma, "sigma", 1.0)?;
    let out = file.resolve(args.out, "out", PathBuf::from("toy.csv"))?;
    let ds = make_gaussian_toy(k, n_per_class, seed, radius, sigma)?;
    ds.write_csv(&out)?;
    ctx.param("k", k);
    ctx.param("n-per-class", n_per_class);
    ctx.param("seed", seed);
    ctx.param("radius", radius);
    ctx.param("sigma", sigma);
    ctx.param("out", out.display().to_string());
    ctx.artifact("dataset", &out);
    println!("wrote {} examples ({} classes) to {}", ds.n(), ds.k(), out.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct StatsReport {
    k: usize,
    rho: u32,
    upper: Option<f64>,
    columns: usize,
    pairs_total: u64,
    infeasible: u64,
    feasible: u64,
    /// Closed-form infeasible count; only defined for an inactive upper
    /// bound.
    infeasible_closed_form: Option<u64>,
    cover_cliques: usize,
    /// Infeasible pairs per cover constraint.
    reduction_factor: Option<f64>,
    elapsed_pairs_s: f64,
    elapsed_cover_s: f64,
}

fn cmd_stats(args: StatsArgs, file: &FileConfig, ctx: &mut RunContext) -> Result<i32> {
    let k = file.required(args.k, "k")?;
    let rho = file.required(args.rho, "rho")?;
    let upper = file.resolve_opt(args.upper, "upper")?;
    let seed = file.resolve(args.seed, "seed", 0)?;
    let out = file.resolve_opt(args.out, "out")?;
    let out_csv = file.resolve_opt(args.out_csv, "out-csv")?;

    let m = Codebook::exhaustive(k)?;
    let t0 = Instant::now();
    let pc = classify_pairs(&m, rho, upper_bound(upper));
    let elapsed_pairs = t0.elapsed().as_secs_f64();
    let closed = if upper.is_none() {
        Some(infeasible_count_closed_form(k, rho)?)
    } else {
        None
    };
    if let Some(c) = closed {
        if c != pc.infeasible_pairs.len() as u64 {
            return Err(Error::invalid(
                "stats",
                format!("closed form {c} disagrees with enumeration {}", pc.infeasible_pairs.len()),
            ));
        }
    }
    let graph = build_graph(&pc);
    let t1 = Instant::now();
    let cover = edge_clique_cover(&graph, seed);
    let elapsed_cover = t1.elapsed().as_secs_f64();
    let violations = validate_cover(&graph, &cover);
    if !violations.is_empty() {
        return Err(Error::invalid("stats", format!("cover validation failed: {:?}", violations[0])));
    }
    let reduction = if cover.cliques.is_empty() {
        None
    } else {
        Some(graph.n_edges() as f64 / cover.cliques.len() as f64)
    };
    let report = StatsReport {
        k,
        rho,
        upper,
        columns: m.n_columns(),
        pairs_total: pc.n_pairs_total,
        infeasible: pc.infeasible_pairs.len() as u64,
        feasible: pc.n_feasible,
        infeasible_closed_form: closed,
        cover_cliques: cover.cliques.len(),
        reduction_factor: reduction,
        elapsed_pairs_s: if ctx.deterministic { 0.0 } else { elapsed_pairs },
        elapsed_cover_s: if ctx.deterministic { 0.0 } else { elapsed_cover },
    };

    println!("k={k} rho={rho} columns={}", report.columns);
    println!("pairs: total={} infeasible={} feasible={}", report.pairs_total, report.infeasible, report.feasible);
    match closed {
        Some(c) => println!("closed-form infeasible count: {c} (matches)"),
        None => println!("closed-form infeasible count: n/a (upper bound active)"),
    }
    match reduction {
        Some(r) => println!("cover: {} cliques, reduction factor {r:.2}", report.cover_cliques),
        None => println!("cover: empty (no infeasible pairs)"),
    }
    println!("timings: pairs {elapsed_pairs:.3}s, cover {elapsed_cover:.3}s");

    ctx.param("k", k);
    ctx.param("rho", rho);
    ctx.param("upper", upper);
    ctx.param("seed", seed);
    if let Some(path) = &out {
        let mut text = serde_json::to_string_pretty(&report).expect("report serialization is infallible");
        text.push('\n');
        std::fs::write(path, text)?;
        ctx.artifact("stats", path);
    }
    if let Some(path) = &out_csv {
        let mut text = String::from(
            "k,rho,upper,columns,pairs_total,infeasible,feasible,cover_cliques,reduction_factor\n",
        );
        text.push_str(&format!(
            "{k},{rho},{},{},{},{},{},{},{}\n",
            upper.map_or(String::new(), |u| u.to_string()),
            report.columns,
            report.pairs_total,
            report.infeasible,
            report.feasible,
            report.cover_cliques,
            reduction.map_or(String::new(), |r| format!("{r:.4}")),
        ));
        std::fs::write(path, text)?;
        ctx.artifact("stats-csv", path);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DesignReport {
    solution: serde_json::Value,
    pairs: DesignPairStats,
    cover: DesignCoverStats,
    certified: bool,
    balanced_tau: Option<u32>,
    min_row_distance: f64,
}

#[derive(Serialize)]
struct DesignPairStats {
    total: u64,
    infeasible: u64,
    feasible: u64,
}

#[derive(Serialize)]
struct DesignCoverStats {
    cliques: usize,
    reduction_factor: Option<f64>,
}

fn cmd_design(args: DesignArgs, file: &FileConfig, ctx: &mut RunContext) -> Result<i32> {
    let k = file.required(args.k, "k")?;
    let l = file.required(args.l, "L")?;
    let rho = file.required(args.rho, "rho")?;
    let upper = file.resolve_opt(args.upper, "upper")?;
    let tau = file.resolve_opt(args.tau, "tau")?;
    let method = file.resolve(args.method, "method", "exact".to_string())?;
    let time_limit = file.resolve(args.time_limit, "time-limit", 600.0)?;
    let node_limit = file.resolve(args.node_limit, "node-limit", u64::MAX)?;
    let seed = file.resolve(args.seed, "seed", 0)?;
    let out_codebook = file.resolve(args.out_codebook, "out-codebook", PathBuf::from("design-codebook.csv"))?;
    let out_solution = file.resolve(args.out_solution, "out-solution", PathBuf::from("design-solution.json"))?;
    if method != "exact" && method != "local-search" {
        return Err(Error::invalid("design", format!("unknown method '{method}'")));
    }

    let mut base = Codebook::exhaustive(k)?;
    if let Some(t) = tau {
        base = base.filter_balanced(t)?;
    }
    let band = upper_bound(upper);
    let pc = classify_pairs(&base, rho, band);
    let graph = build_graph(&pc);
    let cover = edge_clique_cover(&graph, derive_seed(seed, "cover", 0));
    let cfg = SolverConfig {
        time_limit_s: time_limit,
        node_limit,
        seed: derive_seed(seed, "solve", 0),
        ..SolverConfig::default()
    };
    let mut solution = if method == "exact" {
        let model = build_ip3(&base, l, rho, band, &cover)?;
        solve_exact(&model, &cfg)?
    } else {
        solve_local_search(&base, l, rho, &cover, &cfg)?
    };
    let report = certify(&base, &solution.selected_columns, l, rho, band, solution.objective_value);
    if !report.confirmed {
        return Err(Error::invalid(
            "design",
            format!("certification refuted the solution: {:?}", report.violations[0]),
        ));
    }
    if ctx.deterministic {
        solution.elapsed_s = 0.0;
    }

    let selected = solution.materialize(&base)?;
    write_codebook(&selected, &out_codebook)?;
    let reduction = if cover.cliques.is_empty() {
        None
    } else {
        Some(graph.n_edges() as f64 / cover.cliques.len() as f64)
    };
    let design_report = DesignReport {
        solution: serde_json::from_str(&solution.to_json_string()).expect("solution wire is valid JSON"),
        pairs: DesignPairStats {
            total: pc.n_pairs_total,
            infeasible: pc.infeasible_pairs.len() as u64,
            feasible: pc.n_feasible,
        },
        cover: DesignCoverStats {
            cliques: cover.cliques.len(),
            reduction_factor: reduction,
        },
        certified: true,
        balanced_tau: tau,
        min_row_distance: selected.distance_summary().min_row_distance,
    };
    let mut text = serde_json::to_string_pretty(&design_report).expect("report serialization is infallible");
    text.push('\n');
    std::fs::write(&out_solution, text)?;

    ctx.param("k", k);
    ctx.param("L", l);
    ctx.param("rho", rho);
    ctx.param("upper", upper);
    ctx.param("tau", tau);
    ctx.param("method", method.clone());
    ctx.param("time-limit", time_limit);
    ctx.param("seed", seed);
    ctx.artifact("codebook", &out_codebook);
    ctx.artifact("solution", &out_solution);

    println!(
        "{}: objective {} (bound {}, gap {:.4}), {} columns selected, status {}",
        method,
        solution.objective_value,
        solution.best_bound,
        solution.gap,
        solution.selected_columns.len(),
        solution.status
    );
    if let Some(w) = &solution.warning {
        eprintln!("warning: {w}");
    }
    println!("codebook -> {}", out_codebook.display());
    println!("report -> {}", out_solution.display());
    Ok(status_exit_code(solution.status))
}

fn resolve_learner(args: &LearnerArgs, file: &FileConfig) -> Result<BinaryLearnerSpec> {
    let d = BinaryLearnerSpec::default();
    let kind_name = file.resolve(args.learner.clone(), "learner", "logistic".to_string())?;
    Ok(BinaryLearnerSpec {
        kind: parse_keyed::<LearnerKind>(&kind_name, "learner")?,
        learning_rate: file.resolve(args.learning_rate, "learning-rate", d.learning_rate)?,
        epochs: file.resolve(args.epochs, "epochs", d.epochs)?,
        l2: file.resolve(args.l2, "l2", d.l2)?,
        n_features: file.resolve(args.n_features, "n-features", d.n_features)?,
        kernel_width: file.resolve(args.kernel_width, "kernel-width", d.kernel_width)?,
        seed: file.resolve(args.learner_seed, "learner-seed", d.seed)?,
    })
}

struct Prepared {
    te: TrainedEcoc,
    eval_ds: Dataset,
    seed: u64,
    mode: PredictMode,
}

/// Shared front half of `eval` and `attack`: load data and codebook,
/// resolve the learner, train.
fn prepare_pipeline(args: &EvalArgs, file: &FileConfig, ctx: &mut RunContext) -> Result<Prepared> {
    let data: PathBuf = file.required(args.data.clone(), "data")?;
    let codebook: PathBuf = file.required(args.codebook.clone(), "codebook")?;
    let test_data = file.resolve_opt(args.test_data.clone(), "test-data")?;
    let seed = file.resolve(args.seed, "seed", 0)?;
    let mode_name = file.resolve(args.mode.clone(), "mode", "hamming".to_string())?;
    let mode = parse_keyed::<PredictMode>(&mode_name, "mode")?;
    let spec = resolve_learner(&args.learner, file)?;

    let ds = Dataset::read_csv(&data).map_err(|e| with_path(e, &data))?;
    let m = read_codebook(&codebook).map_err(|e| with_path(e, &codebook))?;
    let te = train(&ds, &m, &spec, derive_seed(seed, "train", 0))?;
    let eval_ds = match &test_data {
        Some(p) => Dataset::read_csv(p).map_err(|e| with_path(e, p))?,
        None => ds,
    };

    ctx.param("data", data.display().to_string());
    ctx.param("codebook", codebook.display().to_string());
    ctx.param("test-data", test_data.as_ref().map(|p| p.display().to_string()));
    ctx.param("seed", seed);
    ctx.param("mode", mode.to_string());
    ctx.param("learner", spec.kind.to_string());
    ctx.param("epochs", spec.epochs);

    if let Some(path) = file.resolve_opt(args.out_model.clone(), "out-model")? {
        te.write_json(&path)?;
        ctx.artifact("model", &path);
    }
    Ok(Prepared { te, eval_ds, seed, mode })
}

fn cmd_eval(args: EvalArgs, file: &FileConfig, ctx: &mut RunContext) -> Result<i32> {
    let out = file.resolve(args.out.clone(), "out", PathBuf::from("eval-report.json"))?;
    let p = prepare_pipeline(&args, file, ctx)?;
    let report = evaluate(&p.te, &p.eval_ds, p.mode)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serialization is infallible");
    text.push('\n');
    std::fs::write(&out, text)?;
    ctx.artifact("report", &out);
    println!(
        "accuracy: hamming {:.4}, scores-raw {:.4}, scores-normalized {:.4} ({} examples)",
        report.accuracy_hamming,
        report.accuracy_scores_raw,
        report.accuracy_scores_normalized,
        report.n_examples
    );
    println!("report -> {}", out.display());
    Ok(EXIT_OK)
}

fn cmd_attack(args: AttackArgs, file: &FileConfig, ctx: &mut RunContext) -> Result<i32> {
    let out = file.resolve(args.eval.out.clone(), "out", PathBuf::from("attack-report.json"))?;
    let out_csv = file.resolve_opt(args.out_csv.clone(), "out-csv")?;
    let epsilons_text = file.resolve(args.epsilons.clone(), "epsilons", "0,0.05,0.1,0.2".to_string())?;
    let epsilons = parse_epsilon_list(&epsilons_text)?;
    let steps = file.resolve(args.steps, "steps", 100)?;
    let step_size = file.resolve_opt(args.step_size, "step-size")?;
    let loss_name = file.resolve(args.loss.clone(), "loss", "cross-entropy".to_string())?;
    let random_start = file.resolve_flag(args.random_start, "random-start")?;

    let p = prepare_pipeline(&args.eval, file, ctx)?;
    let cfg = AttackConfig {
        epsilon: 0.0,
        steps,
        step_size,
        loss: parse_keyed::<LossKind>(&loss_name, "loss")?,
        random_start,
        seed: derive_seed(p.seed, "attack", 0),
        predict_mode: p.mode,
    };
    let report: SweepReport = pgd_sweep(&p.te, &p.eval_ds, &cfg, &epsilons)?;

    ctx.param("epsilons", epsilons.clone());
    ctx.param("steps", steps);
    ctx.param("loss", loss_name);
    ctx.param("random-start", random_start);

    let mut text = serde_json::to_string_pretty(&report).expect("report serialization is infallible");
    text.push('\n');
    std::fs::write(&out, text)?;
    ctx.artifact("report", &out);
    if let Some(path) = &out_csv {
        let mut csv = String::from("epsilon,adversarial_accuracy,successes\n");
        for row in &report.rows {
            csv.push_str(&format!("{},{},{}\n", row.epsilon, row.adversarial_accuracy, row.successes));
        }
        std::fs::write(path, csv)?;
        ctx.artifact("report-csv", path);
    }

    println!("clean accuracy: {:.4} ({} examples)", report.clean_accuracy, report.n_examples);
    for row in &report.rows {
        println!("epsilon {:>6}: adversarial accuracy {:.4}", row.epsilon, row.adversarial_accuracy);
    }
    println!("report -> {}", out.display());
    Ok(EXIT_OK)
}

fn execute(cli: Cli, invocation: Vec<String>) -> Result<i32> {
    if cli.deterministic {
        // The global pool can only be installed once per process; a
        // repeat install (tests, library reuse) keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    }
    let file = FileConfig::load(cli.config.as_deref())?;
    let command_name = match &cli.command {
        Command::Exhaustive(_) => "exhaustive",
        Command::Design(_) => "design",
        Command::Stats(_) => "stats",
        Command::Toy(_) => "toy",
        Command::Eval(_) => "eval",
        Command::Attack(_) => "attack",
    };
    let mut ctx = RunContext {
        command: command_name,
        invocation,
        deterministic: cli.deterministic,
        manifest_path: cli.manifest.clone(),
        parameters: serde_json::Map::new(),
        artifacts: Vec::new(),
    };
    let code = match cli.command {
        Command::Exhaustive(a) => cmd_exhaustive(a, &file, &mut ctx)?,
        Command::Design(a) => cmd_design(a, &file, &mut ctx)?,
        Command::Stats(a) => cmd_stats(a, &file, &mut ctx)?,
        Command::Toy(a) => cmd_toy(a, &file, &mut ctx)?,
        Command::Eval(a) => cmd_eval(a, &file, &mut ctx)?,
        Command::Attack(a) => cmd_attack(a, &file, &mut ctx)?,
    };
    ctx.write_manifest()?;
    Ok(code)
}

/// Parses the process arguments, runs the selected subcommand, and
/// returns the exit code. Errors print to stderr and map to the
/// validation exit code; solver outcomes map through their status.
pub fn run_from_args() -> i32 {
    let invocation: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match execute(cli, invocation) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}
