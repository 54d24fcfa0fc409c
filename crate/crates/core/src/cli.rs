//! Command-line front end. Every subcommand emits one JSON document and maps
//! its verdict to an exit code: 0 pass, 1 check failed, 2 bad input, 3 solver
//! failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::definetti::{construct_mixture, reduce_state, run_trials, trace_distance, SymDensity, TrialConfig, TrialState};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::qmaxcut::{gap_experiment, gap_non_increasing, GapConfig, WeightedGraph};
use crate::quantize::{sandwich_bounds, EigConfig, HermitianPoly, RoundStrategy, RoundingConfig, SandwichConfig};
use crate::symspace::{
    definetti_bound, exp_hilbert_dim, homogeneous_ratio_bound, ssyt_count, sym_dim, two_row_dim, BoundParams, BoundVariant,
    MultiIndex, Partition,
};
use crate::coherent::{coherent_vector, ProjectivePoint};
use crate::{C64, DEFAULT_DENSE_THRESHOLD};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hsos", version, about = "Hermitian sum-of-squares bounds, de Finetti checks and Quantum Max-d-Cut experiments")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. The seed fixes all randomness.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Solver tolerance (Lanczos residual, pass/fail slack).
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Dimension above which operators stay matrix-free.
    #[arg(long, global = true, default_value_t = DEFAULT_DENSE_THRESHOLD)]
    pub dense_threshold: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symmetric-subspace dimensions and de Finetti bound values.
    Dims(DimsArgs),
    /// Sandwich bounds for a polynomial file.
    Bound(BoundArgs),
    /// Randomized de Finetti verification.
    Definetti(DefinettiArgs),
    /// Quantum Max-d-Cut gap experiment on a graph file.
    Qmaxcut(QmaxcutArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DimsArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    /// Marginal size for the bound calculators.
    #[arg(long)]
    pub k: Option<usize>,
    /// Almost-product rank.
    #[arg(long)]
    pub r: Option<usize>,
    /// Number of registers for the multi-symmetric bound.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Extra partition to count tableaux for, e.g. `3,1`.
    #[arg(long, value_delimiter = ',')]
    pub partition: Option<Vec<usize>>,
    /// Radon–Nikodym defect for the approximate-POVM bound.
    #[arg(long)]
    pub radon: Option<f64>,
    /// POVM incompleteness for the approximate-POVM bound.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Sample,
    Ascend,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    /// PolyFile JSON.
    #[arg(long)]
    pub poly: PathBuf,
    /// Quantization level.
    #[arg(long)]
    pub n: usize,
    /// Round the top Q eigenvector to a point.
    #[arg(long)]
    pub round: bool,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Ascend)]
    pub strategy: StrategyArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Standard,
    Multisym,
    ExactRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Mixed,
    Pure,
}

#[derive(Debug, Clone, Args)]
pub struct DefinettiArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Defaults to `standard` for one register, `multisym` otherwise.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = StateArg::Mixed)]
    pub state: StateArg,
}

#[derive(Debug, Clone, Args)]
pub struct QmaxcutArgs {
    /// Edge list, one `u v weight` per line.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Cloud sizes, e.g. `1,2,3,4`.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub k: Vec<usize>,
    /// Vertex count when isolated trailing vertices matter.
    #[arg(long)]
    pub vertices: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
}

/// One term of a [`PolyFile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// JSON polynomial `Σ c_{αβ} z̄^α z^β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub d: usize,
    pub k: usize,
    pub terms: Vec<PolyTerm>,
}

impl PolyFile {
    pub fn from_poly(f: &HermitianPoly) -> Self {
        PolyFile {
            d: f.d(),
            k: f.k(),
            terms: f
                .terms()
                .map(|(a, b, c)| PolyTerm { alpha: a.entries().to_vec(), beta: b.entries().to_vec(), re: c.re, im: c.im })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("poly file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Validates lengths, degrees and Hermitian closure.
    pub fn to_poly(&self) -> Result<HermitianPoly> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.alpha.len() != self.d || t.beta.len() != self.d {
                return Err(Error::Parse(format!(
                    "term (alpha={:?}, beta={:?}) does not have {} entries",
                    t.alpha, t.beta, self.d
                )));
            }
            terms.push((MultiIndex::new(t.alpha.clone()), MultiIndex::new(t.beta.clone()), C64::new(t.re, t.im)));
        }
        HermitianPoly::new(self.d, self.k, terms)
    }
}

/// JSON document plus verdict.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: Value,
    pub pass: bool,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Dims(a) => cmd_dims(a),
        Command::Bound(a) => cmd_bound(a, &cli.run),
        Command::Definetti(a) => cmd_definetti(a, &cli.run),
        Command::Qmaxcut(a) => cmd_qmaxcut(a, &cli.run),
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } | Error::CapacityExceeded { .. } | Error::NonFiniteDensity | Error::ZeroProjection => {
            EXIT_SOLVER
        }
        _ => EXIT_INPUT,
    }
}

/// Render pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Parse `args`, run, write output; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let text = render(&outcome.json);
            let written = match &cli.run.out {
                Some(path) => std::fs::write(path, text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            if outcome.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn cmd_dims(a: &DimsArgs) -> Result<Outcome> {
    let mut out = Map::new();
    out.insert("sym_dim".into(), json!(sym_dim(a.d, a.n)?));
    if a.d >= 2 {
        let rows: Vec<Value> = (0..=a.n / 2)
            .map(|i| Ok(json!({ "i": i, "dim": two_row_dim(a.d, a.n, i)? as u64 })))
            .collect::<Result<_>>()?;
        out.insert("two_row_dims".into(), Value::Array(rows));
    }
    if let Some(parts) = &a.partition {
        let shape = Partition::new(parts.clone())?;
        out.insert("ssyt_count".into(), json!(ssyt_count(&shape, a.d)?));
    }
    if let Some(r) = a.r {
        out.insert("exp_dim".into(), json!(exp_hilbert_dim(a.d, a.n, r)? as u64));
    }
    if let Some(k) = a.k {
        let params = BoundParams { d: a.d, n: a.n, k, m: a.m, r: a.r.unwrap_or(0), ..Default::default() };
        out.insert("definetti_bound".into(), json!(definetti_bound(&params, BoundVariant::Standard)?));
        out.insert("exact_ratio_bound".into(), json!(definetti_bound(&params, BoundVariant::ExactRatio)?));
        if a.m > 1 {
            out.insert("multisym_bound".into(), json!(definetti_bound(&params, BoundVariant::MultiSym)?));
        }
        if a.r.is_some() {
            out.insert("exponential_bound".into(), json!(definetti_bound(&params, BoundVariant::Exponential)?));
        }
        let ratio = homogeneous_ratio_bound(sym_dim(a.d, a.n - k)? as u128, sym_dim(a.d, a.n)? as u128)?;
        out.insert("homogeneous_ratio_bound".into(), serde_json::to_value(ratio).expect("plain struct"));
    }
    if let Some(radon) = a.radon {
        let params = BoundParams { radon, delta: a.delta, ..Default::default() };
        out.insert("approx_povm_bound".into(), json!(definetti_bound(&params, BoundVariant::ApproxPovm)?));
    }
    Ok(Outcome { json: Value::Object(out), pass: true })
}

fn cmd_bound(a: &BoundArgs, run: &RunConfig) -> Result<Outcome> {
    let f = PolyFile::read(&a.poly)?.to_poly()?;
    let eig = EigConfig { tol: run.tol, seed: run.seed, dense_threshold: run.dense_threshold };
    let rounding = a.round.then(|| RoundingConfig {
        strategy: match a.strategy {
            StrategyArg::Sample => RoundStrategy::Sample,
            StrategyArg::Ascend => RoundStrategy::Ascend,
        },
        samples: a.samples,
        ..Default::default()
    });
    let report = sandwich_bounds(&f, a.n, &SandwichConfig { eig, rounding })?;
    let pass = report.lower <= report.upper + run.tol.max(1e-12)
        && report.rounded_value.is_none_or(|v| v <= report.upper + run.tol.max(1e-12));
    let mut json = serde_json::to_value(&report).expect("plain struct");
    json["gap"] = json!(report.gap());
    Ok(Outcome { json, pass })
}

fn cmd_definetti(a: &DefinettiArgs, run: &RunConfig) -> Result<Outcome> {
    let variant = match a.variant {
        Some(VariantArg::Standard) => BoundVariant::Standard,
        Some(VariantArg::Multisym) => BoundVariant::MultiSym,
        Some(VariantArg::ExactRatio) => BoundVariant::ExactRatio,
        None if a.m > 1 => BoundVariant::MultiSym,
        None => BoundVariant::Standard,
    };
    if a.k > a.n {
        return Err(Error::invalid(format!("k={} exceeds n={}", a.k, a.n)));
    }
    let cfg = TrialConfig {
        d: a.d,
        n: a.n,
        k: a.k,
        m: a.m,
        trials: a.trials,
        variant,
        state: match a.state {
            StateArg::Mixed => TrialState::Mixed,
            StateArg::Pure => TrialState::Pure,
        },
        seed: run.seed,
    };
    let reports = run_trials(&cfg, Exec::default())?;
    let params = BoundParams { d: a.d, n: a.n, k: a.k, m: a.m, ..Default::default() };
    let bound = definetti_bound(&params, variant)?;
    let distances: Vec<f64> = reports.iter().map(|r| r.distance).collect();
    let passes = reports.iter().filter(|r| r.pass).count();
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    let mut json = json!({
        "d": a.d,
        "n": a.n,
        "k": a.k,
        "m": a.m,
        "variant": variant,
        "bound": bound,
        "trials": a.trials,
        "distances": distances,
        "max_distance": max_distance,
        "passes": passes,
        "failures": reports.len() - passes,
    });
    let mut pass = passes == reports.len();
    if a.m == 1 {
        let mixed = special_distance(&SymDensity::maximally_mixed(a.d, a.n)?, a.k)?;
        let coherent = SymDensity::pure(&coherent_vector(&ProjectivePoint::basis(a.d.max(1), 0), a.n)?);
        let coherent = special_distance(&coherent, a.k)?;
        pass &= mixed <= bound + run.tol && coherent <= bound + run.tol;
        json["special"] = json!({ "maximally_mixed": mixed, "coherent": coherent });
    }
    Ok(Outcome { json, pass })
}

fn special_distance(rho: &SymDensity, k: usize) -> Result<f64> {
    trace_distance(&reduce_state(rho, k)?, &construct_mixture(rho, k)?)
}

fn cmd_qmaxcut(a: &QmaxcutArgs, run: &RunConfig) -> Result<Outcome> {
    let g = WeightedGraph::read(&a.graph, a.vertices)?;
    if a.k.is_empty() {
        return Err(Error::invalid("need at least one cloud size"));
    }
    let cfg = GapConfig { restarts: a.restarts, tol: run.tol, exec: Exec::default() };
    let reports = gap_experiment(&g, a.d, &a.k, run.seed, &cfg)?;
    let contained = reports.iter().all(|r| r.contained);
    let json = json!({
        "d": a.d,
        "vertices": g.vertices(),
        "edges": g.edges().len(),
        "reports": reports,
        "all_contained": contained,
        "gap_non_increasing": gap_non_increasing(&reports, 1e-6),
    });
    Ok(Outcome { json, pass: contained })
}
