use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use dlbounds::bounds::{self, BoundInputs, Family, Variant};
use dlbounds::coders::{exact_ksparse, greedy_ksparse, l1_solve, CodingResult};
use dlbounds::coherence::{babel, babel_bruteforce};
use dlbounds::dictionary::{me_norm, validate_dictionary};
use dlbounds::experiments::{
    gengap_run, mc_babel, nonlipschitz_demo, write_records_csv, FastGrid, GengapConfig, LOG_BASE_NOTE,
};
use dlbounds::io;
use dlbounds::kernel::{kernel_greedy_ksparse, Kernel, KernelDictionary};
use dlbounds::learn::{learn_dictionary, synth_sample, Coder, Init, LearnerConfig, Update};
use dlbounds::rng::substream_seed;
use dlbounds::{Dictionary, Signal, SparsityConstraint};

mod manifest;
mod synth;

use manifest::{file_digest, sha256_hex, RunManifest};
use synth::SynthSpec;

type CliResult<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

#[derive(Parser, Debug)]
#[command(name = "dlbounds", version, about = "Dictionary geometry, sparse coding and generalization-bound tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOpts {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output location (a directory; a file for `learn`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Babel function of a dictionary.
    Babel(BabelArgs),
    /// Sparse-code signals against a dictionary.
    Code(CodeArgs),
    /// Kernel greedy pursuit on pre-image points.
    Kcode(KcodeArgs),
    /// Evaluate a generalization bound.
    Bounds(BoundsArgs),
    /// Learn a dictionary from data or a synthetic source.
    Learn(LearnArgs),
    /// Monte Carlo tail of the Babel function of random dictionaries.
    McBabel(McBabelArgs),
    /// Measured generalization gaps against bound calculators.
    Gengap(GengapArgs),
    /// Two nearby dictionaries with very different errors on one signal.
    DemoNonlipschitz(DemoArgs),
    /// Re-execute a run from its manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BabelArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    k: usize,
    /// Enumerate subsets instead of the per-atom sort.
    #[arg(long)]
    brute: bool,
    #[command(flatten)]
    #[serde(flatten)]
    opts: RunOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(group(ArgGroup::new("constraint").required(true).args(["k", "lambda"])))]
pub struct CodeArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Exhaustive support search instead of greedy pursuit.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    #[serde(flatten)]
    opts: RunOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KcodeArgs {
    /// linear, gaussian:SIGMA or poly:DEG
    #[arg(long)]
    kernel: String,
    /// Pre-image points, one per line.
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    #[serde(flatten)]
    opts: RunOpts,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Maurer,
    Slow,
    Fast,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Maurer => Variant::Maurer,
            VariantArg::Slow => Variant::Slow,
            VariantArg::Fast => Variant::Fast,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    L1,
    Ksparse,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    m: f64,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    big_k: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    opts: RunOpts,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    SampleAtoms,
    RandomSphere,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).args(["data", "synth"])))]
#[command(group(ArgGroup::new("constraint").required(true).args(["k", "lambda"])))]
pub struct LearnArgs {
    /// Training signals, one per line.
    #[arg(long)]
    data: Option<PathBuf>,
    /// e.g. ground:n=8,p=12,k=2,sigma=0,m=500 or sphere:n=8,m=500
    #[arg(long)]
    synth: Option<String>,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 20)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = InitArg::SampleAtoms)]
    init: InitArg,
    /// Greedy pursuit in the coding step instead of exhaustive search.
    #[arg(long)]
    greedy: bool,
    #[command(flatten)]
    #[serde(flatten)]
    opts: RunOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McBabelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// One or more orders, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[command(flatten)]
    #[serde(flatten)]
    opts: RunOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(group(ArgGroup::new("constraint").required(true).args(["k", "lambda"])))]
pub struct GengapArgs {
    /// Signal source, e.g. ground:n=8,p=12,k=2,sigma=0
    #[arg(long)]
    synth: String,
    /// Atoms to learn (defaults to the source's p, or n for sphere sources).
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 20)]
    iters: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [128, 256, 512, 1024, 2048, 4096, 8192])]
    m_grid: Vec<usize>,
    #[arg(long, default_value_t = 20_000)]
    test_size: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [VariantArg::Slow, VariantArg::Fast, VariantArg::Maurer])]
    variants: Vec<VariantArg>,
    /// Confidence exponent of the bounds.
    #[arg(long, default_value_t = 3.0)]
    x: f64,
    #[command(flatten)]
    #[serde(flatten)]
    opts: RunOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    /// Use this unit signal instead of searching for one.
    #[arg(long)]
    q: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    opts: RunOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Overrides the recorded output location.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the recorded thread count.
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Babel(_) => "babel",
            Command::Code(_) => "code",
            Command::Kcode(_) => "kcode",
            Command::Bounds(_) => "bounds",
            Command::Learn(_) => "learn",
            Command::McBabel(_) => "mc-babel",
            Command::Gengap(_) => "gengap",
            Command::DemoNonlipschitz(_) => "demo-nonlipschitz",
            Command::Replay(_) => "replay",
        }
    }

    fn opts_mut(&mut self) -> Option<&mut RunOpts> {
        match self {
            Command::Babel(a) => Some(&mut a.opts),
            Command::Code(a) => Some(&mut a.opts),
            Command::Kcode(a) => Some(&mut a.opts),
            Command::Bounds(a) => Some(&mut a.opts),
            Command::Learn(a) => Some(&mut a.opts),
            Command::McBabel(a) => Some(&mut a.opts),
            Command::Gengap(a) => Some(&mut a.opts),
            Command::DemoNonlipschitz(a) => Some(&mut a.opts),
            Command::Replay(_) => None,
        }
    }

    fn opts(&self) -> Option<RunOpts> {
        self.clone().opts_mut().map(|o| o.clone())
    }
}

/// Everything a run produces, before it is written anywhere.
#[derive(Default)]
struct Output {
    stdout: Vec<u8>,
    /// Files written under `--out`, by name.
    files: Vec<(String, Vec<u8>)>,
    /// Printed to stderr when there is no `--out`.
    side: Option<String>,
    inputs: Vec<PathBuf>,
}

/// Formats with 15 significant digits, trailing zeros removed.
fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let decimals = 14 - v.abs().log10().floor() as i32;
    if (0..=20).contains(&decimals) {
        let s = format!("{:.*}", decimals as usize, v);
        if s.contains('.') {
            return s.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        return s;
    }
    format!("{v:.14e}")
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    n: usize,
    p: usize,
    gamma: f64,
    normalized: bool,
}

/// Reads `n` lines of `p` values; a sibling `.json` sidecar, when present,
/// supplies `gamma` and the normalized flag, which are then validated.
fn load_dictionary(path: &Path, inputs: &mut Vec<PathBuf>) -> CliResult<Dictionary> {
    inputs.push(path.to_path_buf());
    let atoms = io::read_matrix_file(path)?;
    let sidecar_path = path.with_extension("json");
    if sidecar_path.exists() {
        inputs.push(sidecar_path.clone());
        let meta: Sidecar = serde_json::from_slice(&std::fs::read(&sidecar_path)?)?;
        if meta.n != atoms.nrows() || meta.p != atoms.ncols() {
            return Err(format!(
                "sidecar says {}x{}, file holds {}x{}",
                meta.n,
                meta.p,
                atoms.nrows(),
                atoms.ncols()
            )
            .into());
        }
        let d = Dictionary::new(atoms, meta.gamma)?;
        if let Some(v) = validate_dictionary(&d, meta.normalized).first() {
            return Err(format!("invalid dictionary {}: {v}", path.display()).into());
        }
        return Ok(d);
    }
    let gamma = me_norm(&atoms)?.max(1.0);
    Ok(Dictionary::new(atoms, gamma)?)
}

fn load_signals(path: &Path, inputs: &mut Vec<PathBuf>) -> CliResult<Vec<Signal>> {
    inputs.push(path.to_path_buf());
    Ok(io::read_signals(path)?)
}

fn codes_csv(codes: &[CodingResult], p: usize) -> CliResult<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["error".to_string()];
    header.extend((1..=p).map(|i| format!("a{i}")));
    wtr.write_record(&header)?;
    for c in codes {
        let mut row = vec![format!("{:?}", c.error)];
        row.extend(c.coeffs.values().iter().map(|v| format!("{v:?}")));
        wtr.write_record(&row)?;
    }
    Ok(wtr.into_inner().map_err(|e| e.to_string())?)
}

fn json_bytes<T: Serialize>(v: &T) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn constraint_of(k: Option<usize>, lambda: Option<f64>) -> CliResult<SparsityConstraint> {
    match (k, lambda) {
        (Some(k), None) => Ok(SparsityConstraint::HardK(k)),
        (None, Some(l)) => Ok(SparsityConstraint::L1Ball(l)),
        _ => Err("exactly one of --k and --lambda is required".into()),
    }
}

fn execute(cmd: &Command) -> CliResult<Output> {
    let mut out = Output::default();
    match cmd {
        Command::Babel(a) => {
            let d = load_dictionary(&a.dict, &mut out.inputs)?;
            let v = if a.brute { babel_bruteforce(&d, a.k)? } else { babel(&d, a.k)? };
            out.stdout = format!("{}\n", fmt_sig(v.value)).into_bytes();
            out.files.push(("babel.json".into(), json_bytes(&v)?));
        }
        Command::Code(a) => {
            let d = load_dictionary(&a.dict, &mut out.inputs)?;
            let signals = load_signals(&a.signal, &mut out.inputs)?;
            let constraint = constraint_of(a.k, a.lambda)?;
            let codes = signals
                .iter()
                .map(|x| match constraint {
                    SparsityConstraint::HardK(k) if a.exact => exact_ksparse(&d, x, k),
                    SparsityConstraint::HardK(k) => greedy_ksparse(&d, x, k),
                    SparsityConstraint::L1Ball(l) => l1_solve(&d, x, l),
                })
                .collect::<dlbounds::Result<Vec<_>>>()?;
            out.stdout = codes_csv(&codes, d.p())?;
            out.files.push(("codes.csv".into(), out.stdout.clone()));
        }
        Command::Kcode(a) => {
            let kernel: Kernel = a.kernel.parse()?;
            out.inputs.push(a.dict.clone());
            let points = io::read_rows(&a.dict)?;
            let signals = load_signals(&a.signal, &mut out.inputs)?;
            let kd = KernelDictionary::new(points, &kernel)?;
            let codes = signals
                .iter()
                .map(|x| kernel_greedy_ksparse(x.values().as_slice(), &kd, a.k, &kernel))
                .collect::<dlbounds::Result<Vec<_>>>()?;
            out.stdout = codes_csv(&codes, kd.p())?;
            out.files.push(("kcodes.csv".into(), out.stdout.clone()));
        }
        Command::Bounds(a) => {
            let inputs = BoundInputs {
                k: a.k,
                delta: a.delta,
                lambda: a.lambda,
                big_k: a.big_k,
                alpha: a.alpha,
                ..BoundInputs::new(a.n, a.p, a.m, a.x)
            };
            let family = match a.family {
                FamilyArg::L1 => Family::L1,
                FamilyArg::Ksparse => Family::Ksparse,
            };
            let report = bounds::generalization_bound(&inputs, family, a.variant.into())?;
            out.stdout = json_bytes(&report)?;
            out.files.push(("bounds.json".into(), out.stdout.clone()));
        }
        Command::Learn(a) => {
            let samples = match (&a.data, &a.synth) {
                (Some(path), None) => load_signals(path, &mut out.inputs)?,
                (None, Some(spec)) => {
                    let spec: SynthSpec = spec.parse()?;
                    let m = spec.m().ok_or("synthetic learning needs m= in the --synth spec")?;
                    synth_sample(&spec.source(a.opts.seed)?, m)?
                }
                _ => return Err("exactly one of --data and --synth is required".into()),
            };
            let config = LearnerConfig {
                p: a.p,
                constraint: constraint_of(a.k, a.lambda)?,
                iterations: a.iters,
                seed: substream_seed(a.opts.seed, 0),
                init: match a.init {
                    InitArg::SampleAtoms => Init::SampleAtoms,
                    InitArg::RandomSphere => Init::RandomSphere,
                },
                coder: if a.greedy { Coder::Greedy } else { Coder::Exact },
                update: Update::default(),
            };
            let learned = learn_dictionary(&samples, &config)?;
            let d = &learned.dictionary;
            let mut dict_csv = Vec::new();
            io::write_matrix(d.atoms(), &mut dict_csv)?;
            let summary = serde_json::json!({
                "final_error": learned.trace.last(),
                "trace": learned.trace,
                "config": config,
            });
            let sidecar = Sidecar { n: d.n(), p: d.p(), gamma: 1.0, normalized: true };
            out.files.push(("dictionary".into(), dict_csv.clone()));
            out.files.push(("sidecar".into(), json_bytes(&sidecar)?));
            if a.opts.out.is_some() {
                out.stdout = json_bytes(&summary)?;
            } else {
                out.stdout = dict_csv;
                out.side = Some(serde_json::to_string(&summary)?);
            }
        }
        Command::McBabel(a) => {
            let result = mc_babel(a.n, a.p, &a.k, a.trials, a.threshold, a.opts.seed)?;
            let mut csv_bytes = Vec::new();
            write_records_csv(&result.records, &mut csv_bytes)?;
            let summary = serde_json::json!({
                "threshold": result.threshold,
                "trials": result.trials,
                "tails": result.tails,
                "consistent_99": result.tails.iter().map(|t| t.consistent_at(0.99)).collect::<Vec<_>>(),
                "log_base": LOG_BASE_NOTE,
            });
            out.files.push(("mc_babel.csv".into(), csv_bytes.clone()));
            out.files.push(("summary.json".into(), json_bytes(&summary)?));
            if a.opts.out.is_some() {
                out.stdout = json_bytes(&summary)?;
            } else {
                out.stdout = csv_bytes;
                out.side = Some(serde_json::to_string(&summary)?);
            }
        }
        Command::Gengap(a) => {
            let spec: SynthSpec = a.synth.parse()?;
            let p = match (a.p, &spec) {
                (Some(p), _) => p,
                (None, SynthSpec::Ground { p, .. }) => *p,
                (None, SynthSpec::Sphere { n, .. }) => *n,
            };
            let config = GengapConfig {
                source: spec.source(a.opts.seed)?,
                learner: LearnerConfig {
                    p,
                    constraint: constraint_of(a.k, a.lambda)?,
                    iterations: a.iters,
                    seed: 0,
                    init: Init::SampleAtoms,
                    coder: Coder::Exact,
                    update: Update::default(),
                },
                m_grid: a.m_grid.clone(),
                test_size: a.test_size,
                variants: a.variants.iter().map(|&v| v.into()).collect(),
                x: a.x,
                fast_grid: FastGrid::default(),
                seed: a.opts.seed,
            };
            let result = gengap_run(&config)?;
            let mut csv_bytes = Vec::new();
            write_records_csv(&result.records, &mut csv_bytes)?;
            let detail = serde_json::json!({
                "rows": result.rows,
                "warnings": result.warnings,
                "log_base": LOG_BASE_NOTE,
            });
            out.files.push(("gengap.csv".into(), csv_bytes.clone()));
            out.files.push(("records.json".into(), json_bytes(&detail)?));
            let summary: Vec<_> = result
                .rows
                .iter()
                .map(|r| serde_json::json!({"m": r.m, "train": r.train_error, "test": r.test_error, "gap": r.gap(), "gap_se": r.gap_se}))
                .collect();
            if a.opts.out.is_some() {
                out.stdout = json_bytes(&summary)?;
            } else {
                out.stdout = csv_bytes;
                out.side = Some(serde_json::to_string(&summary)?);
            }
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::DemoNonlipschitz(a) => {
            let q = match &a.q {
                Some(path) => {
                    let mut signals = load_signals(path, &mut out.inputs)?;
                    if signals.len() != 1 {
                        return Err("--q file must hold exactly one signal".into());
                    }
                    Some(signals.remove(0))
                }
                None => None,
            };
            let r = nonlipschitz_demo(a.n, a.p, a.k, a.eps, a.opts.seed, q)?;
            let rows = |d: &Dictionary| -> Vec<Vec<f64>> { d.atoms().row_iter().map(|r| r.iter().copied().collect()).collect() };
            let report = serde_json::json!({
                "h_d": r.h_d,
                "h_d_prime": r.h_d_prime,
                "distance": r.distance,
                "ratio": r.ratio,
                "searched": r.searched,
                "q": r.q.values().as_slice(),
                "d": rows(&r.d),
                "d_prime": rows(&r.d_prime),
            });
            out.stdout = json_bytes(&report)?;
            out.files.push(("demo.json".into(), out.stdout.clone()));
        }
        Command::Replay(_) => return Err("a manifest cannot record a replay".into()),
    }
    Ok(out)
}

fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn run(cmd: Command) -> CliResult<()> {
    let opts = cmd.opts().ok_or("nothing to run")?;
    let output = match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build()?;
            pool.install(|| execute(&cmd))?
        }
        None => execute(&cmd)?,
    };

    let mut input_digests = BTreeMap::new();
    for path in &output.inputs {
        input_digests.insert(path.display().to_string(), file_digest(path)?);
    }
    let mut output_digests = BTreeMap::new();
    let manifest_path = match (&cmd, &opts.out) {
        (Command::Learn(_), Some(dict_path)) => {
            for (name, bytes) in &output.files {
                let path = match name.as_str() {
                    "dictionary" => dict_path.clone(),
                    _ => dict_path.with_extension("json"),
                };
                std::fs::write(&path, bytes)?;
                output_digests.insert(path.display().to_string(), sha256_hex(bytes));
            }
            Some(dict_path.with_extension("manifest.json"))
        }
        (_, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            for (name, bytes) in &output.files {
                std::fs::write(dir.join(name), bytes)?;
                output_digests.insert(name.clone(), sha256_hex(bytes));
            }
            Some(dir.join("manifest.json"))
        }
        (_, None) => None,
    };

    let manifest = RunManifest {
        subcommand: cmd.name().to_string(),
        command: cmd.clone(),
        seed: opts.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        input_digests,
        output_digests,
        log_base: LOG_BASE_NOTE.to_string(),
        unix_time: unix_time(),
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    lock.write_all(&output.stdout)?;
    lock.flush()?;
    match manifest_path {
        Some(path) => std::fs::write(path, json_bytes(&manifest)?)?,
        None => {
            if let Some(side) = output.side {
                eprintln!("{side}");
            }
            eprintln!("{}", serde_json::to_string(&manifest)?);
        }
    }
    Ok(())
}

fn replay(args: &ReplayArgs) -> CliResult<()> {
    let manifest: RunManifest = serde_json::from_slice(&std::fs::read(&args.manifest)?)?;
    for (path, digest) in &manifest.input_digests {
        let now = file_digest(Path::new(path)).map_err(|e| format!("input {path}: {e}"))?;
        if &now != digest {
            return Err(format!("input {path} changed since the recorded run").into());
        }
    }
    let mut cmd = manifest.command;
    let opts = cmd.opts_mut().ok_or("manifest records no runnable command")?;
    opts.out = args.out.clone();
    opts.threads = args.threads.or(opts.threads);
    run(cmd)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Replay(args) => replay(args),
        other => run(other.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
