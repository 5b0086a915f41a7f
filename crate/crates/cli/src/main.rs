//! Command-line front end: bounds tables, codec measurements, retransmission
//! analytics, Monte-Carlo runs and figure reproduction, all as thin shells
//! over the library. Exit codes: 0 success, 2 usage error, 3 domain error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ackset::arq::{
    self, grid_limit, grid_step, mean_failure_static, optimize_message_length, ArqError,
    ArqParams, Downlink, FadingChannel, SchemeModel,
};
use ackset::bounds::{b_lower_fp_fn, BoundQuery, BoundsError};
use ackset::codec::{
    bloom, BloomConfig, CodecError, EnumerativeConfig, HashConcatConfig, LeConfig,
    NaiveConcatConfig, Scheme, SchemeConfig,
};
use ackset::hashing::derive_seed;
use ackset::sim::figures::{message_length_rows, reproduce, write_csv, RunManifest, FIGURES};
use ackset::sim::{
    measure_le_retry_rate, run_arq_trial, run_fp_trial, Arrival, ArqScheme, ArqSimConfig,
    BudgetKind, FpSimConfig, SimError,
};

#[derive(Parser)]
#[command(name = "ackset", version, about = "Massive-access acknowledgment feedback toolkit")]
struct Cli {
    /// Flat key-value JSON config file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Message-length bounds and scheme lengths over a K sweep (CSV).
    Bounds(BoundsArgs),
    /// Encode/decode one scheme and measure its error rates.
    Codec(CodecArgs),
    /// Closed-form retransmission analytics (CSV sweeps or a single point).
    Arq(ArqArgs),
    /// Monte-Carlo runs with the real codecs in the loop.
    Simulate(SimulateArgs),
    /// Regenerate a figure's data set (CSV plus run manifest).
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct BoundsArgs {
    /// Population size N.
    #[arg(long)]
    n: Option<u128>,
    #[arg(long)]
    k_min: Option<u64>,
    #[arg(long)]
    k_max: Option<u64>,
    #[arg(long)]
    k_step: Option<u64>,
    /// Target false-positive probabilities (repeatable).
    #[arg(long = "eps-fp")]
    eps_fp: Vec<f64>,
    /// Optional false-negative target; adds the combined lower bound rows.
    #[arg(long = "eps-fn")]
    eps_fn: Option<f64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    n: Option<u128>,
    /// Decoded-set cardinality per encode.
    #[arg(long)]
    k: Option<u64>,
    /// Provisioned maximum cardinality K'.
    #[arg(long)]
    k_max: Option<u64>,
    #[arg(long = "eps-fp")]
    eps_fp: Option<f64>,
    /// Message bits (Bloom filter size or concatenation budget).
    #[arg(long)]
    bits: Option<u64>,
    /// Bloom hash count override.
    #[arg(long)]
    hashes: Option<u32>,
    /// Total non-member probes.
    #[arg(long)]
    probes: Option<u64>,
    /// Independent encodes the probes are spread over.
    #[arg(long)]
    encodes: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, ValueEnum)]
enum SchemeArg {
    Le,
    Bloom,
    Hashconcat,
    Enumerative,
    Naiveconcat,
}

impl SchemeArg {
    fn as_scheme(self) -> Scheme {
        match self {
            SchemeArg::Le => Scheme::LinearEquations,
            SchemeArg::Bloom => Scheme::Bloom,
            SchemeArg::Hashconcat => Scheme::HashConcat,
            SchemeArg::Enumerative => Scheme::Enumerative,
            SchemeArg::Naiveconcat => Scheme::NaiveConcat,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ModelArg {
    Lb,
    Le,
    Ef,
    Concat,
}

#[derive(Copy, Clone, ValueEnum)]
enum ArqSweep {
    Dl,
    Snr,
    Bits,
    Point,
}

#[derive(Args)]
struct ArqArgs {
    #[arg(long, value_enum)]
    sweep: Option<ArqSweep>,
    #[arg(long = "eps-ul")]
    eps_ul: Option<f64>,
    #[arg(long = "eps-dl")]
    eps_dl: Option<f64>,
    #[arg(long = "eps-fp")]
    eps_fp: Option<f64>,
    #[arg(long = "eps-fn")]
    eps_fn: Option<f64>,
    #[arg(long)]
    rounds: Option<u32>,
    /// Target failure probability: the point mode also reports the round
    /// count required to reach it.
    #[arg(long)]
    target_fail: Option<f64>,
    /// Mean decoded-user count for the optimizing sweeps.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<u128>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    antennas: Option<u32>,
    #[arg(long)]
    symbols: Option<u32>,
    /// Analytic scheme model for the snr/bits sweeps.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum SimMode {
    Fp,
    Arq,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    mode: Option<SimMode>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    n: Option<u128>,
    /// Fixed decoded-set cardinality (mutually exclusive with --lambda).
    #[arg(long)]
    k: Option<u64>,
    /// Poisson mean for the decoded-set cardinality.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "eps-fp")]
    eps_fp: Option<f64>,
    #[arg(long = "eps-ul")]
    eps_ul: Option<f64>,
    #[arg(long = "eps-dl")]
    eps_dl: Option<f64>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    antennas: Option<u32>,
    #[arg(long)]
    symbols: Option<u32>,
    /// Payload budget in bits; selects the budgeted per-round codecs.
    #[arg(long)]
    bits: Option<u64>,
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    probes: Option<u64>,
    #[arg(long)]
    encodes: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Figure id (fig1, fig3a, fig3b, fig4, fig5a, fig5b, fig6) or "all".
    #[arg(long)]
    figure: String,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Monte-Carlo trials per simulated point (figures with markers).
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// Error handling and config-file merging
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<ArqError> for CliError {
    fn from(e: ArqError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::UnknownFigure(f) => CliError::Usage(format!("unknown figure '{f}'")),
            SimError::Io(e) => CliError::Other(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

/// Flat key-value JSON config; keys are the long flag names.
struct FileCfg(serde_json::Map<String, serde_json::Value>);

impl FileCfg {
    fn load(path: &Option<PathBuf>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(FileCfg(Default::default())) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        match serde_json::from_str::<serde_json::Value>(&text) {
            Ok(serde_json::Value::Object(map)) => Ok(FileCfg(map)),
            Ok(_) => Err(CliError::Usage("config file must be a JSON object".into())),
            Err(e) => Err(CliError::Usage(format!("config parse error: {e}"))),
        }
    }

    fn f64(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(|v| v.as_f64())
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.0.get(key).and_then(|v| v.as_u64())
    }

    fn u32(&self, key: &str) -> Option<u32> {
        self.u64(key).map(|v| v as u32)
    }

    fn u128(&self, key: &str) -> Option<u128> {
        self.0.get(key).and_then(|v| v.as_u64().map(u128::from))
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn emit_csv_or_stdout(
    out: &Option<PathBuf>,
    header: &[&str],
    rows: &[Vec<String>],
    manifest: Option<RunManifest>,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_csv(path, header, rows).map_err(CliError::from)?;
            if let Some(m) = manifest {
                m.write_beside(path).map_err(CliError::from)?;
            }
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let mut emit = |line: &str| -> Result<(), CliError> {
                match writeln!(lock, "{line}") {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {
                        std::process::exit(0) // downstream closed the pipe
                    }
                    other => other.map_err(CliError::from),
                }
            };
            emit(&header.join(","))?;
            for row in rows {
                emit(&row.join(","))?;
            }
            Ok(())
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6e}")
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_bounds(args: &BoundsArgs, file: &FileCfg) -> Result<(), CliError> {
    let n = pick(args.n, file.u128("n"), 1u128 << 32);
    let k_min = pick(args.k_min, file.u64("k-min"), 10);
    let k_max = pick(args.k_max, file.u64("k-max"), 300);
    let k_step = pick(args.k_step, file.u64("k-step"), 10).max(1);
    if k_min == 0 || k_min > k_max {
        return Err(CliError::Usage(format!("bad K range {k_min}..{k_max}")));
    }
    let eps_fps = if args.eps_fp.is_empty() { vec![1e-2, 1e-4] } else { args.eps_fp.clone() };
    let eps_fn = pick(args.eps_fn, file.f64("eps-fn"), 0.0);
    let ks: Vec<u64> = (k_min..=k_max).step_by(k_step as usize).collect();

    let mut rows: Vec<Vec<String>> = message_length_rows(n, &ks, &eps_fps)?
        .into_iter()
        .map(|r| {
            vec![
                r.population.to_string(),
                r.k.to_string(),
                fmt(r.eps_fp),
                r.name.to_string(),
                fmt(r.bits),
            ]
        })
        .collect();
    if eps_fn > 0.0 {
        for &eps in &eps_fps {
            for &k in &ks {
                let q = BoundQuery::new(n, k, eps, eps_fn)?;
                let lb = b_lower_fp_fn(&q)?;
                rows.push(vec![
                    n.to_string(),
                    k.to_string(),
                    fmt(eps),
                    "lower_fpfn".to_string(),
                    fmt(lb.exact),
                ]);
            }
        }
    }
    let manifest = RunManifest::new(
        "bounds",
        serde_json::json!({"n": n.to_string(), "k": format!("{k_min}..={k_max} step {k_step}"),
                           "eps_fp": eps_fps, "eps_fn": eps_fn}),
        0,
    );
    emit_csv_or_stdout(&args.out, &["n", "k", "eps_fp", "name", "bits"], &rows, Some(manifest))
}

#[allow(clippy::too_many_arguments)]
fn build_scheme_config(
    scheme: Scheme,
    n: u128,
    k: u64,
    k_max: u64,
    eps_fp: f64,
    bits: Option<u64>,
    hashes: Option<u32>,
    seed: u64,
) -> Result<SchemeConfig, CliError> {
    Ok(match scheme {
        Scheme::LinearEquations => {
            SchemeConfig::LinearEquations(LeConfig::new(eps_fp, k_max as u32, seed)?)
        }
        Scheme::Bloom => SchemeConfig::Bloom(match bits {
            Some(bits) => {
                let t = hashes
                    .unwrap_or_else(|| bloom::optimal_hash_count(bits as usize, k.max(1) as usize));
                BloomConfig::new(bits as usize, t, seed)?
            }
            None => BloomConfig::for_target(k.max(1) as u32, eps_fp, seed)?,
        }),
        Scheme::HashConcat => SchemeConfig::HashConcat(HashConcatConfig::for_target(
            eps_fp,
            k.max(1) as u32,
            k_max as u32,
            seed,
        )?),
        Scheme::Enumerative => {
            SchemeConfig::Enumerative(EnumerativeConfig::new(n, k_max as u32)?)
        }
        Scheme::NaiveConcat => SchemeConfig::NaiveConcat(match bits {
            Some(bits) => NaiveConcatConfig::with_budget(bits as usize),
            None => NaiveConcatConfig::unbounded(),
        }),
    })
}

fn cmd_codec(args: &CodecArgs, file: &FileCfg) -> Result<(), CliError> {
    let scheme = args.scheme.map(SchemeArg::as_scheme).unwrap_or(Scheme::LinearEquations);
    let n = pick(args.n, file.u128("n"), 1u128 << 32);
    let k = pick(args.k, file.u64("k"), 100);
    let k_max = pick(args.k_max, file.u64("k-max"), k.max(1));
    let eps_fp = pick(args.eps_fp, file.f64("eps-fp"), 1e-2);
    let probes = pick(args.probes, file.u64("probes"), 1_000_000);
    let encodes = pick(args.encodes, file.u64("encodes"), 64).max(1);
    let seed = pick(args.seed, file.u64("seed"), 0xACC5);

    let scheme_cfg =
        build_scheme_config(scheme, n, k, k_max, eps_fp, args.bits, args.hashes, seed)?;
    let sim_cfg = FpSimConfig {
        population: n,
        arrival: Arrival::Fixed(k),
        scheme: scheme_cfg.clone(),
        encodes,
        probes_per_encode: (probes / encodes).max(1),
        master_seed: seed,
    };
    let start = std::time::Instant::now();
    let report = run_fp_trial(&sim_cfg)?;
    let elapsed = start.elapsed();

    println!("scheme:            {scheme}");
    println!("population:        {n}");
    println!("k / k_max:         {k} / {k_max}");
    println!("payload bits:      {}", scheme_cfg.payload_bits(k as usize));
    println!("analytic eps_fp:   {:.6e}", scheme_cfg.analytic_fp(k as usize));
    println!(
        "measured eps_fp:   {:.6e} +/- {:.2e} ({} probes over {} encodes)",
        report.fp_rate, report.fp_se, report.probes, report.encodes,
    );
    println!(
        "false negatives:   {} of {} member checks",
        report.false_negatives, report.member_checks
    );
    println!("capacity drops:    {}", report.capacity_drops);
    println!(
        "throughput:        {:.2e} probes/s ({} ms total)",
        report.probes as f64 / elapsed.as_secs_f64(),
        elapsed.as_millis()
    );

    if let SchemeConfig::LinearEquations(le_cfg) = &scheme_cfg {
        // retry statistics: how often the first hash trial was singular
        let retry = measure_le_retry_rate(le_cfg, n, k, encodes, derive_seed(seed, 0x7E7))?;
        let bound = 1.0 / (2f64.powi(le_cfg.element_bits() as i32) - 1.0);
        println!(
            "singular retries:  {}/{} encodes (first-trial bound {:.4e})",
            retry.retried, retry.encodes, bound
        );
    }
    Ok(())
}

fn model_from_arg(arg: ModelArg, population: u128, lambda: f64) -> SchemeModel {
    match arg {
        ModelArg::Lb => SchemeModel::AsymptoticBound,
        ModelArg::Le => SchemeModel::LinearEquations,
        ModelArg::Ef => SchemeModel::error_free(population, (8.0 * lambda).ceil() as u64 + 16),
        ModelArg::Concat => SchemeModel::NaiveConcat,
    }
}

fn cmd_arq(args: &ArqArgs, file: &FileCfg) -> Result<(), CliError> {
    let sweep = args.sweep.unwrap_or(ArqSweep::Dl);
    let eps_ul = pick(args.eps_ul, file.f64("eps-ul"), 0.1);
    let eps_fp = pick(args.eps_fp, file.f64("eps-fp"), 1e-2);
    let eps_fn = pick(args.eps_fn, file.f64("eps-fn"), 0.0);
    let rounds = pick(args.rounds, file.u32("rounds"), 5);
    let lambda = pick(args.lambda, file.f64("lambda"), 100.0);
    let n = pick(args.n, file.u128("n"), 1u128 << 32);
    let antennas = pick(args.antennas, file.u32("antennas"), 64);
    let symbols = pick(args.symbols, file.u32("symbols"), 2048);
    let model_arg = args.model.unwrap_or(ModelArg::Le);

    match sweep {
        ArqSweep::Point => {
            let eps_dl = pick(args.eps_dl, file.f64("eps-dl"), 1e-2);
            let p = ArqParams::new(eps_ul, eps_dl, eps_fp, eps_fn, rounds)?;
            let mut out = serde_json::json!({
                "params": p,
                "pr_fail": arq::pr_fail(&p),
                "pr_fail_limit": arq::pr_fail_limit(&p),
                "proceed_probability": p.proceed_probability(),
            });
            if let Some(target) = args.target_fail {
                out["required_rounds"] =
                    serde_json::json!(arq::required_rounds(&p, target)?);
            }
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            Ok(())
        }
        ArqSweep::Dl => {
            let mut grid: Vec<f64> = Vec::new();
            for exp in [-4i32, -3, -2] {
                for mant in [1.0, 2.0, 5.0] {
                    grid.push(mant * 10f64.powi(exp));
                }
            }
            grid.extend((1..=9).map(|i| i as f64 / 10.0));
            let rows: Vec<Vec<String>> = grid
                .iter()
                .map(|&eps_dl| {
                    let p = ArqParams::new(eps_ul, eps_dl, eps_fp, eps_fn, rounds)?;
                    Ok(vec![
                        fmt(eps_ul),
                        fmt(eps_dl),
                        fmt(eps_fp),
                        fmt(eps_fn),
                        rounds.to_string(),
                        fmt(arq::pr_fail(&p)),
                        fmt(arq::pr_fail_limit(&p)),
                    ])
                })
                .collect::<Result<_, CliError>>()?;
            let manifest = RunManifest::new(
                "arq dl-sweep",
                serde_json::json!({"eps_ul": eps_ul, "eps_fp": eps_fp, "eps_fn": eps_fn,
                                   "rounds": rounds}),
                0,
            );
            emit_csv_or_stdout(
                &args.out,
                &["eps_ul", "eps_dl", "eps_fp", "eps_fn", "rounds", "pr_fail", "pr_fail_limit"],
                &rows,
                Some(manifest),
            )
        }
        ArqSweep::Snr => {
            let model = model_from_arg(model_arg, n, lambda);
            let mut rows = Vec::new();
            for snr_db10 in (-100..=100).step_by(10) {
                let snr_db = snr_db10 as f64 / 10.0;
                let channel = FadingChannel::from_snr_db(snr_db, antennas, symbols)?;
                let opt = optimize_message_length(&model, channel, lambda, eps_ul, rounds);
                rows.push(vec![
                    fmt(snr_db),
                    fmt(eps_ul),
                    rounds.to_string(),
                    model.label().to_string(),
                    opt.bits.to_string(),
                    fmt(opt.failure_static),
                    fmt(opt.failure_iid),
                ]);
            }
            let manifest = RunManifest::new(
                "arq snr-sweep",
                serde_json::json!({"lambda": lambda, "eps_ul": eps_ul, "rounds": rounds,
                                   "antennas": antennas, "symbols": symbols,
                                   "model": model.label()}),
                0,
            );
            emit_csv_or_stdout(
                &args.out,
                &["snr_db", "eps_ul", "rounds", "scheme", "bits", "pr_fail", "pr_fail_iid"],
                &rows,
                Some(manifest),
            )
        }
        ArqSweep::Bits => {
            let snr_db = pick(args.snr_db, file.f64("snr-db"), -5.0);
            let model = model_from_arg(model_arg, n, lambda);
            let channel = FadingChannel::from_snr_db(snr_db, antennas, symbols)?;
            let step = grid_step(&model, lambda);
            let hi = grid_limit(&channel);
            let mut rows = Vec::new();
            let mut bits = step;
            while bits <= hi {
                let v = mean_failure_static(
                    &model,
                    Downlink::Fading(channel),
                    lambda,
                    eps_ul,
                    rounds,
                    bits,
                );
                rows.push(vec![
                    bits.to_string(),
                    rounds.to_string(),
                    model.label().to_string(),
                    fmt(v),
                ]);
                bits += step;
            }
            let manifest = RunManifest::new(
                "arq bits-sweep",
                serde_json::json!({"lambda": lambda, "eps_ul": eps_ul, "snr_db": snr_db,
                                   "rounds": rounds, "model": model.label()}),
                0,
            );
            emit_csv_or_stdout(
                &args.out,
                &["bits", "rounds", "scheme", "pr_fail"],
                &rows,
                Some(manifest),
            )
        }
    }
}

fn cmd_simulate(args: &SimulateArgs, file: &FileCfg) -> Result<(), CliError> {
    let mode = args.mode.unwrap_or(SimMode::Fp);
    let n = pick(args.n, file.u128("n"), 1u128 << 32);
    let seed = pick(args.seed, file.u64("seed"), 0x5EED);
    let arrival = match (args.k, args.lambda.or(file.f64("lambda"))) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--k and --lambda are mutually exclusive".into()))
        }
        (Some(k), None) => Arrival::Fixed(k),
        (None, Some(lambda)) => Arrival::Poisson(lambda),
        (None, None) => Arrival::Fixed(pick(None, file.u64("k"), 100)),
    };
    let eps_fp = pick(args.eps_fp, file.f64("eps-fp"), 1e-2);

    match mode {
        SimMode::Fp => {
            let scheme = args.scheme.map(SchemeArg::as_scheme).unwrap_or(Scheme::LinearEquations);
            let mean_k = arrival.mean();
            let k_max = pick(None, file.u64("k-max"), (4.0 * mean_k.max(8.0)).ceil() as u64);
            let scheme_cfg = build_scheme_config(
                scheme,
                n,
                mean_k.round() as u64,
                k_max,
                eps_fp,
                args.bits,
                None,
                seed,
            )?;
            let probes = pick(args.probes, file.u64("probes"), 1_000_000);
            let encodes = pick(args.encodes, file.u64("encodes"), 256).max(1);
            let cfg = FpSimConfig {
                population: n,
                arrival,
                scheme: scheme_cfg,
                encodes,
                probes_per_encode: (probes / encodes).max(1),
                master_seed: seed,
            };
            let report = run_fp_trial(&cfg)?;
            let out = serde_json::json!({
                "mode": "fp",
                "scheme": scheme.label(),
                "arrival": arrival,
                "report": report,
            });
            print_json_report(&args.out, "simulate fp", out, seed)
        }
        SimMode::Arq => {
            let eps_ul = pick(args.eps_ul, file.f64("eps-ul"), 0.1);
            let rounds = pick(args.rounds, file.u32("rounds"), 5);
            let trials = pick(args.trials, file.u64("trials"), 100_000);
            let snr_db = args.snr_db.or(file.f64("snr-db"));
            let (channel, scheme, fixed_rate_bits) = match snr_db {
                Some(db) => {
                    let antennas = pick(args.antennas, file.u32("antennas"), 64);
                    let symbols = pick(args.symbols, file.u32("symbols"), 2048);
                    let bits = args.bits.or(file.u64("bits")).ok_or_else(|| {
                        CliError::Usage("fading simulation needs --bits (payload budget)".into())
                    })?;
                    let kind = match args.scheme.unwrap_or(SchemeArg::Le) {
                        SchemeArg::Le => BudgetKind::LinearEquations,
                        SchemeArg::Enumerative => BudgetKind::ErrorFree,
                        SchemeArg::Naiveconcat => BudgetKind::NaiveConcat,
                        _ => {
                            return Err(CliError::Usage(
                                "budgeted simulation supports le, enumerative, naiveconcat"
                                    .into(),
                            ))
                        }
                    };
                    (
                        Downlink::Fading(FadingChannel::from_snr_db(db, antennas, symbols)?),
                        ArqScheme::Budgeted { kind, bits },
                        None,
                    )
                }
                None => {
                    let eps_dl = pick(args.eps_dl, file.f64("eps-dl"), 1e-2);
                    let scheme =
                        args.scheme.map(SchemeArg::as_scheme).unwrap_or(Scheme::LinearEquations);
                    let mean_k = arrival.mean();
                    let k_max = (4.0 * mean_k.max(8.0)).ceil() as u64 + 16;
                    let cfg = build_scheme_config(
                        scheme, n, mean_k.round() as u64, k_max, eps_fp, args.bits, None, seed,
                    )?;
                    (Downlink::Erasure(eps_dl), ArqScheme::Fixed(cfg), None)
                }
            };
            let cfg = ArqSimConfig {
                population: n,
                arrival,
                eps_ul,
                channel,
                scheme,
                rounds,
                trials,
                master_seed: seed,
                fixed_rate_bits,
            };
            let report = run_arq_trial(&cfg)?;
            let out = serde_json::json!({
                "mode": "arq",
                "arrival": arrival,
                "eps_ul": eps_ul,
                "rounds": rounds,
                "report": report,
            });
            print_json_report(&args.out, "simulate arq", out, seed)
        }
    }
}

fn print_json_report(
    out: &Option<PathBuf>,
    command: &str,
    value: serde_json::Value,
    seed: u64,
) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&value).expect("json");
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))?;
        RunManifest::new(command, value, seed)
            .write_beside(path)
            .map_err(CliError::from)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_reproduce(args: &ReproduceArgs, file: &FileCfg) -> Result<(), CliError> {
    let out_dir =
        args.out_dir.clone().unwrap_or_else(|| Path::new("figures").to_path_buf());
    let seed = pick(args.seed, file.u64("seed"), 0x5EED);
    let figures: Vec<&str> = if args.figure == "all" {
        FIGURES.to_vec()
    } else {
        vec![args.figure.as_str()]
    };
    for figure in figures {
        let paths = reproduce(figure, &out_dir, args.trials, seed)?;
        for p in paths {
            println!("{}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match FileCfg::load(&cli.config) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let result = match &cli.command {
        Cmd::Bounds(a) => cmd_bounds(a, &file),
        Cmd::Codec(a) => cmd_codec(a, &file),
        Cmd::Arq(a) => cmd_arq(a, &file),
        Cmd::Simulate(a) => cmd_simulate(a, &file),
        Cmd::Reproduce(a) => cmd_reproduce(a, &file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
