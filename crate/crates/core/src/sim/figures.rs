//! Reproduction recipes: deterministic CSV data for the message-length and
//! failure-probability plots, one file plus a JSON run manifest per figure.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::arq::{
    mean_failure_static, optimize_message_length, Downlink, FadingChannel, SchemeModel,
};
use crate::bounds::{
    b_asymptotic, b_error_free, b_lower_fp, b_upper_fp, exceed_prob_chebyshev,
    exceed_prob_chernoff, expected_fp_bound, poisson_exceed_exact, poisson_expected_fp_exact,
};
use crate::codec::{BloomConfig, HashConcatConfig, LeConfig};
use crate::hashing::derive_seed;
use crate::sim::{run_arq_trial, Arrival, ArqScheme, ArqSimConfig, BudgetKind, SimError};

/// Everything needed to regenerate an output bit-for-bit (except the
/// timestamp), written next to each CSV.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub version: String,
    pub unix_time: u64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, master_seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            unix_time: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn write_beside(&self, csv_path: &Path) -> Result<PathBuf, SimError> {
        let path = csv_path.with_extension("manifest.json");
        let mut f = std::fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut f, self)
            .map_err(|e| SimError::InvalidConfig(format!("manifest serialization: {e}")))?;
        f.write_all(b"\n")?;
        Ok(path)
    }
}

/// Comma-separated, `.` decimal point, LF line endings, header row first.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), SimError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(header.join(",").as_bytes())?;
    f.write_all(b"\n")?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        f.write_all(row.join(",").as_bytes())?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

/// One row of the message-length comparison (bounds and schemes together).
#[derive(Debug, Clone, Serialize)]
pub struct LengthRow {
    pub population: u128,
    pub k: u64,
    pub eps_fp: f64,
    pub name: &'static str,
    pub bits: f64,
}

/// Message lengths of every bound and scheme over a K sweep; the data behind
/// the message-length figure.
pub fn message_length_rows(
    population: u128,
    ks: &[u64],
    eps_fps: &[f64],
) -> Result<Vec<LengthRow>, SimError> {
    let domain = |e: String| SimError::InvalidConfig(e);
    let mut rows = Vec::new();
    for &eps in eps_fps {
        for &k in ks {
            let mut push = |name: &'static str, bits: f64| {
                rows.push(LengthRow { population, k, eps_fp: eps, name, bits });
            };
            push("lower", b_lower_fp(population, k, eps).map_err(|e| domain(e.to_string()))?);
            push(
                "upper",
                b_upper_fp(population, k, eps).map_err(|e| domain(e.to_string()))?.exact,
            );
            push("asymptotic", b_asymptotic(k, eps));
            push(
                "le",
                LeConfig::new(eps, k.max(1) as u32, 0)
                    .map_err(|e| domain(e.to_string()))?
                    .payload_bits(k as usize) as f64,
            );
            push(
                "bloom",
                BloomConfig::for_target(k.max(1) as u32, eps, 0)
                    .map_err(|e| domain(e.to_string()))?
                    .message_bits() as f64,
            );
            push(
                "hashconcat",
                HashConcatConfig::for_target(eps, k.max(1) as u32, k.max(1) as u32, 0)
                    .map_err(|e| domain(e.to_string()))?
                    .payload_bits(k as usize) as f64,
            );
            push("error_free", b_error_free(population, k) as f64);
        }
    }
    Ok(rows)
}

fn fmt(v: f64) -> String {
    format!("{v:.6e}")
}

/// Reproduce one figure's data set. Returns the paths written.
pub fn reproduce(
    figure: &str,
    out_dir: &Path,
    trials: Option<u64>,
    master_seed: u64,
) -> Result<Vec<PathBuf>, SimError> {
    std::fs::create_dir_all(out_dir)?;
    match figure {
        "fig1" => fig1(out_dir, master_seed),
        "fig3a" => fig3a(out_dir, master_seed),
        "fig3b" => fig3b(out_dir, master_seed),
        "fig4" => fig4(out_dir, trials.unwrap_or(5_000), master_seed),
        "fig5a" => fig5(out_dir, 0.1, "fig5a", master_seed),
        "fig5b" => fig5(out_dir, 0.01, "fig5b", master_seed),
        "fig6" => fig6(out_dir, master_seed),
        other => Err(SimError::UnknownFigure(other.to_string())),
    }
}

/// All figure identifiers accepted by [`reproduce`].
pub const FIGURES: [&str; 7] = ["fig1", "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6"];

/// Message length vs K for every bound and scheme; N=2^32,
/// ε_fp ∈ {1e-2, 1e-4}, ε_fn = 0.
fn fig1(out_dir: &Path, master_seed: u64) -> Result<Vec<PathBuf>, SimError> {
    let ks: Vec<u64> = (10..=300).step_by(10).collect();
    let rows = message_length_rows(1 << 32, &ks, &[1e-2, 1e-4])?;
    let csv = out_dir.join("fig1.csv");
    write_csv(
        &csv,
        &["n", "k", "eps_fp", "name", "bits"],
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.population.to_string(),
                    r.k.to_string(),
                    fmt(r.eps_fp),
                    r.name.to_string(),
                    fmt(r.bits),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    let manifest = RunManifest::new(
        "reproduce fig1",
        serde_json::json!({"population": "2^32", "k": "10..=300 step 10", "eps_fp": [1e-2, 1e-4]}),
        master_seed,
    )
    .write_beside(&csv)?;
    Ok(vec![csv, manifest])
}

/// Expected false-positive probability vs λ when B is sized for ε̃ = 1e-4 at
/// K' = 100: exact Poisson expectation and the moment bound.
fn fig3a(out_dir: &Path, master_seed: u64) -> Result<Vec<PathBuf>, SimError> {
    let k_prime = 100u64;
    let eps_tilde = 1e-4f64;
    let bits = (k_prime as f64 * (1.0 / eps_tilde).log2()).ceil() as u64;
    let mut rows = Vec::new();
    for lambda10 in (500..=1500).step_by(25) {
        let lambda = lambda10 as f64 / 10.0;
        rows.push(vec![
            fmt(lambda),
            k_prime.to_string(),
            bits.to_string(),
            fmt(poisson_expected_fp_exact(lambda, bits)),
            fmt(expected_fp_bound(lambda, lambda, bits).expect("valid")),
        ]);
    }
    let csv = out_dir.join("fig3a.csv");
    write_csv(&csv, &["lambda", "k_prime", "bits", "exact_expected_fp", "moment_bound"], &rows)?;
    let manifest = RunManifest::new(
        "reproduce fig3a",
        serde_json::json!({"k_prime": k_prime, "eps_tilde": eps_tilde, "bits": bits,
                           "lambda": "50..=150 step 2.5"}),
        master_seed,
    )
    .write_beside(&csv)?;
    Ok(vec![csv, manifest])
}

/// Probability that ε_fp exceeds ε̃ = 1e-4 vs λ at the same B: exact Poisson
/// tail, Chebyshev bound and the Chernoff bound for independent activations.
fn fig3b(out_dir: &Path, master_seed: u64) -> Result<Vec<PathBuf>, SimError> {
    let k_prime = 100u64;
    let eps_tilde = 1e-4f64;
    let bits = (2.0 * k_prime as f64 * (1.0 / eps_tilde).log2()).ceil() as u64;
    let mut rows = Vec::new();
    for lambda10 in (250..=1500).step_by(25) {
        let lambda = lambda10 as f64 / 10.0;
        let cheb = exceed_prob_chebyshev(lambda, lambda, bits, eps_tilde)
            .map(fmt)
            .unwrap_or_default();
        let cher =
            exceed_prob_chernoff(lambda, bits, eps_tilde).map(fmt).unwrap_or_default();
        rows.push(vec![
            fmt(lambda),
            k_prime.to_string(),
            bits.to_string(),
            fmt(poisson_exceed_exact(lambda, bits, eps_tilde)),
            cheb,
            cher,
        ]);
    }
    let csv = out_dir.join("fig3b.csv");
    write_csv(
        &csv,
        &["lambda", "k_prime", "bits", "exact_exceed_prob", "chebyshev_bound", "chernoff_bound"],
        &rows,
    )?;
    let manifest = RunManifest::new(
        "reproduce fig3b",
        serde_json::json!({"k_prime": k_prime, "eps_tilde": eps_tilde, "bits": bits,
                           "lambda": "25..=150 step 2.5"}),
        master_seed,
    )
    .write_beside(&csv)?;
    Ok(vec![csv, manifest])
}

/// Failure probability vs λ over the fading downlink (c=2048 symbols, 64
/// antennas, ε_ul=0.1, L=5) for the four encodings, B optimized per point;
/// Monte-Carlo markers for the solver and concatenation codecs.
fn fig4(out_dir: &Path, trials: u64, master_seed: u64) -> Result<Vec<PathBuf>, SimError> {
    let lambdas = [25.0f64, 50.0, 100.0, 150.0, 200.0];
    let snrs_db = [-5.0f64, 0.0, 5.0];
    let eps_ul = 0.1;
    let rounds = 5;
    let mut rows = Vec::new();
    let mut point = 0u64;
    for &snr_db in &snrs_db {
        let channel = FadingChannel::from_snr_db(snr_db, 64, 2048).expect("valid channel");
        for &lambda in &lambdas {
            let k_hi = (8.0 * lambda).ceil() as u64 + 16;
            let models = [
                SchemeModel::AsymptoticBound,
                SchemeModel::LinearEquations,
                SchemeModel::error_free(1 << 32, k_hi),
                SchemeModel::NaiveConcat,
            ];
            for model in &models {
                let opt = optimize_message_length(model, channel, lambda, eps_ul, rounds);
                let budget_kind = match model {
                    SchemeModel::LinearEquations => Some(BudgetKind::LinearEquations),
                    SchemeModel::NaiveConcat => Some(BudgetKind::NaiveConcat),
                    _ => None,
                };
                let (sim_fail, sim_se, sim_trials) = match budget_kind {
                    Some(kind) => {
                        let report = run_arq_trial(&ArqSimConfig {
                            population: 1 << 32,
                            arrival: Arrival::Poisson(lambda),
                            eps_ul,
                            channel: Downlink::Fading(channel),
                            scheme: ArqScheme::Budgeted { kind, bits: opt.bits },
                            rounds,
                            trials,
                            master_seed: derive_seed(master_seed, point),
                            fixed_rate_bits: None,
                        })?;
                        (fmt(report.pr_fail), fmt(report.se), trials.to_string())
                    }
                    None => (String::new(), String::new(), String::new()),
                };
                rows.push(vec![
                    fmt(lambda),
                    fmt(snr_db),
                    model.label().to_string(),
                    opt.bits.to_string(),
                    fmt(opt.failure_static),
                    fmt(opt.failure_iid),
                    sim_fail,
                    sim_se,
                    sim_trials,
                ]);
                point += 1;
            }
        }
    }
    let csv = out_dir.join("fig4.csv");
    write_csv(
        &csv,
        &[
            "lambda",
            "snr_db",
            "scheme",
            "bits",
            "pr_fail_static",
            "pr_fail_iid",
            "pr_fail_sim",
            "sim_se",
            "trials",
        ],
        &rows,
    )?;
    let manifest = RunManifest::new(
        "reproduce fig4",
        serde_json::json!({"lambda": lambdas, "snr_db": snrs_db, "eps_ul": eps_ul,
                           "rounds": rounds, "antennas": 64, "symbols": 2048,
                           "trials": trials}),
        master_seed,
    )
    .write_beside(&csv)?;
    Ok(vec![csv, manifest])
}

/// Failure probability vs mean SNR at λ=100 for L ∈ {1, 5, 10}; B optimized
/// per point. Variant a: ε_ul = 0.1, variant b: ε_ul = 0.01.
fn fig5(
    out_dir: &Path,
    eps_ul: f64,
    name: &str,
    master_seed: u64,
) -> Result<Vec<PathBuf>, SimError> {
    let lambda = 100.0f64;
    let k_hi = (8.0 * lambda).ceil() as u64 + 16;
    let models = [
        SchemeModel::AsymptoticBound,
        SchemeModel::LinearEquations,
        SchemeModel::error_free(1 << 32, k_hi),
        SchemeModel::NaiveConcat,
    ];
    let mut rows = Vec::new();
    for snr_db10 in (-100..=100).step_by(10) {
        let snr_db = snr_db10 as f64 / 10.0;
        let channel = FadingChannel::from_snr_db(snr_db, 64, 2048).expect("valid channel");
        for &rounds in &[1u32, 5, 10] {
            for model in &models {
                let opt = optimize_message_length(model, channel, lambda, eps_ul, rounds);
                rows.push(vec![
                    fmt(snr_db),
                    fmt(eps_ul),
                    rounds.to_string(),
                    model.label().to_string(),
                    opt.bits.to_string(),
                    fmt(opt.failure_static),
                ]);
            }
        }
    }
    let csv = out_dir.join(format!("{name}.csv"));
    write_csv(
        &csv,
        &["snr_db", "eps_ul", "rounds", "scheme", "bits", "pr_fail"],
        &rows,
    )?;
    let manifest = RunManifest::new(
        &format!("reproduce {name}"),
        serde_json::json!({"lambda": lambda, "eps_ul": eps_ul, "snr_db": "-10..=10 step 1",
                           "rounds": [1, 5, 10], "antennas": 64, "symbols": 2048}),
        master_seed,
    )
    .write_beside(&csv)?;
    Ok(vec![csv, manifest])
}

/// Failure probability vs message length B at λ=100, ε_ul=0.1, SNR̄=−5 dB
/// for L ∈ {2, 5, 10}: the source/channel trade-off curves.
fn fig6(out_dir: &Path, master_seed: u64) -> Result<Vec<PathBuf>, SimError> {
    let lambda = 100.0f64;
    let eps_ul = 0.1;
    let channel = FadingChannel::from_snr_db(-5.0, 64, 2048).expect("valid channel");
    let k_hi = (8.0 * lambda).ceil() as u64 + 16;
    let models = [
        SchemeModel::AsymptoticBound,
        SchemeModel::LinearEquations,
        SchemeModel::error_free(1 << 32, k_hi),
        SchemeModel::NaiveConcat,
    ];
    let mut rows = Vec::new();
    for model in &models {
        let step = crate::arq::grid_step(model, lambda);
        let hi = crate::arq::grid_limit(&channel);
        let mut bits = step;
        while bits <= hi {
            for &rounds in &[2u32, 5, 10] {
                let v = mean_failure_static(
                    model,
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
            }
            bits += step;
        }
    }
    let csv = out_dir.join("fig6.csv");
    write_csv(&csv, &["bits", "rounds", "scheme", "pr_fail"], &rows)?;
    let manifest = RunManifest::new(
        "reproduce fig6",
        serde_json::json!({"lambda": lambda, "eps_ul": eps_ul, "snr_db": -5.0,
                           "rounds": [2, 5, 10], "antennas": 64, "symbols": 2048}),
        master_seed,
    )
    .write_beside(&csv)?;
    Ok(vec![csv, manifest])
}
