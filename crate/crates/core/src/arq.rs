//! Reliability of an L-round retransmission protocol driven by encoded
//! acknowledgments.
//!
//! A user retransmits until it reads a positive acknowledgment or runs out of
//! rounds; it succeeds only if the acknowledgment it stops on belongs to a
//! round whose uplink was actually decoded. False positives therefore end the
//! protocol in an unrepairable failure, false negatives and erasures just
//! cost a round. This module has the closed-form failure probability, its
//! L→∞ limits, round-count requirements, the downlink outage model under
//! Rayleigh fading with multiple transmit antennas, and the joint
//! optimization of the feedback message length.

use thiserror::Error;

use crate::bounds::b_error_free;
use crate::numeric::{erlang_cdf, poisson_weights};

/// Poisson truncation for the activity averages in the optimizer.
const ACTIVITY_TAIL: f64 = 1e-10;

/// Local refinement window around the coarse grid argmin, in bits.
const REFINE_WINDOW: u64 = 32;

/// Cap on the per-element width of the solver-based scheme.
const LE_MAX_ELEMENT_BITS: u64 = 32;

#[derive(Debug, Error, PartialEq)]
pub enum ArqError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("target failure probability {target} not achievable (asymptotic limit {limit})")]
    Unachievable { target: f64, limit: f64 },
}

/// Per-round probabilities of the four error sources plus the round budget.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArqParams {
    pub eps_ul: f64,
    pub eps_dl: f64,
    pub eps_fp: f64,
    pub eps_fn: f64,
    pub rounds: u32,
}

impl ArqParams {
    pub fn new(
        eps_ul: f64,
        eps_dl: f64,
        eps_fp: f64,
        eps_fn: f64,
        rounds: u32,
    ) -> Result<Self, ArqError> {
        for (name, v) in
            [("eps_ul", eps_ul), ("eps_dl", eps_dl), ("eps_fp", eps_fp), ("eps_fn", eps_fn)]
        {
            if !(0.0..=1.0).contains(&v) {
                return Err(ArqError::Domain(format!("{name}={v} outside [0,1]")));
            }
        }
        if rounds == 0 {
            return Err(ArqError::Domain("at least one round required".into()));
        }
        Ok(ArqParams { eps_ul, eps_dl, eps_fp, eps_fn, rounds })
    }

    /// Probability the user misses an acknowledgment it should have seen:
    /// ε_fb,s = 1 − (1 − ε_dl)(1 − ε_fn).
    pub fn feedback_miss(&self) -> f64 {
        1.0 - (1.0 - self.eps_dl) * (1.0 - self.eps_fn)
    }

    /// Probability the user sees a spurious acknowledgment after a failed
    /// uplink: ε_fb,f = (1 − ε_dl)·ε_fp.
    pub fn feedback_spurious(&self) -> f64 {
        (1.0 - self.eps_dl) * self.eps_fp
    }

    /// ℓ — probability the user proceeds from one round to the next.
    pub fn proceed_probability(&self) -> f64 {
        self.eps_ul * (1.0 - self.feedback_spurious())
            + (1.0 - self.eps_ul) * self.feedback_miss()
    }
}

/// Failure probability after at most L rounds:
/// 1 − (1−ε_ul)(1−ε_fb,s)·(1−ℓ^L)/(1−ℓ).
pub fn pr_fail(p: &ArqParams) -> f64 {
    let success = (1.0 - p.eps_ul) * (1.0 - p.feedback_miss());
    if p.rounds == 1 {
        // reduces to 1 − (1−ε_ul)(1−ε_dl)(1−ε_fn), independent of ε_fp
        return (1.0 - success).clamp(0.0, 1.0);
    }
    let l = p.proceed_probability();
    let geometric = if (1.0 - l).abs() < 1e-9 {
        // ℓ → 1: sum the L terms directly
        let mut sum = 0.0;
        let mut pw = 1.0;
        for _ in 0..p.rounds {
            sum += pw;
            pw *= l;
        }
        sum
    } else {
        (1.0 - l.powi(p.rounds as i32)) / (1.0 - l)
    };
    (1.0 - success * geometric).clamp(0.0, 1.0)
}

/// L→∞ failure probability:
/// 1 − (1−ε_ul)(1−ε_fn) / (1−ε_fn−ε_ul(1−ε_fn−ε_fp)).
/// Does not depend on the downlink erasure probability.
pub fn pr_fail_limit(p: &ArqParams) -> f64 {
    if p.eps_fp == 0.0 {
        return 0.0; // retransmissions repair everything else
    }
    let num = (1.0 - p.eps_ul) * (1.0 - p.eps_fn);
    let den = 1.0 - p.eps_fn - p.eps_ul * (1.0 - p.eps_fn - p.eps_fp);
    if den <= 0.0 {
        return 1.0;
    }
    (1.0 - num / den).clamp(0.0, 1.0)
}

/// Smallest L with pr_fail ≤ target, by the closed ceiling form. The target
/// must lie strictly above the asymptotic limit; at or below it no round
/// count suffices.
pub fn required_rounds(p: &ArqParams, target: f64) -> Result<u32, ArqError> {
    if !(0.0..=1.0).contains(&target) {
        return Err(ArqError::Domain(format!("target {target} outside [0,1]")));
    }
    let limit = pr_fail_limit(p);
    if target <= limit {
        return Err(ArqError::Unachievable { target, limit });
    }
    let success = (1.0 - p.eps_ul) * (1.0 - p.feedback_miss());
    let l = p.proceed_probability();
    if l <= 0.0 {
        return Ok(1);
    }
    // target > limit guarantees the argument is positive.
    let arg = 1.0 - (1.0 - target) * (1.0 - l) / success;
    if arg <= 0.0 || l >= 1.0 {
        return Err(ArqError::Unachievable { target, limit });
    }
    Ok((arg.ln() / l.ln()).ceil().max(1.0) as u32)
}

/// Rounds needed to come within a factor (1+ρ) of the asymptotic failure
/// probability: ⌈ln(ρ·ε_ul·ε_fp/((1−ε_fn)(1−ε_ul))) / ln ℓ⌉.
pub fn rounds_for_overhead(p: &ArqParams, rho: f64) -> Result<u32, ArqError> {
    if rho <= 0.0 {
        return Err(ArqError::Domain(format!("rho {rho} must be positive")));
    }
    if p.eps_ul == 0.0 || p.eps_fp == 0.0 || p.eps_ul >= 1.0 || p.eps_fn >= 1.0 {
        // asymptotic failure is zero (or everything fails); the factor form
        // has no finite solution
        return Err(ArqError::Unachievable { target: rho, limit: pr_fail_limit(p) });
    }
    let l = p.proceed_probability();
    if l <= 0.0 {
        return Ok(1);
    }
    if l >= 1.0 {
        return Err(ArqError::Unachievable { target: rho, limit: pr_fail_limit(p) });
    }
    let num = (rho * p.eps_ul * p.eps_fp / ((1.0 - p.eps_fn) * (1.0 - p.eps_ul))).ln();
    Ok((num / l.ln()).ceil().max(1.0) as u32)
}

/// Quasi-static downlink: the instantaneous SNR is Gamma distributed with
/// integer shape = antenna count and scale = SNR̄/antennas; an outage occurs
/// when capacity falls below the rate B/c.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FadingChannel {
    /// Mean SNR, linear.
    pub snr: f64,
    /// Transmit antennas — the Gamma shape.
    pub antennas: u32,
    /// Channel symbols available for the feedback message.
    pub symbols: u32,
}

impl FadingChannel {
    pub fn new(snr: f64, antennas: u32, symbols: u32) -> Result<Self, ArqError> {
        if snr <= 0.0 || antennas == 0 || symbols == 0 {
            return Err(ArqError::Domain(
                "fading channel needs snr > 0, antennas >= 1, symbols >= 1".into(),
            ));
        }
        Ok(FadingChannel { snr, antennas, symbols })
    }

    pub fn from_snr_db(snr_db: f64, antennas: u32, symbols: u32) -> Result<Self, ArqError> {
        Self::new(10f64.powf(snr_db / 10.0), antennas, symbols)
    }

    /// Gamma scale parameter θ = SNR̄ / antennas.
    pub fn scale(&self) -> f64 {
        self.snr / self.antennas as f64
    }

    /// ε_dl(B) = Pr(γ < 2^{B/c} − 1), the exact Erlang CDF.
    pub fn outage(&self, bits: u64) -> f64 {
        let threshold = 2f64.powf(bits as f64 / self.symbols as f64) - 1.0;
        erlang_cdf(self.antennas, self.scale(), threshold)
    }
}

/// Downlink abstraction: a flat erasure probability or rate-dependent outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Downlink {
    Erasure(f64),
    Fading(FadingChannel),
}

impl Downlink {
    pub fn erasure_prob(&self, bits: u64) -> f64 {
        match self {
            Downlink::Erasure(p) => *p,
            Downlink::Fading(ch) => ch.outage(bits),
        }
    }
}

/// Analytic (ε_fp, ε_fn) maps of the feedback schemes under a fixed payload
/// budget of B bits and instantaneous cardinality K. These mirror what the
/// real codecs achieve when the budget is divided per frame.
#[derive(Debug, Clone)]
pub enum SchemeModel {
    /// Idealized optimum ε_fp = 2^{-B/K} (no rounding).
    AsymptoticBound,
    /// Solver-based codec: ε_fp = 2^{-⌊B/K⌋}, element width capped at 32.
    LinearEquations,
    /// Enumerative codec: exact up to its capacity, then a random subset.
    /// Holds ⌈log2 C(N, m)⌉ for m = 0..=k_hi.
    ErrorFree { bits_for_k: Vec<u64> },
    /// 32-bit identifier list: exact up to ⌈B/32⌉ identifiers, then a random
    /// subset.
    NaiveConcat,
}

impl SchemeModel {
    pub fn error_free(population: u128, k_hi: u64) -> Self {
        SchemeModel::ErrorFree {
            bits_for_k: (0..=k_hi).map(|m| b_error_free(population, m)).collect(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SchemeModel::AsymptoticBound => "lb",
            SchemeModel::LinearEquations => "le",
            SchemeModel::ErrorFree { .. } => "ef",
            SchemeModel::NaiveConcat => "concat",
        }
    }

    /// (ε_fp, ε_fn) for a decoded set of size k under payload budget `bits`.
    pub fn error_probs(&self, k: u64, bits: u64) -> (f64, f64) {
        if k == 0 {
            return (0.0, 0.0);
        }
        match self {
            SchemeModel::AsymptoticBound => (2f64.powf(-(bits as f64) / k as f64), 0.0),
            SchemeModel::LinearEquations => {
                let width = (bits / k).min(LE_MAX_ELEMENT_BITS);
                (2f64.powi(-(width as i32)), 0.0)
            }
            SchemeModel::ErrorFree { bits_for_k } => {
                let capacity = bits_for_k.partition_point(|&b| b <= bits).saturating_sub(1);
                debug_assert!(
                    capacity + 1 < bits_for_k.len() || bits < bits_for_k[bits_for_k.len() - 1],
                    "error-free capacity table too short for budget {bits}"
                );
                if k as usize <= capacity {
                    (0.0, 0.0)
                } else {
                    (0.0, 1.0 - capacity as f64 / k as f64)
                }
            }
            SchemeModel::NaiveConcat => {
                let capacity = bits.div_ceil(32);
                if k <= capacity {
                    (0.0, 0.0)
                } else {
                    (0.0, 1.0 - capacity as f64 / k as f64)
                }
            }
        }
    }

    /// Identifier-concatenation schemes step in whole identifiers.
    pub fn is_concatenation(&self) -> bool {
        matches!(self, SchemeModel::NaiveConcat)
    }
}

/// E_K[pr_fail(K, B)] with one Poisson(λ) draw of K held through all rounds —
/// the optimization objective.
pub fn mean_failure_static(
    scheme: &SchemeModel,
    downlink: Downlink,
    lambda: f64,
    eps_ul: f64,
    rounds: u32,
    bits: u64,
) -> f64 {
    let eps_dl = downlink.erasure_prob(bits);
    let (k_lo, weights) = poisson_weights(lambda, ACTIVITY_TAIL);
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        let k = k_lo + i as u64;
        let (fp, fnn) = scheme.error_probs(k, bits);
        acc += w
            * pr_fail(&ArqParams { eps_ul, eps_dl, eps_fp: fp, eps_fn: fnn, rounds });
    }
    acc
}

/// Failure probability when the decoded cohort is redrawn independently each
/// round, which is what the frame-by-frame simulator does: the closed form
/// evaluated at the round-averaged error probabilities. The false-negative
/// average is taken at cohort size M+1 because the tagged user itself joins
/// the decoded set in the round where its uplink succeeds.
pub fn mean_failure_iid(
    scheme: &SchemeModel,
    downlink: Downlink,
    lambda: f64,
    eps_ul: f64,
    rounds: u32,
    bits: u64,
) -> f64 {
    let eps_dl = downlink.erasure_prob(bits);
    let (k_lo, weights) = poisson_weights(lambda, ACTIVITY_TAIL);
    let mut fp_mean = 0.0;
    let mut fn_mean = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        let m = k_lo + i as u64;
        fp_mean += w * scheme.error_probs(m, bits).0;
        fn_mean += w * scheme.error_probs(m + 1, bits).1;
    }
    pr_fail(&ArqParams { eps_ul, eps_dl, eps_fp: fp_mean, eps_fn: fn_mean, rounds })
}

/// Result of the message-length optimization.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OptimizedLength {
    pub bits: u64,
    /// Objective value E_K[pr_fail(K, B)] at the optimum.
    pub failure_static: f64,
    /// Simulator-matching prediction at the same B (per-round independent K).
    pub failure_iid: f64,
}

/// Coarse grid step: one 32-bit identifier for concatenation schemes, λ/8
/// bits otherwise.
pub fn grid_step(scheme: &SchemeModel, lambda: f64) -> u64 {
    if scheme.is_concatenation() {
        32
    } else {
        ((lambda / 8.0).round() as u64).max(1)
    }
}

/// Upper end of the search grid: two bits per symbol beyond the mean-SNR
/// capacity is already deep in outage for the antenna counts considered.
pub fn grid_limit(channel: &FadingChannel) -> u64 {
    (channel.symbols as f64 * ((1.0 + channel.snr).log2() + 2.0)).ceil() as u64
}

/// Minimize E_K[pr_fail(K, B)] over B: coarse grid sweep followed by ±32-bit
/// refinement at step 1. Deterministic tie-break toward the smallest B.
pub fn optimize_message_length(
    scheme: &SchemeModel,
    channel: FadingChannel,
    lambda: f64,
    eps_ul: f64,
    rounds: u32,
) -> OptimizedLength {
    let downlink = Downlink::Fading(channel);
    let objective =
        |bits: u64| mean_failure_static(scheme, downlink, lambda, eps_ul, rounds, bits);
    let step = grid_step(scheme, lambda);
    let hi = grid_limit(&channel).max(step);
    // Ties break toward the smallest B in both passes.
    let mut best_bits = u64::MAX;
    let mut best_val = f64::INFINITY;
    let mut bits = step;
    while bits <= hi {
        let v = objective(bits);
        if v < best_val || (v == best_val && bits < best_bits) {
            best_val = v;
            best_bits = bits;
        }
        bits += step;
    }
    let lo = best_bits.saturating_sub(REFINE_WINDOW).max(1);
    for bits in lo..=best_bits + REFINE_WINDOW {
        let v = objective(bits);
        if v < best_val || (v == best_val && bits < best_bits) {
            best_val = v;
            best_bits = bits;
        }
    }
    OptimizedLength {
        bits: best_bits,
        failure_static: best_val,
        failure_iid: mean_failure_iid(scheme, downlink, lambda, eps_ul, rounds, best_bits),
    }
}
