//! Limits on the feedback message length: how many bits a scheme must spend
//! to acknowledge K of N users at given error targets, and what random user
//! activity does to a fixed-length message.
//!
//! The fixed-K bounds come in exact big-integer form plus the relaxed closed
//! forms obtained by bounding the binomials; both are exposed because the
//! relaxation cost is not quantified. The moment bounds for random K
//! (expected false-positive probability, and the Chebyshev / Chernoff
//! exceedance bounds) drive the message-length selection rules.

use thiserror::Error;

use crate::numeric::{
    binomial, ceil_log2_biguint, log2_binomial, poisson_tail_gt, poisson_weights,
};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Selection search space: no sensible feedback message needs more bits.
pub const MAX_SELECTABLE_BITS: u64 = 1 << 20;

/// Poisson tails below this mass are ignored by the exact-sum evaluations.
pub const POISSON_TAIL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no message length up to {MAX_SELECTABLE_BITS} bits satisfies the rule")]
    Unachievable,
}

/// Query for the fixed-K bounds of a feedback scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub population: u128,
    pub k: u64,
    pub eps_fp: f64,
    pub eps_fn: f64,
}

impl BoundQuery {
    pub fn new(population: u128, k: u64, eps_fp: f64, eps_fn: f64) -> Result<Self, BoundsError> {
        if population == 0 {
            return Err(BoundsError::Domain("population must be positive".into()));
        }
        if k as u128 > population {
            return Err(BoundsError::Domain(format!("k={k} exceeds population")));
        }
        if !(0.0..1.0).contains(&eps_fp) || !(0.0..1.0).contains(&eps_fn) {
            return Err(BoundsError::Domain("error probabilities outside [0,1)".into()));
        }
        Ok(BoundQuery { population, k, eps_fp, eps_fn })
    }
}

/// Error-free minimum: ⌈log2 C(N, K)⌉ bits distinguish every K-subset.
pub fn b_error_free(population: u128, k: u64) -> u64 {
    if k == 0 || k as u128 == population {
        return 0;
    }
    ceil_log2_biguint(&binomial(population, k))
}

/// Asymptotic message length with false positives only: K·log2(1/ε_fp).
/// Tight up to O(log log N) as N grows.
pub fn b_asymptotic(k: u64, eps_fp: f64) -> f64 {
    k as f64 * (1.0 / eps_fp).log2()
}

/// Lower bound admitting both error kinds (counting argument), exact and
/// relaxed closed form. Valid for ε_fp < 1/2; beyond that one would encode
/// the complement instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpFnLowerBound {
    /// log2 C(N,K) − log2(K · C(⌊ε_fp N⌋+K, ⌈(1−ε_fn)K⌉) · C(N, ⌊ε_fn K⌋))
    pub exact: f64,
    /// The binomial-inequality relaxation of the same count.
    pub relaxed: f64,
}

pub fn b_lower_fp_fn(q: &BoundQuery) -> Result<FpFnLowerBound, BoundsError> {
    if q.eps_fp >= 0.5 {
        return Err(BoundsError::Domain(format!(
            "lower bound requires eps_fp < 1/2 (got {})",
            q.eps_fp
        )));
    }
    let n = q.population;
    let k = q.k;
    if k == 0 {
        return Ok(FpFnLowerBound { exact: 0.0, relaxed: 0.0 });
    }
    let fp_floor = (q.eps_fp * n as f64).floor() as u128;
    let fn_floor = (q.eps_fn * k as f64).floor() as u64;
    let tp_ceil = ((1.0 - q.eps_fn) * k as f64).ceil() as u64;
    let exact = log2_binomial(n, k)
        - ((k as f64).log2()
            + log2_binomial(fp_floor + k as u128, tp_ceil)
            + log2_binomial(n, fn_floor));

    let base = q.eps_fp + k as f64 / n as f64;
    let mut relaxed = k as f64 * (1.0 / base).log2()
        - k as f64 * (std::f64::consts::E / (1.0 - q.eps_fn)).log2()
        - (k as f64).log2();
    if q.eps_fn > 0.0 {
        relaxed -= q.eps_fn * k as f64 * ((1.0 - q.eps_fn) / (q.eps_fn * base)).log2();
    }
    Ok(FpFnLowerBound { exact, relaxed })
}

/// Tightened lower bound when no false negatives are allowed:
/// K·log2(1/ε_fp) − log2(e)(1−ε_fp)K² / (ε_fp N + (1−ε_fp)K).
pub fn b_lower_fp(population: u128, k: u64, eps_fp: f64) -> Result<f64, BoundsError> {
    if !(0.0 < eps_fp && eps_fp < 0.5) {
        return Err(BoundsError::Domain(format!(
            "lower bound requires 0 < eps_fp < 1/2 (got {eps_fp})"
        )));
    }
    let n = population as f64;
    let kf = k as f64;
    Ok(kf * (1.0 / eps_fp).log2()
        - LOG2_E * (1.0 - eps_fp) * kf * kf / (eps_fp * n + (1.0 - eps_fp) * kf))
}

/// Set-cover achievability bound (no false negatives), exact and relaxed.
/// Requires K ≤ ⌊N·ε_fp⌋ so that a covering subset exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpUpperBound {
    /// log2 C(N,K) − log2 C(⌊Nε_fp⌋,K) + log2(1 + ln C(⌊Nε_fp⌋,K))
    pub exact: f64,
    /// K·log2(e/ε_fp) + log2(1 + K·ln(Nε_fp/K))
    pub relaxed: f64,
}

pub fn b_upper_fp(population: u128, k: u64, eps_fp: f64) -> Result<FpUpperBound, BoundsError> {
    if !(0.0 < eps_fp && eps_fp < 1.0) {
        return Err(BoundsError::Domain(format!("eps_fp {eps_fp} outside (0,1)")));
    }
    let w = (eps_fp * population as f64).floor() as u128;
    if (k as u128) > w {
        return Err(BoundsError::Domain(format!(
            "achievability requires K <= floor(N*eps_fp) (k={k}, floor={w})"
        )));
    }
    if k == 0 {
        return Ok(FpUpperBound { exact: 0.0, relaxed: 0.0 });
    }
    let log2_cover = log2_binomial(w, k);
    let ln_cover = log2_cover * std::f64::consts::LN_2;
    let exact = log2_binomial(population, k) - log2_cover + (1.0 + ln_cover).log2();
    let kf = k as f64;
    let relaxed = kf * (std::f64::consts::E / eps_fp).log2()
        + (1.0 + kf * (eps_fp * population as f64 / kf).ln()).log2();
    Ok(FpUpperBound { exact, relaxed })
}

/// Expected false positive probability when K is random with the given mean
/// and variance and the asymptotic scheme is used at B bits:
/// bound 2^{-B/K̄} + 2.66·Var[K]/B² (first-order Taylor with the printed
/// remainder constant).
pub fn expected_fp_bound(k_mean: f64, k_var: f64, bits: u64) -> Result<f64, BoundsError> {
    if bits == 0 || k_mean <= 0.0 || k_var < 0.0 {
        return Err(BoundsError::Domain("need B > 0, K̄ > 0, Var[K] >= 0".into()));
    }
    let b = bits as f64;
    Ok(2f64.powf(-b / k_mean) + 2.66 * k_var / (b * b))
}

/// Chebyshev bound on Pr(ε_fp > ε̃_fp): Var[K] / (B/log2(1/ε̃) − K̄)².
/// Requires ε̃ ≥ 2^{-B/K̄}; the value is capped at 1 where vacuous.
pub fn exceed_prob_chebyshev(
    k_mean: f64,
    k_var: f64,
    bits: u64,
    eps_tilde: f64,
) -> Result<f64, BoundsError> {
    check_exceed_domain(k_mean, bits, eps_tilde)?;
    if k_var < 0.0 {
        return Err(BoundsError::Domain("Var[K] must be nonnegative".into()));
    }
    let gap = bits as f64 / (1.0 / eps_tilde).log2() - k_mean;
    if gap <= 0.0 {
        return Ok(1.0); // hypothesis boundary: the bound says nothing
    }
    Ok((k_var / (gap * gap)).min(1.0))
}

/// Chernoff bound for independent activations on Pr(ε_fp > ε̃_fp):
/// (e^{η−1}/η^η)^K̄ with η = B/(K̄·log2(1/ε̃)). Only the mean enters.
pub fn exceed_prob_chernoff(k_mean: f64, bits: u64, eps_tilde: f64) -> Result<f64, BoundsError> {
    check_exceed_domain(k_mean, bits, eps_tilde)?;
    let eta = bits as f64 / (k_mean * (1.0 / eps_tilde).log2());
    Ok((k_mean * (eta - 1.0 - eta * eta.ln())).exp().min(1.0))
}

fn check_exceed_domain(k_mean: f64, bits: u64, eps_tilde: f64) -> Result<(), BoundsError> {
    if bits == 0 || k_mean <= 0.0 || !(0.0 < eps_tilde && eps_tilde < 1.0) {
        return Err(BoundsError::Domain("need B > 0, K̄ > 0, ε̃ in (0,1)".into()));
    }
    if eps_tilde < 2f64.powf(-(bits as f64) / k_mean) {
        return Err(BoundsError::Domain(format!(
            "hypothesis requires eps_tilde >= 2^(-B/K̄) (eps_tilde={eps_tilde}, B={bits}, K̄={k_mean})"
        )));
    }
    Ok(())
}

/// Message-length selection rules for random user activity. Every bound is
/// non-increasing in B, so the smallest admissible B is found by bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    /// Smallest B with E[ε_fp] bound ≤ target (expected-error rule).
    ExpectedFp { k_mean: f64, k_var: f64, target: f64 },
    /// Smallest B with Pr(ε_fp > ε̃) ≤ δ by the Chebyshev bound.
    ExceedChebyshev { k_mean: f64, k_var: f64, eps_tilde: f64, delta: f64 },
    /// Smallest B with Pr(ε_fp > ε̃) ≤ δ by the Chernoff bound.
    ExceedChernoff { k_mean: f64, eps_tilde: f64, delta: f64 },
}

pub fn select_message_length(rule: &SelectionRule) -> Result<u64, BoundsError> {
    let satisfied = |bits: u64| -> bool {
        match *rule {
            SelectionRule::ExpectedFp { k_mean, k_var, target } => {
                expected_fp_bound(k_mean, k_var, bits).map(|v| v <= target).unwrap_or(false)
            }
            SelectionRule::ExceedChebyshev { k_mean, k_var, eps_tilde, delta } => {
                exceed_prob_chebyshev(k_mean, k_var, bits, eps_tilde)
                    .map(|v| v <= delta)
                    .unwrap_or(false)
            }
            SelectionRule::ExceedChernoff { k_mean, eps_tilde, delta } => {
                exceed_prob_chernoff(k_mean, bits, eps_tilde)
                    .map(|v| v <= delta)
                    .unwrap_or(false)
            }
        }
    };
    if !satisfied(MAX_SELECTABLE_BITS) {
        return Err(BoundsError::Unachievable);
    }
    let (mut lo, mut hi) = (1u64, MAX_SELECTABLE_BITS);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if satisfied(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Exact E[ε_fp] for Poisson(λ) activity under the asymptotic model
/// ε_fp(K,B) = 2^{-B/K} (and ε_fp(0,B) = 0), tails truncated at 1e-12.
pub fn poisson_expected_fp_exact(lambda: f64, bits: u64) -> f64 {
    let (k_lo, weights) = poisson_weights(lambda, POISSON_TAIL);
    weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let k = k_lo + i as u64;
            if k == 0 {
                0.0
            } else {
                w * 2f64.powf(-(bits as f64) / k as f64)
            }
        })
        .sum()
}

/// Exact Pr(ε_fp > ε̃) for Poisson(λ) activity under the asymptotic model:
/// the event is K > B/log2(1/ε̃).
pub fn poisson_exceed_exact(lambda: f64, bits: u64, eps_tilde: f64) -> f64 {
    let threshold = bits as f64 / (1.0 / eps_tilde).log2();
    poisson_tail_gt(lambda, threshold.floor() as u64)
}
