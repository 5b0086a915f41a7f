//! Monte-Carlo validation of the analytics, with the real codecs in the loop.
//!
//! Two experiment kinds: false-positive measurement (encode a random decoded
//! set, probe non-members) and full L-round retransmission runs from the
//! perspective of one tagged user among a random background cohort. Trials
//! are independent —每 per-trial seed is derived from (master seed, index) by
//! the keyed mixer — so results do not depend on scheduling or parallelism.

pub mod figures;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::arq::Downlink;
use crate::codec::{
    le, naive_concat, CodecError, DecodedSet, Decoder, EnumerativeConfig, FeedbackMessage,
    LeConfig, NaiveConcatConfig, SchemeConfig,
};
use crate::hashing::derive_seed;
use crate::numeric::binomial;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("codec error: {0}")]
    Codec(#[from] CodecError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("unknown figure id '{0}'")]
    UnknownFigure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// How many users the decoder recovers in one frame.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Arrival {
    Fixed(u64),
    Poisson(f64),
    /// `users` independent activations with the same probability.
    Bernoulli { users: u64, prob: f64 },
}

impl Arrival {
    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        match *self {
            Arrival::Fixed(k) => k,
            Arrival::Poisson(lambda) => sample_poisson(lambda, rng),
            Arrival::Bernoulli { users, prob } => {
                (0..users).filter(|_| rng.gen::<f64>() < prob).count() as u64
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Arrival::Fixed(k) => k as f64,
            Arrival::Poisson(lambda) => lambda,
            Arrival::Bernoulli { users, prob } => users as f64 * prob,
        }
    }
}

/// Poisson sampling by CDF inversion; λ above 500 is split in half
/// recursively (sums of independent Poissons) to keep e^{-λ} in range.
pub fn sample_poisson(lambda: f64, rng: &mut impl Rng) -> u64 {
    assert!((0.0..=1.0e6).contains(&lambda), "sample_poisson domain");
    if lambda == 0.0 {
        return 0;
    }
    if lambda > 500.0 {
        return sample_poisson(lambda / 2.0, rng) + sample_poisson(lambda - lambda / 2.0, rng);
    }
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    let cap = (lambda + 40.0 * lambda.sqrt() + 40.0) as u64;
    while u >= cdf && k < cap {
        k += 1;
        pmf *= lambda / k as f64;
        cdf += pmf;
    }
    k
}

/// Gamma(shape, scale) with integer shape, as a sum of shape exponentials.
pub fn sample_gamma_int(shape: u32, scale: f64, rng: &mut impl Rng) -> f64 {
    let mut acc = 0.0;
    for _ in 0..shape {
        let u: f64 = rng.gen(); // [0, 1)
        acc -= (1.0 - u).ln();
    }
    acc * scale
}

/// Binomial standard error sqrt(p̂(1−p̂)/n).
pub fn binomial_se(p_hat: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

/// Draw `k` distinct identifiers below `population`, none equal to `exclude`.
fn sample_cohort(
    population: u128,
    k: u64,
    exclude: Option<u64>,
    rng: &mut impl Rng,
) -> Vec<u64> {
    debug_assert!((k as u128) < population);
    let mut set = std::collections::HashSet::with_capacity(k as usize);
    while (set.len() as u64) < k {
        let id = if population == crate::codec::MAX_POPULATION {
            rng.gen::<u64>()
        } else {
            rng.gen_range(0..population as u64)
        };
        if Some(id) != exclude {
            set.insert(id);
        }
    }
    set.into_iter().collect()
}

// ---------------------------------------------------------------------------
// False-positive measurement
// ---------------------------------------------------------------------------

/// Encode random sets and probe non-members. Several independent encodes
/// keep the per-message conditioning (e.g. Bloom occupancy) from biasing the
/// aggregate rate.
#[derive(Debug, Clone)]
pub struct FpSimConfig {
    pub population: u128,
    pub arrival: Arrival,
    pub scheme: SchemeConfig,
    pub encodes: u64,
    pub probes_per_encode: u64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct FpReport {
    pub encodes: u64,
    pub probes: u64,
    pub false_positives: u64,
    pub member_checks: u64,
    pub false_negatives: u64,
    /// Members dropped by the overload policy (counted separately from
    /// scheme-level false negatives).
    pub capacity_drops: u64,
    pub fp_rate: f64,
    pub fp_se: f64,
    pub fn_rate: f64,
}

struct FpTally {
    probes: u64,
    false_positives: u64,
    member_checks: u64,
    false_negatives: u64,
    capacity_drops: u64,
}

pub fn run_fp_trial(cfg: &FpSimConfig) -> Result<FpReport, SimError> {
    if cfg.encodes == 0 {
        return Err(SimError::InvalidConfig("need at least one encode".into()));
    }
    let tallies: Result<Vec<FpTally>, SimError> = (0..cfg.encodes)
        .into_par_iter()
        .map(|e| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, e));
            let k = cfg.arrival.sample(&mut rng);
            if k as u128 >= cfg.population {
                return Err(SimError::InvalidConfig(format!(
                    "arrival k={k} leaves no non-members in population {}",
                    cfg.population
                )));
            }
            let set = DecodedSet::new(
                cfg.population,
                sample_cohort(cfg.population, k, None, &mut rng),
            )
            .map_err(SimError::Codec)?;
            let (msg, kept) = cfg.scheme.encode_capped(&set, &mut rng)?;
            let decoder = Decoder::new(&cfg.scheme, &msg)?;

            let mut t = FpTally {
                probes: 0,
                false_positives: 0,
                member_checks: set.k() as u64,
                false_negatives: 0,
                capacity_drops: (set.k() - kept.k()) as u64,
            };
            for &m in set.members() {
                if !decoder.query(m) && kept.contains(m) {
                    t.false_negatives += 1;
                }
            }
            for _ in 0..cfg.probes_per_encode {
                let id = loop {
                    let cand = if cfg.population == crate::codec::MAX_POPULATION {
                        rng.gen::<u64>()
                    } else {
                        rng.gen_range(0..cfg.population as u64)
                    };
                    if !set.contains(cand) {
                        break cand;
                    }
                };
                t.probes += 1;
                if decoder.query(id) {
                    t.false_positives += 1;
                }
            }
            Ok(t)
        })
        .collect();

    let mut report = FpReport { encodes: cfg.encodes, ..FpReport::default() };
    for t in tallies? {
        report.probes += t.probes;
        report.false_positives += t.false_positives;
        report.member_checks += t.member_checks;
        report.false_negatives += t.false_negatives;
        report.capacity_drops += t.capacity_drops;
    }
    report.fp_rate = report.false_positives as f64 / report.probes.max(1) as f64;
    report.fp_se = binomial_se(report.fp_rate, report.probes);
    report.fn_rate = report.false_negatives as f64 / report.member_checks.max(1) as f64;
    Ok(report)
}

/// First-trial singular rate of the solver-based encoder: fraction of random
/// sets whose initial hash trial produced a rank-deficient system (the retry
/// trigger). Full-rank theory bounds this by 1/(2^b − 1).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LeRetryReport {
    pub encodes: u64,
    pub retried: u64,
    pub rate: f64,
    pub se: f64,
}

pub fn measure_le_retry_rate(
    cfg: &LeConfig,
    population: u128,
    k: u64,
    encodes: u64,
    master_seed: u64,
) -> Result<LeRetryReport, SimError> {
    if encodes == 0 {
        return Err(SimError::InvalidConfig("need at least one encode".into()));
    }
    let retried: u64 = (0..encodes)
        .into_par_iter()
        .map(|e| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, e));
            let set = DecodedSet::sample(population, k as usize, &mut rng);
            let msg = le::encode(&set, cfg)?;
            Ok(u64::from(le::LeDecoder::new(&msg, cfg)?.trial() > 0))
        })
        .collect::<Result<Vec<u64>, SimError>>()?
        .into_iter()
        .sum();
    let rate = retried as f64 / encodes as f64;
    Ok(LeRetryReport { encodes, retried, rate, se: binomial_se(rate, encodes) })
}

// ---------------------------------------------------------------------------
// L-round retransmission runs
// ---------------------------------------------------------------------------

/// Which codec the base station runs each round.
#[derive(Debug, Clone)]
pub enum ArqScheme {
    /// One fixed configuration reused in every round.
    Fixed(SchemeConfig),
    /// A fixed payload budget divided per round according to the
    /// instantaneous cardinality.
    Budgeted { kind: BudgetKind, bits: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BudgetKind {
    LinearEquations,
    ErrorFree,
    NaiveConcat,
}

#[derive(Debug, Clone)]
pub struct ArqSimConfig {
    pub population: u128,
    /// Decoded users per round besides the tagged one.
    pub arrival: Arrival,
    pub eps_ul: f64,
    pub channel: Downlink,
    pub scheme: ArqScheme,
    pub rounds: u32,
    pub trials: u64,
    pub master_seed: u64,
    /// Frame length used for the fading-outage rate when the scheme is
    /// `Fixed`; budgeted schemes transmit at their budget.
    pub fixed_rate_bits: Option<u64>,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct ArqReport {
    pub trials: u64,
    pub failures: u64,
    /// Failures caused by a spurious acknowledgment (unrepairable kind).
    pub false_positive_stops: u64,
    /// Failures by exhausting all rounds.
    pub exhausted: u64,
    pub successes: u64,
    pub rounds_total: u64,
    /// Successful decodes per round index (1-based): entry r-1 counts the
    /// transmissions that concluded with an acknowledgment in round r.
    pub success_by_round: Vec<u64>,
    pub pr_fail: f64,
    pub se: f64,
    pub mean_rounds: f64,
}

/// Per-trial codec machinery precomputed once: field tables are expensive to
/// rebuild every round.
struct BudgetedCodecs {
    kind: BudgetKind,
    bits: u64,
    k_max: u32,
    le_by_width: Vec<LeConfig>,
    enumerative: EnumerativeConfig,
    /// Largest subset the enumerative payload fits into the budget.
    ef_capacity: u64,
    nc: NaiveConcatConfig,
}

impl BudgetedCodecs {
    fn new(
        kind: BudgetKind,
        bits: u64,
        population: u128,
        arrival: &Arrival,
        seed: u64,
    ) -> Result<Self, SimError> {
        // Generous cap on per-round cardinality; Poisson mass beyond is
        // negligible and clamped.
        let k_max = (8.0 * arrival.mean().max(8.0)).ceil() as u32 + 16;
        let le_by_width = (0..=32u32)
            .map(|w| LeConfig::with_element_bits(w, k_max, seed))
            .collect::<Result<Vec<_>, _>>()?;
        let enumerative = EnumerativeConfig::new(population, k_max)?;
        let mut ef_capacity = 0u64;
        while ef_capacity < k_max as u64 {
            let need = binomial(population, ef_capacity + 1);
            if crate::numeric::ceil_log2_biguint(&need) > bits {
                break;
            }
            ef_capacity += 1;
        }
        Ok(BudgetedCodecs {
            kind,
            bits,
            k_max,
            le_by_width,
            enumerative,
            ef_capacity,
            nc: NaiveConcatConfig::with_budget(bits as usize),
        })
    }

    /// Encode one round's decoded set under the budget; returns the message
    /// and whether the tagged user survived any overload drop.
    fn encode_round(
        &self,
        set: &DecodedSet,
        rng: &mut impl Rng,
    ) -> Result<(FeedbackMessage, SchemeView), SimError> {
        match self.kind {
            BudgetKind::LinearEquations => {
                let k = set.k() as u64;
                // empty set: any width works, the message is just the header
                let width = self.bits.checked_div(k).map_or(1, |w| w.min(32)) as usize;
                let cfg = &self.le_by_width[width];
                let msg = le::encode(set, cfg)?;
                Ok((msg, SchemeView::Le(cfg.clone())))
            }
            BudgetKind::ErrorFree => {
                let kept = if set.k() as u64 > self.ef_capacity {
                    set.random_subset(self.ef_capacity as usize, rng)
                } else {
                    set.clone()
                };
                let msg = crate::codec::enumerative::encode(&kept, &self.enumerative)?;
                Ok((msg, SchemeView::Enumerative(self.enumerative.clone())))
            }
            BudgetKind::NaiveConcat => {
                let cap = self.nc.capacity_ids().unwrap();
                let kept = if set.k() > cap { set.random_subset(cap, rng) } else { set.clone() };
                let msg = naive_concat::encode(&kept, &self.nc)?;
                Ok((msg, SchemeView::NaiveConcat(self.nc.clone())))
            }
        }
    }
}

/// Decode-side view of the per-round configuration.
enum SchemeView {
    Le(LeConfig),
    Enumerative(EnumerativeConfig),
    NaiveConcat(NaiveConcatConfig),
}

impl SchemeView {
    fn query(&self, msg: &FeedbackMessage, id: u64) -> Result<bool, CodecError> {
        match self {
            SchemeView::Le(c) => Ok(le::LeDecoder::new(msg, c)?.query(id)),
            SchemeView::Enumerative(c) => {
                Ok(crate::codec::enumerative::EnumerativeDecoder::new(msg, c)?.query(id))
            }
            SchemeView::NaiveConcat(c) => {
                Ok(naive_concat::NaiveConcatDecoder::new(msg, c)?.query(id))
            }
        }
    }
}

enum TrialOutcome {
    Success { rounds: u32 },
    FalsePositiveStop { rounds: u32 },
    Exhausted,
}

pub fn run_arq_trial(cfg: &ArqSimConfig) -> Result<ArqReport, SimError> {
    if cfg.trials == 0 {
        return Err(SimError::InvalidConfig("need at least one trial".into()));
    }
    if !(0.0..=1.0).contains(&cfg.eps_ul) {
        return Err(SimError::InvalidConfig(format!("eps_ul {} outside [0,1]", cfg.eps_ul)));
    }
    let budgeted = match &cfg.scheme {
        ArqScheme::Budgeted { kind, bits } => Some(BudgetedCodecs::new(
            *kind,
            *bits,
            cfg.population,
            &cfg.arrival,
            derive_seed(cfg.master_seed, 0xC0DEC),
        )?),
        ArqScheme::Fixed(_) => None,
    };
    let rate_bits = match &cfg.scheme {
        ArqScheme::Budgeted { bits, .. } => Some(*bits),
        ArqScheme::Fixed(_) => cfg.fixed_rate_bits,
    };
    let outage_threshold = match (&cfg.channel, rate_bits) {
        (Downlink::Fading(ch), Some(bits)) => {
            Some(2f64.powf(bits as f64 / ch.symbols as f64) - 1.0)
        }
        (Downlink::Fading(_), None) => {
            return Err(SimError::InvalidConfig(
                "fading channel needs a frame length (budget or fixed_rate_bits)".into(),
            ))
        }
        (Downlink::Erasure(_), _) => None,
    };

    let outcomes: Result<Vec<(u64, u64, u64, u64, u32)>, SimError> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, t));
            let outcome = run_one_transmission(cfg, budgeted.as_ref(), outage_threshold, &mut rng)?;
            Ok(match outcome {
                TrialOutcome::Success { rounds } => (1, 0, 0, rounds as u64, rounds),
                TrialOutcome::FalsePositiveStop { rounds } => (0, 1, 0, rounds as u64, 0),
                TrialOutcome::Exhausted => (0, 0, 1, cfg.rounds as u64, 0),
            })
        })
        .collect();

    let mut report = ArqReport {
        trials: cfg.trials,
        success_by_round: vec![0; cfg.rounds as usize],
        ..ArqReport::default()
    };
    for (succ, fp_stop, exhausted, rounds, success_round) in outcomes? {
        report.successes += succ;
        report.false_positive_stops += fp_stop;
        report.exhausted += exhausted;
        report.rounds_total += rounds;
        if success_round > 0 {
            report.success_by_round[success_round as usize - 1] += 1;
        }
    }
    report.failures = report.false_positive_stops + report.exhausted;
    report.pr_fail = report.failures as f64 / cfg.trials as f64;
    report.se = binomial_se(report.pr_fail, cfg.trials);
    report.mean_rounds = report.rounds_total as f64 / cfg.trials as f64;
    Ok(report)
}

fn run_one_transmission(
    cfg: &ArqSimConfig,
    budgeted: Option<&BudgetedCodecs>,
    outage_threshold: Option<f64>,
    rng: &mut impl Rng,
) -> Result<TrialOutcome, SimError> {
    let tagged = if cfg.population == crate::codec::MAX_POPULATION {
        rng.gen::<u64>()
    } else {
        rng.gen_range(0..cfg.population as u64)
    };
    for round in 1..=cfg.rounds {
        // Total decoded cardinality this round; the tagged user occupies one
        // slot when its uplink goes through.
        let others = match budgeted {
            Some(b) => cfg.arrival.sample(rng).min(b.k_max as u64 - 1),
            None => cfg.arrival.sample(rng),
        };
        let uplink_ok = rng.gen::<f64>() >= cfg.eps_ul;
        let mut members = sample_cohort(cfg.population, others, Some(tagged), rng);
        if uplink_ok {
            members.push(tagged);
        }
        let set = DecodedSet::new(cfg.population, members).map_err(SimError::Codec)?;

        let erased = match (&cfg.channel, outage_threshold) {
            (Downlink::Erasure(p), _) => rng.gen::<f64>() < *p,
            (Downlink::Fading(ch), Some(thr)) => {
                sample_gamma_int(ch.antennas, ch.scale(), rng) < thr
            }
            (Downlink::Fading(_), None) => unreachable!("validated in run_arq_trial"),
        };

        // The base station encodes regardless; the user only reads the
        // message if it was not erased.
        let positive = match (&cfg.scheme, budgeted) {
            (ArqScheme::Fixed(sc), _) => {
                let (msg, _kept) = sc.encode_capped(&set, rng)?;
                if erased {
                    false
                } else {
                    sc.decode(Some(&msg), tagged)?
                }
            }
            (ArqScheme::Budgeted { .. }, Some(b)) => {
                let (msg, view) = b.encode_round(&set, rng)?;
                if erased {
                    false
                } else {
                    view.query(&msg, tagged)?
                }
            }
            (ArqScheme::Budgeted { .. }, None) => unreachable!(),
        };

        if positive {
            return Ok(if uplink_ok {
                TrialOutcome::Success { rounds: round }
            } else {
                TrialOutcome::FalsePositiveStop { rounds: round }
            });
        }
    }
    Ok(TrialOutcome::Exhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arq::{pr_fail, ArqParams, FadingChannel};
    use crate::codec::BloomConfig;
    use crate::numeric::poisson_weights;

    #[test]
    fn poisson_sampler_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &lambda in &[3.0f64, 100.0, 1500.0] {
            let n = 40_000;
            let sum: f64 = (0..n).map(|_| sample_poisson(lambda, &mut rng) as f64).sum();
            let mean = sum / n as f64;
            let sigma = (lambda / n as f64).sqrt();
            assert!((mean - lambda).abs() < 5.0 * sigma, "lambda={lambda}: mean {mean}");
        }
    }

    #[test]
    fn gamma_sampler_matches_erlang_cdf() {
        // The outage model must agree with sampled Gamma variates.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = FadingChannel::from_snr_db(0.0, 64, 2048).unwrap();
        let bits = 1600u64;
        let threshold = 2f64.powf(bits as f64 / 2048.0) - 1.0;
        let n = 200_000;
        let below = (0..n)
            .filter(|_| sample_gamma_int(64, ch.scale(), &mut rng) < threshold)
            .count();
        let p_hat = below as f64 / n as f64;
        let p = ch.outage(bits);
        assert!(
            (p_hat - p).abs() < 4.0 * binomial_se(p, n as u64),
            "sampled {p_hat} vs analytic {p}"
        );
    }

    #[test]
    fn fp_trial_enumerative_is_error_free() {
        let cfg = FpSimConfig {
            population: 1 << 20,
            arrival: Arrival::Fixed(30),
            scheme: SchemeConfig::Enumerative(EnumerativeConfig::new(1 << 20, 64).unwrap()),
            encodes: 8,
            probes_per_encode: 5_000,
            master_seed: 0xE0,
        };
        let r = run_fp_trial(&cfg).unwrap();
        assert_eq!(r.false_positives, 0);
        assert_eq!(r.false_negatives, 0);
        assert_eq!(r.capacity_drops, 0);
        assert_eq!(r.probes, 40_000);
    }

    #[test]
    fn fp_trial_bloom_poisson_mixture_matches_oracle() {
        // Fixed filter, Poisson K: measured fp within 4σ of Σ p(K) fp(K,B).
        let bloom = BloomConfig::new(960, 7, 0x1234).unwrap();
        let lambda = 100.0;
        let cfg = FpSimConfig {
            population: 1 << 32,
            arrival: Arrival::Poisson(lambda),
            scheme: SchemeConfig::Bloom(bloom.clone()),
            encodes: 256,
            probes_per_encode: 2_000,
            master_seed: 0xB10,
        };
        let r = run_fp_trial(&cfg).unwrap();
        let (k_lo, w) = poisson_weights(lambda, 1e-10);
        let oracle: f64 = w
            .iter()
            .enumerate()
            .map(|(i, &p)| p * bloom.analytic_fp_exact((k_lo + i as u64) as usize))
            .sum();
        assert!(
            (r.fp_rate - oracle).abs() < 4.0 * binomial_se(oracle, r.probes),
            "measured {} vs oracle {oracle}",
            r.fp_rate
        );
        assert_eq!(r.false_negatives, 0);
    }

    #[test]
    fn arq_trial_perfect_channels_never_fail() {
        let cfg = ArqSimConfig {
            population: 1 << 20,
            arrival: Arrival::Fixed(20),
            eps_ul: 0.0,
            channel: Downlink::Erasure(0.0),
            scheme: ArqScheme::Fixed(SchemeConfig::Enumerative(
                EnumerativeConfig::new(1 << 20, 64).unwrap(),
            )),
            rounds: 3,
            trials: 2_000,
            master_seed: 7,
            fixed_rate_bits: None,
        };
        let r = run_arq_trial(&cfg).unwrap();
        assert_eq!(r.failures, 0);
        assert_eq!(r.successes, 2_000);
        assert_eq!(r.mean_rounds, 1.0);
        assert_eq!(r.success_by_round, vec![2_000, 0, 0]);
    }

    #[test]
    fn arq_trial_matches_analytic_erasure_point() {
        // One point of the erasure grid: ε_ul=0.1, ε_dl=0.2, b=7 solver
        // codec (ε_fp = 2^-7, ε_fn = 0), L = 3.
        let le = LeConfig::new(0.01, 64, 0xFEED).unwrap();
        let cfg = ArqSimConfig {
            population: 1 << 32,
            arrival: Arrival::Fixed(30),
            eps_ul: 0.1,
            channel: Downlink::Erasure(0.2),
            scheme: ArqScheme::Fixed(SchemeConfig::LinearEquations(le.clone())),
            rounds: 3,
            trials: 40_000,
            master_seed: 0xA3,
            fixed_rate_bits: None,
        };
        let r = run_arq_trial(&cfg).unwrap();
        let predicted = pr_fail(
            &ArqParams::new(0.1, 0.2, le.analytic_fp(), 0.0, 3).unwrap(),
        );
        assert!(
            (r.pr_fail - predicted).abs() < 4.0 * binomial_se(predicted, cfg.trials),
            "sim {} vs analytic {predicted}",
            r.pr_fail
        );
        assert_eq!(r.success_by_round.iter().sum::<u64>(), r.successes);
        // per-round successes decay geometrically with the proceed probability
        let p = ArqParams::new(0.1, 0.2, le.analytic_fp(), 0.0, 3).unwrap();
        let ratio = r.success_by_round[1] as f64 / r.success_by_round[0] as f64;
        assert!(
            (ratio - p.proceed_probability()).abs() < 0.02,
            "round-2/round-1 ratio {ratio} vs proceed {}",
            p.proceed_probability()
        );
    }

    #[test]
    fn deterministic_given_master_seed() {
        let cfg = FpSimConfig {
            population: 1 << 24,
            arrival: Arrival::Poisson(40.0),
            scheme: SchemeConfig::Bloom(BloomConfig::new(480, 7, 5).unwrap()),
            encodes: 16,
            probes_per_encode: 1_000,
            master_seed: 99,
        };
        let a = run_fp_trial(&cfg).unwrap();
        let b = run_fp_trial(&cfg).unwrap();
        assert_eq!(a.false_positives, b.false_positives);
        assert_eq!(a.probes, b.probes);
    }

    #[test]
    fn bernoulli_arrival_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let arrival = Arrival::Bernoulli { users: 1000, prob: 0.1 };
        let n = 5_000;
        let sum: f64 = (0..n).map(|_| arrival.sample(&mut rng) as f64).sum();
        let mean = sum / n as f64;
        assert!((mean - 100.0).abs() < 2.0, "mean {mean}");
    }
}
