//! Monte Carlo certification of the coupling: mismatch rate against the
//! closed-form distance, marginal and joint-cell checks, the additive-cost
//! identity, and regeneration statistics.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coupling::{CertifiedPair, CoupledPair};
use crate::error::{Error, Result};
use crate::kernel::{continuity_rate, ChainSpec, HazardSequence, MarkovTable};
use crate::regeneration::{perfect_sample, CoupledPath};
use crate::rng::TimeKeyedRandomness;
use crate::stats::{chi_square, mean, std_error, ChiSquare};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Forward truncation depth for regeneration marks.
pub const DEFAULT_TRUNCATION: usize = 64;

/// Absolute floor in the optimality and lower-bound checks.
pub const DBAR_TOLERANCE: f64 = 1e-3;

/// Significance level for the goodness-of-fit tests.
pub const CHI_SQUARE_LEVEL: f64 = 1e-3;

/// Target truncation error of the closed-form renewal marginal.
const RENEWAL_TAIL: f64 = 1e-13;

const RENEWAL_MAX_TERMS: usize = 50_000_000;

/// How to obtain a stationary marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    ClosedForm,
    /// Simulate from an all-ones past, drop `burn_in` steps, average `length`.
    ForwardSim { burn_in: usize, length: usize, seed: u64 },
}

impl OracleMethod {
    pub fn label(&self) -> &'static str {
        match self {
            OracleMethod::ClosedForm => "closed_form",
            OracleMethod::ForwardSim { .. } => "forward_sim",
        }
    }
}

/// `P(X_0 = 1)` with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalEstimate {
    pub value: f64,
    /// Monte Carlo standard error (0 for closed forms).
    pub std_error: f64,
    /// Deterministic error bound: truncation for closed forms, burn-in bias
    /// for forward simulation.
    pub bias_bound: f64,
    pub method: &'static str,
}

/// Stationary `P(X_0 = 1)`.
pub fn marginal_oracle(spec: &ChainSpec, method: OracleMethod) -> Result<MarginalEstimate> {
    match method {
        OracleMethod::ClosedForm => {
            let (value, bias_bound) = match spec {
                ChainSpec::Iid { p } => (*p, 0.0),
                ChainSpec::FiniteMarkov(table) => (markov_marginal(table)?, 0.0),
                ChainSpec::Renewal(h) => renewal_marginal(h)?,
            };
            Ok(MarginalEstimate { value, std_error: 0.0, bias_bound, method: method.label() })
        }
        OracleMethod::ForwardSim { burn_in, length, seed } => {
            if length == 0 {
                return Err(Error::Usage("forward simulation needs a positive length".into()));
            }
            let (value, std_error) = forward_sim(spec, burn_in, length, seed);
            let bias_bound = burn_in_bias(spec, burn_in, length);
            Ok(MarginalEstimate { value, std_error, bias_bound, method: method.label() })
        }
    }
}

/// Stationary law of the chain on the `2^order` lag-indexed states.
pub fn markov_stationary(table: &MarkovTable) -> Result<Vec<f64>> {
    let n = 1usize << table.order();
    let mask = n - 1;
    // columns sum to one: a[next][state]
    let mut a = DMatrix::<f64>::zeros(n, n);
    for s in 0..n {
        let p1 = table.get(s);
        a[(((s << 1) | 1) & mask, s)] += p1;
        a[((s << 1) & mask, s)] += 1.0 - p1;
    }
    let mut m = a.clone() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let pi = m.lu().solve(&b).ok_or_else(|| Error::NotErgodic("no unique stationary law".into()))?;
    let residual = (&a * &pi - &pi).amax();
    if pi.iter().any(|&v| !v.is_finite() || v < -1e-12) || residual > 1e-9 {
        return Err(Error::NotErgodic("no unique stationary law".into()));
    }
    Ok(pi.iter().map(|v| v.max(0.0)).collect())
}

fn markov_marginal(table: &MarkovTable) -> Result<f64> {
    let pi = markov_stationary(table)?;
    Ok(pi.iter().enumerate().map(|(s, w)| w * table.get(s)).sum())
}

/// `1 / mu` with `mu = 1 + sum_{k>=1} prod_{j<=k} (1 - q_j)`, plus the
/// truncation error.
fn renewal_marginal(h: &HazardSequence) -> Result<(f64, f64)> {
    let q_inf = h.q_inf();
    let tail_factor = (1.0 - q_inf) / q_inf;
    let (mut mu, mut prod) = (1.0, 1.0);
    for k in 1..=RENEWAL_MAX_TERMS {
        prod *= 1.0 - h.at(k);
        mu += prod;
        // the remaining terms are at most prod * sum_{i>=1} (1 - q_inf)^i
        let tail = prod * tail_factor;
        if tail < RENEWAL_TAIL * mu {
            return Ok((1.0 / mu, 1.0 / mu - 1.0 / (mu + tail)));
        }
    }
    Err(Error::Unsupported("renewal marginal does not converge within the term limit".into()))
}

fn forward_sim(spec: &ChainSpec, burn_in: usize, length: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SimState::all_ones(spec);
    for _ in 0..burn_in {
        let u: f64 = rng.random();
        state.step(spec, u);
    }
    let batches = length.min(50);
    let mut sums = vec![0.0; batches];
    for i in 0..length {
        let u: f64 = rng.random();
        sums[i * batches / length] += state.step(spec, u) as f64;
    }
    let means: Vec<f64> = sums
        .iter()
        .enumerate()
        .map(|(b, s)| {
            let size = (b + 1) * length / batches - b * length / batches;
            s / size as f64
        })
        .collect();
    let total: f64 = sums.iter().sum::<f64>() / length as f64;
    (total, std_error(&means))
}

enum SimState {
    Iid,
    Markov(usize),
    Renewal(usize),
}

impl SimState {
    fn all_ones(spec: &ChainSpec) -> Self {
        match spec {
            ChainSpec::Iid { .. } => SimState::Iid,
            ChainSpec::FiniteMarkov(t) => SimState::Markov((1 << t.order()) - 1),
            ChainSpec::Renewal(_) => SimState::Renewal(1),
        }
    }

    fn step(&mut self, spec: &ChainSpec, u: f64) -> u8 {
        match (self, spec) {
            (SimState::Iid, ChainSpec::Iid { p }) => (u < *p) as u8,
            (SimState::Markov(s), ChainSpec::FiniteMarkov(t)) => {
                let a = (u < t.get(*s)) as usize;
                *s = ((*s << 1) | a) & ((1 << t.order()) - 1);
                a as u8
            }
            (SimState::Renewal(ell), ChainSpec::Renewal(h)) => {
                let a = u < h.at(*ell);
                *ell = if a { 1 } else { ell.saturating_add(1) };
                a as u8
            }
            _ => unreachable!("state built from the same spec"),
        }
    }
}

/// Average over the measured steps of a bound on `|P(X_t = 1) - P(X_0 = 1)|`.
///
/// Two copies driven by the same uniforms from different pasts disagree at
/// step `t` with probability `u_t <= beta(t-1) + sum_s u_s beta(t-s-1)`.
fn burn_in_bias(spec: &ChainSpec, burn_in: usize, length: usize) -> f64 {
    const BETA_FLOOR: f64 = 1e-15;
    const BETA_TERMS: usize = 512;
    let mut beta = Vec::new();
    for k in 0..BETA_TERMS {
        let b = continuity_rate(spec, k);
        beta.push(b);
        if b <= BETA_FLOOR {
            break;
        }
    }
    let kmax = beta.len() - 1;
    let dropped = match spec {
        ChainSpec::Renewal(h) => h.tail_excess_sum(kmax + 2),
        _ => 0.0,
    };
    let horizon = burn_in + length;
    let mut u = vec![0.0; horizon + 1];
    let mut measured = 0.0;
    for t in 1..=horizon {
        let mut v = beta.get(t - 1).copied().unwrap_or(0.0) + 2.0 * dropped;
        for s in (t.saturating_sub(kmax + 1)).max(1)..t {
            v += u[s] * beta[t - s - 1];
        }
        u[t] = v.min(1.0);
        if t > burn_in {
            measured += u[t];
        }
    }
    measured / length as f64
}

/// A replica-mean estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    /// Standard error over replica means.
    pub std_error: f64,
}

impl Measured {
    fn from_replicas(v: &[f64]) -> Self {
        Self { value: mean(v), std_error: std_error(v) }
    }

    /// 95% normal half-width.
    pub fn ci(&self) -> f64 {
        Z95 * self.std_error
    }
}

/// One line of a flat report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub name: String,
    pub value: f64,
    pub ci: f64,
    pub theoretical: f64,
    pub pass: bool,
}

impl MetricRow {
    fn new(name: &str, value: f64, ci: f64, theoretical: f64, pass: bool) -> Self {
        Self { name: name.to_string(), value, ci, theoretical, pass }
    }
}

/// Outcome of [`estimate_dbar`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub n_replicas: usize,
    pub window_length: usize,
    pub seed: u64,
    /// Fraction of `t` with `X_t != Y_t`, averaged over replicas.
    pub empirical_mismatch: f64,
    pub ci_halfwidth: f64,
    /// `P(Y_0 = 1) - P(X_0 = 1)` from the closed-form oracles.
    pub theoretical_dbar: f64,
    pub oracle_x: MarginalEstimate,
    pub oracle_y: MarginalEstimate,
    pub marginal_x: Measured,
    pub marginal_y: Measured,
    pub mismatch: Measured,
    pub regen_truncation: usize,
    pub regen_rate_empirical: f64,
    pub regen_rate_std_error: f64,
    pub regen_rate_theoretical: f64,
    pub clamp_warning_count: u64,
    pub replica_mismatch: Vec<f64>,
    /// `mismatch_indicators[r][i]` is `X_i != Y_i` in replica `r`.
    #[serde(skip)]
    pub mismatch_indicators: Vec<Vec<bool>>,
}

impl EstimateReport {
    /// `|empirical - theoretical| <= max(3 ci, 1e-3)`.
    pub fn optimality_holds(&self) -> bool {
        (self.empirical_mismatch - self.theoretical_dbar).abs() <= (3.0 * self.ci_halfwidth).max(DBAR_TOLERANCE)
    }

    /// No coupling beats the distance: `empirical + 3 ci >= theoretical - tol`.
    pub fn lower_bound_holds(&self, tol: f64) -> bool {
        self.empirical_mismatch + 3.0 * self.ci_halfwidth >= self.theoretical_dbar - tol
    }

    pub fn regen_rate_holds(&self) -> bool {
        !self.regen_rate_empirical.is_nan()
            && (self.regen_rate_empirical - self.regen_rate_theoretical).abs() <= 3.0 * self.regen_rate_std_error
    }

    /// Fraction of replicas with `X_i != Y_i`, per window offset `i`.
    pub fn per_offset_mismatch(&self) -> Vec<f64> {
        let r = self.mismatch_indicators.len() as f64;
        (0..self.window_length)
            .map(|i| self.mismatch_indicators.iter().filter(|row| row[i]).count() as f64 / r)
            .collect()
    }

    /// Marginals and joint cells against the oracles, each within 3 sigma
    /// plus the oracle error bound.
    pub fn consistency_rows(&self) -> Vec<MetricRow> {
        let (ox, oy) = (self.oracle_x.value, self.oracle_y.value);
        let slack_x = self.oracle_x.bias_bound;
        let slack_y = self.oracle_y.bias_bound;
        let check = |name: &str, m: &Measured, target: f64, slack: f64| {
            MetricRow::new(name, m.value, m.ci(), target, (m.value - target).abs() <= 3.0 * m.std_error + slack)
        };
        let cell00 = Measured { value: 1.0 - self.marginal_y.value, std_error: self.marginal_y.std_error };
        vec![
            check("marginal_x", &self.marginal_x, ox, slack_x),
            check("marginal_y", &self.marginal_y, oy, slack_y),
            check("cell_00", &cell00, 1.0 - oy, slack_y),
            check("cell_01", &self.mismatch, oy - ox, slack_x + slack_y),
            check("cell_11", &self.marginal_x, ox, slack_x),
        ]
    }

    pub fn rows(&self) -> Vec<MetricRow> {
        let mut rows = vec![
            MetricRow::new(
                "dbar",
                self.empirical_mismatch,
                self.ci_halfwidth,
                self.theoretical_dbar,
                self.optimality_holds(),
            ),
            MetricRow::new(
                "lower_bound",
                self.empirical_mismatch + 3.0 * self.ci_halfwidth,
                0.0,
                self.theoretical_dbar - DBAR_TOLERANCE,
                self.lower_bound_holds(DBAR_TOLERANCE),
            ),
        ];
        rows.extend(self.consistency_rows());
        rows.push(MetricRow::new(
            "regen_rate",
            self.regen_rate_empirical,
            Z95 * self.regen_rate_std_error,
            self.regen_rate_theoretical,
            self.regen_rate_holds(),
        ));
        rows.push(MetricRow::new("clamp_warnings", self.clamp_warning_count as f64, 0.0, 0.0, true));
        rows.push(MetricRow::new("n_replicas", self.n_replicas as f64, 0.0, self.n_replicas as f64, true));
        rows.push(MetricRow::new("window_length", self.window_length as f64, 0.0, self.window_length as f64, true));
        rows
    }

    pub fn passes(&self) -> bool {
        self.rows().iter().all(|r| r.pass)
    }
}

struct ReplicaSummary {
    mismatch: Vec<bool>,
    ones_x: usize,
    ones_y: usize,
    marks: usize,
    eligible: usize,
}

fn run_replica(pair: &CertifiedPair, rng: &TimeKeyedRandomness, replica: u64, len: usize, trunc: usize) -> Result<ReplicaSummary> {
    let path = perfect_sample(pair, rng, replica, 0, len as i64 - 1)?;
    let w = path.window_symbols();
    let flags = path.truncated_marks(trunc);
    Ok(ReplicaSummary {
        mismatch: w.iter().map(|s| s.is_mismatch()).collect(),
        ones_x: w.iter().filter(|s| s.x() == 1).count(),
        ones_y: w.iter().filter(|s| s.y() == 1).count(),
        marks: flags.iter().filter(|&&f| f).count(),
        eligible: flags.len(),
    })
}

/// `prod_{m < depth} alpha_m`.
pub fn truncated_product(pair: &CoupledPair, depth: usize) -> Result<f64> {
    let mut p = 1.0;
    for m in 0..depth {
        p *= pair.alpha_global(m)?;
    }
    Ok(p)
}

/// Runs `n_replicas` independent perfect samples of `[0, window_length - 1]`.
pub fn estimate_dbar(pair: &CertifiedPair, n_replicas: usize, window_length: usize, seed: u64) -> Result<EstimateReport> {
    if n_replicas < 2 {
        return Err(Error::Usage("at least two replicas are needed for a confidence interval".into()));
    }
    if window_length == 0 {
        return Err(Error::Usage("window length must be positive".into()));
    }
    let oracle_x = marginal_oracle(pair.x(), OracleMethod::ClosedForm)?;
    let oracle_y = marginal_oracle(pair.y(), OracleMethod::ClosedForm)?;
    let rng = TimeKeyedRandomness::new(seed);
    let trunc = DEFAULT_TRUNCATION;
    let replicas: Vec<ReplicaSummary> = (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| run_replica(pair, &rng, r, window_length, trunc))
        .collect::<Result<_>>()?;

    let w = window_length as f64;
    let mm: Vec<f64> = replicas.iter().map(|r| r.mismatch.iter().filter(|&&b| b).count() as f64 / w).collect();
    let mx: Vec<f64> = replicas.iter().map(|r| r.ones_x as f64 / w).collect();
    let my: Vec<f64> = replicas.iter().map(|r| r.ones_y as f64 / w).collect();
    let mismatch = Measured::from_replicas(&mm);

    let regen_rate_theoretical = truncated_product(pair, trunc)?;
    let (regen_rate_empirical, regen_rate_std_error) = if window_length >= trunc {
        let rates: Vec<f64> = replicas.iter().map(|r| r.marks as f64 / r.eligible as f64).collect();
        let eligible: usize = replicas.iter().map(|r| r.eligible).sum();
        let marks: usize = replicas.iter().map(|r| r.marks).sum();
        let binomial = (regen_rate_theoretical * (1.0 - regen_rate_theoretical) / eligible as f64).sqrt();
        (marks as f64 / eligible as f64, binomial.max(std_error(&rates)))
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(EstimateReport {
        n_replicas,
        window_length,
        seed,
        empirical_mismatch: mismatch.value,
        ci_halfwidth: mismatch.ci(),
        theoretical_dbar: oracle_y.value - oracle_x.value,
        oracle_x,
        oracle_y,
        marginal_x: Measured::from_replicas(&mx),
        marginal_y: Measured::from_replicas(&my),
        mismatch,
        regen_truncation: trunc,
        regen_rate_empirical,
        regen_rate_std_error,
        regen_rate_theoretical,
        clamp_warning_count: pair.clamp_warnings(),
        replica_mismatch: mm,
        mismatch_indicators: replicas.into_iter().map(|r| r.mismatch).collect(),
    })
}

/// Replicas `0..replicas` of the window `[m, n]`, sampled in parallel.
pub fn sample_paths(pair: &CertifiedPair, replicas: usize, m: i64, n: i64, seed: u64) -> Result<Vec<CoupledPath>> {
    let rng = TimeKeyedRandomness::new(seed);
    (0..replicas as u64).into_par_iter().map(|r| perfect_sample(pair, &rng, r, m, n)).collect()
}

/// Marginal and joint-cell checks on fresh coupled paths.
pub fn marginal_consistency(pair: &CertifiedPair, n_replicas: usize, window_length: usize, seed: u64) -> Result<Vec<MetricRow>> {
    Ok(estimate_dbar(pair, n_replicas, window_length, seed)?.consistency_rows())
}

/// Weighted additive cost `sum_n c_n P(X_n != Y_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MkCost {
    pub value: f64,
    pub std_error: f64,
    pub empirical_mismatch: f64,
    /// Standard error of the per-replica difference from the mismatch rate.
    pub diff_std_error: f64,
}

impl MkCost {
    /// Agreement with the mismatch rate within 3 sigma.
    pub fn agrees(&self) -> bool {
        (self.value - self.empirical_mismatch).abs() <= 3.0 * self.diff_std_error + 1e-12
    }
}

/// `weights[i]` is the cost weight of window offset `i`.
pub fn mk_cost(weights: &[f64], report: &EstimateReport) -> Result<MkCost> {
    if weights.len() != report.window_length {
        return Err(Error::Usage(format!(
            "{} weights for a window of length {}",
            weights.len(),
            report.window_length
        )));
    }
    if weights.iter().any(|&c| !(c.is_finite() && c >= 0.0)) {
        return Err(Error::Usage("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Usage(format!("weights sum to {total}, not 1")));
    }
    let per_replica: Vec<f64> = report
        .mismatch_indicators
        .iter()
        .map(|row| row.iter().zip(weights).filter(|(&b, _)| b).map(|(_, &c)| c).sum())
        .collect();
    let diffs: Vec<f64> = per_replica.iter().zip(&report.replica_mismatch).map(|(a, b)| a - b).collect();
    Ok(MkCost {
        value: mean(&per_replica),
        std_error: std_error(&per_replica),
        empirical_mismatch: report.empirical_mismatch,
        diff_std_error: std_error(&diffs),
    })
}

/// `c_i ∝ ratio^|i - center|` on `len` offsets, normalized to sum to one.
pub fn geometric_weights(len: usize, center: usize, ratio: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|i| ratio.powi((i as i64 - center as i64).unsigned_abs() as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|c| c / total).collect()
}

/// Regeneration rate, failed-trial geometry and memory-length law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegenReport {
    pub truncation: usize,
    /// Number of `L_t` values used.
    pub steps: usize,
    pub rate: f64,
    pub rate_std_error: f64,
    /// `prod_{m < truncation} alpha_m`.
    pub rate_theoretical: f64,
    /// `failure_counts[k]`: experiments with `k` failed trials before success.
    pub failure_counts: Vec<u64>,
    /// Successes over trials.
    pub geometric_estimate: f64,
    pub geometric_fit: ChiSquare,
    /// `memory_counts[k]`: occurrences of `L = k`.
    pub memory_counts: Vec<u64>,
    pub memory_fit: ChiSquare,
}

impl RegenReport {
    pub fn rate_holds(&self) -> bool {
        (self.rate - self.rate_theoretical).abs() <= 3.0 * self.rate_std_error
    }

    pub fn rows(&self) -> Vec<MetricRow> {
        vec![
            MetricRow::new("regen_rate", self.rate, Z95 * self.rate_std_error, self.rate_theoretical, self.rate_holds()),
            MetricRow::new(
                "geometric_parameter",
                self.geometric_estimate,
                0.0,
                self.rate_theoretical,
                self.geometric_fit.p_value >= CHI_SQUARE_LEVEL,
            ),
            MetricRow::new(
                "geometric_chi2_p",
                self.geometric_fit.p_value,
                0.0,
                CHI_SQUARE_LEVEL,
                self.geometric_fit.p_value >= CHI_SQUARE_LEVEL,
            ),
            MetricRow::new(
                "memory_chi2_p",
                self.memory_fit.p_value,
                0.0,
                CHI_SQUARE_LEVEL,
                self.memory_fit.p_value >= CHI_SQUARE_LEVEL,
            ),
            MetricRow::new("steps", self.steps as f64, 0.0, self.steps as f64, true),
        ]
    }

    pub fn passes(&self) -> bool {
        self.rows().iter().all(|r| r.pass)
    }
}

/// Statistics over the windows `[m, n]` of `paths`. Only window times are
/// used: their memory lengths are iid with law `lambda`.
pub fn regen_statistics(pair: &CoupledPair, paths: &[CoupledPath], truncation: usize) -> Result<RegenReport> {
    if truncation == 0 {
        return Err(Error::Usage("truncation must be positive".into()));
    }
    let alpha = truncated_product(pair, truncation)?;

    let (mut marks, mut eligible) = (0usize, 0usize);
    let mut rates = Vec::new();
    let mut failures: Vec<u64> = Vec::new();
    let (mut trials, mut successes) = (0u64, 0u64);
    let mut memory: Vec<u64> = Vec::new();
    let mut steps = 0usize;
    for path in paths {
        let l = path.window_memory_lengths();
        steps += l.len();
        for &k in l {
            if memory.len() <= k {
                memory.resize(k + 1, 0);
            }
            memory[k] += 1;
        }
        let flags = path.truncated_marks(truncation);
        if !flags.is_empty() {
            let c = flags.iter().filter(|&&f| f).count();
            marks += c;
            eligible += flags.len();
            rates.push(c as f64 / flags.len() as f64);
        }
        // independent trials: a trial from n fails at the first j with L_{n+j} > j
        let (mut n, mut failed) = (0usize, 0u64);
        'experiments: while n + truncation <= l.len() {
            for j in 0..truncation {
                if l[n + j] > j {
                    failed += 1;
                    trials += 1;
                    n += j + 1;
                    continue 'experiments;
                }
            }
            trials += 1;
            successes += 1;
            let k = failed as usize;
            if failures.len() <= k {
                failures.resize(k + 1, 0);
            }
            failures[k] += 1;
            failed = 0;
            n += truncation;
        }
    }
    if eligible == 0 {
        return Err(Error::Usage(format!("windows are shorter than the truncation depth {truncation}")));
    }
    let rate = marks as f64 / eligible as f64;
    let binomial = (alpha * (1.0 - alpha) / eligible as f64).sqrt();
    let rate_std_error = if rates.len() >= 2 { binomial.max(std_error(&rates)) } else { binomial };

    let geometric_fit = geometric_fit(&failures, alpha);
    let memory_fit = memory_fit(pair, &memory)?;
    Ok(RegenReport {
        truncation,
        steps,
        rate,
        rate_std_error,
        rate_theoretical: alpha,
        failure_counts: failures,
        geometric_estimate: if trials == 0 { f64::NAN } else { successes as f64 / trials as f64 },
        geometric_fit,
        memory_counts: memory,
        memory_fit,
    })
}

/// Failure counts against `P(K = k) = alpha (1 - alpha)^k`.
fn geometric_fit(counts: &[u64], alpha: f64) -> ChiSquare {
    let total: u64 = counts.iter().sum();
    let mut cells = counts.len().max(1);
    while total as f64 * alpha * (1.0 - alpha).powi(cells as i32) >= 1.0 {
        cells += 1;
    }
    let mut observed = counts.to_vec();
    observed.resize(cells + 1, 0);
    let mut probs: Vec<f64> = (0..cells).map(|k| alpha * (1.0 - alpha).powi(k as i32)).collect();
    probs.push((1.0 - alpha).powi(cells as i32));
    chi_square(&observed, &probs)
}

/// Memory lengths against `lambda_k`.
fn memory_fit(pair: &CoupledPair, counts: &[u64]) -> Result<ChiSquare> {
    let mut cells = counts.len().max(1);
    while cells < pair.hard_cap() && pair.alpha_global(cells - 1)? < 1.0 - 1e-12 {
        cells += 1;
    }
    let mut observed = counts.to_vec();
    observed.resize(cells + 1, 0);
    let mut probs = Vec::with_capacity(cells + 1);
    for k in 0..cells {
        probs.push(pair.lambda(k)?);
    }
    probs.push((1.0 - pair.alpha_global(cells - 1)?).max(0.0));
    Ok(chi_square(&observed, &probs))
}
