//! Binary chains of infinite order described by their transition kernels.
//!
//! Three families are supported: iid, finite-order Markov and renewal chains
//! driven by a hazard sequence. Every family has a finite sufficient statistic
//! of the infinite past ([`PastSummary`]), which is what the rest of the crate
//! works with.
//!
//! Suffixes are stored lag-first: index 0 is the most recent symbol `x_{-1}`,
//! index `j` is `x_{-(j+1)}`. Text renderings (config files, CSV, `Display`)
//! use time order instead, oldest symbol first, so `"10"` has a 1 at lag 2.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Largest supported Markov order.
pub const MAX_MARKOV_ORDER: usize = 8;

/// Scan limit for hazard comparisons that do not terminate in closed form.
const HAZARD_SCAN_LIMIT: usize = 100_000;

/// Distance to the most recent 1 in a past, `inf{n >= 1 : u_{-n} = 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ell {
    Finite(usize),
    Infinite,
}

impl Ell {
    pub fn finite(self) -> Option<usize> {
        match self {
            Ell::Finite(n) => Some(n),
            Ell::Infinite => None,
        }
    }
}

impl fmt::Display for Ell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ell::Finite(n) => write!(f, "{n}"),
            Ell::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HazardKind {
    /// `q_l = q_inf + amplitude * ratio^l`.
    Geometric { q_inf: f64, amplitude: f64, ratio: f64 },
    /// `q_l = values[l - 1]` for `l <= values.len()`, `q_inf` afterwards.
    Explicit { values: Vec<f64>, q_inf: f64 },
}

/// Renewal hazard `q_l`, indexed by `l in {1, 2, ...} ∪ {inf}`.
///
/// Hazards are non-increasing in `l` and converge to `q_inf`; this is checked
/// at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HazardSequence {
    kind: HazardKind,
}

impl HazardSequence {
    pub fn geometric(q_inf: f64, amplitude: f64, ratio: f64) -> Result<Self> {
        open_unit("hazard q_inf", q_inf)?;
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidSpec(format!("hazard ratio {ratio} must lie in (0,1)")));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "hazard amplitude {amplitude} must be >= 0 (non-increasing hazards only)"
            )));
        }
        open_unit("hazard q_1", q_inf + amplitude * ratio)?;
        Ok(Self { kind: HazardKind::Geometric { q_inf, amplitude, ratio } })
    }

    pub fn explicit(values: Vec<f64>, q_inf: f64) -> Result<Self> {
        open_unit("hazard q_inf", q_inf)?;
        for (i, &v) in values.iter().enumerate() {
            open_unit(format!("hazard q_{}", i + 1), v)?;
        }
        let mut prev = f64::INFINITY;
        for (i, &v) in values.iter().chain(std::iter::once(&q_inf)).enumerate() {
            if v > prev {
                return Err(Error::InvalidSpec(format!(
                    "hazard must be non-increasing, but q_{} = {v} exceeds its predecessor {prev}",
                    if i == values.len() { "inf".to_string() } else { (i + 1).to_string() }
                )));
            }
            prev = v;
        }
        Ok(Self { kind: HazardKind::Explicit { values, q_inf } })
    }

    pub fn from_kind(kind: HazardKind) -> Result<Self> {
        match kind {
            HazardKind::Geometric { q_inf, amplitude, ratio } => Self::geometric(q_inf, amplitude, ratio),
            HazardKind::Explicit { values, q_inf } => Self::explicit(values, q_inf),
        }
    }

    /// Constant hazard, used to view an iid chain as a renewal chain. Allows
    /// the closed interval `[0,1]`.
    pub(crate) fn constant(p: f64) -> Self {
        Self { kind: HazardKind::Explicit { values: Vec::new(), q_inf: p } }
    }

    pub fn kind(&self) -> &HazardKind {
        &self.kind
    }

    pub fn q_inf(&self) -> f64 {
        match self.kind {
            HazardKind::Geometric { q_inf, .. } | HazardKind::Explicit { q_inf, .. } => q_inf,
        }
    }

    /// `q_l` for finite `l >= 1`.
    pub fn at(&self, ell: usize) -> f64 {
        debug_assert!(ell >= 1);
        match &self.kind {
            HazardKind::Geometric { q_inf, amplitude, ratio } => {
                q_inf + amplitude * ratio.powi(ell.min(i32::MAX as usize) as i32)
            }
            HazardKind::Explicit { values, q_inf } => values.get(ell - 1).copied().unwrap_or(*q_inf),
        }
    }

    pub fn q(&self, ell: Ell) -> f64 {
        match ell {
            Ell::Finite(n) => self.at(n),
            Ell::Infinite => self.q_inf(),
        }
    }

    /// `q_l - q_inf >= 0`.
    pub fn excess(&self, ell: usize) -> f64 {
        (self.at(ell) - self.q_inf()).max(0.0)
    }

    /// Upper bound on `sum_{l >= from} (q_l - q_inf)`.
    pub fn tail_excess_sum(&self, from: usize) -> f64 {
        let from = from.max(1);
        match &self.kind {
            HazardKind::Geometric { amplitude, ratio, .. } => {
                amplitude * ratio.powi(from.min(i32::MAX as usize) as i32) / (1.0 - ratio)
            }
            HazardKind::Explicit { values, q_inf } => {
                values.iter().skip(from - 1).map(|v| (v - q_inf).max(0.0)).sum()
            }
        }
    }

    /// Index after which the hazard is constant, if any.
    fn constant_from(&self) -> Option<usize> {
        match &self.kind {
            HazardKind::Geometric { amplitude, .. } => (*amplitude == 0.0).then_some(1),
            HazardKind::Explicit { values, .. } => Some(values.len() + 1),
        }
    }
}

fn open_unit(what: impl Into<String>, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(Error::InvalidProbability { what: what.into(), value: v })
    }
}

/// Markov transition table `p(1 | last order symbols)`.
///
/// Index bit `j - 1` holds the symbol at lag `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovTable {
    order: usize,
    probs: Vec<f64>,
}

impl MarkovTable {
    /// `probs[i]` is `p(1 | suffix)` where bit `j - 1` of `i` is the symbol at lag `j`.
    pub fn from_lag_indexed(order: usize, probs: Vec<f64>) -> Result<Self> {
        if order > MAX_MARKOV_ORDER {
            return Err(Error::InvalidSpec(format!(
                "Markov order {order} exceeds the supported maximum {MAX_MARKOV_ORDER}"
            )));
        }
        if probs.len() != 1 << order {
            return Err(Error::InvalidSpec(format!(
                "Markov table of order {order} needs {} entries, got {}",
                1 << order,
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            check_probability(format!("p(1|{})", render_index(i, order)), p)?;
        }
        Ok(Self { order, probs })
    }

    /// Build from `(suffix, p)` entries with suffixes written in time order.
    pub fn from_entries<'a>(order: usize, entries: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        if order > MAX_MARKOV_ORDER {
            return Err(Error::InvalidSpec(format!(
                "Markov order {order} exceeds the supported maximum {MAX_MARKOV_ORDER}"
            )));
        }
        let mut probs = vec![f64::NAN; 1 << order];
        for (key, p) in entries {
            let suffix = Suffix::parse(key)?;
            if suffix.len() != order {
                return Err(Error::InvalidSpec(format!(
                    "Markov table key {key:?} has length {}, expected {order}",
                    suffix.len()
                )));
            }
            let idx = suffix.index(order);
            if !probs[idx].is_nan() {
                return Err(Error::InvalidSpec(format!("duplicate Markov table key {key:?}")));
            }
            probs[idx] = p;
        }
        if let Some(i) = probs.iter().position(|p| p.is_nan()) {
            return Err(Error::InvalidSpec(format!(
                "Markov table misses suffix {:?}",
                render_index(i, order)
            )));
        }
        Self::from_lag_indexed(order, probs)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `p(1 | index)`.
    pub fn get(&self, index: usize) -> f64 {
        self.probs[index & ((1 << self.order) - 1)]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Entries keyed by time-ordered suffix strings.
    pub fn entries(&self) -> Vec<(String, f64)> {
        (0..self.probs.len()).map(|i| (render_index(i, self.order), self.probs[i])).collect()
    }
}

fn render_index(index: usize, order: usize) -> String {
    (1..=order).rev().map(|lag| if index >> (lag - 1) & 1 == 1 { '1' } else { '0' }).collect()
}

/// A binary chain of infinite order, given by its transition kernel family.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainSpec {
    Iid { p: f64 },
    FiniteMarkov(MarkovTable),
    Renewal(HazardSequence),
}

impl ChainSpec {
    pub fn iid(p: f64) -> Result<Self> {
        Ok(ChainSpec::Iid { p: check_probability("iid p", p)? })
    }

    pub fn markov(order: usize, lag_indexed: Vec<f64>) -> Result<Self> {
        Ok(ChainSpec::FiniteMarkov(MarkovTable::from_lag_indexed(order, lag_indexed)?))
    }

    pub fn renewal(hazard: HazardSequence) -> Self {
        ChainSpec::Renewal(hazard)
    }

    pub fn family(&self) -> &'static str {
        match self {
            ChainSpec::Iid { .. } => "iid",
            ChainSpec::FiniteMarkov(_) => "markov",
            ChainSpec::Renewal(_) => "renewal",
        }
    }

    /// Kernel order for finite-memory families, `None` for renewal chains.
    pub fn markov_order(&self) -> Option<usize> {
        match self {
            ChainSpec::Iid { .. } => Some(0),
            ChainSpec::FiniteMarkov(t) => Some(t.order()),
            ChainSpec::Renewal(_) => None,
        }
    }

    /// The chain as a renewal hazard, when it has one.
    pub(crate) fn as_hazard(&self) -> Option<HazardSequence> {
        match self {
            ChainSpec::Iid { p } => Some(HazardSequence::constant(*p)),
            ChainSpec::Renewal(h) => Some(h.clone()),
            ChainSpec::FiniteMarkov(_) => None,
        }
    }

    /// The chain as a lag-indexed Markov table, when it has one.
    pub(crate) fn as_markov(&self) -> Option<MarkovTable> {
        match self {
            ChainSpec::Iid { p } => Some(MarkovTable { order: 0, probs: vec![*p] }),
            ChainSpec::FiniteMarkov(t) => Some(t.clone()),
            ChainSpec::Renewal(_) => None,
        }
    }
}

/// Binary string used as a finite suffix of a past, stored lag-first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Suffix(Vec<u8>);

impl Suffix {
    /// Lag-first symbols: `lags[0]` is the most recent.
    pub fn from_lags(lags: Vec<u8>) -> Result<Self> {
        if let Some(&b) = lags.iter().find(|&&b| b > 1) {
            return Err(Error::Usage(format!("suffix symbol {b} is not binary")));
        }
        Ok(Self(lags))
    }

    /// Parse a time-ordered string such as `"0110"` (last character is lag 1).
    pub fn parse(s: &str) -> Result<Self> {
        let mut lags = Vec::with_capacity(s.len());
        for c in s.chars().rev() {
            match c {
                '0' => lags.push(0),
                '1' => lags.push(1),
                _ => return Err(Error::Usage(format!("invalid suffix character {c:?} in {s:?}"))),
            }
        }
        Ok(Self(lags))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Symbol at lag `lag >= 1`.
    pub fn lag(&self, lag: usize) -> u8 {
        self.0[lag - 1]
    }

    pub fn lags(&self) -> &[u8] {
        &self.0
    }

    /// Lag of the most recent 1, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.0.iter().position(|&b| b == 1).map(|i| i + 1)
    }

    /// Table index of the first `order` lags; missing lags count as 0.
    pub fn index(&self, order: usize) -> usize {
        self.0.iter().take(order).enumerate().fold(0, |acc, (i, &b)| acc | (b as usize) << i)
    }

    /// Pointwise `self <= other` on the common lags.
    pub fn le(&self, other: &Suffix) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for Suffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.0.iter().rev() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Sufficient statistic of an infinite past for a given chain family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PastSummary {
    Iid,
    /// Last `order` symbols.
    Markov(Suffix),
    Renewal(Ell),
}

impl PastSummary {
    /// Summary of the past `suffix · 000...` (unseen lags are zero).
    pub fn from_suffix(spec: &ChainSpec, suffix: &Suffix) -> Self {
        match spec {
            ChainSpec::Iid { .. } => PastSummary::Iid,
            ChainSpec::FiniteMarkov(t) => {
                let mut lags: Vec<u8> = suffix.lags().iter().copied().take(t.order()).collect();
                lags.resize(t.order(), 0);
                PastSummary::Markov(Suffix(lags))
            }
            ChainSpec::Renewal(_) => {
                PastSummary::Renewal(suffix.first_one().map_or(Ell::Infinite, Ell::Finite))
            }
        }
    }
}

/// `p(1 | past)`.
pub fn eval_p1(spec: &ChainSpec, past: &PastSummary) -> Result<f64> {
    match (spec, past) {
        (ChainSpec::Iid { p }, PastSummary::Iid) => Ok(*p),
        (ChainSpec::FiniteMarkov(t), PastSummary::Markov(s)) if s.len() == t.order() => Ok(t.get(s.index(t.order()))),
        (ChainSpec::Renewal(h), PastSummary::Renewal(ell)) => {
            if *ell == Ell::Finite(0) {
                return Err(Error::Usage("renewal past summary needs ell >= 1".into()));
            }
            Ok(h.q(*ell))
        }
        _ => Err(Error::Usage(format!("past summary {past:?} does not match a {} chain", spec.family()))),
    }
}

/// Certified upper bound on the continuity rate `beta(k)`.
///
/// Exact for all three families; non-increasing in `k` and tends to 0.
pub fn continuity_rate(spec: &ChainSpec, k: usize) -> f64 {
    match spec {
        ChainSpec::Iid { .. } => 0.0,
        ChainSpec::FiniteMarkov(t) => {
            let d = t.order();
            if k >= d {
                return 0.0;
            }
            let low_mask = (1usize << k) - 1;
            let mut lo = vec![f64::INFINITY; 1 << k];
            let mut hi = vec![f64::NEG_INFINITY; 1 << k];
            for (i, &p) in t.probs().iter().enumerate() {
                let g = i & low_mask;
                lo[g] = lo[g].min(p);
                hi[g] = hi[g].max(p);
            }
            lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max)
        }
        // Pasts agreeing on k lags differ only when those lags are all zero;
        // then l ranges over {k+1, ...} ∪ {inf} and the hazard is monotone.
        ChainSpec::Renewal(h) => h.excess(k + 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// Exact infimum or supremum of `p(1 | w · suffix)` over all infinite extensions `w`.
pub fn extremal_p1(spec: &ChainSpec, suffix: &Suffix, direction: Direction) -> f64 {
    let k = suffix.len();
    match spec {
        ChainSpec::Iid { p } => *p,
        ChainSpec::FiniteMarkov(t) => {
            let d = t.order();
            if k >= d {
                return t.get(suffix.index(d));
            }
            let base = suffix.index(k);
            let values = (0..1usize << (d - k)).map(|ext| t.get(base | ext << k));
            match direction {
                Direction::Min => values.fold(f64::INFINITY, f64::min),
                Direction::Max => values.fold(f64::NEG_INFINITY, f64::max),
            }
        }
        ChainSpec::Renewal(h) => match suffix.first_one() {
            Some(ell) => h.at(ell),
            None => match direction {
                Direction::Min => h.q_inf(),
                Direction::Max => h.at(k + 1),
            },
        },
    }
}

/// An ordered pair of pasts `x <= y`, each extended by zeros beyond the
/// stored suffix, at which the ordering condition fails.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderWitness {
    pub x: Suffix,
    pub y: Suffix,
    pub p1_x: f64,
    pub p1_y: f64,
}

impl fmt::Display for OrderWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x = ...0{}, y = ...0{}: p^X(1|x) = {} > p^Y(1|y) = {}",
            self.x, self.y, self.p1_x, self.p1_y
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderVerdict {
    Ordered,
    Violated(OrderWitness),
    Inconclusive(String),
}

impl OrderVerdict {
    pub fn is_ordered(&self) -> bool {
        matches!(self, OrderVerdict::Ordered)
    }
}

/// Decide whether `p^X(1|x) <= p^Y(1|y)` for all ordered pasts `x <= y`.
pub fn check_order(x: &ChainSpec, y: &ChainSpec) -> OrderVerdict {
    match (x, y) {
        (ChainSpec::FiniteMarkov(_), ChainSpec::Renewal(hy)) => {
            let tx = x.as_markov().expect("markov");
            check_markov_vs_renewal(&tx, hy)
        }
        (ChainSpec::Renewal(hx), ChainSpec::FiniteMarkov(_)) => {
            let ty = y.as_markov().expect("markov");
            check_renewal_vs_markov(hx, &ty)
        }
        _ => match (x.as_markov(), y.as_markov()) {
            (Some(tx), Some(ty)) => check_markov_pair(&tx, &ty),
            _ => {
                let (hx, hy) = (x.as_hazard().expect("hazard"), y.as_hazard().expect("hazard"));
                compare_hazards(&hx, &hy)
            }
        },
    }
}

fn witness(x: &ChainSpec, y: &ChainSpec, xs: Suffix, ys: Suffix) -> OrderWitness {
    let p1_x = eval_p1(x, &PastSummary::from_suffix(x, &xs)).unwrap_or(f64::NAN);
    let p1_y = eval_p1(y, &PastSummary::from_suffix(y, &ys)).unwrap_or(f64::NAN);
    OrderWitness { x: xs, y: ys, p1_x, p1_y }
}

/// Exhaustive check over all ordered pairs of depth `max(order)`.
fn check_markov_pair(tx: &MarkovTable, ty: &MarkovTable) -> OrderVerdict {
    let d = tx.order().max(ty.order());
    let mut worst: Option<(f64, usize, usize)> = None;
    for yi in 0..1usize << d {
        // x ranges over the sub-masks of y
        let mut xi = yi;
        loop {
            let gap = tx.get(xi) - ty.get(yi);
            if gap > 0.0 && worst.is_none_or(|(g, _, _)| gap > g) {
                worst = Some((gap, xi, yi));
            }
            if xi == 0 {
                break;
            }
            xi = (xi - 1) & yi;
        }
    }
    match worst {
        None => OrderVerdict::Ordered,
        Some((_, xi, yi)) => {
            let lags = |i: usize| Suffix((0..d).map(|j| (i >> j & 1) as u8).collect());
            let (x, y) = (ChainSpec::FiniteMarkov(tx.clone()), ChainSpec::FiniteMarkov(ty.clone()));
            OrderVerdict::Violated(witness(&x, &y, lags(xi), lags(yi)))
        }
    }
}

/// Markov X against renewal Y: for an X-pattern `w`, the worst ordered `y`
/// copies `w` and is zero beyond, giving the largest `l(y)`.
fn check_markov_vs_renewal(tx: &MarkovTable, hy: &HazardSequence) -> OrderVerdict {
    let d = tx.order();
    for w in 0..1usize << d {
        let ell = if w == 0 { Ell::Infinite } else { Ell::Finite(w.trailing_zeros() as usize + 1) };
        if tx.get(w) > hy.q(ell) {
            let s = Suffix((0..d).map(|j| (w >> j & 1) as u8).collect());
            let (x, y) = (ChainSpec::FiniteMarkov(tx.clone()), ChainSpec::Renewal(hy.clone()));
            return OrderVerdict::Violated(witness(&x, &y, s.clone(), s));
        }
    }
    OrderVerdict::Ordered
}

/// Renewal X against Markov Y: for a Y-pattern `v`, the worst ordered `x`
/// has its most recent 1 as early as `y` allows (beyond the pattern `y` may
/// be all ones).
fn check_renewal_vs_markov(hx: &HazardSequence, ty: &MarkovTable) -> OrderVerdict {
    let d = ty.order();
    for v in 0..1usize << d {
        let ell = if v == 0 { d + 1 } else { v.trailing_zeros() as usize + 1 };
        if hx.at(ell) > ty.get(v) {
            let mut ys: Vec<u8> = (0..d).map(|j| (v >> j & 1) as u8).collect();
            let mut xs = vec![0u8; d];
            if v == 0 {
                ys.push(1);
                xs.push(1);
            } else {
                xs[ell - 1] = 1;
            }
            let (x, y) = (ChainSpec::Renewal(hx.clone()), ChainSpec::FiniteMarkov(ty.clone()));
            return OrderVerdict::Violated(witness(&x, &y, Suffix(xs), Suffix(ys)));
        }
    }
    OrderVerdict::Ordered
}

fn renewal_witness(hx: &HazardSequence, hy: &HazardSequence, ell: Ell) -> OrderWitness {
    let s = match ell {
        Ell::Finite(b) => {
            let mut lags = vec![0u8; b];
            lags[b - 1] = 1;
            Suffix(lags)
        }
        Ell::Infinite => Suffix::default(),
    };
    OrderWitness { x: s.clone(), y: s, p1_x: hx.q(ell), p1_y: hy.q(ell) }
}

/// Monotone hazards are ordered iff `q^X_b <= q^Y_b` for every `b`, including `inf`.
fn compare_hazards(hx: &HazardSequence, hy: &HazardSequence) -> OrderVerdict {
    if hx.q_inf() > hy.q_inf() {
        return OrderVerdict::Violated(renewal_witness(hx, hy, Ell::Infinite));
    }
    let gap = hy.q_inf() - hx.q_inf();

    // Equal limits with two geometric approaches: compare amplitudes and
    // ratios exactly, since the crossing may sit below floating-point resolution.
    if gap == 0.0 {
        if let (
            HazardKind::Geometric { amplitude: ax, ratio: rx, .. },
            HazardKind::Geometric { amplitude: ay, ratio: ry, .. },
        ) = (hx.kind(), hy.kind())
        {
            let (ax, rx, ay, ry) = (*ax, *rx, *ay, *ry);
            // need ax rx^b <= ay ry^b for every b >= 1
            let first_violation = if ax == 0.0 {
                None
            } else if ay == 0.0 {
                Some(1)
            } else if rx <= ry {
                (ax * rx > ay * ry).then_some(1)
            } else {
                let b = ((ay / ax).ln() / (rx / ry).ln()).floor();
                Some(if b < 1.0 { 1 } else { b as usize + 1 })
            };
            let Some(b) = first_violation else {
                return OrderVerdict::Ordered;
            };
            return OrderVerdict::Violated(renewal_witness(hx, hy, Ell::Finite(b)));
        }
    }

    for b in 1..=HAZARD_SCAN_LIMIT {
        if hx.at(b) > hy.at(b) {
            return OrderVerdict::Violated(renewal_witness(hx, hy, Ell::Finite(b)));
        }
        // every later b' has q^X_b' <= q^X_inf + excess(b+1) <= q^Y_inf <= q^Y_b'
        if hx.excess(b + 1) <= gap {
            return OrderVerdict::Ordered;
        }
        if let (Some(cx), Some(cy)) = (hx.constant_from(), hy.constant_from()) {
            if b >= cx.max(cy) {
                return OrderVerdict::Ordered;
            }
        }
    }
    OrderVerdict::Inconclusive(format!(
        "hazards agree in the limit and no ordering decision after {HAZARD_SCAN_LIMIT} indices"
    ))
}
