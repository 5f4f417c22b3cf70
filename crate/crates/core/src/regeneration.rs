//! Perfect sampling of finite windows of the stationary coupled chain.
//!
//! Every time index `t` owns one uniform `xi_t`. It fixes the memory length
//! `L_t` through the global cut points and, once the past is known, the symbol
//! pair through the interval layout. The backtrack time `T[m,n]` is the
//! largest `t <= m` with `L_s <= s - t` for all `s` in `[t, n]`; from there the
//! window is generated left to right and depends on nothing older than `T`.

use crate::coupling::{CertifiedPair, SymbolPair};
use crate::decomposition::sample_with_length;
use crate::error::{Error, Result};
use crate::rng::TimeKeyedRandomness;

/// Default abort depth for the backward search.
pub const DEFAULT_MAX_BACKTRACK: u64 = 1_000_000;

/// Environment variable overriding [`DEFAULT_MAX_BACKTRACK`].
pub const MAX_BACKTRACK_ENV: &str = "DBAR_MAX_BACKTRACK";

/// Abort depth, read from `DBAR_MAX_BACKTRACK` when set.
pub fn max_backtrack_depth() -> u64 {
    std::env::var(MAX_BACKTRACK_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_BACKTRACK)
}

/// A window `[m, n]` of the coupled chain together with everything generated
/// from the backtrack time `T` onwards.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPath {
    m: i64,
    n: i64,
    start: i64,
    symbols: Vec<SymbolPair>,
    memory_lengths: Vec<usize>,
    regen: Vec<bool>,
    ops: u64,
    seed: u64,
    replica: u64,
}

impl CoupledPath {
    pub fn window(&self) -> (i64, i64) {
        (self.m, self.n)
    }

    /// `T[m,n]`.
    pub fn backtrack_time(&self) -> i64 {
        self.start
    }

    /// Pairs for `t` in `[T, n]`.
    pub fn symbols(&self) -> &[SymbolPair] {
        &self.symbols
    }

    /// `L_t` for `t` in `[T, n]`.
    pub fn memory_lengths(&self) -> &[usize] {
        &self.memory_lengths
    }

    /// Horizon-verified regeneration flags for `t` in `[T, n]`.
    pub fn regen_flags(&self) -> &[bool] {
        &self.regen
    }

    /// Pairs for `t` in `[m, n]`.
    pub fn window_symbols(&self) -> &[SymbolPair] {
        &self.symbols[(self.m - self.start) as usize..]
    }

    /// `L_t` for `t` in `[m, n]`.
    pub fn window_memory_lengths(&self) -> &[usize] {
        &self.memory_lengths[(self.m - self.start) as usize..]
    }

    pub fn symbol(&self, t: i64) -> Option<SymbolPair> {
        self.index(t).map(|i| self.symbols[i])
    }

    pub fn memory_length(&self, t: i64) -> Option<usize> {
        self.index(t).map(|i| self.memory_lengths[i])
    }

    /// Backtracking cost: the number of `L_s <= s - t` comparisons made by
    /// the plain decrement-and-recheck search.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    /// Times `t` in `[T, n]` with `L_s <= s - t` for every `s` in `[t, n]`.
    pub fn regen_marks(&self) -> Vec<i64> {
        self.regen.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| self.start + i as i64).collect()
    }

    /// Flags for `t` in `[m, n - depth + 1]` using the forward criterion
    /// `L_{t+j} <= j` for `j < depth`.
    pub fn truncated_marks(&self, depth: usize) -> Vec<bool> {
        truncated_flags(self.window_memory_lengths(), depth)
    }

    fn index(&self, t: i64) -> Option<usize> {
        (self.start..=self.n).contains(&t).then(|| (t - self.start) as usize)
    }
}

/// `L_t` from `xi_t`.
pub fn sample_memory_length(pair: &CertifiedPair, rng: &TimeKeyedRandomness, replica: u64, t: i64) -> Result<usize> {
    memory_length_at(pair, rng.uniform(replica, t), t)
}

fn memory_length_at(pair: &CertifiedPair, xi: f64, t: i64) -> Result<usize> {
    pair.memory_length(xi).map_err(|e| match e {
        Error::HardCap { cap, .. } => Error::HardCap { cap, t, xi },
        e => e,
    })
}

/// `T[m,n]` with the default abort depth.
pub fn backtrack(pair: &CertifiedPair, rng: &TimeKeyedRandomness, replica: u64, m: i64, n: i64) -> Result<i64> {
    Ok(resolve(pair, rng, replica, m, n, max_backtrack_depth())?.start)
}

/// Exact sample of the stationary coupled chain on `[m, n]`.
pub fn perfect_sample(pair: &CertifiedPair, rng: &TimeKeyedRandomness, replica: u64, m: i64, n: i64) -> Result<CoupledPath> {
    perfect_sample_limited(pair, rng, replica, m, n, max_backtrack_depth())
}

/// [`perfect_sample`] with an explicit abort depth.
pub fn perfect_sample_limited(
    pair: &CertifiedPair,
    rng: &TimeKeyedRandomness,
    replica: u64,
    m: i64,
    n: i64,
    max_depth: u64,
) -> Result<CoupledPath> {
    let w = resolve(pair, rng, replica, m, n, max_depth)?;
    let mut symbols: Vec<SymbolPair> = Vec::with_capacity(w.xi.len());
    for (i, (&xi, &l)) in w.xi.iter().zip(&w.l).enumerate() {
        let ab = sample_with_length(pair, xi, l, |lag| i.checked_sub(lag).map(|j| symbols[j]))?;
        symbols.push(ab);
    }
    let regen = regen_flags(&w.l);
    Ok(CoupledPath {
        m,
        n,
        start: w.start,
        symbols,
        memory_lengths: w.l,
        regen,
        ops: w.ops,
        seed: rng.seed(),
        replica,
    })
}

struct Resolved {
    start: i64,
    xi: Vec<f64>,
    l: Vec<usize>,
    ops: u64,
}

fn resolve(pair: &CertifiedPair, rng: &TimeKeyedRandomness, replica: u64, m: i64, n: i64, max_depth: u64) -> Result<Resolved> {
    if m > n {
        return Err(Error::Usage(format!("empty window [{m}, {n}]")));
    }
    let len = usize::try_from(n - m + 1).map_err(|_| Error::Usage("window too long".into()))?;
    let mut xi = vec![0.0; len];
    rng.fill(replica, m, &mut xi);
    let mut l = Vec::with_capacity(len);
    for (i, &u) in xi.iter().enumerate() {
        l.push(memory_length_at(pair, u, m + i as i64)?);
    }
    // f = min over s in [t, n] of s - L_s; t is admissible iff t <= f
    let mut reach = i64::MAX;
    for (i, &li) in l.iter().enumerate() {
        reach = reach.min(m + i as i64 - li as i64);
    }
    let (mut before_xi, mut before_l) = (Vec::new(), Vec::new());
    let mut t = m;
    while reach < t {
        if (m - t) as u64 >= max_depth {
            return Err(Error::BacktrackDepth { m, max_depth });
        }
        t -= 1;
        let u = rng.uniform(replica, t);
        let lt = memory_length_at(pair, u, t)?;
        reach = reach.min(t - lt as i64);
        before_xi.push(u);
        before_l.push(lt);
    }
    before_xi.reverse();
    before_l.reverse();
    before_xi.extend(xi);
    before_l.extend(l);
    let steps = (m - t) as u128 + 1;
    let ops = steps * (n - m + 1) as u128 + steps * (steps - 1) / 2;
    Ok(Resolved { start: t, xi: before_xi, l: before_l, ops: u64::try_from(ops).unwrap_or(u64::MAX) })
}

/// `flags[i]` iff `L_s <= s - t` for all `s >= t`, with `t` the `i`-th time.
pub(crate) fn regen_flags(l: &[usize]) -> Vec<bool> {
    let mut flags = vec![false; l.len()];
    let mut reach = i64::MAX;
    for i in (0..l.len()).rev() {
        reach = reach.min(i as i64 - l[i] as i64);
        flags[i] = i as i64 <= reach;
    }
    flags
}

/// Forward criterion `L_{t+j} <= j` for `j < depth`, for every `t` with a full horizon.
pub(crate) fn truncated_flags(l: &[usize], depth: usize) -> Vec<bool> {
    if depth == 0 || l.len() < depth {
        return Vec::new();
    }
    // t fails iff some s in [t, t + depth) has s - L_s < t
    let reach: Vec<i64> = l.iter().enumerate().map(|(i, &li)| i as i64 - li as i64).collect();
    let count = l.len() - depth + 1;
    let mut flags = Vec::with_capacity(count);
    // sliding-window minimum of reach over [t, t + depth)
    let mut window: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for s in 0..l.len() {
        while window.back().is_some_and(|&b| reach[b] >= reach[s]) {
            window.pop_back();
        }
        window.push_back(s);
        if s + 1 >= depth {
            let t = s + 1 - depth;
            while window.front().is_some_and(|&f| f < t) {
                window.pop_front();
            }
            flags.push(reach[window[0]] >= t as i64);
        }
    }
    flags
}
