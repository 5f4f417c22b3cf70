//! Interval partition of `[0, 1)` behind the mixture decomposition
//! `P = sum_k lambda_k P_k`, and the single-uniform symbol sampler.
//!
//! Along a suffix chain `s_0 ⊂ s_1 ⊂ ...` the depth-`j` block occupies
//! `[alpha_{j-1}(s_{j-1}), alpha_j(s_j))` and is split, in the order
//! `(0,0), (0,1), (1,1)`, into pieces of length `r_j - r_{j-1}`. A uniform
//! `xi` picks the memory length `L` from the global cut points and the symbol
//! from the piece that contains it.

use crate::coupling::{CoupledPair, Cursor, OrderedSuffix, SymbolPair};
use crate::error::{Error, Result};

/// Breakpoints of the blocks at depths `0..=k` for one suffix chain.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalLayout {
    /// `[start, end of (0,0), end of (0,1), end]` per depth.
    blocks: Vec<[f64; 4]>,
}

impl IntervalLayout {
    /// Layout along the chain of prefixes of `s`, depths `0..=s.depth()`.
    pub fn new(pair: &CoupledPair, s: &OrderedSuffix) -> Self {
        let mut cursor = pair.cursor();
        let mut blocks = Vec::with_capacity(s.depth() + 1);
        blocks.push(cursor.block());
        for &p in s.pairs() {
            pair.advance(&mut cursor, p);
            blocks.push(cursor.block());
        }
        Self { blocks }
    }

    pub fn depth(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[[f64; 4]] {
        &self.blocks
    }

    /// The half-open interval `I_j(ab | s_j)`.
    pub fn interval(&self, j: usize, ab: SymbolPair) -> (f64, f64) {
        let b = &self.blocks[j];
        (b[ab.index()], b[ab.index() + 1])
    }

    /// Total length of the `ab` pieces inside `[lo, hi)`.
    pub fn mass_in(&self, ab: SymbolPair, lo: f64, hi: f64) -> f64 {
        (0..self.blocks.len())
            .map(|j| {
                let (a, b) = self.interval(j, ab);
                (b.min(hi) - a.max(lo)).max(0.0)
            })
            .sum()
    }

    /// Depth and symbol of the piece containing `xi`, if any.
    pub fn locate(&self, xi: f64) -> Option<(usize, SymbolPair)> {
        self.blocks.iter().enumerate().find_map(|(j, b)| (xi >= b[0] && xi < b[3]).then(|| (j, piece(b, xi))))
    }
}

fn piece(block: &[f64; 4], xi: f64) -> SymbolPair {
    if xi < block[1] {
        SymbolPair::Zero
    } else if xi < block[2] {
        SymbolPair::Mixed
    } else {
        SymbolPair::One
    }
}

/// `P_k(ab | s)`: the `ab` mass of the layout inside `[alpha_{k-1}, alpha_k)`
/// divided by `lambda_k`.
pub fn pk_eval(pair: &CoupledPair, k: usize, ab: SymbolPair, s: &OrderedSuffix) -> Result<f64> {
    if s.depth() != k {
        return Err(Error::Usage(format!("suffix has depth {}, expected {k}", s.depth())));
    }
    let lambda = pair.lambda(k)?;
    if lambda <= 0.0 {
        return Err(Error::UndefinedKernel { k });
    }
    let lo = if k == 0 { 0.0 } else { pair.alpha_global(k - 1)? };
    let hi = pair.alpha_global(k)?;
    Ok(IntervalLayout::new(pair, s).mass_in(ab, lo, hi) / lambda)
}

/// Maps one uniform to a memory length and a symbol pair.
///
/// `lag_pair(j)` returns the already generated pair at lag `j`, or `None` if
/// it is unavailable.
pub fn sample_symbol(
    pair: &CoupledPair,
    xi: f64,
    lag_pair: impl FnMut(usize) -> Option<SymbolPair>,
) -> Result<(usize, SymbolPair)> {
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Usage(format!("uniform {xi} is outside [0, 1)")));
    }
    let l = pair.memory_length(xi)?;
    Ok((l, sample_with_length(pair, xi, l, lag_pair)?))
}

/// Symbol lookup once `L` is known. Walks the layout no deeper than `l`.
pub(crate) fn sample_with_length(
    pair: &CoupledPair,
    xi: f64,
    l: usize,
    mut lag_pair: impl FnMut(usize) -> Option<SymbolPair>,
) -> Result<SymbolPair> {
    let mut cursor: Cursor = pair.cursor();
    let mut last_piece = None;
    loop {
        let block = cursor.block();
        if xi < block[3] {
            return Ok(piece(&block, xi));
        }
        if let Some(i) = (0..3).rev().find(|&i| block[i + 1] > block[i]) {
            last_piece = Some(SymbolPair::ALL[i]);
        }
        if cursor.depth() >= l {
            // xi sits within rounding of alpha_l; give it to the last piece
            pair.warn_clamp();
            return Ok(last_piece.unwrap_or(SymbolPair::One));
        }
        let lag = cursor.depth() + 1;
        let older = lag_pair(lag).ok_or_else(|| Error::Usage(format!("pair at lag {lag} is unavailable")))?;
        pair.advance(&mut cursor, older);
    }
}

/// `max_ab |sum_k lambda_k P_k(ab | s_k) - P(ab | s)|` for a suffix deep
/// enough that the mixture terminates.
pub fn decomposition_identity_check(pair: &CoupledPair, s: &OrderedSuffix) -> Result<f64> {
    let d = s.depth();
    if pair.alpha_global(d)? < 1.0 {
        return Err(Error::Usage(format!("the mixture does not terminate by depth {d}")));
    }
    let mut worst: f64 = 0.0;
    for ab in SymbolPair::ALL {
        let mut total = 0.0;
        for k in 0..=d {
            let lambda = pair.lambda(k)?;
            if lambda > 0.0 {
                total += lambda * pk_eval(pair, k, ab, &s.truncated(k))?;
            }
        }
        worst = worst.max((total - pair.kernel_at(ab, s)).abs());
    }
    Ok(worst)
}
