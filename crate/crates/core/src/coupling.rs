//! The ordered bivariate kernel on `S = {(0,0), (0,1), (1,1)}` and its lower
//! envelopes.
//!
//! For an ordered suffix `s` of depth `k`, `r_k((a,b)|s)` is the infimum of the
//! coupled kernel over all ordered pasts ending in `s`. Summing over the three
//! symbols gives `alpha_k(s)`, and the infimum over all depth-`k` suffixes
//! gives the global cut point `alpha_k`. The increments `lambda_k` form the law
//! of the random memory length.
//!
//! Infima are exact for iid, Markov and renewal pairs (an iid chain joins
//! whichever family its partner belongs to). Floating-point monotonicity is
//! enforced by clamping along suffix chains; every clamp that actually moves a
//! value is counted.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::kernel::{check_order, ChainSpec, Ell, HazardSequence, MarkovTable, OrderVerdict, PastSummary, Suffix};

/// Default hard cap on the memory length.
pub const K_HARD: usize = 4096;

const TAIL_SCAN_LIMIT: usize = 1_000_000;

/// A pair of symbols `(x, y)` with `x <= y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolPair {
    /// `(0,0)`
    Zero,
    /// `(0,1)`
    Mixed,
    /// `(1,1)`
    One,
}

impl SymbolPair {
    /// Canonical order, which is also the interval layout order.
    pub const ALL: [SymbolPair; 3] = [SymbolPair::Zero, SymbolPair::Mixed, SymbolPair::One];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn x(self) -> u8 {
        (self == SymbolPair::One) as u8
    }

    pub fn y(self) -> u8 {
        (self != SymbolPair::Zero) as u8
    }

    /// `None` for the unrepresentable pair `(1,0)`.
    pub fn from_bits(x: u8, y: u8) -> Option<Self> {
        match (x, y) {
            (0, 0) => Some(SymbolPair::Zero),
            (0, 1) => Some(SymbolPair::Mixed),
            (1, 1) => Some(SymbolPair::One),
            _ => None,
        }
    }

    pub fn is_mismatch(self) -> bool {
        self == SymbolPair::Mixed
    }
}

impl fmt::Display for SymbolPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x(), self.y())
    }
}

/// An ordered pair of finite pasts, stored lag-first as symbol pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OrderedSuffix {
    pairs: Vec<SymbolPair>,
}

impl OrderedSuffix {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `lag_first[0]` is the pair at lag 1.
    pub fn from_lags(lag_first: Vec<SymbolPair>) -> Self {
        Self { pairs: lag_first }
    }

    /// Two time-ordered binary strings of equal length with `x <= y` pointwise.
    pub fn from_strings(x: &str, y: &str) -> Result<Self> {
        let (xs, ys) = (Suffix::parse(x)?, Suffix::parse(y)?);
        if xs.len() != ys.len() {
            return Err(Error::Usage(format!("suffixes {x:?} and {y:?} differ in length")));
        }
        let pairs = xs
            .lags()
            .iter()
            .zip(ys.lags())
            .map(|(&a, &b)| SymbolPair::from_bits(a, b))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Usage(format!("suffix pair ({x:?}, {y:?}) is not ordered")))?;
        Ok(Self { pairs })
    }

    pub fn depth(&self) -> usize {
        self.pairs.len()
    }

    /// Pair at lag `lag >= 1`.
    pub fn lag(&self, lag: usize) -> SymbolPair {
        self.pairs[lag - 1]
    }

    pub fn pairs(&self) -> &[SymbolPair] {
        &self.pairs
    }

    /// The most recent `depth` pairs.
    pub fn truncated(&self, depth: usize) -> Self {
        Self { pairs: self.pairs[..depth.min(self.pairs.len())].to_vec() }
    }

    /// This suffix refined by one older pair.
    pub fn refined(&self, older: SymbolPair) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.push(older);
        Self { pairs }
    }

    pub fn x(&self) -> Suffix {
        Suffix::from_lags(self.pairs.iter().map(|p| p.x()).collect()).expect("binary")
    }

    pub fn y(&self) -> Suffix {
        Suffix::from_lags(self.pairs.iter().map(|p| p.y()).collect()).expect("binary")
    }
}

impl fmt::Display for OrderedSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x(), self.y())
    }
}

/// Outcome of the Condition 3 check `prod_k alpha_k > 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition3 {
    /// `lower_bound` is a certified lower bound on the infinite product.
    Satisfied { lower_bound: f64, partial_product: f64 },
    Failed(String),
    Inconclusive(String),
}

/// Position along a suffix chain `s_0 ⊂ s_1 ⊂ ...`, fed one older pair at a
/// time. Holds the clamped envelope at the current depth.
#[derive(Debug, Clone)]
pub(crate) struct Cursor {
    depth: usize,
    key: Key,
    r: [f64; 3],
    prev_r: [f64; 3],
    end: f64,
    prev_end: f64,
    exact: bool,
}

#[derive(Debug, Clone, Copy)]
enum Key {
    Markov { code: usize, pow: usize },
    Renewal { lx: Option<usize>, ly: Option<usize> },
}

impl Cursor {
    pub(crate) fn depth(&self) -> usize {
        self.depth
    }

    /// Right end of the depth-`k` block, `alpha_k(s_k)`.
    pub(crate) fn end(&self) -> f64 {
        self.end
    }

    /// Breakpoints of the depth-`k` block: start, end of the `(0,0)` piece,
    /// end of the `(0,1)` piece, end of the block.
    pub(crate) fn block(&self) -> [f64; 4] {
        let start = self.prev_end;
        let c1 = start + (self.r[0] - self.prev_r[0]);
        let c2 = c1 + (self.r[1] - self.prev_r[1]);
        [start, c1.min(self.end), c2.min(self.end), self.end]
    }
}

#[derive(Debug)]
struct MarkovEnvelope {
    depth: usize,
    /// `r[k][code]`, `code` is the base-3 lag-first index of the depth-`k` suffix.
    r: Vec<Vec<[f64; 3]>>,
    alpha: Vec<f64>,
}

#[derive(Debug)]
struct RenewalEnvelope {
    hx: HazardSequence,
    hy: HazardSequence,
    /// `inf_{b > k} (q^Y_b - q^X_b)`, indexed by `k`.
    tail01: RwLock<Vec<f64>>,
    alpha: RwLock<Vec<f64>>,
}

#[derive(Debug)]
enum Model {
    Markov(MarkovEnvelope),
    Renewal(RenewalEnvelope),
}

/// Two stochastically ordered chains together with their envelope table.
#[derive(Debug)]
pub struct CoupledPair {
    x: ChainSpec,
    y: ChainSpec,
    model: Model,
    hard_cap: usize,
    clamp_warnings: AtomicU64,
}

impl CoupledPair {
    /// Verifies the ordering condition and builds the envelope table.
    pub fn new(x: ChainSpec, y: ChainSpec) -> Result<Self> {
        match check_order(&x, &y) {
            OrderVerdict::Ordered => {}
            OrderVerdict::Violated(w) => {
                return Err(Error::ConditionFailed { condition: 1, detail: w.to_string() });
            }
            OrderVerdict::Inconclusive(why) => {
                return Err(Error::ConditionFailed { condition: 1, detail: format!("inconclusive: {why}") });
            }
        }
        let model = match (x.as_markov(), y.as_markov(), x.as_hazard(), y.as_hazard()) {
            (Some(tx), Some(ty), _, _) => Model::Markov(MarkovEnvelope::build(tx, ty)),
            (_, _, Some(hx), Some(hy)) => Model::Renewal(RenewalEnvelope {
                hx,
                hy,
                tail01: RwLock::new(Vec::new()),
                alpha: RwLock::new(Vec::new()),
            }),
            _ => {
                return Err(Error::Unsupported(format!(
                    "coupling a {} chain with a {} chain",
                    x.family(),
                    y.family()
                )))
            }
        };
        let mut pair = Self { x, y, model, hard_cap: K_HARD, clamp_warnings: AtomicU64::new(0) };
        let alpha = match &pair.model {
            Model::Markov(m) => Some(pair.markov_alpha(m)),
            Model::Renewal(_) => None,
        };
        if let (Model::Markov(m), Some(alpha)) = (&mut pair.model, alpha) {
            m.alpha = alpha;
        }
        Ok(pair)
    }

    /// Override the memory-length hard cap (default [`K_HARD`]).
    pub fn with_hard_cap(mut self, cap: usize) -> Self {
        self.hard_cap = cap;
        self
    }

    pub fn x(&self) -> &ChainSpec {
        &self.x
    }

    pub fn y(&self) -> &ChainSpec {
        &self.y
    }

    pub fn hard_cap(&self) -> usize {
        self.hard_cap
    }

    /// Number of clamps that changed an envelope value.
    pub fn clamp_warnings(&self) -> u64 {
        self.clamp_warnings.load(Ordering::Relaxed)
    }

    pub(crate) fn warn_clamp(&self) {
        self.clamp_warnings.fetch_add(1, Ordering::Relaxed);
    }

    /// `P((a,b) | past_x, past_y)`.
    pub fn coupled_kernel(&self, ab: SymbolPair, past_x: &PastSummary, past_y: &PastSummary) -> Result<f64> {
        if !pasts_consistent(past_x, past_y) {
            return Err(Error::Usage(format!("pasts {past_x:?} and {past_y:?} are not ordered")));
        }
        let px = crate::kernel::eval_p1(&self.x, past_x)?;
        let py = crate::kernel::eval_p1(&self.y, past_y)?;
        let mixed = py - px;
        if mixed < -1e-12 {
            return Err(Error::Usage(format!("ordering fails at these pasts: p^X = {px} > p^Y = {py}")));
        }
        Ok(match ab {
            SymbolPair::One => px,
            SymbolPair::Zero => 1.0 - py,
            SymbolPair::Mixed => mixed.max(0.0),
        })
    }

    /// Kernel at the past `s` followed by `(0,0)` forever.
    pub fn kernel_at(&self, ab: SymbolPair, s: &OrderedSuffix) -> f64 {
        let px = PastSummary::from_suffix(&self.x, &s.x());
        let py = PastSummary::from_suffix(&self.y, &s.y());
        self.coupled_kernel(ab, &px, &py).expect("ordered suffix")
    }

    /// Clamped lower envelope `r_k((a,b)|s)` with `k = s.depth()`.
    pub fn r_lower(&self, k: usize, ab: SymbolPair, s: &OrderedSuffix) -> Result<f64> {
        if s.depth() != k {
            return Err(Error::Usage(format!("suffix has depth {}, expected {k}", s.depth())));
        }
        Ok(self.cursor_for(s).r[ab.index()])
    }

    /// `alpha_k(s) = sum_{(a,b)} r_k((a,b)|s)`.
    pub fn alpha_suffix(&self, s: &OrderedSuffix) -> f64 {
        self.cursor_for(s).end
    }

    /// Global cut point `alpha_k`, the infimum of `alpha_k(s)` over depth-`k` suffixes.
    pub fn alpha_global(&self, k: usize) -> Result<f64> {
        if k > self.hard_cap {
            return Err(Error::HardCap { cap: self.hard_cap, t: 0, xi: f64::NAN });
        }
        Ok(match &self.model {
            Model::Markov(m) => m.alpha[k.min(m.depth)],
            Model::Renewal(rn) => {
                if let Some(&a) = rn.alpha.read().expect("lock").get(k) {
                    return Ok(a);
                }
                self.extend_renewal_alpha(rn, k);
                rn.alpha.read().expect("lock")[k]
            }
        })
    }

    /// `lambda_0 = alpha_0`, `lambda_k = alpha_k - alpha_{k-1}`.
    pub fn lambda(&self, k: usize) -> Result<f64> {
        let a = self.alpha_global(k)?;
        let prev = if k == 0 { 0.0 } else { self.alpha_global(k - 1)? };
        Ok((a - prev).max(0.0))
    }

    /// Smallest `k` with `xi < alpha_k`.
    pub fn memory_length(&self, xi: f64) -> Result<usize> {
        match &self.model {
            Model::Markov(m) => Ok(m.alpha.partition_point(|&a| a <= xi).min(m.depth)),
            Model::Renewal(rn) => {
                {
                    let alpha = rn.alpha.read().expect("lock");
                    if alpha.last().is_some_and(|&a| xi < a) {
                        return Ok(alpha.partition_point(|&a| a <= xi));
                    }
                }
                let mut k = rn.alpha.read().expect("lock").len();
                loop {
                    if k > self.hard_cap {
                        return Err(Error::HardCap { cap: self.hard_cap, t: 0, xi });
                    }
                    if xi < self.alpha_global(k)? {
                        return Ok(k);
                    }
                    k += 1;
                }
            }
        }
    }

    /// Checks `prod_{k>=0} alpha_k > 0`, bounding the tail beyond `k_max`.
    pub fn check_condition3(&self, k_max: usize, tol: f64) -> Condition3 {
        let k_max = k_max.max(1);
        let upto = match &self.model {
            Model::Markov(m) => k_max.max(m.depth),
            Model::Renewal(_) => k_max,
        };
        if upto > self.hard_cap {
            return Condition3::Inconclusive(format!("k_max {upto} exceeds the hard cap {}", self.hard_cap));
        }
        let mut product = 1.0;
        for k in 0..=upto {
            let a = self.alpha_global(k).expect("below hard cap");
            if a <= 0.0 {
                return Condition3::Failed(format!("alpha_{k} = 0"));
            }
            product *= a;
        }
        let tail = match &self.model {
            Model::Markov(_) => 1.0,
            Model::Renewal(rn) => {
                // 1 - alpha_k <= (q^X_{k+1} - q^X_inf) + (q^Y_{k+1} - q^Y_inf)
                let from = upto + 2;
                let eps = rn.hx.excess(from) + rn.hy.excess(from);
                if eps >= 1.0 {
                    return Condition3::Inconclusive(format!(
                        "tail bound unavailable at k_max = {upto}; increase k_max"
                    ));
                }
                let sum = rn.hx.tail_excess_sum(from) + rn.hy.tail_excess_sum(from);
                if !sum.is_finite() {
                    return Condition3::Failed("hazard excess is not summable".into());
                }
                (-sum / (1.0 - eps)).exp()
            }
        };
        let lower_bound = product * tail;
        if lower_bound > tol {
            Condition3::Satisfied { lower_bound, partial_product: product }
        } else {
            Condition3::Inconclusive(format!("certified bound {lower_bound:e} does not exceed tolerance {tol:e}"))
        }
    }

    pub(crate) fn cursor(&self) -> Cursor {
        let key = match self.model {
            Model::Markov(_) => Key::Markov { code: 0, pow: 1 },
            Model::Renewal(_) => Key::Renewal { lx: None, ly: None },
        };
        let (raw, exact) = self.raw(0, key);
        let mut r = raw;
        if r[1] < 0.0 {
            r[1] = 0.0;
        }
        let end = if exact { 1.0 } else { r[0] + r[1] + r[2] };
        Cursor { depth: 0, key, r, prev_r: [0.0; 3], end, prev_end: 0.0, exact }
    }

    /// Refine the cursor by the pair at lag `depth + 1`.
    pub(crate) fn advance(&self, c: &mut Cursor, older: SymbolPair) {
        let k = c.depth + 1;
        c.key = match c.key {
            Key::Markov { code, pow } => {
                let depth = match &self.model {
                    Model::Markov(m) => m.depth,
                    Model::Renewal(_) => unreachable!(),
                };
                if k <= depth {
                    Key::Markov { code: code + older.index() * pow, pow: pow * 3 }
                } else {
                    Key::Markov { code, pow }
                }
            }
            Key::Renewal { lx, ly } => Key::Renewal {
                lx: lx.or((older.x() == 1).then_some(k)),
                ly: ly.or((older.y() == 1).then_some(k)),
            },
        };
        c.prev_r = c.r;
        c.prev_end = c.end;
        c.depth = k;
        if c.exact {
            return;
        }
        let (raw, exact) = self.raw(k, c.key);
        for (r, (&v, &prev)) in c.r.iter_mut().zip(raw.iter().zip(&c.prev_r)) {
            if v < prev {
                self.warn_clamp();
            } else {
                *r = v;
            }
        }
        c.exact = exact;
        c.end = if exact { 1.0 } else { (c.r[0] + c.r[1] + c.r[2]).max(c.prev_end) };
    }

    pub(crate) fn cursor_for(&self, s: &OrderedSuffix) -> Cursor {
        let mut c = self.cursor();
        for &p in s.pairs() {
            self.advance(&mut c, p);
        }
        c
    }

    /// Unclamped envelope at depth `k` and whether it equals the kernel.
    fn raw(&self, k: usize, key: Key) -> ([f64; 3], bool) {
        match (&self.model, key) {
            (Model::Markov(m), Key::Markov { code, .. }) => {
                let d = k.min(m.depth);
                (m.r[d][code], k >= m.depth)
            }
            (Model::Renewal(rn), Key::Renewal { lx, ly }) => {
                let (hx, hy) = (&rn.hx, &rn.hy);
                let r11 = lx.map_or(hx.q_inf(), |i| hx.at(i));
                let r00 = 1.0 - ly.map_or(hy.at(k + 1), |j| hy.at(j));
                let r01 = match (lx, ly) {
                    (Some(i), Some(j)) => hy.at(j) - hx.at(i),
                    (None, Some(j)) => hy.at(j) - hx.at(k + 1),
                    (None, None) => self.tail01(rn, k),
                    (Some(_), None) => unreachable!("x has a 1 where y has a 0"),
                };
                let exact = (ly.is_some() || hy.excess(k + 1) == 0.0) && (lx.is_some() || hx.excess(k + 1) == 0.0);
                ([r00, r01.max(0.0), r11], exact)
            }
            _ => unreachable!("cursor key matches the model"),
        }
    }

    fn tail01(&self, rn: &RenewalEnvelope, k: usize) -> f64 {
        if let Some(&v) = rn.tail01.read().expect("lock").get(k) {
            return v;
        }
        let mut memo = rn.tail01.write().expect("lock");
        while memo.len() <= k {
            let j = memo.len();
            let v = tail_infimum(&rn.hx, &rn.hy, j);
            let v = match memo.last() {
                Some(&prev) if v < prev => {
                    self.warn_clamp();
                    prev
                }
                _ => v,
            };
            memo.push(v);
        }
        memo[k]
    }

    fn extend_renewal_alpha(&self, rn: &RenewalEnvelope, k: usize) {
        let start = rn.alpha.read().expect("lock").len();
        let mut fresh = Vec::new();
        for j in start..=k {
            // classes: both tails open, only x open, both determined (exact, alpha = 1)
            let mut a = self.class_alpha(j, Key::Renewal { lx: None, ly: None });
            if j >= 1 {
                a = a.min(self.class_alpha(j, Key::Renewal { lx: None, ly: Some(1) }));
            }
            fresh.push(a);
        }
        let mut alpha = rn.alpha.write().expect("lock");
        for (j, a) in (start..=k).zip(fresh) {
            if j < alpha.len() {
                continue;
            }
            let prev = alpha.last().copied().unwrap_or(0.0);
            alpha.push(a.max(prev));
        }
    }

    fn class_alpha(&self, k: usize, key: Key) -> f64 {
        let (r, exact) = self.raw(k, key);
        if exact {
            1.0
        } else {
            r[0] + r[1] + r[2]
        }
    }

    fn markov_alpha(&self, m: &MarkovEnvelope) -> Vec<f64> {
        let mut alpha = vec![f64::INFINITY; m.depth + 1];
        let mut stack = vec![self.cursor()];
        while let Some(c) = stack.pop() {
            let k = c.depth();
            alpha[k] = alpha[k].min(c.end());
            if k < m.depth {
                for p in SymbolPair::ALL {
                    let mut next = c.clone();
                    self.advance(&mut next, p);
                    stack.push(next);
                }
            }
        }
        for k in 1..alpha.len() {
            alpha[k] = alpha[k].max(alpha[k - 1]);
        }
        alpha
    }
}

/// A coupled pair whose product condition has been certified. Sampling and
/// estimation only accept this type.
#[derive(Debug)]
pub struct CertifiedPair {
    pair: CoupledPair,
    lower_bound: f64,
}

impl CertifiedPair {
    /// Certified lower bound on `prod_k alpha_k`.
    pub fn product_lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn into_inner(self) -> CoupledPair {
        self.pair
    }
}

impl std::ops::Deref for CertifiedPair {
    type Target = CoupledPair;

    fn deref(&self) -> &CoupledPair {
        &self.pair
    }
}

impl CoupledPair {
    /// Runs [`CoupledPair::check_condition3`] and wraps the pair on success.
    pub fn certify(self, k_max: usize, tol: f64) -> Result<CertifiedPair> {
        match self.check_condition3(k_max, tol) {
            Condition3::Satisfied { lower_bound, .. } => Ok(CertifiedPair { pair: self, lower_bound }),
            Condition3::Failed(detail) => Err(Error::ConditionFailed { condition: 3, detail }),
            Condition3::Inconclusive(why) => {
                Err(Error::ConditionFailed { condition: 3, detail: format!("inconclusive: {why}") })
            }
        }
    }

    /// Markov order of the pair, when the envelope terminates at a finite depth.
    pub fn memory_order(&self) -> Option<usize> {
        match &self.model {
            Model::Markov(m) => Some(m.depth),
            Model::Renewal(_) => None,
        }
    }
}

impl MarkovEnvelope {
    fn build(tx: MarkovTable, ty: MarkovTable) -> Self {
        let depth = tx.order().max(ty.order());
        let full = 3usize.pow(depth as u32);
        // kernel at every ordered depth-`depth` suffix
        let kernel: Vec<[f64; 3]> = (0..full)
            .map(|code| {
                let (xi, yi) = bits_of(code, depth);
                let (px, py) = (tx.get(xi), ty.get(yi));
                [1.0 - py, py - px, px]
            })
            .collect();
        let mut r = Vec::with_capacity(depth + 1);
        for k in 0..=depth {
            let width = 3usize.pow(k as u32);
            let mut level = vec![[f64::INFINITY; 3]; width];
            for (code, kv) in kernel.iter().enumerate() {
                let slot = &mut level[code % width];
                for i in 0..3 {
                    slot[i] = slot[i].min(kv[i]);
                }
            }
            r.push(level);
        }
        Self { depth, r, alpha: Vec::new() }
    }
}

/// Lag-indexed bit patterns of x and y for a base-3 suffix code.
fn bits_of(mut code: usize, depth: usize) -> (usize, usize) {
    let (mut xi, mut yi) = (0, 0);
    for lag in 0..depth {
        let p = SymbolPair::ALL[code % 3];
        xi |= (p.x() as usize) << lag;
        yi |= (p.y() as usize) << lag;
        code /= 3;
    }
    (xi, yi)
}

/// `inf_{b >= k+1, b <= inf} (q^Y_b - q^X_b)`.
fn tail_infimum(hx: &HazardSequence, hy: &HazardSequence, k: usize) -> f64 {
    let mut best = hy.q_inf() - hx.q_inf();
    let mut b = k + 1;
    loop {
        best = best.min(hy.at(b) - hx.at(b));
        // every later b' has q^Y_b' - q^X_b' >= q^Y_inf - q^X_{b+1}
        let lower = hy.q_inf() - hx.at(b + 1);
        if lower >= best {
            return best;
        }
        if b - k >= TAIL_SCAN_LIMIT {
            return lower;
        }
        b += 1;
    }
}

fn pasts_consistent(px: &PastSummary, py: &PastSummary) -> bool {
    match (px, py) {
        (PastSummary::Renewal(lx), PastSummary::Renewal(ly)) => match (lx, ly) {
            (Ell::Infinite, _) => true,
            (Ell::Finite(_), Ell::Infinite) => false,
            (Ell::Finite(a), Ell::Finite(b)) => a >= b,
        },
        (PastSummary::Markov(sx), PastSummary::Markov(sy)) => sx.le(sy),
        (PastSummary::Markov(sx), PastSummary::Renewal(ly)) => match sx.first_one() {
            None => true,
            Some(j) => matches!(ly, Ell::Finite(b) if *b <= j),
        },
        (PastSummary::Renewal(lx), PastSummary::Markov(sy)) => match lx {
            Ell::Finite(a) if *a <= sy.len() => sy.lag(*a) == 1,
            _ => true,
        },
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn markov_pair() -> CoupledPair {
        CoupledPair::new(
            ChainSpec::markov(1, vec![0.2, 0.4]).unwrap(),
            ChainSpec::markov(1, vec![0.5, 0.7]).unwrap(),
        )
        .unwrap()
    }

    fn iid_pair() -> CoupledPair {
        CoupledPair::new(ChainSpec::iid(0.3).unwrap(), ChainSpec::iid(0.5).unwrap()).unwrap()
    }

    fn renewal_pair() -> CoupledPair {
        CoupledPair::new(
            ChainSpec::Renewal(HazardSequence::geometric(0.4, 0.2, 0.5).unwrap()),
            ChainSpec::Renewal(HazardSequence::geometric(0.6, 0.2, 0.5).unwrap()),
        )
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn kernel_examples() {
        let p = iid_pair();
        let e = PastSummary::Iid;
        assert!(close(p.coupled_kernel(SymbolPair::One, &e, &e).unwrap(), 0.3));
        assert!(close(p.coupled_kernel(SymbolPair::Zero, &e, &e).unwrap(), 0.5));
        assert!(close(p.coupled_kernel(SymbolPair::Mixed, &e, &e).unwrap(), 0.2));

        let r = renewal_pair();
        let one = PastSummary::Renewal(Ell::Finite(1));
        assert!(close(r.coupled_kernel(SymbolPair::One, &one, &one).unwrap(), 0.5));
        assert!(close(r.coupled_kernel(SymbolPair::Zero, &one, &one).unwrap(), 0.3));
        assert!(close(r.coupled_kernel(SymbolPair::Mixed, &one, &one).unwrap(), 0.2));

        let same = CoupledPair::new(
            ChainSpec::markov(1, vec![0.2, 0.4]).unwrap(),
            ChainSpec::markov(1, vec![0.2, 0.4]).unwrap(),
        )
        .unwrap();
        let s = PastSummary::Markov(Suffix::parse("1").unwrap());
        assert_eq!(same.coupled_kernel(SymbolPair::Mixed, &s, &s).unwrap(), 0.0);
    }

    #[test]
    fn kernel_rejects_unordered_pasts() {
        let r = renewal_pair();
        let err = r.coupled_kernel(SymbolPair::One, &PastSummary::Renewal(Ell::Finite(1)), &PastSummary::Renewal(Ell::Finite(2)));
        assert!(matches!(err, Err(Error::Usage(_))));
        let m = markov_pair();
        let one = PastSummary::Markov(Suffix::parse("1").unwrap());
        let zero = PastSummary::Markov(Suffix::parse("0").unwrap());
        assert!(m.coupled_kernel(SymbolPair::One, &one, &zero).is_err());
    }

    #[test]
    fn envelope_examples() {
        let p = iid_pair();
        let e = OrderedSuffix::empty();
        assert!(close(p.r_lower(0, SymbolPair::One, &e).unwrap(), 0.3));
        assert!(close(p.r_lower(0, SymbolPair::Zero, &e).unwrap(), 0.5));
        assert!(close(p.r_lower(0, SymbolPair::Mixed, &e).unwrap(), 0.2));
        assert_eq!(p.alpha_global(0).unwrap(), 1.0);

        let m = markov_pair();
        assert!(close(m.r_lower(0, SymbolPair::One, &e).unwrap(), 0.2));
        assert!(close(m.r_lower(0, SymbolPair::Zero, &e).unwrap(), 0.3));
        assert!(close(m.r_lower(0, SymbolPair::Mixed, &e).unwrap(), 0.3));
        let s = OrderedSuffix::from_strings("0", "0").unwrap();
        assert!(close(m.r_lower(1, SymbolPair::One, &s).unwrap(), 0.2));
        assert!(close(m.r_lower(1, SymbolPair::Zero, &s).unwrap(), 0.5));
        assert!(close(m.r_lower(1, SymbolPair::Mixed, &s).unwrap(), 0.3));
        assert!(m.r_lower(2, SymbolPair::One, &s).is_err());

        assert!(close(m.alpha_global(0).unwrap(), 0.8));
        assert_eq!(m.alpha_global(1).unwrap(), 1.0);
        assert!(close(m.lambda(0).unwrap(), 0.8));
        assert!(close(m.lambda(1).unwrap(), 0.2));
        assert_eq!(m.lambda(2).unwrap(), 0.0);
        assert_eq!(p.lambda(0).unwrap(), 1.0);
        assert_eq!(p.lambda(3).unwrap(), 0.0);
    }

    #[test]
    fn renewal_alpha_closed_form() {
        // alpha_k = 1 - 0.2 * 0.5^(k+1) for the running example
        let r = renewal_pair();
        for k in 0..20 {
            let want = 1.0 - 0.2 * 0.5f64.powi(k as i32 + 1);
            assert!(close(r.alpha_global(k).unwrap(), want), "k = {k}");
        }
        assert!(close(r.lambda(0).unwrap(), 0.9));
    }

    #[test]
    fn condition3_examples() {
        match markov_pair().check_condition3(1, 1e-12) {
            Condition3::Satisfied { lower_bound, .. } => assert!(close(lower_bound, 0.8)),
            c => panic!("unexpected {c:?}"),
        }
        match renewal_pair().check_condition3(16, 1e-12) {
            Condition3::Satisfied { lower_bound, partial_product } => {
                assert!(lower_bound > 0.0 && lower_bound <= partial_product);
                // prod (1 - 0.1 * 0.5^k) = 0.8088...
                assert!(partial_product > 0.80 && partial_product < 0.82);
            }
            c => panic!("unexpected {c:?}"),
        }
        // x and y copy their previous symbol: every r_0 vanishes
        let copy = ChainSpec::markov(1, vec![0.0, 1.0]).unwrap();
        let degenerate = CoupledPair::new(copy.clone(), copy).unwrap();
        for ab in SymbolPair::ALL {
            assert_eq!(degenerate.r_lower(0, ab, &OrderedSuffix::empty()).unwrap(), 0.0);
        }
        assert!(matches!(degenerate.check_condition3(4, 1e-12), Condition3::Failed(_)));
    }

    #[test]
    fn mixed_families_rejected() {
        let x = ChainSpec::markov(1, vec![0.1, 0.2]).unwrap();
        let y = ChainSpec::Renewal(HazardSequence::geometric(0.4, 0.2, 0.5).unwrap());
        assert!(matches!(CoupledPair::new(x, y), Err(Error::Unsupported(_))));
        let bad = CoupledPair::new(ChainSpec::iid(0.6).unwrap(), ChainSpec::iid(0.5).unwrap());
        assert!(matches!(bad, Err(Error::ConditionFailed { condition: 1, .. })));
    }

    #[test]
    fn hard_cap_is_enforced() {
        let r = renewal_pair().with_hard_cap(3);
        assert!(r.alpha_global(3).is_ok());
        assert!(matches!(r.alpha_global(4), Err(Error::HardCap { .. })));
        assert!(matches!(r.memory_length(0.9999), Err(Error::HardCap { .. })));
    }

    #[test]
    fn symbol_pair_bits() {
        assert_eq!(SymbolPair::from_bits(1, 0), None);
        for p in SymbolPair::ALL {
            assert_eq!(SymbolPair::from_bits(p.x(), p.y()), Some(p));
        }
        assert_eq!(SymbolPair::Mixed.to_string(), "(0,1)");
        assert!(OrderedSuffix::from_strings("10", "01").is_err());
    }
}
