//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the envelope or decomposition code of the library.

#![allow(dead_code)]

use dbar_core::{ChainSpec, HazardSequence, SymbolPair};
use rand::Rng;

pub const PAIRS: [SymbolPair; 3] = [SymbolPair::Zero, SymbolPair::Mixed, SymbolPair::One];

pub fn markov_x() -> ChainSpec {
    ChainSpec::markov(1, vec![0.2, 0.4]).unwrap()
}

pub fn markov_y() -> ChainSpec {
    ChainSpec::markov(1, vec![0.5, 0.7]).unwrap()
}

pub fn renewal_x() -> ChainSpec {
    ChainSpec::Renewal(HazardSequence::geometric(0.4, 0.2, 0.5).unwrap())
}

pub fn renewal_y() -> ChainSpec {
    ChainSpec::Renewal(HazardSequence::geometric(0.6, 0.2, 0.5).unwrap())
}

/// Ordered pair of lag-indexed Markov tables of orders `dx` and `dy`.
///
/// X is monotone in its lag bits. Each Y entry dominates the largest X entry
/// compatible with it, which makes the pair ordered.
pub fn ordered_markov_tables(rng: &mut impl Rng, dx: usize, dy: usize) -> (Vec<f64>, Vec<f64>) {
    let nx = 1usize << dx;
    let w: Vec<f64> = (0..nx).map(|_| rng.random::<f64>()).collect();
    let scale: f64 = w.iter().sum::<f64>() * rng.random_range(1.0..1.5);
    let x: Vec<f64> = (0..nx).map(|i| (0..nx).filter(|&j| j & i == j).map(|j| w[j]).sum::<f64>() / scale).collect();
    let ny = 1usize << dy;
    let y: Vec<f64> = (0..ny)
        .map(|i| {
            // lags beyond dy are unseen by Y: the worst X state has them all set
            let hi = (i | !(ny - 1)) & (nx - 1);
            let floor = x[hi];
            (floor + rng.random::<f64>() * (1.0 - floor)).min(1.0)
        })
        .collect();
    (x, y)
}

/// Exhaustive envelope computations for a Markov pair.
pub struct BruteMarkov {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dx: usize,
    pub dy: usize,
    pub depth: usize,
    alphas: Vec<f64>,
}

impl BruteMarkov {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let dx = x.len().trailing_zeros() as usize;
        let dy = y.len().trailing_zeros() as usize;
        let mut b = Self { x, y, dx, dy, depth: dx.max(dy), alphas: Vec::new() };
        b.alphas = (0..=b.depth)
            .map(|k| Self::all(k).iter().map(|s| b.alpha_suffix(s)).fold(f64::INFINITY, f64::min))
            .collect();
        b
    }

    /// Coupled kernel at a lag-first past (missing lags are `(0,0)`).
    pub fn kernel(&self, past: &[SymbolPair]) -> [f64; 3] {
        let bits = |d: usize, f: fn(SymbolPair) -> u8| -> usize {
            (0..d).map(|j| (past.get(j).map_or(0, |&p| f(p)) as usize) << j).sum()
        };
        let px = self.x[bits(self.dx, SymbolPair::x)];
        let py = self.y[bits(self.dy, SymbolPair::y)];
        [1.0 - py, py - px, px]
    }

    /// All lag-first sequences of length `len`.
    pub fn all(len: usize) -> Vec<Vec<SymbolPair>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|v| {
                    PAIRS.iter().map(move |&p| {
                        let mut w = v.clone();
                        w.push(p);
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// `r_k(. | s)` as a minimum over all extensions to the full order.
    pub fn r(&self, s: &[SymbolPair]) -> [f64; 3] {
        let mut r = [f64::INFINITY; 3];
        for ext in Self::all(self.depth.saturating_sub(s.len())) {
            let full: Vec<SymbolPair> = s.iter().chain(&ext).copied().collect();
            let k = self.kernel(&full);
            for i in 0..3 {
                r[i] = r[i].min(k[i]);
            }
        }
        r
    }

    pub fn alpha_suffix(&self, s: &[SymbolPair]) -> f64 {
        self.r(s).iter().sum()
    }

    pub fn alpha(&self, k: usize) -> f64 {
        self.alphas[k.min(self.depth)]
    }

    pub fn lambda(&self, k: usize) -> f64 {
        if k == 0 {
            self.alpha(0)
        } else {
            (self.alpha(k) - self.alpha(k - 1)).max(0.0)
        }
    }

    /// `P_k(ab | s)` from an explicit interval layout.
    pub fn pk(&self, k: usize, ab: SymbolPair, s: &[SymbolPair]) -> f64 {
        let (lo, hi) = (if k == 0 { 0.0 } else { self.alpha(k - 1) }, self.alpha(k));
        let mut mass = 0.0;
        let mut start = 0.0;
        let mut prev = [0.0; 3];
        for j in 0..=k {
            let r = self.r(&s[..j]);
            let mut a = start;
            for (i, &p) in PAIRS.iter().enumerate() {
                let b = a + (r[i] - prev[i]);
                if p == ab {
                    mass += (b.min(hi) - a.max(lo)).max(0.0);
                }
                a = b;
            }
            start = a;
            prev = r;
        }
        mass / (hi - lo)
    }

    /// `max_ab |sum_k lambda_k P_k(ab | s_k) - P(ab | s)|` for `|s| = depth`.
    pub fn identity_error(&self, s: &[SymbolPair]) -> f64 {
        let kernel = self.kernel(s);
        PAIRS
            .iter()
            .enumerate()
            .map(|(i, &ab)| {
                let mix: f64 = (0..=self.depth)
                    .filter(|&k| self.lambda(k) > 0.0)
                    .map(|k| self.lambda(k) * self.pk(k, ab, &s[..k]))
                    .sum();
                (mix - kernel[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Stationary `P(1)` of one component by power iteration on the lag states.
    pub fn marginal(table: &[f64]) -> f64 {
        let n = table.len();
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..20_000 {
            let mut next = vec![0.0; n];
            for s in 0..n {
                next[((s << 1) | 1) & (n - 1)] += pi[s] * table[s];
                next[(s << 1) & (n - 1)] += pi[s] * (1.0 - table[s]);
            }
            pi = next;
        }
        pi.iter().zip(table).map(|(w, p)| w * p).sum()
    }
}

/// Stationary `P(1)` of a renewal chain from the law of the distance to the
/// last 1: `pi(l) ∝ prod_{j<l} (1 - q_j)`, `P(1) = sum_l pi(l) q_l`.
pub fn renewal_marginal(q: impl Fn(usize) -> f64) -> f64 {
    let (mut weight, mut norm, mut ones) = (1.0, 0.0, 0.0);
    let mut l = 1;
    while weight > 1e-300 && l < 10_000_000 {
        norm += weight;
        ones += weight * q(l);
        weight *= 1.0 - q(l);
        l += 1;
    }
    ones / norm
}

/// Pearson statistic and p-value, merging cells left to right until each
/// expects at least five counts.
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let n: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut e, mut o) = (0.0, 0.0);
    for (&obs, &p) in observed.iter().zip(probs) {
        if p == 0.0 && obs > 0 {
            return 0.0;
        }
        e += p * n as f64;
        o += obs as f64;
        if e >= 5.0 {
            cells.push((e, o));
            e = 0.0;
            o = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += e;
        last.1 += o;
    }
    if cells.len() < 2 {
        return 1.0;
    }
    let stat: f64 = cells.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    ChiSquared::new((cells.len() - 1) as f64).unwrap().sf(stat)
}
