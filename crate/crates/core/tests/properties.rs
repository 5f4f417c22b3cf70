mod common;

use common::{BruteMarkov, PAIRS};
use dbar_core::kernel::{check_order, continuity_rate, eval_p1, extremal_p1, Direction};
use dbar_core::{ChainSpec, CoupledPair, HazardSequence, OrderVerdict, OrderedSuffix, PastSummary, Suffix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table(rng: &mut impl Rng, order: usize) -> Vec<f64> {
    (0..1usize << order).map(|_| rng.random::<f64>()).collect()
}

fn lags(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

/// A random pair of lag-first pasts with `x <= y` pointwise.
fn ordered_lags(rng: &mut impl Rng, len: usize) -> (Vec<u8>, Vec<u8>) {
    let y = lags(rng, len);
    let x = y.iter().map(|&b| b & rng.random_range(0..2u8)).collect();
    (x, y)
}

fn random_pairs(rng: &mut impl Rng, len: usize) -> Vec<dbar_core::SymbolPair> {
    (0..len).map(|_| PAIRS[rng.random_range(0..3)]).collect()
}

fn p1(spec: &ChainSpec, lag_first: Vec<u8>) -> f64 {
    let s = Suffix::from_lags(lag_first).unwrap();
    eval_p1(spec, &PastSummary::from_suffix(spec, &s)).unwrap()
}

fn ordered_renewal(rng: &mut impl Rng) -> (ChainSpec, ChainSpec) {
    let qx = rng.random_range(0.05..0.5);
    let qy = rng.random_range(qx..0.7);
    let ax = rng.random_range(0.0..0.25);
    let ay = rng.random_range(ax..0.3);
    let ratio = rng.random_range(0.1..0.9);
    (
        ChainSpec::Renewal(HazardSequence::geometric(qx, ax, ratio).unwrap()),
        ChainSpec::Renewal(HazardSequence::geometric(qy, ay, ratio).unwrap()),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_verdict_matches_pointwise_comparison(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dx, dy) = (rng.random_range(0..=3), rng.random_range(0..=3));
        let (tx, ty) = if rng.random_bool(0.5) {
            common::ordered_markov_tables(&mut rng, dx, dy)
        } else {
            (table(&mut rng, dx), table(&mut rng, dy))
        };
        let (x, y) = (ChainSpec::markov(dx, tx).unwrap(), ChainSpec::markov(dy, ty).unwrap());
        match check_order(&x, &y) {
            OrderVerdict::Ordered => {
                for _ in 0..200 {
                    let (xs, ys) = ordered_lags(&mut rng, 5);
                    prop_assert!(p1(&x, xs) <= p1(&y, ys));
                }
            }
            OrderVerdict::Violated(w) => {
                prop_assert!(w.x.le(&w.y));
                prop_assert!(w.p1_x > w.p1_y);
                prop_assert_eq!(p1(&x, w.x.lags().to_vec()), w.p1_x);
            }
            OrderVerdict::Inconclusive(why) => prop_assert!(false, "inconclusive: {}", why),
        }
    }

    #[test]
    fn renewal_order_verdict(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = ordered_renewal(&mut rng);
        prop_assert!(check_order(&x, &y).is_ordered());
        for _ in 0..200 {
            let (xs, ys) = ordered_lags(&mut rng, 8);
            prop_assert!(p1(&x, xs) <= p1(&y, ys));
        }
        // swapping the roles breaks the order unless the hazards coincide
        if let OrderVerdict::Violated(w) = check_order(&y, &x) {
            prop_assert!(w.p1_x > w.p1_y);
        }
    }

    #[test]
    fn continuity_rate_is_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(0..=4);
        let markov = ChainSpec::markov(d, table(&mut rng, d)).unwrap();
        let (renewal, _) = ordered_renewal(&mut rng);
        for spec in [&markov, &renewal] {
            for k in 0..12 {
                prop_assert!(continuity_rate(spec, k + 1) <= continuity_rate(spec, k));
            }
        }
        for k in d..d + 4 {
            prop_assert_eq!(continuity_rate(&markov, k), 0.0);
        }
    }

    #[test]
    fn extremal_values_bracket_every_extension(seed in any::<u64>(), k in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(0..=4);
        let markov = ChainSpec::markov(d, table(&mut rng, d)).unwrap();
        let (renewal, _) = ordered_renewal(&mut rng);
        for spec in [&markov, &renewal] {
            let suffix = if rng.random_bool(0.3) { vec![0; k] } else { lags(&mut rng, k) };
            let s = Suffix::from_lags(suffix.clone()).unwrap();
            let lo = extremal_p1(spec, &s, Direction::Min);
            let hi = extremal_p1(spec, &s, Direction::Max);
            prop_assert!(lo <= hi);
            prop_assert!(hi - lo <= continuity_rate(spec, k) + 1e-15);
            for _ in 0..50 {
                let mut full = suffix.clone();
                full.extend(lags(&mut rng, 10));
                let v = p1(spec, full);
                prop_assert!(lo <= v && v <= hi);
            }
        }
    }

    #[test]
    fn coupled_kernel_is_a_law(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dx, dy) = (rng.random_range(0..=3), rng.random_range(0..=3));
        let (tx, ty) = common::ordered_markov_tables(&mut rng, dx, dy);
        let markov = CoupledPair::new(ChainSpec::markov(dx, tx).unwrap(), ChainSpec::markov(dy, ty).unwrap()).unwrap();
        let (rx, ry) = ordered_renewal(&mut rng);
        let renewal = CoupledPair::new(rx, ry).unwrap();
        for pair in [&markov, &renewal] {
            for _ in 0..20 {
                let s = OrderedSuffix::from_lags(random_pairs(&mut rng, 6));
                let probs: Vec<f64> = PAIRS.iter().map(|&ab| pair.kernel_at(ab, &s)).collect();
                prop_assert!(probs.iter().all(|&p| p >= 0.0));
                prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn envelope_is_admissible_and_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dx, dy) = (rng.random_range(0..=3), rng.random_range(0..=3));
        let (tx, ty) = common::ordered_markov_tables(&mut rng, dx, dy);
        let markov = CoupledPair::new(ChainSpec::markov(dx, tx).unwrap(), ChainSpec::markov(dy, ty).unwrap()).unwrap();
        let (rx, ry) = ordered_renewal(&mut rng);
        let renewal = CoupledPair::new(rx, ry).unwrap();
        for pair in [&markov, &renewal] {
            for _ in 0..30 {
                let deep = random_pairs(&mut rng, 12);
                let full = OrderedSuffix::from_lags(deep.clone());
                let mut prev = [0.0; 3];
                for k in 0..8 {
                    let s = OrderedSuffix::from_lags(deep[..k].to_vec());
                    for (i, &ab) in PAIRS.iter().enumerate() {
                        let r = pair.r_lower(k, ab, &s).unwrap();
                        prop_assert!(r <= pair.kernel_at(ab, &full) + 1e-15);
                        prop_assert!(r >= prev[i]);
                        prev[i] = r;
                    }
                    prop_assert!(pair.alpha_global(k).unwrap() <= pair.alpha_suffix(&s) + 1e-15);
                }
            }
        }
    }

    #[test]
    fn markov_envelope_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dx, dy) = (rng.random_range(0..=3), rng.random_range(0..=3));
        let (tx, ty) = common::ordered_markov_tables(&mut rng, dx, dy);
        let brute = BruteMarkov::new(tx.clone(), ty.clone());
        let pair = CoupledPair::new(ChainSpec::markov(dx, tx).unwrap(), ChainSpec::markov(dy, ty).unwrap()).unwrap();
        let d = dx.max(dy);
        prop_assert_eq!(pair.alpha_global(d).unwrap(), 1.0);
        prop_assert_eq!(pair.memory_order(), Some(d));
        for k in 0..=d {
            prop_assert!((pair.alpha_global(k).unwrap() - brute.alpha(k)).abs() <= 1e-12);
            for s in BruteMarkov::all(k) {
                let r = brute.r(&s);
                let suffix = OrderedSuffix::from_lags(s);
                for (i, &ab) in PAIRS.iter().enumerate() {
                    prop_assert!((pair.r_lower(k, ab, &suffix).unwrap() - r[i]).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn renewal_alpha_from_extensions() {
    // alpha_k(s) is smallest at the all-zero suffix; compare with the minimum
    // of each cell over explicit extensions l = k+1, ..., 200 and l = inf
    let (x, y) = (common::renewal_x(), common::renewal_y());
    let pair = CoupledPair::new(x.clone(), y.clone()).unwrap();
    let (ChainSpec::Renewal(hx), ChainSpec::Renewal(hy)) = (&x, &y) else { unreachable!() };
    for k in 0..20 {
        let mut r = [f64::INFINITY; 3];
        let ells: Vec<Option<usize>> = (k + 1..200).map(Some).chain([None]).collect();
        for &ly in &ells {
            for &lx in ells.iter().filter(|&&lx| lx.is_none() || lx >= ly && ly.is_some()) {
                let qx = lx.map_or(hx.q_inf(), |l| hx.at(l));
                let qy = ly.map_or(hy.q_inf(), |l| hy.at(l));
                r[0] = r[0].min(1.0 - qy);
                r[1] = r[1].min(qy - qx);
                r[2] = r[2].min(qx);
            }
        }
        let alpha: f64 = r.iter().sum();
        assert!((pair.alpha_global(k).unwrap() - alpha).abs() < 1e-12, "k = {k}");
    }
}
