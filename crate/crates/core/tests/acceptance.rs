//! Acceptance suite. Each criterion prints one `[PASS]` / `[FAIL]` line
//! (run with `--nocapture` to see them) and fails the test on violation.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use submarket_lab::arbitrage::{check_global_nfl, check_submarket_nfl, direct_arbitrage_lp, extract_deflator, SelectorCone};
use submarket_lab::cli;
use submarket_lab::fixtures::{m1, m2};
use submarket_lab::gains::{complete_self_financing, global_gains, self_financing_residuals, wealth_process};
use submarket_lab::generate::{
    arbitrage_free_model, complete_binary_pair, deterministic_numeraire_model, mixed_model, random_claim, random_tree,
    two_submarket_model, RandomModelConfig,
};
use submarket_lab::market::MarketModel;
use submarket_lab::multicurve::{
    build_tenor_market, common_measure_check, cotrade_arbitrage_demo, fra_rate, martingale_assets, RateStructure,
    TenorAssets,
};
use submarket_lab::numeric::{int, ratio, to_f64, NumericMode, Rational};
use submarket_lab::oracle::{brute_superreplication, enumerate_measure_vertices, grid_superreplication, OracleError};
use submarket_lab::pricing::{
    allocation_superreplicates, basis_swap_price, dual_bounds_global, dual_certificate_global, global_dual, pair_identities,
    price, price_constant_ratio, price_fractional, price_global, price_submarket, two_market_report, Venue,
};

const R: NumericMode = NumericMode::Rational;
const MODELS: u64 = 200;

fn criterion(n: u32, name: &str, body: impl FnOnce() -> String) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(detail) => println!("[PASS] {n:>2} {name}: {detail}"),
        Err(e) => {
            println!("[FAIL] {n:>2} {name}");
            resume_unwind(e);
        }
    }
}

fn free_models() -> Vec<(u64, MarketModel)> {
    (0..MODELS)
        .map(|s| (s, mixed_model(&RandomModelConfig::small(), s)))
        .filter(|(_, m)| check_global_nfl(m, R).unwrap().is_free())
        .collect()
}

fn claims(model: &MarketModel, seed: u64) -> Vec<Vec<Rational>> {
    (0..3).map(|j| random_claim(model, seed * 3 + j).payoff).collect()
}

fn lambdas(n: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![int(1); n]];
    out.extend((0..n).map(|t| (0..n).map(|s| int(i64::from(s == t))).collect()));
    out
}

#[test]
fn c01_ftap_equivalence() {
    criterion(1, "FTAP equivalence", || {
        let start = Instant::now();
        let (mut free, mut arb) = (0, 0);
        for seed in 0..MODELS {
            let m = mixed_model(&RandomModelConfig::small(), seed);
            let outcome = check_global_nfl(&m, R).unwrap();
            let direct = direct_arbitrage_lp(&m, R).unwrap();
            assert_eq!(outcome.is_free(), direct.optimum.is_zero(), "seed {seed}");
            match outcome.certificate() {
                Some(cert) => {
                    free += 1;
                    let tree = m.tree();
                    assert!(cert.xstar.iter().all(Signed::is_positive), "seed {seed}");
                    assert_eq!(tree.expectation(&cert.xstar), Rational::one(), "seed {seed}");
                    for g in &global_gains(&m).vectors {
                        let e: Rational = (0..g.len()).map(|k| &tree.atom_probs()[k] * &cert.xstar[k] * &g[k]).sum();
                        assert!(e.is_zero(), "seed {seed}");
                    }
                }
                None => {
                    arb += 1;
                    assert!(outcome.witness().unwrap().verify(&m, R), "seed {seed}");
                    assert!(direct.witness.unwrap().verify(&m, R), "seed {seed}");
                }
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        assert!(elapsed < 30.0, "took {elapsed:.1}s");
        assert!(free > 0 && arb > 0);
        format!("{free} free, {arb} with arbitrage, {elapsed:.2}s")
    });
}

#[test]
fn c02_cross_submarket_arbitrage() {
    criterion(2, "cross-submarket arbitrage fixture", || {
        let m = m1();
        assert!(check_submarket_nfl(&m, 0, R).unwrap().is_free());
        assert!(check_submarket_nfl(&m, 1, R).unwrap().is_free());
        let outcome = check_global_nfl(&m, R).unwrap();
        let w = outcome.witness().expect("global arbitrage");
        assert!(w.verify(&m, R));
        assert!(w.payoff.iter().all(|v| !v.is_negative()));
        assert!(w.payoff.iter().any(Signed::is_positive));
        assert_eq!(w.submarkets_used, vec![0, 1]);
        let zero = vec![int(0); 2];
        let full = complete_self_financing(&m, &zero, &w.strategy).unwrap();
        assert!(self_financing_residuals(&m, &full).iter().all(Zero::is_zero));
        let wealth = wealth_process(&m, &full);
        assert!(wealth[0].is_zero());
        format!("payoff {:?} from zero initial wealth", w.payoff.iter().map(ToString::to_string).collect::<Vec<_>>())
    });
}

#[test]
fn c03_pricing_duality() {
    criterion(3, "pricing duality", || {
        let mut checked = 0;
        for (seed, m) in free_models() {
            for h in claims(&m, seed) {
                let g = price_global(&m, &h, R).unwrap();
                assert!(g.duality_gap.is_zero(), "seed {seed}");
                assert_eq!(global_dual(&m, &h, R).unwrap().0, g.price, "seed {seed}");
                for t in 0..m.submarkets().len() {
                    let r = price_submarket(&m, &h, t, R).unwrap();
                    let frac = price_fractional(&m, &h, &m.growth(t), SelectorCone::Submarket(t), R).unwrap();
                    assert_eq!(r.price, frac.value, "seed {seed} tau {t}");
                    assert!(r.duality_gap.is_zero(), "seed {seed} tau {t}");
                }
                checked += 1;
            }
        }
        format!("{checked} claims, every gap exactly 0")
    });
}

#[test]
fn c04_price_ordering() {
    criterion(4, "price ordering", || {
        let mut checked = 0;
        for (seed, m) in free_models() {
            for h in claims(&m, seed) {
                let g = price(&m, &h, Venue::Global, R).unwrap().price;
                let lo = price(&m, &h, Venue::Lower, R).unwrap().price;
                let hi = price(&m, &h, Venue::Upper, R).unwrap().price;
                assert!(g <= lo && lo <= hi, "seed {seed}: {g} {lo} {hi}");
                checked += 1;
            }
        }
        format!("{checked} claims")
    });
}

#[test]
fn c05_dual_certificate_and_bounds() {
    criterion(5, "dual certificate and bounds", || {
        let mut checked = 0;
        for (seed, m) in free_models() {
            for h in claims(&m, seed) {
                let g = price_global(&m, &h, R).unwrap();
                for lambda in lambdas(m.submarkets().len()) {
                    let v = dual_certificate_global(&m, &h, &g.allocation, &lambda, R).unwrap();
                    assert!(v.is_zero(), "seed {seed}");
                }
                let b = dual_bounds_global(&m, &h, R).unwrap();
                assert!(b.brackets(R), "seed {seed}");
                checked += 1;
            }
        }
        format!("{checked} claims")
    });
}

#[test]
fn c06_single_asset_identities() {
    criterion(6, "single-asset identity suite", || {
        let m = m2();
        let r = pair_identities(&m, 0, 1, R).unwrap();
        assert!(r.all_hold(R));
        assert_eq!(r.get("own_asset").unwrap().lhs, int(4));
        assert_eq!(r.get("cross_asset_sup").unwrap().lhs, ratio(15, 4));
        assert_eq!(basis_swap_price(&m, 0, 1, Venue::Submarket(1), R).unwrap().report.price, ratio(-5, 4));
        for seed in 0..100 {
            let m = complete_binary_pair(seed);
            for (a, b) in [(0, 1), (1, 0)] {
                let r = pair_identities(&m, a, b, R).unwrap();
                for i in &r.identities {
                    assert!(i.residual.is_zero(), "seed {seed} {}: {} vs {}", i.name, i.lhs, i.rhs);
                }
            }
        }
        "M2 values 4, 15/4, -5/4; 100 pairs, both orders, zero residuals".into()
    });
}

#[test]
fn c07_two_submarket_formula() {
    criterion(7, "two-submarket formula", || {
        let (mut holds, mut fails) = (0, 0);
        for seed in 0..100 {
            let m = two_submarket_model(seed);
            let r = two_market_report(&m, R).unwrap();
            assert!(r.formula_matches(R), "seed {seed}");
            if r.hypothesis_holds {
                holds += 1;
                assert_eq!(r.swap_matches(R), Some(true), "seed {seed}");
            } else {
                fails += 1;
            }
        }
        assert!(holds >= 10 && fails >= 10, "branches {holds}/{fails}");
        format!("100 models, hypothesis held {holds} times, failed {fails} times")
    });
}

#[test]
fn c08_constant_ratio() {
    criterion(8, "constant-ratio price", || {
        let mut checked = 0;
        for seed in 0..60 {
            let m = deterministic_numeraire_model(&RandomModelConfig::small(), seed);
            for h in claims(&m, seed) {
                let r = price_constant_ratio(&m, &h, &vec![int(1); m.submarkets().len()], R).unwrap();
                assert_eq!(r.price, r.global_price, "seed {seed}");
                for (t, x) in r.allocation.iter().enumerate() {
                    assert!(t == r.tau_max || x.is_zero());
                }
                assert!(allocation_superreplicates(&m, &h, &r.allocation, R).unwrap(), "seed {seed}");
                checked += 1;
            }
        }
        format!("{checked} claims on 60 models")
    });
}

fn deterministic_spread_market(seed: u64) -> MarketModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = rng.gen_range(2..=4);
    let periods = rng.gen_range(1..=2);
    let tree = random_tree(&mut rng, atoms, periods);
    let n = tree.node_count();
    let base_rate: Vec<Rational> = (0..n).map(|_| ratio(rng.gen_range(0..=8), 100)).collect();
    let tenors = rng.gen_range(2..=3);
    let spreads: Vec<(String, Vec<Rational>)> = (0..tenors)
        .map(|t| {
            let by_time: Vec<Rational> = (0..=periods).map(|_| ratio(rng.gen_range(0..=5), 1000)).collect();
            (format!("tenor{t}"), tree.nodes().iter().map(|node| by_time[node.time].clone()).collect())
        })
        .collect();
    let rates = RateStructure {
        step: ratio(1, 4),
        base_rate,
        spreads,
    };
    let raw: Vec<Rational> = (0..atoms).map(|_| int(rng.gen_range(1..=5))).collect();
    let mean = tree.expectation(&raw);
    let xstar: Vec<Rational> = raw.iter().map(|x| x / &mean).collect();
    let blocks: Vec<TenorAssets> = (0..tenors)
        .map(|t| {
            let s0 = rates.numeraire(&tree, t, &int(1)).unwrap();
            let leaves: Vec<Rational> = (0..atoms).map(|_| int(rng.gen_range(1..=9))).collect();
            TenorAssets {
                dim: 1,
                assets: martingale_assets(&tree, &s0, &xstar, &leaves),
                initial_numeraire: int(1),
            }
        })
        .collect();
    build_tenor_market(&tree, &rates, &blocks).unwrap()
}

#[test]
fn c09_multicurve() {
    criterion(9, "multicurve", || {
        let r = fra_rate(&ratio(99, 100), &ratio(97, 100), &ratio(1, 4), &ratio(1, 2)).unwrap();
        assert!((to_f64(&r) - 0.082_474_226_8).abs() < 1e-10);
        assert!((to_f64(&r) - 4.0 * (0.99 / 0.97 - 1.0)).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for pair in 0..20 {
            let atoms = rng.gen_range(2..=4);
            let periods = rng.gen_range(1..=2);
            let tree = random_tree(&mut rng, atoms, periods);
            let a = ratio(rng.gen_range(50..=99), 100);
            let mut b = ratio(rng.gen_range(50..=99), 100);
            if a == b {
                b += ratio(1, 1000);
            }
            let demo = cotrade_arbitrage_demo(&tree, &a, &b, R).unwrap();
            assert!(!demo.merged_outcome.is_free(), "pair {pair}");
            assert!(demo.split_outcome.is_free(), "pair {pair}");
            assert!(demo.witness.verify(&demo.merged, R), "pair {pair}");
        }
        for seed in 0..20 {
            let m = deterministic_spread_market(seed);
            let cert = extract_deflator(&m, R).unwrap();
            assert!(common_measure_check(&m, &cert).unwrap().is_common(), "seed {seed}");
        }
        "FRA 8/97, 20 co-trade pairs, 20 deterministic-spread markets".into()
    });
}

#[test]
fn c10_oracle_equivalence() {
    criterion(10, "oracle equivalence", || {
        let m = m2();
        let hat = submarket_lab::arbitrage::MeasureSelector::hat(&m, 0);
        assert_eq!(enumerate_measure_vertices(&m, &hat).unwrap(), vec![vec![ratio(1, 3), ratio(2, 3)]]);
        let s1 = m.asset_claim(0, 0).payoff;
        assert_eq!(brute_superreplication(&m, &s1, Venue::Global).unwrap().value, ratio(15, 4));
        assert_eq!(brute_superreplication(&m, &s1, Venue::Submarket(0)).unwrap().value, int(4));
        let (mut exact, mut grid, mut too_large) = (0, 0, 0);
        let float = NumericMode::float();
        for seed in 0..MODELS {
            let m = arbitrage_free_model(&RandomModelConfig::small(), seed);
            let h = random_claim(&m, seed).payoff;
            let mut venues = vec![Venue::Global, Venue::Lower, Venue::Upper];
            venues.extend((0..m.submarkets().len()).map(Venue::Submarket));
            for venue in venues {
                let engine = price(&m, &h, venue, R).unwrap().price;
                assert_eq!(brute_superreplication(&m, &h, venue).unwrap().value, engine, "seed {seed} {venue:?}");
                exact += 1;
                if m.atom_count() <= 3 {
                    match grid_superreplication(&m, &h, venue, 1e-9) {
                        Ok(g) => {
                            let engine_float = to_f64(&price(&m, &h, venue, float).unwrap().price);
                            let diff = (to_f64(&g.value) - engine_float).abs();
                            assert!(diff < 1e-6, "seed {seed} {venue:?}: grid {} vs {engine_float}", to_f64(&g.value));
                            grid += 1;
                        }
                        Err(OracleError::TooLarge { .. }) => too_large += 1,
                        Err(e) => panic!("seed {seed}: {e}"),
                    }
                }
            }
        }
        assert!(grid > 100, "only {grid} grid comparisons");
        format!("{exact} exact comparisons, {grid} grid comparisons ({too_large} beyond grid size)")
    });
}

#[test]
fn c11_determinism() {
    criterion(11, "determinism of verify", || {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/m2.json");
        let outputs: Vec<Vec<u8>> = (0..5)
            .map(|_| {
                let mut out = Vec::new();
                assert_eq!(cli::run(["sublab", "verify", path], &mut out), 0);
                out
            })
            .collect();
        assert!(outputs.windows(2).all(|w| w[0] == w[1]));
        format!("5 runs, {} identical bytes", outputs[0].len())
    });
}
