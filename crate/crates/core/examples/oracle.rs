//! Engine prices checked against brute-force enumeration and a float grid.

use submarket_lab::generate::{arbitrage_free_model, random_claim, RandomModelConfig};
use submarket_lab::numeric::{to_f64, NumericMode};
use submarket_lab::oracle::{brute_superreplication, grid_superreplication};
use submarket_lab::pricing::{price, Venue};

fn main() {
    let cfg = RandomModelConfig {
        atoms: 3..=3,
        ..RandomModelConfig::small()
    };
    for seed in 0..5 {
        let model = arbitrage_free_model(&cfg, seed);
        let h = random_claim(&model, seed).payoff;
        for venue in [Venue::Global, Venue::Lower, Venue::Upper] {
            let engine = price(&model, &h, venue, NumericMode::Rational).map(|r| to_f64(&r.price));
            let brute = brute_superreplication(&model, &h, venue).map(|r| to_f64(&r.value));
            let grid = grid_superreplication(&model, &h, venue, 1e-10).map(|r| to_f64(&r.value));
            println!("seed {seed} {venue:?}: engine {engine:?} brute {brute:?} grid {grid:?}");
        }
    }
}
