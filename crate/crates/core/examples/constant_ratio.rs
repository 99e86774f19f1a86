//! Closed-form global price when numeraire growth has constant expectation.

use submarket_lab::generate::{deterministic_numeraire_model, random_claim, RandomModelConfig};
use submarket_lab::numeric::{format_rational, int, NumericMode};
use submarket_lab::pricing::price_constant_ratio;

fn main() {
    let cfg = RandomModelConfig::small();
    for seed in 0..5 {
        let model = deterministic_numeraire_model(&cfg, seed);
        let h = random_claim(&model, seed).payoff;
        let lambda = vec![int(1); model.submarkets().len()];
        match price_constant_ratio(&model, &h, &lambda, NumericMode::Rational) {
            Ok(r) => println!(
                "seed {seed}: closed form {} via {}, LP {}",
                format_rational(&r.price),
                model.submarket(r.tau_max).label,
                format_rational(&r.global_price)
            ),
            Err(e) => println!("seed {seed}: {e}"),
        }
    }
}
