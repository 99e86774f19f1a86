//! Deflator, martingale measures and state-price deflators of the two-atom
//! desk market.

use submarket_lab::arbitrage::{check_global_nfl, martingale_measure, state_price_deflator};
use submarket_lab::fixtures::m2;
use submarket_lab::numeric::{format_rational, NumericMode};

fn main() {
    let model = m2();
    let outcome = check_global_nfl(&model, NumericMode::Rational).expect("lp");
    let cert = outcome.certificate().expect("m2 is arbitrage-free");
    let show = |v: &[_]| v.iter().map(format_rational).collect::<Vec<_>>().join(", ");
    println!("X* = ({})", show(&cert.xstar));
    for (t, sm) in model.submarkets().iter().enumerate() {
        println!("Q[{}] = ({})", sm.label, show(&martingale_measure(&model, cert, t)));
        println!("  deflator by node: ({})", show(&state_price_deflator(&model, cert, t)));
    }
    assert!(cert.verify(&model, NumericMode::Rational));
}
