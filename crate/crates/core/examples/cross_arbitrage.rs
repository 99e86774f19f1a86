//! Each submarket of `m1` is arbitrage-free on its own, yet trading them
//! side by side is not.

use submarket_lab::arbitrage::{check_global_nfl, check_submarket_nfl, direct_arbitrage_lp};
use submarket_lab::fixtures::m1;
use submarket_lab::numeric::{format_rational, NumericMode};

fn main() {
    let model = m1();
    let mode = NumericMode::Rational;
    for t in 0..model.submarkets().len() {
        let free = check_submarket_nfl(&model, t, mode).unwrap().is_free();
        println!("{}: {}", model.submarket(t).label, if free { "free" } else { "arbitrage" });
    }
    let outcome = check_global_nfl(&model, mode).unwrap();
    let w = outcome.witness().expect("global arbitrage");
    let tree = model.tree();
    for k in 0..model.atom_count() {
        println!("payoff at {}: {}", tree.atom_label(k), format_rational(&w.payoff[k]));
    }
    assert!(w.verify(&model, mode));

    let direct = direct_arbitrage_lp(&model, mode).unwrap();
    println!("capped primal optimum: {}", format_rational(&direct.optimum));
}
