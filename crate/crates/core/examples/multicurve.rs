//! Forward rates, tenor numeraires and the co-trading arbitrage.

use submarket_lab::document::load_market;
use submarket_lab::multicurve::{common_measure_check, cotrade_arbitrage_demo, fra_rate, same_payoff_demo, zero_coupon, CommonMeasure};
use submarket_lab::arbitrage::extract_deflator;
use submarket_lab::numeric::{format_rational, int, ratio, to_f64, NumericMode};

fn main() {
    let mode = NumericMode::Rational;
    let r = fra_rate(&ratio(97, 100), &ratio(96, 100), &ratio(1, 4), &ratio(1, 2)).unwrap();
    println!("FRA 3m x 6m: {} ({:.6})", format_rational(&r), to_f64(&r));

    let loaded = load_market(include_str!("../fixtures/tenor_rates.json")).unwrap();
    let cert = extract_deflator(&loaded.model, mode).unwrap();
    match common_measure_check(&loaded.model, &cert) {
        Ok(CommonMeasure::Common(q)) => println!("common measure {:?}", q.iter().map(format_rational).collect::<Vec<_>>()),
        Ok(CommonMeasure::Distinct { max_tv, .. }) => println!("distinct measures, TV {}", format_rational(&max_tv)),
        Err(e) => println!("{e}"),
    }

    let tree = loaded.model.tree();
    println!("zero coupon at 0.97: {:?}", zero_coupon(tree, &ratio(97, 100)).iter().map(format_rational).collect::<Vec<_>>());
    let demo = cotrade_arbitrage_demo(tree, &ratio(97, 100), &ratio(96, 100), mode).unwrap();
    println!("two curves co-traded: demonstrated = {}", demo.confirms());

    let same = same_payoff_demo(vec![ratio(1, 2), ratio(1, 2)], &[int(2), int(1)], &ratio(3, 2), &ratio(7, 5), mode).unwrap();
    println!("same payoff at two prices: demonstrated = {}", same.confirms());
}
