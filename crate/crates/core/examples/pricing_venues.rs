//! Superreplication prices of a call in every venue, in both numeric modes.

use submarket_lab::fixtures::m2;
use submarket_lab::numeric::{format_value, int, NumericMode};
use submarket_lab::pricing::{price, Venue};

fn main() {
    let model = m2();
    // call struck at 4 on the first submarket's asset
    let call: Vec<_> = model.asset_claim(0, 0).payoff.iter().map(|s| (s - int(4)).max(int(0))).collect();
    let venues = [Venue::Global, Venue::Lower, Venue::Upper, Venue::Submarket(0), Venue::Submarket(1)];
    for mode in [NumericMode::Rational, NumericMode::float()] {
        for venue in venues {
            let r = price(&model, &call, venue, mode).expect("priced");
            println!(
                "{:?} {:?}: {} (gap {})",
                mode,
                venue,
                format_value(&r.price, mode),
                format_value(&r.duality_gap, mode)
            );
        }
    }
}
