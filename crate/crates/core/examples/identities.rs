//! Closed-form price identities between two one-asset submarkets.

use submarket_lab::fixtures::m2;
use submarket_lab::numeric::{format_rational, NumericMode};
use submarket_lab::pricing::pair_identities;

fn main() {
    let model = m2();
    let mode = NumericMode::Rational;
    for (a, b) in [(0, 1), (1, 0)] {
        let report = pair_identities(&model, a, b, mode).expect("one asset each");
        println!("{} vs {}", model.submarket(a).label, model.submarket(b).label);
        for i in &report.identities {
            println!(
                "  {:<28} {} = {}  {}",
                i.name,
                format_rational(&i.lhs),
                format_rational(&i.rhs),
                if i.holds(mode) { "ok" } else { "FAILS" }
            );
        }
    }
}
