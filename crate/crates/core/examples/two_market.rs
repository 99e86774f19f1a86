use submarket_lab::fixtures::m2;
use submarket_lab::generate::two_submarket_model;
use submarket_lab::numeric::{format_rational, NumericMode};
use submarket_lab::pricing::two_market_report;

fn main() {
    let mode = NumericMode::Rational;
    let models = std::iter::once(("m2".to_string(), m2())).chain((0..4).map(|s| (format!("seed {s}"), two_submarket_model(s))));
    for (name, model) in models {
        let r = match two_market_report(&model, mode) {
            Ok(r) => r,
            Err(e) => {
                println!("{name}: {e}");
                continue;
            }
        };
        let pair = |v: &[_; 2]| format!("({}, {})", format_rational(&v[0]), format_rational(&v[1]));
        println!("{name}");
        println!("  global  {}", pair(&r.global));
        println!("  formula {} matches={}", pair(&r.formula), r.formula_matches(mode));
        println!("  swap {} hypothesis={} closed forms agree={:?}", format_rational(&r.swap), r.hypothesis_holds, r.swap_matches(mode));
    }
}
