//! Gain vectors of each submarket and a self-financing strategy built from them.

use submarket_lab::fixtures::m2;
use submarket_lab::gains::{complete_self_financing, global_gains, self_financing_residuals, submarket_gains, terminal_value, wealth_process};
use submarket_lab::numeric::{format_rational, int, NumericMode};

fn main() {
    let model = m2();
    for t in 0..model.submarkets().len() {
        let basis = submarket_gains(&model, t).unwrap();
        println!("{}: {} gain directions", model.submarket(t).label, basis.len());
    }
    let basis = global_gains(&model);
    let coefficients = vec![int(1); basis.len()];
    let phi = basis.strategy(&model, &coefficients);
    let x = vec![int(1), int(2)];
    let full = complete_self_financing(&model, &x, &phi).unwrap();
    let show = |v: &[_]| v.iter().map(format_rational).collect::<Vec<_>>().join(", ");
    println!("terminal value ({})", show(&terminal_value(&model, &x, &phi).unwrap()));
    println!("wealth by node ({})", show(&wealth_process(&model, &full)));
    assert!(self_financing_residuals(&model, &full).iter().all(|r| NumericMode::Rational.is_zero(r)));
}
