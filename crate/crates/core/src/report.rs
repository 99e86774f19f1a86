//! JSON renderings of certificates, witnesses and price reports. Keys are
//! sorted and numbers are strings (`"p/q"` exact, 12 significant digits in
//! float mode), so output is byte-stable.

use serde_json::{json, Map, Value};

use crate::arbitrage::{martingale_measure, state_price_deflator, ArbitrageWitness, DeflatorCertificate, NflOutcome};
use crate::market::{MarketModel, ValidationReport};
use crate::numeric::{format_float, format_value, to_f64, NumericMode, Rational};
use crate::pricing::{IdentityReport, PriceReport, Venue};

#[derive(Debug, Clone, Copy)]
pub struct Fmt(pub NumericMode);

impl Fmt {
    pub fn v(&self, r: &Rational) -> Value {
        Value::String(format_value(r, self.0))
    }

    pub fn vs(&self, rs: &[Rational]) -> Value {
        Value::Array(rs.iter().map(|r| self.v(r)).collect())
    }

    /// Values keyed by atom label.
    pub fn atoms(&self, model: &MarketModel, rs: &[Rational]) -> Value {
        let tree = model.tree();
        Value::Object(rs.iter().enumerate().map(|(k, r)| (tree.atom_label(k).to_string(), self.v(r))).collect())
    }

    /// Values keyed by node label.
    pub fn nodes(&self, model: &MarketModel, rs: &[Rational]) -> Value {
        let tree = model.tree();
        Value::Object(rs.iter().enumerate().map(|(n, r)| (tree.nodes()[n].label.clone(), self.v(r))).collect())
    }

    /// Values keyed by submarket label.
    pub fn submarkets(&self, model: &MarketModel, rs: &[Rational]) -> Value {
        Value::Object(rs.iter().enumerate().map(|(t, r)| (model.submarket(t).label.clone(), self.v(r))).collect())
    }
}

pub fn venue_name(model: &MarketModel, venue: Venue) -> String {
    match venue {
        Venue::Global => "global".into(),
        Venue::Lower => "lower".into(),
        Venue::Upper => "upper".into(),
        Venue::Submarket(t) => format!("submarket:{}", model.submarket(t).label),
    }
}

pub fn validation(model: &MarketModel, report: &ValidationReport, f: Fmt) -> Value {
    json!({
        "ok": report.ok,
        "issues": report.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
        "tightest_bound": report.tightest_bound.as_ref().map(|k| f.v(k)),
        "atoms": model.atom_count(),
        "horizon": model.tree().horizon(),
        "submarkets": model.submarkets().iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
    })
}

pub fn certificate(model: &MarketModel, cert: &DeflatorCertificate, f: Fmt) -> Value {
    json!({
        "xstar": f.atoms(model, &cert.xstar),
        "gains_checked": cert.basis_checked.len(),
    })
}

pub fn witness(model: &MarketModel, w: &ArbitrageWitness, f: Fmt) -> Value {
    let tree = model.tree();
    let mut positions = Map::new();
    for (t, per_node) in w.strategy.positions.iter().enumerate() {
        let mut held = Map::new();
        for (n, v) in per_node.iter().enumerate() {
            if v.iter().any(|x| !num_traits::Zero::is_zero(x)) {
                held.insert(tree.nodes()[n].label.clone(), f.vs(v));
            }
        }
        if !held.is_empty() {
            positions.insert(model.submarket(t).label.clone(), Value::Object(held));
        }
    }
    json!({
        "payoff": f.atoms(model, &w.payoff),
        "violating_atoms": w.violating_atoms.iter().map(|&k| tree.atom_label(k).to_string()).collect::<Vec<_>>(),
        "submarkets_used": w.submarkets_used.iter().map(|&t| model.submarket(t).label.clone()).collect::<Vec<_>>(),
        "positions": positions,
    })
}

pub fn nfl(model: &MarketModel, scope: &str, outcome: &NflOutcome, f: Fmt) -> Value {
    match outcome {
        NflOutcome::Free(c) => json!({"scope": scope, "verdict": "free", "certificate": certificate(model, c, f)}),
        NflOutcome::Arbitrage(w) => json!({"scope": scope, "verdict": "arbitrage", "witness": witness(model, w, f)}),
    }
}

pub fn deflator(model: &MarketModel, cert: &DeflatorCertificate, f: Fmt) -> Value {
    let mut measures = Map::new();
    let mut deflators = Map::new();
    for (t, sm) in model.submarkets().iter().enumerate() {
        measures.insert(sm.label.clone(), f.atoms(model, &martingale_measure(model, cert, t)));
        deflators.insert(sm.label.clone(), f.nodes(model, &state_price_deflator(model, cert, t)));
    }
    json!({
        "xstar": f.atoms(model, &cert.xstar),
        "martingale_measures": measures,
        "state_price_deflators": deflators,
    })
}

pub fn price(model: &MarketModel, claim: &str, r: &PriceReport, f: Fmt) -> Value {
    let mut out = json!({
        "claim": claim,
        "venue": venue_name(model, r.venue),
        "price": f.v(&r.price),
        "price_decimal": format_float(to_f64(&r.price)),
        "allocation": f.submarkets(model, &r.allocation),
        "hedge_payoff": f.atoms(model, &r.hedge_payoff),
        "dual_value": f.v(&r.dual_value),
        "dual_witness": f.atoms(model, &r.dual_witness),
        "boundary": r.boundary,
        "gap": f.v(&r.duality_gap),
    });
    if !r.components.is_empty() {
        out["components"] = f.submarkets(model, &r.components);
    }
    if let Some(t) = r.attained_by {
        out["attained_by"] = Value::String(model.submarket(t).label.clone());
    }
    out
}

pub fn identities(report: &IdentityReport, f: Fmt) -> Value {
    Value::Array(
        report
            .identities
            .iter()
            .map(|i| {
                json!({
                    "name": i.name,
                    "lhs": f.v(&i.lhs),
                    "rhs": f.v(&i.rhs),
                    "residual": f.v(&i.residual),
                    "holds": i.holds(f.0),
                })
            })
            .collect(),
    )
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}
