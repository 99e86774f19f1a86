//! The market-spec JSON document.
//!
//! ```json
//! {
//!   "tree": {
//!     "nodes": [{"id": "root"}, {"id": "u", "parent": "root"}, {"id": "d", "parent": "root"}],
//!     "probabilities": {"u": "1/2", "d": "1/2"}
//!   },
//!   "submarkets": [
//!     {"label": "tau1", "dim": 1,
//!      "assets": {"root": ["4"], "u": ["6"], "d": ["3"]},
//!      "numeraire": {"root": "1", "u": "1", "d": "1"}}
//!   ],
//!   "claims": [{"label": "call", "payoff": {"u": "2", "d": "0"}}],
//!   "mode": "rational"
//! }
//! ```
//!
//! `tree.branching` (children per level) may replace `tree.nodes`; nodes are
//! then labelled `root`, `0`, `1`, `0.0`, ... and `probabilities` may be a
//! list in leaf order. Numbers are `"p/q"` strings, decimal strings or JSON
//! numbers. A submarket may omit `numeraire` when `rate_structure` lists a
//! spread for its label; it then accrues from `initial_numeraire` (default 1).

use std::collections::BTreeMap;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::market::{Claim, MarketModel, ModelError, Submarket};
use crate::multicurve::{MulticurveError, RateStructure};
use crate::numeric::{serde_rational, NumericMode, Rational};
use crate::tree::{build_tree, BranchingSpec, NodeSpec, ScenarioTree};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Num(#[serde(with = "serde_rational")] pub Rational);

fn nums(values: &[Rational]) -> Vec<Num> {
    values.iter().cloned().map(Num).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probabilities {
    ByAtom(BTreeMap<String, Num>),
    InLeafOrder(Vec<Num>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<NodeSpec>>,
    pub probabilities: Probabilities,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmarketSection {
    pub label: String,
    pub dim: usize,
    pub assets: BTreeMap<String, Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeraire: Option<BTreeMap<String, Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_numeraire: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    pub step: Num,
    pub base_rate: BTreeMap<String, Num>,
    /// Submarket label to spread per node.
    pub spreads: BTreeMap<String, BTreeMap<String, Num>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimSection {
    pub label: String,
    pub payoff: BTreeMap<String, Num>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Rational,
    Float,
}

impl ModeName {
    pub fn mode(self) -> NumericMode {
        match self {
            ModeName::Rational => NumericMode::Rational,
            ModeName::Float => NumericMode::float(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpecDocument {
    pub tree: TreeSection,
    pub submarkets: Vec<SubmarketSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_structure: Option<RateSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<ClaimSection>,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_constant: Option<Num>,
}

/// A loaded document: the model and its declared claims.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMarket {
    pub model: MarketModel,
    pub claims: Vec<Claim>,
    pub mode: NumericMode,
}

impl LoadedMarket {
    /// A declared claim, or `S[label]` for the first asset of a submarket.
    pub fn claim(&self, label: &str) -> Result<Claim, ModelError> {
        if let Some(c) = self.claims.iter().find(|c| c.label == label) {
            return Ok(c.clone());
        }
        for (t, sm) in self.model.submarkets().iter().enumerate() {
            for i in 0..sm.dim {
                let c = self.model.asset_claim(t, i);
                let short = format!("S{}", sm.label);
                if c.label == label || (i == 0 && short == label) {
                    return Ok(c);
                }
            }
        }
        Err(ModelError::Schema(format!("unknown claim `{label}`")))
    }
}

fn schema(msg: impl Into<String>) -> ModelError {
    ModelError::Schema(msg.into())
}

fn per_node<T: Clone>(
    tree: &ScenarioTree,
    map: &BTreeMap<String, T>,
    submarket: &str,
    what: &str,
) -> Result<Vec<T>, ModelError> {
    if let Some(unknown) = map.keys().find(|k| tree.find(k).is_none()) {
        return Err(schema(format!("{what} of `{submarket}` names unknown node `{unknown}`")));
    }
    tree.nodes()
        .iter()
        .map(|n| {
            map.get(&n.label).cloned().ok_or_else(|| ModelError::MissingNodeValue {
                submarket: submarket.to_string(),
                node: n.label.clone(),
                what: what.to_string(),
            })
        })
        .collect()
}

fn unwrap(values: Vec<Num>) -> Vec<Rational> {
    values.into_iter().map(|n| n.0).collect()
}

fn multicurve(e: MulticurveError) -> ModelError {
    match e {
        MulticurveError::Model(m) => m,
        other => schema(other.to_string()),
    }
}

impl MarketSpecDocument {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    fn tree(&self, mode: NumericMode) -> Result<ScenarioTree, ModelError> {
        let spec = match (&self.tree.branching, &self.tree.nodes) {
            (Some(levels), None) => BranchingSpec::Levels(levels.clone()),
            (None, Some(nodes)) => BranchingSpec::Explicit(nodes.clone()),
            _ => return Err(schema("tree needs exactly one of `branching` and `nodes`")),
        };
        // Build once with placeholder probabilities to learn the leaf order.
        let probs = match &self.tree.probabilities {
            Probabilities::InLeafOrder(list) => unwrap(list.clone()),
            Probabilities::ByAtom(map) => {
                let n = leaf_labels(&spec)?;
                if let Some(unknown) = map.keys().find(|k| !n.contains(k)) {
                    return Err(schema(format!("probability given for unknown atom `{unknown}`")));
                }
                n.iter()
                    .map(|l| map.get(l).map(|v| v.0.clone()).ok_or_else(|| schema(format!("atom `{l}` has no probability"))))
                    .collect::<Result<_, _>>()?
            }
        };
        Ok(build_tree(&spec, probs, mode)?)
    }

    /// Builds the model without the positivity and bound checks.
    pub fn assemble(&self) -> Result<LoadedMarket, ModelError> {
        let mode = self.mode.mode();
        let tree = self.tree(mode)?;
        let rates = self.rate_structure.as_ref().map(|r| self.rates(&tree, r)).transpose()?;
        let mut submarkets = Vec::with_capacity(self.submarkets.len());
        for s in &self.submarkets {
            let assets: Vec<Vec<Rational>> = per_node(&tree, &s.assets, &s.label, "an asset vector")?
                .into_iter()
                .map(unwrap)
                .collect();
            let numeraire = match (&s.numeraire, &rates) {
                (Some(map), _) => unwrap(per_node(&tree, map, &s.label, "a numeraire value")?),
                (None, Some(r)) => {
                    let t = r
                        .spreads
                        .iter()
                        .position(|(l, _)| l == &s.label)
                        .ok_or_else(|| schema(format!("no numeraire and no spread for `{}`", s.label)))?;
                    let init = s.initial_numeraire.as_ref().map_or_else(Rational::one, |n| n.0.clone());
                    r.numeraire(&tree, t, &init).map_err(multicurve)?
                }
                (None, None) => return Err(schema(format!("submarket `{}` has no numeraire", s.label))),
            };
            submarkets.push(Submarket {
                label: s.label.clone(),
                dim: s.dim,
                assets,
                numeraire,
            });
        }
        let claims = self
            .claims
            .iter()
            .map(|c| {
                if let Some(unknown) = c.payoff.keys().find(|k| !tree.leaves().iter().any(|l| &tree.node(*l).label == *k)) {
                    return Err(schema(format!("claim `{}` names unknown atom `{unknown}`", c.label)));
                }
                let payoff = (0..tree.atom_count())
                    .map(|k| {
                        c.payoff
                            .get(tree.atom_label(k))
                            .map(|v| v.0.clone())
                            .ok_or_else(|| schema(format!("claim `{}` has no payoff at `{}`", c.label, tree.atom_label(k))))
                    })
                    .collect::<Result<_, _>>()?;
                Ok(Claim::new(c.label.clone(), payoff))
            })
            .collect::<Result<_, ModelError>>()?;
        let model = MarketModel::assemble(tree, submarkets, self.bound_constant.as_ref().map(|b| b.0.clone()))?;
        Ok(LoadedMarket { model, claims, mode })
    }

    /// Builds and validates the model.
    pub fn load(&self) -> Result<LoadedMarket, ModelError> {
        let loaded = self.assemble()?;
        let model = MarketModel::new(
            loaded.model.tree().clone(),
            loaded.model.submarkets().to_vec(),
            loaded.model.bound_constant().cloned(),
        )?;
        Ok(LoadedMarket { model, ..loaded })
    }

    fn rates(&self, tree: &ScenarioTree, r: &RateSection) -> Result<RateStructure, ModelError> {
        let base_rate = unwrap(per_node(tree, &r.base_rate, "rate_structure", "a base rate")?);
        let spreads = r
            .spreads
            .iter()
            .map(|(label, map)| Ok((label.clone(), unwrap(per_node(tree, map, label, "a spread")?))))
            .collect::<Result<_, ModelError>>()?;
        Ok(RateStructure {
            step: r.step.0.clone(),
            base_rate,
            spreads,
        })
    }

    /// Explicit document for a model: node list, per-node values, claims.
    pub fn from_model(model: &MarketModel, claims: &[Claim], mode: NumericMode) -> Self {
        let tree = model.tree();
        let label = |i: usize| tree.nodes()[i].label.clone();
        let nodes = tree
            .nodes()
            .iter()
            .map(|n| NodeSpec {
                id: n.label.clone(),
                parent: n.parent.map(|p| label(p.0)),
            })
            .collect();
        let probabilities = Probabilities::ByAtom(
            (0..tree.atom_count())
                .map(|k| (tree.atom_label(k).to_string(), Num(tree.atom_probs()[k].clone())))
                .collect(),
        );
        let submarkets = model
            .submarkets()
            .iter()
            .map(|s| SubmarketSection {
                label: s.label.clone(),
                dim: s.dim,
                assets: s.assets.iter().enumerate().map(|(i, v)| (label(i), nums(v))).collect(),
                numeraire: Some(s.numeraire.iter().enumerate().map(|(i, v)| (label(i), Num(v.clone()))).collect()),
                initial_numeraire: None,
            })
            .collect();
        let claims = claims
            .iter()
            .map(|c| ClaimSection {
                label: c.label.clone(),
                payoff: c
                    .payoff
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (tree.atom_label(k).to_string(), Num(v.clone())))
                    .collect(),
            })
            .collect();
        MarketSpecDocument {
            tree: TreeSection {
                branching: None,
                nodes: Some(nodes),
                probabilities,
            },
            submarkets,
            rate_structure: None,
            claims,
            mode: if mode.is_exact() { ModeName::Rational } else { ModeName::Float },
            bound_constant: model.bound_constant().cloned().map(Num),
        }
    }
}

fn leaf_labels(spec: &BranchingSpec) -> Result<Vec<String>, ModelError> {
    let n = match spec {
        BranchingSpec::Levels(levels) => levels.iter().product::<usize>(),
        BranchingSpec::Explicit(nodes) => nodes
            .iter()
            .filter(|n| !nodes.iter().any(|c| c.parent.as_deref() == Some(n.id.as_str())))
            .count(),
    };
    let placeholder = vec![Rational::one() / Rational::from_integer(n.max(1).into()); n];
    let tree = build_tree(spec, placeholder, NumericMode::Rational)?;
    Ok((0..tree.atom_count()).map(|k| tree.atom_label(k).to_string()).collect())
}

/// Parses and validates a market-spec document.
pub fn load_market(text: &str) -> Result<LoadedMarket, ModelError> {
    MarketSpecDocument::from_json(text)?.load()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m1, m2};
    use crate::generate::{random_claim, random_model, RandomModelConfig};
    use crate::numeric::{int, ratio};
    use proptest::prelude::*;

    const M2: &str = r#"{
      "tree": {"nodes": [{"id": "root"}, {"id": "u", "parent": "root"}, {"id": "d", "parent": "root"}],
               "probabilities": {"u": "1/2", "d": 0.5}},
      "submarkets": [
        {"label": "tau1", "dim": 1, "assets": {"root": ["4"], "u": ["6"], "d": ["3"]},
         "numeraire": {"root": 1, "u": 1, "d": 1}},
        {"label": "tau2", "dim": 1, "assets": {"root": ["5"], "u": ["7.2"], "d": ["4.4"]},
         "numeraire": {"root": "1", "u": "1.2", "d": "1"}}
      ]
    }"#;

    #[test]
    fn loads_m2() {
        let loaded = load_market(M2).unwrap();
        assert_eq!(loaded.model, m2());
        assert_eq!(loaded.claim("Stau1").unwrap().payoff, vec![int(6), int(3)]);
        assert_eq!(loaded.claim("S[tau2]").unwrap().payoff, vec![ratio(36, 5), ratio(22, 5)]);
    }

    #[test]
    fn zero_numeraire_rejected() {
        let bad = M2.replace(r#""u": "1.2""#, r#""u": "0""#);
        assert!(matches!(load_market(&bad), Err(ModelError::NonPositiveNumeraire { .. })));
    }

    #[test]
    fn zero_probability_names_the_atom() {
        let bad = M2.replace(r#""u": "1/2", "d": 0.5"#, r#""u": "1", "d": 0"#);
        let err = load_market(&bad).unwrap_err();
        assert!(err.to_string().contains("`d`"), "{err}");
    }

    #[test]
    fn missing_value_named() {
        let bad = M2.replace(r#""d": ["3"]"#, r#""x": ["3"]"#);
        assert!(load_market(&bad).is_err());
        let bad = M2.replace(r#", "d": ["3"]"#, "");
        assert!(matches!(load_market(&bad), Err(ModelError::MissingNodeValue { .. })));
    }

    #[test]
    fn branching_and_rate_structure() {
        let text = r#"{
          "tree": {"branching": [2], "probabilities": ["1/4", "3/4"]},
          "rate_structure": {"step": "1/2", "base_rate": {"root": "1/10", "0": 0, "1": 0},
                             "spreads": {"6m": {"root": "1/10", "0": 0, "1": 0}}},
          "submarkets": [{"label": "6m", "dim": 1, "assets": {"root": ["1"], "0": ["2"], "1": ["1/2"]}}],
          "claims": [{"label": "digital", "payoff": {"0": 1, "1": 0}}],
          "mode": "float"
        }"#;
        let loaded = load_market(text).unwrap();
        assert_eq!(loaded.model.submarket(0).numeraire[1], ratio(21, 20) * ratio(21, 20));
        assert_eq!(loaded.claims[0].payoff, vec![int(1), int(0)]);
        assert!(!loaded.mode.is_exact());
    }

    #[test]
    fn fixtures_round_trip() {
        for m in [m1(), m2()] {
            let doc = MarketSpecDocument::from_model(&m, &[], NumericMode::Rational);
            let again = load_market(&doc.to_json()).unwrap();
            assert_eq!(again.model, m);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn random_round_trip(seed in 0u64..10_000) {
            let m = random_model(&RandomModelConfig::small(), seed);
            let claims = vec![random_claim(&m, seed)];
            let doc = MarketSpecDocument::from_model(&m, &claims, NumericMode::Rational);
            let text = doc.to_json();
            let again = load_market(&text).unwrap();
            prop_assert_eq!(&again.model, &m);
            prop_assert_eq!(&again.claims, &claims);
            prop_assert_eq!(MarketSpecDocument::from_model(&again.model, &again.claims, again.mode).to_json(), text);
        }
    }
}
