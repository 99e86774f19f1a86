//! The global market: one asset vector and one tradable numeraire per
//! submarket, given at every node of a shared scenario tree.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::numeric::{format_rational, Rational};
use crate::tree::{NodeId, ScenarioTree, TreeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("submarket `{submarket}` has non-positive numeraire {value} at node `{node}`")]
    NonPositiveNumeraire {
        submarket: String,
        node: String,
        value: String,
    },
    #[error("submarket `{submarket}` is missing {what} at node `{node}`")]
    MissingNodeValue {
        submarket: String,
        node: String,
        what: String,
    },
    #[error("unknown submarket `{0}`")]
    UnknownSubmarket(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("model failed validation: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Submarket {
    pub label: String,
    /// Number of risky assets, at least one.
    pub dim: usize,
    /// Asset vector per node (indexed by `NodeId`).
    pub assets: Vec<Vec<Rational>>,
    /// Numeraire value per node.
    pub numeraire: Vec<Rational>,
}

impl Submarket {
    pub fn discounted(&self, node: NodeId) -> Vec<Rational> {
        self.assets[node.0]
            .iter()
            .map(|s| s / &self.numeraire[node.0])
            .collect()
    }

    /// `S^{tau,0}_T / S^{tau,0}_0` per atom.
    pub fn numeraire_growth(&self, tree: &ScenarioTree) -> Vec<Rational> {
        let s0 = &self.numeraire[tree.root().0];
        tree.leaves().iter().map(|l| &self.numeraire[l.0] / s0).collect()
    }

    /// Terminal value of asset `i` per atom.
    pub fn terminal_asset(&self, tree: &ScenarioTree, i: usize) -> Vec<Rational> {
        tree.leaves().iter().map(|l| self.assets[l.0][i].clone()).collect()
    }
}

/// A contingent claim paying at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    pub label: String,
    /// Payoff per atom.
    pub payoff: Vec<Rational>,
}

impl Claim {
    pub fn new(label: impl Into<String>, payoff: Vec<Rational>) -> Self {
        Claim {
            label: label.into(),
            payoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    tree: ScenarioTree,
    submarkets: Vec<Submarket>,
    bound_constant: Option<Rational>,
}

impl MarketModel {
    /// Shape checks only (value maps total over nodes, vector lengths match
    /// `dim`). Use [`MarketModel::new`] or [`validate_model`] for the
    /// positivity and boundedness conditions.
    pub fn assemble(
        tree: ScenarioTree,
        submarkets: Vec<Submarket>,
        bound_constant: Option<Rational>,
    ) -> Result<Self, ModelError> {
        let n = tree.node_count();
        for sm in &submarkets {
            if sm.dim == 0 {
                return Err(ModelError::DimensionMismatch(format!(
                    "submarket `{}` has no risky asset",
                    sm.label
                )));
            }
            if sm.numeraire.len() != n {
                return Err(ModelError::MissingNodeValue {
                    submarket: sm.label.clone(),
                    node: tree.node(NodeId(sm.numeraire.len().min(n - 1))).label.clone(),
                    what: "a numeraire value".into(),
                });
            }
            if sm.assets.len() != n {
                return Err(ModelError::MissingNodeValue {
                    submarket: sm.label.clone(),
                    node: tree.node(NodeId(sm.assets.len().min(n - 1))).label.clone(),
                    what: "an asset vector".into(),
                });
            }
            if let Some((k, _)) = sm.assets.iter().enumerate().find(|(_, v)| v.len() != sm.dim) {
                return Err(ModelError::MissingNodeValue {
                    submarket: sm.label.clone(),
                    node: tree.node(NodeId(k)).label.clone(),
                    what: format!("{} asset values", sm.dim),
                });
            }
        }
        for (i, a) in submarkets.iter().enumerate() {
            if submarkets[..i].iter().any(|b| b.label == a.label) {
                return Err(ModelError::Schema(format!("duplicate submarket label `{}`", a.label)));
            }
        }
        Ok(MarketModel {
            tree,
            submarkets,
            bound_constant,
        })
    }

    /// Assembled and validated.
    pub fn new(
        tree: ScenarioTree,
        submarkets: Vec<Submarket>,
        bound_constant: Option<Rational>,
    ) -> Result<Self, ModelError> {
        let model = Self::assemble(tree, submarkets, bound_constant)?;
        let report = validate_model(&model);
        match report.issues.into_iter().next() {
            None => Ok(model),
            Some(ValidationIssue::NonPositiveNumeraire {
                submarket,
                node,
                value,
            }) => Err(ModelError::NonPositiveNumeraire {
                submarket,
                node,
                value,
            }),
            Some(other) => Err(ModelError::Invalid(other.to_string())),
        }
    }

    pub fn tree(&self) -> &ScenarioTree {
        &self.tree
    }

    pub fn submarkets(&self) -> &[Submarket] {
        &self.submarkets
    }

    pub fn submarket(&self, tau: usize) -> &Submarket {
        &self.submarkets[tau]
    }

    pub fn bound_constant(&self) -> Option<&Rational> {
        self.bound_constant.as_ref()
    }

    pub fn submarket_index(&self, label: &str) -> Result<usize, ModelError> {
        self.submarkets
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| ModelError::UnknownSubmarket(label.to_string()))
    }

    pub fn atom_count(&self) -> usize {
        self.tree.atom_count()
    }

    /// Numeraire growth `S^{tau,0}_T / S^{tau,0}_0` per atom.
    pub fn growth(&self, tau: usize) -> Vec<Rational> {
        self.submarkets[tau].numeraire_growth(&self.tree)
    }

    /// Claim paying asset `i` of submarket `tau` at the horizon.
    pub fn asset_claim(&self, tau: usize, i: usize) -> Claim {
        let sm = &self.submarkets[tau];
        let label = if sm.dim == 1 {
            format!("S[{}]", sm.label)
        } else {
            format!("S[{}][{i}]", sm.label)
        };
        Claim::new(label, sm.terminal_asset(&self.tree, i))
    }

    pub fn check_claim(&self, claim: &Claim) -> Result<(), ModelError> {
        if claim.payoff.len() != self.atom_count() {
            return Err(ModelError::DimensionMismatch(format!(
                "claim `{}` has {} payoffs for {} atoms",
                claim.label,
                claim.payoff.len(),
                self.atom_count()
            )));
        }
        Ok(())
    }

    /// Replaces values of one submarket; used by generators and tests.
    pub fn with_submarkets(&self, submarkets: Vec<Submarket>) -> Result<Self, ModelError> {
        Self::assemble(self.tree.clone(), submarkets, self.bound_constant.clone())
    }
}

/// Discounted prices `S / S^0` of submarket `tau` at every node.
pub fn discounted_prices(model: &MarketModel, tau: &str) -> Result<Vec<Vec<Rational>>, ModelError> {
    let sm = model.submarket(model.submarket_index(tau)?);
    Ok((0..model.tree().node_count())
        .map(|n| sm.discounted(NodeId(n)))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    NoSubmarkets,
    NonPositiveNumeraire {
        submarket: String,
        node: String,
        value: String,
    },
    BoundExceeded {
        submarket: String,
        node: String,
        bound: String,
    },
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationIssue::NoSubmarkets => write!(f, "the model declares no submarket"),
            ValidationIssue::NonPositiveNumeraire {
                submarket,
                node,
                value,
            } => write!(
                f,
                "NonPositiveNumeraire: submarket `{submarket}` node `{node}` value {value}"
            ),
            ValidationIssue::BoundExceeded {
                submarket,
                node,
                bound,
            } => write!(
                f,
                "BoundExceeded: submarket `{submarket}` node `{node}` exceeds K = {bound}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<ValidationIssue>,
    /// Tightest K with `|S~| <= K` and `S^0 <= K` at every node, when the
    /// numeraires are positive.
    pub tightest_bound: Option<Rational>,
}

/// Positivity of numeraires and the boundedness condition. Never fails;
/// problems are listed in the report.
pub fn validate_model(model: &MarketModel) -> ValidationReport {
    let tree = model.tree();
    let mut issues = Vec::new();
    if model.submarkets().is_empty() {
        issues.push(ValidationIssue::NoSubmarkets);
    }
    for sm in model.submarkets() {
        for node in tree.nodes() {
            let v = &sm.numeraire[node.id.0];
            if !v.is_positive() {
                issues.push(ValidationIssue::NonPositiveNumeraire {
                    submarket: sm.label.clone(),
                    node: node.label.clone(),
                    value: format_rational(v),
                });
            }
        }
    }
    let numeraires_ok = issues.iter().all(|i| !matches!(i, ValidationIssue::NonPositiveNumeraire { .. }));
    let tightest_bound = if numeraires_ok && !model.submarkets().is_empty() {
        let mut k = Rational::zero();
        for sm in model.submarkets() {
            for node in tree.nodes() {
                let s0 = &sm.numeraire[node.id.0];
                if *s0 > k {
                    k = s0.clone();
                }
                for d in sm.discounted(node.id) {
                    if d.abs() > k {
                        k = d.abs();
                    }
                }
            }
        }
        Some(k)
    } else {
        None
    };
    if let (Some(bound), Some(k)) = (model.bound_constant(), &tightest_bound) {
        if k > bound {
            for sm in model.submarkets() {
                for node in tree.nodes() {
                    let over = sm.numeraire[node.id.0] > *bound
                        || sm.discounted(node.id).iter().any(|d| d.abs() > *bound);
                    if over {
                        issues.push(ValidationIssue::BoundExceeded {
                            submarket: sm.label.clone(),
                            node: node.label.clone(),
                            bound: format_rational(bound),
                        });
                    }
                }
            }
        }
    }
    ValidationReport {
        ok: issues.is_empty(),
        issues,
        tightest_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m2, single_classical};
    use crate::numeric::{int, ratio};

    #[test]
    fn discounted_prices_divide_componentwise() {
        let m = m2();
        let d = discounted_prices(&m, "tau2").unwrap();
        let t = m.tree();
        assert_eq!(d[t.leaves()[0].0], vec![int(6)]);
        assert_eq!(d[t.leaves()[1].0], vec![ratio(22, 5)]);
        assert_eq!(d[t.root().0], vec![int(5)]);
        let d1 = discounted_prices(&m, "tau1").unwrap();
        for (n, v) in d1.iter().enumerate() {
            assert_eq!(*v, m.submarket(0).assets[n]);
        }
        assert!(matches!(discounted_prices(&m, "nope"), Err(ModelError::UnknownSubmarket(_))));
    }

    #[test]
    fn discounted_times_numeraire_is_asset() {
        let m = m2();
        for (tau, sm) in m.submarkets().iter().enumerate() {
            let d = discounted_prices(&m, &sm.label).unwrap();
            for n in 0..m.tree().node_count() {
                let back: Vec<Rational> = d[n].iter().map(|x| x * &sm.numeraire[n]).collect();
                assert_eq!(back, m.submarket(tau).assets[n]);
            }
        }
    }

    #[test]
    fn m2_validates_with_bound_six() {
        let r = validate_model(&m2());
        assert!(r.ok);
        assert_eq!(r.tightest_bound, Some(int(6)));
        assert!(validate_model(&single_classical()).ok);
    }

    #[test]
    fn negative_numeraire_is_reported_with_node() {
        let m = m2();
        let mut sms = m.submarkets().to_vec();
        sms[1].numeraire[2] = int(-1);
        let bad = m.with_submarkets(sms.clone()).unwrap();
        let r = validate_model(&bad);
        assert!(!r.ok);
        assert_eq!(
            r.issues,
            vec![ValidationIssue::NonPositiveNumeraire {
                submarket: "tau2".into(),
                node: "d".into(),
                value: "-1".into()
            }]
        );
        assert!(matches!(
            MarketModel::new(m.tree().clone(), sms, None),
            Err(ModelError::NonPositiveNumeraire { .. })
        ));
    }

    #[test]
    fn empty_submarket_list_is_not_ok() {
        let m = MarketModel::assemble(m2().tree().clone(), vec![], None).unwrap();
        assert!(!validate_model(&m).ok);
    }

    #[test]
    fn declared_bound_is_checked() {
        let m = m2();
        let tight = MarketModel::assemble(m.tree().clone(), m.submarkets().to_vec(), Some(int(5))).unwrap();
        assert!(validate_model(&tight)
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::BoundExceeded { .. })));
        let loose = MarketModel::assemble(m.tree().clone(), m.submarkets().to_vec(), Some(int(6))).unwrap();
        assert!(validate_model(&loose).ok);
    }

    #[test]
    fn missing_values_are_rejected() {
        let m = m2();
        let mut sms = m.submarkets().to_vec();
        sms[0].assets.pop();
        assert!(matches!(
            m.with_submarkets(sms),
            Err(ModelError::MissingNodeValue { .. })
        ));
    }
}
