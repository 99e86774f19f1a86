//! Small reference markets used throughout the examples and tests.
//!
//! `m2` is a one-period, two-atom desk market with two submarkets and a
//! unique deflator `(2/3, 4/3)`. `m1` changes the down-state price of the
//! second submarket so that each submarket stays arbitrage-free on its own
//! while the global market is not.

use crate::market::{MarketModel, Submarket};
use crate::numeric::{int, ratio, NumericMode, Rational};
use crate::tree::{build_tree, BranchingSpec, NodeSpec};

fn up_down_tree() -> crate::tree::ScenarioTree {
    let spec = BranchingSpec::Explicit(vec![
        NodeSpec { id: "root".into(), parent: None },
        NodeSpec { id: "u".into(), parent: Some("root".into()) },
        NodeSpec { id: "d".into(), parent: Some("root".into()) },
    ]);
    build_tree(&spec, vec![ratio(1, 2), ratio(1, 2)], NumericMode::Rational).expect("static tree")
}

fn scalar_submarket(label: &str, assets: [Rational; 3], numeraire: [Rational; 3]) -> Submarket {
    Submarket {
        label: label.into(),
        dim: 1,
        assets: assets.into_iter().map(|a| vec![a]).collect(),
        numeraire: numeraire.into_iter().collect(),
    }
}

/// Nodes in order root, u, d.
pub fn m2() -> MarketModel {
    MarketModel::new(
        up_down_tree(),
        vec![
            scalar_submarket("tau1", [int(4), int(6), int(3)], [int(1), int(1), int(1)]),
            scalar_submarket(
                "tau2",
                [int(5), ratio(36, 5), ratio(22, 5)],
                [int(1), ratio(6, 5), int(1)],
            ),
        ],
        None,
    )
    .expect("m2 is valid")
}

/// `m2` with the second submarket's down-state price lowered from 4.4 to 4.0.
pub fn m1() -> MarketModel {
    MarketModel::new(
        up_down_tree(),
        vec![
            scalar_submarket("tau1", [int(4), int(6), int(3)], [int(1), int(1), int(1)]),
            scalar_submarket(
                "tau2",
                [int(5), ratio(36, 5), int(4)],
                [int(1), ratio(6, 5), int(1)],
            ),
        ],
        None,
    )
    .expect("m1 is valid")
}

/// One submarket, numeraire identically one, one asset: the classical
/// complete binomial market with risk-neutral probabilities (1/3, 2/3).
pub fn single_classical() -> MarketModel {
    MarketModel::new(
        up_down_tree(),
        vec![scalar_submarket("tau", [int(4), int(6), int(3)], [int(1), int(1), int(1)])],
        None,
    )
    .expect("valid")
}
