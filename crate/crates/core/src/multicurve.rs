//! Tenor submarkets: numeraires accrued at a base rate plus a per-tenor
//! spread, FRA arithmetic, and the co-trading arbitrage between
//! instruments that pay the same but are quoted differently.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arbitrage::{check_global_nfl, martingale_measure, ArbitrageError, ArbitrageWitness, DeflatorCertificate, NflOutcome};
use crate::gains::{terminal_value, SimpleStrategy};
use crate::market::{MarketModel, ModelError, Submarket};
use crate::numeric::{NumericMode, Rational};
use crate::tree::{build_tree, BranchingSpec, ScenarioTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MulticurveError {
    #[error("the end of the accrual period must come after its start")]
    BadMaturities,
    #[error("bond prices must be positive")]
    NonPositiveBond,
    #[error("accrual factor is not positive for `{tenor}` at node `{node}`")]
    NonPositiveAccumulation { tenor: String, node: String },
    #[error("the two quotes are equal; there is nothing to arbitrage")]
    QuotesEqual,
    #[error("rate structure does not match the tree: {0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Arbitrage(#[from] ArbitrageError),
    #[error("growth ratios are deterministic but the martingale measures differ")]
    ExpectedCommon,
}

/// Forward rate over `[i, m]` implied by two discount factors:
/// `(B(t, i) / B(t, m) - 1) / (m - i)`.
pub fn fra_rate(b_ti: &Rational, b_tm: &Rational, i: &Rational, m: &Rational) -> Result<Rational, MulticurveError> {
    if m <= i {
        return Err(MulticurveError::BadMaturities);
    }
    if !b_ti.is_positive() || !b_tm.is_positive() {
        return Err(MulticurveError::NonPositiveBond);
    }
    Ok((b_ti / b_tm - Rational::one()) / (m - i))
}

/// Short rates per node, applied over the step that starts at the node.
#[derive(Debug, Clone, PartialEq)]
pub struct RateStructure {
    pub step: Rational,
    pub base_rate: Vec<Rational>,
    /// `(tenor label, spread per node)`.
    pub spreads: Vec<(String, Vec<Rational>)>,
}

impl RateStructure {
    /// Numeraire of `tenor`, starting from `initial`. Each step multiplies
    /// by `(1 + r step)(1 + s step)`, so the spread part of the growth is
    /// deterministic whenever the spread is.
    pub fn numeraire(&self, tree: &ScenarioTree, tenor: usize, initial: &Rational) -> Result<Vec<Rational>, MulticurveError> {
        let (label, spread) = &self.spreads[tenor];
        if self.base_rate.len() != tree.node_count() || spread.len() != tree.node_count() {
            return Err(MulticurveError::Shape(format!("expected {} node values", tree.node_count())));
        }
        let one = Rational::one();
        let mut values = vec![Rational::zero(); tree.node_count()];
        values[0] = initial.clone();
        for node in tree.nodes().iter().skip(1) {
            let p = node.parent.expect("non-root").0;
            let base = &one + &self.base_rate[p] * &self.step;
            let extra = &one + &spread[p] * &self.step;
            if !base.is_positive() || !extra.is_positive() {
                return Err(MulticurveError::NonPositiveAccumulation {
                    tenor: label.clone(),
                    node: tree.node(node.id).label.clone(),
                });
            }
            values[node.id.0] = &values[p] * base * extra;
        }
        Ok(values)
    }
}

/// Assets traded in one tenor submarket, per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TenorAssets {
    pub dim: usize,
    pub assets: Vec<Vec<Rational>>,
    pub initial_numeraire: Rational,
}

pub fn build_tenor_market(tree: &ScenarioTree, rates: &RateStructure, assets: &[TenorAssets]) -> Result<MarketModel, MulticurveError> {
    if assets.len() != rates.spreads.len() {
        return Err(MulticurveError::Shape("one asset block per tenor".into()));
    }
    let subs = assets
        .iter()
        .enumerate()
        .map(|(t, a)| {
            Ok(Submarket {
                label: rates.spreads[t].0.clone(),
                dim: a.dim,
                assets: a.assets.clone(),
                numeraire: rates.numeraire(tree, t, &a.initial_numeraire)?,
            })
        })
        .collect::<Result<Vec<_>, MulticurveError>>()?;
    Ok(MarketModel::new(tree.clone(), subs, None)?)
}

/// Asset values whose discounted prices are martingales under
/// `Q ∝ P * xstar * numeraire_T`, from discounted values at the leaves.
pub fn martingale_assets(tree: &ScenarioTree, numeraire: &[Rational], xstar: &[Rational], leaf_discounted: &[Rational]) -> Vec<Vec<Rational>> {
    let w: Vec<Rational> = (0..tree.atom_count())
        .map(|k| &tree.atom_probs()[k] * &xstar[k] * &numeraire[tree.leaves()[k].0])
        .collect();
    crate::generate::backward_expectation(tree, &w, leaf_discounted)
        .into_iter()
        .zip(numeraire)
        .map(|(d, s0)| vec![d * s0])
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommonMeasure {
    Common(Vec<Rational>),
    Distinct {
        measures: Vec<Vec<Rational>>,
        /// Largest pairwise total-variation distance.
        max_tv: Rational,
    },
}

impl CommonMeasure {
    pub fn is_common(&self) -> bool {
        matches!(self, CommonMeasure::Common(_))
    }
}

/// Whether every growth ratio `R_tau / R_0` is constant across atoms.
pub fn growth_ratios_deterministic(model: &MarketModel) -> bool {
    let base = model.growth(0);
    (1..model.submarkets().len()).all(|t| {
        let g = model.growth(t);
        let r0 = &g[0] / &base[0];
        g.iter().zip(&base).all(|(a, b)| a / b == r0)
    })
}

/// Compares the martingale measures of all submarkets. Fails if the growth
/// ratios are deterministic and the measures still differ.
pub fn common_measure_check(model: &MarketModel, cert: &DeflatorCertificate) -> Result<CommonMeasure, MulticurveError> {
    let measures: Vec<Vec<Rational>> = (0..model.submarkets().len()).map(|t| martingale_measure(model, cert, t)).collect();
    if measures.iter().all(|q| q == &measures[0]) {
        return Ok(CommonMeasure::Common(measures[0].clone()));
    }
    if growth_ratios_deterministic(model) {
        return Err(MulticurveError::ExpectedCommon);
    }
    let half = Rational::new(1.into(), 2.into());
    let mut max_tv = Rational::zero();
    for a in 0..measures.len() {
        for b in a + 1..measures.len() {
            let l1: Rational = measures[a].iter().zip(&measures[b]).map(|(x, y)| (x - y).abs()).sum();
            max_tv = max_tv.max(&half * l1);
        }
    }
    Ok(CommonMeasure::Distinct { measures, max_tv })
}

/// A zero-coupon bond paying one at the horizon, quoted `price` at the root
/// and pulled linearly to par along every path.
pub fn zero_coupon(tree: &ScenarioTree, price: &Rational) -> Vec<Rational> {
    let horizon = Rational::from_integer(tree.horizon().into());
    tree.nodes()
        .iter()
        .map(|n| {
            let t = Rational::from_integer(n.time.into());
            price + (Rational::one() - price) * t / &horizon
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CotradeDemo {
    /// Both instruments in one submarket.
    pub merged: MarketModel,
    /// Each instrument alone in its own submarket.
    pub split: MarketModel,
    /// Buy the cheap instrument, sell the rich one.
    pub witness: ArbitrageWitness,
    pub merged_outcome: NflOutcome,
    pub split_outcome: NflOutcome,
}

impl CotradeDemo {
    pub fn confirms(&self) -> bool {
        !self.merged_outcome.is_free() && self.split_outcome.is_free()
    }
}

/// Long one unit of the merged model's second asset when it is cheap in
/// numeraire units, short otherwise, held to the horizon.
fn buy_cheap(merged: &MarketModel, asset: usize, long: bool) -> SimpleStrategy {
    let mut s = SimpleStrategy::zero(merged);
    let unit = if long { Rational::one() } else { -Rational::one() };
    for node in merged.tree().non_terminal() {
        s.positions[0][node.id.0][asset] = unit.clone();
    }
    s
}

fn finish(merged: MarketModel, split: MarketModel, strategy: SimpleStrategy, mode: NumericMode) -> Result<CotradeDemo, MulticurveError> {
    let zero = vec![Rational::zero(); merged.submarkets().len()];
    let payoff = terminal_value(&merged, &zero, &strategy).expect("shape");
    let witness = ArbitrageWitness {
        coefficients: Vec::new(),
        violating_atoms: (0..payoff.len()).filter(|&k| payoff[k].is_positive()).collect(),
        submarkets_used: vec![0],
        payoff,
        strategy,
    };
    if !witness.verify(&merged, mode) {
        return Err(MulticurveError::QuotesEqual);
    }
    let merged_outcome = check_global_nfl(&merged, mode)?;
    let split_outcome = check_global_nfl(&split, mode)?;
    Ok(CotradeDemo {
        merged,
        split,
        witness,
        merged_outcome,
        split_outcome,
    })
}

/// Two zero-coupon bonds of different tenors, both paying one at the
/// horizon, quoted at `price_a` and `price_b`.
pub fn cotrade_arbitrage_demo(tree: &ScenarioTree, price_a: &Rational, price_b: &Rational, mode: NumericMode) -> Result<CotradeDemo, MulticurveError> {
    if price_a == price_b {
        return Err(MulticurveError::QuotesEqual);
    }
    if !price_a.is_positive() || !price_b.is_positive() {
        return Err(MulticurveError::NonPositiveBond);
    }
    let a = zero_coupon(tree, price_a);
    let b = zero_coupon(tree, price_b);
    let merged = MarketModel::new(
        tree.clone(),
        vec![Submarket {
            label: "merged".into(),
            dim: 1,
            assets: b.iter().map(|v| vec![v.clone()]).collect(),
            numeraire: a.clone(),
        }],
        None,
    )?;
    let own = |label: &str, zc: &[Rational]| Submarket {
        label: label.into(),
        dim: 1,
        assets: zc.iter().map(|v| vec![v.clone()]).collect(),
        numeraire: zc.to_vec(),
    };
    let split = MarketModel::new(tree.clone(), vec![own("tenor_a", &a), own("tenor_b", &b)], None)?;
    let strategy = buy_cheap(&merged, 0, price_b < price_a);
    finish(merged, split, strategy, mode)
}

/// One period, two assets with identical payoff `payoff` quoted `s0_1` and
/// `s0_2`. Split: the first submarket uses a unit numeraire, the second one
/// growing deterministically by `s0_1 / s0_2`.
pub fn same_payoff_demo(probs: Vec<Rational>, payoff: &[Rational], s0_1: &Rational, s0_2: &Rational, mode: NumericMode) -> Result<CotradeDemo, MulticurveError> {
    if s0_1 == s0_2 {
        return Err(MulticurveError::QuotesEqual);
    }
    if !s0_1.is_positive() || !s0_2.is_positive() {
        return Err(MulticurveError::NonPositiveBond);
    }
    let tree = build_tree(&BranchingSpec::Levels(vec![payoff.len()]), probs, NumericMode::Rational)
        .map_err(ModelError::from)?;
    let per_node = |s0: &Rational| -> Vec<Rational> {
        std::iter::once(s0.clone()).chain(payoff.iter().cloned()).collect()
    };
    let ones = vec![Rational::one(); tree.node_count()];
    let growth = s0_1 / s0_2;
    let second_numeraire: Vec<Rational> = tree
        .nodes()
        .iter()
        .map(|n| if n.time == 0 { Rational::one() } else { growth.clone() })
        .collect();
    let merged = MarketModel::new(
        tree.clone(),
        vec![Submarket {
            label: "merged".into(),
            dim: 2,
            assets: per_node(s0_1).into_iter().zip(per_node(s0_2)).map(|(a, b)| vec![a, b]).collect(),
            numeraire: ones.clone(),
        }],
        None,
    )?;
    let split = MarketModel::new(
        tree,
        vec![
            Submarket {
                label: "tau1".into(),
                dim: 1,
                assets: per_node(s0_1).into_iter().map(|v| vec![v]).collect(),
                numeraire: ones,
            },
            Submarket {
                label: "tau2".into(),
                dim: 1,
                assets: per_node(s0_2).into_iter().map(|v| vec![v]).collect(),
                numeraire: second_numeraire,
            },
        ],
        None,
    )?;
    let mut strategy = SimpleStrategy::zero(&merged);
    let (cheap, rich) = if s0_2 < s0_1 { (1, 0) } else { (0, 1) };
    strategy.positions[0][0][cheap] = Rational::one();
    strategy.positions[0][0][rich] = -Rational::one();
    finish(merged, split, strategy, mode)
}

/// One submarket holding every instrument of `model`, financed by the
/// first numeraire. The other numeraires become tradable assets.
pub fn merge_submarkets(model: &MarketModel) -> Result<MarketModel, MulticurveError> {
    let subs = model.submarkets();
    let assets: Vec<Vec<Rational>> = (0..model.tree().node_count())
        .map(|n| {
            let mut v: Vec<Rational> = subs.iter().flat_map(|s| s.assets[n].iter().cloned()).collect();
            v.extend(subs.iter().skip(1).map(|s| s.numeraire[n].clone()));
            v
        })
        .collect();
    let merged = Submarket {
        label: "merged".into(),
        dim: assets[0].len(),
        assets,
        numeraire: subs[0].numeraire.clone(),
    };
    Ok(MarketModel::new(model.tree().clone(), vec![merged], None)?)
}
