//! Zero-cost terminal gains, simple strategies and self-financing
//! bookkeeping.
//!
//! A strategy holds one position vector per submarket and non-terminal node,
//! kept from that node until the next date. Trading across submarkets is not
//! possible: each submarket finances itself through its own numeraire.

use num_traits::Zero;
use thiserror::Error;

use crate::linalg;
use crate::market::MarketModel;
use crate::numeric::Rational;
use crate::tree::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GainsError {
    #[error("unknown submarket index {0}")]
    UnknownSubmarket(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Which holding generates a gain vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GainDirection {
    pub submarket: usize,
    pub node: NodeId,
    pub asset: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainsBasis {
    /// Payoff vectors over atoms.
    pub vectors: Vec<Vec<Rational>>,
    pub directions: Vec<GainDirection>,
}

impl GainsBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Restriction to one submarket.
    pub fn only(&self, tau: usize) -> GainsBasis {
        let (vectors, directions) = self
            .vectors
            .iter()
            .zip(&self.directions)
            .filter(|(_, d)| d.submarket == tau)
            .map(|(v, d)| (v.clone(), *d))
            .unzip();
        GainsBasis { vectors, directions }
    }

    /// `sum_k coeffs[k] * vectors[k]`.
    pub fn combine(&self, coeffs: &[Rational], atoms: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); atoms];
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }

    /// Strategy holding `coeffs[k]` units along direction `k`.
    pub fn strategy(&self, model: &MarketModel, coeffs: &[Rational]) -> SimpleStrategy {
        let mut s = SimpleStrategy::zero(model);
        for (c, d) in coeffs.iter().zip(&self.directions) {
            s.positions[d.submarket][d.node.0][d.asset] += c;
        }
        s
    }
}

fn basis_for(model: &MarketModel, tau: usize) -> GainsBasis {
    let tree = model.tree();
    let sm = model.submarket(tau);
    let mut vectors = Vec::new();
    let mut directions = Vec::new();
    for node in tree.non_terminal() {
        let here = sm.discounted(node.id);
        for (i, here_i) in here.iter().enumerate() {
            let mut g = vec![Rational::zero(); tree.atom_count()];
            for k in tree.atoms_under(node.id) {
                let child = tree.child_towards(node.id, k).expect("non-terminal");
                let leaf = tree.leaves()[k];
                let next = &sm.assets[child.0][i] / &sm.numeraire[child.0];
                g[k] = &sm.numeraire[leaf.0] * (next - here_i);
            }
            vectors.push(g);
            directions.push(GainDirection {
                submarket: tau,
                node: node.id,
                asset: i,
            });
        }
    }
    GainsBasis { vectors, directions }
}

/// One terminal gain vector per (non-terminal node, asset) of `tau`, in
/// breadth-first node order then asset order.
pub fn elementary_gains(model: &MarketModel, tau: usize) -> Result<Vec<Vec<Rational>>, GainsError> {
    if tau >= model.submarkets().len() {
        return Err(GainsError::UnknownSubmarket(tau));
    }
    Ok(basis_for(model, tau).vectors)
}

pub fn submarket_gains(model: &MarketModel, tau: usize) -> Result<GainsBasis, GainsError> {
    if tau >= model.submarkets().len() {
        return Err(GainsError::UnknownSubmarket(tau));
    }
    Ok(basis_for(model, tau))
}

/// Concatenation of the submarket bases in declared order.
pub fn global_gains(model: &MarketModel) -> GainsBasis {
    let mut all = GainsBasis {
        vectors: Vec::new(),
        directions: Vec::new(),
    };
    for tau in 0..model.submarkets().len() {
        let b = basis_for(model, tau);
        all.vectors.extend(b.vectors);
        all.directions.extend(b.directions);
    }
    all
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimpleStrategy {
    /// `positions[tau][node][i]`, meaningful on non-terminal nodes.
    pub positions: Vec<Vec<Vec<Rational>>>,
    /// `numeraire[tau][node]`, filled by [`complete_self_financing`].
    pub numeraire: Vec<Vec<Rational>>,
}

impl SimpleStrategy {
    pub fn zero(model: &MarketModel) -> Self {
        let n = model.tree().node_count();
        SimpleStrategy {
            positions: model
                .submarkets()
                .iter()
                .map(|sm| vec![vec![Rational::zero(); sm.dim]; n])
                .collect(),
            numeraire: vec![vec![Rational::zero(); n]; model.submarkets().len()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.positions.iter().flatten().flatten().all(Zero::is_zero)
    }

    fn check(&self, model: &MarketModel) -> Result<(), GainsError> {
        let n = model.tree().node_count();
        let ok = self.positions.len() == model.submarkets().len()
            && self
                .positions
                .iter()
                .zip(model.submarkets())
                .all(|(p, sm)| p.len() == n && p.iter().all(|v| v.len() == sm.dim));
        if ok {
            Ok(())
        } else {
            Err(GainsError::DimensionMismatch("strategy shape does not match the model".into()))
        }
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Terminal wealth of initial wealth `x[tau]` per submarket plus the risky
/// positions of `phi`, financed by each submarket's numeraire.
pub fn terminal_value(model: &MarketModel, x: &[Rational], phi: &SimpleStrategy) -> Result<Vec<Rational>, GainsError> {
    phi.check(model)?;
    if x.len() != model.submarkets().len() {
        return Err(GainsError::DimensionMismatch(format!(
            "{} initial wealths for {} submarkets",
            x.len(),
            model.submarkets().len()
        )));
    }
    let tree = model.tree();
    let root = tree.root();
    let mut out = vec![Rational::zero(); tree.atom_count()];
    for (tau, sm) in model.submarkets().iter().enumerate() {
        for (k, o) in out.iter_mut().enumerate() {
            let path = tree.path(k);
            let mut acc = &x[tau] / &sm.numeraire[root.0];
            for w in path.windows(2) {
                let d: Vec<Rational> = sm
                    .discounted(w[1])
                    .iter()
                    .zip(sm.discounted(w[0]))
                    .map(|(a, b)| a - b)
                    .collect();
                acc += dot(&phi.positions[tau][w[0].0], &d);
            }
            *o += &sm.numeraire[tree.leaves()[k].0] * acc;
        }
    }
    Ok(out)
}

/// Fills in numeraire holdings so that each submarket starts with `x[tau]`
/// and rebalances without inflow at every later node.
pub fn complete_self_financing(model: &MarketModel, x: &[Rational], phi: &SimpleStrategy) -> Result<SimpleStrategy, GainsError> {
    phi.check(model)?;
    if x.len() != model.submarkets().len() {
        return Err(GainsError::DimensionMismatch("initial wealth per submarket".into()));
    }
    let tree = model.tree();
    let mut out = phi.clone();
    for (tau, sm) in model.submarkets().iter().enumerate() {
        for node in tree.nodes() {
            if node.is_leaf() {
                continue;
            }
            let n = node.id.0;
            let value_in = match node.parent {
                None => x[tau].clone(),
                Some(p) => {
                    dot(&out.positions[tau][p.0], &sm.assets[n]) + &out.numeraire[tau][p.0] * &sm.numeraire[n]
                }
            };
            let risky = dot(&out.positions[tau][n], &sm.assets[n]);
            out.numeraire[tau][n] = (value_in - risky) / &sm.numeraire[n];
        }
    }
    Ok(out)
}

/// Total wealth across submarkets at every node: the value of the holdings
/// entered at the node, or carried into it for leaves.
pub fn wealth_process(model: &MarketModel, strategy: &SimpleStrategy) -> Vec<Rational> {
    let tree = model.tree();
    tree.nodes()
        .iter()
        .map(|node| {
            let held = if node.is_leaf() {
                node.parent.expect("leaf below the root")
            } else {
                node.id
            };
            model
                .submarkets()
                .iter()
                .enumerate()
                .map(|(tau, sm)| {
                    dot(&strategy.positions[tau][held.0], &sm.assets[node.id.0])
                        + &strategy.numeraire[tau][held.0] * &sm.numeraire[node.id.0]
                })
                .sum()
        })
        .collect()
}

/// Per submarket and non-root, non-terminal node: value carried in minus
/// value of the new holdings. Zero for a self-financing strategy.
pub fn self_financing_residuals(model: &MarketModel, strategy: &SimpleStrategy) -> Vec<Rational> {
    let tree = model.tree();
    let mut out = Vec::new();
    for (tau, sm) in model.submarkets().iter().enumerate() {
        for node in tree.non_terminal() {
            let Some(p) = node.parent else { continue };
            let n = node.id.0;
            let before = dot(&strategy.positions[tau][p.0], &sm.assets[n]) + &strategy.numeraire[tau][p.0] * &sm.numeraire[n];
            let after = dot(&strategy.positions[tau][n], &sm.assets[n]) + &strategy.numeraire[tau][n] * &sm.numeraire[n];
            out.push(before - after);
        }
    }
    out
}

/// Whether `payoff` is attainable at zero cost with the given basis.
pub fn in_span(basis: &GainsBasis, payoff: &[Rational]) -> bool {
    linalg::in_span(&basis.vectors, payoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::m2;
    use crate::generate::{random_model, RandomModelConfig};
    use crate::numeric::{int, ratio};
    use crate::tree::{sample_later_stopping_time, sample_stopping_times};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn m2_elementary_gains() {
        let m = m2();
        assert_eq!(elementary_gains(&m, 0).unwrap(), vec![vec![int(2), int(-1)]]);
        assert_eq!(elementary_gains(&m, 1).unwrap(), vec![vec![ratio(6, 5), ratio(-3, 5)]]);
        assert_eq!(global_gains(&m).vectors.len(), 2);
        assert!(elementary_gains(&m, 2).is_err());
    }

    #[test]
    fn constant_discounted_price_has_zero_gains() {
        let m = m2();
        let mut subs = m.submarkets().to_vec();
        subs[0].assets = vec![vec![int(4)]; 3];
        let flat = m.with_submarkets(subs).unwrap();
        assert!(elementary_gains(&flat, 0).unwrap()[0].iter().all(Zero::is_zero));
    }

    #[test]
    fn duplicated_submarket_keeps_span() {
        let m = m2();
        let mut copy = m.submarket(0).clone();
        copy.label = "copy".into();
        let subs = vec![m.submarket(0).clone(), copy];
        let twin = m.with_submarkets(subs).unwrap();
        let g = global_gains(&twin);
        assert_eq!(g.len(), 2);
        assert_eq!(linalg::rank(&g.vectors), 1);
    }

    #[test]
    fn terminal_values_in_m2() {
        let m = m2();
        let zero = SimpleStrategy::zero(&m);
        assert_eq!(
            terminal_value(&m, &[int(1), int(1)], &zero).unwrap(),
            vec![int(1) + ratio(6, 5), int(2)]
        );
        let mut buy = SimpleStrategy::zero(&m);
        buy.positions[0][0][0] = int(1);
        assert_eq!(terminal_value(&m, &[int(0), int(0)], &buy).unwrap(), vec![int(2), int(-1)]);
        let mut hedge = SimpleStrategy::zero(&m);
        hedge.positions[0][0][0] = ratio(3, 4);
        assert_eq!(
            terminal_value(&m, &[int(0), ratio(15, 4)], &hedge).unwrap(),
            vec![int(6), int(3)]
        );
    }

    #[test]
    fn self_financing_completion() {
        let m = m2();
        let zero = SimpleStrategy::zero(&m);
        let s = complete_self_financing(&m, &[int(1), int(1)], &zero).unwrap();
        assert_eq!(s.numeraire[0][0], int(1));
        let mut buy = SimpleStrategy::zero(&m);
        buy.positions[0][0][0] = int(1);
        let s = complete_self_financing(&m, &[int(4), int(0)], &buy).unwrap();
        assert_eq!(s.numeraire[0][0], int(0));
        let w = wealth_process(&m, &s);
        assert_eq!(w, vec![int(4), int(6), int(3)]);
    }

    fn random_strategy(model: &MarketModel, rng: &mut ChaCha8Rng) -> SimpleStrategy {
        let mut s = SimpleStrategy::zero(model);
        for p in s.positions.iter_mut().flatten().flatten() {
            *p = ratio(rng.gen_range(-6..=6), rng.gen_range(1..=3));
        }
        s
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn wealth_matches_terminal_value(seed in 0u64..10_000) {
            let model = random_model(&RandomModelConfig::small(), seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = random_strategy(&model, &mut rng);
            let x: Vec<Rational> = (0..model.submarkets().len()).map(|_| int(rng.gen_range(0..5))).collect();
            let full = complete_self_financing(&model, &x, &phi).unwrap();
            prop_assert!(self_financing_residuals(&model, &full).iter().all(Zero::is_zero));
            let tv = terminal_value(&model, &x, &phi).unwrap();
            let w = wealth_process(&model, &full);
            let at_leaves: Vec<Rational> = model.tree().leaves().iter().map(|l| w[l.0].clone()).collect();
            prop_assert_eq!(tv, at_leaves);
            let root_wealth: Rational = x.iter().sum();
            prop_assert_eq!(&w[0], &root_wealth);
        }

        #[test]
        fn terminal_value_is_linear(seed in 0u64..10_000, a in -4i64..4, b in -4i64..4) {
            let model = random_model(&RandomModelConfig::small(), seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let p1 = random_strategy(&model, &mut rng);
            let p2 = random_strategy(&model, &mut rng);
            let k = model.submarkets().len();
            let x1: Vec<Rational> = (0..k).map(|_| int(rng.gen_range(0..5))).collect();
            let x2: Vec<Rational> = (0..k).map(|_| int(rng.gen_range(0..5))).collect();
            let (a, b) = (int(a), int(b));
            let mut mix = SimpleStrategy::zero(&model);
            for tau in 0..k {
                for n in 0..model.tree().node_count() {
                    for i in 0..model.submarket(tau).dim {
                        mix.positions[tau][n][i] = &a * &p1.positions[tau][n][i] + &b * &p2.positions[tau][n][i];
                    }
                }
            }
            let xm: Vec<Rational> = x1.iter().zip(&x2).map(|(u, v)| &a * u + &b * v).collect();
            let lhs = terminal_value(&model, &xm, &mix).unwrap();
            let t1 = terminal_value(&model, &x1, &p1).unwrap();
            let t2 = terminal_value(&model, &x2, &p2).unwrap();
            let rhs: Vec<Rational> = t1.iter().zip(&t2).map(|(u, v)| &a * u + &b * v).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn basis_combinations_are_attainable(seed in 0u64..10_000) {
            let model = random_model(&RandomModelConfig::small(), seed);
            let g = global_gains(&model);
            let ones = vec![int(1); g.len()];
            let w = g.combine(&ones, model.atom_count());
            prop_assert!(in_span(&g, &w));
            let strat = g.strategy(&model, &ones);
            let zero = vec![Rational::zero(); model.submarkets().len()];
            prop_assert_eq!(terminal_value(&model, &zero, &strat).unwrap(), w);
        }
    }

    #[test]
    fn stopping_time_gains_reduce_to_one_step_gains() {
        let mut cfg = RandomModelConfig::small();
        cfg.periods = 2..=3;
        let mut checked = 0;
        let mut seed = 0u64;
        while checked < 100 {
            seed += 1;
            let model = random_model(&cfg, seed);
            let tree = model.tree();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b1 = sample_stopping_times(tree, 1, seed).remove(0);
            let b2 = sample_later_stopping_time(tree, &b1, seed.wrapping_mul(31));
            assert!(b1.precedes(tree, &b2));
            let tau = rng.gen_range(0..model.submarkets().len());
            let sm = model.submarket(tau);
            let basis = submarket_gains(&model, tau).unwrap();
            let phi: Vec<Vec<Rational>> = b1
                .nodes()
                .iter()
                .map(|_| (0..sm.dim).map(|_| int(rng.gen_range(-3..=3))).collect())
                .collect();
            let payoff: Vec<Rational> = (0..tree.atom_count())
                .map(|k| {
                    let n1 = b1.node_for_atom(tree, k);
                    let n2 = b2.node_for_atom(tree, k);
                    let j = b1.nodes().iter().position(|n| *n == n1).unwrap();
                    let d: Vec<Rational> = sm
                        .discounted(n2)
                        .iter()
                        .zip(sm.discounted(n1))
                        .map(|(a, b)| a - b)
                        .collect();
                    &sm.numeraire[tree.leaves()[k].0] * dot(&phi[j], &d)
                })
                .collect();
            assert!(in_span(&basis, &payoff), "seed {seed}");
            checked += 1;
        }
    }
}
