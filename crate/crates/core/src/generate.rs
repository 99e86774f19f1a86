//! Seeded random market models.
//!
//! `random_model` draws prices freely, so it produces arbitrage as often as
//! not. The `*_arbitrage_free` constructors start from a strictly positive
//! deflator and build every discounted price as a conditional expectation
//! under the induced measure, which rules arbitrage out by construction.

use std::ops::RangeInclusive;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::market::{Claim, MarketModel, Submarket};
use crate::numeric::{int, ratio, NumericMode, Rational};
use crate::tree::{build_tree, BranchingSpec, NodeSpec, ScenarioTree};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomModelConfig {
    pub atoms: RangeInclusive<usize>,
    pub periods: RangeInclusive<usize>,
    pub submarkets: RangeInclusive<usize>,
    pub dim: RangeInclusive<usize>,
}

impl RandomModelConfig {
    /// 2-4 atoms, 1-2 periods, 1-3 submarkets of one or two assets.
    pub fn small() -> Self {
        RandomModelConfig {
            atoms: 2..=4,
            periods: 1..=2,
            submarkets: 1..=3,
            dim: 1..=2,
        }
    }

    pub fn one_dimensional(mut self) -> Self {
        self.dim = 1..=1;
        self
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
}

/// Splits `atoms` leaves over at most `depth` further levels below `path`.
fn grow(rng: &mut ChaCha8Rng, path: &str, atoms: usize, depth: usize, root: bool, out: &mut Vec<(String, String)>) {
    if depth == 0 {
        return;
    }
    let kids = if depth == 1 || atoms == 1 {
        atoms
    } else {
        let lo = if root { 2 } else { 1 };
        rng.gen_range(lo..=atoms.min(3))
    };
    // random composition of `atoms` into `kids` positive parts
    let mut cuts: Vec<usize> = (1..atoms).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(kids - 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(kids);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(atoms)) {
        sizes.push(c - prev);
        prev = c;
    }
    for (j, size) in sizes.into_iter().enumerate() {
        let id = if path == "root" { j.to_string() } else { format!("{path}.{j}") };
        out.push((id.clone(), path.to_string()));
        grow(rng, &id, size, depth - 1, false, out);
    }
}

/// A random tree with exactly `atoms` leaves, all at time `periods`.
pub fn random_tree(rng: &mut ChaCha8Rng, atoms: usize, periods: usize) -> ScenarioTree {
    let mut edges = Vec::new();
    grow(rng, "root", atoms.max(2), periods.max(1), true, &mut edges);
    // breadth-first declaration keeps leaf order aligned with generation
    let mut specs = vec![NodeSpec { id: "root".into(), parent: None }];
    let mut frontier = vec!["root".to_string()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for p in &frontier {
            for (id, parent) in edges.iter().filter(|(_, parent)| parent == p) {
                specs.push(NodeSpec { id: id.clone(), parent: Some(parent.clone()) });
                next.push(id.clone());
            }
        }
        frontier = next;
    }
    let spec = BranchingSpec::Explicit(specs);
    let n = atoms.max(2);
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let probs = weights.iter().map(|w| ratio(*w, total)).collect();
    build_tree(&spec, probs, NumericMode::Rational).expect("generated tree is valid")
}

fn random_numeraire(rng: &mut ChaCha8Rng, tree: &ScenarioTree, deterministic: bool) -> Vec<Rational> {
    let mut values = vec![Rational::zero(); tree.node_count()];
    values[0] = [int(1), int(1), int(2), ratio(1, 2)].choose(rng).unwrap().clone();
    let per_time: Vec<Rational> = (0..=tree.horizon()).map(|_| ratio(10 + rng.gen_range(-2..=3), 10)).collect();
    for node in tree.nodes().iter().skip(1) {
        let parent = node.parent.expect("non-root");
        let factor = if deterministic {
            per_time[node.time].clone()
        } else {
            ratio(10 + rng.gen_range(-2..=3), 10)
        };
        values[node.id.0] = &values[parent.0] * factor;
    }
    values
}

fn random_price(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(1..=20), rng.gen_range(1..=2))
}

fn pick(rng: &mut ChaCha8Rng, r: &RangeInclusive<usize>) -> usize {
    rng.gen_range(r.clone())
}

/// Prices drawn independently at every node; arbitrage is likely.
pub fn random_model(cfg: &RandomModelConfig, seed: u64) -> MarketModel {
    let mut rng = rng_for(seed, 1);
    let atoms = pick(&mut rng, &cfg.atoms);
    let periods = pick(&mut rng, &cfg.periods);
    let tree = random_tree(&mut rng, atoms, periods);
    let k = pick(&mut rng, &cfg.submarkets);
    let subs = (0..k)
        .map(|t| {
            let dim = pick(&mut rng, &cfg.dim);
            let numeraire = random_numeraire(&mut rng, &tree, false);
            let assets = (0..tree.node_count())
                .map(|_| (0..dim).map(|_| random_price(&mut rng)).collect())
                .collect();
            Submarket { label: format!("tau{}", t + 1), dim, assets, numeraire }
        })
        .collect();
    MarketModel::new(tree, subs, None).expect("generated model is valid")
}

/// Discounted prices as conditional expectations of random terminal values
/// under `Q ∝ P * xstar * S^0_T`.
fn martingale_submarket(
    rng: &mut ChaCha8Rng,
    tree: &ScenarioTree,
    xstar: &[Rational],
    label: String,
    dim: usize,
    numeraire: Vec<Rational>,
    distinct_children: bool,
) -> Submarket {
    let weights: Vec<Rational> = (0..tree.atom_count())
        .map(|k| &tree.atom_probs()[k] * &xstar[k] * &numeraire[tree.leaves()[k].0])
        .collect();
    let mut discounted = vec![vec![Rational::zero(); dim]; tree.node_count()];
    loop {
        for leaf in tree.leaves() {
            discounted[leaf.0] = (0..dim).map(|_| random_price(rng)).collect();
        }
        for node in tree.nodes().iter().rev() {
            if node.is_leaf() {
                continue;
            }
            let mass: Rational = weights[tree.atoms_under(node.id)].iter().sum();
            discounted[node.id.0] = (0..dim)
                .map(|i| {
                    tree.atoms_under(node.id)
                        .map(|k| {
                            let child = tree.child_towards(node.id, k).unwrap();
                            &weights[k] * &discounted[child.0][i]
                        })
                        .sum::<Rational>()
                        / &mass
                })
                .collect();
        }
        if !distinct_children || children_distinct(tree, &discounted) {
            break;
        }
    }
    let assets = discounted
        .iter()
        .zip(&numeraire)
        .map(|(d, s0)| d.iter().map(|v| v * s0).collect())
        .collect();
    Submarket { label, dim, assets, numeraire }
}

fn children_distinct(tree: &ScenarioTree, values: &[Vec<Rational>]) -> bool {
    tree.non_terminal().all(|n| {
        let kids: Vec<&Vec<Rational>> = n.children.iter().map(|c| &values[c.0]).collect();
        kids.iter().enumerate().all(|(a, x)| kids[a + 1..].iter().all(|y| x != y))
    })
}

fn random_deflator(rng: &mut ChaCha8Rng, tree: &ScenarioTree) -> Vec<Rational> {
    let raw: Vec<Rational> = (0..tree.atom_count()).map(|_| int(rng.gen_range(1..=4))).collect();
    let mean = tree.expectation(&raw);
    raw.into_iter().map(|x| x / &mean).collect()
}

fn constructive(cfg: &RandomModelConfig, seed: u64, deterministic: bool, salt: u64) -> MarketModel {
    let mut rng = rng_for(seed, salt);
    let atoms = pick(&mut rng, &cfg.atoms);
    let periods = pick(&mut rng, &cfg.periods);
    let tree = random_tree(&mut rng, atoms, periods);
    let xstar = random_deflator(&mut rng, &tree);
    let k = pick(&mut rng, &cfg.submarkets);
    let subs = (0..k)
        .map(|t| {
            let dim = pick(&mut rng, &cfg.dim);
            let numeraire = random_numeraire(&mut rng, &tree, deterministic);
            martingale_submarket(&mut rng, &tree, &xstar, format!("tau{}", t + 1), dim, numeraire, false)
        })
        .collect();
    MarketModel::new(tree, subs, None).expect("generated model is valid")
}

/// Arbitrage-free by construction (shared deflator across submarkets).
pub fn arbitrage_free_model(cfg: &RandomModelConfig, seed: u64) -> MarketModel {
    constructive(cfg, seed, false, 2)
}

/// Arbitrage-free with numeraires that depend on time only.
pub fn deterministic_numeraire_model(cfg: &RandomModelConfig, seed: u64) -> MarketModel {
    constructive(cfg, seed, true, 3)
}

/// Alternates between free and constructive draws.
pub fn mixed_model(cfg: &RandomModelConfig, seed: u64) -> MarketModel {
    if seed.is_multiple_of(2) {
        random_model(cfg, seed)
    } else {
        arbitrage_free_model(cfg, seed)
    }
}

/// Two one-asset submarkets on a random tree, arbitrage-free.
pub fn two_submarket_model(seed: u64) -> MarketModel {
    let cfg = RandomModelConfig {
        atoms: 2..=4,
        periods: 1..=2,
        submarkets: 2..=2,
        dim: 1..=1,
    };
    constructive(&cfg, seed, false, 4)
}

/// Two one-asset submarkets on a binary tree with distinct child prices at
/// every node, hence each complete on its own.
pub fn complete_binary_pair(seed: u64) -> MarketModel {
    let mut rng = rng_for(seed, 5);
    let periods = rng.gen_range(1..=2);
    let spec = BranchingSpec::Levels(vec![2; periods]);
    let n = 1usize << periods;
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let tree = build_tree(&spec, weights.iter().map(|w| ratio(*w, total)).collect(), NumericMode::Rational)
        .expect("binary tree");
    let xstar = random_deflator(&mut rng, &tree);
    let subs = (0..2)
        .map(|t| {
            let numeraire = random_numeraire(&mut rng, &tree, false);
            martingale_submarket(&mut rng, &tree, &xstar, format!("tau{}", t + 1), 1, numeraire, true)
        })
        .collect();
    MarketModel::new(tree, subs, None).expect("generated model is valid")
}

/// Integer payoffs in `[0, 10]`.
pub fn random_claim(model: &MarketModel, seed: u64) -> Claim {
    let mut rng = rng_for(seed, 6);
    let payoff = (0..model.atom_count()).map(|_| int(rng.gen_range(0..=10))).collect();
    Claim::new(format!("H{seed}"), payoff)
}

/// Node values of a process given at the leaves by backward expectation
/// under the weights `w` (one per atom).
pub fn backward_expectation(tree: &ScenarioTree, w: &[Rational], leaf_values: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); tree.node_count()];
    for (k, leaf) in tree.leaves().iter().enumerate() {
        out[leaf.0] = leaf_values[k].clone();
    }
    for node in tree.nodes().iter().rev() {
        if node.is_leaf() {
            continue;
        }
        let range = tree.atoms_under(node.id);
        let mass: Rational = w[range.clone()].iter().sum();
        let v: Rational = range.map(|k| &w[k] * &leaf_values[k]).sum();
        out[node.id.0] = if mass.is_zero() { Rational::zero() } else { v / mass };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gains::global_gains;

    #[test]
    fn trees_have_requested_atoms() {
        for seed in 0..50 {
            let mut rng = rng_for(seed, 0);
            let atoms = 2 + (seed as usize % 5);
            let t = random_tree(&mut rng, atoms, 1 + (seed as usize % 3));
            assert_eq!(t.atom_count(), atoms);
            assert_eq!(t.horizon(), 1 + (seed as usize % 3));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = RandomModelConfig::small();
        assert_eq!(random_model(&cfg, 7), random_model(&cfg, 7));
        assert_eq!(arbitrage_free_model(&cfg, 7), arbitrage_free_model(&cfg, 7));
    }

    #[test]
    fn constructive_models_are_orthogonal_to_their_deflator() {
        let cfg = RandomModelConfig::small();
        for seed in 0..30 {
            let mut rng = rng_for(seed, 2);
            let atoms = pick(&mut rng, &cfg.atoms);
            let periods = pick(&mut rng, &cfg.periods);
            let tree = random_tree(&mut rng, atoms, periods);
            let xstar = random_deflator(&mut rng, &tree);
            let m = arbitrage_free_model(&cfg, seed);
            assert_eq!(m.tree(), &tree);
            for g in global_gains(&m).vectors {
                let e: Rational = (0..tree.atom_count()).map(|k| &tree.atom_probs()[k] * &xstar[k] * &g[k]).sum();
                assert!(e.is_zero());
            }
        }
    }
}
