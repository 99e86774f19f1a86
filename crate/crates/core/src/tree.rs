//! Finite event trees: atoms, filtration and the physical probability.
//!
//! Nodes are stored in breadth-first order with children in declared order,
//! so the atoms (leaves) below any node form a contiguous index range.

use std::collections::HashMap;
use std::ops::Range;

use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{format_rational, from_f64, to_f64, NumericMode, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    pub time: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    atoms: Range<usize>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("atom `{atom}` has non-positive probability {value}")]
    NonPositiveProbability { atom: String, value: String },
    #[error("atom probabilities sum to {sum}, expected 1")]
    ProbabilitySumMismatch { sum: String },
    #[error("malformed topology: {0}")]
    MalformedTopology(String),
}

/// Explicit node declaration; `parent == None` marks the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchingSpec {
    /// Number of children of every node at each level; the length is the horizon.
    Levels(Vec<usize>),
    /// Node list in any order that names each parent.
    Explicit(Vec<NodeSpec>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree {
    nodes: Vec<Node>,
    leaves: Vec<NodeId>,
    probs: Vec<Rational>,
    horizon: usize,
}

/// Builds and validates a tree. Probabilities are given per atom in canonical
/// (breadth-first) leaf order. In float mode a sum within tolerance of one is
/// accepted and renormalised.
pub fn build_tree(
    spec: &BranchingSpec,
    atom_probs: Vec<Rational>,
    mode: NumericMode,
) -> Result<ScenarioTree, TreeError> {
    let (labels, parents) = match spec {
        BranchingSpec::Levels(levels) => level_topology(levels)?,
        BranchingSpec::Explicit(nodes) => explicit_topology(nodes)?,
    };
    ScenarioTree::from_topology(labels, parents, atom_probs, mode)
}

fn level_topology(levels: &[usize]) -> Result<(Vec<String>, Vec<Option<usize>>), TreeError> {
    if levels.contains(&0) {
        return Err(TreeError::MalformedTopology(
            "branching count must be at least 1".into(),
        ));
    }
    let mut labels = vec!["root".to_string()];
    let mut parents = vec![None];
    let mut frontier = vec![0usize];
    for &b in levels {
        let mut next = Vec::with_capacity(frontier.len() * b);
        for &p in &frontier {
            for k in 0..b {
                let label = if p == 0 {
                    k.to_string()
                } else {
                    format!("{}.{}", labels[p], k)
                };
                labels.push(label);
                parents.push(Some(p));
                next.push(labels.len() - 1);
            }
        }
        frontier = next;
    }
    Ok((labels, parents))
}

fn explicit_topology(nodes: &[NodeSpec]) -> Result<(Vec<String>, Vec<Option<usize>>), TreeError> {
    let mut index = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if index.insert(n.id.as_str(), i).is_some() {
            return Err(TreeError::MalformedTopology(format!("duplicate node id `{}`", n.id)));
        }
    }
    let mut parents = Vec::with_capacity(nodes.len());
    for n in nodes {
        parents.push(match &n.parent {
            None => None,
            Some(p) => Some(*index.get(p.as_str()).ok_or_else(|| {
                TreeError::MalformedTopology(format!("node `{}` names unknown parent `{p}`", n.id))
            })?),
        });
    }
    Ok((nodes.iter().map(|n| n.id.clone()).collect(), parents))
}

impl ScenarioTree {
    fn from_topology(
        labels: Vec<String>,
        parents: Vec<Option<usize>>,
        atom_probs: Vec<Rational>,
        mode: NumericMode,
    ) -> Result<Self, TreeError> {
        let roots: Vec<usize> = (0..labels.len()).filter(|&i| parents[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(TreeError::MalformedTopology(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); labels.len()];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }

        // Breadth-first renumbering; unreachable nodes mean a cycle.
        let mut order = vec![roots[0]];
        let mut depth = vec![0usize];
        let mut head = 0;
        while head < order.len() {
            let cur = order[head];
            let d = depth[head];
            for &c in &children[cur] {
                order.push(c);
                depth.push(d + 1);
            }
            head += 1;
            if order.len() > labels.len() {
                break;
            }
        }
        if order.len() != labels.len() {
            return Err(TreeError::MalformedTopology(
                "node list contains a cycle or disconnected nodes".into(),
            ));
        }
        let mut new_index = vec![0usize; labels.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }

        let mut nodes: Vec<Node> = order
            .iter()
            .zip(&depth)
            .map(|(&old, &time)| Node {
                id: NodeId(new_index[old]),
                label: labels[old].clone(),
                time,
                parent: parents[old].map(|p| NodeId(new_index[p])),
                children: children[old].iter().map(|&c| NodeId(new_index[c])).collect(),
                atoms: 0..0,
            })
            .collect();

        let leaves: Vec<NodeId> = nodes.iter().filter(|n| n.is_leaf()).map(|n| n.id).collect();
        let horizon = nodes[leaves[0].0].time;
        if let Some(bad) = leaves.iter().find(|l| nodes[l.0].time != horizon) {
            return Err(TreeError::MalformedTopology(format!(
                "leaf `{}` ends at step {} but the horizon is {horizon}",
                nodes[bad.0].label, nodes[bad.0].time
            )));
        }

        // Atom ranges bottom-up; BFS order keeps leaves of a subtree contiguous.
        for (k, leaf) in leaves.iter().enumerate() {
            nodes[leaf.0].atoms = k..k + 1;
        }
        for i in (0..nodes.len()).rev() {
            if !nodes[i].is_leaf() {
                let first = nodes[nodes[i].children[0].0].atoms.start;
                let last = nodes[nodes[i].children.last().unwrap().0].atoms.end;
                nodes[i].atoms = first..last;
            }
        }

        if atom_probs.len() != leaves.len() {
            return Err(TreeError::MalformedTopology(format!(
                "{} probabilities given for {} atoms",
                atom_probs.len(),
                leaves.len()
            )));
        }
        for (p, leaf) in atom_probs.iter().zip(&leaves) {
            if !p.is_positive() {
                return Err(TreeError::NonPositiveProbability {
                    atom: nodes[leaf.0].label.clone(),
                    value: format_rational(p),
                });
            }
        }
        let sum: Rational = atom_probs.iter().sum();
        let probs = if sum.is_one() {
            atom_probs
        } else if !mode.is_exact() && mode.approx_eq(&sum, &Rational::one()) {
            atom_probs
                .iter()
                .map(|p| from_f64(to_f64(&(p / &sum))).unwrap_or_else(|| p / &sum))
                .collect()
        } else {
            return Err(TreeError::ProbabilitySumMismatch {
                sum: format_rational(&sum),
            });
        };

        Ok(ScenarioTree {
            nodes,
            leaves,
            probs,
            horizon,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn atom_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn atom_probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn atom_label(&self, atom: usize) -> &str {
        &self.nodes[self.leaves[atom].0].label
    }

    /// Atom indices below (or at) `id`.
    pub fn atoms_under(&self, id: NodeId) -> Range<usize> {
        self.nodes[id.0].atoms.clone()
    }

    pub fn node_probability(&self, id: NodeId) -> Rational {
        self.probs[self.atoms_under(id)].iter().sum()
    }

    pub fn find(&self, label: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.label == label).map(|n| n.id)
    }

    pub fn non_terminal(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| !n.is_leaf())
    }

    /// Root-to-leaf path of an atom.
    pub fn path(&self, atom: usize) -> Vec<NodeId> {
        let mut path = vec![self.leaves[atom]];
        while let Some(p) = self.nodes[path.last().unwrap().0].parent {
            path.push(p);
        }
        path.reverse();
        path
    }

    /// The child of `id` whose subtree contains `atom`.
    pub fn child_towards(&self, id: NodeId, atom: usize) -> Option<NodeId> {
        self.nodes[id.0]
            .children
            .iter()
            .copied()
            .find(|c| self.nodes[c.0].atoms.contains(&atom))
    }

    pub fn is_ancestor_or_self(&self, ancestor: NodeId, node: NodeId) -> bool {
        let a = &self.nodes[ancestor.0].atoms;
        let n = &self.nodes[node.0].atoms;
        self.nodes[ancestor.0].time <= self.nodes[node.0].time
            && a.start <= n.start
            && n.end <= a.end
    }

    /// Expectation of an atom-indexed vector under P conditional on a node.
    pub fn conditional_expectation(&self, id: NodeId, values: &[Rational]) -> Rational {
        let range = self.atoms_under(id);
        let mass: Rational = self.probs[range.clone()].iter().sum();
        let weighted: Rational = range.map(|k| &self.probs[k] * &values[k]).sum();
        weighted / mass
    }

    pub fn expectation(&self, values: &[Rational]) -> Rational {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// A stopping time on the tree: an antichain of nodes met exactly once on
/// every root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StoppingTime {
    nodes: Vec<NodeId>,
}

impl StoppingTime {
    /// Accepts the node set only if it partitions the atoms.
    pub fn new(tree: &ScenarioTree, mut nodes: Vec<NodeId>) -> Option<Self> {
        nodes.sort();
        nodes.dedup();
        let mut hits = vec![0usize; tree.atom_count()];
        for n in &nodes {
            if n.0 >= tree.node_count() {
                return None;
            }
            for k in tree.atoms_under(*n) {
                hits[k] += 1;
            }
        }
        hits.iter().all(|&h| h == 1).then_some(StoppingTime { nodes })
    }

    pub fn constant(tree: &ScenarioTree, time: usize) -> Option<Self> {
        let nodes = tree
            .nodes()
            .iter()
            .filter(|n| n.time == time)
            .map(|n| n.id)
            .collect();
        Self::new(tree, nodes)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// The node at which the stopping time fires on the path of `atom`.
    pub fn node_for_atom(&self, tree: &ScenarioTree, atom: usize) -> NodeId {
        *self
            .nodes
            .iter()
            .find(|n| tree.atoms_under(**n).contains(&atom))
            .expect("stopping time covers every atom")
    }

    /// `self <= other` path by path.
    pub fn precedes(&self, tree: &ScenarioTree, other: &StoppingTime) -> bool {
        (0..tree.atom_count()).all(|k| {
            tree.is_ancestor_or_self(self.node_for_atom(tree, k), other.node_for_atom(tree, k))
        })
    }
}

fn random_antichain_below(tree: &ScenarioTree, start: NodeId, rng: &mut ChaCha8Rng, out: &mut Vec<NodeId>) {
    let node = tree.node(start);
    if node.is_leaf() || rng.gen_bool(0.4) {
        out.push(start);
    } else {
        for &c in &node.children {
            random_antichain_below(tree, c, rng, out);
        }
    }
}

/// Deterministic random sample of stopping times.
pub fn sample_stopping_times(tree: &ScenarioTree, count: usize, seed: u64) -> Vec<StoppingTime> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut nodes = Vec::new();
            random_antichain_below(tree, tree.root(), &mut rng, &mut nodes);
            StoppingTime::new(tree, nodes).expect("sampled antichain covers all atoms")
        })
        .collect()
}

/// A random stopping time `>= base`, obtained by refining each node of `base`.
pub fn sample_later_stopping_time(tree: &ScenarioTree, base: &StoppingTime, seed: u64) -> StoppingTime {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::new();
    for &n in base.nodes() {
        random_antichain_below(tree, n, &mut rng, &mut nodes);
    }
    StoppingTime::new(tree, nodes).expect("refinement covers all atoms")
}
