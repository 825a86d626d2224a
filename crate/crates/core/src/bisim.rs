//! Coarsest bisimulation by signature refinement.
//!
//! Every round replaces each state by the pair (current block, observation
//! with successors replaced by their blocks) and regroups. Weighted
//! observations are summed per block in the monoid while being re-targeted,
//! so the same loop decides weighted bisimilarity exactly.

use std::collections::HashMap;
use std::hash::Hash;

use crate::behaviors::{FiniteCoalgebra, Observation, PointedCoalgebra, StateId};
use crate::error::Result;
use crate::scalar::Scalar;

/// A partition of `0..n` into blocks numbered by their least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<StateId>>,
}

impl Partition {
    /// Groups states by key. Blocks are numbered in order of their least member.
    pub fn from_keys<K: Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut block_of = Vec::new();
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        for (s, k) in keys.into_iter().enumerate() {
            let next = blocks.len();
            let b = *ids.entry(k).or_insert(next);
            if b == next {
                blocks.push(Vec::new());
            }
            blocks[b].push(s);
            block_of.push(b);
        }
        Partition { block_of, blocks }
    }

    pub fn block_of(&self, s: StateId) -> usize {
        self.block_of[s]
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn same_block(&self, s: StateId, t: StateId) -> bool {
        self.block_of[s] == self.block_of[t]
    }
}

/// One-step behaviour of `s` seen through the current partition.
fn signature<S: Scalar>(c: &FiniteCoalgebra<S>, p: &Partition, s: StateId) -> Observation<S, usize> {
    c.obs[s].map_targets(&c.kind, |t| p.block_of(*t))
}

/// The largest bisimulation on `c`, as a partition of its states.
pub fn coarsest_bisimulation<S: Scalar>(c: &FiniteCoalgebra<S>) -> Partition {
    let mut p = Partition::from_keys(std::iter::repeat(()).take(c.len()));
    loop {
        let refined = Partition::from_keys((0..c.len()).map(|s| (p.block_of(s), signature(c, &p, s))));
        if refined.len() == p.len() {
            return refined;
        }
        p = refined;
    }
}

/// Whether the roots of `p` and `q` are bisimilar.
pub fn bisimilar<S: Scalar>(p: &PointedCoalgebra<S>, q: &PointedCoalgebra<S>) -> Result<bool> {
    let (u, off) = FiniteCoalgebra::disjoint_union(p.kind(), &[&p.system, &q.system])?;
    let part = coarsest_bisimulation(&u);
    Ok(part.same_block(p.root + off[0], q.root + off[1]))
}

/// The quotient of `c` by `p`. Each block is represented by its least member,
/// whose name it keeps.
pub fn quotient<S: Scalar>(c: &FiniteCoalgebra<S>, p: &Partition) -> FiniteCoalgebra<S> {
    let states = p.blocks().iter().map(|b| c.states[b[0]].clone()).collect();
    let obs = p.blocks().iter().map(|b| signature(c, p, b[0])).collect();
    FiniteCoalgebra::new(c.kind.clone(), states, obs)
}

/// The smallest system bisimilar to `p`: reachable part, quotiented by the
/// coarsest bisimulation, states in breadth-first order from the root.
pub fn minimize<S: Scalar>(p: &PointedCoalgebra<S>) -> PointedCoalgebra<S> {
    let r = p.reachable();
    let part = coarsest_bisimulation(&r.system);
    let q = quotient(&r.system, &part);
    q.reachable(part.block_of(r.root)).expect("root block exists")
}
