//! Random-walk baselines: hypercube hitting time and the welded-tree
//! query model.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};
use crate::topology::{Topology, WeldedTreeSpec};

/// Largest hypercube dimension supported (one u64 per walker state).
pub const MAX_HYPERCUBE_DIMENSION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WalkOutcome {
    pub steps_or_queries: u64,
    pub found: bool,
    pub seed: u64,
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 || n > MAX_HYPERCUBE_DIMENSION {
        return Err(Error::invalid(format!(
            "hypercube dimension must be in 1..={MAX_HYPERCUBE_DIMENSION}, got {n}"
        )));
    }
    Ok(())
}

/// Walk from 0ⁿ flipping one uniform bit per step until 1ⁿ.
pub fn hypercube_hitting_simulate(n: usize, seed: u64, max_steps: u64) -> Result<WalkOutcome> {
    check_dimension(n)?;
    let mut rng = rng_from_seed(seed);
    Ok(hypercube_walk(n, &mut rng, max_steps, seed))
}

pub(crate) fn hypercube_walk(n: usize, rng: &mut SimRng, max_steps: u64, seed: u64) -> WalkOutcome {
    let target = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut state = 0u64;
    let mut steps = 0;
    while state != target {
        if steps >= max_steps {
            return WalkOutcome {
                steps_or_queries: steps,
                found: false,
                seed,
            };
        }
        state ^= 1u64 << rng.random_range(0..n);
        steps += 1;
    }
    WalkOutcome {
        steps_or_queries: steps,
        found: true,
        seed,
    }
}

/// Exact expected hitting time from 0ⁿ to 1ⁿ.
///
/// The walk only depends on the number k of set bits: k → k+1 with
/// probability (n−k)/n and k → k−1 otherwise. The resulting tridiagonal
/// system `n·E_k − k·E_{k−1} − (n−k)·E_{k+1} = n`, `E_n = 0`, is solved by
/// forward elimination in exact arithmetic.
pub fn hypercube_hitting_exact(n: usize) -> Result<BigRational> {
    check_dimension(n)?;
    let int = |x: usize| BigRational::from_integer(BigInt::from(x));
    // Row k: sub·E_{k−1} + diag·E_k + sup·E_{k+1} = rhs, for k in 0..n.
    let mut sup_prime: Vec<BigRational> = Vec::with_capacity(n);
    let mut rhs_prime: Vec<BigRational> = Vec::with_capacity(n);
    for k in 0..n {
        let sub = -int(k);
        let diag = int(n);
        let sup = -int(n - k);
        let rhs = int(n);
        let (denominator, rhs) = if k == 0 {
            (diag, rhs)
        } else {
            (diag - &sub * &sup_prime[k - 1], rhs - &sub * &rhs_prime[k - 1])
        };
        sup_prime.push(sup / &denominator);
        rhs_prime.push(rhs / denominator);
    }
    // Back substitution with E_n = 0.
    let mut next = BigRational::zero();
    for k in (0..n).rev() {
        next = &rhs_prime[k] - &sup_prime[k] * next;
    }
    Ok(next)
}

/// Vertex label handed out by a query oracle.
pub type Label = u64;

/// Query access to a graph: adjacency and exit test by label, nothing else.
pub trait QueryOracle {
    fn neighbors(&mut self, v: Label) -> Vec<Label>;
    fn is_exit(&mut self, v: Label) -> bool;
}

/// Welded tree behind opaque random labels.
pub struct WeldedTreeOracle {
    topo: Topology,
    labels: Vec<Label>,
    vertex_of: HashMap<Label, usize>,
    exit: usize,
    entrance: Label,
}

impl WeldedTreeOracle {
    pub fn new(topo: Topology, spec: &WeldedTreeSpec, label_seed: u64) -> Self {
        let mut rng = rng_from_seed(label_seed);
        let mut vertex_of = HashMap::with_capacity(topo.vertex_count());
        let mut labels = Vec::with_capacity(topo.vertex_count());
        for v in 0..topo.vertex_count() {
            let label = loop {
                let l: u64 = rng.random();
                if !vertex_of.contains_key(&l) {
                    break l;
                }
            };
            vertex_of.insert(label, v);
            labels.push(label);
        }
        WeldedTreeOracle {
            entrance: labels[spec.entrance],
            topo,
            labels,
            vertex_of,
            exit: spec.exit,
        }
    }

    pub fn entrance(&self) -> Label {
        self.entrance
    }

    fn vertex(&self, v: Label) -> usize {
        *self.vertex_of.get(&v).expect("label issued by this oracle")
    }
}

impl QueryOracle for WeldedTreeOracle {
    fn neighbors(&mut self, v: Label) -> Vec<Label> {
        let u = self.vertex(v);
        self.topo.neighbors(u).iter().map(|&w| self.labels[w]).collect()
    }

    fn is_exit(&mut self, v: Label) -> bool {
        self.vertex(v) == self.exit
    }
}

/// Simple random walk using only the two oracles. Every oracle call counts
/// as one query: at each visited vertex the walker asks whether it is the
/// exit and, if not, asks for its neighbors and steps to one uniformly.
pub fn classical_walk<O: QueryOracle>(
    oracle: &mut O,
    entrance: Label,
    rng: &mut SimRng,
    max_queries: u64,
) -> (bool, u64) {
    let mut v = entrance;
    let mut queries = 0;
    loop {
        if queries >= max_queries {
            return (false, queries);
        }
        queries += 1;
        if oracle.is_exit(v) {
            return (true, queries);
        }
        if queries >= max_queries {
            return (false, queries);
        }
        queries += 1;
        let next = oracle.neighbors(v);
        if next.is_empty() {
            return (false, queries);
        }
        v = next[rng.random_range(0..next.len())];
    }
}

/// Build the welded tree of `height` from `seed` (weld and labels) and run
/// the classical walk from the entrance.
pub fn welded_tree_classical_walk(height: usize, seed: u64, max_queries: u64) -> Result<WalkOutcome> {
    let (topo, spec) = crate::topology::build_welded_tree(height, seed)?;
    let mut oracle = WeldedTreeOracle::new(topo, &spec, crate::rng::derive_seed(seed, &[1]));
    let mut rng = rng_from_seed(crate::rng::derive_seed(seed, &[2]));
    let entrance = oracle.entrance();
    let (found, queries) = classical_walk(&mut oracle, entrance, &mut rng, max_queries);
    Ok(WalkOutcome {
        steps_or_queries: queries,
        found,
        seed,
    })
}

/// `E(n)` as an `f64`.
pub fn hypercube_exact_f64(n: usize) -> Result<f64> {
    use num_traits::ToPrimitive;
    Ok(hypercube_hitting_exact(n)?.to_f64().unwrap_or(f64::INFINITY))
}
