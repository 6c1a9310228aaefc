//! Exact expected number of moves to global satisfaction on small instances.
//!
//! Enumerates every configuration with the requested agent counts, builds
//! the Markov chain of the uniform-unhappy-agent / uniform-vacancy move rule
//! (all-satisfied configurations absorb) and solves for expected hitting
//! times. The uniform initial distribution matches `place_agents`.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::markov::AbsorbingChain;
use crate::model::{satisfied_at, Cell, Configuration, SchellingParams};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Maximum number of configurations to enumerate.
    pub state_cap: usize,
    /// Maximum transient states for the exact rational solve; larger chains
    /// are solved in f64 only.
    pub exact_cap: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            state_cap: 1_000_000,
            exact_cap: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpectedMoves {
    /// Every initial configuration reaches satisfaction almost surely.
    Finite { mean: f64, exact: Option<BigRational> },
    /// Some, but not all, initial configurations can fail to reach
    /// satisfaction, so the uniform average is infinite.
    Unbounded { finite_fraction: f64 },
    /// No initial configuration reaches satisfaction.
    Unsatisfiable,
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub states: Vec<Configuration>,
    pub per_state: Vec<Option<f64>>,
    pub per_state_exact: Option<Vec<Option<BigRational>>>,
    pub expected: ExpectedMoves,
    index: HashMap<u64, usize>,
}

impl OracleSolution {
    /// Expected moves from a given start (`None` if infinite or not a state).
    pub fn expected_from(&self, config: &Configuration) -> Option<f64> {
        let key = encode(config)?;
        self.index.get(&key).and_then(|&s| self.per_state[s])
    }

    pub fn exact_from(&self, config: &Configuration) -> Option<BigRational> {
        let key = encode(config)?;
        let s = *self.index.get(&key)?;
        self.per_state_exact.as_ref()?[s].clone()
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of configurations with `a` A and `b` B agents on `n` vertices.
pub fn state_space_size(n: usize, a: usize, b: usize) -> u128 {
    binomial(n, a).saturating_mul(binomial(n.saturating_sub(a), b))
}

fn encode(config: &Configuration) -> Option<u64> {
    if config.len() > 40 {
        return None;
    }
    Some(config.cells().iter().rev().fold(0u64, |acc, &c| acc * 3 + c as u64))
}

fn enumerate(n: usize, a: usize, b: usize) -> Vec<Configuration> {
    fn rec(v: usize, a: usize, b: usize, cells: &mut Vec<Cell>, out: &mut Vec<Configuration>) {
        let n = cells.len();
        if v == n {
            out.push(Configuration::new(cells.clone()));
            return;
        }
        let left = n - v;
        if left > a + b {
            cells[v] = Cell::Vacant;
            rec(v + 1, a, b, cells, out);
        }
        if a > 0 {
            cells[v] = Cell::A;
            rec(v + 1, a - 1, b, cells, out);
        }
        if b > 0 {
            cells[v] = Cell::B;
            rec(v + 1, a, b - 1, cells, out);
        }
        cells[v] = Cell::Vacant;
    }
    let mut out = Vec::new();
    rec(0, a, b, &mut vec![Cell::Vacant; n], &mut out);
    out
}

pub fn exact_expected_moves(topo: &Topology, params: &SchellingParams) -> Result<OracleSolution> {
    exact_expected_moves_with(topo, params, &OracleOptions::default())
}

pub fn exact_expected_moves_with(
    topo: &Topology,
    params: &SchellingParams,
    options: &OracleOptions,
) -> Result<OracleSolution> {
    let n = topo.vertex_count();
    if params.agents() == 0 || params.agents() > n {
        return Err(Error::invalid(format!("{} agents on {n} vertices", params.agents())));
    }
    if n > 40 {
        return Err(Error::TooLarge {
            what: "oracle vertex count",
            requested: n as u128,
            cap: 40,
        });
    }
    let size = state_space_size(n, params.count_a, params.count_b);
    if size > options.state_cap as u128 {
        return Err(Error::TooLarge {
            what: "oracle state space",
            requested: size,
            cap: options.state_cap as u128,
        });
    }
    let states = enumerate(n, params.count_a, params.count_b);
    let index: HashMap<u64, usize> = states
        .iter()
        .enumerate()
        .map(|(i, c)| (encode(c).expect("n <= 40"), i))
        .collect();

    let tau = params.tau;
    let mut chain = AbsorbingChain::new();
    let mut unhappy = Vec::new();
    let mut vacant = Vec::new();
    let mut next = HashMap::new();
    for config in &states {
        unhappy.clear();
        vacant.clear();
        for v in 0..n {
            match config.get(v) {
                Cell::Vacant => vacant.push(v),
                _ if !satisfied_at(config, topo, v, tau) => unhappy.push(v),
                _ => {}
            }
        }
        if unhappy.is_empty() {
            chain.add_state(true, Vec::new());
            continue;
        }
        next.clear();
        let mut work = config.clone();
        for &from in &unhappy {
            let cell = config.get(from);
            for &to in &vacant {
                work.set(from, Cell::Vacant);
                work.set(to, cell);
                *next.entry(index[&encode(&work).unwrap()]).or_insert(0u64) += 1;
                work.set(to, Cell::Vacant);
                work.set(from, cell);
            }
        }
        let mut transitions: Vec<(usize, u64)> = next.iter().map(|(&t, &w)| (t, w)).collect();
        transitions.sort_unstable();
        chain.add_state(false, transitions);
    }

    let per_state = chain.hitting_times()?;
    let transient = (0..chain.len())
        .filter(|&s| !chain.is_absorbing(s) && per_state[s].is_some())
        .count();
    let per_state_exact = if transient <= options.exact_cap {
        Some(chain.hitting_times_exact(options.exact_cap)?)
    } else {
        None
    };

    let finite_count = per_state.iter().filter(|e| e.is_some()).count();
    let expected = if finite_count == 0 {
        ExpectedMoves::Unsatisfiable
    } else if finite_count < states.len() {
        ExpectedMoves::Unbounded {
            finite_fraction: finite_count as f64 / states.len() as f64,
        }
    } else {
        let exact = per_state_exact.as_ref().map(|values| {
            let sum: BigRational = values.iter().map(|v| v.clone().unwrap()).sum();
            sum / BigRational::from_integer(states.len().into())
        });
        let mean = match &exact {
            Some(e) => e.to_f64().unwrap_or(f64::NAN),
            None => per_state.iter().map(|e| e.unwrap()).sum::<f64>() / states.len() as f64,
        };
        ExpectedMoves::Finite { mean, exact }
    };

    Ok(OracleSolution {
        states,
        per_state,
        per_state_exact,
        expected,
        index,
    })
}
