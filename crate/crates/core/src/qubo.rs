//! QUBO encoding of the cross-type edge cost.
//!
//! Each vertex v uses two bits, `hi = 2v` and `lo = 2v + 1`:
//! vacant = 00, A = 01, B = 11; the pattern 10 is invalid. With
//! R(v) ∈ {0, +1, −1} for {vacant, A, B} the cost
//! `−Σ_{uv ∈ E} R(u)R(v)(R(u) − R(v))²` is 4 per cross-type occupied edge,
//! which on valid encodings equals the quadratic form
//! `4·(lo_u·hi_v + hi_u·lo_v − 2·hi_u·hi_v)` per edge.
//!
//! Validity penalties, all scaled by λ:
//! `Σ_v (hi_v − hi_v·lo_v)` (forbids 10), `(Σ lo − (a + b))²` and
//! `(Σ hi − b)²` (agent totals). The edge form can reach −8 per edge on
//! invalid bitstrings and at most 4 per edge on valid ones, so
//! λ = 1 + 12·|E| makes every invalid bitstring cost more than any valid one.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cell, Configuration, SchellingParams};
use crate::topology::Topology;

/// Default vertex cap for `encode_qubo`.
pub const DEFAULT_QUBO_VERTEX_CAP: usize = 2_000;
/// Largest problem `brute_force_minimize` accepts.
pub const BRUTE_FORCE_QUBIT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuboTerm {
    pub i: usize,
    pub j: usize,
    pub weight: i64,
}

impl Serialize for QuboTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.i, self.j, self.weight).serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuboTerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (i, j, weight) = <(usize, usize, i64)>::deserialize(d)?;
        Ok(QuboTerm { i, j, weight })
    }
}

/// `E(x) = offset + Σ weight·x_i·x_j` over terms with `i ≤ j`; a term with
/// `i == j` is linear since `x² = x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuboProblem {
    pub num_qubits: usize,
    pub offset: i64,
    pub terms: Vec<QuboTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingReport {
    pub num_qubits: usize,
    pub term_count: usize,
    pub penalty_scale: i64,
    /// Construction only; excludes serialization.
    pub encode_wall_time: Duration,
}

#[inline]
fn hi(v: usize) -> usize {
    2 * v
}

#[inline]
fn lo(v: usize) -> usize {
    2 * v + 1
}

/// Direct cost: 4 per edge joining an A and a B.
pub fn build_cost_function(topo: &Topology, config: &Configuration) -> Result<i64> {
    if config.len() != topo.vertex_count() {
        return Err(Error::invalid(format!(
            "configuration has {} cells for {} vertices",
            config.len(),
            topo.vertex_count()
        )));
    }
    let r = |v: usize| -> i64 {
        match config.get(v) {
            Cell::Vacant => 0,
            Cell::A => 1,
            Cell::B => -1,
        }
    };
    Ok(topo
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let (x, y) = (r(u), r(v));
            -x * y * (x - y) * (x - y)
        })
        .sum())
}

/// Bits of a configuration under the two-bit mapping.
pub fn encode_configuration(config: &Configuration) -> Vec<bool> {
    let mut bits = vec![false; 2 * config.len()];
    for (v, &c) in config.cells().iter().enumerate() {
        let (h, l) = match c {
            Cell::Vacant => (false, false),
            Cell::A => (false, true),
            Cell::B => (true, true),
        };
        bits[hi(v)] = h;
        bits[lo(v)] = l;
    }
    bits
}

/// Inverse of `encode_configuration`; `None` if any vertex holds 10.
pub fn decode_bits(bits: &[bool]) -> Option<Configuration> {
    if !bits.len().is_multiple_of(2) {
        return None;
    }
    let cells = bits
        .chunks(2)
        .map(|pair| match (pair[0], pair[1]) {
            (false, false) => Some(Cell::Vacant),
            (false, true) => Some(Cell::A),
            (true, true) => Some(Cell::B),
            (true, false) => None,
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Configuration::new(cells))
}

struct Builder {
    terms: BTreeMap<(usize, usize), i64>,
    offset: i64,
}

impl Builder {
    fn add(&mut self, i: usize, j: usize, w: i64) {
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.terms.entry(key).or_insert(0) += w;
    }

    /// Add `scale·(Σ_{x ∈ bits} x − target)²`.
    fn add_square(&mut self, bits: &[usize], target: i64, scale: i64) {
        for (k, &x) in bits.iter().enumerate() {
            self.add(x, x, scale * (1 - 2 * target));
            for &y in &bits[k + 1..] {
                self.add(x, y, 2 * scale);
            }
        }
        self.offset += scale * target * target;
    }
}

/// Penalty scale used by `encode_qubo` for a graph with `edges` edges.
pub fn penalty_scale(edges: usize) -> i64 {
    1 + 12 * edges as i64
}

pub fn encode_qubo(topo: &Topology, params: &SchellingParams) -> Result<(QuboProblem, EncodingReport)> {
    encode_qubo_capped(topo, params, DEFAULT_QUBO_VERTEX_CAP)
}

pub fn encode_qubo_capped(
    topo: &Topology,
    params: &SchellingParams,
    vertex_cap: usize,
) -> Result<(QuboProblem, EncodingReport)> {
    let n = topo.vertex_count();
    if n > vertex_cap {
        return Err(Error::TooLarge {
            what: "QUBO vertex count",
            requested: n as u128,
            cap: vertex_cap as u128,
        });
    }
    params.validate(n)?;
    let start = Instant::now();
    let lambda = penalty_scale(topo.edge_count());
    let mut b = Builder {
        terms: BTreeMap::new(),
        offset: 0,
    };
    for (u, v) in topo.edges() {
        b.add(lo(u), hi(v), 4);
        b.add(hi(u), lo(v), 4);
        b.add(hi(u), hi(v), -8);
    }
    for v in 0..n {
        b.add(hi(v), hi(v), lambda);
        b.add(hi(v), lo(v), -lambda);
    }
    let los: Vec<usize> = (0..n).map(lo).collect();
    let his: Vec<usize> = (0..n).map(hi).collect();
    b.add_square(&los, params.agents() as i64, lambda);
    b.add_square(&his, params.count_b as i64, lambda);
    let terms: Vec<QuboTerm> = b
        .terms
        .into_iter()
        .filter(|&(_, w)| w != 0)
        .map(|((i, j), weight)| QuboTerm { i, j, weight })
        .collect();
    let qubo = QuboProblem {
        num_qubits: 2 * n,
        offset: b.offset,
        terms,
    };
    let report = EncodingReport {
        num_qubits: qubo.num_qubits,
        term_count: qubo.terms.len(),
        penalty_scale: lambda,
        encode_wall_time: start.elapsed(),
    };
    Ok((qubo, report))
}

impl QuboProblem {
    pub fn energy(&self, bits: &[bool]) -> i64 {
        assert_eq!(bits.len(), self.num_qubits, "bitstring length");
        self.offset
            + self
                .terms
                .iter()
                .filter(|t| bits[t.i] && bits[t.j])
                .map(|t| t.weight)
                .sum::<i64>()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("QUBO serializes")
    }
}

/// Exhaustive minimum. Ties resolve to the smallest bitstring read as an
/// integer with qubit k as bit k.
pub fn brute_force_minimize(qubo: &QuboProblem) -> Result<(Vec<bool>, i64)> {
    let n = qubo.num_qubits;
    if n > BRUTE_FORCE_QUBIT_CAP {
        return Err(Error::TooLarge {
            what: "brute-force qubits",
            requested: n as u128,
            cap: BRUTE_FORCE_QUBIT_CAP as u128,
        });
    }
    // Gray-code walk: flipping qubit k changes the energy by
    // ±(w_kk + Σ_{j≠k} w_kj·x_j).
    let mut linear = vec![0i64; n];
    let mut coupled: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for t in &qubo.terms {
        if t.i == t.j {
            linear[t.i] += t.weight;
        } else {
            coupled[t.i].push((t.j, t.weight));
            coupled[t.j].push((t.i, t.weight));
        }
    }
    let mut x = vec![false; n];
    let mut energy = qubo.offset;
    let mut best = (0u64, energy);
    for step in 1u64..(1u64 << n) {
        let k = step.trailing_zeros() as usize;
        let field = linear[k] + coupled[k].iter().filter(|&&(j, _)| x[j]).map(|&(_, w)| w).sum::<i64>();
        x[k] = !x[k];
        energy += if x[k] { field } else { -field };
        let code = step ^ (step >> 1);
        if energy < best.1 || (energy == best.1 && code < best.0) {
            best = (code, energy);
        }
    }
    let bits = (0..n).map(|k| best.0 >> k & 1 == 1).collect();
    Ok((bits, best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Threshold;
    use crate::topology::{build_clique, build_grid, build_lollipop, build_path, Topology};

    fn params(a: usize, b: usize) -> SchellingParams {
        SchellingParams::new(a, b, Threshold::new(1, 2).unwrap(), 1)
    }

    fn all_bits(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u64..1 << n).map(move |m| (0..n).map(|k| m >> k & 1 == 1).collect())
    }

    #[test]
    fn direct_cost_examples() {
        let grid = build_grid(2, 2).unwrap();
        assert_eq!(build_cost_function(&grid, &"AAAA".parse().unwrap()).unwrap(), 0);
        // Row-major 2x2: AB / BA, every edge cross-type.
        assert_eq!(build_cost_function(&grid, &"ABBA".parse().unwrap()).unwrap(), 16);
        assert_eq!(build_cost_function(&grid, &"A...".parse().unwrap()).unwrap(), 0);
    }

    #[test]
    fn qubit_counts() {
        let (q, report) = encode_qubo(&build_grid(3, 3).unwrap(), &params(4, 3)).unwrap();
        assert_eq!(q.num_qubits, 18);
        assert_eq!(report.term_count, q.terms.len());
        let (q, _) = encode_qubo(&build_grid(4, 4).unwrap(), &params(6, 6)).unwrap();
        assert_eq!(q.num_qubits, 32);
    }

    #[test]
    fn terms_sorted_and_deduplicated() {
        let (q, _) = encode_qubo(&build_lollipop(3, 3).unwrap(), &params(2, 2)).unwrap();
        for w in q.terms.windows(2) {
            assert!((w[0].i, w[0].j) < (w[1].i, w[1].j));
        }
        assert!(q.terms.iter().all(|t| t.i <= t.j && t.weight != 0));
    }

    #[test]
    fn path_three_energy_matches_cost() {
        let topo = build_path(3).unwrap();
        let (q, _) = encode_qubo(&topo, &params(1, 1)).unwrap();
        let mut valid = 0;
        for bits in all_bits(6) {
            let energy = q.energy(&bits);
            match decode_bits(&bits).filter(|c| c.counts() == (1, 1)) {
                Some(config) => {
                    valid += 1;
                    assert_eq!(energy, build_cost_function(&topo, &config).unwrap());
                }
                None => assert!(energy > 4 * topo.edge_count() as i64, "{bits:?} -> {energy}"),
            }
        }
        assert_eq!(valid, 6);
    }

    #[test]
    fn path_two_minimum_is_valid() {
        let (q, _) = encode_qubo(&build_path(2).unwrap(), &params(1, 1)).unwrap();
        let (bits, energy) = brute_force_minimize(&q).unwrap();
        let config = decode_bits(&bits).unwrap();
        assert_eq!(config.counts(), (1, 1));
        assert_eq!(energy, 4);
    }

    #[test]
    fn clique_three_minimum() {
        let topo = build_clique(3).unwrap();
        let (q, _) = encode_qubo(&topo, &params(2, 1)).unwrap();
        let (bits, energy) = brute_force_minimize(&q).unwrap();
        assert_eq!(energy, 8);
        assert_eq!(decode_bits(&bits).unwrap().counts(), (2, 1));
    }

    #[test]
    fn zero_qubo() {
        let q = QuboProblem {
            num_qubits: 4,
            offset: 0,
            terms: vec![],
        };
        assert_eq!(brute_force_minimize(&q).unwrap(), (vec![false; 4], 0));
    }

    #[test]
    fn brute_force_matches_naive_minimum() {
        let topo = Topology::from_edges(
            crate::topology::TopologyKind::General,
            4,
            &[(0, 1), (1, 2), (2, 3), (0, 2)],
        )
        .unwrap();
        let (q, _) = encode_qubo(&topo, &params(2, 1)).unwrap();
        let naive = all_bits(8).map(|b| q.energy(&b)).min().unwrap();
        assert_eq!(brute_force_minimize(&q).unwrap().1, naive);
    }

    #[test]
    fn json_shape() {
        let (q, _) = encode_qubo(&build_path(2).unwrap(), &params(1, 0)).unwrap();
        let json = q.to_json();
        assert!(json.starts_with(r#"{"num_qubits":4,"offset":"#), "{json}");
        let back: QuboProblem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn cap_is_enforced() {
        let err = encode_qubo_capped(&build_path(10).unwrap(), &params(1, 1), 5).unwrap_err();
        assert!(err.is_resource_cap());
        let big = QuboProblem {
            num_qubits: 26,
            offset: 0,
            terms: vec![],
        };
        assert!(brute_force_minimize(&big).unwrap_err().is_resource_cap());
    }
}
