//! Shared Schelling semantics: agent types, the rational threshold, the
//! satisfaction predicate and the relocation move. Every engine in the crate
//! is defined against these functions.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentType {
    A,
    B,
}

impl AgentType {
    pub fn other(self) -> AgentType {
        match self {
            AgentType::A => AgentType::B,
            AgentType::B => AgentType::A,
        }
    }
}

/// Contents of one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(u8)]
pub enum Cell {
    #[default]
    Vacant,
    A,
    B,
}

impl Cell {
    #[inline]
    pub fn agent(self) -> Option<AgentType> {
        match self {
            Cell::Vacant => None,
            Cell::A => Some(AgentType::A),
            Cell::B => Some(AgentType::B),
        }
    }

    #[inline]
    pub fn is_occupied(self) -> bool {
        self != Cell::Vacant
    }

    pub fn to_char(self) -> char {
        match self {
            Cell::Vacant => '.',
            Cell::A => 'A',
            Cell::B => 'B',
        }
    }
}

impl From<AgentType> for Cell {
    fn from(t: AgentType) -> Cell {
        match t {
            AgentType::A => Cell::A,
            AgentType::B => Cell::B,
        }
    }
}

/// Satisfaction threshold `p/q`, compared in integer arithmetic only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Threshold {
    p: u32,
    q: u32,
}

impl Threshold {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("threshold denominator must be positive"));
        }
        if p > q {
            return Err(Error::invalid(format!("threshold {p}/{q} exceeds 1")));
        }
        Ok(Threshold { p, q })
    }

    pub fn numerator(&self) -> u32 {
        self.p
    }

    pub fn denominator(&self) -> u32 {
        self.q
    }

    /// `same / occupied >= p/q`, with an empty neighborhood counting as
    /// satisfied.
    #[inline]
    pub fn satisfied(&self, same: u64, occupied: u64) -> bool {
        u64::from(self.q) * same >= u64::from(self.p) * occupied
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.p) / f64::from(self.q)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Threshold {
    type Err = Error;

    /// Accepts only `P/Q` literals.
    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s
            .trim()
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("threshold must be written P/Q, got {s:?}")))?;
        let p = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        Threshold::new(p, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveRule {
    /// Uniform unhappy agent to a uniform vacancy anywhere in the graph.
    #[default]
    UniformVacancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchellingParams {
    pub count_a: usize,
    pub count_b: usize,
    pub tau: Threshold,
    pub max_steps: u64,
    pub move_rule: MoveRule,
}

impl SchellingParams {
    pub fn new(count_a: usize, count_b: usize, tau: Threshold, max_steps: u64) -> Self {
        SchellingParams {
            count_a,
            count_b,
            tau,
            max_steps,
            move_rule: MoveRule::UniformVacancy,
        }
    }

    pub fn agents(&self) -> usize {
        self.count_a + self.count_b
    }

    pub fn validate(&self, vertex_count: usize) -> Result<()> {
        if self.agents() == 0 {
            return Err(Error::invalid("at least one agent is required"));
        }
        if self.agents() > vertex_count {
            return Err(Error::invalid(format!(
                "{} agents do not fit on {vertex_count} vertices",
                self.agents()
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be positive"));
        }
        Ok(())
    }
}

/// Assignment of vertices to {A, B, vacant}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    cells: Vec<Cell>,
}

impl Configuration {
    pub fn new(cells: Vec<Cell>) -> Self {
        Configuration { cells }
    }

    pub fn empty(n: usize) -> Self {
        Configuration {
            cells: vec![Cell::Vacant; n],
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn get(&self, v: usize) -> Cell {
        self.cells[v]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub(crate) fn set(&mut self, v: usize, cell: Cell) {
        self.cells[v] = cell;
    }

    /// `(count_a, count_b)`.
    pub fn counts(&self) -> (usize, usize) {
        self.cells.iter().fold((0, 0), |(a, b), c| match c {
            Cell::A => (a + 1, b),
            Cell::B => (a, b + 1),
            Cell::Vacant => (a, b),
        })
    }

    pub fn vacancies(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_occupied())
            .map(|(v, _)| v)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cells.iter().try_for_each(|c| write!(f, "{}", c.to_char()))
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                'A' => Ok(Cell::A),
                'B' => Ok(Cell::B),
                '.' => Ok(Cell::Vacant),
                other => Err(Error::Parse(format!("unexpected cell {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Configuration::new)
    }
}

/// Same-type and occupied neighbor counts of an occupied vertex.
#[inline]
pub(crate) fn neighbor_tally(config: &Configuration, topo: &Topology, v: usize) -> (u64, u64) {
    let me = config.get(v);
    let mut same = 0;
    let mut occupied = 0;
    for &u in topo.neighbors(v) {
        let c = config.get(u);
        if c.is_occupied() {
            occupied += 1;
            if c == me {
                same += 1;
            }
        }
    }
    (same, occupied)
}

#[inline]
pub(crate) fn satisfied_at(config: &Configuration, topo: &Topology, v: usize, tau: Threshold) -> bool {
    let (same, occupied) = neighbor_tally(config, topo, v);
    tau.satisfied(same, occupied)
}

/// Whether the agent at `v` has at least a `tau` fraction of same-type
/// agents among its occupied neighbors. Vacant neighbors are ignored.
pub fn is_satisfied(config: &Configuration, topo: &Topology, v: usize, tau: Threshold) -> Result<bool> {
    if !config.get(v).is_occupied() {
        return Err(Error::Contract(format!("vertex {v} is vacant")));
    }
    Ok(satisfied_at(config, topo, v, tau))
}

/// Full scan: number of occupied vertices that are not satisfied.
pub fn count_unhappy(config: &Configuration, topo: &Topology, tau: Threshold) -> usize {
    (0..config.len())
        .filter(|&v| config.get(v).is_occupied() && !satisfied_at(config, topo, v, tau))
        .count()
}

pub fn apply_move(config: &mut Configuration, from: usize, to: usize) -> Result<()> {
    let n = config.len();
    if from >= n || to >= n {
        return Err(Error::Contract(format!("move {from}->{to} out of range")));
    }
    let agent = config.get(from);
    if !agent.is_occupied() {
        return Err(Error::Contract(format!("move source {from} is vacant")));
    }
    if config.get(to).is_occupied() {
        return Err(Error::Contract(format!("move target {to} is occupied")));
    }
    config.set(from, Cell::Vacant);
    config.set(to, agent);
    Ok(())
}

/// Uniformly random placement of `count_a` A and `count_b` B agents on
/// distinct vertices of an `n`-vertex graph.
///
/// Consumes exactly `count_a + count_b` draws (a partial Fisher-Yates
/// shuffle), so every configuration with the right counts is equally likely.
pub fn place_agents_with(n: usize, params: &SchellingParams, rng: &mut SimRng) -> Result<Configuration> {
    params.validate(n)?;
    let mut order: Vec<usize> = (0..n).collect();
    let k = params.agents();
    for i in 0..k {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let mut config = Configuration::empty(n);
    for (i, &v) in order[..k].iter().enumerate() {
        config.set(v, if i < params.count_a { Cell::A } else { Cell::B });
    }
    Ok(config)
}

pub fn place_agents(topo: &Topology, params: &SchellingParams, seed: u64) -> Result<Configuration> {
    place_agents_with(topo.vertex_count(), params, &mut rng_from_seed(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "steps", rename_all = "snake_case")]
pub enum SimResult {
    /// Every agent satisfied after this many moves.
    Satisfied(u64),
    /// The step cap was reached first.
    TimedOut(u64),
    /// Proven never satisfiable (only emitted by engines that can prove it).
    Unsatisfiable,
}

impl SimResult {
    pub fn moves(&self) -> Option<u64> {
        match *self {
            SimResult::Satisfied(t) => Some(t),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SimResult::Satisfied(_) => "satisfied",
            SimResult::TimedOut(_) => "timeout",
            SimResult::Unsatisfiable => "unsatisfiable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOutcome {
    pub result: SimResult,
    pub wall_time: Duration,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_clique, build_lollipop, build_path};
    use proptest::prelude::*;

    fn half() -> Threshold {
        Threshold::new(1, 2).unwrap()
    }

    #[test]
    fn clique_four_three() {
        let topo = build_clique(7).unwrap();
        let config: Configuration = "AAAABBB".parse().unwrap();
        for v in 0..4 {
            assert!(is_satisfied(&config, &topo, v, half()).unwrap());
        }
        for v in 4..7 {
            assert!(!is_satisfied(&config, &topo, v, half()).unwrap());
        }
        assert_eq!(count_unhappy(&config, &topo, half()), 3);
    }

    #[test]
    fn isolated_agent_is_satisfied() {
        let topo = build_path(3).unwrap();
        let config: Configuration = "A.B".parse().unwrap();
        let strict = Threshold::new(1, 1).unwrap();
        assert!(is_satisfied(&config, &topo, 0, strict).unwrap());
        assert!(is_satisfied(&config, &topo, 2, strict).unwrap());
    }

    #[test]
    fn path_mixed_pairs() {
        let topo = build_path(3).unwrap();
        let config: Configuration = "AB.".parse().unwrap();
        assert!(!is_satisfied(&config, &topo, 0, half()).unwrap());
        assert!(!is_satisfied(&config, &topo, 1, half()).unwrap());
        let config: Configuration = "ABA".parse().unwrap();
        assert_eq!(count_unhappy(&config, &topo, half()), 3);
    }

    #[test]
    fn vacant_vertex_is_contract_violation() {
        let topo = build_path(2).unwrap();
        let config: Configuration = "A.".parse().unwrap();
        assert!(matches!(
            is_satisfied(&config, &topo, 1, half()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn homogeneous_has_no_unhappy() {
        let topo = build_lollipop(4, 5).unwrap();
        let config: Configuration = "AAA.AA.AA".parse().unwrap();
        assert_eq!(count_unhappy(&config, &topo, Threshold::new(1, 1).unwrap()), 0);
    }

    #[test]
    fn threshold_equality_is_exact() {
        let third = Threshold::new(1, 3).unwrap();
        assert!(third.satisfied(2, 6));
        assert!(!third.satisfied(1, 6));
        assert!("3/2".parse::<Threshold>().is_err());
        assert!("0.5".parse::<Threshold>().is_err());
        assert_eq!("2/3".parse::<Threshold>().unwrap(), Threshold::new(2, 3).unwrap());
    }

    #[test]
    fn moves() {
        let mut config: Configuration = "A.".parse().unwrap();
        apply_move(&mut config, 0, 1).unwrap();
        assert_eq!(config.to_string(), ".A");
        let mut config: Configuration = "AB".parse().unwrap();
        assert!(apply_move(&mut config, 0, 1).is_err());
        assert!(apply_move(&mut config, 0, 5).is_err());
        let mut config: Configuration = ".B".parse().unwrap();
        assert!(apply_move(&mut config, 0, 1).is_err());
    }

    #[test]
    fn placement_is_seeded_and_counts_match() {
        let topo = build_path(20).unwrap();
        let params = SchellingParams::new(6, 5, half(), 10);
        let a = place_agents(&topo, &params, 4).unwrap();
        let b = place_agents(&topo, &params, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts(), (6, 5));
        let full = SchellingParams::new(10, 10, half(), 10);
        assert_eq!(place_agents(&topo, &full, 1).unwrap().vacancies().count(), 0);
        let over = SchellingParams::new(11, 10, half(), 10);
        assert!(place_agents(&topo, &over, 1).is_err());
    }

    #[test]
    fn placement_is_uniform_over_pairs() {
        // 2 A agents on 5 vertices: the occupied pair is uniform over C(5,2) = 10.
        let params = SchellingParams::new(2, 0, half(), 1);
        let mut rng = rng_from_seed(2024);
        let mut freq = std::collections::HashMap::new();
        let trials = 10_000;
        for _ in 0..trials {
            let c = place_agents_with(5, &params, &mut rng).unwrap();
            *freq.entry(c.to_string()).or_insert(0usize) += 1;
        }
        assert_eq!(freq.len(), 10);
        let expected = trials as f64 / 10.0;
        let chi2: f64 = freq.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // 9 degrees of freedom, 0.999 quantile is 27.88.
        assert!(chi2 < 27.88, "chi2 = {chi2}");
        let sigma = (trials as f64 * 0.1 * 0.9).sqrt();
        for &o in freq.values() {
            assert!((o as f64 - expected).abs() < 3.0 * sigma + 1.0);
        }
    }

    fn arb_config() -> impl Strategy<Value = Configuration> {
        prop::collection::vec(prop_oneof![Just(Cell::Vacant), Just(Cell::A), Just(Cell::B)], 1..12)
            .prop_map(Configuration::new)
    }

    proptest! {
        #[test]
        fn string_form_roundtrips(config in arb_config()) {
            let back: Configuration = config.to_string().parse().unwrap();
            prop_assert_eq!(back, config);
        }

        #[test]
        fn legal_moves_conserve_counts(config in arb_config(), from in 0usize..12, to in 0usize..12) {
            let mut c = config.clone();
            if apply_move(&mut c, from, to).is_ok() {
                prop_assert_eq!(c.counts(), config.counts());
            } else {
                prop_assert_eq!(c, config);
            }
        }

        #[test]
        fn satisfaction_ignores_neighbor_labels(
            kinds in prop::collection::vec(prop_oneof![Just(Cell::Vacant), Just(Cell::A), Just(Cell::B)], 1..8),
            perm_seed in any::<u64>(),
            p in 0u32..=4,
        ) {
            // A star centered at 0 with an A at the center; relabeling the
            // leaves never changes the center's satisfaction.
            use rand::seq::SliceRandom;
            let tau = Threshold::new(p, 4).unwrap();
            let n = kinds.len() + 1;
            let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
            let star = Topology::from_edges(crate::topology::TopologyKind::General, n, &edges).unwrap();
            let mut cells = vec![Cell::A];
            cells.extend(kinds.iter().copied());
            let base = is_satisfied(&Configuration::new(cells.clone()), &star, 0, tau).unwrap();
            cells[1..].shuffle(&mut rng_from_seed(perm_seed));
            prop_assert_eq!(is_satisfied(&Configuration::new(cells), &star, 0, tau).unwrap(), base);
        }
    }
}
