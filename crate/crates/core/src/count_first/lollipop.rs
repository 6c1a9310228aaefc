//! Count-first engine on lollipop networks.
//!
//! The clique is held as occupancy tallies (its agents are interchangeable),
//! the path as cells with a cached unhappy set. Each step picks a mover
//! uniformly among all unhappy agents with a single draw over the
//! concatenated groups (clique A, clique B, bridge occupant, path), then a
//! destination uniformly among all vacancies with a second draw, and
//! applies the move in O(1).
//!
//! By default the bridge edge is ignored for satisfaction. With
//! `exact_bridge`, clique vertex 0 and the first path vertex are evaluated
//! with their true neighborhoods; clique vertex 0 is then tracked as its own
//! site, and the remaining clique vertices stay interchangeable. That state
//! is an exact lumping of the full-scan process on the same lollipop.

use std::time::Instant;

use rand::Rng;

use super::clique::{clique_type_unhappy, count_of, CliqueRule};
use super::path::PathState;
use crate::error::Result;
use crate::model::{
    place_agents_with, AgentType, Cell, Configuration, SchellingParams, SimOutcome, SimResult, Threshold,
};
use crate::rng::{rng_from_seed, SimRng};
use crate::topology::LollipopSpec;
use crate::trace::{MoveRecord, Mover, Site, TraceOptions, TraceRow};

#[derive(Debug, Clone, Copy, Default)]
pub struct CountFirstOptions {
    /// Do not count clique-to-clique moves of interchangeable agents.
    pub skip_clique_internal: bool,
    /// Evaluate the two bridge endpoints with their true neighborhoods.
    pub exact_bridge: bool,
    pub clique_rule: CliqueRule,
    /// Jump over runs of state-invariant clique-internal moves by sampling
    /// their length from the geometric distribution. Same distribution of
    /// outcomes, different random stream.
    pub geometric_jump: bool,
    pub trace: TraceOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Clique(AgentType),
    Bridge,
    Path(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Clique,
    Bridge,
    Path(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountFirstStep {
    Satisfied,
    /// A move was applied. `counted` is false for a skipped internal move.
    Moved {
        record: MoveRecord,
        internal: bool,
    },
    /// Unhappy agents remain but no move can change the state.
    Frozen,
}

/// Compressed lollipop state.
#[derive(Debug, Clone)]
pub struct LollipopCounts {
    clique_size: usize,
    exact_bridge: bool,
    /// Agents on interchangeable clique vertices (all clique vertices when
    /// the bridge is ignored; vertices 1.. otherwise).
    free_a: u64,
    free_b: u64,
    /// Occupant of clique vertex 0, tracked only with `exact_bridge`.
    bridge: Cell,
    path: PathState,
}

impl LollipopCounts {
    /// Compress a full lollipop configuration.
    pub fn from_configuration(spec: &LollipopSpec, config: &Configuration, tau: Threshold, exact_bridge: bool) -> Self {
        // Without a path there is no bridge edge.
        let exact_bridge = exact_bridge && spec.path_length > 0;
        let first_free = usize::from(exact_bridge);
        let bridge = if exact_bridge { config.get(0) } else { Cell::Vacant };
        let (mut free_a, mut free_b) = (0, 0);
        for v in first_free..spec.clique_size {
            match config.get(v) {
                Cell::A => free_a += 1,
                Cell::B => free_b += 1,
                Cell::Vacant => {}
            }
        }
        let path_cells = config.cells()[spec.clique_size..].to_vec();
        LollipopCounts {
            clique_size: spec.clique_size,
            exact_bridge,
            free_a,
            free_b,
            bridge,
            path: PathState::new(path_cells, tau, bridge),
        }
    }

    pub fn clique_counts(&self) -> (u64, u64) {
        (
            self.free_a + u64::from(self.bridge == Cell::A),
            self.free_b + u64::from(self.bridge == Cell::B),
        )
    }

    pub fn path(&self) -> &PathState {
        &self.path
    }

    pub fn bridge(&self) -> Cell {
        self.bridge
    }

    fn free_sites(&self) -> u64 {
        (self.clique_size - usize::from(self.exact_bridge)) as u64
    }

    pub fn clique_vacancies(&self) -> u64 {
        let (c_a, c_b) = self.clique_counts();
        self.clique_size as u64 - c_a - c_b
    }

    pub fn path_vacancies(&self) -> u64 {
        self.path.vacancies().len() as u64
    }

    /// Expand to a full configuration: bridge occupant at vertex 0 (when
    /// tracked), then interchangeable A agents, then B agents.
    pub fn to_configuration(&self) -> Configuration {
        let mut cells = Vec::with_capacity(self.clique_size + self.path.len());
        if self.exact_bridge {
            cells.push(self.bridge);
        }
        cells.extend(std::iter::repeat_n(Cell::A, self.free_a as usize));
        cells.extend(std::iter::repeat_n(Cell::B, self.free_b as usize));
        cells.resize(self.clique_size, Cell::Vacant);
        cells.extend_from_slice(self.path.cells());
        Configuration::new(cells)
    }
}

/// Step-by-step count-first run.
pub struct CountFirstSim {
    state: LollipopCounts,
    tau: Threshold,
    options: CountFirstOptions,
    steps: u64,
    internal_moves: u64,
    extra_evaluations: u64,
}

impl CountFirstSim {
    pub fn new(spec: &LollipopSpec, tau: Threshold, config: &Configuration, options: CountFirstOptions) -> Self {
        CountFirstSim {
            state: LollipopCounts::from_configuration(spec, config, tau, options.exact_bridge),
            tau,
            options,
            steps: 0,
            internal_moves: 0,
            extra_evaluations: 0,
        }
    }

    pub fn state(&self) -> &LollipopCounts {
        &self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn internal_moves(&self) -> u64 {
        self.internal_moves
    }

    /// Satisfaction evaluations so far (path re-evaluations plus bridge
    /// occupant checks).
    pub fn evaluations(&self) -> u64 {
        self.state.path.evaluations() + self.extra_evaluations
    }

    fn type_unhappy(&self, t: AgentType) -> bool {
        let (c_a, c_b) = self.state.clique_counts();
        clique_type_unhappy(count_of(t, c_a, c_b), c_a + c_b, self.tau, self.options.clique_rule)
    }

    fn bridge_unhappy(&mut self) -> bool {
        let Some(me) = self.state.bridge.agent() else {
            return false;
        };
        self.extra_evaluations += 1;
        let (c_a, c_b) = self.state.clique_counts();
        let mut same = count_of(me, c_a, c_b) - 1;
        let mut occupied = c_a + c_b - 1;
        if let Some(first) = self.state.path.cells().first().and_then(|c| c.agent()) {
            occupied += 1;
            same += u64::from(first == me);
        }
        !self.tau.satisfied(same, occupied)
    }

    /// (free A unhappy, free B unhappy, bridge unhappy, path unhappy).
    fn unhappy_groups(&mut self) -> [u64; 4] {
        let a = if self.type_unhappy(AgentType::A) {
            self.state.free_a
        } else {
            0
        };
        let b = if self.type_unhappy(AgentType::B) {
            self.state.free_b
        } else {
            0
        };
        let bridge = u64::from(self.bridge_unhappy());
        [a, b, bridge, self.state.path.unhappy().len() as u64]
    }

    pub fn total_unhappy(&mut self) -> u64 {
        self.unhappy_groups().iter().sum()
    }

    /// (free clique vacancies, bridge vacancy, path vacancies).
    fn vacancy_groups(&self) -> [u64; 3] {
        let s = &self.state;
        let free = s.free_sites() - s.free_a - s.free_b;
        let bridge = u64::from(s.exact_bridge && !s.bridge.is_occupied());
        [free, bridge, s.path_vacancies()]
    }

    fn draw_source(&self, groups: &[u64; 4], rng: &mut SimRng) -> Source {
        let total: u64 = groups.iter().sum();
        let mut r = rng.random_range(0..total);
        if r < groups[0] {
            return Source::Clique(AgentType::A);
        }
        r -= groups[0];
        if r < groups[1] {
            return Source::Clique(AgentType::B);
        }
        r -= groups[1];
        if r < groups[2] {
            return Source::Bridge;
        }
        r -= groups[2];
        Source::Path(self.state.path.unhappy().get(r as usize))
    }

    fn draw_target(&self, groups: &[u64; 3], rng: &mut SimRng) -> Target {
        let total: u64 = groups.iter().sum();
        let mut r = rng.random_range(0..total);
        if r < groups[0] {
            return Target::Clique;
        }
        r -= groups[0];
        if r < groups[1] {
            return Target::Bridge;
        }
        r -= groups[1];
        Target::Path(self.state.path.vacancies().get(r as usize))
    }

    fn apply(&mut self, source: Source, target: Target) -> MoveRecord {
        let s = &mut self.state;
        let (agent, from) = match source {
            Source::Clique(t) => {
                match t {
                    AgentType::A => s.free_a -= 1,
                    AgentType::B => s.free_b -= 1,
                }
                (t, Site::Clique)
            }
            Source::Bridge => {
                let t = s.bridge.agent().expect("bridge occupied");
                s.bridge = Cell::Vacant;
                s.path.set_left_neighbor(Cell::Vacant);
                (t, Site::Vertex(0))
            }
            Source::Path(i) => {
                let t = s.path.vacate(i).agent().expect("path occupied");
                (t, Site::Vertex(s.clique_size + i))
            }
        };
        let to = match target {
            Target::Clique => {
                match agent {
                    AgentType::A => s.free_a += 1,
                    AgentType::B => s.free_b += 1,
                }
                Site::Clique
            }
            Target::Bridge => {
                s.bridge = agent.into();
                s.path.set_left_neighbor(agent.into());
                Site::Vertex(0)
            }
            Target::Path(j) => {
                s.path.place(j, agent.into());
                Site::Vertex(s.clique_size + j)
            }
        };
        let mover = match source {
            Source::Path(_) => Mover::Path(agent),
            _ => Mover::Clique(agent),
        };
        MoveRecord { mover, from, to }
    }

    /// One process step. Clique-internal moves of interchangeable agents
    /// leave the state unchanged; unless skipped they still count.
    pub fn step(&mut self, rng: &mut SimRng) -> CountFirstStep {
        let groups = self.unhappy_groups();
        let total: u64 = groups.iter().sum();
        if total == 0 {
            return CountFirstStep::Satisfied;
        }
        let vacancies = self.vacancy_groups();
        let vacancy_total: u64 = vacancies.iter().sum();
        let free_unhappy = groups[0] + groups[1];
        let only_internal = free_unhappy == total && vacancies[0] == vacancy_total;
        if vacancy_total == 0 || only_internal {
            return CountFirstStep::Frozen;
        }
        loop {
            let source = self.draw_source(&groups, rng);
            let target = self.draw_target(&vacancies, rng);
            let internal = matches!((source, target), (Source::Clique(_), Target::Clique));
            if internal && self.options.skip_clique_internal {
                continue;
            }
            let record = self.apply(source, target);
            if internal {
                self.internal_moves += 1;
            }
            self.steps += 1;
            return CountFirstStep::Moved { record, internal };
        }
    }

    /// Probability that the next move is clique-internal.
    fn internal_probability(&mut self) -> f64 {
        let groups = self.unhappy_groups();
        let vac = self.vacancy_groups();
        let total: u64 = groups.iter().sum();
        let vac_total: u64 = vac.iter().sum();
        if total == 0 || vac_total == 0 {
            return 0.0;
        }
        (groups[0] + groups[1]) as f64 / total as f64 * (vac[0] as f64 / vac_total as f64)
    }

    /// Number of consecutive internal moves before the next state change.
    fn sample_internal_run(&mut self, rng: &mut SimRng) -> u64 {
        let p = self.internal_probability();
        if p <= 0.0 {
            return 0;
        }
        let u: f64 = rng.random::<f64>();
        // P(K >= k) = p^k.
        let k = ((1.0 - u).ln() / p.ln()).floor();
        if k.is_finite() && k < u64::MAX as f64 {
            k as u64
        } else {
            u64::MAX
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountFirstStats {
    pub evaluations: u64,
    pub max_step_evaluations: u64,
    pub internal_moves: u64,
}

#[derive(Debug, Clone)]
pub struct CountFirstRun {
    pub outcome: SimOutcome,
    pub trace: Vec<TraceRow>,
    pub stats: CountFirstStats,
    pub final_state: LollipopCounts,
}

/// Run from a given initial configuration of the full lollipop.
pub fn run_count_first_from(
    spec: &LollipopSpec,
    tau: Threshold,
    max_steps: u64,
    config: &Configuration,
    rng: &mut SimRng,
    options: &CountFirstOptions,
) -> (SimResult, Vec<TraceRow>, CountFirstStats, LollipopCounts) {
    let mut sim = CountFirstSim::new(spec, tau, config, *options);
    let mut trace = Vec::new();
    let tracing = options.trace.enabled();
    let mut stats = CountFirstStats::default();
    let jump = options.geometric_jump && !options.skip_clique_internal;
    let result = loop {
        if sim.steps() >= max_steps {
            break SimResult::TimedOut(max_steps);
        }
        if jump {
            let run = sim.sample_internal_run(rng);
            if run >= max_steps - sim.steps() {
                break SimResult::TimedOut(max_steps);
            }
            sim.steps += run;
            sim.internal_moves += run;
        }
        let t = sim.steps();
        let before = sim.evaluations();
        let unhappy = if tracing { sim.total_unhappy() } else { 0 };
        let status = if jump {
            sim.step_state_changing(rng)
        } else {
            sim.step(rng)
        };
        stats.max_step_evaluations = stats.max_step_evaluations.max(sim.evaluations() - before);
        match status {
            CountFirstStep::Satisfied => {
                if tracing {
                    trace.push(TraceRow::new(&options.trace, t, 0, None));
                }
                break SimResult::Satisfied(t);
            }
            CountFirstStep::Frozen => break SimResult::Unsatisfiable,
            CountFirstStep::Moved { record, .. } => {
                if tracing {
                    trace.push(TraceRow::new(&options.trace, t, unhappy, Some(record)));
                }
            }
        }
    };
    stats.evaluations = sim.evaluations();
    stats.internal_moves = sim.internal_moves();
    (result, trace, stats, sim.state)
}

impl CountFirstSim {
    /// Like `step`, but conditioned on the move changing the state.
    fn step_state_changing(&mut self, rng: &mut SimRng) -> CountFirstStep {
        let skip = self.options.skip_clique_internal;
        self.options.skip_clique_internal = true;
        let status = self.step(rng);
        self.options.skip_clique_internal = skip;
        status
    }
}

/// Place agents from `seed` on the lollipop and run the count-first process.
///
/// Placement consumes the random stream exactly as the full-scan engine
/// does on `build_lollipop_from(spec)`, so both start from the same
/// configuration for a given seed.
pub fn simulate_lollipop_count_first(
    spec: &LollipopSpec,
    params: &SchellingParams,
    seed: u64,
    options: &CountFirstOptions,
) -> Result<CountFirstRun> {
    params.validate(spec.vertex_count())?;
    let start = Instant::now();
    let mut rng = rng_from_seed(seed);
    let config = place_agents_with(spec.vertex_count(), params, &mut rng)?;
    let (result, trace, stats, final_state) =
        run_count_first_from(spec, params.tau, params.max_steps, &config, &mut rng, options);
    Ok(CountFirstRun {
        outcome: SimOutcome {
            result,
            wall_time: start.elapsed(),
            seed,
        },
        trace,
        stats,
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count_first::decide_clique;
    use crate::model::count_unhappy;
    use crate::topology::{build_lollipop_from, Topology, TopologyKind};

    fn half() -> Threshold {
        Threshold::new(1, 2).unwrap()
    }

    /// The lollipop without its bridge edge.
    fn split_lollipop(spec: &LollipopSpec) -> Topology {
        let full = build_lollipop_from(spec).unwrap();
        let edges: Vec<_> = full.edges().into_iter().filter(|&e| Some(e) != spec.bridge()).collect();
        Topology::from_edges(TopologyKind::General, spec.vertex_count(), &edges).unwrap()
    }

    #[test]
    fn clique_only_matches_decision() {
        for (size, a, b, p, q) in [
            (7, 4, 3, 1, 3),
            (4, 2, 2, 1, 2),
            (9, 3, 3, 1, 2),
            (5, 5, 0, 1, 1),
            (8, 5, 1, 1, 2),
        ] {
            let spec = LollipopSpec::new(size, 0).unwrap();
            let tau = Threshold::new(p, q).unwrap();
            let params = SchellingParams::new(a, b, tau, 1000);
            let decided = decide_clique(a as u64, b as u64, tau);
            for exact_bridge in [false, true] {
                let opts = CountFirstOptions {
                    exact_bridge,
                    ..Default::default()
                };
                let run = simulate_lollipop_count_first(&spec, &params, 1, &opts).unwrap();
                assert_eq!(run.outcome.result, decided, "clique {size} {a}/{b} tau {p}/{q}");
            }
        }
    }

    #[test]
    fn satisfied_runs_end_satisfied() {
        let spec = LollipopSpec::new(5, 20).unwrap();
        let params = SchellingParams::new(8, 8, half(), 1_000_000);
        let full = build_lollipop_from(&spec).unwrap();
        let split = split_lollipop(&spec);
        for seed in 0..30 {
            for exact_bridge in [false, true] {
                let opts = CountFirstOptions {
                    exact_bridge,
                    ..Default::default()
                };
                let run = simulate_lollipop_count_first(&spec, &params, seed, &opts).unwrap();
                assert!(matches!(run.outcome.result, SimResult::Satisfied(_)));
                let config = run.final_state.to_configuration();
                assert_eq!(config.counts(), (8, 8));
                let topo = if exact_bridge { &full } else { &split };
                assert_eq!(count_unhappy(&config, topo, half()), 0);
            }
        }
    }

    #[test]
    fn skip_mode_counts_fewer_moves() {
        let spec = LollipopSpec::new(10, 30).unwrap();
        let params = SchellingParams::new(14, 14, half(), 1_000_000);
        let mut counted = 0;
        let mut skipped = 0;
        for seed in 0..200 {
            let run = simulate_lollipop_count_first(&spec, &params, seed, &Default::default()).unwrap();
            counted += run.outcome.result.moves().unwrap();
            let opts = CountFirstOptions {
                skip_clique_internal: true,
                ..Default::default()
            };
            let run = simulate_lollipop_count_first(&spec, &params, seed, &opts).unwrap();
            assert_eq!(run.stats.internal_moves, 0);
            skipped += run.outcome.result.moves().unwrap();
        }
        assert!(skipped < counted, "{skipped} vs {counted}");
    }

    #[test]
    fn per_step_work_is_bounded() {
        let spec = LollipopSpec::new(50, 400).unwrap();
        let params = SchellingParams::new(180, 180, half(), 1_000_000);
        for exact_bridge in [false, true] {
            let opts = CountFirstOptions {
                exact_bridge,
                ..Default::default()
            };
            let run = simulate_lollipop_count_first(&spec, &params, 8, &opts).unwrap();
            assert!(run.stats.max_step_evaluations <= 8, "{:?}", run.stats);
        }
    }

    #[test]
    fn trace_does_not_perturb_the_run() {
        let spec = LollipopSpec::new(6, 25).unwrap();
        let params = SchellingParams::new(10, 9, half(), 1_000_000);
        let plain = simulate_lollipop_count_first(&spec, &params, 21, &Default::default()).unwrap();
        let opts = CountFirstOptions {
            trace: TraceOptions::all(),
            ..Default::default()
        };
        let traced = simulate_lollipop_count_first(&spec, &params, 21, &opts).unwrap();
        assert_eq!(plain.outcome.result, traced.outcome.result);
        assert_eq!(
            plain.final_state.to_configuration(),
            traced.final_state.to_configuration()
        );
        let moves = traced.trace.iter().filter(|r| r.movement.is_some()).count() as u64;
        assert_eq!(traced.outcome.result.moves(), Some(moves));
    }

    #[test]
    fn geometric_jump_preserves_mean() {
        let spec = LollipopSpec::new(8, 6).unwrap();
        let params = SchellingParams::new(4, 3, half(), 1_000_000);
        let jump = CountFirstOptions {
            geometric_jump: true,
            ..Default::default()
        };
        let trials = 20_000;
        let mean = |opts: &CountFirstOptions, offset: u64| {
            let xs: Vec<f64> = (0..trials)
                .map(|s| {
                    simulate_lollipop_count_first(&spec, &params, s + offset, opts)
                        .unwrap()
                        .outcome
                        .result
                        .moves()
                        .unwrap() as f64
                })
                .collect();
            crate::stats::mean_and_standard_error(&xs)
        };
        let (m1, se1) = mean(&Default::default(), 0);
        let (m2, se2) = mean(&jump, 1_000_000);
        assert!((m1 - m2).abs() < 4.0 * (se1 * se1 + se2 * se2).sqrt(), "{m1} vs {m2}");
    }
}
