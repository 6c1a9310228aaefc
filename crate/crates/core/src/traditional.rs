//! Reference engine: full-scan Schelling simulation on any topology.
//!
//! Every iteration recounts unhappiness over all agents, then draws an
//! unhappy agent by rejection sampling over agent indices and a uniform
//! vacancy. This is deliberately the naive baseline; per-iteration cost is
//! Θ((a+b) · average degree).
//!
//! Random stream order per iteration: mover draws (one per rejection
//! attempt, or exactly one with direct sampling), then one vacancy draw.
//! Tracing does not touch the stream.

use std::time::Instant;

use rand::Rng;

use crate::error::Result;
use crate::indexed_set::IndexedSet;
use crate::model::{place_agents_with, satisfied_at, Configuration, SchellingParams, SimOutcome, SimResult, Threshold};
use crate::rng::{rng_from_seed, SimRng};
use crate::topology::Topology;
use crate::trace::{MoveRecord, Mover, Site, TraceOptions, TraceRow};

#[derive(Debug, Clone, Copy, Default)]
pub struct TraditionalOptions {
    /// Sample the mover directly from the unhappy list collected during the
    /// scan instead of rejection sampling. Same distribution, different
    /// random stream.
    pub direct_unhappy_sampling: bool,
    pub trace: TraceOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Satisfied,
    Moved(MoveRecord),
    /// Unhappy agents exist but there is no vacancy to move to.
    Stuck,
}

/// Step-by-step state of one traditional run.
pub struct TraditionalSim<'a> {
    topo: &'a Topology,
    tau: Threshold,
    options: TraditionalOptions,
    config: Configuration,
    positions: Vec<usize>,
    vacancies: IndexedSet,
    scratch: Vec<usize>,
    steps: u64,
    last_total_unhappy: u64,
}

impl<'a> TraditionalSim<'a> {
    pub fn new(topo: &'a Topology, tau: Threshold, config: Configuration, options: TraditionalOptions) -> Self {
        let mut positions = Vec::new();
        let mut vacancies = IndexedSet::new(config.len());
        // Agent indices: all A agents in vertex order, then all B agents.
        for wanted in [crate::model::Cell::A, crate::model::Cell::B] {
            positions.extend((0..config.len()).filter(|&v| config.get(v) == wanted));
        }
        for v in config.vacancies() {
            vacancies.insert(v);
        }
        TraditionalSim {
            topo,
            tau,
            options,
            config,
            positions,
            vacancies,
            scratch: Vec::new(),
            steps: 0,
            last_total_unhappy: 0,
        }
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Unhappy count from the most recent full scan.
    pub fn last_total_unhappy(&self) -> u64 {
        self.last_total_unhappy
    }

    fn is_unhappy_agent(&self, i: usize) -> bool {
        !satisfied_at(&self.config, self.topo, self.positions[i], self.tau)
    }

    fn total_unhappy(&mut self) -> u64 {
        if self.options.direct_unhappy_sampling {
            self.scratch.clear();
            for i in 0..self.positions.len() {
                if self.is_unhappy_agent(i) {
                    self.scratch.push(i);
                }
            }
            self.scratch.len() as u64
        } else {
            (0..self.positions.len()).filter(|&i| self.is_unhappy_agent(i)).count() as u64
        }
    }

    fn unhappy_index(&self, rng: &mut SimRng) -> usize {
        if self.options.direct_unhappy_sampling {
            return self.scratch[rng.random_range(0..self.scratch.len())];
        }
        loop {
            let i = rng.random_range(0..self.positions.len());
            if self.is_unhappy_agent(i) {
                return i;
            }
        }
    }

    /// One iteration: full scan, then (if anyone is unhappy) one move.
    pub fn step(&mut self, rng: &mut SimRng) -> StepStatus {
        let total = self.total_unhappy();
        self.last_total_unhappy = total;
        if total == 0 {
            return StepStatus::Satisfied;
        }
        if self.vacancies.is_empty() {
            return StepStatus::Stuck;
        }
        let i = self.unhappy_index(rng);
        let to = self.vacancies.get(rng.random_range(0..self.vacancies.len()));
        let from = self.positions[i];
        let cell = self.config.get(from);
        self.config.set(from, crate::model::Cell::Vacant);
        self.config.set(to, cell);
        self.vacancies.remove(to);
        self.vacancies.insert(from);
        self.positions[i] = to;
        self.steps += 1;
        StepStatus::Moved(MoveRecord {
            mover: Mover::Agent(i),
            from: Site::Vertex(from),
            to: Site::Vertex(to),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TraditionalRun {
    pub outcome: SimOutcome,
    pub trace: Vec<TraceRow>,
    pub final_config: Configuration,
}

/// Run from a given initial configuration until satisfied or `max_steps`.
pub fn run_traditional_from(
    topo: &Topology,
    tau: Threshold,
    max_steps: u64,
    config: Configuration,
    rng: &mut SimRng,
    options: &TraditionalOptions,
) -> (SimResult, Vec<TraceRow>, Configuration) {
    let mut sim = TraditionalSim::new(topo, tau, config, *options);
    let mut trace = Vec::new();
    let tracing = options.trace.enabled();
    let result = loop {
        if sim.steps() >= max_steps {
            break SimResult::TimedOut(max_steps);
        }
        let t = sim.steps();
        match sim.step(rng) {
            StepStatus::Satisfied => {
                if tracing {
                    trace.push(TraceRow::new(&options.trace, t, 0, None));
                }
                break SimResult::Satisfied(t);
            }
            StepStatus::Stuck => break SimResult::TimedOut(max_steps),
            StepStatus::Moved(m) => {
                if tracing {
                    trace.push(TraceRow::new(&options.trace, t, sim.last_total_unhappy(), Some(m)));
                }
            }
        }
    };
    (result, trace, sim.config)
}

/// Place agents from `seed` and run the full-scan process.
pub fn simulate_traditional(
    topo: &Topology,
    params: &SchellingParams,
    seed: u64,
    options: &TraditionalOptions,
) -> Result<TraditionalRun> {
    params.validate(topo.vertex_count())?;
    let start = Instant::now();
    let mut rng = rng_from_seed(seed);
    let config = place_agents_with(topo.vertex_count(), params, &mut rng)?;
    let (result, trace, final_config) =
        run_traditional_from(topo, params.tau, params.max_steps, config, &mut rng, options);
    Ok(TraditionalRun {
        outcome: SimOutcome {
            result,
            wall_time: start.elapsed(),
            seed,
        },
        trace,
        final_config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::count_unhappy;
    use crate::topology::{build_clique, build_lollipop, build_path};

    fn tau(p: u32, q: u32) -> Threshold {
        Threshold::new(p, q).unwrap()
    }

    #[test]
    fn satisfied_clique_returns_zero() {
        let topo = build_clique(7).unwrap();
        let params = SchellingParams::new(4, 3, tau(1, 3), 100);
        for seed in 0..5 {
            let run = simulate_traditional(&topo, &params, seed, &Default::default()).unwrap();
            assert_eq!(run.outcome.result, SimResult::Satisfied(0));
        }
    }

    #[test]
    fn frustrated_clique_times_out() {
        // Every agent sees 1/3 same-type on a 4-clique with 2A/2B; there is
        // no vacancy at all, and with a vacancy the ratio still cannot change.
        let params = SchellingParams::new(2, 2, tau(1, 2), 50);
        let run = simulate_traditional(&build_clique(4).unwrap(), &params, 1, &Default::default()).unwrap();
        assert_eq!(run.outcome.result, SimResult::TimedOut(50));
        let run = simulate_traditional(&build_clique(6).unwrap(), &params, 1, &Default::default()).unwrap();
        assert_eq!(run.outcome.result, SimResult::TimedOut(50));
    }

    #[test]
    fn clique_never_satisfies_after_moves() {
        let topo = build_clique(9).unwrap();
        for (a, b) in [(3, 3), (4, 2), (5, 1), (2, 2)] {
            for seed in 0..20 {
                let params = SchellingParams::new(a, b, tau(1, 2), 40);
                let r = simulate_traditional(&topo, &params, seed, &Default::default()).unwrap();
                assert!(matches!(
                    r.outcome.result,
                    SimResult::Satisfied(0) | SimResult::TimedOut(_)
                ));
            }
        }
    }

    #[test]
    fn satisfied_runs_end_satisfied_and_conserve() {
        let topo = build_lollipop(4, 8).unwrap();
        let params = SchellingParams::new(3, 3, tau(1, 2), 100_000);
        for seed in 0..50 {
            let run = simulate_traditional(&topo, &params, seed, &Default::default()).unwrap();
            assert!(matches!(run.outcome.result, SimResult::Satisfied(_)));
            assert_eq!(count_unhappy(&run.final_config, &topo, params.tau), 0);
            assert_eq!(run.final_config.counts(), (3, 3));
        }
    }

    #[test]
    fn determinism_and_trace_neutrality() {
        let topo = build_path(12).unwrap();
        let params = SchellingParams::new(4, 4, tau(1, 2), 10_000);
        let plain = simulate_traditional(&topo, &params, 77, &Default::default()).unwrap();
        let opts = TraditionalOptions {
            trace: TraceOptions::all(),
            ..Default::default()
        };
        let traced = simulate_traditional(&topo, &params, 77, &opts).unwrap();
        let again = simulate_traditional(&topo, &params, 77, &opts).unwrap();
        assert_eq!(plain.outcome.result, traced.outcome.result);
        assert_eq!(plain.final_config, traced.final_config);
        assert_eq!(traced.trace, again.trace);
        let moves = traced.trace.iter().filter(|r| r.movement.is_some()).count() as u64;
        assert_eq!(Some(moves), traced.outcome.result.moves());
    }

    #[test]
    fn trace_unhappy_matches_replay() {
        let topo = build_lollipop(3, 6).unwrap();
        let params = SchellingParams::new(3, 3, tau(1, 2), 10_000);
        let opts = TraditionalOptions {
            trace: TraceOptions::all(),
            ..Default::default()
        };
        let run = simulate_traditional(&topo, &params, 5, &opts).unwrap();
        let mut config = place_agents_with(topo.vertex_count(), &params, &mut rng_from_seed(5)).unwrap();
        for row in &run.trace {
            assert_eq!(
                row.total_unhappy,
                Some(count_unhappy(&config, &topo, params.tau) as u64)
            );
            if let Some(m) = row.movement {
                let (Site::Vertex(from), Site::Vertex(to)) = (m.from, m.to) else {
                    panic!("traditional moves name vertices")
                };
                crate::model::apply_move(&mut config, from, to).unwrap();
            }
        }
        assert_eq!(config, run.final_config);
    }
}
