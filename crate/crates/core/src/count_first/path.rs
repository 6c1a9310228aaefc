//! Path segment with a cached unhappy set.
//!
//! After one initial scan, a move only re-evaluates the vertices whose
//! neighborhoods changed: at most the two neighbors of the vacated vertex
//! and the new vertex plus its two neighbors.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::indexed_set::IndexedSet;
use crate::model::{place_agents_with, Cell, Configuration, SchellingParams, SimOutcome, SimResult, Threshold};
use crate::rng::{rng_from_seed, SimRng};
use crate::trace::{MoveRecord, Mover, Site, TraceOptions, TraceRow};

#[derive(Debug, Clone)]
pub struct PathState {
    cells: Vec<Cell>,
    tau: Threshold,
    unhappy: IndexedSet,
    vacancies: IndexedSet,
    /// Occupant of the vertex attached to path position 0 from outside,
    /// or vacant when that edge is ignored.
    left_neighbor: Cell,
    evaluations: u64,
}

impl PathState {
    pub fn new(cells: Vec<Cell>, tau: Threshold, left_neighbor: Cell) -> Self {
        let n = cells.len();
        let mut state = PathState {
            cells,
            tau,
            unhappy: IndexedSet::new(n),
            vacancies: IndexedSet::new(n),
            left_neighbor,
            evaluations: 0,
        };
        for i in 0..n {
            if state.cells[i].is_occupied() {
                state.refresh(i);
            } else {
                state.vacancies.insert(i);
            }
        }
        state
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    #[inline]
    pub fn cell(&self, i: usize) -> Cell {
        self.cells[i]
    }

    pub fn unhappy(&self) -> &IndexedSet {
        &self.unhappy
    }

    pub fn vacancies(&self) -> &IndexedSet {
        &self.vacancies
    }

    pub fn occupied(&self) -> usize {
        self.cells.len() - self.vacancies.len()
    }

    /// Total satisfaction evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn satisfied(&self, i: usize) -> bool {
        let me = self.cells[i];
        let left = if i == 0 { self.left_neighbor } else { self.cells[i - 1] };
        let right = self.cells.get(i + 1).copied().unwrap_or(Cell::Vacant);
        let mut same = 0;
        let mut occupied = 0;
        for c in [left, right] {
            if c.is_occupied() {
                occupied += 1;
                same += u64::from(c == me);
            }
        }
        self.tau.satisfied(same, occupied)
    }

    #[inline]
    fn refresh(&mut self, i: usize) {
        if self.cells[i].is_occupied() {
            self.evaluations += 1;
            let unhappy = !self.satisfied(i);
            self.unhappy.set(i, unhappy);
        } else {
            self.unhappy.remove(i);
        }
    }

    fn refresh_neighbors(&mut self, i: usize) {
        if i > 0 {
            self.refresh(i - 1);
        }
        if i + 1 < self.cells.len() {
            self.refresh(i + 1);
        }
    }

    /// Empty position `i` and return what was there.
    pub fn vacate(&mut self, i: usize) -> Cell {
        let cell = self.cells[i];
        debug_assert!(cell.is_occupied());
        self.cells[i] = Cell::Vacant;
        self.unhappy.remove(i);
        self.vacancies.insert(i);
        self.refresh_neighbors(i);
        cell
    }

    pub fn place(&mut self, i: usize, cell: Cell) {
        debug_assert!(!self.cells[i].is_occupied() && cell.is_occupied());
        self.cells[i] = cell;
        self.vacancies.remove(i);
        self.refresh(i);
        self.refresh_neighbors(i);
    }

    pub fn left_neighbor(&self) -> Cell {
        self.left_neighbor
    }

    pub fn set_left_neighbor(&mut self, cell: Cell) {
        self.left_neighbor = cell;
        if !self.cells.is_empty() {
            self.refresh(0);
        }
    }

    /// Unhappy positions by full recount, ignoring the cache.
    pub fn recount_unhappy(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].is_occupied() && !self.satisfied(i))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStep {
    Satisfied,
    Moved(MoveRecord),
    Stuck,
}

/// Schelling process on a bare path graph with cached unhappiness.
pub struct PathSim {
    state: PathState,
    steps: u64,
}

impl PathSim {
    pub fn new(config: &Configuration, tau: Threshold) -> Self {
        PathSim {
            state: PathState::new(config.cells().to_vec(), tau, Cell::Vacant),
            steps: 0,
        }
    }

    pub fn state(&self) -> &PathState {
        &self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn total_unhappy(&self) -> u64 {
        self.state.unhappy.len() as u64
    }

    pub fn step(&mut self, rng: &mut SimRng) -> PathStep {
        if self.state.unhappy.is_empty() {
            return PathStep::Satisfied;
        }
        if self.state.vacancies.is_empty() {
            return PathStep::Stuck;
        }
        let from = self.state.unhappy.get(rng.random_range(0..self.state.unhappy.len()));
        let to = self
            .state
            .vacancies
            .get(rng.random_range(0..self.state.vacancies.len()));
        let cell = self.state.vacate(from);
        self.state.place(to, cell);
        self.steps += 1;
        PathStep::Moved(MoveRecord {
            mover: Mover::Path(cell.agent().expect("occupied")),
            from: Site::Vertex(from),
            to: Site::Vertex(to),
        })
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::new(self.state.cells.clone())
    }
}

#[derive(Debug, Clone)]
pub struct PathRun {
    pub outcome: SimOutcome,
    pub trace: Vec<TraceRow>,
    pub final_config: Configuration,
    pub evaluations: u64,
}

/// Cached-count Schelling simulation on a path of `path_length` vertices.
///
/// Placement consumes the random stream exactly as the full-scan engine
/// does on `build_path(path_length)`, so both start from the same
/// configuration for a given seed.
#[allow(clippy::too_many_arguments)]
pub fn simulate_path(
    path_length: usize,
    a: usize,
    b: usize,
    tau: Threshold,
    seed: u64,
    max_steps: u64,
    trace: &TraceOptions,
) -> Result<PathRun> {
    if path_length == 0 {
        return Err(Error::invalid("path length must be at least 1"));
    }
    let params = SchellingParams::new(a, b, tau, max_steps);
    params.validate(path_length)?;
    let start = Instant::now();
    let mut rng = rng_from_seed(seed);
    let config = place_agents_with(path_length, &params, &mut rng)?;
    let mut sim = PathSim::new(&config, tau);
    let mut rows = Vec::new();
    let result = loop {
        if sim.steps() >= max_steps {
            break SimResult::TimedOut(max_steps);
        }
        let t = sim.steps();
        let unhappy = sim.total_unhappy();
        match sim.step(&mut rng) {
            PathStep::Satisfied => {
                if trace.enabled() {
                    rows.push(TraceRow::new(trace, t, 0, None));
                }
                break SimResult::Satisfied(t);
            }
            PathStep::Stuck => break SimResult::TimedOut(max_steps),
            PathStep::Moved(m) => {
                if trace.enabled() {
                    rows.push(TraceRow::new(trace, t, unhappy, Some(m)));
                }
            }
        }
    };
    Ok(PathRun {
        outcome: SimOutcome {
            result,
            wall_time: start.elapsed(),
            seed,
        },
        trace: rows,
        evaluations: sim.state.evaluations(),
        final_config: sim.configuration(),
    })
}
