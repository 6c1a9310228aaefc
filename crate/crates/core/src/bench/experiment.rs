use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::count_first::{simulate_lollipop_count_first, CountFirstOptions};
use crate::error::{Error, Result};
use crate::model::{SchellingParams, SimResult, Threshold};
use crate::rng::{derive_seed, label_key};
use crate::topology::{build_lollipop_from, LollipopSpec};
use crate::traditional::{simulate_traditional, TraditionalOptions};

pub const RESULTS_HEADER: &str = "engine,size,trial,seed,outcome,T,wall_time_ns";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Traditional,
    CountFirst,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Traditional => "traditional",
            Engine::CountFirst => "count_first",
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traditional" => Ok(Engine::Traditional),
            "count_first" | "count-first" => Ok(Engine::CountFirst),
            other => Err(Error::Parse(format!("unknown engine {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentPlan {
    pub sizes: Vec<usize>,
    pub trials_per_size: usize,
    pub density: f64,
    pub split: f64,
    pub clique_fraction: f64,
    pub tau: Threshold,
    pub engines: Vec<Engine>,
    pub max_steps: u64,
    pub master_seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    #[serde(skip)]
    pub count_first: CountFirstOptions,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            sizes: vec![500, 1000, 2000, 4000],
            trials_per_size: 500,
            density: 0.8,
            split: 0.5,
            clique_fraction: 0.1,
            tau: Threshold::new(1, 2).expect("1/2"),
            engines: vec![Engine::Traditional, Engine::CountFirst],
            max_steps: 10_000_000,
            master_seed: 0,
            jobs: 0,
            count_first: CountFirstOptions::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::invalid("sizes must be non-empty"));
        }
        if self.trials_per_size == 0 {
            return Err(Error::invalid("trials per size must be positive"));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::invalid(format!("density {} not in (0, 1]", self.density)));
        }
        if !(0.0..=1.0).contains(&self.split) {
            return Err(Error::invalid(format!("split {} not in [0, 1]", self.split)));
        }
        if !(self.clique_fraction > 0.0 && self.clique_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "clique fraction {} not in (0, 1)",
                self.clique_fraction
            )));
        }
        if self.engines.is_empty() {
            return Err(Error::invalid("no engines selected"));
        }
        for &size in &self.sizes {
            self.instance(size)?;
        }
        Ok(())
    }

    /// Lollipop shape and agent counts for a total vertex count.
    pub fn instance(&self, size: usize) -> Result<(LollipopSpec, SchellingParams)> {
        if size < 2 {
            return Err(Error::invalid(format!("size {size} too small for a lollipop")));
        }
        let clique = ((self.clique_fraction * size as f64).round() as usize).clamp(1, size - 1);
        let spec = LollipopSpec::new(clique, size - clique)?;
        let agents = ((self.density * size as f64).round() as usize).clamp(1, size);
        let a = (self.split * agents as f64).round() as usize;
        let params = SchellingParams::new(a, agents - a, self.tau, self.max_steps);
        params.validate(size)?;
        Ok((spec, params))
    }

    pub fn seed_for(&self, engine: Engine, size: usize, trial: usize) -> u64 {
        derive_seed(
            self.master_seed,
            &[label_key(engine.as_str()), size as u64, trial as u64],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub engine: Engine,
    pub size: usize,
    pub trial: usize,
    pub seed: u64,
    pub result: SimResult,
    pub wall_time_ns: u64,
}

impl RunRecord {
    /// Moves performed: T for satisfied runs, the cap for timeouts.
    pub fn moves(&self) -> Option<u64> {
        match self.result {
            SimResult::Satisfied(t) | SimResult::TimedOut(t) => Some(t),
            SimResult::Unsatisfiable => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Sorted by (engine, size, trial).
    pub records: Vec<RunRecord>,
    pub diagnostics: Vec<String>,
}

fn run_cell(plan: &ExperimentPlan, engine: Engine, size: usize, trial: usize, ctx: &Cell) -> Result<RunRecord> {
    let seed = plan.seed_for(engine, size, trial);
    let outcome = match engine {
        Engine::Traditional => {
            simulate_traditional(&ctx.topo, &ctx.params, seed, &TraditionalOptions::default())?.outcome
        }
        Engine::CountFirst => simulate_lollipop_count_first(&ctx.spec, &ctx.params, seed, &plan.count_first)?.outcome,
    };
    Ok(RunRecord {
        engine,
        size,
        trial,
        seed,
        result: outcome.result,
        wall_time_ns: outcome.wall_time.as_nanos().min(u64::MAX as u128) as u64,
    })
}

struct Cell {
    spec: LollipopSpec,
    params: SchellingParams,
    topo: crate::topology::Topology,
}

/// Execute every (engine, size, trial) cell. Sizes run in ascending order
/// per engine; a size where no trial is satisfied ends that engine's series.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let mut sizes = plan.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut engines = plan.engines.clone();
    engines.sort_unstable();
    engines.dedup();

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for &engine in &engines {
        for &size in &sizes {
            let (spec, params) = plan.instance(size)?;
            let topo = match engine {
                Engine::Traditional => build_lollipop_from(&spec)?,
                // Count-first never touches the adjacency structure.
                Engine::CountFirst => crate::topology::build_path(1)?,
            };
            let ctx = Cell { spec, params, topo };
            let batch: Vec<RunRecord> = pool.install(|| {
                (0..plan.trials_per_size)
                    .into_par_iter()
                    .map(|trial| run_cell(plan, engine, size, trial, &ctx))
                    .collect::<Result<Vec<_>>>()
            })?;
            let satisfied = batch
                .iter()
                .filter(|r| matches!(r.result, SimResult::Satisfied(_)))
                .count();
            records.extend(batch);
            if satisfied == 0 {
                diagnostics.push(format!(
                    "{engine}: no satisfied run at size {size}; larger sizes skipped"
                ));
                break;
            }
        }
    }
    records.sort_by_key(|r| (r.engine, r.size, r.trial));
    Ok(ExperimentOutput { records, diagnostics })
}

pub fn write_results_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::invalid(format!("writing results: {e}"));
    w.write_record(RESULTS_HEADER.split(',')).map_err(io)?;
    for r in records {
        let t = r.moves().map(|t| t.to_string()).unwrap_or_default();
        w.write_record([
            r.engine.as_str(),
            &r.size.to_string(),
            &r.trial.to_string(),
            &r.seed.to_string(),
            r.result.label(),
            &t,
            &r.wall_time_ns.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("writing results: {e}")))?;
    Ok(())
}

pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let parse = |what: &str, s: &str| Error::Parse(format!("bad {what} {s:?}"));
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != RESULTS_HEADER {
        return Err(Error::Parse(format!("expected header {RESULTS_HEADER}")));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let t: Option<u64> = match field(5) {
            "" => None,
            s => Some(s.parse().map_err(|_| parse("T", s))?),
        };
        let result = match (field(4), t) {
            ("satisfied", Some(t)) => SimResult::Satisfied(t),
            ("timeout", Some(t)) => SimResult::TimedOut(t),
            ("unsatisfiable", _) => SimResult::Unsatisfiable,
            (s, _) => return Err(parse("outcome", s)),
        };
        out.push(RunRecord {
            engine: field(0).parse()?,
            size: field(1).parse().map_err(|_| parse("size", field(1)))?,
            trial: field(2).parse().map_err(|_| parse("trial", field(2)))?,
            seed: field(3).parse().map_err(|_| parse("seed", field(3)))?,
            result,
            wall_time_ns: field(6).parse().map_err(|_| parse("wall time", field(6)))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub engine: Engine,
    pub size: usize,
    pub trials: usize,
    pub satisfied: usize,
    pub timeout_fraction: f64,
    /// Mean wall time in seconds over satisfied runs.
    pub mean_runtime: f64,
    /// Mean T over satisfied runs.
    pub mean_moves: f64,
}

/// Per (engine, size) aggregates, sorted. Sizes without a satisfied run get
/// NaN means.
pub fn summarize(records: &[RunRecord]) -> Vec<SizeSummary> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.engine, r.size, r.trial));
    let mut out = Vec::new();
    for group in sorted.chunk_by(|x, y| (x.engine, x.size) == (y.engine, y.size)) {
        let done: Vec<&&RunRecord> = group
            .iter()
            .filter(|r| matches!(r.result, SimResult::Satisfied(_)))
            .collect();
        let timeouts = group
            .iter()
            .filter(|r| matches!(r.result, SimResult::TimedOut(_)))
            .count();
        let n = done.len() as f64;
        out.push(SizeSummary {
            engine: group[0].engine,
            size: group[0].size,
            trials: group.len(),
            satisfied: done.len(),
            timeout_fraction: timeouts as f64 / group.len() as f64,
            mean_runtime: done.iter().map(|r| r.wall_time_ns as f64 * 1e-9).sum::<f64>() / n,
            mean_moves: done.iter().map(|r| r.moves().unwrap_or(0) as f64).sum::<f64>() / n,
        });
    }
    out
}

/// Two-column `size mean_runtime` text for one engine.
pub fn write_series_dat<W: Write>(mut out: W, summaries: &[SizeSummary], engine: Engine) -> std::io::Result<()> {
    writeln!(out, "# size mean_runtime")?;
    for s in summaries.iter().filter(|s| s.engine == engine && s.satisfied > 0) {
        writeln!(out, "{} {:e}", s.size, s.mean_runtime)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> ExperimentPlan {
        ExperimentPlan {
            sizes: vec![100],
            trials_per_size: 2,
            master_seed: 5,
            jobs: 2,
            ..Default::default()
        }
    }

    #[test]
    fn one_record_per_cell() {
        let out = run_experiment(&small_plan()).unwrap();
        assert_eq!(out.records.len(), 4);
        let keys: Vec<_> = out.records.iter().map(|r| (r.engine, r.size, r.trial)).collect();
        assert_eq!(
            keys,
            vec![
                (Engine::Traditional, 100, 0),
                (Engine::Traditional, 100, 1),
                (Engine::CountFirst, 100, 0),
                (Engine::CountFirst, 100, 1)
            ]
        );
    }

    #[test]
    fn csv_is_deterministic_apart_from_timing() {
        let strip = |records: &[RunRecord]| {
            let mut buf = Vec::new();
            let zeroed: Vec<RunRecord> = records.iter().map(|r| RunRecord { wall_time_ns: 0, ..*r }).collect();
            write_results_csv(&mut buf, &zeroed).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let mut plan = small_plan();
        plan.sizes = vec![60, 120];
        let a = run_experiment(&plan).unwrap();
        plan.jobs = 1;
        let b = run_experiment(&plan).unwrap();
        assert_eq!(strip(&a.records), strip(&b.records));
    }

    #[test]
    fn csv_round_trip() {
        let out = run_experiment(&small_plan()).unwrap();
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &out.records).unwrap();
        assert!(buf.starts_with(RESULTS_HEADER.as_bytes()));
        assert_eq!(read_results_csv(buf.as_slice()).unwrap(), out.records);
    }

    #[test]
    fn instance_shape() {
        let plan = ExperimentPlan::default();
        let (spec, params) = plan.instance(1000).unwrap();
        assert_eq!((spec.clique_size, spec.path_length), (100, 900));
        assert_eq!((params.count_a, params.count_b), (400, 400));
    }

    #[test]
    fn all_timeout_size_ends_series() {
        let plan = ExperimentPlan {
            sizes: vec![200, 400],
            trials_per_size: 2,
            engines: vec![Engine::Traditional],
            max_steps: 1,
            ..Default::default()
        };
        let out = run_experiment(&plan).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.diagnostics.len(), 1);
    }

    #[test]
    fn invalid_plans() {
        let bad = [
            ExperimentPlan {
                density: 0.0,
                ..Default::default()
            },
            ExperimentPlan {
                clique_fraction: 1.0,
                ..Default::default()
            },
            ExperimentPlan {
                sizes: vec![],
                ..Default::default()
            },
        ];
        for plan in bad {
            assert!(plan.validate().is_err());
        }
    }

    #[test]
    fn summary_uses_satisfied_runs() {
        let rec = |trial, result, ns| RunRecord {
            engine: Engine::CountFirst,
            size: 10,
            trial,
            seed: 0,
            result,
            wall_time_ns: ns,
        };
        let s = summarize(&[
            rec(0, SimResult::Satisfied(4), 1_000_000_000),
            rec(1, SimResult::TimedOut(9), 9_000_000_000),
            rec(2, SimResult::Satisfied(6), 3_000_000_000),
        ]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean_runtime, 2.0);
        assert_eq!(s[0].mean_moves, 5.0);
        assert!((s[0].timeout_fraction - 1.0 / 3.0).abs() < 1e-12);
    }
}
