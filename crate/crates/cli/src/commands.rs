use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use schelling::bench::{
    estimate_exponents, fit_models, parse_series, read_results_csv, run_experiment, summarize, write_results_csv,
    write_series_dat, Engine, ExperimentPlan,
};
use schelling::count_first::{
    decide_clique, simulate_lollipop_count_first, simulate_path, CliqueRule, CountFirstOptions,
};
use schelling::model::{SchellingParams, SimResult};
use schelling::oracle::{exact_expected_moves_with, ExpectedMoves, OracleOptions};
use schelling::qubo::{brute_force_minimize, decode_bits, encode_qubo_capped};
use schelling::stats::{mean_and_standard_error, median};
use schelling::topology::{build_clique, build_grid_with, build_lollipop, build_path, Topology};
use schelling::trace::{write_trace_csv, TraceOptions, TraceRow};
use schelling::traditional::{simulate_traditional, TraditionalOptions};
use schelling::walks::{hypercube_hitting_exact, hypercube_hitting_simulate, welded_tree_classical_walk, WalkOutcome};
use serde_json::{json, Value};

use crate::cli::{
    BenchArgs, Cli, CliqueRuleChoice, Command, EngineChoice, FitArgs, HypercubeArgs, NeighborhoodChoice, OracleArgs,
    QuboArgs, ShapeArgs, SimulateArgs, TopologyChoice, WalksCommand, WeldedTreeArgs, VERSION,
};
use crate::Failure;

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Other(format!("creating {}: {e}", path.display())))
}

/// Print the JSON envelope, or the text lines after the echoed config.
fn emit(cli: &Cli, command: &str, config: Value, result: Value, text: &[String]) -> Outcome {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let written = if cli.json {
        let doc = json!({"command": command, "version": VERSION, "config": config, "result": result});
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))
    } else {
        writeln!(out, "# config: {config}").and_then(|()| text.iter().try_for_each(|line| writeln!(out, "{line}")))
    };
    match written.and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Simulate(args) => simulate(cli, args),
        Command::Bench(args) => bench(cli, args),
        Command::Fit(args) => fit(cli, args),
        Command::Qubo(args) => qubo(cli, args),
        Command::Walks(WalksCommand::Hypercube(args)) => hypercube(cli, args),
        Command::Walks(WalksCommand::WeldedTree(args)) => welded_tree(cli, args),
        Command::Oracle(args) => oracle(cli, args),
    }
}

fn topology_name(t: TopologyChoice) -> &'static str {
    match t {
        TopologyChoice::Lollipop => "lollipop",
        TopologyChoice::Clique => "clique",
        TopologyChoice::Path => "path",
        TopologyChoice::Grid => "grid",
    }
}

fn need(value: Option<usize>, flag: &str, topology: TopologyChoice) -> Result<usize, Failure> {
    value.ok_or_else(|| {
        usage(format!(
            "--{flag} is required for --topology {}",
            topology_name(topology)
        ))
    })
}

fn build_shape(shape: &ShapeArgs) -> Result<Topology, Failure> {
    let t = shape.topology;
    Ok(match t {
        TopologyChoice::Lollipop => build_lollipop(
            need(shape.clique_size, "clique-size", t)?,
            need(shape.path_length, "path-length", t)?,
        )?,
        TopologyChoice::Clique => build_clique(need(shape.clique_size, "clique-size", t)?)?,
        TopologyChoice::Path => build_path(need(shape.path_length, "path-length", t)?)?,
        TopologyChoice::Grid => {
            let (r, c) = shape
                .grid
                .ok_or_else(|| usage("--grid RxC is required for --topology grid"))?;
            build_grid_with(r, c, shape.neighborhood.get())?
        }
    })
}

fn shape_config(shape: &ShapeArgs, topo: &Topology) -> Value {
    json!({
        "topology": topology_name(shape.topology),
        "clique_size": shape.clique_size,
        "path_length": shape.path_length,
        "grid": shape.grid.map(|(r, c)| format!("{r}x{c}")),
        "neighborhood": shape.grid.map(|_| if shape.neighborhood == NeighborhoodChoice::Eight { 8 } else { 4 }),
        "edge_count": topo.edge_count(),
        "vertex_count": topo.vertex_count(),
        "agents_a": shape.agents_a,
        "agents_b": shape.agents_b,
        "tau": shape.tau.to_string(),
    })
}

fn result_json(trial: usize, seed: u64, result: SimResult, wall: Duration) -> Value {
    let t = match result {
        SimResult::Satisfied(t) | SimResult::TimedOut(t) => Some(t),
        SimResult::Unsatisfiable => None,
    };
    json!({
        "trial": trial,
        "seed": seed,
        "outcome": result.label(),
        "T": t,
        "wall_time_ns": wall.as_nanos() as u64,
    })
}

fn result_text(result: SimResult) -> String {
    match result {
        SimResult::Satisfied(t) => format!("satisfied T={t}"),
        SimResult::TimedOut(t) => format!("timeout T={t}"),
        SimResult::Unsatisfiable => "unsatisfiable".to_string(),
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    let (_, se) = mean_and_standard_error(xs);
    se * (xs.len() as f64).sqrt()
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Outcome {
    let shape = &args.shape;
    if args.engine == EngineChoice::CountFirst && shape.topology == TopologyChoice::Grid {
        return Err(usage("count-first runs only on lollipop, clique and path topologies"));
    }
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let topo = build_shape(shape)?;
    let params = SchellingParams::new(shape.agents_a, shape.agents_b, shape.tau, args.max_steps);
    params.validate(topo.vertex_count())?;
    let tracing = args.trace.is_some();
    let cf_options = CountFirstOptions {
        skip_clique_internal: args.skip_clique_internal,
        exact_bridge: args.exact_bridge,
        clique_rule: match args.clique_rule {
            CliqueRuleChoice::Exact => CliqueRule::Exact,
            CliqueRuleChoice::WithoutSelfExclusion => CliqueRule::WithoutSelfExclusion,
        },
        geometric_jump: false,
        trace: TraceOptions::default(),
    };
    let seeds: Vec<u64> = (0..args.trials as u64).map(|k| args.seed.wrapping_add(k)).collect();
    let mut config = shape_config(shape, &topo);
    let extra = json!({
        "engine": match args.engine { EngineChoice::Traditional => "traditional", EngineChoice::CountFirst => "count_first" },
        "seed": args.seed,
        "trial_seeds": seeds,
        "max_steps": args.max_steps,
        "trials": args.trials,
        "skip_clique_internal": args.skip_clique_internal,
        "exact_bridge": args.exact_bridge,
        "clique_rule": match args.clique_rule { CliqueRuleChoice::Exact => "exact", CliqueRuleChoice::WithoutSelfExclusion => "without_self_exclusion" },
        "direct_sampling": args.direct_sampling,
    });
    config
        .as_object_mut()
        .unwrap()
        .extend(extra.as_object().unwrap().clone());

    let mut runs = Vec::new();
    let mut first_trace: Option<Vec<TraceRow>> = None;
    for (k, &seed) in seeds.iter().enumerate() {
        let trace = if tracing && k == 0 {
            TraceOptions::all()
        } else {
            TraceOptions::default()
        };
        let (result, wall, rows) = match (args.engine, shape.topology) {
            (EngineChoice::Traditional, _) => {
                let opts = TraditionalOptions {
                    direct_unhappy_sampling: args.direct_sampling,
                    trace,
                };
                let run = simulate_traditional(&topo, &params, seed, &opts)?;
                (run.outcome.result, run.outcome.wall_time, run.trace)
            }
            (EngineChoice::CountFirst, TopologyChoice::Clique) => {
                let start = Instant::now();
                let result = decide_clique(shape.agents_a as u64, shape.agents_b as u64, shape.tau);
                (result, start.elapsed(), Vec::new())
            }
            (EngineChoice::CountFirst, TopologyChoice::Path) => {
                let run = simulate_path(
                    topo.vertex_count(),
                    shape.agents_a,
                    shape.agents_b,
                    shape.tau,
                    seed,
                    args.max_steps,
                    &trace,
                )?;
                (run.outcome.result, run.outcome.wall_time, run.trace)
            }
            (EngineChoice::CountFirst, _) => {
                let spec = schelling::topology::LollipopSpec::new(
                    shape.clique_size.unwrap_or_default(),
                    shape.path_length.unwrap_or_default(),
                )?;
                let opts = CountFirstOptions { trace, ..cf_options };
                let run = simulate_lollipop_count_first(&spec, &params, seed, &opts)?;
                (run.outcome.result, run.outcome.wall_time, run.trace)
            }
        };
        if k == 0 && tracing {
            first_trace = Some(rows);
        }
        runs.push((k, seed, result, wall));
    }
    if let (Some(path), Some(rows)) = (&args.trace, &first_trace) {
        let mut out = create(path)?;
        write_trace_csv(&mut out, rows)?;
        out.flush()?;
    }

    let trials: Vec<Value> = runs.iter().map(|&(k, s, r, w)| result_json(k, s, r, w)).collect();
    let mut text: Vec<String> = runs
        .iter()
        .map(|&(k, s, r, w)| format!("trial {k} seed {s}: {} wall {:.6}s", result_text(r), w.as_secs_f64()))
        .collect();
    let moves: Vec<f64> = runs.iter().filter_map(|r| r.2.moves()).map(|t| t as f64).collect();
    let walls: Vec<f64> = runs.iter().map(|r| r.3.as_secs_f64()).collect();
    let count = |label: &str| runs.iter().filter(|r| r.2.label() == label).count();
    let summary = json!({
        "satisfied": count("satisfied"),
        "timeout": count("timeout"),
        "unsatisfiable": count("unsatisfiable"),
        "mean_T": (!moves.is_empty()).then(|| mean_and_standard_error(&moves).0),
        "stddev_T": (moves.len() > 1).then(|| std_dev(&moves)),
        "mean_wall_s": mean_and_standard_error(&walls).0,
        "stddev_wall_s": (walls.len() > 1).then(|| std_dev(&walls)),
    });
    if args.trials > 1 {
        text.push(format!(
            "summary: satisfied {} timeout {} unsatisfiable {}",
            count("satisfied"),
            count("timeout"),
            count("unsatisfiable")
        ));
        if !moves.is_empty() {
            text.push(format!(
                "T mean {:.4} stddev {:.4} (satisfied runs)",
                mean_and_standard_error(&moves).0,
                if moves.len() > 1 { std_dev(&moves) } else { 0.0 }
            ));
        }
        text.push(format!(
            "wall mean {:.6}s stddev {:.6}s",
            mean_and_standard_error(&walls).0,
            std_dev(&walls)
        ));
    }
    emit(
        cli,
        "simulate",
        config,
        json!({"trials": trials, "summary": summary}),
        &text,
    )
}

fn engine_of(e: EngineChoice) -> Engine {
    match e {
        EngineChoice::Traditional => Engine::Traditional,
        EngineChoice::CountFirst => Engine::CountFirst,
    }
}

fn dat_path(out: &Path, engine: Engine) -> std::path::PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.{engine}.dat"))
}

fn bench(cli: &Cli, args: &BenchArgs) -> Outcome {
    let plan = ExperimentPlan {
        sizes: args.sizes.clone(),
        trials_per_size: args.trials,
        density: args.density,
        split: args.split,
        clique_fraction: args.clique_frac,
        tau: args.tau,
        engines: args.engines.iter().map(|&e| engine_of(e)).collect(),
        max_steps: args.max_steps,
        master_seed: args.master_seed,
        jobs: args.jobs,
        count_first: CountFirstOptions {
            skip_clique_internal: args.skip_clique_internal,
            exact_bridge: args.exact_bridge,
            ..Default::default()
        },
    };
    plan.validate()?;
    let mut config = serde_json::to_value(&plan).expect("plan serializes");
    let obj = config.as_object_mut().unwrap();
    obj.insert("tau".into(), json!(plan.tau.to_string()));
    obj.insert("skip_clique_internal".into(), json!(args.skip_clique_internal));
    obj.insert("exact_bridge".into(), json!(args.exact_bridge));
    obj.insert("out".into(), json!(args.out.display().to_string()));
    let output = run_experiment(&plan)?;
    let mut out = create(&args.out)?;
    write_results_csv(&mut out, &output.records)?;
    out.flush()?;
    let summaries = summarize(&output.records);
    let mut plots = Vec::new();
    let mut engines = plan.engines.clone();
    engines.sort_unstable();
    engines.dedup();
    for &engine in &engines {
        let path = dat_path(&args.out, engine);
        let mut f = create(&path)?;
        write_series_dat(&mut f, &summaries, engine)?;
        f.flush()?;
        plots.push(path.display().to_string());
    }
    let mut text = vec!["engine size trials satisfied timeout_fraction mean_runtime_s mean_T".to_string()];
    for s in &summaries {
        text.push(format!(
            "{} {} {} {} {:.3} {:.6e} {:.1}",
            s.engine, s.size, s.trials, s.satisfied, s.timeout_fraction, s.mean_runtime, s.mean_moves
        ));
    }
    for d in &output.diagnostics {
        text.push(format!("warning: {d}"));
        eprintln!("warning: {d}");
    }
    text.push(format!(
        "wrote {} records to {}",
        output.records.len(),
        args.out.display()
    ));
    let result = json!({
        "records": output.records.len(),
        "summaries": summaries.iter().map(|s| json!({
            "engine": s.engine.as_str(),
            "size": s.size,
            "trials": s.trials,
            "satisfied": s.satisfied,
            "timeout_fraction": s.timeout_fraction,
            "mean_runtime": s.mean_runtime.is_finite().then_some(s.mean_runtime),
            "mean_T": s.mean_moves.is_finite().then_some(s.mean_moves),
        })).collect::<Vec<_>>(),
        "diagnostics": output.diagnostics,
        "results_csv": args.out.display().to_string(),
        "plot_files": plots,
    });
    emit(cli, "bench", config, result, &text)
}

fn fit_one(engine: &str, series: &[(f64, f64)]) -> Value {
    let series_json: Vec<[f64; 2]> = series.iter().map(|&(n, y)| [n, y]).collect();
    let mut doc = json!({"engine": engine, "series": series_json});
    let obj = doc.as_object_mut().unwrap();
    match fit_models(series) {
        Ok(report) => {
            obj.insert("models".into(), serde_json::to_value(&report.models).expect("json"));
            obj.insert("best".into(), json!(report.best));
            if !report.rejected.is_empty() {
                obj.insert("rejected".into(), json!(report.rejected));
            }
        }
        Err(e) => {
            obj.insert("models".into(), json!([]));
            obj.insert("best".into(), Value::Null);
            obj.insert("error".into(), json!(e.to_string()));
        }
    }
    let exponents = match estimate_exponents(series) {
        Ok(e) => serde_json::to_value(&e).expect("json"),
        Err(e) => json!({"polyfit": null, "nls": null, "local": null, "error": e.to_string()}),
    };
    obj.insert("exponents".into(), exponents);
    doc
}

fn fit(cli: &Cli, args: &FitArgs) -> Outcome {
    let text_in = std::fs::read_to_string(&args.input)
        .map_err(|e| Failure::Other(format!("reading {}: {e}", args.input.display())))?;
    let is_results = text_in
        .lines()
        .next()
        .is_some_and(|l| l.trim() == schelling::bench::RESULTS_HEADER);
    let mut series_by_engine: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    if is_results {
        let records = read_results_csv(text_in.as_bytes())?;
        let summaries = summarize(&records);
        let mut engines: Vec<Engine> = summaries.iter().map(|s| s.engine).collect();
        engines.dedup();
        for engine in engines {
            let series = summaries
                .iter()
                .filter(|s| s.engine == engine && s.satisfied > 0)
                .map(|s| (s.size as f64, s.mean_runtime))
                .collect();
            series_by_engine.push((engine.to_string(), series));
        }
    } else {
        series_by_engine.push(("series".to_string(), parse_series(&text_in)?));
    }
    let fits: Vec<Value> = series_by_engine.iter().map(|(e, s)| fit_one(e, s)).collect();
    let doc = json!({"fits": fits});
    if let Some(out) = &args.out {
        let mut f = create(out)?;
        serde_json::to_writer_pretty(&mut f, &doc).map_err(|e| Failure::Other(e.to_string()))?;
        writeln!(f)?;
        f.flush()?;
    }
    let mut text = Vec::new();
    for fit in &fits {
        text.push(format!(
            "{}: best {}",
            fit["engine"].as_str().unwrap_or("?"),
            fit["best"]
        ));
        for m in fit["models"].as_array().into_iter().flatten() {
            text.push(format!(
                "  {:<13} coeffs {} rmse {:.4e} r2 {:.6}",
                m["name"].as_str().unwrap_or(""),
                m["coeffs"],
                m["rmse"].as_f64().unwrap_or(f64::NAN),
                m["r2"].as_f64().unwrap_or(f64::NAN)
            ));
        }
        let e = &fit["exponents"];
        text.push(format!(
            "  exponents polyfit {} nls {} local {}",
            e["polyfit"], e["nls"], e["local"]
        ));
    }
    let config =
        json!({"input": args.input.display().to_string(), "out": args.out.as_ref().map(|p| p.display().to_string())});
    emit(cli, "fit", config, doc, &text)
}

fn qubo(cli: &Cli, args: &QuboArgs) -> Outcome {
    let (topo, shape) = match (args.grid, args.clique, args.path) {
        (Some((r, c)), None, None) => (build_grid_with(r, c, args.neighborhood.get())?, format!("grid {r}x{c}")),
        (None, Some(k), None) => (build_clique(k)?, format!("clique {k}")),
        (None, None, Some(n)) => (build_path(n)?, format!("path {n}")),
        _ => return Err(usage("give exactly one of --grid, --clique, --path")),
    };
    let tau = schelling::model::Threshold::new(1, 2).expect("1/2");
    let params = SchellingParams::new(args.agents_a, args.agents_b, tau, 1);
    let (problem, report) = encode_qubo_capped(&topo, &params, args.vertex_cap)?;
    if let Some(out) = &args.out {
        let mut f = create(out)?;
        f.write_all(problem.to_json().as_bytes())?;
        writeln!(f)?;
        f.flush()?;
    }
    let mut text = vec![
        format!("qubits: {}", report.num_qubits),
        format!("terms: {}", report.term_count),
        format!("penalty scale: {}", report.penalty_scale),
        format!("encode time: {:.3} ms", report.encode_wall_time.as_secs_f64() * 1e3),
    ];
    let mut result = json!({
        "num_qubits": report.num_qubits,
        "term_count": report.term_count,
        "penalty_scale": report.penalty_scale,
        "encode_wall_time_ns": report.encode_wall_time.as_nanos() as u64,
    });
    if args.minimize {
        let (bits, energy) = brute_force_minimize(&problem)?;
        let decoded = decode_bits(&bits).map(|c| c.to_string());
        text.push(format!("minimum energy: {energy}"));
        text.push(format!("minimizer: {}", decoded.as_deref().unwrap_or("invalid")));
        result["minimum"] = json!({"energy": energy, "configuration": decoded});
    }
    let config = json!({
        "shape": shape,
        "vertex_count": topo.vertex_count(),
        "edge_count": topo.edge_count(),
        "neighborhood": args.grid.map(|_| if args.neighborhood == NeighborhoodChoice::Eight { 8 } else { 4 }),
        "agents_a": args.agents_a,
        "agents_b": args.agents_b,
        "vertex_cap": args.vertex_cap,
        "minimize": args.minimize,
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    emit(cli, "qubo", config, result, &text)
}

fn walk_summary(outcomes: &[WalkOutcome]) -> (Value, String) {
    let found: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.found)
        .map(|o| o.steps_or_queries as f64)
        .collect();
    let (mean, se) = mean_and_standard_error(&found);
    let med = median(&found);
    let value = json!({
        "trials": outcomes.len(),
        "found": found.len(),
        "mean": (!found.is_empty()).then_some(mean),
        "standard_error": (!found.is_empty()).then_some(se),
        "median": (!found.is_empty()).then_some(med),
    });
    let text = format!(
        "found {}/{} mean {:.4} ± {:.4} (s.e.) median {}",
        found.len(),
        outcomes.len(),
        mean,
        se,
        med
    );
    (value, text)
}

fn hypercube(cli: &Cli, args: &HypercubeArgs) -> Outcome {
    let outcomes = (0..args.trials as u64)
        .map(|k| hypercube_hitting_simulate(args.n, args.seed.wrapping_add(k), args.max_steps))
        .collect::<Result<Vec<_>, _>>()?;
    let exact = if args.exact || args.trials == 0 {
        Some(hypercube_hitting_exact(args.n)?)
    } else {
        None
    };
    let mut text = Vec::new();
    if !args.summary_only {
        for (k, o) in outcomes.iter().enumerate() {
            text.push(format!(
                "trial {k} seed {}: {} steps{}",
                o.seed,
                o.steps_or_queries,
                if o.found { "" } else { " (cap)" }
            ));
        }
    }
    let (summary, line) = walk_summary(&outcomes);
    if !outcomes.is_empty() {
        text.push(line);
    }
    let exact_value = exact.as_ref().map(|e| {
        use num_traits::ToPrimitive;
        json!({"rational": e.to_string(), "decimal": e.to_f64()})
    });
    if let Some(e) = &exact {
        use num_traits::ToPrimitive;
        text.push(format!("exact: {e} ({:.6})", e.to_f64().unwrap_or(f64::NAN)));
    }
    let config = json!({"n": args.n, "trials": args.trials, "seed": args.seed, "max_steps": args.max_steps, "exact": args.exact});
    let result = json!({
        "trials": if args.summary_only { Value::Null } else { serde_json::to_value(&outcomes).expect("json") },
        "summary": summary,
        "exact": exact_value,
    });
    emit(cli, "walks hypercube", config, result, &text)
}

fn welded_tree(cli: &Cli, args: &WeldedTreeArgs) -> Outcome {
    let outcomes = (0..args.trials as u64)
        .map(|k| welded_tree_classical_walk(args.height, args.seed.wrapping_add(k), args.max_queries))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = Vec::new();
    if !args.summary_only {
        for (k, o) in outcomes.iter().enumerate() {
            text.push(format!(
                "trial {k} seed {}: {} queries{}",
                o.seed,
                o.steps_or_queries,
                if o.found { "" } else { " (cap)" }
            ));
        }
    }
    let (summary, line) = walk_summary(&outcomes);
    text.push(line);
    let config =
        json!({"height": args.height, "trials": args.trials, "seed": args.seed, "max_queries": args.max_queries});
    let result = json!({
        "trials": if args.summary_only { Value::Null } else { serde_json::to_value(&outcomes).expect("json") },
        "summary": summary,
    });
    emit(cli, "walks welded-tree", config, result, &text)
}

fn oracle(cli: &Cli, args: &OracleArgs) -> Outcome {
    let shape = &args.shape;
    let topo = build_shape(shape)?;
    let params = SchellingParams::new(shape.agents_a, shape.agents_b, shape.tau, 1);
    let options = OracleOptions {
        state_cap: args.state_cap,
        ..Default::default()
    };
    let solution = exact_expected_moves_with(&topo, &params, &options)?;
    let (result, line) = match &solution.expected {
        ExpectedMoves::Finite { mean, exact } => (
            json!({"status": "finite", "exact": exact.as_ref().map(|e| e.to_string()), "decimal": mean}),
            match exact {
                Some(e) => format!("expected moves: {e} ({mean:.6})"),
                None => format!("expected moves: {mean:.6} (floating point)"),
            },
        ),
        ExpectedMoves::Unbounded { finite_fraction } => (
            json!({"status": "unbounded", "finite_fraction": finite_fraction}),
            format!("unbounded: only {finite_fraction:.6} of starts reach satisfaction"),
        ),
        ExpectedMoves::Unsatisfiable => (json!({"status": "unsatisfiable"}), "unsatisfiable".to_string()),
    };
    let mut config = shape_config(shape, &topo);
    config["state_cap"] = json!(args.state_cap);
    config["states"] = json!(solution.states.len());
    emit(cli, "oracle", config, result, &[line])
}
