use std::path::Path;

use schelling::count_first::{simulate_lollipop_count_first, CountFirstOptions};
use schelling::model::{place_agents, SchellingParams, Threshold};
use schelling::qubo::encode_qubo;
use schelling::topology::{build_grid, build_lollipop, build_path, LollipopSpec, Topology};
use schelling::trace::{write_trace_csv, TraceOptions, TraceRow};
use schelling::traditional::{simulate_traditional, TraditionalOptions};

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn half() -> Threshold {
    Threshold::new(1, 2).unwrap()
}

fn csv(rows: &[TraceRow]) -> String {
    let mut out = Vec::new();
    write_trace_csv(&mut out, rows).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn topology_documents() {
    assert_eq!(
        build_lollipop(3, 2).unwrap().to_json(),
        golden("lollipop_3_2.json").trim_end()
    );
    assert_eq!(build_grid(2, 2).unwrap().to_json(), golden("grid_2x2.json").trim_end());
    let back: Topology = Topology::from_document(&serde_json::from_str(&golden("lollipop_3_2.json")).unwrap()).unwrap();
    assert_eq!(back.edges(), build_lollipop(3, 2).unwrap().edges());
}

#[test]
fn qubo_documents() {
    let (path, _) = encode_qubo(&build_path(2).unwrap(), &SchellingParams::new(1, 1, half(), 1)).unwrap();
    assert_eq!(path.to_json(), golden("qubo_path2_1a1b.json").trim_end());
    let (grid, _) = encode_qubo(&build_grid(2, 2).unwrap(), &SchellingParams::new(2, 1, half(), 1)).unwrap();
    assert_eq!(grid.to_json(), golden("qubo_grid2x2_2a1b.json").trim_end());
}

#[test]
fn seeded_placement() {
    let config = place_agents(&build_path(10).unwrap(), &SchellingParams::new(3, 3, half(), 1), 42).unwrap();
    assert_eq!(config.to_string(), golden("placement_path10_seed42.txt").trim_end());
}

#[test]
fn seeded_traces() {
    let params = SchellingParams::new(2, 2, half(), 1000);
    let traditional = simulate_traditional(
        &build_lollipop(3, 4).unwrap(),
        &params,
        3,
        &TraditionalOptions {
            trace: TraceOptions::all(),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(csv(&traditional.trace), golden("traditional_lollipop_3_4_seed3.csv"));

    let count_first = simulate_lollipop_count_first(
        &LollipopSpec::new(3, 4).unwrap(),
        &params,
        3,
        &CountFirstOptions {
            trace: TraceOptions::all(),
            exact_bridge: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(csv(&count_first.trace), golden("count_first_lollipop_3_4_seed3.csv"));
}
