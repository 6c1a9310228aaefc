//! Count-first engines: clique tallies, cached path unhappiness, and their
//! composition on lollipops.

mod clique;
mod lollipop;
mod path;

pub use clique::{clique_type_unhappy, clique_unhappy, clique_unhappy_with, decide_clique, CliqueRule};
pub use lollipop::{
    run_count_first_from, simulate_lollipop_count_first, CountFirstOptions, CountFirstRun, CountFirstSim,
    CountFirstStats, CountFirstStep, LollipopCounts,
};
pub use path::{simulate_path, PathRun, PathSim, PathState, PathStep};
