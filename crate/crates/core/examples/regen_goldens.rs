//! Prints the corpus outcomes computed by the oracle as goldens JSON.
//!
//! `cargo run -p opra-core --example regen_goldens > crates/core/fixtures/goldens.json`

use opra::corpus::{map_graph, goldens_json, run_oracle, CASES, ORACLE_BOUND};
use opra::oracle::OracleConfig;

fn main() {
    let g = map_graph();
    let cfg = OracleConfig {
        max_path_len: ORACLE_BOUND,
        ..Default::default()
    };
    let outcomes: Vec<(String, _)> = CASES
        .iter()
        .map(|c| {
            let o = run_oracle(&g, c, &cfg).unwrap_or_else(|e| panic!("{}: {e}", c.name));
            (c.name.to_string(), o)
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&goldens_json(&outcomes)).unwrap());
}
