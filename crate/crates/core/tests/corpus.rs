use opra::corpus::{self, map_graph, goldens, Outcome, CASES, QUERIES};
use opra::engine;
use opra::oracle::{node_names, OracleConfig};
use opra::query::{parse, print_query};
use opra::solver::SolveConfig;

#[test]
fn engine_reproduces_goldens() {
    for r in corpus::run_all(&SolveConfig::default()) {
        assert!(r.ok(), "{}: expected {:?}, got {:?}", r.name, r.expected, r.got);
    }
}

#[test]
fn oracle_reproduces_goldens() {
    let g = map_graph();
    let gold = goldens();
    let cfg = OracleConfig {
        max_path_len: corpus::ORACLE_BOUND,
        ..OracleConfig::default()
    };
    for case in CASES {
        let got = corpus::run_oracle(&g, case, &cfg).unwrap();
        assert_eq!(Some(&got), gold.get(case.name), "{}", case.name);
    }
}

#[test]
fn every_case_has_a_golden() {
    let gold = goldens();
    assert_eq!(gold.len(), CASES.len());
    for case in CASES {
        assert!(gold.contains_key(case.name), "{}", case.name);
    }
}

#[test]
fn bundled_queries_round_trip() {
    let g = map_graph();
    for (name, text) in QUERIES {
        let q = parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = print_query(&q);
        assert_eq!(parse(&printed).unwrap(), q, "{name}:\n{printed}");
        engine::prepare(&g, text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn min_time_witness_is_the_tram_route() {
    let g = map_graph();
    let q = engine::prepare(&g, corpus::query_text("q_route_sp").unwrap()).unwrap();
    let t = engine::parse_target("time", &q).unwrap();
    let b = engine::bindings(&g, &[], &[]).unwrap();
    let res = engine::extremum(&g, &q, &b, &t, opra::solver::Mode::Min, &SolveConfig::default()).unwrap();
    assert_eq!(res.value, 80);
    let w = res.witness.unwrap();
    assert_eq!(node_names(&g, &w.paths[0]), ["S", "T", "P"]);
}

#[test]
fn outcomes_serialize_back() {
    for o in goldens().into_values() {
        assert_eq!(Outcome::from_json(&o.to_json()), Some(o));
    }
}
