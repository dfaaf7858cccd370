//! Randomized properties of the parser, ontology evaluation, oracle and
//! solver, each instance drawn from a proptest-chosen seed.

mod common;

use common::*;
use opra::answer_graph::{Bindings, Target};
use opra::engine::{self, reference};
use opra::graph::{ExtInt, Graph, LabelSource, NodeId, Path};
use opra::ontology::{ExtendedGraph, Nested};
use opra::oracle::OracleConfig;
use opra::query::{parse, parse_regex, print_query, print_regex};
use opra::solver::{Mode, SolveConfig};
use opra::EvalError;
use proptest::prelude::*;
use rand::Rng;

fn instance(seed: u64) -> (Graph, String) {
    let mut r = rng(seed);
    let n = r.gen_range(2..=5);
    let g = small_graph(&mut r, n, 2);
    let k = if r.gen_bool(0.7) { 1 } else { 2 };
    (g, small_query(&mut r, k))
}

fn oracle(len: usize) -> OracleConfig {
    OracleConfig {
        max_path_len: len,
        max_paths: 300_000,
    }
}

fn capped<T>(r: &Result<T, EvalError>) -> bool {
    matches!(r, Err(EvalError::EnumerationCapExceeded { .. }))
}

fn with_having(text: &str, extra: &str) -> String {
    if text.contains(" HAVING ") {
        format!("{text} AND {extra}")
    } else {
        format!("{text} HAVING {extra}")
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regex_print_parse_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=3);
        let re = parse_regex(&regex_text(&mut r, k, 4)).unwrap();
        let printed = print_regex(&re);
        prop_assert_eq!(parse_regex(&printed).unwrap(), re, "{}", printed);
    }

    #[test]
    fn query_print_parse_round_trip(seed in any::<u64>()) {
        let (_, text) = instance(seed);
        let q = parse(&text).unwrap();
        let printed = print_query(&q);
        prop_assert_eq!(parse(&printed).unwrap(), q, "{}", printed);
    }

    #[test]
    fn ext_int_addition_laws(a in -1000i64..1000, b in -1000i64..1000, c in -1000i64..1000, inf in 0usize..3) {
        let x = [ExtInt::Fin(a), ExtInt::PosInf, ExtInt::NegInf][inf];
        let (y, z) = (ExtInt::Fin(b), ExtInt::Fin(c));
        prop_assert_eq!(x.checked_add(y), y.checked_add(x));
        prop_assert_eq!(x.checked_add(y).and_then(|s| s.checked_add(z)), x.checked_add(y.checked_add(z).unwrap()));
        prop_assert_eq!(-(-x), x);
        prop_assert_eq!(ExtInt::PosInf.checked_add(ExtInt::NegInf), Err(EvalError::IndeterminateSum));
    }

    /// Caching auxiliary values never changes them, in any evaluation order.
    #[test]
    fn memo_is_transparent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let g = small_graph(&mut r, n, 2);
        let c = r.gen_range(-3..=3);
        let defs = parse(&format!(
            "LET d1(x) := a(x) + b(x),
                 d2(x, y) := E(x, y) * d1(y),
                 d3(x) := Max {{ d1(z) : E(x, z) }},
                 d4(x) := [MATCH NODES (x) SUCH THAT x -p-> y WHERE {ROUTE}(p) HAVING d1[p] >= {c}]
             IN MATCH NODES (x)"
        ))
        .unwrap()
        .ontology;
        let cached = ExtendedGraph::new(&g, defs.clone(), Nested::default());
        let plain = ExtendedGraph::new(&g, defs, Nested::default()).with_memo(false);
        let nodes: Vec<NodeId> = g.nodes().filter(|v| !v.is_sink()).collect();
        let mut queries: Vec<(&str, Vec<NodeId>)> = Vec::new();
        for &x in &nodes {
            for name in ["d1", "d3", "d4"] {
                queries.push((name, vec![x]));
            }
            for &y in &nodes {
                queries.push(("d2", vec![x, y]));
            }
        }
        let forward: Vec<_> = queries.iter().map(|(l, t)| cached.value_by_name(l, t)).collect();
        for (i, (l, t)) in queries.iter().enumerate().rev() {
            prop_assert_eq!(&cached.value_by_name(l, t), &forward[i]);
            prop_assert_eq!(&plain.value_by_name(l, t), &forward[i]);
        }
        prop_assert_eq!(plain.memo_len(), 0);
    }

    /// Raising the oracle's length bound only adds answers.
    #[test]
    fn oracle_answers_grow_with_the_bound(seed in any::<u64>()) {
        let (g, text) = instance(seed);
        let q = engine::prepare(&g, &text).unwrap();
        let b = Bindings::default();
        let (short, long) = (reference::answers(&g, &q, &b, &oracle(3)), reference::answers(&g, &q, &b, &oracle(5)));
        prop_assume!(!capped(&short) && !capped(&long));
        let (short, long) = (short.unwrap(), long.unwrap());
        prop_assert!(short.is_subset(&long));
    }

    /// The emptiness witness is an answer the oracle also finds.
    #[test]
    fn emptiness_witness_replays(seed in any::<u64>()) {
        let (g, text) = instance(seed);
        let q = engine::prepare(&g, &text).unwrap();
        let b = Bindings::default();
        let res = engine::check(&g, &q, &b, &SolveConfig::with_bounds(4, 8)).unwrap();
        prop_assert_eq!(res.nonempty, res.witness.is_some());
        if let Some(w) = res.witness {
            let len = w.paths.iter().map(Path::len).max().unwrap_or(0);
            let answers = reference::answers(&g, &q, &b, &oracle(len));
            prop_assume!(!capped(&answers));
            prop_assert!(answers.unwrap().contains(&w.answer), "{:?}", w.answer);
        }
    }

    /// A finite minimum `v` is attained and nothing lies below it: adding
    /// `a[p] <= v` keeps the query non-empty, `a[p] <= v - 1` empties it.
    #[test]
    fn minimum_couples_with_emptiness(seed in any::<u64>()) {
        let (g, text) = instance(seed);
        let q = engine::prepare(&g, &text).unwrap();
        let b = Bindings::default();
        let cfg = SolveConfig::with_bounds(6, 12);
        let t = Target { label: "a".into(), paths: vec!["p".into()] };
        let res = engine::extremum(&g, &q, &b, &t, Mode::Min, &cfg).unwrap();
        let Some(v) = res.value.finite() else { return Ok(()) };
        let w = res.witness.expect("finite values come with a witness");
        prop_assert_eq!(g.aggregate("a", &w.paths[..1]).unwrap(), ExtInt::Fin(v));
        for (bound, nonempty) in [(v, true), (v - 1, false)] {
            let tighter = engine::prepare(&g, &with_having(&text, &format!("a[p] <= {bound}"))).unwrap();
            prop_assert_eq!(engine::check(&g, &tighter, &b, &cfg).unwrap().nonempty, nonempty, "bound {}", bound);
        }
    }

    /// Binding a path variable to one of its answers keeps exactly the
    /// answers with that path.
    #[test]
    fn bound_path_is_kept(seed in any::<u64>()) {
        let (g, text) = instance(seed);
        let q = engine::prepare(&g, &text).unwrap();
        let free = engine::answers(&g, &q, &Bindings::default(), 4, &SolveConfig::default()).unwrap();
        let Some(pick) = free.iter().next() else { return Ok(()) };
        let p = pick.paths["p"].clone();
        let mut b = Bindings::default();
        b.paths.insert("p".into(), p.clone());
        let bound = engine::answers(&g, &q, &b, 4, &SolveConfig::default()).unwrap();
        let expected: std::collections::BTreeSet<_> = free.iter().filter(|a| a.paths["p"] == p).cloned().collect();
        prop_assert_eq!(bound, expected);
    }
}
