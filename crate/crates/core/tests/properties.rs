mod common;
mod suites;

use proptest::prelude::*;
use suites::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn binding_operators_match_nested_loops(l in binding_set(), r in binding_set()) {
        bindings(&l, &r)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn graph_set_laws(g in random_graph(), h in random_graph(), k in random_graph()) {
        graph_laws(&g, &h, &k)?;
    }

    #[test]
    fn shortest_paths_match_oracles(g in path_graph(), r in regex()) {
        shortest_paths(&g, &r)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rendered_queries_reparse_equal(p in pattern_text(), w in expr_text(), s in expr_text()) {
        round_trip(&p, &w, &s)?;
    }
}

#[test]
fn corpus_round_trips() {
    for q in corpus() {
        let text = common::query_text(&q);
        let ast = gcore::parse(&text).unwrap();
        assert_eq!(gcore::parse(&gcore::parser::render(&ast)).unwrap(), ast, "{q}");
    }
}

#[test]
fn same_seed_same_json() {
    same_seed_same_bytes();
}

#[test]
fn long_knows_chain() {
    let elapsed = knows_chain(1000);
    assert!(elapsed.as_secs_f64() < 1.0, "{elapsed:?}");
}
