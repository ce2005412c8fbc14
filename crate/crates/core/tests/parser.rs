use std::fs;
use std::path::PathBuf;

use gcore::parser::{parse, parse_unchecked, render};

fn queries_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/queries")
}

fn corpus(dir: PathBuf) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "gcore"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn golden_queries_parse_and_round_trip() {
    let all = corpus(queries_dir());
    assert!(all.len() >= 17);
    for (name, text) in all {
        let q = parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let shown = render(&q);
        let again = parse(&shown).unwrap_or_else(|e| panic!("{name} rendered as\n{shown}\n{e}"));
        assert_eq!(q, again, "{name} rendered as\n{shown}");
        assert_eq!(shown, render(&again), "{name}");
    }
}

#[test]
fn rejected_queries_name_their_rule() {
    let expected = [
        ("all_path_in_where.gcore", "all-path-usage"),
        ("bound_edge_unbound_endpoint.gcore", "bound-edge-endpoints"),
        ("optional_shared_variable.gcore", "optional-shared-variable"),
        ("unbound_path_construct.gcore", "path-construct-unbound"),
        ("unjoinable_walk.gcore", "joinable-walk"),
    ];
    let all = corpus(queries_dir().join("rejected"));
    assert_eq!(all.len(), expected.len());
    for (name, rule) in expected {
        let text = &all.iter().find(|(n, _)| n == name).unwrap().1;
        parse_unchecked(text).unwrap_or_else(|e| panic!("{name} should be syntactically valid: {e}"));
        let err = parse(text).expect_err(name);
        assert_eq!(err.rule(), Some(rule), "{name}: {err}");
    }
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse("CONSTRUCT (n)\nMATCH (n:Person WHERE").unwrap_err();
    let shown = err.to_string();
    assert!(shown.contains("2:"), "{shown}");
    assert!(parse("").is_err());
    assert!(parse("CONSTRUCT (n) MATCH (n)-/<>/->(m)").is_err());
    assert!(parse("CONSTRUCT (n) MATCH (n)-/<~v^>/->(m)").is_err());
    assert!(parse("CONSTRUCT (_anon0) MATCH (_anon0)").is_err());
}

#[test]
fn keywords_are_case_insensitive() {
    let a = parse("construct (n) match (n:Person) where n.age > 3 union g").unwrap();
    let b = parse("CONSTRUCT (n) MATCH (n:Person) WHERE n.age > 3 UNION g").unwrap();
    assert_eq!(a, b);
}

#[test]
fn implicit_exists_and_subtraction_are_told_apart() {
    let q = parse("CONSTRUCT (n) MATCH (n), (m) WHERE (n)-[:k]->(m) AND n.a - 1 > (m.b)").unwrap();
    let shown = render(&q);
    assert!(shown.contains("WHERE (n)-[:k]->(m) AND n.a - 1 > m.b"), "{shown}");
}
