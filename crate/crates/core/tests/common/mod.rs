#![allow(dead_code)]

use std::path::PathBuf;

use gcore::catalog::ImportOptions;
use gcore::{Catalog, Options, Outcome};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn query_text(file: &str) -> String {
    std::fs::read_to_string(fixtures().join("queries").join(file)).unwrap()
}

/// social_graph (default), company_graph, toy and orders.
pub fn catalog() -> Catalog {
    let f = fixtures();
    let mut c = Catalog::new();
    c.load_graph("social_graph", f.join("fig3.json")).unwrap();
    c.load_graph("company_graph", f.join("company_graph.json")).unwrap();
    c.load_graph("toy", f.join("fig1.json")).unwrap();
    c.import_csv("orders", f.join("orders.csv"), &ImportOptions::default()).unwrap();
    c.set_default(Some("social_graph")).unwrap();
    c
}

/// The catalog with social_graph1 and social_graph2 registered.
pub fn catalog_with_views() -> Catalog {
    let mut c = catalog();
    run(&mut c, "q10_social_graph1.gcore");
    run(&mut c, "q13_social_graph2.gcore");
    c
}

pub fn run(c: &mut Catalog, file: &str) -> Outcome {
    c.execute(&query_text(file), Options::default()).unwrap_or_else(|e| panic!("{file}: {e}"))
}
