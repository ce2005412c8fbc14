use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn gcore(args: &[&str], stdin: &str) -> Output {
    let f = fixtures();
    let graph = |name: &str, file: &str| format!("{name}={}", f.join(file).display());
    let mut child = Command::new(env!("CARGO_BIN_EXE_gcore"))
        .args(args)
        .args(["--graph", &graph("social_graph", "fig3.json")])
        .args(["--graph", &graph("company_graph", "company_graph.json")])
        .args(["--graph", &graph("toy", "fig1.json")])
        .args(["--default", "social_graph"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn query(name: &str) -> String {
    fixtures().join("queries").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn runs_a_query_to_json() {
    let o = gcore(&["run", &query("q01_acme_employees.gcore")], "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    let o = gcore(&["run", "-"], "CONSTRUCT (n MATCH");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = gcore(&["run", &query("rejected/bound_edge_unbound_endpoint.gcore")], "");
    assert_eq!(o.status.code(), Some(1));
    let o = gcore(&["run", "-"], "CONSTRUCT (n) MATCH (n) ON nowhere");
    assert_eq!(o.status.code(), Some(2));
    let o = gcore(&["run", "no/such/file.gcore"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bindings_table() {
    let o = gcore(&["run", "--bindings", &query("q02_worksat_equijoin.gcore")], "");
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("#Alice") && out.contains("#John"), "{out}");
    assert!(!out.contains("\"nodes\""));
}

#[test]
fn dot_and_table_exports() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.dot");
    let o = gcore(
        &["run", "--format", "dot", "--out", file.to_str().unwrap(), &query("q17_toy_stored_path.gcore")],
        "",
    );
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let dot = std::fs::read_to_string(file).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("subgraph cluster_"));
    let o = gcore(&["run", "--format", "table", &query("q01_acme_employees.gcore")], "");
    assert!(stdout(&o).contains("Person"));
    let o = gcore(&["run", "--format", "yaml", &query("q01_acme_employees.gcore")], "");
    assert!(!o.status.success());
}

#[test]
fn explain_prints_the_plan_without_running() {
    let o = gcore(&["run", "--explain", "-"], "CONSTRUCT (n) MATCH (n:Person)-[:knows]->(m) ON nowhere");
    assert!(o.status.success());
    let out = stdout(&o);
    let (tree, plan) = out.split_once("MATCH:").expect("plan section");
    assert!(serde_json::from_str::<serde_json::Value>(tree).is_ok(), "{tree}");
    assert!(plan.contains("node (n)") && plan.contains("edge (n)"), "{plan}");
}

#[test]
fn same_seed_same_output() {
    let q = query("q05_graph_aggregation.gcore");
    let a = gcore(&["run", "--seed", "3", &q], "");
    let b = gcore(&["run", "--seed", "3", &q], "");
    let c = gcore(&["run", "--seed", "4", &q], "");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn repl_session() {
    let script = "\\graphs\n\
                  CONSTRUCT (n) MATCH (n:Person)\n  WHERE n.employer = 'Acme';\n\
                  CONSTRUCT (n) MATCH (n) ON _last;\n\
                  \\view acme\n\
                  CONSTRUCT (n) MATCH (n:Person) WHERE n.employer = 'Acme';\n\
                  CONSTRUCT (n) MATCH (n) ON acme;\n\
                  \\default nope\n\
                  CONSTRUCT (n MATCH;\n\
                  \\quit\n\
                  CONSTRUCT (n) MATCH (n);\n";
    let o = gcore(&["repl"], script);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("social_graph: ") && out.contains("(default)"), "{out}");
    assert_eq!(out.matches("2 nodes, 0 edges, 0 paths").count(), 3, "{out}");
    assert!(out.contains("view acme registered"), "{out}");
    assert_eq!(out.matches("error:").count(), 2, "{out}");
}

#[test]
fn catalog_directory_and_saved_views() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixtures().join("fig1.json"), dir.path().join("toy.graph.json")).unwrap();
    let cat = dir.path().to_str().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gcore"))
        .args(["run", "--catalog", cat, "--save-views", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .and_then(|mut c| {
            c.stdin.take().unwrap().write_all(b"GRAPH VIEW people AS (CONSTRUCT (n) MATCH (n:Person))")?;
            c.wait_with_output()
        })
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("people.view.gcore").exists());
}
