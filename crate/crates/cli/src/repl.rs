//! Line-oriented interactive session.

use std::io::{self, BufRead, Write};

use gcore::catalog::ImportOptions;
use gcore::{Catalog, Options};

const LAST: &str = "_last";

const HELP: &str = "\
commands:
  \\load NAME FILE     load a JSON graph
  \\import NAME FILE   import a CSV table
  \\graphs             list graphs and views
  \\default NAME       set the default graph
  \\view NAME          define a view; its query follows and ends with ;
  \\quit               leave
queries end with ';' and their result is kept as _last";

enum Pending {
    Query,
    View(String),
}

pub fn session(mut catalog: Catalog, options: Options, input: impl BufRead, mut out: impl Write) -> io::Result<()> {
    let mut buffer = String::new();
    let mut pending = Pending::Query;
    writeln!(out, "G-CORE shell; \\help for commands")?;
    prompt(&mut out, buffer.is_empty())?;
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if buffer.is_empty() && trimmed.starts_with('\\') {
            match command(&mut catalog, trimmed, &mut out)? {
                Some(Pending::View(name)) => pending = Pending::View(name),
                Some(Pending::Query) => {}
                None => return Ok(()),
            }
            prompt(&mut out, true)?;
            continue;
        }
        buffer.push_str(&line);
        buffer.push('\n');
        if trimmed.ends_with(';') {
            let text = std::mem::take(&mut buffer);
            match std::mem::replace(&mut pending, Pending::Query) {
                Pending::Query => query(&mut catalog, &text, options, &mut out)?,
                Pending::View(name) => match catalog.register_view_text(&name, text.trim().trim_end_matches(';')) {
                    Ok(()) => writeln!(out, "view {name} registered")?,
                    Err(e) => writeln!(out, "error: {e}")?,
                },
            }
        }
        prompt(&mut out, buffer.is_empty())?;
    }
    Ok(())
}

fn prompt(out: &mut impl Write, fresh: bool) -> io::Result<()> {
    write!(out, "{}", if fresh { "gcore> " } else { "   ...> " })?;
    out.flush()
}

fn query(catalog: &mut Catalog, text: &str, options: Options, out: &mut impl Write) -> io::Result<()> {
    match catalog.execute(text, options) {
        Ok(o) => {
            let g = o.graph;
            writeln!(out, "{} nodes, {} edges, {} paths", g.node_count(), g.edge_count(), g.path_count())?;
            for (name, _) in &o.views {
                writeln!(out, "view {name} registered")?;
            }
            if let Err(e) = catalog.insert_graph(LAST, g) {
                writeln!(out, "error: {e}")?;
            }
        }
        Err(e) => writeln!(out, "error: {e}")?,
    }
    Ok(())
}

/// Runs a backslash command; `None` ends the session.
fn command(catalog: &mut Catalog, line: &str, out: &mut impl Write) -> io::Result<Option<Pending>> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let result = match words.as_slice() {
        ["\\quit"] | ["\\q"] => return Ok(None),
        ["\\help"] => {
            writeln!(out, "{HELP}")?;
            Ok(())
        }
        ["\\load", name, file] => catalog.load_graph(name, file),
        ["\\import", name, file] => catalog.import_csv(name, file, &ImportOptions::default()),
        ["\\default", name] => catalog.set_default(Some(name)),
        ["\\graphs"] => {
            let default = catalog.default_name().map(str::to_string);
            for name in catalog.graph_names() {
                let g = catalog.graph(name).expect("listed graphs exist");
                let mark = if default.as_deref() == Some(name) { " (default)" } else { "" };
                writeln!(out, "{name}: {} nodes, {} edges, {} paths{mark}", g.node_count(), g.edge_count(), g.path_count())?;
            }
            for name in catalog.view_names() {
                writeln!(out, "{name}: view")?;
            }
            Ok(())
        }
        ["\\view", name] => {
            if catalog.graph(name).is_some() {
                writeln!(out, "error: {name} names a graph")?;
                return Ok(Some(Pending::Query));
            }
            return Ok(Some(Pending::View(name.to_string())));
        }
        _ => {
            writeln!(out, "error: unknown command {line}; try \\help")?;
            Ok(())
        }
    };
    match result {
        Ok(()) if matches!(words.first(), Some(&"\\load" | &"\\import" | &"\\default")) => writeln!(out, "ok")?,
        Ok(()) => {}
        Err(e) => writeln!(out, "error: {e}")?,
    }
    Ok(Some(Pending::Query))
}
