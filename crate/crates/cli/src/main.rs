use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gcore::catalog::ImportOptions;
use gcore::export::{export, Format};
use gcore::{Catalog, Error, Options, StorageError};

mod repl;

#[derive(Parser)]
#[command(name = "gcore", version, about = "Run G-CORE queries over path property graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one query file ("-" reads standard input).
    Run(RunArgs),
    /// Interactive session.
    Repl(CatalogArgs),
}

#[derive(Args)]
struct CatalogArgs {
    /// Catalog directory with <name>.graph.json and <name>.view.gcore files.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Load a JSON graph file: NAME=FILE.
    #[arg(long = "graph", value_name = "NAME=FILE")]
    graphs: Vec<String>,
    /// Import a CSV table as a graph of isolated nodes: NAME=FILE.
    #[arg(long = "import", value_name = "NAME=FILE")]
    imports: Vec<String>,
    /// Graph used by patterns without ON.
    #[arg(long)]
    default: Option<String>,
    /// Mixed into generated identifiers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep evaluated views cached between queries.
    #[arg(long)]
    memoize_views: bool,
}

#[derive(Args)]
struct RunArgs {
    query: PathBuf,
    #[command(flatten)]
    catalog: CatalogArgs,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Write the result graph here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the bindings of the final MATCH as a table.
    #[arg(long)]
    bindings: bool,
    /// Print the syntax tree and MATCH plan instead of evaluating.
    #[arg(long)]
    explain: bool,
    /// Write registered views back into the --catalog directory.
    #[arg(long)]
    save_views: bool,
}

impl CatalogArgs {
    fn options(&self) -> Options {
        Options { seed: self.seed, memoize_views: self.memoize_views }
    }

    fn open(&self) -> Result<Catalog, StorageError> {
        let mut c = match &self.catalog {
            Some(dir) => Catalog::open(dir)?,
            None => Catalog::new(),
        };
        for spec in &self.graphs {
            let (name, file) = split_spec(spec)?;
            c.load_graph(name, file)?;
        }
        for spec in &self.imports {
            let (name, file) = split_spec(spec)?;
            c.import_csv(name, file, &ImportOptions::default())?;
        }
        if let Some(d) = &self.default {
            c.set_default(Some(d))?;
        }
        Ok(c)
    }
}

fn split_spec(spec: &str) -> Result<(&str, &str), StorageError> {
    spec.split_once('=').filter(|(n, f)| !n.is_empty() && !f.is_empty()).ok_or_else(|| StorageError::Io {
        path: spec.into(),
        source: io::Error::new(io::ErrorKind::InvalidInput, "expected NAME=FILE"),
    })
}

/// Exit status for a failure: 1 for query text that does not parse, 2 for
/// everything else.
fn status(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Storage(StorageError::Parse(_)) => 1,
        _ => 2,
    }
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let text = if args.query.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|source| StorageError::Io { path: "-".into(), source })?;
        s
    } else {
        fs::read_to_string(&args.query)
            .map_err(|source| StorageError::Io { path: args.query.display().to_string(), source })?
    };
    let q = gcore::parse(&text)?;
    if args.explain {
        println!("{}", serde_json::to_string_pretty(&q).expect("syntax trees serialize"));
        println!("{}", gcore::eval::explain(&q));
        return Ok(());
    }
    let mut catalog = args.catalog.open()?;
    let outcome = catalog.run(&q, args.catalog.options())?;
    if args.bindings {
        match &outcome.bindings {
            Some(b) => print!("{}", b.to_table()),
            None => println!("(no MATCH clause)"),
        }
    }
    let rendered = export(&outcome.graph, args.format);
    match &args.out {
        Some(p) => fs::write(p, rendered).map_err(|source| StorageError::Io { path: p.display().to_string(), source })?,
        None if args.bindings => {}
        None => print!("{rendered}"),
    }
    if args.save_views {
        if let Some(dir) = &args.catalog.catalog {
            catalog.save(dir)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Repl(args) => args
            .open()
            .map_err(Error::from)
            .and_then(|c| repl::session(c, args.options(), io::stdin().lock(), io::stdout().lock()).map_err(|source| {
                Error::Storage(StorageError::Io { path: "terminal".into(), source })
            })),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(status(&e))
        }
    }
}
