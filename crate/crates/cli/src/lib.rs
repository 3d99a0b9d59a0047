//! Command-line front end: `build`, `export`, `stats` and `serve`.
//!
//! Exit codes: 0 on success, 1 when the input is invalid (including missing
//! input files and bad arguments), 2 on environment or I/O failure.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use clap::{Args, Parser, Subcommand};
use terridoc::ontology::{LinkPolicy, DEFAULT_NEAR_KM};
use terridoc::pipeline::{self, BuildOptions, PipelineConfig};
use terridoc::Error;
use tower_http::services::ServeDir;

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_ENVIRONMENT: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "terridoc",
    version,
    about = "Build a territory ontology from library subject indexing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the whole pipeline and write terridoc.json, ontology.ttl, graph.dot and report.json.
    Build(BuildArgs),
    /// Re-serialize an existing terridoc.json as Turtle and DOT.
    Export {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print entity and edge counts of a terridoc.json.
    Stats {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Serve the graph and a static UI directory over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Notice XML file; repeat for several files.
    #[arg(long = "notices", required = true)]
    pub notices_paths: Vec<PathBuf>,
    #[arg(long = "thesaurus")]
    pub thesaurus_path: PathBuf,
    #[arg(long = "gazetteer")]
    pub gazetteer_path: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Directory with det.txt, prep.txt and cc.txt overriding the built-in lists.
    #[arg(long)]
    pub lexicon_dir: Option<PathBuf>,
    /// Derive spatial_within and spatial_near edges between places.
    #[arg(long)]
    pub spatial_relations: bool,
    #[arg(long, default_value_t = DEFAULT_NEAR_KM)]
    pub near_km: f64,
    /// What to do with a text qualifier that names no existing concept: existing|create.
    #[arg(long, default_value = "existing", value_parser = parse_policy)]
    pub link_policy: LinkPolicy,
    /// Country qualifier accepted for gazetteer rows without an admin area; repeatable.
    #[arg(long = "country", default_values_t = [String::from("France")])]
    pub countries: Vec<String>,
}

fn parse_policy(s: &str) -> Result<LinkPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl From<BuildArgs> for PipelineConfig {
    fn from(a: BuildArgs) -> Self {
        PipelineConfig {
            notices_paths: a.notices_paths,
            thesaurus_path: a.thesaurus_path,
            gazetteer_path: a.gazetteer_path,
            out_dir: a.out_dir,
            lexicon_dir: a.lexicon_dir,
            options: BuildOptions {
                spatial_relations: a.spatial_relations,
                near_km: a.near_km,
                link_policy: a.link_policy,
                countries: a.countries,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Static UI assets served at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
}

fn exit_code(e: &Error) -> ExitCode {
    ExitCode::from(if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_ENVIRONMENT
    })
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("terridoc: {e}");
    exit_code(e)
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Build(args) => match pipeline::run_build(&args.into()) {
            Ok(out) => {
                let c = &out.report.ontology;
                println!(
                    "built {} concepts, {} instances, {} edges from {} notices",
                    c.concepts, c.instances, c.edges, out.report.graph.notices
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Export { graph, out_dir } => match pipeline::run_export(&graph, &out_dir) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Stats { graph } => match pipeline::run_stats(&graph) {
            Ok(counts) => {
                println!("{}", serde_json::to_string_pretty(&counts).expect("counts serialize"));
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Serve(args) => serve(args),
    }
}

/// Router over an already loaded graph document. Read-only.
pub fn app(graph_bytes: Vec<u8>, ui_dir: Option<&Path>) -> Router {
    let graph = axum::body::Bytes::from(graph_bytes);
    let router = Router::new()
        .route(
            "/graph.json",
            get(move || {
                let graph = graph.clone();
                async move { ([(header::CONTENT_TYPE, "application/json")], graph) }
            }),
        )
        .route(
            "/health",
            get(|| async { ([(header::CONTENT_TYPE, "application/json")], r#"{"status":"ok"}"#) }),
        );
    match ui_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router.fallback(|| async { StatusCode::NOT_FOUND.into_response() }),
    }
}

/// Reads and checks the graph file. Missing or invalid graphs are input errors.
pub fn load_graph(path: &Path) -> Result<Vec<u8>, Error> {
    pipeline::load_ontology(path)?;
    std::fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn serve(args: ServeArgs) -> ExitCode {
    let bytes = match load_graph(&args.graph) {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    if let Some(dir) = &args.ui_dir {
        if !dir.is_dir() {
            return fail(&Error::Validation(format!("UI directory not found: {}", dir.display())));
        }
    }
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            return fail(&Error::Io {
                path: "tokio runtime".into(),
                source: e,
            })
        }
    };
    let addr = SocketAddr::new(args.host, args.port);
    let result = runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("serving {} on http://{}", args.graph.display(), listener.local_addr()?);
        axum::serve(listener, app(bytes, args.ui_dir.as_deref())).await
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&Error::Io {
            path: addr.to_string(),
            source: e,
        }),
    }
}
