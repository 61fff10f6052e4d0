use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ppkg_core::graph::{degree_summary, export_graph_json, parse_graphml};
use ppkg_pipeline::{run_pipeline, RunConfig};

#[derive(Parser)]
#[command(name = "ppkg", version, about = "Cluster and report on privacy-policy knowledge graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the projection × clustering grid over a file or directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the config's inputs.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Replaces the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Convert one GraphML file to the explorer's graph JSON.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Run { config, input, out, seed } => {
            let mut c = RunConfig::load(&config)?;
            if let Some(i) = input {
                c.inputs = vec![i];
            }
            if let Some(o) = out {
                c.output_dir = o;
            }
            if let Some(s) = seed {
                c.set_seed(s);
            }
            let summary = run_pipeline(&c)?;
            print!("{}", summary.corpus_report.to_text());
            for e in &summary.manifest.errors {
                eprintln!("skipped {}: {}", e.input, e.error);
            }
            println!("wrote {} files to {}", summary.manifest.files.len() + 1, summary.output_dir.display());
            Ok(summary.exit_code())
        }
        Command::Serve { config, bind } => {
            let c = RunConfig::load(&config)?;
            let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
            rt.block_on(ppkg_pipeline::serve::serve(c, &bind))?;
            Ok(0)
        }
        Command::Export { input, out } => {
            let bytes = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let g = parse_graphml(&bytes).with_context(|| format!("parsing {}", input.display()))?;
            std::fs::write(&out, export_graph_json(&g, &degree_summary(&g)))
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
