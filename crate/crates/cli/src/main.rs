use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zwm_core::CompareMode;

mod commands;

/// Exit codes are a scripting contract.
pub const EXIT_OK: u8 = 0;
pub const EXIT_TAMPERED: u8 = 1;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "zwm", version, about = "Zero-watermarking for plain-text documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the most frequent words of a document (keyword candidates).
    Keyword {
        /// Document path, or "-" for stdin.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Generate a document's watermark and register it with the authority.
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        author: String,
        /// Keyword to anchor the watermark; defaults to the most frequent word.
        #[arg(long)]
        keyword: Option<String>,
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        #[command(flatten)]
        target: Authority,
        /// Also keep a copy of the document in `archive/` next to the registry.
        #[arg(long)]
        archive: bool,
    },
    /// Regenerate a document's watermark and compare it with a registered one.
    /// Exits 0 when authentic, 1 when tampered.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        target: Authority,
        #[arg(long, conflicts_with_all = ["keyword", "watermark"], required_unless_present = "keyword")]
        record_id: Option<String>,
        #[arg(long, requires = "watermark")]
        keyword: Option<String>,
        /// Watermark JSON: `[[4,1],[4,3]]` or a full watermark object.
        #[arg(long, requires = "keyword")]
        watermark: Option<String>,
        #[arg(long, default_value_t = CompareMode::PositionalSymbol)]
        mode: CompareMode,
    },
    /// Apply a seeded insertion/deletion/reordering attack to a document.
    Attack {
        #[arg(long)]
        input: PathBuf,
        /// Attacked text destination; stdout when omitted (report then goes to stderr).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long = "insert", default_value_t = 0.0)]
        insert_ratio: f64,
        #[arg(long = "delete", default_value_t = 0.0)]
        delete_ratio: f64,
        #[arg(long = "reorder", default_value_t = 0.0)]
        reorder_ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Whitespace-separated words to insert; defaults to the document's own words.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Count edits touching this keyword's neighborhood.
        #[arg(long)]
        keyword: Option<String>,
    },
    /// Run an evaluation suite and write per-trial results as CSV.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Per-keyword WDR series for plotting.
        #[arg(long)]
        chart: Option<PathBuf>,
    },
    /// Run the certifying authority as an HTTP service.
    Serve {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Write ten synthetic benchmark samples and a matching suite config.
    Corpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2010)]
        seed: u64,
        #[arg(long = "insert", default_value_t = 0.10)]
        insert_ratio: f64,
        #[arg(long = "delete", default_value_t = 0.05)]
        delete_ratio: f64,
        #[arg(long = "attack-seed", default_value_t = 1)]
        attack_seed: u64,
    },
}

/// Where records live: a local registry file or a running service.
#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
struct Authority {
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Base URL of a running `zwm serve`.
    #[arg(long)]
    server: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
