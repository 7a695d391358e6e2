use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};

use zwm_client::Client;
use zwm_core::api::{self, RegisterRequest, VerifyRequest, VerifyTarget};
use zwm_core::eval::{chart_csv, emit_csv, run_suite, SampleRef, SuiteConfig};
use zwm_core::registry::text_digest;
use zwm_core::{attack, corpus, frequency_table, AttackSpec, CompareMode, Registry, SystemClock, WatermarkInput};
use zwm_server::AppState;

use crate::{Authority, Command, EXIT_OK, EXIT_TAMPERED};

const EXIT_USAGE: u8 = 2;

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Keyword { input, top } => keyword(&input, top),
        Command::Embed {
            input,
            author,
            keyword,
            min_count,
            target,
            archive,
        } => embed(&input, author, keyword, min_count, target, archive),
        Command::Verify {
            input,
            target: authority,
            record_id,
            keyword,
            watermark,
            mode,
        } => {
            let target = match (record_id, keyword, watermark) {
                (Some(record_id), _, _) => VerifyTarget::Record { record_id },
                (None, Some(keyword), Some(wm)) => VerifyTarget::Watermark {
                    keyword,
                    watermark: serde_json::from_str::<WatermarkInput>(&wm).context("parsing --watermark")?,
                },
                _ => return usage("verify needs --record-id or --keyword with --watermark"),
            };
            verify(&input, target, authority, mode)
        }
        Command::Attack {
            input,
            output,
            insert_ratio,
            delete_ratio,
            reorder_ratio,
            seed,
            lexicon,
            keyword,
        } => {
            let lexicon = lexicon
                .map(|p| read_text(&p).map(|t| t.split_whitespace().map(str::to_owned).collect()))
                .transpose()?;
            let spec = AttackSpec {
                insert_ratio,
                delete_ratio,
                reorder_ratio,
                seed,
                lexicon,
            };
            attack_cmd(&input, output.as_deref(), &spec, keyword.as_deref())
        }
        Command::Evaluate { config, output, chart } => evaluate(&config, output.as_deref(), chart.as_deref()),
        Command::Serve { registry, addr } => serve(registry, addr),
        Command::Corpus {
            out,
            seed,
            insert_ratio,
            delete_ratio,
            attack_seed,
        } => write_corpus(&out, seed, AttackSpec::new(insert_ratio, delete_ratio, 0.0, attack_seed)),
    }
}

fn usage(msg: &str) -> Result<u8> {
    eprintln!("error: {msg}");
    Ok(EXIT_USAGE)
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        buf
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))?
    };
    String::from_utf8(bytes).with_context(|| format!("{} is not valid UTF-8", path.display()))
}

fn write_out(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(contents.as_bytes()).context("writing stdout"),
    }
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting async runtime")
}

fn keyword(input: &Path, top: usize) -> Result<u8> {
    let table = frequency_table(&read_text(input)?);
    let mut out = String::new();
    for (word, count) in table.ranked().into_iter().take(top) {
        out.push_str(&format!("{word} {count}\n"));
    }
    write_out(None, &out)?;
    Ok(EXIT_OK)
}

fn embed(input: &Path, author: String, keyword: Option<String>, min_count: usize, target: Authority, archive: bool) -> Result<u8> {
    let request = RegisterRequest {
        author,
        text: read_text(input)?,
        keyword,
        min_count: Some(min_count),
    };
    let record = match (target.registry, target.server) {
        (Some(path), None) => {
            let registry = open_registry(&path)?;
            let record = registry.register(&request.text, &request.author, &request.policy(), &SystemClock)?;
            if archive {
                archive_document(&path, &request.text)?;
            }
            record
        }
        (None, Some(url)) => {
            if archive {
                return usage("--archive only applies to a local --registry");
            }
            runtime()?.block_on(Client::new(url).register(&request))?
        }
        _ => return usage("embed needs --registry PATH or --server URL"),
    };
    println!("{}", serde_json::to_string(&record)?);
    Ok(EXIT_OK)
}

fn open_registry(path: &Path) -> Result<Registry> {
    let registry = Registry::open(path).with_context(|| format!("opening registry {}", path.display()))?;
    if let Some(torn) = registry.torn_tail() {
        eprintln!("warning: {}: {torn}", path.display());
    }
    Ok(registry)
}

fn archive_document(registry: &Path, text: &str) -> Result<()> {
    let dir = registry.parent().unwrap_or(Path::new(".")).join("archive");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let digest = text_digest(text.as_bytes());
    let name = digest.trim_start_matches("sha256:");
    let path = dir.join(format!("{name}.txt"));
    fs::write(&path, text).with_context(|| format!("archiving to {}", path.display()))
}

fn verify(input: &Path, target: VerifyTarget, authority: Authority, mode: CompareMode) -> Result<u8> {
    let by_record = matches!(target, VerifyTarget::Record { .. });
    if by_record && authority.registry.is_none() && authority.server.is_none() {
        return usage("--record-id needs --registry PATH or --server URL");
    }
    let request = VerifyRequest {
        text: read_text(input)?,
        target,
        mode: Some(mode),
    };
    let verdict = match (authority.registry, authority.server) {
        (Some(path), None) => api::verify(request, Some(&open_registry(&path)?))?,
        (None, Some(url)) => runtime()?.block_on(Client::new(url).verify(&request))?,
        _ => api::verify(request, None)?,
    };
    println!("{}", serde_json::to_string(&verdict)?);
    Ok(if verdict.tampered { EXIT_TAMPERED } else { EXIT_OK })
}

fn attack_cmd(input: &Path, output: Option<&Path>, spec: &AttackSpec, keyword: Option<&str>) -> Result<u8> {
    let text = read_text(input)?;
    let (mut attacked, report) = attack(&text, spec, keyword)?;
    attacked.push('\n');
    let report = serde_json::to_string(&report)?;
    match output {
        Some(path) => {
            write_out(Some(path), &attacked)?;
            println!("{report}");
        }
        None => {
            write_out(None, &attacked)?;
            eprintln!("{report}");
        }
    }
    Ok(EXIT_OK)
}

fn evaluate(config: &Path, output: Option<&Path>, chart: Option<&Path>) -> Result<u8> {
    let config = SuiteConfig::load(config)?;
    let rows = run_suite(&config);
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} trials failed; see the error column", rows.len());
    }
    write_out(output, &emit_csv(&rows)?)?;
    if let Some(path) = chart {
        write_out(Some(path), &chart_csv(&rows)?)?;
    }
    Ok(EXIT_OK)
}

fn serve(registry: PathBuf, addr: std::net::SocketAddr) -> Result<u8> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(io::stderr)
        .init();
    let registry = Arc::new(open_registry(&registry)?);
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        zwm_server::serve(listener, AppState::new(registry), shutdown).await.context("serving")
    })?;
    Ok(EXIT_OK)
}

fn write_corpus(out: &Path, seed: u64, spec: AttackSpec) -> Result<u8> {
    spec.validate()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut samples = Vec::new();
    for (id, label, text) in corpus::benchmark_samples(seed) {
        let file = format!("{id}.txt");
        fs::write(out.join(&file), &text).with_context(|| format!("writing {file}"))?;
        eprintln!("{file}: {label}, {} words", zwm_core::word_count(&text));
        samples.push(SampleRef { id, path: file.into() });
    }
    let config = SuiteConfig {
        samples,
        keywords: corpus::EVAL_KEYWORDS.iter().map(|k| k.to_string()).collect(),
        attacks: vec![spec],
        mode: Default::default(),
    };
    let path = out.join("suite.json");
    fs::write(&path, serde_json::to_string_pretty(&config)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}
