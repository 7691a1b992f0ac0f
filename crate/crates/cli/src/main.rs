use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use taskdraft_core::bundled;
use taskdraft_core::pipeline::{draft, ingest, DraftError};
use taskdraft_core::script::AuthorScript;
use taskdraft_core::uispec::RuleTable;
use taskdraft_core::{Graph, Language, Lexicon, RealizeError, TaskModel};

#[derive(Parser)]
#[command(
    name = "taskdraft",
    version,
    about = "Author task models and draft multilingual instructions from them"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive interface objects and actions from a UI specification.
    Ingest {
        spec: PathBuf,
        /// Output model file (default: stdout)
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Derivation rule table (default: the bundled rules)
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Model to derive into (default: the bundled base model)
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Apply an author script to a model; all or nothing.
    Apply {
        model: PathBuf,
        script: PathBuf,
        /// Output model file (default: rewrite MODEL)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Draft instructions for a goal, one text and provenance file per language.
    Draft {
        model: PathBuf,
        goal: String,
        #[arg(long, value_delimiter = ',', default_value = "en,fr")]
        lang: Vec<String>,
        /// Output directory (default: current directory)
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Directory of `<lang>.lex` files overriding the bundled lexicons
        #[arg(long)]
        lexicon_dir: Option<PathBuf>,
    },
    /// Export the procedural structure as a graph.
    Graph {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check the model's structural invariants.
    Validate { model: PathBuf },
    /// Serve the HTTP API for the authoring UI over one model file.
    Serve {
        model: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        lexicon_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

// Exit codes are part of the interface.
const EXIT_PARSE: u8 = 1;
const EXIT_WRITE: u8 = 2;
const EXIT_SCRIPT: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_LEXEME: u8 = 5;
const EXIT_PLAN: u8 = 6;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Ingest { spec, out, rules, base } => cmd_ingest(&spec, out.as_deref(), rules.as_deref(), base.as_deref()),
        Cmd::Apply { model, script, out } => cmd_apply(&model, &script, out.as_deref()),
        Cmd::Draft {
            model,
            goal,
            lang,
            out,
            lexicon_dir,
        } => cmd_draft(&model, &goal, &lang, out.as_deref(), lexicon_dir.as_deref()),
        Cmd::Graph { model, format, out } => cmd_graph(&model, format, out.as_deref()),
        Cmd::Validate { model } => cmd_validate(&model),
        Cmd::Serve {
            model,
            port,
            host,
            lexicon_dir,
        } => cmd_serve(&model, &host, port, lexicon_dir.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("taskdraft: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format_args!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<TaskModel> {
    TaskModel::from_text(&read(path)?).map_err(|e| Failure::new(EXIT_PARSE, format_args!("{}: {e}", path.display())))
}

/// Writes via a sibling temp file and a rename, so readers never see half a
/// file and a failed run leaves the old content alone.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let fail = |e: std::io::Error| Failure::new(EXIT_WRITE, format_args!("{}: {e}", path.display()));
    let name = path
        .file_name()
        .ok_or_else(|| Failure::new(EXIT_WRITE, format_args!("{}: not a file path", path.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, content).map_err(fail)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_ingest(spec: &Path, out: Option<&Path>, rules: Option<&Path>, base: Option<&Path>) -> Result<()> {
    let text = read(spec)?;
    let rules = match rules {
        Some(p) => {
            RuleTable::parse(&read(p)?).map_err(|e| Failure::new(EXIT_PARSE, format_args!("{}: {e}", p.display())))?
        }
        None => bundled::default_rules(),
    };
    let base = match base {
        Some(p) => load_model(p)?,
        None => bundled::base_model(),
    };
    let (model, derivation) =
        ingest(&text, &rules, &base).map_err(|e| Failure::new(EXIT_PARSE, format_args!("{}: {e}", spec.display())))?;
    emit(out, &model.to_text())?;
    let summary = format!(
        "derived {} actions, {} objects",
        derivation.actions.len(),
        derivation.objects.len()
    );
    // keep stdout clean when the model itself goes there
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_apply(model_path: &Path, script_path: &Path, out: Option<&Path>) -> Result<()> {
    let model = load_model(model_path)?;
    let script = AuthorScript::parse(&read(script_path)?)
        .map_err(|e| Failure::new(EXIT_PARSE, format_args!("{}: {e}", script_path.display())))?;
    let (updated, outcomes) = script.apply(&model, &bundled::grammar()).map_err(|e| {
        Failure::new(
            EXIT_SCRIPT,
            format_args!("{}: command {}: {e}", script_path.display(), e.index),
        )
    })?;
    write_atomic(out.unwrap_or(model_path), &updated.to_text())?;
    println!("applied {} commands", outcomes.len());
    Ok(())
}

fn load_lexicons(dir: Option<&Path>, languages: &[Language]) -> Result<Vec<Lexicon>> {
    let Some(dir) = dir else { return Ok(Vec::new()) };
    let mut lexicons = Vec::new();
    for lang in languages {
        let path = dir.join(format!("{lang}.lex"));
        if !path.exists() {
            continue;
        }
        let lexicon = Lexicon::parse(&read(&path)?)
            .map_err(|e| Failure::new(EXIT_PARSE, format_args!("{}: {e}", path.display())))?;
        if &lexicon.language != lang {
            return Err(Failure::new(
                EXIT_PARSE,
                format_args!(
                    "{}: lexicon is for `{}`, not `{lang}`",
                    path.display(),
                    lexicon.language
                ),
            ));
        }
        lexicons.push(lexicon);
    }
    Ok(lexicons)
}

fn cmd_draft(
    model_path: &Path,
    goal: &str,
    langs: &[String],
    out: Option<&Path>,
    lexicon_dir: Option<&Path>,
) -> Result<()> {
    let model = load_model(model_path)?;
    let languages: Vec<Language> = langs.iter().map(|l| Language::new(l.trim())).collect();
    let lexicons = load_lexicons(lexicon_dir, &languages)?;
    let docs = draft(&model, goal, &languages, &lexicons).map_err(|e| match e {
        DraftError::Invalid(violations) => {
            let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Failure::new(EXIT_INVALID, format_args!("model is invalid:\n{}", lines.join("\n")))
        }
        DraftError::Realize(e @ RealizeError::MissingLexeme { .. }) => Failure::new(EXIT_LEXEME, e),
        e @ DraftError::UnsupportedLanguage(_) => Failure::new(EXIT_LEXEME, e),
        // no-plan-for-goal, unknown goal, unfilled slot, ...
        e => Failure::new(EXIT_PLAN, e),
    })?;
    let dir = out.unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_WRITE, format_args!("{}: {e}", dir.display())))?;
    for doc in &docs {
        let text_path = dir.join(format!("{goal}.{}.txt", doc.language));
        let prov_path = dir.join(format!("{goal}.{}.provenance.json", doc.language));
        write_atomic(&text_path, &doc.text)?;
        write_atomic(&prov_path, &doc.sidecar_json())?;
        println!("{}", text_path.display());
    }
    Ok(())
}

fn cmd_graph(model_path: &Path, format: GraphFormat, out: Option<&Path>) -> Result<()> {
    let model = load_model(model_path)?;
    let graph = Graph::of(&model);
    let text = match format {
        GraphFormat::Dot => graph.to_dot(),
        GraphFormat::Json => graph.to_json(),
    };
    emit(out, &text)
}

fn cmd_validate(model_path: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let violations = model.validate();
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("ok");
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_INVALID,
            format_args!("{} violation(s)", violations.len()),
        ))
    }
}

fn cmd_serve(model_path: &Path, host: &str, port: u16, lexicon_dir: Option<&Path>) -> Result<()> {
    let model = load_model(model_path)?;
    let languages = [Language::new("en"), Language::new("fr")];
    let session = taskdraft_service::Session::new(model)
        .with_lexicons(load_lexicons(lexicon_dir, &languages)?)
        .with_save_path(model_path);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new(EXIT_WRITE, e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Failure::new(EXIT_WRITE, format_args!("{host}:{port}: {e}")))?;
        eprintln!(
            "serving {} on http://{}",
            model_path.display(),
            listener.local_addr().map_err(|e| Failure::new(EXIT_WRITE, e))?
        );
        taskdraft_service::serve(session, listener)
            .await
            .map_err(|e| Failure::new(EXIT_WRITE, e))
    })
}
