//! `tabqa`: ingest tables, train the classifiers, and answer questions.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tabqa::clauses::{SelectClassifier, WhereClassifier};
use tabqa::embed::{load_embeddings, EmbeddingStore, SimMatchConfig};
use tabqa::harness::{
    column_distributions, column_type_examples, evaluate_column_types, evaluate_retrieval,
    evaluate_select, evaluate_table_types, evaluate_where, load_kind_labels, load_manifest,
    normalize_corpus, pipeline_sweep, run_pipeline, select_examples, split_column_labels,
    table_type_examples, train_select, train_where, where_examples, Candidates, Corpus, Engine,
    EvalReport, HarnessError, ManifestEntry, ReportFormat, RowMode, Scope, Split, Task,
    TrainedClauses, Workspace, DEFAULT_UPSAMPLE,
};
use tabqa::nn::{Mlp, TrainConfig};
use tabqa::retrieval::Similarity;
use tabqa::tabular::{train_table_type, LogisticConfig, TableTypeModel};
use tabqa::typing::{parse_column_labels, ColumnLabel, ColumnTypeClassifier};

#[derive(Parser)]
#[command(name = "tabqa", version, about = "Question answering over web tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate raw tables, transpose key-value tables, and fill a workspace.
    Ingest(IngestArgs),
    /// Fit one model and write it as JSON.
    Train(TrainArgs),
    /// Rank the workspace tables for a question.
    Retrieve(RetrieveArgs),
    /// Score a trained model on labeled data.
    Eval(EvalArgs),
    /// Answer one question, or keep a read-eval loop open with --repl.
    Ask(AskArgs),
    /// Sweep table scopes and row-selection modes over a manifest split.
    PipelineEval(PipelineEvalArgs),
}

#[derive(Args)]
struct WorkspaceArg {
    /// Workspace directory (tables/, models/, reports/).
    #[arg(long, short = 'w', default_value = ".")]
    workspace: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Directory of raw .csv/.tsv tables.
    #[arg(long)]
    tables: PathBuf,
    /// Workspace directory to create or update.
    #[arg(long)]
    out: PathBuf,
    /// Gold table kinds (`table<TAB>kind`); listed tables skip the classifier.
    #[arg(long)]
    kinds: Option<PathBuf>,
    /// Trained table-type model for tables without a gold kind.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Word vectors to copy into the workspace.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Question manifest to validate and copy into the workspace.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_parser = parse_task)]
    task: Task,
    /// Labels: kinds TSV, column-type TSV, or manifest, by task.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; defaults to the task's file under models/.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    ws: WorkspaceArg,
    /// Raw tables directory (table-type task).
    #[arg(long)]
    tables: Option<PathBuf>,
    /// Manifest split to train on (select and where tasks).
    #[arg(long, default_value = "train", value_parser = parse_split)]
    split: Split,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Total copies of each positive example (select and where tasks).
    #[arg(long, default_value_t = DEFAULT_UPSAMPLE)]
    upsample: usize,
    /// Train the column-type model on every labeled column instead of
    /// holding out every fifth table.
    #[arg(long)]
    all_columns: bool,
}

#[derive(Args)]
struct RetrieveArgs {
    question: String,
    #[command(flatten)]
    ws: WorkspaceArg,
    #[arg(long, default_value = "inv-euclidean", value_parser = parse_similarity)]
    sim: Similarity,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_parser = parse_task)]
    task: Task,
    /// Manifest split (select, where, retrieval); column-type uses
    /// `train` for the fitted tables and anything else for the held-out ones.
    #[arg(long, default_value = "dev", value_parser = parse_split)]
    split: Split,
    /// Labels; defaults to the workspace manifest for manifest-based tasks.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    ws: WorkspaceArg,
    /// Raw tables directory (table-type task).
    #[arg(long)]
    tables: Option<PathBuf>,
    /// Model file; defaults to the task's file under models/.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "inv-euclidean", value_parser = parse_similarity)]
    sim: Similarity,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args)]
struct AskArgs {
    /// The question; optional with --repl.
    question: Option<String>,
    #[command(flatten)]
    ws: WorkspaceArg,
    #[arg(long, default_value = "all", value_parser = parse_scope)]
    scope: Scope,
    /// Gold table for the golden scope; otherwise looked up in the manifest.
    #[arg(long)]
    table: Option<String>,
    #[arg(long, default_value = "word-match", value_parser = parse_row_mode)]
    row_mode: RowMode,
    #[arg(long, default_value = "inv-euclidean", value_parser = parse_similarity)]
    sim: Similarity,
    /// Keep reading questions from standard input until EOF or `quit`.
    #[arg(long)]
    repl: bool,
}

#[derive(Args)]
struct PipelineEvalArgs {
    #[command(flatten)]
    ws: WorkspaceArg,
    /// Manifest; defaults to the workspace copy.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "test", value_parser = parse_split)]
    split: Split,
    #[arg(long, default_value = "inv-euclidean", value_parser = parse_similarity)]
    sim: Similarity,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: ReportFormat,
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse()
}

fn parse_split(s: &str) -> Result<Split, String> {
    s.parse()
}

fn parse_scope(s: &str) -> Result<Scope, String> {
    s.parse()
}

fn parse_row_mode(s: &str) -> Result<RowMode, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn parse_similarity(s: &str) -> Result<Similarity, String> {
    s.parse()
}

/// Failure categories mapped to exit codes.
enum Failure {
    /// Bad flag combination: exit 2.
    Usage(String),
    /// Invalid data or any runtime error: exit 1.
    Run(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Run(e.to_string())
    }
}

macro_rules! run_err {
    ($e:expr) => {
        $e.map_err(|e| Failure::Run(e.to_string()))
    };
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Train(a) => train(a),
        Command::Retrieve(a) => retrieve(a),
        Command::Eval(a) => eval(a),
        Command::Ask(a) => ask(a),
        Command::PipelineEval(a) => pipeline_eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn load_table_type_model(path: &Path) -> Result<TableTypeModel, Failure> {
    run_err!(serde_json::from_str(&read(path)?))
}

fn ingest(a: IngestArgs) -> Outcome {
    let raw = Corpus::load_dir(&a.tables)?;
    let labels = match &a.kinds {
        Some(p) => load_kind_labels(p)?,
        None => Vec::new(),
    };
    let model = a.model.as_deref().map(load_table_type_model).transpose()?;
    if model.is_none() && raw.ids().any(|id| !labels.iter().any(|l| l.table == id)) {
        eprintln!(
            "warning: tables without a gold kind are treated as entity-instance (no --model given)"
        );
    }
    let corpus = normalize_corpus(&raw, &labels, model.as_ref())?;
    let ws = Workspace::create(&a.out)?;
    corpus.write_dir(&ws.tables_dir())?;
    let store = match &a.embeddings {
        Some(p) => {
            let text = read(p)?;
            run_err!(EmbeddingStore::parse(&text))?;
            write(&ws.embeddings_path(), &text)?;
            Some(load_embeddings(&ws.embeddings_path()).map_err(|e| Failure::Run(e.to_string()))?)
        }
        None => None,
    };
    if let Some(p) = &a.manifest {
        let store = store.unwrap_or_else(|| EmbeddingStore::empty(1));
        let entries = load_manifest(p, &corpus, &store, &SimMatchConfig::default())?;
        write(&ws.manifest_path(), &read(p)?)?;
        println!("validated {} manifest entries", entries.len());
    }
    let transposed = raw
        .iter()
        .filter(|t| {
            corpus
                .get(t.id())
                .is_some_and(|n| n.headers() != t.headers())
        })
        .count();
    println!(
        "ingested {} tables ({} transposed) into {}",
        corpus.len(),
        transposed,
        ws.tables_dir().display()
    );
    Ok(())
}

fn workspace_store(ws: &Workspace) -> Result<EmbeddingStore, Failure> {
    let p = ws.embeddings_path();
    if !p.exists() {
        return Err(Failure::Usage(format!(
            "{} not found; run `ingest --embeddings` first",
            p.display()
        )));
    }
    run_err!(load_embeddings(&p))
}

fn load_column_types(ws: &Workspace) -> Result<ColumnTypeClassifier, Failure> {
    let p = ws.model_path(Workspace::COLUMN_TYPE_MODEL);
    if !p.exists() {
        return Err(Failure::Usage(format!(
            "{} not found; run `train --task column-type` first",
            p.display()
        )));
    }
    let m = run_err!(Mlp::load(&p))?;
    run_err!(ColumnTypeClassifier::from_model(m))
}

/// Corpus, store, and column-type distributions of a workspace.
fn engine(ws: &Workspace) -> Result<Engine, Failure> {
    let corpus = ws.load_corpus()?;
    let store = workspace_store(ws)?;
    let clf = load_column_types(ws)?;
    let dists = column_distributions(&corpus, &clf)?;
    Ok(Engine::new(corpus, store, dists)?)
}

fn manifest_for(
    ws: &Workspace,
    data: Option<&Path>,
    engine: &Engine,
) -> Result<Vec<ManifestEntry>, Failure> {
    let path = data
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ws.manifest_path());
    if !path.exists() {
        return Err(Failure::Usage(format!(
            "manifest {} not found; pass --data or ingest with --manifest",
            path.display()
        )));
    }
    Ok(load_manifest(
        &path,
        &engine.corpus,
        &engine.store,
        &SimMatchConfig::default(),
    )?)
}

fn of_split(entries: &[ManifestEntry], split: Split) -> Vec<ManifestEntry> {
    entries
        .iter()
        .filter(|e| e.split == split)
        .cloned()
        .collect()
}

fn column_labels(path: &Path) -> Result<Vec<ColumnLabel>, Failure> {
    run_err!(parse_column_labels(&read(path)?))
}

fn require_tables(tables: &Option<PathBuf>, task: Task) -> Result<Corpus, Failure> {
    let dir = tables
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("--tables is required for --task {task}")))?;
    Ok(Corpus::load_dir(dir)?)
}

fn default_model_file(task: Task) -> &'static str {
    match task {
        Task::TableType => Workspace::TABLE_TYPE_MODEL,
        Task::ColumnType => Workspace::COLUMN_TYPE_MODEL,
        Task::Select => Workspace::SELECT_MODEL,
        Task::Where | Task::Retrieval => Workspace::WHERE_MODEL,
    }
}

fn train(a: TrainArgs) -> Outcome {
    if !a.task.trainable() {
        return Err(Failure::Usage(format!(
            "--task {} cannot be trained",
            a.task
        )));
    }
    let ws = Workspace::new(&a.ws.workspace);
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| ws.model_path(default_model_file(a.task)));
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: a.learning_rate.unwrap_or(defaults.learning_rate),
        epochs: a.epochs.unwrap_or(defaults.epochs),
        seed: a.seed,
        batch_size: a.batch_size.unwrap_or(defaults.batch_size),
    };
    let (json, summary) = match a.task {
        Task::TableType => {
            let raw = require_tables(&a.tables, a.task)?;
            let ex = table_type_examples(&raw, &load_kind_labels(&a.data)?)?;
            let m = run_err!(train_table_type(&ex, LogisticConfig::default()))?;
            let acc = evaluate_table_types(&m, &ex)?.accuracy();
            let mut json = run_err!(serde_json::to_string_pretty(&m))?;
            json.push('\n');
            (
                json,
                format!("{} tables, training accuracy {acc:.3}", ex.len()),
            )
        }
        Task::ColumnType => {
            let corpus = ws.load_corpus()?;
            let labels = column_labels(&a.data)?;
            let used = if a.all_columns {
                labels
            } else {
                split_column_labels(&labels).0
            };
            let ex = column_type_examples(&corpus, &used)?;
            let clf = run_err!(ColumnTypeClassifier::train(&ex, &cfg))?;
            let acc = evaluate_column_types(&clf, &ex)?.accuracy();
            let json = clf.model().expect("trained").to_json();
            (
                json,
                format!("{} columns, training accuracy {acc:.3}", ex.len()),
            )
        }
        Task::Select | Task::Where => {
            let engine = engine(&ws)?;
            let entries = of_split(&manifest_for(&ws, Some(&a.data), &engine)?, a.split);
            if a.task == Task::Select {
                let ex = select_examples(&engine, &entries)?;
                let clf = train_select(&ex, &cfg, a.upsample)?;
                let acc = evaluate_select(&clf, &ex)?.accuracy();
                (
                    clf.model().expect("trained").to_json(),
                    format!(
                        "{} questions, {} columns, training accuracy {acc:.3}",
                        entries.len(),
                        ex.len()
                    ),
                )
            } else {
                let ex = where_examples(&engine, &entries)?;
                let clf = train_where(&ex, &cfg, a.upsample)?;
                let acc = evaluate_where(&clf, &ex)?.accuracy();
                (
                    clf.model().expect("trained").to_json(),
                    format!(
                        "{} questions, {} pairs, training accuracy {acc:.3}",
                        entries.len(),
                        ex.len()
                    ),
                )
            }
        }
        Task::Retrieval => unreachable!("rejected above"),
    };
    write(&out, &json)?;
    println!("{} model: {summary}; wrote {}", a.task, out.display());
    Ok(())
}

fn retrieve(a: RetrieveArgs) -> Outcome {
    let ws = Workspace::new(&a.ws.workspace);
    let corpus = ws.load_corpus()?;
    let index = run_err!(tabqa::retrieval::build_index(
        &corpus.iter().cloned().collect::<Vec<_>>()
    ))?;
    let ranked: Vec<(String, f64)> = index
        .score(&a.question, a.sim)
        .into_iter()
        .take(a.k)
        .collect();
    match a.format {
        ReportFormat::Json => {
            let v: Vec<serde_json::Value> = ranked
                .iter()
                .map(|(id, s)| serde_json::json!({"table": id, "score": s}))
                .collect();
            println!("{}", run_err!(serde_json::to_string_pretty(&v))?);
        }
        ReportFormat::Text => {
            let width = ranked.iter().map(|(id, _)| id.len()).max().unwrap_or(0);
            for (i, (id, s)) in ranked.iter().enumerate() {
                println!("{:>2}  {id:<width$}  {s:.6}", i + 1);
            }
        }
    }
    Ok(())
}

fn model_path(ws: &Workspace, explicit: &Option<PathBuf>, task: Task) -> PathBuf {
    explicit
        .clone()
        .unwrap_or_else(|| ws.model_path(default_model_file(task)))
}

fn load_select(ws: &Workspace, path: &Path) -> Result<SelectClassifier, Failure> {
    if !path.exists() {
        return Err(Failure::Usage(format!(
            "{} not found; run `train --task select` first (workspace {})",
            path.display(),
            ws.root().display()
        )));
    }
    run_err!(SelectClassifier::from_model(run_err!(Mlp::load(path))?))
}

fn load_where(ws: &Workspace, path: &Path) -> Result<WhereClassifier, Failure> {
    if !path.exists() {
        return Err(Failure::Usage(format!(
            "{} not found; run `train --task where` first (workspace {})",
            path.display(),
            ws.root().display()
        )));
    }
    run_err!(WhereClassifier::from_model(run_err!(Mlp::load(path))?))
}

fn eval(a: EvalArgs) -> Outcome {
    let ws = Workspace::new(&a.ws.workspace);
    let title = format!("{} / {}", a.task, a.split);
    let report = match a.task {
        Task::TableType => {
            let raw = require_tables(&a.tables, a.task)?;
            let data = a.data.as_ref().ok_or_else(|| {
                Failure::Usage("--data (kind labels) is required for --task table-type".into())
            })?;
            let ex = table_type_examples(&raw, &load_kind_labels(data)?)?;
            let m = load_table_type_model(&model_path(&ws, &a.model, a.task))?;
            EvalReport::new(format!("{} (all labeled tables)", a.task))
                .with_confusion(evaluate_table_types(&m, &ex)?)
        }
        Task::ColumnType => {
            let data = a.data.as_ref().ok_or_else(|| {
                Failure::Usage("--data (column labels) is required for --task column-type".into())
            })?;
            let (fit, held) = split_column_labels(&column_labels(data)?);
            let used = if a.split == Split::Train { fit } else { held };
            let ex = column_type_examples(&ws.load_corpus()?, &used)?;
            let m = run_err!(Mlp::load(&model_path(&ws, &a.model, a.task)))?;
            let clf = run_err!(ColumnTypeClassifier::from_model(m))?;
            let part = if a.split == Split::Train {
                "fitted tables"
            } else {
                "held-out tables"
            };
            EvalReport::new(format!("{} ({part})", a.task))
                .with_confusion(evaluate_column_types(&clf, &ex)?)
        }
        Task::Select | Task::Where | Task::Retrieval => {
            let engine = engine(&ws)?.with_similarity(a.sim);
            let entries = of_split(&manifest_for(&ws, a.data.as_deref(), &engine)?, a.split);
            match a.task {
                Task::Select => {
                    let clf = load_select(&ws, &model_path(&ws, &a.model, a.task))?;
                    EvalReport::new(title).with_confusion(evaluate_select(
                        &clf,
                        &select_examples(&engine, &entries)?,
                    )?)
                }
                Task::Where => {
                    let clf = load_where(&ws, &model_path(&ws, &a.model, a.task))?;
                    EvalReport::new(title)
                        .with_confusion(evaluate_where(&clf, &where_examples(&engine, &entries)?)?)
                }
                _ => {
                    let (p, adj) = evaluate_retrieval(&engine, &entries, a.sim, &[1, 3, 5, 10]);
                    let mut r = EvalReport::new(format!("{title} ({})", a.sim.name()));
                    r.p_at_k = p;
                    r.adjusted_p_at_k = adj;
                    r
                }
            }
        }
    };
    print!("{}", report.render(a.format));
    Ok(())
}

fn trained_clauses(ws: &Workspace) -> Result<TrainedClauses, Failure> {
    Ok(TrainedClauses {
        select: load_select(ws, &ws.model_path(Workspace::SELECT_MODEL))?,
        where_: load_where(ws, &ws.model_path(Workspace::WHERE_MODEL))?,
    })
}

fn ask(a: AskArgs) -> Outcome {
    if a.question.is_none() && !a.repl {
        return Err(Failure::Usage(
            "a question is required unless --repl is given".into(),
        ));
    }
    let ws = Workspace::new(&a.ws.workspace);
    let engine = engine(&ws)?.with_similarity(a.sim);
    let clauses = trained_clauses(&ws)?;
    let manifest = if ws.manifest_path().exists() {
        load_manifest(
            &ws.manifest_path(),
            &engine.corpus,
            &engine.store,
            &SimMatchConfig::default(),
        )?
    } else {
        Vec::new()
    };
    if let Some(t) = &a.table {
        if !engine.corpus.contains(t) {
            return Err(Failure::Usage(format!(
                "--table {t:?} is not in the workspace"
            )));
        }
    }
    let answer_one = |n: usize, question: &str| -> Outcome {
        let known = manifest
            .iter()
            .find(|e| e.question.trim() == question.trim());
        let candidates = match (a.scope, &a.table, known) {
            (Scope::GoldenTable, Some(t), _) => Candidates::Golden(t.clone()),
            (Scope::GoldenTable, None, Some(e)) => Candidates::Golden(e.table.clone()),
            (Scope::GoldenTable, None, None) => {
                return Err(Failure::Usage(
                    "--scope golden needs --table for a question that is not in the manifest"
                        .into(),
                ))
            }
            (Scope::IndividualSet, _, Some(e)) => a.scope.candidates(e, &manifest),
            (Scope::IndividualSet, _, None) => {
                return Err(Failure::Usage(
                    "--scope individual needs a question from the workspace manifest".into(),
                ))
            }
            (Scope::AllSets, _, _) => Candidates::All,
        };
        let id = known.map_or_else(|| format!("ask{n}"), |e| e.id.clone());
        let out = run_pipeline(&engine, &id, question, &candidates, a.row_mode, &clauses)
            .map_err(|e| Failure::Run(e.to_string()))?;
        let table = engine.corpus.get(&out.table).expect("pipeline table");
        println!("table: {}", out.table);
        println!("query: {}", out.query);
        if out.cells.is_empty() {
            println!("answer: (no cells)");
        }
        for (r, c) in out.cells.iter() {
            println!(
                "answer: {}  [row {r}, column {:?}]",
                table.cell(r, c).unwrap_or(""),
                table.headers()[c]
            );
        }
        Ok(())
    };
    if let Some(q) = &a.question {
        answer_one(0, q)?;
    }
    if a.repl {
        let stdin = io::stdin();
        let mut n = 1;
        loop {
            print!("> ");
            let _ = io::stdout().flush();
            let mut line = String::new();
            if stdin
                .lock()
                .read_line(&mut line)
                .map_err(|e| Failure::Run(e.to_string()))?
                == 0
            {
                break;
            }
            let q = line.trim();
            if q == "quit" || q == "exit" {
                break;
            }
            if q.is_empty() {
                continue;
            }
            match answer_one(n, q) {
                Ok(()) => {}
                Err(Failure::Usage(m)) | Err(Failure::Run(m)) => eprintln!("error: {m}"),
            }
            n += 1;
        }
    }
    Ok(())
}

fn pipeline_eval(a: PipelineEvalArgs) -> Outcome {
    let ws = Workspace::new(&a.ws.workspace);
    let engine = engine(&ws)?.with_similarity(a.sim);
    let clauses = trained_clauses(&ws)?;
    let manifest = manifest_for(&ws, a.data.as_deref(), &engine)?;
    let questions = of_split(&manifest, a.split);
    let mut report = EvalReport::new(format!(
        "pipeline / {} ({} questions, {})",
        a.split,
        questions.len(),
        a.sim.name()
    ));
    report.sweep = pipeline_sweep(&engine, &questions, &manifest, &clauses);
    let text = report.render(a.format);
    let ext = match a.format {
        ReportFormat::Json => "json",
        ReportFormat::Text => "txt",
    };
    write(
        &ws.reports_dir()
            .join(format!("pipeline-eval-{}.{ext}", a.split)),
        &text,
    )?;
    print!("{text}");
    Ok(())
}
