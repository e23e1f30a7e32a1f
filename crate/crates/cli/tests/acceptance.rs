//! Acceptance suite: one PASS/FAIL line per criterion, with wall time
//! against its budget. Exits nonzero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tabqa::clauses::{
    featurize_select, featurize_where, ClauseContext, QuestionInfo, SelectFeatures, TagProvider,
    WhereFeatures,
};
use tabqa::embed::{
    load_embeddings, sim_match, sim_match_stage, EmbeddingStore, MatchStage, SimMatchConfig,
};
use tabqa::harness::{
    column_distributions, column_type_examples, evaluate_column_types, evaluate_pipeline,
    evaluate_table_types, load_kind_labels, load_manifest, metrics_from_confusion,
    normalize_corpus, parse_manifest, pipeline_sweep, select_examples, split_column_labels,
    table_type_examples, train_select, train_where, where_examples, Corpus, Engine, ManifestEntry,
    OracleClauses, RowMode, Scope, ScopeReport, Split, TrainedClauses, DEFAULT_UPSAMPLE,
};
use tabqa::nn::{gradient_check, Mlp, MlpSpec, TrainConfig};
use tabqa::retrieval::{build_index, precision_at_k, Similarity};
use tabqa::tabular::{
    matrix_transpose, train_table_type, transpose_key_value, LogisticConfig, Table, TableKind,
};
use tabqa::typing::{parse_column_labels, ColumnTypeClassifier};

type Check = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Fixture {
    raw: Corpus,
    corpus: Corpus,
    store: EmbeddingStore,
    manifest: Vec<ManifestEntry>,
}

fn load_fixture() -> Result<Fixture, String> {
    let raw = Corpus::load_dir(&fixture("tables")).map_err(fail)?;
    let kinds = load_kind_labels(&fixture("table_kinds.tsv")).map_err(fail)?;
    let corpus = normalize_corpus(&raw, &kinds, None).map_err(fail)?;
    let store = load_embeddings(&fixture("embeddings.vec")).map_err(fail)?;
    let manifest = load_manifest(
        &fixture("manifest.jsonl"),
        &corpus,
        &store,
        &SimMatchConfig::default(),
    )
    .map_err(fail)?;
    Ok(Fixture {
        raw,
        corpus,
        store,
        manifest,
    })
}

fn metric_arithmetic() -> Check {
    let rows = [
        ((182, 209, 30, 1001), ["83.2", "85.8", "46.5"]),
        ((95, 106, 0, 4107), ["97.5", "100.0", "47.3"]),
    ];
    let mut seen = Vec::new();
    for ((tp, fp, fn_, tn), want) in rows {
        let m = metrics_from_confusion(tp, fp, fn_, tn).map_err(fail)?;
        let got = [m.accuracy, m.recall, m.precision].map(|x| format!("{:.1}", x * 100.0));
        ensure(got == want, || {
            format!("({tp},{fp},{fn_},{tn}) gave {got:?}, expected {want:?}")
        })?;
        seen.push(got.join("/"));
    }
    Ok(seen.join("; "))
}

fn gradients() -> Check {
    let specs = [
        ("select", MlpSpec::select_head()),
        ("where", MlpSpec::where_head()),
        ("column-type", MlpSpec::column_type_head()),
    ];
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for (name, spec) in &specs {
        for seed in 0..10u64 {
            let model = Mlp::init(spec, seed).map_err(fail)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let data: Vec<(Vec<f64>, usize)> = (0..8)
                .map(|_| {
                    let x = (0..spec.input_dim)
                        .map(|_| rng.gen_range(-1.0..1.0))
                        .collect();
                    (x, rng.gen_range(0..model.classes()))
                })
                .collect();
            let r = gradient_check(&model, &data, 1e-5);
            ensure(r.max_relative_error < 1e-4, || {
                format!(
                    "{name} seed {seed}: max relative error {:.2e}",
                    r.max_relative_error
                )
            })?;
            ensure(r.params_checked * 2 > model.param_count(), || {
                format!(
                    "{name} seed {seed}: only {} of {} parameters checked",
                    r.params_checked,
                    model.param_count()
                )
            })?;
            worst = worst.max(r.max_relative_error);
            checked += r.params_checked;
        }
    }
    Ok(format!(
        "3 heads x 10 seeds, {checked} parameters, max relative error {worst:.2e}"
    ))
}

fn manifest_round_trip(fx: &Fixture) -> Check {
    let text: String = fx
        .manifest
        .iter()
        .map(|e| serde_json::to_string(e).map(|s| s + "\n"))
        .collect::<Result<_, _>>()
        .map_err(fail)?;
    let back = parse_manifest(&text).map_err(fail)?;
    ensure(back == fx.manifest, || {
        "re-serialized manifest differs".into()
    })?;
    let engine = Engine::new(
        fx.corpus.clone(),
        fx.store.clone(),
        gold_distributions(&fx.corpus)?,
    )
    .map_err(fail)?;
    let oracle = OracleClauses::from_manifest(&fx.manifest, &fx.corpus).map_err(fail)?;
    let r = evaluate_pipeline(
        &engine,
        &fx.manifest,
        &fx.manifest,
        Scope::GoldenTable,
        RowMode::WordMatch,
        &oracle,
    );
    ensure(r.macro_prf.f1 == 1.0, || {
        format!(
            "oracle macro F1 {:.3}; failures {:?}",
            r.macro_prf.f1,
            r.failures().collect::<Vec<_>>()
        )
    })?;
    Ok(format!(
        "{} entries parse, execute to their gold cells, oracle F1 1.000",
        fx.manifest.len()
    ))
}

/// One-hot column-type rows taken from the gold column labels.
fn gold_distributions(corpus: &Corpus) -> Result<BTreeMap<String, Vec<[f64; 7]>>, String> {
    let text = std::fs::read_to_string(fixture("column_types.tsv")).map_err(fail)?;
    let mut out: BTreeMap<String, Vec<[f64; 7]>> = corpus
        .iter()
        .map(|t| (t.id().to_string(), vec![[0.0; 7]; t.n_columns()]))
        .collect();
    for l in parse_column_labels(&text).map_err(fail)? {
        let cols = out
            .get_mut(&l.table)
            .ok_or_else(|| format!("unknown table {}", l.table))?;
        cols[l.column][l.column_type.index()] = 1.0;
    }
    Ok(out)
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..7);
    (0..n).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

fn transpose_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let (r, c) = (rng.gen_range(1..9), rng.gen_range(1..9));
        let grid: Vec<Vec<String>> = (0..r)
            .map(|_| (0..c).map(|_| random_word(&mut rng)).collect())
            .collect();
        ensure(matrix_transpose(&matrix_transpose(&grid)) == grid, || {
            format!("grid {i}: not an involution")
        })?;

        let keys: BTreeSet<String> = (0..rng.gen_range(1..10))
            .map(|k| format!("{}{k}", random_word(&mut rng)))
            .collect();
        let width = rng.gen_range(1..4);
        let rows: Vec<Vec<String>> = keys
            .iter()
            .map(|k| {
                std::iter::once(k.clone())
                    .chain((0..width).map(|_| random_word(&mut rng)))
                    .collect()
            })
            .collect();
        let headers = std::iter::once("key".to_string())
            .chain((0..width).map(|j| format!("value{j}")))
            .collect();
        let kv = Table::new(format!("kv{i}"), headers, rows.clone())
            .map_err(fail)?
            .with_kind(TableKind::KeyValue);
        let ei = transpose_key_value(&kv).map_err(fail)?;
        let mut before: Vec<&String> = rows.iter().flatten().collect();
        let mut after: Vec<&String> = ei
            .headers()
            .iter()
            .chain(ei.rows().iter().flatten())
            .collect();
        before.sort();
        after.sort();
        ensure(before == after, || {
            format!("table {i}: cell multiset changed")
        })?;
        ensure(
            ei.n_rows() == width && ei.rows().iter().all(|row| row.len() == ei.n_columns()),
            || format!("table {i}: output is not {width} rectangular rows"),
        )?;
    }
    Ok("100 random grids and 100 random key-value tables".into())
}

fn retrieval_sanity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tables: Vec<Table> = (0..10)
        .map(|i| {
            let vocab = |j: usize| format!("w{i}x{j}");
            let rows = (0..3)
                .map(|r| vec![vocab(2 * r + 1), vocab(2 * r + 2)])
                .collect();
            Table::new(format!("t{i}"), vec![vocab(20), vocab(21)], rows)
        })
        .collect::<Result<_, _>>()
        .map_err(fail)?;
    let index = build_index(&tables).map_err(fail)?;
    for sim in Similarity::ALL {
        let rankings: Vec<Vec<String>> = (0..10)
            .map(|i| {
                index
                    .score(&format!("which w{i}x1 has w{i}x4?"), sim)
                    .into_iter()
                    .map(|(id, _)| id)
                    .collect()
            })
            .collect();
        let gold: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
        let p1 = precision_at_k(&rankings, &gold, 1);
        ensure(p1 == 1.0, || format!("{} P@1 = {p1}", sim.name()))?;
    }
    let ids: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
    for trial in 0..1000 {
        let n = rng.gen_range(1..20);
        let rankings: Vec<Vec<String>> = (0..n)
            .map(|_| {
                let mut r = ids.clone();
                r.shuffle(&mut rng);
                r.truncate(rng.gen_range(0..=10));
                r
            })
            .collect();
        let gold: Vec<String> = (0..n)
            .map(|_| ids.choose(&mut rng).unwrap().clone())
            .collect();
        let ps: Vec<f64> = (1..=11)
            .map(|k| precision_at_k(&rankings, &gold, k))
            .collect();
        ensure(ps.windows(2).all(|w| w[0] <= w[1]), || {
            format!("trial {trial}: P@k not monotone: {ps:?}")
        })?;
    }
    Ok("P@1 = 1.0 for cosine, dot, inv-euclidean; P@k monotone on 1000 rankings".into())
}

fn table_types(fx: &Fixture) -> Check {
    let labels = load_kind_labels(&fixture("table_kinds.tsv")).map_err(fail)?;
    let ex = table_type_examples(&fx.raw, &labels).map_err(fail)?;
    ensure(ex.len() >= 40, || {
        format!("only {} labeled tables", ex.len())
    })?;
    let start = Instant::now();
    let full = train_table_type(&ex, LogisticConfig::default()).map_err(fail)?;
    let train_time = start.elapsed();
    ensure(train_time < Duration::from_secs(10), || {
        format!("training took {train_time:?}")
    })?;
    let resub = evaluate_table_types(&full, &ex).map_err(fail)?.accuracy();
    let mut correct = 0;
    for fold in 0..5 {
        let (test, train): (Vec<_>, Vec<_>) =
            ex.iter().enumerate().partition(|(i, _)| i % 5 == fold);
        let train: Vec<_> = train.into_iter().map(|(_, e)| *e).collect();
        let test: Vec<_> = test.into_iter().map(|(_, e)| *e).collect();
        let m = train_table_type(&train, LogisticConfig::default()).map_err(fail)?;
        correct += evaluate_table_types(&m, &test).map_err(fail)?.correct();
    }
    let cv = correct as f64 / ex.len() as f64;
    ensure(cv >= 0.95, || format!("5-fold accuracy {cv:.3}"))?;
    Ok(format!(
        "{} tables, 5-fold accuracy {cv:.3}, training accuracy {resub:.3}, fit in {train_time:.1?}",
        ex.len()
    ))
}

fn train_column_types(
    fx: &Fixture,
    cfg: &TrainConfig,
) -> Result<(ColumnTypeClassifier, f64, usize, usize, Duration), String> {
    let text = std::fs::read_to_string(fixture("column_types.tsv")).map_err(fail)?;
    let labels = parse_column_labels(&text).map_err(fail)?;
    let (fit, held) = split_column_labels(&labels);
    let start = Instant::now();
    let clf =
        ColumnTypeClassifier::train(&column_type_examples(&fx.corpus, &fit).map_err(fail)?, cfg)
            .map_err(fail)?;
    let elapsed = start.elapsed();
    let cm = evaluate_column_types(
        &clf,
        &column_type_examples(&fx.corpus, &held).map_err(fail)?,
    )
    .map_err(fail)?;
    Ok((clf, cm.accuracy(), labels.len(), held.len(), elapsed))
}

fn column_types(fx: &Fixture) -> Check {
    let (_, acc, total, held, elapsed) = train_column_types(fx, &TrainConfig::default())?;
    ensure(total >= 200, || format!("only {total} labeled columns"))?;
    ensure(elapsed < Duration::from_secs(30), || {
        format!("training took {elapsed:?}")
    })?;
    ensure(acc >= 0.90, || format!("held-out accuracy {acc:.3}"))?;
    Ok(format!(
        "{total} columns, held-out accuracy {acc:.3} on {held}, fit in {elapsed:.1?}"
    ))
}

fn one_hot_ok(block: &[f64]) -> bool {
    block.iter().all(|&x| x == 0.0 || x == 1.0) && block.iter().sum::<f64>() <= 1.0
}

fn feature_layout(fx: &Fixture) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let starters = [
        "who", "what", "when", "where", "how many", "which", "how much", "is", "did", "name", "",
    ];
    let vocab: Vec<String> = fx
        .corpus
        .iter()
        .flat_map(|t| t.headers().to_vec())
        .collect();
    let tables: Vec<&Table> = fx.corpus.iter().collect();
    let mut inputs = 0;
    for i in 0..200 {
        let mut words: Vec<String> = vec![starters.choose(&mut rng).unwrap().to_string()];
        for _ in 0..rng.gen_range(1..8) {
            words.push(if rng.gen_bool(0.5) {
                vocab.choose(&mut rng).unwrap().clone()
            } else {
                random_word(&mut rng)
            });
        }
        let text = words.join(" ") + "?";
        let q = QuestionInfo::analyze(&format!("r{i}"), &text, &TagProvider::Heuristic)
            .map_err(fail)?;
        let t = *tables.choose(&mut rng).unwrap();
        let dists: Vec<[f64; 7]> = (0..t.n_columns())
            .map(|_| {
                let raw: Vec<f64> = (0..7).map(|_| rng.gen_range(0.0..1.0)).collect();
                let s: f64 = raw.iter().sum();
                std::array::from_fn(|k| raw[k] / s)
            })
            .collect();
        let ctx = ClauseContext {
            question: &q,
            table: t,
            column_types: &dists,
            store: &fx.store,
        };
        let select: BTreeSet<usize> = (0..t.n_columns()).filter(|_| rng.gen_bool(0.3)).collect();
        for col in 0..t.n_columns() {
            let s = featurize_select(&ctx, col).map_err(fail)?;
            ensure(s.as_slice().len() == 25, || "select width".into())?;
            ensure(one_hot_ok(&s.0[SelectFeatures::QUESTION_TYPE]), || {
                format!("{text:?}: select question-type block")
            })?;
            ensure(
                s.0[SelectFeatures::COLUMN_TYPE].iter().sum::<f64>() <= 1.0 + 1e-9,
                || "select column-type block".into(),
            )?;
            for word in 0..q.tokens.len() {
                let w = featurize_where(&ctx, col, word, &select).map_err(fail)?;
                ensure(w.as_slice().len() == 77, || "where width".into())?;
                for (name, block) in [
                    ("question-type", WhereFeatures::QUESTION_TYPE),
                    ("pos", WhereFeatures::POS),
                    ("ner", WhereFeatures::NER),
                    ("dep", WhereFeatures::DEP),
                ] {
                    ensure(one_hot_ok(&w.0[block]), || {
                        format!("{text:?}: where {name} block")
                    })?;
                }
                ensure(
                    w.0[WhereFeatures::COLUMN_TYPE].iter().sum::<f64>() <= 1.0 + 1e-9,
                    || "where column-type block".into(),
                )?;
                inputs += 1;
            }
            inputs += 1;
        }
    }
    Ok(format!(
        "{inputs} feature vectors from 200 random questions"
    ))
}

fn sim_operator(fx: &Fixture) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = SimMatchConfig::default();
    let empty = EmbeddingStore::empty(fx.store.dim());
    let vocab: Vec<String> = fx
        .corpus
        .iter()
        .flat_map(|t| t.rows().iter().flatten().cloned())
        .collect();
    for _ in 0..500 {
        let s = vocab.choose(&mut rng).unwrap();
        ensure(sim_match(&empty, &cfg, s, s), || {
            format!("{s:?} does not match itself")
        })?;
        let kw = random_word(&mut rng);
        let cell = format!("{}{kw}{}", random_word(&mut rng), random_word(&mut rng));
        ensure(
            sim_match_stage(&empty, &cfg, &cell, &kw.to_uppercase()) == Some(MatchStage::Substring),
            || format!("{kw:?} in {cell:?} did not match as a substring"),
        )?;
    }
    let words: Vec<String> = std::fs::read_to_string(fixture("embeddings.vec"))
        .map_err(fail)?
        .lines()
        .skip(1)
        .filter_map(|l| l.split_whitespace().next().map(str::to_string))
        .collect();
    let thresholds = [0.05, 0.2, 0.45, 0.8, 1.2, 2.0];
    for _ in 0..500 {
        let a = words.choose(&mut rng).unwrap();
        let b = words.choose(&mut rng).unwrap();
        let hits: Vec<bool> = thresholds
            .iter()
            .map(|&t| {
                sim_match(
                    &fx.store,
                    &SimMatchConfig::new(t, cfg.distance).unwrap(),
                    a,
                    b,
                )
            })
            .collect();
        ensure(hits.windows(2).all(|w| !w[0] || w[1]), || {
            format!("{a:?} ~ {b:?} not monotone: {hits:?}")
        })?;
    }
    let toy = load_embeddings(&fixture("toy.vec")).map_err(fail)?;
    ensure(
        sim_match_stage(&toy, &cfg, "Spouse", "husband") == Some(MatchStage::Embedding),
        || "spouse ~ husband failed on the toy vectors".into(),
    )?;
    ensure(!sim_match(&toy, &cfg, "capital", "husband"), || {
        "capital ~ husband matched".into()
    })?;
    Ok("reflexive, substring fallback, monotone in threshold, spouse ~ husband".into())
}

fn sweep(fx: &Fixture) -> Check {
    let cfg = TrainConfig {
        seed: 7,
        ..TrainConfig::default()
    };
    let (clf, ..) = train_column_types(fx, &TrainConfig::default())?;
    let dists = column_distributions(&fx.corpus, &clf).map_err(fail)?;
    let engine = Engine::new(fx.corpus.clone(), fx.store.clone(), dists).map_err(fail)?;
    let train: Vec<ManifestEntry> = fx
        .manifest
        .iter()
        .filter(|e| e.split == Split::Train)
        .cloned()
        .collect();
    let held: Vec<ManifestEntry> = fx
        .manifest
        .iter()
        .filter(|e| e.split != Split::Train)
        .cloned()
        .collect();
    let select = train_select(
        &select_examples(&engine, &train).map_err(fail)?,
        &cfg,
        DEFAULT_UPSAMPLE,
    )
    .map_err(fail)?;
    let where_ = train_where(
        &where_examples(&engine, &train).map_err(fail)?,
        &cfg,
        DEFAULT_UPSAMPLE,
    )
    .map_err(fail)?;
    let predictor = TrainedClauses { select, where_ };
    let reports = pipeline_sweep(&engine, &held, &fx.manifest, &predictor);
    let f1 = |scope: Scope, mode: RowMode| -> f64 {
        reports
            .iter()
            .find(|r: &&ScopeReport| r.scope == scope && r.row_mode == mode)
            .map_or(f64::NAN, |r| r.macro_prf.f1)
    };
    let grid: Vec<String> = Scope::ALL
        .iter()
        .map(|&s| {
            format!(
                "{} {:.3}/{:.3}",
                s.name(),
                f1(s, RowMode::WordMatch),
                f1(s, RowMode::Embedding)
            )
        })
        .collect();
    let detail = format!(
        "{} held-out questions, F1 word-match/embedding: {}",
        held.len(),
        grid.join(", ")
    );
    for mode in RowMode::ALL {
        let (g, i, a) = (
            f1(Scope::GoldenTable, mode),
            f1(Scope::IndividualSet, mode),
            f1(Scope::AllSets, mode),
        );
        ensure(g >= i && i >= a, || {
            format!("scope order broken for {}: {detail}", mode.name())
        })?;
    }
    for scope in Scope::ALL {
        ensure(
            f1(scope, RowMode::WordMatch) >= f1(scope, RowMode::Embedding),
            || format!("row-mode order broken for {}: {detail}", scope.name()),
        )?;
    }
    Ok(detail)
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tabqa"))
        .args(args)
        .output()
        .map_err(fail)?;
    ensure(out.status.success(), || {
        format!(
            "tabqa {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(fail)?;
    let ws = dir.path().join("ws");
    let ws_s = ws.to_str().ok_or("non-UTF-8 temp path")?;
    let path = |name: &str| fixture(name).to_string_lossy().into_owned();
    run_cli(&[
        "ingest",
        "--tables",
        &path("tables"),
        "--out",
        ws_s,
        "--kinds",
        &path("table_kinds.tsv"),
        "--embeddings",
        &path("embeddings.vec"),
        "--manifest",
        &path("manifest.jsonl"),
    ])?;
    let tasks: [(&str, String, &[&str]); 4] = [
        (
            "table-type",
            path("table_kinds.tsv"),
            &["--tables", &path("tables")],
        ),
        ("column-type", path("column_types.tsv"), &[]),
        ("select", path("manifest.jsonl"), &[]),
        ("where", path("manifest.jsonl"), &[]),
    ];
    for (task, data, extra) in &tasks {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{task}-{run}.json"));
            let out_s = out.to_string_lossy().into_owned();
            let mut args = vec![
                "train", "--task", task, "--data", data, "--seed", "42", "-w", ws_s, "--out",
                &out_s,
            ];
            args.extend_from_slice(extra);
            run_cli(&args)?;
            outputs.push(std::fs::read(&out).map_err(fail)?);
        }
        ensure(outputs[0] == outputs[1], || {
            format!("{task}: the two model files differ")
        })?;
        if *task == "column-type" {
            run_cli(&[
                "train", "--task", task, "--data", data, "--seed", "42", "-w", ws_s,
            ])?;
        }
    }
    Ok(
        "table-type, column-type, select and where trained twice with seed 42: identical bytes"
            .into(),
    )
}

struct Outcome {
    ok: bool,
}

fn criterion(name: &str, budget: Duration, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the time budget")),
        Err(e) => (false, e),
    };
    println!(
        "{} {name:<24} {:>10.3?} / {:<6?} {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed,
        budget
    );
    Outcome { ok }
}

fn main() -> ExitCode {
    let ms = Duration::from_millis;
    let secs = Duration::from_secs;
    let fx = match load_fixture() {
        Ok(fx) => fx,
        Err(e) => {
            println!("FAIL fixture loading: {e}");
            return ExitCode::FAILURE;
        }
    };
    let results = [
        criterion("metric-arithmetic", ms(1), metric_arithmetic),
        criterion("gradient-correctness", secs(5), gradients),
        criterion("manifest-round-trip", secs(1), || manifest_round_trip(&fx)),
        criterion("transpose-soundness", secs(1), transpose_soundness),
        criterion("retrieval-sanity", secs(1), retrieval_sanity),
        criterion("table-type-accuracy", secs(10), || table_types(&fx)),
        criterion("column-type-accuracy", secs(30), || column_types(&fx)),
        criterion("feature-layout", secs(1), || feature_layout(&fx)),
        criterion("sim-operator", secs(1), || sim_operator(&fx)),
        criterion("directional-claims", secs(120), || sweep(&fx)),
        criterion("determinism", secs(60), determinism),
    ];
    let failed = results.iter().filter(|r| !r.ok).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
