use std::fmt::Write;
use std::path::{Path, PathBuf};

use artlab_core::analytics::{
    at_risk, class_metrics, correlation_table, fmt4, importance_by_kind, train_and_evaluate, ConfusionMatrix,
    TrainConfig, TABLE_ORDER,
};
use artlab_core::dataset::{
    anonymize, load_code_writing, load_objective, load_scores, merge_scores, render_objective, render_scores,
    LabeledDataset, SplitSpec, LABEL_COUNT, OBJECTIVE_QUESTIONS,
};
use artlab_core::instruments::{grade_sheet, parse_bank, parse_responses, render_key_file, Bank, InstrumentError, QuestionKind};
use artlab_core::models::{load_model, save_model, HyperGrid, MaxFeatures, ModelKind};
use artlab_core::synth::{generate, KindWeights, SynthParams, SYNTH_KIND_MAP};

use crate::config::{parse_list, Ini};
use crate::error::CliError;
use crate::files::{emit, read, write_atomic};
use crate::{GradeArgs, PrepareArgs, ReportArgs, SynthArgs, TrainArgs};

fn required<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Validation(format!("missing {what}")))
}

fn path_or(flag: &Option<PathBuf>, ini: &Ini, key: &str) -> Option<PathBuf> {
    flag.clone().or_else(|| ini.get(key).map(PathBuf::from))
}

fn load_bank(path: &Path) -> Result<Bank, CliError> {
    parse_bank(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

pub fn bank_validate(path: &Path) -> Result<(), CliError> {
    let bank = load_bank(path)?;
    let problems = bank.check();
    for p in &problems {
        let tag = if matches!(p, InstrumentError::AmbiguousKey { .. }) {
            "ambiguous key"
        } else {
            "error"
        };
        println!("{}: {tag}: {p}", path.display());
    }
    if problems.is_empty() {
        println!("{}: {} questions, all keys derived", path.display(), bank.questions.len());
        Ok(())
    } else {
        Err(CliError::Validation(format!("{}: {} problem(s)", path.display(), problems.len())))
    }
}

pub fn bank_keygen(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let keyed = load_bank(path)?.keyed().map_err(|e| CliError::in_file(path, e))?;
    let keys: Vec<_> = keyed.into_iter().map(|(_, k)| k).collect();
    emit(out, &render_key_file(&keys))
}

pub fn grade(args: &GradeArgs, ini: &Ini) -> Result<(), CliError> {
    let bank_path = required(path_or(&args.bank, ini, "paths.bank"), "--bank")?;
    let responses_path = required(path_or(&args.responses, ini, "paths.responses"), "--responses")?;
    let out = required(path_or(&args.out, ini, "grade.out"), "--out")?;
    let keyed = load_bank(&bank_path)?.keyed().map_err(|e| CliError::in_file(&bank_path, e))?;
    let responses = parse_responses(&read(&responses_path)?).map_err(|e| CliError::in_file(&responses_path, e))?;
    if responses.is_empty() {
        eprintln!("warning: {} holds no responses", responses_path.display());
    }
    let sheet = grade_sheet(&keyed, &responses).map_err(|e| CliError::in_file(&responses_path, e))?;
    let rows: Vec<(String, Vec<u8>)> = sheet
        .rows
        .iter()
        .map(|r| (r.student_id.clone(), r.marks.iter().map(|m| m.value()).collect()))
        .collect();
    let mut diagnostics = String::from("student_id,question_id,issue\n");
    for d in &sheet.diagnostics {
        let _ = writeln!(diagnostics, "{d}");
    }
    write_atomic(&out, &render_objective(&rows))?;
    let mut sidecar = out.clone().into_os_string();
    sidecar.push(".diagnostics");
    write_atomic(Path::new(&sidecar), &diagnostics)?;
    eprintln!(
        "graded {} students, {} diagnostics",
        sheet.rows.len(),
        sheet.diagnostics.len()
    );
    Ok(())
}

pub fn prepare(args: &PrepareArgs, ini: &Ini) -> Result<(), CliError> {
    let objective_path = required(path_or(&args.objective, ini, "paths.objective"), "--objective")?;
    let cw_path = required(path_or(&args.code_writing, ini, "paths.code_writing"), "--code-writing")?;
    let salt = required(args.salt.clone().or_else(|| ini.get("prepare.salt").map(String::from)), "--salt")?;
    let out = required(path_or(&args.out, ini, "prepare.out"), "--out")?;
    let objective = load_objective(&read(&objective_path)?).map_err(|e| CliError::in_file(&objective_path, e))?;
    let cw = load_code_writing(&read(&cw_path)?).map_err(|e| CliError::in_file(&cw_path, e))?;
    let merged = merge_scores(&objective, &cw)?;
    let records = anonymize(&merged, &salt)?;
    write_atomic(&out, &render_scores(&records))
}

fn kind_map(kinds: &Option<String>, bank: &Option<PathBuf>, ini: &Ini) -> Result<Vec<QuestionKind>, CliError> {
    if let Some(path) = path_or(bank, ini, "paths.bank").filter(|_| kinds.is_none()) {
        return Ok(load_bank(&path)?.kinds());
    }
    match kinds.as_deref().or_else(|| ini.get("data.kinds")) {
        None => Ok(SYNTH_KIND_MAP.to_vec()),
        Some(text) => {
            let map = text
                .chars()
                .filter(|c| !c.is_whitespace() && *c != ',')
                .map(|c| c.to_string().parse::<QuestionKind>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::Validation)?;
            if map.len() != OBJECTIVE_QUESTIONS {
                return Err(CliError::Validation(format!(
                    "kinds: {} letters for {OBJECTIVE_QUESTIONS} questions",
                    map.len()
                )));
            }
            Ok(map)
        }
    }
}

fn load_dataset(path: &Path, kinds: &[QuestionKind], target: usize) -> Result<LabeledDataset, CliError> {
    let records = load_scores(&read(path)?).map_err(|e| CliError::in_file(path, e))?;
    Ok(LabeledDataset::from_records(&records, kinds, target)?)
}

fn list_or<T: std::str::FromStr>(flag: &Option<String>, ini: &Ini, key: &str, default: Vec<T>) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(text) => parse_list(text).map_err(|e| CliError::Validation(format!("{key}: {e}"))),
        None => Ok(ini.list(key)?.unwrap_or(default)),
    }
}

fn parse_depth(text: &str) -> Result<Option<usize>, String> {
    match text {
        "none" => Ok(None),
        d => d.parse().map(Some).map_err(|_| format!("bad max_depth `{d}`")),
    }
}

fn grid_from(ini: &Ini, folds: Option<usize>) -> Result<HyperGrid, CliError> {
    let default = HyperGrid::default();
    let max_depth = match ini.get("grid.max_depth") {
        None => default.max_depth,
        Some(text) => text
            .split(',')
            .map(|s| parse_depth(s.trim()))
            .collect::<Result<_, _>>()
            .map_err(CliError::Validation)?,
    };
    Ok(HyperGrid {
        n_trees: ini.list("grid.n_trees")?.unwrap_or(default.n_trees),
        max_depth,
        min_samples_leaf: ini.list("grid.min_samples_leaf")?.unwrap_or(default.min_samples_leaf),
        max_features: ini.list::<MaxFeatures>("grid.max_features")?.unwrap_or(default.max_features),
        l2: ini.list("grid.l2")?.unwrap_or(default.l2),
        k: match folds {
            Some(k) => k,
            None => ini.parsed("grid.k")?.unwrap_or(default.k),
        },
    })
}

fn seed(flag: Option<u64>, ini: &Ini) -> Result<u64, CliError> {
    match flag {
        Some(s) => Ok(s),
        None => required(ini.parsed("seed")?, "--seed"),
    }
}

fn target(flag: Option<usize>, ini: &Ini) -> Result<usize, CliError> {
    match flag {
        Some(t) => Ok(t),
        None => Ok(ini.parsed("data.target")?.unwrap_or(1)),
    }
}

pub fn train(args: &TrainArgs, ini: &Ini) -> Result<(), CliError> {
    let seed = seed(args.seed, ini)?;
    let scores = required(path_or(&args.scores, ini, "paths.scores"), "--scores")?;
    let out_dir = required(path_or(&args.out_dir, ini, "train.out_dir"), "--out-dir")?;
    let kinds = kind_map(&args.kinds, &args.bank, ini)?;
    let d = load_dataset(&scores, &kinds, target(args.target, ini)?)?;
    let fractions: Vec<f64> = list_or(&args.splits, ini, "train.splits", vec![0.25, 0.3])?;
    let models: Vec<ModelKind> = list_or(&args.models, ini, "train.models", ModelKind::ALL.to_vec())?;
    if fractions.is_empty() || models.is_empty() {
        return Err(CliError::Validation("need at least one split and one model".into()));
    }
    let config = TrainConfig {
        splits: fractions.iter().map(|&f| SplitSpec::new(f, seed)).collect(),
        kinds: models,
        grid: grid_from(ini, args.folds)?,
        seed,
    };
    let outcome = train_and_evaluate(&d, &config)?;
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    write_atomic(&out_dir.join("report.txt"), &outcome.report.render_text())?;
    write_atomic(&out_dir.join("report.kv"), &outcome.report.render_kv())?;
    for m in &outcome.models {
        let name = format!("model-{}-{}.txt", m.split, m.model.kind().name());
        write_atomic(&out_dir.join(name), &save_model(&m.model))?;
    }
    for e in &outcome.report.evaluations {
        eprintln!(
            "{} {}: cv {} test {}",
            e.split,
            e.kind.name(),
            fmt4(Some(e.cv_accuracy)),
            fmt4(e.test_accuracy)
        );
    }
    Ok(())
}

pub fn report(args: &ReportArgs, ini: &Ini) -> Result<(), CliError> {
    let scores = required(path_or(&args.scores, ini, "paths.scores"), "--scores")?;
    let model_path = required(path_or(&args.model, ini, "paths.model"), "--model")?;
    let kinds = kind_map(&args.kinds, &args.bank, ini)?;
    let d = load_dataset(&scores, &kinds, target(args.target, ini)?)?;
    let model = load_model(&read(&model_path)?).map_err(|e| CliError::in_file(&model_path, e))?;
    let predicted = model.predict_labels(&d.features);
    let all_labels: Vec<u8> = (0..LABEL_COUNT as u8).collect();
    let confusion = ConfusionMatrix::from_labels(&d.labels, &predicted, &all_labels)?;
    let table = correlation_table(&d)?;

    let mut out = String::new();
    let _ = writeln!(out, "model: {} ({})", model.kind().title(), model_path.display());
    let _ = writeln!(out, "students: {}  target: cw{}", d.len(), d.target_index);
    let _ = writeln!(out, "accuracy: {}", fmt4(confusion.accuracy()));
    let _ = writeln!(out, "\nconfusion matrix (rows true 0..6, columns predicted 0..6)");
    for row in &confusion.counts {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>4}")).collect();
        let _ = writeln!(out, "{}", cells.concat());
    }
    let _ = writeln!(
        out,
        "\n{:<7}{:>9}{:>11}{:>9}{:>9}{:>13}",
        "label", "support", "precision", "recall", "f1", "specificity"
    );
    for &c in &all_labels {
        let m = class_metrics(&confusion, c)?;
        let _ = writeln!(
            out,
            "{:<7}{:>9}{:>11}{:>9}{:>9}{:>13}",
            c,
            m.support,
            fmt4(m.precision),
            fmt4(m.recall),
            fmt4(m.f1),
            fmt4(m.specificity)
        );
    }
    let _ = writeln!(out, "\nSpearman with code writing");
    for kind in TABLE_ORDER {
        let _ = writeln!(out, "  {:<12}{}", kind.name(), fmt4(table.get(kind)));
    }
    let _ = writeln!(out, "  {:<12}{}", "ART average", fmt4(table.art_average));
    let _ = writeln!(out, "  Pearson, summed ART score: {}", fmt4(table.art_pearson));
    if let Some(imp) = model.importances() {
        let _ = writeln!(out, "\nimportance by kind");
        for (kind, v) in importance_by_kind(imp, &d.kind_map) {
            let _ = writeln!(out, "  {:<12}{}", kind.name(), fmt4(Some(v)));
        }
    }
    let risk = at_risk(&model, &d);
    let _ = writeln!(out, "\nat-risk students (predicted mark 0 or 0.5): {}", risk.len());
    for r in &risk {
        let _ = writeln!(out, "  {} {}", r.student_key, r.label);
    }
    emit(args.out.as_deref(), &out)
}

pub fn synth(args: &SynthArgs, ini: &Ini) -> Result<(), CliError> {
    let defaults = SynthParams::default();
    let weights = match args.weights.as_deref().or_else(|| ini.get("synth.weights")) {
        None => defaults.weights,
        Some(text) => {
            let w: Vec<f64> = parse_list(text).map_err(|e| CliError::Validation(format!("weights: {e}")))?;
            let [tracing, detection, comparison, analysis] = w[..] else {
                return Err(CliError::Validation("weights: expected four values".into()));
            };
            KindWeights {
                tracing,
                detection,
                comparison,
                analysis,
            }
        }
    };
    let params = SynthParams {
        students: match args.students {
            Some(n) => n,
            None => ini.parsed("synth.students")?.unwrap_or(defaults.students),
        },
        weights,
        weak_students: match args.weak {
            Some(n) => n,
            None => ini.parsed("synth.weak")?.unwrap_or(defaults.weak_students),
        },
        noise: match args.noise {
            Some(n) => n,
            None => ini.parsed("synth.noise")?.unwrap_or(defaults.noise),
        },
        seed: seed(args.seed, ini)?,
        ..defaults
    };
    let cohort = generate(&params)?;
    let out = path_or(&args.out, ini, "synth.out");
    emit(out.as_deref(), &render_scores(&cohort.records))
}
