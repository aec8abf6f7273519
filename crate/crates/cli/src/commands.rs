use std::fs;
use std::path::{Path, PathBuf};

use imbrisk::data::{apply_preprocess, fit_preprocess, write_csv};
use imbrisk::ensemble::EnsembleKind;
use imbrisk::experiment::{
    model_label, pca_variants, refit, run_experiment, BestChoice, ClassifierKind, ExperimentOutcome,
    ExperimentParams, ExperimentReport,
};
use imbrisk::model::ModelFile;
use imbrisk::resample::{resample, Method, ResampleSpec};
use imbrisk::Dataset;

use crate::config::{validate_synthetic, DataSource, RunConfig};
use crate::output::{clear_incomplete, mark_incomplete, write_run};
use crate::{
    CliError, Command, DataArgs, ExperimentArgs, GenerateArgs, PreprocessArgs, ReportArgs, ResampleArgs, ScoreArgs,
    TrainArgs,
};

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Resample(a) => cmd_resample(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Score(a) => cmd_score(&a),
        Command::Experiment(a) => {
            let run = ExperimentRun::from_args(&a)?;
            run.execute().map(|_| ())
        }
        Command::Report(a) => cmd_report(&a),
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

fn load_data(d: &DataArgs) -> Result<Dataset, CliError> {
    DataSource::Csv {
        path: d.input.clone(),
        target: d.target.clone(),
        missing_token: d.missing_token.clone(),
    }
    .load()
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    s.parse::<Method>().map_err(|_| {
        CliError::Usage(format!(
            "unknown method `{s}` (expected original, RUS, CCUS, ROS or SMOTE)"
        ))
    })
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<(), CliError> {
    let mut cfg = load_config(a.config.as_deref())?;
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    let mut s = cfg.synthetic.clone().unwrap_or_default();
    s.n = a.n.or(s.n);
    s.d = a.d.or(s.d);
    s.positive_rate = a.positive_rate.or(s.positive_rate);
    s.separation = a.separation.or(s.separation);
    cfg.synthetic = Some(s);
    let source = cfg.synthetic_source()?;
    validate_synthetic(&source)?;
    let ds = source.load()?;
    write_csv(&ds, &a.output, &a.target, crate::config::DEFAULT_MISSING_TOKEN)?;
    log::info!("wrote {} rows to {}", ds.n_rows(), a.output.display());
    Ok(())
}

pub fn cmd_preprocess(a: &PreprocessArgs) -> Result<(), CliError> {
    let ds = load_data(&a.data)?;
    let stats = fit_preprocess(&ds, a.missing_threshold)?;
    let out = apply_preprocess(&ds, &stats)?;
    write_csv(&out, &a.output, &a.data.target, &a.data.missing_token)?;
    if let Some(path) = &a.stats {
        let json = serde_json::to_string_pretty(&stats).map_err(|e| CliError::Core(imbrisk::Error::Model(e.to_string())))?;
        fs::write(path, json + "\n").map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

pub fn cmd_resample(a: &ResampleArgs) -> Result<(), CliError> {
    let method = parse_method(&a.method)?;
    if method == Method::None {
        return Err(CliError::Usage("resample needs a resampler: RUS, CCUS, ROS or SMOTE".into()));
    }
    let mut ds = load_data(&a.data)?;
    if a.preprocess {
        let stats = fit_preprocess(&ds, 1.0)?;
        ds = apply_preprocess(&ds, &stats)?;
    }
    let spec = ResampleSpec {
        smote_k: a.smote_k,
        kmeans_max_iter: a.kmeans_max_iter,
        ..ResampleSpec::new(method, a.ratio, a.seed)
    };
    let out = resample(&ds, &spec)?;
    write_csv(&out, &a.output, &a.data.target, &a.data.missing_token)?;
    Ok(())
}

pub fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let mut cfg = load_config(a.config.as_deref())?;
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    let params = cfg.params()?;
    let classifier: ClassifierKind = a.classifier.parse().map_err(|e: imbrisk::Error| CliError::Usage(e.to_string()))?;
    let ensemble = match a.ensemble.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None => None,
        Some("bagging") => Some(EnsembleKind::Bagging),
        Some("boosting") => Some(EnsembleKind::Boosting),
        Some(other) => return Err(CliError::Usage(format!("unknown ensemble `{other}` (expected bagging or boosting)"))),
    };
    if ensemble.is_some() && classifier != ClassifierKind::Dt {
        return Err(CliError::Usage("ensembles are built from DT only".into()));
    }
    let method = parse_method(&a.method)?;
    let ds = load_data(&a.data)?;
    let ratio = match (method, a.ratio) {
        (Method::None, _) => imbrisk::data::positive_rate(&ds)?,
        (_, Some(r)) => r,
        (_, None) => return Err(CliError::Usage(format!("--ratio is required with method {method}"))),
    };
    let choice = BestChoice {
        label: model_label(classifier, ensemble, method, ratio),
        classifier,
        ensemble,
        method,
        target_positive: ratio,
        lambda: (classifier == ClassifierKind::L1lr).then_some(a.lambda),
        mean_auc: None,
        mean_recall: None,
        mean_precision: None,
        mean_f1: None,
    };
    let model = refit(&ds, &choice, &params)?;
    model.save(&a.output)?;
    Ok(())
}

/// Reads a CSV for scoring: the model's feature columns are parsed, every
/// other column is carried through untouched.
fn read_for_scoring(
    path: &Path,
    names: &[String],
    missing_token: &str,
) -> Result<(csv::StringRecord, Vec<csv::StringRecord>, Dataset), CliError> {
    let csv_err = |source| {
        CliError::Core(imbrisk::Error::Csv {
            path: path.to_path_buf(),
            source,
        })
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    let trimmed: Vec<&str> = header.iter().map(str::trim).collect();
    let missing: Vec<String> = names.iter().filter(|n| !trimmed.contains(&n.as_str())).cloned().collect();
    if !missing.is_empty() {
        return Err(imbrisk::Error::MissingColumns(missing).into());
    }
    let cols: Vec<usize> = names
        .iter()
        .map(|n| trimmed.iter().position(|h| h == n).expect("checked above"))
        .collect();
    let mut records = Vec::new();
    let mut features = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        for &j in &cols {
            let cell = rec.get(j).unwrap_or("").trim();
            if cell == missing_token.trim() {
                features.push(f64::NAN);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    imbrisk::Error::Data(format!("row {}, column `{}`: `{cell}` is not a number", row + 1, trimmed[j]))
                })?;
                features.push(v);
            }
        }
        records.push(rec);
    }
    let labels = vec![0; records.len()];
    let ds = Dataset::new(features, labels, names.to_vec())?;
    Ok((header, records, ds))
}

pub fn cmd_score(a: &ScoreArgs) -> Result<(), CliError> {
    let model = ModelFile::load(&a.model)?;
    let needed = match &model.preprocess {
        Some(stats) => stats.kept_names.clone(),
        None => model.feature_names.clone(),
    };
    let (header, records, ds) = read_for_scoring(&a.input, &needed, &a.missing_token)?;
    let scores = model.score_dataset(&ds)?;
    let csv_err = |source| {
        CliError::Core(imbrisk::Error::Csv {
            path: a.output.clone(),
            source,
        })
    };
    let mut w = csv::Writer::from_path(&a.output).map_err(csv_err)?;
    let mut h = header.clone();
    h.push_field("score");
    w.write_record(&h).map_err(csv_err)?;
    for (rec, s) in records.iter().zip(&scores) {
        let mut r = rec.clone();
        r.push_field(&s.to_string());
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(&a.output, e))
}

/// A fully resolved `experiment` invocation.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub source: DataSource,
    pub params: ExperimentParams,
    pub output: PathBuf,
    pub workers: usize,
}

impl ExperimentRun {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(Self {
            source: cfg.data_source()?,
            params: cfg.params()?,
            output: cfg
                .output
                .clone()
                .ok_or_else(|| CliError::Config("`output`: an output directory is required".into()))?,
            workers: cfg.workers(),
        })
    }

    pub fn from_args(a: &ExperimentArgs) -> Result<Self, CliError> {
        let mut cfg = load_config(a.config.as_deref())?;
        if a.seed.is_some() {
            cfg.seed = a.seed;
        }
        if a.output.is_some() {
            cfg.output = a.output.clone();
        }
        if a.workers.is_some() {
            cfg.workers = a.workers;
        }
        if let Some(input) = &a.input {
            let mut d = cfg.data.take().unwrap_or(crate::config::DataSection {
                path: input.clone(),
                target: crate::config::DEFAULT_TARGET.to_string(),
                missing_token: crate::config::DEFAULT_MISSING_TOKEN.to_string(),
            });
            d.path = input.clone();
            if let Some(t) = &a.target {
                d.target = t.clone();
            }
            if let Some(m) = &a.missing_token {
                d.missing_token = m.clone();
            }
            cfg.data = Some(d);
            cfg.synthetic = None;
        } else if a.synthetic {
            cfg.data = None;
            cfg.synthetic.get_or_insert_with(Default::default);
        }
        Self::from_config(&cfg)
    }

    /// Runs the workflow and writes the run directory. The `INCOMPLETE`
    /// marker stays behind, holding the error, if anything fails.
    pub fn execute(&self) -> Result<ExperimentOutcome, CliError> {
        let dir = &self.output;
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        mark_incomplete(dir, "run in progress")?;
        match self.execute_inner() {
            Ok(outcome) => {
                clear_incomplete(dir)?;
                Ok(outcome)
            }
            Err(e) => {
                let _ = mark_incomplete(dir, &format!("run failed: {e}"));
                Err(e)
            }
        }
    }

    fn execute_inner(&self) -> Result<ExperimentOutcome, CliError> {
        let ds = self.source.load()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", self.workers)))?;
        log::info!("experiment on {} rows with {} workers", ds.n_rows(), self.workers);
        let (outcome, pca) = pool.install(|| -> Result<_, CliError> {
            let outcome = run_experiment(&ds, &self.params)?;
            let pca = pca_variants(&ds, &self.params)?;
            Ok((outcome, pca))
        })?;
        write_run(&self.output, &ds, &outcome, &pca)?;
        eprintln!("optimal model: {}", outcome.report.optimal_model.choice.label);
        Ok(outcome)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "null".to_string(), |x| format!("{x:.4}"))
}

pub fn summarize(r: &ExperimentReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "data: {} rows, {} features, {} positives ({:.1}%)\n",
        r.data.n_rows,
        r.data.n_features,
        r.data.n_positive,
        100.0 * r.data.positive_rate
    ));
    s.push_str(&format!("folds: {} (seed {}), master seed {}\n", r.folds.k, r.folds.seed, r.params.seed));
    s.push_str(&format!("grid cells: {}\n\nbest per classifier:\n", r.grid.len()));
    let line = |label: &str, auc, recall, f1| format!("  {label:<28} AUC {}  recall {}  F1 {}\n", fmt_opt(auc), fmt_opt(recall), fmt_opt(f1));
    for b in r.best_per_classifier.values() {
        s.push_str(&line(&b.label, b.mean_auc, b.mean_recall, b.mean_f1));
    }
    if !r.ensemble_results.is_empty() {
        s.push_str("ensembles:\n");
        for c in &r.ensemble_results {
            s.push_str(&line(&c.label, c.mean_auc, c.mean_recall, c.mean_f1));
        }
    }
    let o = &r.optimal_model;
    s.push_str(&format!("\noptimal model: {} ({})\n", o.choice.label, o.rule));
    s.push_str(&format!("importance ({}):\n", r.importance_ranking.model_label));
    for (i, e) in r.importance_ranking.entries.iter().enumerate().take(10) {
        s.push_str(&format!("  {:>2}. {:<24} {:.4}\n", i + 1, e.feature, e.score));
    }
    s.push_str(&format!(
        "leak audit: {} training sets over {} folds, {} validation rows found in training\n",
        r.leak_audit.training_sets_checked, r.leak_audit.folds_checked, r.leak_audit.validation_rows_in_training
    ));
    if !r.warnings.is_empty() {
        s.push_str(&format!("warnings: {}\n", r.warnings.len()));
        for w in &r.warnings {
            s.push_str(&format!("  {w}\n"));
        }
    }
    s
}

pub fn cmd_report(a: &ReportArgs) -> Result<(), CliError> {
    let path = if a.path.is_dir() {
        a.path.join("report.json")
    } else {
        a.path.clone()
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let report = ExperimentReport::from_json(&text)?;
    if a.json {
        println!("{}", report.to_json()?);
    } else {
        print!("{}", summarize(&report));
    }
    Ok(())
}
