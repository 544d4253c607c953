//! The seven pipeline commands, each a thin layer over the library:
//! resolve flags into a config, read the stage's inputs from the workdir,
//! call the library, write outputs atomically, and record the run in the
//! manifest.
//!
//! A typical session:
//!
//! ```text
//! unresolved synth     --workdir run --questions 2000 --seed 42
//! unresolved ingest    --workdir run --posts run/Posts.xml --users run/Users.xml \
//!                      --analysis-date 2015-02-18
//! unresolved featurize --workdir run --topics 20 --lda-iters 200 --seed 42
//! unresolved evaluate  --workdir run --folds 10 --seed 42
//! unresolved train     --workdir run --algorithm tree --feature-set reduced
//! unresolved predict   --workdir run
//! unresolved report    --workdir run
//! ```

use std::fs;
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, Context};
use chrono::NaiveDateTime;
use serde::Serialize;

use unresolved_core::ingest::{
    apply_selection, assemble_records, build_header, link_threads, owner_histories, parse_posts,
    parse_users, posts_to_xml, read_dataset, users_to_xml, write_dataset, Label, ParseOutcome,
    SelectionCriteria,
};
use unresolved_core::learner::{
    assemble, cross_validate, fit_pipeline, read_feature_csv, write_feature_csv, Algorithm,
    EvaluationReport, FeatureSet, ModelFile,
};
use unresolved_core::pipeline::{
    featurize, read_extended_csv, summarize, to_feature_records, write_extended_csv,
    write_histogram_csv, write_summary_csv, TopicConfig,
};
use unresolved_core::readability::ScorerWeights;
use unresolved_core::synth::{generate, SynthConfig};
use unresolved_core::topics::{store, AlphaMode};

use crate::args::{
    AlgorithmArg, EvaluateArgs, FeaturizeArgs, IngestArgs, PredictArgs, ReportArgs, SynthArgs,
    TrainArgs,
};
use crate::failure::{data, internal, usage, Failure};
use crate::workspace::{record_run, write_atomic, Workdir};

/// Default RNG seed shared by the generator, the topic model, and fold
/// shuffling when no `--seed` is given.
pub const DEFAULT_SEED: u64 = 42;

fn read_input(path: &Path) -> Result<fs::File, Failure> {
    fs::File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(data)
}

fn save(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(data)
}

fn record<C: Serialize>(
    workdir: &Workdir,
    command: &str,
    config: &C,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<(), Failure> {
    record_run(workdir, command, config, inputs, outputs).map_err(|e| data(anyhow!(e)))
}

// ---------------------------------------------------------------------------
// synth

pub fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&args.unresolved_fraction) {
        return Err(usage(anyhow!(
            "--unresolved-fraction must be between 0 and 1, got {}",
            args.unresolved_fraction
        )));
    }
    if args.questions < 2 * args.folds {
        eprintln!(
            "warning: {} questions cannot fill {} folds with both classes; \
             evaluation on this dump may fail (want at least {})",
            args.questions,
            args.folds,
            2 * args.folds
        );
    }
    let workdir = Workdir::new(args.workdir);
    workdir.ensure().map_err(|e| data(anyhow!(e)))?;

    let config = SynthConfig {
        n_questions: args.questions,
        unresolved_fraction: args.unresolved_fraction,
        seed: args.seed,
        analysis_date: args.analysis_date,
    };
    let output = generate(&config);

    let posts_path = args.posts.unwrap_or_else(|| workdir.posts());
    let users_path = args.users.unwrap_or_else(|| workdir.users());
    save(&posts_path, posts_to_xml(&output.posts).as_bytes())?;
    save(&users_path, users_to_xml(&output.users).as_bytes())?;

    let mut labels = String::from("question_id,label\n");
    for (id, label) in &output.expected {
        labels.push_str(&format!("{id},{label}\n"));
    }
    save(&workdir.expected_labels(), labels.as_bytes())?;

    #[derive(Serialize)]
    struct Echo {
        questions: usize,
        unresolved_fraction: f64,
        seed: u64,
        analysis_date: NaiveDateTime,
    }
    record(
        &workdir,
        "synth",
        &Echo {
            questions: args.questions,
            unresolved_fraction: args.unresolved_fraction,
            seed: args.seed,
            analysis_date: args.analysis_date,
        },
        &[],
        &[&posts_path, &users_path, &workdir.expected_labels()],
    )?;

    let unresolved = output.expected.iter().filter(|(_, l)| *l == Label::Unresolved).count();
    println!(
        "generated {} posts and {} users ({} target questions: {} unresolved, {} resolved)",
        output.posts.len(),
        output.users.len(),
        output.expected.len(),
        unresolved,
        output.expected.len() - unresolved
    );
    println!("wrote {} and {}", posts_path.display(), users_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// ingest

pub fn cmd_ingest(args: IngestArgs) -> Result<(), Failure> {
    let workdir = Workdir::new(args.workdir);
    workdir.ensure().map_err(|e| data(anyhow!(e)))?;

    let posts: ParseOutcome<_> = parse_posts(BufReader::new(read_input(&args.posts)?))
        .with_context(|| format!("parsing {}", args.posts.display()))
        .map_err(data)?;
    let users: ParseOutcome<_> = parse_users(BufReader::new(read_input(&args.users)?))
        .with_context(|| format!("parsing {}", args.users.display()))
        .map_err(data)?;

    let criteria = SelectionCriteria {
        min_age_days: args.min_age_days,
        min_answers: args.min_answers,
        analysis_date: args.analysis_date,
    };
    let (threads, link_report) = link_threads(posts.rows, &users.rows);
    let (retained, selection) =
        apply_selection(&threads, &criteria).map_err(|e| data(anyhow!(e)))?;
    if retained.is_empty() {
        return Err(data(anyhow!(
            "no questions satisfy the selection criteria \
             (min age {} days, min {} answers as of {})",
            criteria.min_age_days,
            criteria.min_answers,
            criteria.analysis_date
        )));
    }

    let histories = owner_histories(&threads);
    let records = assemble_records(&retained, &histories).map_err(|e| internal(anyhow!(e)))?;
    let header = build_header(
        &criteria,
        &link_report,
        &selection,
        posts.row_errors.len(),
        users.row_errors.len(),
    );

    let mut buffer = Vec::new();
    write_dataset(&mut buffer, &header, &records).map_err(|e| internal(anyhow!(e)))?;
    save(&workdir.dataset(), &buffer)?;

    #[derive(Serialize)]
    struct Echo {
        posts: String,
        users: String,
        min_age_days: u32,
        min_answers: u32,
        analysis_date: NaiveDateTime,
    }
    record(
        &workdir,
        "ingest",
        &Echo {
            posts: args.posts.display().to_string(),
            users: args.users.display().to_string(),
            min_age_days: args.min_age_days,
            min_answers: args.min_answers,
            analysis_date: args.analysis_date,
        },
        &[&args.posts, &args.users],
        &[&workdir.dataset()],
    )?;

    let c = &header.counts;
    println!(
        "parsed {} questions and {} linked answers ({} malformed post rows, {} malformed user rows)",
        c.questions_seen,
        link_report.answers_linked,
        c.post_row_errors,
        c.user_row_errors
    );
    println!("retained: {} ({} resolved, {} unresolved)", c.retained, c.resolved, c.unresolved);
    println!(
        "dropped: {} too young, {} with fewer than {} answers, {} without an owner profile",
        c.dropped_too_young, c.dropped_too_few_answers, criteria.min_answers, c.dropped_missing_owner
    );
    if c.dangling_answers > 0 || c.forced_unresolved > 0 {
        println!(
            "irregularities: {} dangling answers, {} questions whose accepted answer is missing",
            c.dangling_answers, c.forced_unresolved
        );
    }
    println!("wrote {}", workdir.dataset().display());
    Ok(())
}

// ---------------------------------------------------------------------------
// featurize

pub fn cmd_featurize(args: FeaturizeArgs) -> Result<(), Failure> {
    let workdir = Workdir::new(args.workdir);
    let dataset_path = workdir.dataset();
    let (header, records) = read_dataset(BufReader::new(read_input(&dataset_path)?))
        .with_context(|| format!("reading {}", dataset_path.display()))
        .map_err(data)?;

    // The delay metric is measured against the same snapshot date the
    // selection used, so the date comes from the dataset, not a flag.
    let analysis_date = header.criteria.analysis_date;
    let topic_config = TopicConfig {
        topics: args.topics,
        iterations: args.lda_iters,
        seed: args.seed,
        alpha_mode: args.alpha_mode.into(),
    };
    let output = featurize(&records, analysis_date, &topic_config, &ScorerWeights::default_weights())
        .map_err(|e| data(anyhow!(e)))?;

    let mut model_buf = Vec::new();
    store::save_model(&mut model_buf, &output.model).map_err(|e| internal(anyhow!(e)))?;
    save(&workdir.topic_model(), &model_buf)?;

    let mut features_buf = Vec::new();
    write_feature_csv(&mut features_buf, &to_feature_records(&output.table))
        .map_err(|e| internal(anyhow!(e)))?;
    save(&workdir.features(), &features_buf)?;

    let mut extended_buf = Vec::new();
    write_extended_csv(&mut extended_buf, &output.table.rows).map_err(|e| internal(anyhow!(e)))?;
    save(&workdir.features_extended(), &extended_buf)?;

    #[derive(Serialize)]
    struct Echo {
        topics: usize,
        lda_iters: usize,
        seed: u64,
        alpha_mode: AlphaMode,
        analysis_date: NaiveDateTime,
    }
    record(
        &workdir,
        "featurize",
        &Echo {
            topics: args.topics,
            lda_iters: args.lda_iters,
            seed: args.seed,
            alpha_mode: topic_config.alpha_mode,
            analysis_date,
        },
        &[&dataset_path],
        &[&workdir.topic_model(), &workdir.features(), &workdir.features_extended()],
    )?;

    let arr_imputed = output.table.rows.iter().filter(|r| r.arr_imputed).count();
    let tr_imputed = output.table.rows.iter().filter(|r| r.tr_imputed).count();
    println!(
        "featurized {} questions over {} topics ({} sweeps, seed {})",
        output.table.rows.len(),
        args.topics,
        args.lda_iters,
        args.seed
    );
    if arr_imputed > 0 {
        println!(
            "imputed rejection ratio for {arr_imputed} first-time askers (fill {:.4})",
            output.table.arr_fill
        );
    }
    if tr_imputed > 0 {
        println!(
            "imputed text readability for {tr_imputed} too-short bodies (fill {:.4})",
            output.table.tr_fill
        );
    }
    println!(
        "wrote {}, {}, {}",
        workdir.topic_model().display(),
        workdir.features().display(),
        workdir.features_extended().display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train

pub fn cmd_train(args: TrainArgs) -> Result<(), Failure> {
    let algorithm = match args.algorithm {
        AlgorithmArg::All => {
            return Err(usage(anyhow!(
                "train fits a single model file; pick --algorithm tree, logistic, or nb"
            )))
        }
        other => Algorithm::from(other),
    };
    let workdir = Workdir::new(args.workdir);
    let features_path = workdir.features();
    let records = read_feature_csv(read_input(&features_path)?)
        .with_context(|| format!("reading {}", features_path.display()))
        .map_err(data)?;
    let feature_set = FeatureSet::from(args.feature_set);
    let matrix = assemble(&records, feature_set).map_err(|e| data(anyhow!(e)))?;
    let rows: Vec<_> = matrix.rows.iter().collect();
    let pipeline = fit_pipeline(algorithm, &rows).map_err(|e| data(anyhow!(e)))?;

    let model_file = ModelFile {
        algorithm,
        feature_set,
        feature_names: matrix.feature_names.clone(),
        pipeline,
    };
    let mut text =
        serde_json::to_string_pretty(&model_file).map_err(|e| internal(anyhow!(e)))?;
    text.push('\n');
    let model_path = args.model.unwrap_or_else(|| workdir.model());
    save(&model_path, text.as_bytes())?;

    #[derive(Serialize)]
    struct Echo {
        algorithm: Algorithm,
        feature_set: FeatureSet,
    }
    record(
        &workdir,
        "train",
        &Echo { algorithm, feature_set },
        &[&features_path],
        &[&model_path],
    )?;

    println!(
        "trained {} on the {} feature set ({} rows, {} features)",
        algorithm,
        feature_set,
        matrix.rows.len(),
        matrix.feature_names.len()
    );
    println!("wrote {}", model_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate

/// The evaluation document: configuration echo plus one record per
/// (algorithm, feature set) pair.
#[derive(Serialize)]
pub struct EvaluationDocument {
    pub folds: usize,
    pub seed: u64,
    pub records: Vec<EvaluationReport>,
}

pub fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let workdir = Workdir::new(args.workdir);
    let features_path = workdir.features();
    let records = read_feature_csv(read_input(&features_path)?)
        .with_context(|| format!("reading {}", features_path.display()))
        .map_err(data)?;

    let algorithms: Vec<Algorithm> = match args.algorithm {
        AlgorithmArg::All => Algorithm::ALL.to_vec(),
        one => vec![Algorithm::from(one)],
    };
    let sets: Vec<FeatureSet> = match args.feature_set {
        None => FeatureSet::ALL.to_vec(),
        Some(one) => vec![FeatureSet::from(one)],
    };

    let mut reports = Vec::new();
    for &set in &sets {
        let matrix = assemble(&records, set).map_err(|e| data(anyhow!(e)))?;
        for &algorithm in &algorithms {
            let report = cross_validate(algorithm, set, &matrix, args.folds, args.seed)
                .map_err(|e| data(anyhow!(e)))?;
            reports.push(report);
        }
    }

    let document = EvaluationDocument { folds: args.folds, seed: args.seed, records: reports };
    let mut text = serde_json::to_string_pretty(&document).map_err(|e| internal(anyhow!(e)))?;
    text.push('\n');
    save(&workdir.evaluation(), text.as_bytes())?;

    #[derive(Serialize)]
    struct Echo {
        algorithm: String,
        feature_set: Option<FeatureSet>,
        folds: usize,
        seed: u64,
    }
    record(
        &workdir,
        "evaluate",
        &Echo {
            algorithm: args.algorithm.to_string(),
            feature_set: args.feature_set.map(FeatureSet::from),
            folds: args.folds,
            seed: args.seed,
        },
        &[&features_path],
        &[&workdir.evaluation()],
    )?;

    println!("{}", render_table(&document.records));
    println!("evaluated {} rows; wrote {}", records.len(), workdir.evaluation().display());
    Ok(())
}

fn percent(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}%", v * 100.0),
        None => "n/a".to_string(),
    }
}

/// Render evaluation records as a fixed-width table, one row per
/// (algorithm, feature set): accuracy overall, precision and recall on
/// the unresolved class.
pub fn render_table(records: &[EvaluationReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<20} {:<10} {:>17} {:>10} {:>10}\n",
        "Algorithm", "Metrics", "Overall Accuracy", "Precision", "Recall"
    ));
    for r in records {
        out.push_str(&format!(
            "{:<20} {:<10} {:>17} {:>10} {:>10}\n",
            r.algorithm.to_string(),
            r.feature_set.to_string().to_uppercase(),
            percent(Some(r.accuracy)),
            percent(r.precision_unresolved),
            percent(r.recall_unresolved),
        ));
    }
    out.pop();
    out
}

// ---------------------------------------------------------------------------
// predict

pub fn cmd_predict(args: PredictArgs) -> Result<(), Failure> {
    let workdir = Workdir::new(args.workdir);
    let model_path = args.model.unwrap_or_else(|| workdir.model());
    let features_path = args.features.unwrap_or_else(|| workdir.features());

    let model_text = fs::read_to_string(&model_path)
        .with_context(|| format!("cannot open {}", model_path.display()))
        .map_err(data)?;
    let model_file: ModelFile = serde_json::from_str(&model_text)
        .with_context(|| format!("parsing {}", model_path.display()))
        .map_err(data)?;

    let records = read_feature_csv(read_input(&features_path)?)
        .with_context(|| format!("reading {}", features_path.display()))
        .map_err(data)?;
    let matrix = assemble(&records, model_file.feature_set).map_err(|e| data(anyhow!(e)))?;
    if matrix.feature_names != model_file.feature_names {
        return Err(data(anyhow!(
            "model expects features [{}] but the {} set provides [{}]",
            model_file.feature_names.join(", "),
            model_file.feature_set,
            matrix.feature_names.join(", ")
        )));
    }

    let mut lines = String::from("question_id,label,p_unresolved\n");
    for row in &matrix.rows {
        let (label, p) = model_file.pipeline.predict(&row.values);
        lines.push_str(&format!("{},{},{}\n", row.question_id, label, p));
    }
    save(&workdir.predictions(), lines.as_bytes())?;
    print!("{lines}");

    #[derive(Serialize)]
    struct Echo {
        model: String,
        features: String,
        algorithm: Algorithm,
        feature_set: FeatureSet,
    }
    record(
        &workdir,
        "predict",
        &Echo {
            model: model_path.display().to_string(),
            features: features_path.display().to_string(),
            algorithm: model_file.algorithm,
            feature_set: model_file.feature_set,
        },
        &[&model_path, &features_path],
        &[&workdir.predictions()],
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// report

pub fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let workdir = Workdir::new(args.workdir);
    let extended_path = workdir.features_extended();
    let rows = read_extended_csv(read_input(&extended_path)?)
        .with_context(|| format!("reading {}", extended_path.display()))
        .map_err(data)?;
    if rows.is_empty() {
        return Err(data(anyhow!("{} holds no rows", extended_path.display())));
    }

    let summaries = summarize(&rows);
    let mut summary_buf = Vec::new();
    write_summary_csv(&mut summary_buf, &summaries).map_err(|e| internal(anyhow!(e)))?;
    save(&workdir.summary(), &summary_buf)?;

    let mut hist_buf = Vec::new();
    write_histogram_csv(&mut hist_buf, &summaries).map_err(|e| internal(anyhow!(e)))?;
    save(&workdir.histograms(), &hist_buf)?;

    #[derive(Serialize)]
    struct Echo {
        rows: usize,
    }
    record(
        &workdir,
        "report",
        &Echo { rows: rows.len() },
        &[&extended_path],
        &[&workdir.summary(), &workdir.histograms()],
    )?;

    println!(
        "summarized {} rows into {} (metric, class) records",
        rows.len(),
        summaries.len()
    );
    println!("wrote {} and {}", workdir.summary().display(), workdir.histograms().display());
    Ok(())
}
