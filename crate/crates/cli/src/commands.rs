use std::fs;
use std::path::Path;
use std::time::Instant;

use nyts_core::dataset::Dataset;
use nyts_core::ingest::{
    generate_synthetic, prepare, train_test_split, CohortConfig, OutOfDomainPolicy, PrepareConfig,
    SignalConfig, SplitSpec, TargetPolicy,
};
use nyts_core::metrics::{binary_report, compare_models, render_svg, CvConfig};
use nyts_core::ml::LearnerConfig;
use nyts_core::persistence;
use nyts_core::{load_catalog, Execution, ModelKind, ModelSpec, QuestionCatalog};
use nyts_service::{router, serve, AppState, LoadedModel, ServiceConfig};
use serde_json::json;

use crate::args::{
    Cli, Command, CompareArgs, EvaluateArgs, HyperArgs, ModelArg, OutOfDomainArg, PrepareArgs,
    ServeArgs, SplitArgs, SynthArgs, TargetPolicyArg, TrainArgs,
};
use crate::failure::{Classify, CliResult, Failure};
use crate::manifest::RunManifest;

pub fn run(cli: Cli) -> CliResult<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let catalog_path = cli.catalog.as_deref();
    match cli.command {
        Command::Prepare(a) => cmd_prepare(a, catalog_path),
        Command::Train(a) => cmd_train(a, catalog_path, exec),
        Command::Evaluate(a) => cmd_evaluate(a, exec),
        Command::Compare(a) => cmd_compare(a, catalog_path, exec),
        Command::Synth(a) => cmd_synth(a, catalog_path),
        Command::Serve(a) => cmd_serve(a, catalog_path),
    }
}

fn read_catalog(path: Option<&Path>) -> CliResult<QuestionCatalog> {
    match path {
        None => Ok(QuestionCatalog::nyts2018()),
        Some(p) => {
            let text =
                fs::read_to_string(p).input_err(format!("reading catalog {}", p.display()))?;
            load_catalog(&text).input_err(format!("catalog {}", p.display()))
        }
    }
}

fn catalog_label(path: Option<&Path>) -> String {
    path.map_or_else(
        || "builtin:nyts2018".to_string(),
        |p| p.display().to_string(),
    )
}

fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let file = fs::File::open(path).input_err(format!("opening {}", path.display()))?;
    Dataset::read_csv(std::io::BufReader::new(file))
        .input_err(format!("reading {}", path.display()))
}

/// Attaches catalog domains when the dataset's columns are the catalog's
/// feature columns; otherwise the dataset is used as is.
fn bind_catalog(ds: Dataset, catalog: &QuestionCatalog) -> CliResult<(Dataset, bool)> {
    let columns = catalog.feature_columns();
    let matches = columns.len() == ds.n_features()
        && columns
            .iter()
            .zip(&ds.feature_names)
            .all(|(c, n)| &c.name == n);
    if !matches {
        log::warn!(
            "dataset columns differ from catalog {}; domain checks disabled",
            catalog.version
        );
        return Ok((ds, false));
    }
    let ds = ds
        .with_catalog_columns(&columns)
        .input_err("dataset does not fit the catalog domains")?;
    Ok((ds, true))
}

fn write_output(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).internal_err(format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).internal_err(format!("writing {}", path.display()))
}

fn finish(manifest: RunManifest, primary: &Path) -> CliResult<()> {
    let path = manifest
        .write_beside(primary)
        .internal_err("writing run manifest")?;
    log::info!("manifest written to {}", path.display());
    Ok(())
}

fn split_spec(a: &SplitArgs) -> CliResult<SplitSpec> {
    if !(a.test_fraction > 0.0 && a.test_fraction < 1.0) {
        return Err(Failure::input(format!(
            "--test-fraction {} must lie strictly between 0 and 1",
            a.test_fraction
        )));
    }
    Ok(SplitSpec {
        test_fraction: a.test_fraction,
        seed: a.seed,
        stratified: !a.no_stratify,
    })
}

fn cmd_prepare(a: PrepareArgs, catalog_path: Option<&Path>) -> CliResult<()> {
    let catalog = read_catalog(catalog_path)?;
    let config = PrepareConfig {
        policy: match a.target_policy {
            TargetPolicyArg::Q16Only => TargetPolicy::Q16Only,
            TargetPolicyArg::AnyOfSix => TargetPolicy::AnyOfSix,
        },
        cohort: CohortConfig {
            non_e_smoker: a.cohort_non_e_smoker,
            ..CohortConfig::default()
        }
        .with_q59(a.cohort_q59),
        out_of_domain: match a.out_of_domain {
            OutOfDomainArg::Reject => OutOfDomainPolicy::Reject,
            OutOfDomainArg::Unanswered => OutOfDomainPolicy::Unanswered,
        },
    };
    let mut manifest = RunManifest::new(
        "prepare",
        json!({
            "catalog": catalog_label(catalog_path),
            "catalog_version": catalog.version,
            "prepare": config,
            "one_hot": a.one_hot,
        }),
    );
    manifest
        .input(&a.input)
        .input_err(format!("reading {}", a.input.display()))?;

    let t = Instant::now();
    let file = fs::File::open(&a.input).input_err(format!("opening {}", a.input.display()))?;
    let (ds, report) = prepare(std::io::BufReader::new(file), &catalog, &config)
        .input_err(format!("preparing {}", a.input.display()))?;
    manifest.lap("prepare", t);
    let ds = if a.one_hot {
        ds.one_hot().input_err("one-hot encoding")?
    } else {
        ds
    };

    let mut csv = Vec::new();
    ds.write_csv(&mut csv)
        .internal_err("encoding prepared CSV")?;
    write_output(&a.out, &csv)?;
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.out.as_os_str().to_owned();
        p.push(".report.json");
        p.into()
    });
    let mut report_json = serde_json::to_vec_pretty(&report).internal_err("encoding report")?;
    report_json.push(b'\n');
    write_output(&report_path, &report_json)?;

    println!("input rows      {}", report.input_rows);
    if let Some(c) = &report.cohort {
        println!("cohort          {} of {} rows kept", c.rows_out, c.rows_in);
    }
    if let Some(t) = &report.target {
        println!("undefined label {} rows dropped", t.dropped_undefined);
    }
    println!(
        "output rows     {} ({} yes, {} no)",
        report.output_rows, report.yes, report.no
    );
    println!("features        {}", ds.n_features());

    manifest.output(&a.out).internal_err("hashing output")?;
    manifest
        .output(&report_path)
        .internal_err("hashing report")?;
    finish(manifest, &a.out)
}

fn model_kind(m: ModelArg) -> ModelKind {
    match m {
        ModelArg::Linear => ModelKind::Linear,
        ModelArg::Logistic => ModelKind::Logistic,
        ModelArg::Nb => ModelKind::NaiveBayes,
        ModelArg::Tree => ModelKind::DecisionTree,
        ModelArg::Forest => ModelKind::RandomForest,
        ModelArg::Gb => ModelKind::GradientBoosting,
    }
}

/// Applies hyperparameter overrides, rejecting flags the learner does not take.
fn apply_hyper(spec: &mut ModelSpec, h: &HyperArgs) -> CliResult<()> {
    let kind = spec.kind();
    let mut used: Vec<&str> = Vec::new();
    match &mut spec.learner {
        LearnerConfig::Linear(c) | LearnerConfig::Logistic(c) => {
            if let Some(v) = h.learning_rate {
                c.learning_rate = v;
                used.push("learning-rate");
            }
            if let Some(v) = h.tolerance {
                c.tolerance = v;
                used.push("tolerance");
            }
            if let Some(v) = h.max_iters {
                c.max_iters = v;
                used.push("max-iters");
            }
            if let Some(v) = h.l2 {
                c.l2 = v;
                used.push("l2");
            }
            if let Some(v) = h.weight_cap {
                c.weight_cap = v;
                used.push("weight-cap");
            }
        }
        LearnerConfig::NaiveBayes => {}
        LearnerConfig::DecisionTree(c) => {
            if let Some(v) = h.max_depth {
                c.max_depth = Some(v);
                used.push("max-depth");
            }
            if let Some(v) = h.min_samples {
                c.min_samples = v;
                used.push("min-samples");
            }
        }
        LearnerConfig::RandomForest(c) => {
            if let Some(v) = h.trees {
                c.n_trees = v;
                used.push("trees");
            }
            if let Some(v) = h.features_per_tree {
                c.features_per_tree = Some(v);
                used.push("features-per-tree");
            }
            if h.no_bootstrap {
                c.bootstrap = false;
                used.push("no-bootstrap");
            }
            if let Some(v) = h.max_depth {
                c.tree.max_depth = Some(v);
                used.push("max-depth");
            }
            if let Some(v) = h.min_samples {
                c.tree.min_samples = v;
                used.push("min-samples");
            }
        }
        LearnerConfig::GradientBoosting(c) => {
            if let Some(v) = h.stages {
                c.n_stages = v;
                used.push("stages");
            }
            if let Some(v) = h.learning_rate {
                c.learning_rate = v;
                used.push("learning-rate");
            }
            if let Some(v) = h.max_depth {
                c.max_depth = v;
                used.push("max-depth");
            }
            if let Some(v) = h.min_samples {
                c.min_samples = v;
                used.push("min-samples");
            }
        }
    }
    let given = [
        ("learning-rate", h.learning_rate.is_some()),
        ("tolerance", h.tolerance.is_some()),
        ("max-iters", h.max_iters.is_some()),
        ("l2", h.l2.is_some()),
        ("weight-cap", h.weight_cap.is_some()),
        ("trees", h.trees.is_some()),
        ("features-per-tree", h.features_per_tree.is_some()),
        ("no-bootstrap", h.no_bootstrap),
        ("max-depth", h.max_depth.is_some()),
        ("min-samples", h.min_samples.is_some()),
        ("stages", h.stages.is_some()),
    ];
    if let Some((flag, _)) = given
        .iter()
        .find(|(flag, set)| *set && !used.contains(flag))
    {
        return Err(Failure::input(format!(
            "--{flag} does not apply to the {kind} model"
        )));
    }
    Ok(())
}

fn created_timestamp() -> CliResult<u64> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .trim()
            .parse()
            .input_err(format!("SOURCE_DATE_EPOCH={v:?}")),
        Err(_) => Ok(0),
    }
}

fn cmd_train(a: TrainArgs, catalog_path: Option<&Path>, exec: Execution) -> CliResult<()> {
    let catalog = read_catalog(catalog_path)?;
    let split = split_spec(&a.split)?;
    let mut spec = ModelSpec::new(model_kind(a.model))
        .with_seed(a.split.seed)
        .with_execution(exec);
    apply_hyper(&mut spec, &a.hyper)?;
    let created = created_timestamp()?;

    let (ds, bound) = bind_catalog(read_dataset(&a.data)?, &catalog)?;
    let mut manifest = RunManifest::new(
        "train",
        json!({
            "catalog": catalog_label(catalog_path),
            "catalog_version": catalog.version,
            "model": spec.kind().name(),
            "split": split,
            "hyperparameters": spec.hyperparameters(ds.n_features()),
            "created": created,
        }),
    );
    manifest.seed("split", split.seed);
    manifest.seed("model", spec.seed);
    manifest.input(&a.data).input_err("hashing data")?;

    let t = Instant::now();
    let (train, test) = train_test_split(&ds, &split).input_err("splitting data")?;
    manifest.lap("split", t);
    let t = Instant::now();
    let mut model = spec
        .fit(&train)
        .input_err(format!("fitting {}", spec.kind()))?;
    manifest.lap("fit", t);
    if bound {
        model.meta.catalog_version = catalog.version.clone();
    }
    model.meta.created = created;

    let accuracy = |d: &Dataset| -> CliResult<f64> {
        let pred: Vec<u8> = model
            .predict_batch(d.x.view(), exec)
            .internal_err("scoring")?
            .iter()
            .map(|p| p.label)
            .collect();
        Ok(binary_report(&d.y, &pred).input_err("scoring")?.accuracy)
    };
    let (train_acc, test_acc) = (accuracy(&train)?, accuracy(&test)?);

    let bytes = persistence::to_bytes(&model);
    write_output(&a.out, &bytes)?;
    let id = persistence::model_id(&bytes).internal_err("hashing model")?;

    println!(
        "model           {} ({})",
        spec.kind().display_name(),
        spec.kind().name()
    );
    println!(
        "rows            {} train, {} test",
        train.n_rows(),
        test.n_rows()
    );
    for (k, v) in &model.meta.training {
        println!("{k:<15} {v}");
    }
    println!("train accuracy  {train_acc:.4}");
    println!("test accuracy   {test_acc:.4}");
    println!("model id        {id}");

    manifest.output(&a.out).internal_err("hashing model")?;
    finish(manifest, &a.out)
}

fn cmd_evaluate(a: EvaluateArgs, exec: Execution) -> CliResult<()> {
    let (model, id) = persistence::load_from_path(&a.model)
        .input_err(format!("loading {}", a.model.display()))?;
    let ds = read_dataset(&a.data)?;
    if ds.feature_names != model.meta.feature_names {
        return Err(Failure::input(format!(
            "{} has columns that differ from the model's {} features",
            a.data.display(),
            model.n_features()
        )));
    }
    let pred: Vec<u8> = model
        .predict_batch(ds.x.view(), exec)
        .input_err("predicting")?
        .iter()
        .map(|p| p.label)
        .collect();
    let report = binary_report(&ds.y, &pred).input_err("scoring")?;
    println!("{} ({id})", model.kind().display_name());
    print!("{}", report.render_binary());
    if let Some(path) = &a.report_json {
        let mut text = serde_json::to_vec_pretty(&report).internal_err("encoding report")?;
        text.push(b'\n');
        write_output(path, &text)?;
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs, catalog_path: Option<&Path>, exec: Execution) -> CliResult<()> {
    let catalog = read_catalog(catalog_path)?;
    let split = split_spec(&a.split)?;
    let cv = CvConfig {
        k: a.folds,
        stratified: !a.split.no_stratify,
        seed: a.split.seed,
        execution: exec,
    };
    let mut specs: Vec<ModelSpec> = Vec::new();
    if a.include_linear {
        specs.push(ModelSpec::new(ModelKind::Linear));
    }
    specs.extend(ModelSpec::paper_five());
    let specs: Vec<ModelSpec> = specs
        .into_iter()
        .map(|s| s.with_seed(a.split.seed))
        .collect();

    let (ds, _) = bind_catalog(read_dataset(&a.data)?, &catalog)?;
    let hyper: serde_json::Map<String, serde_json::Value> = specs
        .iter()
        .map(|s| {
            (
                s.kind().name().to_string(),
                json!(s.hyperparameters(ds.n_features())),
            )
        })
        .collect();
    let mut manifest = RunManifest::new(
        "compare",
        json!({
            "catalog": catalog_label(catalog_path),
            "split": split,
            "folds": cv.k,
            "stratified_folds": cv.stratified,
            "models": hyper,
        }),
    );
    manifest.seed("split", split.seed);
    manifest.seed("cv", cv.seed);
    manifest.seed("models", a.split.seed);
    manifest.input(&a.data).input_err("hashing data")?;

    let t = Instant::now();
    let table = compare_models(&ds, &split, &specs, &cv).input_err("comparing models")?;
    manifest.lap("compare", t);

    print!("{}", table.render());
    let mut csv = Vec::new();
    table
        .write_csv(&mut csv)
        .internal_err("encoding comparison")?;
    write_output(&a.out, &csv)?;
    manifest.output(&a.out).internal_err("hashing output")?;
    if let Some(plot) = &a.plot {
        let is_svg = plot
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("svg"));
        if is_svg {
            write_output(plot, render_svg(&table.records()).as_bytes())?;
        } else {
            write_output(plot, &csv)?;
        }
        manifest.output(plot).internal_err("hashing plot")?;
    }
    finish(manifest, &a.out)
}

fn cmd_synth(a: SynthArgs, catalog_path: Option<&Path>) -> CliResult<()> {
    let catalog = read_catalog(catalog_path)?;
    let signal: SignalConfig = a.signal.parse().input_err("--signal")?;
    let mut manifest = RunManifest::new(
        "synth",
        json!({ "catalog": catalog_label(catalog_path), "rows": a.rows, "signal": signal }),
    );
    manifest.seed("generator", a.seed);
    let t = Instant::now();
    let table = generate_synthetic(a.rows, &catalog, &signal, a.seed).input_err("generating")?;
    manifest.lap("generate", t);
    let mut csv = Vec::new();
    table.write_csv(&mut csv).internal_err("encoding CSV")?;
    write_output(&a.out, &csv)?;
    println!(
        "wrote {} rows x {} columns to {}",
        table.n_rows(),
        table.columns.len(),
        a.out.display()
    );
    manifest.output(&a.out).internal_err("hashing output")?;
    finish(manifest, &a.out)
}

fn cmd_serve(a: ServeArgs, catalog_path: Option<&Path>) -> CliResult<()> {
    let catalog = read_catalog(catalog_path)?;
    let loaded = match (&a.model, a.no_model) {
        (Some(path), false) => {
            let (model, id) = persistence::load_from_path(path)
                .input_err(format!("loading {}", path.display()))?;
            Some(LoadedModel { model, id })
        }
        _ => None,
    };
    let state = AppState::new(catalog, loaded).input_err("starting service")?;
    let config = ServiceConfig {
        allowed_origins: a.cors_origin.clone(),
    };
    let app = router(state.clone(), &config).input_err("--cors-origin")?;

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .internal_err("starting runtime")?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((a.bind.as_str(), a.port))
            .await
            .input_err(format!("binding {}:{}", a.bind, a.port))?;
        let addr = listener
            .local_addr()
            .internal_err("reading bound address")?;
        match state.model() {
            Some(m) => println!("model {} ({})", m.id, m.model.kind().display_name()),
            None => println!("no model loaded; predictions return 503"),
        }
        println!("listening on http://{addr}");
        use std::io::Write;
        std::io::stdout().flush().ok();
        let shutdown = async {
            tokio::signal::ctrl_c().await.ok();
        };
        serve(listener, app, shutdown).await.internal_err("serving")
    })
}
