use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pabau_core::eval::{cross_validate, AlgorithmTrainer, FoldTrainer};
use pabau_core::learn::{Algorithm, Hyperparams, LabelModelBundle};
use pabau_core::lexicon::Lexicon;
use pabau_core::Label;

use pabau::dataset::{
    build_matrix, catalog_for, dataset_hash, harvest_records, label_targets, load_dataset,
    save_dataset, stratified_split, Dataset,
};
use pabau::fixtures::{biometric_stub_entries, fixture_corpus, write_jar, write_synthetic_archive};
use pabau::modelio::{load_bundle, save_bundle};
use pabau::pipeline::classify_archive;
use pabau::render::{render_comparison, OutputFormat};
use pabau::report::render_dpia;
use pabau::results::parse_results;
use pabau::runstats::render_stats;

#[derive(Parser)]
#[command(
    name = "pabau",
    about = "Biometric API usage analyzer for JVM archives",
    version
)]
struct Cli {
    /// Keyword lexicon file; omit for the built-in default.
    #[arg(long, global = true, value_name = "PATH")]
    lexicon: Option<PathBuf>,

    /// Seed for all randomized steps (training, fold assignment, splits).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads for classification; defaults to available cores.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Output format for machine-readable commands.
    #[arg(long, global = true, default_value = "text")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan an archive and write one unlabeled ground-truth record per method.
    Harvest {
        archive: PathBuf,
        #[arg(short, long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Train per-label models on an annotated dataset and save the bundle.
    Train {
        dataset: PathBuf,
        #[arg(short, long, value_name = "PATH")]
        out: PathBuf,
        /// One of: nb, logistic, stump, tree, svm.
        #[arg(long, default_value = "svm")]
        algorithm: Algorithm,
    },
    /// Compare all five algorithms by repeated stratified cross-validation.
    Evaluate {
        dataset: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        repeats: u32,
        /// Render all 16 labels instead of the four-label headline view.
        #[arg(long)]
        full: bool,
    },
    /// Split an annotated dataset into train/test parts, stratified per label.
    Split {
        dataset: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        train_fraction: f64,
        #[arg(long, value_name = "PATH")]
        train_out: PathBuf,
        #[arg(long, value_name = "PATH")]
        test_out: PathBuf,
    },
    /// Classify every method in an archive and write a JSONL results file.
    Classify {
        archive: PathBuf,
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// Results file; stdout when omitted.
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also write methods that received no label.
        #[arg(long)]
        all: bool,
    },
    /// Render the DPIA-assist document from a results file.
    Report {
        results: PathBuf,
        /// Output document; stdout when omitted.
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Write test archives (fixture corpus, biometric stub, synthetic load).
    #[command(hide = true)]
    GenFixtures {
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Classes in the synthetic archive; 0 skips it.
        #[arg(long, default_value_t = 0)]
        synthetic_classes: usize,
        #[arg(long, default_value_t = 50)]
        methods_per_class: usize,
    },
}

fn load_lexicon(path: &Option<PathBuf>) -> Result<Lexicon> {
    match path {
        None => Ok(Lexicon::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read lexicon {}", p.display()))?;
            Lexicon::parse(&text).with_context(|| format!("invalid lexicon {}", p.display()))
        }
    }
}

fn emit_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn load_annotated(path: &PathBuf) -> Result<Dataset> {
    let (dataset, warnings) =
        load_dataset(path).with_context(|| format!("cannot load dataset {}", path.display()))?;
    emit_warnings(&warnings);
    Ok(dataset)
}

fn run(cli: Cli) -> Result<()> {
    let lexicon = load_lexicon(&cli.lexicon)?;
    let catalog = catalog_for(&lexicon);
    match cli.command {
        Command::Harvest { archive, out } => {
            let (classes, summary, warnings) = pabau::archive::scan_archive(&archive)?;
            emit_warnings(&warnings);
            let records = harvest_records(&classes);
            let dataset = Dataset { records, provenance: archive.display().to_string() };
            save_dataset(&dataset, &out)?;
            eprintln!(
                "harvested {} records from {} classes ({} unparsable entries skipped)",
                dataset.records.len(),
                summary.classes,
                summary.failures
            );
        }
        Command::Train { dataset, out, algorithm } => {
            let data = load_annotated(&dataset)?;
            let matrix = build_matrix(&data.records, &catalog);
            let targets = label_targets(&data.records);
            let bundle = LabelModelBundle::train(
                algorithm,
                &matrix,
                &targets,
                &Hyperparams::default(),
                cli.seed,
                dataset_hash(&data),
            )
            .map_err(|e| anyhow::anyhow!("training failed: {e}"))?;
            save_bundle(&bundle, &out)?;
            let degenerate =
                Label::ALL.iter().filter(|&&l| bundle.model_for(l).is_degenerate()).count();
            if degenerate > 0 {
                eprintln!(
                    "warning: {degenerate} label(s) had a single class in the data; their models are constant"
                );
            }
            eprintln!("trained {} bundle -> {}", algorithm.display_name(), out.display());
        }
        Command::Evaluate { dataset, k, repeats, full } => {
            let data = load_annotated(&dataset)?;
            let matrix = build_matrix(&data.records, &catalog);
            let targets = label_targets(&data.records);
            let trainers: Vec<AlgorithmTrainer> = [
                Algorithm::NaiveBayes,
                Algorithm::Logistic,
                Algorithm::Stump,
                Algorithm::Tree,
                Algorithm::Svm,
            ]
            .into_iter()
            .map(|algorithm| AlgorithmTrainer { algorithm, hyper: Hyperparams::default() })
            .collect();
            let refs: Vec<&dyn FoldTrainer> =
                trainers.iter().map(|t| t as &dyn FoldTrainer).collect();
            let report =
                cross_validate(&matrix, &targets, &Label::ALL, &refs, k, repeats, cli.seed)
                    .map_err(|e| anyhow::anyhow!("evaluation failed: {e}"))?;
            print!("{}", render_comparison(&report, cli.format, full));
        }
        Command::Split { dataset, train_fraction, train_out, test_out } => {
            let data = load_annotated(&dataset)?;
            let (train, test, warnings) = stratified_split(&data, train_fraction, cli.seed)?;
            emit_warnings(&warnings);
            save_dataset(&train, &train_out)?;
            save_dataset(&test, &test_out)?;
            eprintln!("split {} records into {} train / {} test", data.records.len(), train.records.len(), test.records.len());
        }
        Command::Classify { archive, model, out, all } => {
            let bundle = load_bundle(&model, Some(catalog.catalog_id))?;
            let jobs = cli.jobs.unwrap_or_else(|| {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            });
            let (stats, summary, warnings) = match &out {
                Some(p) => {
                    let file = std::fs::File::create(p)
                        .with_context(|| format!("cannot create {}", p.display()))?;
                    let mut w = std::io::BufWriter::new(file);
                    let r = classify_archive(&archive, &bundle, &catalog, jobs, all, &mut w)?;
                    w.flush()?;
                    r
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut w = std::io::BufWriter::new(stdout.lock());
                    let r = classify_archive(&archive, &bundle, &catalog, jobs, all, &mut w)?;
                    w.flush()?;
                    r
                }
            };
            emit_warnings(&warnings);
            if summary.failures > 0 {
                eprintln!("warning: {} archive entries could not be parsed", summary.failures);
            }
            eprint!("{}", render_stats(&stats));
        }
        Command::Report { results, out } => {
            let text = std::fs::read_to_string(&results)
                .with_context(|| format!("cannot read results {}", results.display()))?;
            let lines = parse_results(&text)?;
            let doc = render_dpia(&lines);
            match out {
                Some(p) => std::fs::write(&p, doc)
                    .with_context(|| format!("cannot write {}", p.display()))?,
                None => print!("{doc}"),
            }
        }
        Command::GenFixtures { out_dir, synthetic_classes, methods_per_class } => {
            std::fs::create_dir_all(&out_dir)?;
            write_jar(&out_dir.join("corpus.jar"), &fixture_corpus(), true)?;
            write_jar(&out_dir.join("biometric-stub.jar"), &biometric_stub_entries(), true)?;
            if synthetic_classes > 0 {
                write_synthetic_archive(
                    &out_dir.join("synthetic.jar"),
                    synthetic_classes,
                    methods_per_class,
                )?;
            }
            eprintln!("fixtures written to {}", out_dir.display());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
    // Warnings alone never change the exit status.
}
