use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use asg::dataset::{load_csv, make_three_moons, write_csv, Dataset, Label, NOVEL_TOKEN};
use asg::eval::{
    confusion_and_metrics, export_boundary_grid, load_bundle, load_config, run_experiment,
    save_bundle, train_method, Method,
};
use asg::generation::GenerationConfig;
use asg::open_classifier::{train_asg, tune_cost, OpenClassifier};
use asg::svm::DEFAULT_NU;
use asg::{AsgError, Result};

#[derive(Parser)]
#[command(
    name = "asg",
    version,
    about = "Open-category classification with generated boundary samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the three-moons train/test pair.
    Moons {
        #[arg(long, default_value_t = 100)]
        n_per_class: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Generate negative (and positive) pools and write them as CSV.
    Generate {
        #[command(flatten)]
        data: TrainData,
        #[command(flatten)]
        gen: GenFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Train a model and save it as a bundle directory.
    Train {
        #[command(flatten)]
        data: TrainData,
        #[arg(long, value_enum, default_value_t = CliMethod::Asg)]
        method: CliMethod,
        #[arg(long, default_value_t = DEFAULT_NU)]
        nu: f64,
        #[command(flatten)]
        gen: GenFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Predict labels for a CSV with a saved bundle.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label_column: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Score a saved bundle on a labeled test CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        label_column: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a full experiment grid from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Export the predicted labels of a 2-D model over a grid.
    Boundary {
        #[arg(long)]
        model: PathBuf,
        /// Data whose bounding box the grid spans.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label_column: Option<usize>,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        #[arg(long, default_value_t = 0.25)]
        margin: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct TrainData {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    label_column: Option<usize>,
}

#[derive(Args)]
struct GenFlags {
    /// Generation config as JSON; flags below override its fields.
    #[arg(long)]
    gen_config: Option<PathBuf>,
    /// Generated samples per class.
    #[arg(long)]
    t: Option<usize>,
    /// Optimizer evaluations per generated sample.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    no_positives: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMethod {
    Asg,
    Ovr,
    Oc,
    Moc,
}

fn generation_config(flags: &GenFlags, seed: Option<u64>) -> Result<GenerationConfig> {
    let mut cfg = match &flags.gen_config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => GenerationConfig::default(),
    };
    if let Some(t) = flags.t {
        cfg.samples_per_class = t;
    }
    if let Some(b) = flags.budget {
        cfg.opt_budget = b;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn label_text(l: Label) -> String {
    match l {
        Label::Novel => NOVEL_TOKEN.to_string(),
        Label::Class(k) => k.to_string(),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Moons {
            n_per_class,
            noise,
            common,
        } => {
            let (train, test) = make_three_moons(n_per_class, noise, common.seed.unwrap_or(0))?;
            fs::create_dir_all(&common.output_dir)?;
            write_csv(&train, common.output_dir.join("train.csv"))?;
            write_csv(&test, common.output_dir.join("test.csv"))?;
            println!("wrote {} train and {} test rows", train.len(), test.len());
        }
        Command::Generate { data, gen, common } => {
            let train = load_csv(&data.train, data.label_column)?;
            let cfg = generation_config(&gen, common.seed)?;
            let (_, pool) = train_asg(&train, &cfg, !gen.no_positives)?;
            fs::create_dir_all(&common.output_dir)?;
            let path = common.output_dir.join("pools.csv");
            pool.save_csv(&path)?;
            println!("wrote {}", path.display());
        }
        Command::Train {
            data,
            method,
            nu,
            gen,
            common,
        } => {
            let train = load_csv(&data.train, data.label_column)?;
            let cfg = generation_config(&gen, common.seed)?;
            let method = match method {
                CliMethod::Asg if gen.no_positives => Method::AsgNoPos,
                CliMethod::Asg => Method::Asg,
                CliMethod::Ovr => Method::Ovr,
                CliMethod::Oc => Method::Oc,
                CliMethod::Moc => Method::Moc,
            };
            let (std_train, _) = train.standardize()?;
            let cost = tune_cost(&std_train, &cfg.cost, cfg.seed)?;
            let bundle = train_method(method, &train, &cfg, cost, nu)?;
            save_bundle(&bundle, &common.output_dir)?;
            println!(
                "saved {} model (cost {cost}) to {}",
                method.name(),
                common.output_dir.display()
            );
        }
        Command::Predict {
            model,
            data,
            label_column,
            common,
        } => {
            let bundle = load_bundle(&model)?;
            let data = load_csv(&data, label_column)?;
            fs::create_dir_all(&common.output_dir)?;
            let path = common.output_dir.join("predictions.csv");
            let mut w = csv::Writer::from_path(&path).map_err(AsgError::from)?;
            let mut header = vec!["label".to_string()];
            header.extend((1..=bundle.num_classes()).map(|k| format!("score_{k}")));
            w.write_record(&header)?;
            for x in data.features() {
                let p = bundle.predict(x)?;
                let mut row = vec![label_text(p.label)];
                row.extend(p.confidences.iter().map(f64::to_string));
                w.write_record(&row)?;
            }
            w.flush()?;
            println!("wrote {}", path.display());
        }
        Command::Eval {
            model,
            test,
            label_column,
            common,
        } => {
            let bundle = load_bundle(&model)?;
            let test = load_csv(&test, label_column)?;
            let preds = bundle.predict_all(&test)?;
            let report = confusion_and_metrics(&test.labels(), &preds, bundle.num_classes())?;
            fs::create_dir_all(&common.output_dir)?;
            write_json(&common.output_dir.join("metrics.json"), &report)?;
            println!(
                "macro_f1 {:.4} accuracy {:.4} seen_f1 {:.4} unseen_f1 {:.4}",
                report.macro_f1,
                report.accuracy,
                report.seen_aggregate.f1,
                report.unseen_aggregate.f1
            );
        }
        Command::Experiment { config, common } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = common.seed {
                cfg.master_seed = s;
            }
            if common.output_dir != Path::new(".") {
                cfg.output_dir = common.output_dir;
            }
            let summary = run_experiment(&cfg)?;
            for row in &summary.aggregate {
                let f1 = row
                    .metrics
                    .get("macro_f1_collapsed")
                    .map(|s| s.mean)
                    .unwrap_or(f64::NAN);
                println!(
                    "{:<10} runs {} failures {} macro_f1 {:.4}",
                    row.method.name(),
                    row.runs,
                    row.failures,
                    f1
                );
            }
        }
        Command::Boundary {
            model,
            data,
            label_column,
            resolution,
            margin,
            common,
        } => {
            let bundle = load_bundle(&model)?;
            let data: Dataset = load_csv(&data, label_column)?;
            let search = data.bounding_box(margin)?;
            fs::create_dir_all(&common.output_dir)?;
            let path = common.output_dir.join("boundary.csv");
            export_boundary_grid(&bundle, &search, resolution, fs::File::create(&path)?)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn exit_code(e: &AsgError) -> u8 {
    if e.is_data_error() {
        2
    } else if matches!(e, AsgError::InvalidConfig(_) | AsgError::Json(_)) {
        1
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
