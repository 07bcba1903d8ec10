use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pearl::bench::{
    emit_consistency_report, emit_report, run_synthetic_suite, run_weight_consistency, with_thread_cap,
};
use pearl::config::ExperimentConfig;
use pearl::csv_io::{read_features, read_labeled, read_unlabeled};
use pearl::data::{PredictionBlock, TaskKind, UnlabeledDataset};
use pearl::downstream::DownstreamModel;
use pearl::frl::fit_frls;
use pearl::metrics::metric_suite;
use pearl::weights::{fit_pipeline, make_cv_plan, PearlModel};
use pearl::{PearlError, Result};

#[derive(Parser)]
#[command(name = "pearl", version, about = "Cross-validated averaging over foundation representations")]
struct Cli {
    /// Worker threads (overrides PEARL_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the synthetic benchmark grid and write CSV reports.
    RunSynthetic {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Fill the runtime_ms column (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Track the weight on a correctly specified candidate as n grows.
    WeightConsistency {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        timings: bool,
    },
    /// Fit a model on a labelled CSV and save it as JSON.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        /// Rows for the representation learners; defaults to the features of --data.
        #[arg(long)]
        unlabeled: Option<PathBuf>,
    },
    /// Predict with a saved model.
    Predict {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Column to drop from the features and score against.
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| {
        PearlError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?))
}

fn fit(data: &Path, label: &str, config: Option<&Path>, model: &Path, unlabeled: Option<&Path>) -> Result<()> {
    let cfg = load_config(config)?;
    let classification = cfg.downstream.model == DownstreamModel::Softmax;
    let train = read_labeled(open(data)?, label, classification)?;
    let rows = match unlabeled {
        Some(p) => read_unlabeled(open(p)?, Some(label))?,
        None => UnlabeledDataset::new(train.features().clone())?,
    };
    let frls = fit_frls(&cfg.frls, &rows)?;
    let pool = cfg.candidates.build_pool(frls.iter().map(|f| f.output_dim()).collect())?;
    let plan = make_cv_plan(train.nrows(), cfg.cv.folds, cfg.seed)?;
    let fitted = fit_pipeline(&train, frls, pool, &plan, &cfg.downstream, cfg.loss(), &cfg.solver.options)?;
    std::fs::write(model, fitted.model.to_json()?)?;
    let stderr = &mut io::stderr();
    let _ = writeln!(stderr, "cv objective {:.6}", fitted.report.objective);
    for (j, w) in fitted.model.weights().as_slice().iter().enumerate().filter(|(_, w)| **w > 0.0) {
        let _ = writeln!(stderr, "{:>8.4}  {}", w, fitted.model.pool().specs()[j].label());
    }
    Ok(())
}

fn prediction_csv(pred: &PredictionBlock) -> String {
    let v = pred.values();
    let mut s = match pred.kind() {
        TaskKind::Regression => "prediction\n".to_string(),
        TaskKind::Margin => "margin\n".to_string(),
        TaskKind::Classification => {
            let mut h: Vec<String> = (0..v.ncols()).map(|c| format!("p{c}")).collect();
            h.push("class".into());
            h.join(",") + "\n"
        }
    };
    for i in 0..v.nrows() {
        let mut cells: Vec<String> = v.row(i).iter().map(|x| x.to_string()).collect();
        if pred.kind() == TaskKind::Classification {
            cells.push(pearl::metrics::argmax(v.row(i).iter().copied()).to_string());
        }
        s += &cells.join(",");
        s.push('\n');
    }
    s
}

fn predict(data: &Path, model: &Path, label: Option<&str>, out: Option<&Path>) -> Result<()> {
    let model = PearlModel::from_json(&std::fs::read_to_string(model)?)?;
    let features = read_features(open(data)?, label)?;
    let pred = model.predict(&features)?;
    let body = prediction_csv(&pred);
    match out {
        Some(p) => std::fs::write(p, body)?,
        None => io::stdout().write_all(body.as_bytes())?,
    }
    if let Some(l) = label {
        let classification = model.output_kind() == TaskKind::Classification;
        let truth = read_labeled(open(data)?, l, classification)?;
        let m = metric_suite(truth.target(), &pred)?;
        eprintln!("mse {}", m.mse);
        if let Some(a) = m.accuracy {
            eprintln!("accuracy {a}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RunSynthetic { config, out, timings } => {
            let cfg = load_config(config.as_deref())?;
            let result = with_thread_cap(cli.threads, || run_synthetic_suite(&cfg))??;
            for f in &result.failures {
                eprintln!("excluded sigma={} n={} rep={}: {}", f.sigma, f.n, f.rep, f.error);
            }
            for p in emit_report(&result, &out, timings)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::WeightConsistency { config, out, sigma, timings } => {
            let cfg = load_config(config.as_deref())?;
            let mut settings = cfg.consistency.clone();
            if let Some(s) = sigma {
                settings.sigma = s;
            }
            let result = with_thread_cap(cli.threads, || run_weight_consistency(&cfg, &settings))??;
            println!("n,reps,tau_mean,tau_sd");
            for p in &result.curve {
                println!("{},{},{},{}", p.n, p.reps, p.mean, p.sd);
            }
            if let Some(dir) = out {
                emit_consistency_report(&result, &dir, timings)?;
            }
        }
        Command::Fit { data, label, config, model, unlabeled } => {
            with_thread_cap(cli.threads, || {
                fit(&data, &label, config.as_deref(), &model, unlabeled.as_deref())
            })??
        }
        Command::Predict { data, model, label, out } => {
            with_thread_cap(cli.threads, || predict(&data, &model, label.as_deref(), out.as_deref()))??
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
