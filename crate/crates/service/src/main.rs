use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use moodspring::config::ServiceConfig;
use moodspring::modelset::ModelSet;
use moodspring::server::{serve, AppState};
use moodspring::training::{evaluate_manifest, train_classifier, train_fusion_pair, TrainOptions};
use moodspring::{asr, Result, ServiceError};
use moodspring_core::data::{load_manifest, Modality};
use moodspring_core::fusion::FusionConfig;
use moodspring_core::models::{Hyperparams, ModelKind};
use moodspring_core::textfeat::VectorizeMode;

#[derive(Parser)]
#[command(name = "moodspring", version, about = "Real-time emotion valence engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one classifier on the rows of one modality.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        modality: Modality,
        #[arg(long)]
        model: ModelKind,
        /// Model-set directory to write into.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        min_df: usize,
        #[arg(long, value_parser = parse_mode, default_value = "tfidf")]
        mode: VectorizeMode,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        svm_epochs: Option<usize>,
    },
    /// Fit the fusion layer, and a λ = 0 baseline, over a model set.
    TrainFusion {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long, visible_alias = "λ", default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, visible_alias = "δ", default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score every decision source and write a JSON report.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long, visible_alias = "δ", default_value_t = 0.05)]
        delta: f64,
        /// Defaults to standard output.
        #[arg(long)]
        json_out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Serve WebSocket sessions at /session.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

fn parse_mode(s: &str) -> std::result::Result<VectorizeMode, String> {
    match s {
        "tf" => Ok(VectorizeMode::Tf),
        "tfidf" => Ok(VectorizeMode::Tfidf),
        _ => Err(format!("unknown mode `{s}` (expected tf or tfidf)")),
    }
}

fn load_config(path: Option<&Path>) -> Result<ServiceConfig> {
    match path {
        Some(p) => ServiceConfig::load(p),
        None => Ok(ServiceConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            manifest,
            modality,
            model,
            out,
            seed,
            min_df,
            mode,
            k,
            svm_epochs,
        } => {
            let manifest = load_manifest(&manifest)?;
            let mut hyper = Hyperparams::default();
            hyper.k = k.unwrap_or(hyper.k);
            hyper.svm_epochs = svm_epochs.unwrap_or(hyper.svm_epochs);
            let opts = TrainOptions {
                hyper,
                seed,
                min_df,
                text_mode: mode,
                ..TrainOptions::new(modality, model)
            };
            let classifier = train_classifier(&manifest, &opts)?;
            let names = ModelSet::add_classifier(&out, &classifier)?;
            eprintln!("wrote {} ({} classifiers in {})", classifier.name, names.len(), out.display());
        }
        Command::TrainFusion {
            manifest,
            models,
            lambda,
            lr,
            epochs,
            delta,
            seed,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let manifest = load_manifest(&manifest)?;
            let mut set = ModelSet::load_dir(&models)?;
            let fusion_cfg = FusionConfig {
                lambda,
                lr,
                epochs,
                delta,
                seed,
            };
            train_fusion_pair(&manifest, &mut set, cfg.mapping(), &fusion_cfg)?;
            set.save_dir(&models)?;
            eprintln!("wrote fusion layers for {} classifiers in {}", set.len(), models.display());
        }
        Command::Evaluate {
            manifest,
            models,
            delta,
            json_out,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let manifest = load_manifest(&manifest)?;
            let set = ModelSet::load_dir(&models)?;
            let report = evaluate_manifest(&manifest, &set, cfg.mapping(), delta)?;
            match json_out {
                Some(p) => std::fs::write(p, report.to_json())?,
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&report.to_json())?;
                }
            }
        }
        Command::Serve {
            port,
            models,
            config,
            host,
        } => {
            let cfg = load_config(config.as_deref())?;
            let set = ModelSet::load_dir(&models)?;
            set.fusion()?;
            let asr = asr::resolve(cfg.asr.endpoint.as_deref()).map_err(ServiceError::Config)?;
            let state = AppState {
                models: Arc::new(set),
                config: Arc::new(cfg),
                asr,
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(SocketAddr::new(host, port)).await?;
                eprintln!("listening on ws://{}/session", listener.local_addr()?);
                serve(listener, state).await
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
