//! `epu`: build policy-uncertainty indices from a news corpus.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epu::pipeline::{self, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "epu",
    version,
    about = "Economic policy uncertainty index toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load the corpus and write per-month, per-outlet document totals.
    Ingest(Common),
    /// Score documents under each measurement and write monthly series.
    Measure(Common),
    /// Train and evaluate the classifier on the labeled data.
    Train(Common),
    /// Report annotation agreement and cross-round agreement.
    Agree(Common),
    /// Correlate measurement and external series.
    Correlate(Common),
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration file (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep only documents whose dateline resolves to a US place.
    #[arg(long)]
    filter_us: bool,
}

impl Common {
    fn load(&self) -> epu::Result<PipelineConfig> {
        let mut cfg = PipelineConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.set_out(out.clone());
        }
        if self.filter_us {
            cfg.filter_us = true;
        }
        Ok(cfg)
    }
}

fn run(cmd: Command) -> epu::Result<()> {
    match cmd {
        Command::Ingest(c) => {
            let r = pipeline::cmd_ingest(&c.load()?)?;
            println!(
                "ingested {} documents over {} months",
                r.documents, r.months
            );
        }
        Command::Measure(c) => {
            let r = pipeline::cmd_measure(&c.load()?)?;
            for (name, s) in &r.series {
                println!("{name}: {} months", s.points.len());
            }
        }
        Command::Train(c) => {
            let r = pipeline::cmd_train(&c.load()?)?;
            println!(
                "trained on {} documents (C = {}), test accuracy {:.4}, F1 {:.4}",
                r.n_train, r.selected_inverse_penalty, r.test.accuracy, r.test.f1
            );
        }
        Command::Agree(c) => {
            let r = pipeline::cmd_agree(&c.load()?)?;
            for rep in &r.reports {
                let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |x| format!("{x:.2}"));
                println!(
                    "{} [{}]: pairwise {} alpha {}",
                    rep.round,
                    rep.subset,
                    fmt(rep.pairwise_agreement),
                    fmt(rep.krippendorff_alpha)
                );
            }
            for p in &r.pxa {
                println!("PXA {}: {:.2}", p.doc_set, p.pxa);
            }
        }
        Command::Correlate(c) => {
            let m = pipeline::cmd_correlate(&c.load()?)?;
            println!("correlated {} series", m.labels.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
