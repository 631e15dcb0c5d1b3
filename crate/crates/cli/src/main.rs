use std::path::PathBuf;
use std::process::ExitCode;

use ccvae::commands::{
    cmd_benchmark, cmd_classify, cmd_evaluate, cmd_generate, cmd_selfcheck, cmd_synth_data, cmd_train, RunConfig,
    SelfcheckOptions,
};
use ccvae::data::{Domain, Format};
use ccvae::eval::Method;
use clap::{Args, Parser, Subcommand};

/// Coupled conditional VAE pipeline for generalized zero-shot domain
/// adaptation over feature vectors.
#[derive(Parser, Debug)]
#[command(name = "ccvae", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalFlags {
    /// JSON run config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dataset file format for written datasets.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Decode the posterior mean instead of a sampled code when generating.
    #[arg(long, global = true)]
    deterministic_mu: bool,
    /// Worker threads for the benchmark.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the synthetic two-domain benchmark and its manifest.
    SynthData,
    /// Train the CCVAE on one split and write a checkpoint.
    Train {
        #[arg(long)]
        split: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Continue from a checkpoint (not supported).
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Translate dataset records with a trained checkpoint.
    Generate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        from: Option<Domain>,
        #[arg(long)]
        to: Option<Domain>,
        /// Rows generated per class.
        #[arg(long)]
        per_class: Option<usize>,
        /// Comma-separated class ids; defaults to every input class.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<usize>>,
    },
    /// Train a linear classifier on dataset files, optionally scoring a test file.
    Classify {
        #[arg(long = "train")]
        train: Vec<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        num_classes: Option<usize>,
    },
    /// Run methods on one split.
    Evaluate {
        #[arg(long)]
        split: Option<usize>,
        #[arg(long = "method", value_delimiter = ',')]
        methods: Option<Vec<Method>>,
    },
    /// Run every method on every split and write the summary tables.
    Benchmark {
        #[arg(long)]
        splits: Option<usize>,
        #[arg(long = "method", value_delimiter = ',')]
        methods: Option<Vec<Method>>,
    },
    /// Gradient checks, KL properties and determinism probes.
    Selfcheck {
        #[arg(long, hide = true)]
        perturb_gradient: bool,
        #[arg(long)]
        kl_samples: Option<usize>,
    },
}

fn effective_config(cli: &Cli) -> ccvae::Result<RunConfig> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &g.out {
        cfg.out = out.clone();
    }
    if let Some(format) = g.format {
        cfg.format = format;
    }
    if g.deterministic_mu {
        cfg.benchmark.pipeline.deterministic_mu = true;
    }
    if let Some(t) = g.threads {
        cfg.threads = t;
    }
    match &cli.command {
        Command::SynthData | Command::Selfcheck { .. } => {}
        Command::Train { split, epochs, resume } => {
            if let Some(s) = split {
                cfg.split = *s;
            }
            if let Some(e) = epochs {
                cfg.benchmark.pipeline.train.epochs = *e;
            }
            if resume.is_some() {
                cfg.resume = resume.clone();
            }
        }
        Command::Generate {
            checkpoint,
            input,
            from,
            to,
            per_class,
            classes,
        } => {
            let gen = &mut cfg.generate;
            if checkpoint.is_some() {
                gen.checkpoint = checkpoint.clone();
            }
            if input.is_some() {
                gen.input = input.clone();
            }
            if let Some(d) = from {
                gen.from = *d;
            }
            if let Some(d) = to {
                gen.to = *d;
            }
            if let Some(n) = per_class {
                gen.per_class = *n;
            }
            if let Some(c) = classes {
                gen.classes = c.clone();
            }
        }
        Command::Classify { train, test, num_classes } => {
            if !train.is_empty() {
                cfg.classify.train = train.clone();
            }
            if test.is_some() {
                cfg.classify.test = test.clone();
            }
            if num_classes.is_some() {
                cfg.classify.num_classes = *num_classes;
            }
        }
        Command::Evaluate { split, methods } => {
            if let Some(s) = split {
                cfg.split = *s;
            }
            if let Some(m) = methods {
                cfg.benchmark.methods = m.clone();
            }
        }
        Command::Benchmark { splits, methods } => {
            if let Some(n) = splits {
                cfg.benchmark.num_splits = *n;
            }
            if let Some(m) = methods {
                cfg.benchmark.methods = m.clone();
            }
        }
    }
    cfg.resolve()
}

fn run(cli: &Cli) -> ccvae::Result<ExitCode> {
    if let Command::Selfcheck {
        perturb_gradient,
        kl_samples,
    } = &cli.command
    {
        let opts = SelfcheckOptions {
            perturb_gradient: *perturb_gradient,
            kl_samples: kl_samples.unwrap_or(0),
        };
        let report = cmd_selfcheck(&opts, cli.global.out.as_deref())?;
        print!("{}", report.to_text());
        return Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    let cfg = effective_config(cli)?;
    match &cli.command {
        Command::SynthData => {
            let out = cmd_synth_data(&cfg)?;
            println!("wrote {}, {} and {}", out.source.display(), out.target.display(), out.manifest.display());
        }
        Command::Train { .. } => {
            let out = cmd_train(&cfg)?;
            if let Some(last) = out.history.epochs.last() {
                println!("{} epochs, final loss {:.4} (kl {:.4})", out.history.epochs.len(), last.total, last.kl);
            }
            println!("wrote {} and {}", out.checkpoint.display(), out.loss_history.display());
        }
        Command::Generate { .. } => {
            let path = cmd_generate(&cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Classify { .. } => {
            let out = cmd_classify(&cfg)?;
            if let Some(acc) = out.accuracy {
                println!("mean per-class accuracy {:.4}", acc);
            }
            println!("wrote {}", out.classifier.display());
        }
        Command::Evaluate { .. } => {
            let (_, agg) = cmd_evaluate(&cfg)?;
            print!("{}", agg.to_table());
        }
        Command::Benchmark { .. } => {
            let result = cmd_benchmark(&cfg)?;
            print!("{}", result.aggregate.to_table());
            println!("wrote {}", cfg.out.join("summary.csv").display());
        }
        Command::Selfcheck { .. } => unreachable!("handled above"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
