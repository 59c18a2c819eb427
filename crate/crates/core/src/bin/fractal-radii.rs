use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fractal_radii::experiment::{
    run_with_threads, validate, validate_text, Experiment, ExperimentConfig,
};
use fractal_radii::Error;

#[derive(Parser)]
#[command(
    name = "fractal-radii",
    version,
    about = "Circumradius experiments on fractal measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Circumradii of tuples given inline or in a CSV file
    Radius(Opts),
    /// ε-profile of the radius-window incidence statistic
    Incidence(Opts),
    /// Adversarial conditional profile on the strip construction
    Sharpness(Opts),
    /// Fourier transforms of spheres, configuration measures and fractal measures
    Fourier(Opts),
    /// Riesz energies across depths
    Energy(Opts),
    /// Annulus slices and dilation sets about sampled centers
    Intersect(Opts),
    /// Covered length of the set of circumradii
    #[command(name = "radii-set")]
    RadiiSet(Opts),
    /// Box-counting dimension (and optional Frostman ratio)
    Dimension(Opts),
    /// Dry run: sizes, tuple counts and budget checks
    Validate(Opts),
}

#[derive(Args)]
struct Opts {
    /// Experiment config (`key = value` lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings appended to the config
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Root seed; overrides the config's `seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Main output CSV; overrides the config's `output`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (speed only; results never depend on it)
    #[arg(long)]
    threads: Option<usize>,
}

fn config_text(opts: &Opts) -> Result<String, Error> {
    let mut text = match &opts.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    for s in &opts.set {
        if !s.contains('=') {
            return Err(Error::Config(format!("--set expects KEY=VALUE, got {s:?}")));
        }
        text.push('\n');
        text.push_str(s);
    }
    text.push('\n');
    Ok(text)
}

fn load(opts: &Opts, experiment: Option<Experiment>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::parse(&config_text(opts)?, experiment)?;
    if let Some(dir) = opts.config.as_ref().and_then(|p| p.parent()) {
        cfg.base_dir = dir.to_path_buf();
    }
    if let Some(seed) = opts.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(out) = &opts.out {
        cfg = cfg.with_output(out);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (experiment, opts) = match &cli.command {
        Command::Radius(o) => (Experiment::Radius, o),
        Command::Incidence(o) => (Experiment::Incidence, o),
        Command::Sharpness(o) => (Experiment::Sharpness, o),
        Command::Fourier(o) => (Experiment::Fourier, o),
        Command::Energy(o) => (Experiment::Energy, o),
        Command::Intersect(o) => (Experiment::Intersect, o),
        Command::RadiiSet(o) => (Experiment::RadiiSet, o),
        Command::Dimension(o) => (Experiment::Dimension, o),
        Command::Validate(o) => {
            let report = match load(o, None) {
                Ok(cfg) => validate(&cfg),
                Err(_) => validate_text(&config_text(o).unwrap_or_default(), None),
            };
            print!("{}", report.to_text());
            return ExitCode::SUCCESS;
        }
    };
    let result = load(opts, Some(experiment)).and_then(|cfg| run_with_threads(&cfg, opts.threads));
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if !out.summary.is_empty() {
                println!("{}", out.summary);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
