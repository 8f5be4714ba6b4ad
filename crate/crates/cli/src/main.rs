use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stable_kernels::experiments::{run_experiment, ExperimentConfig, ExperimentName, RunReport};

#[derive(Parser)]
#[command(
    name = "stable-kernels",
    version,
    about = "Runs the stable-kernels experiment suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run whichever experiment the config file names.
    Run(RunArgs),
    Normalizers(RunArgs),
    LevyAccuracy(RunArgs),
    HarnackSweep(RunArgs),
    Concentration(RunArgs),
    MaximalDomination(RunArgs),
    ZoCheck(RunArgs),
    HomspaceSuite(RunArgs),
    ApproxIdentity(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts and manifest.json.
    #[arg(long, env = "STABLE_KERNELS_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the experiment's primary tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, env = "STABLE_KERNELS_THREADS")]
    threads: Option<usize>,
}

impl Command {
    fn split(self) -> (Option<ExperimentName>, RunArgs) {
        use ExperimentName as E;
        match self {
            Self::Run(a) => (None, a),
            Self::Normalizers(a) => (Some(E::Normalizers), a),
            Self::LevyAccuracy(a) => (Some(E::LevyAccuracy), a),
            Self::HarnackSweep(a) => (Some(E::HarnackSweep), a),
            Self::Concentration(a) => (Some(E::Concentration), a),
            Self::MaximalDomination(a) => (Some(E::MaximalDomination), a),
            Self::ZoCheck(a) => (Some(E::ZoCheck), a),
            Self::HomspaceSuite(a) => (Some(E::HomspaceSuite), a),
            Self::ApproxIdentity(a) => (Some(E::ApproxIdentity), a),
        }
    }
}

fn build_config(name: Option<ExperimentName>, args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = match (&args.config, name) {
        (Some(path), _) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
        (None, Some(n)) => ExperimentConfig::new(n),
        (None, None) => return Err("`run` needs --config".into()),
    };
    if let Some(n) = name {
        if cfg.experiment != n {
            return Err(format!(
                "config names experiment `{}` but the subcommand is `{}`",
                cfg.experiment.as_str(),
                n.as_str()
            ));
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.tol.is_some() {
        cfg.tol = args.tol;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn finish(report: &RunReport) -> ExitCode {
    match serde_json::to_string_pretty(report) {
        Ok(text) => println!("{text}"),
        Err(e) => log::error!("cannot print report: {e}"),
    }
    ExitCode::from(report.exit_code as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (name, args) = cli.command.split();

    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            log::warn!("thread pool already initialised: {e}");
        }
    }

    let fallback_dir = |cfg: Option<&ExperimentConfig>| {
        args.out
            .clone()
            .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
            .unwrap_or_else(|| {
                let label = cfg
                    .map(|c| c.experiment)
                    .or(name)
                    .map_or("run", |n| n.as_str());
                PathBuf::from("out").join(label)
            })
    };

    match build_config(name, &args) {
        Ok(cfg) => {
            let dir = fallback_dir(Some(&cfg));
            finish(&run_experiment(&cfg, &dir))
        }
        Err(message) => {
            let report = RunReport::config_error(message);
            if let Err(e) = report.write_manifest(&fallback_dir(None)) {
                log::error!("cannot write manifest: {e}");
            }
            finish(&report)
        }
    }
}
