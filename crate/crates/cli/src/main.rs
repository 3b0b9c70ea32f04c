use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fisher_harnack_cli::{commands, CliError, RunConfig, Sink};

#[derive(Parser)]
#[command(name = "fisher-harnack", version, about = "Harnack estimate checks for f_t = Δf + cf(1-f)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file of `section.key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set params.beta=-1.2`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Directory for reports, CSV and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Shorthand for `--set params.n=N`.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Shorthand for `--set params.c=C`.
    #[arg(long, global = true)]
    c: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Feasibility verdict with margins for one parameter set.
    Feasible,
    /// Run one verification pipeline.
    Verify {
        #[arg(value_enum)]
        what: Check,
    },
    /// Simulate and write a snapshot archive to --out.
    Simulate,
    /// Refinement study; CSV of residuals with fitted orders in the footer.
    Converge,
    /// Feasibility over an (alpha, beta) grid as CSV.
    Sweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Phi,
    Harnack,
    Classical,
    Waves,
    Cutoff,
    Identity,
}

impl Check {
    fn name(self) -> &'static str {
        match self {
            Check::Phi => "phi",
            Check::Harnack => "harnack",
            Check::Classical => "classical",
            Check::Waves => "waves",
            Check::Cutoff => "cutoff",
            Check::Identity => "identity",
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            RunConfig::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    for s in &cli.set {
        cfg.set(s)?;
    }
    if let Some(n) = cli.n {
        cfg.insert("params.n", n);
    }
    if let Some(c) = cli.c {
        cfg.insert("params.c", c);
    }
    if let Some(seed) = cli.seed {
        cfg.insert("run.seed", seed);
    }
    cfg.output_dir = cli.out.clone();
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = load_config(cli)?;
    let sink = Sink { dir: cli.out.clone() };
    let (name, verdict) = match cli.command {
        Command::Feasible => ("feasible".to_string(), commands::feasible(&cfg, &sink)),
        Command::Sweep => ("sweep".to_string(), commands::sweep(&cfg, &sink)),
        Command::Simulate => ("simulate".to_string(), commands::simulate(&cfg, &sink)),
        Command::Converge => ("converge".to_string(), commands::converge(&cfg, &sink)),
        Command::Verify { what } => {
            let v = match what {
                Check::Phi => commands::verify_phi(&cfg, &sink),
                Check::Harnack => commands::verify_harnack(&cfg, &sink),
                Check::Classical => commands::verify_classical(&cfg, &sink),
                Check::Waves => commands::verify_waves(&cfg, &sink),
                Check::Cutoff => commands::verify_cutoff(&cfg, &sink),
                Check::Identity => commands::verify_identity(&cfg, &sink),
            };
            (format!("verify {}", what.name()), v)
        }
    };
    sink.manifest(&cfg.manifest(&name))?;
    Ok(verdict?.exit_code())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FISHER_HARNACK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("FISHER_HARNACK_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = configure_threads().and_then(|()| run(&cli)).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
