use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use triflow_core::info::{correlation_report, TripartiteState};
use triflow_core::scenario::{
    parse_config, parse_state_file, resolve_config, run_job, Format, Job, RunConfig,
};

/// Tripartite information flow in finite thermal baths.
#[derive(Parser)]
#[command(name = "triflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set beta=0.5`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Dephasing time series on a logarithmic grid.
    Dephase {
        #[command(flatten)]
        common: Common,
    },
    /// Non-Markovianity witness at one final time.
    Nm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Analytic witness over a beta x N grid (delta = 10N).
    NmSurface {
        #[command(flatten)]
        common: Common,
        /// start:stop:count
        #[arg(long)]
        beta: Option<String>,
        /// first:last
        #[arg(long)]
        modes: Option<String>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Closed-form and numeric family of monogamy-violating states.
    Appendix {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Correlation report of a state file.
    Report {
        /// JSON with `dims` and row-major `entries` as [re, im] pairs.
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every identity and oracle comparison; nonzero exit on failure.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps_trunc: Option<f64>,
        #[arg(long)]
        modes_cap: Option<usize>,
    },
    /// Named figure configuration.
    Scenario {
        /// fig1a, fig1c, fig1e, fig2a, fig2b, fig3, fig4 or verify.
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TRIFLOW_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("TRIFLOW_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing stdout"),
        },
    }
}

fn config_for(job: Job, common: &Common, flags: &[(&str, Option<String>)]) -> Result<RunConfig> {
    let file = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(parse_config(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => None,
    };
    let mut overrides = common.overrides.clone();
    let seed = common.seed.map(|s| s.to_string());
    for (key, value) in flags.iter().chain([&("seed", seed)]) {
        if let Some(v) = value {
            overrides.push(format!("{key}={v}"));
        }
    }
    Ok(resolve_config(job, file.as_ref(), &overrides)?)
}

fn run(job: Job, common: &Common, flags: &[(&str, Option<String>)]) -> Result<bool> {
    let cfg = config_for(job, common, flags)?;
    let mut artifact = run_job(job, &cfg)?;
    if let Some(f) = &common.format {
        artifact = artifact.into_format(f.parse::<Format>()?)?;
    }
    emit(&artifact.text, common.out.as_deref())?;
    Ok(artifact.passed)
}

fn quoted(s: &Option<String>) -> Option<String> {
    s.as_ref().map(|v| format!("\"{v}\""))
}

fn dispatch(cli: Cli) -> Result<bool> {
    let num = |x: Option<f64>| x.map(|v| v.to_string());
    match cli.command {
        Command::Dephase { common } => run(Job::Dephase, &common, &[]),
        Command::Nm { common, t } => run(Job::Nm, &common, &[("t", num(t))]),
        Command::NmSurface {
            common,
            beta,
            modes,
            t,
        } => run(
            Job::NmSurface,
            &common,
            &[
                ("betaGrid", quoted(&beta)),
                ("modesGrid", quoted(&modes)),
                ("t", num(t)),
            ],
        ),
        Command::Appendix { common, grid } => run(
            Job::Appendix,
            &common,
            &[("grid", grid.map(|g| g.to_string()))],
        ),
        Command::Verify {
            common,
            eps_trunc,
            modes_cap,
        } => run(
            Job::Verify,
            &common,
            &[
                ("epsTrunc", num(eps_trunc)),
                ("modesCap", modes_cap.map(|m| m.to_string())),
            ],
        ),
        Command::Scenario { name, common } => run(Job::scenario(&name)?, &common, &[]),
        Command::Report { state, out } => {
            let text = fs::read_to_string(&state)
                .with_context(|| format!("reading {}", state.display()))?;
            let rho =
                parse_state_file(&text).with_context(|| format!("parsing {}", state.display()))?;
            let report = correlation_report(&TripartiteState::new(rho)?)?;
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            emit(&json, out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| dispatch(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("triflow: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("triflow: {e:#}");
            ExitCode::from(2)
        }
    }
}
