mod config;
mod eval;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use selprior::Error;

use crate::config::{ConfigFile, Params, Scale};
use crate::output::{write_outputs, Metadata};

const OUT_ENV: &str = "SELPRIOR_OUT_DIR";
const DEFAULT_SEED: u64 = 20170101;

#[derive(Debug, Parser)]
#[command(name = "selprior", version, about = "Selective non-informative priors: experiments and evaluations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run an experiment and write `<id>.csv` and `<id>.json`.
    Run {
        /// Experiment id; may instead come from the config file.
        experiment: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scale: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides the environment and the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate a single prior, posterior or coverage value.
    Eval {
        #[command(subcommand)]
        what: eval::EvalCmd,
    },
    /// Print the default settings of an experiment as a config section.
    Describe {
        experiment: String,
        #[arg(long, default_value = "desk")]
        scale: String,
    },
    /// List experiment ids.
    List,
}

#[derive(Debug)]
enum Failure {
    Model(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Model(Error::Config(_) | Error::Domain { .. } | Error::InvalidObservation(_)) => 2,
            Failure::Model(Error::LowAcceptance { .. }) => 4,
            Failure::Model(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Model(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("selprior: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::List => {
            for e in experiments::EXPERIMENTS {
                println!("{:<8} {}", e.id, e.summary);
            }
            Ok(())
        }
        Cmd::Describe { experiment, scale } => {
            let exp = experiments::find(&experiment)?;
            let scale: Scale = scale.parse()?;
            println!("# {}", exp.summary);
            println!("# scale = {scale}");
            println!("[{}]", exp.id);
            for (k, v) in (exp.defaults)(scale) {
                println!("{k} = {v}");
            }
            Ok(())
        }
        Cmd::Eval { what } => {
            let (line, value) = eval::evaluate(&what)?;
            println!("{line}");
            println!("{}", output::sig10(value));
            Ok(())
        }
        Cmd::Run {
            experiment,
            config,
            scale,
            seed,
            out,
            threads,
        } => run(experiment, config, scale, seed, out, threads),
    }
}

fn run(
    experiment: Option<String>,
    config: Option<PathBuf>,
    scale: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<(), Failure> {
    let file = match &config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            ConfigFile::parse(&text)?
        }
        None => ConfigFile::default(),
    };
    let g = |k: &str| file.global.get(k).cloned();

    let id = experiment
        .or_else(|| g("experiment"))
        .or_else(|| match file.sections.keys().collect::<Vec<_>>()[..] {
            [only] => Some(only.clone()),
            _ => None,
        })
        .ok_or_else(|| Error::Config("no experiment given on the command line or in the config".into()))?;
    let exp = experiments::find(&id)?;
    let scale: Scale = scale.or_else(|| g("scale")).as_deref().unwrap_or("desk").parse()?;
    let seed = match seed {
        Some(s) => s,
        None => g("seed")
            .map(|s| s.parse().map_err(|_| Error::Config(format!("seed '{s}' is not an integer"))))
            .transpose()?
            .unwrap_or(DEFAULT_SEED),
    };
    let threads = match threads {
        Some(t) => Some(t),
        None => g("threads")
            .map(|s| s.parse().map_err(|_| Error::Config(format!("threads '{s}' is not an integer"))))
            .transpose()?,
    };
    let out_dir = out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| g("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    if let Some(name) = file.sections.keys().find(|s| experiments::find(s).is_err()) {
        return Err(Error::Config(format!("config section [{name}] names no experiment")).into());
    }
    let params = Params::resolve((exp.defaults)(scale), file.sections.get(exp.id))?;

    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("threads must be at least 1".into()).into());
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    let start = Instant::now();
    let table = (exp.run)(&params, seed)?;
    let runtime_secs = start.elapsed().as_secs_f64();

    let scale_s = scale.to_string();
    let meta = Metadata {
        experiment: exp.id,
        scale: &scale_s,
        config: params.entries().collect(),
        runtime_secs,
        seed,
    };
    let (csv, js) = write_outputs(&out_dir, exp.id, &table, &meta)
        .map_err(|e| Failure::Io(format!("writing results to {}: {e}", out_dir.display())))?;
    eprintln!(
        "{}: {} rows in {:.2}s -> {}, {}",
        exp.id,
        table.rows.len(),
        runtime_secs,
        csv.display(),
        js.display()
    );
    Ok(())
}
