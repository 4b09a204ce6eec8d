use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mfapc::harness::{
    analyze, builtin, builtin_names, export_csv, fmt_sig, load_config, run_experiment, summarize, sweep,
    ExperimentConfig, HarnessError, SimTrace,
};

/// Predictive model-free adaptive control experiments.
#[derive(Parser)]
#[command(name = "mfapc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop experiment and write trace.csv and summary.txt.
    Run {
        /// Config file, or the name of a built-in example.
        #[arg(long)]
        config: String,
        /// Output directory.
        #[arg(long, env = "MFAPC_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Report closed-loop poles and the predicted steady-state error.
    Analyze {
        #[arg(long)]
        config: String,
    },
    /// Run a configuration once per parameter value.
    Sweep {
        #[arg(long)]
        config: String,
        /// Parameter to vary: lambda, eta or mu.
        #[arg(long, default_value = "lambda")]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, env = "MFAPC_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// List the built-in example configurations.
    Examples {
        /// Also write them as .cfg files into this directory.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_run(cfg: &ExperimentConfig, trace: &SimTrace, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    export_csv(trace, &dir.join("trace.csv"))?;
    let summary = summarize(trace, &cfg.reference.segment_starts(cfg.steps as i64));
    let path = dir.join("summary.txt");
    fs::write(&path, summary.render(&cfg.name)).map_err(io_err(&path))
}

fn run(config: &str, out: &Path) -> Result<(), HarnessError> {
    let cfg = load_config(config)?;
    let trace = run_experiment(&cfg)?;
    let dir = out.join(&cfg.name);
    write_run(&cfg, &trace, &dir)?;
    println!("wrote {}", dir.display());
    match trace.diverged_at {
        Some(step) => Err(HarnessError::Divergence { step }),
        None => Ok(()),
    }
}

fn sweep_cmd(config: &str, param: &str, values: &[f64], out: &Path) -> Result<(), HarnessError> {
    let cfg = load_config(config)?;
    let results = sweep(&cfg, param, values)?;
    println!("{:>12}  {:>14}  {:>14}  {:>10}", param, "rms_error", "steady_error", "diverged");
    for (value, result) in results {
        let label = fmt_sig(value);
        match result {
            Ok(trace) => {
                let dir = out.join(&cfg.name).join(format!("{param}={label}"));
                write_run(&cfg, &trace, &dir)?;
                let s = summarize(&trace, &cfg.reference.segment_starts(cfg.steps as i64));
                let steady = s.final_steady_error.map(fmt_sig).unwrap_or_else(|| "n/a".into());
                let diverged = s.diverged_at.map(|k| format!("step {k}")).unwrap_or_else(|| "no".into());
                println!("{label:>12}  {:>14}  {steady:>14}  {diverged:>10}", fmt_sig(s.rms));
            }
            Err(e) => println!("{label:>12}  error: {e}"),
        }
    }
    Ok(())
}

fn examples(write: Option<&Path>) -> Result<(), HarnessError> {
    for name in builtin_names() {
        println!("{name}");
        if let Some(dir) = write {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(format!("{name}.cfg"));
            fs::write(&path, builtin(name).unwrap_or_default()).map_err(io_err(&path))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Analyze { config } => load_config(config).and_then(|cfg| analyze(&cfg)).map(|r| print!("{}", r.render())),
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => sweep_cmd(config, param, values, out),
        Command::Examples { write } => examples(write.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
