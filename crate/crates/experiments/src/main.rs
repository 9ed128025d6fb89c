use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use harmonicity_experiments::config::KEYS;
use harmonicity_experiments::run::run;
use harmonicity_experiments::{Experiment, ExperimentError, RawConfig};

const AFTER_HELP: &str = "\
Any config key can be overridden as `--key value` after the fixed flags,
e.g. `harmonicity modulus --field gauss_bump --u-grid 0.05,0.1,0.2`.

CSV outputs (each starts with a `# manifest: config_hash=...` line):
  modulus   modulus.csv   u,omega_h,omega1,omega2,laplacian_bound,beyond_inradius
  kfunc     kfunc.csv     t,omega_inner,omega_outer,k_upper,best_candidate,ratio_lower,
                          ratio_upper,degenerate,lower_holds,upper_holds
  pizzetti  pizzetti.csv  x,radius,mean,residual_second_order,residual
  kernel    kernel.csv    j,coeff,order (after a `# k=.., nu=.., n=.., order=.., I0=..` line)
            kernel_moments.csv  i,moment
  approx    approx.csv    p,r,k,nu,order,sup_error,error_floor,modulus_factor,rate_budget,
                          implied_constant,omega1,omega2,constant_omega1,constant_omega2,
                          weight_sum,boundary_mismatch,eval_points,stage_errors
  rates     rates.csv     approx columns plus in_fit,slope,intercept,fit_residual
Every run appends a JSON record to manifest.jsonl in the output directory.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.";

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Modulus,
    Kfunc,
    Pizzetti,
    Kernel,
    Approx,
    Rates,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Modulus => Experiment::Modulus,
            Command::Kfunc => Experiment::Kfunc,
            Command::Pizzetti => Experiment::Pizzetti,
            Command::Kernel => Experiment::Kernel,
            Command::Approx => Experiment::Approx,
            Command::Rates => Experiment::Rates,
        }
    }
}

/// Harmonicity modulus, K-functional and polyharmonic approximation experiments.
#[derive(Debug, Parser)]
#[command(name = "harmonicity", version, after_help = AFTER_HELP)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the sampled approximant grids.
    #[arg(long)]
    dump_grid: bool,
    /// `--key value` overrides of config entries.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

/// Splits trailing arguments into config overrides, picking out the fixed
/// flags when they appear after the first override.
fn parse_overrides(cli: &mut Cli) -> Result<RawConfig, ExperimentError> {
    let mut raw = RawConfig::default();
    let args = std::mem::take(&mut cli.overrides);
    let mut it = args.iter();
    while let Some(key) = it.next() {
        let Some(name) = key.strip_prefix("--") else {
            return Err(ExperimentError::Config(format!("expected --key, got '{key}'")));
        };
        if name == "dump-grid" || name == "dump_grid" {
            cli.dump_grid = true;
            continue;
        }
        let (name, value) = match name.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| ExperimentError::Config(format!("missing value for --{name}")))?;
                (name.to_string(), v.clone())
            }
        };
        match name.as_str() {
            "out" => {
                cli.out = PathBuf::from(value);
                continue;
            }
            "config" => {
                cli.config = Some(PathBuf::from(value));
                continue;
            }
            "seed" => {
                cli.seed = Some(value.parse().map_err(|_| ExperimentError::Config(format!("bad seed '{value}'")))?);
                continue;
            }
            _ => {}
        }
        raw.set(&name, &value).map_err(|e| match e {
            ExperimentError::Config(m) => ExperimentError::Config(format!("{m}; known keys: {}", KEYS.join(", "))),
            other => other,
        })?;
    }
    Ok(raw)
}

fn real_main(mut cli: Cli) -> Result<(), ExperimentError> {
    let overrides = parse_overrides(&mut cli)?;
    let mut raw = match &cli.config {
        Some(path) => RawConfig::parse(
            &fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?,
        )?,
        None => RawConfig::default(),
    };
    raw.merge(&overrides);
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string())?;
    }
    if cli.dump_grid {
        raw.set("dump_grid", "true")?;
    }
    let cfg = raw.resolve(Some(cli.command.into()))?;
    let out = run(&cfg, &cli.out)?;
    for a in &out.artifacts {
        println!("{}", cli.out.join(&a.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
