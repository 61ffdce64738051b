//! `verify`: run the numerical verification suites and emit reports.
//!
//! Exit codes: 0 all checks pass, 1 at least one check failed, 2 usage or
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use polycauchy_cli::config::Config;
use polycauchy_cli::suites;

/// Output directory override; `--out` still names the file within it.
const OUT_DIR_ENV: &str = "VERIFY_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "verify",
    version,
    about = "Numerical verification suites for Cauchy-type operators on Lipschitz data"
)]
struct Cli {
    /// Suite to run: kernels | involution | jump | decompose | rh | whitney | all
    command: String,

    /// key=value config file applied before any flags
    #[arg(long)]
    config: Option<PathBuf>,

    /// Ambient dimension (2 or 3)
    #[arg(long)]
    m: Option<usize>,

    /// Lipschitz order of the data
    #[arg(long)]
    k: Option<usize>,

    /// Hoelder exponent in (0, 1)
    #[arg(long)]
    alpha: Option<f64>,

    /// Surface kind: sphere | circle
    #[arg(long)]
    surface: Option<String>,

    #[arg(long)]
    radius: Option<f64>,

    /// Comma-separated refinement levels, strictly increasing
    #[arg(long)]
    levels: Option<String>,

    /// Data source: polynomial | smooth-trig | file
    #[arg(long)]
    generator: Option<String>,

    /// Node-value data file (generator = file)
    #[arg(long)]
    data: Option<PathBuf>,

    /// Mesh file matching the data file
    #[arg(long)]
    mesh: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Tolerance override, name=value; repeatable
    #[arg(long = "tol")]
    tolerances: Vec<String>,

    /// JSON report file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> Result<Config, String> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("config file {}: {e}", path.display()))?;
        cfg.apply_file(&text).map_err(|e| e.to_string())?;
    }
    macro_rules! flag {
        ($field:ident, $key:literal) => {
            if let Some(v) = &cli.$field {
                cfg.set($key, &v.to_string()).map_err(|e| e.to_string())?;
            }
        };
    }
    flag!(m, "m");
    flag!(k, "k");
    flag!(alpha, "alpha");
    flag!(surface, "surface");
    flag!(radius, "radius");
    flag!(levels, "levels");
    flag!(generator, "generator");
    flag!(seed, "seed");
    if let Some(p) = &cli.data {
        cfg.data = Some(p.clone());
    }
    if let Some(p) = &cli.mesh {
        cfg.mesh = Some(p.clone());
    }
    if let Some(p) = &cli.out {
        cfg.out = Some(p.clone());
    }
    for spec in &cli.tolerances {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| format!("--tol expects name=value, got `{spec}`"))?;
        cfg.set(&format!("tol.{name}"), value)
            .map_err(|e| e.to_string())?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    if !suites::COMMANDS.contains(&cli.command.as_str()) {
        return Err(format!(
            "unknown command `{}` (expected one of {})",
            cli.command,
            suites::COMMANDS.join(" | ")
        ));
    }
    Ok(cfg)
}

fn out_path(cfg: &Config) -> Option<PathBuf> {
    let file = cfg.out.clone();
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => {
            let name = file
                .as_deref()
                .and_then(|p| p.file_name().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("report.json"));
            Some(PathBuf::from(dir).join(name))
        }
        None => file,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let report = match suites::run(&cli.command, &cfg) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", report.to_table());
    if let Some(path) = out_path(&cfg) {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                if let Err(e) = std::fs::create_dir_all(parent) {
                    eprintln!("error: creating {}: {e}", parent.display());
                    return ExitCode::from(2);
                }
            }
        }
        if let Err(e) = std::fs::write(&path, report.to_json()) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
