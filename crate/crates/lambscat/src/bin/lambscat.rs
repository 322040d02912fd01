//! Thin CLI over the library commands.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lambscat::commands::{
    cmd_analyze, cmd_lp, cmd_scatter, cmd_simulate, write_analyze, write_lp, write_scatter,
    write_simulate,
};
use lambscat::config::RunConfig;
use lambscat::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lambscat",
    version,
    about = "Spectral analysis, exact dynamics and Lax-Phillips scattering of boundary-coupled wave/oscillator models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary polynomial, roots, point spectrum and cross-checks
    Analyze(CommonArgs),
    /// Time evolution: trajectory, snapshots, energy budget
    Simulate(CommonArgs),
    /// Translation representations, scattering multiplier, check battery
    Scatter(CommonArgs),
    /// Lax-Phillips semigroup: generator, gram matrix, contraction norms
    Lp(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output].directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep one numeric config key over a grid: key=start:stop:steps
    #[arg(long, value_name = "KEY=A:B:STEPS")]
    sweep: Option<String>,
    /// Echo the parsed config as TOML and exit
    #[arg(long)]
    dump_config: bool,
}

fn out_dir(cfg: &RunConfig, args: &CommonArgs) -> PathBuf {
    args.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg.output_directory()))
}

fn run_one(command: &Command, cfg: &RunConfig, dir: &std::path::Path) -> Result<()> {
    match command {
        Command::Analyze(_) => {
            let report = cmd_analyze(cfg)?;
            write_analyze(&report, dir)?;
            println!(
                "analyze: n = {}, deg p = {}, pp_empty = {}, {} root(s), report in {}",
                report.model.n(),
                report.polynomial.degree,
                report.pp_empty,
                report.roots.len(),
                dir.join("analysis.json").display()
            );
            println!(
                "  normalized model: lambda = {:?}, c = {:?}, theta = {}",
                report.model.lambda, report.model.c, report.model.theta
            );
        }
        Command::Simulate(_) => {
            let out = cmd_simulate(cfg)?;
            write_simulate(cfg, &out, dir)?;
            for w in &out.summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "simulate: dim = {}, energy drift = {:.3e}, boundary residual = {:.3e}, outputs in {}",
                out.summary.state_dim,
                out.summary.energy_drift,
                out.summary.boundary_residual_max,
                dir.display()
            );
        }
        Command::Scatter(_) => {
            let out = cmd_scatter(cfg)?;
            write_scatter(cfg, &out, dir)?;
            println!(
                "scatter: DFT relation error = {:.3e}, Parseval residual = {:.3e}, outputs in {}",
                out.checks.dft_relation_error,
                out.checks.parseval.rel_residual_plus,
                dir.display()
            );
        }
        Command::Lp(_) => {
            let report = cmd_lp(cfg)?;
            write_lp(&report, dir)?;
            println!(
                "lp: dim K = {} = deg p, min dissipativity eigenvalue = {:.3e}, report in {}",
                report.dim,
                report.dissipativity_min_eigenvalue,
                dir.join("lp.json").display()
            );
        }
    }
    Ok(())
}

/// Parse `key=a:b:steps` and produce the per-run (value, config) list by
/// rewriting the dotted key inside the TOML tree.
fn sweep_configs(text: &str, spec: &str) -> Result<Vec<(f64, RunConfig)>> {
    let (key, grid) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config("sweep spec must be key=a:b:steps".into()))?;
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config("sweep grid must be a:b:steps".into()));
    }
    let a: f64 = parts[0].parse().map_err(|_| Error::Config("bad sweep start".into()))?;
    let b: f64 = parts[1].parse().map_err(|_| Error::Config("bad sweep stop".into()))?;
    let steps: usize = parts[2].parse().map_err(|_| Error::Config("bad sweep step count".into()))?;
    if steps < 1 {
        return Err(Error::Config("sweep needs at least one step".into()));
    }
    let tree: toml::Value = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let segs: Vec<&str> = key.split('.').collect();
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let v = if steps == 1 {
            a
        } else {
            a + (b - a) * i as f64 / (steps - 1) as f64
        };
        let mut t = tree.clone();
        set_path(&mut t, &segs, v)?;
        let cfg: RunConfig = t.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        out.push((v, cfg));
    }
    Ok(out)
}

fn set_path(tree: &mut toml::Value, segs: &[&str], v: f64) -> Result<()> {
    let table = tree
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("sweep key segment '{}' is not a table", segs[0])))?;
    if segs.len() == 1 {
        table.insert(segs[0].to_string(), toml::Value::Float(v));
        return Ok(());
    }
    let child = table
        .entry(segs[0].to_string())
        .or_insert(toml::Value::Table(Default::default()));
    set_path(child, &segs[1..], v)
}

fn sweep_threads() -> usize {
    std::env::var("LAMBSCAT_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn run(cli: &Cli) -> Result<()> {
    let args = match &cli.command {
        Command::Analyze(a) | Command::Simulate(a) | Command::Scatter(a) | Command::Lp(a) => a,
    };
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = RunConfig::parse(&text)?;
    if args.dump_config {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    let base = out_dir(&cfg, args);
    match &args.sweep {
        None => run_one(&cli.command, &cfg, &base),
        Some(spec) => {
            let runs = sweep_configs(&text, spec)?;
            let key = spec.split('=').next().unwrap_or("key");
            let threads = sweep_threads().min(runs.len());
            let jobs = std::sync::Mutex::new(runs.into_iter().enumerate().collect::<Vec<_>>());
            let failures = std::sync::Mutex::new(Vec::<String>::new());
            std::thread::scope(|scope| {
                for _ in 0..threads {
                    scope.spawn(|| loop {
                        let job = jobs.lock().unwrap().pop();
                        let Some((i, (v, cfg))) = job else { break };
                        let dir = base.join(format!("sweep_{i:03}_{key}={v}"));
                        if let Err(e) = run_one(&cli.command, &cfg, &dir) {
                            failures
                                .lock()
                                .unwrap()
                                .push(format!("{key}={v}: error[{}]: {e}", e.tag()));
                        }
                    });
                }
            });
            let failures = failures.into_inner().unwrap();
            if failures.is_empty() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{} sweep run(s) failed:\n  {}",
                    failures.len(),
                    failures.join("\n  ")
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.tag());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
