use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twosite_mbl::ensemble::{
    fit::{fit_exponential, fit_power_law},
    io, run_experiment, Engine, ExperimentConfig, Observable, Spacing, TimeGrid,
};
use twosite_mbl::ensemble::tint::{interaction_time_scan, DEFAULT_THRESHOLD};
use twosite_mbl::lbit::LbitParams;
use twosite_mbl::model::{ModelParams, Rational};
use twosite_mbl::observables::BulkWindow;
use twosite_mbl::propagator::KrylovConfig;
use twosite_mbl::spectral::{phase_scan, write_phase_scan};
use twosite_mbl::Result;

#[derive(Parser)]
#[command(name = "twosite", version, about = "Entanglement dynamics in quasi-periodic spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quench from the Néel state and average over phases.
    Quench(QuenchArgs),
    /// Concurrence dynamics of the ℓ-bit model.
    Lbit(LbitArgs),
    /// Mean gap ratio on a grid of (Δ, V).
    ScanPhase(ScanArgs),
    /// Power-law or exponential fit of a stored series.
    Fit(FitArgs),
    /// Interaction times for several V against the V = 0 reference.
    Tint(TintArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainEngine {
    Exact,
    Freefermion,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridSpacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Power,
    Exponential,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.1)]
    t_start: f64,
    #[arg(long, default_value_t = 1000.0)]
    t_stop: f64,
    #[arg(long, default_value_t = 61)]
    points: usize,
    #[arg(long, value_enum, default_value_t = GridSpacing::Log)]
    spacing: GridSpacing,
}

impl GridArgs {
    fn grid(&self) -> TimeGrid {
        TimeGrid {
            start: self.t_start,
            stop: self.t_stop,
            points: self.points,
            spacing: match self.spacing {
                GridSpacing::Linear => Spacing::Linear,
                GridSpacing::Log => Spacing::Log,
            },
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 1)]
    realizations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bulk window as `lo,hi` (1-based, inclusive).
    #[arg(long, value_parser = parse_window)]
    window: Option<(usize, usize)>,
    #[arg(long, default_value_t = 2)]
    r_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long, short = 'L')]
    sites: usize,
    /// Interaction V.
    #[arg(long, short = 'V', default_value_t = 0.0)]
    interaction: f64,
    /// Quasi-periodic amplitude Δ.
    #[arg(long, short = 'D', default_value_t = 0.0)]
    disorder: f64,
    #[arg(long, short = 'J', default_value_t = 1.0)]
    hopping: f64,
    /// Inverse wavelength as `p/q`.
    #[arg(long, value_parser = parse_rational, default_value = "532/738")]
    beta: Rational,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    #[arg(long, default_value_t = 30)]
    krylov_dim: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl ChainArgs {
    fn params(&self) -> ModelParams {
        let mut p = ModelParams::new(self.sites, self.interaction, self.disorder);
        p.hopping = self.hopping;
        p.beta = self.beta;
        p
    }

    fn krylov(&self) -> KrylovConfig {
        KrylovConfig { dt: self.dt, m: self.krylov_dim, tol: self.tol }
    }
}

#[derive(Args)]
struct QuenchArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = ChainEngine::Exact)]
    engine: ChainEngine,
    /// Comma-separated subset of concurrence, concurrence_bound, imbalance, entropy.
    #[arg(long, default_value = "concurrence,imbalance")]
    observables: String,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LbitArgs {
    #[arg(long, short = 'L')]
    sites: usize,
    /// Coupling half-width W.
    #[arg(long, default_value_t = 1.0)]
    coupling_width: f64,
    /// Coupling decay rate α.
    #[arg(long, default_value_t = 1.0)]
    decay: f64,
    #[arg(long, default_value_t = 1.0)]
    field_width: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, short = 'L', default_value_t = 12)]
    sites: usize,
    /// Comma-separated Δ values.
    #[arg(long, value_delimiter = ',', required = true)]
    deltas: Vec<f64>,
    /// Comma-separated V values.
    #[arg(long = "vs", value_delimiter = ',', required = true)]
    vs: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    realizations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Series CSV with columns time,mean,variance,n_real.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Model::Power)]
    model: Model,
    #[arg(long)]
    t1: f64,
    #[arg(long)]
    t2: f64,
    /// Optional JSON output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TintArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Comma-separated interaction strengths.
    #[arg(long = "vs", value_delimiter = ',', required = true)]
    vs: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = 0.0)]
    t_start: f64,
    #[arg(long, default_value_t = 50.0)]
    t_stop: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_window(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let (p, q) = s.split_once('/').ok_or("expected p/q")?;
    let p = p.trim().parse().map_err(|e| format!("{e}"))?;
    let q = q.trim().parse().map_err(|e| format!("{e}"))?;
    Rational::new(p, q).map_err(|e| e.to_string())
}

fn apply_common(cfg: &mut ExperimentConfig, c: &CommonArgs) -> Result<()> {
    cfg.n_realizations = c.realizations;
    cfg.seed = c.seed;
    cfg.r_max = c.r_max;
    cfg.out_dir = c.out.clone();
    if let Some((lo, hi)) = c.window {
        cfg.window = Some(BulkWindow::new(lo, hi, cfg.system.sites())?);
    }
    Ok(())
}

fn finish_run(cfg: &ExperimentConfig) -> Result<()> {
    let record = run_experiment(cfg)?;
    if let Some(dir) = &cfg.out_dir {
        io::write_run(&record, dir)?;
    }
    let summary: Vec<_> = record
        .series
        .iter()
        .map(|s| {
            serde_json::json!({
                "observable": s.name,
                "final_time": s.times.last(),
                "final_mean": s.mean.last(),
            })
        })
        .collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "config_hash": record.metadata.config_hash,
            "wall_time_s": record.metadata.wall_time_s,
            "series": summary,
        }))?
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Quench(a) => {
            let engine = match a.engine {
                ChainEngine::Exact => Engine::Exact,
                ChainEngine::Freefermion => Engine::FreeFermion,
            };
            let mut cfg = ExperimentConfig::chain(engine, a.chain.params(), a.grid.grid());
            cfg.krylov = a.chain.krylov();
            cfg.observables = a
                .observables
                .split(',')
                .map(|s| Observable::from_name(s.trim()))
                .collect::<Result<_>>()?;
            apply_common(&mut cfg, &a.common)?;
            finish_run(&cfg)
        }
        Command::Lbit(a) => {
            let params = LbitParams {
                sites: a.sites,
                coupling_width: a.coupling_width,
                decay: a.decay,
                field_width: a.field_width,
                seed: a.common.seed,
            };
            let mut cfg = ExperimentConfig::lbit(params, a.grid.grid());
            apply_common(&mut cfg, &a.common)?;
            finish_run(&cfg)
        }
        Command::ScanPhase(a) => {
            let grid: Vec<(f64, f64)> = a
                .deltas
                .iter()
                .flat_map(|&d| a.vs.iter().map(move |&v| (d, v)))
                .collect();
            let rows = phase_scan(&grid, a.sites, a.realizations, a.seed)?;
            if let Some(path) = &a.out {
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                write_phase_scan(&rows, path)?;
            }
            println!("{}", serde_json::to_string_pretty(&rows)?);
            Ok(())
        }
        Command::Fit(a) => {
            let series = io::read_series(&a.input)?;
            let fit = match a.model {
                Model::Power => fit_power_law(&series, (a.t1, a.t2))?,
                Model::Exponential => fit_exponential(&series, (a.t1, a.t2))?,
            };
            let text = serde_json::to_string_pretty(&fit)?;
            if let Some(path) = &a.out {
                std::fs::write(path, text.clone() + "\n")?;
            }
            println!("{text}");
            Ok(())
        }
        Command::Tint(a) => {
            let grid = TimeGrid::linear(a.t_start, a.t_stop, a.points);
            let mut cfg = ExperimentConfig::chain(Engine::Exact, a.chain.params(), grid);
            cfg.krylov = a.chain.krylov();
            apply_common(&mut cfg, &a.common)?;
            let scan = interaction_time_scan(&cfg, &a.vs, a.threshold)?;
            if let Some(dir) = &cfg.out_dir {
                io::write_tint(&scan, dir)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "points": scan.points,
                    "fit": scan.fit,
                }))?
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
