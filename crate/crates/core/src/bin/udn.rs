use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use udn_core::claims::{acceptance_suite, run_claims, ClaimContext, CLAIM_MC_DROPS};
use udn_core::config::{validate_config, ExperimentConfig, FitIntervals};
use udn_core::montecarlo::{simulate_sinr, SimConfig};
use udn_core::sweep::{read_csv, reason_code, run_sweep, write_csv, FitReport, SweepOptions, SweepOutput};

#[derive(Parser)]
#[command(name = "udn", version, about = "Coverage, rate, power and energy efficiency of dense LOS/NLOS small-cell networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Monte Carlo seed (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo drops per density (overrides the configuration).
    #[arg(long)]
    mc_drops: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytical sweep, plus Monte Carlo when configured.
    Sweep(Common),
    /// Monte Carlo only.
    Mc(Common),
    /// Minimum interference-limited transmit power per density.
    Power(Common),
    /// Energy efficiency and its optima.
    Energy(Common),
    /// Power-law fits of an existing sweep CSV.
    Fit {
        /// CSV written by `sweep`.
        #[arg(long)]
        csv: PathBuf,
        /// Configuration supplying the fit intervals (defaults otherwise).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration and print its diagnostics.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the acceptance claims and write a JSON report.
    Claims {
        /// Report path.
        #[arg(long, default_value = "claims.json")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = CLAIM_MC_DROPS)]
        mc_drops: usize,
        /// Run only these claim ids.
        #[arg(long)]
        only: Vec<String>,
    },
}

/// Validation failures exit with 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    validate_config(&text).map_err(|e| Failure(format!("{}:\n{e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn finish(out: &SweepOutput) -> u8 {
    let failed = out.failures();
    if failed > 0 {
        eprintln!("{failed} of {} densities failed:", out.rows.len());
        for r in out.rows.iter().filter(|r| !r.is_ok()) {
            eprintln!("  lambda={} per_km2: {}", r.lambda, r.status);
        }
    }
    out.exit_code() as u8
}

fn write_outputs(c: &ExperimentConfig, dir: &Path, out: &SweepOutput) -> Result<(), Failure> {
    let mut csv = Vec::new();
    write_csv(&out.rows, &mut csv)?;
    write_file(dir, &c.output.csv, &csv)?;
    write_file(dir, &c.output.fit_report, out.fits.to_string().as_bytes())?;
    if let Some(o) = &out.optimum {
        write_file(dir, &c.output.optimum_report, o.to_string().as_bytes())?;
    }
    Ok(())
}

fn sweep(args: &Common, skip_mc: bool, need_power: bool, need_energy: bool) -> Result<u8, Failure> {
    let c = load_config(&args.config)?;
    if need_power && c.power.is_none() {
        return Err(Failure("configuration has no power_search block".into()));
    }
    if need_energy && c.energy.is_none() {
        return Err(Failure("configuration has no energy block".into()));
    }
    let opts = SweepOptions {
        mc_drops: args.mc_drops,
        seed: args.seed,
        skip_mc,
    };
    let out = run_sweep(&c, &opts);
    write_outputs(&c, &args.out, &out)?;
    if let Some(o) = &out.optimum {
        print!("{o}");
    }
    Ok(finish(&out))
}

fn monte_carlo(args: &Common) -> Result<u8, Failure> {
    let c = load_config(&args.config)?;
    let mc = c.monte_carlo.as_ref();
    let drops = args
        .mc_drops
        .or(mc.map(|m| m.drops))
        .ok_or_else(|| Failure("no monte_carlo block and no --mc-drops".into()))?;
    let seed = args.seed.or(mc.map(|m| m.seed)).unwrap_or(1);
    let rows: Vec<Vec<String>> = c
        .densities
        .par_iter()
        .map(|&l| {
            let mut sim = SimConfig::new(c.scenario(l), drops, seed).with_thresholds(&[c.threshold()]);
            sim.disk_radius = mc.and_then(|m| m.disk_radius_km);
            match simulate_sinr(&sim) {
                Ok(st) => vec![
                    l.to_string(),
                    (1.0 - st.ccdf[0].value).to_string(),
                    st.ccdf[0].half_width.to_string(),
                    st.mean_rate.to_string(),
                    st.active_fraction.map(|a| a.to_string()).unwrap_or_default(),
                    st.disk_radius.to_string(),
                    "ok".into(),
                ],
                Err(e) => {
                    let mut row = vec![l.to_string()];
                    row.extend(std::iter::repeat_n(String::new(), 5));
                    row.push(reason_code(&e).into());
                    row
                }
            }
        })
        .collect();
    let failed = rows.iter().filter(|r| r[6] != "ok").count();
    let mut buf = b"# schema_version=1\n".to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record([
            "lambda_per_km2",
            "mc_outage",
            "mc_outage_half_width",
            "mc_spectral_efficiency_bps_hz",
            "mc_active_fraction",
            "disk_radius_km",
            "status",
        ])?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    write_file(&args.out, "mc.csv", &buf)?;
    Ok(if failed == 0 { 0 } else { 2 })
}

fn fit(csv: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<u8, Failure> {
    let intervals = match config {
        Some(p) => load_config(p)?.fits,
        None => FitIntervals::default(),
    };
    let file = fs::File::open(csv).map_err(|e| Failure(format!("{}: {e}", csv.display())))?;
    let rows = read_csv(file)?;
    let report = FitReport::from_rows(&rows, &intervals).to_string();
    match out {
        Some(p) => {
            fs::write(p, &report).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{report}"),
    }
    Ok(0)
}

fn claims(out: &Path, seed: u64, mc_drops: usize, only: &[String]) -> Result<u8, Failure> {
    let mut suite = acceptance_suite();
    if !only.is_empty() {
        suite.retain(|c| only.iter().any(|id| id == c.id));
        if suite.is_empty() {
            return Err(Failure(format!("no claim matches {only:?}")));
        }
    }
    let report = run_claims(&suite, &ClaimContext::new(mc_drops, seed));
    for r in &report.results {
        println!("{}", r.line());
    }
    println!("{} passed, {} failed", report.passed, report.failed);
    fs::write(out, serde_json::to_string_pretty(&report)?).map_err(|e| Failure(format!("{}: {e}", out.display())))?;
    eprintln!("wrote {}", out.display());
    Ok(if report.failed == 0 { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Sweep(a) => sweep(a, false, false, false),
        Command::Mc(a) => monte_carlo(a),
        Command::Power(a) => sweep(a, true, true, false),
        Command::Energy(a) => sweep(a, true, true, true),
        Command::Fit { csv, config, out } => fit(csv, config.as_deref(), out.as_deref()),
        Command::Validate { config } => load_config(config).map(|c| {
            println!("ok: {} densities, load {}", c.densities.len(), c.load.name());
            0
        }),
        Command::Claims {
            out,
            seed,
            mc_drops,
            only,
        } => claims(out, *seed, *mc_drops, only),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
