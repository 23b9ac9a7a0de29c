//! Density sweeps: per-density evaluation, CSV persistence, power-law fit
//! report and the energy-efficiency optimum report.

use std::fmt::{self, Write as _};
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;

use crate::config::{EnergyConfig, ExperimentConfig, FitIntervals};
use crate::energy::{
    argmax, classify_regime, energy_efficiency, fit_power_law, local_maxima, optimal_density_partial, per_km2, per_m2,
    throughput, total_power, FullLoadConstants, PowerLawFit, RegimeClassification,
};
use crate::error::{Error, Result};
use crate::load::LoadModel;
use crate::montecarlo::{simulate_sinr, SimConfig};
use crate::power::min_tx_power_from_sweep;
use crate::sinr::{ase_from, CoverageModel};

pub const SCHEMA_VERSION: u32 = 1;

const COLUMNS: [&str; 15] = [
    "lambda_per_km2",
    "active_per_km2",
    "interferer_per_km2",
    "outage",
    "spectral_efficiency_bps_hz",
    "rate_cap_hit",
    "ase_bps_hz_km2",
    "p_tx_dbm",
    "p_tx_watts",
    "p_total_watts",
    "energy_efficiency_bit_per_joule",
    "mc_outage",
    "mc_outage_half_width",
    "mc_spectral_efficiency_bps_hz",
    "status",
];

/// One density of a sweep. Missing values are `None`; `status` says why.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepRow {
    pub lambda: f64,
    pub active_density: f64,
    pub interferer_density: f64,
    pub outage: Option<f64>,
    pub spectral_efficiency: Option<f64>,
    pub rate_cap_hit: Option<bool>,
    pub ase: Option<f64>,
    pub p_tx_dbm: Option<f64>,
    pub p_tx_watts: Option<f64>,
    pub p_total_watts: Option<f64>,
    pub energy_efficiency: Option<f64>,
    pub mc_outage: Option<f64>,
    pub mc_half_width: Option<f64>,
    pub mc_spectral_efficiency: Option<f64>,
    /// `ok`, or a reason code for the first failure.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Short machine-readable reason for a failed density.
pub fn reason_code(e: &Error) -> &'static str {
    match e {
        Error::Domain { .. } => "domain_error",
        Error::Quadrature(_) => "quadrature_failure",
        Error::NoCrossing { .. } => "no_crossing",
        Error::SearchFailure { .. } => "power_search_failure",
        Error::Underdetermined { .. } => "underdetermined_fit",
        Error::DegenerateBoundary { .. } => "degenerate_boundary",
        Error::Invalid(_) => "invalid",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    /// Overrides the configured Monte Carlo drop count (and enables it).
    pub mc_drops: Option<usize>,
    /// Overrides the configured Monte Carlo seed.
    pub seed: Option<u64>,
    /// Skip the Monte Carlo column even when configured.
    pub skip_mc: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub fits: FitReport,
    pub optimum: Option<OptimumReport>,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    /// 0 when every density succeeded, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures() == 0 {
            0
        } else {
            2
        }
    }
}

fn evaluate(config: &ExperimentConfig, lambda: f64) -> (SweepRow, Option<Error>) {
    let s = config.scenario(lambda);
    let mut row = SweepRow {
        lambda,
        active_density: s.active_density(),
        interferer_density: s.interferer_density(),
        status: "ok".into(),
        ..SweepRow::default()
    };
    let y = config.threshold();
    let mut run = || -> Result<()> {
        let model = CoverageModel::with_tolerances(s, config.tolerances)?;
        row.outage = Some(model.outage(y)?);
        let ec = model.avg_spectral_efficiency()?;
        row.spectral_efficiency = Some(ec.value);
        row.rate_cap_hit = Some(ec.cap_hit);
        let ase = ase_from(row.active_density, ec.value, s.reuse_factor());
        row.ase = Some(ase);
        if let Some(pc) = &config.power {
            let mut pc = pc.clone();
            pc.threshold = y;
            let noise_sweep = model.noise_sweep(y)?;
            let r = min_tx_power_from_sweep(&noise_sweep, &pc, s.reuse_factor())?;
            row.p_tx_dbm = Some(r.p_tx_dbm);
            row.p_tx_watts = Some(r.p_tx_watts());
        }
        if let (Some(e), Some(p)) = (&config.energy, row.p_tx_watts) {
            let total = total_power(&e.model, e.area_km2, lambda, row.active_density, p)?;
            row.p_total_watts = Some(total);
            row.energy_efficiency = Some(energy_efficiency(throughput(e.area_km2, e.bandwidth_hz, ase), total)?);
        }
        Ok(())
    };
    let err = run().err();
    if let Some(e) = &err {
        row.status = reason_code(e).to_owned();
    }
    (row, err)
}

fn add_monte_carlo(config: &ExperimentConfig, opts: &SweepOptions, row: &mut SweepRow) {
    let Some(drops) = opts
        .mc_drops
        .or(config.monte_carlo.as_ref().map(|m| m.drops))
        .filter(|_| !opts.skip_mc)
    else {
        return;
    };
    let mc = config.monte_carlo.as_ref();
    let seed = opts.seed.or(mc.map(|m| m.seed)).unwrap_or(1);
    let mut sim = SimConfig::new(config.scenario(row.lambda), drops, seed).with_thresholds(&[config.threshold()]);
    sim.disk_radius = mc.and_then(|m| m.disk_radius_km);
    match simulate_sinr(&sim) {
        Ok(st) => {
            row.mc_outage = Some(1.0 - st.ccdf[0].value);
            row.mc_half_width = Some(st.ccdf[0].half_width);
            row.mc_spectral_efficiency = Some(st.mean_rate);
        }
        Err(e) => {
            if row.is_ok() {
                row.status = format!("mc_{}", reason_code(&e));
            }
        }
    }
}

/// Evaluates every configured density (in parallel) and assembles the
/// reports. Per-density failures are recorded in the rows.
pub fn run_sweep(config: &ExperimentConfig, opts: &SweepOptions) -> SweepOutput {
    let rows: Vec<SweepRow> = config
        .densities
        .par_iter()
        .map(|&l| {
            let (mut row, _) = evaluate(config, l);
            add_monte_carlo(config, opts, &mut row);
            row
        })
        .collect();
    let fits = FitReport::from_rows(&rows, &config.fits);
    let optimum = config
        .energy
        .as_ref()
        .map(|e| OptimumReport::new(&rows, &fits, e, &config.load));
    SweepOutput { rows, fits, optimum }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the versioned CSV: a `# schema_version=N` line, the header, one
/// row per density.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Invalid(format!("cannot write CSV: {e}"));
    writeln!(out, "# schema_version={SCHEMA_VERSION}").map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Invalid(format!("cannot write CSV: {e}"));
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.active_density.to_string(),
            r.interferer_density.to_string(),
            cell(r.outage),
            cell(r.spectral_efficiency),
            r.rate_cap_hit.map(|b| b.to_string()).unwrap_or_default(),
            cell(r.ase),
            cell(r.p_tx_dbm),
            cell(r.p_tx_watts),
            cell(r.p_total_watts),
            cell(r.energy_efficiency),
            cell(r.mc_outage),
            cell(r.mc_half_width),
            cell(r.mc_spectral_efficiency),
            r.status.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

/// Reads a CSV produced by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::Invalid(format!("cannot read CSV: {e}")))?;
    let version = first
        .trim()
        .strip_prefix("# schema_version=")
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| Error::Invalid("missing '# schema_version=' line".into()))?;
    if version != SCHEMA_VERSION {
        return Err(Error::Invalid(format!(
            "schema_version {version} is not supported (expected {SCHEMA_VERSION})"
        )));
    }
    let mut r = csv::Reader::from_reader(reader);
    let bad = |e: csv::Error| Error::Invalid(format!("malformed CSV: {e}"));
    let header = r.headers().map_err(bad)?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Invalid("CSV header does not match the schema".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(bad)?;
        let num = |i: usize| -> Result<Option<f64>> {
            let s = &rec[i];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Invalid(format!("column {} holds '{s}', not a number", COLUMNS[i])))
            }
        };
        let req = |i: usize| num(i)?.ok_or_else(|| Error::Invalid(format!("column {} is empty", COLUMNS[i])));
        rows.push(SweepRow {
            lambda: req(0)?,
            active_density: req(1)?,
            interferer_density: req(2)?,
            outage: num(3)?,
            spectral_efficiency: num(4)?,
            rate_cap_hit: match &rec[5] {
                "" => None,
                s => Some(s == "true"),
            },
            ase: num(6)?,
            p_tx_dbm: num(7)?,
            p_tx_watts: num(8)?,
            p_total_watts: num(9)?,
            energy_efficiency: num(10)?,
            mc_outage: num(11)?,
            mc_half_width: num(12)?,
            mc_spectral_efficiency: num(13)?,
            status: rec[14].to_owned(),
        });
    }
    Ok(rows)
}

/// A fit on one interval, or the reason it could not be made.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFit {
    /// BS/km².
    pub interval: (f64, f64),
    pub fit: std::result::Result<PowerLawFit, String>,
}

/// `ASE ≈ a·λ^α` (λ per km²) and `P_TX ≈ P_T·λ^δ` (λ per m², watts).
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub ase: Vec<IntervalFit>,
    pub power: Vec<IntervalFit>,
}

impl FitReport {
    pub fn from_rows(rows: &[SweepRow], intervals: &FitIntervals) -> Self {
        let ase_pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.lambda, r.ase?))).collect();
        let power_pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((per_m2(r.lambda), r.p_tx_watts?)))
            .collect();
        let ase = intervals
            .ase
            .iter()
            .map(|&iv| IntervalFit {
                interval: iv,
                fit: fit_power_law(&ase_pts, iv).map_err(|e| e.to_string()),
            })
            .collect();
        let power = if power_pts.is_empty() {
            Vec::new()
        } else {
            intervals
                .power
                .iter()
                .map(|&(lo, hi)| IntervalFit {
                    interval: (lo, hi),
                    fit: fit_power_law(&power_pts, (per_m2(lo), per_m2(hi))).map_err(|e| e.to_string()),
                })
                .collect()
        };
        FitReport { ase, power }
    }

    /// ASE exponent on the interval `(lo, hi)` if it was fitted.
    pub fn alpha(&self, interval: (f64, f64)) -> Option<f64> {
        self.ase
            .iter()
            .find(|f| f.interval == interval)
            .and_then(|f| f.fit.as_ref().ok().map(|p| p.b))
    }
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# power-law fits f = a*z^b, least squares in log-log")?;
        for fit in &self.ase {
            let (lo, hi) = fit.interval;
            match &fit.fit {
                Ok(p) => writeln!(
                    f,
                    "ase   [{lo}, {hi}] per_km2: alpha={} a={} residual={} points={}",
                    p.b, p.a, p.residual, p.points
                )?,
                Err(e) => writeln!(f, "ase   [{lo}, {hi}] per_km2: unavailable ({e})")?,
            }
        }
        for fit in &self.power {
            let (lo, hi) = fit.interval;
            match &fit.fit {
                Ok(p) => writeln!(
                    f,
                    "power [{lo}, {hi}] per_km2: delta={} p_t={} residual={} points={} (lambda per m2, watts)",
                    p.b, p.a, p.residual, p.points
                )?,
                Err(e) => writeln!(f, "power [{lo}, {hi}] per_km2: unavailable ({e})")?,
            }
        }
        Ok(())
    }
}

/// Closed-form optimum from one (ASE fit, power fit) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FullLoadOptimum {
    pub ase_interval: (f64, f64),
    pub power_interval: (f64, f64),
    pub alpha: f64,
    pub delta: f64,
    pub regime: std::result::Result<RegimeClassification, String>,
    /// λ0 in BS/km² when the regime has an interior maximum.
    pub lambda0: Option<f64>,
    /// λ0 lies inside both fit intervals.
    pub self_consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialLoadOptimum {
    pub ase_interval: (f64, f64),
    pub alpha: f64,
    /// λ* in BS/km².
    pub lambda_star: std::result::Result<f64, String>,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReport {
    /// Density with the largest computed efficiency.
    pub argmax: Option<f64>,
    /// Interior local maxima of the computed efficiency curve.
    pub local_maxima: Vec<f64>,
    pub full_load: Vec<FullLoadOptimum>,
    pub partial_load: Vec<PartialLoadOptimum>,
    pub rho: f64,
    pub user_density: Option<f64>,
}

impl OptimumReport {
    pub fn new(rows: &[SweepRow], fits: &FitReport, energy: &EnergyConfig, load: &LoadModel) -> Self {
        let curve: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.lambda, r.energy_efficiency?)))
            .collect();
        let values: Vec<f64> = curve.iter().map(|p| p.1).collect();
        let argmax = argmax(&values).map(|i| curve[i].0);
        let local = local_maxima(&values).into_iter().map(|i| curve[i].0).collect();

        let mut full_load = Vec::new();
        for a in &fits.ase {
            let Ok(af) = &a.fit else { continue };
            for p in &fits.power {
                let Ok(pf) = &p.fit else { continue };
                let lo = a.interval.0.max(p.interval.0);
                let hi = a.interval.1.min(p.interval.1);
                if lo >= hi {
                    continue;
                }
                let c = FullLoadConstants {
                    p0: energy.model.p0,
                    k_rf: energy.model.k_rf,
                    p_t: pf.a,
                };
                let regime = classify_regime(af.b, pf.b, &c).map_err(|e| e.to_string());
                let lambda0 = match regime {
                    Ok(RegimeClassification::InteriorMaximum(l)) => Some(per_km2(l)),
                    _ => None,
                };
                full_load.push(FullLoadOptimum {
                    ase_interval: a.interval,
                    power_interval: p.interval,
                    alpha: af.b,
                    delta: pf.b,
                    regime,
                    lambda0,
                    self_consistent: lambda0.is_some_and(|l| l >= lo && l <= hi),
                });
            }
        }

        let mut partial_load = Vec::new();
        let user_density = match *load {
            LoadModel::PartiallyLoaded { user_density } => Some(user_density),
            _ => None,
        };
        if let Some(lu) = user_density {
            for a in &fits.ase {
                let Ok(af) = &a.fit else { continue };
                if a.interval.1 <= lu {
                    continue;
                }
                let opt = optimal_density_partial(af.b, lu, energy.model.rho);
                partial_load.push(PartialLoadOptimum {
                    ase_interval: a.interval,
                    alpha: af.b,
                    reliable: opt.as_ref().is_ok_and(|o| o.reliable),
                    lambda_star: opt.map(|o| o.density).map_err(|e| e.to_string()),
                });
            }
        }
        OptimumReport {
            argmax,
            local_maxima: local,
            full_load,
            partial_load,
            rho: energy.model.rho,
            user_density,
        }
    }

    /// The interior maximum whose λ0 falls inside its own fit intervals.
    pub fn self_consistent_lambda0(&self) -> Option<f64> {
        self.full_load.iter().find(|o| o.self_consistent).and_then(|o| o.lambda0)
    }
}

impl fmt::Display for OptimumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        match self.argmax {
            Some(l) => writeln!(s, "energy efficiency argmax: {l} per_km2").ok(),
            None => writeln!(s, "energy efficiency argmax: unavailable").ok(),
        };
        let maxima: Vec<String> = self.local_maxima.iter().map(|l| l.to_string()).collect();
        writeln!(s, "interior local maxima: [{}]", maxima.join(", ")).ok();
        for o in &self.full_load {
            let regime = match &o.regime {
                Ok(RegimeClassification::MonotoneIncreasing) => "monotone increasing".to_owned(),
                Ok(RegimeClassification::MonotoneDecreasing) => "monotone decreasing".to_owned(),
                Ok(RegimeClassification::InteriorMaximum(_)) => format!(
                    "interior maximum at lambda0={} per_km2{}",
                    o.lambda0.unwrap_or(f64::NAN),
                    if o.self_consistent { " (self-consistent)" } else { "" }
                ),
                Err(e) => format!("unclassified ({e})"),
            };
            writeln!(
                s,
                "full load: ase {:?} alpha={} with power {:?} delta={}: {regime}",
                o.ase_interval, o.alpha, o.power_interval, o.delta
            )
            .ok();
        }
        for o in &self.partial_load {
            match &o.lambda_star {
                Ok(l) => writeln!(
                    s,
                    "partial load (rho={}, users={} per_km2): ase {:?} alpha={}: lambda*={l} per_km2 ({})",
                    self.rho,
                    self.user_density.unwrap_or(f64::NAN),
                    o.ase_interval,
                    o.alpha,
                    if o.reliable { "reliable" } else { "unreliable: not well above the user density" }
                )
                .ok(),
                Err(e) => writeln!(s, "partial load: ase {:?}: unavailable ({e})", o.ase_interval).ok(),
            };
        }
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;

    fn config(extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{
  "scenario": {{
    "path_loss_los_db_at_1km": 103.8,
    "path_loss_exponent_los": 2.09,
    "path_loss_nlos_db_at_1km": 145.4,
    "path_loss_exponent_nlos": 3.75,
    "los_model": {{ "kind": "exp_square", "scale_km": 0.0825 }}
  }},
  "densities": {{ "values_per_km2": [10, 50, 100, 500] }}{extra}
}}"#
        );
        validate_config(&text).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let c = config(r#", "power_search": {}, "energy": {}"#);
        let out = run_sweep(&c, &SweepOptions::default());
        assert_eq!(out.exit_code(), 0);
        let mut buf = Vec::new();
        write_csv(&out.rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, out.rows);
        let refit = FitReport::from_rows(&back, &c.fits);
        assert_eq!(refit.to_string(), out.fits.to_string());
    }

    #[test]
    fn schema_line_is_required() {
        assert!(read_csv("lambda_per_km2\n1\n".as_bytes()).is_err());
        assert!(read_csv("# schema_version=99\n".as_bytes()).is_err());
    }

    #[test]
    fn rows_carry_densities_and_status() {
        let c = config(r#", "load": { "kind": "reuse", "reuse_factor": 2 }"#);
        let out = run_sweep(&c, &SweepOptions::default());
        for r in &out.rows {
            assert!(r.is_ok());
            assert_eq!(r.interferer_density, r.lambda / 2.0);
            assert!(r.p_tx_dbm.is_none() && r.energy_efficiency.is_none());
        }
        assert!(out.optimum.is_none());
    }

    #[test]
    fn failures_become_reason_codes() {
        let mut c = config(r#", "power_search": { "max_steps_per_level": 1, "steps_db": [0.001] }"#);
        c.densities = vec![100.0];
        let out = run_sweep(&c, &SweepOptions::default());
        assert_eq!(out.rows[0].status, "power_search_failure");
        assert!(out.rows[0].outage.is_some());
        assert_eq!(out.exit_code(), 2);
    }
}
