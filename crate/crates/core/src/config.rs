//! JSON experiment configuration.
//!
//! Every dimensional key carries its unit in the name (`_km`, `_per_km2`,
//! `_db`, `_watts`, ...). Validation collects every problem it finds and
//! anchors each one to a line of the source text where possible.

use std::fmt;

use serde_json::{Map, Value};

use crate::energy::PowerConsumptionModel;
use crate::load::LoadModel;
use crate::power::PowerSearchConfig;
use crate::propagation::{FadingModel, LosProbabilityModel, PathLossParams};
use crate::sinr::{Scenario, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// 1-based line in the source text, when the offending key was found.
    pub line: Option<usize>,
    /// Dotted path of the field, e.g. `energy.rho`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration problem(s):", self.diagnostics.len())?;
        for d in &self.diagnostics {
            writeln!(f, "  {d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConfig {
    pub model: PowerConsumptionModel,
    pub area_km2: f64,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub drops: usize,
    pub seed: u64,
    pub disk_radius_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitIntervals {
    pub ase: Vec<(f64, f64)>,
    pub power: Vec<(f64, f64)>,
}

impl Default for FitIntervals {
    fn default() -> Self {
        FitIntervals {
            ase: vec![(1.0, 50.0), (50.0, 500.0), (500.0, 1e4)],
            power: vec![(1.0, 60.0), (60.0, 300.0), (300.0, 1e4)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub csv: String,
    pub fit_report: String,
    pub optimum_report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            csv: "sweep.csv".into(),
            fit_report: "fits.txt".into(),
            optimum_report: "optimum.txt".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub propagation: PathLossParams,
    pub los_model: LosProbabilityModel,
    pub fading: FadingModel,
    /// BS/km², ascending.
    pub densities: Vec<f64>,
    pub load: LoadModel,
    pub threshold_db: f64,
    pub tolerances: Tolerances,
    pub power: Option<PowerSearchConfig>,
    pub energy: Option<EnergyConfig>,
    pub monte_carlo: Option<MonteCarloConfig>,
    pub fits: FitIntervals,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Scenario at density `lambda`, noise free.
    pub fn scenario(&self, lambda: f64) -> Scenario {
        Scenario::new(lambda, self.propagation, self.los_model)
            .with_load(self.load)
            .with_fading(self.fading)
    }

    pub fn threshold(&self) -> f64 {
        10f64.powf(self.threshold_db / 10.0)
    }
}

/// Walks a parsed document and accumulates diagnostics instead of stopping
/// at the first problem.
struct Reader<'a> {
    text: &'a str,
    diags: Vec<Diagnostic>,
}

impl<'a> Reader<'a> {
    /// Line of `"key"` for the last segment of `path`, searching each
    /// segment after the previous one.
    fn line_of(&self, path: &str) -> Option<usize> {
        let mut from = 0;
        for seg in path.split('.') {
            let needle = format!("\"{seg}\"");
            from += self.text[from..].find(&needle)?;
        }
        Some(self.text[..from].matches('\n').count() + 1)
    }

    fn push(&mut self, path: &str, message: impl Into<String>) {
        let line = self.line_of(path);
        self.diags.push(Diagnostic {
            line,
            path: path.to_owned(),
            message: message.into(),
        });
    }

    fn check_keys(&mut self, obj: &Map<String, Value>, prefix: &str, allowed: &[&str]) {
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                let path = join(prefix, k);
                self.push(&path, format!("unknown key (expected one of: {})", allowed.join(", ")));
            }
        }
    }

    fn object<'v>(&mut self, obj: &'v Map<String, Value>, prefix: &str, key: &str) -> Option<&'v Map<String, Value>> {
        match obj.get(key) {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.push(&join(prefix, key), "expected an object");
                None
            }
        }
    }

    fn num(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str) -> Option<f64> {
        let path = join(prefix, key);
        match obj.get(key) {
            None => None,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.push(&path, "expected a finite number");
                    None
                }
            },
        }
    }

    fn required(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str) -> Option<f64> {
        if !obj.contains_key(key) {
            let line = self.line_of(prefix).filter(|_| !prefix.is_empty());
            self.diags.push(Diagnostic {
                line,
                path: join(prefix, key),
                message: "missing required field".into(),
            });
            return None;
        }
        self.num(obj, prefix, key)
    }

    fn ranged(
        &mut self,
        obj: &Map<String, Value>,
        prefix: &str,
        key: &str,
        default: Option<f64>,
        ok: impl Fn(f64) -> bool,
        what: &str,
    ) -> Option<f64> {
        let v = match default {
            Some(d) if !obj.contains_key(key) => return Some(d),
            _ => self.required(obj, prefix, key)?,
        };
        if ok(v) {
            Some(v)
        } else {
            self.push(&join(prefix, key), format!("{v} is out of range: {what}"));
            None
        }
    }

    fn string(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str) -> Option<String> {
        match obj.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.push(&join(prefix, key), "expected a string");
                None
            }
        }
    }

    fn numbers(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str) -> Option<Vec<f64>> {
        let path = join(prefix, key);
        match obj.get(key)? {
            Value::Array(a) => {
                let v: Option<Vec<f64>> = a.iter().map(|x| x.as_f64().filter(|f| f.is_finite())).collect();
                if v.is_none() {
                    self.push(&path, "expected an array of finite numbers");
                }
                v
            }
            _ => {
                self.push(&path, "expected an array");
                None
            }
        }
    }

    fn intervals(&mut self, obj: &Map<String, Value>, prefix: &str, key: &str) -> Option<Vec<(f64, f64)>> {
        let path = join(prefix, key);
        let arr = match obj.get(key)? {
            Value::Array(a) => a,
            _ => {
                self.push(&path, "expected an array of [low, high] pairs");
                return None;
            }
        };
        let mut out = Vec::new();
        for item in arr {
            match item.as_array().map(|p| p.iter().filter_map(Value::as_f64).collect::<Vec<_>>()) {
                Some(p) if p.len() == 2 && p[0] > 0.0 && p[1] > p[0] => out.push((p[0], p[1])),
                _ => {
                    self.push(&path, "each interval must be [low, high] with 0 < low < high");
                    return None;
                }
            }
        }
        Some(out)
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_owned()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Parses and validates a configuration document.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError {
        diagnostics: vec![Diagnostic {
            line: Some(e.line()),
            path: String::new(),
            message: format!("malformed JSON: {e}"),
        }],
    })?;
    let Value::Object(root) = root else {
        return Err(ConfigError {
            diagnostics: vec![Diagnostic {
                line: Some(1),
                path: String::new(),
                message: "top level must be an object".into(),
            }],
        });
    };
    let mut r = Reader {
        text,
        diags: Vec::new(),
    };
    r.check_keys(
        &root,
        "",
        &[
            "scenario",
            "densities",
            "load",
            "sinr_threshold_db",
            "accuracy",
            "power_search",
            "energy",
            "monte_carlo",
            "fits",
            "output",
        ],
    );

    // scenario
    let empty = Map::new();
    let scenario = match r.object(&root, "", "scenario") {
        Some(s) => s,
        None => {
            if !root.contains_key("scenario") {
                r.push("scenario", "missing required block");
            }
            &empty
        }
    };
    r.check_keys(
        scenario,
        "scenario",
        &[
            "path_loss_los_db_at_1km",
            "path_loss_exponent_los",
            "path_loss_nlos_db_at_1km",
            "path_loss_exponent_nlos",
            "los_model",
            "fading_mu",
        ],
    );
    let pl_los = r.required(scenario, "scenario", "path_loss_los_db_at_1km");
    let b_los = r.ranged(scenario, "scenario", "path_loss_exponent_los", None, |b| b > 0.0, "must be positive");
    let pl_nlos = r.required(scenario, "scenario", "path_loss_nlos_db_at_1km");
    let b_nlos = r.ranged(scenario, "scenario", "path_loss_exponent_nlos", None, |b| b > 0.0, "must be positive");
    let propagation = match (pl_los, b_los, pl_nlos, b_nlos) {
        (Some(a), Some(b), Some(c), Some(d)) => match PathLossParams::from_db(a, b, c, d) {
            Ok(p) => Some(p),
            Err(e) => {
                r.push("scenario.path_loss_exponent_nlos", e.to_string());
                None
            }
        },
        _ => None,
    };
    let fading = r
        .ranged(scenario, "scenario", "fading_mu", Some(1.0), |m| m > 0.0, "must be positive")
        .and_then(|m| FadingModel::new(m).ok());
    let los_model = read_los_model(&mut r, scenario);

    // densities
    let densities = match r.object(&root, "", "densities") {
        None => {
            if !root.contains_key("densities") {
                r.push("densities", "missing required block");
            }
            None
        }
        Some(d) => read_densities(&mut r, d),
    };

    let load = read_load(&mut r, &root);
    let threshold_db = r.ranged(&root, "", "sinr_threshold_db", Some(-8.0), |_| true, "");
    let tolerances = match r.string(&root, "", "accuracy").as_deref() {
        None | Some("sweep") => Some(Tolerances::sweep()),
        Some("strict") => Some(Tolerances::default()),
        Some(other) => {
            r.push("accuracy", format!("unknown accuracy '{other}' (expected 'sweep' or 'strict')"));
            None
        }
    };

    let power = r.object(&root, "", "power_search").and_then(|p| read_power(&mut r, p));
    let power_present = root.contains_key("power_search");
    let energy = r.object(&root, "", "energy").and_then(|e| read_energy(&mut r, e));
    let energy_present = root.contains_key("energy");
    let monte_carlo = r.object(&root, "", "monte_carlo").and_then(|m| read_monte_carlo(&mut r, m));
    let mc_present = root.contains_key("monte_carlo");

    let fits = match r.object(&root, "", "fits") {
        None => FitIntervals::default(),
        Some(f) => {
            r.check_keys(f, "fits", &["ase_intervals_per_km2", "power_intervals_per_km2"]);
            let d = FitIntervals::default();
            FitIntervals {
                ase: r.intervals(f, "fits", "ase_intervals_per_km2").unwrap_or(d.ase),
                power: r.intervals(f, "fits", "power_intervals_per_km2").unwrap_or(d.power),
            }
        }
    };
    let output = match r.object(&root, "", "output") {
        None => OutputConfig::default(),
        Some(o) => {
            r.check_keys(o, "output", &["csv", "fit_report", "optimum_report"]);
            let d = OutputConfig::default();
            OutputConfig {
                csv: r.string(o, "output", "csv").unwrap_or(d.csv),
                fit_report: r.string(o, "output", "fit_report").unwrap_or(d.fit_report),
                optimum_report: r.string(o, "output", "optimum_report").unwrap_or(d.optimum_report),
            }
        }
    };

    if energy_present && !power_present {
        r.push("energy", "energy efficiency needs a power_search block for the transmit power");
    }

    if !r.diags.is_empty() {
        return Err(ConfigError { diagnostics: r.diags });
    }
    match (propagation, los_model, fading, densities, load, threshold_db, tolerances) {
        (Some(propagation), Some(los_model), Some(fading), Some(densities), Some(load), Some(threshold_db), Some(tolerances))
            if (!power_present || power.is_some())
                && (!energy_present || energy.is_some())
                && (!mc_present || monte_carlo.is_some()) =>
        {
            Ok(ExperimentConfig {
                propagation,
                los_model,
                fading,
                densities,
                load,
                threshold_db,
                tolerances,
                power,
                energy,
                monte_carlo,
                fits,
                output,
            })
        }
        _ => Err(ConfigError {
            diagnostics: vec![Diagnostic {
                line: None,
                path: String::new(),
                message: "configuration incomplete".into(),
            }],
        }),
    }
}

fn read_los_model(r: &mut Reader, scenario: &Map<String, Value>) -> Option<LosProbabilityModel> {
    let p = "scenario.los_model";
    let Some(m) = r.object(scenario, "scenario", "los_model") else {
        if !scenario.contains_key("los_model") {
            r.push(p, "missing required block");
        }
        return None;
    };
    r.check_keys(m, p, &["kind", "scale_km", "d0_km", "d1_km", "probability"]);
    let kind = r.string(m, p, "kind");
    let positive = |x: f64| x > 0.0;
    let model = match kind.as_deref() {
        Some("exp_square") => LosProbabilityModel::ExpSquare {
            scale: r.ranged(m, p, "scale_km", None, positive, "must be positive")?,
        },
        Some("exp") => LosProbabilityModel::Exp {
            scale: r.ranged(m, p, "scale_km", None, positive, "must be positive")?,
        },
        Some("three_gpp") => {
            let d0 = r.ranged(m, p, "d0_km", None, positive, "must be positive");
            let d1 = r.ranged(m, p, "d1_km", None, positive, "must be positive");
            LosProbabilityModel::ThreeGpp { d0: d0?, d1: d1? }
        }
        Some("constant") => LosProbabilityModel::Constant {
            p: r.ranged(m, p, "probability", None, |x| (0.0..=1.0).contains(&x), "must lie in [0, 1]")?,
        },
        Some(other) => {
            r.push(
                &format!("{p}.kind"),
                format!("unknown LOS model '{other}' (expected exp_square, exp, three_gpp or constant)"),
            );
            return None;
        }
        None => {
            r.push(&format!("{p}.kind"), "missing required field");
            return None;
        }
    };
    Some(model)
}

fn read_densities(r: &mut Reader, d: &Map<String, Value>) -> Option<Vec<f64>> {
    let p = "densities";
    r.check_keys(d, p, &["values_per_km2", "min_per_km2", "max_per_km2", "points"]);
    let mut values = if d.contains_key("values_per_km2") {
        r.numbers(d, p, "values_per_km2")?
    } else {
        let lo = r.ranged(d, p, "min_per_km2", None, |x| x > 0.0, "must be positive");
        let hi = r.ranged(d, p, "max_per_km2", None, |x| x > 0.0, "must be positive");
        let n = r.ranged(d, p, "points", None, |x| x >= 1.0 && x.fract() == 0.0, "must be a positive integer");
        let (lo, hi, n) = (lo?, hi?, n? as usize);
        if hi < lo {
            r.push("densities.max_per_km2", "must not be below min_per_km2");
            return None;
        }
        log_spaced(lo, hi, n)
    };
    if values.is_empty() {
        r.push(p, "density list is empty");
        return None;
    }
    if values.iter().any(|&x| x <= 0.0) {
        r.push(p, "densities must be positive");
        return None;
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    Some(values)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

fn read_load(r: &mut Reader, root: &Map<String, Value>) -> Option<LoadModel> {
    let p = "load";
    let Some(l) = r.object(root, "", "load") else {
        return if root.contains_key("load") {
            None
        } else {
            Some(LoadModel::FullyLoaded)
        };
    };
    r.check_keys(l, p, &["kind", "user_density_per_km2", "reuse_factor"]);
    let reuse = r.ranged(
        l,
        p,
        "reuse_factor",
        Some(1.0),
        |n| n >= 1.0 && n.fract() == 0.0 && n <= u32::MAX as f64,
        "must be an integer >= 1",
    );
    let users = r.num(l, p, "user_density_per_km2");
    match r.string(l, p, "kind").as_deref() {
        Some("full") => Some(LoadModel::FullyLoaded),
        Some("partial") => {
            if reuse.is_some_and(|n| n > 1.0) {
                r.push(
                    "load.reuse_factor",
                    "partial load cannot be combined with frequency reuse; the two are modelled separately",
                );
                return None;
            }
            match users {
                Some(u) if u > 0.0 => Some(LoadModel::PartiallyLoaded { user_density: u }),
                Some(u) => {
                    r.push("load.user_density_per_km2", format!("{u} is out of range: must be positive"));
                    None
                }
                None => {
                    r.push("load.user_density_per_km2", "missing required field");
                    None
                }
            }
        }
        Some("reuse") => {
            if users.is_some() {
                r.push(
                    "load.user_density_per_km2",
                    "partial load cannot be combined with frequency reuse; the two are modelled separately",
                );
                return None;
            }
            Some(LoadModel::FrequencyReuse { reuse: reuse? as u32 })
        }
        Some(other) => {
            r.push("load.kind", format!("unknown load '{other}' (expected full, partial or reuse)"));
            None
        }
        None => {
            r.push("load.kind", "missing required field");
            None
        }
    }
}

fn read_power(r: &mut Reader, m: &Map<String, Value>) -> Option<PowerSearchConfig> {
    let p = "power_search";
    r.check_keys(
        m,
        p,
        &[
            "steps_db",
            "outage_tolerance",
            "bandwidth_hz",
            "noise_figure_db",
            "noise_psd_dbm_per_hz",
            "max_steps_per_level",
        ],
    );
    let d = PowerSearchConfig::default();
    let steps = if m.contains_key("steps_db") {
        let s = r.numbers(m, p, "steps_db");
        if let Some(s) = &s {
            if s.is_empty() || s.iter().any(|&x| x <= 0.0) || s.windows(2).any(|w| w[1] >= w[0]) {
                r.push("power_search.steps_db", "steps must be positive and strictly decreasing");
                return None;
            }
        }
        s
    } else {
        Some(d.steps_db.clone())
    };
    let tol = r.ranged(
        m,
        p,
        "outage_tolerance",
        Some(d.outage_tolerance),
        |x| x > 0.0 && x < 1.0,
        "must lie in (0, 1)",
    );
    let bw = r.ranged(m, p, "bandwidth_hz", Some(d.bandwidth_hz), |x| x > 0.0, "must be positive");
    let nf = r.ranged(m, p, "noise_figure_db", Some(d.noise_figure_db), |_| true, "");
    let psd = r.ranged(m, p, "noise_psd_dbm_per_hz", Some(d.noise_psd_dbm_hz), |_| true, "");
    let cap = r.ranged(
        m,
        p,
        "max_steps_per_level",
        Some(d.max_steps_per_level as f64),
        |x| x >= 1.0 && x.fract() == 0.0,
        "must be a positive integer",
    );
    Some(PowerSearchConfig {
        steps_db: steps?,
        threshold: d.threshold,
        outage_tolerance: tol?,
        bandwidth_hz: bw?,
        noise_figure_db: nf?,
        noise_psd_dbm_hz: psd?,
        max_steps_per_level: cap? as usize,
    })
}

fn read_energy(r: &mut Reader, m: &Map<String, Value>) -> Option<EnergyConfig> {
    let p = "energy";
    r.check_keys(m, p, &["p0_watts", "k_rf", "rho", "area_km2", "bandwidth_hz"]);
    let d = PowerConsumptionModel::default();
    let p0 = r.ranged(m, p, "p0_watts", Some(d.p0), |x| x > 0.0, "must be positive");
    let k_rf = r.ranged(m, p, "k_rf", Some(d.k_rf), |x| x >= 1.0, "must be at least 1");
    let rho = r.ranged(m, p, "rho", Some(d.rho), |x| x > 0.0 && x < 1.0, "must lie in (0, 1)");
    let area = r.ranged(m, p, "area_km2", Some(1.0), |x| x > 0.0, "must be positive");
    let bw = r.ranged(m, p, "bandwidth_hz", Some(10e6), |x| x > 0.0, "must be positive");
    Some(EnergyConfig {
        model: PowerConsumptionModel {
            p0: p0?,
            k_rf: k_rf?,
            rho: rho?,
        },
        area_km2: area?,
        bandwidth_hz: bw?,
    })
}

fn read_monte_carlo(r: &mut Reader, m: &Map<String, Value>) -> Option<MonteCarloConfig> {
    let p = "monte_carlo";
    r.check_keys(m, p, &["drops", "seed", "disk_radius_km"]);
    let drops = r.ranged(m, p, "drops", Some(1e4), |x| x >= 1.0 && x.fract() == 0.0, "must be a positive integer");
    let seed = match m.get("seed") {
        None => Some(1),
        Some(v) => match v.as_u64() {
            Some(s) => Some(s),
            None => {
                r.push("monte_carlo.seed", "expected an unsigned 64-bit integer");
                None
            }
        },
    };
    let radius = if m.contains_key("disk_radius_km") {
        Some(r.ranged(m, p, "disk_radius_km", None, |x| x > 0.0, "must be positive")?)
    } else {
        None
    };
    Some(MonteCarloConfig {
        drops: drops? as usize,
        seed: seed?,
        disk_radius_km: radius,
    })
}
