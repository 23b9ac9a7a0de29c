//! Minimum per-BS transmit power that keeps a deployment interference
//! limited.
//!
//! The search raises the power in coarse steps until the outage is within
//! `outage_tolerance` of its noise-free value, backs off one step and
//! repeats with the next, finer step. Noise enters the SINR as
//! `σ² = 10^{(P_N0 − P_TX)/10}` with both powers in dBm over the used
//! bandwidth.

use crate::error::{ensure, Error, Result};
use crate::sinr::{CoverageModel, NoiseSweep, Scenario, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSearchConfig {
    /// Power steps in dB, coarse to fine.
    pub steps_db: Vec<f64>,
    /// Linear SINR threshold.
    pub threshold: f64,
    /// Allowed |θ* − θ|.
    pub outage_tolerance: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub noise_psd_dbm_hz: f64,
    /// Step budget per granularity level.
    pub max_steps_per_level: usize,
}

impl Default for PowerSearchConfig {
    fn default() -> Self {
        PowerSearchConfig {
            steps_db: vec![5.0, 1.0, 0.2, 0.05],
            threshold: 10f64.powf(-0.8),
            outage_tolerance: 1e-3,
            bandwidth_hz: 10e6,
            noise_figure_db: 9.0,
            noise_psd_dbm_hz: -174.0,
            max_steps_per_level: 10_000,
        }
    }
}

impl PowerSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_db.is_empty() {
            return Err(Error::Invalid("power step vector is empty".into()));
        }
        for w in self.steps_db.windows(2) {
            ensure(w[1] < w[0], "steps_db", w[1], "steps must be strictly decreasing")?;
        }
        for &s in &self.steps_db {
            ensure(s > 0.0, "steps_db", s, "steps must be positive")?;
        }
        ensure(
            self.outage_tolerance > 0.0 && self.outage_tolerance < 1.0,
            "outage_tolerance",
            self.outage_tolerance,
            "must lie in (0, 1)",
        )?;
        ensure(self.threshold > 0.0, "threshold", self.threshold, "must be positive")?;
        ensure(self.bandwidth_hz > 0.0, "bandwidth_hz", self.bandwidth_hz, "must be positive")?;
        ensure(
            self.max_steps_per_level > 0,
            "max_steps_per_level",
            self.max_steps_per_level as f64,
            "must be positive",
        )
    }

    /// Precision of the returned power, dB.
    pub fn precision_db(&self) -> f64 {
        self.steps_db.last().copied().unwrap_or(f64::NAN)
    }
}

/// AWGN power over `BW/reuse`, in dBm.
pub fn noise_power_dbm(config: &PowerSearchConfig, reuse: u32) -> f64 {
    config.noise_psd_dbm_hz
        + 10.0 * (config.bandwidth_hz / reuse.max(1) as f64).log10()
        + config.noise_figure_db
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub p_tx_dbm: f64,
    /// Noise-free outage.
    pub theta_star: f64,
    /// Outage at `p_tx_dbm`.
    pub theta_achieved: f64,
    /// Outage evaluations made by the search (the noise-free one excluded).
    pub iterations: usize,
    /// Every (power dBm, outage) pair visited, in order.
    pub trajectory: Vec<(f64, f64)>,
}

impl PowerResult {
    pub fn p_tx_watts(&self) -> f64 {
        dbm_to_watts(self.p_tx_dbm)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Runs the stepped search against an outage oracle `theta(noise)`.
fn search<F: FnMut(f64) -> f64>(config: &PowerSearchConfig, noise_dbm: f64, mut theta: F) -> Result<PowerResult> {
    config.validate()?;
    let mut trajectory = Vec::new();
    let noise_at = |p_dbm: f64| 10f64.powf((noise_dbm - p_dbm) / 10.0);
    let theta_star = theta(0.0);

    let mut p_curr = noise_dbm;
    let mut p_fin = p_curr;
    let mut theta_fin = f64::NAN;
    let mut iterations = 0;
    for &step in &config.steps_db {
        let mut t = theta(noise_at(p_curr));
        iterations += 1;
        trajectory.push((p_curr, t));
        if theta_fin.is_nan() {
            theta_fin = t;
        }
        let mut steps = 0;
        while (theta_star - t).abs() > config.outage_tolerance {
            if steps >= config.max_steps_per_level {
                return Err(Error::SearchFailure {
                    power_dbm: p_curr,
                    outage: t,
                    steps,
                });
            }
            p_curr += step;
            t = theta(noise_at(p_curr));
            iterations += 1;
            steps += 1;
            trajectory.push((p_curr, t));
            p_fin = p_curr;
            theta_fin = t;
        }
        p_curr -= step;
    }
    Ok(PowerResult {
        p_tx_dbm: p_fin,
        theta_star,
        theta_achieved: theta_fin,
        iterations,
        trajectory,
    })
}

/// Minimum transmit power (dBm) meeting `|θ* − θ| ≤ Δθ`. The scenario's
/// own noise field is ignored.
pub fn min_tx_power(scenario: &Scenario, config: &PowerSearchConfig) -> Result<PowerResult> {
    min_tx_power_with(scenario, config, Tolerances::default())
}

pub fn min_tx_power_with(scenario: &Scenario, config: &PowerSearchConfig, tol: Tolerances) -> Result<PowerResult> {
    config.validate()?;
    let model = CoverageModel::with_tolerances(scenario.with_noise(0.0), tol)?;
    let sweep = model.noise_sweep(config.threshold)?;
    min_tx_power_from_sweep(&sweep, config, scenario.reuse_factor())
}

/// Search on an already tabulated noise sweep.
pub fn min_tx_power_from_sweep(sweep: &NoiseSweep, config: &PowerSearchConfig, reuse: u32) -> Result<PowerResult> {
    search(config, noise_power_dbm(config, reuse), |noise| sweep.outage(noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::{LosProbabilityModel, PathLossParams};

    #[test]
    fn thermal_noise_over_bandwidth() {
        let c = PowerSearchConfig::default();
        assert!((noise_power_dbm(&c, 1) + 95.0).abs() < 1e-12);
        assert!((noise_power_dbm(&c, 2) + 98.0103).abs() < 1e-4);
        let unit = PowerSearchConfig {
            bandwidth_hz: 1.0,
            noise_figure_db: 0.0,
            ..PowerSearchConfig::default()
        };
        assert_eq!(noise_power_dbm(&unit, 1), -174.0);
    }

    #[test]
    fn config_validation() {
        let mut c = PowerSearchConfig {
            steps_db: vec![1.0, 1.0],
            ..PowerSearchConfig::default()
        };
        assert!(c.validate().is_err());
        c.steps_db = vec![];
        assert!(c.validate().is_err());
        c.steps_db = vec![1.0];
        c.outage_tolerance = 1.0;
        assert!(c.validate().is_err());
    }

    /// θ(σ²) = θ* + (1 − θ*)(1 − e^{−σ²})
    fn toy(theta_star: f64) -> impl FnMut(f64) -> f64 {
        move |noise: f64| theta_star + (1.0 - theta_star) * (-(-noise).exp_m1())
    }

    #[test]
    fn stepped_search_on_a_known_curve() {
        let c = PowerSearchConfig {
            steps_db: vec![5.0, 1.0, 0.2, 0.05],
            outage_tolerance: 1e-3,
            ..PowerSearchConfig::default()
        };
        let r = search(&c, -95.0, toy(0.1)).unwrap();
        // deviation is (0.9)(1 − e^{−σ²}) ≤ 1e-3 ⇔ σ² ≤ −ln(1 − 1/900)
        let sigma = -(1.0f64 - 1e-3 / 0.9).ln();
        let exact = -95.0 - 10.0 * sigma.log10();
        assert!(r.p_tx_dbm >= exact - 1e-9);
        assert!(r.p_tx_dbm - exact < 0.05 + 1e-9, "{} vs {exact}", r.p_tx_dbm);
        assert!((r.theta_star - r.theta_achieved).abs() <= 1e-3);
    }

    #[test]
    fn loose_tolerance_returns_noise_floor() {
        let c = PowerSearchConfig {
            outage_tolerance: 0.999,
            ..PowerSearchConfig::default()
        };
        let r = search(&c, -95.0, toy(0.0)).unwrap();
        assert_eq!(r.p_tx_dbm, -95.0);
    }

    #[test]
    fn power_non_increasing_in_tolerance() {
        let tight = PowerSearchConfig {
            outage_tolerance: 1e-4,
            ..PowerSearchConfig::default()
        };
        let loose = PowerSearchConfig {
            outage_tolerance: 1e-2,
            ..PowerSearchConfig::default()
        };
        let a = search(&tight, -95.0, toy(0.2)).unwrap();
        let b = search(&loose, -95.0, toy(0.2)).unwrap();
        assert!(b.p_tx_dbm <= a.p_tx_dbm);
    }

    #[test]
    fn iteration_cap_raises_search_failure() {
        let c = PowerSearchConfig {
            steps_db: vec![1e-3],
            max_steps_per_level: 10,
            ..PowerSearchConfig::default()
        };
        match search(&c, -95.0, toy(0.0)) {
            Err(Error::SearchFailure { steps, .. }) => assert_eq!(steps, 10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn outage_trajectory_is_monotone_for_pico() {
        let s = Scenario::new(
            100.0,
            PathLossParams::urban_pico(),
            LosProbabilityModel::ExpSquare { scale: 0.0825 },
        );
        let r = min_tx_power(&s, &PowerSearchConfig::default()).unwrap();
        assert!((r.theta_star - r.theta_achieved).abs() <= 1e-3);
        let mut visited = r.trajectory.clone();
        visited.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in visited.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
        // a sensible small-cell power
        assert!(r.p_tx_dbm > -10.0 && r.p_tx_dbm < 50.0, "{}", r.p_tx_dbm);
    }
}
