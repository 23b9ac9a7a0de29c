//! SINR distribution of the typical user.
//!
//! Conditioned on the LOS-equivalent serving distance `R`, Rayleigh fading
//! gives `P[γ > y | R] = e^{−sσ²}·L_{I_R}(s)` with `s = μ·y·R^{β_L}/k_L`.
//! The Laplace transform of the interference splits into a LOS field outside
//! `R` and a NLOS field outside `d_eq⁻¹(R)`, each thinned to `λ_I`. The
//! unconditioned CCDF and the mean rate then integrate against the distance
//! law.
//!
//! Outer integrals run in `x = ln R` over the support of the distance law;
//! inner Laplace integrals use the semi-infinite map `v = ρ/(1−t)`.

use std::f64::consts::PI;

use crate::distance_law::DistanceLaw;
use crate::error::{ensure, Result};
use crate::load::LoadModel;
use crate::propagation::{FadingModel, LosProbabilityModel, PathLossParams};
use crate::quadrature::{integrate, integrate_with_breakpoints, FixedRule, Interval, QuadratureSpec};

/// Default cap on the rate integral, bit/s/Hz.
pub const DEFAULT_RATE_CAP: f64 = 40.0;

/// Mass of the distance law left outside the outer integration range.
const SUPPORT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub propagation: PathLossParams,
    pub los_model: LosProbabilityModel,
    pub fading: FadingModel,
    /// BS per km².
    pub density: f64,
    pub load: LoadModel,
    /// Noise power over transmit power (linear); 0 means interference limited.
    pub noise: f64,
}

impl Scenario {
    pub fn new(density: f64, propagation: PathLossParams, los_model: LosProbabilityModel) -> Self {
        Scenario {
            propagation,
            los_model,
            fading: FadingModel::default(),
            density,
            load: LoadModel::FullyLoaded,
            noise: 0.0,
        }
    }

    pub fn with_load(mut self, load: LoadModel) -> Self {
        self.load = load;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn with_fading(mut self, fading: FadingModel) -> Self {
        self.fading = fading;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.density > 0.0 && self.density.is_finite(),
            "lambda",
            self.density,
            "BS density must be positive",
        )?;
        ensure(
            self.noise >= 0.0 && self.noise.is_finite(),
            "noise",
            self.noise,
            "normalized noise must be non-negative",
        )?;
        self.los_model.validate()?;
        self.load.validate()
    }

    pub fn interferer_density(&self) -> f64 {
        self.load.interferer_density(self.density)
    }

    pub fn active_density(&self) -> f64 {
        self.load.active_density(self.density)
    }

    pub fn reuse_factor(&self) -> u32 {
        self.load.reuse_factor()
    }

    pub fn summary(&self) -> String {
        format!(
            "lambda={} los={} load={} noise={:e}",
            self.density,
            self.los_model.name(),
            self.load.name(),
            self.noise
        )
    }
}

/// Tolerances of the nested integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute error allowed on the Laplace exponent.
    pub laplace: f64,
    /// Absolute error allowed on probabilities and on the rate integrand.
    pub outer: f64,
    /// Absolute error on the rate (bit/s/Hz).
    pub rate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            laplace: 1e-8,
            outer: 1e-7,
            rate: 1e-5,
        }
    }
}

impl Tolerances {
    /// Looser setting used by long sweeps.
    pub fn sweep() -> Self {
        Tolerances {
            laplace: 1e-7,
            outer: 1e-6,
            rate: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    pub scenario: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEfficiency {
    /// E[log2(1 + γ)], bit/s/Hz.
    pub value: f64,
    pub cap: f64,
    /// P[log2(1+γ) > cap] exceeded the rate tolerance.
    pub cap_hit: bool,
}

/// Precomputed pieces of one scenario: the distance law, the interferer
/// density and the integration support.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    scenario: Scenario,
    law: DistanceLaw,
    interferer_density: f64,
    support: (f64, f64),
    tol: Tolerances,
}

impl CoverageModel {
    pub fn new(scenario: Scenario) -> Result<Self> {
        Self::with_tolerances(scenario, Tolerances::default())
    }

    pub fn with_tolerances(scenario: Scenario, tol: Tolerances) -> Result<Self> {
        scenario.validate()?;
        let law = DistanceLaw::new(scenario.density, scenario.propagation, scenario.los_model)?;
        let support = law.support(SUPPORT_EPS);
        Ok(CoverageModel {
            interferer_density: scenario.interferer_density(),
            scenario,
            law,
            support,
            tol,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn distance_law(&self) -> &DistanceLaw {
        &self.law
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// `s` for threshold `y` at LOS-equivalent distance `r`.
    #[inline]
    pub fn laplace_argument(&self, y: f64, r: f64) -> f64 {
        let p = &self.scenario.propagation;
        self.scenario.fading.mu() * y * r.powf(p.beta_los()) / p.k_los()
    }

    /// `L_{I_R}(s)`.
    pub fn laplace_interference(&self, s: f64, r: f64) -> Result<f64> {
        ensure(s >= 0.0, "s", s, "Laplace argument must be non-negative")?;
        ensure(r >= 0.0, "R", r, "distance must be non-negative")?;
        Ok((-self.laplace_exponent(s, r)?).exp())
    }

    /// `2πλ_I·(I_LOS + I_NLOS)`, so that `L = exp(−exponent)`.
    pub fn laplace_exponent(&self, s: f64, r: f64) -> Result<f64> {
        let lambda_i = self.interferer_density;
        if s == 0.0 || lambda_i == 0.0 {
            return Ok(0.0);
        }
        let p = &self.scenario.propagation;
        let mu = self.scenario.fading.mu();
        let model = self.scenario.los_model;
        let scale = 2.0 * PI * lambda_i;
        let spec = QuadratureSpec::new(self.tol.laplace / scale, 1e-9);

        let (has_los, has_nlos) = match model {
            LosProbabilityModel::Constant { p } => (p > 0.0, p < 1.0),
            _ => (true, true),
        };

        if let LosProbabilityModel::Constant { p: p_los } = model {
            let mut total = 0.0;
            if has_los && r > 0.0 {
                total += p_los * power_law_tail(mu / (s * p.k_los()), p.beta_los(), r, spec.abs_tol / p_los)?;
            }
            if has_nlos {
                let r_eq = p.equivalent_distance_inverse(r);
                let w = 1.0 - p_los;
                total += w * power_law_tail(mu / (s * p.k_nlos()), p.beta_nlos(), r_eq, spec.abs_tol / w)?;
            }
            return Ok(scale * total);
        }

        let mut total = 0.0;
        if has_los && r > 0.0 {
            // s·k·v^{−β}/(s·k·v^{−β} + μ) = 1/(1 + μ·v^β/(s·k))
            let c = mu / (s * p.k_los());
            let beta = p.beta_los();
            let f = |v: f64| model.eval(v) * v / (1.0 + c * v.powf(beta));
            total += integrate(f, Interval::SemiInfinite { start: r, scale: r }, &spec)?.value;
        }
        if has_nlos {
            let r_eq = p.equivalent_distance_inverse(r);
            let c = mu / (s * p.k_nlos());
            let beta = p.beta_nlos();
            let f = |v: f64| (1.0 - model.eval(v)) * v / (1.0 + c * v.powf(beta));
            let interval = if r_eq > 0.0 {
                Interval::SemiInfinite {
                    start: r_eq,
                    scale: r_eq,
                }
            } else {
                Interval::SemiInfinite {
                    start: 0.0,
                    scale: (s * p.k_nlos() / mu).powf(1.0 / beta),
                }
            };
            total += integrate(f, interval, &spec)?.value;
        }
        Ok(scale * total)
    }

    /// `P[γ > y | r = R]`.
    pub fn conditional_ccdf(&self, y: f64, r: f64) -> Result<f64> {
        ensure(y >= 0.0, "y", y, "SINR threshold must be non-negative")?;
        ensure(r > 0.0, "R", r, "serving distance must be positive")?;
        let s = self.laplace_argument(y, r);
        Ok((-s * self.scenario.noise - self.laplace_exponent(s, r)?).exp())
    }

    fn log_breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support;
        let (a, b) = (lo.ln(), hi.ln());
        let n = (((b - a) / 1.5).ceil() as usize).max(4);
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    /// Integrates `g(R)·f_r(R)` over the support of the distance law.
    fn average_over_distance<G>(&self, mut g: G, abs_tol: f64) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        let mut failure = None;
        let integrand = |x: f64| {
            if failure.is_some() {
                return 0.0;
            }
            let r = x.exp();
            let w = self.law.pdf(r) * r;
            if w == 0.0 {
                return 0.0;
            }
            match g(r) {
                Ok(v) => v * w,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        };
        let spec = QuadratureSpec::new(abs_tol, 1e-10);
        let out = integrate_with_breakpoints(integrand, &self.log_breakpoints(), &spec);
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(out?.value)
    }

    /// `P[γ > y]`.
    pub fn sinr_ccdf(&self, y: f64) -> Result<f64> {
        ensure(y >= 0.0, "y", y, "SINR threshold must be non-negative")?;
        if y == 0.0 {
            return Ok(1.0);
        }
        let v = self.average_over_distance(|r| self.conditional_ccdf(y, r), self.tol.outer)?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// `θ = P[γ ≤ γ_th]`.
    pub fn outage(&self, threshold: f64) -> Result<f64> {
        Ok(1.0 - self.sinr_ccdf(threshold)?)
    }

    pub fn ccdf_curve(&self, thresholds: &[f64]) -> Result<CcdfCurve> {
        let values = thresholds
            .iter()
            .map(|&y| self.sinr_ccdf(y))
            .collect::<Result<Vec<_>>>()?;
        Ok(CcdfCurve {
            thresholds: thresholds.to_vec(),
            values,
            scenario: self.scenario.summary(),
        })
    }

    /// `E[log2(1+γ)]`, integrating the rate tail up to `cap` bit/s/Hz.
    pub fn avg_spectral_efficiency_capped(&self, cap: f64) -> Result<SpectralEfficiency> {
        ensure(cap > 0.0, "cap", cap, "rate cap must be positive")?;
        let inner_spec = QuadratureSpec::new(self.tol.rate * 0.1, 1e-8);
        let value = self.average_over_distance(
            |r| {
                let tail = |u: f64| self.conditional_ccdf(u.exp2() - 1.0, r);
                let mut failure = None;
                let inner = integrate(
                    |u| match tail(u) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    },
                    Interval::Finite(0.0, cap),
                    &inner_spec,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                Ok(inner?.value)
            },
            self.tol.rate,
        )?;
        // rate mass beyond the cap, P[log2(1+γ) > cap], against the rate tolerance
        let cap_hit = self.sinr_ccdf(cap.exp2() - 1.0)? > self.tol.rate;
        Ok(SpectralEfficiency {
            value,
            cap,
            cap_hit,
        })
    }

    pub fn avg_spectral_efficiency(&self) -> Result<SpectralEfficiency> {
        self.avg_spectral_efficiency_capped(DEFAULT_RATE_CAP)
    }

    /// `λ_A·E[C]/N`, bit/s/Hz/km².
    pub fn ase(&self) -> Result<f64> {
        let ec = self.avg_spectral_efficiency()?;
        Ok(ase_from(self.scenario.active_density(), ec.value, self.scenario.reuse_factor()))
    }

    /// Node set for re-evaluating `P[γ > y]` at many noise levels.
    pub fn noise_sweep(&self, y: f64) -> Result<NoiseSweep> {
        ensure(y > 0.0, "y", y, "SINR threshold must be positive")?;
        let (lo, hi) = self.support;
        let (a, b) = (lo.ln(), hi.ln());
        let panels = ((b - a) / NOISE_SWEEP_PANEL).ceil() as usize;
        let rule = FixedRule::uniform(a, b, panels);
        let mut weight = Vec::with_capacity(rule.len());
        let mut noise_coeff = Vec::with_capacity(rule.len());
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let r = x.exp();
            let pdf = self.law.pdf(r) * r;
            if pdf == 0.0 {
                continue;
            }
            let s = self.laplace_argument(y, r);
            let l = (-self.laplace_exponent(s, r)?).exp();
            if l == 0.0 {
                continue;
            }
            weight.push(w * pdf * l);
            noise_coeff.push(s);
        }
        Ok(NoiseSweep {
            threshold: y,
            weight,
            noise_coeff,
        })
    }
}

/// Panel width in `ln R` for [`CoverageModel::noise_sweep`].
const NOISE_SWEEP_PANEL: f64 = 0.2;

/// `P[γ > y]` as `Σ_i w_i·exp(−s_i·σ²)`, reusable across noise levels.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSweep {
    pub threshold: f64,
    weight: Vec<f64>,
    noise_coeff: Vec<f64>,
}

impl NoiseSweep {
    pub fn ccdf(&self, noise: f64) -> f64 {
        self.weight
            .iter()
            .zip(&self.noise_coeff)
            .map(|(&w, &s)| w * (-s * noise).exp())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn outage(&self, noise: f64) -> f64 {
        1.0 - self.ccdf(noise)
    }
}

/// `∫_r^∞ v/(1 + c·v^β) dv` for β > 2. With `w = c·v^β` this is
/// `c^{−2/β}/β · ∫_{w0}^∞ w^{δ−1}/(1+w) dw`, `δ = 2/β`, integrated over
/// `ln w` where the integrand decays exponentially even for β close to 2.
fn power_law_tail(c: f64, beta: f64, r: f64, abs_tol: f64) -> Result<f64> {
    ensure(beta > 2.0, "beta", beta, "interference diverges unless the exponent exceeds 2")?;
    let delta = 2.0 / beta;
    let pre = c.powf(-delta) / beta;
    let spec = QuadratureSpec::new(abs_tol / pre, 1e-10);
    let u0 = (c * r.powf(beta)).ln();
    let j = if u0 >= 0.0 {
        let f = |u: f64| ((delta - 1.0) * u).exp() / (1.0 + (-u).exp());
        integrate(f, Interval::SemiInfinite { start: u0, scale: 1.0 / (1.0 - delta) }, &spec)?.value
    } else {
        // complement of ∫_0^∞ w^{δ−1}/(1+w) dw = π/sin(πδ)
        let head = if u0 == f64::NEG_INFINITY {
            0.0
        } else {
            let f = |t: f64| (delta * -t).exp() / (1.0 + (-t).exp());
            integrate(f, Interval::SemiInfinite { start: -u0, scale: 1.0 / delta }, &spec)?.value
        };
        PI / (PI * delta).sin() - head
    };
    Ok(pre * j)
}

pub fn ase_from(active_density: f64, spectral_efficiency: f64, reuse: u32) -> f64 {
    active_density * spectral_efficiency / reuse as f64
}

pub fn laplace_interference(scenario: &Scenario, s: f64, r: f64) -> Result<f64> {
    CoverageModel::new(*scenario)?.laplace_interference(s, r)
}

pub fn conditional_ccdf(scenario: &Scenario, y: f64, r: f64) -> Result<f64> {
    CoverageModel::new(*scenario)?.conditional_ccdf(y, r)
}

pub fn sinr_ccdf(scenario: &Scenario, y: f64) -> Result<f64> {
    CoverageModel::new(*scenario)?.sinr_ccdf(y)
}

pub fn outage(scenario: &Scenario, threshold: f64) -> Result<f64> {
    CoverageModel::new(*scenario)?.outage(threshold)
}

pub fn avg_spectral_efficiency(scenario: &Scenario) -> Result<SpectralEfficiency> {
    CoverageModel::new(*scenario)?.avg_spectral_efficiency()
}

pub fn ase(scenario: &Scenario) -> Result<f64> {
    CoverageModel::new(*scenario)?.ase()
}

/// dB → linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Closed-form coverage of the single-slope, interference-limited, fully
/// loaded network with exponent 4: `1/(1 + √y·(π/2 − atan(1/√y)))`.
pub fn single_slope_beta4_ccdf(y: f64) -> f64 {
    let q = y.sqrt();
    1.0 / (1.0 + q * (PI / 2.0 - (1.0 / q).atan()))
}
