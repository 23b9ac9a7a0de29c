//! Brute-force simulator of the downlink seen by a user at the origin.
//!
//! Each drop scatters BSs as a Poisson process over a disk, draws a LOS
//! flag per BS, serves the user from the strongest mean signal and adds up
//! Rayleigh-faded interference from the BSs that transmit on the serving
//! channel. Every drop owns its own ChaCha stream, so results do not depend
//! on how drops are scheduled across threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{ensure, Result};
use crate::load::LoadModel;
use crate::propagation::LosProbabilityModel;
use crate::quadrature::{integrate, Interval, QuadratureSpec};
use crate::sinr::Scenario;

/// Disk radius guaranteeing at least this many BS spacings around the user.
const SPACINGS: f64 = 12.0;
/// Serving-BS mass allowed outside the disk.
const TAIL_EPS: f64 = 1e-6;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    /// km; `None` picks [`default_disk_radius`].
    pub disk_radius: Option<f64>,
    pub drops: usize,
    pub seed: u64,
    /// Linear SINR thresholds for the empirical CCDF.
    pub thresholds: Vec<f64>,
}

impl SimConfig {
    pub fn new(scenario: Scenario, drops: usize, seed: u64) -> Self {
        SimConfig {
            scenario,
            disk_radius: None,
            drops,
            seed,
            thresholds: Vec::new(),
        }
    }

    pub fn with_thresholds(mut self, thresholds: &[f64]) -> Self {
        self.thresholds = thresholds.to_vec();
        self
    }

    pub fn with_disk_radius(mut self, radius: f64) -> Self {
        self.disk_radius = Some(radius);
        self
    }

    /// Radius actually simulated: the requested one, enlarged if the
    /// serving BS could fall outside it.
    pub fn effective_radius(&self) -> Result<f64> {
        let needed = tail_radius(&self.scenario)?;
        Ok(match self.disk_radius {
            Some(r) => r.max(needed),
            None => default_disk_radius(&self.scenario)?,
        })
    }
}

/// Upper bound on the probability that the serving BS lies beyond `d` km.
///
/// A serving LOS BS beyond `d` means no LOS BS inside `d`, and likewise for
/// NLOS; a serving LOS BS beyond `d` also needs some LOS BS out there.
fn outside_bound(scenario: &Scenario, d: f64) -> f64 {
    let spec = QuadratureSpec::new(1e-14, 1e-10);
    let model = scenario.los_model;
    let lambda = scenario.density;
    let los_inside = integrate(|v| model.eval(v) * 2.0 * PI * v, Interval::Finite(0.0, d), &spec)
        .map(|i| i.value)
        .unwrap_or(0.0);
    let nlos_inside = PI * d * d - los_inside;
    let los_beyond = match model {
        LosProbabilityModel::Constant { p } if p > 0.0 => f64::INFINITY,
        LosProbabilityModel::Constant { .. } => 0.0,
        _ => integrate(
            |v| model.eval(v) * 2.0 * PI * v,
            Interval::SemiInfinite { start: d, scale: d },
            &spec,
        )
        .map(|i| i.value)
        .unwrap_or(f64::INFINITY),
    };
    let nlos_beyond = match model {
        LosProbabilityModel::Constant { p } if p >= 1.0 => 0.0,
        _ => f64::INFINITY,
    };
    let los = (-lambda * los_inside).exp().min(lambda * los_beyond);
    let nlos = (-lambda * nlos_inside).exp().min(lambda * nlos_beyond);
    los + nlos
}

/// Smallest 1.25× enlargement of `1/√λ` whose [`outside_bound`] is below 1e-6.
fn tail_radius(scenario: &Scenario) -> Result<f64> {
    scenario.validate()?;
    let mut d = 1.0 / scenario.density.sqrt();
    while outside_bound(scenario, d) >= TAIL_EPS {
        d *= 1.25;
        if d > 1e4 {
            break;
        }
    }
    Ok(d)
}

/// `max(12/√λ, tail radius)`.
pub fn default_disk_radius(scenario: &Scenario) -> Result<f64> {
    Ok((SPACINGS / scenario.density.sqrt()).max(tail_radius(scenario)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcdfPoint {
    pub threshold: f64,
    pub value: f64,
    /// 95% normal-approximation half-width.
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    /// Linear SINR, one per drop, in drop order.
    pub samples: Vec<f64>,
    pub ccdf: Vec<CcdfPoint>,
    /// Mean of log2(1 + γ).
    pub mean_rate: f64,
    /// Fraction of simulated BSs found active (partial load only).
    pub active_fraction: Option<f64>,
    /// Drops redrawn because the disk held no BS.
    pub resampled_empty: u64,
    pub disk_radius: f64,
}

impl EmpiricalStats {
    pub fn ccdf_at(&self, threshold: f64) -> f64 {
        empirical_ccdf(&self.samples, threshold)
    }
}

fn empirical_ccdf(samples: &[f64], y: f64) -> f64 {
    samples.iter().filter(|&&g| g > y).count() as f64 / samples.len() as f64
}

fn half_width(p: f64, n: usize) -> f64 {
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimBs {
    pub x: f64,
    pub y: f64,
    pub distance: f64,
    pub los: bool,
    /// Mean received power `K·d^{−β}` per unit transmit power.
    pub mean_gain: f64,
    /// Fading power of the link to the origin.
    pub fading: f64,
    /// Transmits on the serving channel.
    pub interferes: bool,
}

impl SimBs {
    /// LOS-equivalent distance: `d` for LOS, `d_eq(d)` for NLOS.
    pub fn equivalent_distance(&self, scenario: &Scenario) -> f64 {
        if self.los {
            self.distance
        } else {
            scenario.propagation.equivalent_distance(self.distance)
        }
    }
}

/// One realization of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct DropRealization {
    pub base_stations: Vec<SimBs>,
    pub serving: usize,
    pub sinr: f64,
    pub resampled: u64,
    /// (active, total) BS counts, partial load only.
    pub activity: Option<(usize, usize)>,
}

/// Draws drop `index` of the stream identified by `seed`.
pub fn sample_drop(scenario: &Scenario, radius: f64, seed: u64, index: u64) -> Result<DropRealization> {
    scenario.validate()?;
    ensure(radius > 0.0, "disk_radius", radius, "must be positive")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    Ok(draw(scenario, radius, &mut rng))
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
}

fn uniform_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> (f64, f64) {
    let r = radius * rng.random::<f64>().sqrt();
    let t = 2.0 * PI * rng.random::<f64>();
    (r * t.cos(), r * t.sin())
}

fn exponential(rng: &mut ChaCha8Rng, mu: f64) -> f64 {
    // 1 − U ∈ (0, 1]
    -(1.0 - rng.random::<f64>()).ln() / mu
}

fn draw(scenario: &Scenario, radius: f64, rng: &mut ChaCha8Rng) -> DropRealization {
    let area = PI * radius * radius;
    let mut resampled = 0;
    let n = loop {
        let n = poisson(rng, scenario.density * area);
        if n > 0 {
            break n;
        }
        resampled += 1;
    };
    let mu = scenario.fading.mu();
    let reuse = scenario.reuse_factor();
    let mut bss: Vec<SimBs> = (0..n)
        .map(|_| {
            let (x, y) = uniform_in_disk(rng, radius);
            // the origin itself has probability zero; keep the gain finite anyway
            let distance = x.hypot(y).max(1e-12);
            let los = rng.random::<f64>() < scenario.los_model.eval(distance);
            let mean_gain = scenario.propagation.gain_unchecked(distance, los);
            let fading = exponential(rng, mu);
            let interferes = reuse <= 1 || rng.random_range(0..reuse) == 0;
            SimBs {
                x,
                y,
                distance,
                los,
                mean_gain,
                fading,
                interferes,
            }
        })
        .collect();

    let serving = bss
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.mean_gain.total_cmp(&b.1.mean_gain))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let mut activity = None;
    if let LoadModel::PartiallyLoaded { user_density } = scenario.load {
        let points: Vec<(f64, f64)> = bss.iter().map(|b| (b.x, b.y)).collect();
        let active = mark_active(&points, user_density, radius, scenario.density, rng);
        activity = Some((active.iter().filter(|&&a| a).count(), n));
        for (b, a) in bss.iter_mut().zip(active) {
            b.interferes = a;
        }
    }
    // the serving BS always transmits to the user; it is never thinned
    bss[serving].interferes = true;

    let signal = bss[serving].fading * bss[serving].mean_gain;
    let interference: f64 = bss
        .iter()
        .enumerate()
        .filter(|&(i, b)| i != serving && b.interferes)
        .map(|(_, b)| b.fading * b.mean_gain)
        .sum();
    let denom = scenario.noise + interference;
    let sinr = if denom > 0.0 { signal / denom } else { f64::INFINITY };
    DropRealization {
        base_stations: bss,
        serving,
        sinr,
        resampled,
        activity,
    }
}

/// Drops Poisson users over the disk and flags every BS that is the
/// Euclidean-nearest BS of at least one user.
fn mark_active(points: &[(f64, f64)], user_density: f64, radius: f64, density: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let grid = Grid::new(points, radius, density);
    let mut active = vec![false; points.len()];
    let users = poisson(rng, user_density * PI * radius * radius);
    for _ in 0..users {
        let (x, y) = uniform_in_disk(rng, radius);
        active[grid.nearest(points, x, y)] = true;
    }
    active
}

/// Uniform bucket grid over the square enclosing the disk.
struct Grid {
    origin: f64,
    cell: f64,
    side: usize,
    buckets: Vec<Vec<u32>>,
}

impl Grid {
    fn new(points: &[(f64, f64)], radius: f64, density: f64) -> Self {
        let cell = (1.0 / density.sqrt()).min(radius);
        let side = ((2.0 * radius / cell).ceil() as usize).max(1);
        let mut g = Grid {
            origin: -radius,
            cell,
            side,
            buckets: vec![Vec::new(); side * side],
        };
        for (i, &(x, y)) in points.iter().enumerate() {
            let (cx, cy) = g.cell_of(x, y);
            g.buckets[cy * side + cx].push(i as u32);
        }
        g
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let f = |v: f64| (((v - self.origin) / self.cell).floor().max(0.0) as usize).min(self.side - 1);
        (f(x), f(y))
    }

    fn nearest(&self, points: &[(f64, f64)], x: f64, y: f64) -> usize {
        let (cx, cy) = self.cell_of(x, y);
        let (cx, cy) = (cx as isize, cy as isize);
        let mut best = (f64::INFINITY, 0usize);
        for ring in 0..=self.side as isize {
            // every point outside the rings searched so far is at least this far
            let reach = (ring - 1).max(0) as f64 * self.cell;
            if best.0 <= reach * reach {
                break;
            }
            for gy in (cy - ring)..=(cy + ring) {
                for gx in (cx - ring)..=(cx + ring) {
                    let on_ring = (gy - cy).abs() == ring || (gx - cx).abs() == ring;
                    if !on_ring || gx < 0 || gy < 0 || gx >= self.side as isize || gy >= self.side as isize {
                        continue;
                    }
                    for &i in &self.buckets[gy as usize * self.side + gx as usize] {
                        let (px, py) = points[i as usize];
                        let d2 = (px - x).powi(2) + (py - y).powi(2);
                        if d2 < best.0 {
                            best = (d2, i as usize);
                        }
                    }
                }
            }
        }
        best.1
    }
}

/// Runs `config.drops` independent drops.
pub fn simulate_sinr(config: &SimConfig) -> Result<EmpiricalStats> {
    config.scenario.validate()?;
    ensure(config.drops > 0, "drops", 0.0, "need at least one drop")?;
    for &y in &config.thresholds {
        ensure(y >= 0.0, "threshold", y, "thresholds must be nonnegative")?;
    }
    let radius = config.effective_radius()?;
    let scenario = config.scenario;
    let seed = config.seed;
    // (sinr, resampled empty drops, (active, counted) base stations)
    type DropSummary = (f64, u64, Option<(usize, usize)>);
    let results: Vec<DropSummary> = (0..config.drops as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let d = draw(&scenario, radius, &mut rng);
            (d.sinr, d.resampled, d.activity)
        })
        .collect();

    let samples: Vec<f64> = results.iter().map(|r| r.0).collect();
    let resampled_empty = results.iter().map(|r| r.1).sum();
    let active_fraction = match scenario.load {
        LoadModel::PartiallyLoaded { .. } => {
            let (a, t) = results
                .iter()
                .filter_map(|r| r.2)
                .fold((0usize, 0usize), |(a, t), (x, y)| (a + x, t + y));
            Some(a as f64 / t.max(1) as f64)
        }
        _ => None,
    };
    let n = samples.len();
    let ccdf = config
        .thresholds
        .iter()
        .map(|&y| {
            let value = empirical_ccdf(&samples, y);
            CcdfPoint {
                threshold: y,
                value,
                half_width: half_width(value, n),
            }
        })
        .collect();
    let mean_rate = samples.iter().map(|g| g.ln_1p() / std::f64::consts::LN_2).sum::<f64>() / n as f64;
    Ok(EmpiricalStats {
        samples,
        ccdf,
        mean_rate,
        active_fraction,
        resampled_empty,
        disk_radius: radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveFraction {
    pub value: f64,
    pub half_width: f64,
    /// BSs counted (those in the inner half of the disk).
    pub base_stations: u64,
}

/// Fraction of BSs with at least one nearest user. Users cover the whole
/// disk; only BSs within half the radius are counted so that truncated
/// cells at the rim do not bias the estimate. `None` picks a radius holding
/// about twelve spacings of the sparser process.
pub fn simulate_active_fraction(
    lambda: f64,
    user_density: f64,
    disk_radius: Option<f64>,
    drops: usize,
    seed: u64,
) -> Result<ActiveFraction> {
    ensure(lambda > 0.0, "lambda", lambda, "must be positive")?;
    ensure(user_density >= 0.0, "user_density", user_density, "must be nonnegative")?;
    ensure(drops > 0, "drops", 0.0, "need at least one drop")?;
    let sparse = if user_density > 0.0 { lambda.min(user_density) } else { lambda };
    let radius = disk_radius.unwrap_or(SPACINGS / sparse.sqrt());
    ensure(radius > 0.0, "disk_radius", radius, "must be positive")?;
    let inner2 = (0.5 * radius).powi(2);
    let counts: Vec<(u64, u64)> = (0..drops as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let n = poisson(&mut rng, lambda * PI * radius * radius);
            if n == 0 {
                return (0, 0);
            }
            let points: Vec<(f64, f64)> = (0..n).map(|_| uniform_in_disk(&mut rng, radius)).collect();
            let active = mark_active(&points, user_density, radius, lambda, &mut rng);
            points
                .iter()
                .zip(active)
                .filter(|((x, y), _)| x * x + y * y <= inner2)
                .fold((0, 0), |(a, t), (_, on)| (a + on as u64, t + 1))
        })
        .collect();
    let (active, total) = counts.iter().fold((0, 0), |(a, t), &(x, y)| (a + x, t + y));
    let value = if total == 0 { 0.0 } else { active as f64 / total as f64 };
    Ok(ActiveFraction {
        value,
        half_width: half_width(value, total.max(1) as usize),
        base_stations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::PathLossParams;

    fn pico(lambda: f64) -> Scenario {
        Scenario::new(
            lambda,
            PathLossParams::urban_pico(),
            LosProbabilityModel::ExpSquare { scale: 0.0825 },
        )
    }

    #[test]
    fn grid_nearest_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let radius = 1.0;
        let pts: Vec<_> = (0..500).map(|_| uniform_in_disk(&mut rng, radius)).collect();
        let grid = Grid::new(&pts, radius, 500.0 / PI);
        for _ in 0..2000 {
            let (x, y) = uniform_in_disk(&mut rng, radius);
            let scan = pts
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = (a.1 .0 - x).powi(2) + (a.1 .1 - y).powi(2);
                    let db = (b.1 .0 - x).powi(2) + (b.1 .1 - y).powi(2);
                    da.total_cmp(&db)
                })
                .unwrap()
                .0;
            assert_eq!(grid.nearest(&pts, x, y), scan);
        }
    }

    #[test]
    fn strongest_signal_is_nearest_equivalent_distance() {
        let s = pico(100.0);
        let radius = default_disk_radius(&s).unwrap();
        for i in 0..1000 {
            let d = sample_drop(&s, radius, 3, i).unwrap();
            let by_eq = d
                .base_stations
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.equivalent_distance(&s).total_cmp(&b.1.equivalent_distance(&s)))
                .unwrap()
                .0;
            assert_eq!(d.serving, by_eq);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let c = SimConfig::new(pico(300.0), 2000, 11).with_thresholds(&[0.1, 1.0]);
        let a = simulate_sinr(&c).unwrap();
        let b = simulate_sinr(&c).unwrap();
        assert_eq!(a, b);
        let other = simulate_sinr(&SimConfig { seed: 12, ..c }).unwrap();
        assert_ne!(a.samples, other.samples);
    }

    #[test]
    fn no_interferers_gives_infinite_sinr() {
        let s = pico(50.0).with_load(LoadModel::PartiallyLoaded { user_density: 1e-9 });
        let c = SimConfig::new(s, 500, 1).with_thresholds(&[1.0, 1e6]);
        let st = simulate_sinr(&c).unwrap();
        assert!(st.samples.iter().all(|g| g.is_infinite()));
        assert!(st.ccdf.iter().all(|p| p.value == 1.0));
    }

    #[test]
    fn ccdf_non_increasing() {
        let ys: Vec<f64> = (-4..=6).map(|k| 10f64.powf(k as f64 / 2.0)).collect();
        let st = simulate_sinr(&SimConfig::new(pico(100.0), 5000, 5).with_thresholds(&ys)).unwrap();
        for w in st.ccdf.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
    }

    #[test]
    fn single_slope_radius_is_the_void_radius() {
        // exp(−πλD²) < 1e-6 ⇔ D > √(ln(1e6)/(πλ))
        let s = Scenario::new(100.0, PathLossParams::urban_single_slope(), LosProbabilityModel::Constant { p: 1.0 });
        let d = tail_radius(&s).unwrap();
        let exact = (1e6f64.ln() / (PI * 100.0)).sqrt();
        assert!(d >= exact && d < 1.25 * exact, "{d} vs {exact}");
    }

    #[test]
    fn requested_radius_is_enlarged_when_too_small() {
        let c = SimConfig::new(pico(10.0), 10, 1).with_disk_radius(1e-3);
        assert!(c.effective_radius().unwrap() > 0.1);
    }

    #[test]
    fn activity_limits() {
        assert_eq!(simulate_active_fraction(100.0, 0.0, Some(1.0), 20, 1).unwrap().value, 0.0);
        let sat = simulate_active_fraction(10.0, 1000.0, None, 50, 2).unwrap();
        assert!(sat.value > 0.99, "{sat:?}");
    }
}
