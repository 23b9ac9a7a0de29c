//! Network power consumption, energy efficiency, power-law fits and the
//! closed-form energy-efficiency optima.
//!
//! The closed forms take densities in whatever unit the fitted constants
//! were produced in. The transmit-power fits quoted for small cells only make
//! sense with λ per m² and watts, so [`per_m2`] is provided for the
//! conversion.

use crate::error::{ensure, Error, Result};

/// BS/km² → BS/m².
pub fn per_m2(lambda_km2: f64) -> f64 {
    lambda_km2 * 1e-6
}

/// BS/m² → BS/km².
pub fn per_km2(lambda_m2: f64) -> f64 {
    lambda_m2 * 1e6
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConsumptionModel {
    /// Circuitry power of an active BS, W.
    pub p0: f64,
    /// Inverse power-amplifier efficiency.
    pub k_rf: f64,
    /// Stand-by circuitry power relative to `p0`.
    pub rho: f64,
}

impl Default for PowerConsumptionModel {
    fn default() -> Self {
        PowerConsumptionModel {
            p0: 10.0,
            k_rf: 10.0,
            rho: 0.1,
        }
    }
}

impl PowerConsumptionModel {
    pub fn new(p0: f64, k_rf: f64, rho: f64) -> Result<Self> {
        let m = PowerConsumptionModel { p0, k_rf, rho };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.p0 > 0.0, "p0", self.p0, "circuitry power must be positive")?;
        ensure(self.k_rf >= 1.0, "k_rf", self.k_rf, "amplifier loss factor must be at least 1")?;
        ensure(self.rho > 0.0 && self.rho < 1.0, "rho", self.rho, "stand-by factor must lie in (0, 1)")
    }
}

/// `A·λ_A·P0 + A·λ_A·P_TX·K_RF + A·(λ − λ_A)·ρ·P0`, in W for `A` in km² and
/// densities in BS/km².
pub fn total_power(
    model: &PowerConsumptionModel,
    area: f64,
    lambda: f64,
    active_density: f64,
    p_tx: f64,
) -> Result<f64> {
    ensure(area >= 0.0, "area", area, "must be nonnegative")?;
    ensure(active_density >= 0.0, "active_density", active_density, "must be nonnegative")?;
    ensure(p_tx >= 0.0, "p_tx", p_tx, "must be nonnegative")?;
    ensure(
        active_density <= lambda * (1.0 + 1e-12),
        "active_density",
        active_density,
        "cannot exceed the BS density",
    )?;
    let dormant = (lambda - active_density).max(0.0);
    Ok(area * active_density * model.p0
        + area * active_density * p_tx * model.k_rf
        + area * dormant * model.rho * model.p0)
}

/// bit/J from bit/s and W.
pub fn energy_efficiency(throughput: f64, total_power: f64) -> Result<f64> {
    ensure(total_power > 0.0, "total_power", total_power, "must be positive")?;
    ensure(throughput >= 0.0, "throughput", throughput, "must be nonnegative")?;
    Ok(throughput / total_power)
}

/// Network throughput `A·BW·η_A`, bit/s.
pub fn throughput(area: f64, bandwidth_hz: f64, ase: f64) -> f64 {
    area * bandwidth_hz * ase
}

/// `f(z) = a·z^b` fitted on `domain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    pub domain: (f64, f64),
    /// Largest |ln f − ln(a z^b)| over the fitted points.
    pub residual: f64,
    pub points: usize,
}

impl PowerLawFit {
    pub fn eval(&self, z: f64) -> f64 {
        self.a * z.powf(self.b)
    }
}

/// Least-squares line through `(ln z, ln f)` for the points with `z` in
/// `domain`. Both ends are included (with a relative slack of 1e-9) so that
/// sweep points sitting on a boundary count.
pub fn fit_power_law(points: &[(f64, f64)], domain: (f64, f64)) -> Result<PowerLawFit> {
    let (lo, hi) = domain;
    ensure(lo > 0.0 && hi > lo, "domain", hi - lo, "need 0 < z_min < z_max")?;
    let inside: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(z, _)| z >= lo * (1.0 - 1e-9) && z <= hi * (1.0 + 1e-9))
        .collect();
    for &(z, f) in &inside {
        ensure(z > 0.0 && z.is_finite(), "z", z, "fit needs positive abscissae")?;
        ensure(f > 0.0 && f.is_finite(), "f", f, "fit needs positive values")?;
    }
    if inside.len() < 2 {
        return Err(Error::Underdetermined { points: inside.len() });
    }
    let n = inside.len() as f64;
    let (sx, sy) = inside
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(z, f)| (sx + z.ln(), sy + f.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = inside.iter().fold((0.0, 0.0), |(sxx, sxy), &(z, f)| {
        let dx = z.ln() - mx;
        (sxx + dx * dx, sxy + dx * (f.ln() - my))
    });
    if sxx <= 0.0 {
        return Err(Error::Underdetermined { points: 1 });
    }
    let b = sxy / sxx;
    let ln_a = my - b * mx;
    let residual = inside
        .iter()
        .map(|&(z, f)| (f.ln() - ln_a - b * z.ln()).abs())
        .fold(0.0, f64::max);
    Ok(PowerLawFit {
        a: ln_a.exp(),
        b,
        domain,
        residual,
        points: inside.len(),
    })
}

/// Constants of the fully loaded closed form: circuitry power, amplifier
/// factor and the transmit-power scale `P_T` of `P_TX = P_T·λ^δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullLoadConstants {
    pub p0: f64,
    pub k_rf: f64,
    pub p_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeClassification {
    MonotoneIncreasing,
    MonotoneDecreasing,
    /// Global maximum at this density (unit of the fitted constants).
    InteriorMaximum(f64),
}

/// Shape of `T0·λ^{α−1} / (P0 + K_RF·P_T·λ^δ)` from the two exponents.
pub fn classify_regime(alpha: f64, delta: f64, c: &FullLoadConstants) -> Result<RegimeClassification> {
    ensure(alpha > 0.0, "alpha", alpha, "throughput exponent must be positive")?;
    ensure(delta < 0.0, "delta", delta, "power exponent must be negative")?;
    if (alpha - (1.0 + delta)).abs() <= 1e-12 * alpha.abs().max(1.0) {
        return Err(Error::DegenerateBoundary { alpha, delta });
    }
    if alpha >= 1.0 {
        Ok(RegimeClassification::MonotoneIncreasing)
    } else if alpha < 1.0 + delta {
        Ok(RegimeClassification::MonotoneDecreasing)
    } else {
        optimal_density_full(alpha, delta, c.p0, c.k_rf, c.p_t).map(RegimeClassification::InteriorMaximum)
    }
}

/// `λ0 = (P0(1−α) / (K_RF·P_T·(α−δ−1)))^{1/δ}`.
pub fn optimal_density_full(alpha: f64, delta: f64, p0: f64, k_rf: f64, p_t: f64) -> Result<f64> {
    ensure(delta < 0.0, "delta", delta, "power exponent must be negative")?;
    ensure(alpha < 1.0, "alpha", alpha, "needs a sublinear throughput")?;
    ensure(alpha > 1.0 + delta, "alpha", alpha, "needs alpha > 1 + delta")?;
    ensure(p0 > 0.0, "p0", p0, "must be positive")?;
    ensure(k_rf > 0.0, "k_rf", k_rf, "must be positive")?;
    ensure(p_t > 0.0, "p_t", p_t, "must be positive")?;
    Ok((p0 * (1.0 - alpha) / (k_rf * p_t * (alpha - delta - 1.0))).powf(1.0 / delta))
}

/// Closed-form fully loaded efficiency up to the factor `T0`:
/// `λ^{α−1} / (P0 + K_RF·P_T·λ^δ)`.
pub fn full_load_efficiency_shape(lambda: f64, alpha: f64, delta: f64, c: &FullLoadConstants) -> f64 {
    lambda.powf(alpha - 1.0) / (c.p0 + c.k_rf * c.p_t * lambda.powf(delta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialOptimum {
    /// BS/km² (same unit as the user density).
    pub density: f64,
    /// The approximation behind the optimum needs λ ≫ λ_U; trusted when
    /// `density > 3·λ_U`.
    pub reliable: bool,
}

/// `λ* = α·λ_U·(1−ρ) / (ρ(1−α))`.
pub fn optimal_density_partial(alpha: f64, user_density: f64, rho: f64) -> Result<PartialOptimum> {
    ensure(alpha > 0.0 && alpha < 1.0, "alpha", alpha, "must lie in (0, 1)")?;
    ensure(rho > 0.0 && rho < 1.0, "rho", rho, "must lie in (0, 1)")?;
    ensure(user_density > 0.0, "user_density", user_density, "must be positive")?;
    let density = alpha * user_density * (1.0 - rho) / (rho * (1.0 - alpha));
    Ok(PartialOptimum {
        density,
        reliable: density > 3.0 * user_density,
    })
}

/// Approximate partially loaded efficiency up to `T0`, valid for λ ≫ λ_U:
/// `λ^α / (λ_U·P0·(1−ρ) + λ·ρ·P0)`.
pub fn partial_load_efficiency_shape(lambda: f64, alpha: f64, user_density: f64, model: &PowerConsumptionModel) -> f64 {
    lambda.powf(alpha) / (user_density * model.p0 * (1.0 - model.rho) + lambda * model.rho * model.p0)
}

/// Index of the largest finite value.
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
}

/// Interior local maxima of a sampled curve (endpoints excluded).
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> PowerConsumptionModel {
        PowerConsumptionModel::default()
    }

    #[test]
    fn total_power_fully_loaded() {
        let p = total_power(&table(), 1.0, 100.0, 100.0, 0.1).unwrap();
        assert!((p - 1100.0).abs() < 1e-9);
    }

    #[test]
    fn total_power_all_dormant() {
        let m = table();
        let p = total_power(&m, 2.0, 50.0, 0.0, 0.0).unwrap();
        assert!((p - 2.0 * 50.0 * m.rho * m.p0).abs() < 1e-12);
    }

    #[test]
    fn standby_share() {
        let m = PowerConsumptionModel::new(10.0, 10.0, 0.5).unwrap();
        let la = 40.0;
        let full = total_power(&m, 1.0, la, la, 1.0).unwrap();
        let half = total_power(&m, 1.0, 2.0 * la, la, 1.0).unwrap();
        assert!((half - full - la * 0.5 * 10.0).abs() < 1e-9);
    }

    #[test]
    fn active_above_total_rejected() {
        assert!(total_power(&table(), 1.0, 10.0, 11.0, 1.0).is_err());
        assert!(PowerConsumptionModel::new(10.0, 0.5, 0.1).is_err());
        assert!(PowerConsumptionModel::new(10.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn efficiency_ratio() {
        assert_eq!(energy_efficiency(1e9, 1e3).unwrap(), 1e6);
        assert_eq!(energy_efficiency(1e9, 2e3).unwrap(), 0.5e6);
        assert!(energy_efficiency(1.0, 0.0).is_err());
    }

    #[test]
    fn exact_power_law_recovered() {
        let pts: Vec<_> = (1..20).map(|i| (i as f64, 3.0 * (i as f64).powi(2))).collect();
        let f = fit_power_law(&pts, (1.0, 19.0)).unwrap();
        assert!((f.a - 3.0).abs() < 1e-12 && (f.b - 2.0).abs() < 1e-12);
        assert!(f.residual <= 1e-12);
        assert_eq!(f.points, 19);
    }

    #[test]
    fn fit_domain_and_errors() {
        let pts = [(1.0, 1.0), (10.0, 10.0), (100.0, 1.0)];
        let f = fit_power_law(&pts, (1.0, 10.0)).unwrap();
        assert!((f.b - 1.0).abs() < 1e-12);
        assert!(matches!(
            fit_power_law(&pts[..1], (0.5, 2.0)),
            Err(Error::Underdetermined { points: 1 })
        ));
        assert!(fit_power_law(&[(1.0, -1.0), (2.0, 1.0)], (1.0, 2.0)).is_err());
    }

    #[test]
    fn regimes() {
        let c = FullLoadConstants {
            p0: 10.0,
            k_rf: 10.0,
            p_t: 4.4e-17,
        };
        assert_eq!(classify_regime(1.2, -1.0, &c).unwrap(), RegimeClassification::MonotoneIncreasing);
        assert_eq!(classify_regime(0.3, -0.5, &c).unwrap(), RegimeClassification::MonotoneDecreasing);
        match classify_regime(0.48, -3.9, &c).unwrap() {
            RegimeClassification::InteriorMaximum(l0) => {
                assert!((l0 - 1.03e-4).abs() < 0.01e-4, "{l0}");
                assert!((per_km2(l0) - 103.0).abs() < 1.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            classify_regime(0.5, -0.5, &c),
            Err(Error::DegenerateBoundary { .. })
        ));
        assert!(classify_regime(-0.1, -0.5, &c).is_err());
        assert!(classify_regime(0.5, 0.5, &c).is_err());
    }

    #[test]
    fn closed_form_optimum_is_the_maximum() {
        let c = FullLoadConstants {
            p0: 10.0,
            k_rf: 10.0,
            p_t: 4.4e-17,
        };
        let l0 = optimal_density_full(0.48, -3.9, c.p0, c.k_rf, c.p_t).unwrap();
        let at = full_load_efficiency_shape(l0, 0.48, -3.9, &c);
        for f in [0.5, 0.9, 0.99, 1.01, 1.1, 2.0] {
            assert!(full_load_efficiency_shape(l0 * f, 0.48, -3.9, &c) < at);
        }
    }

    #[test]
    fn scale_invariance_of_full_optimum() {
        let a = optimal_density_full(0.48, -3.9, 10.0, 10.0, 4.4e-17).unwrap();
        let b = optimal_density_full(0.48, -3.9, 70.0, 10.0, 7.0 * 4.4e-17).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn partial_optimum() {
        let o = optimal_density_partial(0.46, 1000.0, 0.1).unwrap();
        assert!((o.density - 7666.67).abs() < 0.01);
        assert!(o.reliable);
        assert!(optimal_density_partial(0.46, 1000.0, 1.0 - 1e-9).unwrap().density < 1e-5);
        assert!(optimal_density_partial(1.0 - 1e-9, 1000.0, 0.1).unwrap().density > 1e10);
        assert!(!optimal_density_partial(0.46, 1000.0, 0.3).unwrap().reliable);
        let m = PowerConsumptionModel::default();
        let at = partial_load_efficiency_shape(o.density, 0.46, 1000.0, &m);
        for f in [0.8, 1.2] {
            assert!(partial_load_efficiency_shape(o.density * f, 0.46, 1000.0, &m) < at);
        }
    }

    #[test]
    fn maxima_helpers() {
        let v = [1.0, 3.0, 2.0, 5.0, 4.0, f64::NAN];
        assert_eq!(argmax(&v), Some(3));
        assert_eq!(local_maxima(&v), vec![1, 3]);
    }

    proptest! {
        #[test]
        fn fit_is_scale_equivariant(c in 1e-3f64..1e3, b in -4.0f64..4.0, noise in proptest::collection::vec(-0.1f64..0.1, 8)) {
            let pts: Vec<_> = noise.iter().enumerate()
                .map(|(i, e)| {
                    let z = 10f64.powf(i as f64 / 3.0);
                    (z, z.powf(b) * e.exp())
                })
                .collect();
            let scaled: Vec<_> = pts.iter().map(|&(z, f)| (z, c * f)).collect();
            let f1 = fit_power_law(&pts, (1.0, 1e3)).unwrap();
            let f2 = fit_power_law(&scaled, (1.0, 1e3)).unwrap();
            prop_assert!((f2.b - f1.b).abs() < 1e-10);
            prop_assert!((f2.a / f1.a - c).abs() < 1e-9 * c);
        }
    }
}
