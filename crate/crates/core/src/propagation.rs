//! Dual-slope LOS/NLOS channel: path gains, LOS probability laws and the
//! mapping between NLOS distances and the LOS distance that delivers the same
//! mean received power.
//!
//! Distances are kilometres and gains are linear (`k·d^{-β}` with `k` the
//! gain at 1 km). Decibels only appear in the constructors.

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    k_los: f64,
    beta_los: f64,
    k_nlos: f64,
    beta_nlos: f64,
}

impl PathLossParams {
    pub fn new(k_los: f64, beta_los: f64, k_nlos: f64, beta_nlos: f64) -> Result<Self> {
        ensure(k_los > 0.0 && k_los.is_finite(), "k_los", k_los, "must be positive")?;
        ensure(k_nlos > 0.0 && k_nlos.is_finite(), "k_nlos", k_nlos, "must be positive")?;
        ensure(beta_los > 0.0, "beta_los", beta_los, "must be positive")?;
        ensure(
            beta_nlos >= beta_los,
            "beta_nlos",
            beta_nlos,
            "NLOS exponent must be at least the LOS exponent",
        )?;
        Ok(PathLossParams {
            k_los,
            beta_los,
            k_nlos,
            beta_nlos,
        })
    }

    /// Builds from path loss in dB at 1 km and exponents
    /// (`PL_dB(d) = pl_db + 10·β·log10(d_km)`).
    pub fn from_db(los_db_at_1km: f64, beta_los: f64, nlos_db_at_1km: f64, beta_nlos: f64) -> Result<Self> {
        Self::new(
            10f64.powf(-los_db_at_1km / 10.0),
            beta_los,
            10f64.powf(-nlos_db_at_1km / 10.0),
            beta_nlos,
        )
    }

    /// Single-slope law: both states share gain and exponent.
    pub fn single_slope(db_at_1km: f64, beta: f64) -> Result<Self> {
        Self::from_db(db_at_1km, beta, db_at_1km, beta)
    }

    /// 3GPP pico-cell LOS/NLOS constants: 103.8 + 20.9·log10(d) and
    /// 145.4 + 37.5·log10(d).
    pub fn urban_pico() -> Self {
        Self::from_db(103.8, 2.09, 145.4, 3.75).expect("constants are valid")
    }

    /// 140.7 + 36.7·log10(d).
    pub fn urban_single_slope() -> Self {
        Self::single_slope(140.7, 3.67).expect("constants are valid")
    }

    pub fn k_los(&self) -> f64 {
        self.k_los
    }
    pub fn beta_los(&self) -> f64 {
        self.beta_los
    }
    pub fn k_nlos(&self) -> f64 {
        self.k_nlos
    }
    pub fn beta_nlos(&self) -> f64 {
        self.beta_nlos
    }

    /// `(k_nlos / k_los)^(1/β_nlos)`.
    pub fn k_eq(&self) -> f64 {
        (self.k_nlos / self.k_los).powf(1.0 / self.beta_nlos)
    }

    /// `β_los / β_nlos`, in (0, 1].
    pub fn beta_eq(&self) -> f64 {
        self.beta_los / self.beta_nlos
    }

    pub fn path_gain(&self, d: f64, los: bool) -> Result<f64> {
        ensure(d > 0.0, "d", d, "path gain is singular at d <= 0")?;
        Ok(self.gain_unchecked(d, los))
    }

    #[inline]
    pub(crate) fn gain_unchecked(&self, d: f64, los: bool) -> f64 {
        if los {
            self.k_los * d.powf(-self.beta_los)
        } else {
            self.k_nlos * d.powf(-self.beta_nlos)
        }
    }

    /// NLOS distance whose received power matches a LOS link at `r`.
    #[inline]
    pub fn equivalent_distance_inverse(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.k_eq() * r.powf(self.beta_eq())
    }

    /// LOS distance whose received power matches a NLOS link at `d`.
    #[inline]
    pub fn equivalent_distance(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        (self.k_los / self.k_nlos).powf(1.0 / self.beta_los) * d.powf(self.beta_nlos / self.beta_los)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LosProbabilityModel {
    /// `0.5 − min(0.5, 5e^{−d0/d}) + min(0.5, 5e^{−d/d1})`
    ThreeGpp { d0: f64, d1: f64 },
    /// `exp(−(d/L)²)`
    ExpSquare { scale: f64 },
    /// `exp(−d/L)`
    Exp { scale: f64 },
    Constant { p: f64 },
}

impl LosProbabilityModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LosProbabilityModel::ThreeGpp { d0, d1 } => {
                ensure(d0 > 0.0, "d0", d0, "must be positive")?;
                ensure(d1 > 0.0, "d1", d1, "must be positive")
            }
            LosProbabilityModel::ExpSquare { scale } | LosProbabilityModel::Exp { scale } => {
                ensure(scale > 0.0, "scale", scale, "must be positive")
            }
            LosProbabilityModel::Constant { p } => {
                ensure((0.0..=1.0).contains(&p), "p", p, "must be a probability")
            }
        }
    }

    pub fn los_probability(&self, d: f64) -> Result<f64> {
        ensure(d >= 0.0, "d", d, "distance must be non-negative")?;
        Ok(self.eval(d))
    }

    #[inline]
    pub(crate) fn eval(&self, d: f64) -> f64 {
        match *self {
            LosProbabilityModel::ThreeGpp { d0, d1 } => {
                let near = if d == 0.0 { 0.0 } else { (5.0 * (-d0 / d).exp()).min(0.5) };
                let far = (5.0 * (-d / d1).exp()).min(0.5);
                0.5 - near + far
            }
            LosProbabilityModel::ExpSquare { scale } => {
                let x = d / scale;
                (-x * x).exp()
            }
            LosProbabilityModel::Exp { scale } => (-d / scale).exp(),
            LosProbabilityModel::Constant { p } => p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LosProbabilityModel::ThreeGpp { .. } => "3gpp",
            LosProbabilityModel::ExpSquare { .. } => "exp_square",
            LosProbabilityModel::Exp { .. } => "exp",
            LosProbabilityModel::Constant { .. } => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingModel {
    mu: f64,
}

impl FadingModel {
    pub fn new(mu: f64) -> Result<Self> {
        ensure(mu > 0.0 && mu.is_finite(), "mu", mu, "fading rate must be positive")?;
        Ok(FadingModel { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Default for FadingModel {
    fn default() -> Self {
        FadingModel { mu: 1.0 }
    }
}

/// Result of matching the `ExpSquare` law to the 3GPP law at probability 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleCalibration {
    pub scale: f64,
    /// Abscissa where both laws equal 0.5.
    pub crossing: f64,
}

const CALIBRATION_TOL_KM: f64 = 1e-9;

/// Picks `L` so that `exp(−(d/L)²)` and the 3GPP law both equal 0.5 at the
/// same distance.
///
/// The 3GPP law can sit exactly on 0.5 over a short plateau (it does for the
/// standard pico parameters); the crossing is then the plateau midpoint.
pub fn calibrate_exp_square_scale(d0: f64, d1: f64) -> Result<ScaleCalibration> {
    let model = LosProbabilityModel::ThreeGpp { d0, d1 };
    model.validate()?;
    let p = |d: f64| model.eval(d);

    let mut hi = d0.max(d1) * 1e-3;
    let limit = 1e3 * d0.max(d1);
    while p(hi) >= 0.5 {
        hi *= 2.0;
        if hi > limit {
            return Err(Error::NoCrossing {
                level: 0.5,
                searched_to_km: limit,
            });
        }
    }
    let lo = 0.0;
    if p(lo) <= 0.5 {
        return Err(Error::NoCrossing {
            level: 0.5,
            searched_to_km: hi,
        });
    }

    // last point strictly above 0.5, then first point strictly below
    let bisect = |mut a: f64, mut b: f64, go_right: &dyn Fn(f64) -> bool| {
        while b - a > CALIBRATION_TOL_KM {
            let m = 0.5 * (a + b);
            if go_right(m) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let left = bisect(lo, hi, &|d| p(d) > 0.5);
    let right = bisect(lo, hi, &|d| p(d) >= 0.5);
    let crossing = 0.5 * (left + right);
    Ok(ScaleCalibration {
        scale: crossing / std::f64::consts::LN_2.sqrt(),
        crossing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pico() -> PathLossParams {
        PathLossParams::urban_pico()
    }

    #[test]
    fn exp_square_at_origin_and_scale() {
        let m = LosProbabilityModel::ExpSquare { scale: 0.0825 };
        assert_eq!(m.los_probability(0.0).unwrap(), 1.0);
        assert!((m.los_probability(0.0825).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn three_gpp_limits() {
        let m = LosProbabilityModel::ThreeGpp { d0: 0.156, d1: 0.03 };
        assert_eq!(m.los_probability(0.0).unwrap(), 1.0);
        assert!((m.los_probability(1e-6).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.los_probability(50.0).unwrap() < 1e-12);
    }

    #[test]
    fn negative_distance_is_a_domain_error() {
        let m = LosProbabilityModel::Exp { scale: 0.1 };
        assert!(matches!(m.los_probability(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn los_laws_are_bounded_and_non_increasing() {
        let models = [
            LosProbabilityModel::ThreeGpp { d0: 0.156, d1: 0.03 },
            LosProbabilityModel::ExpSquare { scale: 0.0825 },
            LosProbabilityModel::Exp { scale: 0.0825 },
        ];
        for m in models {
            let mut prev = 1.0;
            for i in 0..4000 {
                let d = 1e-4 * 1.005f64.powi(i);
                let p = m.eval(d);
                assert!((0.0..=1.0).contains(&p));
                assert!(p <= prev + 1e-15, "{m:?} increases at {d}");
                prev = p;
            }
        }
    }

    #[test]
    fn single_slope_reference_gain() {
        let p = PathLossParams::urban_single_slope();
        assert!((p.path_gain(1.0, true).unwrap() / 10f64.powf(-14.07) - 1.0).abs() < 1e-12);
        assert_eq!(p.path_gain(1.0, true).unwrap(), p.k_los());
    }

    #[test]
    fn nlos_gain_at_100m() {
        let g = pico().path_gain(0.1, false).unwrap();
        let expected = 10f64.powf(-14.54) * 0.1f64.powf(-3.75);
        assert!((g / expected - 1.0).abs() < 1e-12);
        assert!((g / 1.6218e-11 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_distance_gain_rejected() {
        assert!(pico().path_gain(0.0, true).is_err());
    }

    #[test]
    fn equivalent_constants_for_pico() {
        let p = pico();
        // (k_nlos/k_los)^(1/β_nlos) = 10^(−4.16/3.75)
        assert!((p.k_eq() - 10f64.powf(-4.16 / 3.75)).abs() < 1e-12);
        assert!((p.k_eq() - 0.077_74).abs() < 1e-4);
        assert!((p.beta_eq() - 0.557_33).abs() < 1e-5);
        let r_nlos = p.equivalent_distance_inverse(0.1);
        assert!((r_nlos - 0.077_74 * 0.1f64.powf(0.557_33)).abs() < 1e-5);
        assert!((p.equivalent_distance(r_nlos) - 0.1).abs() < 1e-12);
        assert_eq!(p.equivalent_distance(0.0), 0.0);
    }

    #[test]
    fn single_slope_maps_are_identity() {
        let p = PathLossParams::urban_single_slope();
        for d in [1e-3, 0.05, 2.0] {
            assert!((p.equivalent_distance(d) - d).abs() < 1e-14 * d.max(1.0));
            assert!((p.equivalent_distance_inverse(d) - d).abs() < 1e-14 * d.max(1.0));
        }
    }

    #[test]
    fn calibration_reproduces_pico_scale() {
        let c = calibrate_exp_square_scale(0.156, 0.03).unwrap();
        assert!((c.scale - 0.0825).abs() / 0.0825 < 0.01, "L = {}", c.scale);
        let m = LosProbabilityModel::ExpSquare { scale: c.scale };
        assert!((m.eval(c.crossing) - 0.5).abs() < 1e-6);
        let g = LosProbabilityModel::ThreeGpp { d0: 0.156, d1: 0.03 };
        assert!((g.eval(c.crossing) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn calibration_round_trip_without_plateau() {
        // both clipped terms are below 0.5 near the crossing, so
        // 5e^{−d0/d} = 5e^{−d/d1} gives d* = √(d0·d1)
        let (d0, d1) = (0.09, 0.01);
        let c = calibrate_exp_square_scale(d0, d1).unwrap();
        let d_star = (d0 * d1).sqrt();
        assert!((c.crossing - d_star).abs() < 1e-8);
        assert!((c.scale - d_star / std::f64::consts::LN_2.sqrt()).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn nlos_gain_equals_los_gain_at_equivalent_distance(d in 1e-4f64..50.0) {
            let p = pico();
            let nlos = p.gain_unchecked(d, false);
            let los = p.gain_unchecked(p.equivalent_distance(d), true);
            prop_assert!((nlos / los - 1.0).abs() < 1e-10);
        }

        #[test]
        fn equivalent_maps_invert(r in 1e-5f64..100.0) {
            let p = pico();
            let back = p.equivalent_distance(p.equivalent_distance_inverse(r));
            prop_assert!((back / r - 1.0).abs() < 1e-10);
        }

        #[test]
        fn gain_strictly_decreasing(d in 1e-4f64..10.0, step in 1e-6f64..1.0, los: bool) {
            let p = pico();
            prop_assert!(p.gain_unchecked(d + step, los) < p.gain_unchecked(d, los));
        }
    }
}
