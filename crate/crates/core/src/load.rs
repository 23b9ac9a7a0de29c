//! Base-station activity and the density of the interfering field.

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadModel {
    FullyLoaded,
    /// Users per km²; BSs without users stay silent.
    PartiallyLoaded { user_density: f64 },
    /// Each BS picks one of `reuse` channels independently.
    FrequencyReuse { reuse: u32 },
}

impl LoadModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LoadModel::FullyLoaded => Ok(()),
            LoadModel::PartiallyLoaded { user_density } => ensure(
                user_density > 0.0 && user_density.is_finite(),
                "user_density",
                user_density,
                "must be positive",
            ),
            LoadModel::FrequencyReuse { reuse } => {
                ensure(reuse >= 1, "reuse", reuse as f64, "reuse factor must be at least 1")
            }
        }
    }

    /// Number of channels the band is split into.
    pub fn reuse_factor(&self) -> u32 {
        match *self {
            LoadModel::FrequencyReuse { reuse } => reuse,
            _ => 1,
        }
    }

    /// `λ_I`: fully loaded → λ, reuse N → λ/N, partial load → p_A·λ.
    pub fn interferer_density(&self, lambda: f64) -> f64 {
        match *self {
            LoadModel::FullyLoaded => lambda,
            LoadModel::FrequencyReuse { reuse } => lambda / reuse as f64,
            LoadModel::PartiallyLoaded { user_density } => prob_active(lambda, user_density) * lambda,
        }
    }

    /// `λ_A`: every BS is active except under partial load.
    pub fn active_density(&self, lambda: f64) -> f64 {
        match *self {
            LoadModel::PartiallyLoaded { user_density } => prob_active(lambda, user_density) * lambda,
            _ => lambda,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            LoadModel::FullyLoaded => "full".to_owned(),
            LoadModel::PartiallyLoaded { user_density } => format!("partial({user_density})"),
            LoadModel::FrequencyReuse { reuse } => format!("reuse({reuse})"),
        }
    }
}

/// Probability that a BS has at least one user, `1 − (1 + λ_U/(3.5λ))^{−3.5}`.
pub fn prob_active(lambda: f64, user_density: f64) -> f64 {
    if user_density <= 0.0 {
        return 0.0;
    }
    // −expm1(−3.5·ln1p(x)) keeps precision when λ_U ≪ λ
    let x = user_density / (3.5 * lambda);
    -(-3.5 * x.ln_1p()).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn no_users_no_activity() {
        assert_eq!(prob_active(100.0, 0.0), 0.0);
    }

    #[test]
    fn saturates_with_many_users() {
        assert!(prob_active(1.0, 1e9) > 1.0 - 1e-12);
    }

    #[test]
    fn equal_densities() {
        // 1 − (1 + 1/3.5)^{−3.5}
        let expected = 1.0 - (1.0f64 + 1.0 / 3.5).powf(-3.5);
        assert!((prob_active(1000.0, 1000.0) - expected).abs() < 1e-15);
        assert!((expected - 0.585_05).abs() < 1e-5);
    }

    #[test]
    fn interferer_densities() {
        assert_eq!(LoadModel::FullyLoaded.interferer_density(100.0), 100.0);
        assert_eq!(LoadModel::FrequencyReuse { reuse: 2 }.interferer_density(100.0), 50.0);
        let partial = LoadModel::PartiallyLoaded { user_density: 1000.0 };
        assert!((partial.interferer_density(1e9) - 1000.0).abs() < 1e-3);
    }

    #[test]
    fn active_densities() {
        assert_eq!(LoadModel::FrequencyReuse { reuse: 3 }.active_density(300.0), 300.0);
        let partial = LoadModel::PartiallyLoaded { user_density: 1000.0 };
        assert!((partial.active_density(1000.0) - 585.05).abs() < 0.01);
        assert!((partial.active_density(1.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_models() {
        assert!(LoadModel::FrequencyReuse { reuse: 0 }.validate().is_err());
        assert!(LoadModel::PartiallyLoaded { user_density: 0.0 }.validate().is_err());
    }

    #[test]
    fn active_density_saturates_below_bound() {
        let lu = 1000.0;
        let partial = LoadModel::PartiallyLoaded { user_density: lu };
        let mut prev = 0.0;
        for i in 0..=80 {
            let lambda = 10f64.powf(i as f64 / 20.0);
            let la = partial.active_density(lambda);
            assert!(la >= prev);
            if lambda >= lu {
                assert!(la <= lu * 1.35);
            }
            prev = la;
        }
    }

    proptest! {
        #[test]
        fn density_ordering(lambda in 1e-2f64..1e5, lu in 1e-2f64..1e5, n in 1u32..8) {
            for m in [
                LoadModel::FullyLoaded,
                LoadModel::PartiallyLoaded { user_density: lu },
                LoadModel::FrequencyReuse { reuse: n },
            ] {
                let li = m.interferer_density(lambda);
                let la = m.active_density(lambda);
                prop_assert!(li > 0.0 && li <= la * (1.0 + 1e-15) && la <= lambda * (1.0 + 1e-15));
            }
        }

        #[test]
        fn prob_active_monotone(lambda in 1e-1f64..1e4, lu in 1e-1f64..1e4) {
            let p = prob_active(lambda, lu);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(prob_active(lambda, lu * 1.1) >= p);
            prop_assert!(prob_active(lambda * 1.1, lu) <= p);
        }
    }
}
