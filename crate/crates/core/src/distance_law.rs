//! Law of the LOS-equivalent distance `r` from the typical user to its
//! serving base station.
//!
//! Every supported LOS model gives `P[r > R] = Π_m exp(f_m(R))` for a short
//! list of terms, and `f_r(R) = −P[r > R]·Σ_m f_m′(R)`. Each term knows its
//! own value and derivative; the derivative is taken with respect to the
//! radius the term lives on (`R` for LOS balls, `R_eq = d_eq⁻¹(R)` for NLOS
//! balls) and chained through `dR_eq/dR`.

use std::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::propagation::{LosProbabilityModel, PathLossParams};
use crate::quadrature::{integrate_with_breakpoints, QuadratureSpec};

/// Which radius a term is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Radius {
    /// The LOS-equivalent radius `R` itself.
    Los,
    /// The NLOS radius `d_eq⁻¹(R)` delivering the same power.
    Nlos,
}

/// One exponent `f_m` of the product form, as a function of its radius `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `−weight·πλρ²`
    Disk { weight: f64, on: Radius },
    /// `sign·πλL²·e^{−ρ²/L²}`
    Gaussian { sign: f64, scale: f64, on: Radius },
    /// `sign·2πλL²·e^{−ρ/L}`
    Exponential { sign: f64, scale: f64, on: Radius },
    /// `sign·2πλLρ·e^{−ρ/L}`
    LinearExponential { sign: f64, scale: f64, on: Radius },
    /// `−λ∫₀^ρ p_L(v)·2πv dv` (LOS) or `−λ∫₀^ρ (1−p_L(v))·2πv dv` (NLOS),
    /// by quadrature.
    Ball { model: LosProbabilityModel, on: Radius },
}

const BALL_SPEC: QuadratureSpec = QuadratureSpec::new(1e-15, 1e-13);

impl Term {
    pub fn radius(&self) -> Radius {
        match *self {
            Term::Disk { on, .. }
            | Term::Gaussian { on, .. }
            | Term::Exponential { on, .. }
            | Term::LinearExponential { on, .. }
            | Term::Ball { on, .. } => on,
        }
    }

    /// `f_m` at radius `rho`.
    pub fn value(&self, lambda: f64, rho: f64) -> f64 {
        match *self {
            Term::Disk { weight, .. } => -weight * PI * lambda * rho * rho,
            Term::Gaussian { sign, scale, .. } => {
                let x = rho / scale;
                sign * PI * lambda * scale * scale * (-x * x).exp()
            }
            Term::Exponential { sign, scale, .. } => {
                sign * 2.0 * PI * lambda * scale * scale * (-rho / scale).exp()
            }
            Term::LinearExponential { sign, scale, .. } => {
                sign * 2.0 * PI * lambda * scale * rho * (-rho / scale).exp()
            }
            Term::Ball { model, on } => -lambda * ball_measure(&model, on, rho),
        }
    }

    /// `df_m/dρ` at radius `rho`.
    pub fn radial_derivative(&self, lambda: f64, rho: f64) -> f64 {
        match *self {
            Term::Disk { weight, .. } => -2.0 * weight * PI * lambda * rho,
            Term::Gaussian { sign, scale, .. } => {
                let x = rho / scale;
                -sign * 2.0 * PI * lambda * rho * (-x * x).exp()
            }
            Term::Exponential { sign, scale, .. } => {
                -sign * 2.0 * PI * lambda * scale * (-rho / scale).exp()
            }
            Term::LinearExponential { sign, scale, .. } => {
                sign * 2.0 * PI * lambda * (scale - rho) * (-rho / scale).exp()
            }
            Term::Ball { model, on } => {
                let p = model.eval(rho);
                let density = match on {
                    Radius::Los => p,
                    Radius::Nlos => 1.0 - p,
                };
                -lambda * density * 2.0 * PI * rho
            }
        }
    }
}

/// `∫₀^ρ w(v)·2πv dv` with `w = p_L` (LOS) or `1 − p_L` (NLOS).
fn ball_measure(model: &LosProbabilityModel, on: Radius, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let mut points = vec![0.0];
    if let LosProbabilityModel::ThreeGpp { d0, d1 } = *model {
        // kinks where the two `min` clauses switch
        for k in [d0 / 10f64.ln(), d1 * 10f64.ln()] {
            if k > 0.0 && k < rho {
                points.push(k);
            }
        }
        points.sort_by(f64::total_cmp);
    }
    points.push(rho);
    let los = integrate_with_breakpoints(|v| model.eval(v) * 2.0 * PI * v, &points, &BALL_SPEC)
        .map(|i| i.value)
        .unwrap_or_else(|_| {
            // the integrand is bounded and piecewise smooth; fall back to a dense fixed rule
            crate::quadrature::FixedRule::uniform(0.0, rho, 200).apply(|v| model.eval(v) * 2.0 * PI * v)
        });
    match on {
        Radius::Los => los,
        Radius::Nlos => PI * rho * rho - los,
    }
}

/// `P[r > R] = Π exp(f_m(R))` as an explicit list of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialProductLaw {
    pub terms: Vec<Term>,
}

impl ExponentialProductLaw {
    pub fn for_model(model: &LosProbabilityModel) -> Self {
        let terms = match *model {
            LosProbabilityModel::ExpSquare { scale } => vec![
                Term::Gaussian {
                    sign: 1.0,
                    scale,
                    on: Radius::Los,
                },
                Term::Gaussian {
                    sign: -1.0,
                    scale,
                    on: Radius::Nlos,
                },
                Term::Disk {
                    weight: 1.0,
                    on: Radius::Nlos,
                },
            ],
            LosProbabilityModel::Exp { scale } => vec![
                Term::Exponential {
                    sign: 1.0,
                    scale,
                    on: Radius::Los,
                },
                Term::LinearExponential {
                    sign: 1.0,
                    scale,
                    on: Radius::Los,
                },
                Term::Disk {
                    weight: 1.0,
                    on: Radius::Nlos,
                },
                Term::Exponential {
                    sign: -1.0,
                    scale,
                    on: Radius::Nlos,
                },
                Term::LinearExponential {
                    sign: -1.0,
                    scale,
                    on: Radius::Nlos,
                },
            ],
            LosProbabilityModel::Constant { p } => {
                let mut t = Vec::with_capacity(2);
                if p > 0.0 {
                    t.push(Term::Disk {
                        weight: p,
                        on: Radius::Los,
                    });
                }
                if p < 1.0 {
                    t.push(Term::Disk {
                        weight: 1.0 - p,
                        on: Radius::Nlos,
                    });
                }
                t
            }
            LosProbabilityModel::ThreeGpp { .. } => vec![
                Term::Ball {
                    model: *model,
                    on: Radius::Los,
                },
                Term::Ball {
                    model: *model,
                    on: Radius::Nlos,
                },
            ],
        };
        ExponentialProductLaw { terms }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceLaw {
    density: f64,
    propagation: PathLossParams,
    los_model: LosProbabilityModel,
    law: ExponentialProductLaw,
}

impl DistanceLaw {
    pub fn new(density: f64, propagation: PathLossParams, los_model: LosProbabilityModel) -> Result<Self> {
        ensure(
            density > 0.0 && density.is_finite(),
            "lambda",
            density,
            "BS density must be positive",
        )?;
        los_model.validate()?;
        Ok(DistanceLaw {
            density,
            propagation,
            law: ExponentialProductLaw::for_model(&los_model),
            los_model,
        })
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn propagation(&self) -> &PathLossParams {
        &self.propagation
    }

    pub fn los_model(&self) -> &LosProbabilityModel {
        &self.los_model
    }

    pub fn law(&self) -> &ExponentialProductLaw {
        &self.law
    }

    fn radius(&self, on: Radius, r: f64) -> f64 {
        match on {
            Radius::Los => r,
            Radius::Nlos => self.propagation.equivalent_distance_inverse(r),
        }
    }

    fn radius_derivative(&self, on: Radius, r: f64) -> f64 {
        match on {
            Radius::Los => 1.0,
            Radius::Nlos => {
                let p = &self.propagation;
                p.k_eq() * p.beta_eq() * r.powf(p.beta_eq() - 1.0)
            }
        }
    }

    /// `Σ f_m(R) = ln P[r > R]`.
    pub fn log_tail(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.law
            .terms
            .iter()
            .map(|t| t.value(self.density, self.radius(t.radius(), r)))
            .sum::<f64>()
            // the closed forms are normalized so the constants cancel at R = 0
            - self.log_tail_offset()
    }

    fn log_tail_offset(&self) -> f64 {
        self.law
            .terms
            .iter()
            .map(|t| t.value(self.density, 0.0))
            .sum()
    }

    pub fn tail_probability(&self, r: f64) -> f64 {
        self.log_tail(r).exp().min(1.0)
    }

    /// `P[r ≤ R]`, accurate for small values.
    pub fn cdf(&self, r: f64) -> f64 {
        -self.log_tail(r).exp_m1()
    }

    /// `Σ f_m′(R)`.
    pub fn log_tail_derivative(&self, r: f64) -> f64 {
        self.law
            .terms
            .iter()
            .map(|t| {
                let rho = self.radius(t.radius(), r);
                t.radial_derivative(self.density, rho) * self.radius_derivative(t.radius(), r)
            })
            .sum()
    }

    pub fn pdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.pdf_at_origin();
        }
        let d = self.log_tail_derivative(r);
        if d.is_nan() {
            // 0·∞ from a NLOS chain factor at an underflowed radius
            return 0.0;
        }
        (-self.tail_probability(r) * d).max(0.0)
    }

    fn pdf_at_origin(&self) -> f64 {
        // LOS part ~ 2πλR·p_L(0) → 0; NLOS part ~ 2πλ(1−p_L(0))K²β·R^{2β−1}
        let p0 = self.los_model.eval(0.0);
        let exponent = 2.0 * self.propagation.beta_eq() - 1.0;
        if p0 >= 1.0 || exponent > 0.0 {
            0.0
        } else if exponent == 0.0 {
            let k = self.propagation.k_eq();
            2.0 * PI * self.density * (1.0 - p0) * k * k * self.propagation.beta_eq()
        } else {
            f64::INFINITY
        }
    }

    /// `(r_lo, r_hi)` with `P[r ≤ r_lo] < eps` and `P[r > r_hi] < eps`.
    pub fn support(&self, eps: f64) -> (f64, f64) {
        let start = 1.0 / self.density.sqrt();
        let mut hi = start;
        while self.tail_probability(hi) >= eps && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = start;
        while self.cdf(lo) >= eps && lo > 1e-300 {
            lo *= 0.5;
        }
        (lo, hi)
    }

    /// Smallest doubling of `1/√λ` whose tail drops below `eps`.
    pub fn r_max(&self, eps: f64) -> f64 {
        self.support(eps).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PICO_L: f64 = 0.0825;

    fn laws(lambda: f64) -> Vec<DistanceLaw> {
        let p = PathLossParams::urban_pico();
        [
            LosProbabilityModel::ExpSquare { scale: PICO_L },
            LosProbabilityModel::Exp { scale: PICO_L },
            LosProbabilityModel::ThreeGpp { d0: 0.156, d1: 0.03 },
        ]
        .into_iter()
        .map(|m| DistanceLaw::new(lambda, p, m).unwrap())
        .collect()
    }

    /// `P[r > R]` straight from the two ball integrals, independent of the
    /// term lists.
    fn tail_by_quadrature(law: &DistanceLaw, r: f64) -> f64 {
        let m = *law.los_model();
        let spec = QuadratureSpec::new(1e-14, 1e-12);
        let los = crate::quadrature::integrate(
            |v| m.eval(v) * 2.0 * PI * v,
            crate::quadrature::Interval::Finite(0.0, r),
            &spec,
        )
        .unwrap()
        .value;
        let r_eq = law.propagation().equivalent_distance_inverse(r);
        let nlos = crate::quadrature::integrate(
            |v| (1.0 - m.eval(v)) * 2.0 * PI * v,
            crate::quadrature::Interval::Finite(0.0, r_eq),
            &spec,
        )
        .unwrap()
        .value;
        (-law.density() * (los + nlos)).exp()
    }

    #[test]
    fn tail_is_one_at_origin() {
        for law in laws(100.0) {
            assert_eq!(law.tail_probability(0.0), 1.0);
        }
    }

    #[test]
    fn single_slope_void_probability() {
        let law = DistanceLaw::new(
            100.0,
            PathLossParams::urban_single_slope(),
            LosProbabilityModel::Constant { p: 1.0 },
        )
        .unwrap();
        let v = law.tail_probability(0.05);
        assert!((v - (-0.25 * PI).exp()).abs() < 1e-14);
        assert!((v - 0.455_94).abs() < 1e-5);
    }

    #[test]
    fn rayleigh_pdf_for_single_slope() {
        let lambda = 100.0;
        let law = DistanceLaw::new(
            lambda,
            PathLossParams::urban_single_slope(),
            LosProbabilityModel::Constant { p: 1.0 },
        )
        .unwrap();
        for r in [0.001, 0.02, 0.0564, 0.2] {
            let rayleigh = 2.0 * PI * lambda * r * (-PI * lambda * r * r).exp();
            assert!((law.pdf(r) - rayleigh).abs() < 1e-12 * rayleigh.max(1.0));
        }
        // mode at 1/√(2πλ)
        let mode = 1.0 / (2.0 * PI * lambda).sqrt();
        assert!(law.pdf(mode) > law.pdf(mode * 0.99));
        assert!(law.pdf(mode) > law.pdf(mode * 1.01));
    }

    #[test]
    fn closed_forms_match_ball_integrals() {
        for lambda in [10.0, 100.0, 1000.0] {
            for law in laws(lambda) {
                for r in [1e-3, 0.01, 0.05, 0.3, 2.0, 20.0] {
                    let a = law.tail_probability(r);
                    let b = tail_by_quadrature(&law, r);
                    assert!(
                        (a - b).abs() < 1e-10,
                        "{:?} λ={lambda} R={r}: {a} vs {b}",
                        law.los_model()
                    );
                }
            }
        }
    }

    #[test]
    fn each_term_derivative_matches_finite_difference() {
        let lambda = 300.0;
        let terms = ExponentialProductLaw::for_model(&LosProbabilityModel::Exp { scale: PICO_L })
            .terms
            .into_iter()
            .chain(ExponentialProductLaw::for_model(&LosProbabilityModel::ExpSquare { scale: PICO_L }).terms)
            .chain(
                ExponentialProductLaw::for_model(&LosProbabilityModel::ThreeGpp { d0: 0.156, d1: 0.03 }).terms,
            );
        for term in terms {
            for rho in [0.01, 0.05, 0.09, 0.4] {
                let h = 1e-6 * rho;
                let fd = (term.value(lambda, rho + h) - term.value(lambda, rho - h)) / (2.0 * h);
                let d = term.radial_derivative(lambda, rho);
                assert!(
                    (fd - d).abs() <= 1e-6 * d.abs().max(1e-3),
                    "{term:?} at {rho}: fd {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn pdf_matches_finite_difference_of_tail() {
        for lambda in [10.0, 100.0, 1000.0] {
            for law in laws(lambda) {
                // away from the origin, where P[r ≤ R] ≪ 1 is lost to rounding
                let (lo, _) = law.support(1e-4);
                let (_, hi) = law.support(1e-9);
                let n = 40;
                for i in 0..=n {
                    let r = lo * (hi / lo).powf(i as f64 / n as f64);
                    let h = 1e-4 * r;
                    // difference whichever side of the law is small
                    let fd = if law.cdf(r) < 0.5 {
                        (law.cdf(r + h) - law.cdf(r - h)) / (2.0 * h)
                    } else {
                        (law.tail_probability(r - h) - law.tail_probability(r + h)) / (2.0 * h)
                    };
                    let pdf = law.pdf(r);
                    if pdf < 1e-8 {
                        continue;
                    }
                    assert!(
                        (fd - pdf).abs() <= 1e-5 * pdf,
                        "{:?} λ={lambda} R={r}: fd {fd} pdf {pdf}",
                        law.los_model()
                    );
                }
            }
        }
    }

    #[test]
    fn exp_square_shrinking_scale_tends_to_pure_nlos() {
        let p = PathLossParams::urban_pico();
        let lambda = 50.0;
        let law = DistanceLaw::new(lambda, p, LosProbabilityModel::ExpSquare { scale: 1e-6 }).unwrap();
        for r in [0.5, 5.0, 30.0] {
            let r_eq = p.equivalent_distance_inverse(r);
            let nlos_only = (-PI * lambda * r_eq * r_eq).exp();
            assert!((law.tail_probability(r) - nlos_only).abs() < 1e-9);
        }
    }

    #[test]
    fn pdf_is_non_negative() {
        for law in laws(100.0) {
            for i in 0..200 {
                let r = 1e-5 * 1.1f64.powi(i);
                assert!(law.pdf(r) >= 0.0);
            }
        }
    }
}
