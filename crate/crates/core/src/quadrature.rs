//! Adaptive Gauss–Kronrod integration on finite and semi-infinite intervals.
//!
//! The integrator keeps a pool of subintervals and always bisects the one
//! with the largest error estimate (global adaptivity, no extrapolation).
//! Semi-infinite ranges `[start, ∞)` are mapped onto `[0, 1)` with
//! `x = start + scale·t/(1−t)`; the Kronrod abscissae never touch `t = 1`.
//!
//! [`FixedRule`] exposes the same 21-point Kronrod rule as a composite,
//! non-adaptive node set for callers that want to re-weight one integrand
//! many times (for example the noise sweep of the power search).

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Kronrod abscissae on [-1, 1], positive half, descending; last is the centre.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_622_000_049,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

/// 10-point Gauss weights, paired with `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge: estimate {estimate:e} with error {abs_error:e} \
         (requested {requested:e}) after {subdivisions} subdivisions"
    )]
    NonConvergence {
        estimate: f64,
        abs_error: f64,
        requested: f64,
        subdivisions: usize,
    },
    #[error("integrand is not finite at x = {at:e}")]
    NotFinite { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub const fn new(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions: 400,
        }
    }

    pub const fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::new(1e-10, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Finite(f64, f64),
    /// `[start, ∞)`, mapped by `x = start + scale·t/(1−t)`.
    SemiInfinite { start: f64, scale: f64 },
}

impl Interval {
    pub fn semi_infinite(start: f64) -> Self {
        Interval::SemiInfinite { start, scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 21-point Kronrod evaluation on `[a, b]`: returns (value, error).
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, QuadratureError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NotFinite { at: x })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (kronrod - gauss) * half;
    let scale = half.abs();
    Ok((
        kronrod * half,
        rescale_error(err, res_abs * scale, res_asc * scale),
    ))
}

fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions + breaks.len());
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let (v, e) = gk21(&mut f, w[0], w[1])?;
        evaluations += 21;
        value += v;
        error += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut splits = 0;
    while error > spec.target(value) {
        if splits >= spec.max_subdivisions {
            return Err(QuadratureError::NonConvergence {
                estimate: value,
                abs_error: error,
                requested: spec.target(value),
                subdivisions: splits,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            return Err(QuadratureError::NonConvergence {
                estimate: value,
                abs_error: error,
                requested: spec.target(value),
                subdivisions: splits,
            });
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid)?;
        let (v2, e2) = gk21(&mut f, mid, worst.b)?;
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        splits += 1;
    }
    // re-sum to shed accumulated cancellation from the running totals
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Integral {
        value,
        abs_error: error,
        evaluations,
    })
}

/// Integrates `f` over `interval` to the tolerance in `spec`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    interval: Interval,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    match interval {
        Interval::Finite(a, b) => {
            if a == b {
                return Ok(Integral {
                    value: 0.0,
                    abs_error: 0.0,
                    evaluations: 0,
                });
            }
            adaptive(f, &[a, b], spec)
        }
        Interval::SemiInfinite { start, scale } => {
            let mapped = |t: f64| {
                let one_minus = 1.0 - t;
                let x = start + scale * t / one_minus;
                let v = f(x);
                // integrand decays; an underflowed zero times a huge jacobian stays zero
                if v == 0.0 {
                    0.0
                } else {
                    v * scale / (one_minus * one_minus)
                }
            };
            adaptive(mapped, &[0.0, 1.0], spec)
        }
    }
}

/// Integrates over `[points[0], points[last]]`, seeding the adaptive pool
/// with the given breakpoints. `points` must be strictly increasing.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
    if points.len() < 2 {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    adaptive(f, points, spec)
}

/// Composite 21-point Kronrod node set over a partition of a finite range.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FixedRule {
    /// `panels` equal-width panels on `[a, b]`.
    pub fn uniform(a: f64, b: f64, panels: usize) -> Self {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let edges: Vec<f64> = (0..=panels).map(|i| a + width * i as f64).collect();
        Self::from_edges(&edges)
    }

    pub fn from_edges(edges: &[f64]) -> Self {
        let mut nodes = Vec::with_capacity(21 * edges.len());
        let mut weights = Vec::with_capacity(21 * edges.len());
        for w in edges.windows(2) {
            let center = 0.5 * (w[0] + w[1]);
            let half = 0.5 * (w[1] - w[0]);
            for j in 0..10 {
                nodes.push(center - half * XGK[j]);
                weights.push(half * WGK[j]);
                nodes.push(center + half * XGK[j]);
                weights.push(half * WGK[j]);
            }
            nodes.push(center);
            weights.push(half * WGK[10]);
        }
        FixedRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_on_unit_interval() {
        let r = integrate(|x| x, Interval::Finite(0.0, 1.0), &QuadratureSpec::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate(
            |x| (-x).exp(),
            Interval::semi_infinite(0.0),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn rayleigh_density_normalizes() {
        let lambda = 100.0;
        let r = integrate(
            |v| 2.0 * PI * lambda * v * (-PI * lambda * v * v).exp(),
            Interval::SemiInfinite {
                start: 0.0,
                scale: 0.05,
            },
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn nan_reports_abscissa() {
        let err = integrate(
            |x| if x > 0.5 { f64::NAN } else { x },
            Interval::Finite(0.0, 1.0),
            &QuadratureSpec::default(),
        )
        .unwrap_err();
        match err {
            QuadratureError::NotFinite { at } => assert!(at > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_convergence_carries_estimate() {
        let spec = QuadratureSpec::new(1e-14, 0.0).with_max_subdivisions(3);
        let err = integrate(|x| 1.0 / x.sqrt(), Interval::Finite(0.0, 1.0), &spec).unwrap_err();
        match err {
            QuadratureError::NonConvergence { estimate, .. } => {
                assert!((estimate - 2.0).abs() < 0.1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn breakpoints_match_plain_integral() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (3.0 * x).sin() + x * x;
        let a = integrate(f, Interval::Finite(0.0, 2.0), &spec).unwrap();
        let b = integrate_with_breakpoints(f, &[0.0, 0.3, 1.1, 2.0], &spec).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn fixed_rule_is_exact_for_polynomials() {
        let rule = FixedRule::uniform(-1.0, 3.0, 2);
        let v = rule.apply(|x| x.powi(7) - 2.0 * x.powi(3));
        let exact = (3f64.powi(8) - 1.0) / 8.0 - 2.0 * (3f64.powi(4) - 1.0) / 4.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
    }
}
