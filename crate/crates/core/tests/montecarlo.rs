use udn_core::load::{prob_active, LoadModel};
use udn_core::montecarlo::{simulate_active_fraction, simulate_sinr, SimConfig};
use udn_core::propagation::{LosProbabilityModel, PathLossParams};
use udn_core::sinr::{db_to_linear, CoverageModel, Scenario, Tolerances};

fn compare(s: Scenario, drops: usize) {
    let ys: Vec<f64> = [-10.0, 0.0, 10.0, 20.0].iter().map(|&d| db_to_linear(d)).collect();
    let analytic = CoverageModel::with_tolerances(s, Tolerances::sweep())
        .unwrap()
        .ccdf_curve(&ys)
        .unwrap();
    let sim = simulate_sinr(&SimConfig::new(s, drops, 3).with_thresholds(&ys)).unwrap();
    for (a, p) in analytic.values.iter().zip(&sim.ccdf) {
        // sampling noise plus a small model allowance
        assert!((a - p.value).abs() <= 2.0 * p.half_width + 0.003, "{}: {a} vs {p:?}", s.summary());
    }
}

#[test]
fn simulator_agrees_with_analysis_at_full_load() {
    let s = Scenario::new(300.0, PathLossParams::urban_pico(), LosProbabilityModel::ExpSquare { scale: 0.0825 });
    compare(s, 20_000);
}

#[test]
fn simulator_agrees_with_analysis_under_reuse() {
    let s = Scenario::new(100.0, PathLossParams::urban_pico(), LosProbabilityModel::ThreeGpp { d0: 0.156, d1: 0.03 })
        .with_load(LoadModel::FrequencyReuse { reuse: 3 });
    compare(s, 20_000);
}

#[test]
fn simulator_agrees_for_single_slope() {
    let s = Scenario::new(50.0, PathLossParams::urban_single_slope(), LosProbabilityModel::Constant { p: 1.0 });
    compare(s, 20_000);
}

#[test]
fn active_fraction_matches_formula() {
    let f = simulate_active_fraction(500.0, 1000.0, None, 2000, 9).unwrap();
    assert!((f.value - prob_active(500.0, 1000.0)).abs() <= 3.0 * f.half_width + 0.002, "{f:?}");
}

#[test]
fn doubling_the_disk_leaves_the_ccdf_within_sampling_noise() {
    let s = Scenario::new(300.0, PathLossParams::urban_pico(), LosProbabilityModel::Exp { scale: 0.0825 });
    let ys: Vec<f64> = [-10.0, 0.0, 10.0, 20.0].iter().map(|&d| db_to_linear(d)).collect();
    let base = SimConfig::new(s, 10_000, 5).with_thresholds(&ys);
    let r = base.effective_radius().unwrap();
    let a = simulate_sinr(&base).unwrap();
    let b = simulate_sinr(&base.clone().with_disk_radius(2.0 * r)).unwrap();
    for (p, q) in a.ccdf.iter().zip(&b.ccdf) {
        // 95% interval of the difference of two independent estimates
        let hw = p.half_width.hypot(q.half_width);
        assert!((p.value - q.value).abs() <= hw, "{p:?} vs {q:?}");
    }
}
