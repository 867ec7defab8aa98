use beamstab_core::bounds::{self, lambda_window, DecayBound, Regime};
use beamstab_core::problem::{mast, CoefficientField, Preset, SpatialFunction};
use beamstab_core::stepper::{self, Resolution, TimeStepRule};
use beamstab_core::{pipeline, CurvatureMode, Error};
use proptest::prelude::*;

fn acceptance() -> Resolution {
    Resolution::new(41, TimeStepRule::Ratio(40.0))
}

/// End-damper quotient recomputed from the dense mass matrix and raw levels.
#[test]
fn end_damper_quotient_matches_dense_recomputation() {
    let p = Preset::MastConstant.problem();
    let tr = stepper::run_at(&p, &Resolution::new(21, TimeStepRule::Ratio(10.0))).unwrap();
    let mass = tr.system.mass.to_dense();
    let n = mass.len();
    let h = tr.grid.step();
    let (m, k_a, k_v) = (1.0, p.boundary.k_a, p.boundary.k_v);
    let mut inf_tip = f64::INFINITY;
    let mut sup_norm: f64 = 0.0;
    for j in 1..tr.levels() - 1 {
        let v: Vec<f64> = (0..n).map(|i| (tr.dofs[j + 1][i] - tr.dofs[j - 1][i]) / (2.0 * h)).collect();
        let (vt, vxt) = (v[n - 2], v[n - 1]);
        inf_tip = inf_tip.min(k_a * k_a * vxt * vxt + k_v * k_v * vt * vt);
        let q: f64 = (0..n).map(|a| (0..n).map(|b| v[a] * mass[a][b] * v[b]).sum::<f64>()).sum();
        sup_norm = sup_norm.max(q / m);
    }
    let want = (inf_tip / (2.0 * m * sup_norm)).min(1.0 / bounds::beta_constants(&p).0);
    let w = lambda_window(&p, Some(&tr)).unwrap();
    assert_eq!(w.regime, Regime::EndDampersOnly);
    assert!(w.grid_proxy);
    assert!((w.lambda_max - want).abs() <= 1e-12 * want, "{} vs {want}", w.lambda_max);
    assert_eq!(lambda_window(&p, Some(&tr)).unwrap().lambda_max.to_bits(), w.lambda_max.to_bits());
}

#[test]
fn damped_presets_stay_inside_envelopes() {
    for preset in Preset::ALL {
        let p = preset.problem();
        let sim = pipeline::simulate(&p, &acceptance(), None, CurvatureMode::Basis).unwrap();
        let report = sim.bound.unwrap();
        let env = report.envelope.unwrap();
        assert_eq!(env.violations(), 0, "{preset}: {env:?}");
        assert!(env.first_violation().is_none());
    }
}

#[test]
fn regimes_per_preset() {
    let want = [
        (Preset::CantileverFree, Regime::DistributedDampingOnly),
        (Preset::CantileverSpring, Regime::DistributedDampingOnly),
        (Preset::CantileverDampers, Regime::DistributedDamping),
        (Preset::TestNe1, Regime::DistributedDamping),
    ];
    for (preset, regime) in want {
        assert_eq!(lambda_window(&preset.problem(), None).unwrap().regime, regime, "{preset}");
    }
    let p = Preset::MastConstant.problem();
    assert!(matches!(lambda_window(&p, None), Err(Error::NoAdmissibleLambda(_))));
}

#[test]
fn undamped_problem_has_no_window() {
    let p = mast(1.0, 1.0, 0.0, 0.0);
    match lambda_window(&p, None) {
        Err(Error::NoAdmissibleLambda(msg)) => assert!(msg.contains("k_a+k_v+μ₀>0"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let sim = pipeline::simulate(&p, &Resolution::new(11, TimeStepRule::Fixed(0.02)), None, CurvatureMode::Basis).unwrap();
    assert!(sim.bound.is_err());
    let json: serde_json::Value = serde_json::from_str(&sim.bounds_json().unwrap()).unwrap();
    assert!(json["error"].as_str().unwrap().contains("k_a+k_v+μ₀>0"));
}

#[test]
fn resting_mast_fails_velocity_condition() {
    let mut p = Preset::MastConstant.problem();
    p.initial.u0 = SpatialFunction::Polynomial(vec![0.0]);
    p.initial.u1 = SpatialFunction::Polynomial(vec![0.0]);
    let tr = stepper::run_at(&p, &Resolution::new(11, TimeStepRule::Fixed(0.05))).unwrap();
    assert!(matches!(lambda_window(&p, Some(&tr)), Err(Error::VelocityConditionFails { .. })));
}

#[test]
fn variable_coefficients_block_end_damper_window() {
    let mut p = Preset::MastConstant.problem();
    p.r = CoefficientField::Polynomial(vec![1.0, 0.5]);
    let tr = stepper::run_at(&p, &Resolution::new(11, TimeStepRule::Fixed(0.05))).unwrap();
    assert!(matches!(lambda_window(&p, Some(&tr)), Err(Error::NoAdmissibleLambda(_))));
}

#[test]
fn explicit_lambda_outside_window_is_rejected() {
    let p = Preset::TestNe1.problem();
    for l in [0.0, -0.1, 1.0, 2.0] {
        assert!(matches!(DecayBound::compute(&p, None, Some(l)), Err(Error::LambdaOutOfWindow { .. })), "{l}");
    }
    let b = DecayBound::compute(&p, None, Some(0.5)).unwrap();
    assert_eq!(b.lambda, 0.5);
}

#[test]
fn report_json_uses_wire_names() {
    let b = DecayBound::compute(&Preset::TestNe1.problem(), None, None).unwrap();
    let json: serde_json::Value = serde_json::from_str(&bounds::BoundReport::new(&b, None).unwrap().to_json().unwrap()).unwrap();
    assert_eq!(json["regime"], "theorem1");
    assert_eq!(json["scan"].as_array().unwrap().len(), bounds::REPORT_SCAN_POINTS);
    assert!(json["M_d"].is_number() && json["sigma"].is_number());
}

proptest! {
    #[test]
    fn bracket_and_decay_constants(
        rho in 0.1f64..10.0, mu in 0.01f64..10.0, r in 0.1f64..10.0, len in 0.2f64..3.0,
        k in proptest::array::uniform2(0.0f64..5.0), frac in 0.01f64..0.99,
    ) {
        let mut p = Preset::CantileverFree.problem();
        p.length = len;
        p.rho = CoefficientField::Constant(rho);
        p.mu = CoefficientField::Constant(mu);
        p.r = CoefficientField::Constant(r);
        p.boundary.k_a = k[0];
        p.boundary.k_v = k[1];
        let (b0, b1) = bounds::beta_constants(&p);
        prop_assert!(b0 > 0.0 && b1 >= b0);
        let w = lambda_window(&p, None).unwrap();
        prop_assert!(w.lambda_max <= 1.0 / b0 && w.lambda_max <= mu / (2.0 * rho) * (1.0 + 1e-15));
        let (m_d, sigma) = bounds::decay_estimate(b0, b1, frac * w.lambda_max).unwrap();
        prop_assert!(m_d >= 1.0 && sigma > 0.0);
        let scan = bounds::scan_lambda(b0, b1, w.lambda_max, 7).unwrap();
        prop_assert!(scan.windows(2).all(|s| s[1].lambda > s[0].lambda && s[1].m_d > s[0].m_d));
    }
}
