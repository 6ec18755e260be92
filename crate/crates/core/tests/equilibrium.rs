use rmt_lab::equilibrium::{
    fit_exponent, log_potential, mass, verify_variational, Endpoint, Equilibrium, Measure,
};
use rmt_lab::ModelParams;

const SWEEP: [(f64, f64); 4] = [(1.0, 2.0), (0.5, 3.0), (2.0, 2.1), (0.1, 1.0)];

#[test]
fn mass_triple_across_sweep() {
    for (a, b) in SWEEP {
        let p = ModelParams::curve(a, b).unwrap();
        let m1 = mass(&p, Measure::Mu1).unwrap();
        let m2 = mass(&p, Measure::Mu2).unwrap();
        let m3 = mass(&p, Measure::Mu3).unwrap();
        assert!((2.0 * m1 - 1.0).abs() < 1e-4, "({a},{b}) mu1 {m1}");
        assert!((m2 - 1.0).abs() < 1e-8, "({a},{b}) mu2 {m2}");
        assert!((2.0 * m3 - 1.0).abs() < 1e-6, "({a},{b}) mu3 {m3}");
    }
}

#[test]
fn exponents_across_sweep() {
    for (a, b) in SWEEP {
        let eq = Equilibrium::new(&ModelParams::curve(a, b).unwrap()).unwrap();
        let zero2 = fit_exponent(&eq, Measure::Mu2, Endpoint::Zero).unwrap();
        let zero3 = fit_exponent(&eq, Measure::Mu3, Endpoint::Zero).unwrap();
        let edge = fit_exponent(&eq, Measure::Mu2, Endpoint::P).unwrap();
        let q = fit_exponent(&eq, Measure::SigmaMinusMu1, Endpoint::MinusQ).unwrap();
        assert!((-0.677..=-0.657).contains(&zero2), "({a},{b}) {zero2}");
        assert!((-0.677..=-0.657).contains(&zero3), "({a},{b}) {zero3}");
        assert!((0.49..=0.51).contains(&edge), "({a},{b}) {edge}");
        assert!((0.48..=0.52).contains(&q), "({a},{b}) {q}");
    }
}

#[test]
fn balayage_equivalence_across_sweep() {
    for (a, b) in SWEEP {
        let eq = Equilibrium::new(&ModelParams::curve(a, b).unwrap()).unwrap();
        for k in 0..8 {
            let x = -eq.q * 10f64.powf(-3.0 + 6.0 * k as f64 / 7.0);
            let direct = eq.density(Measure::Mu3, x).unwrap();
            let swept = eq.density_mu3_balayage(x).unwrap();
            assert!((direct - swept).abs() < 1e-6 * direct, "({a},{b}) x={x}: {direct} {swept}");
        }
    }
}

#[test]
fn positivity_on_log_grids() {
    for (a, b) in SWEEP {
        let eq = Equilibrium::new(&ModelParams::curve(a, b).unwrap()).unwrap();
        for k in 1..60 {
            let u = k as f64 / 60.0;
            assert!(eq.density(Measure::Mu2, eq.p * u).unwrap() >= -1e-12);
            let x = -10f64.powf(-6.0 + 10.0 * u);
            for m in [Measure::Mu1, Measure::Mu3, Measure::SigmaMinusMu1] {
                assert!(eq.density(m, x).unwrap() >= -1e-12, "({a},{b}) {m} at {x}");
            }
        }
    }
}

#[test]
fn equality_on_delta1() {
    let p = ModelParams::curve(1.0, 2.0).unwrap();
    let q = Equilibrium::new(&p).unwrap().q;
    let x = -2.0 * q;
    let r = 2.0 * log_potential(&p, Measure::Mu1, x).unwrap() - log_potential(&p, Measure::Mu2, x).unwrap();
    assert!(r.abs() < 1e-4, "{r}");
}

#[test]
fn variational_conditions_hold() {
    for (a, b) in [(1.0, 2.0), (0.5, 3.0)] {
        let p = ModelParams::curve(a, b).unwrap();
        let report = verify_variational(&p).unwrap();
        assert!(report.relative_spread() < 1e-4, "({a},{b}) {report:?}");
        assert!(report.inequality_margins.iter().all(|m| m.1 > 0.0));
        assert!(report.balayage_residuals.iter().all(|r| r.1.abs() < 1e-4));
    }
}
