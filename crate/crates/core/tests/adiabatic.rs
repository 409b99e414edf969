use holonomy_core::adiabatic::*;
use holonomy_core::controls::ControlPoint;
use holonomy_core::holonomy::{Loop, Plane};
use holonomy_core::jc::{JcParams, PairParams, TrapModel};
use holonomy_core::Error;

fn single() -> TrapModel {
    TrapModel::Single(JcParams::resonant(1.0))
}

#[test]
fn default_loop_at_moderate_speed() {
    let s = Schedule::new(default_loop(), 200.0, Ramp::Smooth).unwrap();
    let r = evolve(&s, &single(), MIN_LEVELS_ONE, LEAKAGE_BUDGET).unwrap();
    assert!(r.distance_to_transport <= 0.15, "{}", r.distance_to_transport);
    assert!(r.leakage <= LEAKAGE_BUDGET);
    assert!(r.norm_drift <= NORM_TOL);
    assert!(r.holonomy.residual_nonunitarity < 1e-3);
}

#[test]
fn out_and_back_line_approaches_identity() {
    let lp = Loop::on_plane(Plane::CI, &[(0.0, 0.0), (0.5, 0.0)]).unwrap();
    let d: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&t| {
            let s = Schedule::new(lp.clone(), t, Ramp::Smooth).unwrap();
            evolve(&s, &single(), MIN_LEVELS_ONE, LEAKAGE_BUDGET).unwrap().distance_to_transport
        })
        .collect();
    assert!(d[1] < d[0] && d[2] < d[1]);
    assert!(d[2] < 0.05);
}

#[test]
fn static_loop_two_qubits() {
    let lp = Loop::stationary(ControlPoint::origin(2), 2).unwrap();
    let s = Schedule::new(lp, 2.0, Ramp::Uniform).unwrap();
    let r = evolve(&s, &TrapModel::Pair(PairParams::resonant(1.0)), MIN_LEVELS_TWO, LEAKAGE_BUDGET).unwrap();
    assert!(r.distance_to_transport < 1e-10);
}

#[test]
fn two_qubit_loop_follows_transport() {
    let lp = Loop::rectangle(Plane::CIII, (0.0, 0.4), (0.0, 0.5)).unwrap();
    let s = Schedule::new(lp, 100.0, Ramp::Smooth).unwrap();
    let r = evolve(&s, &TrapModel::Pair(PairParams::resonant(1.0)), MIN_LEVELS_TWO, LEAKAGE_BUDGET).unwrap();
    assert!(r.distance_to_transport < 0.15, "{}", r.distance_to_transport);
    assert!(r.truncation_population < 1e-6);
}

#[test]
fn preconditions() {
    let far = Loop::rectangle(Plane::CI, (0.0, 0.5), (0.0, 1.5)).unwrap();
    let s = Schedule::new(far, 10.0, Ramp::Smooth).unwrap();
    assert!(matches!(evolve(&s, &single(), 150, 1.0), Err(Error::InvalidSchedule(_))));
    let s = Schedule::new(default_loop(), 10.0, Ramp::Smooth).unwrap();
    assert!(matches!(evolve(&s, &single(), 60, 1.0), Err(Error::Truncation(_))));
    assert!(matches!(evolve(&s, &single(), 150, 1e-9), Err(Error::LeakageExceeded { .. })));
    let off = TrapModel::Single(JcParams::new(1.0, 0.8, -0.5).unwrap());
    assert!(matches!(evolve(&s, &off, 150, 1.0), Err(Error::NotResonant { .. })));
    let rows = vec![];
    assert!(ScalingStudy::from_rows(Ramp::Smooth, rows).is_err());
}
