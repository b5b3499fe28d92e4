//! Measured convergence orders of the two steppers against a fine reference.

use std::sync::Arc;

use nalgebra::DVector;

use prodint::curve::PiecewiseCurve;
use prodint::engine::{evolve, Scheme, StepperConfig};
use prodint::group::GroupKind;

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn test_curve() -> PiecewiseCurve {
    PiecewiseCurve::new(
        GroupKind::So3,
        vec![0.0, 1.0],
        vec![Arc::new(|t: f64| {
            let (x, y, z) = ((1.7 * t).sin(), 0.3 * t, (0.9 * t).cos());
            // hat map, row-major
            DVector::from_row_slice(&[0.0, -z, y, z, 0.0, -x, -y, x, 0.0])
        })],
    )
    .unwrap()
}

fn measured_order(scheme: Scheme) -> f64 {
    let phi = test_curve();
    let reference = evolve(
        &phi,
        0.0,
        1.0,
        &StepperConfig::default().with_steps(1 << 15),
    )
    .unwrap()
    .endpoint;
    let refm = reference.rep.as_matrix().unwrap().clone();
    let points: Vec<(f64, f64)> = (6..=9)
        .map(|k| {
            let steps = 1usize << k;
            let cfg = StepperConfig::default()
                .with_scheme(scheme)
                .with_steps(steps);
            let end = evolve(&phi, 0.0, 1.0, &cfg).unwrap().endpoint;
            let err = (end.rep.as_matrix().unwrap() - &refm).norm();
            ((steps as f64).ln(), err.ln())
        })
        .collect();
    -fit_slope(&points)
}

#[test]
fn left_euler_is_first_order() {
    let order = measured_order(Scheme::LeftEuler);
    assert!((order - 1.0).abs() <= 0.3, "measured order {order}");
}

#[test]
fn midpoint_is_second_order() {
    let order = measured_order(Scheme::Midpoint);
    assert!((order - 2.0).abs() <= 0.3, "measured order {order}");
}
