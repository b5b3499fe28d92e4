//! Dense matrix exponential, principal logarithm, and norms for the small
//! matrices (n ≤ 4) that back the concrete group roster.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Padé(13) numerator/denominator coefficients (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaling threshold for Padé(13), Higham Table 10.2.
const THETA13: f64 = 5.371920351148152;

/// 8-point Gauss-Legendre nodes/weights on [0, 1].
#[allow(clippy::excessive_precision)]
const GL8: [(f64, f64); 8] = [
    (0.019855071751231884, 0.05061426814518813),
    (0.10166676129318664, 0.11119051722668724),
    (0.2372337950418355, 0.15685332293894364),
    (0.40828267875217505, 0.18134189168918099),
    (0.5917173212478249, 0.18134189168918099),
    (0.7627662049581645, 0.15685332293894364),
    (0.8983332387068134, 0.11119051722668724),
    (0.9801449282487681, 0.05061426814518813),
];

/// Maximum column absolute sum.
pub fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |m, &s| m.max(s))
}

/// Matrix exponential by scaling-and-squaring with Padé(13).
///
/// Relative accuracy is at machine level for the well-scaled small matrices
/// this library works with (‖A‖ ≤ 10 or so).
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-s);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = &PADE13;
    let u = &a
        * (&a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2)
            + b[7] * &a6
            + b[5] * &a4
            + b[3] * &a2
            + b[1] * &id);
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2)
        + b[6] * &a6
        + b[4] * &a4
        + b[2] * &a2
        + b[0] * &id;
    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Padé denominator nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Principal square root by the Denman-Beavers iteration.
fn sqrtm_db(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..60 {
        let yi = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("singular iterate in matrix square root".into()))?;
        let zi = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("singular iterate in matrix square root".into()))?;
        let y_next = 0.5 * (&y + &zi);
        let z_next = 0.5 * (&z + &yi);
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * y.norm().max(1.0) {
            break;
        }
    }
    Ok(y)
}

/// Principal matrix logarithm by inverse scaling-and-squaring.
///
/// Square roots are taken until ‖A − I‖_F ≤ 0.1, then log(I + X) is evaluated
/// through the integral representation ∫₀¹ X(I + sX)⁻¹ ds with 8-point
/// Gauss-Legendre quadrature (exact to machine precision at that radius).
///
/// Callers are responsible for restricting to the principal branch's
/// guaranteed region (this library uses ‖A − I‖_op < 1).
pub fn logm_principal(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut t = a.clone();
    let mut k: i32 = 0;
    while (&t - &id).norm() > 0.1 {
        t = sqrtm_db(&t)?;
        k += 1;
        if k > 60 {
            return Err(Error::OutOfChartDomain(
                "matrix logarithm did not contract to the identity".into(),
            ));
        }
    }
    let x = &t - &id;
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for &(node, weight) in GL8.iter() {
        let den = &id + node * &x;
        let term = den
            .lu()
            .solve(&x)
            .ok_or_else(|| Error::Domain("singular quadrature denominator in log".into()))?;
        acc += weight * term;
    }
    Ok(acc * 2f64.powi(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn expm_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert!((expm(&z) - DMatrix::<f64>::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn expm_diagonal() {
        let a = dmatrix![1.0, 0.0; 0.0, -2.0];
        let e = expm(&a);
        assert!((e[(0, 0)] - 1f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (-2f64).exp()).abs() < 1e-14);
        assert!(e[(0, 1)].abs() < 1e-15 && e[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn expm_nilpotent_exact() {
        // exp of strictly upper triangular 3x3 terminates at second order.
        let a = dmatrix![0.0, 1.0, 3.0; 0.0, 0.0, 2.0; 0.0, 0.0, 0.0];
        let e = expm(&a);
        let expected = dmatrix![1.0, 1.0, 4.0; 0.0, 1.0, 2.0; 0.0, 0.0, 1.0];
        assert!((e - expected).norm() < 1e-14);
    }

    #[test]
    fn expm_rotation_matches_rodrigues() {
        let theta: f64 = 1.3;
        let a = dmatrix![0.0, -theta, 0.0; theta, 0.0, 0.0; 0.0, 0.0, 0.0];
        let e = expm(&a);
        let expected = dmatrix![
            theta.cos(), -theta.sin(), 0.0;
            theta.sin(), theta.cos(), 0.0;
            0.0, 0.0, 1.0
        ];
        assert!((e - expected).norm() < 1e-13);
    }

    #[test]
    fn expm_large_norm_scaling() {
        // ‖A‖ = 9 forces several squarings; compare against exp of eigenvalues.
        let a = dmatrix![9.0, 0.0; 0.0, -9.0];
        let e = expm(&a);
        assert!((e[(0, 0)] - 9f64.exp()).abs() / 9f64.exp() < 1e-13);
        assert!((e[(1, 1)] - (-9f64).exp()).abs() / (-9f64).exp() < 1e-12);
    }

    #[test]
    fn log_roundtrips_exp() {
        let a = dmatrix![0.0, -0.8, 0.2; 0.8, 0.0, -0.1; -0.2, 0.1, 0.0];
        let g = expm(&a);
        let back = logm_principal(&g).unwrap();
        assert!((back - a).norm() < 1e-12);
    }

    #[test]
    fn log_identity_is_zero() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert!(logm_principal(&id).unwrap().norm() < 1e-15);
    }

    #[test]
    fn op_norm_of_diag() {
        let a = dmatrix![3.0, 0.0; 0.0, -5.0];
        assert!((op_norm(&a) - 5.0).abs() < 1e-12);
    }
}
