//! The Lie group interface and the concrete desk-scale roster.
//!
//! Every group exposes multiplication, inversion, the exponential, the chart
//! around the identity (an exponential chart, so the algebra is literally the
//! model space), and the adjoint action. The roster spans abelian, nilpotent,
//! compact and non-compact cases plus a diagonal-operator proxy for a
//! seminorm-laddered sequence space:
//!
//! - `gl2`/`gl3`/`gl4`: invertible matrices,
//! - `so3`: rotations,
//! - `se3`: rigid motions in 4×4 homogeneous form,
//! - `heis3`: upper unitriangular 3×3 (Heisenberg),
//! - `ut3`: upper triangular with positive diagonal,
//! - `abelian:D`: the additive group of the length-D sequence space,
//! - `diagop:D`: positive diagonal operators on the same space.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{expm, logm_principal, op_norm};
use crate::model::{ModelVector, SpaceId};

/// Chart domain radius for matrix groups: ‖g − I‖_op below this keeps the
/// principal logarithm on its guaranteed branch.
pub const CHART_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Gl(usize),
    So3,
    Se3,
    Heis3,
    Ut3,
    Abelian(usize),
    DiagOp(usize),
}

/// Underlying representation of a group element or a tangent value.
#[derive(Debug, Clone, PartialEq)]
pub enum Rep {
    Matrix(DMatrix<f64>),
    Vector(DVector<f64>),
}

impl Rep {
    pub fn as_matrix(&self) -> Result<&DMatrix<f64>> {
        match self {
            Rep::Matrix(m) => Ok(m),
            Rep::Vector(_) => Err(Error::Contract("expected matrix representation".into())),
        }
    }

    pub fn as_vector(&self) -> Result<&DVector<f64>> {
        match self {
            Rep::Vector(v) => Ok(v),
            Rep::Matrix(_) => Err(Error::Contract("expected vector representation".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub group: GroupKind,
    pub rep: Rep,
}

/// Lie algebra element in model-space coordinates (𝔤 identified with E
/// through the exponential chart's differential, which is the identity).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub group: GroupKind,
    pub coords: ModelVector,
}

impl AlgebraElement {
    pub fn new(group: GroupKind, coords: ModelVector) -> Result<Self> {
        if coords.space != group.model_space() {
            return Err(Error::SpaceMismatch {
                expected: group.model_space().to_string(),
                got: coords.space.to_string(),
            });
        }
        Ok(AlgebraElement { group, coords })
    }

    pub fn zero(group: GroupKind) -> Self {
        AlgebraElement {
            group,
            coords: ModelVector::zero(group.model_space()),
        }
    }

    pub fn from_matrix(group: GroupKind, m: &DMatrix<f64>) -> Self {
        AlgebraElement {
            group,
            coords: ModelVector::from_matrix(m),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        AlgebraElement {
            group: self.group,
            coords: self.coords.scale(c),
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<Self> {
        check_group(self.group, other.group)?;
        Ok(AlgebraElement {
            group: self.group,
            coords: self.coords.add(&other.coords)?,
        })
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<Self> {
        check_group(self.group, other.group)?;
        Ok(AlgebraElement {
            group: self.group,
            coords: self.coords.sub(&other.coords)?,
        })
    }
}

fn check_group(a: GroupKind, b: GroupKind) -> Result<()> {
    if a != b {
        return Err(Error::GroupMismatch {
            expected: a.to_string(),
            got: b.to_string(),
        });
    }
    Ok(())
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GroupKind::Gl(n) => write!(f, "gl{n}"),
            GroupKind::So3 => write!(f, "so3"),
            GroupKind::Se3 => write!(f, "se3"),
            GroupKind::Heis3 => write!(f, "heis3"),
            GroupKind::Ut3 => write!(f, "ut3"),
            GroupKind::Abelian(d) => write!(f, "abelian:{d}"),
            GroupKind::DiagOp(d) => write!(f, "diagop:{d}"),
        }
    }
}

impl GroupKind {
    /// Parse a registry id such as "so3", "gl2", "abelian:8", "diagop:16".
    pub fn parse(id: &str) -> Result<Self> {
        let err = || Error::Config(format!("unknown group id: {id}"));
        if let Some(d) = id.strip_prefix("abelian:") {
            let d: usize = d.parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            return Ok(GroupKind::Abelian(d));
        }
        if let Some(d) = id.strip_prefix("diagop:") {
            let d: usize = d.parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            return Ok(GroupKind::DiagOp(d));
        }
        match id {
            "gl2" => Ok(GroupKind::Gl(2)),
            "gl3" => Ok(GroupKind::Gl(3)),
            "gl4" => Ok(GroupKind::Gl(4)),
            "so3" => Ok(GroupKind::So3),
            "se3" => Ok(GroupKind::Se3),
            "heis3" => Ok(GroupKind::Heis3),
            "ut3" => Ok(GroupKind::Ut3),
            _ => Err(err()),
        }
    }

    pub fn model_space(&self) -> SpaceId {
        match *self {
            GroupKind::Gl(n) => SpaceId::Mat(n),
            GroupKind::So3 | GroupKind::Heis3 | GroupKind::Ut3 => SpaceId::Mat(3),
            GroupKind::Se3 => SpaceId::Mat(4),
            GroupKind::Abelian(d) | GroupKind::DiagOp(d) => SpaceId::Seq(d),
        }
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self, GroupKind::Abelian(_) | GroupKind::DiagOp(_))
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self.model_space(), SpaceId::Mat(_))
    }

    fn matrix_dim(&self) -> usize {
        match self.model_space() {
            SpaceId::Mat(n) => n,
            SpaceId::Seq(_) => 0,
        }
    }

    /// Dimension of the Lie algebra in minimal coordinates.
    pub fn algebra_dim(&self) -> usize {
        match *self {
            GroupKind::Gl(n) => n * n,
            GroupKind::So3 => 3,
            GroupKind::Se3 => 6,
            GroupKind::Heis3 => 3,
            GroupKind::Ut3 => 6,
            GroupKind::Abelian(d) | GroupKind::DiagOp(d) => d,
        }
    }

    pub fn identity(&self) -> GroupElement {
        let rep = match *self {
            GroupKind::Abelian(d) => Rep::Vector(DVector::zeros(d)),
            GroupKind::DiagOp(d) => Rep::Vector(DVector::from_element(d, 1.0)),
            _ => Rep::Matrix(DMatrix::identity(self.matrix_dim(), self.matrix_dim())),
        };
        GroupElement { group: *self, rep }
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        check_group(*self, g.group)?;
        check_group(*self, h.group)?;
        let rep = match *self {
            GroupKind::Abelian(_) => Rep::Vector(g.rep.as_vector()? + h.rep.as_vector()?),
            GroupKind::DiagOp(_) => {
                Rep::Vector(g.rep.as_vector()?.component_mul(h.rep.as_vector()?))
            }
            _ => Rep::Matrix(g.rep.as_matrix()? * h.rep.as_matrix()?),
        };
        Ok(GroupElement { group: *self, rep })
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        check_group(*self, g.group)?;
        let rep = match *self {
            GroupKind::Abelian(_) => Rep::Vector(-g.rep.as_vector()?.clone()),
            GroupKind::DiagOp(_) => Rep::Vector(g.rep.as_vector()?.map(|d| 1.0 / d)),
            GroupKind::So3 => Rep::Matrix(g.rep.as_matrix()?.transpose()),
            _ => Rep::Matrix(
                g.rep
                    .as_matrix()?
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::Domain("singular group element".into()))?,
            ),
        };
        Ok(GroupElement { group: *self, rep })
    }

    pub fn exp(&self, x: &AlgebraElement) -> Result<GroupElement> {
        check_group(*self, x.group)?;
        let rep = match *self {
            GroupKind::Abelian(_) => Rep::Vector(x.coords.coords.clone()),
            GroupKind::DiagOp(_) => Rep::Vector(x.coords.coords.map(f64::exp)),
            _ => Rep::Matrix(expm(&x.coords.as_matrix()?)),
        };
        Ok(GroupElement { group: *self, rep })
    }

    /// Chart κ around the identity with κ(e) = 0: the principal logarithm for
    /// matrix groups, the identity map for `abelian`, elementwise log for
    /// `diagop`. Returns `OutOfChartDomain` when `g` leaves the guaranteed
    /// principal-branch region.
    pub fn chart_forward(&self, g: &GroupElement) -> Result<ModelVector> {
        check_group(*self, g.group)?;
        match *self {
            GroupKind::Abelian(d) => ModelVector::new(SpaceId::Seq(d), g.rep.as_vector()?.clone()),
            GroupKind::DiagOp(d) => {
                let v = g.rep.as_vector()?;
                if v.iter().any(|&x| (x - 1.0).abs() >= CHART_RADIUS) {
                    return Err(Error::OutOfChartDomain(format!(
                        "diagonal entry outside (0, 2) perturbation band on {self}"
                    )));
                }
                ModelVector::new(SpaceId::Seq(d), v.map(f64::ln))
            }
            _ => {
                let m = g.rep.as_matrix()?;
                let n = m.nrows();
                let dist = op_norm(&(m - DMatrix::<f64>::identity(n, n)));
                if dist >= CHART_RADIUS {
                    return Err(Error::OutOfChartDomain(format!(
                        "‖g - I‖_op = {dist:.6} ≥ {CHART_RADIUS} on {self}"
                    )));
                }
                Ok(ModelVector::from_matrix(&logm_principal(m)?))
            }
        }
    }

    /// κ⁻¹: the exponential of the coordinate vector (exponential charts).
    pub fn chart_backward(&self, v: &ModelVector) -> Result<GroupElement> {
        self.exp(&AlgebraElement::new(*self, v.clone())?)
    }

    /// Adjoint action Ad_g(X) = g·X·g⁻¹ for matrix groups; trivial for the
    /// abelian and diagonal groups.
    pub fn adjoint(&self, g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
        check_group(*self, g.group)?;
        check_group(*self, x.group)?;
        if self.is_abelian() {
            return Ok(x.clone());
        }
        let gm = g.rep.as_matrix()?;
        let gi = self.inverse(g)?;
        let result = gm * x.coords.as_matrix()? * gi.rep.as_matrix()?;
        Ok(AlgebraElement::from_matrix(*self, &result))
    }

    /// Lie bracket [X, Y] in algebra coordinates.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        check_group(*self, x.group)?;
        check_group(*self, y.group)?;
        if self.is_abelian() {
            return Ok(AlgebraElement::zero(*self));
        }
        let xm = x.coords.as_matrix()?;
        let ym = y.coords.as_matrix()?;
        Ok(AlgebraElement::from_matrix(*self, &(&xm * &ym - &ym * &xm)))
    }

    /// Membership check; returns the list of violated invariants (empty for a
    /// valid element).
    pub fn validate(&self, g: &GroupElement) -> Vec<String> {
        let mut violations = Vec::new();
        if g.group != *self {
            violations.push("group-mismatch".into());
            return violations;
        }
        let finite = match &g.rep {
            Rep::Matrix(m) => m.iter().all(|x| x.is_finite()),
            Rep::Vector(v) => v.iter().all(|x| x.is_finite()),
        };
        if !finite {
            violations.push("non-finite".into());
            return violations;
        }
        match *self {
            GroupKind::Abelian(_) => {}
            GroupKind::DiagOp(_) => {
                let v = g.rep.as_vector().unwrap();
                if v.iter().any(|&x| x <= 0.0) {
                    violations.push("non-positive-diagonal".into());
                }
            }
            GroupKind::Gl(_) => {
                let m = g.rep.as_matrix().unwrap();
                let sv = m.clone().svd(false, false).singular_values;
                let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
                let smin = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                if smin == 0.0 {
                    violations.push("singular".into());
                } else if smax / smin > 1e12 {
                    violations.push("near-singular".into());
                }
            }
            GroupKind::So3 => {
                let m = g.rep.as_matrix().unwrap();
                let ortho = (m.transpose() * m - DMatrix::<f64>::identity(3, 3)).norm();
                if ortho > 1e-10 {
                    violations.push("orthogonality".into());
                }
                if m.determinant() <= 0.0 {
                    violations.push("orientation".into());
                }
            }
            GroupKind::Se3 => {
                let m = g.rep.as_matrix().unwrap();
                let bottom =
                    m[(3, 0)].abs() + m[(3, 1)].abs() + m[(3, 2)].abs() + (m[(3, 3)] - 1.0).abs();
                if bottom > 1e-10 {
                    violations.push("homogeneous-row".into());
                }
                let r = m.view((0, 0), (3, 3)).into_owned();
                if (r.transpose() * &r - DMatrix::<f64>::identity(3, 3)).norm() > 1e-10 {
                    violations.push("rotation-orthogonality".into());
                }
                if r.determinant() <= 0.0 {
                    violations.push("rotation-orientation".into());
                }
            }
            GroupKind::Heis3 => {
                let m = g.rep.as_matrix().unwrap();
                let diag_err = (m[(0, 0)] - 1.0)
                    .abs()
                    .max((m[(1, 1)] - 1.0).abs())
                    .max((m[(2, 2)] - 1.0).abs());
                let lower = m[(1, 0)].abs().max(m[(2, 0)].abs()).max(m[(2, 1)].abs());
                if diag_err > 1e-10 {
                    violations.push("unit-diagonal".into());
                }
                if lower > 1e-10 {
                    violations.push("lower-triangle".into());
                }
            }
            GroupKind::Ut3 => {
                let m = g.rep.as_matrix().unwrap();
                let lower = m[(1, 0)].abs().max(m[(2, 0)].abs()).max(m[(2, 1)].abs());
                if lower > 1e-10 {
                    violations.push("lower-triangle".into());
                }
                if m[(0, 0)] <= 0.0 || m[(1, 1)] <= 0.0 || m[(2, 2)] <= 0.0 {
                    violations.push("diagonal-positivity".into());
                }
            }
        }
        violations
    }

    /// Build an algebra element from minimal coordinates:
    /// - `gl{n}`: n² matrix entries (row-major),
    /// - `so3`: rotation axis (x, y, z),
    /// - `se3`: (ωx, ωy, ωz, vx, vy, vz),
    /// - `heis3`: entries (0,1), (1,2), (0,2),
    /// - `ut3`: diag (0,0),(1,1),(2,2) then (0,1),(1,2),(0,2),
    /// - `abelian:D` / `diagop:D`: the D coordinates.
    pub fn algebra_from_minimal(&self, c: &[f64]) -> Result<AlgebraElement> {
        if c.len() != self.algebra_dim() {
            return Err(Error::Config(format!(
                "{self} expects {} algebra coordinates, got {}",
                self.algebra_dim(),
                c.len()
            )));
        }
        let mv = match *self {
            GroupKind::Gl(n) => ModelVector::new(SpaceId::Mat(n), DVector::from_row_slice(c))?,
            GroupKind::So3 => ModelVector::from_matrix(&DMatrix::from_row_slice(
                3,
                3,
                &[0.0, -c[2], c[1], c[2], 0.0, -c[0], -c[1], c[0], 0.0],
            )),
            GroupKind::Se3 => ModelVector::from_matrix(&DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, -c[2], c[1], c[3], c[2], 0.0, -c[0], c[4], -c[1], c[0], 0.0, c[5], 0.0,
                    0.0, 0.0, 0.0,
                ],
            )),
            GroupKind::Heis3 => ModelVector::from_matrix(&DMatrix::from_row_slice(
                3,
                3,
                &[0.0, c[0], c[2], 0.0, 0.0, c[1], 0.0, 0.0, 0.0],
            )),
            GroupKind::Ut3 => ModelVector::from_matrix(&DMatrix::from_row_slice(
                3,
                3,
                &[c[0], c[3], c[5], 0.0, c[1], c[4], 0.0, 0.0, c[2]],
            )),
            GroupKind::Abelian(d) | GroupKind::DiagOp(d) => {
                ModelVector::new(SpaceId::Seq(d), DVector::from_row_slice(c))?
            }
        };
        AlgebraElement::new(*self, mv)
    }

    /// All registry ids of the fixed roster (parametric families at their
    /// default truncation D = 16, plus abelian:4/abelian:8 used in examples).
    pub fn roster() -> Vec<String> {
        vec![
            "abelian:16".into(),
            "abelian:4".into(),
            "abelian:8".into(),
            "diagop:16".into(),
            "gl2".into(),
            "gl3".into(),
            "gl4".into(),
            "heis3".into(),
            "se3".into(),
            "so3".into(),
            "ut3".into(),
        ]
    }
}

impl GroupElement {
    /// Distance from another element measured as the Frobenius norm of the
    /// representation difference. Convenience for tests and validation.
    pub fn rep_distance(&self, other: &GroupElement) -> f64 {
        match (&self.rep, &other.rep) {
            (Rep::Matrix(a), Rep::Matrix(b)) => (a - b).norm(),
            (Rep::Vector(a), Rep::Vector(b)) => (a - b).norm(),
            _ => f64::INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Rodrigues closed form, the independent oracle for SO(3) exponentials.
    pub fn rodrigues(axis: [f64; 3]) -> DMatrix<f64> {
        let theta = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let k = DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0, -axis[2], axis[1], axis[2], 0.0, -axis[0], -axis[1], axis[0], 0.0,
            ],
        );
        let id = DMatrix::<f64>::identity(3, 3);
        if theta < 1e-300 {
            return id;
        }
        &id + (theta.sin() / theta) * &k + ((1.0 - theta.cos()) / (theta * theta)) * (&k * &k)
    }

    fn rz(angle: f64) -> GroupElement {
        GroupElement {
            group: GroupKind::So3,
            rep: Rep::Matrix(rodrigues([0.0, 0.0, angle])),
        }
    }

    #[test]
    fn identity_is_neutral() {
        let g = rz(0.37);
        let so3 = GroupKind::So3;
        let e = so3.identity();
        assert!(so3.multiply(&e, &g).unwrap().rep_distance(&g) < 1e-15);
        assert!(so3.multiply(&g, &e).unwrap().rep_distance(&g) < 1e-15);
        let gi = so3.inverse(&g).unwrap();
        assert!(so3.multiply(&g, &gi).unwrap().rep_distance(&e) < 1e-12);
    }

    #[test]
    fn rotation_composition_closed_form() {
        let so3 = GroupKind::So3;
        let prod = so3.multiply(&rz(0.3), &rz(0.4)).unwrap();
        assert!(prod.rep_distance(&rz(0.7)) < 1e-12);
    }

    #[test]
    fn abelian_multiply_is_addition() {
        let g = GroupKind::Abelian(4);
        let v = GroupElement {
            group: g,
            rep: Rep::Vector(DVector::from_row_slice(&[1.0, 2.0, 3.0, 4.0])),
        };
        let w = GroupElement {
            group: g,
            rep: Rep::Vector(DVector::from_row_slice(&[0.5, -1.0, 0.0, 2.0])),
        };
        let sum = g.multiply(&v, &w).unwrap();
        assert_eq!(
            sum.rep.as_vector().unwrap(),
            &DVector::from_row_slice(&[1.5, 1.0, 3.0, 6.0])
        );
    }

    #[test]
    fn exp_zero_is_identity() {
        for id in ["so3", "gl2", "heis3", "ut3", "se3", "abelian:4", "diagop:4"] {
            let g = GroupKind::parse(id).unwrap();
            let e = g.exp(&AlgebraElement::zero(g)).unwrap();
            assert!(e.rep_distance(&g.identity()) < 1e-15, "{id}");
        }
    }

    #[test]
    fn so3_exp_matches_rodrigues() {
        let so3 = GroupKind::So3;
        let theta = std::f64::consts::FRAC_PI_2;
        let x = so3.algebra_from_minimal(&[0.0, 0.0, theta]).unwrap();
        let g = so3.exp(&x).unwrap();
        let oracle = rodrigues([0.0, 0.0, theta]);
        assert!((g.rep.as_matrix().unwrap() - oracle).norm() < 1e-12);
    }

    #[test]
    fn abelian_exp_is_identity_map() {
        let g = GroupKind::Abelian(4);
        let x = g.algebra_from_minimal(&[1.0, -2.0, 0.5, 3.0]).unwrap();
        let e = g.exp(&x).unwrap();
        assert_eq!(e.rep.as_vector().unwrap(), &x.coords.coords);
    }

    #[test]
    fn chart_of_identity_is_zero() {
        for id in ["so3", "gl2", "heis3", "ut3", "se3", "abelian:4", "diagop:4"] {
            let g = GroupKind::parse(id).unwrap();
            let v = g.chart_forward(&g.identity()).unwrap();
            assert!(v.coords.norm() < 1e-14, "{id}");
        }
    }

    #[test]
    fn chart_of_rotation_is_axis() {
        let so3 = GroupKind::So3;
        let v = so3.chart_forward(&rz(0.5)).unwrap();
        let expected = so3.algebra_from_minimal(&[0.0, 0.0, 0.5]).unwrap();
        assert!((v.coords - expected.coords.coords).norm() < 1e-12);
    }

    #[test]
    fn chart_rejects_far_rotation() {
        // rotation by 2.5 rad: ‖R − I‖_op = 2 sin(1.25) > 1
        assert!(matches!(
            GroupKind::So3.chart_forward(&rz(2.5)),
            Err(Error::OutOfChartDomain(_))
        ));
    }

    #[test]
    fn chart_backward_is_exp() {
        let so3 = GroupKind::So3;
        let x = so3.algebra_from_minimal(&[0.1, -0.2, 0.15]).unwrap();
        let a = so3.chart_backward(&x.coords).unwrap();
        let b = so3.exp(&x).unwrap();
        assert!(a.rep_distance(&b) < 1e-15);
    }

    #[test]
    fn adjoint_rotates_the_axis() {
        let so3 = GroupKind::So3;
        let g = rz(std::f64::consts::FRAC_PI_2);
        let x_gen = so3.algebra_from_minimal(&[1.0, 0.0, 0.0]).unwrap();
        let y_gen = so3.algebra_from_minimal(&[0.0, 1.0, 0.0]).unwrap();
        let rotated = so3.adjoint(&g, &x_gen).unwrap();
        assert!((rotated.coords.coords - y_gen.coords.coords).norm() < 1e-12);
    }

    #[test]
    fn adjoint_trivial_cases() {
        let so3 = GroupKind::So3;
        let x = so3.algebra_from_minimal(&[0.3, 0.1, -0.2]).unwrap();
        let adj = so3.adjoint(&so3.identity(), &x).unwrap();
        assert!((adj.coords.coords.clone() - x.coords.coords.clone()).norm() < 1e-15);

        let ab = GroupKind::Abelian(4);
        let xa = ab.algebra_from_minimal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let ga = GroupElement {
            group: ab,
            rep: Rep::Vector(DVector::from_row_slice(&[9.0, 9.0, 9.0, 9.0])),
        };
        assert_eq!(ab.adjoint(&ga, &xa).unwrap(), xa);
    }

    #[test]
    fn validate_flags_reflection_and_near_singular() {
        let so3 = GroupKind::So3;
        let refl = GroupElement {
            group: so3,
            rep: Rep::Matrix(DMatrix::from_row_slice(
                3,
                3,
                &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0],
            )),
        };
        assert_eq!(so3.validate(&refl), vec!["orientation".to_string()]);

        let gl2 = GroupKind::Gl(2);
        let nearly = GroupElement {
            group: gl2,
            rep: Rep::Matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-18])),
        };
        assert_eq!(gl2.validate(&nearly), vec!["near-singular".to_string()]);
        assert!(so3.validate(&so3.identity()).is_empty());
    }

    #[test]
    fn exp_times_exp_of_negative_is_identity() {
        let gl2 = GroupKind::Gl(2);
        let x = gl2.algebra_from_minimal(&[0.4, -0.3, 0.7, 0.1]).unwrap();
        let g = gl2.exp(&x).unwrap();
        let gi = gl2.exp(&x.scale(-1.0)).unwrap();
        let prod = gl2.multiply(&g, &gi).unwrap();
        assert!(prod.rep_distance(&gl2.identity()) < 1e-12);
    }

    #[test]
    fn chart_naturality_near_identity() {
        // chart_forward(exp(X)) = X for small X, across the matrix roster.
        for id in ["so3", "gl2", "heis3", "ut3", "se3"] {
            let g = GroupKind::parse(id).unwrap();
            let coeffs: Vec<f64> = (0..g.algebra_dim())
                .map(|i| 0.05 * ((i as f64) * 0.7 + 0.3).sin())
                .collect();
            let x = g.algebra_from_minimal(&coeffs).unwrap();
            let back = g.chart_forward(&g.exp(&x).unwrap()).unwrap();
            assert!((back.coords - x.coords.coords).norm() < 1e-10, "{id}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn adjoint_is_a_homomorphism(
            a in proptest::collection::vec(-0.5f64..0.5, 3),
            b in proptest::collection::vec(-0.5f64..0.5, 3),
            x in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let so3 = GroupKind::So3;
            let g = so3.exp(&so3.algebra_from_minimal(&a).unwrap()).unwrap();
            let h = so3.exp(&so3.algebra_from_minimal(&b).unwrap()).unwrap();
            let xe = so3.algebra_from_minimal(&x).unwrap();
            let gh = so3.multiply(&g, &h).unwrap();
            let lhs = so3.adjoint(&gh, &xe).unwrap();
            let rhs = so3.adjoint(&g, &so3.adjoint(&h, &xe).unwrap()).unwrap();
            prop_assert!((lhs.coords.coords - rhs.coords.coords).norm() < 1e-10);
        }

        #[test]
        fn adjoint_respects_bracket(
            a in proptest::collection::vec(-0.5f64..0.5, 4),
            x in proptest::collection::vec(-1.0f64..1.0, 4),
            y in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let gl2 = GroupKind::Gl(2);
            let g = gl2.exp(&gl2.algebra_from_minimal(&a).unwrap()).unwrap();
            let xe = gl2.algebra_from_minimal(&x).unwrap();
            let ye = gl2.algebra_from_minimal(&y).unwrap();
            let lhs = gl2.adjoint(&g, &gl2.bracket(&xe, &ye).unwrap()).unwrap();
            let rhs = gl2
                .bracket(&gl2.adjoint(&g, &xe).unwrap(), &gl2.adjoint(&g, &ye).unwrap())
                .unwrap();
            prop_assert!((lhs.coords.coords - rhs.coords.coords).norm() < 1e-10);
        }
    }
}
