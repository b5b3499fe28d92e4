//! Named constructors for the curves addressable from experiment configs,
//! plus the listings behind `prodint list`.
//!
//! Parameter vectors are read as consecutive blocks of minimal algebra
//! coordinates: "const", "sin-axis", and "exp" take one block (X), "linear"
//! and "exp-product" take two (X then Y).

use std::sync::Arc;

use nalgebra::DVector;

use crate::curve::{GroupCurve, PiecewiseCurve, Smoothness};
use crate::error::{Error, Result};
use crate::group::{AlgebraElement, GroupElement, GroupKind, Rep};
use crate::linalg::expm;

/// A curve request as it appears in config files.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub name: String,
    pub params: Vec<f64>,
}

/// Algebra-valued curves feed the integrator and the probes; group-valued
/// curves feed the Trotter harness.
pub enum BuiltCurve {
    Algebra(PiecewiseCurve),
    Group(GroupCurve),
}

impl BuiltCurve {
    pub fn into_algebra(self) -> Result<PiecewiseCurve> {
        match self {
            BuiltCurve::Algebra(c) => Ok(c),
            BuiltCurve::Group(_) => Err(Error::Config(
                "curve: this experiment needs an algebra-valued curve \
                 (const, linear, sin-axis)"
                    .into(),
            )),
        }
    }

    pub fn into_group(self) -> Result<GroupCurve> {
        match self {
            BuiltCurve::Group(c) => Ok(c),
            BuiltCurve::Algebra(_) => Err(Error::Config(
                "curve: this experiment needs a group-valued curve \
                 (exp, exp-product)"
                    .into(),
            )),
        }
    }
}

fn split_blocks(group: GroupKind, params: &[f64], blocks: usize) -> Result<Vec<AlgebraElement>> {
    let d = group.algebra_dim();
    if params.len() != d * blocks {
        return Err(Error::Config(format!(
            "curve.params: expected {blocks} block(s) of {d} coordinates for {group} \
             ({} numbers), got {}",
            d * blocks,
            params.len()
        )));
    }
    params
        .chunks(d)
        .map(|c| group.algebra_from_minimal(c))
        .collect()
}

/// μ(t) = exp(tX) with its closed-form derivative.
fn exp_curve(group: GroupKind, x: AlgebraElement, domain: (f64, f64)) -> Result<GroupCurve> {
    let eval: crate::curve::GroupEval;
    let deriv: crate::curve::TangentEval;
    if group.is_abelian() {
        let xv = x.coords.coords.clone();
        let g = group;
        eval = Arc::new(move |t| {
            let mv = crate::model::ModelVector::new(g.model_space(), xv.clone() * t).unwrap();
            g.exp(&AlgebraElement::new(g, mv).unwrap()).unwrap()
        });
        let xv = x.coords.coords.clone();
        match group {
            GroupKind::Abelian(_) => {
                deriv = Arc::new(move |_| Rep::Vector(xv.clone()));
            }
            _ => {
                // diagop: d/dt e^{t x_j} = x_j e^{t x_j}
                deriv = Arc::new(move |t| {
                    Rep::Vector(DVector::from_iterator(
                        xv.len(),
                        xv.iter().map(|&xj| xj * (t * xj).exp()),
                    ))
                });
            }
        }
    } else {
        let xm = x.coords.as_matrix()?;
        let g = group;
        let xm2 = xm.clone();
        eval = Arc::new(move |t| GroupElement {
            group: g,
            rep: Rep::Matrix(expm(&(&xm2 * t))),
        });
        deriv = Arc::new(move |t| Rep::Matrix(&xm * expm(&(&xm * t))));
    }
    GroupCurve::new(group, domain, Smoothness::C1, eval, Some(deriv))
}

/// μ(t) = exp(tX)·exp(t²Y) with its closed-form derivative.
fn exp_product_curve(
    group: GroupKind,
    x: AlgebraElement,
    y: AlgebraElement,
    domain: (f64, f64),
) -> Result<GroupCurve> {
    let eval: crate::curve::GroupEval;
    let deriv: crate::curve::TangentEval;
    if group.is_abelian() {
        let (xv, yv) = (x.coords.coords.clone(), y.coords.coords.clone());
        let g = group;
        let (xe, ye) = (xv.clone(), yv.clone());
        eval = Arc::new(move |t| {
            let mv = crate::model::ModelVector::new(
                g.model_space(),
                xe.clone() * t + ye.clone() * (t * t),
            )
            .unwrap();
            g.exp(&AlgebraElement::new(g, mv).unwrap()).unwrap()
        });
        match group {
            GroupKind::Abelian(_) => {
                deriv = Arc::new(move |t| Rep::Vector(xv.clone() + yv.clone() * (2.0 * t)));
            }
            _ => {
                deriv = Arc::new(move |t| {
                    Rep::Vector(DVector::from_iterator(
                        xv.len(),
                        xv.iter()
                            .zip(yv.iter())
                            .map(|(&xj, &yj)| (xj + 2.0 * t * yj) * (t * xj + t * t * yj).exp()),
                    ))
                });
            }
        }
    } else {
        let xm = x.coords.as_matrix()?;
        let ym = y.coords.as_matrix()?;
        let g = group;
        let (xe, ye) = (xm.clone(), ym.clone());
        eval = Arc::new(move |t| GroupElement {
            group: g,
            rep: Rep::Matrix(expm(&(&xe * t)) * expm(&(&ye * (t * t)))),
        });
        deriv = Arc::new(move |t| {
            let ea = expm(&(&xm * t));
            let eb = expm(&(&ym * (t * t)));
            Rep::Matrix(&xm * &ea * &eb + &ea * (&ym * (2.0 * t)) * &eb)
        });
    }
    GroupCurve::new(group, domain, Smoothness::C1, eval, Some(deriv))
}

/// Builds the named curve on [0, 1].
pub fn build_curve(group: GroupKind, spec: &CurveSpec) -> Result<BuiltCurve> {
    match spec.name.as_str() {
        "const" => {
            let x = split_blocks(group, &spec.params, 1)?.pop().unwrap();
            Ok(BuiltCurve::Algebra(PiecewiseCurve::constant(&x, 0.0, 1.0)?))
        }
        "linear" => {
            let mut blocks = split_blocks(group, &spec.params, 2)?;
            let y = blocks.pop().unwrap();
            let x = blocks.pop().unwrap();
            let (xv, yv) = (x.coords.coords, y.coords.coords);
            let piece: crate::curve::AlgebraEval = Arc::new(move |t| xv.clone() + yv.clone() * t);
            Ok(BuiltCurve::Algebra(PiecewiseCurve::new(
                group,
                vec![0.0, 1.0],
                vec![piece],
            )?))
        }
        "sin-axis" => {
            let x = split_blocks(group, &spec.params, 1)?.pop().unwrap();
            let xv = x.coords.coords;
            let piece: crate::curve::AlgebraEval = Arc::new(move |t| xv.clone() * t.sin());
            Ok(BuiltCurve::Algebra(PiecewiseCurve::new(
                group,
                vec![0.0, 1.0],
                vec![piece],
            )?))
        }
        "exp" => {
            let x = split_blocks(group, &spec.params, 1)?.pop().unwrap();
            Ok(BuiltCurve::Group(exp_curve(group, x, (0.0, 1.0))?))
        }
        "exp-product" => {
            let mut blocks = split_blocks(group, &spec.params, 2)?;
            let y = blocks.pop().unwrap();
            let x = blocks.pop().unwrap();
            Ok(BuiltCurve::Group(exp_product_curve(
                group,
                x,
                y,
                (0.0, 1.0),
            )?))
        }
        other => Err(Error::Config(format!(
            "curve.name: unknown curve \"{other}\""
        ))),
    }
}

pub fn curve_names() -> Vec<&'static str> {
    vec!["const", "exp", "exp-product", "linear", "sin-axis"]
}

pub fn seminorm_names() -> Vec<&'static str> {
    vec!["frobenius", "opnorm", "wsup"]
}

pub fn scheme_names() -> Vec<&'static str> {
    vec!["left-euler", "midpoint"]
}

/// Deterministic alphabetical listing of everything addressable by name.
pub fn listing() -> String {
    let mut out = String::new();
    out.push_str("groups:\n");
    for g in GroupKind::roster() {
        out.push_str(&format!("  {g}\n"));
    }
    out.push_str("curves:\n");
    for c in curve_names() {
        out.push_str(&format!("  {c}\n"));
    }
    out.push_str("seminorms:\n");
    for s in seminorm_names() {
        out.push_str(&format!("  {s}\n"));
    }
    out.push_str("schemes:\n");
    for s in scheme_names() {
        out.push_str(&format!("  {s}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::log_derivative;

    #[test]
    fn const_curve_round_trip() {
        let spec = CurveSpec {
            name: "const".into(),
            params: vec![0.1, 0.2, 0.3],
        };
        let phi = build_curve(GroupKind::So3, &spec)
            .unwrap()
            .into_algebra()
            .unwrap();
        let expected = GroupKind::So3
            .algebra_from_minimal(&[0.1, 0.2, 0.3])
            .unwrap();
        assert!((phi.eval_coords(0.7).unwrap() - expected.coords.coords).norm() < 1e-15);
    }

    #[test]
    fn linear_curve_interpolates() {
        let spec = CurveSpec {
            name: "linear".into(),
            params: vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0],
        };
        let phi = build_curve(GroupKind::So3, &spec)
            .unwrap()
            .into_algebra()
            .unwrap();
        let v = phi.eval_coords(0.5).unwrap();
        // hat(1,0,0) + 0.5·hat(0,2,0): entry (0,2) carries the y component
        let m = crate::model::ModelVector::new(crate::model::SpaceId::Mat(3), v)
            .unwrap()
            .as_matrix()
            .unwrap();
        assert!((m[(0, 2)] - 1.0).abs() < 1e-15);
        assert!((m[(2, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_curve_log_derivative_is_constant() {
        let spec = CurveSpec {
            name: "exp".into(),
            params: vec![0.0, 0.0, 0.4],
        };
        let mu = build_curve(GroupKind::So3, &spec)
            .unwrap()
            .into_group()
            .unwrap();
        let x = GroupKind::So3
            .algebra_from_minimal(&[0.0, 0.0, 0.4])
            .unwrap();
        for t in [0.0, 0.3, 0.9] {
            let d = log_derivative(&mu, t).unwrap();
            assert!((d.coords.coords - x.coords.coords.clone()).norm() < 1e-9);
        }
    }

    #[test]
    fn exp_product_matches_factors() {
        let spec = CurveSpec {
            name: "exp-product".into(),
            params: vec![0.3, 0.0, 0.0, 0.0, 0.0, 0.5],
        };
        let mu = build_curve(GroupKind::So3, &spec)
            .unwrap()
            .into_group()
            .unwrap();
        let so3 = GroupKind::So3;
        let t = 0.6;
        let a = so3
            .exp(&so3.algebra_from_minimal(&[0.3 * t, 0.0, 0.0]).unwrap())
            .unwrap();
        let b = so3
            .exp(&so3.algebra_from_minimal(&[0.0, 0.0, 0.5 * t * t]).unwrap())
            .unwrap();
        let expected = so3.multiply(&a, &b).unwrap();
        assert!(mu.eval(t).unwrap().rep_distance(&expected) < 1e-12);
    }

    #[test]
    fn exp_product_on_diagop_and_abelian() {
        for group in [GroupKind::Abelian(3), GroupKind::DiagOp(3)] {
            let spec = CurveSpec {
                name: "exp-product".into(),
                params: vec![0.2, -0.1, 0.3, 0.1, 0.0, -0.2],
            };
            let mu = build_curve(group, &spec).unwrap().into_group().unwrap();
            // closed-form derivative matches the finite-difference check
            let d = log_derivative(&mu, 0.0).unwrap();
            let x = group.algebra_from_minimal(&[0.2, -0.1, 0.3]).unwrap();
            assert!((d.coords.coords - x.coords.coords).norm() < 1e-9, "{group}");
        }
    }

    #[test]
    fn wrong_block_count_names_the_key() {
        let spec = CurveSpec {
            name: "exp".into(),
            params: vec![1.0, 2.0],
        };
        let err = match build_curve(GroupKind::So3, &spec) {
            Err(e) => e,
            Ok(_) => panic!("expected a config error"),
        };
        assert!(err.to_string().contains("curve.params"));
    }

    #[test]
    fn unknown_curve_is_a_config_error() {
        let spec = CurveSpec {
            name: "spline".into(),
            params: vec![],
        };
        assert!(build_curve(GroupKind::So3, &spec).is_err());
    }

    #[test]
    fn listing_is_stable_and_complete() {
        let a = listing();
        let b = listing();
        assert_eq!(a, b);
        assert!(a.contains("so3"));
        assert!(a.contains("exp-product"));
        assert!(a.contains("midpoint"));
        assert!(a.contains("wsup"));
    }
}
