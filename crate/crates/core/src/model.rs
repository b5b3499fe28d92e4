//! Model-space vectors and the seminorm calculus.
//!
//! Every estimate in this library is phrased through continuous seminorms on
//! a model space: either a full matrix algebra (flattened n×n) or a finite
//! truncation of a weighted sequence space. Weight ladders make the seminorm
//! family non-trivially ordered, which is what the domination searches probe.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::op_norm;

/// Identifier of a model space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceId {
    /// Flattened n×n real matrix algebra.
    Mat(usize),
    /// Truncated sequence space of length D.
    Seq(usize),
}

impl SpaceId {
    pub fn dim(&self) -> usize {
        match *self {
            SpaceId::Mat(n) => n * n,
            SpaceId::Seq(d) => d,
        }
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceId::Mat(n) => write!(f, "mat{n}"),
            SpaceId::Seq(d) => write!(f, "seq:{d}"),
        }
    }
}

/// Element of a model space, in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelVector {
    pub space: SpaceId,
    pub coords: DVector<f64>,
}

impl ModelVector {
    pub fn new(space: SpaceId, coords: DVector<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::SpaceMismatch {
                expected: format!("{space} (dim {})", space.dim()),
                got: format!("vector of length {}", coords.len()),
            });
        }
        Ok(ModelVector { space, coords })
    }

    pub fn zero(space: SpaceId) -> Self {
        ModelVector {
            space,
            coords: DVector::zeros(space.dim()),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        ModelVector {
            space: self.space,
            coords: &self.coords * c,
        }
    }

    pub fn add(&self, other: &ModelVector) -> Result<Self> {
        self.check_space(other.space)?;
        Ok(ModelVector {
            space: self.space,
            coords: &self.coords + &other.coords,
        })
    }

    pub fn sub(&self, other: &ModelVector) -> Result<Self> {
        self.check_space(other.space)?;
        Ok(ModelVector {
            space: self.space,
            coords: &self.coords - &other.coords,
        })
    }

    /// View matrix-space coordinates as the n×n matrix (row-major layout).
    pub fn as_matrix(&self) -> Result<DMatrix<f64>> {
        match self.space {
            SpaceId::Mat(n) => Ok(DMatrix::from_row_slice(n, n, self.coords.as_slice())),
            SpaceId::Seq(_) => Err(Error::SpaceMismatch {
                expected: "matrix space".into(),
                got: self.space.to_string(),
            }),
        }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let coords = DVector::from_iterator(n * n, m.transpose().iter().copied());
        ModelVector {
            space: SpaceId::Mat(n),
            coords,
        }
    }

    fn check_space(&self, other: SpaceId) -> Result<()> {
        if self.space != other {
            return Err(Error::SpaceMismatch {
                expected: self.space.to_string(),
                got: other.to_string(),
            });
        }
        Ok(())
    }
}

/// Weight ladder shape for `weighted-sup` seminorms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightBase {
    /// w_j = (1 + j)^k — the default ladder on truncated sequence spaces.
    Poly,
    /// w_j = 2^{j·k} — a geometric ladder with much steeper domination gaps.
    Geometric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeminormKind {
    /// Spectral norm for matrix spaces, sup-norm for sequence spaces.
    OpNorm,
    /// Frobenius norm (ℓ² of the coordinates for either space).
    Frobenius,
    /// Weighted sup-norm max_j w_j |v_j| with ladder index k.
    WeightedSup { index: u32, base: WeightBase },
}

/// A continuous seminorm on one model space, with a positive scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Seminorm {
    pub space: SpaceId,
    pub kind: SeminormKind,
    pub scale: f64,
}

impl Seminorm {
    pub fn frobenius(space: SpaceId, scale: f64) -> Self {
        Seminorm {
            space,
            kind: SeminormKind::Frobenius,
            scale,
        }
    }

    pub fn op_norm(space: SpaceId, scale: f64) -> Self {
        Seminorm {
            space,
            kind: SeminormKind::OpNorm,
            scale,
        }
    }

    pub fn weighted_sup(space: SpaceId, index: u32, base: WeightBase, scale: f64) -> Self {
        Seminorm {
            space,
            kind: SeminormKind::WeightedSup { index, base },
            scale,
        }
    }

    /// Same seminorm with the scale multiplied by `c`.
    pub fn rescaled(&self, c: f64) -> Self {
        Seminorm {
            space: self.space,
            kind: self.kind.clone(),
            scale: self.scale * c,
        }
    }

    fn weight(&self, j: usize, index: u32, base: WeightBase) -> f64 {
        let k = index as f64;
        match base {
            WeightBase::Poly => ((1 + j) as f64).powf(k),
            WeightBase::Geometric => 2f64.powf(j as f64 * k),
        }
    }

    pub fn eval(&self, v: &ModelVector) -> Result<f64> {
        if v.space != self.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.to_string(),
                got: v.space.to_string(),
            });
        }
        let raw = match &self.kind {
            SeminormKind::Frobenius => v.coords.norm(),
            SeminormKind::OpNorm => match self.space {
                SpaceId::Mat(_) => op_norm(&v.as_matrix()?),
                SpaceId::Seq(_) => v.coords.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            },
            SeminormKind::WeightedSup { index, base } => v
                .coords
                .iter()
                .enumerate()
                .map(|(j, x)| self.weight(j, *index, *base) * x.abs())
                .fold(0.0, f64::max),
        };
        Ok(self.scale * raw)
    }
}

impl fmt::Display for Seminorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SeminormKind::Frobenius => write!(f, "frobenius({})", self.scale),
            SeminormKind::OpNorm => write!(f, "opnorm({})", self.scale),
            SeminormKind::WeightedSup { index, base } => {
                let b = match base {
                    WeightBase::Poly => "poly",
                    WeightBase::Geometric => "geo",
                };
                write!(f, "wsup(k={},{},{})", index, b, self.scale)
            }
        }
    }
}

/// An ordered family of seminorms over one model space.
///
/// For weighted-sup ladders the family is totally ordered by pointwise
/// domination: smaller ladder index is dominated by larger.
#[derive(Debug, Clone)]
pub struct SeminormFamily {
    pub space: SpaceId,
    pub members: Vec<Seminorm>,
}

impl SeminormFamily {
    pub fn new(space: SpaceId, members: Vec<Seminorm>) -> Result<Self> {
        for p in &members {
            if p.space != space {
                return Err(Error::SpaceMismatch {
                    expected: space.to_string(),
                    got: p.space.to_string(),
                });
            }
        }
        Ok(SeminormFamily { space, members })
    }

    /// The standard weighted-sup ladder w_j = (1+j)^k for k = 0..levels.
    pub fn poly_ladder(d: usize, levels: u32) -> Self {
        let space = SpaceId::Seq(d);
        let members = (0..=levels)
            .map(|k| Seminorm::weighted_sup(space, k, WeightBase::Poly, 1.0))
            .collect();
        SeminormFamily { space, members }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat2(space_vec: &[f64]) -> ModelVector {
        ModelVector::new(SpaceId::Mat(2), DVector::from_row_slice(space_vec)).unwrap()
    }

    #[test]
    fn seminorm_of_zero_is_zero() {
        let p = Seminorm::frobenius(SpaceId::Mat(2), 1.0);
        assert_eq!(p.eval(&ModelVector::zero(SpaceId::Mat(2))).unwrap(), 0.0);
    }

    #[test]
    fn scaled_frobenius_of_identity() {
        let p = Seminorm::frobenius(SpaceId::Mat(2), 2.0);
        let id = mat2(&[1.0, 0.0, 0.0, 1.0]);
        let expected = 2.0 * 2f64.sqrt();
        assert!((p.eval(&id).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn geometric_ladder_on_basis_vector() {
        // w_j = 2^{j k}, k = 3, third basis vector e_2 in D = 8: value 2^6.
        let space = SpaceId::Seq(8);
        let p = Seminorm::weighted_sup(space, 3, WeightBase::Geometric, 1.0);
        let mut coords = DVector::zeros(8);
        coords[2] = 1.0;
        let v = ModelVector::new(space, coords).unwrap();
        assert_eq!(p.eval(&v).unwrap(), 64.0);
    }

    #[test]
    fn space_mismatch_is_config_error() {
        let p = Seminorm::frobenius(SpaceId::Mat(2), 1.0);
        let v = ModelVector::zero(SpaceId::Seq(8));
        assert!(matches!(p.eval(&v), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn poly_ladder_is_pointwise_ordered() {
        let fam = SeminormFamily::poly_ladder(16, 4);
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..200 {
            let v = ModelVector::new(
                SpaceId::Seq(16),
                DVector::from_iterator(16, (0..16).map(|_| next())),
            )
            .unwrap();
            for w in fam.members.windows(2) {
                assert!(w[0].eval(&v).unwrap() <= w[1].eval(&v).unwrap() + 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn homogeneity_and_triangle(
            a in proptest::collection::vec(-10.0f64..10.0, 4),
            b in proptest::collection::vec(-10.0f64..10.0, 4),
            c in -10.0f64..10.0,
            kind in 0usize..3,
        ) {
            let p = match kind {
                0 => Seminorm::frobenius(SpaceId::Mat(2), 1.5),
                1 => Seminorm::op_norm(SpaceId::Mat(2), 0.7),
                _ => Seminorm::weighted_sup(SpaceId::Seq(4), 2, WeightBase::Poly, 1.0),
            };
            let space = p.space;
            let v = ModelVector::new(space, DVector::from_row_slice(&a)).unwrap();
            let w = ModelVector::new(space, DVector::from_row_slice(&b)).unwrap();
            let pv = p.eval(&v).unwrap();
            let pw = p.eval(&w).unwrap();
            prop_assert!(pv >= 0.0);
            // absolute homogeneity, relative tolerance 1e-12
            let scaled = p.eval(&v.scale(c)).unwrap();
            prop_assert!((scaled - c.abs() * pv).abs() <= 1e-12 * (1.0 + c.abs() * pv));
            // triangle inequality with roundoff slack
            let sum = p.eval(&v.add(&w).unwrap()).unwrap();
            prop_assert!(sum <= pv + pw + 1e-12 * (pv + pw));
        }
    }
}
