//! Group-valued C¹ curves and piecewise algebra-valued curves, with the
//! restriction / concatenation / scaling / reparametrization toolkit and the
//! sup and L¹ seminorm functionals over curves.
//!
//! Piecewise curves carry closed-interval evaluators; a value demanded at an
//! interior breakpoint is taken from the left piece. Quadrature only touches
//! midpoints, so the convention never affects integrals.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::group::{AlgebraElement, GroupElement, GroupKind, Rep};
use crate::model::{ModelVector, Seminorm};

const DOMAIN_SLACK: f64 = 1e-9;

/// Evaluator of an algebra-valued piece, in model-space coordinates.
pub type AlgebraEval = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;
pub type CombineFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Element of DP⁰: breakpoints plus continuous pieces, values in the algebra.
#[derive(Clone)]
pub struct PiecewiseCurve {
    pub group: GroupKind,
    breakpoints: Vec<f64>,
    pieces: Vec<AlgebraEval>,
}

impl PiecewiseCurve {
    pub fn new(group: GroupKind, breakpoints: Vec<f64>, pieces: Vec<AlgebraEval>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Domain("need at least two breakpoints".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if pieces.len() != breakpoints.len() - 1 {
            return Err(Error::Domain(format!(
                "{} pieces for {} breakpoints",
                pieces.len(),
                breakpoints.len()
            )));
        }
        Ok(PiecewiseCurve {
            group,
            breakpoints,
            pieces,
        })
    }

    /// The constant curve φ_X on [r, r'].
    pub fn constant(x: &AlgebraElement, r: f64, r_prime: f64) -> Result<Self> {
        if r >= r_prime {
            return Err(Error::Domain(format!(
                "degenerate interval [{r}, {r_prime}]"
            )));
        }
        let coords = x.coords.coords.clone();
        PiecewiseCurve::new(
            x.group,
            vec![r, r_prime],
            vec![Arc::new(move |_| coords.clone())],
        )
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn piece_index(&self, t: f64) -> usize {
        // left-piece convention: piece p owns (t_p, t_{p+1}], piece 0 owns t_0
        match self
            .breakpoints
            .binary_search_by(|bp| bp.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.saturating_sub(1),
            Err(i) => (i.saturating_sub(1)).min(self.pieces.len() - 1),
        }
    }

    pub fn eval_coords(&self, t: f64) -> Result<DVector<f64>> {
        let (a, b) = self.domain();
        if t < a - DOMAIN_SLACK || t > b + DOMAIN_SLACK {
            return Err(Error::Domain(format!("t = {t} outside [{a}, {b}]")));
        }
        let t = t.clamp(a, b);
        Ok((self.pieces[self.piece_index(t)])(t))
    }

    pub fn eval(&self, t: f64) -> Result<AlgebraElement> {
        AlgebraElement::new(
            self.group,
            ModelVector::new(self.group.model_space(), self.eval_coords(t)?)?,
        )
    }

    /// Pointwise scaling τ·φ, same breakpoints.
    pub fn scale(&self, tau: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let p = Arc::clone(p);
                let f: AlgebraEval = Arc::new(move |t| p(t) * tau);
                f
            })
            .collect();
        PiecewiseCurve {
            group: self.group,
            breakpoints: self.breakpoints.clone(),
            pieces,
        }
    }

    /// Restriction to [s, t] ⊆ dom(φ); evaluators unchanged on the overlap.
    pub fn restrict(&self, s: f64, t: f64) -> Result<Self> {
        let (a, b) = self.domain();
        if s >= t || s < a - DOMAIN_SLACK || t > b + DOMAIN_SLACK {
            return Err(Error::Domain(format!(
                "[{s}, {t}] is not a proper subinterval of [{a}, {b}]"
            )));
        }
        let s = s.clamp(a, b);
        let t = t.clamp(a, b);
        let mut bps = vec![s];
        let mut pieces = Vec::new();
        for (i, w) in self.breakpoints.windows(2).enumerate() {
            let lo = w[0].max(s);
            let hi = w[1].min(t);
            if lo < hi {
                bps.push(hi);
                pieces.push(Arc::clone(&self.pieces[i]));
            }
        }
        PiecewiseCurve::new(self.group, bps, pieces)
    }

    /// Concatenation of two curves on adjacent domains.
    pub fn concatenate(&self, other: &PiecewiseCurve) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                expected: self.group.to_string(),
                got: other.group.to_string(),
            });
        }
        let (_, b) = self.domain();
        let (c, _) = other.domain();
        if (b - c).abs() > 1e-12 {
            return Err(Error::Domain(format!("domains not adjacent: {b} vs {c}")));
        }
        let mut bps = self.breakpoints.clone();
        bps.extend_from_slice(&other.breakpoints[1..]);
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        PiecewiseCurve::new(self.group, bps, pieces)
    }

    /// Same curve with additional partition points inserted as breakpoints.
    pub fn with_breakpoints(&self, pts: &[f64]) -> Self {
        let (a, b) = self.domain();
        let mut bps = self.breakpoints.clone();
        for &p in pts {
            if p > a && p < b && bps.iter().all(|&x| (x - p).abs() > 1e-14) {
                bps.push(p);
            }
        }
        bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut pieces = Vec::with_capacity(bps.len() - 1);
        for w in bps.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            pieces.push(Arc::clone(&self.pieces[self.piece_index(mid)]));
        }
        PiecewiseCurve {
            group: self.group,
            breakpoints: bps,
            pieces,
        }
    }

    /// Pointwise combination of two curves on the same domain, with merged
    /// breakpoints.
    pub fn combine(&self, other: &PiecewiseCurve, f: CombineFn) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                expected: self.group.to_string(),
                got: other.group.to_string(),
            });
        }
        let (a, b) = self.domain();
        let (c, d) = other.domain();
        if (a - c).abs() > 1e-12 || (b - d).abs() > 1e-12 {
            return Err(Error::Domain("curves must share their domain".into()));
        }
        let mut bps = self.breakpoints.clone();
        for &p in &other.breakpoints {
            if bps.iter().all(|&x| (x - p).abs() > 1e-14) {
                bps.push(p);
            }
        }
        bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let lhs = self.clone();
        let rhs = other.clone();
        let mut pieces: Vec<AlgebraEval> = Vec::with_capacity(bps.len() - 1);
        for _ in bps.windows(2) {
            let lhs = lhs.clone();
            let rhs = rhs.clone();
            let f = Arc::clone(&f);
            pieces.push(Arc::new(move |t| {
                f(&lhs.eval_coords(t).unwrap(), &rhs.eval_coords(t).unwrap())
            }));
        }
        PiecewiseCurve::new(self.group, bps, pieces)
    }

    /// Pointwise difference ψ − φ (this curve is ψ).
    pub fn sub(&self, phi: &PiecewiseCurve) -> Result<Self> {
        self.combine(phi, Arc::new(|a, b| a - b))
    }
}

/// A C¹ scalar map with an explicit derivative, used for reparametrization.
#[derive(Clone)]
pub struct C1Map {
    pub domain: (f64, f64),
    pub map: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub deriv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl C1Map {
    pub fn affine(domain: (f64, f64), slope: f64, offset: f64) -> Self {
        C1Map {
            domain,
            map: Arc::new(move |t| slope * t + offset),
            deriv: Arc::new(move |_| slope),
        }
    }
}

/// Locate preimages of `value` under `rho` inside its domain.
///
/// Monotone maps get bisection plus one Newton polish; general maps are
/// scanned on a fine grid for sign changes.
pub fn preimages(rho: &C1Map, value: f64) -> Vec<f64> {
    let (a, b) = rho.domain;
    let n = 257;
    let sample: Vec<f64> = (0..n)
        .map(|i| (rho.map)(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect();
    let increasing = sample.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = sample.windows(2).all(|w| w[1] <= w[0]);
    let grid: usize = if increasing || decreasing { n } else { 4097 };
    let f = |t: f64| (rho.map)(t) - value;
    let mut out = Vec::new();
    let mut prev_t = a;
    let mut prev_v = f(a);
    for i in 1..grid {
        let t = a + (b - a) * i as f64 / (grid - 1) as f64;
        let v = f(t);
        if prev_v == 0.0 {
            out.push(prev_t);
        } else if prev_v * v < 0.0 {
            // bisect, then polish with one Newton step
            let (mut lo, mut hi) = (prev_t, t);
            let mut flo = prev_v;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo < 1e-16 * (1.0 + mid.abs()) {
                    break;
                }
            }
            let mut root = 0.5 * (lo + hi);
            let d = (rho.deriv)(root);
            if d.abs() > 1e-12 {
                root -= f(root) / d;
                root = root.clamp(prev_t, t);
            }
            out.push(root);
        }
        prev_t = t;
        prev_v = v;
    }
    if f(b) == 0.0 {
        out.push(b);
    }
    out
}

/// Substitution rule for the product integral: returns t ↦ ϱ̇(t)·φ(ϱ(t)) on
/// the domain of ϱ, with breakpoints at preimages of φ's breakpoints.
pub fn reparametrize(phi: &PiecewiseCurve, rho: &C1Map) -> Result<PiecewiseCurve> {
    let (la, lb) = rho.domain;
    if la >= lb {
        return Err(Error::Domain("degenerate reparametrization domain".into()));
    }
    let (ra, rb) = phi.domain();
    // range check on a sample grid
    for i in 0..=128 {
        let t = la + (lb - la) * i as f64 / 128.0;
        let v = (rho.map)(t);
        if v < ra - DOMAIN_SLACK || v > rb + DOMAIN_SLACK {
            return Err(Error::Domain(format!(
                "ϱ({t}) = {v} leaves the curve domain [{ra}, {rb}]"
            )));
        }
    }
    let mut bps = vec![la, lb];
    for &bp in &phi.breakpoints()[1..phi.breakpoints().len() - 1] {
        for t in preimages(rho, bp) {
            if t > la && t < lb && bps.iter().all(|&x| (x - t).abs() > 1e-13) {
                bps.push(t);
            }
        }
    }
    bps.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut pieces: Vec<AlgebraEval> = Vec::with_capacity(bps.len() - 1);
    for _ in bps.windows(2) {
        let phi = phi.clone();
        let map = Arc::clone(&rho.map);
        let deriv = Arc::clone(&rho.deriv);
        pieces.push(Arc::new(move |t| {
            let (ra, rb) = phi.domain();
            let u = (map)(t).clamp(ra, rb);
            phi.eval_coords(u).unwrap() * (deriv)(t)
        }));
    }
    PiecewiseCurve::new(phi.group, bps, pieces)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    C0,
    C1,
}

pub type GroupEval = Arc<dyn Fn(f64) -> GroupElement + Send + Sync>;
pub type TangentEval = Arc<dyn Fn(f64) -> Rep + Send + Sync>;

/// A group-valued curve with an optional closed-form derivative of the
/// representation. Without one, derivatives fall back to second-order finite
/// differences with h = max(1e-6, 1e-8·|t|).
#[derive(Clone)]
pub struct GroupCurve {
    pub group: GroupKind,
    pub domain: (f64, f64),
    pub smoothness: Smoothness,
    eval: GroupEval,
    deriv: Option<TangentEval>,
}

impl GroupCurve {
    pub fn new(
        group: GroupKind,
        domain: (f64, f64),
        smoothness: Smoothness,
        eval: GroupEval,
        deriv: Option<TangentEval>,
    ) -> Result<Self> {
        if domain.0 >= domain.1 {
            return Err(Error::Domain("degenerate curve domain".into()));
        }
        Ok(GroupCurve {
            group,
            domain,
            smoothness,
            eval,
            deriv,
        })
    }

    pub fn eval(&self, t: f64) -> Result<GroupElement> {
        let (a, b) = self.domain;
        if t < a - DOMAIN_SLACK || t > b + DOMAIN_SLACK {
            return Err(Error::Domain(format!("t = {t} outside [{a}, {b}]")));
        }
        Ok((self.eval)(t.clamp(a, b)))
    }

    /// Derivative of the representation at t.
    pub fn derivative(&self, t: f64) -> Result<Rep> {
        if let Some(d) = &self.deriv {
            let (a, b) = self.domain;
            return Ok(d(t.clamp(a, b)));
        }
        let (a, b) = self.domain;
        let h = (1e-6f64).max(1e-8 * t.abs());
        let rep_at = |s: f64| -> Result<Rep> { Ok(self.eval(s)?.rep) };
        // central differences in the interior, one-sided 2nd order at the ends
        let (pts, weights): ([f64; 3], [f64; 3]) = if t - h < a {
            ([t, t + h, t + 2.0 * h], [-1.5, 2.0, -0.5])
        } else if t + h > b {
            ([t, t - h, t - 2.0 * h], [1.5, -2.0, 0.5])
        } else {
            ([t - h, t, t + h], [-0.5, 0.0, 0.5])
        };
        let reps: Vec<Rep> = pts.iter().map(|&s| rep_at(s)).collect::<Result<Vec<_>>>()?;
        match &reps[0] {
            Rep::Matrix(_) => {
                let mut acc = reps[0].as_matrix()?.clone() * (weights[0] / h);
                for i in 1..3 {
                    acc += reps[i].as_matrix()? * (weights[i] / h);
                }
                Ok(Rep::Matrix(acc))
            }
            Rep::Vector(_) => {
                let mut acc = reps[0].as_vector()?.clone() * (weights[0] / h);
                for i in 1..3 {
                    acc += reps[i].as_vector()? * (weights[i] / h);
                }
                Ok(Rep::Vector(acc))
            }
        }
    }

    /// μ_τ: [0, 1/m] ∋ t ↦ μ(τ·t), with derivative τ·μ̇(τ·t).
    pub fn rescale(&self, tau: f64, m: usize) -> Result<GroupCurve> {
        if m == 0 {
            return Err(Error::Domain("m must be positive".into()));
        }
        let (a, b) = self.domain;
        let top = tau / m as f64;
        if tau < 0.0 || a > 0.0 || top > b + DOMAIN_SLACK {
            return Err(Error::Domain(format!(
                "rescaled domain [0, {top}] not inside [{a}, {b}]"
            )));
        }
        let inner = self.clone();
        let eval: GroupEval = Arc::new(move |t| inner.eval(tau * t).unwrap());
        let deriv: Option<TangentEval> = if self.deriv.is_some() || tau == 0.0 {
            let inner = self.clone();
            Some(Arc::new(move |t| {
                if tau == 0.0 {
                    match inner.eval(0.0).unwrap().rep {
                        Rep::Matrix(m) => Rep::Matrix(m * 0.0),
                        Rep::Vector(v) => Rep::Vector(v * 0.0),
                    }
                } else {
                    match inner.derivative(tau * t).unwrap() {
                        Rep::Matrix(m) => Rep::Matrix(m * tau),
                        Rep::Vector(v) => Rep::Vector(v * tau),
                    }
                }
            }))
        } else {
            None
        };
        GroupCurve::new(
            self.group,
            (0.0, 1.0 / m as f64),
            self.smoothness,
            eval,
            deriv,
        )
    }
}

/// Grid approximation of 𝔭_∞(φ) = sup_t 𝔭(φ(t)) over `grid_points` uniform
/// samples of the curve domain.
pub fn sup_seminorm(p: &Seminorm, phi: &PiecewiseCurve, grid_points: usize) -> Result<f64> {
    if grid_points == 0 {
        return Err(Error::Domain("empty sample grid".into()));
    }
    let (a, b) = phi.domain();
    let mut sup = 0.0f64;
    for i in 0..grid_points {
        let t = if grid_points == 1 {
            a
        } else {
            a + (b - a) * i as f64 / (grid_points - 1) as f64
        };
        sup = sup.max(p.eval(&phi.eval(t)?.coords)?);
    }
    Ok(sup)
}

/// Composite-midpoint quadrature of t ↦ 𝔮(φ(t)) over each piece, summed.
pub fn l1_seminorm(q: &Seminorm, phi: &PiecewiseCurve, steps_per_piece: usize) -> Result<f64> {
    if steps_per_piece == 0 {
        return Err(Error::Domain("steps_per_piece must be ≥ 1".into()));
    }
    let mut total = 0.0;
    for w in phi.breakpoints().windows(2) {
        let h = (w[1] - w[0]) / steps_per_piece as f64;
        for i in 0..steps_per_piece {
            let t = w[0] + (i as f64 + 0.5) * h;
            total += h * q.eval(&phi.eval(t)?.coords)?;
        }
    }
    Ok(total)
}
