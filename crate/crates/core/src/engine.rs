//! The product integral (evolution map), the right logarithmic derivative,
//! and executable forms of the elementary identities.
//!
//! Steps act by left-multiplication with the exponential of the sampled
//! integrand: g ← exp(h·φ(u))·g. That matches the right-logarithmic-derivative
//! convention μ̇ = φ·μ and orders compositions with later times on the left.

use nalgebra::DVector;

use crate::curve::{reparametrize, C1Map, GroupCurve, PiecewiseCurve, Smoothness};
use crate::error::{Error, Result};
use crate::group::{AlgebraElement, GroupElement, GroupKind};
use crate::model::{ModelVector, Seminorm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    LeftEuler,
    Midpoint,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::LeftEuler => "left-euler",
            Scheme::Midpoint => "midpoint",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub steps_per_unit: usize,
    pub breakpoint_refinement: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            scheme: Scheme::Midpoint,
            steps_per_unit: 1024,
            breakpoint_refinement: true,
        }
    }
}

impl StepperConfig {
    pub fn with_steps(self, steps_per_unit: usize) -> Self {
        StepperConfig {
            steps_per_unit,
            ..self
        }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        StepperConfig { scheme, ..self }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub endpoint: GroupElement,
    /// Partial products at every partition point (when retained). The first
    /// entry is the identity: ⨏_s^s = e.
    pub trajectory: Option<Vec<(f64, GroupElement)>>,
    pub partition: Vec<f64>,
    pub scheme: Scheme,
}

/// Build the integration partition over [s, t]. With refinement, every
/// breakpoint of the curve inside (s, t) becomes a partition point and each
/// segment is stepped uniformly; without it, the grid is uniform on [s, t].
pub fn partition(phi: &PiecewiseCurve, s: f64, t: f64, cfg: &StepperConfig) -> Vec<f64> {
    let spu = cfg.steps_per_unit.max(1) as f64;
    if !cfg.breakpoint_refinement {
        let n = ((t - s) * spu).ceil().max(1.0) as usize;
        return (0..=n).map(|i| s + (t - s) * i as f64 / n as f64).collect();
    }
    let mut anchors = vec![s];
    for &bp in phi.breakpoints() {
        if bp > s + 1e-14 && bp < t - 1e-14 {
            anchors.push(bp);
        }
    }
    anchors.push(t);
    let mut grid = Vec::new();
    for w in anchors.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) * spu).ceil().max(1.0) as usize;
        for i in 0..n {
            grid.push(a + (b - a) * i as f64 / n as f64);
        }
    }
    grid.push(t);
    grid
}

fn sample_point(scheme: Scheme, a: f64, b: f64) -> f64 {
    match scheme {
        Scheme::LeftEuler => a,
        Scheme::Midpoint => 0.5 * (a + b),
    }
}

fn evolve_on_grid(
    phi: &PiecewiseCurve,
    grid: &[f64],
    scheme: Scheme,
    keep_trajectory: bool,
) -> Result<EvolutionResult> {
    let group = phi.group;
    let mut g = group.identity();
    let mut trajectory = if keep_trajectory {
        Some(vec![(grid[0], g.clone())])
    } else {
        None
    };
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let x = phi.eval(sample_point(scheme, a, b))?;
        g = group.multiply(&group.exp(&x.scale(h))?, &g)?;
        if let Some(traj) = trajectory.as_mut() {
            traj.push((b, g.clone()));
        }
    }
    Ok(EvolutionResult {
        endpoint: g,
        trajectory,
        partition: grid.to_vec(),
        scheme,
    })
}

/// The product integral ⨏_s^t φ with the configured stepper. ⨏_s^s = e
/// exactly.
pub fn evolve(
    phi: &PiecewiseCurve,
    s: f64,
    t: f64,
    cfg: &StepperConfig,
) -> Result<EvolutionResult> {
    let (a, b) = phi.domain();
    if s > t {
        return Err(Error::Domain(
            "backward integration is not supported".into(),
        ));
    }
    if s < a - 1e-12 || t > b + 1e-12 {
        return Err(Error::Domain(format!(
            "[{s}, {t}] outside curve domain [{a}, {b}]"
        )));
    }
    if (t - s).abs() < 1e-300 {
        return Ok(EvolutionResult {
            endpoint: phi.group.identity(),
            trajectory: Some(vec![(s, phi.group.identity())]),
            partition: vec![s],
            scheme: cfg.scheme,
        });
    }
    evolve_on_grid(phi, &partition(phi, s, t, cfg), cfg.scheme, false)
}

/// Trajectory of partial products ⨏_s^• φ at every partition point.
pub fn evolve_curve(phi: &PiecewiseCurve, s: f64, cfg: &StepperConfig) -> Result<EvolutionResult> {
    let (_, b) = phi.domain();
    let (a2, _) = phi.domain();
    if s < a2 - 1e-12 || s >= b {
        return Err(Error::Domain(format!("start {s} outside curve domain")));
    }
    evolve_on_grid(phi, &partition(phi, s, b, cfg), cfg.scheme, true)
}

/// Right logarithmic derivative δ(μ)(t) in algebra coordinates: μ̇(t)·μ(t)⁻¹
/// for matrix groups, μ̇(t) for the additive group, μ̇_j/μ_j for the diagonal
/// group.
pub fn log_derivative(mu: &GroupCurve, t: f64) -> Result<AlgebraElement> {
    if mu.smoothness != Smoothness::C1 {
        return Err(Error::Contract(
            "right logarithmic derivative requires a C¹ curve".into(),
        ));
    }
    let group = mu.group;
    let g = mu.eval(t)?;
    let dg = mu.derivative(t)?;
    match group {
        GroupKind::Abelian(d) => AlgebraElement::new(
            group,
            ModelVector::new(crate::model::SpaceId::Seq(d), dg.as_vector()?.clone())?,
        ),
        GroupKind::DiagOp(d) => {
            let v = g.rep.as_vector()?;
            let dv = dg.as_vector()?;
            AlgebraElement::new(
                group,
                ModelVector::new(
                    crate::model::SpaceId::Seq(d),
                    DVector::from_iterator(d, dv.iter().zip(v.iter()).map(|(a, b)| a / b)),
                )?,
            )
        }
        _ => {
            let gi = group.inverse(&g)?;
            let m = dg.as_matrix()? * gi.rep.as_matrix()?;
            Ok(AlgebraElement::from_matrix(group, &m))
        }
    }
}

/// 𝔭∘κ(left⁻¹·right): the chart-based discrepancy between two group elements.
pub fn chart_residual(
    group: GroupKind,
    left: &GroupElement,
    right: &GroupElement,
    p: &Seminorm,
) -> Result<f64> {
    let diff = group.multiply(&group.inverse(left)?, right)?;
    p.eval(&group.chart_forward(&diff)?)
}

enum CompositeMode {
    /// φ + Ad_{⨏φ}(ψ), the logarithmic derivative of the pointwise product
    Sum,
    /// Ad_{[⨏φ]⁻¹}(ψ − φ), the logarithmic derivative of [⨏φ]⁻¹·⨏ψ
    AdDifference,
}

/// Evolve the Ad-composite integrand along the stored trajectory of φ.
///
/// For midpoint, the Ad frame is advanced half a step (sampled at the quarter
/// point) so the composite integrand stays second-order accurate.
fn co_evolve_composite(
    phi: &PiecewiseCurve,
    psi: &PiecewiseCurve,
    grid: &[f64],
    scheme: Scheme,
    mode: CompositeMode,
) -> Result<GroupElement> {
    let group = phi.group;
    let mut g_phi = group.identity();
    let mut g_c = group.identity();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let u = sample_point(scheme, a, b);
        let frame = match scheme {
            Scheme::LeftEuler => g_phi.clone(),
            Scheme::Midpoint => {
                let half = phi.eval(a + 0.25 * h)?.scale(0.5 * h);
                group.multiply(&group.exp(&half)?, &g_phi)?
            }
        };
        let value = match mode {
            CompositeMode::Sum => {
                let ad = group.adjoint(&frame, &psi.eval(u)?)?;
                phi.eval(u)?.add(&ad)?
            }
            CompositeMode::AdDifference => {
                let diff = psi.eval(u)?.sub(&phi.eval(u)?)?;
                group.adjoint(&group.inverse(&frame)?, &diff)?
            }
        };
        g_c = group.multiply(&group.exp(&value.scale(h))?, &g_c)?;
        g_phi = group.multiply(&group.exp(&phi.eval(u)?.scale(h))?, &g_phi)?;
    }
    Ok(g_c)
}

fn merged_partition(phi: &PiecewiseCurve, psi: &PiecewiseCurve, cfg: &StepperConfig) -> Vec<f64> {
    let merged = phi.with_breakpoints(psi.breakpoints());
    let (a, b) = merged.domain();
    partition(&merged, a, b, cfg)
}

fn check_shared_domain(phi: &PiecewiseCurve, psi: &PiecewiseCurve) -> Result<()> {
    let (a, b) = phi.domain();
    let (c, d) = psi.domain();
    if (a - c).abs() > 1e-12 || (b - d).abs() > 1e-12 {
        return Err(Error::Domain("curves must share their domain".into()));
    }
    Ok(())
}

/// Residual of the product identity
/// ⨏φ · ⨏ψ = ⨏[φ + Ad_{⨏_r^•φ}(ψ)], measured as 𝔭∘κ(left⁻¹·right).
pub fn identity_a_residual(
    phi: &PiecewiseCurve,
    psi: &PiecewiseCurve,
    p: &Seminorm,
    cfg: &StepperConfig,
) -> Result<f64> {
    check_shared_domain(phi, psi)?;
    let group = phi.group;
    let (a, b) = phi.domain();
    let grid = merged_partition(phi, psi, cfg);
    let left = group.multiply(
        &evolve(phi, a, b, cfg)?.endpoint,
        &evolve(psi, a, b, cfg)?.endpoint,
    )?;
    let right = co_evolve_composite(phi, psi, &grid, cfg.scheme, CompositeMode::Sum)?;
    chart_residual(group, &left, &right, p)
}

/// Residual of [⨏φ]⁻¹[⨏ψ] = ⨏ Ad_{[⨏_r^•φ]⁻¹}(ψ − φ).
pub fn identity_b_residual(
    phi: &PiecewiseCurve,
    psi: &PiecewiseCurve,
    p: &Seminorm,
    cfg: &StepperConfig,
) -> Result<f64> {
    check_shared_domain(phi, psi)?;
    let group = phi.group;
    let (a, b) = phi.domain();
    let grid = merged_partition(phi, psi, cfg);
    let left = group.multiply(
        &group.inverse(&evolve(phi, a, b, cfg)?.endpoint)?,
        &evolve(psi, a, b, cfg)?.endpoint,
    )?;
    let right = co_evolve_composite(phi, psi, &grid, cfg.scheme, CompositeMode::AdDifference)?;
    chart_residual(group, &left, &right, p)
}

/// Residual of the splitting identity: ⨏_r^{r'} φ against the time-descending
/// product of segment integrals over the given partition. With breakpoint
/// refinement the two sides are the same composition regrouped, so the
/// residual is at roundoff.
pub fn identity_c_residual(
    phi: &PiecewiseCurve,
    pts: &[f64],
    p: &Seminorm,
    cfg: &StepperConfig,
) -> Result<f64> {
    let group = phi.group;
    let (a, b) = phi.domain();
    let mut anchors = vec![a];
    for &t in pts {
        if t <= a || t >= b {
            return Err(Error::Domain(format!(
                "partition point {t} outside ({a}, {b})"
            )));
        }
        anchors.push(t);
    }
    anchors.push(b);
    anchors.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if anchors.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("partition points must be distinct".into()));
    }
    let phi_aug = phi.with_breakpoints(pts);
    let left = evolve(&phi_aug, a, b, cfg)?.endpoint;
    let mut right = group.identity();
    for w in anchors.windows(2) {
        let seg = evolve(&phi_aug, w[0], w[1], cfg)?.endpoint;
        right = group.multiply(&seg, &right)?;
    }
    chart_residual(group, &left, &right, p)
}

/// Residual of the substitution identity
/// ⨏_r^{ϱ(ℓ')} φ = [⨏_ℓ^{ℓ'} ϱ̇·(φ∘ϱ)]·[⨏_r^{ϱ(ℓ)} φ], compared at t = ℓ'.
///
/// The reparametrized factor is stepped on the ϱ-preimage of the left side's
/// partition, so affine ϱ maps steps one-to-one and the residual collapses to
/// roundoff for matched grids.
pub fn identity_d_residual(
    phi: &PiecewiseCurve,
    rho: &C1Map,
    p: &Seminorm,
    cfg: &StepperConfig,
) -> Result<f64> {
    let group = phi.group;
    let (r, _) = phi.domain();
    let (ell, ell_prime) = rho.domain;
    let start = (rho.map)(ell);
    let end = (rho.map)(ell_prime);
    if end < start {
        return Err(Error::Domain(
            "decreasing reparametrization would require backward integration".into(),
        ));
    }
    let left = evolve(phi, r, end, cfg)?.endpoint;

    let pulled = reparametrize(phi, rho)?;
    let forward_grid = partition(phi, start, end, cfg);
    // pull the forward partition back through ϱ
    let mut back_grid = Vec::with_capacity(forward_grid.len());
    back_grid.push(ell);
    for &g in &forward_grid[1..forward_grid.len() - 1] {
        if let Some(t) = crate::curve::preimages(rho, g).first() {
            back_grid.push(*t);
        }
    }
    back_grid.push(ell_prime);
    back_grid.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let repar_end = if back_grid.len() >= 2 {
        evolve_on_grid(&pulled, &back_grid, cfg.scheme, false)?.endpoint
    } else {
        group.identity()
    };

    let base = if (start - r).abs() < 1e-300 {
        group.identity()
    } else {
        evolve(phi, r, start, cfg)?.endpoint
    };
    let right = group.multiply(&repar_end, &base)?;
    chart_residual(group, &left, &right, p)
}

/// Result of the exponential scaling identity check.
#[derive(Debug, Clone, Copy)]
pub struct ExpScalingResidual {
    /// 𝔭∘κ residual between ⨏_0^{s·n} φ_X^n and exp(s·n·X).
    pub scaled: f64,
    /// 𝔭∘κ residual between ⨏_0^n φ_X^n and exp(X)^n.
    pub power: f64,
}

impl ExpScalingResidual {
    pub fn max(&self) -> f64 {
        self.scaled.max(self.power)
    }
}

/// Checks ⨏_0^{s·n} φ_X^n = exp(s·n·X) and ⨏_0^n φ_X^n = exp(X)^n.
pub fn exp_scaling_check(
    x: &AlgebraElement,
    s: f64,
    n: usize,
    p: &Seminorm,
    cfg: &StepperConfig,
) -> Result<ExpScalingResidual> {
    if !(s > 0.0 && s <= 1.0) || n == 0 {
        return Err(Error::Domain("need s ∈ (0, 1] and n ≥ 1".into()));
    }
    let group = x.group;
    let phi_n = PiecewiseCurve::constant(x, 0.0, n as f64)?;

    let evolved = evolve(&phi_n, 0.0, s * n as f64, cfg)?.endpoint;
    let closed = group.exp(&x.scale(s * n as f64))?;
    let scaled = chart_residual(group, &closed, &evolved, p)?;

    let full = evolve(&phi_n, 0.0, n as f64, cfg)?.endpoint;
    let single = group.exp(x)?;
    let mut powered = group.identity();
    for _ in 0..n {
        powered = group.multiply(&single, &powered)?;
    }
    let power = chart_residual(group, &powered, &full, p)?;
    Ok(ExpScalingResidual { scaled, power })
}
