//! Numerical probes for the convexity-type inequalities.
//!
//! None of these probes can certify an inequality over the full system of
//! continuous seminorms; a finite registered family only probes it. Each
//! probe draws reproducible samples (seed recorded in the report), counts
//! violations against a relative tolerance, and keeps the worst witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{l1_seminorm, PiecewiseCurve};
use crate::engine::{evolve_curve, StepperConfig};
use crate::error::{Error, Result};
use crate::group::{AlgebraElement, GroupElement, GroupKind};
use crate::model::Seminorm;

/// Relative tolerance separating genuine violations from roundoff.
pub const VIOLATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub probe: String,
    pub group: String,
    pub p: String,
    pub q: String,
    pub samples: usize,
    pub violations: usize,
    /// bound minus value; negative means violated.
    pub worst_margin: f64,
    pub witness: String,
    pub seed: u64,
}

impl ProbeReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.probe,
            self.group,
            self.p,
            self.q,
            self.samples,
            self.violations,
            self.worst_margin,
            self.seed
        )
    }

    pub const CSV_HEADER: &'static str = "probe,group,p,q,samples,violations,worst_margin,seed";

    fn record(&mut self, margin: f64, bound: f64, witness: String) {
        if margin < -VIOLATION_TOL * (1.0 + bound.abs()) {
            self.violations += 1;
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.witness = witness;
        }
    }
}

/// Sampling parameters shared by the probes.
#[derive(Debug, Clone, Copy)]
pub struct SampleSpec {
    pub samples: usize,
    pub radius: f64,
    pub max_factors: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            samples: 1000,
            radius: 0.5,
            max_factors: 8,
            seed: 7,
        }
    }
}

/// Uniform draw from the algebra-coordinate ball of the given radius
/// (Gaussian direction, radial density u^{1/d}).
pub fn random_algebra_element(
    group: GroupKind,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> AlgebraElement {
    let d = group.algebra_dim();
    let mut dir: Vec<f64> = (0..d)
        .map(|_| {
            // Box-Muller
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let r = radius * rng.gen_range(0.0f64..1.0).powf(1.0 / d as f64);
    for x in dir.iter_mut() {
        *x *= r / norm;
    }
    group.algebra_from_minimal(&dir).expect("dimension matches")
}

/// Probe of the product-seminorm inequality
/// (𝔭∘κ)(κ⁻¹(X₁)·…·κ⁻¹(X_n)) ≤ 𝔮(X₁)+…+𝔮(X_n) for tuples with Σ𝔮(X_i) ≤ 1.
pub fn mu_convexity_probe(
    p: &Seminorm,
    q: &Seminorm,
    group: GroupKind,
    spec: &SampleSpec,
) -> Result<ProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut report = ProbeReport {
        probe: "mu-convexity".into(),
        group: group.to_string(),
        p: p.to_string(),
        q: q.to_string(),
        samples: spec.samples,
        violations: 0,
        worst_margin: f64::INFINITY,
        witness: String::new(),
        seed: spec.seed,
    };
    for sample in 0..spec.samples {
        let n = rng.gen_range(1..=spec.max_factors.max(1));
        let mut factors: Vec<AlgebraElement> = (0..n)
            .map(|_| random_algebra_element(group, spec.radius, &mut rng))
            .collect();
        let mut bound: f64 = 0.0;
        for x in &factors {
            bound += q.eval(&x.coords)?;
        }
        // rescale so the tuple saturates a random fraction of the budget
        let target: f64 = rng.gen_range(0.1..=1.0);
        if bound > 1e-300 {
            let c = target / bound;
            if c < 1.0 {
                for x in factors.iter_mut() {
                    *x = x.scale(c);
                }
                bound = target;
            }
        }
        let mut product = group.identity();
        let mut escaped = false;
        for x in &factors {
            product = group.multiply(&product, &group.chart_backward(&x.coords)?)?;
        }
        let value = match group.chart_forward(&product) {
            Ok(v) => p.eval(&v)?,
            Err(Error::OutOfChartDomain(_)) => {
                escaped = true;
                f64::INFINITY
            }
            Err(e) => return Err(e),
        };
        let margin = if escaped {
            f64::NEG_INFINITY
        } else {
            bound - value
        };
        report.record(
            margin,
            bound,
            format!("sample={sample},n={n},escaped={escaped}"),
        );
    }
    Ok(report)
}

/// Probe of 𝔮∘Ad_g ≤ 𝔪 over a finite element sample and random X.
pub fn adjoint_domination_probe(
    q: &Seminorm,
    m: &Seminorm,
    group: GroupKind,
    elements: &[GroupElement],
    spec: &SampleSpec,
) -> Result<ProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut report = ProbeReport {
        probe: "adjoint-domination".into(),
        group: group.to_string(),
        p: q.to_string(),
        q: m.to_string(),
        samples: elements.len() * spec.samples,
        violations: 0,
        worst_margin: f64::INFINITY,
        witness: String::new(),
        seed: spec.seed,
    };
    for (gi, g) in elements.iter().enumerate() {
        for _ in 0..spec.samples {
            let x = random_algebra_element(group, spec.radius, &mut rng);
            let bound = m.eval(&x.coords)?;
            let value = q.eval(&group.adjoint(g, &x)?.coords)?;
            report.record(bound - value, bound, format!("element={gi}"));
        }
    }
    Ok(report)
}

fn quadrature_weights(grid: &[f64]) -> Vec<f64> {
    grid.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Check (𝔭∘κ)(⨏_r^• φ) ≤ ∫_r^• 𝔮(φ(s)) ds at every partition point, after
/// rescaling φ so that ∫𝔮(φ) ≤ 1 (the applied scale is recorded in the
/// witness).
pub fn prop2_bound_check(
    p: &Seminorm,
    q: &Seminorm,
    phi: &PiecewiseCurve,
    cfg: &StepperConfig,
) -> Result<ProbeReport> {
    let group = phi.group;
    let l1 = l1_seminorm(q, phi, cfg.steps_per_unit.max(16))?;
    let scale = if l1 > 1.0 { 1.0 / l1 } else { 1.0 };
    let phi = phi.scale(scale);

    let mut report = ProbeReport {
        probe: "prop2-bound".into(),
        group: group.to_string(),
        p: p.to_string(),
        q: q.to_string(),
        samples: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        witness: format!("scale={scale}"),
        seed: 0,
    };

    let (a, _) = phi.domain();
    let result = evolve_curve(&phi, a, cfg)?;
    let traj = result.trajectory.as_ref().unwrap();
    let weights = quadrature_weights(&result.partition);
    let mut integral = 0.0;
    for (i, (t, g)) in traj.iter().enumerate() {
        if i > 0 {
            let mid = 0.5 * (result.partition[i - 1] + result.partition[i]);
            integral += weights[i - 1] * q.eval(&phi.eval(mid)?.coords)?;
        }
        report.samples += 1;
        let margin = match group.chart_forward(g) {
            Ok(v) => integral - p.eval(&v)?,
            Err(Error::OutOfChartDomain(_)) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        report.record(margin, integral, format!("t={t},scale={scale}"));
    }
    Ok(report)
}

/// Check the two-curve bound
/// (𝔭∘κ)([⨏φ]⁻¹[⨏ψ]) ≤ ∫ 𝔪(ψ − φ) at every partition point.
///
/// Both curves are scaled by a common factor so that ∫𝔪(ψ−φ) ≤ 1. Whether the
/// φ-trajectory stayed inside the open chart ball is recorded as data.
pub fn two_curve_bound_check(
    p: &Seminorm,
    m: &Seminorm,
    phi: &PiecewiseCurve,
    psi: &PiecewiseCurve,
    cfg: &StepperConfig,
) -> Result<ProbeReport> {
    let group = phi.group;
    let diff = psi.sub(phi)?;
    let l1 = l1_seminorm(m, &diff, cfg.steps_per_unit.max(16))?;
    let scale = if l1 > 1.0 { 1.0 / l1 } else { 1.0 };
    let phi = phi.scale(scale);
    let psi = psi.scale(scale);
    let diff = psi.sub(&phi)?;

    let mut report = ProbeReport {
        probe: "two-curve-bound".into(),
        group: group.to_string(),
        p: p.to_string(),
        q: m.to_string(),
        samples: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        witness: format!("scale={scale}"),
        seed: 0,
    };

    let (a, _) = phi.domain();
    // shared partition so the two trajectories line up
    let merged = phi.with_breakpoints(psi.breakpoints());
    let (ma, mb) = merged.domain();
    let grid = crate::engine::partition(&merged, ma, mb, cfg);

    let mut g_phi = group.identity();
    let mut g_psi = group.identity();
    let mut integral = 0.0;
    let mut inside_chart_ball = true;
    let _ = a;
    for w in grid.windows(2) {
        report.samples += 1;
        let (lo, hi) = (w[0], w[1]);
        let h = hi - lo;
        let u = match cfg.scheme {
            crate::engine::Scheme::LeftEuler => lo,
            crate::engine::Scheme::Midpoint => lo + 0.5 * h,
        };
        g_phi = group.multiply(&group.exp(&phi.eval(u)?.scale(h))?, &g_phi)?;
        g_psi = group.multiply(&group.exp(&psi.eval(u)?.scale(h))?, &g_psi)?;
        integral += h * m.eval(&diff.eval(u)?.coords)?;
        if group.chart_forward(&g_phi).is_err() {
            inside_chart_ball = false;
        }
        let rel = group.multiply(&group.inverse(&g_phi)?, &g_psi)?;
        let margin = match group.chart_forward(&rel) {
            Ok(v) => integral - p.eval(&v)?,
            Err(Error::OutOfChartDomain(_)) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        report.record(
            margin,
            integral,
            format!("t={hi},scale={scale},inside_O={inside_chart_ball}"),
        );
    }
    if !report.witness.contains("inside_O") {
        report.witness = format!("{},inside_O={inside_chart_ball}", report.witness);
    }
    Ok(report)
}

/// Grid search for the smallest scale of the dominating seminorm with zero
/// violations. `NotFound` is a value, not an error.
pub fn seminorm_search<F>(
    base: &Seminorm,
    scale_grid: &[f64],
    mut probe: F,
) -> Result<Option<(f64, ProbeReport)>>
where
    F: FnMut(&Seminorm) -> Result<ProbeReport>,
{
    for &c in scale_grid {
        let candidate = base.rescaled(c);
        let report = probe(&candidate)?;
        if report.violations == 0 {
            return Ok(Some((c, report)));
        }
    }
    Ok(None)
}
