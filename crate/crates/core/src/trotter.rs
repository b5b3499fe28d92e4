//! Operational reconstruction of the strong-Trotter limit.
//!
//! Given a C¹ curve μ through the identity with X = μ̇(0), the harness builds
//! the restricted logarithmic derivative χ_{τ,n}, its n-fold concatenation
//! φ_{τ,n}, verifies the power identity ⨏φ_{τ,n} = μ(τ/n)ⁿ, and measures the
//! discrepancy 𝔭∘κ(exp(τ·X)⁻¹·μ(τ/n)ⁿ) over τ-grids as n grows.
//!
//! μ(τ/n)ⁿ is always computed by exact curve evaluation and repeated
//! multiplication, never through the stepper: that keeps the measured
//! quantity the Trotter discrepancy itself, free of discretization error.

use std::sync::Arc;

use crate::curve::{GroupCurve, PiecewiseCurve};
use crate::engine::{chart_residual, evolve, log_derivative, StepperConfig};
use crate::error::{Error, Result};
use crate::group::{AlgebraElement, GroupKind};
use crate::model::Seminorm;

/// Worker cap for parameter sweeps, from the PRODINT_THREADS environment
/// variable (default 1: sequential, fully deterministic either way).
pub fn worker_count() -> usize {
    std::env::var("PRODINT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// The bundle (μ, X = μ̇(0), ℓ, m) behind one Trotter experiment.
#[derive(Clone)]
pub struct TrotterFamily {
    pub group: GroupKind,
    pub mu: GroupCurve,
    pub x: AlgebraElement,
    pub ell: f64,
    pub m: usize,
}

impl TrotterFamily {
    /// Validates μ(0) = e, stores X = δ(μ)(0), and chooses m as the smallest
    /// integer such that μ([0, ℓ/m]) stays inside the chart domain
    /// (grid-checked on 65 points).
    pub fn new(group: GroupKind, mu: GroupCurve, ell: f64) -> Result<Self> {
        if ell <= 0.0 {
            return Err(Error::Domain("ℓ must be positive".into()));
        }
        let at_zero = mu.eval(0.0)?;
        let chart_zero = group.chart_forward(&at_zero)?;
        if chart_zero.coords.norm() > 1e-10 {
            return Err(Error::Contract("curve must start at the identity".into()));
        }
        let x = log_derivative(&mu, 0.0)?;
        let (_, b) = mu.domain;
        let m_min = (ell / b).ceil().max(1.0) as usize;
        let mut chosen = None;
        for m in m_min..=4096 {
            let top = ell / m as f64;
            let ok = (0..=64).all(|i| {
                let t = top * i as f64 / 64.0;
                mu.eval(t).and_then(|g| group.chart_forward(&g)).is_ok()
            });
            if ok {
                chosen = Some(m);
                break;
            }
        }
        let m = chosen.ok_or_else(|| {
            Error::OutOfChartDomain("no m ≤ 4096 keeps μ([0, ℓ/m]) inside the chart".into())
        })?;
        Ok(TrotterFamily {
            group,
            mu,
            x,
            ell,
            m,
        })
    }

    fn check_params(&self, tau: f64, n: usize) -> Result<()> {
        if !(0.0..=self.ell).contains(&tau) {
            return Err(Error::Domain(format!(
                "τ = {tau} outside [0, {}]",
                self.ell
            )));
        }
        if n < self.m {
            return Err(Error::Domain(format!("n = {n} below m = {}", self.m)));
        }
        Ok(())
    }

    /// χ_{τ,n} = δ(μ_τ)|_{[0,1/n]} as a single-piece algebra curve.
    pub fn build_chi(&self, tau: f64, n: usize) -> Result<PiecewiseCurve> {
        self.check_params(tau, n)?;
        let mu_tau = self.mu.rescale(tau, self.m)?;
        let piece: crate::curve::AlgebraEval =
            Arc::new(move |t| log_derivative(&mu_tau, t).unwrap().coords.coords);
        PiecewiseCurve::new(self.group, vec![0.0, 1.0 / n as f64], vec![piece])
    }

    /// φ_{τ,n} on [0, 1]: n shifted copies of χ_{τ,n} with breakpoints p/n.
    pub fn build_phi(&self, tau: f64, n: usize) -> Result<PiecewiseCurve> {
        self.check_params(tau, n)?;
        let chi = self.build_chi(tau, n)?;
        let nf = n as f64;
        let breakpoints: Vec<f64> = (0..=n).map(|p| p as f64 / nf).collect();
        let pieces: Vec<crate::curve::AlgebraEval> = (0..n)
            .map(|p| {
                let chi = chi.clone();
                let offset = p as f64 / nf;
                let f: crate::curve::AlgebraEval =
                    Arc::new(move |t| chi.eval_coords(t - offset).unwrap());
                f
            })
            .collect();
        PiecewiseCurve::new(self.group, breakpoints, pieces)
    }

    /// μ(τ/n)ⁿ by exact evaluation and repeated multiplication.
    pub fn group_power(&self, tau: f64, n: usize) -> Result<crate::group::GroupElement> {
        let g = self.mu.eval(tau / n as f64)?;
        let mut acc = self.group.identity();
        for _ in 0..n {
            acc = self.group.multiply(&g, &acc)?;
        }
        Ok(acc)
    }

    /// Residual 𝔭∘κ((μ(τ/n)ⁿ)⁻¹ · ⨏φ_{τ,n}): the stepper against the exact
    /// regrouped product.
    pub fn verify_power_identity(
        &self,
        tau: f64,
        n: usize,
        p: &Seminorm,
        cfg: &StepperConfig,
    ) -> Result<f64> {
        let phi = self.build_phi(tau, n)?;
        let integrated = evolve(&phi, 0.0, 1.0, cfg)?.endpoint;
        let power = self.group_power(tau, n)?;
        chart_residual(self.group, &power, &integrated, p)
    }

    /// The Trotter discrepancy 𝔭∘κ(exp(τ·X)⁻¹ · μ(τ/n)ⁿ). Returns +∞ when
    /// the discrepancy leaves the chart (expected for small n).
    pub fn trotter_error(&self, tau: f64, n: usize, p: &Seminorm) -> Result<f64> {
        self.check_params(tau, n)?;
        let limit = self.group.exp(&self.x.scale(tau))?;
        let power = self.group_power(tau, n)?;
        match chart_residual(self.group, &limit, &power, p) {
            Ok(r) => Ok(r),
            Err(Error::OutOfChartDomain(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub sup_error: f64,
    pub argmax_tau: f64,
}

/// Sup-over-τ Trotter errors per n, plus the measured thresholds n_ε.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<SweepRow>,
    pub tau_grid_size: usize,
    pub seminorm: String,
    /// (ε, smallest listed n with sup error ≤ ε).
    pub n_eps: Vec<(f64, Option<usize>)>,
}

impl ConvergenceTable {
    /// Least-squares slope of log(sup_error) against log(n), skipping
    /// non-finite rows.
    pub fn fitted_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.sup_error.is_finite() && r.sup_error > 0.0)
            .map(|r| ((r.n as f64).ln(), r.sup_error.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
    }
}

/// Default ε thresholds realizing the measured convergence indices.
pub const DEFAULT_EPS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Sweep sup_τ trotter_error over a uniform τ grid on [0, ℓ] for each n.
///
/// The (τ, n) map is pure; rows are computed in up to `worker_count()`
/// chunks and reassembled in n-order, so the result is deterministic.
pub fn uniform_trotter_sweep(
    fam: &TrotterFamily,
    tau_grid_size: usize,
    n_list: &[usize],
    p: &Seminorm,
    eps: &[f64],
) -> Result<ConvergenceTable> {
    if tau_grid_size < 2 {
        return Err(Error::Domain("τ grid needs at least 2 points".into()));
    }
    let taus: Vec<f64> = (0..tau_grid_size)
        .map(|i| fam.ell * i as f64 / (tau_grid_size - 1) as f64)
        .collect();

    let sweep_one = |&n: &usize| -> Result<SweepRow> {
        let mut sup = 0.0f64;
        let mut argmax = 0.0;
        for &tau in &taus {
            let e = fam.trotter_error(tau, n, p)?;
            if e > sup {
                sup = e;
                argmax = tau;
            }
        }
        Ok(SweepRow {
            n,
            sup_error: sup,
            argmax_tau: argmax,
        })
    };

    let workers = worker_count().min(n_list.len().max(1));
    let rows: Vec<SweepRow> = if workers <= 1 {
        n_list.iter().map(sweep_one).collect::<Result<Vec<_>>>()?
    } else {
        let chunk = n_list.len().div_ceil(workers);
        let results: Vec<Result<Vec<SweepRow>>> = std::thread::scope(|scope| {
            n_list
                .chunks(chunk)
                .map(|c| scope.spawn(move || c.iter().map(sweep_one).collect()))
                .collect::<Vec<_>>()
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
        let mut rows = Vec::with_capacity(n_list.len());
        for r in results {
            rows.extend(r?);
        }
        rows
    };

    let n_eps = eps
        .iter()
        .map(|&e| {
            let n = rows.iter().find(|r| r.sup_error <= e).map(|r| r.n);
            (e, n)
        })
        .collect();
    Ok(ConvergenceTable {
        rows,
        tau_grid_size,
        seminorm: p.to_string(),
        n_eps,
    })
}

/// Right- and left-translated uniform distances of a curve sequence from its
/// limit: (sup_t 𝔭∘κ(μ(t)⁻¹ν_n(t)), sup_t 𝔭∘κ(ν_n(t)μ(t)⁻¹)) per n,
/// over a uniform grid. Chart escapes give +∞ entries.
pub fn uniform_convergence_check(
    sequence: &[GroupCurve],
    limit: &GroupCurve,
    p: &Seminorm,
    grid_points: usize,
) -> Result<Vec<(f64, f64)>> {
    if grid_points < 2 {
        return Err(Error::Domain("grid needs at least 2 points".into()));
    }
    let group = limit.group;
    let (a, b) = limit.domain;
    let mut out = Vec::with_capacity(sequence.len());
    for nu in sequence {
        let mut right = 0.0f64;
        let mut left = 0.0f64;
        for i in 0..grid_points {
            let t = a + (b - a) * i as f64 / (grid_points - 1) as f64;
            let mu_t = limit.eval(t)?;
            let nu_t = nu.eval(t)?;
            let mu_inv = group.inverse(&mu_t)?;
            let r = group.multiply(&mu_inv, &nu_t)?;
            let l = group.multiply(&nu_t, &mu_inv)?;
            for (target, g) in [(&mut right, r), (&mut left, l)] {
                match group.chart_forward(&g) {
                    Ok(v) => *target = target.max(p.eval(&v)?),
                    Err(Error::OutOfChartDomain(_)) => *target = f64::INFINITY,
                    Err(e) => return Err(e),
                }
            }
        }
        out.push((right, left));
    }
    Ok(out)
}

/// Oscillation probe for Φ(τ, t) = ⨏_0^t τ·φ on nested grids over L × dom(φ).
///
/// Returns, per refinement level, the maximum chart distance between
/// neighboring grid values. A continuous Φ drives the oscillation to zero.
pub fn continuity_probe(
    phi: &PiecewiseCurve,
    l_interval: (f64, f64),
    levels: usize,
    p: &Seminorm,
    cfg: &StepperConfig,
) -> Result<Vec<f64>> {
    let group = phi.group;
    let (a, b) = phi.domain();
    let (la, lb) = l_interval;
    if la >= lb || levels == 0 {
        return Err(Error::Domain(
            "need a proper L interval and ≥ 1 level".into(),
        ));
    }
    let chart_dist =
        |g: &crate::group::GroupElement, h: &crate::group::GroupElement| -> Result<f64> {
            match group.chart_forward(&group.multiply(&group.inverse(g)?, h)?) {
                Ok(v) => p.eval(&v),
                Err(Error::OutOfChartDomain(_)) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        };
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let cells = 8usize << level;
        let taus: Vec<f64> = (0..=cells)
            .map(|i| la + (lb - la) * i as f64 / cells as f64)
            .collect();
        let ts: Vec<f64> = (0..=cells)
            .map(|j| a + (b - a) * j as f64 / cells as f64)
            .collect();
        // one trajectory per τ, sampled at the t grid points
        let mut values: Vec<Vec<crate::group::GroupElement>> = Vec::with_capacity(taus.len());
        for &tau in &taus {
            let scaled = phi.scale(tau).with_breakpoints(&ts);
            let result = crate::engine::evolve_curve(&scaled, a, cfg)?;
            let traj = result.trajectory.unwrap();
            let mut row = Vec::with_capacity(ts.len());
            for &t in &ts {
                let g = traj
                    .iter()
                    .min_by(|x, y| (x.0 - t).abs().partial_cmp(&(y.0 - t).abs()).unwrap())
                    .unwrap();
                row.push(g.1.clone());
            }
            values.push(row);
        }
        let mut osc = 0.0f64;
        for i in 0..values.len() {
            for j in 0..values[i].len() {
                if i + 1 < values.len() {
                    osc = osc.max(chart_dist(&values[i][j], &values[i + 1][j])?);
                }
                if j + 1 < values[i].len() {
                    osc = osc.max(chart_dist(&values[i][j], &values[i][j + 1])?);
                }
            }
        }
        out.push(osc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Smoothness;
    use crate::group::{GroupElement, Rep};
    use crate::linalg::expm;
    use crate::model::{Seminorm, SpaceId};

    fn frob3() -> Seminorm {
        Seminorm::frobenius(SpaceId::Mat(3), 1.0)
    }

    fn one_param_so3(axis: [f64; 3]) -> GroupCurve {
        let so3 = GroupKind::So3;
        let xm = so3
            .algebra_from_minimal(&axis)
            .unwrap()
            .coords
            .as_matrix()
            .unwrap();
        GroupCurve::new(
            so3,
            (0.0, 1.0),
            Smoothness::C1,
            {
                let xm = xm.clone();
                Arc::new(move |t| GroupElement {
                    group: so3,
                    rep: Rep::Matrix(expm(&(&xm * t))),
                })
            },
            {
                let xm = xm.clone();
                Some(Arc::new(move |t| Rep::Matrix(&xm * expm(&(&xm * t)))))
            },
        )
        .unwrap()
    }

    fn exp_product_so3(a: [f64; 3], b: [f64; 3]) -> GroupCurve {
        let so3 = GroupKind::So3;
        let am = so3
            .algebra_from_minimal(&a)
            .unwrap()
            .coords
            .as_matrix()
            .unwrap();
        let bm = so3
            .algebra_from_minimal(&b)
            .unwrap()
            .coords
            .as_matrix()
            .unwrap();
        GroupCurve::new(
            so3,
            (0.0, 1.0),
            Smoothness::C1,
            {
                let (am, bm) = (am.clone(), bm.clone());
                Arc::new(move |t| GroupElement {
                    group: so3,
                    rep: Rep::Matrix(expm(&(&am * t)) * expm(&(&bm * (t * t)))),
                })
            },
            {
                let (am, bm) = (am.clone(), bm.clone());
                Some(Arc::new(move |t| {
                    let ea = expm(&(&am * t));
                    let eb = expm(&(&bm * (t * t)));
                    Rep::Matrix(&am * &ea * &eb + &ea * (&bm * (2.0 * t)) * &eb)
                }))
            },
        )
        .unwrap()
    }

    #[test]
    fn family_invariants() {
        let fam = TrotterFamily::new(GroupKind::So3, one_param_so3([0.0, 0.0, 0.6]), 1.0).unwrap();
        let expected = GroupKind::So3
            .algebra_from_minimal(&[0.0, 0.0, 0.6])
            .unwrap();
        assert!((fam.x.coords.coords.clone() - expected.coords.coords).norm() < 1e-8);
        assert!(fam.m >= 1);
    }

    #[test]
    fn chi_of_frozen_tau_is_zero() {
        let fam = TrotterFamily::new(GroupKind::So3, one_param_so3([0.3, 0.0, 0.0]), 1.0).unwrap();
        let chi = fam.build_chi(0.0, fam.m.max(4)).unwrap();
        assert!(chi.eval_coords(0.05).unwrap().norm() < 1e-9);
    }

    #[test]
    fn chi_of_one_parameter_subgroup_is_constant() {
        let fam = TrotterFamily::new(GroupKind::So3, one_param_so3([0.0, 0.0, 0.5]), 1.0).unwrap();
        let tau = 0.8;
        let n = fam.m.max(4);
        let chi = fam.build_chi(tau, n).unwrap();
        let expected = fam.x.scale(tau).coords.coords;
        for i in 0..=10 {
            let t = i as f64 / 10.0 / n as f64;
            assert!((chi.eval_coords(t).unwrap() - expected.clone()).norm() < 1e-9);
        }
    }

    #[test]
    fn chi_at_zero_is_tau_x() {
        // χ_{τ,n}(0) = τ·X for any C¹ family
        let fam = TrotterFamily::new(
            GroupKind::So3,
            exp_product_so3([0.4, 0.0, 0.2], [0.0, 0.5, 0.0]),
            1.0,
        )
        .unwrap();
        let tau = 0.7;
        let chi = fam.build_chi(tau, fam.m.max(8)).unwrap();
        let expected = fam.x.scale(tau).coords.coords;
        assert!((chi.eval_coords(0.0).unwrap() - expected).norm() < 1e-7);
    }

    #[test]
    fn phi_pieces_are_shifted_copies() {
        let fam = TrotterFamily::new(
            GroupKind::So3,
            exp_product_so3([0.3, 0.1, 0.0], [0.0, 0.0, 0.4]),
            1.0,
        )
        .unwrap();
        let n = fam.m.max(4);
        let tau = 0.5;
        let chi = fam.build_chi(tau, n).unwrap();
        let phi = fam.build_phi(tau, n).unwrap();
        assert_eq!(phi.breakpoints().len(), n + 1);
        for p in 0..n {
            let offset = p as f64 / n as f64;
            let t = offset + 0.3 / n as f64;
            let expected = chi.eval_coords(t - offset).unwrap();
            assert!((phi.eval_coords(t).unwrap() - expected).norm() < 1e-12);
        }
        // left endpoint of every piece evaluates to τ·X
        let tx = fam.x.scale(tau).coords.coords;
        for p in 0..n {
            // approach the left endpoint from the right (left-piece convention
            // at breakpoints picks the previous piece)
            let t = p as f64 / n as f64 + 1e-12;
            assert!((phi.eval_coords(t).unwrap() - tx.clone()).norm() < 1e-6);
        }
        // n = 1: φ is χ itself
        let phi1 = fam.build_phi(tau, 1.max(fam.m)).unwrap();
        let chi1 = fam.build_chi(tau, 1.max(fam.m)).unwrap();
        let t = 0.4 / 1.max(fam.m) as f64;
        assert!((phi1.eval_coords(t).unwrap() - chi1.eval_coords(t).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn power_identity_trivial_cases() {
        let p = frob3();
        let cfg = StepperConfig::default();
        let fam = TrotterFamily::new(GroupKind::So3, one_param_so3([0.0, 0.0, 0.5]), 1.0).unwrap();
        // τ = 0: both sides the identity
        assert!(
            fam.verify_power_identity(0.0, fam.m.max(4), &p, &cfg)
                .unwrap()
                <= 1e-12
        );
        // one-parameter subgroup: both sides exp(τX)
        assert!(
            fam.verify_power_identity(0.9, fam.m.max(4), &p, &cfg)
                .unwrap()
                <= 1e-12
        );
    }

    #[test]
    fn trotter_error_exactness_cases() {
        let p = frob3();
        let fam = TrotterFamily::new(GroupKind::So3, one_param_so3([0.2, -0.1, 0.4]), 1.0).unwrap();
        for n in [fam.m.max(2), 8, 64] {
            assert!(fam.trotter_error(0.8, n, &p).unwrap() <= 1e-12);
        }
        let fam2 = TrotterFamily::new(
            GroupKind::So3,
            exp_product_so3([0.3, 0.0, 0.1], [0.1, 0.2, 0.0]),
            1.0,
        )
        .unwrap();
        assert!(fam2.trotter_error(0.0, fam2.m.max(4), &p).unwrap() <= 1e-14);
    }

    #[test]
    fn sweep_on_one_parameter_subgroup_is_flat_zero() {
        let p = frob3();
        let fam = TrotterFamily::new(GroupKind::So3, one_param_so3([0.0, 0.3, 0.3]), 1.0).unwrap();
        let n_list = [fam.m.max(2), 8, 32];
        let table = uniform_trotter_sweep(&fam, 11, &n_list, &p, &DEFAULT_EPS).unwrap();
        for row in &table.rows {
            assert!(row.sup_error <= 1e-12, "n = {}", row.n);
        }
        assert_eq!(table.n_eps[0].1, Some(n_list[0]));
    }

    #[test]
    fn uniform_convergence_of_identical_curves_is_zero() {
        let mu = one_param_so3([0.1, 0.0, 0.2]);
        let p = frob3();
        let sups = uniform_convergence_check(std::slice::from_ref(&mu), &mu, &p, 21).unwrap();
        assert!(sups[0].0 <= 1e-12 && sups[0].1 <= 1e-12);
    }

    #[test]
    fn abelian_left_and_right_sups_agree() {
        let ab = GroupKind::Abelian(4);
        let mk = |scale: f64| {
            GroupCurve::new(
                ab,
                (0.0, 1.0),
                Smoothness::C1,
                Arc::new(move |t| GroupElement {
                    group: ab,
                    rep: Rep::Vector(nalgebra::DVector::from_row_slice(&[
                        scale * t,
                        t * t,
                        0.0,
                        -t,
                    ])),
                }),
                None,
            )
            .unwrap()
        };
        let p = Seminorm::frobenius(SpaceId::Seq(4), 1.0);
        let sups = uniform_convergence_check(&[mk(1.3)], &mk(1.0), &p, 33).unwrap();
        assert_eq!(sups[0].0, sups[0].1);
    }

    #[test]
    fn continuity_probe_oscillation_decays() {
        let so3 = GroupKind::So3;
        let x = so3.algebra_from_minimal(&[0.0, 0.0, 0.4]).unwrap();
        let phi = PiecewiseCurve::constant(&x, 0.0, 1.0).unwrap();
        let p = frob3();
        let cfg = StepperConfig::default().with_steps(64);
        let osc = continuity_probe(&phi, (0.0, 2.0), 3, &p, &cfg).unwrap();
        // Φ(τ, t) = exp(tτX) is smooth: oscillation roughly halves per level
        assert!(osc[1] < osc[0] * 0.75, "{osc:?}");
        assert!(osc[2] < osc[1] * 0.75, "{osc:?}");
        // nested grids of a continuous function: nonincreasing within tolerance
        assert!(osc.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        // zero curve: all oscillations vanish
        let zero = phi.scale(0.0);
        let osc0 = continuity_probe(&zero, (0.0, 2.0), 2, &p, &cfg).unwrap();
        assert!(osc0.iter().all(|&o| o == 0.0));
    }
}
