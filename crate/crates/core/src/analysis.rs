//! Solvability certificates, a-priori error bounds, kernel norms and
//! grid-refinement studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Quantity, Result};
use crate::green::M0;
use crate::grid::Grid;
use crate::problem::ProblemSpec;
use crate::solver::{solve, StoppingRule};

/// Errors at or below this level are treated as round-off and left out of
/// order fits.
pub const ERROR_FLOOR: f64 = 1e-12;

/// `K_i = max_x ∫₀¹ |k_i(x, s)| ds`, approximated by the trapezium rule with
/// the maximum taken over grid nodes.
pub fn estimate_kernel_norms(spec: &ProblemSpec, grid: &Grid) -> Result<(f64, f64)> {
    let norm = |k: &dyn Fn(f64, f64) -> f64, quantity| -> Result<f64> {
        let mut best = 0.0f64;
        for (i, &x) in grid.nodes().iter().enumerate() {
            let row: Vec<f64> = grid.nodes().iter().map(|&s| k(x, s).abs()).collect();
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    quantity,
                    node: i,
                    x,
                });
            }
            best = best.max(grid.integrate_slice(&row));
        }
        Ok(best)
    };
    Ok((
        norm(&*spec.k0, Quantity::Kernel0)?,
        norm(&*spec.k1, Quantity::Kernel1)?,
    ))
}

/// Contraction constants for the map `ψ ↦ f(x, u, u∘φ, K0 u, K1 u∘φ)` on the
/// ball `‖ψ‖ ≤ M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub big_m: f64,
    /// Lipschitz constants of `f` in `u, y, v, z`.
    pub lipschitz: [f64; 4],
    pub k0: f64,
    pub k1: f64,
    pub m0: f64,
    pub q: f64,
    pub contractive: bool,
    /// `M0·M`, the bound on `|u|` (and `|u∘φ|`) for `ψ` in the ball.
    pub domain_bound: f64,
}

impl ContractionCertificate {
    pub fn recompute_q(&self) -> f64 {
        let [l0, l1, l2, l3] = self.lipschitz;
        (l0 + l1 + l2 * self.k0 + l3 * self.k1) * self.m0
    }

    /// Half-widths of the box `|u|, |y| ≤ M0·M`, `|v| ≤ M0·K0·M`,
    /// `|z| ≤ M0·K1·M` on which `f` must be bounded by `M`.
    pub fn state_box(&self) -> [f64; 4] {
        let r = self.domain_bound;
        [r, r, r * self.k0, r * self.k1]
    }

    /// Largest `|f|` seen on a uniform lattice of the state box, with
    /// `per_axis` points along each of the five axes. Sampling only; a
    /// value above `M` disproves the bound, a value below does not prove it.
    pub fn sample_rhs_bound(&self, spec: &ProblemSpec, per_axis: usize) -> f64 {
        let per_axis = per_axis.max(2);
        let b = self.state_box();
        let axis = |r: f64| -> Vec<f64> {
            (0..per_axis)
                .map(|i| -r + 2.0 * r * i as f64 / (per_axis - 1) as f64)
                .collect()
        };
        let xs: Vec<f64> = (0..per_axis)
            .map(|i| i as f64 / (per_axis - 1) as f64)
            .filter(|&x| !(spec.singular_at_zero && x == 0.0))
            .collect();
        let (us, ys, vs, zs) = (axis(b[0]), axis(b[1]), axis(b[2]), axis(b[3]));
        let mut worst = 0.0f64;
        for &x in &xs {
            for &u in &us {
                for &y in &ys {
                    for &v in &vs {
                        for &z in &zs {
                            worst = worst.max((spec.f)(x, u, y, v, z).abs());
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Builds the certificate `q = (L0 + L1 + L2·K0 + L3·K1)·M0`.
pub fn make_certificate(
    big_m: f64,
    lipschitz: [f64; 4],
    k0: f64,
    k1: f64,
) -> Result<ContractionCertificate> {
    if !(big_m > 0.0 && big_m.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "M must be positive, got {big_m}"
        )));
    }
    if let Some(l) = lipschitz.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz constants must be nonnegative, got {l}"
        )));
    }
    for (name, k) in [("K0", k0), ("K1", k1)] {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be nonnegative, got {k}"
            )));
        }
    }
    let mut cert = ContractionCertificate {
        big_m,
        lipschitz,
        k0,
        k1,
        m0: M0,
        q: 0.0,
        contractive: false,
        domain_bound: M0 * big_m,
    };
    cert.q = cert.recompute_q();
    cert.contractive = cert.q < 1.0;
    Ok(cert)
}

/// `M0·q^m/(1 − q)·d`, the bound on `‖u_m − u‖` for the continuous iteration.
pub fn a_priori_bound(cert: &ContractionCertificate, d: f64, m: u32) -> Result<f64> {
    if !cert.contractive {
        return Err(Error::NotContractive(cert.q));
    }
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "d must be nonnegative, got {d}"
        )));
    }
    let p_m = cert.q.powi(m as i32) / (1.0 - cert.q);
    Ok(cert.m0 * p_m * d)
}

/// Finite-difference estimate of the Lipschitz constants of `f` in
/// `(u, y, v, z)` over the certificate's state box.
///
/// Heuristic: it samples a lattice and can underestimate the true constants.
pub fn estimate_lipschitz_sampled(
    spec: &ProblemSpec,
    big_m: f64,
    k0: f64,
    k1: f64,
    per_axis: usize,
) -> [f64; 4] {
    let per_axis = per_axis.max(2);
    let r = M0 * big_m;
    let half = [r, r, r * k0, r * k1];
    let lattice = |w: f64| -> Vec<f64> {
        (0..per_axis)
            .map(|i| -w + 2.0 * w * i as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let axes: Vec<Vec<f64>> = half.iter().map(|&w| lattice(w)).collect();
    let xs: Vec<f64> = (0..per_axis)
        .map(|i| i as f64 / (per_axis - 1) as f64)
        .filter(|&x| !(spec.singular_at_zero && x == 0.0))
        .collect();
    let mut out = [0.0f64; 4];
    for &x in &xs {
        for &u in &axes[0] {
            for &y in &axes[1] {
                for &v in &axes[2] {
                    for &z in &axes[3] {
                        let p = [u, y, v, z];
                        for (a, best) in out.iter_mut().enumerate() {
                            let delta = 1e-6 * half[a].max(1e-3);
                            let mut lo = p;
                            let mut hi = p;
                            lo[a] -= delta;
                            hi[a] += delta;
                            let slope = ((spec.f)(x, hi[0], hi[1], hi[2], hi[3])
                                - (spec.f)(x, lo[0], lo[1], lo[2], lo[3]))
                                / (2.0 * delta);
                            if slope.is_finite() {
                                *best = best.max(slope.abs());
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub h2: f64,
    pub iterations: usize,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub order: f64,
    /// RMS residual of the fit in `log(error)`.
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub problem: String,
    pub rows: Vec<StudyRow>,
    /// `None` when fewer than three rows sit above the round-off floor.
    pub fit: Option<OrderFit>,
}

impl ConvergenceStudy {
    pub fn fitted_order(&self) -> Option<f64> {
        self.fit.map(|f| f.order)
    }
}

/// Fits `error ≈ C·h^p` over the points with `error > 1e-12`.
pub fn fit_order(points: &[(f64, f64)]) -> Option<OrderFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| *e > ERROR_FLOOR && *h > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if logs.len() < 3 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let order = sxy / sxx;
    let intercept = my - order * mx;
    let ss: f64 = logs
        .iter()
        .map(|(x, y)| (y - intercept - order * x).powi(2))
        .sum();
    Some(OrderFit {
        order,
        residual: (ss / n).sqrt(),
        points: logs.len(),
    })
}

/// Solves on every grid size in `n_list` (in parallel) and fits the order.
/// Rows come back sorted by `N` with duplicates removed.
pub fn convergence_study(
    spec: &ProblemSpec,
    n_list: &[usize],
    rule: &StoppingRule,
) -> Result<ConvergenceStudy> {
    if spec.exact.is_none() {
        return Err(Error::MissingExact);
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a study needs at least 3 distinct grid sizes, got {}",
            ns.len()
        )));
    }
    let rows = ns
        .par_iter()
        .map(|&n| {
            let grid = Grid::new(n)?;
            let report = solve(spec, &grid, rule)?;
            Ok(StudyRow {
                n,
                h2: grid.h() * grid.h(),
                iterations: report.iterations,
                error: report.error_vs_exact.unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (1.0 / r.n as f64, r.error)).collect();
    Ok(ConvergenceStudy {
        problem: spec.name.clone(),
        fit: fit_order(&pts),
        rows,
    })
}
