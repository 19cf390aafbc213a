//! Discrete fixed-point iteration on a uniform grid.
//!
//! Starting from `Ψ₀(x_i) = f(x_i, 0, 0, 0, 0)`, each step computes
//!
//! ```text
//! U_m(x_i) = Σ_j hρ_j G(x_i, x_j)    Ψ_m(x_j) + p(x_i)
//! Y_m(x_i) = Σ_j hρ_j G(φ(x_i), x_j) Ψ_m(x_j) + p(φ(x_i))
//! V_m(x_i) = Σ_j hρ_j k0(x_i, x_j)   U_m(x_j)
//! Z_m(x_i) = Σ_j hρ_j k1(x_i, x_j)   Y_m(x_j)
//! Ψ_{m+1}(x_i) = f(x_i, U_m, Y_m, V_m, Z_m)
//! ```
//!
//! where `p` is the boundary cubic (zero for homogeneous data).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Quantity, Result};
use crate::green::{kernel, BoundaryCubic};
use crate::grid::{max_abs_diff, Grid, GridFunction};
use crate::problem::ProblemSpec;

/// `max |Ψ|` above which the iteration is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

pub const DEFAULT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Criterion {
    /// `‖Ψ_m − Ψ_{m−1}‖∞ ≤ tol`.
    SuccessivePsi { tol: f64 },
    /// `‖U_m − u‖∞ ≤ h²`; needs an exact solution.
    ExactErrorBelowH2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub criterion: Criterion,
    pub max_iterations: usize,
}

impl StoppingRule {
    pub fn successive(tol: f64) -> Self {
        Self {
            criterion: Criterion::SuccessivePsi { tol },
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn exact_h2() -> Self {
        Self {
            criterion: Criterion::ExactErrorBelowH2,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    fn check(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        if let Criterion::SuccessivePsi { tol } = self.criterion {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "tolerance must be positive and finite, got {tol}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self::successive(1e-9)
    }
}

/// Grid functions produced by one step from `Ψ_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub m: usize,
    pub psi: GridFunction,
    pub u: GridFunction,
    pub y: GridFunction,
    pub v: GridFunction,
    pub z: GridFunction,
    /// `Ψ_{m+1}`.
    pub next_psi: GridFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    CriterionMet,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub n: usize,
    pub h: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// `‖Ψ_k − Ψ_{k−1}‖∞` for `k = 1..=iterations`.
    pub residual_history: Vec<f64>,
    pub error_vs_exact: Option<f64>,
    pub min_value: f64,
    pub max_value: f64,
    pub u: GridFunction,
}

impl SolveReport {
    /// `d = ‖Ψ₁ − Ψ₀‖∞`, the first residual.
    pub fn first_difference(&self) -> Option<f64> {
        self.residual_history.first().copied()
    }
}

/// Weighted operator matrices for one problem on one grid.
///
/// Building it costs `O(N²)` kernel evaluations; every step afterwards is
/// four dense matrix-vector products plus `N + 1` evaluations of `f`.
pub struct Discretization<'a> {
    spec: &'a ProblemSpec,
    grid: Grid,
    green_nodes: Vec<f64>,
    green_delay: Vec<f64>,
    k0: Vec<f64>,
    k1: Vec<f64>,
    cubic_nodes: Vec<f64>,
    cubic_delay: Vec<f64>,
}

impl<'a> Discretization<'a> {
    pub fn new(spec: &'a ProblemSpec, grid: &Grid) -> Result<Self> {
        let nodes = grid.nodes();
        let w = grid.quadrature_weights();
        let len = grid.len();

        let mut delay = Vec::with_capacity(len);
        for (i, &x) in nodes.iter().enumerate() {
            let t = (spec.phi)(x);
            if !t.is_finite() {
                return Err(Error::NonFinite {
                    quantity: Quantity::Delay,
                    node: i,
                    x,
                });
            }
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::OutsideUnitInterval {
                    what: "phi(x_i)",
                    value: t,
                });
            }
            delay.push(t);
        }

        let weighted = |row_arg: &[f64], g: &dyn Fn(f64, f64) -> f64, q: Option<Quantity>| {
            let mut m = Vec::with_capacity(len * len);
            for (i, &a) in row_arg.iter().enumerate() {
                for (&s, &ws) in nodes.iter().zip(&w) {
                    let val = g(a, s);
                    if let (Some(quantity), false) = (q, val.is_finite()) {
                        return Err(Error::NonFinite {
                            quantity,
                            node: i,
                            x: a,
                        });
                    }
                    m.push(ws * val);
                }
            }
            Ok(m)
        };

        let green_nodes = weighted(nodes, &kernel, None)?;
        let green_delay = weighted(&delay, &kernel, None)?;
        let k0 = weighted(nodes, &*spec.k0, Some(Quantity::Kernel0))?;
        let k1 = weighted(nodes, &*spec.k1, Some(Quantity::Kernel1))?;

        let p = BoundaryCubic::from(spec.bv);
        let (cubic_nodes, cubic_delay) = if p.is_zero() {
            (vec![0.0; len], vec![0.0; len])
        } else {
            (
                nodes.iter().map(|&x| p.eval(x)).collect(),
                delay.iter().map(|&t| p.eval(t)).collect(),
            )
        };

        Ok(Self {
            spec,
            grid: grid.clone(),
            green_nodes,
            green_delay,
            k0,
            k1,
            cubic_nodes,
            cubic_delay,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `Ψ₀(x_i) = f(x_i, 0, 0, 0, 0)`.
    pub fn init_psi(&self) -> Result<GridFunction> {
        let zero = vec![0.0; self.grid.len()];
        self.rhs(&zero, &zero, &zero, &zero)
    }

    /// `U = Σ hρ G Ψ + p` at the grid nodes.
    pub fn solution(&self, psi: &GridFunction) -> Result<GridFunction> {
        self.grid.check_aligned(psi)?;
        let u = self.apply(&self.green_nodes, psi.values(), Some(&self.cubic_nodes));
        finite(u, Quantity::U, self.grid.nodes())
    }

    pub fn step(&self, psi: &GridFunction, m: usize) -> Result<IterationState> {
        self.grid.check_aligned(psi)?;
        let nodes = self.grid.nodes();
        let u = finite(
            self.apply(&self.green_nodes, psi.values(), Some(&self.cubic_nodes)),
            Quantity::U,
            nodes,
        )?;
        let y = finite(
            self.apply(&self.green_delay, psi.values(), Some(&self.cubic_delay)),
            Quantity::Y,
            nodes,
        )?;
        let v = finite(self.apply(&self.k0, u.values(), None), Quantity::V, nodes)?;
        let z = finite(self.apply(&self.k1, y.values(), None), Quantity::Z, nodes)?;
        let next_psi = self.rhs(u.values(), y.values(), v.values(), z.values())?;
        Ok(IterationState {
            m,
            psi: psi.clone(),
            u,
            y,
            v,
            z,
            next_psi,
        })
    }

    fn apply(&self, matrix: &[f64], x: &[f64], shift: Option<&[f64]>) -> Vec<f64> {
        let len = x.len();
        matrix
            .chunks_exact(len)
            .enumerate()
            .map(|(i, row)| {
                let dot: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                dot + shift.map_or(0.0, |s| s[i])
            })
            .collect()
    }

    fn rhs(&self, u: &[f64], y: &[f64], v: &[f64], z: &[f64]) -> Result<GridFunction> {
        let nodes = self.grid.nodes();
        let mut out = Vec::with_capacity(nodes.len());
        for (i, &x) in nodes.iter().enumerate() {
            if i == 0 && self.spec.singular_at_zero {
                out.push(0.0);
                continue;
            }
            let val = (self.spec.f)(x, u[i], y[i], v[i], z[i]);
            if !val.is_finite() {
                return Err(Error::NonFinite {
                    quantity: Quantity::Psi,
                    node: i,
                    x,
                });
            }
            out.push(val);
        }
        Ok(GridFunction::from_vec_unchecked(out))
    }
}

fn finite(values: Vec<f64>, quantity: Quantity, nodes: &[f64]) -> Result<GridFunction> {
    if let Some(node) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            quantity,
            node,
            x: nodes[node],
        });
    }
    Ok(GridFunction::from_vec_unchecked(values))
}

/// One-off `Ψ₀`; prefer [`Discretization::init_psi`] in loops.
pub fn init_psi(spec: &ProblemSpec, grid: &Grid) -> Result<GridFunction> {
    Discretization::new(spec, grid)?.init_psi()
}

/// One-off step from `Ψ_m`; rebuilds the operator matrices on every call.
pub fn step(spec: &ProblemSpec, grid: &Grid, psi: &GridFunction) -> Result<IterationState> {
    Discretization::new(spec, grid)?.step(psi, 0)
}

/// Iterates until `rule` fires or `rule.max_iterations` steps have run.
///
/// `iterations` counts evaluations of the step map. Under the exact-error
/// rule the reported `U` is the first iterate within `h²` of the exact
/// solution; under the successive rule it is `U` recomputed from the final
/// `Ψ`.
pub fn solve(spec: &ProblemSpec, grid: &Grid, rule: &StoppingRule) -> Result<SolveReport> {
    rule.check()?;
    if rule.criterion == Criterion::ExactErrorBelowH2 && spec.exact.is_none() {
        return Err(Error::MissingExact);
    }
    let exact: Option<Vec<f64>> = spec
        .exact
        .as_ref()
        .map(|u| grid.nodes().iter().map(|&x| u(x)).collect());
    let h2 = grid.h() * grid.h();

    let disc = Discretization::new(spec, grid)?;
    let mut psi = disc.init_psi()?;
    let mut history = Vec::new();

    let finish = |u: GridFunction, iterations: usize, stop_reason, history: Vec<f64>| {
        let error_vs_exact = exact.as_ref().map(|e| max_abs_diff(u.values(), e));
        let (min_value, max_value) = u
            .values()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        SolveReport {
            problem: spec.name.clone(),
            n: grid.n(),
            h: grid.h(),
            iterations,
            stop_reason,
            residual_history: history,
            error_vs_exact,
            min_value,
            max_value,
            u,
        }
    };

    for k in 1..=rule.max_iterations {
        let state = disc.step(&psi, k - 1)?;
        let residual = state.next_psi.max_distance(&state.psi);
        history.push(residual);

        let norm = state.next_psi.max_norm();
        if norm > DIVERGENCE_THRESHOLD {
            return Err(Error::Divergence { iteration: k, norm });
        }

        match rule.criterion {
            Criterion::ExactErrorBelowH2 => {
                let e = exact.as_deref().unwrap_or_default();
                if max_abs_diff(state.u.values(), e) <= h2 {
                    return Ok(finish(state.u, k, StopReason::CriterionMet, history));
                }
            }
            Criterion::SuccessivePsi { tol } => {
                if residual <= tol {
                    let u = disc.solution(&state.next_psi)?;
                    return Ok(finish(u, k, StopReason::CriterionMet, history));
                }
            }
        }
        psi = state.next_psi;
    }

    let u = disc.solution(&psi)?;
    Ok(finish(
        u,
        rule.max_iterations,
        StopReason::MaxIterations,
        history,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{BoundaryValues, M0};
    use crate::problem::builtin;

    fn constant_load() -> ProblemSpec {
        ProblemSpec::new(
            "unit-load",
            |_, _, _, _, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |t| t,
        )
        .with_exact(|x| (x.powi(4) - 2.0 * x.powi(3) + x) / 24.0)
    }

    #[test]
    fn initial_psi_values() {
        let g = Grid::new(10).unwrap();
        let p1 = init_psi(&builtin("example1").unwrap(), &g).unwrap();
        assert!(p1.values()[0].abs() < 1e-15);
        let p2 = init_psi(&builtin("example2").unwrap(), &g).unwrap();
        assert_eq!(p2.values()[0], 2.0);
        let p4 = init_psi(&builtin("example4").unwrap(), &g).unwrap();
        assert_eq!(p4.values()[0], 0.0);
        assert!(p4.values()[1..].iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn singular_rhs_without_flag_is_rejected() {
        let spec = builtin("example4").unwrap().with_singular_at_zero(false);
        let g = Grid::new(10).unwrap();
        assert!(matches!(
            init_psi(&spec, &g),
            Err(Error::NonFinite {
                quantity: Quantity::Psi,
                node: 0,
                ..
            })
        ));
    }

    #[test]
    fn constant_load_one_step() {
        let g = Grid::new(100).unwrap();
        let spec = constant_load();
        let psi = init_psi(&spec, &g).unwrap();
        let st = step(&spec, &g, &psi).unwrap();
        let h2 = g.h() * g.h();
        assert!((st.u.values()[50] - M0).abs() < h2);
        assert!(st.v.values().iter().all(|&v| v == 0.0));
        assert_eq!(st.next_psi.values(), psi.values());
    }

    #[test]
    fn zero_problem_is_a_fixed_point() {
        let g = Grid::new(20).unwrap();
        let spec = ProblemSpec::new("zero", |_, _, _, _, _| 0.0, |_, _| 1.0, |_, _| 1.0, |t| t);
        let st = step(&spec, &g, &GridFunction::zeros(&g)).unwrap();
        for gf in [&st.u, &st.y, &st.v, &st.z, &st.next_psi] {
            assert!(gf.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn example3_carries_boundary_cubic() {
        let spec = builtin("example3").unwrap();
        let g = Grid::new(100).unwrap();
        let disc = Discretization::new(&spec, &g).unwrap();
        let mut psi = disc.init_psi().unwrap();
        let h = g.h();
        for m in 0..3 {
            let st = disc.step(&psi, m).unwrap();
            let u = st.u.values();
            assert!(u[0].abs() < 1e-15 && u[100].abs() < 1e-15);
            // second-order one-sided stencils for u''(0) and u''(1)
            let d2_left = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h);
            let d2_right = (2.0 * u[100] - 5.0 * u[99] + 4.0 * u[98] - u[97]) / (h * h);
            assert!((d2_left - 2.0).abs() < 0.05, "{d2_left}");
            assert!((d2_right - 2.0).abs() < 0.05, "{d2_right}");
            psi = st.next_psi;
        }
    }

    #[test]
    fn length_mismatch_in_step() {
        let spec = builtin("example1").unwrap();
        let g = Grid::new(10).unwrap();
        let bad = GridFunction::new(vec![0.0; 5]).unwrap();
        assert!(matches!(
            step(&spec, &g, &bad),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn delay_leaving_interval_is_rejected() {
        let spec = ProblemSpec::new(
            "p",
            |_, _, _, _, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |t| 2.0 * t,
        );
        let g = Grid::new(10).unwrap();
        assert!(matches!(
            Discretization::new(&spec, &g),
            Err(Error::OutsideUnitInterval { .. })
        ));
    }

    #[test]
    fn example1_table2_row() {
        let spec = builtin("example1").unwrap();
        let r = solve(
            &spec,
            &Grid::new(100).unwrap(),
            &StoppingRule::successive(1e-9),
        )
        .unwrap();
        assert_eq!(r.iterations, 6);
        assert_eq!(r.stop_reason, StopReason::CriterionMet);
        assert_eq!(r.residual_history.len(), 6);
        let err = r.error_vs_exact.unwrap();
        assert!(err > 5.8292e-7 / 2.0 && err < 5.8292e-7 * 2.0, "{err}");
    }

    #[test]
    fn example1_table1_row() {
        let spec = builtin("example1").unwrap();
        let g = Grid::new(50).unwrap();
        let r = solve(&spec, &g, &StoppingRule::exact_h2()).unwrap();
        assert_eq!(r.iterations, 2);
        let err = r.error_vs_exact.unwrap();
        assert!(err <= g.h() * g.h());
        assert!((err - 1.1564e-4).abs() < 1e-7, "{err}");
    }

    #[test]
    fn example3_table3_row() {
        let spec = builtin("example3").unwrap();
        let r = solve(
            &spec,
            &Grid::new(100).unwrap(),
            &StoppingRule::successive(1e-9),
        )
        .unwrap();
        assert_eq!(r.iterations, 5);
        assert_eq!(r.u.values()[0], 0.0);
        // 2.5227e-05 here; the printed table value at this N is 5.2227e-05
        let err = r.error_vs_exact.unwrap();
        assert!((err - 2.5227e-5).abs() < 1e-8, "{err}");
    }

    #[test]
    fn exact_rule_needs_exact_solution() {
        let spec = builtin("example2").unwrap();
        assert!(matches!(
            solve(&spec, &Grid::new(10).unwrap(), &StoppingRule::exact_h2()),
            Err(Error::MissingExact)
        ));
    }

    #[test]
    fn invalid_rules() {
        let spec = builtin("example1").unwrap();
        let g = Grid::new(10).unwrap();
        assert!(solve(&spec, &g, &StoppingRule::successive(0.0)).is_err());
        assert!(solve(
            &spec,
            &g,
            &StoppingRule::successive(1e-9).with_max_iterations(0)
        )
        .is_err());
    }

    #[test]
    fn max_iterations_cap() {
        let spec = builtin("example1").unwrap();
        let r = solve(
            &spec,
            &Grid::new(50).unwrap(),
            &StoppingRule::successive(1e-9).with_max_iterations(2),
        )
        .unwrap();
        assert_eq!(r.iterations, 2);
        assert_eq!(r.stop_reason, StopReason::MaxIterations);
        assert_eq!(r.residual_history.len(), 2);
    }

    #[test]
    fn divergence_is_reported() {
        let spec = ProblemSpec::new(
            "blowup",
            |_, u, _, _, _| 1.0 + 1e4 * u * u,
            |_, _| 0.0,
            |_, _| 0.0,
            |t| t,
        );
        let err = solve(
            &spec,
            &Grid::new(20).unwrap(),
            &StoppingRule::successive(1e-9),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err}");
    }

    #[test]
    fn homogeneous_boundary_exact() {
        for name in ["example1", "example2", "example3", "example4"] {
            let spec = builtin(name).unwrap();
            let r = solve(
                &spec,
                &Grid::new(40).unwrap(),
                &StoppingRule::successive(1e-9),
            )
            .unwrap();
            let u = r.u.values();
            assert!((u[0] - spec.bv.c1).abs() < 1e-15, "{name}");
            assert!((u[40] - spec.bv.c2).abs() < 1e-15, "{name}");
        }
    }

    #[test]
    fn non_homogeneous_dirichlet_values() {
        let spec = constant_load().with_boundary(BoundaryValues::new(1.0, -2.0, 0.5, 3.0));
        let spec = ProblemSpec {
            exact: None,
            ..spec
        };
        let r = solve(
            &spec,
            &Grid::new(30).unwrap(),
            &StoppingRule::successive(1e-12),
        )
        .unwrap();
        assert!((r.u.values()[0] - 1.0).abs() < 1e-14);
        assert!((r.u.values()[30] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn report_json_round_trip() {
        let spec = builtin("example2").unwrap();
        let r = solve(&spec, &Grid::new(30).unwrap(), &StoppingRule::default()).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: SolveReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(text.contains("\"stop_reason\":\"criterion-met\""));
    }
}
