//! Self-checks for the finite-difference oracle used by the other suites.

mod common;

use common::{fd_navier_solve, max_diff};

#[test]
fn oracle_second_order_for_quartic() {
    // u = (x⁴ − 2x³ + x)/24 solves u'''' = 1; the ghost-point closure
    // carries the only truncation error
    let err = |n: usize| {
        let u = fd_navier_solve(n, |_| 1.0, [0.0; 4]);
        let exact: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (x.powi(4) - 2.0 * x.powi(3) + x) / 24.0
            })
            .collect();
        max_diff(&u, &exact)
    };
    let ratio = err(40) / err(80);
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}

#[test]
fn oracle_reproduces_cubic_boundary_data() {
    // ψ = 0 leaves the cubic p with p(0)=1, p(1)=2, p''(0)=3, p''(1)=4
    let n = 16;
    let u = fd_navier_solve(n, |_| 0.0, [1.0, 2.0, 3.0, 4.0]);
    let p = |x: f64| 1.0 + (-1.0 + 2.0 - 1.0 - 4.0 / 6.0) * x + 1.5 * x * x + x.powi(3) / 6.0;
    for (i, ui) in u.iter().enumerate() {
        assert!((ui - p(i as f64 / n as f64)).abs() < 1e-12);
    }
}
