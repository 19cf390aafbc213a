//! Green's function of `u'''' = ψ` with homogeneous Navier data
//! `u(0) = u(1) = u''(0) = u''(1) = 0`, and the cubic that carries
//! non-homogeneous boundary values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// `max_x ∫₀¹ G(x, s) ds`, attained at `x = 1/2`.
pub const M0: f64 = 5.0 / 384.0;

pub fn m0_constant() -> f64 {
    M0
}

/// `G(x, s)` for `x, s ∈ [0, 1]`.
///
/// For `s ≤ x` this is `s(1 − x)(2x − x² − s²)/6`, extended symmetrically.
/// It is the deflection at `x` of a unit-length hinged beam under a unit
/// point load at `s`, so it is nonnegative and vanishes on the boundary.
pub fn green_value(x: f64, s: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("s", s)?;
    Ok(kernel(x, s))
}

#[inline]
pub(crate) fn kernel(x: f64, s: f64) -> f64 {
    let (lo, hi) = if s <= x { (s, x) } else { (x, s) };
    lo * (1.0 - hi) * (2.0 * hi - hi * hi - lo * lo) / 6.0
}

fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutsideUnitInterval { what, value })
    }
}

/// Trapezium approximation of `∫₀¹ G(τ, s) ψ(s) ds` for every target `τ`.
///
/// Targets need not be grid nodes; `G` is evaluated analytically.
pub fn apply_green(grid: &Grid, psi: &GridFunction, targets: &[f64]) -> Result<Vec<f64>> {
    grid.check_aligned(psi)?;
    for &t in targets {
        check_unit("target", t)?;
    }
    let w = grid.quadrature_weights();
    Ok(targets
        .iter()
        .map(|&t| {
            grid.nodes()
                .iter()
                .zip(&w)
                .zip(psi.values())
                .map(|((&s, &ws), &p)| ws * kernel(t, s) * p)
                .sum()
        })
        .collect())
}

/// Boundary data `u(0), u(1), u''(0), u''(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryValues {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl BoundaryValues {
    pub const HOMOGENEOUS: Self = Self {
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
        c4: 0.0,
    };

    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Self {
        Self { c1, c2, c3, c4 }
    }

    pub fn from_slice(bc: &[f64]) -> Result<Self> {
        match *bc {
            [c1, c2, c3, c4] => Ok(Self::new(c1, c2, c3, c4)),
            _ => Err(Error::BoundaryLength(bc.len())),
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.c1, self.c2, self.c3, self.c4]
    }

    pub fn is_homogeneous(&self) -> bool {
        self.to_array().iter().all(|&c| c == 0.0)
    }

    pub fn cubic(&self) -> BoundaryCubic {
        BoundaryCubic::from(*self)
    }
}

/// `p(x) = a0 + a1·x + a2·x² + a3·x³` with `p'''' = 0` matching the
/// boundary data, so `u = ∫G ψ + p` satisfies the non-homogeneous problem.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryCubic {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl From<BoundaryValues> for BoundaryCubic {
    fn from(bv: BoundaryValues) -> Self {
        let BoundaryValues { c1, c2, c3, c4 } = bv;
        Self {
            a0: c1,
            a1: -c1 + c2 - c3 / 3.0 - c4 / 6.0,
            a2: c3 / 2.0,
            a3: (c4 - c3) / 6.0,
        }
    }
}

impl BoundaryCubic {
    pub fn eval(&self, x: f64) -> f64 {
        ((self.a3 * x + self.a2) * x + self.a1) * x + self.a0
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        2.0 * self.a2 + 6.0 * self.a3 * x
    }

    pub fn is_zero(&self) -> bool {
        self.a0 == 0.0 && self.a1 == 0.0 && self.a2 == 0.0 && self.a3 == 0.0
    }
}
