//! Problem data: right-hand side, kernels, delay map and boundary values.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Quantity, Result};
use crate::expr::{int_pow, Expr};
use crate::green::BoundaryValues;

pub type RhsFn = Arc<dyn Fn(f64, f64, f64, f64, f64) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `u'''' = f(x, u(x), u(φ(x)), ∫k0(x,t)u(t)dt, ∫k1(x,t)u(φ(t))dt)` with
/// Navier boundary data.
///
/// `f` takes its arguments in the order `(x, u, y, v, z)`. Functions signal
/// failure by returning a non-finite value.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub f: RhsFn,
    pub k0: KernelFn,
    pub k1: KernelFn,
    pub phi: ScalarFn,
    pub bv: BoundaryValues,
    pub exact: Option<ScalarFn>,
    /// `f` has an integrable singularity at `x = 0`; the solver pins `Ψ` to
    /// zero at that node, where every `G` row vanishes anyway.
    pub singular_at_zero: bool,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("bv", &self.bv)
            .field("has_exact", &self.exact.is_some())
            .field("singular_at_zero", &self.singular_at_zero)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Homogeneous boundary data, no exact solution.
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64, f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        k0: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        k1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            k0: Arc::new(k0),
            k1: Arc::new(k1),
            phi: Arc::new(phi),
            bv: BoundaryValues::HOMOGENEOUS,
            exact: None,
            singular_at_zero: false,
        }
    }

    pub fn with_boundary(mut self, bv: BoundaryValues) -> Self {
        self.bv = bv;
        self
    }

    pub fn with_exact(mut self, exact: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn with_singular_at_zero(mut self, singular: bool) -> Self {
        self.singular_at_zero = singular;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Builds a problem from textual expressions and validates it on 1000
    /// sample points.
    pub fn from_config(doc: &ProblemConfig) -> Result<Self> {
        let field = |field: &'static str, src: &str, vars: &[&str]| {
            Expr::parse(src, vars).map_err(|source| Error::Field { field, source })
        };
        let f = field("f", &doc.f, &["x", "u", "y", "v", "z"])?;
        let k0 = field("k0", &doc.k0, &["x", "t"])?;
        let k1 = field("k1", &doc.k1, &["x", "t"])?;
        let phi = field("phi", &doc.phi, &["t"])?;
        let exact = doc
            .exact
            .as_deref()
            .map(|src| field("exact", src, &["x"]))
            .transpose()?;
        let bv = BoundaryValues::from_slice(&doc.bc)?;

        let mut spec = ProblemSpec::new(
            "config",
            move |x, u, y, v, z| f.eval_slots(&[x, u, y, v, z]).unwrap_or(f64::NAN),
            move |x, t| k0.eval_slots(&[x, t]).unwrap_or(f64::NAN),
            move |x, t| k1.eval_slots(&[x, t]).unwrap_or(f64::NAN),
            move |t| phi.eval_slots(&[t]).unwrap_or(f64::NAN),
        )
        .with_boundary(bv)
        .with_singular_at_zero(doc.singular_at_zero);
        if let Some(exact) = exact {
            spec = spec.with_exact(move |x| exact.eval_slots(&[x]).unwrap_or(f64::NAN));
        }

        let report = spec.validate(1000);
        match report.issues.first() {
            None => Ok(spec),
            Some(issue) => Err(Error::Validation(issue.to_string())),
        }
    }

    /// Samples the problem data and reports the first offending point of
    /// each check. At least 100 samples are used.
    pub fn validate(&self, samples: usize) -> ValidationReport {
        let samples = samples.max(100);
        let pts: Vec<f64> = (0..samples)
            .map(|i| i as f64 / (samples - 1) as f64)
            .collect();
        let mut issues = Vec::new();

        if let Some(&t) = pts.iter().find(|&&t| {
            let p = (self.phi)(t);
            !(0.0..=1.0).contains(&p)
        }) {
            issues.push(ValidationIssue::DelayOutOfRange {
                t,
                value: (self.phi)(t),
            });
        }

        let first_x = usize::from(self.singular_at_zero);
        if let Some(&x) = pts[first_x..]
            .iter()
            .find(|&&x| !(self.f)(x, 0.0, 0.0, 0.0, 0.0).is_finite())
        {
            issues.push(ValidationIssue::NonFiniteRhs { x });
        }

        let side = (samples as f64).sqrt().ceil() as usize + 1;
        let lattice: Vec<f64> = (0..side).map(|i| i as f64 / (side - 1) as f64).collect();
        for (which, k) in [(Quantity::Kernel0, &self.k0), (Quantity::Kernel1, &self.k1)] {
            let bad = lattice
                .iter()
                .flat_map(|&x| lattice.iter().map(move |&t| (x, t)))
                .find(|&(x, t)| !k(x, t).is_finite());
            if let Some((x, t)) = bad {
                issues.push(ValidationIssue::NonFiniteKernel { which, x, t });
            }
        }

        if let Some(exact) = &self.exact {
            if let Some(&x) = pts.iter().find(|&&x| !exact(x).is_finite()) {
                issues.push(ValidationIssue::NonFiniteExact { x });
            }
        }

        ValidationReport { samples, issues }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    DelayOutOfRange { t: f64, value: f64 },
    NonFiniteRhs { x: f64 },
    NonFiniteKernel { which: Quantity, x: f64, t: f64 },
    NonFiniteExact { x: f64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::DelayOutOfRange { t, value } => {
                write!(f, "phi({t}) = {value} is outside [0, 1]")
            }
            ValidationIssue::NonFiniteRhs { x } => {
                write!(f, "f(x, 0, 0, 0, 0) is not finite at x = {x}")
            }
            ValidationIssue::NonFiniteKernel { which, x, t } => {
                write!(f, "{which}({x}, {t}) is not finite")
            }
            ValidationIssue::NonFiniteExact { x } => {
                write!(f, "exact solution is not finite at x = {x}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// JSON problem definition with expression sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub f: String,
    pub k0: String,
    pub k1: String,
    pub phi: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub bc: Vec<f64>,
    #[serde(default)]
    pub singular_at_zero: bool,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["example1", "example2", "example3", "example4"]
}

const EX2_RHS: &str = "1 + pi^2*sin(pi*x) + 2*u^2 + 2*y^2 + exp(-u^2) + 3*v^2*z^2";

/// Expression sources equivalent to the compiled built-ins.
pub fn builtin_config(name: &str) -> Result<ProblemConfig> {
    let cfg = |f: String, k0: &str, k1: &str, phi: &str, exact: Option<&str>, bc: [f64; 4]| {
        ProblemConfig {
            f,
            k0: k0.into(),
            k1: k1.into(),
            phi: phi.into(),
            exact: exact.map(Into::into),
            bc: bc.to_vec(),
            singular_at_zero: false,
        }
    };
    Ok(match name {
        "example1" => cfg(
            "pi^4*sin(pi*x) - 0.5*sin(pi*x)^2 - 0.5*sin(pi*x/2)^2 + 0.5*u^2 + 0.5*y^2 \
             - 8/(3*pi)*v + z"
                .into(),
            "exp(x)*sin(pi*t)",
            "exp(x)*sin(pi*t)",
            "t/2",
            Some("sin(pi*x)"),
            [0.0; 4],
        ),
        "example2" => cfg(
            EX2_RHS.into(),
            "exp(x)*sin(pi*t)",
            "exp(x)*sin(pi*t*x/2)",
            "t/2",
            None,
            [0.0; 4],
        ),
        "example3" => cfg(
            "24 - x^4*(1-x)^4 - (x/3)^4*(1-x/3)^4 - exp(x)/60 \
             - 4*(pi^4 - 3*pi^2 + 12)/(81*pi^5)*x^2*(1-x)^2*sin(pi*x) \
             + u^2 + y^2 + v + u*z"
                .into(),
            "exp(x)*t",
            "sin(pi*x)*sin(pi*t)",
            "t/3",
            Some("x^2*(1-x)^2"),
            [0.0, 0.0, 2.0, 2.0],
        ),
        "example4" => ProblemConfig {
            singular_at_zero: true,
            ..cfg(
                format!("({EX2_RHS})/sqrt(x)"),
                "exp(x)*sin(pi*t)",
                "exp(x)*sin(pi*t*x/2)",
                "t/2",
                None,
                [0.0; 4],
            )
        },
        other => return Err(Error::UnknownProblem(other.to_string())),
    })
}

fn sq(a: f64) -> f64 {
    a * a
}

fn ex2_rhs(x: f64, u: f64, y: f64, v: f64, z: f64) -> f64 {
    use std::f64::consts::PI;
    1.0 + sq(PI) * (PI * x).sin() + 2.0 * sq(u) + 2.0 * sq(y) + (-sq(u)).exp() + 3.0 * sq(v) * sq(z)
}

/// The four worked problems.
///
/// * `example1`: exact solution `sin(πx)`, `φ(t) = t/2`.
/// * `example2`: positive solution bounded by `0.1628`, no closed form.
/// * `example3`: `u''(0) = u''(1) = 2`, exact solution `x²(1−x)²`.
/// * `example4`: `example2` divided by `√x`, singular at `x = 0`.
pub fn builtin(name: &str) -> Result<ProblemSpec> {
    use std::f64::consts::PI;
    let spec = match name {
        "example1" => ProblemSpec::new(
            name,
            |x, u, y, v, z| {
                int_pow(PI, 4) * (PI * x).sin()
                    - 0.5 * sq((PI * x).sin())
                    - 0.5 * sq((PI * x / 2.0).sin())
                    + 0.5 * sq(u)
                    + 0.5 * sq(y)
                    - 8.0 / (3.0 * PI) * v
                    + z
            },
            |x, t| x.exp() * (PI * t).sin(),
            |x, t| x.exp() * (PI * t).sin(),
            |t| t / 2.0,
        )
        .with_exact(|x| (PI * x).sin()),
        "example2" => ProblemSpec::new(
            name,
            ex2_rhs,
            |x, t| x.exp() * (PI * t).sin(),
            |x, t| x.exp() * (PI * t * x / 2.0).sin(),
            |t| t / 2.0,
        ),
        "example3" => {
            let c = 4.0 * (int_pow(PI, 4) - 3.0 * sq(PI) + 12.0) / (81.0 * int_pow(PI, 5));
            ProblemSpec::new(
                name,
                move |x, u, y, v, z| {
                    24.0 - int_pow(x, 4) * int_pow(1.0 - x, 4)
                        - int_pow(x / 3.0, 4) * int_pow(1.0 - x / 3.0, 4)
                        - x.exp() / 60.0
                        - c * sq(x) * sq(1.0 - x) * (PI * x).sin()
                        + sq(u)
                        + sq(y)
                        + v
                        + u * z
                },
                |x, t| x.exp() * t,
                |x, t| (PI * x).sin() * (PI * t).sin(),
                |t| t / 3.0,
            )
            .with_boundary(BoundaryValues::new(0.0, 0.0, 2.0, 2.0))
            .with_exact(|x| sq(x) * sq(1.0 - x))
        }
        "example4" => ProblemSpec::new(
            name,
            |x, u, y, v, z| ex2_rhs(x, u, y, v, z) / x.sqrt(),
            |x, t| x.exp() * (PI * t).sin(),
            |x, t| x.exp() * (PI * t * x / 2.0).sin(),
            |t| t / 2.0,
        )
        .with_singular_at_zero(true),
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(spec)
}
