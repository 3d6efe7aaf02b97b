//! Problem definition and admissibility validation.
//!
//! A [`FractionalBvp`] carries the order `delta`, the coefficient functions
//! `b`, `c`, `f`, the Robin boundary data, and optionally a known exact
//! solution. Admissibility (what the comparison principle and the discrete
//! monotonicity argument need) is `alpha0 >= 1/(delta-1)`, `alpha1 >= 0` and
//! `c >= 0` on [0, 1]; [`FractionalBvp::validate`] checks these and reports
//! per-condition outcomes with a witness point on failure.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fracpoly::{
    manufactured_rhs, resolve_poly, FracPoly, FracPolyError, ManufacturedRhs, TermSpec,
};

/// Number of equispaced sample points used for the c >= 0 check.
const C_VALIDATION_POINTS: usize = 1001;

/// A coefficient function on [0, 1].
///
/// Fractional polynomials keep exact-solution features available; black-box
/// closures are accepted for problems outside that class.
#[derive(Clone)]
pub enum Coefficient {
    Poly(FracPoly),
    Manufactured(ManufacturedRhs),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn constant(v: f64) -> Self {
        Coefficient::Poly(FracPoly::constant(v))
    }

    /// Evaluate at x. Manufactured right-hand sides may be singular at x = 0;
    /// they are only ever sampled at interior mesh nodes.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Poly(p) => p.eval(x),
            Coefficient::Manufactured(m) => m
                .eval(x)
                .expect("manufactured rhs evaluated at an admissible point"),
            Coefficient::Function(g) => g(x),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Poly(p) => f.debug_tuple("Poly").field(p).finish(),
            Coefficient::Manufactured(_) => f.write_str("Manufactured(..)"),
            Coefficient::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// The two-point boundary value problem
/// `-D_*^delta u + b u' + c u = f` with `u(0) - alpha0 u'(0) = gamma0`,
/// `u(1) + alpha1 u'(1) = gamma1`.
#[derive(Debug, Clone)]
pub struct FractionalBvp {
    pub delta: f64,
    pub b: Coefficient,
    pub c: Coefficient,
    pub f: Coefficient,
    pub alpha0: f64,
    pub alpha1: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub exact: Option<FracPoly>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{}: {} ({})",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.detail
            )?;
        }
        Ok(())
    }
}

impl FractionalBvp {
    /// Check the admissibility hypotheses. Report-style: never errors.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();

        let delta_ok = 1.0 < self.delta && self.delta < 2.0;
        checks.push(ValidationCheck {
            name: "delta_in_range",
            passed: delta_ok,
            detail: format!("delta = {} must lie in (1, 2)", self.delta),
        });

        let bound = 1.0 / (self.delta - 1.0);
        let alpha0_ok = delta_ok && self.alpha0 >= bound;
        checks.push(ValidationCheck {
            name: "alpha0_lower_bound",
            passed: alpha0_ok,
            detail: if alpha0_ok {
                format!("alpha0 = {} >= 1/(delta-1) = {}", self.alpha0, bound)
            } else {
                format!("alpha0 = {} < 1/(delta-1) = {}", self.alpha0, bound)
            },
        });

        let alpha1_ok = self.alpha1 >= 0.0;
        checks.push(ValidationCheck {
            name: "alpha1_nonnegative",
            passed: alpha1_ok,
            detail: format!("alpha1 = {}", self.alpha1),
        });

        let mut c_witness = None;
        for i in 0..C_VALIDATION_POINTS {
            let x = i as f64 / (C_VALIDATION_POINTS - 1) as f64;
            let v = self.c.eval(x);
            if v < 0.0 {
                c_witness = Some((x, v));
                break;
            }
        }
        checks.push(ValidationCheck {
            name: "c_nonnegative",
            passed: c_witness.is_none(),
            detail: match c_witness {
                None => format!("c >= 0 at {C_VALIDATION_POINTS} sample points"),
                Some((x, v)) => format!("c({x}) = {v} < 0"),
            },
        });

        ValidationReport { checks }
    }
}

/// Test Problem 1: `-D_*^delta u + x^2 u' + (1+x) u = f` with
/// `alpha0 = 1/(delta-1)`, `alpha1 = 1`, and `f`, `gamma0`, `gamma1` chosen
/// so that the exact solution is
/// `u = x^delta + x^(2 delta - 1) + 1 + 3x - 7x^2 + 4x^3 + x^4`.
pub fn test_problem_1(delta: f64) -> FractionalBvp {
    assert!(1.0 < delta && delta < 2.0, "delta must lie in (1, 2)");
    let u = FracPoly::from_pairs(&[
        (1.0, delta),
        (1.0, 2.0 * delta - 1.0),
        (1.0, 0.0),
        (3.0, 1.0),
        (-7.0, 2.0),
        (4.0, 3.0),
        (1.0, 4.0),
    ])
    .expect("nonnegative powers");
    let b = FracPoly::from_pairs(&[(1.0, 2.0)]).expect("nonnegative powers");
    let c = FracPoly::from_pairs(&[(1.0, 0.0), (1.0, 1.0)]).expect("nonnegative powers");
    let f = manufactured_rhs(&u, &b, &c, delta).expect("admissible powers");
    let du = u.derivative(1);
    let alpha0 = 1.0 / (delta - 1.0);
    // gamma0, gamma1 are derived from the exact solution, not hard-coded
    let gamma0 = u.eval(0.0) - alpha0 * du.eval(0.0).expect("u' has nonnegative powers");
    let gamma1 = u.eval(1.0) + du.eval(1.0).expect("u' evaluable at 1");
    FractionalBvp {
        delta,
        b: Coefficient::Poly(b),
        c: Coefficient::Poly(c),
        f: Coefficient::Manufactured(f),
        alpha0,
        alpha1: 1.0,
        gamma0,
        gamma1,
        exact: Some(u),
    }
}

/// Test Problem 2: `-D_*^delta u + 2 u' + 3 u = 1.25` with
/// `u(0) - u'(0)/(delta-1) = 0.4` and the Dirichlet condition `u(1) = 1.7`
/// (encoded as `alpha1 = 0`). The exact solution is unknown.
pub fn test_problem_2(delta: f64) -> FractionalBvp {
    assert!(1.0 < delta && delta < 2.0, "delta must lie in (1, 2)");
    FractionalBvp {
        delta,
        b: Coefficient::constant(2.0),
        c: Coefficient::constant(3.0),
        f: Coefficient::constant(1.25),
        alpha0: 1.0 / (delta - 1.0),
        alpha1: 0.0,
        gamma0: 0.4,
        gamma1: 1.7,
        exact: None,
    }
}

// ---------------------------------------------------------------------------
// JSON problem files
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read problem file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse problem JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid fractional polynomial: {0}")]
    Poly(#[from] FracPolyError),
}

/// On-disk problem schema. Coefficients are fractional polynomials whose
/// powers may use the symbolic forms "delta" and "2*delta-1".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub delta: f64,
    pub b: Vec<TermSpec>,
    pub c: Vec<TermSpec>,
    pub f: Vec<TermSpec>,
    pub alpha0: f64,
    pub alpha1: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<TermSpec>>,
}

impl ProblemSpec {
    /// Resolve symbolic powers against `delta` and build the problem.
    pub fn resolve(&self, delta: f64) -> Result<FractionalBvp, LoadError> {
        Ok(FractionalBvp {
            delta,
            b: Coefficient::Poly(resolve_poly(&self.b, delta)?),
            c: Coefficient::Poly(resolve_poly(&self.c, delta)?),
            f: Coefficient::Poly(resolve_poly(&self.f, delta)?),
            alpha0: self.alpha0,
            alpha1: self.alpha1,
            gamma0: self.gamma0,
            gamma1: self.gamma1,
            exact: self
                .exact
                .as_ref()
                .map(|e| resolve_poly(e, delta))
                .transpose()?,
        })
    }
}

pub fn from_json_str(s: &str) -> Result<FractionalBvp, LoadError> {
    let spec: ProblemSpec = serde_json::from_str(s)?;
    spec.resolve(spec.delta)
}

pub fn load_problem(path: &Path) -> Result<FractionalBvp, LoadError> {
    let text = std::fs::read_to_string(path)?;
    from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracpoly::caputo_quadrature_oracle;

    #[test]
    fn validate_accepts_admissible_problem() {
        let p = FractionalBvp {
            delta: 1.5,
            b: Coefficient::constant(0.0),
            c: Coefficient::Poly(FracPoly::from_pairs(&[(1.0, 0.0), (1.0, 1.0)]).unwrap()),
            f: Coefficient::constant(0.0),
            alpha0: 2.0,
            alpha1: 1.0,
            gamma0: 0.0,
            gamma1: 0.0,
            exact: None,
        };
        assert!(p.validate().passed());
    }

    #[test]
    fn validate_flags_small_alpha0() {
        let mut p = test_problem_1(1.5);
        p.alpha0 = 1.9; // below 1/(1.5-1) = 2
        let report = p.validate();
        assert!(!report.passed());
        let fail = report.first_failure().unwrap();
        assert_eq!(fail.name, "alpha0_lower_bound");
        assert!(fail.detail.contains("1/(delta-1)"));
    }

    #[test]
    fn validate_flags_negative_c_with_witness() {
        let mut p = test_problem_1(1.5);
        p.c = Coefficient::Poly(FracPoly::from_pairs(&[(1.0, 0.0), (-3.0, 1.0)]).unwrap());
        let report = p.validate();
        let fail = report.first_failure().unwrap();
        assert_eq!(fail.name, "c_nonnegative");
        assert!(fail.detail.contains("< 0"));
    }

    #[test]
    fn builtin_problems_validate_across_delta_grid() {
        for k in 1..=9 {
            let delta = 1.0 + k as f64 / 10.0;
            assert!(test_problem_1(delta).validate().passed(), "tp1 {delta}");
            assert!(test_problem_2(delta).validate().passed(), "tp2 {delta}");
        }
    }

    #[test]
    fn tp1_boundary_data_from_exact_solution() {
        // u(0) = 1 (only the constant term survives)
        let p = test_problem_1(1.4);
        let u = p.exact.as_ref().unwrap();
        assert_eq!(u.eval(0.0), 1.0);
        // u(1) = 1+1+1+3-7+4+1 = 4 by direct summation
        assert!((u.eval(1.0) - 4.0).abs() <= 1e-14);
        // u'(1) = delta + (2 delta - 1) + 3 - 14 + 12 + 4 = 3 delta + 4,
        // so gamma1 = u(1) + u'(1) = 3 delta + 8
        assert!((p.gamma1 - (3.0 * 1.4 + 8.0)).abs() <= 1e-12);
        // gamma0 = u(0) - alpha0 u'(0) = 1 - 3/(delta-1)
        assert!((p.gamma0 - (1.0 - 3.0 / 0.4)).abs() <= 1e-12);
    }

    #[test]
    fn tp2_fields() {
        let p = test_problem_2(1.3);
        assert!(p.validate().passed());
        assert_eq!(p.f.eval(0.77), 1.25);
        assert_eq!(p.alpha1, 0.0);
        assert_eq!(p.gamma1, 1.7);
        assert!(p.exact.is_none());
    }

    #[test]
    fn tp1_exact_satisfies_the_equation() {
        // -D_*^delta u + b u' + c u = f checked with the independent
        // quadrature route for the Caputo term
        for delta in [1.1, 1.5, 1.9] {
            let p = test_problem_1(delta);
            let u = p.exact.as_ref().unwrap();
            let du = u.derivative(1);
            for k in 1..=9 {
                let x = k as f64 / 10.0;
                let lhs = -caputo_quadrature_oracle(u, delta, x).unwrap()
                    + p.b.eval(x) * du.eval(x).unwrap()
                    + p.c.eval(x) * u.eval(x);
                let rhs = p.f.eval(x);
                assert!(
                    (lhs - rhs).abs() <= 1e-7,
                    "delta {delta}, x {x}: lhs {lhs}, rhs {rhs}"
                );
            }
        }
    }

    #[test]
    fn problem_json_round_trip() {
        let text = r#"{
            "delta": 1.4,
            "b": [{"coeff": 1.0, "power": 2}],
            "c": [{"coeff": 1.0, "power": 0}, {"coeff": 1.0, "power": 1}],
            "f": [{"coeff": 1.25, "power": 0}],
            "alpha0": 2.51,
            "alpha1": 1.0,
            "gamma0": -6.5,
            "gamma1": 12.2,
            "exact": [{"coeff": 1.0, "power": "delta"},
                      {"coeff": 1.0, "power": "2*delta-1"}]
        }"#;
        let p = from_json_str(text).unwrap();
        assert_eq!(p.delta, 1.4);
        assert!(p.validate().passed());
        let exact = p.exact.unwrap();
        assert_eq!(exact.terms()[0].power, 1.4);
        assert!((p.b.eval(0.5) - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn problem_json_errors() {
        assert!(matches!(from_json_str("{"), Err(LoadError::Parse(_))));
        let bad_symbol = r#"{
            "delta": 1.4, "b": [], "c": [], "f": [{"coeff": 1.0, "power": "delta!"}],
            "alpha0": 2.5, "alpha1": 0.0, "gamma0": 0.0, "gamma1": 0.0
        }"#;
        assert!(matches!(from_json_str(bad_symbol), Err(LoadError::Poly(_))));
    }
}
