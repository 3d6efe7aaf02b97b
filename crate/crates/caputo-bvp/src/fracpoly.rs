//! Fractional polynomials: finite sums of real-power monomials.
//!
//! These carry the coefficient functions and manufactured exact solutions of
//! the solver. [`FracPoly`] restricts powers to be nonnegative (continuous on
//! [0, 1]); [`FracExpr`] admits negative powers and houses quantities that
//! blow up at x = 0, such as second derivatives and Caputo derivatives of the
//! solutions we work with.
//!
//! The Caputo derivative of order `sigma` in (1, 2) acts term-wise:
//! `x^p` is annihilated for p in {0, 1} and maps to
//! `Gamma(p+1)/Gamma(p+1-sigma) x^(p-sigma)` for p > 1. Powers inside (0, 1)
//! are rejected: they would leave the C^1[0,1] class the solver theory needs,
//! and the term-wise formula does not apply uniformly there.
//!
//! [`caputo_quadrature_oracle`] evaluates the same derivative through its
//! integral form with singularity-aware quadrature. It shares nothing with
//! the closed-form route except the leading 1/Gamma(2-sigma) factor, which is
//! part of the operator's definition, so the two paths cross-check each other.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun;

/// Powers closer than this are considered equal and merged. Delta-dependent
/// powers like 2*delta-1 may collide with integer powers for specific delta.
pub const POWER_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracPolyError {
    #[error("evaluation at x = 0 with negative power {power}")]
    NegativePowerAtZero { power: f64 },
    #[error("negative power {power} not allowed in a fractional polynomial")]
    NegativePower { power: f64 },
    #[error("Caputo derivative undefined for term power {power}: powers must be 0, 1, or > 1")]
    CaputoPowerUnsupported { power: f64 },
    #[error("Caputo coefficient hits a gamma pole for term power {power}")]
    CaputoGammaPole { power: f64 },
    #[error("Caputo order sigma = {0} outside (1, 2)")]
    CaputoOrderOutOfRange(f64),
    #[error("quadrature did not reach tolerance (worst interval error {worst:e})")]
    QuadratureNoConvergence { worst: f64 },
    #[error("quadrature evaluation point x = {0} outside (0, 1]")]
    QuadraturePointOutOfRange(f64),
    #[error("unknown symbolic power {0:?} (expected \"delta\" or \"2*delta-1\")")]
    UnknownPowerSymbol(String),
}

/// One monomial `coeff * x^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub coeff: f64,
    pub power: f64,
}

/// Finite sum of real-power monomials, powers unrestricted above -1 in use.
///
/// Canonical form: terms sorted by ascending power, powers within
/// [`POWER_MERGE_TOL`] merged, exact-zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct FracExpr {
    terms: Vec<Term>,
}

/// Fractional polynomial: a [`FracExpr`] whose powers are all >= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct FracPoly {
    expr: FracExpr,
}

fn canonicalize(mut terms: Vec<Term>) -> Vec<Term> {
    for t in &terms {
        assert!(
            t.coeff.is_finite() && t.power.is_finite(),
            "non-finite term {t:?}"
        );
    }
    terms.retain(|t| t.coeff != 0.0);
    terms.sort_by(|a, b| a.power.partial_cmp(&b.power).unwrap());
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if (t.power - last.power).abs() <= POWER_MERGE_TOL => {
                last.coeff += t.coeff;
            }
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out
}

fn powx(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        x.powf(p)
    }
}

impl FracExpr {
    pub fn new(terms: Vec<Term>) -> Self {
        FracExpr {
            terms: canonicalize(terms),
        }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::new(
            pairs
                .iter()
                .map(|&(coeff, power)| Term { coeff, power })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate at x. At x = 0 every power must be >= 0; the `x^0` term
    /// evaluates to its coefficient there.
    pub fn eval(&self, x: f64) -> Result<f64, FracPolyError> {
        if x == 0.0 {
            if let Some(t) = self.terms.first() {
                if t.power < 0.0 {
                    return Err(FracPolyError::NegativePowerAtZero { power: t.power });
                }
            }
        }
        Ok(self.terms.iter().map(|t| t.coeff * powx(x, t.power)).sum())
    }

    /// k-fold classical derivative, term-wise. A term with integer power m
    /// vanishes once k > m (the falling factorial hits an exact zero).
    pub fn derivative(&self, k: u32) -> FracExpr {
        let terms = self
            .terms
            .iter()
            .filter_map(|t| {
                let mut coeff = t.coeff;
                let mut power = t.power;
                for _ in 0..k {
                    coeff *= power;
                    power -= 1.0;
                }
                (coeff != 0.0).then_some(Term { coeff, power })
            })
            .collect();
        FracExpr::new(terms)
    }

    pub fn scale(&self, factor: f64) -> FracExpr {
        FracExpr::new(
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: factor * t.coeff,
                    power: t.power,
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &FracExpr) -> FracExpr {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        FracExpr::new(terms)
    }
}

impl FracPoly {
    /// Build from terms, rejecting negative powers.
    pub fn new(terms: Vec<Term>) -> Result<Self, FracPolyError> {
        let expr = FracExpr::new(terms);
        if let Some(t) = expr.terms.first() {
            if t.power < 0.0 {
                return Err(FracPolyError::NegativePower { power: t.power });
            }
        }
        Ok(FracPoly { expr })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, FracPolyError> {
        Self::new(
            pairs
                .iter()
                .map(|&(coeff, power)| Term { coeff, power })
                .collect(),
        )
    }

    pub fn constant(c: f64) -> Self {
        Self::from_pairs(&[(c, 0.0)]).expect("constant power is nonnegative")
    }

    pub fn terms(&self) -> &[Term] {
        self.expr.terms()
    }

    pub fn as_expr(&self) -> &FracExpr {
        &self.expr
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    /// Evaluation never fails: powers are nonnegative.
    pub fn eval(&self, x: f64) -> f64 {
        self.expr.eval(x).expect("nonnegative powers")
    }

    pub fn derivative(&self, k: u32) -> FracExpr {
        self.expr.derivative(k)
    }
}

/// Exact Caputo derivative of order `sigma` in (1, 2).
///
/// Term powers must lie in {0, 1} or (1, inf); powers in (0, 1) are rejected
/// with the offending power reported.
pub fn caputo(p: &FracPoly, sigma: f64) -> Result<FracExpr, FracPolyError> {
    if !(1.0 < sigma && sigma < 2.0) {
        return Err(FracPolyError::CaputoOrderOutOfRange(sigma));
    }
    let mut out = Vec::new();
    for t in p.terms() {
        let pw = t.power;
        if pw.abs() <= POWER_MERGE_TOL || (pw - 1.0).abs() <= POWER_MERGE_TOL {
            continue; // degree < 2 polynomials are annihilated
        }
        if pw < 1.0 {
            return Err(FracPolyError::CaputoPowerUnsupported { power: pw });
        }
        let num = specfun::gamma(pw + 1.0)
            .map_err(|_| FracPolyError::CaputoGammaPole { power: pw })?;
        let den = specfun::gamma(pw + 1.0 - sigma)
            .map_err(|_| FracPolyError::CaputoGammaPole { power: pw })?;
        out.push(Term {
            coeff: t.coeff * num / den,
            power: pw - sigma,
        });
    }
    Ok(FracExpr::new(out))
}

/// Manufactured right-hand side `-D_*^delta u + b u' + c u` with all pieces
/// precomputed; evaluable wherever the Caputo derivative of `u` is.
#[derive(Debug, Clone)]
pub struct ManufacturedRhs {
    caputo_u: FracExpr,
    du: FracExpr,
    u: FracPoly,
    b: FracPoly,
    c: FracPoly,
}

impl ManufacturedRhs {
    pub fn eval(&self, x: f64) -> Result<f64, FracPolyError> {
        Ok(-self.caputo_u.eval(x)? + self.b.eval(x) * self.du.eval(x)? + self.c.eval(x) * self.u.eval(x))
    }
}

/// Build the right-hand side that makes `u` the exact solution of
/// `-D_*^delta u + b u' + c u = f`.
pub fn manufactured_rhs(
    u: &FracPoly,
    b: &FracPoly,
    c: &FracPoly,
    delta: f64,
) -> Result<ManufacturedRhs, FracPolyError> {
    Ok(ManufacturedRhs {
        caputo_u: caputo(u, delta)?,
        du: u.derivative(1),
        u: u.clone(),
        b: b.clone(),
        c: c.clone(),
    })
}

// ---------------------------------------------------------------------------
// Quadrature oracle
// ---------------------------------------------------------------------------

const GL7_NODES: [f64; 7] = [
    -0.9491079123427585,
    -0.7415311855993945,
    -0.4058451513773972,
    0.0,
    0.4058451513773972,
    0.7415311855993945,
    0.9491079123427585,
];
const GL7_WEIGHTS: [f64; 7] = [
    0.12948496616887065,
    0.2797053914892766,
    0.3818300505051183,
    0.41795918367346896,
    0.3818300505051183,
    0.2797053914892766,
    0.12948496616887065,
];
const GL15_NODES: [f64; 15] = [
    -0.9879925180204854,
    -0.937273392400706,
    -0.8482065834104272,
    -0.7244177313601701,
    -0.5709721726085388,
    -0.3941513470775634,
    -0.20119409399743451,
    0.0,
    0.20119409399743451,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601701,
    0.8482065834104272,
    0.937273392400706,
    0.9879925180204854,
];
const GL15_WEIGHTS: [f64; 15] = [
    0.030753241996118647,
    0.07036604748810807,
    0.10715922046717177,
    0.1395706779261539,
    0.16626920581699378,
    0.18616100001556188,
    0.19843148532711125,
    0.2025782419255609,
    0.19843148532711125,
    0.18616100001556188,
    0.16626920581699378,
    0.1395706779261539,
    0.10715922046717177,
    0.07036604748810807,
    0.030753241996118647,
];

fn gl_pair<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut low = 0.0;
    for (x, w) in GL7_NODES.iter().zip(GL7_WEIGHTS.iter()) {
        low += w * f(mid + half * x);
    }
    let mut high = 0.0;
    for (x, w) in GL15_NODES.iter().zip(GL15_WEIGHTS.iter()) {
        high += w * f(mid + half * x);
    }
    (half * high, half * (high - low).abs())
}

/// Adaptive Gauss-Legendre (7/15 pair) to an absolute tolerance.
///
/// Pieces either meet a length-proportional share of the budget or bottom
/// out at the depth cap; the accumulated error estimate of everything
/// accepted is checked against the budget at the end, so deep pieces whose
/// estimates have hit the floating-point floor cannot fail spuriously.
fn adaptive_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, FracPolyError> {
    const MAX_INTERVALS: usize = 100_000;
    const MAX_DEPTH: u32 = 52;
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut used = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        used += 1;
        if used > MAX_INTERVALS {
            return Err(FracPolyError::QuadratureNoConvergence { worst: err_total });
        }
        let (val, err) = gl_pair(f, lo, hi);
        if err <= tol * (hi - lo) / (b - a) || depth >= MAX_DEPTH {
            total += val;
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    if err_total > 4.0 * tol {
        return Err(FracPolyError::QuadratureNoConvergence { worst: err_total });
    }
    Ok(total)
}

/// `int_0^upper s^alpha phi(s) ds` with alpha > -1 and `phi` smooth.
///
/// The substitution `s = upper * v^(1/(alpha+1))` absorbs the endpoint weight
/// exactly, leaving a bounded integrand on [0, 1] for the adaptive rule.
fn weighted_endpoint_integral<F: Fn(f64) -> f64>(
    alpha: f64,
    upper: f64,
    phi: &F,
    tol: f64,
) -> Result<f64, FracPolyError> {
    debug_assert!(alpha > -1.0 && upper > 0.0);
    let m = 1.0 / (alpha + 1.0);
    let prefactor = upper.powf(alpha + 1.0) * m;
    let g = |v: f64| phi(upper * powx(v, m));
    let inner = adaptive_gl(&g, 0.0, 1.0, tol / prefactor.abs().max(f64::MIN_POSITIVE))?;
    Ok(prefactor * inner)
}

/// Caputo derivative of `p` at `x` through the integral form
/// `(1/Gamma(2-sigma)) int_0^x (x-t)^(1-sigma) p''(t) dt`,
/// evaluated with singularity-splitting quadrature: the interval is split at
/// x/2, and on each half the endpoint power weight (`t^q` of `p''` near 0,
/// `(x-t)^(1-sigma)` near x) is absorbed exactly before integrating.
pub fn caputo_quadrature_oracle(
    p: &FracPoly,
    sigma: f64,
    x: f64,
) -> Result<f64, FracPolyError> {
    if !(1.0 < sigma && sigma < 2.0) {
        return Err(FracPolyError::CaputoOrderOutOfRange(sigma));
    }
    if !(0.0 < x && x <= 1.0) {
        return Err(FracPolyError::QuadraturePointOutOfRange(x));
    }
    let d2 = p.derivative(2);
    let half = 0.5 * x;
    let mut total = 0.0;
    for t in d2.terms() {
        let q = t.power;
        if q <= -1.0 {
            // p'' is not integrable; cannot happen for admissible powers
            return Err(FracPolyError::CaputoPowerUnsupported { power: q + 2.0 });
        }
        let tol = 1e-12 / t.coeff.abs().max(1.0);
        // near t = 0: weight t^q, smooth factor (x - t)^(1-sigma)
        let left = weighted_endpoint_integral(q, half, &|s: f64| (x - s).powf(1.0 - sigma), tol)?;
        // near t = x (substituted s = x - t): weight s^(1-sigma), smooth (x-s)^q
        let right = weighted_endpoint_integral(1.0 - sigma, half, &|s: f64| powx(x - s, q), tol)?;
        total += t.coeff * (left + right);
    }
    let norm = specfun::gamma(2.0 - sigma).expect("2 - sigma in (0, 1)");
    Ok(total / norm)
}

// ---------------------------------------------------------------------------
// JSON power resolution
// ---------------------------------------------------------------------------

/// Power field of the JSON term representation: a number, or one of the
/// symbolic forms "delta" and "2*delta-1" resolved against the problem order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerSpec {
    Number(f64),
    Symbol(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub coeff: f64,
    pub power: PowerSpec,
}

/// Resolve a JSON term list into a [`FracPoly`] for a concrete delta.
pub fn resolve_poly(spec: &[TermSpec], delta: f64) -> Result<FracPoly, FracPolyError> {
    let mut terms = Vec::with_capacity(spec.len());
    for t in spec {
        let power = match &t.power {
            PowerSpec::Number(p) => *p,
            PowerSpec::Symbol(s) => match s.as_str() {
                "delta" => delta,
                "2*delta-1" => 2.0 * delta - 1.0,
                other => return Err(FracPolyError::UnknownPowerSymbol(other.to_string())),
            },
        };
        terms.push(Term {
            coeff: t.coeff,
            power,
        });
    }
    FracPoly::new(terms)
}
