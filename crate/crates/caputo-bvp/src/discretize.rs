//! Assembly of the finite difference system `A u = f` on a uniform mesh.
//!
//! The fractional derivative at an interior node x_j is discretized as
//!
//! ```text
//! -D_*^delta u(x_j)  ~  -(1/kappa) sum_{k=0}^{j-1} d_{j-k} (u_{k+2} - 2 u_{k+1} + u_k),
//! kappa = Gamma(3 - delta) h^delta,
//! d_r   = r_+^(2-delta) - (r-1)_+^(2-delta),
//! ```
//!
//! the convective term with simple upwinding (one-sided differencing chosen
//! by the sign of b, which keeps the matrix sign structure on coarse meshes),
//! and the Robin boundary conditions with first-order one-sided differences.
//! The history sum makes row j dense in columns 0..=j+1 and zero beyond, so
//! `A` is lower Hessenberg.

use std::io::{self, Write};

use thiserror::Error;

use crate::model::{FractionalBvp, ValidationReport};
use crate::specfun;

/// Uniform mesh x_j = j/N on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformMesh {
    n: usize,
}

impl UniformMesh {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "mesh needs at least one cell");
        UniformMesh { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Node x_j, computed as j/N.
    pub fn node(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n);
        j as f64 / self.n as f64
    }

    pub fn num_nodes(&self) -> usize {
        self.n + 1
    }
}

/// Dense storage of a lower Hessenberg matrix of order N+1: row j holds
/// columns 0..=min(j+1, N).
#[derive(Debug, Clone, PartialEq)]
pub struct LowerHessenbergMatrix {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl LowerHessenbergMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        let rows = (0..=n).map(|j| vec![0.0; (j + 2).min(n + 1)]).collect();
        LowerHessenbergMatrix { n, rows }
    }

    /// N, where the order is N+1.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.n + 1
    }

    fn width(&self, j: usize) -> usize {
        (j + 2).min(self.n + 1)
    }

    /// Entry (j, k); structural zeros above the superdiagonal read as 0.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        if k < self.width(j) {
            self.rows[j][k]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        assert!(k < self.width(j), "write to structural zero ({j}, {k})");
        self.rows[j][k] = v;
    }

    pub fn add(&mut self, j: usize, k: usize, v: f64) {
        assert!(k < self.width(j), "write to structural zero ({j}, {k})");
        self.rows[j][k] += v;
    }

    /// Stored entries of row j (columns 0..=min(j+1, N)).
    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    pub fn row_sum(&self, j: usize) -> f64 {
        self.rows[j].iter().sum()
    }

    pub fn row_abs_sum(&self, j: usize) -> f64 {
        self.rows[j].iter().map(|v| v.abs()).sum()
    }

    /// Max row sum of absolute values.
    pub fn inf_norm(&self) -> f64 {
        (0..=self.n)
            .map(|j| self.row_abs_sum(j))
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order());
        self.rows
            .iter()
            .map(|row| row.iter().zip(x.iter()).map(|(a, v)| a * v).sum())
            .collect()
    }

    /// Diagnostic dump: one `j,k,value` line per structural entry.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "j,k,value")?;
        for (j, row) in self.rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                writeln!(w, "{},{},{}", j, k, crate::format_sci(*v))?;
            }
        }
        Ok(())
    }
}

/// Weight d_r = r_+^(2-delta) - (r-1)_+^(2-delta); zero for r <= 0.
pub fn weight(r: i64, delta: f64) -> f64 {
    let rp = r.max(0) as f64;
    let rm = (r - 1).max(0) as f64;
    rp.powf(2.0 - delta) - rm.powf(2.0 - delta)
}

/// d_0..d_n as a lookup table (d_0 = 0).
pub fn caputo_weights(delta: f64, n: usize) -> Vec<f64> {
    let e = 2.0 - delta;
    let mut pow_prev = 0.0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    for r in 1..=n {
        let pow_r = (r as f64).powf(e);
        out.push(pow_r - pow_prev);
        pow_prev = pow_r;
    }
    out
}

/// Normalizing factor kappa = Gamma(3 - delta) h^delta.
///
/// Kept as a single named constant so that a different reading of the
/// discretization scaling would be a one-line change.
pub fn kappa(delta: f64, h: f64) -> f64 {
    specfun::gamma(3.0 - delta).expect("3 - delta is in (1, 2)") * h.powf(delta)
}

/// Upwind coefficients (lower, diagonal, upper) for the convective term:
/// backward differencing for b_j >= 0, forward for b_j < 0.
pub fn upwind_coeffs(b_j: f64, h: f64) -> (f64, f64, f64) {
    let lower = -(b_j + b_j.abs()) / (2.0 * h);
    let diag = b_j.abs() / h;
    let upper = (b_j - b_j.abs()) / (2.0 * h);
    (lower, diag, upper)
}

/// Column coefficients 0..=j+1 of the discrete Caputo operator at row j.
///
/// The generic column combines three weights, but columns 0 and 1 take
/// truncated forms because the history sum starts at k = 0: column 0 sees
/// only d_j, column 1 only -d_{j-1} + 2 d_j.
pub fn caputo_row(j: usize, delta: f64, n: usize) -> Vec<f64> {
    assert!((1..n).contains(&j), "interior rows only");
    let d = caputo_weights(delta, n);
    caputo_row_with(&d, kappa(delta, 1.0 / n as f64), j)
}

fn caputo_row_with(d: &[f64], kappa: f64, j: usize) -> Vec<f64> {
    let dg = |r: i64| -> f64 {
        if r <= 0 {
            0.0
        } else {
            d[r as usize]
        }
    };
    let ji = j as i64;
    let mut row = Vec::with_capacity(j + 2);
    row.push(-dg(ji) / kappa);
    row.push((-dg(ji - 1) + 2.0 * dg(ji)) / kappa);
    for k in 2..=(ji + 1) {
        row.push((-dg(ji - k) + 2.0 * dg(ji - k + 1) - dg(ji - k + 2)) / kappa);
    }
    row
}

/// The assembled linear system together with the data needed by the
/// monotonicity diagnostics.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: LowerHessenbergMatrix,
    /// (gamma0, f(x_1), ..., f(x_{N-1}), gamma1)
    pub rhs: Vec<f64>,
    pub kappa: f64,
    pub mesh: UniformMesh,
    pub delta: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    /// b sampled at all nodes (b is continuous on [0, 1]).
    pub b_nodes: Vec<f64>,
    /// c sampled at all nodes.
    pub c_nodes: Vec<f64>,
    /// d_0..d_N.
    pub weights: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("problem fails validation:\n{0}")]
    Validation(ValidationReport),
    #[error("mesh too coarse: N = {0} < 4")]
    MeshTooCoarse(usize),
}

/// Assemble the system for a validated problem; N >= 4 so that every
/// structural case of the row formulas is present.
pub fn assemble(p: &FractionalBvp, n: usize) -> Result<AssembledSystem, AssembleError> {
    let report = p.validate();
    if !report.passed() {
        return Err(AssembleError::Validation(report));
    }
    assemble_unchecked(p, n)
}

/// Assembly without the admissibility check. Intended for diagnostics on
/// inadmissible problems (e.g. probing the certificate when the alpha0
/// condition is violated); the solver theory gives no guarantees here.
pub fn assemble_unchecked(p: &FractionalBvp, n: usize) -> Result<AssembledSystem, AssembleError> {
    if n < 4 {
        return Err(AssembleError::MeshTooCoarse(n));
    }
    let mesh = UniformMesh::new(n);
    let h = mesh.h();
    let kap = kappa(p.delta, h);
    let d = caputo_weights(p.delta, n);

    let b_nodes: Vec<f64> = (0..=n).map(|j| p.b.eval(mesh.node(j))).collect();
    let c_nodes: Vec<f64> = (0..=n).map(|j| p.c.eval(mesh.node(j))).collect();

    let mut a = LowerHessenbergMatrix::zeros(n);
    let mut rhs = vec![0.0; n + 1];

    a.set(0, 0, 1.0 + p.alpha0 / h);
    a.set(0, 1, -p.alpha0 / h);
    rhs[0] = p.gamma0;

    a.set(n, n - 1, -p.alpha1 / h);
    a.set(n, n, 1.0 + p.alpha1 / h);
    rhs[n] = p.gamma1;

    for j in 1..n {
        let cap = caputo_row_with(&d, kap, j);
        for (k, v) in cap.into_iter().enumerate() {
            a.add(j, k, v);
        }
        let (lower, diag, upper) = upwind_coeffs(b_nodes[j], h);
        a.add(j, j - 1, lower);
        a.add(j, j, diag + c_nodes[j]);
        a.add(j, j + 1, upper);
        rhs[j] = p.f.eval(mesh.node(j));
    }

    Ok(AssembledSystem {
        matrix: a,
        rhs,
        kappa: kap,
        mesh,
        delta: p.delta,
        alpha0: p.alpha0,
        alpha1: p.alpha1,
        b_nodes,
        c_nodes,
        weights: d,
    })
}
