//! Convergence studies: exact-solution errors, two-mesh differences,
//! observed orders, and truncation-error diagnostics.
//!
//! A study runs over a delta grid and a doubling N list. In exact mode the
//! cell value is the maximum nodal error against the known solution; in
//! two-mesh mode it is the maximum difference against the next finer mesh at
//! coincident nodes. Orders are log2 ratios between consecutive N, so the
//! order at N exists only when the study also computed N doubled. The
//! uniform row takes the worst error over delta for each N and differences
//! those.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::discretize::{assemble, AssembleError};
use crate::fracpoly::FracPoly;
use crate::linsolve::{solve_with, DiscreteSolution, SolveError, Solver};
use crate::model::FractionalBvp;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Assemble(#[from] AssembleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("problem has no exact solution; exact-error mode needs one")]
    MissingExact,
    #[error("order is defined for positive errors, got ({0}, {1})")]
    NonPositiveError(f64, f64),
    #[error("mesh list must be strictly doubling, got {0:?}")]
    NsNotDoubling(Vec<usize>),
    #[error("study needs at least one delta and one N")]
    EmptyStudy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMode {
    /// Maximum nodal error against the exact solution.
    ExactError,
    /// Maximum difference against the solution on the doubled mesh.
    TwoMesh,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Cell {
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

/// Grid of (delta, N) error/order entries plus the uniform-in-delta row.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConvergenceTable {
    pub deltas: Vec<f64>,
    pub ns: Vec<usize>,
    /// entries[delta_index][n_index]
    pub entries: Vec<Vec<Cell>>,
    /// worst-over-delta error per N and its orders
    pub uniform: Vec<Cell>,
}

impl ConvergenceTable {
    pub fn cell(&self, delta_idx: usize, n_idx: usize) -> &Cell {
        &self.entries[delta_idx][n_idx]
    }

    /// Keep only the listed N columns (orders already computed survive).
    pub fn trim_to(&self, keep: &[usize]) -> ConvergenceTable {
        let idx: Vec<usize> = self
            .ns
            .iter()
            .enumerate()
            .filter(|(_, n)| keep.contains(n))
            .map(|(i, _)| i)
            .collect();
        ConvergenceTable {
            deltas: self.deltas.clone(),
            ns: idx.iter().map(|&i| self.ns[i]).collect(),
            entries: self
                .entries
                .iter()
                .map(|row| idx.iter().map(|&i| row[i]).collect())
                .collect(),
            uniform: idx.iter().map(|&i| self.uniform[i]).collect(),
        }
    }
}

/// Maximum pointwise error over all nodes.
pub fn max_error(sol: &DiscreteSolution, exact: &FracPoly) -> f64 {
    sol.values
        .iter()
        .enumerate()
        .map(|(j, v)| (exact.eval(sol.mesh.node(j)) - v).abs())
        .fold(0.0, f64::max)
}

/// Observed order log2(e_N / e_2N).
pub fn order(e_n: f64, e_2n: f64) -> Result<f64, HarnessError> {
    if e_n <= 0.0 || e_2n <= 0.0 {
        return Err(HarnessError::NonPositiveError(e_n, e_2n));
    }
    Ok((e_n / e_2n).log2())
}

/// Two-mesh difference: solve at N and 2N, compare at coincident nodes.
pub fn two_mesh_difference(
    p: &FractionalBvp,
    n: usize,
    solver: Solver,
) -> Result<f64, HarnessError> {
    let coarse = solve_with(&assemble(p, n)?, solver)?;
    let fine = solve_with(&assemble(p, 2 * n)?, solver)?;
    Ok(two_mesh_from_solutions(&coarse, &fine))
}

fn two_mesh_from_solutions(coarse: &DiscreteSolution, fine: &DiscreteSolution) -> f64 {
    coarse
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| (v - fine.values[2 * j]).abs())
        .fold(0.0, f64::max)
}

fn check_doubling(ns: &[usize]) -> Result<(), HarnessError> {
    if ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(HarnessError::NsNotDoubling(ns.to_vec()));
    }
    Ok(())
}

/// Run a convergence study. Cells along the delta axis are independent and
/// run in parallel; results are assembled in index order, so tables are
/// identical however many threads participate.
pub fn run_study(
    builder: &(dyn Fn(f64) -> FractionalBvp + Sync),
    deltas: &[f64],
    ns: &[usize],
    mode: StudyMode,
    solver: Solver,
) -> Result<ConvergenceTable, HarnessError> {
    if deltas.is_empty() || ns.is_empty() {
        return Err(HarnessError::EmptyStudy);
    }
    check_doubling(ns)?;

    let errors: Vec<Vec<f64>> = deltas
        .par_iter()
        .map(|&delta| -> Result<Vec<f64>, HarnessError> {
            let p = builder(delta);
            match mode {
                StudyMode::ExactError => {
                    let exact = p.exact.clone().ok_or(HarnessError::MissingExact)?;
                    ns.iter()
                        .map(|&n| {
                            let sol = solve_with(&assemble(&p, n)?, solver)?;
                            Ok(max_error(&sol, &exact))
                        })
                        .collect()
                }
                StudyMode::TwoMesh => {
                    // each N needs the solution at 2N as well; with a
                    // doubling list that is one extra solve at the top
                    let mut solutions = Vec::with_capacity(ns.len() + 1);
                    for &n in ns {
                        solutions.push(solve_with(&assemble(&p, n)?, solver)?);
                    }
                    let top = 2 * ns[ns.len() - 1];
                    solutions.push(solve_with(&assemble(&p, top)?, solver)?);
                    Ok((0..ns.len())
                        .map(|i| two_mesh_from_solutions(&solutions[i], &solutions[i + 1]))
                        .collect())
                }
            }
        })
        .collect::<Result<_, _>>()?;

    let entries: Vec<Vec<Cell>> = errors
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(i, &e)| Cell {
                    error: e,
                    order: if i + 1 < row.len() && ns[i + 1] == 2 * ns[i] {
                        order(e, row[i + 1]).ok()
                    } else {
                        None
                    },
                })
                .collect()
        })
        .collect();

    let uniform_errors: Vec<f64> = (0..ns.len())
        .map(|i| errors.iter().map(|row| row[i]).fold(0.0, f64::max))
        .collect();
    let uniform: Vec<Cell> = uniform_errors
        .iter()
        .enumerate()
        .map(|(i, &e)| Cell {
            error: e,
            order: if i + 1 < uniform_errors.len() {
                order(e, uniform_errors[i + 1]).ok()
            } else {
                None
            },
        })
        .collect();

    Ok(ConvergenceTable {
        deltas: deltas.to_vec(),
        ns: ns.to_vec(),
        entries,
        uniform,
    })
}

/// Truncation error tau = A u_exact - rhs (the residual of the exact
/// solution in the discrete equations).
pub fn truncation_profile(p: &FractionalBvp, n: usize) -> Result<Vec<f64>, HarnessError> {
    let exact = p.exact.as_ref().ok_or(HarnessError::MissingExact)?;
    let sys = assemble(p, n)?;
    let nodal: Vec<f64> = (0..=n).map(|j| exact.eval(sys.mesh.node(j))).collect();
    let au = sys.matrix.matvec(&nodal);
    Ok(au.iter().zip(sys.rhs.iter()).map(|(a, b)| a - b).collect())
}

/// Least-squares slope of ln y against ln x.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(ly.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

/// CSV table: `delta,N,error,order` per cell, then the uniform block with
/// delta = "uniform".
pub fn write_table_csv<W: Write>(w: &mut W, table: &ConvergenceTable) -> io::Result<()> {
    writeln!(w, "delta,N,error,order")?;
    for (di, &delta) in table.deltas.iter().enumerate() {
        for (ni, &n) in table.ns.iter().enumerate() {
            let cell = table.cell(di, ni);
            writeln!(
                w,
                "{},{},{},{}",
                delta,
                n,
                crate::format_sci(cell.error),
                cell.order.map(|o| format!("{o:.3}")).unwrap_or_default()
            )?;
        }
    }
    for (ni, &n) in table.ns.iter().enumerate() {
        let cell = &table.uniform[ni];
        writeln!(
            w,
            "uniform,{},{},{}",
            n,
            crate::format_sci(cell.error),
            cell.order.map(|o| format!("{o:.3}")).unwrap_or_default()
        )?;
    }
    Ok(())
}
