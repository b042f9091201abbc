//! Minimal multiplier norms on finite samples.
//!
//! For data `z_i -> v_i` the smallest `t` making the Pick matrix
//! `(t^2 - v_i conj(v_j)) k(z_i, z_j)` positive semidefinite is
//! `t^2 = lambda_max(L^-1 D K D* L^-*)` with `K = L L*` and `D = diag(v)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, gram, BallPoint, PsdCheck};
use crate::tol::Tolerances;
use crate::C64;

/// Interpolation nodes and target values.
#[derive(Clone, Debug)]
pub struct PickProblem {
    nodes: Vec<BallPoint>,
    values: Vec<C64>,
}

impl PickProblem {
    pub fn new(nodes: Vec<BallPoint>, values: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch {
                nodes: nodes.len(),
                values: values.len(),
            });
        }
        kernel::validate_nodes(&nodes, tol)?;
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> &[BallPoint] {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PickReport {
    pub norm: f64,
    /// Smallest eigenvalue of the Pick matrix at `t = norm`.
    pub min_eig_at_norm: f64,
    pub whitening_jitter: f64,
    /// PSD check of the Gram matrix the norm was computed from.
    pub gram: PsdCheck,
}

/// Smallest multiplier norm of any function on the ball taking the given
/// values at the nodes.
pub fn multiplier_norm(p: &PickProblem, tol: &Tolerances) -> Result<PickReport> {
    let g = gram(&p.nodes, tol)?;
    let gram_check = g.psd(tol)?;
    let factor = g.whiten(tol)?;
    let k = g.entries();
    let n = k.nrows();

    // A = L^-1 D L, so that A A* = L^-1 D K D* L^-*.
    let mut a = DMatrix::from_fn(n, n, |i, j| p.values[i] * factor.lower[(i, j)]);
    factor.solve_lower(&mut a);
    let h = &a * a.adjoint();
    let t_sq = kernel::max_eig_hermitian(&kernel::hermitian_part(&h), tol.tol_herm)?.max(0.0);
    let norm = t_sq.sqrt().max(p.max_abs_value());

    let pick = DMatrix::from_fn(n, n, |i, j| {
        (norm * norm - p.values[i] * p.values[j].conj()) * k[(i, j)]
    });
    let min_eig_at_norm = kernel::min_eig_hermitian(&kernel::hermitian_part(&pick), tol.tol_herm)?;

    Ok(PickReport {
        norm,
        min_eig_at_norm,
        whitening_jitter: factor.jitter_applied,
        gram: gram_check,
    })
}

fn find_overlap(a: &[BallPoint], b: &[BallPoint], tol: &Tolerances) -> Result<()> {
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if x.distance(y) <= tol.tol_node {
                return Err(Error::OverlappingSamples {
                    a_index: i,
                    b_index: j,
                });
            }
        }
    }
    Ok(())
}

/// Pick bound for a multiplier equal to 1 on `a_nodes` and 0 on `b_nodes`.
pub fn separator_bound(
    a_nodes: &[BallPoint],
    b_nodes: &[BallPoint],
    tol: &Tolerances,
) -> Result<PickReport> {
    find_overlap(a_nodes, b_nodes, tol)?;
    let nodes: Vec<BallPoint> = a_nodes.iter().chain(b_nodes).cloned().collect();
    let values = a_nodes
        .iter()
        .map(|_| C64::new(1.0, 0.0))
        .chain(b_nodes.iter().map(|_| C64::new(0.0, 0.0)))
        .collect();
    multiplier_norm(&PickProblem::new(nodes, values, tol)?, tol)
}

/// Norms gathered by [`union_norm_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionNormReport {
    pub t_union: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub s_a: f64,
    pub s_b: f64,
    /// `t_a s_a + t_b s_b`.
    pub bound: f64,
    /// `t_union <= bound + tol_psd`.
    pub holds: bool,
    /// Every Gram matrix involved passed its PSD check.
    pub grams_psd: bool,
}

/// Checks `t_union <= t_a s_a + t_b s_b` on a union of two disjoint samples.
///
/// An empty piece contributes nothing to the combination (its `t` and `s`
/// are reported as zero).
pub fn union_norm_check(
    a_nodes: &[BallPoint],
    a_values: &[C64],
    b_nodes: &[BallPoint],
    b_values: &[C64],
    tol: &Tolerances,
) -> Result<UnionNormReport> {
    find_overlap(a_nodes, b_nodes, tol)?;
    let mut grams_psd = true;
    let mut piece =
        |nodes: &[BallPoint], values: &[C64], others: &[BallPoint]| -> Result<(f64, f64)> {
            if nodes.is_empty() {
                return Ok((0.0, 0.0));
            }
            let t = multiplier_norm(
                &PickProblem::new(nodes.to_vec(), values.to_vec(), tol)?,
                tol,
            )?;
            let s = separator_bound(nodes, others, tol)?;
            grams_psd &= t.gram.passed && s.gram.passed;
            Ok((t.norm, s.norm))
        };
    let (t_a, s_a) = piece(a_nodes, a_values, b_nodes)?;
    let (t_b, s_b) = piece(b_nodes, b_values, a_nodes)?;

    let nodes: Vec<BallPoint> = a_nodes.iter().chain(b_nodes).cloned().collect();
    let values: Vec<C64> = a_values.iter().chain(b_values).copied().collect();
    let union = multiplier_norm(&PickProblem::new(nodes, values, tol)?, tol)?;
    grams_psd &= union.gram.passed;

    let bound = t_a * s_a + t_b * s_b;
    Ok(UnionNormReport {
        t_union: union.norm,
        t_a,
        t_b,
        s_a,
        s_b,
        bound,
        holds: union.norm <= bound + tol.tol_psd,
        grams_psd,
    })
}
