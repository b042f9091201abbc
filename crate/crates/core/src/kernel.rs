//! Drury-Arveson kernel, Gram matrices and the Hermitian linear algebra
//! shared by the other modules.
//!
//! The inner product is linear in the first slot, `<z,w> = sum z_i conj(w_i)`,
//! so `k(z,w) = 1/(1 - <z,w>)` is holomorphic in `z` and conjugate-holomorphic
//! in `w`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::{Tolerances, JITTER_LADDER};
use crate::C64;

/// A point of the open unit ball in `C^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct BallPoint {
    coords: Vec<C64>,
}

impl BallPoint {
    /// Builds a point with the default ball margin.
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        Self::with_margin(coords, Tolerances::default().eps_ball)
    }

    pub fn with_margin(coords: Vec<C64>, eps_ball: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let norm_sq = norm_sq(&coords);
        if !(norm_sq < 1.0 - eps_ball) {
            return Err(Error::OutsideBall { norm_sq, eps_ball });
        }
        Ok(Self { coords })
    }

    /// Convenience constructor for points with real coordinates.
    pub fn real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            coords: vec![C64::new(0.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coords)
    }

    /// Distance to the sphere in squared norm, `1 - |z|^2`.
    pub fn margin(&self) -> f64 {
        1.0 - self.norm_sq()
    }

    pub fn distance(&self, other: &BallPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Applies a `d x d` matrix to the point. The result is re-validated.
    pub fn transform(&self, u: &DMatrix<C64>) -> Result<BallPoint> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.ncols(),
            });
        }
        let v = u * nalgebra::DVector::from_column_slice(&self.coords);
        BallPoint::new(v.iter().copied().collect())
    }
}

impl TryFrom<Vec<[f64; 2]>> for BallPoint {
    type Error = Error;

    fn try_from(raw: Vec<[f64; 2]>) -> Result<Self> {
        BallPoint::new(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<BallPoint> for Vec<[f64; 2]> {
    fn from(p: BallPoint) -> Self {
        p.coords.into_iter().map(|c| [c.re, c.im]).collect()
    }
}

/// Neumaier-compensated complex accumulator; terms are added in the order
/// given.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

impl CompensatedSum {
    pub fn add(&mut self, x: C64) {
        neumaier(&mut self.re, x.re);
        neumaier(&mut self.im, x.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (sum, comp) = acc;
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// `<z,w> = sum z_i conj(w_i)`, summed in ascending index with compensation.
pub fn inner(z: &[C64], w: &[C64]) -> C64 {
    let mut acc = CompensatedSum::default();
    for (a, b) in z.iter().zip(w) {
        acc.add(a * b.conj());
    }
    acc.value()
}

fn norm_sq(z: &[C64]) -> f64 {
    inner(z, z).re
}

/// `k_d(z,w) = 1 / (1 - <z,w>)`.
pub fn kernel_eval(z: &BallPoint, w: &BallPoint) -> Result<C64> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            found: w.dim(),
        });
    }
    if z == w {
        // Real by construction on the diagonal.
        return Ok(C64::new(1.0 / z.margin(), 0.0));
    }
    Ok(1.0 / (1.0 - inner(z.coords(), w.coords())))
}

/// Gram matrix of the Drury-Arveson kernel on a finite node set.
#[derive(Clone, Debug)]
pub struct KernelGram {
    entries: DMatrix<C64>,
    nodes: Vec<BallPoint>,
}

impl KernelGram {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn nodes(&self) -> &[BallPoint] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.entries)
    }

    pub fn psd(&self, tol: &Tolerances) -> Result<PsdCheck> {
        psd_check(&self.entries, tol)
    }

    pub fn whiten(&self, tol: &Tolerances) -> Result<WhitenedFactor> {
        whiten(&self.entries, tol)
    }
}

/// Checks the node list is non-empty, of one dimension and pairwise distinct.
pub fn validate_nodes(nodes: &[BallPoint], tol: &Tolerances) -> Result<()> {
    let first = nodes.first().ok_or(Error::EmptyNodes)?;
    for p in nodes {
        if p.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: p.dim(),
            });
        }
    }
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let distance = nodes[i].distance(&nodes[j]);
            if distance <= tol.tol_node {
                return Err(Error::DuplicateNodes { i, j, distance });
            }
        }
    }
    Ok(())
}

/// Assembles `K[i][j] = k_d(z_i, z_j)`; the lower triangle mirrors the upper.
pub fn gram(nodes: &[BallPoint], tol: &Tolerances) -> Result<KernelGram> {
    validate_nodes(nodes, tol)?;
    let n = nodes.len();
    let mut entries = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let k = kernel_eval(&nodes[i], &nodes[j])?;
            entries[(i, j)] = k;
            entries[(j, i)] = k.conj();
        }
    }
    Ok(KernelGram {
        entries,
        nodes: nodes.to_vec(),
    })
}

pub fn trace(a: &DMatrix<C64>) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Largest `|a_ij - conj(a_ji)|`.
pub fn hermitian_defect(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(a: &DMatrix<C64>, tol_herm: f64) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let deviation = hermitian_defect(a);
    if deviation > tol_herm * scale {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `(A + A*) / 2`.
pub fn hermitian_part(a: &DMatrix<C64>) -> DMatrix<C64> {
    (a + a.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<C64>, tol_herm: f64) -> Result<Vec<f64>> {
    check_hermitian(a, tol_herm)?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(hermitian_part(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Eigen-decomposition of a Hermitian matrix with eigenpairs sorted by
/// ascending eigenvalue. Column `i` of the returned matrix is the unit
/// eigenvector of eigenvalue `i`.
pub fn hermitian_eigen(a: &DMatrix<C64>, tol_herm: f64) -> Result<(Vec<f64>, DMatrix<C64>)> {
    check_hermitian(a, tol_herm)?;
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, vectors))
}

pub fn min_eig_hermitian(a: &DMatrix<C64>, tol_herm: f64) -> Result<f64> {
    hermitian_eigenvalues(a, tol_herm)?
        .first()
        .copied()
        .ok_or(Error::EmptyNodes)
}

pub fn max_eig_hermitian(a: &DMatrix<C64>, tol_herm: f64) -> Result<f64> {
    hermitian_eigenvalues(a, tol_herm)?
        .last()
        .copied()
        .ok_or(Error::EmptyNodes)
}

/// Outcome of a Hermitian-PSD test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdCheck {
    pub min_eig: f64,
    pub trace: f64,
    pub hermitian_defect: f64,
    pub passed: bool,
}

/// Hermitian within `tol_herm` and `min_eig >= -tol_psd * trace`.
pub fn psd_check(a: &DMatrix<C64>, tol: &Tolerances) -> Result<PsdCheck> {
    let min_eig = min_eig_hermitian(a, tol.tol_herm)?;
    let trace = trace(a);
    Ok(PsdCheck {
        min_eig,
        trace,
        hermitian_defect: hermitian_defect(a),
        passed: min_eig >= -tol.tol_psd * trace.abs(),
    })
}

/// Lower-triangular `L` with `L L* = K + jitter I`.
#[derive(Clone, Debug)]
pub struct WhitenedFactor {
    pub lower: DMatrix<C64>,
    pub jitter_applied: f64,
}

impl WhitenedFactor {
    pub fn reconstruct(&self) -> DMatrix<C64> {
        &self.lower * self.lower.adjoint()
    }

    /// `max |L L* - (K + jitter I)|`.
    pub fn reconstruction_error(&self, k: &DMatrix<C64>) -> f64 {
        let mut target = k.clone();
        for i in 0..target.nrows() {
            target[(i, i)] += self.jitter_applied;
        }
        (self.reconstruct() - target)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Solves `L X = B` in place.
    pub fn solve_lower(&self, b: &mut DMatrix<C64>) {
        let ok = self.lower.solve_lower_triangular_mut(b);
        debug_assert!(ok, "factor has a zero pivot");
    }
}

/// Cholesky factor of `K + jitter I`, escalating the jitter through
/// [`JITTER_LADDER`] (multiples of `trace(K)`) until the factorisation
/// succeeds and reconstructs within `tol_chol * trace(K)`.
pub fn whiten(k: &DMatrix<C64>, tol: &Tolerances) -> Result<WhitenedFactor> {
    check_hermitian(k, tol.tol_herm)?;
    let tr = trace(k);
    let sym = hermitian_part(k);
    let mut last = 0.0;
    for step in JITTER_LADDER {
        let jitter = step * tr;
        last = jitter;
        let mut shifted = sym.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += jitter;
        }
        let Some(chol) = Cholesky::new(shifted) else {
            continue;
        };
        let factor = WhitenedFactor {
            lower: chol.unpack(),
            jitter_applied: jitter,
        };
        if factor.reconstruction_error(k) <= tol.tol_chol * tr {
            return Ok(factor);
        }
    }
    Err(Error::WhiteningFailed { max_jitter: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn kernel_at_origin_is_one() {
        for d in 1..5 {
            let o = BallPoint::origin(d);
            assert_eq!(kernel_eval(&o, &o).unwrap(), c(1.0));
        }
    }

    #[test]
    fn kernel_hand_values() {
        let z = BallPoint::real(&[0.5, 0.0]).unwrap();
        let w = BallPoint::real(&[0.0, 0.5]).unwrap();
        assert!((kernel_eval(&z, &z).unwrap() - c(4.0 / 3.0)).norm() < 1e-15);
        assert_eq!(kernel_eval(&z, &w).unwrap(), c(1.0));
    }

    #[test]
    fn kernel_errors() {
        let z = BallPoint::real(&[0.5]).unwrap();
        let w = BallPoint::real(&[0.0, 0.5]).unwrap();
        assert!(matches!(
            kernel_eval(&z, &w),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            BallPoint::real(&[1.0]),
            Err(Error::OutsideBall { .. })
        ));
        assert!(matches!(
            BallPoint::real(&[0.6, 0.8]),
            Err(Error::OutsideBall { .. })
        ));
        assert!(BallPoint::new(vec![]).is_err());
    }

    #[test]
    fn gram_examples() {
        let g = gram(&[BallPoint::origin(1)], &tol()).unwrap();
        assert_eq!(g.entries()[(0, 0)], c(1.0));

        let nodes = [
            BallPoint::real(&[0.0]).unwrap(),
            BallPoint::real(&[0.5]).unwrap(),
        ];
        let g = gram(&nodes, &tol()).unwrap();
        let expected = [[1.0, 1.0], [1.0, 4.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.entries()[(i, j)] - c(expected[i][j])).norm() < 1e-15);
            }
        }

        let dup = [BallPoint::origin(1), BallPoint::origin(1)];
        assert!(matches!(
            gram(&dup, &tol()),
            Err(Error::DuplicateNodes { i: 0, j: 1, .. })
        ));
        assert!(matches!(gram(&[], &tol()), Err(Error::EmptyNodes)));
    }

    #[test]
    fn min_eig_examples() {
        let id = DMatrix::<C64>::identity(3, 3);
        assert!((min_eig_hermitian(&id, 1e-12).unwrap() - 1.0).abs() < 1e-14);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(3.0)]));
        assert!((min_eig_hermitian(&d, 1e-12).unwrap() - 2.0).abs() < 1e-14);

        // Closed form from trace 7/3 and determinant 1/3.
        let nodes = [
            BallPoint::real(&[0.0]).unwrap(),
            BallPoint::real(&[0.5]).unwrap(),
        ];
        let g = gram(&nodes, &tol()).unwrap();
        let expected = (7.0 - 37f64.sqrt()) / 6.0;
        let got = min_eig_hermitian(g.entries(), 1e-12).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((expected - 0.152873).abs() < 1e-6);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(
            min_eig_hermitian(&a, 1e-12),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn whiten_examples() {
        let id = DMatrix::<C64>::identity(3, 3);
        let f = whiten(&id, &tol()).unwrap();
        assert_eq!(f.jitter_applied, 0.0);
        assert!((f.lower.clone() - id).iter().all(|z| z.norm() < 1e-15));

        let four = DMatrix::from_element(1, 1, c(4.0));
        let f = whiten(&four, &tol()).unwrap();
        assert_eq!(f.jitter_applied, 0.0);
        assert!((f.lower[(0, 0)] - c(2.0)).norm() < 1e-15);

        let rank_one = DMatrix::from_element(2, 2, c(1.0));
        let f = whiten(&rank_one, &tol()).unwrap();
        assert!(f.jitter_applied > 0.0);
        assert!(f.reconstruction_error(&rank_one) <= tol().tol_chol * 2.0);
    }

    #[test]
    fn whiten_fails_on_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        assert!(matches!(
            whiten(&a, &tol()),
            Err(Error::WhiteningFailed { .. })
        ));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            acc.add(c(x));
        }
        assert_eq!(acc.value(), c(2.0));
    }

    #[test]
    fn serde_roundtrip_validates() {
        let p: BallPoint = serde_json::from_str("[[0.5,0.0],[0.0,0.25]]").unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[0.5,0.0],[0.0,0.25]]");
        assert!(serde_json::from_str::<BallPoint>("[[1.0,0.0]]").is_err());
    }
}
