//! Polynomial maps `h: D -> B_d` and their boundary diagnostics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::inner;
use crate::tol::Tolerances;
use crate::C64;

/// Interior check grid: radii x angles.
pub const INTERIOR_RADII: usize = 64;
pub const INTERIOR_ANGLES: usize = 128;

/// Univariate complex polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    /// `c z^k`.
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Index of the highest non-zero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != C64::new(0.0, 0.0))
    }

    /// Horner evaluation, highest coefficient first.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        }
    }

    /// `Some((k, c))` when the polynomial is exactly `c z^k` with `c != 0`.
    pub fn as_monomial(&self) -> Option<(usize, C64)> {
        let zero = C64::new(0.0, 0.0);
        let mut nz = self.coeffs.iter().enumerate().filter(|(_, c)| **c != zero);
        let (k, c) = nz.next()?;
        nz.next().is_none().then_some((k, *c))
    }
}

impl From<Vec<[f64; 2]>> for Polynomial {
    fn from(raw: Vec<[f64; 2]>) -> Self {
        Polynomial::new(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<Polynomial> for Vec<[f64; 2]> {
    fn from(p: Polynomial) -> Self {
        p.coeffs.into_iter().map(|c| [c.re, c.im]).collect()
    }
}

/// A `d`-tuple of polynomials. Serialised as a list of components, each a
/// list of `[re, im]` coefficient pairs in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Polynomial>", into = "Vec<Polynomial>")]
pub struct Holomap {
    components: Vec<Polynomial>,
    first: Vec<Polynomial>,
    second: Vec<Polynomial>,
}

impl Holomap {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyHolomap);
        }
        let first: Vec<_> = components.iter().map(Polynomial::derivative).collect();
        let second = first.iter().map(Polynomial::derivative).collect();
        Ok(Self {
            components,
            first,
            second,
        })
    }

    /// `(a z^p, b z^q)`-style maps: one monomial per component.
    pub fn monomials(terms: &[(C64, usize)]) -> Result<Self> {
        Self::new(
            terms
                .iter()
                .map(|&(c, k)| Polynomial::monomial(c, k))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn max_degree(&self) -> usize {
        self.components
            .iter()
            .filter_map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> Vec<C64> {
        self.components.iter().map(|p| p.eval(z)).collect()
    }

    pub fn deriv(&self, z: C64) -> Vec<C64> {
        self.first.iter().map(|p| p.eval(z)).collect()
    }

    pub fn second_deriv(&self, z: C64) -> Vec<C64> {
        self.second.iter().map(|p| p.eval(z)).collect()
    }

    /// Exponent and coefficient of each component when every component is a
    /// single monomial.
    pub fn monomial_terms(&self) -> Option<Vec<(usize, C64)>> {
        self.components
            .iter()
            .map(Polynomial::as_monomial)
            .collect()
    }

    /// Largest `|h(z)|^2` over the interior check grid, radii up to
    /// `1 - eps_ball`.
    pub fn interior_max_norm_sq(&self, eps_ball: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..INTERIOR_RADII {
            let r = (i + 1) as f64 / INTERIOR_RADII as f64 * (1.0 - eps_ball);
            for k in 0..INTERIOR_ANGLES {
                let z = C64::from_polar(r, 2.0 * PI * k as f64 / INTERIOR_ANGLES as f64);
                let h = self.eval(z);
                worst = worst.max(inner(&h, &h).re);
            }
        }
        worst
    }

    /// `|h(zeta_k)|^2` at every grid node.
    pub fn boundary_norms_sq(&self, grid: &BoundaryGrid) -> Vec<f64> {
        grid.nodes()
            .map(|z| {
                let h = self.eval(z);
                inner(&h, &h).re
            })
            .collect()
    }

    /// Interior and boundary checks of properness on the given grid.
    pub fn properness(&self, grid: &BoundaryGrid, tol: &Tolerances) -> Properness {
        let interior_max_norm_sq = self.interior_max_norm_sq(tol.eps_ball);
        let b = self.boundary_norms_sq(grid);
        let boundary_min_norm_sq = b.iter().copied().fold(f64::INFINITY, f64::min);
        let boundary_max_norm_sq = b.iter().copied().fold(0.0, f64::max);
        Properness {
            interior_max_norm_sq,
            boundary_min_norm_sq,
            boundary_max_norm_sq,
            interior_ok: interior_max_norm_sq < 1.0,
            boundary_normalized: boundary_min_norm_sq >= 1.0 - tol.tol_proper
                && boundary_max_norm_sq <= 1.0 + tol.tol_proper,
        }
    }
}

impl TryFrom<Vec<Polynomial>> for Holomap {
    type Error = Error;

    fn try_from(components: Vec<Polynomial>) -> Result<Self> {
        Holomap::new(components)
    }
}

impl From<Holomap> for Vec<Polynomial> {
    fn from(h: Holomap) -> Self {
        h.components
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Properness {
    pub interior_max_norm_sq: f64,
    pub boundary_min_norm_sq: f64,
    pub boundary_max_norm_sq: f64,
    pub interior_ok: bool,
    /// `| |h|^2 - 1 | <= tol_proper` at every boundary node.
    pub boundary_normalized: bool,
}

/// Uniform quadrature on the circle: nodes `exp(2 pi i k / N)`, weights `1/N`.
/// This is harmonic measure for the disk with base point 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    n: usize,
}

impl BoundaryGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one node".into(),
            ));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * (k % self.n) as f64 / self.n as f64
    }

    pub fn node(&self, k: usize) -> C64 {
        C64::from_polar(1.0, self.angle(k))
    }

    /// `zeta_k^m`, reduced mod N before taking the exponential so that high
    /// powers stay accurate.
    pub fn node_pow(&self, k: usize, m: usize) -> C64 {
        let e = ((k % self.n) * (m % self.n)) % self.n;
        self.node(e)
    }

    pub fn nodes(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.n).map(|k| self.node(k))
    }
}

/// `min_k |<Dh(zeta_k), h(zeta_k)>|`.
pub fn transversality_margin(h: &Holomap, grid: &BoundaryGrid) -> f64 {
    transversality_profile(h, grid)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// `|<Dh(zeta_k), h(zeta_k)>|` at every node.
pub fn transversality_profile(h: &Holomap, grid: &BoundaryGrid) -> Vec<f64> {
    grid.nodes()
        .map(|z| inner(&h.deriv(z), &h.eval(z)).norm())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub injective: bool,
    /// First colliding pair of node indices (row-major scan).
    pub witness: Option<(usize, usize)>,
    /// Smallest `|h(zeta_i) - h(zeta_j)|` over distinct nodes.
    pub min_distance: f64,
}

/// Checks that distinct grid nodes have images further apart than `tol_inj`.
pub fn boundary_injectivity_check(
    h: &Holomap,
    grid: &BoundaryGrid,
    tol_inj: f64,
) -> InjectivityReport {
    let images: Vec<Vec<C64>> = grid.nodes().map(|z| h.eval(z)).collect();
    let mut witness = None;
    let mut min_distance = f64::INFINITY;
    for i in 0..images.len() {
        for j in (i + 1)..images.len() {
            let d = images[i]
                .iter()
                .zip(&images[j])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            min_distance = min_distance.min(d);
            if d <= tol_inj && witness.is_none() {
                witness = Some((i, j));
            }
        }
    }
    InjectivityReport {
        injective: witness.is_none(),
        witness,
        min_distance,
    }
}
