//! The operator `R = alpha alpha*` on the Hardy space of the disk,
//!
//! ```text
//! R f(zeta) = \int f(eta) / (1 - <h(zeta), h(eta)>) d omega(eta),
//! ```
//!
//! discretised on a uniform circle grid in the Fourier basis `{eta^m}`.
//!
//! For a boundary-normalized map (`|h| = 1` on the circle) the integrand has a
//! simple pole on the diagonal, so a plain tensor quadrature diverges as the
//! grid is refined. The kernel is therefore split as
//!
//! ```text
//! K(zeta, eta) = L(eta) j(zeta, eta) + M(zeta, eta),
//! L(eta) = 1 / (eta <h'(eta), h(eta)>),  j(zeta, eta) = 1 / (1 - zeta conj(eta)),
//! ```
//!
//! where the first term is a Toeplitz operator with symbol `L` (integrated
//! exactly through the reproducing property of `j`) and `M` is continuous on
//! the torus. Expanding `1/(1 - <h(z), h(eta)>)` around `z = eta` gives the
//! diagonal value `M(eta, eta) = <h''(eta), h(eta)> / (2 <h'(eta), h(eta)>^2)`.
//!
//! Maps that stay strictly inside the ball on the circle have `L = 0` and
//! `M = K`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holomap::{transversality_margin, BoundaryGrid, Holomap};
use crate::kernel::{self, inner, PsdCheck};
use crate::tol::Tolerances;
use crate::C64;

/// The Szego kernel of the disk for harmonic measure at 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct SzegoDiskKernel;

impl SzegoDiskKernel {
    pub fn eval(&self, zeta: C64, eta: C64) -> C64 {
        1.0 / (1.0 - zeta * eta.conj())
    }
}

/// `(a z^p, b z^q)` with `|a|^2 = alpha`, `|b|^2 = beta`, `alpha + beta = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialMap {
    pub p: usize,
    pub q: usize,
    pub alpha: f64,
    pub beta: f64,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl MonomialMap {
    pub fn new(p: usize, q: usize, alpha: f64, beta: f64) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::InvalidMonomialMap(format!(
                "need 0 < p < q, got p={p} q={q}"
            )));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidMonomialMap(format!(
                "exponents {p} and {q} are not coprime"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidMonomialMap(format!(
                "weights must lie in (0,1), got {alpha} and {beta}"
            )));
        }
        if (alpha + beta - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMonomialMap(format!(
                "weights must sum to 1, got {}",
                alpha + beta
            )));
        }
        Ok(Self { p, q, alpha, beta })
    }

    pub fn with_alpha(p: usize, q: usize, alpha: f64) -> Result<Self> {
        Self::new(p, q, alpha, 1.0 - alpha)
    }

    /// `(sqrt(alpha) z^p, sqrt(beta) z^q)`.
    pub fn holomap(&self) -> Holomap {
        Holomap::monomials(&[
            (C64::new(self.alpha.sqrt(), 0.0), self.p),
            (C64::new(self.beta.sqrt(), 0.0), self.q),
        ])
        .expect("two components")
    }

    /// Recognises a two-component monomial holomap of this family.
    pub fn from_holomap(h: &Holomap) -> Option<Self> {
        let terms = h.monomial_terms()?;
        let [(p, a), (q, b)] = terms.as_slice() else {
            return None;
        };
        let (alpha, beta) = (a.norm_sqr(), b.norm_sqr());
        if p < q {
            Self::new(*p, *q, alpha, beta).ok()
        } else {
            Self::new(*q, *p, beta, alpha).ok()
        }
    }
}

/// Eigenvalue of `R` on mode `m` for a monomial map: the sum over
/// `p g1 + q g2 = m` of `(g1+g2)!/(g1! g2!) alpha^g1 beta^g2`.
pub fn c_m_oracle(map: &MonomialMap, m: usize) -> f64 {
    let mut total = 0.0;
    for g1 in 0..=m / map.p {
        let rest = m - map.p * g1;
        if !rest.is_multiple_of(map.q) {
            continue;
        }
        let g2 = rest / map.q;
        // binom(g1+g2, g1) beta^g2 alpha^g1, built up one factor at a time
        let mut term = map.beta.powi(g2 as i32);
        for i in 1..=g1 {
            term *= map.alpha * (g2 + i) as f64 / i as f64;
        }
        total += term;
    }
    total
}

/// Coefficients `c_0..=c_upto` of `1 / (1 - sum_i w_i u^{e_i})`, from the
/// recurrence `c_m = sum_i w_i c_{m - e_i}`. Zero exponents are ignored.
pub fn series_coefficients(terms: &[(usize, f64)], upto: usize) -> Vec<f64> {
    let mut c = vec![0.0; upto + 1];
    c[0] = 1.0;
    for m in 1..=upto {
        c[m] = terms
            .iter()
            .filter(|(e, _)| *e > 0 && *e <= m)
            .map(|(e, w)| w * c[m - e])
            .sum();
    }
    c
}

/// `1 / (p alpha + q beta)`: the constant symbol of the Toeplitz part.
pub fn toeplitz_symbol(map: &MonomialMap) -> f64 {
    1.0 / (map.p as f64 * map.alpha + map.q as f64 * map.beta)
}

/// Integers in `0..=upto` not representable as non-negative combinations of
/// the generators.
pub fn semigroup_gaps(generators: &[usize], upto: usize) -> Vec<usize> {
    let mut reachable = vec![false; upto + 1];
    reachable[0] = true;
    for m in 1..=upto {
        reachable[m] = generators
            .iter()
            .any(|&g| g > 0 && g <= m && reachable[m - g]);
    }
    (0..=upto).filter(|&m| !reachable[m]).collect()
}

/// Per-node quantities shared by the `R` and `M` assemblies.
struct BoundaryData {
    images: Vec<Vec<C64>>,
    /// `L(eta_k)`; zero for maps strictly inside the ball.
    symbol: Vec<C64>,
    /// Analytic value of `M(eta_k, eta_k)`.
    diag: Vec<C64>,
    normalized: bool,
}

fn boundary_data(h: &Holomap, grid: &BoundaryGrid, tol: &Tolerances) -> Result<BoundaryData> {
    let margin = transversality_margin(h, grid);
    if !(margin > tol.tol_transversal) {
        return Err(Error::NotTransversal {
            margin,
            tolerance: tol.tol_transversal,
        });
    }
    let norms = h.boundary_norms_sq(grid);
    let on_sphere = |x: f64| (x - 1.0).abs() <= tol.tol_proper;
    let normalized = on_sphere(norms[0]);
    for (k, &x) in norms.iter().enumerate() {
        if x > 1.0 + tol.tol_proper {
            return Err(Error::OutsideBall {
                norm_sq: x,
                eps_ball: tol.tol_proper,
            });
        }
        if on_sphere(x) != normalized {
            return Err(Error::MixedBoundary {
                node: k,
                norm_sq: x,
            });
        }
    }

    let images: Vec<Vec<C64>> = grid.nodes().map(|z| h.eval(z)).collect();
    let (symbol, diag) = if normalized {
        grid.nodes()
            .zip(&images)
            .map(|(z, hz)| {
                let p1 = inner(&h.deriv(z), hz);
                let p2 = inner(&h.second_deriv(z), hz) * 0.5;
                (1.0 / (z * p1), p2 / (p1 * p1))
            })
            .unzip()
    } else {
        let symbol = vec![C64::new(0.0, 0.0); grid.len()];
        let diag = images
            .iter()
            .map(|hz| C64::new(1.0 / (1.0 - inner(hz, hz).re), 0.0))
            .collect();
        (symbol, diag)
    };
    Ok(BoundaryData {
        images,
        symbol,
        diag,
        normalized,
    })
}

/// Off-diagonal and, for interior maps, diagonal entries of `M`, with the
/// analytic diagonal fill for boundary-normalized maps.
fn assemble_m(grid: &BoundaryGrid, data: &BoundaryData, tol: &Tolerances) -> Result<DMatrix<C64>> {
    let n = grid.len();
    let szego = SzegoDiskKernel;
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let zeta = grid.node(k);
            (0..n)
                .map(|j| {
                    if k == j && data.normalized {
                        return Ok(data.diag[j]);
                    }
                    let ip = inner(&data.images[k], &data.images[j]);
                    // On the sphere |<h, h'>| = 1 is harmless; only <h, h'> -> 1 is a pole.
                    let blows_up = if data.normalized {
                        (1.0 - ip).norm() < tol.eps_ball
                    } else {
                        ip.norm() >= 1.0 - tol.eps_ball
                    };
                    if blows_up {
                        return Err(Error::IntegrandBlowUp {
                            k,
                            j,
                            modulus: ip.norm(),
                        });
                    }
                    let kernel = 1.0 / (1.0 - ip);
                    if data.normalized {
                        Ok(kernel - data.symbol[j] * szego.eval(zeta, grid.node(j)))
                    } else {
                        Ok(kernel)
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |k, j| rows[k][j]))
}

/// Discretised `M` kernel with its size diagnostics.
#[derive(Clone, Debug)]
pub struct MKernel {
    pub values: DMatrix<C64>,
    pub grid: BoundaryGrid,
    pub boundary_normalized: bool,
    pub sup_abs: f64,
    /// `sum_k sum_j w_k w_j |M(zeta_k, zeta_j)|^2`.
    pub hs_norm_sq: f64,
    /// Largest gap between the analytic diagonal and a Richardson
    /// extrapolation from the neighbouring grid nodes.
    pub diag_extrapolation_gap: f64,
}

impl MKernel {
    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq.sqrt()
    }

    pub fn summary(&self) -> MKernelSummary {
        MKernelSummary {
            grid_size: self.grid.len(),
            boundary_normalized: self.boundary_normalized,
            sup_abs: self.sup_abs,
            hs_norm_sq: self.hs_norm_sq,
            hs_norm: self.hs_norm(),
            diag_extrapolation_gap: self.diag_extrapolation_gap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MKernelSummary {
    pub grid_size: usize,
    pub boundary_normalized: bool,
    pub sup_abs: f64,
    pub hs_norm_sq: f64,
    pub hs_norm: f64,
    pub diag_extrapolation_gap: f64,
}

fn diag_extrapolation_gap(values: &DMatrix<C64>) -> f64 {
    let n = values.nrows();
    if n < 5 {
        return 0.0;
    }
    (0..n)
        .map(|k| {
            let at =
                |off: usize| (values[((k + off) % n, k)] + values[((k + n - off) % n, k)]) * 0.5;
            let estimate = (at(1) * 4.0 - at(2)) / 3.0;
            (estimate - values[(k, k)]).norm()
        })
        .fold(0.0, f64::max)
}

fn m_kernel_from(grid: &BoundaryGrid, data: &BoundaryData, tol: &Tolerances) -> Result<MKernel> {
    let values = assemble_m(grid, data, tol)?;
    let w = grid.weight();
    let sup_abs = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let hs_norm_sq = values.iter().map(|z| z.norm_sqr()).sum::<f64>() * w * w;
    let diag_extrapolation_gap = diag_extrapolation_gap(&values);
    Ok(MKernel {
        values,
        grid: *grid,
        boundary_normalized: data.normalized,
        sup_abs,
        hs_norm_sq,
        diag_extrapolation_gap,
    })
}

/// The continuous remainder kernel `M(zeta, eta)` at all node pairs.
pub fn m_kernel_matrix(h: &Holomap, grid: &BoundaryGrid, tol: &Tolerances) -> Result<MKernel> {
    let data = boundary_data(h, grid, tol)?;
    m_kernel_from(grid, &data, tol)
}

/// Matrix of `R` in the basis `{eta^m : 0 <= m <= modes}`.
#[derive(Clone, Debug)]
pub struct RMatrix {
    /// Hermitian part of the assembled matrix.
    pub entries: DMatrix<C64>,
    /// Toeplitz part `<R_1 eta^m, zeta^m'>`.
    pub toeplitz: DMatrix<C64>,
    /// Hilbert-Schmidt part `<R_2 eta^m, zeta^m'>`.
    pub remainder: DMatrix<C64>,
    pub grid: BoundaryGrid,
    pub modes: usize,
    pub boundary_normalized: bool,
    /// Base point of the harmonic measure; always the origin.
    pub base_point: f64,
    /// `max |R - R*|` before symmetrisation.
    pub hermitian_defect: f64,
    pub psd: PsdCheck,
    pub m_kernel: MKernelSummary,
}

impl RMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn max_offdiag(&self) -> f64 {
        let n = self.entries.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Quadrature of `<R eta^m, zeta^m'>` for `0 <= m, m' <= modes`.
pub fn r_matrix(
    h: &Holomap,
    grid: &BoundaryGrid,
    modes: usize,
    tol: &Tolerances,
) -> Result<RMatrix> {
    if modes == 0 {
        return Err(Error::InvalidArgument("mode count must be positive".into()));
    }
    let required = 4 * (modes + h.max_degree());
    if grid.len() < required {
        return Err(Error::GridTooCoarse {
            n: grid.len(),
            required,
        });
    }
    let data = boundary_data(h, grid, tol)?;
    let m_kernel = m_kernel_from(grid, &data, tol)?;
    let n = grid.len();
    let w = grid.weight();
    let size = modes + 1;

    // Toeplitz part: sum_j w L(eta_j) eta_j^(m - m').
    let toeplitz = DMatrix::from_fn(size, size, |mp, m| {
        let shift = (m + n - mp % n) % n;
        let mut acc = kernel::CompensatedSum::default();
        for j in 0..n {
            acc.add(data.symbol[j] * grid.node_pow(j, shift));
        }
        acc.value() * w
    });

    // Remainder: w^2 F* M F with F[j][m] = eta_j^m.
    let basis = DMatrix::from_fn(n, size, |j, m| grid.node_pow(j, m));
    let remainder = (basis.adjoint() * (&m_kernel.values * &basis)).map(|z| z * (w * w));

    let raw = &toeplitz + &remainder;
    let hermitian_defect = kernel::hermitian_defect(&raw);
    let entries = kernel::hermitian_part(&raw);
    let psd = kernel::psd_check(&entries, tol)?;
    Ok(RMatrix {
        entries,
        toeplitz,
        remainder,
        grid: *grid,
        modes,
        boundary_normalized: data.normalized,
        base_point: 0.0,
        hermitian_defect,
        psd,
        m_kernel: m_kernel.summary(),
    })
}

/// A near-zero eigenvalue of `R` and where its eigenvector lives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDirection {
    pub eigenvalue: f64,
    pub dominant_mode: usize,
    pub dominant_mass: f64,
    /// Eigenvector mass on the gap modes, when those are known.
    pub gap_mass: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Mode matched to each eigenvalue (greedy by eigenvector mass).
    pub eigen_modes: Vec<usize>,
    pub kernel: Vec<KernelDirection>,
    /// Modes not representable from the component exponents (monomial maps).
    pub gap_modes: Option<Vec<usize>>,
    /// Smallest eigenvalue above `tol_kernel`.
    pub min_invertible_eigenvalue: Option<f64>,
    /// Kernel dimension equals the number of gap modes and every kernel
    /// eigenvector carries at least 99% of its mass on them.
    pub kernel_matches_gaps: Option<bool>,
}

impl SpectrumReport {
    /// Eigenvalue matched to each mode, indexed by mode.
    pub fn eigenvalue_by_mode(&self) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.eigenvalues.len()];
        for (value, &mode) in self.eigenvalues.iter().zip(&self.eigen_modes) {
            out[mode] = *value;
        }
        out
    }
}

/// Required eigenvector mass on the gap modes for a kernel direction.
pub const GAP_MASS_THRESHOLD: f64 = 0.99;

/// Gap modes of a monomial map, `None` when some component is not a monomial.
pub fn gap_modes_of(h: &Holomap, modes: usize) -> Option<Vec<usize>> {
    let exponents: Vec<usize> = h.monomial_terms()?.into_iter().map(|(e, _)| e).collect();
    Some(semigroup_gaps(&exponents, modes))
}

pub fn analyze_spectrum(
    r: &RMatrix,
    gap_modes: Option<Vec<usize>>,
    tol: &Tolerances,
) -> Result<SpectrumReport> {
    let (eigenvalues, vectors) = kernel::hermitian_eigen(&r.entries, tol.tol_herm)?;
    let size = eigenvalues.len();

    let mut pairs: Vec<(usize, usize, f64)> = (0..size)
        .flat_map(|i| (0..size).map(move |m| (i, m)))
        .map(|(i, m)| (i, m, vectors[(m, i)].norm_sqr()))
        .collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut eigen_modes = vec![usize::MAX; size];
    let mut taken = vec![false; size];
    for (i, m, _) in pairs {
        if eigen_modes[i] == usize::MAX && !taken[m] {
            eigen_modes[i] = m;
            taken[m] = true;
        }
    }

    let kernel: Vec<KernelDirection> = (0..size)
        .filter(|&i| eigenvalues[i] < tol.tol_kernel)
        .map(|i| {
            let (dominant_mode, dominant_mass) = (0..size)
                .map(|m| (m, vectors[(m, i)].norm_sqr()))
                .fold(
                    (0, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            let gap_mass = gap_modes
                .as_ref()
                .map(|g| g.iter().map(|&m| vectors[(m, i)].norm_sqr()).sum());
            KernelDirection {
                eigenvalue: eigenvalues[i],
                dominant_mode,
                dominant_mass,
                gap_mass,
            }
        })
        .collect();

    let min_invertible_eigenvalue = eigenvalues.iter().copied().find(|&v| v >= tol.tol_kernel);
    let kernel_matches_gaps = gap_modes.as_ref().map(|g| {
        kernel.len() == g.len()
            && kernel
                .iter()
                .all(|k| k.gap_mass.unwrap_or(0.0) >= GAP_MASS_THRESHOLD)
    });
    Ok(SpectrumReport {
        eigenvalues,
        eigen_modes,
        kernel,
        gap_modes,
        min_invertible_eigenvalue,
        kernel_matches_gaps,
    })
}

/// Assembles `R` and analyses its spectrum against the semigroup gaps.
pub fn spectrum_report(
    h: &Holomap,
    grid: &BoundaryGrid,
    modes: usize,
    tol: &Tolerances,
) -> Result<(RMatrix, SpectrumReport)> {
    let r = r_matrix(h, grid, modes, tol)?;
    let report = analyze_spectrum(&r, gap_modes_of(h, modes), tol)?;
    Ok((r, report))
}
