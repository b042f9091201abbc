//! Sampled experiments built on the Pick solver: extension norms along the
//! image of a holomap, and the combination bound on disjoint unions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::holomap::{
    boundary_injectivity_check, transversality_margin, BoundaryGrid, Holomap, InjectivityReport,
};
use crate::kernel::BallPoint;
use crate::pick::{multiplier_norm, separator_bound, PickProblem, PickReport};
use crate::tol::Tolerances;
use crate::C64;

use super::config::AmbientPolynomial;

/// `pi (3 - sqrt 5)`.
pub fn golden_angle() -> f64 {
    PI * (3.0 - 5f64.sqrt())
}

/// Disk point `k` of the probe schedule: radius `1 - 2^-(k mod 8 + 2)`,
/// angle `k` golden angles.
pub fn probe_disk_point(k: usize) -> C64 {
    let r = 1.0 - 0.5f64.powi((k % 8 + 2) as i32);
    C64::from_polar(r, k as f64 * golden_angle())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeStep {
    pub n: usize,
    pub report: PickReport,
    /// `t_n >= t_(n-1) - tol_eig` (vacuous for the first step).
    pub nondecreasing: bool,
    pub within_cap: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionProbe {
    pub steps: Vec<ProbeStep>,
    pub injectivity: InjectivityReport,
    pub transversality_margin: f64,
    pub cap: Option<f64>,
}

impl ExtensionProbe {
    pub fn monotone(&self) -> bool {
        self.steps.iter().all(|s| s.nondecreasing)
    }

    pub fn cap_respected(&self) -> Option<bool> {
        self.cap?;
        Some(self.steps.iter().all(|s| s.within_cap == Some(true)))
    }

    pub fn norms(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.report.norm).collect()
    }
}

/// Minimal multiplier norms of `target` restricted to nested samples of the
/// image `h(D)`.
pub fn extension_probe(
    h: &Holomap,
    target: &AmbientPolynomial,
    schedule: &[usize],
    cap: Option<f64>,
    cap_tol: f64,
    grid: &BoundaryGrid,
    tol: &Tolerances,
) -> Result<ExtensionProbe> {
    let injectivity = boundary_injectivity_check(h, grid, tol.tol_inj);
    let margin = transversality_margin(h, grid);

    let largest = schedule.iter().copied().max().unwrap_or(0);
    let nodes: Vec<BallPoint> = (0..largest)
        .map(|k| BallPoint::with_margin(h.eval(probe_disk_point(k)), tol.eps_ball))
        .collect::<Result<_>>()?;
    let values: Vec<C64> = nodes.iter().map(|p| target.eval(p.coords())).collect();

    let mut steps = Vec::with_capacity(schedule.len());
    let mut previous: Option<f64> = None;
    for &n in schedule {
        let problem = PickProblem::new(nodes[..n].to_vec(), values[..n].to_vec(), tol)?;
        let report = multiplier_norm(&problem, tol)?;
        let nondecreasing = previous.is_none_or(|p| report.norm >= p - tol.tol_eig);
        previous = Some(report.norm);
        steps.push(ProbeStep {
            n,
            report,
            nondecreasing,
            within_cap: cap.map(|c| report.norm <= c + cap_tol),
        });
    }
    Ok(ExtensionProbe {
        steps,
        injectivity,
        transversality_margin: margin,
        cap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionTrial {
    pub t_union: f64,
    pub piece_norms: Vec<f64>,
    /// `sum_i t_i s_i`.
    pub bound: f64,
    pub holds: bool,
    pub grams_psd: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointUnion {
    /// Smallest Euclidean distance between nodes of different pieces.
    pub min_separation: f64,
    /// `min_separation > tol_sep`; when false no trials are run.
    pub separated: bool,
    pub separators: Vec<PickReport>,
    pub trials: Vec<UnionTrial>,
}

impl DisjointUnion {
    pub fn passes(&self) -> usize {
        self.trials.iter().filter(|t| t.holds).count()
    }
}

fn min_separation(pieces: &[Vec<BallPoint>]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in pieces.iter().enumerate() {
        for b in &pieces[i + 1..] {
            for x in a {
                for y in b {
                    best = best.min(x.distance(y));
                }
            }
        }
    }
    best
}

fn random_value(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    let r = radius * rng.gen::<f64>().sqrt();
    C64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
}

/// Checks `t_union <= sum_i t_i s_i` for `trials` random value assignments,
/// where `s_i` is the separator bound of piece `i` against all the others.
pub fn disjoint_union_experiment(
    pieces: &[Vec<BallPoint>],
    trials: usize,
    value_bound: f64,
    inequality_tol: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<DisjointUnion> {
    let min_separation = min_separation(pieces);
    if min_separation <= tol.tol_sep {
        return Ok(DisjointUnion {
            min_separation,
            separated: false,
            separators: Vec::new(),
            trials: Vec::new(),
        });
    }

    let separators = (0..pieces.len())
        .map(|i| {
            let others: Vec<BallPoint> = pieces
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, p)| p.iter().cloned())
                .collect();
            separator_bound(&pieces[i], &others, tol)
        })
        .collect::<Result<Vec<_>>>()?;

    let all_nodes: Vec<BallPoint> = pieces.iter().flatten().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let values: Vec<Vec<C64>> = pieces
            .iter()
            .map(|p| {
                p.iter()
                    .map(|_| random_value(&mut rng, value_bound))
                    .collect()
            })
            .collect();
        let mut grams_psd = separators.iter().all(|s| s.gram.passed);
        let mut piece_norms = Vec::with_capacity(pieces.len());
        for (nodes, vals) in pieces.iter().zip(&values) {
            let r = multiplier_norm(&PickProblem::new(nodes.clone(), vals.clone(), tol)?, tol)?;
            grams_psd &= r.gram.passed;
            piece_norms.push(r.norm);
        }
        let union = multiplier_norm(
            &PickProblem::new(all_nodes.clone(), values.concat(), tol)?,
            tol,
        )?;
        grams_psd &= union.gram.passed;
        let bound: f64 = piece_norms
            .iter()
            .zip(&separators)
            .map(|(t, s)| t * s.norm)
            .sum();
        out.push(UnionTrial {
            t_union: union.norm,
            piece_norms,
            bound,
            holds: union.norm <= bound + inequality_tol,
            grams_psd,
        });
    }
    Ok(DisjointUnion {
        min_separation,
        separated: true,
        separators,
        trials: out,
    })
}
