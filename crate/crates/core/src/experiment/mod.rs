//! Config-driven experiment runner.
//!
//! Every run writes `report.json` plus one or more CSV tables into the output
//! directory. CSV contents depend only on the config and seed.

pub mod config;
pub mod probes;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::error::Error;
use crate::holomap::{boundary_injectivity_check, transversality_profile, BoundaryGrid};
use crate::kernel::BallPoint;
use crate::operator_r::{
    c_m_oracle, m_kernel_matrix, series_coefficients, spectrum_report, toeplitz_symbol,
};
use crate::pick::{multiplier_norm, PickProblem};
use crate::tol::Tolerances;
use crate::C64;

pub use config::{Experiment, ExperimentConfig};
pub use report::{Assertion, Cell, ExperimentReport, Relation, Table};

#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl ExperimentReport {
    /// 0 when every assertion passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

struct Outcome {
    metrics: Map<String, Value>,
    assertions: Vec<Assertion>,
    tables: Vec<Table>,
}

/// Runs the experiment and writes its outputs into `out_dir`.
///
/// `seed` overrides the seed in the config; the effective seed is echoed in
/// the report.
pub fn run(
    config: &ExperimentConfig,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<ExperimentReport, RunError> {
    config.validate()?;
    let started = Instant::now();
    let mut echo = config.clone();
    echo.seed = seed.unwrap_or(config.seed);
    echo.output_dir = Some(PathBuf::from(out_dir));
    let tol = &echo.tolerances;

    let outcome = match &echo.experiment {
        Experiment::PickNorm(s) => pick_norm(s, tol)?,
        Experiment::HolomapCheck(s) => holomap_check(s, tol)?,
        Experiment::OperatorR(s) => operator_r(s, tol)?,
        Experiment::ExtensionProbe(s) => extension_probe(s, tol)?,
        Experiment::DisjointUnion(s) => disjoint_union(s, echo.seed, tol)?,
    };

    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for t in &outcome.tables {
        t.write(out_dir)?;
        files.push(t.file_name.clone());
    }
    files.push("report.json".to_string());

    let report = ExperimentReport {
        kind: echo.experiment.kind().to_string(),
        passed: outcome.assertions.iter().all(|a| a.passed),
        config: echo,
        metrics: outcome.metrics,
        assertions: outcome.assertions,
        files,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?;
    std::fs::write(out_dir.join("report.json"), text)?;
    Ok(report)
}

fn to_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("metrics are built from object literals"),
    }
}

fn pick_norm(s: &config::PickNormSpec, tol: &Tolerances) -> Result<Outcome, RunError> {
    let values: Vec<C64> = s.values.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    let problem = PickProblem::new(s.nodes.clone(), values, tol)?;
    let r = multiplier_norm(&problem, tol)?;
    let max_abs = problem.max_abs_value();
    let scale = (r.norm * r.norm).max(1.0) * r.gram.trace;

    let mut assertions = vec![
        Assertion::flag("gram_psd", r.gram.passed),
        Assertion::new(
            "pick_matrix_psd_at_norm",
            r.min_eig_at_norm,
            Relation::AtLeast,
            0.0,
            tol.tol_psd * scale,
        ),
        Assertion::new(
            "norm_dominates_values",
            r.norm,
            Relation::AtLeast,
            max_abs,
            0.0,
        ),
    ];
    if let Some(expected) = s.expected_norm {
        assertions.push(Assertion::new(
            "expected_norm",
            r.norm,
            Relation::Near,
            expected,
            s.expected_tol,
        ));
    }

    let mut table = Table::new(
        "pick.csv",
        &[
            "nodes",
            "norm",
            "min_eig_at_norm",
            "whitening_jitter",
            "gram_min_eig",
            "gram_trace",
        ],
    );
    table.push(vec![
        problem.nodes().len().into(),
        r.norm.into(),
        r.min_eig_at_norm.into(),
        r.whitening_jitter.into(),
        r.gram.min_eig.into(),
        r.gram.trace.into(),
    ]);
    Ok(Outcome {
        metrics: to_map(json!({ "pick": r, "max_abs_value": max_abs })),
        assertions,
        tables: vec![table],
    })
}

fn holomap_check(s: &config::HolomapCheckSpec, tol: &Tolerances) -> Result<Outcome, RunError> {
    let h = s.map.holomap()?;
    let grid = BoundaryGrid::new(s.grid_size)?;
    let proper = h.properness(&grid, tol);
    let profile = transversality_profile(&h, &grid);
    let margin = profile.iter().copied().fold(f64::INFINITY, f64::min);
    let inj = boundary_injectivity_check(&h, &grid, tol.tol_inj);

    let mut assertions = vec![
        Assertion::new(
            "interior_inside_ball",
            proper.interior_max_norm_sq,
            Relation::AtMost,
            1.0,
            0.0,
        ),
        Assertion::new(
            "transversality_margin",
            margin,
            Relation::AtLeast,
            tol.tol_transversal,
            0.0,
        ),
        Assertion::new(
            "boundary_injective",
            inj.min_distance,
            Relation::AtLeast,
            tol.tol_inj,
            0.0,
        ),
    ];
    if s.boundary_normalized {
        assertions.push(Assertion::new(
            "boundary_normalized",
            proper.boundary_min_norm_sq,
            Relation::AtLeast,
            1.0,
            tol.tol_proper,
        ));
    }
    if let Some(expected) = s.expected_margin {
        assertions.push(Assertion::new(
            "expected_margin",
            margin,
            Relation::Near,
            expected,
            s.expected_tol,
        ));
    }

    let norms = h.boundary_norms_sq(&grid);
    let mut table = Table::new(
        "boundary.csv",
        &["node", "angle", "abs_h_sq", "transversality"],
    );
    for k in 0..grid.len() {
        table.push(vec![
            k.into(),
            grid.angle(k).into(),
            norms[k].into(),
            profile[k].into(),
        ]);
    }
    Ok(Outcome {
        metrics: to_map(json!({
            "grid_size": grid.len(),
            "properness": proper,
            "transversality_margin": margin,
            "injectivity": inj,
        })),
        assertions,
        tables: vec![table],
    })
}

fn operator_r(s: &config::OperatorRSpec, tol: &Tolerances) -> Result<Outcome, RunError> {
    let h = s.map.holomap()?;
    let grid = BoundaryGrid::new(s.grid_size)?;
    let (r, spec) = spectrum_report(&h, &grid, s.modes, tol)?;

    let monomial = s.map.monomial_map();
    let oracle: Option<Vec<f64>> = match (&monomial, h.monomial_terms()) {
        (Some(map), _) => Some((0..=s.modes).map(|m| c_m_oracle(map, m)).collect()),
        (None, Some(terms)) => {
            let weights: Vec<(usize, f64)> =
                terms.iter().map(|(e, c)| (*e, c.norm_sqr())).collect();
            Some(series_coefficients(&weights, s.modes))
        }
        (None, None) => None,
    };

    let diagonal = r.diagonal();
    let by_mode = spec.eigenvalue_by_mode();
    let diag_err: Option<Vec<f64>> = oracle
        .as_ref()
        .map(|o| diagonal.iter().zip(o).map(|(d, c)| (d - c).abs()).collect());
    let max_diag_err = diag_err
        .as_ref()
        .map(|e| e.iter().copied().fold(0.0, f64::max));
    let max_offdiag = r.max_offdiag();

    let mut assertions = vec![Assertion::new(
        "r_matrix_psd",
        r.psd.min_eig,
        Relation::AtLeast,
        0.0,
        tol.tol_psd * r.psd.trace,
    )];
    if let Some(err) = max_diag_err {
        assertions.push(Assertion::new(
            "max_offdiagonal",
            max_offdiag,
            Relation::AtMost,
            0.0,
            s.oracle_tol,
        ));
        assertions.push(Assertion::new(
            "max_diag_oracle_error",
            err,
            Relation::AtMost,
            0.0,
            s.oracle_tol,
        ));
    }
    if let Some(gaps) = &spec.gap_modes {
        assertions.push(Assertion::new(
            "kernel_dimension",
            spec.kernel.len() as f64,
            Relation::Near,
            gaps.len() as f64,
            0.0,
        ));
        if !spec.kernel.is_empty() {
            let min_mass = spec
                .kernel
                .iter()
                .map(|k| k.gap_mass.unwrap_or(0.0))
                .fold(f64::INFINITY, f64::min);
            assertions.push(Assertion::new(
                "kernel_gap_mass",
                min_mass,
                Relation::AtLeast,
                crate::operator_r::GAP_MASS_THRESHOLD,
                0.0,
            ));
        }
    }

    let mut mk_table = Table::new(
        "mkernel.csv",
        &[
            "grid_size",
            "sup_abs",
            "hs_norm_sq",
            "hs_norm",
            "diag_extrapolation_gap",
        ],
    );
    let full = r.m_kernel;
    let mut half_summary = None;
    let mut hs_change = None;
    if r.boundary_normalized && grid.len() % 2 == 0 && grid.len() >= 10 {
        let half = m_kernel_matrix(&h, &BoundaryGrid::new(grid.len() / 2)?, tol)?.summary();
        let change = (full.hs_norm - half.hs_norm).abs() / half.hs_norm;
        assertions.push(Assertion::new(
            "hs_norm_relative_change",
            change,
            Relation::AtMost,
            0.0,
            s.hs_change_tol,
        ));
        half_summary = Some(half);
        hs_change = Some(change);
    }
    for m in half_summary.iter().chain(std::iter::once(&full)) {
        mk_table.push(vec![
            m.grid_size.into(),
            m.sup_abs.into(),
            m.hs_norm_sq.into(),
            m.hs_norm.into(),
            m.diag_extrapolation_gap.into(),
        ]);
    }

    let mut spectrum = Table::new(
        "spectrum.csv",
        &["mode", "eigenvalue", "oracle_value", "abs_error"],
    );
    let mut diag_table = Table::new(
        "diagonal.csv",
        &["mode", "diagonal", "oracle_value", "abs_error"],
    );
    for m in 0..=s.modes {
        let o = oracle.as_ref().map(|o| o[m]);
        spectrum.push(vec![
            m.into(),
            by_mode[m].into(),
            o.into(),
            o.map(|o| (by_mode[m] - o).abs()).into(),
        ]);
        diag_table.push(vec![
            m.into(),
            diagonal[m].into(),
            o.into(),
            diag_err.as_ref().map(|e| e[m]).into(),
        ]);
    }

    let metrics = json!({
        "grid_size": grid.len(),
        "modes": s.modes,
        "base_point": r.base_point,
        "boundary_normalized": r.boundary_normalized,
        "symbol_limit": monomial.as_ref().map(toeplitz_symbol),
        "min_invertible_eigenvalue": spec.min_invertible_eigenvalue,
        "gap_modes": spec.gap_modes,
        "kernel": spec.kernel,
        "kernel_matches_gaps": spec.kernel_matches_gaps,
        "max_offdiagonal": max_offdiag,
        "max_diag_oracle_error": max_diag_err,
        "hermitian_defect": r.hermitian_defect,
        "r_psd": r.psd,
        "m_kernel": full,
        "m_kernel_half_grid": half_summary,
        "hs_norm_relative_change": hs_change,
    });
    Ok(Outcome {
        metrics: to_map(metrics),
        assertions,
        tables: vec![spectrum, diag_table, mk_table],
    })
}

fn extension_probe(s: &config::ExtensionProbeSpec, tol: &Tolerances) -> Result<Outcome, RunError> {
    let h = s.map.holomap()?;
    let grid = BoundaryGrid::new(s.grid_size)?;
    let cap = s.cap.unwrap_or_else(|| s.target.triangle_cap());
    let probe =
        probes::extension_probe(&h, &s.target, &s.schedule, Some(cap), s.cap_tol, &grid, tol)?;

    let norms = probe.norms();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let grams_psd = probe.steps.iter().all(|st| st.report.gram.passed);
    let assertions = vec![
        Assertion::new(
            "boundary_injective",
            probe.injectivity.min_distance,
            Relation::AtLeast,
            tol.tol_inj,
            0.0,
        ),
        Assertion::new(
            "transversality_margin",
            probe.transversality_margin,
            Relation::AtLeast,
            tol.tol_transversal,
            0.0,
        ),
        Assertion::flag("norms_nondecreasing", probe.monotone()),
        Assertion::new(
            "norms_within_cap",
            max_norm,
            Relation::AtMost,
            cap,
            s.cap_tol,
        ),
        Assertion::flag("grams_psd", grams_psd),
    ];

    let mut table = Table::new(
        "probe.csv",
        &[
            "n",
            "norm",
            "min_eig_at_norm",
            "whitening_jitter",
            "gram_min_eig",
            "nondecreasing",
            "within_cap",
        ],
    );
    for st in &probe.steps {
        table.push(vec![
            st.n.into(),
            st.report.norm.into(),
            st.report.min_eig_at_norm.into(),
            st.report.whitening_jitter.into(),
            st.report.gram.min_eig.into(),
            st.nondecreasing.into(),
            st.within_cap.unwrap_or(false).into(),
        ]);
    }
    Ok(Outcome {
        metrics: to_map(json!({
            "cap": cap,
            "norms": norms,
            "transversality_margin": probe.transversality_margin,
            "injectivity": probe.injectivity,
            "monotone": probe.monotone(),
        })),
        assertions,
        tables: vec![table],
    })
}

fn disjoint_union(
    s: &config::DisjointUnionSpec,
    seed: u64,
    tol: &Tolerances,
) -> Result<Outcome, RunError> {
    check_dims(&s.pieces)?;
    let res = probes::disjoint_union_experiment(
        &s.pieces,
        s.trials,
        s.value_bound,
        s.inequality_tol,
        seed,
        tol,
    )?;

    let mut assertions = vec![Assertion::new(
        "pieces_separated",
        res.min_separation,
        Relation::AtLeast,
        tol.tol_sep,
        0.0,
    )];
    if res.separated {
        assertions.push(Assertion::new(
            "inequality_passes",
            res.passes() as f64,
            Relation::Near,
            s.trials as f64,
            0.0,
        ));
        assertions.push(Assertion::flag(
            "grams_psd",
            res.trials.iter().all(|t| t.grams_psd),
        ));
    }

    let mut seps = Table::new(
        "separators.csv",
        &["piece", "size", "separator_bound", "gram_min_eig"],
    );
    for (i, (p, sep)) in s.pieces.iter().zip(&res.separators).enumerate() {
        seps.push(vec![
            i.into(),
            p.len().into(),
            sep.norm.into(),
            sep.gram.min_eig.into(),
        ]);
    }
    let mut header = vec![
        "trial".to_string(),
        "t_union".into(),
        "combination_bound".into(),
        "slack".into(),
        "holds".into(),
    ];
    header.extend((1..=s.pieces.len()).map(|i| format!("t_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut union = Table::new("union.csv", &header_refs);
    for (i, t) in res.trials.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            i.into(),
            t.t_union.into(),
            t.bound.into(),
            (t.bound - t.t_union).into(),
            t.holds.into(),
        ];
        row.extend(t.piece_norms.iter().map(|&v| Cell::from(v)));
        union.push(row);
    }

    let min_slack = res
        .trials
        .iter()
        .map(|t| t.bound - t.t_union)
        .fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        metrics: to_map(json!({
            "pieces": s.pieces.len(),
            "min_separation": res.min_separation,
            "separated": res.separated,
            "separator_bounds": res.separators.iter().map(|r| r.norm).collect::<Vec<_>>(),
            "trials": res.trials.len(),
            "passes": res.passes(),
            "min_slack": if res.trials.is_empty() { None } else { Some(min_slack) },
        })),
        assertions,
        tables: vec![seps, union],
    })
}

fn check_dims(pieces: &[Vec<BallPoint>]) -> Result<(), ConfigError> {
    let dim = pieces[0][0].dim();
    if pieces.iter().flatten().any(|p| p.dim() != dim) {
        return Err(ConfigError("all nodes must share one dimension".into()));
    }
    Ok(())
}
