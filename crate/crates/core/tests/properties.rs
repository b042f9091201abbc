use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;

use dapick::holomap::{transversality_margin, BoundaryGrid, Holomap, Polynomial};
use dapick::kernel::{gram, kernel_eval, min_eig_hermitian, whiten, BallPoint};
use dapick::pick::{multiplier_norm, separator_bound, PickProblem};
use dapick::{Tolerances, C64};

fn point2() -> impl Strategy<Value = BallPoint> {
    (0.0..0.65f64, 0.0..2.0 * PI, 0.0..0.65f64, 0.0..2.0 * PI).prop_map(|(r1, t1, r2, t2)| {
        BallPoint::new(vec![C64::from_polar(r1, t1), C64::from_polar(r2, t2)]).unwrap()
    })
}

fn value() -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..2.0 * PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn separated(nodes: &[BallPoint], min: f64) -> bool {
    nodes
        .iter()
        .enumerate()
        .all(|(i, a)| nodes[i + 1..].iter().all(|b| a.distance(b) > min))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_conjugate_symmetric(z in point2(), w in point2()) {
        let a = kernel_eval(&z, &w).unwrap();
        let b = kernel_eval(&w, &z).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-14 * a.norm());
        let d = kernel_eval(&z, &z).unwrap();
        prop_assert!((d.re - 1.0 / (1.0 - z.norm_sq())).abs() <= 1e-14 * d.re);
        prop_assert_eq!(d.im, 0.0);
    }

    #[test]
    fn grams_are_psd_and_whiten(nodes in prop::collection::vec(point2(), 1..8)) {
        let tol = Tolerances::default();
        prop_assume!(separated(&nodes, 1e-6));
        let g = gram(&nodes, &tol).unwrap();
        let check = g.psd(&tol).unwrap();
        prop_assert!(check.passed, "min eig {}", check.min_eig);
        prop_assert_eq!(check.hermitian_defect, 0.0);
        let f = g.whiten(&tol).unwrap();
        prop_assert!(f.reconstruction_error(g.entries()) <= tol.tol_chol * g.trace());
    }

    #[test]
    fn norm_is_homogeneous_and_dominating(
        data in prop::collection::vec((point2(), value()), 1..6),
        scale in value(),
    ) {
        let tol = Tolerances::default();
        let (nodes, values): (Vec<_>, Vec<_>) = data.into_iter().unzip();
        prop_assume!(separated(&nodes, 0.05));
        let base = multiplier_norm(&PickProblem::new(nodes.clone(), values.clone(), &tol).unwrap(), &tol).unwrap();
        let scaled_values: Vec<C64> = values.iter().map(|v| v * scale).collect();
        let scaled = multiplier_norm(&PickProblem::new(nodes, scaled_values, &tol).unwrap(), &tol).unwrap();
        prop_assert!((scaled.norm - scale.norm() * base.norm).abs() <= 1e-10 * base.norm.max(1.0));
        let max_abs = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(base.norm >= max_abs);
        prop_assert!(base.min_eig_at_norm >= -tol.tol_psd * base.norm.powi(2).max(1.0) * base.gram.trace);
    }

    #[test]
    fn norm_grows_with_nested_samples(data in prop::collection::vec((point2(), value()), 2..7)) {
        let tol = Tolerances::default();
        let (nodes, values): (Vec<_>, Vec<_>) = data.into_iter().unzip();
        prop_assume!(separated(&nodes, 0.05));
        let mut previous = 0.0f64;
        for n in 1..=nodes.len() {
            let p = PickProblem::new(nodes[..n].to_vec(), values[..n].to_vec(), &tol).unwrap();
            let t = multiplier_norm(&p, &tol).unwrap().norm;
            prop_assert!(t >= previous - tol.tol_eig * previous.max(1.0), "{t} < {previous}");
            previous = t;
        }
    }

    #[test]
    fn separator_is_unitarily_invariant(
        a in prop::collection::vec(point2(), 1..3),
        b in prop::collection::vec(point2(), 1..3),
        (t, phi, psi) in (0.0..PI, 0.0..2.0 * PI, 0.0..2.0 * PI),
    ) {
        let tol = Tolerances::default();
        let all: Vec<BallPoint> = a.iter().chain(&b).cloned().collect();
        prop_assume!(separated(&all, 0.1));
        let u = DMatrix::from_row_slice(2, 2, &[
            C64::from_polar(t.cos(), phi), -C64::from_polar(t.sin(), psi),
            C64::from_polar(t.sin(), -psi), C64::from_polar(t.cos(), -phi),
        ]);
        let rot = |v: &[BallPoint]| v.iter().map(|p| p.transform(&u).unwrap()).collect::<Vec<_>>();
        let s0 = separator_bound(&a, &b, &tol).unwrap().norm;
        let s1 = separator_bound(&rot(&a), &rot(&b), &tol).unwrap().norm;
        prop_assert!((s0 - s1).abs() <= 1e-8 * s0, "{s0} vs {s1}");
    }

    #[test]
    fn margin_ignores_coefficient_phases(theta in 0.0..2.0 * PI, phi in 0.0..2.0 * PI, alpha in 0.05..0.95f64) {
        let grid = BoundaryGrid::new(128).unwrap();
        let plain = Holomap::monomials(&[(C64::new(alpha.sqrt(), 0.0), 2), (C64::new((1.0 - alpha).sqrt(), 0.0), 3)]).unwrap();
        let rotated = Holomap::monomials(&[
            (C64::from_polar(alpha.sqrt(), theta), 2),
            (C64::from_polar((1.0 - alpha).sqrt(), phi), 3),
        ]).unwrap();
        let m0 = transversality_margin(&plain, &grid);
        let m1 = transversality_margin(&rotated, &grid);
        prop_assert!((m0 - m1).abs() <= 1e-14 * m0.max(1.0));
        prop_assert!((m0 - (2.0 * alpha + 3.0 * (1.0 - alpha))).abs() <= 1e-13);
    }

    #[test]
    fn derivative_matches_central_differences(
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6),
        (r, t) in (0.0..0.99f64, 0.0..2.0 * PI),
    ) {
        let p = Polynomial::new(coeffs.iter().map(|&(a, b)| C64::new(a, b)).collect());
        let h = Holomap::new(vec![p.clone(), p.derivative()]).unwrap();
        let z = C64::from_polar(r, t);
        let step = 1e-5;
        let fd: Vec<C64> = h.eval(z + step).iter().zip(h.eval(z - step)).map(|(a, b)| (a - b) / (2.0 * step)).collect();
        for (d, f) in h.deriv(z).iter().zip(fd) {
            prop_assert!((d - f).norm() <= 1e-8, "{d} vs {f}");
        }
    }
}

#[test]
fn min_eig_of_random_gram_is_nonnegative_scale() {
    let tol = Tolerances::default();
    let nodes: Vec<BallPoint> = (0..12)
        .map(|k| BallPoint::new(vec![C64::from_polar(0.9 * (k as f64 / 12.0), k as f64)]).unwrap())
        .collect();
    let g = gram(&nodes, &tol).unwrap();
    let m = min_eig_hermitian(g.entries(), tol.tol_herm).unwrap();
    assert!(m >= -tol.tol_psd * g.trace());
    assert!(whiten(g.entries(), &tol).is_ok());
}
