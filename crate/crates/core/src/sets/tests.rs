use super::*;
use crate::linalg::partial_transpose;
use crate::state::{bell_state, bell_vectors, qubit_pair, random_mixed, random_product_pure};

fn neg_bell() -> HermitianMatrix {
    bell_state().matrix().scaled(-1.0)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Max over a Bloch-angle grid of `|⟨Φ+|a⊗b⟩|²`.
fn brute_force_product_overlap() -> f64 {
    let steps = 60;
    let phi = bell_vectors()[0];
    let mut best = 0.0f64;
    let ang = |k: usize, max: f64| max * k as f64 / steps as f64;
    for t1 in 0..=steps {
        for p1 in 0..steps {
            for t2 in 0..=steps {
                for p2 in 0..steps {
                    let (th1, ph1) = (ang(t1, std::f64::consts::PI), ang(p1, 2.0 * std::f64::consts::PI));
                    let (th2, ph2) = (ang(t2, std::f64::consts::PI), ang(p2, 2.0 * std::f64::consts::PI));
                    let a = [c((th1 / 2.0).cos(), 0.0), Complex64::from_polar((th1 / 2.0).sin(), ph1)];
                    let b = [c((th2 / 2.0).cos(), 0.0), Complex64::from_polar((th2 / 2.0).sin(), ph2)];
                    let v = crate::linalg::kron_vec(&a, &b);
                    let amp: Complex64 = phi.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    best = best.max(amp.norm_sqr());
                }
            }
        }
    }
    best
}

/// Isotropic two-qubit state with singlet fraction `f`.
fn isotropic(f: f64) -> HermitianMatrix {
    let bell = bell_state().matrix().clone();
    let rest = &HermitianMatrix::identity(4) - &bell;
    bell.lincomb(f, &rest, (1.0 - f) / 3.0)
}

#[test]
fn ppt_member_examples() {
    let d = qubit_pair();
    assert!(ppt_member(&maximally_mixed(d), d, MEMBERSHIP_TOL).unwrap());
    assert!(!ppt_member(&bell_state(), d, MEMBERSHIP_TOL).unwrap());
    for seed in 0..10 {
        assert!(ppt_member(&random_product_pure(d, seed), d, MEMBERSHIP_TOL).unwrap());
    }
    let p = crate::state::bell_diagonal([0.75, 0.25, 0.0, 0.0]).unwrap();
    assert!(!ppt_member(&p, d, MEMBERSHIP_TOL).unwrap());
}

#[test]
fn sep_linmin_examples() {
    let d = qubit_pair();
    let opts = SepOracleOptions::default();
    let id = sep_linmin(&HermitianMatrix::identity(4), d, &opts).unwrap();
    assert!((id.value - 1.0).abs() < 1e-12);
    assert_eq!(id.global_confidence, Confidence::Heuristic);

    let r = sep_linmin(bell_state().matrix(), d, &opts).unwrap();
    assert!(r.value.abs() < 1e-12);
    assert!(r.atom.matrix().trace_product(bell_state().matrix()).abs() < 1e-12);

    let overlap = brute_force_product_overlap();
    assert!((overlap - 0.5).abs() < 1e-12, "grid oracle {overlap}");
    let r = sep_linmin(&neg_bell(), d, &opts).unwrap();
    assert!((r.value + overlap).abs() < 1e-10, "{}", r.value);
    assert!(ppt_member(&r.atom, d, 1e-8).unwrap());
}

#[test]
fn sep_linmin_is_deterministic_per_seed() {
    let d = BipartiteDims::new(2, 3).unwrap();
    let g = random_mixed(d, 6, 3).unwrap().matrix().scaled(-1.0);
    let opts = SepOracleOptions { seed: 11, ..Default::default() };
    let a = sep_linmin(&g, d, &opts).unwrap();
    let b = sep_linmin(&g, d, &opts).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a.atom, b.atom);
    let par = SepOracleOptions { execution: crate::exec::Execution::Parallel { max_threads: Some(2) }, ..opts };
    let c = sep_linmin(&g, d, &par).unwrap();
    assert_eq!(a.atom, c.atom);
}

#[test]
fn sep_linmin_dimension_mismatch() {
    assert!(matches!(
        sep_linmin(&HermitianMatrix::identity(3), qubit_pair(), &SepOracleOptions::default()),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn dykstra_fixes_members() {
    let d = qubit_pair();
    let tau = maximally_mixed(d);
    let p = dykstra_project_ppt(tau.matrix(), d, 1e-10, 100_000).unwrap();
    assert!(p.matrix().max_abs_diff(tau.matrix()) < 1e-12);
    let s = random_product_pure(d, 4).mix(&tau, 0.3).unwrap();
    let p = dykstra_project_ppt(s.matrix(), d, 1e-10, 100_000).unwrap();
    assert!(p.matrix().max_abs_diff(s.matrix()) < 1e-9);
}

#[test]
fn dykstra_projects_bell_onto_isotropic_boundary() {
    let d = qubit_pair();
    let bell = bell_state();
    // Grid over the isotropic line for the Frobenius-nearest PPT point.
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=10_000 {
        let f = k as f64 / 10_000.0;
        let w = isotropic(f);
        if partial_transpose(&w, d).unwrap().min_eigenvalue() < -1e-12 {
            continue;
        }
        let dist = (&w - bell.matrix()).matrix().frobenius_norm();
        if dist < best.0 {
            best = (dist, f);
        }
    }
    assert!((best.1 - 0.5).abs() < 1e-12);
    let p = dykstra_project_ppt(bell.matrix(), d, 1e-12, 100_000).unwrap();
    assert!(ppt_member(&p, d, MEMBERSHIP_TOL).unwrap());
    assert!((p.matrix().trace() - 1.0).abs() < 1e-10);
    assert!(p.matrix().max_abs_diff(&isotropic(0.5)) < 1e-6);
    assert!((&p.matrix().clone() - bell.matrix()).matrix().frobenius_norm() > 0.1);
}

#[test]
fn ppt_linmin_examples() {
    let d = qubit_pair();
    for method in [PptMethod::Barrier, PptMethod::ProjectedGradient] {
        let opts = PptOracleOptions { method, ..Default::default() };
        let r = ppt_linmin(&HermitianMatrix::identity(4), d, &opts).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.global_confidence, Confidence::Certified);

        // The largest singlet fraction of a PPT two-qubit state is 1/2: along
        // the isotropic line PPT holds iff f ≤ 1/2, and random PPT states
        // never exceed it.
        let mut best = 0.0f64;
        for k in 0..=1000 {
            let f = k as f64 / 1000.0;
            if partial_transpose(&isotropic(f), d).unwrap().min_eigenvalue() >= -1e-12 {
                best = best.max(f);
            }
        }
        for seed in 0..200 {
            let s = random_mixed(d, 4, seed).unwrap();
            if ppt_member(&s, d, 0.0).unwrap() {
                assert!(s.matrix().trace_product(bell_state().matrix()) <= 0.5 + 1e-12);
            }
        }
        assert!((best - 0.5).abs() < 1e-12);
        let r = ppt_linmin(&neg_bell(), d, &opts).unwrap();
        assert!((r.value + best).abs() < 1e-6, "{method:?}: {}", r.value);
        assert!(ppt_member(&r.atom, d, MEMBERSHIP_TOL).unwrap());
    }
}

#[test]
fn barrier_dual_bound_brackets_value() {
    let d = BipartiteDims::new(2, 3).unwrap();
    for seed in 0..5 {
        let g = &random_mixed(d, 3, seed).unwrap().matrix().scaled(-2.0) + &random_mixed(d, 2, seed + 50).unwrap().matrix().clone();
        let r = ppt_linmin(&g, d, &PptOracleOptions::default()).unwrap();
        assert!(r.value_slack >= 0.0 && r.value_slack < 1e-8, "slack {}", r.value_slack);
        let s = sep_linmin(&g, d, &SepOracleOptions::default()).unwrap();
        // 2⊗3: PPT = SEP
        assert!((r.value - s.value).abs() < 1e-7, "{} vs {}", r.value, s.value);
    }
}

#[test]
fn ppt_linmin_never_above_sep() {
    let d = qubit_pair();
    for seed in 0..10 {
        let g = &random_mixed(d, 2, seed).unwrap().matrix().scaled(-1.0) + &random_mixed(d, 3, seed + 7).unwrap().matrix().scaled(0.5);
        let p = ppt_linmin(&g, d, &PptOracleOptions::default()).unwrap();
        let s = sep_linmin(&g, d, &SepOracleOptions::default()).unwrap();
        assert!(p.value - p.value_slack <= s.value + 1e-9);
        assert!(ppt_member(&s.atom, d, 1e-8).unwrap());
    }
}

#[test]
fn shift_examples() {
    let d = qubit_pair();
    let rho = random_mixed(d, 1, 9).unwrap();
    assert_eq!(shift(&rho, 1.0).unwrap(), rho);
    let tiny = shift(&rho, 1e-9).unwrap();
    assert!(tiny.matrix().max_abs_diff(maximally_mixed(d).matrix()) < 1e-9);
    assert!(matches!(shift(&rho, 0.0), Err(Error::OutOfDomain { .. })));
    assert!(shift(&rho, 1.5).is_err());
    for seed in 0..20 {
        let r = random_mixed(d, 1 + (seed as usize % 4), seed).unwrap();
        for x in [0.5, 0.9, 0.999] {
            let s = shift(&r, x).unwrap();
            assert!(s.matrix().min_eigenvalue() >= (1.0 - x) / 4.0 - 1e-14);
            let l = s.matrix().log().unwrap();
            assert!(l.operator_norm() <= 4f64.ln() - (1.0 - x).ln() + 1e-12);
        }
    }
}

#[test]
fn spec_rejects_bad_weight() {
    assert!(ConvexSetSpec::new(SetKind::Sep, qubit_pair(), 0.0).is_err());
    assert!(ConvexSetSpec::new(SetKind::Ppt, qubit_pair(), 1.0).is_ok());
    assert_eq!("PPT".parse::<SetKind>().unwrap(), SetKind::Ppt);
}
