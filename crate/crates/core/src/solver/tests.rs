use super::interior::{log_second_divided_difference, relent_hessian};
use super::*;
use crate::entropy::relative_entropy;
use crate::linalg::trace_norm;
use crate::sets::{basis::Basis, shift};
use crate::state::{bell_diagonal, bell_state, qubit_pair, random_mixed, random_product_pure, BipartiteDims};

const LN2: f64 = std::f64::consts::LN_2;

fn relent(sigma: &DensityMatrix, rho: &HermitianMatrix) -> f64 {
    let rho = DensityMatrix::from_trusted(rho.clone(), sigma.dims());
    relative_entropy(sigma, &rho).unwrap().nats()
}

/// Hermitian directions spanning all 4×4 Hermitian matrices.
fn directions(dims: BipartiteDims) -> Vec<HermitianMatrix> {
    let n = dims.total();
    let basis = Basis::new(dims);
    let mut dirs: Vec<HermitianMatrix> = (0..basis.len()).map(|k| HermitianMatrix::symmetrized(basis.dense(n, k))).collect();
    dirs.push(HermitianMatrix::identity(n).scaled(1.0 / (n as f64).sqrt()));
    dirs
}

/// Spectrum bounded below by 0.05, so `h = 1e-5` differences stay accurate.
fn full_rank(seed: u64) -> DensityMatrix {
    shift(&random_mixed(qubit_pair(), 4, seed).unwrap(), 0.8).unwrap()
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let sigma = random_mixed(qubit_pair(), 1 + (seed as usize % 4), 1000 + seed).unwrap();
        let rho = full_rank(seed);
        let g = relent_gradient(&sigma, &rho).unwrap();
        let (mut err, mut norm) = (0.0, 0.0);
        for d in directions(qubit_pair()) {
            let plus = relent(&sigma, &rho.matrix().lincomb(1.0, &d, h));
            let minus = relent(&sigma, &rho.matrix().lincomb(1.0, &d, -h));
            let fd = (plus - minus) / (2.0 * h);
            let exact = g.trace_product(&d);
            err += (fd - exact).powi(2);
            norm += exact * exact;
        }
        worst = worst.max((err / norm).sqrt());
    }
    assert!(worst <= 1e-6, "relative error {worst:e}");
}

#[test]
fn gradient_closed_forms() {
    let rho = full_rank(3);
    let g = relent_gradient(&rho, &rho).unwrap();
    assert!(g.max_abs_diff(&HermitianMatrix::identity(4).scaled(-1.0)) < 1e-10);

    let s = [0.1, 0.2, 0.3, 0.4];
    let r = [0.4, 0.3, 0.2, 0.1];
    let sigma = DensityMatrix::from_trusted(HermitianMatrix::from_real_diagonal(&s), qubit_pair());
    let rho = DensityMatrix::from_trusted(HermitianMatrix::from_real_diagonal(&r), qubit_pair());
    let g = relent_gradient(&sigma, &rho).unwrap();
    let expected: Vec<f64> = s.iter().zip(&r).map(|(a, b)| -a / b).collect();
    assert!(g.max_abs_diff(&HermitianMatrix::from_real_diagonal(&expected)) < 1e-14);

    let singular = bell_state();
    assert!(matches!(relent_gradient(&sigma, &singular), Err(Error::NonPositiveSpectrum(_))));
}

#[test]
fn second_divided_difference_matches_limits() {
    let fd = |a: f64, b: f64, c: f64| {
        let h = 1e-4 * a;
        (log_divided_difference(a + h, c) - log_divided_difference(a - h, c)) / (2.0 * h) + 0.0 * b
    };
    // φ₂(a, a, c) = ∂_a φ(a, c)
    for (a, c) in [(0.3, 0.7), (1e-3, 0.5), (0.25, 0.2500001)] {
        let exact = log_second_divided_difference(a, a, c);
        assert!((exact - fd(a, a, c)).abs() <= 1e-6 * exact.abs(), "{a} {c}");
    }
    let a = 0.37;
    assert!((log_second_divided_difference(a, a, a) + 0.5 / (a * a)).abs() < 1e-12);
    let (x, y, z) = (0.1, 0.4, 0.9);
    let v = log_second_divided_difference(x, y, z);
    for (p, q, r) in [(y, x, z), (z, y, x), (x, z, y)] {
        assert!((log_second_divided_difference(p, q, r) - v).abs() < 1e-14);
    }
}

#[test]
fn hessian_matches_gradient_differences() {
    let dims = qubit_pair();
    let n = dims.total();
    let basis = Basis::new(dims);
    let dense: Vec<_> = (0..basis.len()).map(|k| basis.dense(n, k)).collect();
    let dirs = directions(dims);
    let h = 1e-6;
    for seed in 0..10 {
        let sigma = random_mixed(dims, 2, 40 + seed).unwrap();
        let rho = full_rank(seed);
        let hess = relent_hessian(sigma.matrix(), &rho.matrix().eig(), &dense);
        let k = basis.len();
        for q in 0..k {
            let dir = &dirs[q];
            let gp = gradient_from_eig(&sigma, &rho.matrix().lincomb(1.0, dir, h).eig());
            let gm = gradient_from_eig(&sigma, &rho.matrix().lincomb(1.0, dir, -h).eig());
            for m in 0..k {
                let fd = (gp.trace_product(&dirs[m]) - gm.trace_product(&dirs[m])) / (2.0 * h);
                let exact = hess[m * k + q];
                assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "seed {seed} ({m},{q}): {fd} vs {exact}");
            }
        }
    }
}

#[test]
fn line_search_examples() {
    let sigma = full_rank(1);
    let rho = full_rank(2);
    assert_eq!(line_search(&sigma, &rho, &rho, 1e-12).unwrap(), 0.0);
    let g = line_search(&sigma, &rho, &sigma, 1e-12).unwrap();
    assert!((g - 1.0).abs() < 1e-12);

    let omega = full_rank(5);
    let g = line_search(&sigma, &rho, &omega, 1e-12).unwrap();
    let at = |t: f64| relent(&sigma, &rho.matrix().lincomb(1.0 - t, omega.matrix(), t));
    let v = at(g);
    assert!(g > 0.0 && g < 1.0, "{g}");
    assert!(v <= at((g - 1e-3).max(0.0)) && v <= at((g + 1e-3).min(1.0)));
}

#[test]
fn maximally_mixed_has_zero_ree() {
    let tau = maximally_mixed(qubit_pair());
    for kind in [SetKind::Sep, SetKind::Ppt] {
        let cv = solve(&tau, kind, &SolverOptions::default()).unwrap();
        assert!(cv.converged);
        assert!(cv.contains(0.0, 0.0), "{cv:?}");
        assert!(cv.width() <= 3e-6);
        assert!(cv.minimizer.matrix().max_abs_diff(tau.matrix()) < 1e-6);
    }
}

#[test]
fn separable_states_have_vanishing_ree() {
    let d = qubit_pair();
    let x = SolverOptions::default().x;
    for seed in 0..5 {
        let sigma = random_product_pure(d, seed).mix(&maximally_mixed(d), 0.2).unwrap();
        let spec = ConvexSetSpec::new(SetKind::Sep, d, x).unwrap();
        let cv = ree_shifted(&sigma, &spec, &SolverOptions::default()).unwrap();
        assert!(cv.upper <= -x.ln() + 1e-6, "{}", cv.upper);
        let e = ree(&sigma, &spec, &SolverOptions::default()).unwrap();
        assert!(e.contains(0.0, 0.0));
    }
}

#[test]
fn bell_state_ree_is_ln2() {
    let bell = bell_state();
    let x = SolverOptions::default().x;
    // ½(|00⟩⟨00| + |11⟩⟨11|) is a separable candidate worth exactly ln 2.
    let candidate = HermitianMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
    let shifted = candidate.lincomb(x, &HermitianMatrix::identity(4), (1.0 - x) / 4.0);
    let candidate_value = relent(&bell, &shifted);
    assert!((candidate_value - LN2).abs() < 2e-6);

    for interior_start in [true, false] {
        for variant in [FwVariant::Pairwise, FwVariant::Classic] {
            // Plain Frank–Wolfe from τ converges sublinearly here.
            let gap_tol = if interior_start { 1e-6 } else { 1e-3 };
            let opts = SolverOptions { interior_start, variant, gap_tol, ..Default::default() };
            let shifted = ree_shifted(&bell, &ConvexSetSpec::new(SetKind::Sep, qubit_pair(), x).unwrap(), &opts).unwrap();
            assert!(shifted.contains(LN2, 2e-3));
            let cv = ree(&bell, &ConvexSetSpec::plain(SetKind::Sep, qubit_pair()), &opts).unwrap();
            assert!(cv.contains(LN2, 0.0), "{variant:?}: [{}, {}]", cv.lower, cv.upper);
            assert!(cv.width() <= 5e-3);
            assert_eq!(cv.confidence, ValueConfidence::HeuristicLower);
            assert!(cv.lower <= candidate_value + 1e-9);
        }
    }
}

#[test]
fn bell_diagonal_matches_closed_form() {
    for p in [0.6, 0.75, 0.9] {
        let sigma = bell_diagonal([p, 1.0 - p, 0.0, 0.0]).unwrap();
        let exact = LN2 + p * p.ln() + (1.0 - p) * (1.0 - p).ln();
        for kind in [SetKind::Sep, SetKind::Ppt] {
            let cv = ree(&sigma, &ConvexSetSpec::plain(kind, qubit_pair()), &SolverOptions::default()).unwrap();
            assert!((cv.upper - exact).abs() <= 1e-3, "p={p}: {} vs {exact}", cv.upper);
            assert!(cv.contains(exact, 1e-9));
        }
    }
}

#[test]
fn upper_is_reproducible_from_minimizer() {
    for seed in 0..5 {
        let sigma = random_mixed(qubit_pair(), 2, seed).unwrap();
        let opts = SolverOptions::default();
        let cv = solve(&sigma, SetKind::Sep, &opts).unwrap();
        let shifted = shift(&cv.minimizer, cv.x).unwrap();
        let direct = relative_entropy(&sigma, &shifted).unwrap().nats();
        assert!((direct - cv.upper).abs() <= 1e-9);
        assert!(cv.lower <= cv.upper);
    }
}

#[test]
fn frank_wolfe_descends_monotonically() {
    let sigma = random_mixed(qubit_pair(), 2, 8).unwrap();
    let spec = ConvexSetSpec::new(SetKind::Sep, qubit_pair(), 0.999).unwrap();
    for variant in [FwVariant::Classic, FwVariant::Pairwise] {
        let mut prev = f64::INFINITY;
        for iters in 0..25 {
            let opts = SolverOptions { max_iters: iters, interior_start: false, variant, gap_tol: 1e-12, ..Default::default() };
            let cv = solve_shifted(&sigma, &spec, &opts).unwrap();
            assert!(cv.upper <= prev + 1e-12, "{variant:?} step {iters}");
            prev = cv.upper;
        }
    }
}

#[test]
fn ppt_never_exceeds_sep() {
    let opts = SolverOptions::default();
    for seed in 0..10 {
        let sigma = random_mixed(qubit_pair(), 1 + seed as usize % 4, 300 + seed).unwrap();
        let sep = solve(&sigma, SetKind::Sep, &opts).unwrap();
        let ppt = solve(&sigma, SetKind::Ppt, &opts).unwrap();
        assert!(ppt.upper <= sep.upper + 2.0 * opts.gap_tol);
        assert_eq!(ppt.confidence, ValueConfidence::Certified);
    }
}

#[test]
fn closest_state_examples() {
    let d = qubit_pair();
    let opts = SolverOptions::default();
    let sep = ConvexSetSpec::plain(SetKind::Sep, d);
    let sigma = random_product_pure(d, 2).mix(&random_product_pure(d, 3), 0.4).unwrap();
    let rho = closest_state(&sigma, &sep, &opts).unwrap();
    assert!(trace_norm(&(rho.matrix() - sigma.matrix())) <= 1e-3);

    let rho = closest_state(&bell_state(), &sep, &opts).unwrap();
    assert!((relent(&bell_state(), rho.matrix()) - LN2).abs() <= 5e-3);
    assert!(crate::sets::ppt_member(&rho, d, 1e-8).unwrap());
}

#[test]
fn exhausted_iterations_are_reported() {
    let opts = SolverOptions { max_iters: 0, interior_start: false, ..Default::default() };
    let spec = ConvexSetSpec::plain(SetKind::Sep, qubit_pair());
    match ree(&bell_state(), &spec, &opts) {
        Err(Error::NotConverged(cv)) => {
            assert!(!cv.converged);
            assert!(cv.lower <= cv.upper);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn options_are_validated() {
    let bad_x = SolverOptions { x: 0.4, ..Default::default() };
    assert!(matches!(solve(&bell_state(), SetKind::Sep, &bad_x), Err(Error::OutOfDomain { .. })));
    let bad_gap = SolverOptions { gap_tol: 0.0, ..Default::default() };
    assert!(bad_gap.validate().is_err());
    let other = BipartiteDims::new(2, 3).unwrap();
    assert!(matches!(
        ree(&bell_state(), &ConvexSetSpec::plain(SetKind::Sep, other), &SolverOptions::default()),
        Err(Error::DimensionMismatch { .. })
    ));
}
