use nalgebra::DMatrix;
use proptest::prelude::*;

use rankcalm::sets::{dist_to_gamma, ConstraintSet, GammaMethod, GammaOptions, NormKind};
use rankcalm::spectral::{kyfan_norm, nuclear_norm, rank_residual, truncated_residual};
use rankcalm::surrogate::{lift_to_mpec, psi_star, ConjugateMode, SurrogateFamily};
use rankcalm::Matrix;

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(a, b)| {
        let (rows, cols) = (a.min(b), a.max(b));
        prop::collection::vec(-5.0..5.0f64, rows * cols)
            .prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
    })
}

fn matrix_pair_strategy(max_dim: usize) -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(a, b)| {
        let (rows, cols) = (a.min(b), a.max(b));
        let entries = || prop::collection::vec(-5.0..5.0f64, rows * cols);
        (entries(), entries()).prop_map(move |(x, y)| {
            (
                DMatrix::from_row_slice(rows, cols, &x),
                DMatrix::from_row_slice(rows, cols, &y),
            )
        })
    })
}

/// A product of n×k and k×m factors, so rank ≤ k.
fn low_rank_strategy() -> impl Strategy<Value = (DMatrix<f64>, usize)> {
    (2..=5usize, 2..=6usize, 1..=2usize).prop_flat_map(|(n, m, k)| {
        let (n, m) = (n.min(m), n.max(m));
        let k = k.min(n);
        (
            prop::collection::vec(-2.0..2.0f64, n * k),
            prop::collection::vec(-2.0..2.0f64, k * m),
        )
            .prop_map(move |(a, b)| {
                let a = DMatrix::from_row_slice(n, k, &a);
                let b = DMatrix::from_row_slice(k, m, &b);
                (a * b, k)
            })
    })
}

fn sym_strategy(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, n * n).prop_map(move |v| {
        let a = DMatrix::from_row_slice(n, n, &v);
        (&a + a.transpose()) * 0.5
    })
}

fn families() -> [SurrogateFamily; 2] {
    [SurrogateFamily::linear(), SurrogateFamily::quad_shift()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eta_is_sandwiched_by_theta(a in matrix_strategy(6)) {
        let x = Matrix::from_dmatrix(a).unwrap();
        let scale = 1e-9 * (1.0 + nuclear_norm(&x).unwrap());
        for r in 1..=x.rows() {
            let theta = rank_residual(&x, r).unwrap();
            let eta = truncated_residual(&x, r).unwrap().eta;
            prop_assert!(0.5 * theta <= eta + scale, "r={r}: θ={theta} η={eta}");
            prop_assert!(eta <= theta + scale, "r={r}: θ={theta} η={eta}");
        }
    }

    #[test]
    fn kyfan_splits_the_nuclear_norm(a in matrix_strategy(6)) {
        let x = Matrix::from_dmatrix(a).unwrap();
        let nuc = nuclear_norm(&x).unwrap();
        let mut prev = 0.0;
        for r in 1..=x.rows() {
            let k = kyfan_norm(&x, r).unwrap();
            prop_assert!(k + 1e-12 >= prev);
            prop_assert!((k + rank_residual(&x, r).unwrap() - nuc).abs() <= 1e-9 * (1.0 + nuc));
            prev = k;
        }
    }

    #[test]
    fn residuals_vanish_on_low_rank((a, k) in low_rank_strategy()) {
        let x = Matrix::from_dmatrix(a).unwrap();
        let tol = 1e-9 * (1.0 + nuclear_norm(&x).unwrap());
        prop_assert!(rank_residual(&x, k).unwrap() <= tol);
        prop_assert!(truncated_residual(&x, k).unwrap().eta <= tol);
    }

    #[test]
    fn correlation_projection_is_optimal(g in sym_strategy(3), others in prop::collection::vec(sym_strategy(3), 4)) {
        let set = ConstraintSet::correlation(3).unwrap();
        let gm = Matrix::from_dmatrix_sym(g.clone()).unwrap();
        let p = set.project(&gm, 1e-12).unwrap();
        prop_assert!(set.residual(&p).unwrap() <= 1e-8);
        let pm = p.as_dmatrix();
        for y in others {
            let y = set.project(&Matrix::from_dmatrix_sym(y).unwrap(), 1e-12).unwrap();
            let vi = (&g - pm).dot(&(y.as_dmatrix() - pm));
            prop_assert!(vi <= 1e-6, "<G−P, Y−P> = {vi}");
        }
    }

    #[test]
    fn ball_projection_is_optimal((a, b) in matrix_pair_strategy(4), norm in 0..3usize) {
        let norm = [NormKind::Spectral, NormKind::Frobenius, NormKind::Nuclear][norm];
        let set = ConstraintSet::norm_ball(norm, 1.5, a.nrows(), a.ncols()).unwrap();
        let p = set.project(&Matrix::from_dmatrix(a.clone()).unwrap(), 1e-12).unwrap();
        let y = set.project(&Matrix::from_dmatrix(b).unwrap(), 1e-12).unwrap();
        prop_assert!(set.contains(&p).unwrap());
        let vi = (&a - p.as_dmatrix()).dot(&(y.as_dmatrix() - p.as_dmatrix()));
        prop_assert!(vi <= 1e-8, "<A−P, Y−P> = {vi}");
    }

    #[test]
    fn conjugate_bounds_and_shape(s in 0.0..20.0f64, h in 0.0..5.0f64) {
        for fam in families() {
            let psi = |v: f64| psi_star(&fam, v, ConjugateMode::Closed).unwrap();
            let (a, b) = (psi(s), psi(s + h));
            prop_assert!(b + 1e-12 >= a, "ψ* decreasing on {}", fam.tag());
            prop_assert!(psi(s + 0.5 * h) <= 0.5 * (a + b) + 1e-12, "ψ* not convex on {}", fam.tag());
            prop_assert!(a + 1e-12 >= s * fam.t_star());
            let gap = s - a;
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&gap), "s − ψ*(s) = {gap}");
            let numeric = psi_star(&fam, s, ConjugateMode::Numeric).unwrap();
            prop_assert!((numeric - a).abs() <= 1e-8);
        }
    }

    #[test]
    fn lift_closes_the_complementarity_gap((a, _) in low_rank_strategy()) {
        let x = Matrix::from_dmatrix(a).unwrap();
        let nuc = nuclear_norm(&x).unwrap();
        for fam in families() {
            let pt = lift_to_mpec(&x, &fam).unwrap();
            let w_norm = rankcalm::spectral::spectral_norm(&pt.w).unwrap();
            prop_assert!(w_norm <= 1.0 + 1e-10);
            prop_assert!((nuc - x.inner(&pt.w)).abs() <= 1e-9 * (1.0 + nuc));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn alternating_distance_bounds_enumeration(g in sym_strategy(3)) {
        let set = ConstraintSet::correlation(3).unwrap();
        let x = set.project(&Matrix::from_dmatrix_sym(g).unwrap(), 1e-12).unwrap();
        let exact = dist_to_gamma(&set, 1, &x, GammaOptions {
            method: GammaMethod::Enumerate,
            ..GammaOptions::default()
        }).unwrap();
        let approx = dist_to_gamma(&set, 1, &x, GammaOptions::default()).unwrap();
        prop_assert!(approx + 1e-9 >= exact, "alternating {approx} < exact {exact}");
    }
}
