use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sglab::grid::{assemble_operator, direct_norm, Grid, OperatorSpec};
use sglab::spectral::{
    analyze, counting_function, eigendecompose, eigendecompose_matrix, series_norm, synthesize, weyl_fit_sequence,
    CoefficientVector,
};

fn model(l: f64, n: usize) -> (Grid, sglab::grid::DiscretizedOperator) {
    let grid = Grid::new(l, n).unwrap();
    let op = assemble_operator(&grid, OperatorSpec::new(2, 2).unwrap());
    (grid, op)
}

fn oracle_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = DMatrix::from_row_slice(n, n, a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn three_point_fixture_matches_hand_matrix() {
    let (_, op) = model(1.0, 3);
    let s = 2f64.sqrt();
    let hand = [6.0, -s, 0.0, -s, 3.0, -s, 0.0, -s, 6.0];
    for (got, want) in op.matrix().iter().zip(hand) {
        assert!((got - want).abs() < 1e-14);
    }
    let eig = eigendecompose(&op).unwrap();
    for (got, want) in eig.eigenvalues().iter().zip([2.0, 6.0, 7.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn model_operator_matches_independent_eigensolver() {
    let (_, op) = model(6.0, 121);
    let eig = eigendecompose(&op).unwrap();
    let oracle = oracle_eigenvalues(op.matrix(), op.dim());
    for (a, b) in eig.eigenvalues().iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-10 * b.abs(), "{a} vs {b}");
    }
    assert!(eig.orthonormality_defect() < 1e-10);
    assert!(eig.reconstruction_defect(op.matrix()) < 1e-9);
}

#[test]
fn parseval_on_seeded_vectors() {
    let (grid, op) = model(6.0, 121);
    // Parseval needs the whole basis, trusted or not.
    let eig = eigendecompose(&op).unwrap().with_trusted_count(usize::MAX);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let v: Vec<f64> = (0..grid.points()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = analyze(&v, &eig, eig.dim()).unwrap();
        let coeff_norm = c.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let direct = direct_norm(&v, 0, 0, &grid).unwrap();
        assert!((coeff_norm / direct - 1.0).abs() < 1e-10);
        let back = synthesize(&c, &eig).unwrap();
        for (x, y) in v.iter().zip(back) {
            assert!((x - y.re).abs() < 1e-10 && y.im == 0.0);
        }
    }
}

#[test]
fn series_norm_of_eigenvector_is_a_power_of_its_eigenvalue() {
    let (_, op) = model(6.0, 61);
    let eig = eigendecompose(&op).unwrap();
    for j in 1..=5 {
        let e = CoefficientVector::unit(j, eig.trusted_count().max(5));
        for r in 0..=2 {
            assert_eq!(series_norm(&e, &eig, r).unwrap(), eig.eigenvalue(j).powi(r));
        }
    }
}

#[test]
fn counting_function_is_monotone_step() {
    let (_, op) = model(4.0, 41);
    let eig = eigendecompose(&op).unwrap();
    assert_eq!(counting_function(&eig, 0.5), 0);
    assert_eq!(counting_function(&eig, f64::INFINITY), eig.dim());
    assert_eq!(counting_function(&eig, eig.eigenvalue(7)), 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_symmetric_matrices_agree_with_oracle(n in 1usize..24, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x = rng.gen_range(-5.0..5.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let eig = eigendecompose_matrix(&a, n, 1.0).unwrap();
        let oracle = oracle_eigenvalues(&a, n);
        for (x, y) in eig.eigenvalues().iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
        }
        prop_assert!(eig.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn model_operators_are_symmetric_with_floor_one(
        l in 0.5f64..10.0,
        half in 1usize..40,
        m in prop::sample::select(vec![2u32, 4, 6]),
        mu in prop::sample::select(vec![2u32, 4]),
    ) {
        let grid = Grid::new(l, 2 * half + 1).unwrap();
        let op = assemble_operator(&grid, OperatorSpec::new(m, mu).unwrap());
        let n = op.dim();
        for i in 0..n {
            for j in 0..i {
                prop_assert_eq!(op.get(i, j), op.get(j, i));
            }
        }
        let eig = eigendecompose(&op).unwrap();
        prop_assert!(eig.eigenvalues()[0] >= 1.0 - 1e-9);
        prop_assert!(eig.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn unweighted_direct_norm_is_scaled_euclidean(v in prop::collection::vec(-1e3f64..1e3, 1..40), l in 0.5f64..5.0) {
        let n = if v.len() % 2 == 1 { v.len() } else { v.len() - 1 }.max(3);
        let mut v = v;
        v.resize(n, 0.25);
        let grid = Grid::new(l, n).unwrap();
        let want = (grid.spacing() * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let got = direct_norm(&v, 0, 0, &grid).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn synthetic_power_laws_recover_their_exponent(p in 0.5f64..4.0) {
        let lambdas: Vec<f64> = (1..=400).map(|j| (j as f64).powf(p)).collect();
        let fit = weyl_fit_sequence(&lambdas, 20..=400, p).unwrap();
        prop_assert!((fit.slope_plain - p).abs() < 1e-6);
    }
}
