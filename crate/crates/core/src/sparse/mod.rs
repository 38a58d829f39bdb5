//! Sparse storage, block composition, and direct/iterative solvers.

mod block;
mod cg;
mod csr;
mod factor;
mod ldl;
pub mod ordering;

pub use block::{assemble_block, Block, BlockLayout, BlockSystem};
pub use cg::cg_solve;
pub use csr::{dot, norm_inf, SparseMatrix, TripletBuilder};
pub use factor::{factorize, Factorization};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, per_row: usize, rng: &mut ChaCha8Rng) -> SparseMatrix {
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            for _ in 0..per_row {
                t.push(i, rng.random_range(0..n), rng.random_range(-1.0..1.0));
            }
        }
        t.build()
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> SparseMatrix {
        let b = random_sparse(n, 3, rng);
        let btb = b.transpose().matmul(&b).unwrap();
        btb.add_scaled(1.0, &SparseMatrix::identity(n), 0.5).unwrap()
    }

    #[test]
    fn identity_solves_to_rhs() {
        for sym in [false, true] {
            let f = factorize(&SparseMatrix::identity(5), sym).unwrap();
            let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
            assert_eq!(f.solve(&b).unwrap(), b);
        }
    }

    #[test]
    fn two_by_two_by_inspection() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        for sym in [false, true] {
            let x = factorize(&a, sym).unwrap().solve(&[3.0, 3.0]).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_matrices_report_pivot() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        for sym in [false, true] {
            assert!(matches!(factorize(&a, sym), Err(Error::Singular { pivot }) if pivot < 2));
        }
        // Structurally singular: empty column 2.
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]]);
        assert!(matches!(factorize(&a, false), Err(Error::Singular { .. })));
    }

    #[test]
    fn rejects_bad_shapes() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0]]);
        assert!(matches!(factorize(&a, false), Err(Error::NotSquare { .. })));
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(factorize(&a, true), Err(Error::NotSymmetric)));
        let f = factorize(&a, false).unwrap();
        assert!(matches!(f.solve(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(50, &mut rng);
        assert!(factorize(&a, true).unwrap().solve(&[0.0; 50]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn recovers_constructed_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [10, 200, 1500] {
            let a = random_spd(n, &mut rng);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = a.mul_vec(&xs);
            for sym in [true, false] {
                let x = factorize(&a, sym).unwrap().solve(&b).unwrap();
                let err = x.iter().zip(&xs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(err <= 1e-10 * norm_inf(&xs), "n={n} sym={sym}: {err:e}");
            }
        }
    }

    #[test]
    fn unsymmetric_with_pivoting() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400;
        // Weak diagonal forces off-diagonal pivots.
        let a = random_sparse(n, 4, &mut rng).add_scaled(1.0, &SparseMatrix::identity(n), 1e-3).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&xs);
        match factorize(&a, false) {
            Ok(f) => {
                let x = f.solve(&b).unwrap();
                assert!(f.residual(&x, &b) < 1e-12);
            }
            Err(Error::Singular { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn factorization_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_spd(300, &mut rng);
        let b: Vec<f64> = (0..300).map(|i| i as f64).collect();
        let x1 = factorize(&a, false).unwrap().solve(&b).unwrap();
        let x2 = factorize(&a, false).unwrap().solve(&b).unwrap();
        assert_eq!(x1, x2);
    }

    #[test]
    fn cg_examples() {
        let b = vec![1.0, 2.0, 3.0];
        assert_eq!(cg_solve(&SparseMatrix::identity(3), &b, 1e-14, 1).unwrap(), b);
        let d = SparseMatrix::diagonal(&[1.0, 2.0, 4.0, 8.0]);
        let x = cg_solve(&d, &[1.0, 1.0, 1.0, 1.0], 1e-14, 4).unwrap();
        assert!((x[3] - 0.125).abs() < 1e-15);
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1e-8]]);
        assert!(matches!(cg_solve(&a.add_scaled(1.0, &SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]), 0.5).unwrap(), &[1.0, 1.0], 1e-30, 1), Err(Error::NotConverged { .. })));
    }
}
