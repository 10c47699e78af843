//! Sparse direct solves on the assembly pattern, backed by faer.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::Side;

use crate::error::{Error, Result};

/// Required relative residual `‖Kx − b‖ / ‖b‖`.
pub const LINEAR_TOL: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factorization {
    /// Cholesky first, LU if the matrix turns out not to be positive definite.
    Cholesky,
    Lu,
}

/// Direct solver for a fixed sparsity pattern. The symbolic analysis is
/// computed once and reused for every numeric factorization.
pub struct LinearSolver {
    symbolic: SymbolicSparseColMat<usize>,
    prefer: Factorization,
    llt: Option<SymbolicLlt<usize>>,
    lu: Option<SymbolicLu<usize>>,
}

enum Numeric {
    Llt(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

impl Numeric {
    fn solve(&self, b: &Col<f64>) -> Col<f64> {
        match self {
            Numeric::Llt(f) => f.solve(b),
            Numeric::Lu(f) => f.solve(b),
        }
    }
}

impl LinearSolver {
    pub fn new(n: usize, col_ptr: &[usize], row_idx: &[usize], prefer: Factorization) -> Self {
        let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr.to_vec(), None, row_idx.to_vec());
        Self { symbolic, prefer, llt: None, lu: None }
    }

    fn factor(&mut self, values: &[f64]) -> Result<Numeric> {
        let a = SparseColMatRef::new(self.symbolic.as_ref(), values);
        if self.prefer == Factorization::Cholesky {
            if self.llt.is_none() {
                self.llt = Some(
                    SymbolicLlt::try_new(self.symbolic.as_ref(), Side::Lower).map_err(|e| Error::SingularSystem(format!("{e:?}")))?,
                );
            }
            if let Ok(f) = Llt::try_new_with_symbolic(self.llt.clone().unwrap(), a, Side::Lower) {
                return Ok(Numeric::Llt(f));
            }
            log::debug!("Cholesky factorization failed; falling back to LU");
        }
        if self.lu.is_none() {
            self.lu = Some(SymbolicLu::try_new(self.symbolic.as_ref()).map_err(|e| Error::SingularSystem(format!("{e:?}")))?);
        }
        Lu::try_new_with_symbolic(self.lu.clone().unwrap(), a)
            .map(Numeric::Lu)
            .map_err(|e| Error::SingularSystem(format!("{e:?}")))
    }

    /// Solves `A x = b` where `A` has the values `values` on this pattern.
    pub fn solve(&mut self, values: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let b_norm = norm(rhs);
        if b_norm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let numeric = self.factor(values)?;
        let a = SparseColMatRef::new(self.symbolic.as_ref(), values);
        let b = Col::<f64>::from_fn(n, |i| rhs[i]);
        let mut x = numeric.solve(&b);
        let mut rel = f64::INFINITY;
        for step in 0..=REFINEMENT_STEPS {
            let r: Col<f64> = &b - a * &x;
            rel = r.norm_l2() / b_norm;
            if !rel.is_finite() {
                return Err(Error::SingularSystem("non-finite solution".into()));
            }
            if rel <= LINEAR_TOL || step == REFINEMENT_STEPS {
                break;
            }
            x += numeric.solve(&r);
        }
        if rel > LINEAR_TOL {
            return Err(Error::LinearSolveFailed(rel));
        }
        Ok((0..n).map(|i| x[i]).collect())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One-shot solve with a fresh factorization.
pub fn linear_solve(n: usize, col_ptr: &[usize], row_idx: &[usize], values: &[f64], rhs: &[f64], prefer: Factorization) -> Result<Vec<f64>> {
    LinearSolver::new(n, col_ptr, row_idx, prefer).solve(values, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_to_csc(a: &[Vec<f64>]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let n = a.len();
        let (mut cp, mut ri, mut v) = (vec![0], Vec::new(), Vec::new());
        for c in 0..n {
            for r in 0..n {
                if a[r][c] != 0.0 {
                    ri.push(r);
                    v.push(a[r][c]);
                }
            }
            cp.push(ri.len());
        }
        (cp, ri, v)
    }

    /// Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            x[i] = (b[i] - (i + 1..n).map(|j| a[i][j] * x[j]).sum::<f64>()) / a[i][i];
        }
        x
    }

    #[test]
    fn identity_returns_rhs() {
        let n = 7;
        let a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let (cp, ri, v) = dense_to_csc(&a);
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        for f in [Factorization::Cholesky, Factorization::Lu] {
            assert_eq!(linear_solve(n, &cp, &ri, &v, &b, f).unwrap(), b);
        }
    }

    #[test]
    fn random_spd_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 50;
        let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| m[i][k] * m[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let oracle = dense_solve(a.clone(), b.clone());
        let (cp, ri, v) = dense_to_csc(&a);
        for f in [Factorization::Cholesky, Factorization::Lu] {
            let x = linear_solve(n, &cp, &ri, &v, &b, f).unwrap();
            let err = x.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = oracle.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(err < 1e-10 * scale, "{f:?}: {err}");
        }
    }

    #[test]
    fn saddle_point_block_system() {
        // [[A, Bᵀ], [B, 0]] with A = diag(2, 3), B = [1, 1]; solution (1, -1, 4).
        let a = vec![vec![2.0, 0.0, 1.0], vec![0.0, 3.0, 1.0], vec![1.0, 1.0, 0.0]];
        let x_true = [1.0, -1.0, 4.0];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i][j] * x_true[j]).sum()).collect();
        let (cp, ri, v) = dense_to_csc(&a);
        for f in [Factorization::Cholesky, Factorization::Lu] {
            let x = linear_solve(3, &cp, &ri, &v, &b, f).unwrap();
            for (a, b) in x.iter().zip(x_true) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let (cp, ri, v) = dense_to_csc(&a);
        assert!(linear_solve(2, &cp, &ri, &v, &[1.0, 0.0], Factorization::Lu).is_err());
    }
}
