use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::csr::{axpy, dot, norm2, SparseMatrix};
use crate::error::{Error, Result};

/// How a prepared system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Sparse Cholesky (SPD) or LU (saddle point) factorisation, with
    /// iterative refinement when the residual contract is missed.
    #[default]
    Direct,
    /// Jacobi-preconditioned CG; Uzawa–Schur CG for saddle points.
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: Method,
    /// Relative residual target for SPD and momentum blocks.
    pub rtol: f64,
    /// Relative target for the discrete divergence of Stokes velocities.
    pub rtol_div: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: Method::Direct,
            rtol: 1e-10,
            rtol_div: 1e-8,
            max_iter: 5000,
        }
    }
}

pub(crate) fn to_faer(m: &SparseMatrix) -> Result<SparseColMat<usize, f64>> {
    let trip: Vec<_> = m
        .triplets()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    SparseColMat::try_new_from_triplets(m.rows(), m.cols(), &trip)
        .map_err(|e| Error::Factorization(format!("{e:?}")))
}

pub(crate) fn columns_to_mat(cols: &[&[f64]], n: usize) -> Mat<f64> {
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

pub(crate) fn mat_to_columns(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)]).collect())
        .collect()
}

enum Backend {
    Cholesky(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Jacobi(Vec<f64>),
}

/// Prepared solver for a fixed symmetric positive definite matrix.
pub struct SpdSolver {
    matrix: SparseMatrix,
    backend: Backend,
    rtol: f64,
    max_iter: usize,
}

impl std::fmt::Debug for SpdSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.backend {
            Backend::Cholesky(_) => "cholesky",
            Backend::Jacobi(_) => "jacobi-pcg",
        };
        f.debug_struct("SpdSolver")
            .field("n", &self.matrix.rows())
            .field("backend", &kind)
            .field("rtol", &self.rtol)
            .finish()
    }
}

/// Factor (or set up preconditioning for) `matrix` once for repeated solves.
pub fn prepare_spd(matrix: &SparseMatrix, opts: &SolverOptions) -> Result<SpdSolver> {
    let n = matrix.rows();
    if matrix.cols() != n {
        return Err(Error::DimensionMismatch {
            what: "SPD matrix columns",
            expected: n,
            got: matrix.cols(),
        });
    }
    let diag = matrix.diagonal();
    if let Some(i) = diag.iter().position(|&d| d <= 0.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "diagonal entry {i} is {:e}",
            diag[i]
        )));
    }
    let backend = match opts.method {
        Method::Direct => {
            let llt = to_faer(matrix)?
                .sp_cholesky(Side::Lower)
                .map_err(|e| Error::NotPositiveDefinite(format!("cholesky: {e:?}")))?;
            Backend::Cholesky(llt)
        }
        Method::Iterative => Backend::Jacobi(diag.iter().map(|d| 1.0 / d).collect()),
    };
    Ok(SpdSolver {
        matrix: matrix.clone(),
        backend,
        rtol: opts.rtol,
        max_iter: opts.max_iter,
    })
}

impl SpdSolver {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve_many(&[rhs])?.pop().expect("one column"))
    }

    /// Solve for several right-hand sides at once.
    pub fn solve_many(&self, rhs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        for r in rhs {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "SPD right-hand side",
                    expected: n,
                    got: r.len(),
                });
            }
        }
        match &self.backend {
            Backend::Cholesky(llt) => {
                let sol = mat_to_columns(&llt.solve(columns_to_mat(rhs, n)));
                sol.into_iter()
                    .zip(rhs)
                    .map(|(x, b)| self.refine(x, b, |r| llt.solve(columns_to_mat(&[r], n))))
                    .collect()
            }
            Backend::Jacobi(dinv) => rhs.iter().map(|b| self.pcg(b, dinv)).collect(),
        }
    }

    fn refine(
        &self,
        mut x: Vec<f64>,
        b: &[f64],
        solve: impl Fn(&[f64]) -> Mat<f64>,
    ) -> Result<Vec<f64>> {
        let bnorm = norm2(b);
        let mut res = 0.0;
        for _ in 0..4 {
            let mut r = b.to_vec();
            axpy(-1.0, &self.matrix.mul_vec(&x), &mut r);
            res = norm2(&r);
            if res <= self.rtol * bnorm {
                return Ok(x);
            }
            let dx = solve(&r);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += dx[(i, 0)];
            }
        }
        Err(Error::NoConvergence {
            solver: "cholesky refinement",
            iterations: 4,
            residual: res / bnorm,
        })
    }

    fn pcg(&self, b: &[f64], dinv: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let bnorm = norm2(b);
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(dinv).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 0..self.max_iter {
            self.matrix.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(Error::NotPositiveDefinite(format!(
                    "non-positive curvature {pap:e} at CG iteration {it}"
                )));
            }
            let alpha = rz / pap;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &ap, &mut r);
            if norm2(&r) <= self.rtol * bnorm {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] * dinv[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NoConvergence {
            solver: "jacobi pcg",
            iterations: self.max_iter,
            residual: norm2(&r) / bnorm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn both() -> [SolverOptions; 2] {
        [
            SolverOptions::default(),
            SolverOptions {
                method: Method::Iterative,
                ..Default::default()
            },
        ]
    }

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap();
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
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn identity_and_diagonal() {
        for opts in both() {
            let s = prepare_spd(&SparseMatrix::identity(3), &opts).unwrap();
            assert_eq!(s.solve(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
            let d = prepare_spd(&SparseMatrix::from_diagonal(&[2.0, 4.0]), &opts).unwrap();
            let x = d.solve(&[2.0, 8.0]).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
            assert_eq!(d.solve(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn p1_laplacian_against_dense_oracle() {
        // 1D P1 Laplacian with a mass shift, 5 unknowns.
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 0.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t, true);
        let b = vec![1.0, 0.0, -2.0, 0.5, 3.0];
        let oracle = dense_solve(a.to_dense(), b.clone());
        for opts in both() {
            let x = prepare_spd(&a, &opts).unwrap().solve(&b).unwrap();
            for (xi, oi) in x.iter().zip(&oracle) {
                assert!((xi - oi).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn random_spd_against_dense_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 8;
        let g: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut v: f64 = (0..n).map(|k| g[k][i] * g[k][j]).sum();
                if i == j {
                    v += 0.5;
                }
                t.push((i, j, v));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t, true);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let oracle = dense_solve(a.to_dense(), b.clone());
        for opts in both() {
            let s = prepare_spd(&a, &opts).unwrap();
            let x = s.solve(&b).unwrap();
            for (xi, oi) in x.iter().zip(&oracle) {
                assert!((xi - oi).abs() < 1e-8, "{xi} vs {oi}");
            }
            let mut r = a.mul_vec(&x);
            axpy(-1.0, &b, &mut r);
            assert!(norm2(&r) <= 1e-10 * norm2(&b));
        }
    }

    #[test]
    fn reuse_matches_fresh_preparation() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0)],
            true,
        );
        let rhs = [[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0], [0.0, 0.0, 7.0]];
        for opts in both() {
            let shared = prepare_spd(&a, &opts).unwrap();
            for b in &rhs {
                let fresh = prepare_spd(&a, &opts).unwrap().solve(b).unwrap();
                assert_eq!(shared.solve(b).unwrap(), fresh);
            }
        }
    }

    #[test]
    fn indefinite_input_is_rejected() {
        let a = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)],
            true,
        );
        assert!(matches!(
            prepare_spd(&a, &SolverOptions::default()),
            Err(Error::NotPositiveDefinite(_))
        ));
        let pcg = prepare_spd(
            &a,
            &SolverOptions {
                method: Method::Iterative,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(
            pcg.solve(&[1.0, -1.0]),
            Err(Error::NotPositiveDefinite(_))
        ));
        let neg = SparseMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(prepare_spd(&neg, &SolverOptions::default()).is_err());
    }

    #[test]
    fn iteration_cap_reported() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t, true);
        let s = prepare_spd(
            &a,
            &SolverOptions {
                method: Method::Iterative,
                max_iter: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        match s.solve(&b) {
            Err(Error::NoConvergence { iterations, residual, .. }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        let s = prepare_spd(&SparseMatrix::identity(2), &SolverOptions::default()).unwrap();
        assert!(matches!(
            s.solve(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
