//! Generalised Stokes saddle point
//!
//! ```text
//! [  A   -Bᵀ ] [u]   [f]
//! [ -B    0  ] [p] = [0]
//! ```
//!
//! with `A` SPD (Dirichlet rows already eliminated) and `B` the divergence
//! form with constrained velocity columns zeroed. The pressure is fixed up
//! to its kernel (constants) by requiring `∫p = 0`.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};

use super::csr::{axpy, dot, norm2, SparseMatrix};
use super::spd::{columns_to_mat, mat_to_columns, prepare_spd, Method, SolverOptions, SpdSolver};
use crate::error::{Error, Result};

enum Backend {
    /// LU of the saddle matrix with one pressure dof pinned.
    Direct(faer::sparse::linalg::solvers::Lu<usize, f64>),
    /// Schur-complement CG on the pressure, preconditioned by the pressure
    /// mass matrix.
    Uzawa {
        velocity: SpdSolver,
        pressure_mass: SpdSolver,
        max_iter: usize,
    },
}

pub struct StokesSolver {
    a: SparseMatrix,
    div: SparseMatrix,
    /// `∫ ψ_a` for each pressure basis function.
    mean_weights: Vec<f64>,
    area: f64,
    backend: Backend,
    rtol: f64,
    rtol_div: f64,
}

impl std::fmt::Debug for StokesSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.backend {
            Backend::Direct(_) => "pinned-lu",
            Backend::Uzawa { .. } => "uzawa-schur-cg",
        };
        f.debug_struct("StokesSolver")
            .field("velocity_dofs", &self.a.rows())
            .field("pressure_dofs", &self.div.rows())
            .field("backend", &kind)
            .finish()
    }
}

/// Residual diagnostics of one saddle-point solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StokesReport {
    pub momentum_residual: f64,
    pub divergence_residual: f64,
    pub iterations: usize,
}

/// Prepare a Stokes solver.
///
/// `a`: velocity block (SPD, Dirichlet-eliminated); `div`: pressure ×
/// velocity divergence matrix with constrained columns zeroed; `pressure_mass`:
/// P1 mass matrix (preconditioner and mean weights).
pub fn prepare_stokes(
    a: &SparseMatrix,
    div: &SparseMatrix,
    pressure_mass: &SparseMatrix,
    opts: &SolverOptions,
) -> Result<StokesSolver> {
    let nu = a.rows();
    let np = div.rows();
    if div.cols() != nu {
        return Err(Error::DimensionMismatch {
            what: "divergence columns",
            expected: nu,
            got: div.cols(),
        });
    }
    if pressure_mass.rows() != np {
        return Err(Error::DimensionMismatch {
            what: "pressure mass rows",
            expected: np,
            got: pressure_mass.rows(),
        });
    }
    if np == 0 {
        return Err(Error::DimensionMismatch {
            what: "pressure dofs",
            expected: 1,
            got: 0,
        });
    }
    let mean_weights = pressure_mass.mul_vec(&vec![1.0; np]);
    let area: f64 = mean_weights.iter().sum();

    let backend = match opts.method {
        Method::Direct => {
            // The first pressure dof is pinned to zero: with zero boundary
            // velocity the divergence rows sum to zero, so one continuity
            // equation is redundant. The mean is removed afterwards.
            let n = nu + np - 1;
            let mut trip: Vec<_> = a.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
            for (r, c, v) in div.triplets().filter(|&(r, _, _)| r > 0) {
                trip.push(Triplet::new(nu + r - 1, c, -v));
                trip.push(Triplet::new(c, nu + r - 1, -v));
            }
            let k = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
                .map_err(|e| Error::Factorization(format!("{e:?}")))?;
            Backend::Direct(
                k.sp_lu()
                    .map_err(|e| Error::Factorization(format!("saddle-point LU: {e:?}")))?,
            )
        }
        Method::Iterative => Backend::Uzawa {
            velocity: prepare_spd(a, opts)?,
            pressure_mass: prepare_spd(pressure_mass, opts)?,
            max_iter: opts.max_iter,
        },
    };
    Ok(StokesSolver {
        a: a.clone(),
        div: div.clone(),
        mean_weights,
        area,
        backend,
        rtol: opts.rtol,
        rtol_div: opts.rtol_div,
    })
}

impl StokesSolver {
    pub fn velocity_dofs(&self) -> usize {
        self.a.rows()
    }

    pub fn pressure_dofs(&self) -> usize {
        self.div.rows()
    }

    /// Subtract the mean so that `∫p = 0`.
    pub fn project_mean_zero(&self, p: &mut [f64]) {
        let mean = dot(&self.mean_weights, p) / self.area;
        p.iter_mut().for_each(|v| *v -= mean);
    }

    pub fn mean(&self, p: &[f64]) -> f64 {
        dot(&self.mean_weights, p) / self.area
    }

    pub fn solve(&self, rhs_velocity: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (u, p, _) = self.solve_many(&[rhs_velocity])?.pop().expect("one column");
        Ok((u, p))
    }

    /// Solve for several velocity right-hand sides sharing the operator.
    pub fn solve_many(
        &self,
        rhs: &[&[f64]],
    ) -> Result<Vec<(Vec<f64>, Vec<f64>, StokesReport)>> {
        let nu = self.velocity_dofs();
        let np = self.pressure_dofs();
        for r in rhs {
            if r.len() != nu {
                return Err(Error::DimensionMismatch {
                    what: "Stokes right-hand side",
                    expected: nu,
                    got: r.len(),
                });
            }
        }
        let mut out = Vec::with_capacity(rhs.len());
        match &self.backend {
            Backend::Direct(lu) => {
                let n = nu + np - 1;
                let padded: Vec<Vec<f64>> = rhs
                    .iter()
                    .map(|r| {
                        let mut v = r.to_vec();
                        v.resize(n, 0.0);
                        v
                    })
                    .collect();
                let cols: Vec<&[f64]> = padded.iter().map(|v| v.as_slice()).collect();
                let sols = mat_to_columns(&lu.solve(columns_to_mat(&cols, n)));
                for (x, f) in sols.into_iter().zip(rhs) {
                    let mut u = x[..nu].to_vec();
                    let mut p = Vec::with_capacity(np);
                    p.push(0.0);
                    p.extend_from_slice(&x[nu..]);
                    let mut iterations = 0;
                    // Iterative refinement on the pinned system.
                    loop {
                        let ((rm, sm), (rd, sd)) = self.residuals(&u, &p, f);
                        if rm <= self.rtol * sm && rd <= self.rtol_div * sd || iterations == 4 {
                            break;
                        }
                        let mut r = self.momentum_defect(&u, &p, f);
                        let bu = self.div.mul_vec(&u);
                        r.extend_from_slice(&bu[1..]);
                        let dx = lu.solve(columns_to_mat(&[&r], n));
                        for (i, ui) in u.iter_mut().enumerate() {
                            *ui += dx[(i, 0)];
                        }
                        for k in 1..np {
                            p[k] += dx[(nu + k - 1, 0)];
                        }
                        iterations += 1;
                    }
                    self.project_mean_zero(&mut p);
                    let report = self.check(&u, &p, f, iterations)?;
                    out.push((u, p, report));
                }
            }
            Backend::Uzawa {
                velocity,
                pressure_mass,
                max_iter,
            } => {
                for f in rhs {
                    let (u, p, it) = self.uzawa(velocity, pressure_mass, *max_iter, f)?;
                    let report = self.check(&u, &p, f, it)?;
                    out.push((u, p, report));
                }
            }
        }
        Ok(out)
    }

    fn momentum_defect(&self, u: &[f64], p: &[f64], f: &[f64]) -> Vec<f64> {
        // f - (A u - Bᵀ p)
        let mut r = f.to_vec();
        axpy(-1.0, &self.a.mul_vec(u), &mut r);
        axpy(1.0, &self.div.mul_transpose_vec(p), &mut r);
        r
    }

    /// ((momentum residual, scale), (divergence residual, scale)).
    fn residuals(&self, u: &[f64], p: &[f64], f: &[f64]) -> ((f64, f64), (f64, f64)) {
        let rm = norm2(&self.momentum_defect(u, p, f));
        let rd = norm2(&self.div.mul_vec(u));
        let scale_m = norm2(f).max(f64::MIN_POSITIVE);
        let scale_d = (self.div.max_abs() * norm2(u)).max(f64::MIN_POSITIVE);
        ((rm, scale_m), (rd, scale_d))
    }

    fn check(&self, u: &[f64], p: &[f64], f: &[f64], iterations: usize) -> Result<StokesReport> {
        let ((rm, sm), (rd, sd)) = self.residuals(u, p, f);
        let zero_rhs = norm2(f) == 0.0;
        let report = StokesReport {
            momentum_residual: if zero_rhs { rm } else { rm / sm },
            divergence_residual: if zero_rhs { rd } else { rd / sd },
            iterations,
        };
        if !zero_rhs && (report.momentum_residual > self.rtol || report.divergence_residual > self.rtol_div) {
            return Err(Error::NoConvergence {
                solver: "stokes",
                iterations,
                residual: report.momentum_residual.max(report.divergence_residual),
            });
        }
        Ok(report)
    }

    fn uzawa(
        &self,
        velocity: &SpdSolver,
        pressure_mass: &SpdSolver,
        max_iter: usize,
        f: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, usize)> {
        let np = self.pressure_dofs();
        // Schur system  B A⁻¹ Bᵀ p = -B A⁻¹ f.
        let schur = |p: &[f64]| -> Result<Vec<f64>> {
            let w = velocity.solve(&self.div.mul_transpose_vec(p))?;
            Ok(self.div.mul_vec(&w))
        };
        let u0 = velocity.solve(f)?;
        let mut r: Vec<f64> = self.div.mul_vec(&u0).iter().map(|v| -v).collect();
        let r0 = norm2(&r);
        let mut p = vec![0.0; np];
        let mut it = 0;
        if r0 > 0.0 {
            let mut z = pressure_mass.solve(&r)?;
            self.project_mean_zero(&mut z);
            let mut d = z.clone();
            let mut rz = dot(&r, &z);
            loop {
                let sd = schur(&d)?;
                let dsd = dot(&d, &sd);
                if dsd <= 0.0 {
                    return Err(Error::NotPositiveDefinite(format!(
                        "Schur complement curvature {dsd:e}"
                    )));
                }
                let alpha = rz / dsd;
                axpy(alpha, &d, &mut p);
                axpy(-alpha, &sd, &mut r);
                it += 1;
                // Tight stopping: the velocity divergence is B u = -r.
                if norm2(&r) <= 1e-2 * self.rtol_div * r0 {
                    break;
                }
                if it >= max_iter {
                    return Err(Error::NoConvergence {
                        solver: "uzawa schur cg",
                        iterations: it,
                        residual: norm2(&r) / r0,
                    });
                }
                z = pressure_mass.solve(&r)?;
                self.project_mean_zero(&mut z);
                let rz_new = dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                for k in 0..np {
                    d[k] = z[k] + beta * d[k];
                }
            }
        }
        self.project_mean_zero(&mut p);
        let mut rhs = f.to_vec();
        axpy(1.0, &self.div.mul_transpose_vec(&p), &mut rhs);
        let u = velocity.solve(&rhs)?;
        Ok((u, p, it))
    }
}
