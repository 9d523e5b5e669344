use crate::error::{Error, Result};
use crate::solve::SparseMatrix;

/// Symmetric elimination of the constraints `x[dofs[k]] = values[k]`.
///
/// Constrained rows and columns are zeroed with a unit diagonal, and the
/// eliminated column contributions are moved to the right-hand side, so a
/// symmetric input stays symmetric.
pub fn apply_dirichlet(
    matrix: &SparseMatrix,
    rhs: &[f64],
    dofs: &[usize],
    values: &[f64],
) -> Result<(SparseMatrix, Vec<f64>)> {
    let n = matrix.rows();
    if matrix.cols() != n || rhs.len() != n {
        return Err(Error::DimensionMismatch {
            what: "dirichlet system",
            expected: n,
            got: rhs.len(),
        });
    }
    if values.len() != dofs.len() {
        return Err(Error::DimensionMismatch {
            what: "dirichlet values",
            expected: dofs.len(),
            got: values.len(),
        });
    }
    let mut fixed = vec![None; n];
    for (&d, &v) in dofs.iter().zip(values) {
        if d >= n {
            return Err(Error::DimensionMismatch {
                what: "dirichlet dof index",
                expected: n,
                got: d,
            });
        }
        fixed[d] = Some(v);
    }

    let mut b = rhs.to_vec();
    let mut trip = Vec::with_capacity(matrix.nnz());
    for (r, c, a) in matrix.triplets() {
        match (fixed[r], fixed[c]) {
            (None, None) => trip.push((r, c, a)),
            (None, Some(g)) => b[r] -= a * g,
            _ => {}
        }
    }
    for (d, g) in fixed.iter().enumerate() {
        if let Some(g) = g {
            trip.push((d, d, 1.0));
            b[d] = *g;
        }
    }
    Ok((
        SparseMatrix::from_triplets(n, n, &trip, matrix.is_symmetric()),
        b,
    ))
}

/// Zero the listed columns of a rectangular matrix (constrained unknowns).
pub fn zero_columns(matrix: &SparseMatrix, cols: &[usize]) -> SparseMatrix {
    let mut drop = vec![false; matrix.cols()];
    for &c in cols {
        drop[c] = true;
    }
    let trip: Vec<_> = matrix.triplets().filter(|&(_, c, _)| !drop[c]).collect();
    SparseMatrix::from_triplets(matrix.rows(), matrix.cols(), &trip, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t, true)
    }

    #[test]
    fn empty_constraint_set_is_identity_operation() {
        let a = laplace_1d(4);
        let rhs = vec![1.0, 2.0, 3.0, 4.0];
        let (m, b) = apply_dirichlet(&a, &rhs, &[], &[]).unwrap();
        assert_eq!(m, a);
        assert_eq!(b, rhs);
    }

    #[test]
    fn fully_constrained_becomes_identity() {
        let a = laplace_1d(3);
        let (m, b) = apply_dirichlet(&a, &[5.0, 6.0, 7.0], &[0, 1, 2], &[0.0; 3]).unwrap();
        assert_eq!(m.to_dense(), SparseMatrix::identity(3).to_dense());
        assert_eq!(b, vec![0.0; 3]);
    }

    #[test]
    fn three_node_hand_solve() {
        // P1 Laplacian on [0,1] with h = 1/2: (1/h)[1 -1; -1 2 -1; -1 1],
        // load h·f with f = 1 at the middle node, ends fixed at 0 and 1.
        // Hand elimination: 4 u₁ = 0.5 + 2·(0 + 1) ⇒ u₁ = 0.625.
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 2.0),
                (0, 1, -2.0),
                (1, 0, -2.0),
                (1, 1, 4.0),
                (1, 2, -2.0),
                (2, 1, -2.0),
                (2, 2, 2.0),
            ],
            true,
        );
        let (m, b) = apply_dirichlet(&a, &[0.25, 0.5, 0.25], &[0, 2], &[0.0, 1.0]).unwrap();
        assert!(m.asymmetry() == 0.0);
        assert_eq!(b, vec![0.0, 2.5, 1.0]);
        assert_eq!(m.get(1, 1), 4.0);
        let u1 = b[1] / m.get(1, 1);
        assert!((u1 - 0.625).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_dof_rejected() {
        let a = laplace_1d(2);
        assert!(apply_dirichlet(&a, &[0.0, 0.0], &[2], &[0.0]).is_err());
        assert!(apply_dirichlet(&a, &[0.0, 0.0], &[1], &[]).is_err());
    }
}
