//! Nodal Lagrange bases on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! Local numbering: vertices 0, 1, 2, then (quadratic only) the midpoints of
//! edges (0,1), (1,2), (2,0).

const BARY_GRAD: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
const EDGE_VERTS: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Linear = 1,
    Quadratic = 2,
}

impl Order {
    pub fn local_dofs(self) -> usize {
        match self {
            Order::Linear => 3,
            Order::Quadratic => 6,
        }
    }
}

/// Basis values and reference gradients at `(ξ, η)`.
pub fn reference_basis(order: Order, xi: f64, eta: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
    let n = order.local_dofs();
    let mut values = vec![0.0; n];
    let mut grads = vec![[0.0; 2]; n];
    eval_into(order, [1.0 - xi - eta, xi, eta], &mut values, &mut grads);
    (values, grads)
}

pub(crate) fn eval_into(order: Order, l: [f64; 3], values: &mut [f64], grads: &mut [[f64; 2]]) {
    match order {
        Order::Linear => {
            values[..3].copy_from_slice(&l);
            grads[..3].copy_from_slice(&BARY_GRAD);
        }
        Order::Quadratic => {
            for i in 0..3 {
                values[i] = l[i] * (2.0 * l[i] - 1.0);
                let s = 4.0 * l[i] - 1.0;
                grads[i] = [s * BARY_GRAD[i][0], s * BARY_GRAD[i][1]];
            }
            for (k, &[i, j]) in EDGE_VERTS.iter().enumerate() {
                values[3 + k] = 4.0 * l[i] * l[j];
                grads[3 + k] = [
                    4.0 * (l[j] * BARY_GRAD[i][0] + l[i] * BARY_GRAD[j][0]),
                    4.0 * (l[j] * BARY_GRAD[i][1] + l[i] * BARY_GRAD[j][1]),
                ];
            }
        }
    }
}

/// Values only, from barycentric coordinates.
pub(crate) fn values_at(order: Order, l: [f64; 3], values: &mut [f64]) {
    match order {
        Order::Linear => values[..3].copy_from_slice(&l),
        Order::Quadratic => {
            for i in 0..3 {
                values[i] = l[i] * (2.0 * l[i] - 1.0);
            }
            for (k, &[i, j]) in EDGE_VERTS.iter().enumerate() {
                values[3 + k] = 4.0 * l[i] * l[j];
            }
        }
    }
}
