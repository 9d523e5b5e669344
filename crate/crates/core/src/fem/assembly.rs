//! Element kernels and global assembly of the bilinear forms and load
//! vectors used by the time stepper.
//!
//! 2D curl convention: for a vector field `u`, `curl u = ∂x u₂ − ∂y u₁`
//! (a scalar); for a scalar `w`, `curl w = (∂y w, −∂x w)`. With these,
//! `(curl w, v) = (w, curl v)` for fields vanishing on the boundary, so the
//! momentum-side coupling is the transpose of the angular-side one.

use super::basis::{self, Order};
use super::quadrature::degree5_rule;
use super::space::{FeSpace, Field, Geometry};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::solve::SparseMatrix;

/// Basis values and reference gradients tabulated at the quadrature points.
pub(crate) struct Tabulation {
    pub weights: [f64; 7],
    pub points: [(f64, f64); 7],
    pub values: [[f64; 6]; 7],
    pub grads: [[[f64; 2]; 6]; 7],
    pub n: usize,
}

impl Tabulation {
    pub fn new(order: Order) -> Self {
        let rule = degree5_rule();
        let mut tab = Tabulation {
            weights: [0.0; 7],
            points: [(0.0, 0.0); 7],
            values: [[0.0; 6]; 7],
            grads: [[[0.0; 2]; 6]; 7],
            n: order.local_dofs(),
        };
        for (q, qp) in rule.iter().enumerate() {
            tab.weights[q] = qp.weight;
            tab.points[q] = (qp.xi, qp.eta);
            basis::eval_into(order, qp.barycentric(), &mut tab.values[q], &mut tab.grads[q]);
        }
        tab
    }

    fn physical_grads(&self, geo: &Geometry, q: usize) -> [[f64; 2]; 6] {
        let mut g = [[0.0; 2]; 6];
        for (gi, r) in g.iter_mut().zip(&self.grads[q]).take(self.n) {
            *gi = geo.grad(*r);
        }
        g
    }
}

/// Local matrix `∫_K φ_j φ_i` for one triangle.
pub fn element_mass(mesh: &Mesh, t: usize, order: Order) -> Vec<Vec<f64>> {
    element_matrix(mesh, t, &Tabulation::new(order), |_, v, _, i, j| v[i] * v[j])
}

/// Local matrix `∫_K ∇φ_j · ∇φ_i` for one triangle.
pub fn element_stiffness(mesh: &Mesh, t: usize, order: Order) -> Vec<Vec<f64>> {
    element_matrix(mesh, t, &Tabulation::new(order), |_, _, g, i, j| {
        g[i][0] * g[j][0] + g[i][1] * g[j][1]
    })
}

fn element_matrix(
    mesh: &Mesh,
    t: usize,
    tab: &Tabulation,
    kernel: impl Fn(usize, &[f64; 6], &[[f64; 2]; 6], usize, usize) -> f64,
) -> Vec<Vec<f64>> {
    let geo = Geometry::of(mesh, t);
    let n = tab.n;
    let mut local = vec![vec![0.0; n]; n];
    for q in 0..7 {
        let g = tab.physical_grads(&geo, q);
        let w = tab.weights[q] * geo.area;
        for (i, row) in local.iter_mut().enumerate() {
            for (j, lij) in row.iter_mut().enumerate() {
                *lij += w * kernel(q, &tab.values[q], &g, i, j);
            }
        }
    }
    local
}

/// Scatter per-element scalar matrices, replicated on each component.
fn assemble_scalar_form(
    space: &FeSpace,
    local: impl Fn(&Mesh, usize, &Tabulation) -> Vec<Vec<f64>>,
) -> SparseMatrix {
    let mesh = space.mesh();
    let tab = Tabulation::new(space.order());
    let nc = space.components();
    let n = tab.n;
    let mut trip = Vec::with_capacity(mesh.num_triangles() * n * n * nc);
    for t in 0..mesh.num_triangles() {
        let (nodes, _) = space.element_nodes(t);
        let lm = local(mesh, t, &tab);
        for i in 0..n {
            for j in 0..n {
                for c in 0..nc {
                    trip.push((nc * nodes[i] + c, nc * nodes[j] + c, lm[i][j]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(space.dof_count(), space.dof_count(), &trip, true)
}

/// L² Gram matrix, blockwise per component for vector spaces.
pub fn assemble_mass(space: &FeSpace) -> SparseMatrix {
    assemble_scalar_form(space, |m, t, tab| {
        element_matrix(m, t, tab, |_, v, _, i, j| v[i] * v[j])
    })
}

/// `∫ ∇φ_j · ∇φ_i`, blockwise per component for vector spaces.
pub fn assemble_stiffness(space: &FeSpace) -> SparseMatrix {
    assemble_scalar_form(space, |m, t, tab| {
        element_matrix(m, t, tab, |_, _, g, i, j| {
            g[i][0] * g[j][0] + g[i][1] * g[j][1]
        })
    })
}

fn check_pair(vel: &FeSpace, other: &FeSpace, other_order: Order) -> Result<()> {
    if !vel.same_mesh(other) {
        return Err(Error::MeshMismatch);
    }
    if vel.components() != 2 || vel.order() != Order::Quadratic {
        return Err(Error::SpaceMismatch("velocity space must be vector P2".into()));
    }
    if other.components() != 1 || other.order() != other_order {
        return Err(Error::SpaceMismatch(format!(
            "expected scalar {other_order:?} space"
        )));
    }
    Ok(())
}

/// Mixed form `(test_k, D φ_j)` where `D` maps the 2-vector velocity basis
/// gradients to a scalar. Returns a `test × velocity` matrix.
fn assemble_mixed(
    vel: &FeSpace,
    test: &FeSpace,
    op: impl Fn([f64; 2], usize) -> f64,
) -> SparseMatrix {
    let mesh = vel.mesh();
    let tv = Tabulation::new(Order::Quadratic);
    let tt = Tabulation::new(test.order());
    let mut trip = Vec::new();
    for t in 0..mesh.num_triangles() {
        let geo = Geometry::of(mesh, t);
        let (vn, _) = vel.element_nodes(t);
        let (qn, nq) = test.element_nodes(t);
        let mut local = [[[0.0; 2]; 6]; 6];
        for q in 0..7 {
            let g = tv.physical_grads(&geo, q);
            let w = tv.weights[q] * geo.area;
            for a in 0..nq {
                let psi = tt.values[q][a];
                for j in 0..6 {
                    for c in 0..2 {
                        local[a][j][c] += w * psi * op(g[j], c);
                    }
                }
            }
        }
        for a in 0..nq {
            for j in 0..6 {
                for c in 0..2 {
                    trip.push((qn[a], 2 * vn[j] + c, local[a][j][c]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(test.dof_count(), vel.dof_count(), &trip, false)
}

/// `B_qj = ∫ q ∇·φ_j` (pressure × velocity).
pub fn assemble_div(vel: &FeSpace, pres: &FeSpace) -> Result<SparseMatrix> {
    check_pair(vel, pres, Order::Linear)?;
    Ok(assemble_mixed(vel, pres, |g, c| g[c]))
}

/// `C_kj = ∫ ψ_k curl φ_j` (angular × velocity).
pub fn assemble_curl(vel: &FeSpace, ang: &FeSpace) -> Result<SparseMatrix> {
    check_pair(vel, ang, Order::Quadratic)?;
    Ok(assemble_mixed(vel, ang, |g, c| if c == 0 { -g[1] } else { g[0] }))
}

/// `N_i = ∫ (transport · ∇ advected) φ_i` with `φ_i` ranging over the test
/// space (same space as `advected`). The integrand has degree 5 for P2 data,
/// so the quadrature is exact.
pub fn assemble_convection_load(
    transport: &Field,
    advected: &Field,
    test_space: &FeSpace,
) -> Result<Vec<f64>> {
    let ts = &transport.space;
    let asp = &advected.space;
    if ts.components() != 2 || ts.order() != Order::Quadratic {
        return Err(Error::SpaceMismatch("transport must be a vector P2 field".into()));
    }
    if !ts.same_mesh(asp) || !asp.same_mesh(test_space) {
        return Err(Error::MeshMismatch);
    }
    if asp.order() != Order::Quadratic
        || test_space.order() != asp.order()
        || test_space.components() != asp.components()
    {
        return Err(Error::SpaceMismatch(
            "test space must match the advected field's P2 space".into(),
        ));
    }

    let mesh = ts.mesh();
    let tab = Tabulation::new(Order::Quadratic);
    let nc = asp.components();
    let mut out = vec![0.0; test_space.dof_count()];
    let tv = &transport.values;
    let av = &advected.values;
    for t in 0..mesh.num_triangles() {
        let geo = Geometry::of(mesh, t);
        let (nodes, _) = ts.element_nodes(t);
        let mut local = [[0.0; 2]; 6];
        for q in 0..7 {
            let g = tab.physical_grads(&geo, q);
            let phi = &tab.values[q];
            let mut u = [0.0; 2];
            for k in 0..6 {
                u[0] += phi[k] * tv[2 * nodes[k]];
                u[1] += phi[k] * tv[2 * nodes[k] + 1];
            }
            let w = tab.weights[q] * geo.area;
            for c in 0..nc {
                let mut grad = [0.0; 2];
                for k in 0..6 {
                    let a = av[nc * nodes[k] + c];
                    grad[0] += a * g[k][0];
                    grad[1] += a * g[k][1];
                }
                let adv = u[0] * grad[0] + u[1] * grad[1];
                for i in 0..6 {
                    local[i][c] += w * adv * phi[i];
                }
            }
        }
        for i in 0..6 {
            for c in 0..nc {
                out[nc * nodes[i] + c] += local[i][c];
            }
        }
    }
    Ok(out)
}

/// `F_i = ∫ f(x, t) · φ_i`; `f(point, t, out)` writes one value per component.
pub fn assemble_load(space: &FeSpace, t: f64, f: impl Fn(Point, f64, &mut [f64])) -> Vec<f64> {
    let mesh = space.mesh();
    let tab = Tabulation::new(space.order());
    let nc = space.components();
    let n = tab.n;
    let mut out = vec![0.0; space.dof_count()];
    let mut val = [0.0; 2];
    for tri in 0..mesh.num_triangles() {
        let geo = Geometry::of(mesh, tri);
        let (nodes, _) = space.element_nodes(tri);
        for q in 0..7 {
            let (xi, eta) = tab.points[q];
            val.fill(0.0);
            f(geo.map(xi, eta), t, &mut val[..nc]);
            let w = tab.weights[q] * geo.area;
            for i in 0..n {
                for c in 0..nc {
                    out[nc * nodes[i] + c] += w * val[c] * tab.values[q][i];
                }
            }
        }
    }
    out
}
