use std::sync::Arc;

use super::basis::{self, Order};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Continuous nodal P1 or P2 space, scalar or 2-vector valued.
///
/// Scalar dofs are the mesh vertices followed (for P2) by the edge midpoints
/// in edge-id order. Vector dofs interleave the components:
/// `2 * node + component`.
#[derive(Debug, Clone)]
pub struct FeSpace {
    order: Order,
    components: usize,
    mesh: Arc<Mesh>,
    node_coords: Vec<Point>,
    boundary_dofs: Vec<usize>,
    boundary_mask: Vec<bool>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, order: Order, components: usize) -> Result<Self> {
        if components != 1 && components != 2 {
            return Err(Error::SpaceMismatch(format!(
                "only scalar or 2-vector spaces, got {components} components"
            )));
        }
        let mut node_coords = mesh.vertices.clone();
        let mut node_on_boundary = mesh.boundary_vertex.clone();
        if order == Order::Quadratic {
            node_coords.extend(mesh.edge_midpoints());
            node_on_boundary.extend_from_slice(&mesh.boundary_edge);
        }
        let mut boundary_mask = Vec::with_capacity(node_coords.len() * components);
        for &b in &node_on_boundary {
            for _ in 0..components {
                boundary_mask.push(b);
            }
        }
        let boundary_dofs = boundary_mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        Ok(FeSpace {
            order,
            components,
            mesh,
            node_coords,
            boundary_dofs,
            boundary_mask,
        })
    }

    pub fn scalar(mesh: Arc<Mesh>, order: Order) -> Self {
        Self::new(mesh, order, 1).expect("scalar space")
    }

    pub fn vector(mesh: Arc<Mesh>, order: Order) -> Self {
        Self::new(mesh, order, 2).expect("vector space")
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn num_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn dof_count(&self) -> usize {
        self.node_coords.len() * self.components
    }

    /// Coordinates of each scalar node.
    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    pub fn is_boundary_dof(&self, dof: usize) -> bool {
        self.boundary_mask[dof]
    }

    pub fn same_mesh(&self, other: &FeSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    /// Scalar node ids of triangle `t` in local basis order.
    pub fn element_nodes(&self, t: usize) -> ([usize; 6], usize) {
        let tri = self.mesh.triangles[t];
        let mut nodes = [0usize; 6];
        nodes[..3].copy_from_slice(&tri);
        match self.order {
            Order::Linear => (nodes, 3),
            Order::Quadratic => {
                let nv = self.mesh.num_vertices();
                for (k, &e) in self.mesh.triangle_edges[t].iter().enumerate() {
                    nodes[3 + k] = nv + e;
                }
                (nodes, 6)
            }
        }
    }

    pub(crate) fn check_len(&self, len: usize, what: &'static str) -> Result<()> {
        if len != self.dof_count() {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.dof_count(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Affine map data for one triangle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub area: f64,
    /// Inverse-transpose Jacobian; maps reference gradients to physical ones.
    pub jit: [[f64; 2]; 2],
}

impl Geometry {
    pub fn of(mesh: &Mesh, t: usize) -> Self {
        let [a, b, c] = mesh.triangle_coords(t);
        let jac = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jit = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Geometry {
            origin: a,
            jac,
            area: 0.5 * det,
            jit,
        }
    }

    pub fn map(&self, xi: f64, eta: f64) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xi + self.jac[0][1] * eta,
            self.origin[1] + self.jac[1][0] * xi + self.jac[1][1] * eta,
        ]
    }

    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.jit[0][0] * g[0] + self.jit[0][1] * g[1],
            self.jit[1][0] * g[0] + self.jit[1][1] * g[1],
        ]
    }
}

/// Coefficient vector tied to its space.
#[derive(Debug, Clone)]
pub struct Field {
    pub values: Vec<f64>,
    pub space: Arc<FeSpace>,
}

impl Field {
    pub fn new(space: Arc<FeSpace>, values: Vec<f64>) -> Result<Self> {
        space.check_len(values.len(), "field coefficients")?;
        Ok(Field { values, space })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        Field {
            values: vec![0.0; space.dof_count()],
            space,
        }
    }

    /// Point value(s) of the field; `out` receives one entry per component.
    pub fn eval_into(&self, p: Point, out: &mut [f64]) {
        let sp = &self.space;
        let (t, l) = sp.mesh.locate(p);
        let (nodes, n) = sp.element_nodes(t);
        let mut phi = [0.0; 6];
        basis::values_at(sp.order, l, &mut phi);
        let nc = sp.components;
        for (c, o) in out.iter_mut().enumerate().take(nc) {
            *o = (0..n).map(|k| phi[k] * self.values[nc * nodes[k] + c]).sum();
        }
    }

    pub fn eval_scalar(&self, p: Point) -> f64 {
        let mut v = [0.0; 2];
        self.eval_into(p, &mut v);
        v[0]
    }

    pub fn eval_vector(&self, p: Point) -> [f64; 2] {
        let mut v = [0.0; 2];
        self.eval_into(p, &mut v);
        v
    }

    /// Values at the mesh vertices (component-interleaved for vector fields).
    pub fn vertex_values(&self) -> &[f64] {
        let nv = self.space.mesh.num_vertices();
        &self.values[..nv * self.space.components]
    }
}

/// Lagrange interpolation: `f(point, out)` writes one value per component.
pub fn interpolate(space: &Arc<FeSpace>, f: impl Fn(Point, &mut [f64])) -> Field {
    let nc = space.components();
    let mut values = vec![0.0; space.dof_count()];
    for (node, &p) in space.node_coords().iter().enumerate() {
        f(p, &mut values[nc * node..nc * node + nc]);
    }
    Field {
        values,
        space: Arc::clone(space),
    }
}

pub fn interpolate_scalar(space: &Arc<FeSpace>, f: impl Fn(Point) -> f64) -> Field {
    interpolate(space, |p, out| out[0] = f(p))
}

pub fn interpolate_vector(space: &Arc<FeSpace>, f: impl Fn(Point) -> [f64; 2]) -> Field {
    interpolate(space, |p, out| out.copy_from_slice(&f(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, Rect};

    fn mesh(n: usize) -> Arc<Mesh> {
        Arc::new(build_rect_mesh(n, n, Rect::UNIT).unwrap())
    }

    #[test]
    fn dof_counts() {
        let m = mesh(3);
        let p1 = FeSpace::scalar(Arc::clone(&m), Order::Linear);
        let p2 = FeSpace::scalar(Arc::clone(&m), Order::Quadratic);
        let v2 = FeSpace::vector(Arc::clone(&m), Order::Quadratic);
        assert_eq!(p1.dof_count(), m.num_vertices());
        assert_eq!(p2.dof_count(), m.num_vertices() + m.num_edges());
        assert_eq!(v2.dof_count(), 2 * p2.dof_count());
        assert_eq!(p2.boundary_dofs().len(), 4 * 6);
        for &d in v2.boundary_dofs() {
            assert!(m.bounds.on_boundary(v2.node_coords()[d / 2]));
        }
        assert_eq!(v2.boundary_dofs().len(), 2 * p2.boundary_dofs().len());
        assert!(FeSpace::new(m, Order::Linear, 3).is_err());
    }

    #[test]
    fn zero_interpolates_to_zero() {
        let sp = Arc::new(FeSpace::scalar(mesh(2), Order::Quadratic));
        let f = interpolate_scalar(&sp, |_| 0.0);
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_functions_reproduced_everywhere() {
        let m = mesh(5);
        let f = |p: Point| 2.0 * p[0] - 3.0 * p[1] + 0.5;
        for order in [Order::Linear, Order::Quadratic] {
            let sp = Arc::new(FeSpace::scalar(Arc::clone(&m), order));
            let fh = interpolate_scalar(&sp, f);
            for &p in &[[0.13, 0.77], [0.5, 0.5], [0.999, 0.001], [0.31, 0.62]] {
                assert!((fh.eval_scalar(p) - f(p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_interpolation_error() {
        let n = 4;
        let m = mesh(n);
        let h = 1.0 / n as f64;
        let f = |p: Point| p[0] * p[0];
        let p2 = Arc::new(FeSpace::scalar(Arc::clone(&m), Order::Quadratic));
        let p1 = Arc::new(FeSpace::scalar(Arc::clone(&m), Order::Linear));
        let f2 = interpolate_scalar(&p2, f);
        let f1 = interpolate_scalar(&p1, f);
        for &p in &[[0.3, 0.2], [0.71, 0.9]] {
            assert!((f2.eval_scalar(p) - f(p)).abs() < 1e-12);
        }
        // Midpoint of a horizontal edge of length h: chord error h²/8 · f''.
        let mid = [0.25 + 0.5 * h, 0.5];
        let err = f1.eval_scalar(mid) - f(mid);
        assert!((err - h * h / 8.0 * 2.0).abs() < 1e-12);
    }
}
