use super::assembly::Tabulation;
use super::space::{Field, Geometry};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldNorms {
    pub l2: f64,
    pub h1_semi: f64,
    /// `‖∇·u‖`, vector fields only.
    pub div_l2: Option<f64>,
    /// `‖∂x u₂ − ∂y u₁‖`, vector fields only.
    pub curl_l2: Option<f64>,
}

/// L², H¹-seminorm and (vector fields) divergence and curl norms, by
/// quadrature that is exact for P2 data.
pub fn field_norms(field: &Field) -> FieldNorms {
    let sp = &field.space;
    let mesh = sp.mesh();
    let tab = Tabulation::new(sp.order());
    let nc = sp.components();
    let n = tab.n;
    let (mut l2, mut h1, mut div, mut curl) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let geo = Geometry::of(mesh, t);
        let (nodes, _) = sp.element_nodes(t);
        for q in 0..7 {
            let w = tab.weights[q] * geo.area;
            let mut val = [0.0; 2];
            let mut grad = [[0.0; 2]; 2];
            for k in 0..n {
                let g = geo.grad(tab.grads[q][k]);
                for c in 0..nc {
                    let a = field.values[nc * nodes[k] + c];
                    val[c] += a * tab.values[q][k];
                    grad[c][0] += a * g[0];
                    grad[c][1] += a * g[1];
                }
            }
            for c in 0..nc {
                l2 += w * val[c] * val[c];
                h1 += w * (grad[c][0] * grad[c][0] + grad[c][1] * grad[c][1]);
            }
            if nc == 2 {
                let d = grad[0][0] + grad[1][1];
                let r = grad[1][0] - grad[0][1];
                div += w * d * d;
                curl += w * r * r;
            }
        }
    }
    FieldNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        div_l2: (nc == 2).then(|| div.sqrt()),
        curl_l2: (nc == 2).then(|| curl.sqrt()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::{assemble_mass, assemble_stiffness};
    use crate::fem::basis::Order;
    use crate::fem::space::{interpolate_scalar, interpolate_vector, FeSpace};
    use crate::mesh::{build_rect_mesh, Rect};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn zero_field() {
        let m = Arc::new(build_rect_mesh(2, 2, Rect::UNIT).unwrap());
        let v = Arc::new(FeSpace::vector(m, Order::Quadratic));
        let n = field_norms(&Field::zeros(v));
        assert_eq!((n.l2, n.h1_semi, n.div_l2), (0.0, 0.0, Some(0.0)));
    }

    #[test]
    fn linear_scalar_field() {
        let m = Arc::new(build_rect_mesh(3, 3, Rect::UNIT).unwrap());
        let a = Arc::new(FeSpace::scalar(m, Order::Quadratic));
        let f = interpolate_scalar(&a, |p| p[0]);
        let n = field_norms(&f);
        assert_relative_eq!(n.l2, (1.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(n.h1_semi, 1.0, epsilon = 1e-12);
        assert_eq!(n.div_l2, None);
        // Agrees with the matrix route.
        let mm = assemble_mass(&a);
        let kk = assemble_stiffness(&a);
        assert_relative_eq!(n.l2.powi(2), mm.bilinear(&f.values, &f.values), epsilon = 1e-13);
        assert_relative_eq!(n.h1_semi.powi(2), kk.bilinear(&f.values, &f.values), epsilon = 1e-13);
    }

    #[test]
    fn rotation_field_is_pure_curl() {
        let m = Arc::new(build_rect_mesh(3, 3, Rect::UNIT).unwrap());
        let v = Arc::new(FeSpace::vector(m, Order::Quadratic));
        let r = interpolate_vector(&v, |p| [-p[1], p[0]]);
        let n = field_norms(&r);
        assert_relative_eq!(n.h1_semi.powi(2), 2.0, epsilon = 1e-12);
        assert_relative_eq!(n.curl_l2.unwrap().powi(2), 4.0, epsilon = 1e-12);
        assert!(n.div_l2.unwrap() < 1e-12);
    }
}
