//! Passive-scalar transport `φ_t + u·∇φ = 0` by one semi-Lagrangian step
//! per time step on P1.
//!
//! Each vertex value is replaced by the old field evaluated at the foot of
//! the backward characteristic. P1 interpolation is a convex combination, so
//! the update obeys a discrete maximum principle.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{FeSpace, Field, Order};
use crate::mesh::Point;

/// A P1 scalar field together with the range of its data.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub field: Field,
    pub min: f64,
    pub max: f64,
}

impl ScalarField {
    pub fn new(field: Field) -> Result<Self> {
        if field.space.order() != Order::Linear || field.space.components() != 1 {
            return Err(Error::SpaceMismatch("transported scalar must be P1".into()));
        }
        let (min, max) = range(&field.values);
        Ok(ScalarField { field, min, max })
    }

    pub fn from_fn(space: &Arc<FeSpace>, f: impl Fn(Point) -> f64) -> Result<Self> {
        Self::new(crate::fem::interpolate_scalar(space, f))
    }

    pub fn values(&self) -> &[f64] {
        &self.field.values
    }

    /// `Σ_T |∇φ| |T|`, the total variation of the P1 field. For a sharp
    /// interface this approximates its length, so it grows as the scalar is
    /// stretched and folded.
    pub fn total_variation(&self) -> f64 {
        let mesh = self.field.space.mesh();
        let v = &self.field.values;
        (0..mesh.num_triangles())
            .map(|t| {
                let [a, b, c] = mesh.triangles[t];
                let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
                let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
                let (db, dc) = (v[b] - v[a], v[c] - v[a]);
                let gx = (db * (pc[1] - pa[1]) - dc * (pb[1] - pa[1])) / det;
                let gy = (dc * (pb[0] - pa[0]) - db * (pc[0] - pa[0])) / det;
                (gx * gx + gy * gy).sqrt() * 0.5 * det.abs()
            })
            .sum()
    }

    /// `∫ |φ − other|`, with the P1 integrand integrated exactly only for
    /// signed differences; used as a deformation measure.
    pub fn l1_distance(&self, other: &ScalarField) -> f64 {
        let mesh = self.field.space.mesh();
        let (a, b) = (&self.field.values, &other.field.values);
        (0..mesh.num_triangles())
            .map(|t| {
                let area = mesh.signed_area(t).abs();
                let s: f64 = mesh.triangles[t].iter().map(|&k| (a[k] - b[k]).abs()).sum();
                area * s / 3.0
            })
            .sum()
    }
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Advance `φ` by one step of length `tau` along `velocity`.
pub fn advect(phi: &ScalarField, velocity: &Field, tau: f64) -> Result<ScalarField> {
    let space = &phi.field.space;
    let mesh = space.mesh();
    if !Arc::ptr_eq(mesh, velocity.space.mesh()) {
        return Err(Error::MeshMismatch);
    }
    if velocity.space.components() != 2 {
        return Err(Error::SpaceMismatch("advecting velocity must be a vector field".into()));
    }
    let u = velocity.vertex_values();
    let old = &phi.field.values;
    let values = mesh
        .vertices
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let (ux, uy) = (u[2 * i], u[2 * i + 1]);
            if ux == 0.0 && uy == 0.0 {
                return old[i];
            }
            let foot = mesh.bounds.clamp([x[0] - tau * ux, x[1] - tau * uy]);
            let (t, lam) = mesh.locate(foot);
            let tri = mesh.triangles[t];
            lam[0] * old[tri[0]] + lam[1] * old[tri[1]] + lam[2] * old[tri[2]]
        })
        .collect();
    ScalarField::new(Field {
        values,
        space: Arc::clone(space),
    })
}
