//! Structured triangulations of axis-aligned rectangles.
//!
//! Every cell of an `nx × ny` grid is cut along the diagonal from its
//! lower-left to its upper-right corner. Vertices are numbered row by row
//! (`j * (nx + 1) + i`), triangles cell by cell, and edges in order of first
//! appearance while walking the triangles.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        xmin: 0.0,
        xmax: 1.0,
        ymin: 0.0,
        ymax: 1.0,
    };

    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Rect {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    /// The square `(-a, a)²`.
    pub fn centered_square(a: f64) -> Self {
        Rect::new(-a, a, -a, a)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        (p[0] - self.xmin).abs() <= BOUNDARY_TOL
            || (p[0] - self.xmax).abs() <= BOUNDARY_TOL
            || (p[1] - self.ymin).abs() <= BOUNDARY_TOL
            || (p[1] - self.ymax).abs() <= BOUNDARY_TOL
    }

    pub fn clamp(&self, p: Point) -> Point {
        [
            p[0].clamp(self.xmin, self.xmax),
            p[1].clamp(self.ymin, self.ymax),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted vertex pairs; the edge id doubles as the midpoint id.
    pub edges: Vec<[usize; 2]>,
    /// Local edges of each triangle, in the order (v0,v1), (v1,v2), (v2,v0).
    pub triangle_edges: Vec<[usize; 3]>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_edge: Vec<bool>,
    pub bounds: Rect,
    nx: usize,
    ny: usize,
}

/// Uniform `nx × ny` grid over `bounds`, two triangles per cell.
pub fn build_rect_mesh(nx: usize, ny: usize, bounds: Rect) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh(format!(
            "cell counts must be positive, got {nx}×{ny}"
        )));
    }
    if !(bounds.xmin < bounds.xmax && bounds.ymin < bounds.ymax) {
        return Err(Error::InvalidMesh(format!("degenerate bounds {bounds:?}")));
    }

    let dx = bounds.width() / nx as f64;
    let dy = bounds.height() / ny as f64;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        // Pin the last row/column to the exact bound so boundary tests are exact.
        let y = if j == ny {
            bounds.ymax
        } else {
            bounds.ymin + j as f64 * dy
        };
        for i in 0..=nx {
            let x = if i == nx {
                bounds.xmax
            } else {
                bounds.xmin + i as f64 * dx
            };
            vertices.push([x, y]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut triangle_edges = Vec::with_capacity(triangles.len());
    let mut edge_use = Vec::new();
    for tri in &triangles {
        let mut local = [0usize; 3];
        for (k, slot) in local.iter_mut().enumerate() {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = [a.min(b), a.max(b)];
            let id = *edge_ids.entry(key).or_insert_with(|| {
                edges.push(key);
                edge_use.push(0usize);
                edges.len() - 1
            });
            edge_use[id] += 1;
            *slot = id;
        }
        triangle_edges.push(local);
    }

    let boundary_vertex: Vec<bool> = vertices.iter().map(|&p| bounds.on_boundary(p)).collect();
    let boundary_edge = edge_use.iter().map(|&c| c == 1).collect();

    Ok(Mesh {
        vertices,
        triangles,
        edges,
        triangle_edges,
        boundary_vertex,
        boundary_edge,
        bounds,
        nx,
        ny,
    })
}

impl Mesh {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area; positive for counter-clockwise triangles.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        (pb[0] - pa[0]).hypot(pb[1] - pa[1])
    }

    /// Midpoint of every edge, indexed by edge id.
    pub fn edge_midpoints(&self) -> Vec<Point> {
        self.edges
            .iter()
            .map(|&[a, b]| {
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
            })
            .collect()
    }

    pub fn max_edge_length(&self) -> f64 {
        (0..self.num_edges())
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// Triangle containing `p` and the barycentric coordinates of `p` in it.
    ///
    /// Points outside the rectangle are clamped onto it first.
    pub fn locate(&self, p: Point) -> (usize, [f64; 3]) {
        let p = self.bounds.clamp(p);
        let dx = self.bounds.width() / self.nx as f64;
        let dy = self.bounds.height() / self.ny as f64;
        let sx = (p[0] - self.bounds.xmin) / dx;
        let sy = (p[1] - self.bounds.ymin) / dy;
        let i = (sx.floor() as usize).min(self.nx - 1);
        let j = (sy.floor() as usize).min(self.ny - 1);
        let (s, r) = (sx - i as f64, sy - j as f64);
        let cell = j * self.nx + i;
        // Lower triangle (v00, v10, v11) holds s >= r.
        if s >= r {
            (2 * cell, [1.0 - s, s - r, r])
        } else {
            (2 * cell + 1, [1.0 - r, s, r - s])
        }
    }
}
