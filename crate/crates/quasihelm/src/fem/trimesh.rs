//! Structured triangle mesh of the unit square, periodic in y1.

use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use super::quadrature::TRIANGLE_RULE;
use crate::error::{Error, Result};
use crate::media::PeriodicMedium;

/// m x m squares, each split along the diagonal from (i, j) to (i+1, j+1).
/// Vertices with i = m are identified with i = 0, so there are m (m + 1) dofs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicTriMesh {
    m: usize,
}

impl PeriodicTriMesh {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("fem-core", "triangle mesh needs m >= 2"));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_dofs(&self) -> usize {
        self.m * (self.m + 1)
    }

    /// Dof of vertex (i/m, j/m).
    pub fn dof(&self, i: usize, j: usize) -> usize {
        j * self.m + i % self.m
    }

    pub fn vertex(&self, dof: usize) -> [f64; 2] {
        let (j, i) = (dof / self.m, dof % self.m);
        [i as f64 / self.m as f64, j as f64 / self.m as f64]
    }

    /// Triangles as vertex index triples (i, j) in counterclockwise order.
    pub fn triangles(&self) -> impl Iterator<Item = [(usize, usize); 3]> + '_ {
        (0..self.m).flat_map(move |j| {
            (0..self.m).flat_map(move |i| {
                [
                    [(i, j), (i + 1, j), (i + 1, j + 1)],
                    [(i, j), (i + 1, j + 1), (i, j + 1)],
                ]
            })
        })
    }

    /// Barycentric location of y inside the mesh: three (dof, weight) pairs.
    /// y1 is reduced mod 1 and y2 clamped to [0, 1].
    pub fn locate(&self, y: [f64; 2]) -> [(usize, f64); 3] {
        let m = self.m as f64;
        let t1 = crate::media::wrap_unit(y[0]) * m;
        let t2 = y[1].clamp(0.0, 1.0) * m;
        let i = (t1.floor() as usize).min(self.m - 1);
        let j = (t2.floor() as usize).min(self.m - 1);
        let (a, b) = (t1 - i as f64, t2 - j as f64);
        if a >= b {
            [
                (self.dof(i, j), 1.0 - a),
                (self.dof(i + 1, j), a - b),
                (self.dof(i + 1, j + 1), b),
            ]
        } else {
            [
                (self.dof(i, j), 1.0 - b),
                (self.dof(i + 1, j + 1), a),
                (self.dof(i, j + 1), b - a),
            ]
        }
    }
}

/// Matrix of int mu (theta . grad u)(theta . grad v) - rho omega^2 u v as triplets,
/// A[p, q] = a(phi_q, phi_p). Duplicate positions are meant to be summed.
pub fn directional_helmholtz_triplets(
    mesh: &PeriodicTriMesh,
    medium: &PeriodicMedium,
    omega: Complex64,
) -> Vec<Triplet<usize, usize, Complex64>> {
    let m = mesh.m() as f64;
    let h = 1.0 / m;
    let area = 0.5 * h * h;
    let (t1, t2) = (medium.theta.theta1(), medium.theta.theta2());
    let w2 = omega * omega;
    let mut out = Vec::with_capacity(mesh.n_dofs() * 2 * 9);
    for tri in mesh.triangles() {
        let p: Vec<[f64; 2]> = tri.iter().map(|&(i, j)| [i as f64 * h, j as f64 * h]).collect();
        // gradients of the barycentric coordinates
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let grads = [
            [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
            [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
            [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
        ];
        let dir: Vec<f64> = grads.iter().map(|g| t1 * g[0] + t2 * g[1]).collect();
        let mut int_mu = 0.0;
        let mut mass = [[0.0; 3]; 3];
        for (l, w) in TRIANGLE_RULE.iter() {
            let y1 = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
            let y2 = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
            int_mu += w * medium.mu.evaluate(y1, y2);
            let r = w * medium.rho.evaluate(y1, y2);
            for a in 0..3 {
                for b in 0..3 {
                    mass[a][b] += r * l[a] * l[b];
                }
            }
        }
        let dofs: Vec<usize> = tri.iter().map(|&(i, j)| mesh.dof(i, j)).collect();
        for a in 0..3 {
            for b in 0..3 {
                let v = Complex64::new(int_mu * dir[a] * dir[b] * area, 0.0) - w2 * (mass[a][b] * area);
                out.push(Triplet::new(dofs[a], dofs[b], v));
            }
        }
    }
    out
}

pub fn directional_helmholtz_2d(
    mesh: &PeriodicTriMesh,
    medium: &PeriodicMedium,
    omega: Complex64,
) -> Result<SparseColMat<usize, Complex64>> {
    let n = mesh.n_dofs();
    let t = directional_helmholtz_triplets(mesh, medium, omega);
    SparseColMat::try_new_from_triplets(n, n, &t).map_err(|e| Error::invalid("fem-core", format!("{e:?}")))
}
