//! Periodic Lagrange space on the unit circle [0, 1).

use faer::Mat;
use num_complex::Complex64;

use super::mesh1d::{lagrange_basis, Mesh1D};
use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};
use crate::media::wrap_unit;

/// Continuous periodic piecewise polynomials of order `d` on a uniform grid of [0, 1).
/// Dof p sits at s_p = p / N with N = elements * d.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseSpace {
    mesh: Mesh1D,
}

impl TransverseSpace {
    pub fn uniform(elements: usize, order: usize) -> Result<Self> {
        if elements * order < 2 {
            return Err(Error::invalid("fem-core", "transverse space needs at least two dofs"));
        }
        Ok(Self {
            mesh: Mesh1D::uniform(0.0, 1.0, elements, order)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.mesh.n_dofs() - 1
    }

    pub fn order(&self) -> usize {
        self.mesh.order()
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    /// Element vertices including both 0 and 1.
    pub fn vertices(&self) -> &[f64] {
        self.mesh.vertices()
    }

    /// Dof positions s_0 .. s_{N-1}.
    pub fn nodes(&self) -> Vec<f64> {
        let mut p = self.mesh.dof_positions();
        p.pop();
        p
    }

    /// Nonzero basis functions at s as (dof, value, d/ds value).
    pub fn basis_at(&self, s: f64, out: &mut Vec<(usize, f64, f64)>) {
        out.clear();
        let s = wrap_unit(s);
        let e = self.mesh.locate(s);
        let (a, b) = self.mesh.element(e);
        let xi = (s - a) / (b - a);
        let mut v = [0.0; 9];
        let mut dv = [0.0; 9];
        let d = self.order();
        lagrange_basis(d, xi, &mut v, &mut dv);
        let n = self.dim();
        for k in 0..=d {
            out.push((self.mesh.dof(e, k) % n, v[k], dv[k] / (b - a)));
        }
    }

    pub fn evaluate(&self, coeffs: &[Complex64], s: f64) -> Complex64 {
        let mut buf = Vec::with_capacity(self.order() + 1);
        self.basis_at(s, &mut buf);
        buf.iter().map(|&(p, v, _)| coeffs[p] * v).sum()
    }

    pub fn interpolate<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes().into_iter().map(f).collect()
    }

    /// Mass matrix M[p, q] = int phi_q phi_p.
    pub fn mass_matrix(&self) -> Mat<Complex64> {
        let n = self.dim();
        let d = self.order();
        let mut m = Mat::<Complex64>::zeros(n, n);
        let (xs, ws) = gauss_legendre(d + 1);
        let mut v = [0.0; 9];
        let mut dv = [0.0; 9];
        for e in 0..self.n_elements() {
            let (a, b) = self.mesh.element(e);
            for (xi, w) in xs.iter().zip(&ws) {
                lagrange_basis(d, *xi, &mut v, &mut dv);
                for p in 0..=d {
                    for q in 0..=d {
                        let (i, j) = (self.mesh.dof(e, p) % n, self.mesh.dof(e, q) % n);
                        m[(i, j)] += Complex64::new(v[p] * v[q] * w * (b - a), 0.0);
                    }
                }
            }
        }
        m
    }
}
