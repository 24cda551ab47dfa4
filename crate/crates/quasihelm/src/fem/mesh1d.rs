//! 1D meshes with continuous Lagrange elements of arbitrary order.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MODULE: &str = "fem-core";

/// Values and derivatives (w.r.t. the reference coordinate) of the order-`d`
/// Lagrange basis on equispaced nodes of [0, 1].
pub fn lagrange_basis(d: usize, xi: f64, values: &mut [f64], derivs: &mut [f64]) {
    debug_assert!(values.len() > d && derivs.len() > d);
    if d == 1 {
        values[0] = 1.0 - xi;
        values[1] = xi;
        derivs[0] = -1.0;
        derivs[1] = 1.0;
        return;
    }
    let node = |k: usize| k as f64 / d as f64;
    for k in 0..=d {
        let mut v = 1.0;
        let mut dv = 0.0;
        for m in 0..=d {
            if m == k {
                continue;
            }
            let denom = node(k) - node(m);
            let factor = (xi - node(m)) / denom;
            dv = dv * factor + v / denom;
            v *= factor;
        }
        values[k] = v;
        derivs[k] = dv;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    vertices: Vec<f64>,
    order: usize,
}

impl Mesh1D {
    pub fn new(vertices: Vec<f64>, order: usize) -> Result<Self> {
        if order == 0 || order > 8 {
            return Err(Error::invalid(MODULE, format!("element order {order} outside 1..=8")));
        }
        if vertices.len() < 2 {
            return Err(Error::invalid(MODULE, "mesh needs at least one element"));
        }
        if vertices.iter().any(|v| !v.is_finite()) || vertices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(MODULE, "mesh vertices must be finite and strictly increasing"));
        }
        Ok(Self { vertices, order })
    }

    pub fn uniform(a: f64, b: f64, elements: usize, order: usize) -> Result<Self> {
        if elements == 0 || !(b > a) {
            return Err(Error::invalid(MODULE, format!("cannot mesh ({a}, {b}) with {elements} elements")));
        }
        let h = (b - a) / elements as f64;
        let mut v: Vec<f64> = (0..=elements).map(|k| a + k as f64 * h).collect();
        v[elements] = b;
        Self::new(v, order)
    }

    /// Mesh of (a, b) with element size at most `h` and a vertex at every breakpoint.
    pub fn fitted(a: f64, b: f64, h: f64, breakpoints: &[f64], order: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(MODULE, format!("mesh size {h} must be positive")));
        }
        let mut knots = vec![a];
        let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|x| *x > a && *x < b).collect();
        inner.sort_by(f64::total_cmp);
        knots.extend(inner);
        knots.push(b);
        knots.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
        let mut v = vec![a];
        for w in knots.windows(2) {
            let n = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
            let step = (w[1] - w[0]) / n as f64;
            for k in 1..n {
                v.push(w[0] + k as f64 * step);
            }
            v.push(w[1]);
        }
        Self::new(v, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn n_elements(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn n_dofs(&self) -> usize {
        self.n_elements() * self.order + 1
    }

    pub fn start(&self) -> f64 {
        self.vertices[0]
    }

    pub fn end(&self) -> f64 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.vertices[e], self.vertices[e + 1])
    }

    /// Global index of local dof `k` on element `e`.
    pub fn dof(&self, e: usize, k: usize) -> usize {
        e * self.order + k
    }

    pub fn dof_position(&self, i: usize) -> f64 {
        let e = (i / self.order).min(self.n_elements() - 1);
        let k = i - e * self.order;
        let (a, b) = self.element(e);
        a + (b - a) * k as f64 / self.order as f64
    }

    pub fn dof_positions(&self) -> Vec<f64> {
        (0..self.n_dofs()).map(|i| self.dof_position(i)).collect()
    }

    /// Element containing x (clamped to the mesh ends).
    pub fn locate(&self, x: f64) -> usize {
        let k = self.vertices.partition_point(|&v| v <= x);
        k.saturating_sub(1).min(self.n_elements() - 1)
    }

    /// Mirror image x -> -x, with dofs renumbered right to left.
    pub fn reflected(&self) -> Self {
        Self {
            vertices: self.vertices.iter().rev().map(|v| -v).collect(),
            order: self.order,
        }
    }

    /// Append `other`, whose first vertex must coincide with our last one.
    pub fn concatenate(&self, other: &Mesh1D) -> Result<Self> {
        if self.order != other.order || (self.end() - other.start()).abs() > 1e-9 * (1.0 + self.end().abs()) {
            return Err(Error::invalid(MODULE, "meshes do not join"));
        }
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices[1..]);
        Self::new(v, self.order)
    }

    /// Same mesh shifted by `dx`.
    pub fn shifted(&self, dx: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v + dx).collect(),
            order: self.order,
        }
    }
}

/// A continuous piecewise polynomial on a [`Mesh1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction1D {
    pub mesh: Mesh1D,
    pub coeffs: Vec<Complex64>,
}

impl FeFunction1D {
    pub fn new(mesh: Mesh1D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != mesh.n_dofs() {
            return Err(Error::invalid(
                MODULE,
                format!("{} coefficients for {} dofs", coeffs.len(), mesh.n_dofs()),
            ));
        }
        Ok(Self { mesh, coeffs })
    }

    /// Value and derivative at x. Outside the mesh the end elements are extrapolated.
    pub fn eval(&self, x: f64) -> (Complex64, Complex64) {
        let e = self.mesh.locate(x);
        self.eval_on(e, x)
    }

    pub fn value(&self, x: f64) -> Complex64 {
        self.eval(x).0
    }

    pub(crate) fn eval_on(&self, e: usize, x: f64) -> (Complex64, Complex64) {
        let d = self.mesh.order;
        let (a, b) = self.mesh.element(e);
        let xi = (x - a) / (b - a);
        let mut vals = [0.0; 9];
        let mut ders = [0.0; 9];
        lagrange_basis(d, xi, &mut vals, &mut ders);
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for k in 0..=d {
            let c = self.coeffs[self.mesh.dof(e, k)];
            v += c * vals[k];
            dv += c * (ders[k] / (b - a));
        }
        (v, dv)
    }

    /// x -> u(-x).
    pub fn reflected(&self) -> Self {
        Self {
            mesh: self.mesh.reflected(),
            coeffs: self.coeffs.iter().rev().copied().collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn shifted(&self, dx: f64) -> Self {
        Self {
            mesh: self.mesh.shifted(dx),
            coeffs: self.coeffs.clone(),
        }
    }

    /// Join with a function starting where this one ends. The shared node
    /// takes the value of `self`.
    pub fn concatenate(&self, other: &FeFunction1D) -> Result<Self> {
        let mesh = self.mesh.concatenate(&other.mesh)?;
        let mut coeffs = self.coeffs.clone();
        coeffs.extend_from_slice(&other.coeffs[1..]);
        Self::new(mesh, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lagrange_partition_of_unity() {
        for d in 1..=5 {
            let mut v = [0.0; 9];
            let mut dv = [0.0; 9];
            for &xi in &[0.0, 0.13, 0.5, 0.97] {
                lagrange_basis(d, xi, &mut v, &mut dv);
                let s: f64 = v[..=d].iter().sum();
                let ds: f64 = dv[..=d].iter().sum();
                assert!((s - 1.0).abs() < 1e-13);
                assert!(ds.abs() < 1e-11);
            }
            for k in 0..=d {
                lagrange_basis(d, k as f64 / d as f64, &mut v, &mut dv);
                for m in 0..=d {
                    let e = if m == k { 1.0 } else { 0.0 };
                    assert!((v[m] - e).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn fitted_mesh_hits_breakpoints() {
        let third = 1.0 / 3.0;
        let m = Mesh1D::fitted(-1.0, 1.0, 0.1, &[-third, 0.0, third], 1).unwrap();
        for b in [-third, 0.0, third] {
            assert!(m.vertices().iter().any(|v| (v - b).abs() < 1e-15));
        }
        assert!(m.vertices().windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-12));
    }

    #[test]
    fn fe_function_reproduces_polynomial() {
        let m = Mesh1D::uniform(0.0, 2.0, 3, 3).unwrap();
        let coeffs = m
            .dof_positions()
            .iter()
            .map(|x| Complex64::new(x * x * x - x, 0.0))
            .collect();
        let f = FeFunction1D::new(m, coeffs).unwrap();
        let (v, d) = f.eval(1.234);
        assert!((v.re - (1.234f64.powi(3) - 1.234)).abs() < 1e-12);
        assert!((d.re - (3.0 * 1.234f64.powi(2) - 1.0)).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn reflection_is_mirror(x in -2.0..0.0f64) {
            let m = Mesh1D::uniform(0.0, 2.0, 7, 2).unwrap();
            let coeffs = m.dof_positions().iter().map(|x| Complex64::new(x.sin(), x.cos())).collect();
            let f = FeFunction1D::new(m, coeffs).unwrap();
            let g = f.reflected();
            prop_assert!((g.value(x) - f.value(-x)).norm() < 1e-12);
        }
    }
}
