//! Weak forms of -(mu u')' - rho omega^2 u on a 1D mesh.

use num_complex::Complex64;

use super::banded::BandedMatrix;
use super::mesh1d::{lagrange_basis, FeFunction1D, Mesh1D};
use super::quadrature::gauss_legendre;

/// Matrix of the sesquilinear form int mu u' v' - rho omega^2 u v with
/// entries A[p, q] = a(phi_q, phi_p). Coefficients are sampled at Gauss points,
/// `order + 2` per element.
pub fn assemble_helmholtz_1d<M, R>(mesh: &Mesh1D, mu: M, rho: R, omega: Complex64) -> BandedMatrix
where
    M: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    let d = mesh.order();
    let mut a = BandedMatrix::zeros(mesh.n_dofs(), d, d);
    let w2 = omega * omega;
    let (xs, ws) = gauss_legendre(d + 2);
    let mut vals = [0.0; 9];
    let mut ders = [0.0; 9];
    let mut ke = [[Complex64::new(0.0, 0.0); 9]; 9];
    for e in 0..mesh.n_elements() {
        let (x0, x1) = mesh.element(e);
        let h = x1 - x0;
        for row in ke.iter_mut().take(d + 1) {
            row[..=d].fill(Complex64::new(0.0, 0.0));
        }
        for (xi, w) in xs.iter().zip(&ws) {
            let x = x0 + h * xi;
            lagrange_basis(d, *xi, &mut vals, &mut ders);
            let m = mu(x) * w / h;
            let r = w2 * (-rho(x) * w * h);
            for p in 0..=d {
                for q in 0..=d {
                    ke[p][q] += m * ders[p] * ders[q] + r * (vals[p] * vals[q]);
                }
            }
        }
        for p in 0..=d {
            for q in 0..=d {
                a.add(mesh.dof(e, p), mesh.dof(e, q), ke[p][q]);
            }
        }
    }
    a
}

/// Load vector int f v with an `order`-point Gauss rule per element.
pub fn assemble_load<F>(mesh: &Mesh1D, f: F, order: usize) -> Vec<Complex64>
where
    F: Fn(f64) -> f64,
{
    let d = mesh.order();
    let mut b = vec![Complex64::new(0.0, 0.0); mesh.n_dofs()];
    let (xs, ws) = gauss_legendre(order);
    let mut vals = [0.0; 9];
    let mut ders = [0.0; 9];
    for e in 0..mesh.n_elements() {
        let (x0, x1) = mesh.element(e);
        let h = x1 - x0;
        for (xi, w) in xs.iter().zip(&ws) {
            let fx = f(x0 + h * xi);
            if fx == 0.0 {
                continue;
            }
            lagrange_basis(d, *xi, &mut vals, &mut ders);
            for p in 0..=d {
                b[mesh.dof(e, p)] += Complex64::new(fx * vals[p] * w * h, 0.0);
            }
        }
    }
    b
}

/// int_mesh mu u' conj(v)' - rho omega^2 u conj(v), by Gauss quadrature.
pub fn sesquilinear_form<M, R>(u: &FeFunction1D, v: &FeFunction1D, mu: M, rho: R, omega: Complex64) -> Complex64
where
    M: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    assert_eq!(u.mesh, v.mesh, "forms need a shared mesh");
    let mesh = &u.mesh;
    let (xs, ws) = gauss_legendre(mesh.order() + 2);
    let w2 = omega * omega;
    let mut total = Complex64::new(0.0, 0.0);
    for e in 0..mesh.n_elements() {
        let (x0, x1) = mesh.element(e);
        let h = x1 - x0;
        for (xi, w) in xs.iter().zip(&ws) {
            let x = x0 + h * xi;
            let (uv, ud) = u.eval_on(e, x);
            let (vv, vd) = v.eval_on(e, x);
            total += (ud * vd.conj() * mu(x) - uv * vv.conj() * w2 * rho(x)) * (w * h);
        }
    }
    total
}
