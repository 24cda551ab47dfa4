//! Half-guide propagation: DtN coefficient and reconstruction of the
//! half-line solution from the propagation operator.

use faer::Mat;
use num_complex::Complex64;

use crate::cell1d::{cell_mesh, dtn_quad_quasi1d, solve_cell_problems_1d, solve_cells_quasi1d, Quasi1dCells, TEvaluation};
use crate::cell2d::CellProblem2D;
use crate::error::{Error, Result};
use crate::fem::{FeFunction1D, Mesh1D, TransverseSpace};
use crate::media::{s_theta, wrap_unit, Frequency, PeriodicMedium};
use crate::riccati::{
    cyclic_reduction, dense_solve, select_and_build, solve_qep, solve_qep_linearized, DtnQuad, Linearization, Propagator,
    QepSpectrum, PENCIL_SINGULAR_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// 1D cell problems along lines, transverse Lagrange space of order d.
    Quasi1d,
    /// P1 triangles on the periodicity cell.
    TwoD,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Quasi1d => "quasi1d",
            Method::TwoD => "2d",
        })
    }
}

/// How P is obtained from the DtN matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Companion pencil, then Psi diag(lambda) Psi^{-1}.
    Spectral,
    /// Cayley pencil for the spectrum, cyclic reduction for P. Needed by the
    /// 2D method, whose T10 is numerically singular beyond a handful of
    /// transverse elements.
    CyclicReduction,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Spectral => "spectral",
            Backend::CyclicReduction => "cyclic-reduction",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfGuideOptions {
    pub method: Method,
    /// Transverse mesh size; the space has round(1/h) elements.
    pub h: f64,
    /// Cut-direction mesh size of the 1D cells (quasi-1D only).
    pub h_theta: f64,
    /// Element order of the quasi-1D spaces.
    pub order: usize,
    pub t_evaluation: TEvaluation,
    pub backend: Backend,
}

impl HalfGuideOptions {
    pub fn new(method: Method, h: f64) -> Self {
        Self {
            method,
            h,
            h_theta: h,
            order: 1,
            t_evaluation: TEvaluation::Interpolated,
            backend: match method {
                Method::Quasi1d => Backend::Spectral,
                Method::TwoD => Backend::CyclicReduction,
            },
        }
    }

    fn transverse_elements(&self) -> Result<usize> {
        if !(self.h > 0.0 && self.h <= 0.5) {
            return Err(Error::invalid("halfguide", format!("mesh size {} outside (0, 0.5]", self.h)));
        }
        Ok((1.0 / self.h).round() as usize)
    }
}

enum Cells {
    Quasi1d(Quasi1dCells),
    TwoD(CellProblem2D),
}

/// Everything needed to propagate face data along the half-guide.
pub struct HalfGuideOperator {
    pub medium: PeriodicMedium,
    pub omega: Frequency,
    pub options: HalfGuideOptions,
    pub quad: DtnQuad,
    pub spectrum: QepSpectrum,
    pub propagator: Propagator,
    space: TransverseSpace,
    mass: Mat<Complex64>,
    cells: Cells,
}

impl std::fmt::Debug for HalfGuideOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HalfGuideOperator")
            .field("options", &self.options)
            .field("dim", &self.space.dim())
            .finish_non_exhaustive()
    }
}

impl HalfGuideOperator {
    pub fn build(medium: &PeriodicMedium, omega: Frequency, options: HalfGuideOptions) -> Result<Self> {
        let n_el = options.transverse_elements()?;
        let (cells, quad, space) = match options.method {
            Method::Quasi1d => {
                let space = TransverseSpace::uniform(n_el, options.order)?;
                let mesh = cell_mesh(medium, options.h_theta, options.order)?;
                let cells = solve_cells_quasi1d(medium, omega, &space, &mesh)?;
                let quad = dtn_quad_quasi1d(medium, omega, &cells, options.t_evaluation)?;
                (Cells::Quasi1d(cells), quad, space)
            }
            Method::TwoD => {
                let cell = CellProblem2D::new(medium, omega, n_el)?;
                let quad = cell.dtn_quad();
                let space = cell.space().clone();
                (Cells::TwoD(cell), quad, space)
            }
        };
        let (spectrum, propagator) = match options.backend {
            Backend::Spectral => {
                let spectrum = solve_qep(&quad)?;
                let propagator = select_and_build(&spectrum, &quad)?;
                (spectrum, propagator)
            }
            Backend::CyclicReduction => {
                let spectrum = solve_qep_linearized(&quad, Linearization::Cayley, PENCIL_SINGULAR_TOL)?;
                let propagator = cyclic_reduction(&spectrum, &quad)?;
                (spectrum, propagator)
            }
        };
        Ok(Self {
            medium: medium.clone(),
            omega,
            options,
            mass: space.mass_matrix(),
            quad,
            spectrum,
            propagator,
            space,
            cells,
        })
    }

    pub fn space(&self) -> &TransverseSpace {
        &self.space
    }

    pub fn spectral_radius(&self) -> f64 {
        self.propagator.spectral_radius()
    }

    /// Weak-form DtN vector (T00 + T10 P) phi.
    pub fn dtn_vector(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let n = self.space.dim();
        let x = Mat::<Complex64>::from_fn(n, 1, |i, _| phi[i]);
        let px = &self.propagator.p * &x;
        let y = &self.quad.t00 * &x + &self.quad.t10 * &px;
        (0..n).map(|i| y[(i, 0)]).collect()
    }

    /// DtN coefficient lambda = (Lambda phi)(0) / theta2, with the point value
    /// taken from the L2 Riesz representative of the weak-form vector.
    pub fn dtn_coefficient(&self, phi: &[Complex64]) -> Result<Complex64> {
        let b = self.dtn_vector(phi);
        let c = dense_solve(&self.mass, &b);
        let lambda = c[0] / self.medium.theta.theta2();
        if !(lambda.im < 0.0) {
            return Err(Error::NonphysicalSign { lambda });
        }
        Ok(lambda)
    }

    /// Face traces P^l phi, l = 0..=cells.
    pub fn traces(&self, phi: &[Complex64], cells: usize) -> Vec<Vec<Complex64>> {
        self.propagator.powers(phi, cells)
    }

    /// u(x) = U(x theta) on (0, cells / theta2), as a piecewise polynomial.
    pub fn solve_halfline(&self, phi: &[Complex64], cells: usize) -> Result<FeFunction1D> {
        if cells == 0 {
            return Err(Error::invalid("halfguide", "need at least one cell"));
        }
        let traces = self.traces(phi, cells);
        let th = self.medium.theta;
        let len = th.cell_length();
        let shift = th.shift();
        let mut out: Option<FeFunction1D> = None;
        for l in 0..cells {
            let piece = match &self.cells {
                Cells::Quasi1d(q) => {
                    let s = wrap_unit(l as f64 * shift);
                    let w0 = self.space.evaluate(&traces[l], s);
                    let w1 = self.space.evaluate(&traces[l + 1], s + shift);
                    let c = solve_cell_problems_1d(&self.medium, self.omega, s, &q.mesh)?;
                    let coeffs = c.e0.coeffs.iter().zip(&c.e1.coeffs).map(|(a, b)| a * w0 + b * w1).collect();
                    FeFunction1D::new(c.e0.mesh.shifted(l as f64 * len), coeffs)?
                }
                Cells::TwoD(cell) => {
                    let field = cell.solve(&traces[l], &traces[l + 1]);
                    let x0 = l as f64 * len;
                    let xs = line_crossings(cell.mesh().m(), th.theta1(), th.theta2(), x0, x0 + len);
                    let vals = xs
                        .iter()
                        .map(|&x| cell.evaluate(&field, [wrap_unit(x * th.theta1()), x * th.theta2() - l as f64]))
                        .collect();
                    FeFunction1D::new(Mesh1D::new(xs, 1)?, vals)?
                }
            };
            out = Some(match out {
                None => piece,
                Some(f) => f.concatenate(&piece)?,
            });
        }
        Ok(out.expect("at least one cell"))
    }

    /// U at a point y of cell l (0 <= y2 <= 1), given the face traces.
    pub fn guide_value(&self, traces: &[Vec<Complex64>], l: usize, y: [f64; 2]) -> Complex64 {
        match &self.cells {
            Cells::Quasi1d(q) => {
                let th = self.medium.theta;
                let s = wrap_unit(s_theta(y, &th));
                let x = y[1] / th.theta2();
                let mut buf = Vec::new();
                self.space.basis_at(s, &mut buf);
                let (mut e0, mut e1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for &(p, v, _) in &buf {
                    e0 += q.cells[p].e0.value(x) * v;
                    e1 += q.cells[p].e1.value(x) * v;
                }
                self.space.evaluate(&traces[l], s) * e0 + self.space.evaluate(&traces[l + 1], s + th.shift()) * e1
            }
            Cells::TwoD(cell) => {
                let field = cell.solve(&traces[l], &traces[l + 1]);
                cell.evaluate(&field, y)
            }
        }
    }

    /// Field values on an n x n vertex grid of each of the first `cells` cells,
    /// as (y1, y2 + l, U).
    pub fn guide_field(&self, phi: &[Complex64], cells: usize, n: usize) -> Vec<([f64; 2], Complex64)> {
        let traces = self.traces(phi, cells);
        let mut out = Vec::with_capacity(cells * n * (n + 1));
        for l in 0..cells {
            let field_2d = match &self.cells {
                Cells::TwoD(cell) => Some(cell.solve(&traces[l], &traces[l + 1])),
                Cells::Quasi1d(_) => None,
            };
            let rows = if l + 1 == cells { n + 1 } else { n };
            for j in 0..rows {
                for i in 0..n {
                    let y = [i as f64 / n as f64, j as f64 / n as f64];
                    let v = match (&self.cells, &field_2d) {
                        (Cells::TwoD(cell), Some(f)) => cell.evaluate(f, y),
                        _ => self.guide_value(&traces, l, y),
                    };
                    out.push(([y[0], y[1] + l as f64], v));
                }
            }
        }
        out
    }
}

/// Sorted x in [x0, x1] where the line x theta crosses a mesh line of the
/// m x m triangulation (vertical, horizontal or diagonal).
pub fn line_crossings(m: usize, theta1: f64, theta2: f64, x0: f64, x1: f64) -> Vec<f64> {
    let mut xs = vec![x0, x1];
    let mf = m as f64;
    for rate in [theta1, theta2, (theta2 - theta1).abs()] {
        if rate < 1e-14 {
            continue;
        }
        // crossings at x = k / (m rate)
        let step = 1.0 / (mf * rate);
        let k0 = (x0 / step).floor() as i64;
        let k1 = (x1 / step).ceil() as i64;
        for k in k0..=k1 {
            let x = k as f64 * step;
            if x > x0 && x < x1 {
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    let tol = 1e-12 * (1.0 + x1.abs());
    xs.dedup_by(|a, b| (*a - *b).abs() < tol);
    // keep the end exactly
    if let Some(last) = xs.last_mut() {
        *last = x1;
    }
    if xs.len() >= 2 && (xs[xs.len() - 2] - x1).abs() < tol {
        xs.remove(xs.len() - 2);
    }
    xs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::CutVector;

    fn omega() -> Frequency {
        Frequency::new(Complex64::new(8.0, 0.25)).unwrap()
    }

    #[test]
    fn constant_medium_quasi1d_dtn() {
        let th = CutVector::sixty_degrees();
        let medium = PeriodicMedium::constant(2.0, 0.5, th).unwrap();
        let mut opt = HalfGuideOptions::new(Method::Quasi1d, 1.0 / 16.0);
        opt.h_theta = 2e-3;
        let op = HalfGuideOperator::build(&medium, omega(), opt).unwrap();
        let phi = vec![Complex64::new(1.0, 0.0); op.space().dim()];
        let lam = op.dtn_coefficient(&phi).unwrap();
        let want = -Complex64::new(0.0, 1.0) * omega().value();
        assert!((lam - want).norm() / want.norm() < 1e-3, "{lam} vs {want}");
        // wavenumber omega sqrt(rho/mu) = omega/2
        assert!((op.spectral_radius() - (-0.125 / th.theta2()).exp()).abs() < 1e-4);
        let u = op.solve_halfline(&phi, 3).unwrap();
        assert_eq!(u.value(0.0), Complex64::new(1.0, 0.0));
        let x = 2.1;
        let k = omega().value() * 0.5;
        let exact = (Complex64::new(0.0, 1.0) * k * x).exp();
        assert!((u.value(x) - exact).norm() < 1e-3);
    }

    #[test]
    fn crossings_cover_cell() {
        let th = CutVector::sixty_degrees();
        let xs = line_crossings(4, th.theta1(), th.theta2(), 0.0, th.cell_length());
        assert_eq!(xs[0], 0.0);
        assert_eq!(*xs.last().unwrap(), th.cell_length());
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert!(xs.len() >= 5);
    }

    #[test]
    fn two_d_constant_medium() {
        let th = CutVector::sixty_degrees();
        let medium = PeriodicMedium::constant(1.0, 1.0, th).unwrap();
        let op = HalfGuideOperator::build(&medium, omega(), HalfGuideOptions::new(Method::TwoD, 1.0 / 24.0)).unwrap();
        let phi = vec![Complex64::new(1.0, 0.0); op.space().dim()];
        let lam = op.dtn_coefficient(&phi).unwrap();
        let want = -Complex64::new(0.0, 1.0) * omega().value();
        assert!((lam - want).norm() / want.norm() < 0.05, "{lam} vs {want}");
        let u = op.solve_halfline(&phi, 2).unwrap();
        assert!((u.value(0.0) - 1.0).norm() < 1e-12);
    }
}
