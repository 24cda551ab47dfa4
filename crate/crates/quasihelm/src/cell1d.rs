//! Quasi-1D local cell problems and the discrete local DtN operators they
//! induce on the transverse space.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{assemble_helmholtz_1d, DirichletSystem, FeFunction1D, Mesh1D, TransverseSpace};
use crate::media::{wrap_unit, Frequency, PeriodicMedium};
use crate::riccati::DtnQuad;

/// The two cell solutions on (0, 1/theta2) along the line through (s, 0):
/// e0 has traces (1, 0), e1 has traces (0, 1).
#[derive(Debug, Clone)]
pub struct CellSolutions1D {
    pub s: f64,
    pub e0: FeFunction1D,
    pub e1: FeFunction1D,
    /// t[j][k] = theta2 * a(e^j, conj e^k)
    pub dtn: [[Complex64; 2]; 2],
}

/// Mesh of the cut-direction cell with element size at most `h`.
pub fn cell_mesh(medium: &PeriodicMedium, h: f64, order: usize) -> Result<Mesh1D> {
    let len = medium.theta.cell_length();
    let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
    Mesh1D::uniform(0.0, len, n, order)
}

pub fn solve_cell_problems_1d(
    medium: &PeriodicMedium,
    omega: Frequency,
    s: f64,
    mesh: &Mesh1D,
) -> Result<CellSolutions1D> {
    let w = omega.value();
    let a = assemble_helmholtz_1d(mesh, |x| medium.mu_trace(s, x), |x| medium.rho_trace(s, x), w);
    let last = mesh.n_dofs() - 1;
    let sys = DirichletSystem::new(a.clone(), &[0, last]).map_err(|e| match e {
        Error::Singular { min_pivot, .. } => Error::Singular {
            module: "cell-dtn-quasi1d",
            min_pivot,
        },
        other => other,
    })?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let e0 = sys.solve(None, &[one, zero]);
    let e1 = sys.solve(None, &[zero, one]);
    let theta2 = medium.theta.theta2();
    let ae = [a.matvec(&e0), a.matvec(&e1)];
    let es = [&e0, &e1];
    let mut dtn = [[zero; 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let pair: Complex64 = es[k].iter().zip(&ae[j]).map(|(ek, r)| ek.conj() * r).sum();
            dtn[j][k] = pair * theta2;
        }
    }
    Ok(CellSolutions1D {
        s,
        e0: FeFunction1D::new(mesh.clone(), e0)?,
        e1: FeFunction1D::new(mesh.clone(), e1)?,
        dtn,
    })
}

/// Cell solutions at every node of the transverse space.
#[derive(Debug, Clone)]
pub struct Quasi1dCells {
    pub space: TransverseSpace,
    pub mesh: Mesh1D,
    pub cells: Vec<CellSolutions1D>,
}

pub fn solve_cells_quasi1d(
    medium: &PeriodicMedium,
    omega: Frequency,
    space: &TransverseSpace,
    mesh: &Mesh1D,
) -> Result<Quasi1dCells> {
    let cells = space
        .nodes()
        .par_iter()
        .map(|&s| solve_cell_problems_1d(medium, omega, s, mesh))
        .collect::<Result<Vec<_>>>()?;
    Ok(Quasi1dCells {
        space: space.clone(),
        mesh: mesh.clone(),
        cells,
    })
}

/// Nodal samples of the local DtN functions t^{jk}(s).
#[derive(Debug, Clone)]
pub struct LocalDtnFunctions {
    pub space: TransverseSpace,
    /// samples[j][k][p] = t^{jk}(s_p)
    pub samples: [[Vec<Complex64>; 2]; 2],
}

impl LocalDtnFunctions {
    /// Interpolated values of all four functions at s.
    pub fn at(&self, s: f64) -> [[Complex64; 2]; 2] {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (j, row) in out.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = self.space.evaluate(&self.samples[j][k], s);
            }
        }
        out
    }
}

pub fn local_dtn_samples(cells: &Quasi1dCells) -> LocalDtnFunctions {
    let pick = |j: usize, k: usize| cells.cells.iter().map(|c| c.dtn[j][k]).collect::<Vec<_>>();
    LocalDtnFunctions {
        space: cells.space.clone(),
        samples: [[pick(0, 0), pick(0, 1)], [pick(1, 0), pick(1, 1)]],
    }
}

/// Assemble T^{jk}[p, q] = int_0^1 t^{jk}(s - k b) phi_q(s + (j - k) b) phi_p(s) ds
/// with b = theta1/theta2. `t_at(s)` returns all four local functions at s.
/// Quadrature: Gauss with 2d+1 points on each piece of the grid united with its
/// shifts by +-b mod 1, which is exact when t is in the space.
pub fn assemble_dtn_quad_quasi1d<F>(space: &TransverseSpace, shift: f64, t_at: F) -> DtnQuad
where
    F: Fn(f64) -> [[Complex64; 2]; 2] + Sync,
{
    let n = space.dim();
    let grid = space.vertices();
    let mut bp: Vec<f64> = grid
        .iter()
        .flat_map(|&g| [g, wrap_unit(g + shift), wrap_unit(g - shift)])
        .chain([1.0])
        .collect();
    bp.sort_by(f64::total_cmp);
    bp.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let order = 2 * space.order() + 1;
    let (xs, ws) = crate::fem::gauss_legendre(order);
    let mut points = Vec::with_capacity(bp.len() * order);
    for w in bp.windows(2) {
        let len = w[1] - w[0];
        for (x, wt) in xs.iter().zip(&ws) {
            points.push((w[0] + len * x, wt * len));
        }
    }
    // t at s and at s - shift for every point; the expensive part in fresh-solve mode
    let tvals: Vec<([[Complex64; 2]; 2], [[Complex64; 2]; 2])> =
        points.par_iter().map(|&(s, _)| (t_at(s), t_at(wrap_unit(s - shift)))).collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut t = [
        Mat::<Complex64>::zeros(n, n),
        Mat::<Complex64>::zeros(n, n),
        Mat::<Complex64>::zeros(n, n),
        Mat::<Complex64>::zeros(n, n),
    ];
    let (mut here, mut plus, mut minus) = (Vec::new(), Vec::new(), Vec::new());
    for (&(s, w), (ts, tm)) in points.iter().zip(&tvals) {
        space.basis_at(s, &mut here);
        space.basis_at(s + shift, &mut plus);
        space.basis_at(s - shift, &mut minus);
        // (j, k) index pairs 00, 01, 10, 11 -> t[0..4]
        let blocks: [(Complex64, &Vec<(usize, f64, f64)>); 4] = [
            (ts[0][0], &here),
            (tm[0][1], &minus),
            (ts[1][0], &plus),
            (tm[1][1], &here),
        ];
        for (b, (tv, qs)) in blocks.iter().enumerate() {
            if *tv == zero {
                continue;
            }
            for &(p, vp, _) in &here {
                for &(q, vq, _) in qs.iter() {
                    t[b][(p, q)] += tv * (w * vp * vq);
                }
            }
        }
    }
    let [t00, t01, t10, t11] = t;
    DtnQuad { t00, t01, t10, t11 }
}

/// How t^{jk} is evaluated off the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TEvaluation {
    /// Interpolate nodal samples in the transverse space.
    #[default]
    Interpolated,
    /// Solve a fresh cell problem at every quadrature point.
    FreshSolve,
}

/// Full quasi-1D pipeline up to the DtN quadruple.
pub fn dtn_quad_quasi1d(
    medium: &PeriodicMedium,
    omega: Frequency,
    cells: &Quasi1dCells,
    mode: TEvaluation,
) -> Result<DtnQuad> {
    let shift = medium.theta.shift();
    match mode {
        TEvaluation::Interpolated => {
            let loc = local_dtn_samples(cells);
            Ok(assemble_dtn_quad_quasi1d(&cells.space, shift, |s| loc.at(s)))
        }
        TEvaluation::FreshSolve => {
            // surface the first failure instead of panicking inside the closure
            solve_cell_problems_1d(medium, omega, 0.0, &cells.mesh)?;
            Ok(assemble_dtn_quad_quasi1d(&cells.space, shift, |s| {
                solve_cell_problems_1d(medium, omega, s, &cells.mesh)
                    .map(|c| c.dtn)
                    .unwrap_or([[Complex64::new(f64::NAN, 0.0); 2]; 2])
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::CutVector;
    use proptest::prelude::*;

    fn omega() -> Frequency {
        Frequency::new(Complex64::new(8.0, 0.25)).unwrap()
    }

    #[test]
    fn constant_medium_closed_form() {
        let th = CutVector::sixty_degrees();
        let medium = PeriodicMedium::constant(1.0, 1.0, th).unwrap();
        let mesh = cell_mesh(&medium, 1e-3, 1).unwrap();
        let c = solve_cell_problems_1d(&medium, omega(), 0.37, &mesh).unwrap();
        let w = omega().value();
        let th2 = th.theta2();
        let arg = w / th2;
        let t00 = w * th2 * arg.cos() / arg.sin();
        let t01 = -w * th2 / arg.sin();
        for (got, want) in [(c.dtn[0][0], t00), (c.dtn[1][1], t00), (c.dtn[0][1], t01), (c.dtn[1][0], t01)] {
            assert!((got - want).norm() / want.norm() < 1e-4, "{got} vs {want}");
        }
        assert!((c.e0.value(0.0) - 1.0).norm() < 1e-15);
        assert!(c.e0.value(1.0 / th2).norm() < 1e-15);
    }

    #[test]
    fn local_dtn_symmetry_and_sign() {
        let medium = PeriodicMedium::trig(CutVector::sixty_degrees());
        let mesh = cell_mesh(&medium, 1e-2, 1).unwrap();
        let w = omega().value();
        for s in [0.0, 0.21, 0.5, 0.93] {
            let c = solve_cell_problems_1d(&medium, omega(), s, &mesh).unwrap();
            assert!((c.dtn[0][1] - c.dtn[1][0]).norm() < 1e-10 * c.dtn[0][1].norm());
            assert!((c.dtn[0][0] / w).im < 0.0);
            assert!((c.dtn[1][1] / w).im < 0.0);
        }
    }

    #[test]
    fn transpose_relation_of_quad() {
        let medium = PeriodicMedium::trig(CutVector::sixty_degrees());
        let space = TransverseSpace::uniform(12, 2).unwrap();
        let mesh = cell_mesh(&medium, 2e-2, 2).unwrap();
        let cells = solve_cells_quasi1d(&medium, omega(), &space, &mesh).unwrap();
        let q = dtn_quad_quasi1d(&medium, omega(), &cells, TEvaluation::Interpolated).unwrap();
        let n = space.dim();
        let scale = q.t10.norm_l2();
        for p in 0..n {
            for r in 0..n {
                assert!((q.t01[(p, r)] - q.t10[(r, p)]).norm() < 1e-12 * scale);
                assert!((q.t00[(p, r)] - q.t00[(r, p)]).norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn fresh_solve_close_to_interpolated() {
        let medium = PeriodicMedium::trig(CutVector::sixty_degrees());
        // the gap shrinks like h^2
        let mut rels = Vec::new();
        for n in [16, 64] {
            let space = TransverseSpace::uniform(n, 1).unwrap();
            let mesh = cell_mesh(&medium, 1.0 / n as f64, 1).unwrap();
            let cells = solve_cells_quasi1d(&medium, omega(), &space, &mesh).unwrap();
            let a = dtn_quad_quasi1d(&medium, omega(), &cells, TEvaluation::Interpolated).unwrap();
            let b = dtn_quad_quasi1d(&medium, omega(), &cells, TEvaluation::FreshSolve).unwrap();
            rels.push((&a.t10 - &b.t10).norm_l2() / b.t10.norm_l2());
        }
        assert!(rels[1] < 0.05, "{rels:?}");
        assert!(rels[1] < rels[0] / 4.0, "{rels:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn cell_dtn_coercive_sign(s in 0.0..1.0f64, re in 1.0..12.0f64, im in 0.05..1.0f64) {
            let medium = PeriodicMedium::trig(CutVector::sixty_degrees());
            let om = Frequency::new(Complex64::new(re, im)).unwrap();
            let mesh = cell_mesh(&medium, 5e-3, 1).unwrap();
            let c = solve_cell_problems_1d(&medium, om, s, &mesh).unwrap();
            // Im(z/omega) < 0 for the local Neumann data of a non-zero trace
            for z in [c.dtn[0][0], c.dtn[1][1]] {
                prop_assert!((z / om.value()).im < 0.0);
            }
            prop_assert!((c.dtn[0][1] - c.dtn[1][0]).norm() <= 1e-9 * (1.0 + c.dtn[0][1].norm()));
        }
    }
}
