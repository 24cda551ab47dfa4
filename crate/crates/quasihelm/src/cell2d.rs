//! 2D periodicity-cell problems for the directional Helmholtz operator and
//! the local DtN operators they induce on the face space.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fem::trimesh::directional_helmholtz_triplets;
use crate::fem::{PeriodicTriMesh, TransverseSpace};
use crate::media::{Frequency, PeriodicMedium};
use crate::riccati::DtnQuad;

const MODULE: &str = "cell-dtn-2d";
/// Right-hand sides solved per batch.
const BATCH: usize = 64;

type Entries = Vec<(usize, usize, Complex64)>;

/// Factorised cell problem. Dofs are numbered j * m + i, so the bottom face
/// is 0..m, the top face m^2..m^2+m, and everything between is interior.
pub struct CellProblem2D {
    mesh: PeriodicTriMesh,
    space: TransverseSpace,
    lu: Lu<usize, Complex64>,
    /// interior rows, boundary columns (boundary index: bottom 0..m, top m..2m)
    a_ib: Entries,
    a_bi: Entries,
    a_bb: Entries,
}

impl std::fmt::Debug for CellProblem2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CellProblem2D").field("m", &self.mesh.m()).finish_non_exhaustive()
    }
}

impl CellProblem2D {
    pub fn new(medium: &PeriodicMedium, omega: Frequency, m: usize) -> Result<Self> {
        let mesh = PeriodicTriMesh::new(m)?;
        let space = TransverseSpace::uniform(m, 1)?;
        let trips = directional_helmholtz_triplets(&mesh, medium, omega.value());
        let n_int = m * (m - 1);
        let boundary = |d: usize| -> Option<usize> {
            if d < m {
                Some(d)
            } else if d >= m * m {
                Some(d - m * m + m)
            } else {
                None
            }
        };
        let mut ii = Vec::with_capacity(trips.len());
        let (mut a_ib, mut a_bi, mut a_bb) = (Vec::new(), Vec::new(), Vec::new());
        for t in trips {
            match (boundary(t.row), boundary(t.col)) {
                (None, None) => ii.push(Triplet::new(t.row - m, t.col - m, t.val)),
                (None, Some(c)) => a_ib.push((t.row - m, c, t.val)),
                (Some(r), None) => a_bi.push((r, t.col - m, t.val)),
                (Some(r), Some(c)) => a_bb.push((r, c, t.val)),
            }
        }
        let a_ii = SparseColMat::<usize, Complex64>::try_new_from_triplets(n_int, n_int, &ii)
            .map_err(|e| Error::invalid(MODULE, format!("{e:?}")))?;
        let lu = a_ii.sp_lu().map_err(|_| Error::Singular {
            module: MODULE,
            min_pivot: 0.0,
        })?;
        Ok(Self {
            mesh,
            space,
            lu,
            a_ib: coalesce(a_ib),
            a_bi: coalesce(a_bi),
            a_bb: coalesce(a_bb),
        })
    }

    pub fn mesh(&self) -> &PeriodicTriMesh {
        &self.mesh
    }

    pub fn space(&self) -> &TransverseSpace {
        &self.space
    }

    /// Interior values for boundary data given as columns (2m rows).
    fn solve_interior(&self, data: &Mat<Complex64>) -> Mat<Complex64> {
        let m = self.mesh.m();
        let mut rhs = Mat::<Complex64>::zeros(m * (m - 1), data.ncols());
        for &(r, c, v) in &self.a_ib {
            for col in 0..data.ncols() {
                rhs[(r, col)] -= v * data[(c, col)];
            }
        }
        self.lu.solve_in_place(rhs.as_mut());
        rhs
    }

    /// Cell solution with traces `bottom` on y2 = 0 and `top` on y2 = 1, as
    /// nodal values over all m (m + 1) dofs.
    pub fn solve(&self, bottom: &[Complex64], top: &[Complex64]) -> Vec<Complex64> {
        let m = self.mesh.m();
        assert!(bottom.len() == m && top.len() == m, "face data must have m values");
        let data = Mat::<Complex64>::from_fn(2 * m, 1, |i, _| if i < m { bottom[i] } else { top[i - m] });
        let inner = self.solve_interior(&data);
        let mut out = Vec::with_capacity(self.mesh.n_dofs());
        out.extend_from_slice(bottom);
        out.extend((0..m * (m - 1)).map(|i| inner[(i, 0)]));
        out.extend_from_slice(top);
        out
    }

    /// Evaluate a nodal field at a point of the cell.
    pub fn evaluate(&self, field: &[Complex64], y: [f64; 2]) -> Complex64 {
        self.mesh.locate(y).iter().map(|&(d, w)| field[d] * w).sum()
    }

    /// T^{jk}[p, q] = a(E^j phi_q, conj E^k phi_p). Interior rows of A E vanish,
    /// so the pairing reduces to the reaction of E^j phi_q at face-k node p.
    pub fn dtn_quad(&self) -> DtnQuad {
        let m = self.mesh.m();
        let mut react = Mat::<Complex64>::zeros(2 * m, 2 * m);
        let mut start = 0;
        while start < 2 * m {
            let cols = BATCH.min(2 * m - start);
            let data = Mat::<Complex64>::from_fn(2 * m, cols, |i, c| {
                if i == start + c {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let inner = self.solve_interior(&data);
            for &(r, c, v) in &self.a_bi {
                for col in 0..cols {
                    react[(r, start + col)] += v * inner[(c, col)];
                }
            }
            for &(r, c, v) in &self.a_bb {
                if c >= start && c < start + cols {
                    react[(r, c)] += v;
                }
            }
            start += cols;
        }
        let block = |k: usize, j: usize| Mat::<Complex64>::from_fn(m, m, |p, q| react[(k * m + p, j * m + q)]);
        DtnQuad {
            t00: block(0, 0),
            t01: block(1, 0),
            t10: block(0, 1),
            t11: block(1, 1),
        }
    }
}

fn coalesce(mut e: Entries) -> Entries {
    e.sort_by_key(|&(r, c, _)| (r, c));
    let mut out: Entries = Vec::with_capacity(e.len());
    for (r, c, v) in e {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::CutVector;

    fn omega() -> Frequency {
        Frequency::new(Complex64::new(8.0, 0.25)).unwrap()
    }

    #[test]
    fn cell_solution_has_prescribed_traces() {
        let medium = PeriodicMedium::trig(CutVector::sixty_degrees());
        let cell = CellProblem2D::new(&medium, omega(), 8).unwrap();
        let bottom: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let top = vec![Complex64::new(0.0, 1.0); 8];
        let u = cell.solve(&bottom, &top);
        assert_eq!(u.len(), 72);
        assert_eq!(cell.evaluate(&u, [0.25, 0.0]), Complex64::new(2.0, 0.0));
        assert!((cell.evaluate(&u, [0.5, 1.0]) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn dtn_blocks_adjoint_structure() {
        let medium = PeriodicMedium::trig(CutVector::sixty_degrees());
        let cell = CellProblem2D::new(&medium, omega(), 12).unwrap();
        let q = cell.dtn_quad();
        assert!(q.transpose_defect() < 1e-10, "{}", q.transpose_defect());
        let s = &q.t00 - q.t00.transpose();
        assert!(s.norm_l2() < 1e-10 * q.t00.norm_l2());
    }

    #[test]
    fn constant_medium_matches_direct_pairing() {
        // reaction entries against an explicit sum over the full matrix
        let medium = PeriodicMedium::constant(1.0, 1.0, CutVector::sixty_degrees()).unwrap();
        let m = 6;
        let cell = CellProblem2D::new(&medium, omega(), m).unwrap();
        let q = cell.dtn_quad();
        let mesh = PeriodicTriMesh::new(m).unwrap();
        let trips = directional_helmholtz_triplets(&mesh, &medium, omega().value());
        let basis = |face: usize, p: usize| {
            let mut b = vec![Complex64::new(0.0, 0.0); m];
            b[p] = Complex64::new(1.0, 0.0);
            let z = vec![Complex64::new(0.0, 0.0); m];
            if face == 0 {
                cell.solve(&b, &z)
            } else {
                cell.solve(&z, &b)
            }
        };
        let (p, r) = (2, 3);
        let ej = basis(1, r);
        let ek = basis(0, p);
        let form: Complex64 = trips.iter().map(|t| ek[t.row].conj() * t.val * ej[t.col]).sum();
        assert!((form - q.t10[(p, r)]).norm() < 1e-10 * (1.0 + form.norm()));
    }
}
