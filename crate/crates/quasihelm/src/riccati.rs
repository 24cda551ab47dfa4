//! Quadratic eigenvalue problem for the propagation operator and its
//! spectral reconstruction.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Residual limit for each eigenpair of the linearised pencil.
pub const PAIR_RESIDUAL_TOL: f64 = 1e-10;
/// Eigenvalues closer than this to the unit circle are rejected.
pub const UNIT_CIRCLE_MARGIN: f64 = 1e-8;
/// Largest accepted condition number of the selected eigenvector matrix.
pub const MAX_EIGENVECTOR_COND: f64 = 1e12;
/// Relative smallest singular value of T10 below which the pencil is singular.
pub const PENCIL_SINGULAR_TOL: f64 = 1e-14;

/// The four local DtN matrices in weak form, T^{jk}[p, q] = <T^{jk} phi_q, phi_p>.
#[derive(Debug, Clone, PartialEq)]
pub struct DtnQuad {
    pub t00: Mat<Complex64>,
    pub t01: Mat<Complex64>,
    pub t10: Mat<Complex64>,
    pub t11: Mat<Complex64>,
}

impl DtnQuad {
    pub fn dim(&self) -> usize {
        self.t00.nrows()
    }

    /// ||T01 - T10^T|| / ||T10||, zero for an exactly adjoint pair.
    pub fn transpose_defect(&self) -> f64 {
        (&self.t01 - self.t10.transpose()).norm_l2() / self.t10.norm_l2()
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: Complex64,
    /// Top block of the companion eigenvector, unit 2-norm.
    pub vector: Vec<Complex64>,
    /// Normwise backward error of the linearised pair.
    pub residual: f64,
}

/// All 2N eigenpairs, sorted by (|lambda|, arg lambda).
#[derive(Debug, Clone)]
pub struct QepSpectrum {
    pub dim: usize,
    pub linearization: Linearization,
    pub pairs: Vec<Eigenpair>,
}

impl QepSpectrum {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn inside_unit_disk(&self) -> usize {
        self.pairs.iter().filter(|p| p.lambda.norm() < 1.0).count()
    }

    /// max over lambda of min over lambda' of |lambda lambda' - 1| / (1 + |lambda|^2).
    pub fn pairing_defect(&self) -> f64 {
        pairing_defect(&self.eigenvalues())
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

pub fn pairing_defect(eigs: &[Complex64]) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    eigs.iter()
        .enumerate()
        .map(|(i, l)| {
            let best = eigs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, m)| (l * m - one).norm())
                .fold(f64::INFINITY, f64::min);
            best / (1.0 + l.norm_sqr())
        })
        .fold(0.0, f64::max)
}

/// How the quadratic problem is turned into a generalised eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linearization {
    /// A = [[0, I], [-T01, -(T00 + T11)]], B = [[I, 0], [0, T10]].
    Companion,
    /// Companion form of the problem in mu with lambda = (1 + mu) / (1 - mu).
    /// Roots at lambda = 0 and infinity become mu = -1 and 1, so a
    /// numerically singular T10 is harmless.
    Cayley,
}

/// Solve lambda^2 T10 psi + lambda (T00 + T11) psi + T01 psi = 0 through the
/// companion pencil A = [[0, I], [-T01, -(T00 + T11)]], B = [[I, 0], [0, T10]].
pub fn solve_qep(t: &DtnQuad) -> Result<QepSpectrum> {
    solve_qep_with_tolerance(t, PENCIL_SINGULAR_TOL)
}

/// [`solve_qep`] with an explicit relative singularity threshold for T10.
pub fn solve_qep_with_tolerance(t: &DtnQuad, pencil_tol: f64) -> Result<QepSpectrum> {
    solve_qep_linearized(t, Linearization::Companion, pencil_tol)
}

pub fn solve_qep_linearized(
    t: &DtnQuad,
    linearization: Linearization,
    pencil_tol: f64,
) -> Result<QepSpectrum> {
    let sum = &t.t00 + &t.t11;
    // mu^2 c2 + mu c1 + c0
    let (c0, c1, c2) = match linearization {
        Linearization::Companion => (t.t01.clone(), sum, t.t10.clone()),
        Linearization::Cayley => (
            &t.t10 + &sum + &t.t01,
            (&t.t10 - &t.t01) * faer::Scale(Complex64::new(2.0, 0.0)),
            &t.t10 - &sum + &t.t01,
        ),
    };
    let n = t.dim();
    let sv = c2
        .singular_values()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let (largest, smallest) = (sv[0], sv[sv.len() - 1]);
    if !(smallest > pencil_tol * largest) {
        return Err(Error::SingularPencil { smallest, largest });
    }
    let (mus, u) = match linearization {
        Linearization::Companion => {
            let mut a = Mat::<Complex64>::zeros(2 * n, 2 * n);
            let mut b = Mat::<Complex64>::zeros(2 * n, 2 * n);
            for i in 0..n {
                a[(i, n + i)] = Complex64::new(1.0, 0.0);
                b[(i, i)] = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    a[(n + i, j)] = -c0[(i, j)];
                    a[(n + i, n + j)] = -c1[(i, j)];
                    b[(n + i, n + j)] = c2[(i, j)];
                }
            }
            let gev = a
                .generalized_eigen(&b)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let (sa, sb) = (gev.S_a().column_vector(), gev.S_b().column_vector());
            let mus: Vec<Complex64> = (0..2 * n).map(|i| sa[i] / sb[i]).collect();
            (mus, gev.U().to_owned())
        }
        Linearization::Cayley => {
            // c2 = Q(-1) is well conditioned, so B^{-1} A is formed explicitly
            let lu = c2.partial_piv_lu();
            let k0 = lu.solve(&c0);
            let k1 = lu.solve(&c1);
            let mut m = Mat::<Complex64>::zeros(2 * n, 2 * n);
            for i in 0..n {
                m[(i, n + i)] = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    m[(n + i, j)] = -k0[(i, j)];
                    m[(n + i, n + j)] = -k1[(i, j)];
                }
            }
            let ev = m.eigen().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let sv = ev.S().column_vector();
            let mus: Vec<Complex64> = (0..2 * n).map(|i| sv[i]).collect();
            (mus, ev.U().to_owned())
        }
    };

    // residuals of the linearised pairs: z = (x1, x2)
    // A z - m B z = (x2 - m x1, -c0 x1 - c1 x2 - m c2 x2)
    let x1 = u.subrows(0, n);
    let x2 = u.subrows(n, n);
    let c0x1 = &c0 * x1;
    let c1x2 = &c1 * x2;
    let c2x2 = &c2 * x2;
    let norm_a = (n as f64 + c0.norm_l2().powi(2) + c1.norm_l2().powi(2)).sqrt();
    let norm_b = (n as f64 + c2.norm_l2().powi(2)).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let mut pairs = Vec::with_capacity(2 * n);
    for (c, &m) in mus.iter().enumerate() {
        let mut r2 = 0.0;
        let mut z2 = 0.0;
        for i in 0..n {
            r2 += (x2[(i, c)] - m * x1[(i, c)]).norm_sqr();
            r2 += (c0x1[(i, c)] + c1x2[(i, c)] + m * c2x2[(i, c)]).norm_sqr();
            z2 += x1[(i, c)].norm_sqr() + x2[(i, c)].norm_sqr();
        }
        let residual = if m.is_finite() {
            r2.sqrt() / ((norm_a + m.norm() * norm_b) * z2.sqrt())
        } else {
            f64::INFINITY
        };
        let lambda = match linearization {
            Linearization::Companion => m,
            Linearization::Cayley if m == one => Complex64::new(f64::INFINITY, 0.0),
            Linearization::Cayley => (one + m) / (one - m),
        };
        let top: Vec<Complex64> = (0..n).map(|i| x1[(i, c)]).collect();
        let scale = top.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        pairs.push(Eigenpair {
            lambda,
            vector: top.into_iter().map(|v| v / scale).collect(),
            residual,
        });
    }
    // non-finite eigenvalues (infinite or 0/0) sort last
    let key = |l: Complex64| {
        if l.is_finite() {
            (l.norm(), l.arg())
        } else {
            (f64::INFINITY, 0.0)
        }
    };
    pairs.sort_by(|p, q| {
        let (a, b) = (key(p.lambda), key(q.lambda));
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
    });
    Ok(QepSpectrum {
        dim: n,
        linearization,
        pairs,
    })
}

/// Selected eigenvectors as columns, with their inverse.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    pub psi: Mat<Complex64>,
    pub psi_inv: Mat<Complex64>,
    pub cond: f64,
}

#[derive(Debug, Clone)]
pub struct Propagator {
    /// The N decaying eigenvalues of the quadratic problem.
    pub lambdas: Vec<Complex64>,
    pub p: Mat<Complex64>,
    /// Present when P was assembled as Psi diag(lambda) Psi^{-1}.
    pub eigenbasis: Option<Eigenbasis>,
    pub riccati_residual: f64,
}

fn check_selection(spectrum: &QepSpectrum) -> Result<Vec<&Eigenpair>> {
    let n = spectrum.dim;
    if let Some(p) = spectrum
        .pairs
        .iter()
        .find(|p| (p.lambda.norm() - 1.0).abs() < UNIT_CIRCLE_MARGIN)
    {
        return Err(Error::UnitCircle {
            lambda: p.lambda,
            margin: UNIT_CIRCLE_MARGIN,
        });
    }
    let inside: Vec<&Eigenpair> = spectrum.pairs.iter().filter(|p| p.lambda.norm() < 1.0).collect();
    if inside.len() != n {
        let mut near: Vec<Complex64> = spectrum.eigenvalues();
        near.sort_by(|a, b| (a.norm() - 1.0).abs().total_cmp(&(b.norm() - 1.0).abs()));
        near.truncate(6);
        return Err(Error::UnitDiskCount {
            inside: inside.len(),
            expected: n,
            nearest: near,
        });
    }
    if let Some((index, p)) = inside
        .iter()
        .enumerate()
        .find(|(_, p)| !(p.residual <= PAIR_RESIDUAL_TOL))
    {
        return Err(Error::EigenResidual {
            index,
            residual: p.residual,
            tolerance: PAIR_RESIDUAL_TOL,
        });
    }
    Ok(inside)
}

/// P_h = Psi diag(lambda) Psi^{-1} built from the N decaying eigenpairs.
pub fn select_and_build(spectrum: &QepSpectrum, t: &DtnQuad) -> Result<Propagator> {
    let n = spectrum.dim;
    let inside = check_selection(spectrum)?;
    let psi = Mat::<Complex64>::from_fn(n, n, |i, j| inside[j].vector[i]);
    let sv = psi
        .singular_values()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let cond = sv[0] / sv[n - 1];
    if !(cond <= MAX_EIGENVECTOR_COND) {
        return Err(Error::Diagonalizability {
            cond,
            limit: MAX_EIGENVECTOR_COND,
        });
    }
    let lambdas: Vec<Complex64> = inside.iter().map(|p| p.lambda).collect();
    let psi_inv = psi.partial_piv_lu().inverse();
    let psi_l = Mat::<Complex64>::from_fn(n, n, |i, j| psi[(i, j)] * lambdas[j]);
    let p = &psi_l * &psi_inv;
    let riccati_residual = riccati_residual(t, &p);
    Ok(Propagator {
        lambdas,
        p,
        eigenbasis: Some(Eigenbasis { psi, psi_inv, cond }),
        riccati_residual,
    })
}

/// Largest number of cyclic reduction steps; convergence is quadratic.
const CR_MAX_STEPS: usize = 64;

/// Minimal solvent of T10 P^2 + (T00 + T11) P + T01 = 0 by cyclic reduction.
///
/// No eigenvectors are involved, so this also works when the decaying
/// eigenvalues cluster at zero and Psi is numerically singular. The spectrum
/// is still checked for the unit-circle gap and the root count.
pub fn cyclic_reduction(spectrum: &QepSpectrum, t: &DtnQuad) -> Result<Propagator> {
    let n = spectrum.dim;
    let lambdas: Vec<Complex64> = check_selection(spectrum)?.iter().map(|p| p.lambda).collect();
    let mut am = t.t01.clone();
    let mut a0 = &t.t00 + &t.t11;
    let mut ap = t.t10.clone();
    let mut hat = a0.clone();
    let scale = hat.norm_l2();
    let mut converged = false;
    for _ in 0..CR_MAX_STEPS {
        let lu = a0.partial_piv_lu();
        let k_am = lu.solve(&am);
        let k_ap = lu.solve(&ap);
        let ap_k_am = &ap * &k_am;
        let am_k_ap = &am * &k_ap;
        let step = ap_k_am.norm_l2();
        if !step.is_finite() {
            break;
        }
        hat = &hat - &ap_k_am;
        a0 = &a0 - &am_k_ap - &ap_k_am;
        am = -(&am * &k_am);
        ap = -(&ap * &k_ap);
        if step <= 1e-16 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Eigensolver("cyclic reduction did not converge".into()));
    }
    let p = -(hat.partial_piv_lu().solve(&t.t01));
    if p.norm_l2().is_nan() {
        return Err(Error::Eigensolver("cyclic reduction produced NaN".into()));
    }
    let riccati_residual = riccati_residual(t, &p);
    debug_assert_eq!(p.nrows(), n);
    Ok(Propagator {
        lambdas,
        p,
        eigenbasis: None,
        riccati_residual,
    })
}

/// ||T10 P^2 + (T00 + T11) P + T01|| / ||T01|| in the Frobenius norm.
pub fn riccati_residual(t: &DtnQuad, p: &Mat<Complex64>) -> f64 {
    let p2 = p * p;
    let r = &t.t10 * &p2 + (&t.t00 + &t.t11) * p + &t.t01;
    r.norm_l2() / t.t01.norm_l2()
}

impl Propagator {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// P^l phi for l = 0..=count, through the eigenbasis when there is one.
    pub fn powers(&self, phi: &[Complex64], count: usize) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(count + 1);
        let Some(basis) = &self.eigenbasis else {
            let mut x = phi.to_vec();
            for _ in 0..count {
                let next = self.apply(&x);
                out.push(std::mem::replace(&mut x, next));
            }
            out.push(x);
            return out;
        };
        let rhs = Mat::<Complex64>::from_fn(n, 1, |i, _| phi[i]);
        let c = &basis.psi_inv * &rhs;
        let mut coef: Vec<Complex64> = (0..n).map(|i| c[(i, 0)]).collect();
        // P^0 phi is phi itself, not Psi Psi^{-1} phi
        out.push(phi.to_vec());
        for _ in 0..count {
            for (ci, l) in coef.iter_mut().zip(&self.lambdas) {
                *ci *= l;
            }
            let v = Mat::<Complex64>::from_fn(n, 1, |i, _| coef[i]);
            let y = &basis.psi * &v;
            out.push((0..n).map(|i| y[(i, 0)]).collect());
        }
        out
    }

    pub fn apply(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let x = Mat::<Complex64>::from_fn(n, 1, |i, _| phi[i]);
        let y = &self.p * &x;
        (0..n).map(|i| y[(i, 0)]).collect()
    }
}

/// Solve a dense system with partial pivoting.
pub(crate) fn dense_solve(a: &Mat<Complex64>, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.nrows();
    let rhs = Mat::<Complex64>::from_fn(n, 1, |i, _| b[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    (0..n).map(|i| x[(i, 0)]).collect()
}
