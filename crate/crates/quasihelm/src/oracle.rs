//! Independent references: truncated direct solves, error norms, the
//! reference spectral radius, and convergence studies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fem::{assemble_helmholtz_1d, assemble_load, gauss_legendre, DirichletSystem, FeFunction1D, Mesh1D};
use crate::halfguide::{HalfGuideOperator, HalfGuideOptions, Method};
use crate::media::{Frequency, MediumSpec, PeriodicMedium};
use crate::riccati::Propagator;

/// Domain truncation rule: cut where the decay bound reaches `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub target: f64,
    /// Largest number of unknowns a reference solve may use.
    pub max_dofs: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            target: 1e-10,
            max_dofs: 12_000_000,
        }
    }
}

impl TruncationPolicy {
    /// L = -ln(target) / (sqrt(rho_minus / mu_plus) Im omega).
    pub fn length(&self, medium: &PeriodicMedium, omega: Frequency) -> f64 {
        let (mu_plus, rho_minus) = medium.mu_plus_rho_minus();
        -self.target.ln() / ((rho_minus / mu_plus).sqrt() * omega.value().im)
    }

    fn check(&self, medium: &PeriodicMedium, omega: Frequency, length: f64, h: f64) -> Result<usize> {
        let dofs = (length / h).ceil() as usize + 1;
        if dofs > self.max_dofs {
            let (mu_plus, rho_minus) = medium.mu_plus_rho_minus();
            let fit = self.max_dofs as f64 * h;
            let suggested_target = (-fit * (rho_minus / mu_plus).sqrt() * omega.value().im).exp();
            return Err(Error::MemoryBudget {
                dofs,
                budget: self.max_dofs,
                suggested_target,
            });
        }
        Ok(dofs)
    }
}

/// P1 solve on (0, L) of the cell equation along the line through (s, 0),
/// with u(0) = 1 and u(L) = 0.
pub fn solve_truncated_halfline(
    medium: &PeriodicMedium,
    s: f64,
    omega: Frequency,
    policy: TruncationPolicy,
    h_ref: f64,
) -> Result<FeFunction1D> {
    let length = policy.length(medium, omega);
    let dofs = policy.check(medium, omega, length, h_ref)?;
    let mesh = Mesh1D::uniform(0.0, length, dofs - 1, 1)?;
    let a = assemble_helmholtz_1d(&mesh, |x| medium.mu_trace(s, x), |x| medium.rho_trace(s, x), omega.value());
    let sys = DirichletSystem::new(a, &[0, dofs - 1]).map_err(retag)?;
    let u = sys.solve(None, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    FeFunction1D::new(mesh, u)
}

/// Direct P1 solve of the whole-line problem on (-a - L, a + L) with zero
/// Dirichlet data at both ends.
pub fn solve_truncated_wholeline(
    spec: &MediumSpec,
    omega: Frequency,
    policy: TruncationPolicy,
    h_ref: f64,
) -> Result<FeFunction1D> {
    let length = policy.length(&spec.exterior, omega);
    let a = spec.a;
    policy.check(&spec.exterior, omega, 2.0 * (length + a), h_ref)?;
    let mut breaks = spec.interior_breakpoints();
    breaks.extend([-a, a]);
    let mesh = Mesh1D::fitted(-a - length, a + length, h_ref, &breaks, 1)?;
    let th = spec.exterior.theta;
    let ext = |c: &crate::media::PeriodicCoefficient2D, x: f64| c.evaluate(x * th.theta1(), x * th.theta2());
    let mu = |x: f64| {
        if x.abs() < a {
            spec.mu_interior.evaluate(x)
        } else {
            ext(&spec.exterior.mu, x)
        }
    };
    let rho = |x: f64| {
        if x.abs() < a {
            spec.rho_interior.evaluate(x)
        } else {
            ext(&spec.exterior.rho, x)
        }
    };
    let m = assemble_helmholtz_1d(&mesh, mu, rho, omega.value());
    let load = match &spec.source {
        Some(src) => assemble_load(&mesh, |x| src.evaluate(x), 6),
        None => vec![Complex64::new(0.0, 0.0); mesh.n_dofs()],
    };
    let last = mesh.n_dofs() - 1;
    let sys = DirichletSystem::new(m, &[0, last]).map_err(retag)?;
    let zero = Complex64::new(0.0, 0.0);
    let u = sys.solve(Some(&load), &[zero, zero]);
    FeFunction1D::new(mesh, u)
}

fn retag(e: Error) -> Error {
    match e {
        Error::Singular { min_pivot, .. } => Error::Singular {
            module: "oracle",
            min_pivot,
        },
        other => other,
    }
}

/// How the H1 distance between two discrete functions is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    /// Interpolate the reference into the approximation space and measure the
    /// difference there.
    #[default]
    ApproximationSpace,
    /// Integrate the difference exactly on the union of both meshes.
    UnionGrid,
}

/// ||u_h - u_ref||_{H1(window)} / ||u_ref||_{H1(window)}.
pub fn relative_h1_error(u_h: &FeFunction1D, u_ref: &FeFunction1D, window: (f64, f64), norm: ErrorNorm) -> Result<f64> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::invalid("oracle", "empty error window"));
    }
    let denom = h1_norm_sq(u_ref, window, |_| Complex64::new(0.0, 0.0), |_| Complex64::new(0.0, 0.0));
    if !(denom > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let num = match norm {
        ErrorNorm::UnionGrid => {
            let mut bp: Vec<f64> = u_h
                .mesh
                .vertices()
                .iter()
                .chain(u_ref.mesh.vertices())
                .copied()
                .filter(|x| *x > lo && *x < hi)
                .chain([lo, hi])
                .collect();
            bp.sort_by(f64::total_cmp);
            bp.dedup();
            let order = u_h.mesh.order().max(u_ref.mesh.order()) + 1;
            let (xs, ws) = gauss_legendre(order);
            let mut acc = 0.0;
            for w in bp.windows(2) {
                let len = w[1] - w[0];
                let mid = 0.5 * (w[0] + w[1]);
                let (eh, er) = (u_h.mesh.locate(mid), u_ref.mesh.locate(mid));
                for (xi, wt) in xs.iter().zip(&ws) {
                    let x = w[0] + len * xi;
                    let (a, da) = u_h.eval_on(eh, x);
                    let (b, db) = u_ref.eval_on(er, x);
                    acc += wt * len * ((a - b).norm_sqr() + (da - db).norm_sqr());
                }
            }
            acc
        }
        ErrorNorm::ApproximationSpace => {
            let mesh = &u_h.mesh;
            let d = mesh.order();
            let mut interp = u_h.coeffs.clone();
            for (i, c) in interp.iter_mut().enumerate() {
                let x = mesh.dof_position(i);
                if x >= lo - 1e-9 * (1.0 + lo.abs()) && x <= hi + 1e-9 * (1.0 + hi.abs()) {
                    *c = u_ref.value(x);
                }
            }
            let diff = FeFunction1D::new(
                mesh.clone(),
                u_h.coeffs.iter().zip(&interp).map(|(a, b)| a - b).collect(),
            )?;
            let _ = d;
            h1_norm_sq(&diff, window, |_| Complex64::new(0.0, 0.0), |_| Complex64::new(0.0, 0.0))
        }
    };
    Ok((num / denom).sqrt())
}

/// int_window |u - g|^2 + |u' - g'|^2, exact for polynomial g on u's elements.
fn h1_norm_sq<G, D>(u: &FeFunction1D, window: (f64, f64), g: G, dg: D) -> f64
where
    G: Fn(f64) -> Complex64,
    D: Fn(f64) -> Complex64,
{
    let (lo, hi) = window;
    let (xs, ws) = gauss_legendre(u.mesh.order() + 2);
    let mut acc = 0.0;
    let first = u.mesh.locate(lo);
    let last = u.mesh.locate(hi);
    for e in first..=last {
        let (a, b) = u.mesh.element(e);
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            continue;
        }
        for (xi, w) in xs.iter().zip(&ws) {
            let x = a + (b - a) * xi;
            let (v, dv) = u.eval_on(e, x);
            acc += w * (b - a) * ((v - g(x)).norm_sqr() + (dv - dg(x)).norm_sqr());
        }
    }
    acc
}

/// exp of the mean of ln |u_{s - b}(1/theta2)| over n equispaced s in [0, 1),
/// where u_s is the truncated half-line solution through (s, 0) and b = theta1/theta2.
pub fn reference_spectral_radius(
    medium: &PeriodicMedium,
    omega: Frequency,
    n_samples: usize,
    policy: TruncationPolicy,
    h_ref: f64,
) -> Result<f64> {
    use rayon::prelude::*;
    if n_samples == 0 {
        return Err(Error::invalid("oracle", "need at least one sample"));
    }
    let th = medium.theta;
    let logs = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / n_samples as f64;
            let u = solve_truncated_halfline(medium, crate::media::wrap_unit(s - th.shift()), omega, policy, h_ref)?;
            let p = u.value(th.cell_length()).norm();
            if !(p > 0.0) {
                return Err(Error::ZeroTrace { s });
            }
            Ok(p.ln())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((logs.iter().sum::<f64>() / n_samples as f64).exp())
}

/// Number of eigenvalues of P with relative modulus deviation from `radius` at most `band`.
pub fn spectrum_band_count(propagator: &Propagator, radius: f64, band: f64) -> usize {
    propagator
        .lambdas
        .iter()
        .filter(|l| ((l.norm() - radius) / radius).abs() <= band)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub inv_h: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub method: Method,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares order p in error ~ h^p.
    pub slope: f64,
}

/// Least-squares order of convergence from (1/h, error) pairs.
pub fn fitted_order(points: &[ConvergencePoint]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.inv_h as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.error.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -cov / var
}

/// Half-line errors on (0, cells/theta2) against a reference, for each 1/h.
/// `phi` builds the face data from the transverse nodes.
pub fn convergence_study<F>(
    medium: &PeriodicMedium,
    omega: Frequency,
    base: HalfGuideOptions,
    inv_hs: &[usize],
    reference: &FeFunction1D,
    cells: usize,
    norm: ErrorNorm,
    phi: F,
) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> Complex64,
{
    if inv_hs.len() < 2 {
        return Err(Error::invalid("oracle", "convergence study needs two mesh sizes"));
    }
    let window = (0.0, cells as f64 * medium.theta.cell_length());
    let mut points = Vec::with_capacity(inv_hs.len());
    for &k in inv_hs {
        let mut opt = base;
        opt.h = 1.0 / k as f64;
        opt.h_theta = opt.h;
        let op = HalfGuideOperator::build(medium, omega, opt)?;
        let data = op.space().interpolate(&phi);
        op.dtn_coefficient(&data)?;
        let u = op.solve_halfline(&data, cells)?;
        points.push(ConvergencePoint {
            inv_h: k,
            error: relative_h1_error(&u, reference, window, norm)?,
        });
    }
    Ok(ConvergenceReport {
        method: base.method,
        slope: fitted_order(&points),
        points,
    })
}
