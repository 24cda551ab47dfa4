//! Experiment drivers behind the subcommands.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use quasihelm::halfguide::HalfGuideOperator;
use quasihelm::media::sample_broken_line;
use quasihelm::oracle::{
    convergence_study, reference_spectral_radius, solve_truncated_halfline, spectrum_band_count,
};
use quasihelm::wholeline::{solve_whole_line, WholeLineOptions};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Halfline,
    Wholeline,
    Convergence,
    Spectrum,
    Fibrage,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(#[from] quasihelm::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) | RunError::Output { .. } => 3,
        }
    }

    pub fn module(&self) -> &'static str {
        match self {
            RunError::Config(_) => "cli",
            RunError::Numerical(e) => e.module(),
            RunError::Output { .. } => "cli",
        }
    }
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Table {
    text: String,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: &[String]) {
        self.text += &cells.join(",");
        self.text.push('\n');
    }

    fn write(&self, dir: &Path, name: &str) -> Result<(), RunError> {
        let path = dir.join(name);
        let out = |source| RunError::Output {
            path: path.display().to_string(),
            source,
        };
        let mut f = std::fs::File::create(&path).map_err(out)?;
        f.write_all(self.text.as_bytes()).map_err(out)
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

/// Run one experiment; returns a short human-readable summary.
pub fn run(kind: Experiment, cfg: &RunConfig) -> Result<String, RunError> {
    std::fs::create_dir_all(&cfg.output).map_err(|source| RunError::Output {
        path: cfg.output.display().to_string(),
        source,
    })?;
    match kind {
        Experiment::Halfline => halfline(cfg),
        Experiment::Wholeline => wholeline(cfg),
        Experiment::Convergence => convergence(cfg),
        Experiment::Spectrum => spectrum(cfg),
        Experiment::Fibrage => fibrage(cfg),
    }
}

fn halfline(cfg: &RunConfig) -> Result<String, RunError> {
    let op = HalfGuideOperator::build(&cfg.medium, cfg.omega, cfg.halfguide)?;
    let phi = op.space().interpolate(|s| cfg.phi.at(s));
    let lambda = op.dtn_coefficient(&phi)?;
    let u = op.solve_halfline(&phi, cfg.cells)?;

    let mut t = Table::new(&["x", "u_re", "u_im"]);
    for x in uniform(0.0, u.mesh.end(), cfg.samples) {
        let v = u.value(x);
        t.row(&[num(x), num(v.re), num(v.im)]);
    }
    t.write(&cfg.output, "u.csv")?;

    let mut d = Table::new(&[
        "lambda_re",
        "lambda_im",
        "spectral_radius",
        "riccati_residual",
        "pairing_defect",
        "method",
        "inv_h",
    ]);
    d.row(&[
        num(lambda.re),
        num(lambda.im),
        num(op.spectral_radius()),
        num(op.propagator.riccati_residual),
        num(op.spectrum.pairing_defect()),
        cfg.halfguide.method.to_string(),
        op.space().n_elements().to_string(),
    ]);
    d.write(&cfg.output, "dtn.csv")?;

    if cfg.guide_n > 0 {
        let mut g = Table::new(&["y1", "y2", "u_re", "u_im"]);
        for (y, v) in op.guide_field(&phi, cfg.cells, cfg.guide_n) {
            g.row(&[num(y[0]), num(y[1]), num(v.re), num(v.im)]);
        }
        g.write(&cfg.output, "guide.csv")?;
    }
    Ok(format!(
        "lambda+ = {lambda}\nspectral radius = {}\nriccati residual = {:.3e}\n",
        op.spectral_radius(),
        op.propagator.riccati_residual
    ))
}

fn wholeline(cfg: &RunConfig) -> Result<String, RunError> {
    let th = cfg.medium.theta;
    let reach = cfg.window.0.abs().max(cfg.window.1.abs());
    let cells = (((reach - cfg.spec.a).max(0.0)) * th.theta2()).ceil() as usize + 1;
    let opts = WholeLineOptions {
        exterior: cfg.halfguide,
        h_interior: cfg.h_interior,
    };
    let sol = solve_whole_line(&cfg.spec, cfg.omega, opts, cells)?;
    let mut t = Table::new(&["x", "u_re", "u_im"]);
    for x in uniform(cfg.window.0, cfg.window.1, cfg.samples) {
        let v = sol.value(x);
        t.row(&[num(x), num(v.re), num(v.im)]);
    }
    t.write(&cfg.output, "u.csv")?;
    let mut d = Table::new(&["lambda_plus_re", "lambda_plus_im", "lambda_minus_re", "lambda_minus_im"]);
    let (p, m) = (sol.lambda_plus, sol.lambda_minus);
    d.row(&[num(p.re), num(p.im), num(m.re), num(m.im)]);
    d.write(&cfg.output, "dtn.csv")?;
    Ok(format!("lambda+ = {p}\nlambda- = {m}\n"))
}

fn convergence(cfg: &RunConfig) -> Result<String, RunError> {
    let reference = solve_truncated_halfline(&cfg.medium, 0.0, cfg.omega, cfg.truncation, cfg.reference_h)?;
    let report = convergence_study(
        &cfg.medium,
        cfg.omega,
        cfg.halfguide,
        &cfg.inv_h,
        &reference,
        cfg.cells,
        cfg.error_norm,
        |s| cfg.phi.at(s),
    )?;
    let mut t = Table::new(&["inv_h", "error", "slope"]);
    let mut summary = String::new();
    for p in &report.points {
        t.row(&[p.inv_h.to_string(), num(p.error), num(report.slope)]);
        let _ = writeln!(summary, "1/h = {:4}  error = {:.4e}", p.inv_h, p.error);
    }
    t.write(&cfg.output, "convergence.csv")?;
    let _ = writeln!(summary, "{} slope = {:.3}", report.method, report.slope);
    Ok(summary)
}

fn spectrum(cfg: &RunConfig) -> Result<String, RunError> {
    let reference = match cfg.reference_radius {
        Some(r) => r,
        None => reference_spectral_radius(&cfg.medium, cfg.omega, cfg.radius_samples, cfg.truncation, cfg.reference_h)?,
    };
    let method = cfg.halfguide.method.to_string();
    let mut eig = Table::new(&["re_lambda", "im_lambda", "abs_lambda", "method", "inv_h"]);
    let mut bands = Table::new(&["inv_h", "method", "n_h", "spectral_radius", "reference_radius", "pairing_defect"]);
    let mut summary = format!("reference radius = {reference}\n");
    for &k in &cfg.inv_h {
        let mut opt = cfg.halfguide;
        opt.h = 1.0 / k as f64;
        opt.h_theta = opt.h;
        let op = HalfGuideOperator::build(&cfg.medium, cfg.omega, opt)?;
        let mut lambdas: Vec<Complex64> = op.propagator.lambdas.clone();
        lambdas.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
        for l in &lambdas {
            eig.row(&[num(l.re), num(l.im), num(l.norm()), method.clone(), k.to_string()]);
        }
        let n_h = spectrum_band_count(&op.propagator, reference, cfg.band);
        bands.row(&[
            k.to_string(),
            method.clone(),
            n_h.to_string(),
            num(op.spectral_radius()),
            num(reference),
            num(op.spectrum.pairing_defect()),
        ]);
        let _ = writeln!(summary, "1/h = {k:4}  N_h = {n_h:4}  radius = {:.6}", op.spectral_radius());
    }
    eig.write(&cfg.output, "eigenvalues.csv")?;
    bands.write(&cfg.output, "bands.csv")?;
    Ok(summary)
}

fn fibrage(cfg: &RunConfig) -> Result<String, RunError> {
    let pts = sample_broken_line(&cfg.medium.theta, cfg.length, cfg.step)?;
    let mut t = Table::new(&["y1", "y2"]);
    for p in &pts {
        t.row(&[num(p[0]), num(p[1])]);
    }
    t.write(&cfg.output, "points.csv")?;
    Ok(format!("{} points\n", pts.len()))
}
