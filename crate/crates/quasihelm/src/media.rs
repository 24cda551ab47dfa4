//! Periodic coefficients on the 2D torus, the cut direction, and the
//! quasiperiodic 1D traces obtained by restricting along a line.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

const MODULE: &str = "media";

/// Reduce `v` to `[0, 1)`. Values that round to 1.0 map to 0.0.
pub fn wrap_unit(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Direction of the cut line in the 2D periodicity cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutVector {
    theta1: f64,
    theta2: f64,
    claims_irrational: bool,
}

impl CutVector {
    /// Build from components. `theta2` must be positive and `theta1` non-negative.
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite()) || theta2 <= 0.0 || theta1 < 0.0 {
            return Err(Error::invalid(
                MODULE,
                format!("cut vector ({theta1}, {theta2}) needs theta1 >= 0 and theta2 > 0"),
            ));
        }
        Ok(Self {
            theta1,
            theta2,
            claims_irrational: false,
        })
    }

    /// Unit vector at `angle` radians from the y1 axis, in (0, pi/2].
    pub fn from_angle(angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle <= PI / 2.0) {
            return Err(Error::invalid(MODULE, format!("cut angle {angle} outside (0, pi/2]")));
        }
        Self::new(angle.cos().max(0.0), angle.sin())
    }

    /// The direction (cos pi/3, sin pi/3) used throughout the examples.
    pub fn sixty_degrees() -> Self {
        Self {
            theta1: 0.5,
            theta2: 0.75f64.sqrt(),
            claims_irrational: true,
        }
    }

    /// Record that the caller asserts theta1/theta2 is irrational. Floats
    /// cannot certify this; the flag is carried for diagnostics only.
    pub fn assume_irrational(mut self) -> Self {
        self.claims_irrational = true;
        self
    }

    pub fn claims_irrational(&self) -> bool {
        self.claims_irrational
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    /// Transverse shift per period cell, theta1/theta2.
    pub fn shift(&self) -> f64 {
        self.theta1 / self.theta2
    }

    /// Length of the cut-direction cell (0, 1/theta2).
    pub fn cell_length(&self) -> f64 {
        1.0 / self.theta2
    }
}

/// Tabulated coefficient on a uniform periodic grid, sampled at (i/n1, j/n2).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    n1: usize,
    n2: usize,
    /// Row-major: `values[j * n1 + i]`.
    values: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(n1: usize, n2: usize, values: Vec<f64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::invalid(MODULE, "coefficient table needs a non-empty grid"));
        }
        if values.len() != n1 * n2 {
            return Err(Error::invalid(
                MODULE,
                format!("coefficient table has {} values, grid needs {}", values.len(), n1 * n2),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(MODULE, format!("coefficient table value {v} is not positive")));
        }
        Ok(Self { n1, n2, values })
    }

    /// Parse the text format: a header line `n1 n2`, then `n2` rows of `n1`
    /// whitespace separated values (row j holds y2 = j/n2). `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let mut dim = |name: &str| -> Result<usize> {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::invalid(MODULE, format!("coefficient table is missing {name}")))?;
            let n: usize = tok
                .parse()
                .map_err(|_| Error::invalid(MODULE, format!("bad grid size {tok:?}")))?;
            if n == 0 || n > 1 << 12 {
                return Err(Error::invalid(MODULE, format!("grid size {n} out of range")));
            }
            Ok(n)
        };
        let n1 = dim("n1")?;
        let n2 = dim("n2")?;
        let values = tokens
            .map(|t| t.parse::<f64>().map_err(|_| Error::invalid(MODULE, format!("bad table value {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n1, n2, values)
    }

    /// Periodic bilinear interpolation.
    pub fn evaluate(&self, y1: f64, y2: f64) -> f64 {
        let (i0, i1, a) = Self::bracket(y1, self.n1);
        let (j0, j1, b) = Self::bracket(y2, self.n2);
        let v = |i: usize, j: usize| self.values[j * self.n1 + i];
        (1.0 - a) * (1.0 - b) * v(i0, j0) + a * (1.0 - b) * v(i1, j0) + (1.0 - a) * b * v(i0, j1) + a * b * v(i1, j1)
    }

    fn bracket(y: f64, n: usize) -> (usize, usize, f64) {
        let t = wrap_unit(y) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        (i, (i + 1) % n, t - i as f64)
    }

    fn bounds(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// 1.5 + cos(2 pi y1) cos(2 pi y2)
    TrigMu,
    /// 1.5 + 0.5 sin(2 pi y1) + 0.5 sin(2 pi y2)
    TrigRho,
    Constant(f64),
    Table(Arc<CoefficientTable>),
}

impl Profile {
    fn evaluate(&self, y1: f64, y2: f64) -> f64 {
        match self {
            Profile::TrigMu => 1.5 + (2.0 * PI * y1).cos() * (2.0 * PI * y2).cos(),
            Profile::TrigRho => 1.5 + 0.5 * (2.0 * PI * y1).sin() + 0.5 * (2.0 * PI * y2).sin(),
            Profile::Constant(c) => *c,
            Profile::Table(t) => t.evaluate(y1, y2),
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match self {
            Profile::TrigMu => (0.5, 2.5),
            Profile::TrigRho => (0.5, 2.5),
            Profile::Constant(c) => (*c, *c),
            Profile::Table(t) => t.bounds(),
        }
    }
}

/// A Z^2-periodic coefficient, optionally composed with y -> sign*y + shift.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCoefficient2D {
    profile: Profile,
    sign: f64,
    shift: [f64; 2],
}

impl PeriodicCoefficient2D {
    pub fn new(profile: Profile) -> Result<Self> {
        if let Profile::Constant(c) = profile {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::invalid(MODULE, format!("constant coefficient {c} is not positive")));
            }
        }
        Ok(Self {
            profile,
            sign: 1.0,
            shift: [0.0, 0.0],
        })
    }

    pub fn trig_mu() -> Self {
        Self::new(Profile::TrigMu).expect("preset is valid")
    }

    pub fn trig_rho() -> Self {
        Self::new(Profile::TrigRho).expect("preset is valid")
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Profile::Constant(c))
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn evaluate(&self, y1: f64, y2: f64) -> f64 {
        self.profile.evaluate(self.sign * y1 + self.shift[0], self.sign * y2 + self.shift[1])
    }

    /// Essential lower and upper bounds.
    pub fn bounds(&self) -> (f64, f64) {
        self.profile.bounds()
    }

    /// y -> F(y + offset).
    pub fn translated(&self, offset: [f64; 2]) -> Self {
        Self {
            profile: self.profile.clone(),
            sign: self.sign,
            shift: [self.shift[0] + self.sign * offset[0], self.shift[1] + self.sign * offset[1]],
        }
    }

    /// y -> F(-y).
    pub fn reflected(&self) -> Self {
        Self {
            profile: self.profile.clone(),
            sign: -self.sign,
            shift: self.shift,
        }
    }
}

/// Exterior medium: two periodic coefficients and a cut direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMedium {
    pub mu: PeriodicCoefficient2D,
    pub rho: PeriodicCoefficient2D,
    pub theta: CutVector,
}

impl PeriodicMedium {
    pub fn new(mu: PeriodicCoefficient2D, rho: PeriodicCoefficient2D, theta: CutVector) -> Self {
        Self { mu, rho, theta }
    }

    pub fn trig(theta: CutVector) -> Self {
        Self::new(PeriodicCoefficient2D::trig_mu(), PeriodicCoefficient2D::trig_rho(), theta)
    }

    /// Constant (mu, rho) medium.
    pub fn constant(mu: f64, rho: f64, theta: CutVector) -> Result<Self> {
        Ok(Self::new(
            PeriodicCoefficient2D::constant(mu)?,
            PeriodicCoefficient2D::constant(rho)?,
            theta,
        ))
    }

    /// mu at the trace point `s + x theta`.
    pub fn mu_trace(&self, s: f64, x: f64) -> f64 {
        trace_coefficient(&self.mu, &self.theta, s, x)
    }

    pub fn rho_trace(&self, s: f64, x: f64) -> f64 {
        trace_coefficient(&self.rho, &self.theta, s, x)
    }

    /// Upper bound on mu and lower bound on rho, in that order.
    pub fn mu_plus_rho_minus(&self) -> (f64, f64) {
        (self.mu.bounds().1, self.rho.bounds().0)
    }

    /// Medium seen by the plus-side exterior problem starting at x = a.
    pub fn plus_side(&self, a: f64) -> Self {
        let off = [a * self.theta.theta1, a * self.theta.theta2];
        Self::new(self.mu.translated(off), self.rho.translated(off), self.theta)
    }

    /// Medium seen from x = -a looking towards -infinity, written as a plus-side problem.
    pub fn minus_side(&self, a: f64) -> Self {
        // F(-y - a theta)
        let off = [-a * self.theta.theta1, -a * self.theta.theta2];
        Self::new(
            self.mu.translated(off).reflected(),
            self.rho.translated(off).reflected(),
            self.theta,
        )
    }
}

/// Coefficient along the cut line through (s, 0): F((s, 0) + x theta).
pub fn trace_coefficient(coef: &PeriodicCoefficient2D, theta: &CutVector, s: f64, x: f64) -> f64 {
    coef.evaluate(s + x * theta.theta1, x * theta.theta2)
}

/// Transverse coordinate of a point: the s such that y lies on the line through (s, 0).
pub fn s_theta(y: [f64; 2], theta: &CutVector) -> f64 {
    y[0] - y[1] / theta.theta2 * theta.theta1
}

/// Points x theta for x = 0, step, 2 step, ... up to `length`, reduced mod 1.
pub fn sample_broken_line(theta: &CutVector, length: f64, step: f64) -> Result<Vec<[f64; 2]>> {
    if !(step > 0.0 && length >= 0.0 && step.is_finite() && length.is_finite()) {
        return Err(Error::invalid(MODULE, "broken line needs positive step and length"));
    }
    let count = (length / step).floor() as usize;
    Ok((0..=count)
        .map(|k| {
            let x = k as f64 * step;
            [wrap_unit(x * theta.theta1), wrap_unit(x * theta.theta2)]
        })
        .collect())
}

/// Piecewise constant positive function on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::invalid(
                MODULE,
                format!(
                    "piecewise table needs k+1 breakpoints for k values (got {} and {})",
                    breakpoints.len(),
                    values.len()
                ),
            ));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(MODULE, "piecewise breakpoints must be finite and increasing"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(MODULE, format!("piecewise value {v} is not positive")));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(lo: f64, hi: f64, v: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![v])
    }

    /// Parse `x0, x1, ..., xk : v1, ..., vk`.
    pub fn parse(text: &str) -> Result<Self> {
        let (bp, vals) = text
            .split_once(':')
            .ok_or_else(|| Error::invalid(MODULE, "piecewise table needs `breakpoints : values`"))?;
        let list = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|t| {
                    let t = t.trim();
                    t.parse::<f64>()
                        .map_err(|_| Error::invalid(MODULE, format!("bad number {t:?} in piecewise table")))
                })
                .collect()
        };
        Self::new(list(bp)?, list(vals)?)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at x; a point on a breakpoint takes the value to its right
    /// (the last piece is closed on the right).
    pub fn evaluate(&self, x: f64) -> f64 {
        let k = self.breakpoints[1..self.breakpoints.len() - 1].partition_point(|&b| b <= x);
        self.values[k]
    }
}

/// Smooth compactly supported bump exp(k (1 - 1/(1 - ((x - c)/w)^2))).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub center: f64,
    pub half_width: f64,
    pub sharpness: f64,
}

impl Source {
    pub fn bump() -> Self {
        Self {
            center: 0.0,
            half_width: 1.0,
            sharpness: 100.0,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.half_width;
        if t.abs() >= 1.0 {
            return 0.0;
        }
        (self.sharpness * (1.0 - 1.0 / (1.0 - t * t))).exp()
    }
}

/// Complex frequency with strictly positive imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency(Complex64);

impl Frequency {
    pub fn new(omega: Complex64) -> Result<Self> {
        if !(omega.re.is_finite() && omega.im.is_finite() && omega.im > 0.0) {
            return Err(Error::invalid(MODULE, format!("frequency {omega} needs Im > 0")));
        }
        Ok(Self(omega))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

/// Full problem description: exterior lift, interior pieces on (-a, a), source.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    pub exterior: PeriodicMedium,
    pub a: f64,
    pub mu_interior: PiecewiseConstant,
    pub rho_interior: PiecewiseConstant,
    pub source: Option<Source>,
}

impl MediumSpec {
    pub fn new(
        exterior: PeriodicMedium,
        a: f64,
        mu_interior: PiecewiseConstant,
        rho_interior: PiecewiseConstant,
        source: Option<Source>,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(MODULE, format!("interior half-width {a} must be positive")));
        }
        for (name, p) in [("mu", &mu_interior), ("rho", &rho_interior)] {
            let b = p.breakpoints();
            if (b[0] + a).abs() > 1e-12 || (b[b.len() - 1] - a).abs() > 1e-12 {
                return Err(Error::invalid(MODULE, format!("interior {name} table must span (-{a}, {a})")));
            }
        }
        Ok(Self {
            exterior,
            a,
            mu_interior,
            rho_interior,
            source,
        })
    }

    /// The setup with trigonometric exterior coefficients, a = 1, three-piece
    /// interior mu and two-piece interior rho matching the exterior values at x = +-1.
    pub fn reference_setup() -> Self {
        let third = 1.0 / 3.0;
        Self {
            exterior: PeriodicMedium::trig(CutVector::sixty_degrees()),
            a: 1.0,
            mu_interior: PiecewiseConstant::new(vec![-1.0, -third, third, 1.0], vec![0.8339, 2.0, 0.8339])
                .expect("preset is valid"),
            rho_interior: PiecewiseConstant::new(vec![-1.0, 0.0, 1.0], vec![1.8729, 1.1271]).expect("preset is valid"),
            source: Some(Source::bump()),
        }
    }

    /// Interior breakpoints strictly inside (-a, a).
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .mu_interior
            .breakpoints()
            .iter()
            .chain(self.rho_interior.breakpoints())
            .copied()
            .filter(|x| x.abs() < self.a - 1e-12)
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        b
    }
}
