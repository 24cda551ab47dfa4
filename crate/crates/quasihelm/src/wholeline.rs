//! Whole-line problem: interior FE solve closed by the two exterior DtN
//! coefficients, then extension by the exterior half-line solutions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fem::{assemble_helmholtz_1d, assemble_load, FeFunction1D, Mesh1D};
use crate::halfguide::{HalfGuideOperator, HalfGuideOptions};
use crate::media::{Frequency, MediumSpec};

const MODULE: &str = "wholeline";

/// Solve -(mu u')' - rho omega^2 u = f on (-a, a) with impedance conditions
/// mu u' = -lambda_plus u at a and mu u' = lambda_minus u at -a.
pub fn solve_interior(
    spec: &MediumSpec,
    omega: Frequency,
    lambda_plus: Complex64,
    lambda_minus: Complex64,
    mesh: &Mesh1D,
) -> Result<FeFunction1D> {
    let a = spec.a;
    if (mesh.start() + a).abs() > 1e-12 || (mesh.end() - a).abs() > 1e-12 {
        return Err(Error::invalid(MODULE, "interior mesh must span (-a, a)"));
    }
    let mut m = assemble_helmholtz_1d(
        mesh,
        |x| spec.mu_interior.evaluate(x),
        |x| spec.rho_interior.evaluate(x),
        omega.value(),
    );
    let last = mesh.n_dofs() - 1;
    m.add(last, last, lambda_plus);
    m.add(0, 0, lambda_minus);
    let mut rhs = match &spec.source {
        Some(src) => assemble_load(mesh, |x| src.evaluate(x), 6),
        None => vec![Complex64::new(0.0, 0.0); mesh.n_dofs()],
    };
    let lu = m.factor().map_err(|e| match e {
        Error::Singular { min_pivot, .. } => Error::Singular {
            module: MODULE,
            min_pivot,
        },
        other => other,
    })?;
    lu.solve_in_place(&mut rhs);
    FeFunction1D::new(mesh.clone(), rhs)
}

#[derive(Debug, Clone)]
pub struct WholeLineSolution {
    pub a: f64,
    pub interior: FeFunction1D,
    /// u+ on (0, cells / theta2), normalised to u+(0) = 1.
    pub plus: FeFunction1D,
    /// Exterior solution towards -infinity, as a function of the distance from -a.
    pub minus: FeFunction1D,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

impl WholeLineSolution {
    pub fn value(&self, x: f64) -> Complex64 {
        let a = self.a;
        if x > a {
            self.interior.value(a) * self.plus.value(x - a)
        } else if x < -a {
            self.interior.value(-a) * self.minus.value(-a - x)
        } else {
            self.interior.value(x)
        }
    }

    /// One piecewise polynomial covering the exterior pieces as far as they were computed.
    pub fn to_fe_function(&self) -> Result<FeFunction1D> {
        let a = self.a;
        let minus = self
            .minus
            .reflected()
            .shifted(-a)
            .scaled(self.interior.value(-a));
        let plus = self.plus.shifted(a).scaled(self.interior.value(a));
        minus.concatenate(&self.interior)?.concatenate(&plus)
    }

    /// Flux jump |mu u'(a-) - mu u'(a+)| at the right interface, with mu taken
    /// from the two sides.
    pub fn flux_jump_right(&self, spec: &MediumSpec) -> f64 {
        let a = self.a;
        let e = self.interior.mesh.n_elements() - 1;
        let inner = self.interior.eval_on(e, a).1 * spec.mu_interior.evaluate(a);
        let mu_out = spec.exterior.mu.evaluate(a * spec.exterior.theta.theta1(), a * spec.exterior.theta.theta2());
        let outer = self.interior.value(a) * self.plus.eval_on(0, 0.0).1 * mu_out;
        (inner - outer).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WholeLineOptions {
    pub exterior: HalfGuideOptions,
    pub h_interior: f64,
}

/// Full pipeline. The exterior pieces cover `cells` periods on each side.
pub fn solve_whole_line(
    spec: &MediumSpec,
    omega: Frequency,
    options: WholeLineOptions,
    cells: usize,
) -> Result<WholeLineSolution> {
    let plus_medium = spec.exterior.plus_side(spec.a);
    let minus_medium = spec.exterior.minus_side(spec.a);
    let plus_op = HalfGuideOperator::build(&plus_medium, omega, options.exterior)?;
    let minus_op = HalfGuideOperator::build(&minus_medium, omega, options.exterior)?;
    let one = vec![Complex64::new(1.0, 0.0); plus_op.space().dim()];
    let lambda_plus = plus_op.dtn_coefficient(&one)?;
    let lambda_minus = minus_op.dtn_coefficient(&one)?;
    let order = match options.exterior.method {
        crate::halfguide::Method::Quasi1d => options.exterior.order,
        crate::halfguide::Method::TwoD => 1,
    };
    let mesh = Mesh1D::fitted(-spec.a, spec.a, options.h_interior, &spec.interior_breakpoints(), order)?;
    let interior = solve_interior(spec, omega, lambda_plus, lambda_minus, &mesh)?;
    Ok(WholeLineSolution {
        a: spec.a,
        interior,
        plus: plus_op.solve_halfline(&one, cells)?,
        minus: minus_op.solve_halfline(&one, cells)?,
        lambda_plus,
        lambda_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{CutVector, PeriodicMedium, PiecewiseConstant, Source};

    #[test]
    fn homogeneous_line_with_exact_impedance() {
        // constant medium everywhere: exact DtN is -i omega; the interior
        // solution must match the outgoing Green function of the source
        let th = CutVector::sixty_degrees();
        let spec = MediumSpec::new(
            PeriodicMedium::constant(1.0, 1.0, th).unwrap(),
            1.0,
            PiecewiseConstant::constant(-1.0, 1.0, 1.0).unwrap(),
            PiecewiseConstant::constant(-1.0, 1.0, 1.0).unwrap(),
            Some(Source {
                center: 0.0,
                half_width: 0.5,
                sharpness: 1.0,
            }),
        )
        .unwrap();
        let omega = Frequency::new(Complex64::new(3.0, 0.5)).unwrap();
        let lam = -Complex64::new(0.0, 1.0) * omega.value();
        let coarse = Mesh1D::uniform(-1.0, 1.0, 200, 1).unwrap();
        let fine = Mesh1D::uniform(-1.0, 1.0, 400, 1).unwrap();
        let u1 = solve_interior(&spec, omega, lam, lam, &coarse).unwrap();
        let u2 = solve_interior(&spec, omega, lam, lam, &fine).unwrap();
        // symmetric source and medium
        assert!((u2.value(0.7) - u2.value(-0.7)).norm() < 1e-10);
        assert!((u1.value(0.3) - u2.value(0.3)).norm() < 1e-3 * u2.value(0.3).norm());
    }
}
