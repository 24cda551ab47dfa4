//! Gauss-Legendre rules on intervals and a 6-point rule on triangles.

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [0, 1] with `n` points.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss rule: `order` points on every subinterval between
/// consecutive sorted breakpoints.
pub fn quadrature_on_subdivided_interval<F>(breakpoints: &[f64], order: usize, mut integrand: F) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    let (xs, ws) = gauss_legendre(order);
    let mut total = Complex64::new(0.0, 0.0);
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        for (x, wt) in xs.iter().zip(&ws) {
            total += integrand(a + len * x) * (wt * len);
        }
    }
    total
}

/// Degree-4 rule on a triangle: barycentric points and weights summing to 1.
pub const TRIANGLE_RULE: [([f64; 3], f64); 6] = {
    const A: f64 = 0.108103018168070;
    const B: f64 = 0.445948490915965;
    const C: f64 = 0.816847572980459;
    const D: f64 = 0.091576213509771;
    const WA: f64 = 0.223381589678011;
    const WC: f64 = 0.109951743655322;
    [
        ([A, B, B], WA),
        ([B, A, B], WA),
        ([B, B, A], WA),
        ([C, D, D], WC),
        ([D, C, D], WC),
        ([D, D, C], WC),
    ]
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exact_for_polynomials() {
        for n in 1..=10 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn subdivided_rule_integrates_kinked_function() {
        // |x - 0.3| on [0, 1] is exact once 0.3 is a breakpoint
        let v = quadrature_on_subdivided_interval(&[0.0, 0.3, 1.0], 2, |x| Complex64::new((x - 0.3).abs(), 0.0));
        assert!((v.re - (0.045 + 0.245)).abs() < 1e-15);
    }

    #[test]
    fn triangle_rule_degree_four() {
        // integral over the reference triangle of l1^a l2^b l3^c = a! b! c! 2! / (a+b+c+2)! times area
        let fact = |n: u32| (1..=n).product::<u32>().max(1) as f64;
        for a in 0..=4u32 {
            for b in 0..=4 - a {
                let c = 4 - a - b;
                let q: f64 = TRIANGLE_RULE
                    .iter()
                    .map(|(l, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32))
                    .sum();
                let exact = fact(a) * fact(b) * fact(c) * 2.0 / fact(a + b + c + 2);
                assert!((q - exact).abs() < 1e-12, "{a} {b} {c}");
            }
        }
        let total: f64 = TRIANGLE_RULE.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
