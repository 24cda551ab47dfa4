//! Complex banded matrices with an LU factorisation using partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MODULE: &str = "fem-core";
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Column-major band storage with `kl` extra rows for pivoting fill-in
/// (the LAPACK layout).
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ld,
            data: vec![ZERO; ld * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        self.kl + self.ku + i - j + j * self.ld
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            ZERO
        }
    }

    /// Add to entry (i, j); panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![ZERO; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.data[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// Column j restricted to the band, as (row, value) pairs.
    pub fn column(&self, j: usize) -> Vec<(usize, Complex64)> {
        let lo = j.saturating_sub(self.ku);
        let hi = (j + self.kl).min(self.n - 1);
        (lo..=hi).map(|i| (i, self.data[self.idx(i, j)])).collect()
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// LU with partial pivoting. Fails when a pivot is negligible relative to the largest entry.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let scale = self.max_abs();
        let mut ipiv = vec![0usize; n];
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            min_pivot = min_pivot.min(best);
            if !(best > 1e-14 * scale) {
                return Err(Error::Singular {
                    module: MODULE,
                    min_pivot: best,
                });
            }
            ipiv[k] = p;
            let last_col = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Ok(BandedLu {
            lu: self,
            ipiv,
            min_pivot,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    ipiv: Vec<usize>,
    min_pivot: f64,
}

impl BandedLu {
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let a = &self.lu;
        let n = a.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == ZERO {
                continue;
            }
            for i in k + 1..=(k + a.kl).min(n - 1) {
                b[i] -= a.data[a.idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + a.ku + a.kl).min(n - 1) {
                s -= a.data[a.idx(k, j)] * b[j];
            }
            b[k] = s / a.data[a.idx(k, k)];
        }
    }
}

/// Banded system with some dofs fixed by Dirichlet data, eliminated
/// symmetrically so the factorisation can be reused for any data.
#[derive(Debug, Clone)]
pub struct DirichletSystem {
    lu: BandedLu,
    fixed: Vec<usize>,
    /// Original columns of the fixed dofs.
    columns: Vec<Vec<(usize, Complex64)>>,
}

impl DirichletSystem {
    pub fn new(mut a: BandedMatrix, fixed: &[usize]) -> Result<Self> {
        let n = a.size();
        if let Some(&f) = fixed.iter().find(|&&f| f >= n) {
            return Err(Error::invalid(MODULE, format!("constrained dof {f} out of range")));
        }
        let columns: Vec<_> = fixed.iter().map(|&c| a.column(c)).collect();
        let (kl, ku) = a.bandwidths();
        for &c in fixed {
            for j in c.saturating_sub(kl)..=(c + ku).min(n - 1) {
                a.set(c, j, ZERO);
            }
            for i in c.saturating_sub(ku)..=(c + kl).min(n - 1) {
                a.set(i, c, ZERO);
            }
        }
        for &c in fixed {
            a.set(c, c, Complex64::new(1.0, 0.0));
        }
        Ok(Self {
            lu: a.factor()?,
            fixed: fixed.to_vec(),
            columns,
        })
    }

    pub fn min_pivot(&self) -> f64 {
        self.lu.min_pivot()
    }

    /// Solve with `load` on the free dofs and `values` on the fixed ones.
    pub fn solve(&self, load: Option<&[Complex64]>, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.fixed.len());
        let n = self.lu.lu.size();
        let mut rhs = load.map_or_else(|| vec![ZERO; n], <[Complex64]>::to_vec);
        for (col, &g) in self.columns.iter().zip(values) {
            for &(i, v) in col {
                rhs[i] -= v * g;
            }
        }
        for (&c, &g) in self.fixed.iter().zip(values) {
            rhs[c] = g;
        }
        self.lu.solve_in_place(&mut rhs);
        rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> BandedMatrix {
        let mut a = BandedMatrix::zeros(n, kl, ku);
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n - 1) {
                a.set(i, j, c(next(), next()));
            }
        }
        a
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]]
        let mut a = BandedMatrix::zeros(2, 1, 1);
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(1.0, 0.0));
        let lu = a.factor().unwrap();
        let mut b = vec![c(2.0, 0.0), c(3.0, 0.0)];
        lu.solve_in_place(&mut b);
        assert!((b[0] - c(3.0, 0.0)).norm() < 1e-15);
        assert!((b[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_reports_pivot() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.set(0, 0, c(1.0, 0.0));
        a.set(1, 1, c(1.0, 0.0));
        match a.factor() {
            Err(Error::Singular { min_pivot, .. }) => assert_eq!(min_pivot, 0.0),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn dirichlet_fixes_values() {
        let a = random_banded(12, 2, 2, 3);
        let sys = DirichletSystem::new(a.clone(), &[0, 11]).unwrap();
        let u = sys.solve(None, &[c(1.0, 0.5), c(-2.0, 0.0)]);
        assert_eq!(u[0], c(1.0, 0.5));
        assert_eq!(u[11], c(-2.0, 0.0));
        let r = a.matvec(&u);
        for ri in &r[1..11] {
            assert!(ri.norm() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn lu_solves(n in 1usize..40, kl in 0usize..4, ku in 0usize..4, seed in 0u64..1000) {
            let mut a = random_banded(n, kl, ku, seed);
            for i in 0..n { a.add(i, i, c(3.0, 0.0)); }
            let x: Vec<_> = (0..n).map(|i| c(i as f64, 1.0 - i as f64 * 0.5)).collect();
            let mut b = a.matvec(&x);
            a.clone().factor().unwrap().solve_in_place(&mut b);
            for (u, v) in b.iter().zip(&x) {
                prop_assert!((u - v).norm() < 1e-9 * (1.0 + v.norm()));
            }
        }
    }
}
