//! Dense complex linear algebra for the small systems arising here.
//!
//! Systems are at most a few dozen unknowns, so full-pivot Gaussian
//! elimination with an explicit inverse for the condition number is cheap
//! and keeps the diagnostics exact.

use crate::poly::C;

/// Row-major dense complex matrix.
#[derive(Debug, Clone)]
pub struct CMat {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<C>,
}

impl CMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CMat {
            nrows,
            ncols,
            data: vec![C::new(0.0, 0.0); nrows * ncols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C {
        self.data[r * self.ncols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C) {
        self.data[r * self.ncols + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: C) {
        self.data[r * self.ncols + c] += v;
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| (0..self.ncols).map(|c| self.get(r, c).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[C]) -> Vec<C> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                (0..self.ncols)
                    .map(|c| self.get(r, c) * x[c])
                    .sum::<C>()
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
#[error("singular linear system (rank {rank} of {size})")]
pub struct Singular {
    pub rank: usize,
    pub size: usize,
}

/// Full-pivot LU of a square matrix, retained for repeated solves.
pub struct FullPivLu {
    n: usize,
    lu: CMat,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    norm_a: f64,
}

impl FullPivLu {
    pub fn new(a: &CMat) -> Result<Self, Singular> {
        assert_eq!(a.nrows, a.ncols);
        let n = a.nrows;
        let mut lu = a.clone();
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let scale = lu.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = scale * (f64::EPSILON * n as f64).max(1e-300);
        for k in 0..n {
            // full pivot search in the trailing block
            let mut best = (k, k, lu.get(k, k).norm());
            for r in k..n {
                for c in k..n {
                    let m = lu.get(r, c).norm();
                    if m > best.2 {
                        best = (r, c, m);
                    }
                }
            }
            if best.2 <= tol {
                return Err(Singular { rank: k, size: n });
            }
            let (pr, pc, _) = best;
            if pr != k {
                for c in 0..n {
                    let t = lu.get(k, c);
                    lu.set(k, c, lu.get(pr, c));
                    lu.set(pr, c, t);
                }
                row_perm.swap(k, pr);
            }
            if pc != k {
                for r in 0..n {
                    let t = lu.get(r, k);
                    lu.set(r, k, lu.get(r, pc));
                    lu.set(r, pc, t);
                }
                col_perm.swap(k, pc);
            }
            let piv = lu.get(k, k);
            for r in (k + 1)..n {
                let f = lu.get(r, k) / piv;
                lu.set(r, k, f);
                for c in (k + 1)..n {
                    let v = lu.get(r, c) - f * lu.get(k, c);
                    lu.set(r, c, v);
                }
            }
        }
        Ok(FullPivLu {
            n,
            lu,
            row_perm,
            col_perm,
            norm_a: a.norm_inf(),
        })
    }

    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<C> = self.row_perm.iter().map(|&r| b[r]).collect();
        for k in 0..n {
            for r in (k + 1)..n {
                let f = self.lu.get(r, k);
                let t = y[k];
                y[r] -= f * t;
            }
        }
        for k in (0..n).rev() {
            for c in (k + 1)..n {
                let t = y[c];
                y[k] -= self.lu.get(k, c) * t;
            }
            y[k] /= self.lu.get(k, k);
        }
        let mut x = vec![C::new(0.0, 0.0); n];
        for (k, &c) in self.col_perm.iter().enumerate() {
            x[c] = y[k];
        }
        x
    }

    /// Infinity-norm condition number via the explicit inverse.
    pub fn condition_number(&self) -> f64 {
        let n = self.n;
        let mut inv_norm: f64 = 0.0;
        let mut rows = vec![vec![C::new(0.0, 0.0); n]; n];
        for j in 0..n {
            let mut e = vec![C::new(0.0, 0.0); n];
            e[j] = C::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..n {
                rows[i][j] = col[i];
            }
        }
        for row in &rows {
            let s: f64 = row.iter().map(|v| v.norm()).sum();
            inv_norm = inv_norm.max(s);
        }
        self.norm_a * inv_norm
    }
}

/// Result of eliminating a (possibly rectangular) system.
#[derive(Debug, Clone)]
pub struct RectSolution {
    /// Particular solution with free variables set to zero.
    pub x: Vec<C>,
    pub rank: usize,
    /// Dimension of the solution space (ncols - rank) when consistent.
    pub nullity: usize,
    pub consistent: bool,
    /// Max residual |Ax - b| of the returned particular solution.
    pub residual: f64,
}

/// Full-pivot elimination of an m x n system; detects inconsistency and
/// reports the solution-space dimension.
#[allow(clippy::needless_range_loop)]
pub fn solve_rectangular(a: &CMat, b: &[C], tol_rel: f64) -> RectSolution {
    assert_eq!(b.len(), a.nrows);
    let (m, n) = (a.nrows, a.ncols);
    let mut w = a.clone();
    let mut rhs = b.to_vec();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let scale = w.data.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let rhs_scale = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = scale * tol_rel;
    let mut rank = 0usize;
    while rank < m.min(n) {
        let mut best = (rank, rank, 0.0f64);
        for r in rank..m {
            for c in rank..n {
                let v = w.get(r, c).norm();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        let (pr, pc, _) = best;
        if pr != rank {
            for c in 0..n {
                let t = w.get(rank, c);
                w.set(rank, c, w.get(pr, c));
                w.set(pr, c, t);
            }
            rhs.swap(rank, pr);
        }
        if pc != rank {
            for r in 0..m {
                let t = w.get(r, rank);
                w.set(r, rank, w.get(r, pc));
                w.set(r, pc, t);
            }
            col_perm.swap(rank, pc);
        }
        let piv = w.get(rank, rank);
        for r in (rank + 1)..m {
            let f = w.get(r, rank) / piv;
            if f.norm() == 0.0 {
                continue;
            }
            for c in rank..n {
                let v = w.get(r, c) - f * w.get(rank, c);
                w.set(r, c, v);
            }
            let t = rhs[rank];
            rhs[r] -= f * t;
        }
        rank += 1;
    }
    let mut consistent = true;
    for v in &rhs[rank..m] {
        if v.norm() > (rhs_scale.max(scale)) * tol_rel {
            consistent = false;
        }
    }
    // back substitution, free variables zero
    let mut y = vec![C::new(0.0, 0.0); n];
    for k in (0..rank).rev() {
        let mut acc = rhs[k];
        for c in (k + 1)..n {
            acc -= w.get(k, c) * y[c];
        }
        y[k] = acc / w.get(k, k);
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for (k, &c) in col_perm.iter().enumerate() {
        x[c] = y[k];
    }
    let residual = a
        .matvec(&x)
        .iter()
        .zip(b)
        .map(|(ax, bi)| (ax - bi).norm())
        .fold(0.0, f64::max);
    RectSolution {
        x,
        rank,
        nullity: n - rank,
        consistent,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn solve_square_complex() {
        let mut a = CMat::zeros(2, 2);
        a.set(0, 0, c(1.0, 1.0));
        a.set(0, 1, c(2.0, 0.0));
        a.set(1, 0, c(0.0, -1.0));
        a.set(1, 1, c(1.0, 0.0));
        let lu = FullPivLu::new(&a).unwrap();
        let b = vec![c(3.0, 1.0), c(1.0, 0.0)];
        let x = lu.solve(&b);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-13);
        }
        assert!(lu.condition_number() >= 1.0);
    }

    #[test]
    fn detects_singular() {
        let mut a = CMat::zeros(2, 2);
        a.set(0, 0, c(1.0, 0.0));
        a.set(0, 1, c(2.0, 0.0));
        a.set(1, 0, c(2.0, 0.0));
        a.set(1, 1, c(4.0, 0.0));
        assert!(FullPivLu::new(&a).is_err());
    }

    #[test]
    fn rectangular_consistent_overdetermined() {
        // duplicate rows of a rank-2 system
        let mut a = CMat::zeros(3, 2);
        a.set(0, 0, c(1.0, 0.0));
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(1.0, 0.0));
        a.set(1, 1, c(-1.0, 0.0));
        a.set(2, 0, c(2.0, 0.0));
        a.set(2, 1, c(2.0, 0.0));
        let b = vec![c(2.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)];
        let s = solve_rectangular(&a, &b, 1e-10);
        assert!(s.consistent);
        assert_eq!(s.rank, 2);
        assert_eq!(s.nullity, 0);
        assert!(s.residual < 1e-12);
        assert!((s.x[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rectangular_inconsistent() {
        let mut a = CMat::zeros(2, 1);
        a.set(0, 0, c(1.0, 0.0));
        a.set(1, 0, c(1.0, 0.0));
        let b = vec![c(1.0, 0.0), c(2.0, 0.0)];
        let s = solve_rectangular(&a, &b, 1e-10);
        assert!(!s.consistent);
    }

    #[test]
    fn rectangular_underdetermined_reports_nullity() {
        let mut a = CMat::zeros(1, 3);
        a.set(0, 0, c(1.0, 0.0));
        a.set(0, 1, c(1.0, 0.0));
        a.set(0, 2, c(1.0, 0.0));
        let b = vec![c(3.0, 0.0)];
        let s = solve_rectangular(&a, &b, 1e-10);
        assert!(s.consistent);
        assert_eq!(s.rank, 1);
        assert_eq!(s.nullity, 2);
        assert!(s.residual < 1e-12);
    }
}
