//! Dense complex polynomials and rational functions in one affine chart.
//!
//! Everything is stored with ascending coefficients. Residues at infinity
//! are taken through the chart change w = 1/z, which for a simple tail
//! reduces to a Laurent-coefficient extraction: for f = num/den with
//! R = num mod den, the z^{-1} coefficient of f is R[deg den - 1] / lead(den).

use num_complex::Complex64;

pub type C = Complex64;

const TRIM_EPS: f64 = 0.0; // coefficients are trimmed only when exactly zero

/// Polynomial with ascending complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<C>,
}

impl Poly {
    pub fn new(coeffs: Vec<C>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(C::new(1.0, 0.0))
    }

    pub fn constant(c: C) -> Self {
        Poly::new(vec![c])
    }

    /// z - root
    pub fn linear_root(root: C) -> Self {
        Poly::new(vec![-root, C::new(1.0, 0.0)])
    }

    pub fn from_roots(roots: &[C]) -> Self {
        roots
            .iter()
            .fold(Poly::one(), |acc, &r| acc.mul(&Poly::linear_root(r)))
    }

    /// z^k
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![C::new(0.0, 0.0); k + 1];
        coeffs[k] = C::new(1.0, 0.0);
        Poly { coeffs }
    }

    fn trim(&mut self) {
        while let Some(&c) = self.coeffs.last() {
            if c.norm() <= TRIM_EPS {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the zero polynomial is reported as None.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).copied().unwrap_or(C::new(0.0, 0.0))
    }

    pub fn lead(&self) -> C {
        self.coeffs.last().copied().unwrap_or(C::new(0.0, 0.0))
    }

    pub fn eval(&self, z: C) -> C {
        let mut acc = C::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, s: C) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![C::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    /// p(-z)
    pub fn compose_neg(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
                .collect(),
        )
    }

    /// Remainder of self divided by divisor (divisor nonzero).
    pub fn rem(&self, divisor: &Poly) -> Poly {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lead = divisor.lead();
        let mut r = self.coeffs.clone();
        while r.len() > dd {
            let k = r.len() - 1;
            let factor = r[k] / lead;
            for j in 0..=dd {
                let idx = k - dd + j;
                r[idx] -= factor * divisor.coeff(j);
            }
            r.pop();
        }
        Poly::new(r)
    }
}

/// Rational function num/den; the per-component differential is f(z) dz.
#[derive(Debug, Clone)]
pub struct Rational {
    pub num: Poly,
    pub den: Poly,
}

impl Rational {
    pub fn new(num: Poly, den: Poly) -> Self {
        Rational { num, den }
    }

    pub fn eval(&self, z: C) -> C {
        self.num.eval(z) / self.den.eval(z)
    }

    /// Residue of (self) dz at a finite simple pole p (root of den).
    pub fn residue_at(&self, p: C) -> C {
        self.num.eval(p) / self.den.derivative().eval(p)
    }

    /// Residue of (self) dz at infinity: minus the z^{-1} Laurent coefficient.
    pub fn residue_at_infinity(&self) -> C {
        if self.den.is_zero() {
            return C::new(f64::NAN, 0.0);
        }
        let r = self.num.rem(&self.den);
        let dd = self.den.degree().unwrap();
        if dd == 0 {
            return C::new(0.0, 0.0);
        }
        -(r.coeff(dd - 1) / self.den.lead())
    }

    /// Order of vanishing of (self) dz at infinity; negative means a pole.
    /// None for the zero function.
    pub fn order_at_infinity(&self) -> Option<i64> {
        let dn = self.num.degree()? as i64;
        let dd = self.den.degree().expect("nonzero denominator") as i64;
        Some(dd - dn - 2)
    }
}
