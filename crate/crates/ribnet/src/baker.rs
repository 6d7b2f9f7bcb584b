//! The n-point Baker-Akhiezer function on the nodal curve.
//!
//! On each component the function is (exponential factor) * (rational
//! part). The rational part is a constant plus one simple-pole term per
//! gamma point on that component; the exponential e^{rho z u^j} appears
//! exactly on the component carrying the essential singularity P_j. The
//! coefficients are fixed by matching values across every node and by the
//! normalization values at the R-points, a square linear system. Since
//! only the exponential entries depend on u, derivatives in u come from
//! differentiating the system: A w' = -A' w.

use crate::curve::{Coord, CurveError, PointOnCurve, SpectralCurveData};
use crate::linalg::{CMat, FullPivLu};
use crate::poly::C;
use crate::tol::Tolerances;

#[derive(Debug, thiserror::Error)]
pub enum BaError {
    #[error("dimension mismatch: {unknowns} unknowns vs {equations} equations")]
    DimensionMismatch { unknowns: usize, equations: usize },
    #[error("singular linear system (condition number {condition_number:.3e})")]
    SingularSystem { condition_number: f64 },
    #[error("evaluation at a pole of the function")]
    EvalAtPole,
    #[error("evaluation at an essential singularity")]
    EvalAtEssentialSingularity,
    #[error("direction index {0} out of range")]
    BadDirection(usize),
    #[error("expected a d-vector of length {expected}, found {found}")]
    BadDVector { expected: usize, found: usize },
    #[error("u has length {found}, expected {expected}")]
    BadU { expected: usize, found: usize },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BasisFn {
    Const,
    /// 1/(z - gamma) for a finite gamma point on the component.
    Pole(C),
    /// z, for a gamma point at infinity of the component.
    Linear,
}

impl BasisFn {
    fn eval(&self, z: C) -> C {
        match self {
            BasisFn::Const => C::new(1.0, 0.0),
            BasisFn::Pole(g) => C::new(1.0, 0.0) / (z - g),
            BasisFn::Linear => z,
        }
    }

    /// Value at the infinity of the chart; None when infinity is a pole
    /// of this basis member.
    fn eval_at_infinity(&self) -> Option<C> {
        match self {
            BasisFn::Const => Some(C::new(1.0, 0.0)),
            BasisFn::Pole(_) => Some(C::new(0.0, 0.0)),
            BasisFn::Linear => None,
        }
    }
}

/// Solution of the defining system at one parameter point.
#[derive(Debug, Clone)]
pub struct BaSolution {
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    /// Flat coefficient vector; per-component slices per the solver layout.
    pub coeffs: Vec<C>,
    pub condition_number: f64,
}

/// Solution together with analytic u-derivatives of the coefficients.
#[derive(Debug, Clone)]
pub struct BaJet {
    pub sol: BaSolution,
    /// d1[i] = d/du^i of the coefficient vector.
    pub d1: Vec<Vec<C>>,
    /// Upper triangle (i <= j) of second derivatives, see `pair_index`.
    pub d2: Vec<Vec<C>>,
}

/// Index into the flattened upper-triangular pair list for i <= j < n.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

pub struct BaSolver<'a> {
    pub data: &'a SpectralCurveData,
    basis: Vec<Vec<BasisFn>>,
    offsets: Vec<usize>,
    total: usize,
    tol: Tolerances,
}

impl<'a> BaSolver<'a> {
    pub fn new(data: &'a SpectralCurveData, tol: &Tolerances) -> Result<Self, BaError> {
        let nc = data.components.len();
        let mut basis = Vec::with_capacity(nc);
        let mut offsets = Vec::with_capacity(nc);
        let mut total = 0usize;
        for c in 0..nc {
            let mut b = vec![BasisFn::Const];
            for gi in data.gamma_on(c) {
                match data.gamma[gi].z {
                    Coord::Finite(z) => b.push(BasisFn::Pole(z)),
                    Coord::Infinity => b.push(BasisFn::Linear),
                }
            }
            offsets.push(total);
            total += b.len();
            basis.push(b);
        }
        let equations = data.nodes.len() + data.l + data.codim;
        if total != equations {
            return Err(BaError::DimensionMismatch {
                unknowns: total,
                equations,
            });
        }
        Ok(BaSolver {
            data,
            basis,
            offsets,
            total,
            tol: tol.clone(),
        })
    }

    pub fn system_size(&self) -> usize {
        self.total
    }

    /// Exponential factor on a component at a finite chart coordinate.
    fn exp_factor(&self, comp: usize, z: C, u: &[f64]) -> C {
        match self.data.p_on(comp) {
            Some((j, p)) => (z * p.rho * u[j]).exp(),
            None => C::new(1.0, 0.0),
        }
    }

    /// Scale factor from differentiating the exponential in the given
    /// directions (a multiset). Zero when any direction misses the
    /// component's essential singularity.
    fn exp_deriv_scale(&self, comp: usize, z: C, dirs: &[usize]) -> C {
        let mut s = C::new(1.0, 0.0);
        for &i in dirs {
            match self.data.p_on(comp) {
                Some((j, p)) if j == i => s *= z * p.rho,
                _ => return C::new(0.0, 0.0),
            }
        }
        s
    }

    /// The square system for the coefficient vector, differentiated in the
    /// directions `dirs` (empty for the system itself). Rows: one per node
    /// match, then one per R-condition.
    #[allow(clippy::needless_range_loop)]
    pub fn assemble(&self, u: &[f64], d: &[f64], dirs: &[usize]) -> Result<(CMat, Vec<C>), BaError> {
        if u.len() != self.data.n {
            return Err(BaError::BadU {
                expected: self.data.n,
                found: u.len(),
            });
        }
        if d.len() != self.data.l + self.data.codim {
            return Err(BaError::BadDVector {
                expected: self.data.l + self.data.codim,
                found: d.len(),
            });
        }
        for &i in dirs {
            if i >= self.data.n {
                return Err(BaError::BadDirection(i));
            }
        }
        let mut a = CMat::zeros(self.total, self.total);
        let mut rhs = vec![C::new(0.0, 0.0); self.total];
        let fill = |a: &mut CMat, row: usize, pt: PointOnCurve, sign: f64| -> Result<(), BaError> {
            let z = pt.z.as_finite().ok_or(BaError::EvalAtEssentialSingularity)?;
            let e = self.exp_factor(pt.component, z, u) * self.exp_deriv_scale(pt.component, z, dirs);
            let off = self.offsets[pt.component];
            for (k, b) in self.basis[pt.component].iter().enumerate() {
                a.add_to(row, off + k, b.eval(z) * e * sign);
            }
            Ok(())
        };
        for (row, nd) in self.data.nodes.iter().enumerate() {
            fill(&mut a, row, nd.a, 1.0)?;
            fill(&mut a, row, nd.b, -1.0)?;
        }
        for alpha in 0..(self.data.l + self.data.codim) {
            let row = self.data.nodes.len() + alpha;
            let pt = self.data.physical_r(alpha)?;
            fill(&mut a, row, pt, 1.0)?;
            if dirs.is_empty() {
                rhs[row] = C::new(d[alpha], 0.0);
            }
        }
        Ok((a, rhs))
    }

    pub fn solve(&self, u: &[f64], d: &[f64]) -> Result<BaSolution, BaError> {
        let (a, rhs) = self.assemble(u, d, &[])?;
        let lu = FullPivLu::new(&a).map_err(|_| BaError::SingularSystem {
            condition_number: f64::INFINITY,
        })?;
        let cond = lu.condition_number();
        if !cond.is_finite() || cond > self.tol.cond_max {
            return Err(BaError::SingularSystem {
                condition_number: cond,
            });
        }
        Ok(BaSolution {
            u: u.to_vec(),
            d: d.to_vec(),
            coeffs: lu.solve(&rhs),
            condition_number: cond,
        })
    }

    /// Solution plus first (and optionally second) derivative coefficient
    /// vectors, all through the same factorization.
    pub fn solve_jet(&self, u: &[f64], d: &[f64], second: bool) -> Result<BaJet, BaError> {
        let n = self.data.n;
        let (a, rhs) = self.assemble(u, d, &[])?;
        let lu = FullPivLu::new(&a).map_err(|_| BaError::SingularSystem {
            condition_number: f64::INFINITY,
        })?;
        let cond = lu.condition_number();
        if !cond.is_finite() || cond > self.tol.cond_max {
            return Err(BaError::SingularSystem {
                condition_number: cond,
            });
        }
        let w = lu.solve(&rhs);
        let a_i: Vec<CMat> = (0..n)
            .map(|i| self.assemble(u, d, &[i]).map(|(m, _)| m))
            .collect::<Result<_, _>>()?;
        let mut d1 = Vec::with_capacity(n);
        for ai in &a_i {
            let mut b = ai.matvec(&w);
            for v in &mut b {
                *v = -*v;
            }
            d1.push(lu.solve(&b));
        }
        let mut d2 = vec![];
        if second {
            for i in 0..n {
                for j in i..n {
                    let (a_ij, _) = self.assemble(u, d, &[i, j])?;
                    let t1 = a_ij.matvec(&w);
                    let t2 = a_i[i].matvec(&d1[j]);
                    let t3 = a_i[j].matvec(&d1[i]);
                    let b: Vec<C> = t1
                        .iter()
                        .zip(&t2)
                        .zip(&t3)
                        .map(|((x, y), z)| -(x + y + z))
                        .collect();
                    d2.push(lu.solve(&b));
                }
            }
        }
        Ok(BaJet {
            sol: BaSolution {
                u: u.to_vec(),
                d: d.to_vec(),
                coeffs: w,
                condition_number: cond,
            },
            d1,
            d2,
        })
    }

    /// d/du^i of the coefficient vector (the derivative of the solution).
    pub fn partial(&self, u: &[f64], d: &[f64], i: usize) -> Result<Vec<C>, BaError> {
        if i >= self.data.n {
            return Err(BaError::BadDirection(i));
        }
        let jet = self.solve_jet(u, d, false)?;
        Ok(jet.d1.into_iter().nth(i).unwrap())
    }

    fn rational_part(&self, coeffs: &[C], comp: usize, z: Coord) -> Result<C, BaError> {
        let off = self.offsets[comp];
        match z {
            Coord::Finite(z) => {
                for b in &self.basis[comp] {
                    if let BasisFn::Pole(g) = b {
                        if (z - g).norm() == 0.0 {
                            return Err(BaError::EvalAtPole);
                        }
                    }
                }
                Ok(self.basis[comp]
                    .iter()
                    .enumerate()
                    .map(|(k, b)| coeffs[off + k] * b.eval(z))
                    .sum())
            }
            Coord::Infinity => {
                let mut acc = C::new(0.0, 0.0);
                for (k, b) in self.basis[comp].iter().enumerate() {
                    match b.eval_at_infinity() {
                        Some(v) => acc += coeffs[off + k] * v,
                        None => {
                            if coeffs[off + k].norm() != 0.0 {
                                return Err(BaError::EvalAtPole);
                            }
                        }
                    }
                }
                Ok(acc)
            }
        }
    }

    /// psi(u, p) from a coefficient vector.
    pub fn eval_coeffs(&self, coeffs: &[C], u: &[f64], p: PointOnCurve) -> Result<C, BaError> {
        self.data.component(p.component)?;
        if let Some((_, ess)) = self.data.p_on(p.component) {
            if p.z == ess.z {
                return Err(BaError::EvalAtEssentialSingularity);
            }
        }
        let rational = self.rational_part(coeffs, p.component, p.z)?;
        match p.z {
            Coord::Finite(z) => Ok(self.exp_factor(p.component, z, u) * rational),
            Coord::Infinity => Ok(rational), // no essential point here, checked above
        }
    }

    pub fn eval(&self, sol: &BaSolution, p: PointOnCurve) -> Result<C, BaError> {
        self.eval_coeffs(&sol.coeffs, &sol.u, p)
    }

    /// d/du^i of psi(u, p), from the solution and its derivative vector.
    pub fn eval_deriv(
        &self,
        jet: &BaJet,
        i: usize,
        p: PointOnCurve,
    ) -> Result<C, BaError> {
        if i >= self.data.n {
            return Err(BaError::BadDirection(i));
        }
        if let Some((_, ess)) = self.data.p_on(p.component) {
            if p.z == ess.z {
                return Err(BaError::EvalAtEssentialSingularity);
            }
        }
        let r0 = self.rational_part(&jet.sol.coeffs, p.component, p.z)?;
        let ri = self.rational_part(&jet.d1[i], p.component, p.z)?;
        match p.z {
            Coord::Finite(z) => {
                let e = self.exp_factor(p.component, z, &jet.sol.u);
                let s = self.exp_deriv_scale(p.component, z, &[i]);
                Ok(e * (s * r0 + ri))
            }
            Coord::Infinity => Ok(ri),
        }
    }

    /// Mixed second derivative of psi at a point (requires a jet with
    /// second derivatives).
    pub fn eval_second(
        &self,
        jet: &BaJet,
        i: usize,
        j: usize,
        p: PointOnCurve,
    ) -> Result<C, BaError> {
        let n = self.data.n;
        if i >= n || j >= n {
            return Err(BaError::BadDirection(i.max(j)));
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let wij = &jet.d2[pair_index(n, lo, hi)];
        let r0 = self.rational_part(&jet.sol.coeffs, p.component, p.z)?;
        let ri = self.rational_part(&jet.d1[i], p.component, p.z)?;
        let rj = self.rational_part(&jet.d1[j], p.component, p.z)?;
        let rij = self.rational_part(wij, p.component, p.z)?;
        match p.z {
            Coord::Finite(z) => {
                let e = self.exp_factor(p.component, z, &jet.sol.u);
                let si = self.exp_deriv_scale(p.component, z, &[i]);
                let sj = self.exp_deriv_scale(p.component, z, &[j]);
                Ok(e * (si * sj * r0 + si * rj + sj * ri + rij))
            }
            Coord::Infinity => Ok(rij),
        }
    }

    /// First two expansion coefficients of the rational part at P_j:
    /// xi_0 is the value at infinity, xi_1 the 1/k coefficient.
    pub fn leading_coeffs(&self, coeffs: &[C], j: usize) -> Result<(C, C), BaError> {
        let p = self
            .data
            .p_points
            .get(j)
            .ok_or(BaError::BadDirection(j))?;
        let comp = p.component;
        let off = self.offsets[comp];
        let mut xi0 = C::new(0.0, 0.0);
        let mut inv_z_sum = C::new(0.0, 0.0);
        for (k, b) in self.basis[comp].iter().enumerate() {
            match b {
                BasisFn::Const => xi0 += coeffs[off + k],
                BasisFn::Pole(_) => inv_z_sum += coeffs[off + k],
                BasisFn::Linear => return Err(BaError::EvalAtPole),
            }
        }
        // 1/(z - g) = 1/z + O(1/z^2) and 1/k = 1/(rho z)
        Ok((xi0, inv_z_sum * p.rho))
    }

    /// xi_0 at P_j for the solution itself.
    pub fn xi0(&self, sol: &BaSolution, j: usize) -> Result<C, BaError> {
        self.leading_coeffs(&sol.coeffs, j).map(|(a, _)| a)
    }
}
