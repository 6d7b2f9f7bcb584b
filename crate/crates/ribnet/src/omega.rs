//! Construction of the even meromorphic differential on the nodal curve.
//!
//! On each rational component the differential is f(z) dz with f rational.
//! Prescribed data: simple poles at the Q- and R-points (and both branches
//! of every node, with opposite residues, the dualizing-sheaf condition),
//! zeros at the P-points and at gamma together with its sigma image, and
//! residue 1 at every Q. Writing f = Z(z) M(z) / D(z) with Z, D known from
//! the divisors leaves the coefficients of M as unknowns of a linear
//! system; evenness ties sigma-paired components together and forces
//! oddness of f on self-paired ones.

use serde::Serialize;

use crate::curve::{Coord, PointOnCurve, SpectralCurveData};
use crate::linalg::{solve_rectangular, CMat};
use crate::poly::{Poly, Rational, C};
use crate::tol::Tolerances;

#[derive(Debug, thiserror::Error)]
pub enum OmegaError {
    #[error("data failed structural validation: {0:?}")]
    InvalidData(Vec<String>),
    #[error("no admissible differential: {reason}")]
    NotFound { reason: String },
}

/// The differential, stored per component as numerator/denominator
/// coefficient lists, plus the extracted residues.
#[derive(Debug, Clone)]
pub struct OmegaData {
    pub per_component: Vec<Rational>,
    /// r_1..r_l, the residues at the movable R-points.
    pub residues_r: Vec<f64>,
    /// Residues at Q_1..Q_{n+N} (certified to be 1).
    pub residues_q: Vec<f64>,
    /// Dimension of the solution space of the defining linear system.
    pub nullity: usize,
    pub rank: usize,
}

impl OmegaData {
    /// r_1..r_l.
    pub fn residues(&self) -> &[f64] {
        &self.residues_r
    }

    /// Value of f_c at a finite chart coordinate.
    pub fn eval(&self, comp: usize, z: C) -> C {
        self.per_component[comp].eval(z)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidueTable {
    pub residues_q: Vec<f64>,
    pub residues_r: Vec<f64>,
    pub solution_space_dim: usize,
}

struct CompDivisor {
    finite_poles: Vec<C>,
    pole_at_inf: usize,
    finite_zeros: Vec<C>,
    zero_at_inf: usize,
}

fn push_if_on(list: &mut Vec<C>, inf_count: &mut usize, comp: usize, p: PointOnCurve) {
    if p.component != comp {
        return;
    }
    match p.z {
        Coord::Finite(z) => list.push(z),
        Coord::Infinity => *inf_count += 1,
    }
}

fn divisor_on_component(data: &SpectralCurveData, comp: usize) -> Result<CompDivisor, OmegaError> {
    let mut d = CompDivisor {
        finite_poles: vec![],
        pole_at_inf: 0,
        finite_zeros: vec![],
        zero_at_inf: 0,
    };
    for q in &data.q_points {
        push_if_on(&mut d.finite_poles, &mut d.pole_at_inf, comp, *q);
    }
    for (alpha, r) in data.r_points.iter().enumerate() {
        push_if_on(&mut d.finite_poles, &mut d.pole_at_inf, comp, *r);
        if alpha < data.l {
            let sr = data
                .sigma_image(*r)
                .map_err(|e| OmegaError::NotFound { reason: e.to_string() })?;
            push_if_on(&mut d.finite_poles, &mut d.pole_at_inf, comp, sr);
        }
    }
    for nd in &data.nodes {
        push_if_on(&mut d.finite_poles, &mut d.pole_at_inf, comp, nd.a);
        push_if_on(&mut d.finite_poles, &mut d.pole_at_inf, comp, nd.b);
    }
    for p in &data.p_points {
        push_if_on(&mut d.finite_zeros, &mut d.zero_at_inf, comp, p.point());
    }
    for g in &data.gamma {
        push_if_on(&mut d.finite_zeros, &mut d.zero_at_inf, comp, *g);
        let sg = data
            .sigma_image(*g)
            .map_err(|e| OmegaError::NotFound { reason: e.to_string() })?;
        push_if_on(&mut d.finite_zeros, &mut d.zero_at_inf, comp, sg);
    }
    Ok(d)
}

struct Orbit {
    rep: usize,
    partner: usize, // == rep for self-paired
    z_poly: Poly,
    d_poly: Poly,
    deg_m: usize,
    offset: usize,
}

/// Residue row entries at a finite simple pole p of Z*M/D, one per
/// coefficient of M.
fn residue_row_finite(orbit: &Orbit, p: C) -> Vec<C> {
    let dprime = orbit.d_poly.derivative().eval(p);
    let zval = orbit.z_poly.eval(p);
    let mut row = Vec::with_capacity(orbit.deg_m + 1);
    let mut pk = C::new(1.0, 0.0);
    for _ in 0..=orbit.deg_m {
        row.push(zval * pk / dprime);
        pk *= p;
    }
    row
}

/// Residue row entries at a simple pole at infinity.
fn residue_row_infinity(orbit: &Orbit) -> Vec<C> {
    // residue at infinity = -[z^{deg D - 1}](Z * M) / lead(D)
    let dd = orbit.d_poly.degree().unwrap_or(0);
    let lead = orbit.d_poly.lead();
    (0..=orbit.deg_m)
        .map(|k| {
            let zm = orbit.z_poly.mul(&Poly::monomial(k));
            -(zm.coeff(dd.saturating_sub(1)) / lead)
        })
        .collect()
}

pub fn build_omega(data: &SpectralCurveData, tol: &Tolerances) -> Result<OmegaData, OmegaError> {
    let report = data.validate();
    if !report.is_admissible() {
        return Err(OmegaError::InvalidData(
            report.violations.iter().map(|v| v.code.clone()).collect(),
        ));
    }

    let nc = data.components.len();
    let mut orbits: Vec<Orbit> = vec![];
    let mut orbit_of_comp = vec![usize::MAX; nc];
    let mut offset = 0usize;
    for c in 0..nc {
        let partner = data.components[c].sigma_partner;
        if partner < c {
            orbit_of_comp[c] = orbit_of_comp[partner];
            continue;
        }
        let div = divisor_on_component(data, c)?;
        if div.pole_at_inf > 1 || div.zero_at_inf > 1 {
            return Err(OmegaError::NotFound {
                reason: format!("component {c}: multiple marked points at infinity"),
            });
        }
        let d_poly = Poly::from_roots(&div.finite_poles);
        let z_poly = Poly::from_roots(&div.finite_zeros);
        let deg_d = div.finite_poles.len() as i64;
        let deg_z = div.finite_zeros.len() as i64;
        let deg_m = deg_d - 2 + div.pole_at_inf as i64 - div.zero_at_inf as i64 - deg_z;
        if deg_m < 0 {
            return Err(OmegaError::NotFound {
                reason: format!("component {c}: divisor admits no rational differential"),
            });
        }
        let deg_m = deg_m as usize;
        orbit_of_comp[c] = orbits.len();
        orbits.push(Orbit {
            rep: c,
            partner,
            z_poly,
            d_poly,
            deg_m,
            offset,
        });
        offset += deg_m + 1;
    }
    let total_unknowns = offset;

    // assemble rows
    let mut rows: Vec<Vec<C>> = vec![];
    let mut rhs: Vec<C> = vec![];
    let zero_row = vec![C::new(0.0, 0.0); total_unknowns];
    let place = |row: &mut Vec<C>, orbit: &Orbit, entries: &[C]| {
        for (k, &e) in entries.iter().enumerate() {
            row[orbit.offset + k] += e;
        }
    };

    // residue 1 at every Q
    for q in &data.q_points {
        let orbit = &orbits[orbit_of_comp[q.component]];
        let entries = match q.z {
            Coord::Finite(z) => residue_row_finite(orbit, z),
            Coord::Infinity => residue_row_infinity(orbit),
        };
        let mut row = zero_row.clone();
        place(&mut row, orbit, &entries);
        rows.push(row);
        rhs.push(C::new(1.0, 0.0));
    }

    // opposite residues across every node
    for nd in &data.nodes {
        let mut row = zero_row.clone();
        for br in [nd.a, nd.b] {
            let orbit = &orbits[orbit_of_comp[br.component]];
            let entries = match br.z {
                Coord::Finite(z) => residue_row_finite(orbit, z),
                Coord::Infinity => residue_row_infinity(orbit),
            };
            place(&mut row, orbit, &entries);
        }
        rows.push(row);
        rhs.push(C::new(0.0, 0.0));
    }

    // oddness on self-paired components:
    // Z(z) z^k D(-z) + (-1)^k Z(-z) z^k D(z) must cancel coefficient-wise
    for orbit in &orbits {
        if orbit.rep != orbit.partner {
            continue;
        }
        let d_neg = orbit.d_poly.compose_neg();
        let z_neg = orbit.z_poly.compose_neg();
        let mut basis_polys: Vec<Poly> = vec![];
        let mut max_len = 0;
        for k in 0..=orbit.deg_m {
            let zk = Poly::monomial(k);
            let a = orbit.z_poly.mul(&zk).mul(&d_neg);
            let b = z_neg.mul(&zk).mul(&orbit.d_poly);
            let e = if k % 2 == 0 { a.add(&b) } else { a.add(&b.scale(C::new(-1.0, 0.0))) };
            max_len = max_len.max(e.coeffs.len());
            basis_polys.push(e);
        }
        for pw in 0..max_len {
            let mut row = zero_row.clone();
            let mut nonzero = false;
            for (k, e) in basis_polys.iter().enumerate() {
                let c = e.coeff(pw);
                if c.norm() > 0.0 {
                    nonzero = true;
                }
                row[orbit.offset + k] += c;
            }
            if nonzero {
                rows.push(row);
                rhs.push(C::new(0.0, 0.0));
            }
        }
    }

    let mut mat = CMat::zeros(rows.len(), total_unknowns);
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            mat.set(r, c, v);
        }
    }
    let sol = solve_rectangular(&mat, &rhs, tol.solve_rank);
    if !sol.consistent {
        return Err(OmegaError::NotFound {
            reason: format!(
                "defining linear system is inconsistent (rank {}, residual {:.2e})",
                sol.rank, sol.residual
            ),
        });
    }

    // assemble per-component rational differentials
    let mut per_component: Vec<Rational> = Vec::with_capacity(nc);
    for c in 0..nc {
        let orbit = &orbits[orbit_of_comp[c]];
        let m = Poly::new(sol.x[orbit.offset..orbit.offset + orbit.deg_m + 1].to_vec());
        per_component.push(Rational::new(orbit.z_poly.mul(&m), orbit.d_poly.clone()));
    }

    let omega = OmegaData {
        per_component,
        residues_r: vec![],
        residues_q: vec![],
        nullity: sol.nullity,
        rank: sol.rank,
    };
    certify(data, omega, tol)
}

fn residue_at(omega: &OmegaData, p: PointOnCurve) -> C {
    let f = &omega.per_component[p.component];
    match p.z {
        Coord::Finite(z) => f.residue_at(z),
        Coord::Infinity => f.residue_at_infinity(),
    }
}

fn certify(
    data: &SpectralCurveData,
    mut omega: OmegaData,
    tol: &Tolerances,
) -> Result<OmegaData, OmegaError> {
    let fail = |reason: String| OmegaError::NotFound { reason };

    // residue 1 at every Q
    let mut residues_q = vec![];
    for (k, q) in data.q_points.iter().enumerate() {
        let r = residue_at(&omega, *q);
        if (r - C::new(1.0, 0.0)).norm() > tol.certification {
            return Err(fail(format!("residue at Q_{} is {r} instead of 1", k + 1)));
        }
        residues_q.push(r.re);
    }

    // evenness of the residues at the movable R-points
    let mut residues_r = vec![];
    for alpha in 0..data.l {
        let rp = data.r_points[alpha];
        let sr = data.sigma_image(rp).expect("validated data");
        let r1 = residue_at(&omega, rp);
        let r2 = residue_at(&omega, sr);
        let scale = r1.norm().max(r2.norm()).max(1.0);
        if (r1 - r2).norm() > tol.certification * scale {
            return Err(fail(format!(
                "residues at R_{} and sigma R_{} differ: {r1} vs {r2}",
                alpha + 1,
                alpha + 1
            )));
        }
        if r1.im.abs() > tol.certification * scale {
            return Err(fail(format!("residue r_{} is not real: {r1}", alpha + 1)));
        }
        residues_r.push(r1.re);
    }

    // opposite residues across nodes
    for (i, nd) in data.nodes.iter().enumerate() {
        let ra = residue_at(&omega, nd.a);
        let rb = residue_at(&omega, nd.b);
        let scale = ra.norm().max(rb.norm()).max(1.0);
        if (ra + rb).norm() > tol.certification * scale {
            return Err(fail(format!(
                "node_{} residues do not cancel: {ra} + {rb}",
                i + 1
            )));
        }
    }

    // evenness at sample points
    let samples = [0.2345, 0.6789, 1.2345, -1.8765, 2.7191];
    for comp in &data.components {
        let f = &omega.per_component[comp.id];
        for &s in &samples {
            let z = C::new(s, 0.0);
            let denom = f.den.eval(z);
            if denom.norm() < 1e-6 {
                continue; // too close to a pole for a meaningful sample
            }
            let here = f.eval(z);
            let pulled = if comp.sigma_partner == comp.id {
                // sigma^*(f dz) = -f(-z) dz
                let zm = -z;
                if f.den.eval(zm).norm() < 1e-6 {
                    continue;
                }
                -f.eval(zm)
            } else {
                let g = &omega.per_component[comp.sigma_partner];
                if g.den.eval(z).norm() < 1e-6 {
                    continue;
                }
                g.eval(z)
            };
            let scale = here.norm().max(pulled.norm()).max(1e-300);
            if (here - pulled).norm() > tol.evenness * scale.max(1.0) {
                return Err(fail(format!(
                    "differential is not even at sample {s} on component {}",
                    comp.id
                )));
            }
        }
    }

    // residue theorem per component, straight from the rational form
    for (cid, f) in omega.per_component.iter().enumerate() {
        let mut sum = f.residue_at_infinity();
        let mut seen: Vec<C> = vec![];
        // poles are the distinct roots of D, which we stored as linear factors
        let pole_list = component_pole_list(data, cid);
        for p in pole_list {
            if seen.iter().any(|&q| (q - p).norm() < 1e-12) {
                continue;
            }
            seen.push(p);
            sum += f.residue_at(p);
        }
        let scale = f.num.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if sum.norm() > tol.residue_sum * scale.max(1.0) {
            return Err(fail(format!(
                "residues on component {cid} sum to {sum}, not zero"
            )));
        }
    }

    omega.residues_q = residues_q;
    omega.residues_r = residues_r;
    Ok(omega)
}

fn component_pole_list(data: &SpectralCurveData, comp: usize) -> Vec<C> {
    let mut out = vec![];
    let mut inf = 0usize;
    for q in &data.q_points {
        push_if_on(&mut out, &mut inf, comp, *q);
    }
    for (alpha, r) in data.r_points.iter().enumerate() {
        push_if_on(&mut out, &mut inf, comp, *r);
        if alpha < data.l {
            if let Ok(sr) = data.sigma_image(*r) {
                push_if_on(&mut out, &mut inf, comp, sr);
            }
        }
    }
    for nd in &data.nodes {
        push_if_on(&mut out, &mut inf, comp, nd.a);
        push_if_on(&mut out, &mut inf, comp, nd.b);
    }
    out
}

/// Per-component degree bookkeeping: zeros minus poles of f dz, counted
/// with multiplicity including infinity, for a rational component.
pub fn degree_balance(f: &Rational) -> i64 {
    let dn = f.num.degree().map(|d| d as i64).unwrap_or(0);
    let dd = f.den.degree().map(|d| d as i64).unwrap_or(0);
    let ord_inf = dd - dn - 2;
    dn + ord_inf.max(0) - dd + ord_inf.min(0)
}
