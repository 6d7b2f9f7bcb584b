//! Ribaucour transformations by swapping the normalization point of a
//! movable R-slot, and the numerical certification of everything the
//! construction promises: the transform equation with both lambda
//! routes, the connection identities for the transformed function, the
//! scalar products of the displacement field, Bianchi cubes with
//! concircular elementary quadrilaterals, and the l = 1 closed form.

use serde::Serialize;

use crate::baker::{BaError, BaSolver};
use crate::curve::{CurveError, PointOnCurve, SpectralCurveData};
use crate::net::{synth_net, Grid, NetBuild, NetError};
use crate::omega::{build_omega, OmegaError};
use crate::tol::Tolerances;

#[derive(Debug, thiserror::Error)]
pub enum RibError {
    #[error("transform index {alpha} out of range 1..={l}")]
    IndexOutOfRange { alpha: usize, l: usize },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Solver(#[from] BaError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Omega(#[from] OmegaError),
    #[error("circumcircle undefined: the three base points are collinear")]
    CollinearTriple,
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

/// The transformed data: identical except that R-slot `alpha` (1-based)
/// carries its condition on the other point of the sigma-orbit.
pub fn swap_data(data: &SpectralCurveData, alpha: usize) -> Result<SpectralCurveData, RibError> {
    if alpha == 0 || alpha > data.l {
        return Err(RibError::IndexOutOfRange {
            alpha,
            l: data.l,
        });
    }
    let mut out = data.clone();
    out.swap_state[alpha - 1] = !out.swap_state[alpha - 1];
    Ok(out)
}

/// Per-edge certification numbers, all maxima over unflagged grid
/// points. Residuals are relative to the local magnitudes.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeStats {
    pub points_used: usize,
    pub points_degenerate: usize,
    /// Transform equation with lambda from the expansion-coefficient
    /// ratio.
    pub max_ribtrans: f64,
    /// Disagreement of the ratio lambda and the least-squares lambda.
    pub max_lambda_mismatch: f64,
    /// d_i x . dx + r (d_i phi)(phi_aa - 1).
    pub max_scalar_up: f64,
    /// dx . dx - 2 r (phi - 1)(phi_aa - 1).
    pub max_scalar_down: f64,
    /// d_i phi / (phi - 1) + 2 (d_i x . dx)/(dx . dx).
    pub max_phi_gradient: f64,
    /// | |d_i x_a| - |lambda_i| |d_i x| |, the reflection being an isometry.
    pub max_reflection_norm_gap: f64,
    pub pass: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn edge_stats(
    base_data: &SpectralCurveData,
    other_data: &SpectralCurveData,
    base: &NetBuild,
    other: &NetBuild,
    alpha: usize,
    r_alpha: f64,
    tol: &Tolerances,
) -> Result<EdgeStats, RibError> {
    let alpha0 = alpha - 1;
    let base_solver = BaSolver::new(base_data, tol)?;
    let other_solver = BaSolver::new(other_data, tol)?;
    let phys = base_data.physical_r(alpha0)?;
    let phys_sigma = base_data.sigma_image(phys)?;
    let n = base_data.n;
    let dim = base.net.dim;
    let mut st = EdgeStats {
        points_used: 0,
        points_degenerate: 0,
        max_ribtrans: 0.0,
        max_lambda_mismatch: 0.0,
        max_scalar_up: 0.0,
        max_scalar_down: 0.0,
        max_phi_gradient: 0.0,
        max_reflection_norm_gap: 0.0,
        pass: true,
    };
    for flat in 0..base.net.points.len() {
        let (jb, jo) = match (&base.jets[flat], &other.jets[flat]) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        let x = &base.net.points[flat];
        let xa = &other.net.points[flat];
        let dxv: Vec<f64> = xa.iter().zip(x).map(|(a, b)| a - b).collect();
        let dx2 = dot(&dxv, &dxv);
        let phi = base_solver.eval(&jb.sol, phys_sigma)?.re;
        let phi_aa = other_solver.eval(&jo.sol, phys)?.re;
        if dx2 < tol.degenerate_dx || (phi - 1.0).abs() < tol.phi_one {
            st.points_degenerate += 1;
            continue;
        }
        st.points_used += 1;

        // scalar product of the displacement with itself
        let lhs = dx2;
        let rhs = 2.0 * r_alpha * (phi - 1.0) * (phi_aa - 1.0);
        st.max_scalar_down = st
            .max_scalar_down
            .max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));

        for i in 0..n {
            let di = &base.net.first[flat][i];
            let dia = &other.net.first[flat][i];
            let dphi = base_solver.eval_deriv(jb, i, phys_sigma)?.re;

            // transform equation with lambda = xi0_alpha / xi0
            let xi0 = base_solver.xi0(&jb.sol, i)?.re;
            let xi0a = other_solver.xi0(&jo.sol, i)?.re;
            let lam_ratio = xi0a / xi0;
            let proj = dot(di, &dxv) / dx2;
            let v: Vec<f64> = (0..dim).map(|k| di[k] - 2.0 * proj * dxv[k]).collect();
            let mut res = 0.0f64;
            for k in 0..dim {
                let r = dia[k] - lam_ratio * v[k];
                res += r * r;
            }
            let scale = norm(dia).max(norm(&v));
            st.max_ribtrans = st.max_ribtrans.max(res.sqrt() / scale);

            let gap = (norm(dia) - lam_ratio.abs() * norm(di)).abs() / norm(dia).max(1e-300);
            st.max_reflection_norm_gap = st.max_reflection_norm_gap.max(gap);

            let lam_fit = dot(dia, &v) / dot(&v, &v);
            st.max_lambda_mismatch = st
                .max_lambda_mismatch
                .max((lam_fit - lam_ratio).abs() / lam_fit.abs().max(1.0));

            // scalar product of a tangent direction with the displacement
            let lhs = dot(di, &dxv);
            let rhs = -r_alpha * dphi * (phi_aa - 1.0);
            st.max_scalar_up = st
                .max_scalar_up
                .max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));

            // logarithmic gradient of phi against the displacement
            let lhs = dphi / (phi - 1.0);
            let rhs = -2.0 * dot(di, &dxv) / dx2;
            st.max_phi_gradient = st
                .max_phi_gradient
                .max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
        }
    }
    st.pass = st.max_ribtrans <= tol.ribaucour
        && st.max_lambda_mismatch <= tol.lambda
        && st.max_scalar_up <= tol.lemma
        && st.max_scalar_down <= tol.lemma
        && st.max_phi_gradient <= tol.lemma
        && st.max_reflection_norm_gap <= tol.ribaucour;
    Ok(st)
}

#[derive(Debug, Clone, Serialize)]
pub struct RibaucourReport {
    pub alpha: usize,
    pub r_alpha: f64,
    pub stats: EdgeStats,
}

/// Builds the net and its transform over the grid and certifies the
/// transform equation and all scalar identities point by point.
pub fn ribaucour_pair(
    data: &SpectralCurveData,
    grid: &Grid,
    alpha: usize,
    tol: &Tolerances,
) -> Result<RibaucourReport, RibError> {
    let other_data = swap_data(data, alpha)?;
    let omega = build_omega(data, tol)?;
    let r_alpha = omega.residues_r[alpha - 1];
    let base = synth_net(data, grid, tol)?;
    let other = synth_net(&other_data, grid, tol)?;
    let stats = edge_stats(data, &other_data, &base, &other, alpha, r_alpha, tol)?;
    Ok(RibaucourReport {
        alpha,
        r_alpha,
        stats,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub alpha: usize,
    pub points_sampled: usize,
    /// Proportionality of the connection function to psi_alpha - psi at
    /// generic points of the curve.
    pub max_connection: f64,
    /// Vanishing of the connection function at R_k, k != alpha.
    pub max_r_vanishing: f64,
    /// Connection values at R_alpha and sigma R_alpha.
    pub max_boundary: f64,
    pub pass: bool,
}

/// Certifies the function-level identities behind the transform at one
/// parameter point, sampling generic evaluation points on every
/// component of the curve.
pub fn lemma_identities(
    data: &SpectralCurveData,
    alpha: usize,
    u: &[f64],
    seed: u64,
    tol: &Tolerances,
) -> Result<LemmaReport, RibError> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let other_data = swap_data(data, alpha)?;
    let alpha0 = alpha - 1;
    let base_solver = BaSolver::new(data, tol)?;
    let other_solver = BaSolver::new(&other_data, tol)?;
    let jb = base_solver.solve_jet(u, &data.d, false)?;
    let jo = other_solver.solve_jet(u, &data.d, false)?;
    let phys = data.physical_r(alpha0)?;
    let phys_sigma = data.sigma_image(phys)?;
    let phi = base_solver.eval(&jb.sol, phys_sigma)?.re;
    if (phi - 1.0).abs() < tol.phi_one {
        return Err(RibError::NotApplicable(
            "phi_alpha = 1 at this parameter point".to_string(),
        ));
    }
    let n = data.n;
    let xi0: Vec<f64> = (0..n)
        .map(|i| base_solver.xi0(&jb.sol, i).map(|v| v.re))
        .collect::<Result<_, _>>()?;
    let xi0a: Vec<f64> = (0..n)
        .map(|i| other_solver.xi0(&jo.sol, i).map(|v| v.re))
        .collect::<Result<_, _>>()?;
    let dphi: Vec<f64> = (0..n)
        .map(|i| base_solver.eval_deriv(&jb, i, phys_sigma).map(|v| v.re))
        .collect::<Result<_, _>>()?;

    let mut rep = LemmaReport {
        alpha,
        points_sampled: 0,
        max_connection: 0.0,
        max_r_vanishing: 0.0,
        max_boundary: 0.0,
        pass: true,
    };

    // the connection function and its claimed proportional form
    let connection = |i: usize, p: PointOnCurve| -> Result<(f64, f64), RibError> {
        let psi = base_solver.eval(&jb.sol, p)?.re;
        let psia = other_solver.eval(&jo.sol, p)?.re;
        let dpsi = base_solver.eval_deriv(&jb, i, p)?.re;
        let dpsia = other_solver.eval_deriv(&jo, i, p)?.re;
        let lhs = xi0[i] * dpsia - xi0a[i] * dpsi;
        let rhs = xi0a[i] * dphi[i] / (phi - 1.0) * (psia - psi);
        Ok((lhs, rhs))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = 0usize;
    let mut attempts = 0usize;
    while sampled < 20 && attempts < 2000 {
        attempts += 1;
        let comp = rng.gen_range(0..data.components.len());
        let z = rng.gen_range(-4.0..4.0);
        let clear = data
            .gamma
            .iter()
            .chain(data.r_points.iter())
            .filter(|g| g.component == comp)
            .all(|g| match g.z.as_finite() {
                Some(gz) => (gz.re - z).abs() > 1e-2,
                None => true,
            });
        if !clear {
            continue;
        }
        let p = PointOnCurve::new(comp, crate::curve::Coord::finite(z));
        sampled += 1;
        for i in 0..n {
            let (lhs, rhs) = connection(i, p)?;
            let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
            rep.max_connection = rep.max_connection.max(rel);
        }
    }
    rep.points_sampled = sampled;

    // vanishing at the other normalization points
    for k in 0..data.l + data.codim {
        if k == alpha0 {
            continue;
        }
        let pk = data.physical_r(k)?;
        for i in 0..n {
            let (lhs, _) = connection(i, pk)?;
            rep.max_r_vanishing = rep.max_r_vanishing.max(lhs.abs());
        }
    }

    // values at the two points of the moving orbit
    let phi_aa = other_solver.eval(&jo.sol, phys)?.re;
    let _ = phi_aa; // the scalar identities use it; here only derivatives enter
    for i in 0..n {
        let dphi_aa = other_solver.eval_deriv(&jo, i, phys)?.re;
        let (lhs, _) = connection(i, phys)?;
        let expect = xi0[i] * dphi_aa;
        rep.max_boundary = rep
            .max_boundary
            .max((lhs - expect).abs() / lhs.abs().max(expect.abs()).max(1.0));
        let (lhs, _) = connection(i, phys_sigma)?;
        let expect = -xi0a[i] * dphi[i];
        rep.max_boundary = rep
            .max_boundary
            .max((lhs - expect).abs() / lhs.abs().max(expect.abs()).max(1.0));
    }

    rep.pass = rep.max_connection <= tol.lemma
        && rep.max_r_vanishing <= tol.lemma
        && rep.max_boundary <= tol.lemma;
    Ok(rep)
}

/// Distance of a fourth point from the circumcircle of the first three,
/// relative to the circle radius. The deviation combines the
/// out-of-plane offset and the in-plane radial error.
pub fn concircularity_check(
    p: &[f64],
    p1: &[f64],
    p2: &[f64],
    p12: &[f64],
) -> Result<f64, RibError> {
    let dim = p.len();
    let u1: Vec<f64> = (0..dim).map(|k| p1[k] - p[k]).collect();
    let u2: Vec<f64> = (0..dim).map(|k| p2[k] - p[k]).collect();
    let (g11, g12, g22) = (dot(&u1, &u1), dot(&u1, &u2), dot(&u2, &u2));
    let det = g11 * g22 - g12 * g12;
    if det.abs() < 1e-14 * g11.max(g22).max(1e-300).powi(2) || det == 0.0 {
        return Err(RibError::CollinearTriple);
    }
    // center c = p + s u1 + t u2 equidistant from the three points
    let (b1, b2) = (g11 / 2.0, g22 / 2.0);
    let s = (g22 * b1 - g12 * b2) / det;
    let t = (g11 * b2 - g12 * b1) / det;
    let center: Vec<f64> = (0..dim).map(|k| s * u1[k] + t * u2[k]).collect(); // relative to p
    let radius = norm(&center);
    if radius == 0.0 {
        return Err(RibError::CollinearTriple);
    }
    let d: Vec<f64> = (0..dim).map(|k| p12[k] - p[k]).collect();
    // in-plane projection coefficients of d on {u1, u2}
    let (t1, t2) = (dot(&u1, &d), dot(&u2, &d));
    let a = (g22 * t1 - g12 * t2) / det;
    let b = (g11 * t2 - g12 * t1) / det;
    let mut out2 = 0.0f64;
    let mut in_center2 = 0.0f64;
    for k in 0..dim {
        let proj = a * u1[k] + b * u2[k];
        let o = d[k] - proj;
        out2 += o * o;
        let ic = proj - center[k];
        in_center2 += ic * ic;
    }
    let radial = (in_center2.sqrt() - radius).abs();
    Ok(out2.sqrt().hypot(radial) / radius)
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeEdge {
    pub from_mask: usize,
    pub alpha: usize,
    pub stats: EdgeStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeFace {
    pub from_mask: usize,
    pub alpha: usize,
    pub beta: usize,
    pub max_concircularity: f64,
    pub quadruples_checked: usize,
    pub degenerate_skipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeReport {
    pub l: usize,
    pub nets: usize,
    pub edges: Vec<CubeEdge>,
    pub faces: Vec<CubeFace>,
    pub max_concircularity: f64,
    pub path_independent: bool,
    pub pass: bool,
}

/// Builds all 2^l nets reachable by swap toggles and certifies every
/// edge as a Ribaucour pair and every elementary quadrilateral of every
/// 2-face as concircular. Vertices are indexed by the l-bit toggle mask.
pub fn bianchi_cube(
    data: &SpectralCurveData,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<CubeReport, RibError> {
    let l = data.l;
    let nets_count = 1usize << l;
    let omega = build_omega(data, tol)?;

    let mut datasets: Vec<SpectralCurveData> = Vec::with_capacity(nets_count);
    for mask in 0..nets_count {
        let mut d = data.clone();
        for a in 0..l {
            if mask & (1 << a) != 0 {
                d.swap_state[a] = !d.swap_state[a];
            }
        }
        datasets.push(d);
    }

    // toggles commute, so any toggle path to the same vertex must yield
    // bitwise identical data
    let mut path_independent = true;
    if l >= 2 {
        let ab = swap_data(&swap_data(data, 1)?, 2)?;
        let ba = swap_data(&swap_data(data, 2)?, 1)?;
        path_independent = ab == ba && ab == datasets[0b11];
    }

    let builds: Vec<NetBuild> = datasets
        .iter()
        .map(|d| synth_net(d, grid, tol))
        .collect::<Result<_, _>>()?;

    let mut edges = vec![];
    for mask in 0..nets_count {
        for a in 0..l {
            if mask & (1 << a) != 0 {
                continue;
            }
            let to = mask | (1 << a);
            let stats = edge_stats(
                &datasets[mask],
                &datasets[to],
                &builds[mask],
                &builds[to],
                a + 1,
                omega.residues_r[a],
                tol,
            )?;
            edges.push(CubeEdge {
                from_mask: mask,
                alpha: a + 1,
                stats,
            });
        }
    }

    let mut faces = vec![];
    let mut max_conc = 0.0f64;
    for mask in 0..nets_count {
        for a in 0..l {
            for b in (a + 1)..l {
                if mask & (1 << a) != 0 || mask & (1 << b) != 0 {
                    continue;
                }
                let (ma, mb, mab) = (mask | (1 << a), mask | (1 << b), mask | (1 << a) | (1 << b));
                let mut face = CubeFace {
                    from_mask: mask,
                    alpha: a + 1,
                    beta: b + 1,
                    max_concircularity: 0.0,
                    quadruples_checked: 0,
                    degenerate_skipped: 0,
                };
                for flat in 0..grid.len() {
                    if [mask, ma, mb, mab].iter().any(|&m| builds[m].net.flagged[flat]) {
                        continue;
                    }
                    match concircularity_check(
                        &builds[mask].net.points[flat],
                        &builds[ma].net.points[flat],
                        &builds[mb].net.points[flat],
                        &builds[mab].net.points[flat],
                    ) {
                        Ok(resid) => {
                            face.quadruples_checked += 1;
                            face.max_concircularity = face.max_concircularity.max(resid);
                        }
                        Err(RibError::CollinearTriple) => face.degenerate_skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
                max_conc = max_conc.max(face.max_concircularity);
                faces.push(face);
            }
        }
    }

    let pass = path_independent
        && edges.iter().all(|e| e.stats.pass)
        && max_conc <= tol.concircularity;
    Ok(CubeReport {
        l,
        nets: nets_count,
        edges,
        faces,
        max_concircularity: max_conc,
        path_independent,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormReport {
    pub c: f64,
    pub points_used: usize,
    pub max_deviation: f64,
    /// |x_1 . x_1 - c^2 / (x . x)| relative residual.
    pub max_inversion: f64,
    pub pass: bool,
}

/// For a single movable point with unit normalization the transform is
/// the explicit inversion x_1 = c x / (x . x) with c = -2 r_1; this
/// checks the sampled transform against it.
pub fn closed_form_l1(
    data: &SpectralCurveData,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<ClosedFormReport, RibError> {
    if data.l != 1 {
        return Err(RibError::NotApplicable(format!(
            "closed form needs l = 1, data has l = {}",
            data.l
        )));
    }
    if data.d.first() != Some(&1.0) || data.d[1..].iter().any(|&v| v != 0.0) {
        return Err(RibError::NotApplicable(
            "closed form needs d = (1, 0, ..., 0)".to_string(),
        ));
    }
    let omega = build_omega(data, tol)?;
    let c = -2.0 * omega.residues_r[0];
    let other_data = swap_data(data, 1)?;
    let base = synth_net(data, grid, tol)?;
    let other = synth_net(&other_data, grid, tol)?;
    let mut rep = ClosedFormReport {
        c,
        points_used: 0,
        max_deviation: 0.0,
        max_inversion: 0.0,
        pass: true,
    };
    for flat in 0..grid.len() {
        if base.net.flagged[flat] || other.net.flagged[flat] {
            continue;
        }
        let x = &base.net.points[flat];
        let xa = &other.net.points[flat];
        let xx = dot(x, x);
        if xx < tol.degenerate_dx {
            continue;
        }
        rep.points_used += 1;
        let mut dev2 = 0.0f64;
        for k in 0..x.len() {
            let r = xa[k] - c * x[k] / xx;
            dev2 += r * r;
        }
        rep.max_deviation = rep.max_deviation.max(dev2.sqrt() / norm(xa).max(1e-300));
        let lhs = dot(xa, xa);
        let rhs = c * c / xx;
        rep.max_inversion = rep
            .max_inversion
            .max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300));
    }
    rep.pass = rep.max_deviation <= tol.closed_form && rep.max_inversion <= tol.closed_form;
    Ok(rep)
}
