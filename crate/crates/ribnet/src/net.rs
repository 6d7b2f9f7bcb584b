//! Synthesis of the net map over a parameter grid and its first-order
//! certification: pairwise orthogonality of the coordinate directions and
//! conjugacy (second derivatives lying in the span of the first).

use rayon::prelude::*;
use serde::Serialize;

use crate::baker::{pair_index, BaError, BaJet, BaSolver};
use crate::curve::{SpectralCurveData, Violation};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Serialize)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn value(&self, k: usize) -> f64 {
        if self.count <= 1 {
            self.start
        } else {
            self.start + (self.end - self.start) * k as f64 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    pub axes: Vec<GridAxis>,
}

#[derive(Debug, thiserror::Error)]
#[error("bad grid spec {0:?}: expected start,end,count[;...]")]
pub struct GridParseError(pub String);

impl Grid {
    /// n axes of `count` evenly spaced samples on [-1, 1].
    pub fn default_for(n: usize, count: usize) -> Grid {
        Grid {
            axes: (0..n)
                .map(|_| GridAxis {
                    start: -1.0,
                    end: 1.0,
                    count,
                })
                .collect(),
        }
    }

    /// Parses "start,end,count;start,end,count;..."; a single axis spec is
    /// replicated across all n directions.
    pub fn parse(spec: &str, n: usize) -> Result<Grid, GridParseError> {
        let mut axes = vec![];
        for part in spec.split(';') {
            let fields: Vec<&str> = part.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(GridParseError(spec.to_string()));
            }
            let start: f64 = fields[0].parse().map_err(|_| GridParseError(spec.to_string()))?;
            let end: f64 = fields[1].parse().map_err(|_| GridParseError(spec.to_string()))?;
            let count: usize = fields[2].parse().map_err(|_| GridParseError(spec.to_string()))?;
            if count == 0 || !start.is_finite() || !end.is_finite() {
                return Err(GridParseError(spec.to_string()));
            }
            axes.push(GridAxis { start, end, count });
        }
        if axes.len() == 1 && n > 1 {
            let a = axes[0].clone();
            axes = (0..n).map(|_| a.clone()).collect();
        }
        if axes.len() != n {
            return Err(GridParseError(spec.to_string()));
        }
        Ok(Grid { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter point for a flat row-major index.
    pub fn u_at(&self, mut flat: usize) -> Vec<f64> {
        let mut u = vec![0.0; self.axes.len()];
        for i in (0..self.axes.len()).rev() {
            let c = self.axes[i].count;
            u[i] = self.axes[i].value(flat % c);
            flat /= c;
        }
        u
    }

    /// Multi-index for a flat index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for i in (0..self.axes.len()).rev() {
            idx[i] = flat % self.axes[i].count;
            flat /= self.axes[i].count;
        }
        idx
    }
}

/// The sampled net: values and the first two derivative jets of the map
/// at every grid point, real parts only (the imaginary residue is
/// tracked in `max_imag`).
#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalNet {
    pub grid: Grid,
    /// Ambient dimension n + N.
    pub dim: usize,
    pub n: usize,
    /// points[flat][coordinate]
    pub points: Vec<Vec<f64>>,
    /// first[flat][direction][coordinate]
    pub first: Vec<Vec<Vec<f64>>>,
    /// second[flat][pair][coordinate], pairs in `pair_index` order.
    pub second: Vec<Vec<Vec<f64>>>,
    /// Grid points where the defining system was too ill-conditioned.
    pub flagged: Vec<bool>,
    pub max_imag: f64,
    pub max_condition_number: f64,
}

/// A net together with the per-point solver jets, which downstream
/// consumers need to evaluate the function away from the Q-points.
pub struct NetBuild {
    pub net: OrthogonalNet,
    pub jets: Vec<Option<BaJet>>,
}

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("data fails admissibility: {0:?}")]
    InvalidData(Vec<Violation>),
    #[error(transparent)]
    Solver(#[from] BaError),
    #[error("{flagged} of {total} grid points degenerate, above the abort threshold")]
    TooManySingular { flagged: usize, total: usize },
    #[error("grid has {found} axes, expected {expected}")]
    GridMismatch { expected: usize, found: usize },
}

struct PointSample {
    x: Vec<f64>,
    dx: Vec<Vec<f64>>,
    ddx: Vec<Vec<f64>>,
    imag: f64,
    cond: f64,
    jet: BaJet,
}

/// Evaluates the net map x(u) = (psi(u, Q_1), ..., psi(u, Q_{n+N})) and
/// its jets over the grid.
pub fn synth_net(
    data: &SpectralCurveData,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<NetBuild, NetError> {
    let rep = data.validate();
    if !rep.is_admissible() {
        return Err(NetError::InvalidData(rep.violations));
    }
    if grid.axes.len() != data.n {
        return Err(NetError::GridMismatch {
            expected: data.n,
            found: grid.axes.len(),
        });
    }
    let solver = BaSolver::new(data, tol)?;
    let dim = data.n + data.codim;
    let n = data.n;
    let npairs = n * (n + 1) / 2;
    let total = grid.len();

    let samples: Vec<Result<PointSample, BaError>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let u = grid.u_at(flat);
            let jet = solver.solve_jet(&u, &data.d, true)?;
            let mut x = vec![0.0; dim];
            let mut dx = vec![vec![0.0; dim]; n];
            let mut ddx = vec![vec![0.0; dim]; npairs];
            let mut imag: f64 = 0.0;
            for (k, q) in data.q_points.iter().enumerate() {
                let v = solver.eval(&jet.sol, *q)?;
                x[k] = v.re;
                imag = imag.max(v.im.abs());
                for i in 0..n {
                    let d = solver.eval_deriv(&jet, i, *q)?;
                    dx[i][k] = d.re;
                    imag = imag.max(d.im.abs());
                    for j in i..n {
                        let dd = solver.eval_second(&jet, i, j, *q)?;
                        ddx[pair_index(n, i, j)][k] = dd.re;
                        imag = imag.max(dd.im.abs());
                    }
                }
            }
            Ok(PointSample {
                x,
                dx,
                ddx,
                imag,
                cond: jet.sol.condition_number,
                jet,
            })
        })
        .collect();

    let mut net = OrthogonalNet {
        grid: grid.clone(),
        dim,
        n,
        points: vec![vec![f64::NAN; dim]; total],
        first: vec![vec![vec![f64::NAN; dim]; n]; total],
        second: vec![vec![vec![f64::NAN; dim]; npairs]; total],
        flagged: vec![false; total],
        max_imag: 0.0,
        max_condition_number: 0.0,
    };
    let mut jets: Vec<Option<BaJet>> = Vec::with_capacity(total);
    let mut flagged = 0usize;
    for (flat, s) in samples.into_iter().enumerate() {
        match s {
            Ok(p) => {
                net.points[flat] = p.x;
                net.first[flat] = p.dx;
                net.second[flat] = p.ddx;
                net.max_imag = net.max_imag.max(p.imag);
                net.max_condition_number = net.max_condition_number.max(p.cond);
                jets.push(Some(p.jet));
            }
            Err(_) => {
                net.flagged[flat] = true;
                flagged += 1;
                jets.push(None);
            }
        }
    }
    if total > 0 && flagged as f64 > tol.flagged_fraction_max * total as f64 {
        return Err(NetError::TooManySingular { flagged, total });
    }
    Ok(NetBuild { net, jets })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityReport {
    pub pairs_checked: usize,
    pub max_normalized_dot: f64,
    pub mean_normalized_dot: f64,
    pub worst_point: Option<Vec<f64>>,
    pub degenerate_skipped: usize,
    pub pass: bool,
}

/// Maximum over the grid and over direction pairs i < j of
/// |dx_i . dx_j| / (|dx_i| |dx_j|).
pub fn orthogonality_report(net: &OrthogonalNet, tol: &Tolerances) -> OrthogonalityReport {
    let mut rep = OrthogonalityReport {
        pairs_checked: 0,
        max_normalized_dot: 0.0,
        mean_normalized_dot: 0.0,
        worst_point: None,
        degenerate_skipped: 0,
        pass: true,
    };
    let mut sum = 0.0f64;
    for flat in 0..net.points.len() {
        if net.flagged[flat] {
            continue;
        }
        for i in 0..net.n {
            for j in (i + 1)..net.n {
                let (a, b) = (&net.first[flat][i], &net.first[flat][j]);
                let (na, nb) = (norm(a), norm(b));
                if na * nb < tol.degenerate_dx {
                    rep.degenerate_skipped += 1;
                    continue;
                }
                let c = dot(a, b).abs() / (na * nb);
                rep.pairs_checked += 1;
                sum += c;
                if c > rep.max_normalized_dot {
                    rep.max_normalized_dot = c;
                    rep.worst_point = Some(net.grid.u_at(flat));
                }
            }
        }
    }
    if rep.pairs_checked > 0 {
        rep.mean_normalized_dot = sum / rep.pairs_checked as f64;
    }
    rep.pass = rep.max_normalized_dot <= tol.orthogonality;
    rep
}

/// Fitted coefficients of one mixed derivative in the span of the two
/// first derivatives at one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyFit {
    pub flat: usize,
    pub i: usize,
    pub j: usize,
    pub c_i: f64,
    pub c_j: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyReport {
    pub pairs_checked: usize,
    pub max_relative_residual: f64,
    pub mean_relative_residual: f64,
    pub worst_point: Option<Vec<f64>>,
    pub degenerate_skipped: usize,
    /// One entry per (point, pair); order follows the grid scan.
    pub fits: Vec<ConjugacyFit>,
    pub pass: bool,
}

/// For each mixed pair i < j, least-squares fit of d_i d_j x in
/// span{d_i x, d_j x}; the report carries the largest relative residual.
/// Vacuously passing for n = 1.
pub fn conjugacy_report(net: &OrthogonalNet, tol: &Tolerances) -> ConjugacyReport {
    let mut rep = ConjugacyReport {
        pairs_checked: 0,
        max_relative_residual: 0.0,
        mean_relative_residual: 0.0,
        worst_point: None,
        degenerate_skipped: 0,
        fits: vec![],
        pass: true,
    };
    let mut sum = 0.0f64;
    for flat in 0..net.points.len() {
        if net.flagged[flat] {
            continue;
        }
        for i in 0..net.n {
            for j in (i + 1)..net.n {
                let (a, b) = (&net.first[flat][i], &net.first[flat][j]);
                let target = &net.second[flat][pair_index(net.n, i, j)];
                let (g11, g12, g22) = (dot(a, a), dot(a, b), dot(b, b));
                let det = g11 * g22 - g12 * g12;
                let scale = norm(target).max(norm(a)).max(norm(b));
                if det.abs() < tol.degenerate_dx * g11.max(g22).max(1.0) || scale == 0.0 {
                    rep.degenerate_skipped += 1;
                    continue;
                }
                let (t1, t2) = (dot(a, target), dot(b, target));
                let ca = (g22 * t1 - g12 * t2) / det;
                let cb = (g11 * t2 - g12 * t1) / det;
                let mut res = 0.0f64;
                for k in 0..net.dim {
                    let r = target[k] - ca * a[k] - cb * b[k];
                    res += r * r;
                }
                let rel = res.sqrt() / scale;
                rep.pairs_checked += 1;
                sum += rel;
                rep.fits.push(ConjugacyFit {
                    flat,
                    i,
                    j,
                    c_i: ca,
                    c_j: cb,
                    relative_residual: rel,
                });
                if rel > rep.max_relative_residual {
                    rep.max_relative_residual = rel;
                    rep.worst_point = Some(net.grid.u_at(flat));
                }
            }
        }
    }
    if rep.pairs_checked > 0 {
        rep.mean_relative_residual = sum / rep.pairs_checked as f64;
    }
    rep.pass = rep.max_relative_residual <= tol.conjugacy;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::builtin;

    fn build(name: &str, count: usize) -> NetBuild {
        let s = builtin(name).unwrap();
        let grid = Grid::default_for(s.n, count);
        synth_net(&s, &grid, &Tolerances::default()).unwrap()
    }

    #[test]
    fn grid_indexing_round_trips() {
        let g = Grid::parse("0,1,3;-1,1,5", 2).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.u_at(0), vec![0.0, -1.0]);
        assert_eq!(g.u_at(14), vec![1.0, 1.0]);
        assert_eq!(g.multi_index(7), vec![1, 2]);
        assert_eq!(g.u_at(7), vec![0.5, 0.0]);
    }

    #[test]
    fn single_axis_spec_replicates() {
        let g = Grid::parse("-2,2,9", 3).unwrap();
        assert_eq!(g.axes.len(), 3);
        assert_eq!(g.len(), 9 * 9 * 9);
    }

    #[test]
    fn bad_grid_specs_error() {
        assert!(Grid::parse("0,1", 2).is_err());
        assert!(Grid::parse("0,1,0", 1).is_err());
        assert!(Grid::parse("a,b,c", 1).is_err());
        assert!(Grid::parse("0,1,3;0,1,3;0,1,3", 2).is_err());
    }

    #[test]
    fn dumbbell_net_is_real_and_unflagged() {
        let b = build("ds-n2-l1", 7);
        assert!(b.net.flagged.iter().all(|f| !f));
        assert!(b.net.max_imag < 1e-10, "max imag {}", b.net.max_imag);
        assert!(b.net.points.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn dumbbell_net_is_orthogonal() {
        let b = build("ds-n2-l1", 7);
        let rep = orthogonality_report(&b.net, &Tolerances::default());
        assert!(rep.pass, "max dot {}", rep.max_normalized_dot);
        assert!(rep.pairs_checked > 0);
    }

    #[test]
    fn dumbbell_net_is_conjugate() {
        let b = build("ds-n2-l1", 7);
        let rep = conjugacy_report(&b.net, &Tolerances::default());
        assert!(rep.pass, "max residual {}", rep.max_relative_residual);
    }

    #[test]
    fn codim_one_net_is_orthogonal_and_conjugate() {
        let b = build("ds-n3-l2", 5);
        let tol = Tolerances::default();
        let o = orthogonality_report(&b.net, &tol);
        assert!(o.pass, "max dot {}", o.max_normalized_dot);
        let c = conjugacy_report(&b.net, &tol);
        assert!(c.pass, "max residual {}", c.max_relative_residual);
    }

    #[test]
    fn perturbed_gamma_breaks_orthogonality() {
        use crate::curve::{Coord, PointOnCurve};
        let mut s = builtin("ds-n2-l1").unwrap();
        s.gamma[0] = PointOnCurve::new(2, Coord::finite(0.9));
        let grid = Grid::default_for(s.n, 5);
        let b = synth_net(&s, &grid, &Tolerances::default()).unwrap();
        let rep = orthogonality_report(&b.net, &Tolerances::default());
        assert!(!rep.pass, "perturbed data must not stay orthogonal");
    }

    #[test]
    fn n1_net_conjugacy_is_vacuous() {
        let b = build("ds-n1-l1", 9);
        let rep = conjugacy_report(&b.net, &Tolerances::default());
        assert!(rep.pass);
        assert_eq!(rep.pairs_checked, 0);
    }

    #[test]
    fn invalid_data_is_rejected() {
        let mut s = builtin("ds-n2-l1").unwrap();
        s.gamma.pop();
        let grid = Grid::default_for(s.n, 3);
        assert!(matches!(
            synth_net(&s, &grid, &Tolerances::default()),
            Err(NetError::InvalidData(_))
        ));
    }

    #[test]
    fn zero_d_gives_zero_map() {
        let mut s = builtin("ds-n2-l1").unwrap();
        s.d = vec![0.0];
        let grid = Grid::default_for(s.n, 3);
        let b = synth_net(&s, &grid, &Tolerances::default()).unwrap();
        assert!(b.net.points.iter().flatten().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn scaled_coordinate_breaks_conjugacy() {
        // needs ambient dimension above 2 so a pair spans a proper subspace
        let mut b = build("ds-n3-l2", 3);
        for flat in 0..b.net.points.len() {
            b.net.points[flat][0] *= 1.0 + 1e-3;
            for i in 0..b.net.n {
                b.net.first[flat][i][0] *= 1.0 + 1e-3;
            }
            // mixed derivatives left untouched: the net is no longer conjugate
        }
        let rep = conjugacy_report(&b.net, &Tolerances::default());
        assert!(!rep.pass, "residual {}", rep.max_relative_residual);
    }

    #[test]
    fn reports_are_rotation_invariant() {
        let b = build("ds-n2-l1", 5);
        let tol = Tolerances::default();
        let before_o = orthogonality_report(&b.net, &tol);
        let before_c = conjugacy_report(&b.net, &tol);
        // fixed rotation of the ambient plane
        let (c, s) = (0.6f64, 0.8f64);
        let rot = |v: &mut Vec<f64>| {
            let (x, y) = (v[0], v[1]);
            v[0] = c * x - s * y;
            v[1] = s * x + c * y;
        };
        let mut net = b.net.clone();
        for flat in 0..net.points.len() {
            rot(&mut net.points[flat]);
            for d in &mut net.first[flat] {
                rot(d);
            }
            for d in &mut net.second[flat] {
                rot(d);
            }
        }
        let after_o = orthogonality_report(&net, &tol);
        let after_c = conjugacy_report(&net, &tol);
        assert!((before_o.max_normalized_dot - after_o.max_normalized_dot).abs() < 1e-12);
        assert!((before_c.max_relative_residual - after_c.max_relative_residual).abs() < 1e-12);
    }

    #[test]
    fn refinement_keeps_residual_solver_bound() {
        let tol = Tolerances::default();
        let coarse = orthogonality_report(&build("ds-n2-l1", 5).net, &tol);
        let fine = orthogonality_report(&build("ds-n2-l1", 9).net, &tol);
        // analytic derivatives: residual is solver noise, not discretization
        assert!(fine.max_normalized_dot <= 10.0 * coarse.max_normalized_dot.max(1e-15));
    }

    #[test]
    fn refined_grid_contains_coarse_values() {
        let coarse = build("ds-n2-l1", 5);
        let fine = build("ds-n2-l1", 9);
        // every coarse node u is also a fine node; values must agree exactly
        for cf in 0..coarse.net.grid.len() {
            let u = coarse.net.grid.u_at(cf);
            let idx: Vec<usize> = u.iter().map(|v| ((v + 1.0) / 2.0 * 8.0).round() as usize).collect();
            let ff = idx[0] * 9 + idx[1];
            for k in 0..coarse.net.dim {
                let a = coarse.net.points[cf][k];
                let b = fine.net.points[ff][k];
                assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
