//! End-to-end certification battery. Each test covers one acceptance
//! criterion and prints a single pass/fail line; run with
//! `cargo test --test acceptance -- --nocapture` to see the summary.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ribnet::baker::BaSolver;
use ribnet::curve::{Coord, PointOnCurve, SpectralCurveData};
use ribnet::dataset::builtin;
use ribnet::net::{conjugacy_report, orthogonality_report, synth_net, Grid, NetBuild};
use ribnet::omega::build_omega;
use ribnet::poly::C;
use ribnet::ribaucour::{bianchi_cube, closed_form_l1, lemma_identities};
use ribnet::tol::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn data(name: &str) -> SpectralCurveData {
    builtin(name).unwrap()
}

/// The two shipped survey datasets with their pinned certification grids.
fn survey_builds() -> Vec<(&'static str, NetBuild, f64)> {
    [("ds-n2-l1", 33), ("ds-n3-l2", 17)]
        .into_iter()
        .map(|(name, count)| {
            let s = data(name);
            let grid = Grid::default_for(s.n, count);
            let start = Instant::now();
            let b = synth_net(&s, &grid, &tol()).unwrap();
            (name, b, start.elapsed().as_secs_f64())
        })
        .collect()
}

fn line(criterion: &str, pass: bool, detail: String) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn c01_orthogonality() {
    for (name, b, secs) in survey_builds() {
        let rep = orthogonality_report(&b.net, &tol());
        let total = b.net.points.len();
        let unflagged = b.net.flagged.iter().filter(|f| !**f).count();
        let coverage = unflagged as f64 / total as f64;
        let pass = rep.pass && coverage >= 0.90 && secs < 10.0;
        line(
            "01 orthogonality",
            pass,
            format!(
                "{name}: max dot {:.3e}, coverage {:.1}%, {:.2}s",
                rep.max_normalized_dot,
                100.0 * coverage,
                secs
            ),
        );
    }
}

#[test]
fn c02_conjugacy() {
    for (name, b, _) in survey_builds() {
        let rep = conjugacy_report(&b.net, &tol());
        line(
            "02 conjugacy",
            rep.pass,
            format!("{name}: max residual {:.3e}", rep.max_relative_residual),
        );
    }
}

#[test]
fn c03_reality() {
    for (name, b, _) in survey_builds() {
        let pass = b.net.max_imag < 1e-10;
        line(
            "03 reality",
            pass,
            format!("{name}: max imaginary part {:.3e}", b.net.max_imag),
        );
    }
}

#[test]
fn c04_ribaucour_edges() {
    for (name, count) in [("ds-n2-l1", 9), ("ds-n3-l2", 7)] {
        let s = data(name);
        let grid = Grid::default_for(s.n, count);
        let cube = bianchi_cube(&s, &grid, &tol()).unwrap();
        let mut worst_eq = 0.0f64;
        let mut worst_lam = 0.0f64;
        for e in &cube.edges {
            worst_eq = worst_eq.max(e.stats.max_ribtrans);
            worst_lam = worst_lam.max(e.stats.max_lambda_mismatch);
        }
        let pass = worst_eq < 1e-8 && worst_lam < 1e-8;
        line(
            "04 ribaucour",
            pass,
            format!(
                "{name}: {} edges, transform residual {:.3e}, lambda mismatch {:.3e}",
                cube.edges.len(),
                worst_eq,
                worst_lam
            ),
        );
    }
}

#[test]
fn c05_lemma_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for name in ["ds-n2-l1", "ds-n3-l2"] {
        let s = data(name);
        let mut worst = 0.0f64;
        for alpha in 1..=s.l {
            for trial in 0..10u64 {
                let u: Vec<f64> = (0..s.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let rep = lemma_identities(&s, alpha, &u, 1000 + trial, &tol()).unwrap();
                assert_eq!(rep.points_sampled, 20);
                worst = worst
                    .max(rep.max_connection)
                    .max(rep.max_r_vanishing)
                    .max(rep.max_boundary);
            }
        }
        line(
            "05 lemma identities",
            worst < 1e-8,
            format!("{name}: worst residual {:.3e} over 10 u-samples", worst),
        );
    }
}

#[test]
fn c06_closed_form_l1() {
    for name in ["ds-n2-l1", "ds-n1-l1"] {
        let s = data(name);
        let grid = Grid::default_for(s.n, 33);
        let rep = closed_form_l1(&s, &grid, &tol()).unwrap();
        let pass = rep.max_deviation < 1e-10;
        line(
            "06 closed form",
            pass,
            format!(
                "{name}: c = {:.6}, max deviation {:.3e} at {} points",
                rep.c, rep.max_deviation, rep.points_used
            ),
        );
    }
}

#[test]
fn c07_bianchi_quadrilateral() {
    let s = data("ds-n3-l2");
    let grid = Grid::default_for(s.n, 7);
    let cube = bianchi_cube(&s, &grid, &tol()).unwrap();
    assert_eq!(cube.nets, 4);
    let face = &cube.faces[0];
    let coverage = face.quadruples_checked as f64 / grid.len() as f64;
    let pass = cube.path_independent && face.max_concircularity < 1e-6 && coverage >= 0.90;
    line(
        "07 bianchi quadrilateral",
        pass,
        format!(
            "path independent: {}, concircularity {:.3e}, coverage {:.1}%",
            cube.path_independent,
            face.max_concircularity,
            100.0 * coverage
        ),
    );
}

#[test]
fn c08_gradient_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let h = 1e-5;
    for name in ["ds-n2-l1", "ds-n3-l2"] {
        let s = data(name);
        let solver = BaSolver::new(&s, &tol()).unwrap();
        for _ in 0..25 {
            let u: Vec<f64> = (0..s.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = loop {
                let comp = rng.gen_range(0..s.components.len());
                let z = rng.gen_range(-4.0..4.0);
                let clear = s
                    .gamma
                    .iter()
                    .filter(|g| g.component == comp)
                    .all(|g| match g.z.as_finite() {
                        Some(gz) => (gz.re - z).abs() > 0.1,
                        None => true,
                    });
                if clear {
                    break PointOnCurve::new(comp, Coord::finite(z));
                }
            };
            let jet = solver.solve_jet(&u, &s.d, false).unwrap();
            for i in 0..s.n {
                let an = solver.eval_deriv(&jet, i, q).unwrap();
                let mut up = u.clone();
                let mut um = u.clone();
                up[i] += h;
                um[i] -= h;
                let vp = solver.eval(&solver.solve(&up, &s.d).unwrap(), q).unwrap();
                let vm = solver.eval(&solver.solve(&um, &s.d).unwrap(), q).unwrap();
                let fd = (vp - vm) / (2.0 * h);
                let rel = (an - fd).norm() / an.norm().max(fd.norm()).max(1e-12);
                worst = worst.max(rel);
            }
        }
    }
    line(
        "08 gradient oracle",
        worst < 1e-6,
        format!("worst relative error {:.3e} over 50 samples", worst),
    );
}

#[test]
fn c09_uniqueness_linearity() {
    let mut worst_zero = 0.0f64;
    let mut worst_lin = 0.0f64;
    for name in ["ds-n2-l1", "ds-n3-l2", "ds-n1-l1"] {
        let s = data(name);
        let solver = BaSolver::new(&s, &tol()).unwrap();
        let u: Vec<f64> = (0..s.n).map(|i| 0.3 - 0.17 * i as f64).collect();
        let m = s.l + s.codim;
        let zero = solver.solve(&u, &vec![0.0; m]).unwrap();
        for c in &zero.coeffs {
            worst_zero = worst_zero.max(c.norm());
        }
        // linear combination of unit solutions against the combined solve
        let units: Vec<_> = (0..m)
            .map(|k| {
                let mut d = vec![0.0; m];
                d[k] = 1.0;
                solver.solve(&u, &d).unwrap()
            })
            .collect();
        let weights: Vec<f64> = (0..m).map(|k| 1.5 - 0.8 * k as f64).collect();
        let combo = solver.solve(&u, &weights).unwrap();
        for idx in 0..combo.coeffs.len() {
            let expect: C = units
                .iter()
                .zip(&weights)
                .map(|(s, w)| s.coeffs[idx] * *w)
                .sum();
            let rel = (combo.coeffs[idx] - expect).norm() / expect.norm().max(1.0);
            worst_lin = worst_lin.max(rel);
        }
    }
    let pass = worst_zero < 1e-14 && worst_lin < 1e-13;
    line(
        "09 uniqueness/linearity",
        pass,
        format!("zero-data norm {:.3e}, linearity residual {:.3e}", worst_zero, worst_lin),
    );
}

#[test]
fn c10_omega_certificate() {
    for name in ["ds-n2-l1", "ds-n3-l2", "ds-n1-l1"] {
        let s = data(name);
        let omega = build_omega(&s, &tol()).unwrap();

        let mut worst_q = 0.0f64;
        for q in &s.q_points {
            let z = q.z.as_finite().unwrap();
            let res = omega.per_component[q.component].residue_at(z);
            worst_q = worst_q.max((res - C::new(1.0, 0.0)).norm());
        }

        let mut worst_pair = 0.0f64;
        for alpha in 0..s.l {
            let r = s.r_points[alpha];
            let sr = s.sigma_image(r).unwrap();
            let res_r = omega.per_component[r.component].residue_at(r.z.as_finite().unwrap());
            let res_sr = omega.per_component[sr.component].residue_at(sr.z.as_finite().unwrap());
            worst_pair = worst_pair.max((res_r - res_sr).norm());
        }

        // residue theorem per component over all simple poles
        let mut worst_sum = 0.0f64;
        for c in 0..s.components.len() {
            let f = &omega.per_component[c];
            let mut poles: Vec<C> = vec![];
            let mut push = |p: PointOnCurve| {
                if p.component == c {
                    if let Some(z) = p.z.as_finite() {
                        poles.push(z);
                    }
                }
            };
            for q in &s.q_points {
                push(*q);
            }
            for (a, r) in s.r_points.iter().enumerate() {
                push(*r);
                if a < s.l {
                    push(s.sigma_image(*r).unwrap());
                }
            }
            for nd in &s.nodes {
                push(nd.a);
                push(nd.b);
            }
            let mut sum = f.residue_at_infinity();
            for p in poles {
                sum += f.residue_at(p);
            }
            worst_sum = worst_sum.max(sum.norm());
        }

        let pass = worst_q < 1e-10 && worst_pair < 1e-10 && worst_sum < 1e-12;
        line(
            "10 omega certificate",
            pass,
            format!(
                "{name}: Q residue error {:.3e}, R/sigmaR gap {:.3e}, component sums {:.3e}",
                worst_q, worst_pair, worst_sum
            ),
        );
    }
}
