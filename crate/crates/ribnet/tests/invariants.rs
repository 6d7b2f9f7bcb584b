//! Randomized structural invariants of the data model and the solver.

use proptest::prelude::*;

use ribnet::baker::BaSolver;
use ribnet::curve::{Coord, PointOnCurve};
use ribnet::dataset::builtin;
use ribnet::net::Grid;
use ribnet::poly::C;
use ribnet::tol::Tolerances;

proptest! {
    #[test]
    fn sigma_is_an_involution(comp in 0usize..4, re in -10.0f64..10.0) {
        let s = builtin("ds-n2-l1").unwrap();
        let p = PointOnCurve::new(comp, Coord::finite(re));
        let twice = s.sigma_image(s.sigma_image(p).unwrap()).unwrap();
        prop_assert_eq!(twice, p);
    }

    #[test]
    fn dataset_serialization_round_trips(scale in 0.5f64..2.0, d0 in -3.0f64..3.0) {
        let mut s = builtin("ds-n3-l2").unwrap();
        for p in &mut s.p_points {
            p.rho *= scale;
        }
        s.d[0] = d0;
        let back = ribnet::curve::SpectralCurveData::from_json_str(&s.to_json_string()).unwrap();
        prop_assert_eq!(s, back);
    }

    #[test]
    fn solutions_scale_with_d(w in -5.0f64..5.0, u0 in -1.0f64..1.0, u1 in -1.0f64..1.0) {
        let s = builtin("ds-n2-l1").unwrap();
        let tol = Tolerances::default();
        let solver = BaSolver::new(&s, &tol).unwrap();
        let unit = solver.solve(&[u0, u1], &[1.0]).unwrap();
        let scaled = solver.solve(&[u0, u1], &[w]).unwrap();
        for (a, b) in unit.coeffs.iter().zip(&scaled.coeffs) {
            let expect = a * w;
            prop_assert!((b - expect).norm() < 1e-12 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn psi_meets_normalization_everywhere(u0 in -1.5f64..1.5, u1 in -1.5f64..1.5) {
        let s = builtin("ds-n2-l1").unwrap();
        let tol = Tolerances::default();
        let solver = BaSolver::new(&s, &tol).unwrap();
        let sol = solver.solve(&[u0, u1], &s.d).unwrap();
        let pt = s.physical_r(0).unwrap();
        let v = solver.eval(&sol, pt).unwrap();
        prop_assert!((v - C::new(s.d[0], 0.0)).norm() < 1e-9);
    }

    #[test]
    fn grid_flat_and_multi_index_agree(a in -2.0f64..0.0, b in 0.1f64..2.0, c0 in 2usize..6, c1 in 2usize..6) {
        let g = Grid { axes: vec![
            ribnet::net::GridAxis { start: a, end: b, count: c0 },
            ribnet::net::GridAxis { start: a, end: b, count: c1 },
        ]};
        for flat in 0..g.len() {
            let idx = g.multi_index(flat);
            let u = g.u_at(flat);
            prop_assert_eq!(flat, idx[0] * c1 + idx[1]);
            prop_assert!((u[0] - g.axes[0].value(idx[0])).abs() == 0.0);
            prop_assert!((u[1] - g.axes[1].value(idx[1])).abs() == 0.0);
        }
    }
}
