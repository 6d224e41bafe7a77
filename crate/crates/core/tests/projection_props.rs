//! Random bounded systems in three variables: every feasible grid point must
//! project inside the polygon, and every polygon point on the grid must lift.

use num_traits::Zero;
use nrep_core::polytope::{HalfspaceSystem, Projection, Row};
use nrep_core::rational::{frac, int, Rational};
use proptest::prelude::*;

fn boxed(extra: &[([i64; 3], i64)]) -> HalfspaceSystem {
    let mut rows = Vec::new();
    for i in 0..3 {
        let mut a = vec![int(0); 3];
        a[i] = int(1);
        rows.push(Row::new(a.clone(), int(2)));
        a[i] = int(-1);
        rows.push(Row::new(a, int(0)));
    }
    for (a, b) in extra {
        rows.push(Row::new(a.iter().map(|&v| int(v)).collect(), int(*b)));
    }
    HalfspaceSystem::new(vec!["x".into(), "y".into(), "z".into()], vec![], rows).unwrap()
}

fn grid() -> Vec<Rational> {
    (0..=8).map(|k| frac(k, 4)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn projection_agrees_with_grid(
        extra in prop::collection::vec((prop::array::uniform3(-3i64..=3), -2i64..=6), 1..4),
    ) {
        let sys = boxed(&extra);
        let proj = Projection::compute(&sys, &sys.axis("x").unwrap(), &sys.axis("y").unwrap()).unwrap();
        let g = grid();
        for x in &g {
            for y in &g {
                let fiber = g.iter().any(|z| sys.contains_exact(&[x.clone(), y.clone(), z.clone()]));
                let inside = proj.polygon.contains_exact(&[x.clone(), y.clone()]);
                if fiber {
                    prop_assert!(inside, "({x}, {y}) feasible but outside");
                }
                if inside {
                    let p = proj.lift(x, y);
                    prop_assert!(p.is_some(), "({x}, {y}) inside but no lift");
                    let p = p.unwrap();
                    prop_assert!(sys.contains_exact(&p));
                    prop_assert!((&p[0] - x).is_zero() && (&p[1] - y).is_zero());
                }
            }
        }
        for v in &proj.polygon.vertices {
            prop_assert!(proj.lift(&v[0], &v[1]).is_some_and(|p| sys.contains_exact(&p)));
        }
    }
}
