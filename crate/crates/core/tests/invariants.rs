use num_complex::Complex64;
use nrep_core::constraints::{catalog, Relation};
use nrep_core::fock::{FermionState, OrbitalUnitary};
use nrep_core::pinning::{selection_rule, structured_state, verify_pinned_state, StructuredAmplitudes};
use nrep_core::rdm::{compute_rdm, hole_dual_spectrum, spectrum_of};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=7).prop_flat_map(|r| (1..r, Just(r)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_and_pauli_bounds((n, r) in shape(), seed in any::<u64>()) {
        let s = FermionState::random(n, r, seed).unwrap();
        let spec = spectrum_of(&s).unwrap();
        prop_assert!((spec.sum() - n as f64).abs() < 1e-10);
        prop_assert!((compute_rdm(&s).unwrap().trace() - n as f64).abs() < 1e-10);
        for &l in spec.values() {
            prop_assert!(l > -1e-10 && l < 1.0 + 1e-10);
        }
        prop_assert!(spec.values().windows(2).all(|w| w[0] >= w[1] - 1e-9));
    }

    #[test]
    fn spectrum_invariant_under_orbital_rotation((n, r) in shape(), seed in any::<u64>()) {
        let s = FermionState::random(n, r, seed).unwrap();
        let u = OrbitalUnitary::random(r, seed ^ 0x9e37_79b9);
        let t = s.change_basis(&u).unwrap();
        prop_assert!((t.norm() - 1.0).abs() < 1e-10);
        let (a, b) = (spectrum_of(&s).unwrap(), spectrum_of(&t).unwrap());
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let back = t.change_basis(&u.adjoint()).unwrap();
        prop_assert!(back.sub(&s).unwrap().norm() < 1e-10);
    }

    #[test]
    fn hole_dual_spectrum_is_reflected((n, r) in shape(), seed in any::<u64>()) {
        let s = FermionState::random(n, r, seed).unwrap();
        let dual = s.hole_dual();
        prop_assert_eq!(dual.n_particles(), r - n);
        let expect = hole_dual_spectrum(&spectrum_of(&s).unwrap());
        let got = spectrum_of(&dual).unwrap();
        for (x, y) in expect.values().iter().zip(got.values()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let twice = dual.hole_dual();
        let sign = if (n * (r - n)) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(twice.sub(&s.scale(Complex64::new(sign, 0.0))).unwrap().norm() < 1e-12);
    }

    #[test]
    fn catalog_holds_on_random_states(r in 6usize..=8, seed in any::<u64>()) {
        let s = FermionState::random(3, r, seed).unwrap();
        let spec = spectrum_of(&s).unwrap();
        for c in &catalog(3, r).unwrap().constraints {
            let res = c.residual(spec.values());
            match c.relation() {
                Relation::Le => prop_assert!(res >= -1e-9, "{} residual {}", c.label(), res),
                Relation::Eq => prop_assert!(res.abs() <= 1e-9, "{} residual {}", c.label(), res),
            }
        }
    }

    #[test]
    fn structured_round_trip(
        w in prop::array::uniform4(0.05f64..1.0),
        phase in prop::array::uniform4(0.0f64..std::f64::consts::TAU),
    ) {
        let norm: f64 = w.iter().sum();
        let amp: Vec<Complex64> = w.iter().zip(&phase).map(|(x, p)| Complex64::from_polar((x / norm).sqrt(), *p)).collect();
        let s = structured_state(amp[0], amp[1], amp[2], amp[3]).unwrap();
        let set = catalog(3, 7).unwrap();
        for label in ["l1 + l2 + l4 + l7 <= 2", "l1 + l3 + l4 + l6 <= 2", "l1 + l2 + l5 + l6 <= 2"] {
            let rule = selection_rule(set.get(label).unwrap(), 3).unwrap();
            prop_assert!(verify_pinned_state(&s, &rule, 1e-10).unwrap().pinned);
        }
        let diag = compute_rdm(&s).unwrap().diagonal();
        let q = StructuredAmplitudes::from_occupations(&diag, 1e-8).unwrap();
        prop_assert!((q.alpha_sq - w[0] / norm).abs() < 1e-10);
        prop_assert!((q.beta_sq - w[1] / norm).abs() < 1e-10);
        prop_assert!((q.gamma_sq - w[2] / norm).abs() < 1e-10);
        prop_assert!((q.delta_sq_mean - w[3] / norm).abs() < 1e-10);
    }
}

#[test]
fn structured_state_is_in_its_natural_basis() {
    let s = structured_state(
        Complex64::new(0.8, 0.0),
        Complex64::from_polar(0.4, 1.0),
        Complex64::from_polar(0.4, -0.3),
        Complex64::from_polar(0.2, 2.0),
    )
    .unwrap();
    let rho = compute_rdm(&s).unwrap();
    assert!(rho.max_off_diagonal() < 1e-15);
}
