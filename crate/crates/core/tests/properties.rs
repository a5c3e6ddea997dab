use nalgebra::{DVector, Matrix4};
use proptest::prelude::*;
use rand::Rng;

use corrflow::dynamics::{correlation_vector_2q, frequencies, generator, Propagator, SPECTRUM_TOL};
use corrflow::models::{coupling_3q_uniform, coupling_general, exchange_dm, exchange_ksea, exchange_xyz, FieldVector};
use corrflow::oracle::{assemble_generator, evolve_tensor, hamiltonian_matrix};
use corrflow::pauli::{density_from_tensor, tensor_from_density};
use corrflow::states::{bloch_vectors, local_cycle, partial_transpose_b, random_mixture, random_pure, rng_from_seed, schmidt_from_tab};
use corrflow::stationary::{gamel_check, nullspace, positivity_region_membership, DocumentedFamily, NULLSPACE_TOL};
use corrflow::CouplingTensor;

fn coupling_2q() -> impl Strategy<Value = CouplingTensor> {
    prop::collection::vec(-2.0f64..2.0, 15).prop_map(|v| {
        let mut m = Matrix4::zeros();
        for (k, x) in v.into_iter().enumerate() {
            let i = k + 1;
            m[(i / 4, i % 4)] = x;
        }
        coupling_general(m).unwrap()
    })
}

fn coupling_3q() -> impl Strategy<Value = CouplingTensor> {
    (prop::array::uniform3(-1.5f64..1.5), prop::array::uniform3(-1.5f64..1.5), prop::array::uniform3(-1.5f64..1.5), prop::array::uniform3(-2.0f64..2.0))
        .prop_map(|(j, d, k, b)| {
            coupling_3q_uniform(exchange_xyz(j) + exchange_dm(d) + exchange_ksea(k), FieldVector(b)).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_matches_commutators(j in coupling_2q()) {
        let m = generator(&j).unwrap();
        let oracle = assemble_generator(&hamiltonian_matrix(&j)).unwrap();
        prop_assert!((m.matrix() - oracle).amax() < 1e-12);
    }

    #[test]
    fn generator_is_skew_with_inert_identity(j in coupling_2q()) {
        let m = generator(&j).unwrap();
        prop_assert!(m.skew_defect() < 1e-14);
        prop_assert!(m.matrix().row(0).amax() == 0.0 && m.matrix().column(0).amax() == 0.0);
    }

    #[test]
    fn propagation_matches_unitary_2q(j in coupling_2q(), seed in any::<u64>(), t in 0.0f64..40.0) {
        let t0 = random_mixture(seed, 2, &[0.5, 0.3, 0.2]).unwrap();
        let a = Propagator::new(&generator(&j).unwrap()).unwrap().propagate(&t0, t).unwrap();
        let b = evolve_tensor(&t0, &hamiltonian_matrix(&j), t).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn propagation_matches_unitary_3q(j in coupling_3q(), seed in any::<u64>(), t in 0.0f64..20.0) {
        let t0 = random_pure(seed, 3).unwrap();
        let a = Propagator::new(&generator(&j).unwrap()).unwrap().propagate(&t0, t).unwrap();
        let b = evolve_tensor(&t0, &hamiltonian_matrix(&j), t).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn purity_and_positivity_are_conserved(j in coupling_2q(), seed in any::<u64>(), t in 0.0f64..100.0) {
        let t0 = random_mixture(seed, 2, &[0.75, 0.25]).unwrap();
        let tt = Propagator::new(&generator(&j).unwrap()).unwrap().propagate(&t0, t).unwrap();
        prop_assert!((tt.purity() - t0.purity()).abs() < 1e-10);
        prop_assert!(gamel_check(&tt).unwrap().satisfied);
    }

    #[test]
    fn spectrum_scales_with_coupling(j in coupling_2q(), c in 0.1f64..5.0) {
        let scaled = CouplingTensor::from_entries(2, j.entries().iter().map(|x| c * x).collect()).unwrap();
        let a = frequencies(&generator(&j).unwrap(), SPECTRUM_TOL).unwrap();
        let b = frequencies(&generator(&scaled).unwrap(), SPECTRUM_TOL).unwrap();
        prop_assert_eq!(a.zero_count, b.zero_count);
        for (x, y) in a.frequencies.iter().zip(&b.frequencies) {
            prop_assert!((c * x.0 - y.0).abs() < 1e-9 * y.0.max(1.0));
        }
    }

    #[test]
    fn nullspace_is_annihilated(j in coupling_2q()) {
        let m = generator(&j).unwrap();
        let k = nullspace(&m, NULLSPACE_TOL).unwrap();
        prop_assert!(k.dim() >= 2);
        for v in &k.vectors {
            prop_assert!((m.matrix() * v).amax() < 1e-9 * v.amax().max(1.0));
        }
        // The identity word is always stationary.
        let mut e0 = DVector::zeros(16);
        e0[0] = 1.0;
        prop_assert!(k.projection_residual(&e0) < 1e-12);
    }

    #[test]
    fn density_round_trip(seed in any::<u64>(), qubits in 2usize..=3) {
        let t = random_mixture(seed, qubits, &[0.6, 0.4]).unwrap();
        let back = tensor_from_density(&density_from_tensor(&t)).unwrap();
        prop_assert!(back.max_abs_diff(&t) < 1e-14);
    }

    #[test]
    fn local_transforms_keep_purity(seed in any::<u64>()) {
        let t = random_mixture(seed, 2, &[0.75, 0.25]).unwrap();
        let c = local_cycle(&t).unwrap();
        prop_assert!((c.purity() - t.purity()).abs() < 1e-14);
        prop_assert!(gamel_check(&c).unwrap().satisfied);
        let back = local_cycle(&local_cycle(&c).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&t) == 0.0);
        let pt = partial_transpose_b(&t).unwrap();
        prop_assert!((pt.purity() - t.purity()).abs() < 1e-14);
        prop_assert_eq!(&partial_transpose_b(&pt).unwrap(), &t);
        let (u, v) = (correlation_vector_2q(&t).unwrap(), correlation_vector_2q(&pt).unwrap());
        prop_assert!(u.max_abs_diff(&v) < 1e-14);
    }

    #[test]
    fn schmidt_inverts_tab(a in std::f64::consts::FRAC_1_SQRT_2..1.0) {
        let b = (1.0 - a * a).sqrt();
        let tab2 = 1.0 + 8.0 * a * a * b * b;
        let (x, y) = schmidt_from_tab(tab2).unwrap();
        prop_assert!((x - a).abs() < 1e-6 && (y - b).abs() < 1e-6);
        prop_assert!((x * x + y * y - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pure_states_are_pure(seed in any::<u64>(), qubits in 2usize..=3) {
        prop_assert!((random_pure(seed, qubits).unwrap().purity() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn documented_polynomials_agree_with_traces() {
    let mut rng = rng_from_seed(99);
    for fam in [
        DocumentedFamily::HeisenbergNoField,
        DocumentedFamily::HeisenbergZField { delta: 1.0 },
        DocumentedFamily::HeisenbergZField { delta: -0.5 },
        DocumentedFamily::HeisenbergZField { delta: 2.3 },
        DocumentedFamily::DmZField,
        DocumentedFamily::KseaZField,
    ] {
        let family = fam.family();
        for _ in 0..1000 {
            let p: Vec<f64> = (0..3).map(|_| rng.random_range(-0.4..0.4)).collect();
            // Errors with InequalityMismatch if the polynomials disagree.
            positivity_region_membership(&family, &p).unwrap();
        }
    }
}

#[test]
fn random_states_have_no_preferred_direction() {
    let n = 2000;
    let mut mean = [[0.0; 3]; 2];
    for seed in 0..n {
        for (q, v) in bloch_vectors(&random_pure(seed, 2).unwrap()).into_iter().enumerate() {
            for k in 0..3 {
                mean[q][k] += v[k] / n as f64;
            }
        }
    }
    for m in mean {
        let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 0.05, "{mean:?}");
    }
}
