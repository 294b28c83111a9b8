use core::f64::consts::PI;

use dgl_core::canonical::FockSpace;
use dgl_core::evolve::{column_norm_drift, hamiltonian_matrix, Stepper, Coupling};
use dgl_core::linalg::{gram_residual, hermiticity_residual, identity, max_abs, max_abs_diff};
use dgl_core::potential::{presets, Envelope};
use dgl_core::{EMPotential, GaugeFunction, Grid1D, ModeBank, C64};
use proptest::prelude::*;

fn odd_sites() -> impl Strategy<Value = usize> {
    (1usize..8).prop_map(|h| 2 * h + 1)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn projectors_partition_identity(n in odd_sites(), m in 0.05f64..3.0, length in 1.0f64..20.0) {
        let bank = ModeBank::free_modes(Grid1D::new(length, n).unwrap(), m, 1.0).unwrap();
        let (pm, pp) = bank.projectors();
        let id = identity(2 * n);
        prop_assert!(max_abs_diff(&(&pm * &pm), &pm) <= 1e-12);
        prop_assert!(max_abs_diff(&(&pp * &pp), &pp) <= 1e-12);
        prop_assert!(max_abs(&(&pm * &pp)) <= 1e-12);
        prop_assert!(max_abs_diff(&(&pm + &pp), &id) <= 1e-12);
        let g = bank.vacuum_g();
        prop_assert!(max_abs_diff(&(&g * &g), &id) <= 1e-12);
    }

    #[test]
    fn spectral_derivative_is_antisymmetric(n in odd_sites(), length in 0.5f64..50.0) {
        let d = Grid1D::new(length, n).unwrap().spectral_derivative();
        prop_assert_eq!(d.clone() + d.transpose(), nalgebra::DMatrix::zeros(n, n));
    }

    #[test]
    fn gauge_transform_is_a_similarity(amp in -1.5f64..1.5, phase in 0.0f64..6.0, t in 0.05f64..0.95) {
        let grid = Grid1D::new(2.0 * PI, 13).unwrap();
        let bank = ModeBank::free_modes(grid.clone(), 1.0, 1.0).unwrap();
        let base = presets::reference_pulse(grid.length(), 0.5, 0.0, 1.0).unwrap();
        let chi = GaugeFunction::separable(grid.length(), amp, 2, phase, Envelope::Pulse { start: 0.0, duration: 1.0 }).unwrap();
        let moved = base.gauge_transform(&chi, &grid).unwrap();
        let h = hamiltonian_matrix(&bank, &base, t).unwrap();
        let h2 = hamiltonian_matrix(&bank, &moved, t).unwrap();
        let u = chi.phase_factors(&grid, 1.0, t);
        let mut expected = nalgebra::DMatrix::<C64>::zeros(26, 26);
        for a in 0..26 {
            for b in 0..26 {
                expected[(a, b)] = u[a / 2] * h[(a, b)] * u[b / 2].conj();
            }
            expected[(a, a)] += C64::new(chi.time_derivative(grid.position(a / 2), t), 0.0);
        }
        prop_assert!(hermiticity_residual(&h2) == 0.0);
        prop_assert!(max_abs_diff(&h2, &expected) <= 1e-11);
    }

    #[test]
    fn crank_nicolson_keeps_columns_orthonormal(amp in 0.0f64..3.0, dt in 1e-3f64..0.2) {
        let grid = Grid1D::new(2.0 * PI, 9).unwrap();
        let bank = ModeBank::free_modes(grid, 1.0, 1.0).unwrap();
        let chi = GaugeFunction::separable(2.0 * PI, amp, 1, 0.3, Envelope::Ramp { start: 0.0, rise: 0.5 }).unwrap();
        let pot = EMPotential::pure_gauge(chi, bank.grid()).unwrap();
        let mut stepper = Stepper::new(&bank, &pot, Coupling::Covariant).unwrap();
        let mut phi = bank.negative_sea();
        for n in 0..10 {
            phi = stepper.step(&phi, n as f64 * dt, dt).unwrap();
        }
        prop_assert!(gram_residual(&phi) <= 1e-12);
        prop_assert!(column_norm_drift(&phi) <= 1e-12);
    }

    #[test]
    fn every_paired_selection_satisfies_the_algebra(mask in 1u32..32) {
        let bank = ModeBank::free_modes(Grid1D::new(2.0 * PI, 5).unwrap(), 1.0, 1.0).unwrap();
        let mut selection = Vec::new();
        for (bit, k) in (-2i64..=2).enumerate() {
            if mask & (1 << bit) != 0 {
                selection.push(bank.index_of(dgl_core::Branch::Negative, k).unwrap());
                selection.push(bank.index_of(dgl_core::Branch::Positive, k).unwrap());
            }
        }
        let space = FockSpace::new(&bank, &selection).unwrap();
        let ac = space.anticommutator_residuals();
        prop_assert_eq!((ac.mixed, ac.same), (0.0, 0.0));
        let h0 = space.free_hamiltonian().unwrap();
        prop_assert!(space.vacuum_state().expectation(&h0).abs() <= 1e-12);
    }

    #[test]
    fn jordan_wigner_sign_counts_lower_occupations(ket in 0u32..4096, i in 0usize..12) {
        let below = (ket & ((1u32 << i) - 1)).count_ones();
        let expected = if below % 2 == 0 { 1.0 } else { -1.0 };
        match FockSpace::annihilate(i, ket) {
            Some((s, k)) => {
                prop_assert_eq!(s, expected);
                prop_assert_eq!(k, ket & !(1 << i));
                prop_assert_eq!(FockSpace::create(i, k), Some((expected, ket)));
            }
            None => prop_assert_eq!(ket & (1 << i), 0),
        }
    }
}
