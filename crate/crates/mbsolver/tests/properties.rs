use std::f64::consts::PI;

use atomphys::{SpeciesRecord, ThermalEnsemble};
use mbsolver::*;
use proptest::prelude::*;

fn cheap_grid() -> SolverGrid {
    SolverGrid { z_points: 6, velocity_nodes: 4, paths: PathSelection::Only(vec![[5.0, 6.0], [4.0, 5.0]]), ..SolverGrid::default() }
}

fn setup() -> (SpeciesRecord, ThermalEnsemble) {
    let s = SpeciesRecord::cesium();
    let e = ThermalEnsemble::from_vapor(&s, 364.15, 0.072).unwrap();
    (s, e)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn output_scales_with_input(scale in 0.01f64..100.0) {
        let (s, ens) = setup();
        let grid = cheap_grid();
        let mut a = ProtocolSchedule::for_species(&s, 2e-9, 2e-9, 1e-9);
        a.control_dipole_scale = 3.0;
        let mut b = a.clone();
        b.signal.mean_photons = a.signal.mean_photons * scale;
        let (sa, ra) = propagate_storage(&a, &grid, &ens, &s).unwrap();
        let (sb, rb) = propagate_storage(&b, &grid, &ens, &s).unwrap();
        let amp = scale.sqrt();
        for (x, y) in sa.s.iter().zip(&sb.s) {
            prop_assert!((y - x * amp).norm() <= 1e-10 * (x.norm() * amp).max(1e-300) + 1e-300);
        }
        for ((_, x), (_, y)) in ra.transmitted.iter().zip(&rb.transmitted) {
            prop_assert!((y - x * amp).norm() <= 1e-10 * (x.norm() * amp) + 1e-300);
        }
        let oa = propagate_retrieval(&sa, &a, &grid, &s).unwrap();
        let ob = propagate_retrieval(&sb, &b, &grid, &s).unwrap();
        for ((_, x), (_, y)) in oa.recalled.iter().zip(&ob.recalled) {
            prop_assert!((y - x * amp).norm() <= 1e-10 * (x.norm() * amp) + 1e-300);
        }
        prop_assert!((oa.eta_total - ob.eta_total).abs() <= 1e-10 * oa.eta_total);
    }

    #[test]
    fn read_in_budget_closes(energy in 0.0f64..2e-9, delta_ghz in 2.0f64..12.0, scale in 0.5f64..6.0) {
        let (s, ens) = setup();
        let mut sched = ProtocolSchedule::for_species(&s, energy, energy, 3.5e-9);
        sched.delta = 2.0 * PI * delta_ghz * 1e9;
        sched.control_dipole_scale = scale;
        let r = run_memory(&sched, &cheap_grid(), &ens, &s).unwrap();
        prop_assert!((r.read_in_budget.total() - 1.0).abs() < 1e-3, "{:?}", r.read_in_budget);
        prop_assert!(0.0 <= r.eta_total && r.eta_total <= r.eta_in && r.eta_in <= 1.0);
        if let Some(b) = r.read_out_budget {
            prop_assert!((b.total() - 1.0).abs() < 1e-3, "{:?}", b);
        }
    }

    #[test]
    fn dark_evolution_composes(t1 in 0.0f64..20e-9, t2 in 0.0f64..20e-9) {
        let (s, ens) = setup();
        let sched = ProtocolSchedule::for_species(&s, 0.5e-9, 0.5e-9, 0.0);
        let (state, _) = propagate_storage(&sched, &cheap_grid(), &ens, &s).unwrap();
        let two = evolve_dark(&evolve_dark(&state, t1).unwrap(), t2).unwrap();
        let one = evolve_dark(&state, t1 + t2).unwrap();
        for (x, y) in one.s.iter().zip(&two.s) {
            prop_assert!((x - y).norm() <= 1e-9 * x.norm().max(1e-30));
        }
        // decay only removes photons
        prop_assert!(one.stored_norm() <= state.stored_norm() * (1.0 + 1e-12));
    }
}
