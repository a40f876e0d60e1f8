use analytic::*;
use atomphys::SpeciesRecord;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #[test]
    fn zero_splittings_reduce_to_doppler_envelope(
        amps in prop::collection::vec(0.01f64..1.0, 1..6),
        tau_d in 1e-9f64..200e-9,
        tau in 0.0f64..300e-9,
    ) {
        let comps = amps.iter().map(|&a| BeatComponent { amplitude: Complex64::new(a, 0.0), frequency: 0.0 }).collect();
        let m = BeatModel::new(comps, tau_d).unwrap();
        let d = DephasingModel::new(1.0 / (tau_d * 150.0), 150.0);
        prop_assert!((beat_envelope(&m, tau) - d.envelope(tau)).abs() < 1e-12);
    }

    #[test]
    fn doppler_time_decreases_with_temperature(t1 in 200.0f64..600.0, dt in 1.0f64..200.0) {
        let cs = SpeciesRecord::cesium();
        let a = doppler_lifetime(852e-9, 917e-9, t1, &cs, Geometry::CounterPropagating).unwrap();
        let b = doppler_lifetime(852e-9, 917e-9, t1 + dt, &cs, Geometry::CounterPropagating).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn doppler_time_decreases_with_mismatch(lc in 860e-9f64..1000e-9, extra in 1e-9f64..100e-9) {
        let cs = SpeciesRecord::cesium();
        let a = doppler_lifetime(852e-9, lc, 364.0, &cs, Geometry::CounterPropagating).unwrap();
        let b = doppler_lifetime(852e-9, lc + extra, 364.0, &cs, Geometry::CounterPropagating).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn dephasing_product_is_unity(kr in 1e3f64..1e7, vs in 10.0f64..1000.0) {
        let m = DephasingModel::new(kr, vs);
        prop_assert!((m.tau_d * m.k_r * m.v_s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn beat_envelope_is_normalised_at_zero(
        amps in prop::collection::vec(0.01f64..1.0, 1..6),
        freqs in prop::collection::vec(-3e9f64..3e9, 6),
    ) {
        let comps = amps.iter().zip(&freqs).map(|(&a, &f)| BeatComponent { amplitude: Complex64::new(a, 0.0), frequency: f }).collect();
        let m = BeatModel::new(comps, 10e-9).unwrap();
        prop_assert!((beat_envelope(&m, 0.0) - 1.0).abs() < 1e-12);
    }
}
