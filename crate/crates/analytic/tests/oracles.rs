use std::f64::consts::PI;

use analytic::lindblad::Level;
use analytic::*;
use atomphys::SpeciesRecord;
use num_complex::Complex64;

const T_CELL: f64 = 364.15;

#[test]
fn cesium_doppler_time_with_rounded_wavelengths() {
    let cs = SpeciesRecord::cesium();
    let t = doppler_lifetime(852e-9, 917e-9, T_CELL, &cs, Geometry::CounterPropagating).unwrap();
    assert!((t - 12.7e-9).abs() < 0.1e-9, "τ_D = {t:e}");
    let kr = residual_wavevector(852e-9, 917e-9, Geometry::CounterPropagating);
    assert!((kr - 5.227e5).abs() < 1e2);
}

#[test]
fn rubidium_doppler_time_with_rounded_wavelengths() {
    let rb = SpeciesRecord::rubidium87();
    let t = doppler_lifetime(780e-9, 776e-9, T_CELL, &rb, Geometry::CounterPropagating).unwrap();
    assert!((t - 129e-9).abs() < 1e-9, "τ_D = {t:e}");
}

#[test]
fn co_propagation_dephases_faster() {
    let cs = SpeciesRecord::cesium();
    let counter = doppler_lifetime(852e-9, 917e-9, T_CELL, &cs, Geometry::CounterPropagating).unwrap();
    let co = doppler_lifetime(852e-9, 917e-9, T_CELL, &cs, Geometry::CoPropagating).unwrap();
    assert!(co < counter / 20.0);
}

#[test]
fn two_equal_components_beat_as_cosine_squared() {
    let w = 2.0 * PI * 300e6;
    let c = |f: f64| BeatComponent { amplitude: Complex64::new(0.5, 0.0), frequency: f };
    let m = BeatModel::new(vec![c(0.0), c(w)], 12e-9).unwrap();
    for k in 0..50 {
        let tau = k as f64 * 0.4e-9;
        let want = (0.5 * w * tau).cos().powi(2) * (-(tau / 12e-9f64).powi(2)).exp();
        assert!((beat_envelope(&m, tau) - want).abs() < 1e-13);
    }
}

#[test]
fn mu1_reproduces_quoted_benchmark() {
    let v = mu1(6.4e-6, 0.1677).unwrap();
    assert!((v - 3.8e-5).abs() < 0.05e-5, "μ₁ = {v:e}");
    assert_eq!(mu1(0.0, 0.2).unwrap(), 0.0);
    assert!((mu1(1e-4, 0.5).unwrap() - 2e-4).abs() < 1e-18);
    assert!(mu1(1e-4, 0.0).is_err());
}

#[test]
fn undriven_intermediate_level_decays_at_tabulated_rate() {
    let cs = SpeciesRecord::cesium();
    let mut o = LindbladOptions::new(0.0, 60e-9);
    o.dt = 5e-12;
    o.record_every = 1000;
    let mut p = vec![0.0; 12];
    p[5] = 1.0; // 6P3/2 F'=5
    o.initial_populations = Some(p);
    let tr = single_atom_lindblad(&cs, &|_| 0.0, &|_| 0.0, &o).unwrap();
    let gamma = cs.intermediate.linewidth;
    for (r, &t) in tr.times.iter().enumerate() {
        let want = (-gamma * t).exp();
        assert!((tr.population(r, 5) - want).abs() < 1e-9, "t = {t:e}");
        // F'=5 can only decay to F=4
        assert!((tr.population(r, 1) - (1.0 - want)).abs() < 1e-9);
    }
}

#[test]
fn undriven_storage_level_decays_at_tabulated_rate() {
    let cs = SpeciesRecord::cesium();
    let mut o = LindbladOptions::new(0.0, 200e-9);
    o.dt = 10e-12;
    o.record_every = 2000;
    let mut p = vec![0.0; 12];
    p[11] = 1.0; // 6D5/2 F''=6
    o.initial_populations = Some(p);
    let tr = single_atom_lindblad(&cs, &|_| 0.0, &|_| 0.0, &o).unwrap();
    let r = tr.final_record();
    let want = (-cs.storage.linewidth * 200e-9).exp();
    assert!((tr.population(r, 11) - want).abs() < 1e-9);
}

#[test]
fn weak_resonant_pulse_matches_first_order_perturbation() {
    let cs = SpeciesRecord::cesium();
    let (t0, sig, peak) = (60e-12, 15e-12, 2e8);
    let omega = move |t: f64| peak * (-0.5 * ((t - t0) / sig).powi(2)).exp();
    let t_end = 150e-12;
    let mut o = LindbladOptions::new(0.0, t_end);
    o.dt = 0.1e-12;
    o.record_every = 100_000;
    let tr = single_atom_lindblad(&cs, &omega, &|_| 0.0, &o).unwrap();
    let excited = tr.manifold_population(tr.final_record(), Level::Intermediate);

    // c_F' = i ∫ (Ω/2) w_F' exp(−(iE_F' + Γ/2)(T − t)) dt, summed in quadrature
    let (g, e) = (&cs.ground, &cs.intermediate);
    let e_ref = e.offset(5.0);
    let n = 20_000;
    let h = t_end / n as f64;
    let mut oracle = 0.0;
    for le in &e.levels {
        let w = atomphys::relative_line_strength(4.0, le.f, g.j, e.j, 3.5);
        let rate = Complex64::new(0.5 * e.linewidth, le.energy_offset - e_ref);
        let mut c = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let t = k as f64 * h;
            let wk = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            c += wk * 0.5 * omega(t) * w * (-rate * (t_end - t)).exp();
        }
        oracle += (c * h / 3.0).norm_sqr();
    }
    assert!(((excited - oracle) / oracle).abs() < 0.01, "numeric {excited:e} vs perturbative {oracle:e}");
}

#[test]
fn far_detuned_two_photon_transfer_is_adiabatic() {
    let cs = SpeciesRecord::cesium();
    let sig = 200e-12;
    let pulse = move |peak: f64| move |t: f64| peak * (-0.5 * ((t - 1.2e-9) / sig).powi(2)).exp();
    let mut o = LindbladOptions::new(0.0, 2.6e-9);
    o.dt = 0.5e-12;
    o.record_every = 100_000;
    o.delta = 2.0 * PI * 6e9;
    let tr = single_atom_lindblad(&cs, &pulse(3e8), &pulse(5.3e9), &o).unwrap();
    let r = tr.final_record();
    let p6 = tr.manifold_population(r, Level::Intermediate);
    let d6 = tr.manifold_population(r, Level::Storage);
    assert!(d6 > 1e-8, "no two-photon transfer: {d6:e}");
    assert!(p6 < 1e-2 * d6, "6P {p6:e} vs 6D {d6:e}");
    let trace: f64 = (0..tr.dim()).map(|k| tr.population(r, k)).sum();
    assert!((trace - 1.0).abs() < 1e-9);
}
