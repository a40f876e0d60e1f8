use photonstats::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

fn gates() -> GateSpec {
    GateSpec::default()
}

fn bright(mu: f64) -> PairSourceModel {
    PairSourceModel {
        mu,
        eta_signal: 0.8,
        eta_signal_post: 0.8,
        eta_idler: 0.8,
        detector_efficiency: [0.6; 3],
        ..Default::default()
    }
}

fn within(est: &CorrelationResult, exact: f64, k: f64) -> bool {
    (est.value - exact).abs() <= k * est.sigma
}

const IN0: SlotSelection = SlotSelection { order: 0, gate: GateKind::In };
const OUT0: SlotSelection = SlotSelection { order: 0, gate: GateKind::Out };

#[test]
fn klyshko_efficiency_matches_loss_chain() {
    let s = PairSourceModel { mu: 0.05, ..Default::default() };
    let m = MemoryChannelModel::default();
    let st = simulate_configuration(&s, &m, &gates(), Configuration::Sig, 1.0, 11).unwrap();
    let c = gated_counts(&st, &gates(), IN0).unwrap();
    let rate = c.r_i as f64 / st.duration_s();
    assert!((rate - 30e3).abs() < 0.05 * 30e3, "idler rate {rate}");

    let k = c.r_si as f64 / c.r_i as f64;
    let sigma = (c.r_si as f64).sqrt() / c.r_i as f64;
    let chain = s.eta_signal * s.eta_signal_post * s.detector_efficiency[1];
    assert!((k - chain).abs() < 3.0 * sigma, "Klyshko {k} ± {sigma} vs {chain}");
    let o = exact_click_probabilities(&s, &m, &gates(), Configuration::Sig, IN0).unwrap();
    let exact = (o.p_s1i + o.p_s2i) / o.p_i;
    assert!((k - exact).abs() < 3.0 * sigma, "Klyshko {k} ± {sigma} vs oracle {exact}");
}

#[test]
fn sig_arrivals_peak_at_source_time_with_jitter_width() {
    let s = bright(0.05);
    let st = simulate_configuration(&s, &MemoryChannelModel::default(), &gates(), Configuration::Sig, 0.05, 2).unwrap();
    let h = arrival_histogram(&st, Detector::I, 200).unwrap();
    assert_eq!(h.total() as usize, st.count(Detector::I));
    // one peak per laser slot
    let per_slot: Vec<u64> = (0..80).map(|k| h.counts[(k * 12500 + 2000) / 200]).collect();
    let floor = h.counts[(12500 + 9000) / 200];
    assert!(per_slot.iter().all(|&c| c > 50 * floor.max(1)), "{per_slot:?} vs {floor}");

    let phases: Vec<f64> = st.times(Detector::I).iter().map(|t| (t % 12500) as f64).collect();
    let n = phases.len() as f64;
    let mean = phases.iter().sum::<f64>() / n;
    let sd = (phases.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n).sqrt();
    // Gaussian cut at 3σ has sd 0.9866σ; darks are negligible here
    assert!((mean - 2000.0).abs() < 5.0, "{mean}");
    assert!((sd / (350.0 * 0.9866) - 1.0).abs() < 0.02, "{sd}");
}

#[test]
fn ctrl_signal_arrivals_are_flat_darks() {
    let s = PairSourceModel { mu: 0.05, dark_rate_hz: [163.0, 20e3, 20e3], ..Default::default() };
    let st = simulate_configuration(&s, &MemoryChannelModel::default(), &gates(), Configuration::Ctrl, 0.5, 4).unwrap();
    let h = arrival_histogram(&st, Detector::S1, 12500).unwrap();
    let mean = h.total() as f64 / h.counts.len() as f64;
    let chi2: f64 = h.counts.iter().map(|&c| (c as f64 - mean).powi(2) / mean).sum();
    // 79 degrees of freedom; 5σ above the mean of the χ² law
    assert!(chi2 < 79.0 + 5.0 * (2.0 * 79.0f64).sqrt(), "χ² = {chi2}");
    assert!((h.total() as f64 - 1e4).abs() < 5.0 * 100.0);
}

#[test]
fn mem_coincidences_show_storage_echoes() {
    let s = bright(0.02);
    let st = simulate_configuration(&s, &MemoryChannelModel::default(), &gates(), Configuration::Mem, 0.2, 5).unwrap();
    let h = startstop_histogram(&st, StopChannel::S1, 100, (-6000, 44000), 3500).unwrap();
    let at = |dt: i64| {
        let k = ((dt + 6000) / 100) as usize;
        h.counts[k - 3..=k + 3].iter().sum::<u64>()
    };
    let floor = at(-3000).max(at(9000)).max(1);
    for dt in [0, 3500, 12500, 16000, 25000, 28500] {
        assert!(at(dt) > 3 * floor, "no echo at {dt} ps: {} vs {floor}", at(dt));
    }
    assert!(at(3500) > at(16000) && at(16000) > at(28500));
    let both = startstop_histogram(&st, StopChannel::S1S2, 100, (-6000, 44000), 3500).unwrap();
    assert!(both.total() > 0);
}

#[test]
fn independent_streams_give_accidental_floor_and_unit_g11() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (period, triggers) = (1_000_000u64, 20_000u64);
    let mut recs = Vec::new();
    for (d, rate) in [(Detector::I, 2e6), (Detector::S1, 1e6), (Detector::S2, 1e6)] {
        let n: f64 = Poisson::new(rate * 1e-6 * triggers as f64).unwrap().sample(&mut rng);
        for _ in 0..n as u64 {
            let t = rng.random_range(0..period * triggers);
            recs.push(Record { trigger: t / period, time_ps: t % period, detector: d });
        }
    }
    let st = EventStream::new(recs, period, triggers, Configuration::Sig).unwrap();

    let h = startstop_histogram(&st, StopChannel::S1, 1000, (-20000, 20000), 3500).unwrap();
    let r_start = st.count(Detector::I) as f64 / st.duration_s();
    let r_stop = st.count(Detector::S1) as f64 / st.duration_s();
    let expect = r_start * r_stop * 1e-9 * st.duration_s();
    let mean = h.total() as f64 / h.counts.len() as f64;
    assert!((mean - expect).abs() < 3.0 * (expect / h.counts.len() as f64).sqrt(), "{mean} {expect}");

    let c = gated_counts(&st, &gates(), IN0).unwrap();
    let g = g11(&c).unwrap();
    assert!((g.value - 1.0).abs() < 3.0 * g.sigma, "{g:?}");
}

/// Heralds and signal photons written slot by slot.
fn synthetic(slots: u64, seed: u64, mut signal: impl FnMut(&mut ChaCha8Rng, bool) -> u64) -> EventStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recs = Vec::new();
    for j in 0..slots {
        let t = j * 12500 + 2000;
        let herald = rng.random::<f64>() < 0.3;
        if herald {
            recs.push(Record { trigger: t / 1_000_000, time_ps: t % 1_000_000, detector: Detector::I });
        }
        let n = signal(&mut rng, herald);
        let mut fired = [false; 2];
        for _ in 0..n {
            fired[rng.random_range(0..2)] = true;
        }
        for (k, d) in [Detector::S1, Detector::S2].into_iter().enumerate() {
            if fired[k] {
                recs.push(Record { trigger: t / 1_000_000, time_ps: t % 1_000_000 + 100, detector: d });
            }
        }
    }
    EventStream::new(recs, 1_000_000, slots / 80, Configuration::Sig).unwrap()
}

#[test]
fn heralded_coherent_light_has_unit_g2h() {
    let pois = Poisson::new(0.2).unwrap();
    let st = synthetic(800_000, 7, |rng, _| pois.sample(rng) as u64);
    let r = g2h(&gated_counts(&st, &gates(), IN0).unwrap()).unwrap();
    assert!((r.value - 1.0).abs() < 3.0 * r.sigma, "{r:?}");
}

#[test]
fn ideal_single_photons_have_zero_g2h() {
    let st = synthetic(80_000, 8, |_, herald| u64::from(herald));
    let c = gated_counts(&st, &gates(), IN0).unwrap();
    assert_eq!(c.r_trip, 0);
    assert_eq!(g2h(&c).unwrap().value, 0.0);
}

#[test]
fn estimators_converge_to_oracle() {
    let s = bright(0.01);
    let m = MemoryChannelModel::default();
    let g = gates();
    for (config, sels) in [
        (Configuration::Sig, vec![IN0, SlotSelection::new(1, GateKind::In)]),
        (Configuration::Mem, vec![IN0, OUT0, SlotSelection::new(1, GateKind::Out)]),
    ] {
        let st = simulate_configuration(&s, &m, &g, config, 2.5, 21).unwrap();
        let hits = GatedHits::new(&st, &g).unwrap();
        for sel in sels {
            let c = hits.counts(sel).unwrap();
            let o = exact_click_probabilities(&s, &m, &g, config, sel).unwrap();
            let a = g11(&c).unwrap();
            assert!(within(&a, o.g11().unwrap(), 3.0), "{config} {sel:?} g11 {a:?} vs {}", o.g11().unwrap());
            if let Ok(b) = g2h(&c) {
                assert!(within(&b, o.g2h().unwrap(), 3.0), "{config} {sel:?} g2h {b:?} vs {}", o.g2h().unwrap());
            }
            // singles rates per gate
            let p_s = (c.r_s1 as f64) / c.r_t as f64;
            assert!((p_s - o.p_s1).abs() < 4.0 * (o.p_s1 / c.r_t as f64).sqrt() + 1e-12, "{config} {sel:?}");
        }
    }
}

#[test]
fn mem_readout_heralding_tracks_memory_efficiency() {
    let s = PairSourceModel { dark_rate_hz: [0.0; 3], ..bright(0.002) };
    let m = MemoryChannelModel::default();
    let st = simulate_configuration(&s, &m, &gates(), Configuration::Mem, 1.0, 12).unwrap();
    let c = gated_counts(&st, &gates(), OUT0).unwrap();
    let ratio = c.r_si as f64 / c.r_i as f64;
    let sigma = (c.r_si as f64).sqrt() / c.r_i as f64;
    let configured = s.eta_signal * m.readouts[0].efficiency * s.eta_signal_post * s.detector_efficiency[1];
    // the thermal excess at μ = 0.002 is 0.4%, well inside the counting error
    assert!((ratio - configured).abs() < 3.0 * sigma, "{ratio} ± {sigma} vs {configured}");
}

#[test]
fn sig_series_is_classical_away_from_zero_delay() {
    let s = PairSourceModel { mu: 0.05, ..Default::default() };
    let st = simulate_configuration(&s, &MemoryChannelModel::default(), &gates(), Configuration::Sig, 2.0, 13).unwrap();
    let series = readout_series(&st, &gates()).unwrap();
    assert_eq!(series.len(), 6);
    for e in &series {
        match e.selection.gate {
            GateKind::Out => assert!(e.g11.is_none() && e.note.is_some()),
            GateKind::In if e.selection.order == 0 => assert!(e.g11.as_ref().unwrap().value > 2.0),
            GateKind::In => {
                let r = e.g11.as_ref().unwrap();
                assert!((r.value - 1.0).abs() < 3.0 * r.sigma, "{} ns: {r:?}", e.delay_ns);
            }
        }
    }
}

#[test]
fn empty_stream_estimators_are_undefined() {
    let s = PairSourceModel { mu: 0.0, dark_rate_hz: [0.0; 3], ..Default::default() };
    let st = simulate_configuration(&s, &MemoryChannelModel::default(), &gates(), Configuration::Mem, 1e-3, 1).unwrap();
    let c = gated_counts(&st, &gates(), OUT0).unwrap();
    assert!(matches!(g11(&c), Err(PhotonError::Undefined(_))));
    assert!(matches!(g2h(&c), Err(PhotonError::Undefined(_))));
    assert!(readout_series(&st, &gates()).unwrap().iter().all(|e| e.g11.is_none()));
}

#[test]
fn heralding_budget_reproduces_source_numbers() {
    let chain = |v: &[(&str, f64)]| v.iter().map(|(k, x)| (k.to_string(), *x)).collect::<Vec<_>>();
    let b = heralding_budget(&chain(&[("eta_k", 0.007), ("eta_det", 0.5), ("eta_s_add", 0.30), ("eta_s_total", 0.037)]))
        .unwrap();
    assert_eq!(format!("{:.1}", 100.0 * b.eta_herald.unwrap()), "4.7");
    assert_eq!(format!("{:.0}", 100.0 * b.eta_s_waveguide.unwrap()), "38");
    assert_eq!(b.stages.len(), 4);
}

#[test]
fn stream_files_round_trip_simulation() {
    let s = PairSourceModel { mu: 0.05, ..Default::default() };
    let st = simulate_configuration(&s, &MemoryChannelModel::default(), &gates(), Configuration::Mem, 0.01, 3).unwrap();
    let mut buf = Vec::new();
    st.write_to(&mut buf).unwrap();
    assert_eq!(EventStream::read_from(&buf[..]).unwrap(), st);
}
