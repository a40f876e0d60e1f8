//! Acceptance suite: one line per criterion at the stated tolerances.
//!
//! Runs as a plain binary so the criterion lines are always printed. Parts
//! that the model cannot reach are reported as FAIL and listed in
//! `KNOWN_SHORTFALLS`; the process exits nonzero only on an unexpected failure.

use std::path::PathBuf;
use std::time::Instant;

use mbsolver::{run_memory, RunConfig};
use orca::counts::CountsConfig;
use orca::{lifetime, sweep};
use photonstats::{
    exact_click_probabilities, exact_moments, g11, g2h, heralding_budget, readout_series, simulate_configuration,
    AddedNoise, Configuration, GateKind, GateSpec, GatedHits, MemoryChannelModel, NoiseKind, PairSourceModel,
    ReadoutSlot, SlotSelection,
};

/// Criteria with a documented shortfall (README, acceptance section).
const KNOWN_SHORTFALLS: &[u32] = &[2, 3];

const IN0: SlotSelection = SlotSelection { order: 0, gate: GateKind::In };
const OUT0: SlotSelection = SlotSelection { order: 0, gate: GateKind::Out };

fn preset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn memory_preset(name: &str) -> RunConfig {
    RunConfig::from_file(&preset(name)).unwrap()
}

fn counts_preset(name: &str) -> CountsConfig {
    CountsConfig::from_toml_str(&std::fs::read_to_string(preset(name)).unwrap()).unwrap()
}

struct Outcome {
    pass: bool,
    detail: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, detail: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: String) {
        self.pass &= ok;
        self.detail.push(format!("[{}] {msg}", if ok { "ok" } else { "miss" }));
    }
}

fn doppler_oracle() -> Outcome {
    let mut o = Outcome::new();
    let toml = "density_m3 = 1e17\n[schedule]\nread_in_energy_nj = 0.5\nread_out_energy_nj = 0.5\nstorage_time_ns = 0.0\n\
                [model]\nzero_splittings = true\nno_storage_decay = true\n";
    let mut cfg = RunConfig::from_toml_str(toml).unwrap();
    let s = cfg.species().unwrap();
    let tau_d = analytic::doppler_lifetime(s.signal.wavelength, s.control.wavelength, cfg.temperature_k, &s, cfg.schedule.geometry)
        .unwrap();
    cfg.lifetime.taus_ns = (0..=16).map(|k| k as f64 * 0.125 * tau_d * 1e9).collect();
    let r = lifetime::compute(&cfg).unwrap();
    let worst = r.rows.iter().map(|row| (row.point.eta_n / row.doppler - 1.0).abs()).fold(0.0, f64::max);
    o.check(worst < 0.02, format!("max |η_N/exp(−(τ/τ_D)²) − 1| = {worst:.4} over τ ≤ 2τ_D (τ_D = {:.2} ns)", tau_d * 1e9));
    o
}

fn lifetimes() -> Outcome {
    let mut o = Outcome::new();
    for (label, file, target) in [
        ("Cs full model", "fig2b.toml", 5.9),
        ("Cs pumped single chain", "figA1.toml", 11.5),
        ("Rb-87 pumped single chain", "figA2.toml", 99.0),
    ] {
        let r = lifetime::compute(&memory_preset(file)).unwrap();
        let t = r.fitted_lifetime_s * 1e9;
        let extra = if r.fit.oscillatory {
            format!(", re-crossings {:?} ns", r.fit.recrossings.iter().map(|x| (x * 1e10).round() / 10.0).collect::<Vec<_>>())
        } else {
            String::new()
        };
        o.check((t / target - 1.0).abs() <= 0.15, format!("{label}: 1/e = {t:.2} ns, target {target} ns ± 15%{extra}"));
    }
    o
}

fn calibrated_efficiency() -> Outcome {
    let mut o = Outcome::new();
    let cfg = memory_preset("cs-calibrated.toml");
    let s = cfg.species().unwrap();
    let r = run_memory(&cfg.schedule_for(&s).unwrap(), &cfg.grid(), &cfg.ensemble_for(&s).unwrap(), &s).unwrap();
    o.check((r.eta_in - 0.70).abs() <= 0.05, format!("η_in = {:.3} at 0.21 nJ (0.70 ± 0.05)", r.eta_in));
    o.detail.push(format!("[info] η_total = {:.4} at the 0.21/0.97 nJ operating point", r.eta_total));
    let sw = sweep::compute(&memory_preset("fig2c.toml")).unwrap();
    let m = sw.maximum;
    o.check(
        (m.eta_total - 0.1677).abs() <= 0.02,
        format!("sweep maximum η_total = {:.4} at {:.2} nJ (0.1677 ± 0.02)", m.eta_total, m.energy * 1e9),
    );
    let zero = sw.points.iter().find(|p| p.energy == 0.0).map(|p| p.eta_total);
    o.check(zero == Some(0.0), format!("η_total at zero energy = {zero:?}"));
    let x = sw.low_energy_exponent.unwrap();
    o.check((x - 2.0).abs() <= 0.1, format!("low-energy exponent {x:.3} (2.0 ± 0.1)"));
    let last = sw.points.last().unwrap();
    o.check(last.eta_total < m.eta_total, format!("saturates: η at {:.1} nJ = {:.4} < maximum", last.energy * 1e9, last.eta_total));
    o
}

/// Loss chain of the experiment with the given pair number.
fn lab_chain(mu: f64) -> PairSourceModel {
    PairSourceModel { mu, ..Default::default() }
}

fn within(est: f64, sigma: f64, exact: f64) -> bool {
    (est - exact).abs() <= 3.0 * sigma
}

fn estimator_agreement() -> Outcome {
    let mut o = Outcome::new();
    let g = GateSpec::default();
    let m = MemoryChannelModel::default();
    let duration = 1.0;
    for mu in [0.005, 0.01, 0.05] {
        let s = lab_chain(mu);
        for (config, sels) in [(Configuration::Sig, vec![IN0]), (Configuration::Mem, vec![IN0, OUT0])] {
            let st = simulate_configuration(&s, &m, &g, config, duration, 4000 + (mu * 1e4) as u64).unwrap();
            let hits = GatedHits::new(&st, &g).unwrap();
            for sel in sels {
                let c = hits.counts(sel).unwrap();
                let x = exact_click_probabilities(&s, &m, &g, config, sel).unwrap();
                let a = g11(&c).unwrap();
                let xa = x.g11().unwrap();
                let head = format!("μ {mu} {config} {:?}{}: g11 {:.2} ± {:.2} vs {xa:.2}", sel.gate, sel.order, a.value, a.sigma);
                // with few heralded signal clicks g2h can be undefined; g11 is still compared
                match g2h(&c) {
                    Ok(b) => {
                        let xb = x.g2h().unwrap();
                        o.check(
                            within(a.value, a.sigma, xa) && within(b.value, b.sigma, xb),
                            format!("{head}; g2h {:.3} ± {:.3} vs {xb:.4} (R_trip {})", b.value, b.sigma, c.r_trip),
                        );
                    }
                    Err(e) => o.check(within(a.value, a.sigma, xa), format!("{head}; g2h not estimable: {e}")),
                }
            }
        }
    }
    o.detail.push(format!("[info] {:.1e} pulses per setting and μ", duration * 80e6));
    o
}

/// Transmissive chain used where triple coincidences must be resolved.
fn bright_chain(mu: f64) -> PairSourceModel {
    PairSourceModel {
        mu,
        eta_signal: 0.8,
        eta_signal_post: 0.8,
        eta_idler: 0.8,
        detector_efficiency: [0.6; 3],
        ..Default::default()
    }
}

/// Pair number at which the bright chain's oracle g2h(SIG) equals `target`.
fn mu_for_g2h(target: f64) -> f64 {
    let (g, m) = (GateSpec::default(), MemoryChannelModel::default());
    let f = |mu: f64| exact_click_probabilities(&bright_chain(mu), &m, &g, Configuration::Sig, IN0).unwrap().g2h().unwrap();
    let (mut lo, mut hi) = (1e-4f64, 0.1f64);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

fn noise_free_statistics() -> Outcome {
    let mut o = Outcome::new();
    let g = GateSpec::default();
    let single = MemoryChannelModel { eta_in: 0.70, readouts: vec![ReadoutSlot { delay_ps: 3500.0, efficiency: 0.1677 }], ..Default::default() };
    // dark counts dilute the weaker read-out gate more than the input gate,
    // so the identity is a statement about the memory channel alone
    let s = PairSourceModel { dark_rate_hz: [0.0; 3], ..lab_chain(0.0075) };
    let gin = exact_moments(&s, &single, &g, Configuration::Sig, IN0).unwrap().g2h();
    let gout = exact_moments(&s, &single, &g, Configuration::Mem, OUT0).unwrap().g2h();
    let rel = (gout / gin - 1.0).abs();
    o.check(rel <= 1e-12, format!("oracle g2h read-out/input − 1 = {rel:.1e} (input {gin:.5})"));

    let mu = mu_for_g2h(0.020);
    let s = bright_chain(mu);
    let m = MemoryChannelModel::default();
    let run = |config, m: &MemoryChannelModel, sel, seed| {
        let st = simulate_configuration(&s, m, &g, config, 10.0, seed).unwrap();
        g2h(&GatedHits::new(&st, &g).unwrap().counts(sel).unwrap()).unwrap()
    };
    let sig = run(Configuration::Sig, &m, IN0, 51);
    let mem = run(Configuration::Mem, &m, OUT0, 52);
    let z = |a: &photonstats::CorrelationResult, b: &photonstats::CorrelationResult| {
        (b.value - a.value) / (a.sigma.powi(2) + b.sigma.powi(2)).sqrt()
    };
    o.detail.push(format!("[info] transmissive chain at μ = {mu:.5} (oracle g2h(SIG) = 0.020)"));
    o.check(
        (sig.value - 0.020).abs() <= 3.0 * sig.sigma,
        format!("simulated g2h(SIG) = {:.4} ± {:.4} (≈ 0.020)", sig.value, sig.sigma),
    );
    o.check(
        z(&sig, &mem).abs() <= 3.0,
        format!("g2h(MEM) = {:.4} ± {:.4}, difference {:.2}σ", mem.value, mem.sigma, z(&sig, &mem)),
    );
    let noisy = MemoryChannelModel { noise: AddedNoise { kind: NoiseKind::Thermal, photons_per_pulse: 0.01 }, ..m.clone() };
    let mem_n = run(Configuration::Mem, &noisy, OUT0, 53);
    o.check(
        z(&sig, &mem_n) > 3.0,
        format!("thermal 0.01 added: g2h(MEM) = {:.4} ± {:.4}, {:.1}σ above SIG", mem_n.value, mem_n.sigma, z(&sig, &mem_n)),
    );
    o
}

fn metric_arithmetic() -> Outcome {
    let mut o = Outcome::new();
    let mu1 = analytic::mu1(6.4e-6, 0.1677).unwrap();
    o.check(format!("{mu1:.1e}") == "3.8e-5", format!("μ₁(6.4e-6, 0.1677) = {mu1:.3e}"));
    let chain: Vec<(String, f64)> = orca::counts::BudgetSection::default().stages;
    let b = heralding_budget(&chain).unwrap();
    let (h, w) = (100.0 * b.eta_herald.unwrap(), 100.0 * b.eta_s_waveguide.unwrap());
    o.check(format!("{h:.1}") == "4.7" && format!("{w:.0}") == "38", format!("heralding {h:.2}% and {w:.1}%"));
    o
}

fn table_shape() -> Outcome {
    let mut o = Outcome::new();
    let cfg = counts_preset("tableA1.toml");
    let memory = cfg.memory.model(cfg.gates.slot_period_ps).unwrap();
    let mut model_mem = Vec::new();
    for (config, seed) in [(Configuration::Mem, 71), (Configuration::Sig, 72)] {
        let st = simulate_configuration(&cfg.source, &memory, &cfg.gates, config, cfg.duration_s, seed).unwrap();
        for e in readout_series(&st, &cfg.gates).unwrap() {
            let Some(r) = e.g11 else { continue };
            let x = exact_click_probabilities(&cfg.source, &memory, &cfg.gates, config, e.selection).unwrap().g11().unwrap();
            let line = format!("{config} {:>4} ns: g11 = {:.2} ± {:.2} (model {x:.2})", e.delay_ns, r.value, r.sigma);
            let d = e.delay_ns;
            if config == Configuration::Mem && e.selection.gate == GateKind::Out {
                model_mem.push(x);
            }
            match config {
                Configuration::Mem if d == 3.5 || d == 16.0 => {
                    o.check(r.value > 2.0 && within(r.value, r.sigma, x), format!("{line}, needs > 2"))
                }
                // classical level within the counting error, as predicted
                Configuration::Mem if d >= 25.0 => o.check(
                    within(r.value, r.sigma, x) && r.value - 2.0 < 3.0 * r.sigma,
                    format!("{line}, not resolvably above 2"),
                ),
                Configuration::Sig if d > 0.0 => o.check(within(r.value, r.sigma, 1.0), format!("{line}, ≈ 1 within 3σ")),
                _ => o.detail.push(format!("[info] {line}")),
            }
        }
    }
    let decays = model_mem.windows(2).all(|w| w[1] < w[0]);
    o.check(decays, format!("model read-out g11 decreases with delay: {model_mem:.2?}"));
    o
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "Doppler oracle equivalence", doppler_oracle),
        (2, "lifetime predictions", lifetimes),
        (3, "calibrated efficiency", calibrated_efficiency),
        (4, "estimator-oracle agreement", estimator_agreement),
        (5, "noise-free statistics preservation", noise_free_statistics),
        (6, "metric arithmetic", metric_arithmetic),
        (7, "read-out series shape", table_shape),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let t0 = Instant::now();
        let r = run();
        let secs = t0.elapsed().as_secs_f64();
        let known = KNOWN_SHORTFALLS.contains(&id);
        let status = match (r.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (documented shortfall)",
            (false, false) => "FAIL",
        };
        println!("criterion {id}: {status}: {name} [{secs:.1} s]");
        for d in &r.detail {
            println!("    {d}");
        }
        if !r.pass && !known {
            unexpected.push(id);
        }
    }
    println!("criterion 8: NOT REPRODUCIBLE: measured-data fits need the laboratory data");
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
