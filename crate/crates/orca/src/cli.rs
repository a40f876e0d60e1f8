//! Argument parsing and output writing for each subcommand.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use photonstats::{arrival_histogram, startstop_histogram, Configuration, Detector, StopChannel, StreamSet};
use serde::Serialize;

use crate::absorption::{self, AbsorptionOverrides};
use crate::counts::{self, CountsOverrides};
use crate::error::{OrcaError, Result};
use crate::lifetime::{self, MemoryOverrides};
use crate::output::{num, write_file, write_json, Envelope, Format, Provenance, Table};
use crate::{sweep, Resolved};

#[derive(Debug, Parser)]
#[command(name = "orca", version, about = "Memory and photon-counting simulations for the ORCA protocol")]
pub struct Cli {
    /// TOML configuration for the subcommand; built-in defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, default_value = "orca-out")]
    pub out: PathBuf,
    /// Representation of the data tables; the summary is always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalized efficiency against storage time, with its 1/e time.
    Lifetime(MemoryArgs),
    /// Efficiency against control pulse energy.
    EfficiencySweep(MemoryArgs),
    /// Event streams and coincidence statistics for all shutter settings.
    Counts(CountsArgs),
    /// Transmission scan and temperature fit.
    Absorption(AbsorptionArgs),
}

#[derive(Debug, Args)]
pub struct MemoryArgs {
    /// cs / cs133 / rb / rb87, or a species TOML file.
    #[arg(long)]
    pub species: Option<String>,
    /// Keep only the stretched chain reached after optical pumping.
    #[arg(long)]
    pub pumped: bool,
    /// Set the intermediate and storage hyperfine splittings (0 only).
    #[arg(long)]
    pub splittings: Option<f64>,
    #[arg(long)]
    pub no_storage_decay: bool,
    /// Storage times in ns, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub taus_ns: Option<Vec<f64>>,
    /// Control energies in nJ, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub energies_nj: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct CountsArgs {
    /// Mean pair number per pulse.
    #[arg(long)]
    pub mu: Option<f64>,
    /// none, poisson:<mean> or thermal:<mean>.
    #[arg(long)]
    pub memory_noise: Option<String>,
    /// Acquisition time per shutter setting, seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Skip writing the event-stream files.
    #[arg(long)]
    pub no_streams: bool,
}

#[derive(Debug, Args)]
pub struct AbsorptionArgs {
    #[arg(long)]
    pub species: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Relative Gaussian noise on the transmission samples.
    #[arg(long)]
    pub noise: Option<f64>,
}

/// Files written and a few summary lines for the terminal.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg_path = cli.config.as_deref();
    match &cli.command {
        Command::Lifetime(a) => run_lifetime(cli, lifetime::resolve(cfg_path, &memory_overrides(a))?),
        Command::EfficiencySweep(a) => run_sweep(cli, lifetime::resolve(cfg_path, &memory_overrides(a))?),
        Command::Counts(a) => {
            let o = CountsOverrides { mu: a.mu, memory_noise: a.memory_noise.clone(), duration_s: a.duration };
            run_counts(cli, counts::resolve(cfg_path, &o)?, !a.no_streams)
        }
        Command::Absorption(a) => {
            let o = AbsorptionOverrides { species: a.species.clone(), temperature_k: a.temperature, noise: a.noise };
            run_absorption(cli, absorption::resolve(cfg_path, &o)?)
        }
    }
}

fn memory_overrides(a: &MemoryArgs) -> MemoryOverrides {
    MemoryOverrides {
        species: a.species.clone(),
        pumped: a.pumped,
        splittings: a.splittings,
        no_storage_decay: a.no_storage_decay,
        taus_ns: a.taus_ns.clone(),
        energies_nj: a.energies_nj.clone(),
    }
}

struct Writer<'a> {
    dir: &'a Path,
    format: Format,
    prov: Provenance,
    out: Outcome,
}

impl<'a> Writer<'a> {
    fn new<C: Serialize>(cli: &'a Cli, command: &str, config: &C) -> Result<Self> {
        let prov = Provenance::of(&Resolved { command, seed: cli.seed, config })?;
        Ok(Self { dir: &cli.out, format: cli.format, prov, out: Outcome::default() })
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        if self.format == Format::Csv {
            self.out.files.push(write_file(self.dir, &format!("{name}.csv"), &t.render(&self.prov))?);
        }
        Ok(())
    }

    /// Summary JSON; tables are embedded when the format is JSON.
    fn report<C: Serialize, R: Serialize>(&mut self, command: &str, config: &C, report: &R) -> Result<()> {
        let env = Envelope { provenance: &self.prov, command, config, report };
        let mut v = serde_json::to_value(&env).map_err(|e| OrcaError::Numerical(e.to_string()))?;
        if self.format == Format::Csv {
            if let Some(m) = v.as_object_mut() {
                for k in ["rows", "points", "spectrum", "series"] {
                    m.remove(k);
                }
            }
        }
        self.out.files.push(write_json(self.dir, &format!("{command}.json"), &v)?);
        Ok(())
    }
}

fn run_lifetime(cli: &Cli, cfg: mbsolver::RunConfig) -> Result<Outcome> {
    let r = lifetime::compute(&cfg)?;
    let mut w = Writer::new(cli, "lifetime", &cfg)?;
    let mut t = Table::new(&["tau_s", "eta_total", "eta_in", "eta_N", "doppler", "beat"]);
    for row in &r.rows {
        let p = row.point;
        t.push(vec![num(p.tau), num(p.eta_total), num(p.eta_in), num(p.eta_n), num(row.doppler), num(row.beat)]);
    }
    w.table("lifetime", &t)?;
    w.report("lifetime", &cfg, &r)?;
    w.out.summary.push(format!("fitted 1/e lifetime {:.3} ns", r.fitted_lifetime_s * 1e9));
    if r.fit.oscillatory {
        w.out.summary.push(format!("curve re-crosses 1/e at {:?} s", r.fit.recrossings));
    }
    Ok(w.out)
}

fn run_sweep(cli: &Cli, cfg: mbsolver::RunConfig) -> Result<Outcome> {
    let r = sweep::compute(&cfg)?;
    let mut w = Writer::new(cli, "efficiency-sweep", &cfg)?;
    let mut t = Table::new(&["energy_J", "eta_total", "eta_in"]);
    for p in &r.points {
        t.push(vec![num(p.energy), num(p.eta_total), num(p.eta_in)]);
    }
    w.table("efficiency-sweep", &t)?;
    w.report("efficiency-sweep", &cfg, &r)?;
    w.out.summary.push(format!(
        "maximum eta_total {:.4} at {:.3} nJ",
        r.maximum.eta_total,
        r.maximum.energy * 1e9
    ));
    if let Some(x) = r.low_energy_exponent {
        w.out.summary.push(format!("low-energy exponent {x:.3}"));
    }
    Ok(w.out)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn run_counts(cli: &Cli, cfg: counts::CountsConfig, keep_streams: bool) -> Result<Outcome> {
    let streams = counts::simulate(&cfg, cli.seed)?;
    let r = counts::analyse(&cfg, &streams)?;
    let mut w = Writer::new(cli, "counts", &cfg)?;
    if keep_streams {
        for c in Configuration::ALL {
            let mut buf = format!("#{}", w.prov.comment()).into_bytes();
            streams.get(c).write_to(&mut buf)?;
            let text = String::from_utf8(buf).expect("stream text is ASCII");
            w.out.files.push(write_file(w.dir, &format!("stream_{c}.txt"), &text)?);
        }
    }
    for (name, t) in histogram_tables(&cfg, &streams)? {
        w.table(&name, &t)?;
    }

    let mut g = Table::new(&["config", "delay_ns", "gate", "g2h", "sigma", "oracle", "r_trip", "r_i", "r_s1i", "r_s2i", "note"]);
    for e in &r.gates {
        let (v, s, c) = match &e.g2h {
            Some(x) => (num(x.value), num(x.sigma), Some(x.counts)),
            None => (String::new(), String::new(), None),
        };
        let c = c.unwrap_or_default();
        g.push(vec![
            e.config.to_string(),
            num(e.delay_ns),
            gate_label(e.selection.gate).into(),
            v,
            s,
            opt(e.oracle_g2h),
            c.r_trip.to_string(),
            c.r_i.to_string(),
            c.r_s1i.to_string(),
            c.r_s2i.to_string(),
            csv_note(&e.notes.join("; ")),
        ]);
    }
    w.table("g2h", &g)?;

    let mut a = Table::new(&["config", "delay_ns", "gate", "g11", "sigma", "nonclassical", "r_si", "r_s", "r_i", "r_t", "note"]);
    for row in &r.series {
        let e = &row.entry;
        let (v, s, nc, c) = match &e.g11 {
            Some(x) => (num(x.value), num(x.sigma), x.nonclassical.to_string(), x.counts),
            None => (String::new(), String::new(), String::new(), Default::default()),
        };
        a.push(vec![
            row.config.to_string(),
            num(e.delay_ns),
            gate_label(e.selection.gate).into(),
            v,
            s,
            nc,
            c.r_si.to_string(),
            c.r_s.to_string(),
            c.r_i.to_string(),
            c.r_t.to_string(),
            csv_note(e.note.as_deref().unwrap_or("")),
        ]);
    }
    w.table("g11_series", &a)?;
    w.report("counts", &cfg, &r)?;

    for e in &r.gates {
        let line = match &e.g2h {
            Some(x) => format!("{} {} gate: g2h = {:.4} ± {:.4}", e.config, gate_label(e.selection.gate), x.value, x.sigma),
            None => format!("{} {} gate: g2h undefined ({})", e.config, gate_label(e.selection.gate), e.notes.join("; ")),
        };
        w.out.summary.push(line);
    }
    w.out.summary.push(format!("mu1 = {:e}", r.mu1));
    Ok(w.out)
}

fn gate_label(g: photonstats::GateKind) -> &'static str {
    match g {
        photonstats::GateKind::In => "in",
        photonstats::GateKind::Out => "out",
    }
}

fn csv_note(s: &str) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!("\"{}\"", s.replace('"', "'"))
    }
}

/// Arrival-time histograms per detector and idler-started coincidence
/// histograms for every shutter setting.
fn histogram_tables(cfg: &counts::CountsConfig, streams: &StreamSet) -> Result<Vec<(String, Table)>> {
    let g = &cfg.gates;
    let mut out = Vec::new();
    for c in Configuration::ALL {
        let st = streams.get(c);
        let hs = Detector::ALL
            .iter()
            .map(|&d| arrival_histogram(st, d, g.arrival_bin_ps as u64))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut t = Table::new(&["bin_start_ps", "i", "s1", "s2"]);
        for k in 0..hs[0].counts.len() {
            t.push(vec![hs[0].bin_start(k).to_string(), hs[0].counts[k].to_string(), hs[1].counts[k].to_string(), hs[2].counts[k].to_string()]);
        }
        out.push((format!("arrivals_{c}"), t));

        let bin = g.coincidence_bin_ps as u64;
        let span = (3.0 * g.slot_period_ps) as i64;
        let lo = -(g.slot_period_ps as i64 / 2 / bin as i64) * bin as i64;
        let hi = lo + span;
        let window = g.coincidence_window_ps as u64;
        let hs = [StopChannel::S1, StopChannel::S2, StopChannel::S1S2]
            .iter()
            .map(|&s| startstop_histogram(st, s, bin, (lo, hi), window))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut t = Table::new(&["delay_ps", "s1", "s2", "s1s2"]);
        for k in 0..hs[0].counts.len() {
            t.push(vec![hs[0].bin_start(k).to_string(), hs[0].counts[k].to_string(), hs[1].counts[k].to_string(), hs[2].counts[k].to_string()]);
        }
        out.push((format!("coincidences_{c}"), t));
    }
    Ok(out)
}

fn run_absorption(cli: &Cli, cfg: absorption::AbsorptionConfig) -> Result<Outcome> {
    let r = absorption::compute(&cfg, cli.seed)?;
    let mut w = Writer::new(cli, "absorption", &cfg)?;
    let mut t = Table::new(&["detuning_hz", "transmission"]);
    for &(d, tr) in &r.spectrum {
        t.push(vec![num(d / (2.0 * std::f64::consts::PI)), num(tr)]);
    }
    w.table("absorption", &t)?;
    w.report("absorption", &cfg, &r)?;
    w.out.summary.push(format!("fitted temperature {:.3} K", r.fitted_temperature_k));
    w.out.summary.push(format!("transmission {:.2} GHz below the signal line {:.4}", cfg.signal_detuning_ghz, r.signal_transmission));
    Ok(w.out)
}
