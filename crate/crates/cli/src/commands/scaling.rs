use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use superrad_core::dynamics::{
    detect_peak, integrate_observed, symmetric_init, Generator, IntegratorConfig, IntensityModel,
    InvariantReport,
};
use superrad_core::fitting::{fit_power_law, ScalingFit};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Writer;

#[derive(Serialize)]
struct ChannelFit {
    channel: String,
    #[serde(flatten)]
    fit: ScalingFit,
}

struct Run {
    atoms: usize,
    /// `(t_peak, I_peak)` per channel.
    peaks: Vec<(f64, f64)>,
    report: InvariantReport,
}

fn one(cfg: &ExperimentConfig, icfg: &IntegratorConfig, n: usize) -> Result<Run, CliError> {
    let (alpha, beta) = cfg.amplitudes()?;
    let gen = Generator::new(&cfg.model, n)?;
    let rho0 = symmetric_init(&cfg.model, n, alpha, beta)?;
    let model = IntensityModel::new(&gen);
    let mut times = Vec::new();
    let mut series = Vec::new();
    let report = integrate_observed(&gen, &rho0, icfg, |t, rho| {
        times.push(t);
        series.push(model.channel_intensities(rho));
    })?;
    let channels = gen.channels().len();
    let mut peaks = Vec::with_capacity(channels);
    for c in 0..channels {
        let col: Vec<f64> = series.iter().map(|r| r[c]).collect();
        let p = detect_peak(&times, &col).map_err(|e| CliError::Config(format!("N={n}: {e}")))?;
        peaks.push((p.time, p.value));
    }
    Ok(Run {
        atoms: n,
        peaks,
        report,
    })
}

pub fn run(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Value, CliError> {
    let sc = cfg.scaling.as_ref().expect("validated");
    let mut icfg = IntegratorConfig::new(sc.t_end, sc.sample_interval);
    icfg.step = sc.step;
    let mut atoms = sc.atoms.clone();
    atoms.sort_unstable();
    // per-N runs are independent; collect keeps the input order
    let runs: Vec<Run> = atoms
        .par_iter()
        .map(|&n| one(cfg, &icfg, n))
        .collect::<Result<_, _>>()?;

    let names: Vec<String> = cfg
        .model
        .channels()
        .iter()
        .map(|c| format!("I_{}", c.name))
        .collect();
    let mut header = vec!["N".to_string()];
    for name in &names {
        header.push(format!("t_peak_{name}"));
        header.push(format!("peak_{name}"));
    }
    let rows = runs.iter().map(|r| {
        let mut row = vec![r.atoms as f64];
        for &(t, v) in &r.peaks {
            row.push(t);
            row.push(v);
        }
        row
    });
    w.csv("peaks.csv", &header, rows)?;

    let mut fits = Vec::new();
    for (c, name) in names.iter().enumerate() {
        let pts: Vec<(f64, f64)> = runs
            .iter()
            .map(|r| (r.atoms as f64, r.peaks[c].1))
            .collect();
        fits.push(ChannelFit {
            channel: name.clone(),
            fit: fit_power_law(&pts)?,
        });
    }
    w.json("scaling.json", &fits)?;

    let reports: Vec<Value> = runs
        .iter()
        .map(|r| json!({ "atoms": r.atoms, "invariants": r.report }))
        .collect();
    Ok(json!({
        "n_range": [atoms[0], atoms[atoms.len() - 1]],
        "model": "beta * N^alpha + c",
        "runs": reports,
    }))
}
