use serde::Serialize;
use serde_json::{json, Value};
use superrad_core::dynamics::{integrate_observed, symmetric_init, Generator};
use superrad_core::entanglement::atomic_ground_block;
use superrad_core::wigner::{
    separability_probe, wigner_slice, Coordinate, FockDensity, ProbeReport,
};
use superrad_core::C64;

use super::photonic::mixture;
use crate::config::{coordinate, ExperimentConfig, WignerSource};
use crate::error::CliError;
use crate::output::Writer;

#[derive(Serialize)]
struct Probe {
    first: String,
    second: String,
    #[serde(flatten)]
    report: ProbeReport,
}

/// Weighted pure components for the probe plus the total state.
type Source = (Vec<(f64, FockDensity)>, FockDensity, Value);

fn source(cfg: &ExperimentConfig) -> Result<Source, CliError> {
    let n = cfg.atoms()?;
    let (alpha, beta) = cfg.amplitudes()?;
    match cfg.wigner.as_ref().expect("validated").source {
        WignerSource::Photonic => {
            let mix = mixture(&cfg.model, n, alpha, beta)?;
            let mut parts = Vec::new();
            for comp in &mix.components {
                let v = &comp.state.amplitudes;
                let d = FockDensity::from_basis(
                    &comp.state.basis,
                    v * v.adjoint(),
                    comp.state.modes.clone(),
                )?;
                parts.push((comp.probability, d));
            }
            let total = FockDensity::from_mixture(&mix)?;
            Ok((parts, total, Value::Null))
        }
        WignerSource::AtomicGround => {
            let sim = cfg.simulate.as_ref().expect("validated");
            let gen = Generator::new(&cfg.model, n)?;
            let rho0 = symmetric_init(&cfg.model, n, alpha, beta)?;
            let mut last = None;
            let rep = integrate_observed(&gen, &rho0, &sim.integrator(), |t, rho| {
                last = Some((t, rho.clone()))
            })?;
            let (t, rho) = last.expect("sampled");
            let (occ, block) = atomic_ground_block(&rho, &cfg.model);
            let weight = block.trace().re;
            if !(weight > 0.0) {
                return Err(CliError::Config(
                    "no ground-state population at t_end".into(),
                ));
            }
            let d = FockDensity::new(cfg.wigner_labels()?, occ, block / C64::new(weight, 0.0))?;
            let info = json!({ "t": t, "ground_weight": weight, "invariants": rep });
            Ok((vec![(1.0, d.clone())], d, info))
        }
    }
}

pub fn run(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Value, CliError> {
    let wc = cfg.wigner.as_ref().expect("validated");
    let labels = cfg.wigner_labels()?;
    let pairs: Vec<(Coordinate, Coordinate)> = match &wc.slices {
        Some(list) => list
            .iter()
            .map(|[a, b]| Ok((coordinate(a, &labels)?, coordinate(b, &labels)?)))
            .collect::<Result<_, CliError>>()?,
        None => {
            let all: Vec<Coordinate> = (0..labels.len())
                .flat_map(|m| [Coordinate::x(m), Coordinate::p(m)])
                .collect();
            let mut p = Vec::new();
            for i in 0..all.len() {
                for j in i + 1..all.len() {
                    p.push((all[i], all[j]));
                }
            }
            p
        }
    };

    let (parts, total, info) = source(cfg)?;
    let mut probes = Vec::new();
    for &(a, b) in &pairs {
        let (na, nb) = (a.name(&labels), b.name(&labels));
        let s = wigner_slice(&total, a, b, wc.grid, None)?;
        let mut rows = Vec::with_capacity(s.xs.len() * s.ys.len());
        for (i, &x) in s.xs.iter().enumerate() {
            for (j, &y) in s.ys.iter().enumerate() {
                rows.push(vec![x, y, s.values[i][j]]);
            }
        }
        w.csv(
            &format!("wigner_{na}_{nb}.csv"),
            &[na.clone(), nb.clone(), "W".into()],
            rows,
        )?;
        if wc.probe {
            probes.push(Probe {
                first: na,
                second: nb,
                report: separability_probe(&parts, a, b, wc.grid, wc.probe_tol)?,
            });
        }
    }
    if wc.probe {
        w.json("probe.json", &probes)?;
    }
    Ok(json!({ "modes": labels, "slices": pairs.len(), "source": info }))
}
