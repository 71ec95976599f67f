use serde::Serialize;
use serde_json::{json, Value};
use superrad_core::basis::{DensityTensor, LevelScheme};
use superrad_core::dynamics::{
    detect_peak, excited_magnitude, integrate_observed, settled_time, spectrum, symmetric_init,
    Generator, IntensityModel, SpectralPeak,
};
use superrad_core::entanglement::{atomic_ground_block, embed_fock, negativity};
use superrad_core::C64;

use super::MatrixRecord;
use crate::config::{ground_levels, ExperimentConfig};
use crate::error::CliError;
use crate::output::{occ_label, Writer};

#[derive(Serialize)]
struct Snapshot {
    t: f64,
    levels: Vec<String>,
    state: MatrixRecord,
}

#[derive(Serialize)]
struct GroundBlock {
    t: f64,
    levels: Vec<String>,
    /// Normalized block; its trace before normalization is `weight`.
    weight: f64,
    state: MatrixRecord,
    negativity: Option<f64>,
}

#[derive(Serialize)]
struct CoherenceSpectrum {
    bra: String,
    ket: String,
    bin_width: f64,
    peaks: Vec<SpectralPeak>,
}

pub struct Ground {
    /// Trace of the block before normalization.
    pub weight: f64,
    pub state: MatrixRecord,
    /// Peres negativity between the ground levels when there are two.
    pub negativity: Option<f64>,
}

/// Normalized ground block of `rho`.
pub fn ground_block(rho: &DensityTensor, scheme: &LevelScheme) -> Result<Ground, CliError> {
    let (occ, block) = atomic_ground_block(rho, scheme);
    let weight = block.trace().re;
    if !(weight > 0.0) {
        return Err(CliError::Config(
            "no ground-state population at the final time".into(),
        ));
    }
    let block = block / C64::new(weight, 0.0);
    let labels = ground_levels(scheme);
    let neg = if labels.len() == 2 {
        let (m, f) = embed_fock(&occ, &block, rho.basis.atoms() + 1, labels)?;
        Some(negativity(&m, &f, &[0])?)
    } else {
        None
    };
    Ok(Ground {
        weight,
        state: MatrixRecord::new(occ, &block),
        negativity: neg,
    })
}

pub fn run(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Value, CliError> {
    let sim = cfg.simulate.as_ref().expect("validated");
    let n = cfg.atoms()?;
    let (alpha, beta) = cfg.amplitudes()?;
    let gen = Generator::new(&cfg.model, n)?;
    let rho0 = symmetric_init(&cfg.model, n, alpha, beta)?;
    let model = IntensityModel::new(&gen);
    let names = model.column_names();
    let channels = model.channel_names();
    let basis = gen.basis().clone();
    let d = gen.dim();
    let levels: Vec<String> = cfg
        .model
        .level_names()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let label = |i: usize| occ_label(basis.state(i).iter().map(|&x| x as usize));

    let ground: Vec<usize> = (0..d).filter(|&i| gen.excitations()[i] == 0).collect();
    let pairs: Vec<(usize, usize)> = if sim.spectrum {
        let mut p = Vec::new();
        for (a, &i) in ground.iter().enumerate() {
            for &j in &ground[a + 1..] {
                p.push((i, j));
            }
        }
        p
    } else {
        Vec::new()
    };

    let mut times = Vec::new();
    let mut rows = Vec::new();
    let mut worst = Vec::new();
    let mut coherences: Vec<Vec<C64>> = vec![Vec::new(); pairs.len()];
    let mut density_rows = Vec::new();
    let mut pending: Vec<f64> = sim.snapshots.clone();
    pending.sort_by(f64::total_cmp);
    let mut snapshots = Vec::new();
    let mut last: Option<(f64, DensityTensor)> = None;
    let half = 0.5 * sim.sample_interval;

    let report = integrate_observed(&gen, &rho0, &sim.integrator(), |t, rho| {
        times.push(t);
        let mut row = vec![t];
        row.extend(model.row(rho));
        rows.push(row);
        worst.push(excited_magnitude(&gen, rho));
        for (k, &(i, j)) in pairs.iter().enumerate() {
            coherences[k].push(rho.data[(i, j)]);
        }
        if sim.density {
            let mut r = vec![t];
            for i in 0..d {
                for j in i..d {
                    let z = rho.data[(i, j)];
                    r.push(z.re);
                    r.push(z.im);
                }
            }
            density_rows.push(r);
        }
        while pending.first().is_some_and(|&ts| t >= ts - half) {
            pending.remove(0);
            snapshots.push(Snapshot {
                t,
                levels: levels.clone(),
                state: MatrixRecord::from_tensor(rho),
            });
        }
        last = Some((t, rho.clone()));
    })?;

    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    w.csv("intensity.csv", &header, rows.iter().cloned())?;

    if sim.density {
        let mut header = vec!["t".to_string()];
        for i in 0..d {
            for j in i..d {
                header.push(format!("re_{}_{}", label(i), label(j)));
                header.push(format!("im_{}_{}", label(i), label(j)));
            }
        }
        w.csv("density.csv", &header, density_rows)?;
    }
    if !snapshots.is_empty() {
        w.json("snapshots.json", &snapshots)?;
    }

    let mut peaks = serde_json::Map::new();
    for (c, name) in channels.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[1 + c]).collect();
        let v = match detect_peak(&times, &col) {
            Ok(p) => serde_json::to_value(p).expect("plain struct"),
            Err(e) => json!({ "error": e.to_string() }),
        };
        peaks.insert(name.clone(), v);
    }
    let t_ss = settled_time(&times, &worst, sim.steady_state_threshold);

    let (t_last, rho_last) = last.expect("at least one sample");
    let mut ground_json = Value::Null;
    if sim.ground_block {
        let Ground {
            weight,
            state,
            negativity: neg,
        } = ground_block(&rho_last, &cfg.model)?;
        ground_json = json!({ "weight": weight, "negativity": neg });
        w.json(
            "ground_block.json",
            &GroundBlock {
                t: t_last,
                levels: ground_levels(&cfg.model),
                weight,
                state,
                negativity: neg,
            },
        )?;
    }

    if sim.spectrum {
        let Some(t0) = t_ss else {
            return Err(CliError::Config(
                "spectrum requested but the state never settles before t_end; increase t_end"
                    .into(),
            ));
        };
        let start = times
            .iter()
            .position(|&t| t >= t0)
            .expect("t_ss is a sample time");
        let mut out = Vec::new();
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let s = spectrum(&times[start..], &coherences[k][start..])?;
            out.push(CoherenceSpectrum {
                bra: label(i),
                ket: label(j),
                bin_width: s.bin_width,
                peaks: s.peaks,
            });
        }
        w.json("spectra.json", &out)?;
    }

    Ok(json!({
        "atoms": n,
        "solver": {
            "method": "rk4",
            "step": report.step,
            "sample_interval": sim.sample_interval,
            "t_end": sim.t_end,
            "rotating_frame": sim.rotating_frame,
        },
        "invariants": report,
        "peaks": peaks,
        "steady_state_time": t_ss,
        "steady_state_threshold": sim.steady_state_threshold,
        "ground_block": ground_json,
    }))
}
