use serde_json::{json, Value};
use superrad_core::dynamics::{integrate_observed, symmetric_init, Generator, IntegratorConfig};
use superrad_core::entanglement::{conditional_entropy, embed_basis, negativity};
use superrad_core::photonic::{fla_final_mixture, v_final_state};
use superrad_core::C64;

use super::simulate::ground_block;
use crate::config::{EntanglementConfig, ExperimentConfig};
use crate::error::CliError;
use crate::output::Writer;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn v_negativity(atoms: usize, alpha_sq: f64) -> Result<f64, CliError> {
    let mix = v_final_state(
        atoms,
        re(alpha_sq.sqrt()),
        re((1.0 - alpha_sq).max(0.0).sqrt()),
    )?;
    let (rho, f) = embed_basis(mix.basis(), &mix.density_matrix(), mix.modes().to_vec())?;
    Ok(negativity(&rho, &f, &[0])?)
}

pub fn run(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Value, CliError> {
    match cfg.entanglement.as_ref().expect("validated") {
        EntanglementConfig::Negativity { atoms, points } => {
            let xs: Vec<f64> = (0..*points)
                .map(|k| k as f64 / (*points - 1) as f64)
                .collect();
            let mut header = vec!["alpha_sq".to_string()];
            header.extend(atoms.iter().map(|n| format!("N{n}")));
            let mut rows = Vec::new();
            for &x in &xs {
                let mut r = vec![x];
                for &n in atoms {
                    r.push(v_negativity(n, x)?);
                }
                rows.push(r);
            }
            w.csv("negativity_vs_alpha.csv", &header, rows)?;
            let mut by_n = Vec::new();
            for &n in atoms {
                by_n.push(vec![n as f64, v_negativity(n, 0.5)?]);
            }
            w.csv(
                "negativity_vs_atoms.csv",
                &["N".to_string(), "negativity".to_string()],
                by_n.clone(),
            )?;
            Ok(json!({ "negativity_at_half": by_n }))
        }
        EntanglementConfig::ConditionalEntropy { atoms, points } => {
            for &n in atoms {
                let mut header = vec!["abs_alpha".to_string()];
                let mut rows = Vec::new();
                for k in 0..*points {
                    let a = k as f64 / (*points - 1) as f64;
                    let mix =
                        fla_final_mixture(&cfg.model, n, re(a), re((1.0 - a * a).max(0.0).sqrt()))?;
                    if header.len() == 1 {
                        header.extend(mix.modes().iter().map(|m| format!("S_cond_{m}")));
                    }
                    let (rho, f) =
                        embed_basis(mix.basis(), &mix.density_matrix(), mix.modes().to_vec())?;
                    let mut r = vec![a];
                    for m in 0..mix.modes().len() {
                        r.push(conditional_entropy(&rho, &f, &[m])?);
                    }
                    rows.push(r);
                }
                w.csv(&format!("conditional_entropy_N{n}.csv"), &header, rows)?;
            }
            Ok(json!({ "convention": "S(rho) - S(rho with the named mode traced out)" }))
        }
        EntanglementConfig::Peres {
            gamma_ratios,
            cross_ratios,
            t_end,
            sample_interval,
            step,
        } => {
            let n = cfg.atoms()?;
            let (alpha, beta) = cfg.amplitudes()?;
            let schemes = cfg.peres_schemes()?;
            let mut icfg = IntegratorConfig::new(*t_end, *sample_interval);
            icfg.step = *step;
            let mut values = Vec::with_capacity(schemes.len());
            let mut reports = Vec::new();
            for ((r, x), scheme) in &schemes {
                let gen = Generator::new(scheme, n)?;
                let rho0 = symmetric_init(scheme, n, alpha, beta)?;
                let mut last = None;
                let rep =
                    integrate_observed(&gen, &rho0, &icfg, |_, rho| last = Some(rho.clone()))?;
                let neg = ground_block(&last.expect("sampled"), scheme)?.negativity;
                values.push(neg.expect("four-level ground block is bipartite"));
                reports.push(json!({ "gamma_ratio": r, "cross_ratio": x, "invariants": rep }));
            }
            // schemes are ordered gamma ratio major, cross ratio minor
            let mut header = vec!["cross_ratio".to_string()];
            header.extend(gamma_ratios.iter().map(|r| format!("neg_g11_over_gpm_{r}")));
            let rows = cross_ratios.iter().enumerate().map(|(ix, &x)| {
                let mut row = vec![x];
                row.extend((0..gamma_ratios.len()).map(|ir| values[ir * cross_ratios.len() + ix]));
                row
            });
            w.csv("peres.csv", &header, rows)?;
            Ok(json!({ "atoms": n, "runs": reports }))
        }
    }
}
