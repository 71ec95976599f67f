use serde_json::{json, Value};
use superrad_core::basis::LevelScheme;
use superrad_core::entanglement::{conditional_entropy, embed_basis, negativity};
use superrad_core::photonic::{fla_final_mixture, mode_independence_check, v_final_state, Mixture};
use superrad_core::C64;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Writer;

/// Final photonic state for the configured model.
pub fn mixture(
    scheme: &LevelScheme,
    atoms: usize,
    alpha: C64,
    beta: C64,
) -> Result<Mixture, CliError> {
    Ok(match scheme {
        LevelScheme::VNondegenerate { .. } => v_final_state(atoms, alpha, beta)?,
        LevelScheme::FourLevel { .. } => fla_final_mixture(scheme, atoms, alpha, beta)?,
        LevelScheme::VDegenerate { .. } => {
            return Err(CliError::Config(
                "no photonic state for the degenerate V model".into(),
            ))
        }
    })
}

pub fn run(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Value, CliError> {
    let n = cfg.atoms()?;
    let (alpha, beta) = cfg.amplitudes()?;
    let mix = mixture(&cfg.model, n, alpha, beta)?;
    w.json("photonic.json", &mix.to_record())?;

    let class = mode_independence_check(&mix)?;
    let (rho, f) = embed_basis(mix.basis(), &mix.density_matrix(), mix.modes().to_vec())?;
    let mut per_mode = serde_json::Map::new();
    for (m, name) in mix.modes().iter().enumerate() {
        per_mode.insert(
            name.clone(),
            json!({
                "negativity": negativity(&rho, &f, &[m])?,
                "conditional_entropy": conditional_entropy(&rho, &f, &[m])?,
            }),
        );
    }
    Ok(json!({
        "atoms": n,
        "total_probability": mix.total_probability(),
        "mode_independence": class,
        "modes": per_mode,
    }))
}
