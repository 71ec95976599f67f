use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use superrad_core::basis::LevelScheme;
use superrad_core::dynamics::IntegratorConfig;
use superrad_core::wigner::{Coordinate, Grid};
use superrad_core::C64;

use crate::error::CliError;
use crate::Command;

/// Presets shipped with the binary, one per figure.
pub const PRESETS: &[(&str, &str)] = &[
    ("two_level", include_str!("../../../presets/two_level.toml")),
    ("fig1c", include_str!("../../../presets/fig1c.toml")),
    ("fig1d", include_str!("../../../presets/fig1d.toml")),
    ("fig2a", include_str!("../../../presets/fig2a.toml")),
    ("fig2c", include_str!("../../../presets/fig2c.toml")),
    ("fig2d", include_str!("../../../presets/fig2d.toml")),
    ("fig2e", include_str!("../../../presets/fig2e.toml")),
    ("fig4", include_str!("../../../presets/fig4.toml")),
    ("fig5a", include_str!("../../../presets/fig5a.toml")),
    ("fig5b", include_str!("../../../presets/fig5b.toml")),
    ("fig6a", include_str!("../../../presets/fig6a.toml")),
    ("fig6b", include_str!("../../../presets/fig6b.toml")),
    ("fig7", include_str!("../../../presets/fig7.toml")),
    ("fig8a", include_str!("../../../presets/fig8a.toml")),
    ("fig8c", include_str!("../../../presets/fig8c.toml")),
    ("fig9", include_str!("../../../presets/fig9.toml")),
    ("fig10a", include_str!("../../../presets/fig10a.toml")),
    ("fig10b", include_str!("../../../presets/fig10b.toml")),
    ("fig11a", include_str!("../../../presets/fig11a.toml")),
    ("fig11b", include_str!("../../../presets/fig11b.toml")),
    ("fig11c", include_str!("../../../presets/fig11c.toml")),
    ("fig11d", include_str!("../../../presets/fig11d.toml")),
    ("fig11e", include_str!("../../../presets/fig11e.toml")),
    ("fig11f", include_str!("../../../presets/fig11f.toml")),
    ("fig12", include_str!("../../../presets/fig12.toml")),
    ("fig13a", include_str!("../../../presets/fig13a.toml")),
    ("fig13b", include_str!("../../../presets/fig13b.toml")),
    ("fig13c", include_str!("../../../presets/fig13c.toml")),
];

pub fn preset(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!(
                "unknown preset '{name}' (available: {})",
                names.join(", ")
            ))
        })
}

/// `((G11/G+-, G12/G11), scheme)`.
pub type RateVariant = ((f64, f64), LevelScheme);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: LevelScheme,
    #[serde(default)]
    pub atoms: Option<usize>,
    #[serde(default)]
    pub excitation: Option<Excitation>,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub entanglement: Option<EntanglementConfig>,
    #[serde(default)]
    pub wigner: Option<WignerConfig>,
    #[serde(default)]
    pub scaling: Option<ScalingConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitationPreset {
    Symmetric,
    Antisymmetric,
    DeterministicE1,
    DeterministicE2,
}

/// Single-atom state `alpha|e1> + beta|e2>`, by name or as `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Excitation {
    #[serde(default)]
    pub preset: Option<ExcitationPreset>,
    #[serde(default)]
    pub alpha: Option<[f64; 2]>,
    #[serde(default)]
    pub beta: Option<[f64; 2]>,
}

impl Excitation {
    pub fn amplitudes(&self) -> Result<(C64, C64), CliError> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match (self.preset, self.alpha, self.beta) {
            (Some(p), None, None) => match p {
                ExcitationPreset::Symmetric => (C64::new(h, 0.0), C64::new(h, 0.0)),
                ExcitationPreset::Antisymmetric => (C64::new(h, 0.0), C64::new(-h, 0.0)),
                ExcitationPreset::DeterministicE1 => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
                ExcitationPreset::DeterministicE2 => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            },
            (None, Some(a), Some(b)) => (C64::new(a[0], a[1]), C64::new(b[0], b[1])),
            _ => {
                return Err(CliError::Config(
                    "[excitation] needs either `preset` or both `alpha` and `beta`".into(),
                ))
            }
        };
        let norm = a.norm_sqr() + b.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(CliError::Config(format!(
                "[excitation] |alpha|^2 + |beta|^2 must be 1 (got {norm})"
            )));
        }
        Ok((a, b))
    }
}

fn default_threshold() -> f64 {
    1e-4
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub t_end: f64,
    pub sample_interval: f64,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub rotating_frame: bool,
    #[serde(default = "yes")]
    pub check_positivity: bool,
    /// Excited-element modulus below which the state counts as settled.
    #[serde(default = "default_threshold")]
    pub steady_state_threshold: f64,
    /// Write every density-matrix entry as a time series.
    #[serde(default)]
    pub density: bool,
    /// Times at which to dump the full density matrix.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Dump the ground-level block of the final state.
    #[serde(default)]
    pub ground_block: bool,
    /// Spectra of ground-sector coherences after the steady-state time.
    #[serde(default)]
    pub spectrum: bool,
}

impl SimulateConfig {
    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            t_end: self.t_end,
            sample_interval: self.sample_interval,
            step: self.step,
            rotating_frame: self.rotating_frame,
            check_positivity: self.check_positivity,
        }
    }
}

fn default_points() -> usize {
    41
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "analysis", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntanglementConfig {
    /// Two-mode negativity of the V photonic state against `|alpha|^2` and `N`.
    Negativity {
        atoms: Vec<usize>,
        #[serde(default = "default_points")]
        points: usize,
    },
    /// Per-mode conditional entropies of the FLA photonic mixture against `|alpha|`.
    ConditionalEntropy {
        atoms: Vec<usize>,
        #[serde(default = "default_points")]
        points: usize,
    },
    /// Ground-state negativity of the final FLA state over rate ratios.
    Peres {
        /// `G12 / G11` values.
        cross_ratios: Vec<f64>,
        /// `G11 / G+-` values, one output column each.
        gamma_ratios: Vec<f64>,
        t_end: f64,
        sample_interval: f64,
        #[serde(default)]
        step: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerSource {
    Photonic,
    AtomicGround,
}

fn default_probe_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    pub source: WignerSource,
    /// Coordinate pairs such as `["X_w1", "P_w2"]`; all pairs when absent.
    #[serde(default)]
    pub slices: Option<Vec<[String; 2]>>,
    #[serde(default)]
    pub grid: Grid,
    /// Also compare each slice with the product of single-mode marginals.
    #[serde(default)]
    pub probe: bool,
    #[serde(default = "default_probe_tol")]
    pub probe_tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub atoms: Vec<usize>,
    pub t_end: f64,
    pub sample_interval: f64,
    #[serde(default)]
    pub step: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_times(
    section: &str,
    t_end: f64,
    sample_interval: f64,
    step: Option<f64>,
) -> Result<(), CliError> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(bad(format!(
            "[{section}] t_end must be positive (got {t_end})"
        )));
    }
    if !(sample_interval.is_finite() && sample_interval > 0.0 && sample_interval <= t_end) {
        return Err(bad(format!(
            "[{section}] sample_interval must be in (0, t_end] (got {sample_interval})"
        )));
    }
    if let Some(h) = step {
        if !(h.is_finite() && h > 0.0) {
            return Err(bad(format!("[{section}] step must be positive (got {h})")));
        }
    }
    Ok(())
}

/// Names of the photonic modes the model radiates into.
pub fn photonic_modes(scheme: &LevelScheme) -> Vec<String> {
    scheme
        .channels()
        .iter()
        .map(|c| c.name.to_string())
        .collect()
}

/// Names of the ground levels, the modes of the atomic ground block.
pub fn ground_levels(scheme: &LevelScheme) -> Vec<String> {
    let names = scheme.level_names();
    (0..scheme.num_levels())
        .filter(|&l| !scheme.is_excited(l))
        .map(|l| names[l].to_string())
        .collect()
}

/// Parses `X_<mode>` or `P_<mode>`.
pub fn coordinate(name: &str, labels: &[String]) -> Result<Coordinate, CliError> {
    let (q, mode) = name.split_once('_').ok_or_else(|| {
        bad(format!(
            "coordinate '{name}' must look like X_<mode> or P_<mode>"
        ))
    })?;
    let k = labels.iter().position(|l| l == mode).ok_or_else(|| {
        bad(format!(
            "coordinate '{name}': unknown mode (modes: {})",
            labels.join(", ")
        ))
    })?;
    match q {
        "X" => Ok(Coordinate::x(k)),
        "P" => Ok(Coordinate::p(k)),
        _ => Err(bad(format!(
            "coordinate '{name}': quadrature must be X or P"
        ))),
    }
}

impl ExperimentConfig {
    pub fn atoms(&self) -> Result<usize, CliError> {
        match self.atoms {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(bad("atoms must be at least 1")),
            None => Err(bad("missing `atoms`")),
        }
    }

    pub fn amplitudes(&self) -> Result<(C64, C64), CliError> {
        self.excitation
            .as_ref()
            .ok_or_else(|| bad("missing [excitation]"))?
            .amplitudes()
    }

    pub fn wigner_labels(&self) -> Result<Vec<String>, CliError> {
        let w = self
            .wigner
            .as_ref()
            .ok_or_else(|| bad("missing [wigner]"))?;
        Ok(match w.source {
            WignerSource::Photonic => photonic_modes(&self.model),
            WignerSource::AtomicGround => ground_levels(&self.model),
        })
    }

    /// Rate variants swept by a Peres scan, keyed by `(G11/G+-, G12/G11)`.
    pub fn peres_schemes(&self) -> Result<Vec<RateVariant>, CliError> {
        let Some(EntanglementConfig::Peres {
            cross_ratios,
            gamma_ratios,
            ..
        }) = &self.entanglement
        else {
            return Err(bad("missing Peres [entanglement] section"));
        };
        let LevelScheme::FourLevel {
            omega0,
            delta,
            gamma,
            ..
        } = self.model
        else {
            return Err(bad("Peres scans need a four_level model"));
        };
        let g = gamma[0][0];
        let mut out = Vec::new();
        for &r in gamma_ratios {
            if !(r.is_finite() && r > 0.0) {
                return Err(bad(format!(
                    "gamma_ratios entries must be positive (got {r})"
                )));
            }
            for &x in cross_ratios {
                let s = LevelScheme::FourLevel {
                    omega0,
                    delta,
                    gamma: [[g, x * g], [x * g, g]],
                    gamma_plus: g / r,
                    gamma_minus: g / r,
                };
                s.validate()
                    .map_err(|e| bad(format!("cross ratio {x}: {e}")))?;
                out.push(((r, x), s));
            }
        }
        Ok(out)
    }

    /// Checks everything `command` will need before any computation starts.
    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        self.model.validate().map_err(|e| bad(e.to_string()))?;
        let four_level = matches!(self.model, LevelScheme::FourLevel { .. });
        match command {
            Command::Simulate => {
                self.atoms()?;
                self.amplitudes()?;
                let s = self
                    .simulate
                    .as_ref()
                    .ok_or_else(|| bad("missing [simulate]"))?;
                check_times("simulate", s.t_end, s.sample_interval, s.step)?;
                if !(s.steady_state_threshold > 0.0) {
                    return Err(bad("[simulate] steady_state_threshold must be positive"));
                }
                if s.snapshots.iter().any(|&t| !(0.0..=s.t_end).contains(&t)) {
                    return Err(bad("[simulate] snapshots must lie in [0, t_end]"));
                }
                if s.spectrum && s.rotating_frame {
                    return Err(bad(
                        "[simulate] spectrum needs lab-frame states (rotating_frame = false)",
                    ));
                }
            }
            Command::Photonic => {
                self.atoms()?;
                self.amplitudes()?;
                if matches!(self.model, LevelScheme::VDegenerate { .. }) {
                    return Err(bad(
                        "photonic states are available for v_nondegenerate and four_level models",
                    ));
                }
            }
            Command::Entanglement => match self
                .entanglement
                .as_ref()
                .ok_or_else(|| bad("missing [entanglement]"))?
            {
                EntanglementConfig::Negativity { atoms, points }
                | EntanglementConfig::ConditionalEntropy { atoms, points } => {
                    if atoms.is_empty() || atoms.contains(&0) {
                        return Err(bad(
                            "[entanglement] atoms must be a non-empty list of positive counts",
                        ));
                    }
                    if *points < 2 {
                        return Err(bad("[entanglement] points must be at least 2"));
                    }
                    let want_v = matches!(
                        self.entanglement,
                        Some(EntanglementConfig::Negativity { .. })
                    );
                    if want_v && !matches!(self.model, LevelScheme::VNondegenerate { .. }) {
                        return Err(bad("negativity curves need a v_nondegenerate model"));
                    }
                    if !want_v && !four_level {
                        return Err(bad("conditional entropies need a four_level model"));
                    }
                }
                EntanglementConfig::Peres {
                    cross_ratios,
                    t_end,
                    sample_interval,
                    step,
                    ..
                } => {
                    self.atoms()?;
                    self.amplitudes()?;
                    check_times("entanglement", *t_end, *sample_interval, *step)?;
                    if cross_ratios.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                        return Err(bad("cross_ratios entries must be non-negative"));
                    }
                    self.peres_schemes()?;
                }
            },
            Command::Wigner => {
                self.atoms()?;
                self.amplitudes()?;
                let w = self
                    .wigner
                    .as_ref()
                    .ok_or_else(|| bad("missing [wigner]"))?;
                if w.grid.points == 0 || !(w.grid.lo < w.grid.hi) {
                    return Err(bad("[wigner.grid] needs points >= 1 and lo < hi"));
                }
                match w.source {
                    WignerSource::Photonic => {
                        if matches!(self.model, LevelScheme::VDegenerate { .. }) {
                            return Err(bad("photonic states are available for v_nondegenerate and four_level models"));
                        }
                    }
                    WignerSource::AtomicGround => {
                        let s = self.simulate.as_ref().ok_or_else(|| {
                            bad("atomic_ground Wigner slices need a [simulate] section")
                        })?;
                        check_times("simulate", s.t_end, s.sample_interval, s.step)?;
                    }
                }
                let labels = self.wigner_labels()?;
                if labels.is_empty() {
                    return Err(bad("no phase-space coordinates to slice"));
                }
                for [a, b] in w.slices.iter().flatten() {
                    let (ca, cb) = (coordinate(a, &labels)?, coordinate(b, &labels)?);
                    if ca == cb {
                        return Err(bad(format!("slice [{a}, {b}] repeats a coordinate")));
                    }
                }
            }
            Command::Scaling => {
                self.amplitudes()?;
                let s = self
                    .scaling
                    .as_ref()
                    .ok_or_else(|| bad("missing [scaling]"))?;
                check_times("scaling", s.t_end, s.sample_interval, s.step)?;
                let mut n = s.atoms.clone();
                n.sort_unstable();
                n.dedup();
                if n.len() != s.atoms.len() || n.len() < 4 || n[0] == 0 {
                    return Err(bad(
                        "[scaling] atoms needs at least 4 distinct positive counts",
                    ));
                }
            }
        }
        Ok(())
    }
}
