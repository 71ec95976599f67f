use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Generator;
use crate::basis::{hermiticity_error, DensityTensor};
use crate::error::InvariantKind;
use crate::linalg::hermitian_eigenvalues;
use crate::{Error, Result, C64};

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub t_end: f64,
    /// Spacing of stored/observed samples.
    pub sample_interval: f64,
    /// Upper bound on the RK4 step; defaults to [`default_step`].
    #[serde(default)]
    pub step: Option<f64>,
    /// Report states in the frame rotating with the free Hamiltonian.
    #[serde(default)]
    pub rotating_frame: bool,
    #[serde(default = "yes")]
    pub check_positivity: bool,
}

fn yes() -> bool {
    true
}

impl IntegratorConfig {
    pub fn new(t_end: f64, sample_interval: f64) -> Self {
        IntegratorConfig {
            t_end,
            sample_interval,
            step: None,
            rotating_frame: false,
            check_positivity: true,
        }
    }
}

/// `min(1e-3, 1 / (50 G_max N^2))`.
pub fn default_step(max_rate: f64, atoms: usize) -> f64 {
    let n = atoms as f64;
    (1.0 / (50.0 * max_rate * n * n)).min(1e-3)
}

/// Worst invariant values seen over all samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub samples: usize,
    pub step: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    /// `None` when positivity checks were disabled.
    pub min_eigenvalue: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityTensor>,
    pub report: InvariantReport,
}

/// Integrates and keeps every sample.
pub fn integrate(
    gen: &Generator,
    rho0: &DensityTensor,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let report = integrate_observed(gen, rho0, cfg, |t, rho| {
        times.push(t);
        states.push(rho.clone());
    })?;
    Ok(Trajectory {
        times,
        states,
        report,
    })
}

/// Fixed-step RK4 integration calling `observer` at every sample.
///
/// Every channel lowers the free energy by a fixed amount, so the dissipator
/// commutes with the free evolution. The integration therefore runs in the
/// interaction picture and the free phases are restored exactly at each
/// sample unless `rotating_frame` is set.
pub fn integrate_observed<F>(
    gen: &Generator,
    rho0: &DensityTensor,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<InvariantReport>
where
    F: FnMut(f64, &DensityTensor),
{
    gen.check_dim(&rho0.data)?;
    if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be finite and >= 0 (got {})",
            cfg.t_end
        )));
    }
    if !(cfg.sample_interval > 0.0 && cfg.sample_interval.is_finite()) {
        return Err(Error::InvalidArgument(
            "sample_interval must be positive".into(),
        ));
    }
    let tr = rho0.trace();
    if (tr - 1.0).norm() > TRACE_TOL {
        return Err(Error::InvalidArgument(format!(
            "initial trace {tr} is not 1"
        )));
    }
    if rho0.hermiticity_error() > HERMITICITY_TOL {
        return Err(Error::InvalidArgument(
            "initial state is not Hermitian".into(),
        ));
    }

    let h_max = match cfg.step {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => {
            return Err(Error::InvalidArgument(format!(
                "step must be positive (got {h})"
            )))
        }
        None => default_step(gen.scheme().max_rate(), gen.atoms()),
    };
    let per_sample = (cfg.sample_interval / h_max).ceil().max(1.0) as usize;
    let h = cfg.sample_interval / per_sample as f64;
    let n_samples = (cfg.t_end / cfg.sample_interval).round() as usize;

    let layout = Layout::new(gen, &rho0.data);
    let d = gen.dim();
    let mut rho = rho0.data.clone();
    let mut k1 = DMatrix::zeros(d, d);
    let mut k2 = DMatrix::zeros(d, d);
    let mut k3 = DMatrix::zeros(d, d);
    let mut k4 = DMatrix::zeros(d, d);
    let mut tmp = rho.clone();

    let mut report = InvariantReport {
        samples: 0,
        step: h,
        max_trace_error: 0.0,
        max_hermiticity_error: 0.0,
        min_eigenvalue: if cfg.check_positivity {
            Some(f64::INFINITY)
        } else {
            None
        },
    };

    let pairs = layout.pairs.as_slice();
    for s in 0..=n_samples {
        let t = s as f64 * cfg.sample_interval;
        if s > 0 {
            for _ in 0..per_sample {
                gen.apply(&rho, &mut k1, Some(pairs), false);
                axpy(&mut tmp, &rho, &k1, 0.5 * h, pairs);
                gen.apply(&tmp, &mut k2, Some(pairs), false);
                axpy(&mut tmp, &rho, &k2, 0.5 * h, pairs);
                gen.apply(&tmp, &mut k3, Some(pairs), false);
                axpy(&mut tmp, &rho, &k3, h, pairs);
                gen.apply(&tmp, &mut k4, Some(pairs), false);
                for &(i, j) in pairs {
                    let (i, j) = (i as usize, j as usize);
                    rho[(i, j)] +=
                        (k1[(i, j)] + (k2[(i, j)] + k3[(i, j)]) * 2.0 + k4[(i, j)]) * (h / 6.0);
                }
            }
        }
        check_sample(&rho, t, &layout, cfg.check_positivity, &mut report)?;
        let snapshot = if cfg.rotating_frame {
            rho.clone()
        } else {
            let e = gen.energies();
            DMatrix::from_fn(d, d, |i, j| {
                rho[(i, j)] * C64::from_polar(1.0, -(e[i] - e[j]) * t)
            })
        };
        observer(t, &DensityTensor::new(gen.basis().clone(), snapshot)?);
    }
    Ok(report)
}

fn axpy(out: &mut DMatrix<C64>, x: &DMatrix<C64>, k: &DMatrix<C64>, a: f64, pairs: &[(u32, u32)]) {
    for &(i, j) in pairs {
        let (i, j) = (i as usize, j as usize);
        out[(i, j)] = x[(i, j)] + k[(i, j)] * a;
    }
}

/// Entries that can become nonzero, and the block structure they imply.
struct Layout {
    pairs: Vec<(u32, u32)>,
    /// Index blocks of equal excitation number when the state never couples them.
    blocks: Option<Vec<Vec<usize>>>,
}

impl Layout {
    fn new(gen: &Generator, rho0: &DMatrix<C64>) -> Self {
        let exc = gen.excitations();
        let d = gen.dim();
        // The dissipator preserves the excitation-number difference between bra and ket.
        let mut diffs = BTreeSet::new();
        for j in 0..d {
            for i in 0..d {
                if rho0[(i, j)] != C64::new(0.0, 0.0) {
                    diffs.insert(exc[i] as i64 - exc[j] as i64);
                }
            }
        }
        let mut pairs = Vec::new();
        for j in 0..d {
            for i in 0..d {
                if diffs.contains(&(exc[i] as i64 - exc[j] as i64)) {
                    pairs.push((i as u32, j as u32));
                }
            }
        }
        let blocks = (diffs.len() <= 1 && diffs.iter().all(|&x| x == 0)).then(|| {
            let top = exc.iter().copied().max().unwrap_or(0);
            (0..=top)
                .map(|e| (0..d).filter(|&i| exc[i] == e).collect::<Vec<_>>())
                .filter(|b| !b.is_empty())
                .collect()
        });
        Layout { pairs, blocks }
    }
}

fn check_sample(
    rho: &DMatrix<C64>,
    t: f64,
    layout: &Layout,
    positivity: bool,
    report: &mut InvariantReport,
) -> Result<()> {
    report.samples += 1;
    let trace_err = (rho.trace() - 1.0).norm();
    report.max_trace_error = report.max_trace_error.max(trace_err);
    if trace_err > TRACE_TOL || !trace_err.is_finite() {
        return Err(Error::InvariantBreach {
            kind: InvariantKind::Trace,
            t,
            magnitude: trace_err,
        });
    }
    let herm = hermiticity_error(rho);
    report.max_hermiticity_error = report.max_hermiticity_error.max(herm);
    if herm > HERMITICITY_TOL {
        return Err(Error::InvariantBreach {
            kind: InvariantKind::Hermiticity,
            t,
            magnitude: herm,
        });
    }
    if positivity {
        let min = match &layout.blocks {
            Some(blocks) => blocks
                .iter()
                .map(|b| {
                    let sub = DMatrix::from_fn(b.len(), b.len(), |r, c| rho[(b[r], b[c])]);
                    hermitian_eigenvalues(&sub)[0]
                })
                .fold(f64::INFINITY, f64::min),
            None => hermitian_eigenvalues(rho)[0],
        };
        let slot = report.min_eigenvalue.get_or_insert(f64::INFINITY);
        *slot = slot.min(min);
        if min < POSITIVITY_TOL {
            return Err(Error::InvariantBreach {
                kind: InvariantKind::Positivity,
                t,
                magnitude: min,
            });
        }
    }
    Ok(())
}
