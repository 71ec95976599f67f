//! Photonic states left behind once every atom has decayed.
//!
//! Emitted photons are described in a collapsed Fock basis with one mode per
//! transition frequency. For V-atoms the ensemble's excitation amplitudes are
//! imprinted one-to-one on the two-mode photon-number amplitudes. For
//! four-level atoms the final atomic ground configuration is entangled with
//! the photons, leaving a mixture with one pure component per configuration.

mod factor;
mod fla;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{factorial, OccupationBasis};
use crate::dynamics::symmetric_amplitudes;
use crate::{Error, Result, C64};

pub use factor::{
    linear_factors, mode_independence_check, LinearFactor, ModeIndependence, Witness,
};
pub use fla::{fla_final_mixture, fla_path_probabilities};

/// Pure state of `N` photons distributed over a fixed set of modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    pub modes: Vec<String>,
    pub basis: Arc<OccupationBasis>,
    pub amplitudes: DVector<C64>,
}

impl FockState {
    pub fn new(
        modes: Vec<String>,
        photons: usize,
        entries: &BTreeMap<Vec<u32>, C64>,
    ) -> Result<Self> {
        let basis = Arc::new(OccupationBasis::new(photons, modes.len())?);
        let mut amplitudes = DVector::zeros(basis.len());
        for (occ, a) in entries {
            let i = basis.index_of(occ).ok_or_else(|| {
                Error::InvalidArgument(format!("photon numbers {occ:?} outside the basis"))
            })?;
            amplitudes[i] += *a;
        }
        Ok(FockState {
            modes,
            basis,
            amplitudes,
        })
    }

    pub fn photons(&self) -> usize {
        self.basis.atoms()
    }

    pub fn amplitude(&self, occupations: &[u32]) -> C64 {
        self.basis
            .index_of(occupations)
            .map_or(C64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureComponent {
    pub probability: f64,
    /// Final atomic configuration the component is correlated with.
    pub label: String,
    pub state: FockState,
}

/// Convex mixture of pure photonic states sharing modes and photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    pub components: Vec<MixtureComponent>,
}

impl Mixture {
    pub fn modes(&self) -> &[String] {
        &self.components[0].state.modes
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.components[0].state.basis
    }

    pub fn total_probability(&self) -> f64 {
        self.components.iter().map(|c| c.probability).sum()
    }

    /// `sum_q p_q |phi_q><phi_q|` on the fixed-photon-number basis.
    pub fn density_matrix(&self) -> DMatrix<C64> {
        let d = self.basis().len();
        let mut rho = DMatrix::zeros(d, d);
        for c in &self.components {
            let v = &c.state.amplitudes;
            rho += v * v.adjoint() * C64::new(c.probability, 0.0);
        }
        rho
    }

    pub fn to_record(&self) -> MixtureRecord {
        MixtureRecord {
            modes: self.modes().to_vec(),
            photons: self.basis().atoms(),
            components: self
                .components
                .iter()
                .map(|c| ComponentRecord {
                    probability: c.probability,
                    label: c.label.clone(),
                    terms: c
                        .state
                        .basis
                        .states()
                        .zip(c.state.amplitudes.iter())
                        .filter(|(_, a)| a.norm() > 0.0)
                        .map(|(s, a)| TermRecord {
                            occupations: s.to_vec(),
                            re: a.re,
                            im: a.im,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Serializable view of a [`Mixture`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureRecord {
    pub modes: Vec<String>,
    pub photons: usize,
    pub components: Vec<ComponentRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub probability: f64,
    pub label: String,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub occupations: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Two-mode state `sum_n a_n |n, N-n>` in modes `(w1, w2)`, where `n` counts
/// photons from `e1`.
pub fn v_final_state(atoms: usize, alpha: C64, beta: C64) -> Result<Mixture> {
    let a = symmetric_amplitudes(atoms, alpha, beta)?;
    let entries = a
        .iter()
        .enumerate()
        .map(|(n, &x)| (vec![n as u32, (atoms - n) as u32], x))
        .collect();
    let state = FockState::new(vec!["w1".into(), "w2".into()], atoms, &entries)?;
    Ok(Mixture {
        components: vec![MixtureComponent {
            probability: 1.0,
            label: format!("g^{atoms}"),
            state,
        }],
    })
}

/// Sum over all emission orders of `prod_i 1 / (w1 x_i + w2 y_i)`, where
/// `x_i`, `y_i` are the excitations left in `e1`, `e2` before emission `i`
/// and `n` of the `N` emissions come from `e1`.
pub fn g_value(atoms: usize, n: usize, w1: f64, w2: f64) -> Result<f64> {
    check_weights(atoms, n, w1, w2)?;
    fn walk(x: usize, y: usize, w1: f64, w2: f64) -> f64 {
        if x == 0 && y == 0 {
            return 1.0;
        }
        let f = 1.0 / (w1 * x as f64 + w2 * y as f64);
        let mut s = 0.0;
        if x > 0 {
            s += walk(x - 1, y, w1, w2);
        }
        if y > 0 {
            s += walk(x, y - 1, w1, w2);
        }
        f * s
    }
    Ok(walk(n, atoms - n, w1, w2))
}

/// Number of distinct emission orders contributing to [`g_value`].
pub fn path_count(atoms: usize, n: usize) -> usize {
    fn count(x: usize, y: usize) -> usize {
        if x == 0 || y == 0 {
            1
        } else {
            count(x - 1, y) + count(x, y - 1)
        }
    }
    if n > atoms {
        0
    } else {
        count(n, atoms - n)
    }
}

/// Population of `|n, N-n>` obtained by summing squared path amplitudes:
/// `|a_n|^2 n! (N-n)! w1^n w2^(N-n) G(N, n)`.
pub fn path_populations(atoms: usize, w1: f64, w2: f64, amplitudes: &[C64]) -> Result<Vec<f64>> {
    if amplitudes.len() != atoms + 1 {
        return Err(Error::DimensionMismatch {
            expected: atoms + 1,
            got: amplitudes.len(),
        });
    }
    (0..=atoms)
        .map(|n| {
            let g = g_value(atoms, n, w1, w2)?;
            Ok(amplitudes[n].norm_sqr()
                * factorial(n)
                * factorial(atoms - n)
                * w1.powi(n as i32)
                * w2.powi((atoms - n) as i32)
                * g)
        })
        .collect()
}

fn check_weights(atoms: usize, n: usize, w1: f64, w2: f64) -> Result<()> {
    if n > atoms {
        return Err(Error::InvalidArgument(format!(
            "n = {n} exceeds N = {atoms}"
        )));
    }
    if !(w1 > 0.0 && w2 > 0.0 && w1.is_finite() && w2.is_finite()) {
        return Err(Error::InvalidArgument(
            "rate weights must be positive and finite".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_photon_g_value() {
        let g = g_value(2, 1, 1.0, 1.0).unwrap();
        assert!((g - 1.0).abs() < 1e-15);
        assert_eq!(path_count(4, 2), 6);
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(g_value(3, 1, 0.0, 1.0).is_err());
        assert!(g_value(3, 4, 1.0, 1.0).is_err());
    }
}
