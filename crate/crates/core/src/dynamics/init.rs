use std::sync::Arc;

use nalgebra::DVector;

use crate::basis::{binomial, DensityTensor, LevelScheme, OccupationBasis};
use crate::{Error, Result, C64};

/// Amplitudes `a_n = N_norm * C(N, n) alpha^n beta^(N-n)`, `n = 0..=N`, where
/// `n` counts atoms in `e1` (weight `alpha`) and `N - n` atoms in `e2`.
pub fn symmetric_amplitudes(atoms: usize, alpha: C64, beta: C64) -> Result<Vec<C64>> {
    let norm2 = alpha.norm_sqr() + beta.norm_sqr();
    if !norm2.is_finite() || (norm2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "single-atom amplitudes must satisfy |alpha|^2 + |beta|^2 = 1 (got {norm2})"
        )));
    }
    let mut a: Vec<C64> = (0..=atoms)
        .map(|n| alpha.powu(n as u32) * beta.powu((atoms - n) as u32) * binomial(atoms, n))
        .collect();
    let total: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in &mut a {
        *x /= total;
    }
    Ok(a)
}

/// Symmetrized product of `alpha|e1> + beta|e2>` with no ground occupation.
pub fn symmetric_init(
    scheme: &LevelScheme,
    atoms: usize,
    alpha: C64,
    beta: C64,
) -> Result<DensityTensor> {
    let basis = Arc::new(OccupationBasis::new(atoms, scheme.num_levels())?);
    let amps = symmetric_amplitudes(atoms, alpha, beta)?;
    let mut occ = vec![0u32; scheme.num_levels()];
    let mut entries = Vec::with_capacity(atoms + 1);
    for (n, a) in amps.into_iter().enumerate() {
        occ[0] = (atoms - n) as u32; // e2
        occ[1] = n as u32; // e1
        entries.push((occ.clone(), a));
    }
    pure_state(basis, &entries)
}

/// Pure state from `(occupations, amplitude)` pairs; must be normalized.
pub fn pure_state(
    basis: Arc<OccupationBasis>,
    entries: &[(Vec<u32>, C64)],
) -> Result<DensityTensor> {
    let mut psi = DVector::<C64>::zeros(basis.len());
    for (occ, a) in entries {
        let i = basis
            .index_of(occ)
            .ok_or_else(|| Error::InvalidArgument(format!("occupations {occ:?} not in basis")))?;
        psi[i] += *a;
    }
    let n = psi.norm_squared();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "initial state norm {n} is not 1"
        )));
    }
    DensityTensor::from_pure(basis, &psi)
}
