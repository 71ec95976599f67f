use std::collections::BTreeMap;

use super::{FockState, Mixture, MixtureComponent};
use crate::basis::{fla, LadderOp, LevelScheme, OccupationBasis};
use crate::dynamics::symmetric_amplitudes;
use crate::{Error, Result, C64};

/// Final ground occupations `(n_g2, n_g1)` and photon numbers `(n-, n0, n+)`.
pub type Outcome = ([u32; 2], [u32; 3]);

/// Outcome probabilities for an ensemble starting with `k` atoms in `e1` and
/// `N - k` in `e2`.
///
/// Emission sequences are enumerated through the symmetrized ladder. Each
/// step from a state with total decay rate `R` along an operator with
/// amplitude `A` and rate `G` carries probability `G A^2 / R`; sequences ending
/// in the same outcome add their probabilities.
pub fn fla_path_probabilities(
    scheme: &LevelScheme,
    atoms: usize,
    k: usize,
) -> Result<BTreeMap<Outcome, f64>> {
    if !matches!(scheme, LevelScheme::FourLevel { .. }) {
        return Err(Error::InvalidScheme("four-level scheme required".into()));
    }
    scheme.validate()?;
    if k > atoms {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds N = {atoms}"
        )));
    }
    let basis = OccupationBasis::new(atoms, 4)?;
    // (operator, photon mode, rate); channels come out ordered (w-, w0, w+).
    let mut ops = Vec::new();
    for (mode, ch) in scheme.channels().iter().enumerate() {
        for (l, tr) in ch.transitions.iter().enumerate() {
            let rate = ch.rates[l][l];
            if rate > 0.0 {
                ops.push((
                    LadderOp::lowering(&basis, tr.source, tr.target)?,
                    mode,
                    rate,
                ));
            }
        }
    }

    let mut start = [0u32; 4];
    start[fla::E2] = (atoms - k) as u32;
    start[fla::E1] = k as u32;
    let start = basis
        .index_of(&start)
        .expect("initial occupations lie in the basis");
    let mut layer: BTreeMap<(usize, [u32; 3]), f64> = BTreeMap::new();
    layer.insert((start, [0; 3]), 1.0);
    for _ in 0..atoms {
        let mut next = BTreeMap::new();
        for (&(s, counts), &w) in &layer {
            let moves: Vec<(usize, usize, f64)> = ops
                .iter()
                .filter_map(|(op, mode, rate)| op.image(s).map(|(t, a)| (t, *mode, rate * a * a)))
                .collect();
            let total: f64 = moves.iter().map(|m| m.2).sum();
            if total == 0.0 {
                return Err(Error::InvalidScheme(
                    "an excited configuration cannot decay".into(),
                ));
            }
            for (t, mode, r) in moves {
                let mut c = counts;
                c[mode] += 1;
                *next.entry((t, c)).or_insert(0.0) += w * r / total;
            }
        }
        layer = next;
    }
    Ok(layer
        .into_iter()
        .map(|((s, counts), p)| {
            let occ = basis.state(s);
            (([occ[fla::G2], occ[fla::G1]], counts), p)
        })
        .collect())
}

/// Photonic mixture emitted by `N` equal-rate four-level atoms prepared in
/// the symmetrized product of `alpha|e1> + beta|e2>`.
///
/// One component per final ground configuration, ordered by `n_g1 = 0..=N`.
/// The photon-number sector of a term fixes the initial excitation it came
/// from, so each component amplitude is `a_k sqrt(P(outcome | k))`.
pub fn fla_final_mixture(
    scheme: &LevelScheme,
    atoms: usize,
    alpha: C64,
    beta: C64,
) -> Result<Mixture> {
    let LevelScheme::FourLevel {
        gamma,
        gamma_plus,
        gamma_minus,
        ..
    } = *scheme
    else {
        return Err(Error::InvalidScheme("four-level scheme required".into()));
    };
    let g = gamma[0][0];
    let all = [
        gamma[0][1],
        gamma[1][0],
        gamma[1][1],
        gamma_plus,
        gamma_minus,
    ];
    if all
        .iter()
        .any(|&x| (x - g).abs() > 1e-12 * g.abs().max(1.0))
    {
        return Err(Error::UnequalRates(
            "the collapsed photonic basis requires all decay rates and cross rates equal".into(),
        ));
    }
    let amps = symmetric_amplitudes(atoms, alpha, beta)?;

    let mut groups: BTreeMap<u32, BTreeMap<Vec<u32>, C64>> = BTreeMap::new();
    for (k, &a) in amps.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        for ((ground, counts), p) in fla_path_probabilities(scheme, atoms, k)? {
            let slot = groups
                .entry(ground[1])
                .or_default()
                .entry(counts.to_vec())
                .or_insert(C64::new(0.0, 0.0));
            if slot.norm_sqr() != 0.0 {
                return Err(Error::InvalidArgument(
                    "two initial excitations reached the same photon sector".into(),
                ));
            }
            *slot = a * p.sqrt();
        }
    }

    let modes: Vec<String> = ["w-", "w0", "w+"].iter().map(|s| s.to_string()).collect();
    let mut components = Vec::new();
    for (ng1, entries) in groups {
        let mut state = FockState::new(modes.clone(), atoms, &entries)?;
        let p = state.amplitudes.norm_squared();
        if p == 0.0 {
            continue;
        }
        state.amplitudes /= C64::new(p.sqrt(), 0.0);
        components.push(MixtureComponent {
            probability: p,
            label: format!("g2^{} g1^{}", atoms as u32 - ng1, ng1),
            state,
        });
    }
    Ok(Mixture { components })
}
