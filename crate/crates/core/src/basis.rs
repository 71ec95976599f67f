//! Level schemes and the symmetrized occupation-number basis.
//!
//! A state of `N` indistinguishable atoms with `L` levels is labelled by the
//! occupation counts `(n_0, ..., n_{L-1})` summing to `N`. States are ordered
//! lexicographically descending on the count vector, so for a V-atom in level
//! order `(e2, e1, g)` the first state is `|N,0,0>` and the last `|0,0,N>`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Level indices of a V-atom, in basis order.
pub mod v {
    pub const E2: usize = 0;
    pub const E1: usize = 1;
    pub const G: usize = 2;
}

/// Level indices of a four-level atom, in basis order.
pub mod fla {
    pub const E2: usize = 0;
    pub const E1: usize = 1;
    pub const G2: usize = 2;
    pub const G1: usize = 3;
}

/// Atomic level structure with frequencies and decay-rate matrices.
///
/// Frequencies and rates share one unit (rates in units of a reference decay
/// rate, frequencies in the same inverse-time unit). Only ratios enter the
/// normalized intensities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelScheme {
    /// V-atom with two distinct transition frequencies and no cross damping.
    VNondegenerate {
        omega1: f64,
        omega2: f64,
        gamma1: f64,
        gamma2: f64,
    },
    /// V-atom with both transitions at `omega0` sharing one radiation mode.
    /// `gamma[l][m]` couples the `g <- e_{l+1}` and `g <- e_{m+1}` operators.
    VDegenerate { omega0: f64, gamma: [[f64; 2]; 2] },
    /// Four-level atom: `e1 -> g1` and `e2 -> g2` at `omega0` (coupled through
    /// `gamma`), `e2 -> g1` at `omega0 + delta` and `e1 -> g2` at `omega0 - delta`.
    FourLevel {
        omega0: f64,
        delta: f64,
        gamma: [[f64; 2]; 2],
        gamma_plus: f64,
        gamma_minus: f64,
    },
}

/// One source-to-target transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub source: usize,
    pub target: usize,
}

/// A radiation channel: transitions emitting into the same frequency, with
/// their (symmetric) cross-damping matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub name: &'static str,
    pub omega: f64,
    pub transitions: Vec<Transition>,
    pub rates: Vec<Vec<f64>>,
}

impl LevelScheme {
    /// Equal-rate four-level scheme used by most figures.
    pub fn four_level_equal(omega0: f64, delta: f64, gamma: f64) -> Self {
        LevelScheme::FourLevel {
            omega0,
            delta,
            gamma: [[gamma; 2]; 2],
            gamma_plus: gamma,
            gamma_minus: gamma,
        }
    }

    pub fn num_levels(&self) -> usize {
        match self {
            LevelScheme::VNondegenerate { .. } | LevelScheme::VDegenerate { .. } => 3,
            LevelScheme::FourLevel { .. } => 4,
        }
    }

    pub fn level_names(&self) -> &'static [&'static str] {
        match self {
            LevelScheme::VNondegenerate { .. } | LevelScheme::VDegenerate { .. } => {
                &["e2", "e1", "g"]
            }
            LevelScheme::FourLevel { .. } => &["e2", "e1", "g2", "g1"],
        }
    }

    pub fn is_excited(&self, level: usize) -> bool {
        level < 2
    }

    /// Energy of each level, ground reference at zero.
    pub fn level_energies(&self) -> Vec<f64> {
        match *self {
            LevelScheme::VNondegenerate { omega1, omega2, .. } => vec![omega2, omega1, 0.0],
            LevelScheme::VDegenerate { omega0, .. } => vec![omega0, omega0, 0.0],
            LevelScheme::FourLevel { omega0, delta, .. } => {
                vec![omega0 + delta, omega0, delta, 0.0]
            }
        }
    }

    /// Radiation channels in output order.
    pub fn channels(&self) -> Vec<Channel> {
        let t = |source, target| Transition { source, target };
        match *self {
            LevelScheme::VNondegenerate {
                omega1,
                omega2,
                gamma1,
                gamma2,
            } => vec![
                Channel {
                    name: "w1",
                    omega: omega1,
                    transitions: vec![t(v::E1, v::G)],
                    rates: vec![vec![gamma1]],
                },
                Channel {
                    name: "w2",
                    omega: omega2,
                    transitions: vec![t(v::E2, v::G)],
                    rates: vec![vec![gamma2]],
                },
            ],
            LevelScheme::VDegenerate { omega0, gamma } => vec![Channel {
                name: "w0",
                omega: omega0,
                transitions: vec![t(v::E1, v::G), t(v::E2, v::G)],
                rates: gamma.iter().map(|r| r.to_vec()).collect(),
            }],
            LevelScheme::FourLevel {
                omega0,
                delta,
                gamma,
                gamma_plus,
                gamma_minus,
            } => vec![
                Channel {
                    name: "w-",
                    omega: omega0 - delta,
                    transitions: vec![t(fla::E1, fla::G2)],
                    rates: vec![vec![gamma_minus]],
                },
                Channel {
                    name: "w0",
                    omega: omega0,
                    transitions: vec![t(fla::E1, fla::G1), t(fla::E2, fla::G2)],
                    rates: gamma.iter().map(|r| r.to_vec()).collect(),
                },
                Channel {
                    name: "w+",
                    omega: omega0 + delta,
                    transitions: vec![t(fla::E2, fla::G1)],
                    rates: vec![vec![gamma_plus]],
                },
            ],
        }
    }

    /// Frequency and rate defining the intensity unit `I0 = 2 w_ref G_ref`.
    pub fn reference(&self) -> (f64, f64) {
        match *self {
            LevelScheme::VNondegenerate { omega1, gamma1, .. } => (omega1, gamma1),
            LevelScheme::VDegenerate { omega0, gamma } => (omega0, gamma[0][0]),
            LevelScheme::FourLevel { omega0, gamma, .. } => (omega0, gamma[0][0]),
        }
    }

    pub fn max_rate(&self) -> f64 {
        self.channels()
            .iter()
            .flat_map(|c| c.rates.iter().flatten().copied())
            .fold(0.0, f64::max)
    }

    /// Checks rates and frequencies for physical consistency.
    pub fn validate(&self) -> Result<()> {
        let energies = self.level_energies();
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidScheme("non-finite frequency".into()));
        }
        for ch in self.channels() {
            let k = ch.transitions.len();
            for l in 0..k {
                let tr = ch.transitions[l];
                let gap = energies[tr.source] - energies[tr.target];
                if (gap - ch.omega).abs() > 1e-12 * ch.omega.abs().max(1.0) {
                    return Err(Error::InvalidScheme(format!(
                        "channel {} frequency {} does not match level gap {}",
                        ch.name, ch.omega, gap
                    )));
                }
                let d = ch.rates[l][l];
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::InvalidScheme(format!(
                        "negative or non-finite rate {d} in channel {}",
                        ch.name
                    )));
                }
                for m in 0..k {
                    let (a, b) = (ch.rates[l][m], ch.rates[m][l]);
                    if !a.is_finite() || (a - b).abs() > 1e-14 * a.abs().max(1.0) {
                        return Err(Error::InvalidScheme(format!(
                            "cross rates in channel {} must be symmetric ({a} vs {b})",
                            ch.name
                        )));
                    }
                    if l != m && a * a > ch.rates[l][l] * ch.rates[m][m] * (1.0 + 1e-12) {
                        return Err(Error::InvalidScheme(format!(
                            "cross rate {a} exceeds the geometric mean of the direct rates in channel {}",
                            ch.name
                        )));
                    }
                }
            }
        }
        if self.max_rate() <= 0.0 {
            return Err(Error::InvalidScheme("all decay rates vanish".into()));
        }
        Ok(())
    }
}

/// Ordered list of occupation vectors for `atoms` particles in `levels` levels.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationBasis {
    atoms: usize,
    levels: usize,
    flat: Vec<u32>,
    index: HashMap<Vec<u32>, usize>,
}

impl OccupationBasis {
    pub fn new(atoms: usize, levels: usize) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::InvalidArgument(
                "number of atoms must be positive".into(),
            ));
        }
        if levels == 0 {
            return Err(Error::InvalidArgument(
                "number of levels must be positive".into(),
            ));
        }
        let mut flat = Vec::new();
        let mut current = vec![0u32; levels];
        fill(&mut flat, &mut current, 0, atoms as u32);
        let index = flat
            .chunks(levels)
            .enumerate()
            .map(|(i, s)| (s.to_vec(), i))
            .collect();
        Ok(OccupationBasis {
            atoms,
            levels,
            flat,
            index,
        })
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.flat[i * self.levels..(i + 1) * self.levels]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u32]> {
        self.flat.chunks(self.levels)
    }

    pub fn index_of(&self, occupations: &[u32]) -> Option<usize> {
        self.index.get(occupations).copied()
    }

    /// Occupations as `usize` vectors, one per basis index.
    pub fn occupation_table(&self) -> Vec<Vec<usize>> {
        self.states()
            .map(|s| s.iter().map(|&n| n as usize).collect())
            .collect()
    }

    /// Number of atoms in excited levels for each state.
    pub fn excitation_numbers(&self, scheme: &LevelScheme) -> Vec<usize> {
        self.states()
            .map(|s| {
                s.iter()
                    .enumerate()
                    .filter(|(l, _)| scheme.is_excited(*l))
                    .map(|(_, &n)| n as usize)
                    .sum()
            })
            .collect()
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level >= self.levels {
            Err(Error::LevelOutOfRange {
                index: level,
                levels: self.levels,
            })
        } else {
            Ok(())
        }
    }
}

fn fill(out: &mut Vec<u32>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k;
        fill(out, current, pos + 1, remaining - k);
    }
}

/// Binomial coefficient as `f64`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Collective operator moving one atom between two levels.
///
/// Each basis state maps to at most one state, so the operator is stored as a
/// column map plus its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderOp {
    /// `forward[j] = Some((i, a))` means `<i|op|j> = a`.
    forward: Vec<Option<(usize, f64)>>,
    /// `backward[i] = Some((j, a))` is the same entry indexed by row.
    backward: Vec<Option<(usize, f64)>>,
}

impl LadderOp {
    /// Moves one quantum `source -> target` with amplitude `sqrt(n_source (n_target + 1))`.
    ///
    /// `lowering(b, E1, G)` is the collective `g <- e1` operator.
    pub fn lowering(basis: &OccupationBasis, source: usize, target: usize) -> Result<Self> {
        basis.check_level(source)?;
        basis.check_level(target)?;
        if source == target {
            return Err(Error::InvalidArgument(
                "source and target levels coincide".into(),
            ));
        }
        let d = basis.len();
        let mut forward = vec![None; d];
        let mut backward = vec![None; d];
        let mut buf = vec![0u32; basis.levels()];
        for (j, s) in basis.states().enumerate() {
            if s[source] == 0 {
                continue;
            }
            let amp = (s[source] as f64 * (s[target] as f64 + 1.0)).sqrt();
            buf.copy_from_slice(s);
            buf[source] -= 1;
            buf[target] += 1;
            let i = basis
                .index_of(&buf)
                .expect("ladder image stays inside the basis");
            forward[j] = Some((i, amp));
            backward[i] = Some((j, amp));
        }
        Ok(LadderOp { forward, backward })
    }

    /// Adjoint of `lowering(source, target)`, amplitude `sqrt(n_target (n_source + 1))`.
    pub fn raising(basis: &OccupationBasis, source: usize, target: usize) -> Result<Self> {
        Ok(Self::lowering(basis, source, target)?.adjoint())
    }

    pub fn adjoint(&self) -> Self {
        LadderOp {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.forward.len()
    }

    /// Image of basis state `j`.
    pub fn image(&self, j: usize) -> Option<(usize, f64)> {
        self.forward[j]
    }

    /// The unique state mapped onto `i`, if any.
    pub fn preimage(&self, i: usize) -> Option<(usize, f64)> {
        self.backward[i]
    }

    pub fn apply(&self, psi: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(psi.len());
        for (j, e) in self.forward.iter().enumerate() {
            if let Some((i, a)) = *e {
                out[i] += psi[j] * a;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (j, e) in self.forward.iter().enumerate() {
            if let Some((i, a)) = *e {
                m[(i, j)] = a;
            }
        }
        m
    }
}

/// Density matrix over an occupation basis. Entry `(i, j)` is `<i|rho|j>`:
/// row index labels the bra occupations, column the ket.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTensor {
    pub basis: Arc<OccupationBasis>,
    pub data: DMatrix<C64>,
}

impl DensityTensor {
    pub fn new(basis: Arc<OccupationBasis>, data: DMatrix<C64>) -> Result<Self> {
        let d = basis.len();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: data.nrows(),
            });
        }
        Ok(DensityTensor { basis, data })
    }

    /// `|psi><psi|` for a normalized state vector.
    pub fn from_pure(basis: Arc<OccupationBasis>, psi: &DVector<C64>) -> Result<Self> {
        let data = psi * psi.adjoint();
        Self::new(basis, data)
    }

    /// Element `<bra|rho|ket>` addressed by occupations.
    pub fn element(&self, bra: &[u32], ket: &[u32]) -> Option<C64> {
        let i = self.basis.index_of(bra)?;
        let j = self.basis.index_of(ket)?;
        Some(self.data[(i, j)])
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.data.nrows())
            .map(|i| self.data[(i, i)].re)
            .collect()
    }

    /// `max |rho - rho^dagger|` over entries.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.data)
    }
}

pub fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
