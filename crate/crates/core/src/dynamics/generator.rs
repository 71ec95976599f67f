use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::basis::{Channel, DensityTensor, LadderOp, LevelScheme, OccupationBasis};
use crate::{Error, Result, C64};

#[derive(Clone, Debug)]
struct JumpTerm {
    l: usize,
    m: usize,
    rate: f64,
}

/// Sparse action of the master-equation generator on a dense density matrix.
#[derive(Clone, Debug)]
pub struct Generator {
    scheme: LevelScheme,
    basis: Arc<OccupationBasis>,
    channels: Vec<Channel>,
    /// Jump operators of all channels, flattened.
    ops: Vec<LadderOp>,
    /// Offset of each channel's operators in `ops`.
    channel_offsets: Vec<usize>,
    terms: Vec<JumpTerm>,
    /// Rows of `K = sum G_lm/2 L_m^+ L_l`, which is real symmetric.
    k_rows: Vec<Vec<(usize, f64)>>,
    energies: Vec<f64>,
    excitations: Vec<usize>,
}

impl Generator {
    pub fn new(scheme: &LevelScheme, atoms: usize) -> Result<Self> {
        scheme.validate()?;
        let basis = Arc::new(OccupationBasis::new(atoms, scheme.num_levels())?);
        let channels = scheme.channels();
        let mut ops = Vec::new();
        let mut channel_offsets = Vec::new();
        let mut terms = Vec::new();
        for ch in &channels {
            let off = ops.len();
            channel_offsets.push(off);
            for tr in &ch.transitions {
                ops.push(LadderOp::lowering(&basis, tr.source, tr.target)?);
            }
            for (l, row) in ch.rates.iter().enumerate() {
                for (m, &rate) in row.iter().enumerate() {
                    if rate != 0.0 {
                        terms.push(JumpTerm {
                            l: off + l,
                            m: off + m,
                            rate,
                        });
                    }
                }
            }
        }

        let d = basis.len();
        let mut k: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); d];
        for t in &terms {
            // (L_m^+ L_l)_{ab}: b -> c under L_l, then c -> a under L_m^+.
            for b in 0..d {
                if let Some((c, al)) = ops[t.l].image(b) {
                    if let Some((a, am)) = ops[t.m].preimage(c) {
                        *k[a].entry(b).or_insert(0.0) += 0.5 * t.rate * al * am;
                    }
                }
            }
        }
        let k_rows = k
            .into_iter()
            .map(|row| row.into_iter().filter(|(_, v)| *v != 0.0).collect())
            .collect();

        let level_e = scheme.level_energies();
        let energies = basis
            .states()
            .map(|s| s.iter().zip(&level_e).map(|(&n, e)| n as f64 * e).sum())
            .collect();
        let excitations = basis.excitation_numbers(scheme);

        Ok(Generator {
            scheme: scheme.clone(),
            basis,
            channels,
            ops,
            channel_offsets,
            terms,
            k_rows,
            energies,
            excitations,
        })
    }

    pub fn scheme(&self) -> &LevelScheme {
        &self.scheme
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn atoms(&self) -> usize {
        self.basis.atoms()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Jump operator `l` of channel `c`.
    pub fn jump_operator(&self, c: usize, l: usize) -> &LadderOp {
        &self.ops[self.channel_offsets[c] + l]
    }

    /// Free energy of each basis state.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn excitations(&self) -> &[usize] {
        &self.excitations
    }

    /// `d rho/dt` including the free-evolution phases.
    pub fn rhs(&self, rho: &DensityTensor) -> Result<DensityTensor> {
        self.check_dim(&rho.data)?;
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        self.apply(&rho.data, &mut out, None, true);
        DensityTensor::new(self.basis.clone(), out)
    }

    /// Dense superoperator matrix acting on column-stacked `rho`.
    pub fn superoperator(&self, with_phase: bool) -> DMatrix<C64> {
        let d = self.dim();
        let mut s = DMatrix::zeros(d * d, d * d);
        let mut e = DMatrix::zeros(d, d);
        let mut out = DMatrix::zeros(d, d);
        for col in 0..d * d {
            e.fill(C64::new(0.0, 0.0));
            e[col] = C64::new(1.0, 0.0);
            self.apply(&e, &mut out, None, with_phase);
            s.set_column(col, &nalgebra::DVector::from_column_slice(out.as_slice()));
        }
        s
    }

    pub(crate) fn check_dim(&self, m: &DMatrix<C64>) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: m.nrows(),
            });
        }
        Ok(())
    }

    /// Writes `d rho/dt` into `out` for the listed `(row, col)` pairs, or all
    /// entries when `pairs` is `None`. Unlisted entries of `out` are left as is.
    pub(crate) fn apply(
        &self,
        rho: &DMatrix<C64>,
        out: &mut DMatrix<C64>,
        pairs: Option<&[(u32, u32)]>,
        with_phase: bool,
    ) {
        let d = self.dim();
        let entry = |i: usize, j: usize| {
            let mut acc = C64::new(0.0, 0.0);
            if with_phase {
                let w = self.energies[i] - self.energies[j];
                acc += C64::new(0.0, -w) * rho[(i, j)];
            }
            for &(k, v) in &self.k_rows[i] {
                acc -= rho[(k, j)] * v;
            }
            for &(k, v) in &self.k_rows[j] {
                acc -= rho[(i, k)] * v;
            }
            for t in &self.terms {
                if let (Some((a, al)), Some((b, am))) =
                    (self.ops[t.l].preimage(i), self.ops[t.m].preimage(j))
                {
                    acc += rho[(a, b)] * (t.rate * al * am);
                }
            }
            acc
        };
        match pairs {
            Some(list) => {
                for &(i, j) in list {
                    let v = entry(i as usize, j as usize);
                    out[(i as usize, j as usize)] = v;
                }
            }
            None => {
                for j in 0..d {
                    for i in 0..d {
                        let v = entry(i, j);
                        out[(i, j)] = v;
                    }
                }
            }
        }
    }
}
