//! Partial traces, partial transposes and entropic entanglement measures.
//!
//! Matrices live on a tensor product described by a [`Factorization`]; the
//! first subsystem is the most significant digit of the row/column index.
//! Fixed-particle-number states are embedded into the product of per-mode
//! Fock spaces `{0..=N}` with [`embed_fock`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{DensityTensor, LevelScheme, OccupationBasis};
use crate::linalg::hermitian_eigenvalues;
use crate::{Error, Result, C64};

/// Eigenvalues below this are treated as zero in entropies.
pub const ZERO_EIGENVALUE: f64 = 1e-12;
/// Eigenvalues in `[-NEGATIVE_TOL, 0)` are clipped; anything lower is an error.
pub const NEGATIVE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
}

impl Factorization {
    pub fn new(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if dims.len() != labels.len() || dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "factorization needs one positive dimension per label".into(),
            ));
        }
        Ok(Factorization { dims, labels })
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut d = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            d[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        d
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (x, d)| acc * d + x)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn check(&self, rho: &DMatrix<C64>, subsystems: &[usize]) -> Result<()> {
        if rho.nrows() != self.total() || rho.ncols() != self.total() {
            return Err(Error::DimensionMismatch {
                expected: self.total(),
                got: rho.nrows(),
            });
        }
        if let Some(&bad) = subsystems.iter().find(|&&s| s >= self.dims.len()) {
            return Err(Error::InvalidArgument(format!(
                "subsystem {bad} out of range"
            )));
        }
        Ok(())
    }
}

/// Embeds a matrix given on explicit occupation vectors into the product of
/// per-mode spaces of dimension `levels`.
pub fn embed_fock(
    occupations: &[Vec<usize>],
    rho: &DMatrix<C64>,
    levels: usize,
    labels: Vec<String>,
) -> Result<(DMatrix<C64>, Factorization)> {
    if occupations.len() != rho.nrows() || rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: occupations.len(),
            got: rho.nrows(),
        });
    }
    let f = Factorization::new(vec![levels; labels.len()], labels)?;
    let idx: Vec<usize> = occupations
        .iter()
        .map(|o| {
            if o.len() != f.dims.len() || o.iter().any(|&n| n >= levels) {
                Err(Error::InvalidArgument(format!(
                    "occupation {o:?} does not fit the product space"
                )))
            } else {
                Ok(f.index(o))
            }
        })
        .collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(f.total(), f.total());
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out[(i, j)] = rho[(a, b)];
        }
    }
    Ok((out, f))
}

/// Embeds a matrix on a fixed-number occupation basis into `prod (N+1)`.
pub fn embed_basis(
    basis: &OccupationBasis,
    rho: &DMatrix<C64>,
    labels: Vec<String>,
) -> Result<(DMatrix<C64>, Factorization)> {
    embed_fock(&basis.occupation_table(), rho, basis.atoms() + 1, labels)
}

/// Block of an atomic density matrix on states with every atom in a ground
/// level, returned with the ground-level occupations of each row.
pub fn atomic_ground_block(
    rho: &DensityTensor,
    scheme: &LevelScheme,
) -> (Vec<Vec<usize>>, DMatrix<C64>) {
    let ground: Vec<usize> = (0..scheme.num_levels())
        .filter(|&l| !scheme.is_excited(l))
        .collect();
    let rows: Vec<usize> = (0..rho.basis.len())
        .filter(|&i| {
            let s = rho.basis.state(i);
            (0..s.len()).all(|l| !scheme.is_excited(l) || s[l] == 0)
        })
        .collect();
    let occ = rows
        .iter()
        .map(|&i| {
            ground
                .iter()
                .map(|&l| rho.basis.state(i)[l] as usize)
                .collect()
        })
        .collect();
    let block = DMatrix::from_fn(rows.len(), rows.len(), |a, b| rho.data[(rows[a], rows[b])]);
    (occ, block)
}

/// Traces out the listed subsystems.
pub fn partial_trace(
    rho: &DMatrix<C64>,
    f: &Factorization,
    traced: &[usize],
) -> Result<(DMatrix<C64>, Factorization)> {
    f.check(rho, traced)?;
    let keep: Vec<usize> = (0..f.dims.len()).filter(|k| !traced.contains(k)).collect();
    let out_f = Factorization {
        dims: keep.iter().map(|&k| f.dims[k]).collect(),
        labels: keep.iter().map(|&k| f.labels[k].clone()).collect(),
    };
    let n = f.total();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| f.digits(i)).collect();
    let reduced: Vec<usize> = digits
        .iter()
        .map(|d| out_f.index(&keep.iter().map(|&k| d[k]).collect::<Vec<_>>()))
        .collect();
    let mut out = DMatrix::zeros(out_f.total(), out_f.total());
    for j in 0..n {
        for i in 0..n {
            let v = rho[(i, j)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            if traced.iter().all(|&k| digits[i][k] == digits[j][k]) {
                out[(reduced[i], reduced[j])] += v;
            }
        }
    }
    Ok((out, out_f))
}

/// Transposes the listed subsystems.
pub fn partial_transpose(
    rho: &DMatrix<C64>,
    f: &Factorization,
    subsystems: &[usize],
) -> Result<DMatrix<C64>> {
    f.check(rho, subsystems)?;
    let n = f.total();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| f.digits(i)).collect();
    let mut out = DMatrix::zeros(n, n);
    let mut a = vec![0; f.dims.len()];
    let mut b = vec![0; f.dims.len()];
    for j in 0..n {
        for i in 0..n {
            a.copy_from_slice(&digits[i]);
            b.copy_from_slice(&digits[j]);
            for &k in subsystems {
                std::mem::swap(&mut a[k], &mut b[k]);
            }
            out[(f.index(&a), f.index(&b))] = rho[(i, j)];
        }
    }
    Ok(out)
}

/// `(||rho^{T_A}||_1 - Tr rho) / 2`, the sum of |negative eigenvalues|.
pub fn negativity(rho: &DMatrix<C64>, f: &Factorization, subsystems: &[usize]) -> Result<f64> {
    let pt = partial_transpose(rho, f, subsystems)?;
    let ev = hermitian_eigenvalues(&pt);
    let norm1: f64 = ev.iter().map(|x| x.abs()).sum();
    Ok(((norm1 - rho.trace().re) / 2.0).max(0.0))
}

/// Smallest eigenvalue of the partial transpose.
pub fn peres_min_eigenvalue(
    rho: &DMatrix<C64>,
    f: &Factorization,
    subsystems: &[usize],
) -> Result<f64> {
    let pt = partial_transpose(rho, f, subsystems)?;
    Ok(hermitian_eigenvalues(&pt)[0])
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> Result<f64> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            got: rho.ncols(),
        });
    }
    let mut s = 0.0;
    for lam in hermitian_eigenvalues(rho) {
        if lam < -NEGATIVE_TOL {
            return Err(Error::NegativeEigenvalue(lam));
        }
        if lam > ZERO_EIGENVALUE {
            s -= lam * lam.ln();
        }
    }
    Ok(s)
}

/// `S(phi|theta) = S(rho) - S(Tr_phi rho)`, with `phi` the `conditioned`
/// subsystems and `theta` the remainder.
pub fn conditional_entropy(
    rho: &DMatrix<C64>,
    f: &Factorization,
    conditioned: &[usize],
) -> Result<f64> {
    let (rest, _) = partial_trace(rho, f, conditioned)?;
    Ok(von_neumann_entropy(rho)? - von_neumann_entropy(&rest)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> (DMatrix<C64>, Factorization) {
        let h = C64::new(0.5, 0.0);
        let mut rho = DMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            rho[(i, j)] = h;
        }
        (
            rho,
            Factorization::new(vec![2, 2], vec!["a".into(), "b".into()]).unwrap(),
        )
    }

    #[test]
    fn bell_state_measures() {
        let (rho, f) = bell();
        assert!((negativity(&rho, &f, &[1]).unwrap() - 0.5).abs() < 1e-12);
        let (red, _) = partial_trace(&rho, &f, &[1]).unwrap();
        assert!((von_neumann_entropy(&red).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((conditional_entropy(&rho, &f, &[0]).unwrap() + 2f64.ln()).abs() < 1e-12);
        assert!((peres_min_eigenvalue(&rho, &f, &[0]).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn strongly_negative_spectrum_is_an_error() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.1, 0.0);
        m[(1, 1)] = C64::new(-0.1, 0.0);
        assert!(matches!(
            von_neumann_entropy(&m),
            Err(Error::NegativeEigenvalue(_))
        ));
    }

    #[test]
    fn dimension_mismatch_detected() {
        let (rho, _) = bell();
        let f = Factorization::new(vec![3, 2], vec!["a".into(), "b".into()]).unwrap();
        assert!(partial_trace(&rho, &f, &[0]).is_err());
    }
}
