//! Parity-form multimode Wigner functions on finite Fock support.
//!
//! `W(xi) = (2/pi)^M sum (-1)^{|m|} rho_{mn} prod_k <n_k|D(2 xi_k)|m_k>`,
//! with `xi_k = X_k + i P_k` and `rho_{mn} = <m|rho|n>`. The sum runs over the
//! support of `rho` only, so no Fock truncation is involved.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{factorial, DensityTensor, OccupationBasis};
use crate::entanglement::{partial_trace, Factorization};
use crate::photonic::Mixture;
use crate::{Error, Result, C64};

/// Density matrix with an explicit occupation vector for every row.
#[derive(Clone, Debug, PartialEq)]
pub struct FockDensity {
    pub labels: Vec<String>,
    pub occupations: Vec<Vec<usize>>,
    pub matrix: DMatrix<C64>,
}

impl FockDensity {
    pub fn new(
        labels: Vec<String>,
        occupations: Vec<Vec<usize>>,
        matrix: DMatrix<C64>,
    ) -> Result<Self> {
        if occupations.len() != matrix.nrows() || matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: occupations.len(),
                got: matrix.nrows(),
            });
        }
        if occupations.iter().any(|o| o.len() != labels.len()) {
            return Err(Error::InvalidArgument(
                "occupation vectors must have one entry per mode".into(),
            ));
        }
        Ok(FockDensity {
            labels,
            occupations,
            matrix,
        })
    }

    pub fn from_basis(
        basis: &OccupationBasis,
        matrix: DMatrix<C64>,
        labels: Vec<String>,
    ) -> Result<Self> {
        Self::new(labels, basis.occupation_table(), matrix)
    }

    pub fn from_mixture(mix: &Mixture) -> Result<Self> {
        Self::from_basis(mix.basis(), mix.density_matrix(), mix.modes().to_vec())
    }

    pub fn from_tensor(rho: &DensityTensor, labels: Vec<String>) -> Result<Self> {
        Self::from_basis(&rho.basis, rho.data.clone(), labels)
    }

    /// Matrix on a product space whose digit `k` is the photon number of mode `k`.
    pub fn from_product(matrix: DMatrix<C64>, f: &Factorization) -> Result<Self> {
        let occ = (0..f.total()).map(|i| f.digits(i)).collect();
        Self::new(f.labels.clone(), occ, matrix)
    }

    pub fn modes(&self) -> usize {
        self.labels.len()
    }

    fn max_occupation(&self) -> usize {
        self.occupations
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Reduced single-mode state of mode `k`.
    pub fn reduced(&self, k: usize) -> Result<FockDensity> {
        let levels = self.max_occupation() + 1;
        let m = self.modes();
        let f = Factorization::new(vec![levels; m], self.labels.clone())?;
        let mut full = DMatrix::zeros(f.total(), f.total());
        let idx: Vec<usize> = self.occupations.iter().map(|o| f.index(o)).collect();
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                full[(i, j)] += self.matrix[(a, b)];
            }
        }
        let traced: Vec<usize> = (0..m).filter(|&x| x != k).collect();
        let (red, rf) = partial_trace(&full, &f, &traced)?;
        Self::from_product(red, &rf)
    }
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` by the three-term recurrence.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `<m|D(xi)|n>` for the displacement operator `D(xi) = exp(xi a^+ - xi* a)`.
pub fn displacement_element(m: usize, n: usize, xi: C64) -> C64 {
    let x = xi.norm_sqr();
    if m >= n {
        let pref = (factorial(n) / factorial(m)).sqrt()
            * (-x / 2.0).exp()
            * laguerre(n, (m - n) as f64, x);
        xi.powu((m - n) as u32) * pref
    } else {
        // D(xi) = D^+(-xi)
        displacement_element(n, m, -xi).conj()
    }
}

/// `(2/pi)^M Tr(rho (-1)^N)`, the value at the phase-space origin.
pub fn parity_value(rho: &FockDensity) -> f64 {
    let p: f64 = rho
        .occupations
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let s = if o.iter().sum::<usize>() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            s * rho.matrix[(i, i)].re
        })
        .sum();
    (2.0 / PI).powi(rho.modes() as i32) * p
}

/// Wigner function at one phase-space point (one complex coordinate per mode).
pub fn wigner_value(rho: &FockDensity, point: &[C64]) -> Result<f64> {
    let m = rho.modes();
    if point.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: point.len(),
        });
    }
    let top = rho.max_occupation() + 1;
    // tables[k][(n, m)] = <n|D(2 xi_k)|m>
    let tables: Vec<DMatrix<C64>> = point
        .iter()
        .map(|&xi| DMatrix::from_fn(top, top, |a, b| displacement_element(a, b, 2.0 * xi)))
        .collect();
    let mut acc = C64::new(0.0, 0.0);
    for (a, ma) in rho.occupations.iter().enumerate() {
        let sign = if ma.iter().sum::<usize>() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        for (b, nb) in rho.occupations.iter().enumerate() {
            let r = rho.matrix[(a, b)];
            if r == C64::new(0.0, 0.0) {
                continue;
            }
            let mut t = r * sign;
            for k in 0..m {
                t *= tables[k][(nb[k], ma[k])];
            }
            acc += t;
        }
    }
    let w = acc * (2.0 / PI).powi(m as i32);
    if w.im.abs() > 1e-10 * w.re.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "Wigner value has imaginary part {:e}; density matrix not Hermitian",
            w.im
        )));
    }
    Ok(w.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    P,
}

/// One real phase-space coordinate: a quadrature of a mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coordinate {
    pub mode: usize,
    pub quadrature: Quadrature,
}

impl Coordinate {
    pub fn x(mode: usize) -> Self {
        Coordinate {
            mode,
            quadrature: Quadrature::X,
        }
    }

    pub fn p(mode: usize) -> Self {
        Coordinate {
            mode,
            quadrature: Quadrature::P,
        }
    }

    fn set(&self, point: &mut [C64], v: f64) {
        let z = &mut point[self.mode];
        match self.quadrature {
            Quadrature::X => z.re = v,
            Quadrature::P => z.im = v,
        }
    }

    pub fn name(&self, labels: &[String]) -> String {
        let q = match self.quadrature {
            Quadrature::X => "X",
            Quadrature::P => "P",
        };
        format!("{q}_{}", labels.get(self.mode).map_or("?", |s| s.as_str()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            lo: -3.0,
            hi: 3.0,
            points: 81,
        }
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.lo + h * k as f64).collect()
    }
}

/// Wigner values on a 2D grid; `values[i][j]` is at `(xs[i], ys[j])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerSlice {
    pub first: Coordinate,
    pub second: Coordinate,
    pub base: Vec<C64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Evaluates `W` over `first x second`, other coordinates fixed at `base`
/// (origin if `None`).
pub fn wigner_slice(
    rho: &FockDensity,
    first: Coordinate,
    second: Coordinate,
    grid: Grid,
    base: Option<&[C64]>,
) -> Result<WignerSlice> {
    if grid.points == 0 {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let m = rho.modes();
    if first.mode >= m || second.mode >= m {
        return Err(Error::InvalidArgument(
            "slice coordinate refers to a missing mode".into(),
        ));
    }
    if first == second {
        return Err(Error::InvalidArgument(
            "slice coordinates must differ".into(),
        ));
    }
    let base = base.map_or_else(|| vec![C64::new(0.0, 0.0); m], |b| b.to_vec());
    if base.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: base.len(),
        });
    }
    let xs = grid.values();
    let ys = grid.values();
    let values = xs
        .par_iter()
        .map(|&x| {
            ys.iter()
                .map(|&y| {
                    let mut p = base.clone();
                    first.set(&mut p, x);
                    second.set(&mut p, y);
                    wigner_value(rho, &p)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WignerSlice {
        first,
        second,
        base,
        xs,
        ys,
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Factors,
    DoesNotFactor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// Whole state against the product of its single-mode marginals.
    pub verdict: Verdict,
    pub max_deviation: f64,
    /// Per mixture component, each against its own marginals.
    pub component_deviations: Vec<f64>,
    /// Every component factors and the weighted sum reproduces the whole.
    pub sum_of_products: bool,
}

/// Compares the `first x second` slice with the product of single-mode
/// Wigner functions of the reduced states, each evaluated at the slice's
/// coordinates for that mode.
pub fn separability_probe(
    components: &[(f64, FockDensity)],
    first: Coordinate,
    second: Coordinate,
    grid: Grid,
    tol: f64,
) -> Result<ProbeReport> {
    let Some((_, head)) = components.first() else {
        return Err(Error::InvalidArgument("no components to probe".into()));
    };
    let mut total = head.matrix.clone() * C64::new(0.0, 0.0);
    for (p, c) in components {
        if c.occupations != head.occupations {
            return Err(Error::InvalidArgument(
                "components must share one occupation basis".into(),
            ));
        }
        total += &c.matrix * C64::new(*p, 0.0);
    }
    let whole = FockDensity::new(head.labels.clone(), head.occupations.clone(), total)?;

    let (total_slice, total_dev) = factor_deviation(&whole, first, second, grid)?;
    let mut component_deviations = Vec::new();
    let mut summed = vec![vec![0.0; grid.points]; grid.points];
    for (p, c) in components {
        let (s, dev) = factor_deviation(c, first, second, grid)?;
        component_deviations.push(p * dev);
        for (row, srow) in summed.iter_mut().zip(&s.values) {
            for (v, w) in row.iter_mut().zip(srow) {
                *v += p * w;
            }
        }
    }
    let sum_dev = max_diff(&summed, &total_slice.values);
    Ok(ProbeReport {
        verdict: if total_dev <= tol {
            Verdict::Factors
        } else {
            Verdict::DoesNotFactor
        },
        max_deviation: total_dev,
        sum_of_products: sum_dev <= tol && component_deviations.iter().all(|&d| d <= tol),
        component_deviations,
    })
}

fn factor_deviation(
    rho: &FockDensity,
    first: Coordinate,
    second: Coordinate,
    grid: Grid,
) -> Result<(WignerSlice, f64)> {
    let slice = wigner_slice(rho, first, second, grid, None)?;
    let m = rho.modes();
    let marginals: Vec<FockDensity> = (0..m).map(|k| rho.reduced(k)).collect::<Result<_>>()?;
    let zero = C64::new(0.0, 0.0);
    let single = |k: usize, z: C64| wigner_value(&marginals[k], &[z]);
    let mut worst = 0.0f64;
    for (i, &x) in slice.xs.iter().enumerate() {
        for (j, &y) in slice.ys.iter().enumerate() {
            let mut p = vec![zero; m];
            first.set(&mut p, x);
            second.set(&mut p, y);
            let mut prod = 1.0;
            for (k, &z) in p.iter().enumerate() {
                prod *= single(k, z)?;
            }
            worst = worst.max((prod - slice.values[i][j]).abs());
        }
    }
    Ok((slice, worst))
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
