pub mod entanglement;
pub mod photonic;
pub mod scaling;
pub mod simulate;
pub mod wigner;

use nalgebra::DMatrix;
use serde::Serialize;
use superrad_core::basis::DensityTensor;
use superrad_core::C64;

/// Dense complex matrix with the occupations labelling its rows.
#[derive(Serialize)]
pub struct MatrixRecord {
    pub occupations: Vec<Vec<usize>>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixRecord {
    pub fn new(occupations: Vec<Vec<usize>>, m: &DMatrix<C64>) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixRecord {
            occupations,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn from_tensor(rho: &DensityTensor) -> Self {
        let occ = rho
            .basis
            .states()
            .map(|s| s.iter().map(|&x| x as usize).collect())
            .collect();
        Self::new(occ, &rho.data)
    }
}
