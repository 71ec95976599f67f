//! Least-squares fits of `beta * N^alpha + c` to peak intensities.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub beta: f64,
    pub alpha: f64,
    pub c: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.beta * n.powf(self.alpha) + self.c
    }
}

fn residuals(points: &[(f64, f64)], p: &Vector3<f64>) -> Vec<f64> {
    points
        .iter()
        .map(|&(n, i)| p[0] * n.powf(p[1]) + p[2] - i)
        .collect()
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn normal_equations(
    points: &[(f64, f64)],
    p: &Vector3<f64>,
    r: &[f64],
) -> (Matrix3<f64>, Vector3<f64>) {
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for (&(n, _), &ri) in points.iter().zip(r) {
        let na = n.powf(p[1]);
        let row = Vector3::new(na, p[0] * na * n.ln(), 1.0);
        jtj += row * row.transpose();
        jtr += row * ri;
    }
    (jtj, jtr)
}

/// Gradient norm in units of the Jacobian column norms; scales by `k` when
/// the intensities do.
fn scaled_gradient(jtj: &Matrix3<f64>, jtr: &Vector3<f64>) -> f64 {
    (0..3)
        .map(|d| (jtr[d] / jtj[(d, d)].sqrt().max(1e-300)).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn initial_guess(points: &[(f64, f64)]) -> Vector3<f64> {
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let c0 = if lo > 0.0 {
        0.9 * lo
    } else {
        lo - 0.1 * (hi - lo)
    };
    // log(I - c0) = log beta + alpha log N; drop points that touch c0
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 - c0 > 0.0)
        .map(|&(n, i)| (n.ln(), (i - c0).ln()))
        .collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = if sxx > 0.0 { sxy / sxx } else { 1.0 };
    Vector3::new((my - alpha * mx).exp(), alpha, c0)
}

/// Levenberg-Marquardt with diagonal (Marquardt) scaling. Deterministic:
/// fixed initialization, damping schedule and iteration cap.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    for (k, &(n, i)) in points.iter().enumerate() {
        if !(n > 0.0) || !n.is_finite() || !i.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "point {k} = ({n}, {i}) is not usable"
            )));
        }
        if points[..k].iter().any(|p| p.0 == n) {
            return Err(Error::InvalidArgument(format!("repeated N = {n}")));
        }
    }
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::Unidentifiable(
            "all intensities are equal; the exponent is not identifiable".into(),
        ));
    }

    let mut p = initial_guess(points);
    let mut r = residuals(points, &p);
    let mut f = cost(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(points, &p, &r);
        if jtr.amax() == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for d in 0..3 {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&-jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let rt = residuals(points, &trial);
            let ft = cost(&rt);
            if ft.is_finite() && ft <= f {
                let small = step[0].abs() <= 1e-14 * trial[0].abs().max(1e-300)
                    && step[1].abs() <= 1e-14 * trial[1].abs().max(1.0)
                    && step[2].abs() <= 1e-14 * (trial[2].abs() + trial[0].abs());
                let stalled = f - ft <= 1e-30 * f.max(1e-300);
                p = trial;
                r = rt;
                f = ft;
                lambda = (lambda * 0.5).max(1e-12);
                accepted = true;
                if small || stalled {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || converged {
            // an unimprovable point is a local minimum to working precision
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::FitDidNotConverge { iterations });
    }
    // Near the minimum cost differences drown in rounding; finish with plain
    // Gauss-Newton steps while the gradient keeps shrinking.
    for _ in 0..10 {
        let (jtj, jtr) = normal_equations(points, &p, &r);
        let Some(step) = jtj.lu().solve(&-jtr) else {
            break;
        };
        let trial = p + step;
        let rt = residuals(points, &trial);
        let (jt2, jr2) = normal_equations(points, &trial, &rt);
        if !(scaled_gradient(&jt2, &jr2) < scaled_gradient(&jtj, &jtr)) {
            break;
        }
        p = trial;
        r = rt;
        f = cost(&r);
    }
    Ok(ScalingFit {
        beta: p[0],
        alpha: p[1],
        c: p[2],
        residual_rms: (f / points.len() as f64).sqrt(),
        iterations,
        points: points.to_vec(),
    })
}
