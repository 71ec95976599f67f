//! Factorization of multimode Fock states into single-photon creation factors.
//!
//! Component amplitudes follow the collapsed-basis convention used for the
//! emitted states: the amplitude on occupations `c` is the coefficient of the
//! creation monomial `prod_k (a_k^+)^{c_k}`. With `a_n ~ binomial(N, n)
//! alpha^n beta^(N-n)` this makes the V-ensemble state exactly
//! `(alpha a_1^+ + beta a_2^+)^N`. A component is a product of single-photon
//! factors `prod_i (v_i . a^+)` when its polynomial `P(x) = sum_c psi_c x^c`
//! splits into linear forms.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{FockState, Mixture};
use crate::linalg::{polynomial_roots, polyval};
use crate::{Error, Result, C64};

/// Tolerance for deciding that two factor directions are parallel or orthogonal.
pub const DIRECTION_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFactor {
    /// Unit single-photon mode vector.
    pub direction: Vec<C64>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "classification", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModeIndependence {
    /// Every component is a product of factors from one orthonormal mode set.
    SeparableBasisExists { directions: Vec<Vec<C64>> },
    /// No passive mode transformation makes every component separable.
    ModeIndependentEntangled { witness: Witness },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The component is not a product of single-photon factors at all.
    NonFactorable { component: usize },
    /// Two factor directions are neither parallel nor orthogonal.
    Overlap {
        first: Vec<C64>,
        second: Vec<C64>,
        overlap: f64,
    },
}

/// Classifies a mixture by whether one mode basis separates all components.
pub fn mode_independence_check(mix: &Mixture) -> Result<ModeIndependence> {
    if mix.components.is_empty() {
        return Err(Error::InvalidArgument("empty mixture".into()));
    }
    let mut directions: Vec<Vec<C64>> = Vec::new();
    for (k, comp) in mix.components.iter().enumerate() {
        if comp.state.norm() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "component {k} has zero norm"
            )));
        }
        let Some(factors) = linear_factors(&comp.state) else {
            return Ok(ModeIndependence::ModeIndependentEntangled {
                witness: Witness::NonFactorable { component: k },
            });
        };
        for f in factors {
            if !directions
                .iter()
                .any(|d| 1.0 - overlap(d, &f.direction) < DIRECTION_TOL)
            {
                directions.push(f.direction);
            }
        }
    }
    for i in 0..directions.len() {
        for j in i + 1..directions.len() {
            let o = overlap(&directions[i], &directions[j]);
            if o >= DIRECTION_TOL {
                return Ok(ModeIndependence::ModeIndependentEntangled {
                    witness: Witness::Overlap {
                        first: directions[i].clone(),
                        second: directions[j].clone(),
                        overlap: o,
                    },
                });
            }
        }
    }
    Ok(ModeIndependence::SeparableBasisExists { directions })
}

fn overlap(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<C64>()
        .norm()
}

/// Splits a Fock state into single-photon factors, or `None` if impossible.
pub fn linear_factors(state: &FockState) -> Option<Vec<LinearFactor>> {
    let m = state.modes.len();
    let n = state.photons() as u32;
    let p = Poly::from_state(state);
    if p.max_abs() == 0.0 {
        return None;
    }
    if m == 1 {
        return Some(vec![LinearFactor {
            direction: vec![C64::new(1.0, 0.0)],
            multiplicity: n as usize,
        }]);
    }
    (0..4).find_map(|seed| try_factor(&p, &generic_unitary(m, seed), n))
}

fn try_factor(p: &Poly, u: &DMatrix<C64>, n: u32) -> Option<Vec<LinearFactor>> {
    let m = p.vars;
    let q = p.substitute(u);
    let scale = q.max_abs();
    let mut lead = vec![0u32; m];
    lead[0] = n;
    let c0 = q.coef(&lead);
    if c0.norm() < 1e-8 * scale {
        return None;
    }
    // Restriction to y = (s, 1, 0, ...): prod_i (s + b_i1) up to c0.
    let b: Vec<C64> = (0..=n)
        .map(|j| {
            let mut mono = vec![0u32; m];
            mono[0] = j;
            mono[1] = n - j;
            q.coef(&mono)
        })
        .collect();
    let roots = polynomial_roots(&b);

    for tol in [1e-1, 3e-2, 1e-2, 1e-3, 1e-5] {
        let mut forms = Vec::new();
        for (mean, k) in cluster(&roots, tol) {
            let r = refine_root(&b, mean, k);
            let mut point = vec![C64::new(0.0, 0.0); m];
            point[0] = r;
            point[1] = C64::new(1.0, 0.0);
            let mut alpha = vec![0u32; m];
            alpha[0] = k as u32;
            let pure = q.taylor(&point, &alpha);
            if pure.norm() < 1e-12 * scale {
                forms.clear();
                break;
            }
            let mut w = vec![C64::new(1.0, 0.0); m];
            for (mm, wm) in w.iter_mut().enumerate().skip(1) {
                let mut a = vec![0u32; m];
                a[0] = k as u32 - 1;
                a[mm] = 1;
                *wm = q.taylor(&point, &a) / (pure * k as f64);
            }
            forms.push((w, k));
        }
        if forms.is_empty() {
            continue;
        }
        let mut prod = Poly::constant(m, c0);
        for (w, k) in &forms {
            let l = Poly::linear(w);
            for _ in 0..*k {
                prod = prod.mul(&l);
            }
        }
        if prod.distance(&q) <= RECONSTRUCTION_TOL * scale {
            return Some(
                forms
                    .into_iter()
                    .map(|(w, k)| LinearFactor {
                        direction: back_transform(u, &w),
                        multiplicity: k,
                    })
                    .collect(),
            );
        }
    }
    None
}

/// `P(x) = Q(U^+ x)`, so a factor `w . y` of `Q` is `(conj(U) w) . x`.
fn back_transform(u: &DMatrix<C64>, w: &[C64]) -> Vec<C64> {
    let m = w.len();
    let mut v: Vec<C64> = (0..m)
        .map(|i| (0..m).map(|k| u[(i, k)].conj() * w[k]).sum())
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    for x in &mut v {
        *x *= phase / norm;
        if x.norm() < 1e-14 {
            *x = C64::new(0.0, 0.0);
        }
    }
    v
}

/// Groups nearly coincident roots; returns cluster means and sizes.
fn cluster(roots: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() < tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<C64>> = BTreeMap::new();
    for (i, &z) in roots.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(z);
    }
    groups
        .into_values()
        .map(|g| (g.iter().sum::<C64>() / g.len() as f64, g.len()))
        .collect()
}

/// Newton iterations on the `(k-1)`-th derivative, where a `k`-fold root is simple.
fn refine_root(coeffs: &[C64], start: C64, k: usize) -> C64 {
    let mut d = coeffs.to_vec();
    for _ in 1..k {
        d = derivative(&d);
    }
    let dd = derivative(&d);
    let mut r = start;
    for _ in 0..20 {
        let f = polyval(&d, r);
        let g = polyval(&dd, r);
        if g.norm() == 0.0 {
            break;
        }
        let step = f / g;
        r -= step;
        if step.norm() <= 1e-16 * r.norm().max(1.0) {
            break;
        }
    }
    r
}

fn derivative(c: &[C64]) -> Vec<C64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, x)| x * k as f64)
        .collect()
}

/// Fixed, well-mixed unitary (QR of a low-discrepancy complex matrix).
fn generic_unitary(m: usize, seed: usize) -> DMatrix<C64> {
    const G1: f64 = 0.754_877_666_246_692_8;
    const G2: f64 = 0.569_840_290_998_053_3;
    let a = DMatrix::from_fn(m, m, |i, j| {
        let k = (seed * m * m + i * m + j + 1) as f64;
        C64::new((k * G1).fract() - 0.5, (k * G2).fract() - 0.5)
    });
    a.qr().q()
}

/// Sparse homogeneous polynomial in `vars` variables.
#[derive(Clone, Debug)]
struct Poly {
    vars: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl Poly {
    fn from_state(state: &FockState) -> Self {
        let terms = state
            .basis
            .states()
            .zip(state.amplitudes.iter())
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(c, a)| (c.to_vec(), *a))
            .collect();
        Poly {
            vars: state.modes.len(),
            terms,
        }
    }

    fn constant(vars: usize, c: C64) -> Self {
        Poly {
            vars,
            terms: BTreeMap::from([(vec![0; vars], c)]),
        }
    }

    fn linear(w: &[C64]) -> Self {
        let vars = w.len();
        let terms = w
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, c)| {
                let mut e = vec![0; vars];
                e[k] = 1;
                (e, *c)
            })
            .collect();
        Poly { vars, terms }
    }

    fn coef(&self, mono: &[u32]) -> C64 {
        self.terms.get(mono).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut terms = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                *terms.entry(e).or_insert(C64::new(0.0, 0.0)) += x * y;
            }
        }
        Poly {
            vars: self.vars,
            terms,
        }
    }

    fn distance(&self, other: &Poly) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in &self.terms {
            worst = worst.max((v - other.coef(k)).norm());
        }
        for (k, v) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    /// `Q(y) = P(U y)`.
    fn substitute(&self, u: &DMatrix<C64>) -> Poly {
        let m = self.vars;
        let forms: Vec<Poly> = (0..m)
            .map(|i| Poly::linear(&(0..m).map(|k| u[(i, k)]).collect::<Vec<_>>()))
            .collect();
        let mut out = Poly {
            vars: m,
            terms: BTreeMap::new(),
        };
        for (mono, c) in &self.terms {
            let mut t = Poly::constant(m, *c);
            for (i, &e) in mono.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&forms[i]);
                }
            }
            for (k, v) in t.terms {
                *out.terms.entry(k).or_insert(C64::new(0.0, 0.0)) += v;
            }
        }
        out
    }

    /// Coefficient of `d^alpha` in the expansion of `P(point + d)`.
    fn taylor(&self, point: &[C64], alpha: &[u32]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        'terms: for (mono, c) in &self.terms {
            let mut t = *c;
            for m in 0..self.vars {
                if mono[m] < alpha[m] {
                    continue 'terms;
                }
                let e = mono[m] - alpha[m];
                t *= crate::basis::binomial(mono[m] as usize, alpha[m] as usize) * point[m].powu(e);
            }
            acc += t;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(modes: usize, n: usize, entries: &[(&[u32], C64)]) -> FockState {
        let names = (0..modes).map(|k| format!("m{k}")).collect();
        let map = entries.iter().map(|(o, a)| (o.to_vec(), *a)).collect();
        FockState::new(names, n, &map).unwrap()
    }

    #[test]
    fn product_of_two_modes_factors() {
        // (x + y)(x - y) = x^2 - y^2
        let s = 0.5f64.sqrt();
        let st = state(
            2,
            2,
            &[(&[2, 0], C64::new(s, 0.0)), (&[0, 2], C64::new(-s, 0.0))],
        );
        let f = linear_factors(&st).unwrap();
        assert_eq!(f.len(), 2);
        assert!(overlap(&f[0].direction, &f[1].direction) < 1e-12);
    }

    #[test]
    fn repeated_factor_is_detected() {
        let a = C64::new(0.6, 0.0);
        let b = C64::new(0.0, 0.8);
        // (a x + b y)^3 has monomial coefficients C(3,n) a^n b^(3-n)
        let mut entries = Vec::new();
        let occ: Vec<[u32; 2]> = (0..=3u32).map(|n| [n, 3 - n]).collect();
        for (n, o) in occ.iter().enumerate() {
            let coef = crate::basis::binomial(3, n);
            entries.push((&o[..], a.powu(n as u32) * b.powu(3 - n as u32) * coef));
        }
        let st = state(2, 3, &entries);
        let f = linear_factors(&st).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].multiplicity, 3);
        assert!((overlap(&f[0].direction, &[a, b]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_quadratic_in_three_modes_does_not_factor() {
        let c = C64::new(1.0 / 3f64.sqrt(), 0.0);
        let st = state(3, 2, &[(&[1, 1, 0], c), (&[0, 1, 1], c), (&[1, 0, 1], c)]);
        // x0 x1 + x1 x2 + x0 x2 has a full-rank quadratic form.
        assert!(linear_factors(&st).is_none());
    }
}
