use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{Generator, Trajectory};
use crate::basis::DensityTensor;
use crate::{Error, Result, C64};

/// Named columns sampled on a common time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `columns[c][s]` is column `c` at sample `s`.
    pub columns: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        let columns = vec![Vec::new(); names.len()];
        TimeSeries {
            names,
            times: Vec::new(),
            columns,
        }
    }

    pub fn push(&mut self, t: f64, row: &[f64]) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the column count"
        );
        self.times.push(t);
        for (c, v) in self.columns.iter_mut().zip(row) {
            c.push(*v);
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let k = self.names.iter().position(|n| n == name)?;
        Some(&self.columns[k])
    }
}

/// One `(l, m)` contribution `2 w G_lm <L_l^+ L_m>` of a multi-operator channel.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityTerm {
    pub label: String,
    pub channel: usize,
    pub l: usize,
    pub m: usize,
}

/// Emitted intensities `I_c = 2 w_c sum_lm G_lm <L_l^+ L_m>`, in units of
/// `I0 = 2 w_ref G_ref`.
#[derive(Clone, Debug)]
pub struct IntensityModel<'a> {
    gen: &'a Generator,
    i0: f64,
}

impl<'a> IntensityModel<'a> {
    pub fn new(gen: &'a Generator) -> Self {
        let (w, g) = gen.scheme().reference();
        Self::with_reference(gen, w, g)
    }

    pub fn with_reference(gen: &'a Generator, omega_ref: f64, gamma_ref: f64) -> Self {
        IntensityModel {
            gen,
            i0: 2.0 * omega_ref * gamma_ref,
        }
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.gen
            .channels()
            .iter()
            .map(|c| format!("I_{}", c.name))
            .collect()
    }

    /// Direct and cross terms of channels with more than one operator.
    pub fn terms(&self) -> Vec<IntensityTerm> {
        let mut out = Vec::new();
        for (c, ch) in self.gen.channels().iter().enumerate() {
            let k = ch.transitions.len();
            if k < 2 {
                continue;
            }
            for l in 0..k {
                for m in 0..k {
                    let kind = if l == m { "I" } else { "C" };
                    out.push(IntensityTerm {
                        label: format!("{kind}_{}_{}{}", ch.name, l + 1, m + 1),
                        channel: c,
                        l,
                        m,
                    });
                }
            }
        }
        out
    }

    /// `<L_l^+ L_m>` for operators `l`, `m` of channel `c`.
    pub fn correlator(&self, rho: &DensityTensor, c: usize, l: usize, m: usize) -> C64 {
        // Tr(rho L_l^+ L_m) = sum_i (L_m rho L_l^+)_{ii}
        let lo = self.gen.jump_operator(c, l);
        let mo = self.gen.jump_operator(c, m);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.gen.dim() {
            if let (Some((a, am)), Some((b, al))) = (mo.preimage(i), lo.preimage(i)) {
                acc += rho.data[(a, b)] * (am * al);
            }
        }
        acc
    }

    pub fn term_value(&self, rho: &DensityTensor, term: &IntensityTerm) -> C64 {
        let ch = &self.gen.channels()[term.channel];
        self.correlator(rho, term.channel, term.l, term.m)
            * (2.0 * ch.omega * ch.rates[term.l][term.m] / self.i0)
    }

    pub fn channel_intensities(&self, rho: &DensityTensor) -> Vec<f64> {
        self.gen
            .channels()
            .iter()
            .enumerate()
            .map(|(c, ch)| {
                let k = ch.transitions.len();
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..k {
                    for m in 0..k {
                        if ch.rates[l][m] != 0.0 {
                            acc += self.correlator(rho, c, l, m) * ch.rates[l][m];
                        }
                    }
                }
                2.0 * ch.omega * acc.re / self.i0
            })
            .collect()
    }

    /// Channel totals followed by the real parts of the individual terms.
    pub fn column_names(&self) -> Vec<String> {
        let mut n = self.channel_names();
        n.extend(self.terms().into_iter().map(|t| t.label));
        n
    }

    pub fn row(&self, rho: &DensityTensor) -> Vec<f64> {
        let mut r = self.channel_intensities(rho);
        r.extend(self.terms().iter().map(|t| self.term_value(rho, t).re));
        r
    }

    /// Free energy `Tr(H0 rho)`, in the frequency unit.
    pub fn energy(&self, rho: &DensityTensor) -> f64 {
        self.gen
            .energies()
            .iter()
            .enumerate()
            .map(|(i, e)| e * rho.data[(i, i)].re)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub time: f64,
    pub value: f64,
    /// False when the maximum sits on the first sample (no superradiant burst).
    pub interior: bool,
}

/// Global maximum with parabolic refinement through its neighbours.
///
/// A maximum on the first sample is returned as is; one on the last sample
/// means the series is still rising and is reported as an error.
pub fn detect_peak(times: &[f64], values: &[f64]) -> Result<Peak> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::InvalidArgument(
            "peak detection needs at least three samples with matching times".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite sample".into()));
    }
    let k = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    let n = values.len();
    if k == n - 1 {
        return Err(Error::NoPeak(
            "maximum at the last sample; series still rising".into(),
        ));
    }
    if k == 0 {
        return Ok(Peak {
            time: times[0],
            value: values[0],
            interior: false,
        });
    }
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    let curv = y0 - 2.0 * y1 + y2;
    let dt = 0.5 * (times[k + 1] - times[k - 1]);
    if curv >= 0.0 {
        return Ok(Peak {
            time: times[k],
            value: y1,
            interior: true,
        });
    }
    let off = 0.5 * (y0 - y2) / curv;
    Ok(Peak {
        time: times[k] + off * dt,
        value: y1 - 0.25 * (y0 - y2) * off,
        interior: true,
    })
}

/// Largest modulus among elements with an excited occupation on either side.
pub fn excited_magnitude(gen: &Generator, rho: &DensityTensor) -> f64 {
    let exc = gen.excitations();
    let d = gen.dim();
    let mut w = 0.0f64;
    for j in 0..d {
        for i in 0..d {
            if exc[i] > 0 || exc[j] > 0 {
                w = w.max(rho.data[(i, j)].norm());
            }
        }
    }
    w
}

/// Earliest sample time after which `magnitudes` stays below `threshold`.
pub fn settled_time(times: &[f64], magnitudes: &[f64], threshold: f64) -> Option<f64> {
    let mut start = None;
    for k in (0..magnitudes.len()).rev() {
        if magnitudes[k] < threshold {
            start = Some(k);
        } else {
            break;
        }
    }
    start.map(|k| times[k])
}

/// Earliest sample time after which every element involving an excited
/// occupation (on either side) stays below `threshold` in modulus.
pub fn steady_state_time(traj: &Trajectory, gen: &Generator, threshold: f64) -> Option<f64> {
    let worst: Vec<f64> = traj
        .states
        .iter()
        .map(|rho| excited_magnitude(gen, rho))
        .collect();
    settled_time(&traj.times, &worst, threshold)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    /// Angular frequency `w` of a component `exp(i w t)`.
    pub omega: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub bin_width: f64,
    /// Local maxima above 5% of the strongest, strongest first.
    pub peaks: Vec<SpectralPeak>,
}

/// Hann-windowed DFT of uniformly sampled complex data.
pub fn spectrum(times: &[f64], samples: &[C64]) -> Result<Spectrum> {
    let n = samples.len();
    if n < 8 || times.len() != n {
        return Err(Error::WindowTooShort(format!("{n} samples")));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0)
        || times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0))
    {
        return Err(Error::InvalidArgument(
            "samples must be uniformly spaced".into(),
        ));
    }
    let mut buf: Vec<C64> = samples
        .iter()
        .enumerate()
        .map(|(k, x)| x * (0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let amp: Vec<f64> = buf.iter().map(|x| 2.0 * x.norm() / n as f64).collect();
    let bin_width = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let top = amp.iter().copied().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    if top > 1e-14 {
        for k in 0..n {
            let (l, r) = (amp[(k + n - 1) % n], amp[(k + 1) % n]);
            if amp[k] >= 0.05 * top && amp[k] >= l && amp[k] > r {
                let signed = if k <= n / 2 {
                    k as f64
                } else {
                    k as f64 - n as f64
                };
                // DFT bin k picks up exp(+2 pi i k t / T).
                let curv = l - 2.0 * amp[k] + r;
                let off = if curv < 0.0 {
                    0.5 * (l - r) / curv
                } else {
                    0.0
                };
                peaks.push(SpectralPeak {
                    omega: (signed + off) * bin_width,
                    amplitude: amp[k],
                });
            }
        }
    }
    peaks.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    Ok(Spectrum { bin_width, peaks })
}

/// Spectra of the listed `(row, col)` elements over samples in `window`.
pub fn coherence_spectrum(
    traj: &Trajectory,
    entries: &[(usize, usize)],
    window: (f64, f64),
) -> Result<Vec<Spectrum>> {
    let idx: Vec<usize> = (0..traj.times.len())
        .filter(|&k| traj.times[k] >= window.0 - 1e-12 && traj.times[k] <= window.1 + 1e-12)
        .collect();
    let times: Vec<f64> = idx.iter().map(|&k| traj.times[k]).collect();
    entries
        .iter()
        .map(|&(i, j)| {
            let s: Vec<C64> = idx.iter().map(|&k| traj.states[k].data[(i, j)]).collect();
            spectrum(&times, &s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_of_t_exp_minus_t() {
        let times: Vec<f64> = (0..=5000).map(|k| k as f64 * 0.001).collect();
        let vals: Vec<f64> = times.iter().map(|t| t * (-t).exp()).collect();
        let p = detect_peak(&times, &vals).unwrap();
        assert!((p.time - 1.0).abs() < 1e-5);
        assert!(p.interior);
    }

    #[test]
    fn rising_series_has_no_peak() {
        let times: Vec<f64> = (0..10).map(|k| k as f64).collect();
        assert!(matches!(detect_peak(&times, &times), Err(Error::NoPeak(_))));
    }

    #[test]
    fn decaying_series_peaks_at_origin() {
        let times: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let vals: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        let p = detect_peak(&times, &vals).unwrap();
        assert_eq!(p.time, 0.0);
        assert!(!p.interior);
    }

    #[test]
    fn spectrum_finds_single_tone() {
        let n = 1000;
        let dt = 0.05;
        let w = 1.3;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let s: Vec<C64> = times.iter().map(|t| C64::from_polar(0.2, -w * t)).collect();
        let sp = spectrum(&times, &s).unwrap();
        assert!((sp.peaks[0].omega + w).abs() < sp.bin_width);
        assert!(spectrum(&times[..4], &s[..4]).is_err());
    }
}
