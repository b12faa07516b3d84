//! Coupler calibration: chevron swap maps, generalized-Rabi fits, and the
//! amplitude dependence of the coupling and of the qubit frequencies.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

/// `P_10(t) = j^2/(j^2 + delta^2) sin^2(pi sqrt(j^2 + delta^2) t)`.
pub fn swap_population(j: f64, delta: f64, t: f64) -> f64 {
    let omega2 = j * j + delta * delta;
    if omega2 == 0.0 {
        return 0.0;
    }
    j * j / omega2 * (PI * omega2.sqrt() * t).sin().powi(2)
}

/// `|10>` population after a swap attempt, on a detuning x time grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChevronMap {
    /// Modulation frequency at zero detuning (MHz).
    pub resonance: f64,
    /// `f_TC - resonance` (MHz).
    pub detunings: Vec<f64>,
    pub times: Vec<f64>,
    /// `populations[i][k]` at `detunings[i]`, `times[k]`.
    pub populations: Vec<Vec<f64>>,
}

impl ChevronMap {
    pub fn modulation_frequency(&self, i: usize) -> f64 {
        self.resonance + self.detunings[i]
    }
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect()
}

pub fn chevron_map(
    j: f64,
    resonance: f64,
    detuning_range: (f64, f64),
    t_range: (f64, f64),
    grid: (usize, usize),
) -> Result<ChevronMap> {
    if !(j > 0.0 && j.is_finite()) {
        return Err(Error::InvalidArgument(format!("coupling must be positive, got {j}")));
    }
    if grid.0 == 0 || grid.1 == 0 {
        return Err(Error::InvalidArgument("chevron grid must be nonempty".into()));
    }
    let detunings = linspace(detuning_range, grid.0);
    let times = linspace(t_range, grid.1);
    let populations = detunings
        .par_iter()
        .map(|&d| times.iter().map(|&t| swap_population(j, d, t)).collect())
        .collect();
    Ok(ChevronMap { resonance, detunings, times, populations })
}

/// `y(t) ~ offset + (visibility/2) cos(2 pi f t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscillationFit {
    pub frequency: f64,
    /// Peak-to-peak amplitude.
    pub visibility: f64,
    pub offset: f64,
    /// RMS residual.
    pub residual: f64,
}

/// Residual and coefficients of the linear fit `c0 + c1 cos + c2 sin` at a
/// fixed frequency.
fn sinusoid_lsq(times: &[f64], y: &[f64], f: f64) -> (f64, [f64; 3]) {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (&t, &v) in times.iter().zip(y) {
        let (s, c) = (2.0 * PI * f * t).sin_cos();
        let basis = [1.0, c, s];
        for i in 0..3 {
            for k in 0..3 {
                a[i][k] += basis[i] * basis[k];
            }
            b[i] += basis[i] * v;
        }
    }
    let coef = solve_symmetric3(a, b);
    let ss = times
        .iter()
        .zip(y)
        .map(|(&t, &v)| {
            let (s, c) = (2.0 * PI * f * t).sin_cos();
            (coef[0] + coef[1] * c + coef[2] * s - v).powi(2)
        })
        .sum::<f64>();
    (ss, coef)
}

fn solve_symmetric3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &k| a[i][col].abs().total_cmp(&a[k][col].abs())).unwrap_or(col);
        a.swap(col, p);
        b.swap(col, p);
        if a[col][col].abs() < 1e-300 {
            continue;
        }
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = if a[row][row].abs() < 1e-300 { 0.0 } else { (b[row] - s) / a[row][row] };
    }
    x
}

/// Dominant oscillation frequency of a uniformly sampled record.
///
/// A zero-padded FFT peak with parabolic interpolation gives the starting
/// frequency; a golden-section search on the least-squares residual of a
/// sinusoid plus offset then refines it within one padded bin.
pub fn fit_oscillation(times: &[f64], y: &[f64]) -> Result<OscillationFit> {
    let n = times.len();
    if n < 4 || y.len() != n {
        return Err(Error::InvalidArgument("need at least four samples with matching lengths".into()));
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("sample times must increase".into()));
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let padded = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = y.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    buf.resize(padded, Complex::new(0.0, 0.0));
    FftPlanner::<f64>::new().plan_fft_forward(padded).process(&mut buf);

    let power: Vec<f64> = buf[..padded / 2].iter().map(|c| c.norm_sqr()).collect();
    let (peak, _) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidArgument("record too short".into()))?;
    let shift = if peak + 1 < power.len() {
        let (l, c, r) = (power[peak - 1].sqrt(), power[peak].sqrt(), power[peak + 1].sqrt());
        let denom = l - 2.0 * c + r;
        if denom.abs() > 0.0 {
            (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let bin = 1.0 / (padded as f64 * dt);
    let f0 = (peak as f64 + shift) * bin;

    let t0 = times[0];
    let rel: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let cost = |f: f64| sinusoid_lsq(&rel, y, f).0;
    let (mut lo, mut hi) = ((f0 - bin).max(0.0), f0 + bin);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (cost(c), cost(d));
    while hi - lo > 1e-13 * f0.max(bin) {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = cost(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = cost(d);
        }
    }
    let frequency = 0.5 * (lo + hi);
    let (ss, coef) = sinusoid_lsq(&rel, y, frequency);
    Ok(OscillationFit {
        frequency,
        visibility: 2.0 * coef[1].hypot(coef[2]),
        offset: coef[0],
        residual: (ss / n as f64).sqrt(),
    })
}

/// Oscillation fit of every detuning column of a chevron map.
pub fn chevron_frequencies(map: &ChevronMap) -> Result<Vec<(f64, OscillationFit)>> {
    map.populations
        .par_iter()
        .enumerate()
        .map(|(i, col)| Ok((map.modulation_frequency(i), fit_oscillation(&map.times, col)?)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RabiFit {
    /// Minimum of the generalized-Rabi hyperbola (MHz).
    pub j: f64,
    /// Modulation frequency of the minimum (MHz).
    pub f_res: f64,
    /// RMS residual (MHz).
    pub residual: f64,
}

fn rabi_cost(points: &[(f64, f64)], j: f64, f_res: f64) -> f64 {
    points.iter().map(|&(f, w)| ((j * j + (f - f_res).powi(2)).sqrt() - w).powi(2)).sum()
}

/// Least-squares fit of `Omega(f) = sqrt(j^2 + (f - f_res)^2)` to
/// `(f_TC, Omega)` pairs: coarse grid on `f_res`, then damped Gauss-Newton.
pub fn fit_rabi(points: &[(f64, f64)]) -> Result<RabiFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientSpan);
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let imin = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if imin == 0 || imin + 1 == pts.len() {
        return Err(Error::InsufficientSpan);
    }

    let j_for = |f_res: f64| {
        let m = pts.iter().map(|&(f, w)| w * w - (f - f_res).powi(2)).sum::<f64>() / pts.len() as f64;
        m.max(0.0).sqrt()
    };
    let (f_lo, f_hi) = (pts[0].0, pts[pts.len() - 1].0);
    let mut best = (f64::INFINITY, pts[imin].0);
    for k in 0..=2000 {
        let f = f_lo + (f_hi - f_lo) * k as f64 / 2000.0;
        let c = rabi_cost(&pts, j_for(f), f);
        if c < best.0 {
            best = (c, f);
        }
    }
    let mut f_res = best.1;
    let mut j = j_for(f_res).max(1e-6 * (f_hi - f_lo));
    let mut cost = rabi_cost(&pts, j, f_res);
    let mut lambda = 1e-3;

    for _ in 0..200 {
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for &(f, w) in &pts {
            let om = (j * j + (f - f_res).powi(2)).sqrt().max(1e-300);
            let g = [j / om, -(f - f_res) / om];
            let r = om - w;
            for a in 0..2 {
                for b in 0..2 {
                    jtj[a][b] += g[a] * g[b];
                }
                jtr[a] += g[a] * r;
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let dj = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let df = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (nj, nf) = ((j + dj).abs(), f_res + df);
            let nc = rabi_cost(&pts, nj, nf);
            if nc <= cost {
                let done = (dj.abs() + df.abs()) < 1e-14 * (1.0 + j.abs() + f_res.abs());
                j = nj;
                f_res = nf;
                cost = nc;
                lambda = (lambda * 0.1).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(RabiFit { j, f_res, residual: (cost / pts.len() as f64).sqrt() })
}

/// Two-term linear model `y = c[0] b0(A) + c[1] b1(A)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoTermFit {
    pub c: [f64; 2],
    /// RMS residual.
    pub residual: f64,
}

fn fit_two_term(amplitudes: &[f64], values: &[f64], basis: impl Fn(f64) -> [f64; 2]) -> Result<TwoTermFit> {
    if amplitudes.len() != values.len() {
        return Err(Error::InvalidArgument("amplitudes and values differ in length".into()));
    }
    let mut mags: Vec<f64> = amplitudes.iter().map(|a| a.abs()).filter(|a| *a > 0.0).collect();
    mags.sort_by(f64::total_cmp);
    mags.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if mags.len() < 2 {
        return Err(Error::DegenerateBasis);
    }
    let mut m = [[0.0; 2]; 2];
    let mut r = [0.0; 2];
    for (&a, &v) in amplitudes.iter().zip(values) {
        let b = basis(a);
        for i in 0..2 {
            for k in 0..2 {
                m[i][k] += b[i] * b[k];
            }
            r[i] += b[i] * v;
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() <= 1e-14 * m[0][0] * m[1][1] {
        return Err(Error::DegenerateBasis);
    }
    let c = [(m[1][1] * r[0] - m[0][1] * r[1]) / det, (m[0][0] * r[1] - m[1][0] * r[0]) / det];
    let ss: f64 = amplitudes
        .iter()
        .zip(values)
        .map(|(&a, &v)| {
            let b = basis(a);
            (c[0] * b[0] + c[1] * b[1] - v).powi(2)
        })
        .sum();
    Ok(TwoTermFit { c, residual: (ss / amplitudes.len() as f64).sqrt() })
}

/// Even quartic `shift(A) = c2 A^2 + c4 A^4`; returns `c = [c2, c4]`.
pub fn fit_dispersive(amplitudes: &[f64], shifts: &[f64]) -> Result<TwoTermFit> {
    fit_two_term(amplitudes, shifts, |a| [a * a, a.powi(4)])
}

/// Odd cubic `j(A) = b1 A + b3 A^3`; returns `c = [b1, b3]`.
pub fn fit_coupling(amplitudes: &[f64], j_values: &[f64]) -> Result<TwoTermFit> {
    fit_two_term(amplitudes, j_values, |a| [a, a.powi(3)])
}

/// Frequency shift `f_i - f_i^0 = c2 A^2 + c4 A^4` (MHz).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersiveModel {
    pub c2: f64,
    pub c4: f64,
}

impl DispersiveModel {
    pub fn shift(&self, a: f64) -> f64 {
        let a2 = a * a;
        a2 * (self.c2 + self.c4 * a2)
    }
}

/// Coupling `j(A) = b1 A + b3 A^3` and per-qubit dispersive shifts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CouplingModel {
    pub b1: f64,
    pub b3: f64,
    pub dispersive: [DispersiveModel; 2],
    /// Idle qubit frequencies `f_i^0` (MHz).
    pub idle: [f64; 2],
}

impl CouplingModel {
    pub fn coupling(&self, a: f64) -> f64 {
        a * (self.b1 + self.b3 * a * a)
    }

    pub fn qubit_frequency(&self, qubit: usize, a: f64) -> Result<f64> {
        match qubit {
            1 | 2 => Ok(self.idle[qubit - 1] + self.dispersive[qubit - 1].shift(a)),
            q => Err(Error::BadIndex(q)),
        }
    }

    /// Modulation frequency bringing `|01>` and `|10>` into resonance, `f1 - f2`.
    pub fn resonance(&self, a: f64) -> f64 {
        self.idle[0] - self.idle[1] + self.dispersive[0].shift(a) - self.dispersive[1].shift(a)
    }
}

/// One amplitude of the calibration sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub amplitude: f64,
    pub true_j: f64,
    pub true_resonance: f64,
    pub rabi: RabiFit,
    /// `(f_TC, fitted oscillation frequency)` per chevron column.
    pub frequencies: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub points: Vec<CalibrationPoint>,
    /// `[b1, b3]` refitted from the extracted couplings.
    pub coupling: TwoTermFit,
    /// `[c2, c4]` refitted from the resonance shift `f_res(A) - f_res(0)`.
    pub resonance_shift: TwoTermFit,
}

/// Chevron-to-model round trip: simulate a chevron per amplitude, extract
/// oscillation frequencies, fit the hyperbola, and refit the polynomials.
pub fn calibrate(
    model: &CouplingModel,
    amplitudes: &[f64],
    detuning_range: (f64, f64),
    t_max: f64,
    grid: (usize, usize),
) -> Result<CalibrationResult> {
    let points = amplitudes
        .par_iter()
        .map(|&a| {
            let j = model.coupling(a).abs();
            let f_res = model.resonance(a);
            let map = chevron_map(j, f_res, detuning_range, (0.0, t_max), grid)?;
            let frequencies: Vec<(f64, f64)> =
                chevron_frequencies(&map)?.into_iter().map(|(f, fit)| (f, fit.frequency)).collect();
            let rabi = fit_rabi(&frequencies)?;
            Ok(CalibrationPoint { amplitude: a, true_j: j, true_resonance: f_res, rabi, frequencies })
        })
        .collect::<Result<Vec<_>>>()?;

    let amps: Vec<f64> = points.iter().map(|p| p.amplitude).collect();
    let js: Vec<f64> = points.iter().map(|p| p.rabi.j * p.amplitude.signum()).collect();
    let base = model.resonance(0.0);
    let shifts: Vec<f64> = points.iter().map(|p| p.rabi.f_res - base).collect();
    Ok(CalibrationResult {
        coupling: fit_coupling(&amps, &js)?,
        resonance_shift: fit_dispersive(&amps, &shifts)?,
        points,
    })
}
