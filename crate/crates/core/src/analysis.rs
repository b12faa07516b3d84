//! Instantaneous spectra, level tracking, avoided-crossing analysis and
//! Landau-Zener estimates.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::operators::{hermitian_eigendecomposition, Ket, DIM};
use crate::schedule::{HamiltonianFamily, ProtocolSchedule};

pub const DEFAULT_GRID: usize = 1001;
/// Middle pair of sorted levels, where the `|01>` and `|10>` branches meet.
pub const DEFAULT_PAIR: (usize, usize) = (1, 2);
const TIE_TOL: f64 = 1e-9;

/// Eigen-decompositions on a time grid with two views of the levels:
/// `values[n]` sorted ascending, and tracks that follow maximal eigenvector
/// overlap between neighbouring grid points. Track `k` starts as sorted
/// level `k` at the first grid point.
#[derive(Clone, Debug)]
pub struct SpectralTrace {
    pub times: Vec<f64>,
    pub values: Vec<[f64; DIM]>,
    /// `tracks[n][k]`: sorted index occupied by track `k` at `times[n]`.
    pub tracks: Vec<[usize; DIM]>,
    /// `vectors[n][k]`: eigenvector of track `k`, phase-fixed so consecutive
    /// overlaps are real and positive.
    pub vectors: Vec<[Ket; DIM]>,
}

/// Which eigenvector a fidelity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LevelRef {
    Sorted(usize),
    Tracked(usize),
}

impl SpectralTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sorted_curve(&self, level: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[level]).collect()
    }

    pub fn tracked_curve(&self, track: usize) -> Vec<f64> {
        self.values.iter().zip(&self.tracks).map(|(v, l)| v[l[track]]).collect()
    }

    pub fn vector(&self, level: LevelRef, n: usize) -> Result<Ket> {
        match level {
            LevelRef::Tracked(k) if k < DIM => Ok(self.vectors[n][k]),
            LevelRef::Sorted(k) if k < DIM => {
                let track = self.tracks[n].iter().position(|&s| s == k).expect("tracks are a permutation");
                Ok(self.vectors[n][track])
            }
            LevelRef::Sorted(k) | LevelRef::Tracked(k) => Err(Error::BadIndex(k)),
        }
    }
}

/// Spectral trace of `family` on `n_grid` evenly spaced points of `[0, duration]`.
pub fn spectral_trace<F: HamiltonianFamily + Sync>(family: &F, n_grid: usize) -> Result<SpectralTrace> {
    if n_grid < 3 {
        return Err(Error::InvalidArgument(format!("n_grid must be at least 3, got {n_grid}")));
    }
    let d = family.duration();
    let times: Vec<f64> = (0..n_grid).map(|k| d * k as f64 / (n_grid - 1) as f64).collect();
    spectral_trace_on(family, &times)
}

/// Spectral trace of `family` on an explicit, increasing time grid.
pub fn spectral_trace_on<F: HamiltonianFamily + Sync>(family: &F, times: &[f64]) -> Result<SpectralTrace> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    let decomps = times
        .par_iter()
        .map(|&t| hermitian_eigendecomposition(&family.hamiltonian(t)))
        .collect::<Result<Vec<_>>>()?;

    let perms = permutations();
    let mut tracks = Vec::with_capacity(times.len());
    let mut vectors: Vec<[Ket; DIM]> = Vec::with_capacity(times.len());
    tracks.push([0, 1, 2, 3]);
    vectors.push(std::array::from_fn(|k| decomps[0].vector(k)));

    for n in 1..times.len() {
        let prev = vectors[n - 1];
        let next: [Ket; DIM] = std::array::from_fn(|l| decomps[n].vector(l));
        let overlap: [[f64; DIM]; DIM] = std::array::from_fn(|k| std::array::from_fn(|l| prev[k].inner(&next[l]).norm()));

        let mut scores: Vec<(f64, usize)> = perms
            .iter()
            .enumerate()
            .map(|(i, p)| ((0..DIM).map(|k| overlap[k][p[k]]).sum::<f64>(), i))
            .collect();
        scores.sort_by(|a, b| b.0.total_cmp(&a.0));
        if scores[0].0 - scores[1].0 < TIE_TOL {
            return Err(Error::DegenerateTracking { t: times[n] });
        }
        let best = perms[scores[0].1];

        let fixed: [Ket; DIM] = std::array::from_fn(|k| {
            let v = next[best[k]];
            let ov = prev[k].inner(&v);
            let r = ov.norm();
            if r > 0.0 {
                v * (ov.conj() / r)
            } else {
                v
            }
        });
        tracks.push(best);
        vectors.push(fixed);
    }

    Ok(SpectralTrace {
        times: times.to_vec(),
        values: decomps.iter().map(|e| e.values).collect(),
        tracks,
        vectors,
    })
}

fn permutations() -> Vec<[usize; DIM]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let p = [a, b, c, d];
                    if (0..DIM).all(|i| p.contains(&i)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn check_pair(pair: (usize, usize)) -> Result<()> {
    if pair.1 >= DIM {
        return Err(Error::BadIndex(pair.1));
    }
    if pair.0 >= pair.1 {
        return Err(Error::InvalidArgument(format!("level pair {pair:?} must be increasing")));
    }
    Ok(())
}

/// Minimum of `lambda_hi(t) - lambda_lo(t)`, located on the grid of `trace`
/// and refined by golden-section search on `family`. Returns `(a, t_c)`.
pub fn min_gap<F: HamiltonianFamily>(family: &F, trace: &SpectralTrace, pair: (usize, usize)) -> Result<(f64, f64)> {
    check_pair(pair)?;
    let gaps: Vec<f64> = trace.values.iter().map(|v| v[pair.1] - v[pair.0]).collect();
    let n = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(Error::NoInteriorMinimum { lower: pair.0, upper: pair.1 })?;
    if n == 0 || n + 1 == gaps.len() {
        return Err(Error::NoInteriorMinimum { lower: pair.0, upper: pair.1 });
    }

    let gap = |t: f64| -> Result<f64> {
        let v = hermitian_eigendecomposition(&family.hamiltonian(t))?.values;
        Ok(v[pair.1] - v[pair.0])
    };
    let (t, a) = golden_section(trace.times[n - 1], trace.times[n + 1], gap)?;
    if a > gaps[n] {
        Ok((gaps[n], trace.times[n]))
    } else {
        Ok((a, t))
    }
}

fn golden_section<G: Fn(f64) -> Result<f64>>(mut lo: f64, mut hi: f64, f: G) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let width = hi - lo;
    for _ in 0..200 {
        if hi - lo <= 1e-10 * width {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Slope magnitude of the diabatic energy difference around `t_c`.
///
/// Diabatic levels are the overlap-tracked levels of the schedule with both
/// `j` and `zz` removed; the tracks starting at sorted positions `pair` are fit
/// linearly over `[t_c - w/2, t_c + w/2]` with `w = window_fraction * t_ad`.
pub fn diabatic_slope_with_window(
    s: &ProtocolSchedule,
    pair: (usize, usize),
    t_c: f64,
    window_fraction: f64,
) -> Result<f64> {
    check_pair(pair)?;
    let half = 0.5 * window_fraction * s.t_ad;
    let (start, end) = (t_c - half, t_c + half);
    let slack = 1e-12 * s.t_ad;
    if !(window_fraction > 0.0) || start < -slack || end > s.t_ad + slack {
        return Err(Error::WindowOutOfRange { start, end, t_ad: s.t_ad });
    }
    let uncoupled = s.with_coupling(0.0).with_zz(0.0);
    let trace = spectral_trace(&uncoupled, DEFAULT_GRID)?;
    let lower = trace.tracked_curve(pair.0);
    let upper = trace.tracked_curve(pair.1);

    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= start - slack && t <= end + slack)
        .map(|(i, &t)| (t, upper[i] - lower[i]))
        .collect();
    if pts.len() < 2 {
        return Err(Error::WindowOutOfRange { start, end, t_ad: s.t_ad });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok((sxy / sxx).abs())
}

/// [`diabatic_slope_with_window`] with a window of 10% of `t_ad`.
pub fn diabatic_slope(s: &ProtocolSchedule, pair: (usize, usize), t_c: f64) -> Result<f64> {
    diabatic_slope_with_window(s, pair, t_c, 0.1)
}

/// Landau-Zener parameter and diabatic transition probability for a gap
/// `a` (MHz) swept at `alpha` (MHz/us): `Gamma = pi a^2 / (2 |alpha|)`,
/// `P = exp(-2 pi Gamma)`.
pub fn lz_probability(a: f64, alpha: f64) -> Result<(f64, f64)> {
    if alpha == 0.0 {
        return Err(Error::ZeroSlope);
    }
    let gamma = PI * a * a / (2.0 * alpha.abs());
    Ok((gamma, (-2.0 * PI * gamma).exp()))
}

/// Overlap of each trajectory sample with the reference eigenvector.
pub fn passage_fidelity(traj: &Trajectory, trace: &SpectralTrace, level: LevelRef) -> Result<Vec<f64>> {
    if traj.times.len() != trace.times.len()
        || traj.times.iter().zip(&trace.times).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs()))
    {
        return Err(Error::GridMismatch);
    }
    traj.states
        .iter()
        .enumerate()
        .map(|(n, st)| Ok(st.fidelity_with(&trace.vector(level, n)?)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingReport {
    pub lower: usize,
    pub upper: usize,
    /// Minimum gap `a/h` in MHz.
    pub gap: f64,
    /// Crossing time in microseconds.
    pub t_c: f64,
    /// Diabatic slope in MHz/us.
    pub alpha: f64,
    pub gamma: f64,
    pub p_diabatic: f64,
}

pub fn crossing_report(s: &ProtocolSchedule, pair: (usize, usize), n_grid: usize) -> Result<CrossingReport> {
    let trace = spectral_trace(s, n_grid)?;
    let (gap, t_c) = min_gap(s, &trace, pair)?;
    let alpha = diabatic_slope(s, pair, t_c)?;
    let (gamma, p_diabatic) = lz_probability(gap, alpha)?;
    Ok(CrossingReport { lower: pair.0, upper: pair.1, gap, t_c, alpha, gamma, p_diabatic })
}
