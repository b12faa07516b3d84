//! Zero-protocol-time extrapolation of measured energy contributions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schedule::ProtocolSchedule;
use crate::tomography::{energy_from_correlators, EnergyContributions, EnergyEstimate, Tomogram};

/// Least-squares quadratic `v(t) = c0 + c1 t + c2 t^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub coefficients: [f64; 3],
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

impl QuadraticFit {
    pub fn value_at_zero(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let [c0, c1, c2] = self.coefficients;
        c0 + t * (c1 + t * c2)
    }
}

/// Fit a quadratic through `(t_ad, value)` points and read off `t = 0`.
///
/// Abscissae are centred and scaled onto `[-1, 1]` before forming the normal
/// equations. Points are sorted first, so the result does not depend on the
/// input order.
pub fn extrapolate_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    if let Some(&(t, _)) = points.iter().find(|(t, v)| !(*t > 0.0 && t.is_finite()) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_ad must be positive and values finite (t_ad = {t})")));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let scale = pts.last().map(|p| p.0).unwrap_or(1.0);
    let mut distinct = pts.iter().map(|p| p.0).collect::<Vec<_>>();
    distinct.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
    if distinct.len() < 3 {
        return Err(Error::DegenerateAbscissae);
    }

    let (lo, hi) = (distinct[0], distinct[distinct.len() - 1]);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for &(t, v) in &pts {
        let u = (t - mid) / half;
        let basis = [1.0, u, u * u];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += basis[i] * basis[j];
            }
            b[i] += basis[i] * v;
        }
    }
    let d = solve3(a, b).ok_or(Error::DegenerateAbscissae)?;
    let u0 = -mid / half;
    let coefficients = [
        d[0] + u0 * (d[1] + u0 * d[2]),
        (d[1] + 2.0 * u0 * d[2]) / half,
        d[2] / (half * half),
    ];

    let ss: f64 = pts
        .iter()
        .map(|&(t, v)| {
            let u = (t - mid) / half;
            (d[0] + u * (d[1] + u * d[2]) - v).powi(2)
        })
        .sum();
    Ok(QuadraticFit { coefficients, residual: (ss / pts.len() as f64).sqrt() })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
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
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ExtrapolationMode {
    /// Extrapolate each Pauli-term contribution and sum.
    #[default]
    PerTerm,
    /// Extrapolate the summed energy directly.
    Total,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MitigatedEnergy {
    pub mode: ExtrapolationMode,
    /// Extrapolated contributions in MHz.
    pub contributions: EnergyContributions,
    /// Extrapolated energy in MHz.
    pub total: f64,
    /// RMS fit residual per contribution, in [`EnergyContributions::NAMES`] order.
    pub residuals: [f64; 6],
    /// `(t_ad, end-of-protocol estimate)` for each run, sorted by `t_ad`.
    pub measured: Vec<(f64, EnergyEstimate)>,
}

impl MitigatedEnergy {
    /// Whether the extrapolated magnitude exceeds every measured magnitude.
    pub fn beyond_measured(&self) -> bool {
        self.measured.iter().all(|(_, e)| self.total.abs() >= e.energy.abs())
    }

    /// Measured energy at the shortest protocol time.
    pub fn shortest(&self) -> Option<&EnergyEstimate> {
        self.measured.first().map(|(_, e)| e)
    }
}

/// Extrapolate end-of-protocol energies from runs that differ only in `t_ad`.
pub fn mitigate_energy(runs: &[(ProtocolSchedule, Tomogram)], mode: ExtrapolationMode) -> Result<MitigatedEnergy> {
    let Some((first, _)) = runs.first() else {
        return Err(Error::DegenerateAbscissae);
    };
    if let Some((s, _)) = runs.iter().find(|(s, _)| !s.same_shape(first)) {
        return Err(Error::SchedulesMismatch(format!(
            "run with t_ad = {} us differs from run with t_ad = {} us beyond t_ad",
            s.t_ad, first.t_ad
        )));
    }

    let mut measured = runs
        .iter()
        .map(|(s, tom)| Ok((s.t_ad, energy_from_correlators(tom, s, s.t_ad)?)))
        .collect::<Result<Vec<_>>>()?;
    measured.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut fits = [0.0; 6];
    let mut residuals = [0.0; 6];
    for k in 0..6 {
        let pts: Vec<(f64, f64)> = measured.iter().map(|(t, e)| (*t, e.contributions.as_array()[k])).collect();
        let fit = extrapolate_quadratic(&pts)?;
        fits[k] = fit.value_at_zero();
        residuals[k] = fit.residual;
    }
    let contributions = EnergyContributions::from_array(fits);
    let total = match mode {
        ExtrapolationMode::PerTerm => contributions.total(),
        ExtrapolationMode::Total => {
            let pts: Vec<(f64, f64)> = measured.iter().map(|(t, e)| (*t, e.energy)).collect();
            extrapolate_quadratic(&pts)?.value_at_zero()
        }
    };
    Ok(MitigatedEnergy { mode, contributions, total, residuals, measured })
}

/// Warning text when the end-of-protocol passage fidelities, given as
/// `(t_ad, fidelity)`, fall on both sides of 1/2: the shorter runs then end
/// on a different branch than the longer ones.
pub fn regime_change(end_fidelities: &[(f64, f64)]) -> Option<String> {
    let adiabatic: Vec<f64> = end_fidelities.iter().filter(|p| p.1 >= 0.5).map(|p| p.0).collect();
    let diabatic: Vec<f64> = end_fidelities.iter().filter(|p| p.1 < 0.5).map(|p| p.0).collect();
    if adiabatic.is_empty() || diabatic.is_empty() {
        return None;
    }
    Some(format!(
        "passage regime changes across the t_ad set: diabatic at {diabatic:?} us, adiabatic at {adiabatic:?} us; \
         the extrapolation mixes different final states"
    ))
}
