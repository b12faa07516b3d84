//! Fixed-step RK4 propagation of pure states (Schrodinger) and density
//! matrices (Lindblad) under a time-dependent two-qubit Hamiltonian.
//!
//! `H/h` is in MHz and time in microseconds, so the generator is
//! `-i 2 pi H`. Dissipative rates are plain inverse microseconds.
//! States are never renormalized; drift is recorded per sample and the
//! propagation aborts with [`Error::StepTooLarge`] once it exceeds `1e-4`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::{hermitian_eigendecomposition, Ket, TwoQubitOperator, C64};
use crate::schedule::HamiltonianFamily;

/// Default integration step in microseconds.
pub const DEFAULT_DT_US: f64 = 0.002;

const DRIFT_LIMIT: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemState {
    Pure(Ket),
    Mixed(TwoQubitOperator),
}

impl SystemState {
    /// Computational basis state from a label such as `"01"` (qubit 1 first).
    pub fn basis(label: &str) -> Result<Self> {
        Ok(SystemState::Pure(Ket::basis(basis_index(label)?)))
    }

    pub fn density(&self) -> TwoQubitOperator {
        match self {
            SystemState::Pure(psi) => TwoQubitOperator::projector(psi),
            SystemState::Mixed(rho) => *rho,
        }
    }

    pub fn to_mixed(&self) -> Self {
        SystemState::Mixed(self.density())
    }

    /// Expectation value of an operator, `Tr(rho A)`.
    pub fn expect(&self, op: &TwoQubitOperator) -> C64 {
        match self {
            SystemState::Pure(psi) => op.expectation(psi),
            SystemState::Mixed(rho) => rho.trace_product(op),
        }
    }

    /// Overlap with a pure reference state: `|<v|psi>|^2` or `<v|rho|v>`.
    pub fn fidelity_with(&self, v: &Ket) -> f64 {
        match self {
            SystemState::Pure(psi) => v.inner(psi).norm_sqr(),
            SystemState::Mixed(rho) => rho.expectation(v).re,
        }
    }

    /// Norm drift (pure) or trace drift (mixed) from 1.
    pub fn drift(&self) -> f64 {
        match self {
            SystemState::Pure(psi) => (psi.norm_sqr() - 1.0).abs(),
            SystemState::Mixed(rho) => (rho.trace() - C64::new(1.0, 0.0)).norm(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.drift() > 1e-6 {
            return Err(Error::InvalidState(format!("state not normalized (drift {:e})", self.drift())));
        }
        if let SystemState::Mixed(rho) = self {
            if rho.hermiticity_deviation() > 1e-8 {
                return Err(Error::InvalidState("density matrix not Hermitian".into()));
            }
            let e = hermitian_eigendecomposition(rho)?;
            if e.values[0] < -1e-7 {
                return Err(Error::InvalidState(format!(
                    "density matrix has negative eigenvalue {:e}",
                    e.values[0]
                )));
            }
        }
        Ok(())
    }
}

/// Index `2*q1 + q2` of a two-character basis label.
pub fn basis_index(label: &str) -> Result<usize> {
    match label.trim() {
        "00" => Ok(0),
        "01" => Ok(1),
        "10" => Ok(2),
        "11" => Ok(3),
        other => Err(Error::InvalidArgument(format!("unknown basis state {other:?}"))),
    }
}

/// Relaxation, thermal excitation and dephasing parameters of one qubit.
/// Infinite times switch the corresponding channel off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitNoise {
    pub t1: f64,
    pub t2: f64,
    pub nth: f64,
}

impl QubitNoise {
    pub const OFF: QubitNoise = QubitNoise { t1: f64::INFINITY, t2: f64::INFINITY, nth: 0.0 };

    pub fn relaxation_rate(&self) -> f64 {
        (1.0 + self.nth) / self.t1
    }

    pub fn excitation_rate(&self) -> f64 {
        self.nth / self.t1
    }

    /// `1/T_phi = 1/T2 - 1/(2 T1)`
    pub fn pure_dephasing_rate(&self) -> f64 {
        1.0 / self.t2 - 0.5 / self.t1
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub qubits: [QubitNoise; 2],
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel { qubits: [QubitNoise::OFF; 2] }
    }

    pub fn uniform(t1: f64, t2: f64, nth: f64) -> Result<Self> {
        let q = QubitNoise { t1, t2, nth };
        let m = NoiseModel { qubits: [q, q] };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, q) in self.qubits.iter().enumerate() {
            let qubit = i + 1;
            let valid_time = |t: f64| t > 0.0 && !t.is_nan();
            if !valid_time(q.t1) || !valid_time(q.t2) || !(q.nth >= 0.0 && q.nth.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "qubit {qubit}: T1, T2 must be positive (or infinite) and n_th >= 0"
                )));
            }
            if q.t2 > 2.0 * q.t1 {
                return Err(Error::UnphysicalNoise { qubit, t1: q.t1, t2: q.t2 });
            }
        }
        Ok(())
    }

    /// Jump operators with the rates folded in, skipping channels with zero rate.
    pub fn jump_operators(&self) -> Result<Vec<TwoQubitOperator>> {
        self.validate()?;
        let mut ops = Vec::new();
        for (i, q) in self.qubits.iter().enumerate() {
            let (lower, raise, z) = sigma_ops(i + 1)?;
            for (rate, op) in [
                (q.relaxation_rate(), lower),
                (q.excitation_rate(), raise),
                (0.5 * q.pure_dephasing_rate(), z),
            ] {
                if rate > 0.0 {
                    ops.push(op * rate.sqrt());
                }
            }
        }
        Ok(ops)
    }
}

/// Lowering, raising and `Z` operators of `qubit` (1 or 2), embedded in the
/// two-qubit space. `sigma_minus |1> = |0>`, and `[sigma_plus, sigma_minus]`
/// equals the sign-flipped `Z`.
pub fn sigma_ops(qubit: usize) -> Result<(TwoQubitOperator, TwoQubitOperator, TwoQubitOperator)> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let lower = [[zero, one], [zero, zero]];
    let raise = [[zero, zero], [one, zero]];
    let z = [[-one, zero], [zero, one]];
    let id = [[one, zero], [zero, one]];
    let embed = |a: [[C64; 2]; 2]| -> TwoQubitOperator {
        let (left, right) = if qubit == 1 { (a, id) } else { (id, a) };
        let mut m = TwoQubitOperator::zero();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = left[r / 2][c / 2] * right[r % 2][c % 2];
            }
        }
        m
    };
    match qubit {
        1 | 2 => Ok((embed(lower), embed(raise), embed(z))),
        other => Err(Error::BadIndex(other)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleDiagnostics {
    /// `| |psi|^2 - 1 |` or `|Tr rho - 1|`.
    pub drift: f64,
    /// Largest element of `rho - rho^H` (0 for pure states).
    pub hermiticity: f64,
    /// Smallest eigenvalue of `rho` (0 for pure states).
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub diagnostics: Vec<SampleDiagnostics>,
    /// Step actually used (the requested step shrunk to divide each sample interval).
    pub step: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &SystemState {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn max_drift(&self) -> f64 {
        self.diagnostics.iter().fold(0.0, |m, d| m.max(d.drift))
    }
}

/// Sample times `k t / n`, `k = 0..=n`.
pub fn sample_times(duration: f64, n_samples: usize) -> Vec<f64> {
    (0..=n_samples).map(|k| k as f64 * duration / n_samples as f64).collect()
}

struct StepPlan {
    times: Vec<f64>,
    substeps: usize,
    h: f64,
}

fn plan<F: HamiltonianFamily>(family: &F, dt: f64, n_samples: usize) -> Result<StepPlan> {
    let duration = family.duration();
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidStep(format!("dt must be positive, got {dt}")));
    }
    if dt > duration / 100.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidStep(format!(
            "dt = {dt} us exceeds t_ad/100 = {} us",
            duration / 100.0
        )));
    }
    let interval = duration / n_samples as f64;
    let substeps = ((interval / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok(StepPlan { times: sample_times(duration, n_samples), substeps, h: interval / substeps as f64 })
}

fn rk4<S, G>(y: S, t: f64, h: f64, f: G) -> S
where
    S: Copy + std::ops::Add<Output = S> + std::ops::Mul<f64, Output = S>,
    G: Fn(f64, S) -> S,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, y + k1 * (0.5 * h));
    let k3 = f(t + 0.5 * h, y + k2 * (0.5 * h));
    let k4 = f(t + h, y + k3 * h);
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// RK4 integration of `d psi/dt = -i 2 pi H(t) psi`.
pub fn propagate_unitary<F: HamiltonianFamily>(
    family: &F,
    psi0: &Ket,
    dt: f64,
    n_samples: usize,
) -> Result<Trajectory> {
    SystemState::Pure(*psi0).validate()?;
    let plan = plan(family, dt, n_samples)?;
    let minus_i_two_pi = C64::new(0.0, -2.0 * PI);
    let rhs = |t: f64, psi: Ket| family.hamiltonian(t).apply(&psi) * minus_i_two_pi;

    let mut psi = *psi0;
    let mut states = vec![SystemState::Pure(psi)];
    let mut diagnostics = vec![pure_diagnostics(&psi)];
    for w in plan.times.windows(2) {
        for k in 0..plan.substeps {
            let t = w[0] + k as f64 * plan.h;
            psi = rk4(psi, t, plan.h, rhs);
        }
        let d = pure_diagnostics(&psi);
        if d.drift > DRIFT_LIMIT {
            return Err(Error::StepTooLarge { drift: d.drift, limit: DRIFT_LIMIT, t: w[1] });
        }
        states.push(SystemState::Pure(psi));
        diagnostics.push(d);
    }
    Ok(Trajectory { times: plan.times, states, diagnostics, step: plan.h })
}

fn pure_diagnostics(psi: &Ket) -> SampleDiagnostics {
    SampleDiagnostics { drift: (psi.norm_sqr() - 1.0).abs(), hermiticity: 0.0, min_eigenvalue: 0.0 }
}

fn mixed_diagnostics(rho: &TwoQubitOperator) -> SampleDiagnostics {
    let min_eigenvalue = hermitian_eigendecomposition(&((*rho + rho.adjoint()) * 0.5))
        .map(|e| e.values[0])
        .unwrap_or(f64::NAN);
    SampleDiagnostics {
        drift: (rho.trace() - C64::new(1.0, 0.0)).norm(),
        hermiticity: rho.hermiticity_deviation(),
        min_eigenvalue,
    }
}

/// Precomputed dissipator `D(rho) = sum_k L rho L^H - {L^H L, rho}/2`.
struct Dissipator {
    jumps: Vec<(TwoQubitOperator, TwoQubitOperator)>,
    half_decay: TwoQubitOperator,
}

impl Dissipator {
    fn new(jumps: Vec<TwoQubitOperator>) -> Self {
        let mut half_decay = TwoQubitOperator::zero();
        for l in &jumps {
            half_decay += l.adjoint() * *l * 0.5;
        }
        let jumps = jumps.into_iter().map(|l| (l, l.adjoint())).collect();
        Dissipator { jumps, half_decay }
    }

    fn apply(&self, rho: &TwoQubitOperator) -> TwoQubitOperator {
        let mut out = -self.half_decay.anticommutator(rho);
        for (l, ld) in &self.jumps {
            out += *l * *rho * *ld;
        }
        out
    }
}

/// RK4 integration of the Lindblad master equation
/// `d rho/dt = -i 2 pi [H, rho] + sum_k (L_k rho L_k^H - {L_k^H L_k, rho}/2)`
/// with, per qubit, relaxation `sqrt((1+n_th)/T1) sigma_minus`, thermal
/// excitation `sqrt(n_th/T1) sigma_plus` and dephasing `sqrt(1/(2 T_phi)) Z`.
pub fn propagate_lindblad<F: HamiltonianFamily>(
    family: &F,
    rho0: &SystemState,
    noise: &NoiseModel,
    dt: f64,
    n_samples: usize,
) -> Result<Trajectory> {
    rho0.validate()?;
    let dissipator = Dissipator::new(noise.jump_operators()?);
    let plan = plan(family, dt, n_samples)?;
    let minus_i_two_pi = C64::new(0.0, -2.0 * PI);
    let rhs = |t: f64, rho: TwoQubitOperator| {
        family.hamiltonian(t).commutator(&rho) * minus_i_two_pi + dissipator.apply(&rho)
    };

    let mut rho = rho0.density();
    let mut states = vec![SystemState::Mixed(rho)];
    let mut diagnostics = vec![mixed_diagnostics(&rho)];
    for w in plan.times.windows(2) {
        for k in 0..plan.substeps {
            let t = w[0] + k as f64 * plan.h;
            rho = rk4(rho, t, plan.h, rhs);
        }
        let d = mixed_diagnostics(&rho);
        if d.drift > DRIFT_LIMIT || d.hermiticity > DRIFT_LIMIT {
            return Err(Error::StepTooLarge {
                drift: d.drift.max(d.hermiticity),
                limit: DRIFT_LIMIT,
                t: w[1],
            });
        }
        states.push(SystemState::Mixed(rho));
        diagnostics.push(d);
    }
    Ok(Trajectory { times: plan.times, states, diagnostics, step: plan.h })
}
