//! Protocol schedules and the chirped-drive phase model.
//!
//! Coefficients are frequencies (`E/h`) in MHz and times are in microseconds,
//! so `2*pi*H*t` is dimensionless without further conversion factors.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::{pauli_matrix, PauliLabel, TwoQubitOperator};

/// A Hermitian-valued function of time on `[0, duration]`.
pub trait HamiltonianFamily {
    fn duration(&self) -> f64;

    /// `H(t)/h` in MHz. Callers guarantee `0 <= t <= duration` up to rounding.
    fn hamiltonian(&self, t: f64) -> TwoQubitOperator;
}

impl<T: HamiltonianFamily + ?Sized> HamiltonianFamily for &T {
    fn duration(&self) -> f64 {
        (**self).duration()
    }
    fn hamiltonian(&self, t: f64) -> TwoQubitOperator {
        (**self).hamiltonian(t)
    }
}

/// Time-independent Hamiltonian held for a fixed duration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticHamiltonian {
    pub h: TwoQubitOperator,
    pub duration: f64,
}

impl HamiltonianFamily for StaticHamiltonian {
    fn duration(&self) -> f64 {
        self.duration
    }
    fn hamiltonian(&self, _t: f64) -> TwoQubitOperator {
        self.h
    }
}

/// Time profile of the flip-flop coupling `j(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CouplingRamp {
    /// `j(t) = j_final * t / t_ad`
    Linear,
    /// Coupler amplitude ramped linearly to `amplitude`, mapped through the
    /// calibrated response `j(A) = b1*A + b3*A^3` and rescaled so that
    /// `j(t_ad) = j_final`.
    Calibrated { b1: f64, b3: f64, amplitude: f64 },
}

impl CouplingRamp {
    fn shape(&self, s: f64) -> f64 {
        match *self {
            CouplingRamp::Linear => s,
            CouplingRamp::Calibrated { b1, b3, amplitude } => {
                let g = |a: f64| b1 * a + b3 * a * a * a;
                g(amplitude * s) / g(amplitude)
            }
        }
    }
}

/// Instantaneous coefficients of
/// `H/h = (z1 ZI + z2 IZ)/2 + (x1 XI + x2 IX)/2 + j (XX+YY)/4 + zz ZZ/4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianCoefficients {
    pub z1: f64,
    pub z2: f64,
    pub x1: f64,
    pub x2: f64,
    pub j: f64,
    pub zz: f64,
}

impl HamiltonianCoefficients {
    pub fn operator(&self) -> TwoQubitOperator {
        (pauli_matrix(PauliLabel::ZI) * self.z1
            + pauli_matrix(PauliLabel::IZ) * self.z2
            + pauli_matrix(PauliLabel::XI) * self.x1
            + pauli_matrix(PauliLabel::IX) * self.x2)
            * 0.5
            + (pauli_matrix(PauliLabel::XX) + pauli_matrix(PauliLabel::YY)) * (0.25 * self.j)
            + pauli_matrix(PauliLabel::ZZ) * (0.25 * self.zz)
    }
}

/// Linear interpolation from longitudinal fields to transverse fields with a
/// ramped flip-flop coupling and a constant residual `ZZ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolSchedule {
    pub z1: f64,
    pub z2: f64,
    pub x1: f64,
    pub x2: f64,
    /// `j/h` reached at `t = t_ad`.
    pub j_final: f64,
    /// Residual `zeta/h`, entering as `zeta ZZ/4`.
    pub zz: f64,
    /// Protocol length in microseconds.
    pub t_ad: f64,
    pub coupling_ramp: CouplingRamp,
}

impl ProtocolSchedule {
    pub fn new(z1: f64, z2: f64, x1: f64, x2: f64, j_final: f64, zz: f64, t_ad: f64) -> Result<Self> {
        let s = ProtocolSchedule {
            z1,
            z2,
            x1,
            x2,
            j_final,
            zz,
            t_ad,
            coupling_ramp: CouplingRamp::Linear,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_coupling_ramp(mut self, ramp: CouplingRamp) -> Result<Self> {
        self.coupling_ramp = ramp;
        self.validate()?;
        Ok(self)
    }

    pub fn with_t_ad(mut self, t_ad: f64) -> Result<Self> {
        self.t_ad = t_ad;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coupling(mut self, j_final: f64) -> Self {
        self.j_final = j_final;
        self
    }

    pub fn with_zz(mut self, zz: f64) -> Self {
        self.zz = zz;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_ad > 0.0 && self.t_ad.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_ad must be positive, got {}", self.t_ad)));
        }
        let all = [self.z1, self.z2, self.x1, self.x2, self.j_final, self.zz];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("schedule coefficients must be finite".into()));
        }
        if let CouplingRamp::Calibrated { b1, b3, amplitude } = self.coupling_ramp {
            let g = b1 * amplitude + b3 * amplitude.powi(3);
            if !(g.is_finite() && g != 0.0) {
                return Err(Error::InvalidArgument(
                    "calibrated coupling ramp has zero response at the final amplitude".into(),
                ));
            }
        }
        Ok(())
    }

    /// Same schedule shape: everything except `t_ad` agrees.
    pub fn same_shape(&self, other: &Self) -> bool {
        ProtocolSchedule { t_ad: 1.0, ..*self } == ProtocolSchedule { t_ad: 1.0, ..*other }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.t_ad;
        if !(t >= -slack && t <= self.t_ad + slack) {
            return Err(Error::TimeOutOfRange { t, start: 0.0, end: self.t_ad });
        }
        Ok(())
    }

    pub fn coupling_at(&self, t: f64) -> f64 {
        self.j_final * self.coupling_ramp.shape(self.progress(t))
    }

    fn progress(&self, t: f64) -> f64 {
        (t / self.t_ad).clamp(0.0, 1.0)
    }

    /// Unchecked coefficient evaluation; `t` is clamped into the protocol.
    pub fn coefficients(&self, t: f64) -> HamiltonianCoefficients {
        let s = self.progress(t);
        HamiltonianCoefficients {
            z1: (1.0 - s) * self.z1,
            z2: (1.0 - s) * self.z2,
            x1: s * self.x1,
            x2: s * self.x2,
            j: self.coupling_at(t),
            zz: self.zz,
        }
    }

    pub fn coefficients_at(&self, t: f64) -> Result<HamiltonianCoefficients> {
        self.check_time(t)?;
        Ok(self.coefficients(t))
    }
}

impl HamiltonianFamily for ProtocolSchedule {
    fn duration(&self) -> f64 {
        self.t_ad
    }

    fn hamiltonian(&self, t: f64) -> TwoQubitOperator {
        self.coefficients(t).operator()
    }
}

/// `H(t)/h` in MHz for `0 <= t <= t_ad`.
pub fn hamiltonian_at(s: &ProtocolSchedule, t: f64) -> Result<TwoQubitOperator> {
    Ok(s.coefficients_at(t)?.operator())
}

/// Chirped single-qubit drive whose frequency ramps linearly from `f - z` to
/// `f` over `t_ad`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChirpParams {
    /// Final drive frequency, MHz.
    pub f: f64,
    /// Initial frequency offset `z/h`, MHz.
    pub z: f64,
    /// Initial phase, rad.
    pub phi0: f64,
    pub t_ad: f64,
}

impl ChirpParams {
    fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.t_ad;
        if !(t >= -slack && t <= self.t_ad + slack) {
            return Err(Error::TimeOutOfRange { t, start: 0.0, end: self.t_ad });
        }
        Ok(())
    }

    /// Drive frequency `f - z (1 - t/t_ad)` in MHz.
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.f - self.z * (1.0 - t / self.t_ad)
    }

    /// Angle between the frame rotating at the constant frequency `f` and
    /// the frame following the chirped drive:
    /// `2 pi f t - (phi(t) - phi0) = 2 pi z t (1 - t / (2 t_ad))`.
    pub fn frame_angle(&self, t: f64) -> f64 {
        2.0 * PI * self.z * t * (1.0 - t / (2.0 * self.t_ad))
    }
}

/// Accumulated drive phase `phi0 + 2 pi (f - z) t + pi z t^2 / t_ad` in rad.
pub fn chirp_phase(c: &ChirpParams, t: f64) -> Result<f64> {
    c.check_time(t)?;
    Ok(c.phi0 + 2.0 * PI * (c.f - c.z) * t + PI * c.z * t * t / c.t_ad)
}

/// Field coefficients seen in the frame of the chirped drive:
/// `(z (t_ad - t)/t_ad / 2, a cos(phi0)/2, a sin(phi0)/2)` for the Z, X and Y
/// operators of the driven qubit.
pub fn effective_fields(c: &ChirpParams, amplitude: f64, t: f64) -> Result<(f64, f64, f64)> {
    c.check_time(t)?;
    let z = 0.5 * c.z * (c.t_ad - t) / c.t_ad;
    let (sin, cos) = c.phi0.sin_cos();
    Ok((z, 0.5 * amplitude * cos, 0.5 * amplitude * sin))
}

/// Two chirped single-qubit drives viewed from frames rotating at the
/// constant final frequencies `f_i`. The longitudinal field is absent there;
/// instead the transverse field turns by the frame angle:
/// `H_i = (a_i(t)/2) (cos(theta_i + phi0) X + sin(theta_i + phi0) Y)` with
/// `a_i(t) = x_i t / t_ad`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantFrameDrive {
    pub chirps: [ChirpParams; 2],
    pub x: [f64; 2],
}

impl ConstantFrameDrive {
    pub fn new(chirps: [ChirpParams; 2], x: [f64; 2]) -> Result<Self> {
        if (chirps[0].t_ad - chirps[1].t_ad).abs() > 0.0 || !(chirps[0].t_ad > 0.0) {
            return Err(Error::InvalidArgument("both chirps need the same positive t_ad".into()));
        }
        Ok(ConstantFrameDrive { chirps, x })
    }
}

impl HamiltonianFamily for ConstantFrameDrive {
    fn duration(&self) -> f64 {
        self.chirps[0].t_ad
    }

    fn hamiltonian(&self, t: f64) -> TwoQubitOperator {
        let labels = [(PauliLabel::XI, PauliLabel::YI), (PauliLabel::IX, PauliLabel::IY)];
        let mut h = TwoQubitOperator::zero();
        for ((c, x), (lx, ly)) in self.chirps.iter().zip(self.x).zip(labels) {
            let a = x * (t / c.t_ad).clamp(0.0, 1.0);
            let (sin, cos) = (c.frame_angle(t) + c.phi0).sin_cos();
            h += (pauli_matrix(lx) * cos + pauli_matrix(ly) * sin) * (0.5 * a);
        }
        h
    }
}
