//! Pauli correlators, shot-sampled estimates, energy reconstruction and
//! frame rotations of measured expectation values.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::operators::{pauli_matrix, Pauli, PauliLabel};
use crate::schedule::ProtocolSchedule;

/// `Tr(rho P)` (or `<psi|P|psi>`).
pub fn expectation(state: &SystemState, label: PauliLabel) -> f64 {
    state.expect(&pauli_matrix(label)).re
}

/// Mean of `shots` projective measurements of `label`, each giving +1 or -1
/// with the Born probabilities of `state`. Deterministic in `seed`.
pub fn sample_expectation(state: &SystemState, label: PauliLabel, shots: u32, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let p_plus = (0.5 * (1.0 + expectation(state, label))).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plus = (0..shots).filter(|_| rng.gen::<f64>() < p_plus).count() as f64;
    Ok((2.0 * plus - shots as f64) / shots as f64)
}

/// Seed for one tomography setting, so every Pauli term at every sample
/// time is drawn from its own stream.
pub fn setting_seed(base: u64, label: PauliLabel, sample: usize) -> u64 {
    let label_index = PauliLabel::all().position(|l| l == label).unwrap_or(0) as u64;
    splitmix64(splitmix64(base ^ splitmix64(label_index)) ^ sample as u64)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Expectation values of Pauli products at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Tomogram {
    pub time: f64,
    /// Shots per setting; 0 means exact expectation values.
    pub shots: u32,
    pub values: BTreeMap<PauliLabel, f64>,
}

impl Tomogram {
    /// Exact values of all fifteen non-identity correlators.
    pub fn exact(state: &SystemState, time: f64) -> Self {
        let values = PauliLabel::non_identity().map(|l| (l, expectation(state, l))).collect();
        Tomogram { time, shots: 0, values }
    }

    /// Shot-sampled values of all fifteen correlators, `shots == 0` meaning exact.
    pub fn measure(state: &SystemState, time: f64, shots: u32, seed: u64, sample: usize) -> Result<Self> {
        if shots == 0 {
            return Ok(Self::exact(state, time));
        }
        let mut values = BTreeMap::new();
        for l in PauliLabel::non_identity() {
            values.insert(l, sample_expectation(state, l, shots, setting_seed(seed, l, sample))?);
        }
        Ok(Tomogram { time, shots, values })
    }

    pub fn get(&self, label: PauliLabel) -> Result<f64> {
        self.values.get(&label).copied().ok_or_else(|| Error::MissingTerm(label.to_string()))
    }

    /// Allowed excursion beyond [-1, 1]: `3/sqrt(shots)` sampled, `1e-9` exact.
    pub fn tolerance(&self) -> f64 {
        if self.shots == 0 {
            1e-9
        } else {
            3.0 / (self.shots as f64).sqrt()
        }
    }

    pub fn in_range(&self) -> bool {
        let eps = self.tolerance();
        self.values.values().all(|v| v.abs() <= 1.0 + eps)
    }
}

/// Per-term energy contributions in MHz: `z1<ZI>/2`, `z2<IZ>/2`, `x1<XI>/2`,
/// `x2<IX>/2`, `j<XX>/4`, `j<YY>/4` with the schedule's instantaneous
/// coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyContributions {
    pub zi: f64,
    pub iz: f64,
    pub xi: f64,
    pub ix: f64,
    pub xx: f64,
    pub yy: f64,
}

impl EnergyContributions {
    pub const NAMES: [&'static str; 6] = ["ZI", "IZ", "XI", "IX", "XX", "YY"];

    pub fn as_array(&self) -> [f64; 6] {
        [self.zi, self.iz, self.xi, self.ix, self.xx, self.yy]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        EnergyContributions { zi: a[0], iz: a[1], xi: a[2], ix: a[3], xx: a[4], yy: a[5] }
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyEstimate {
    pub time: f64,
    /// `E/h` in MHz.
    pub energy: f64,
    pub contributions: EnergyContributions,
}

/// Energy estimator built from the six measured Pauli terms of the protocol
/// Hamiltonian. The residual `ZZ` coupling is not part of the estimator.
pub fn energy_from_correlators(tom: &Tomogram, s: &ProtocolSchedule, t: f64) -> Result<EnergyEstimate> {
    let c = s.coefficients_at(t)?;
    let contributions = EnergyContributions {
        zi: 0.5 * c.z1 * tom.get(PauliLabel::ZI)?,
        iz: 0.5 * c.z2 * tom.get(PauliLabel::IZ)?,
        xi: 0.5 * c.x1 * tom.get(PauliLabel::XI)?,
        ix: 0.5 * c.x2 * tom.get(PauliLabel::IX)?,
        xx: 0.25 * c.j * tom.get(PauliLabel::XX)?,
        yy: 0.25 * c.j * tom.get(PauliLabel::YY)?,
    };
    Ok(EnergyEstimate { time: t, energy: contributions.total(), contributions })
}

/// Rotate the X/Y components of `qubit` by `theta`:
/// `<X>' = cos(theta) <X> + sin(theta) <Y>`, `<Y>' = -sin(theta) <X> + cos(theta) <Y>`.
/// Correlators with X or Y on that qubit rotate with their partner label.
pub fn rotate_frame(tom: &Tomogram, qubit: usize, theta: f64) -> Result<Tomogram> {
    if qubit != 1 && qubit != 2 {
        return Err(Error::BadIndex(qubit));
    }
    for p in [Pauli::X, Pauli::Y] {
        tom.get(PauliLabel(Pauli::I, Pauli::I).with(qubit, p))?;
    }
    let (sin, cos) = theta.sin_cos();
    let mut out = tom.clone();
    for (&label, _) in tom.values.iter().filter(|(l, _)| l.on(qubit) == Pauli::X) {
        let x = tom.get(label)?;
        let y = tom.get(label.with(qubit, Pauli::Y))?;
        out.values.insert(label, cos * x + sin * y);
        out.values.insert(label.with(qubit, Pauli::Y), -sin * x + cos * y);
    }
    for (&label, _) in tom.values.iter().filter(|(l, _)| l.on(qubit) == Pauli::Y) {
        tom.get(label.with(qubit, Pauli::X))?;
    }
    Ok(out)
}
