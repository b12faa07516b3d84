use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{TwoQubitOperator, C64, DIM};
use crate::error::Error;

/// Single-qubit Pauli operator.
///
/// `Z` is sign-flipped relative to the textbook form: `Z|0> = -|0>` and
/// `Z|1> = +|1>`, so `|0>` is the ground state of `+z Z/2` for `z > 0`.
/// `X` and `Y` keep their usual off-diagonal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let r = |x: f64| C64::new(x, 0.0);
        let i = |x: f64| C64::new(0.0, x);
        match self {
            Pauli::I => [[r(1.0), o], [o, r(1.0)]],
            Pauli::X => [[o, r(1.0)], [r(1.0), o]],
            Pauli::Y => [[o, i(-1.0)], [i(1.0), o]],
            Pauli::Z => [[r(-1.0), o], [o, r(1.0)]],
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Two-qubit Pauli product in tensor shorthand: `XI` is `X (x) I`, with the
/// first factor acting on qubit 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel(pub Pauli, pub Pauli);

impl PauliLabel {
    pub const II: Self = PauliLabel(Pauli::I, Pauli::I);
    pub const XI: Self = PauliLabel(Pauli::X, Pauli::I);
    pub const IX: Self = PauliLabel(Pauli::I, Pauli::X);
    pub const YI: Self = PauliLabel(Pauli::Y, Pauli::I);
    pub const IY: Self = PauliLabel(Pauli::I, Pauli::Y);
    pub const ZI: Self = PauliLabel(Pauli::Z, Pauli::I);
    pub const IZ: Self = PauliLabel(Pauli::I, Pauli::Z);
    pub const XX: Self = PauliLabel(Pauli::X, Pauli::X);
    pub const YY: Self = PauliLabel(Pauli::Y, Pauli::Y);
    pub const ZZ: Self = PauliLabel(Pauli::Z, Pauli::Z);
    pub const XY: Self = PauliLabel(Pauli::X, Pauli::Y);
    pub const YX: Self = PauliLabel(Pauli::Y, Pauli::X);

    /// The eight correlators reported in trace files.
    pub const REPORTED: [Self; 8] = [
        Self::XI,
        Self::IX,
        Self::YI,
        Self::IY,
        Self::ZI,
        Self::IZ,
        Self::XX,
        Self::YY,
    ];

    /// All sixteen labels, `II` first.
    pub fn all() -> impl Iterator<Item = PauliLabel> {
        Pauli::ALL
            .into_iter()
            .flat_map(|a| Pauli::ALL.into_iter().map(move |b| PauliLabel(a, b)))
    }

    /// The fifteen non-identity labels measured in full two-qubit tomography.
    pub fn non_identity() -> impl Iterator<Item = PauliLabel> {
        Self::all().filter(|l| *l != Self::II)
    }

    /// Factor acting on `qubit` (1 or 2).
    pub fn on(self, qubit: usize) -> Pauli {
        if qubit == 1 {
            self.0
        } else {
            self.1
        }
    }

    pub fn with(self, qubit: usize, p: Pauli) -> Self {
        if qubit == 1 {
            PauliLabel(p, self.1)
        } else {
            PauliLabel(self.0, p)
        }
    }

    pub fn is_identity(self) -> bool {
        self == Self::II
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0.as_char(), self.1.as_char())
    }
}

impl FromStr for PauliLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut chars = s.trim().chars();
        let parsed = match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) => Pauli::from_char(a).zip(Pauli::from_char(b)),
            _ => None,
        };
        parsed
            .map(|(a, b)| PauliLabel(a, b))
            .ok_or_else(|| Error::InvalidArgument(format!("bad Pauli label {s:?}")))
    }
}

/// Kronecker product of the two single-qubit factors of `label`.
pub fn pauli_matrix(label: PauliLabel) -> TwoQubitOperator {
    let a = label.0.matrix();
    let b = label.1.matrix();
    let mut m = TwoQubitOperator::zero();
    for i in 0..DIM {
        for j in 0..DIM {
            m.0[i][j] = a[i / 2][j / 2] * b[i % 2][j % 2];
        }
    }
    m
}
