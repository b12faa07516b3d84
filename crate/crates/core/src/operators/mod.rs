//! Dense two-qubit linear algebra.
//!
//! Everything lives on the four-dimensional computational basis ordered
//! `|00>, |01>, |10>, |11>`, where the first label belongs to qubit 1.
//! Matrices are stored as fixed-size arrays so the propagators never allocate.

mod eigen;
mod pauli;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

pub use num_complex::Complex64 as C64;

pub use eigen::{hermitian_eigendecomposition, EigenDecomposition};
pub use pauli::{pauli_matrix, Pauli, PauliLabel};

pub const DIM: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Pure state amplitudes over the computational basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ket(pub [C64; DIM]);

impl Ket {
    pub const fn zero() -> Self {
        Ket([ZERO; DIM])
    }

    /// Computational basis state with index `2*q1 + q2`.
    pub fn basis(index: usize) -> Self {
        let mut k = Ket::zero();
        k.0[index] = ONE;
        k
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Ket) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        *self * C64::new(1.0 / n, 0.0)
    }

    pub fn populations(&self) -> [f64; DIM] {
        let mut p = [0.0; DIM];
        for (pi, a) in p.iter_mut().zip(self.0.iter()) {
            *pi = a.norm_sqr();
        }
        p
    }
}

impl Index<usize> for Ket {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Ket {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for Ket {
    type Output = Ket;
    fn add(mut self, rhs: Ket) -> Ket {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Ket {
    type Output = Ket;
    fn sub(mut self, rhs: Ket) -> Ket {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul<C64> for Ket {
    type Output = Ket;
    fn mul(mut self, rhs: C64) -> Ket {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl Mul<f64> for Ket {
    type Output = Ket;
    fn mul(self, rhs: f64) -> Ket {
        self * C64::new(rhs, 0.0)
    }
}

/// 4x4 complex matrix acting on the two-qubit space.
///
/// Hamiltonians are stored as `H/h` in MHz; density matrices are stored
/// in the same type.
#[derive(Clone, Copy, PartialEq)]
pub struct TwoQubitOperator(pub [[C64; DIM]; DIM]);

impl fmt::Debug for TwoQubitOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TwoQubitOperator[")?;
        for row in &self.0 {
            write!(f, " ")?;
            for v in row {
                write!(f, " {:+.6}{:+.6}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Default for TwoQubitOperator {
    fn default() -> Self {
        Self::zero()
    }
}

impl TwoQubitOperator {
    pub const fn zero() -> Self {
        TwoQubitOperator([[ZERO; DIM]; DIM])
    }

    pub fn identity() -> Self {
        Self::from_real_diagonal([1.0; DIM])
    }

    pub fn from_real_diagonal(d: [f64; DIM]) -> Self {
        let mut m = Self::zero();
        for (i, v) in d.iter().enumerate() {
            m.0[i][i] = C64::new(*v, 0.0);
        }
        m
    }

    /// Rank-one operator `|a><b|`.
    pub fn outer(a: &Ket, b: &Ket) -> Self {
        let mut m = Self::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = a.0[i] * b.0[j].conj();
            }
        }
        m
    }

    /// Projector `|psi><psi|`.
    pub fn projector(psi: &Ket) -> Self {
        Self::outer(psi, psi)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..DIM).map(|i| self.0[i][i]).sum()
    }

    pub fn apply(&self, psi: &Ket) -> Ket {
        let mut out = Ket::zero();
        for i in 0..DIM {
            let mut acc = ZERO;
            for j in 0..DIM {
                acc += self.0[i][j] * psi.0[j];
            }
            out.0[i] = acc;
        }
        out
    }

    /// `<psi|M|psi>`
    pub fn expectation(&self, psi: &Ket) -> C64 {
        psi.inner(&self.apply(psi))
    }

    pub fn column(&self, j: usize) -> Ket {
        let mut k = Ket::zero();
        for i in 0..DIM {
            k.0[i] = self.0[i][j];
        }
        k
    }

    pub fn set_column(&mut self, j: usize, k: &Ket) {
        for i in 0..DIM {
            self.0[i][j] = k.0[i];
        }
    }

    /// Largest absolute element of `M - M^H`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..DIM {
            for j in i..DIM {
                dev = dev.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Off-diagonal Frobenius norm.
    pub fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                if i != j {
                    s += self.0[i][j].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let mut acc = ZERO;
        for i in 0..DIM {
            for k in 0..DIM {
                acc += self.0[i][k] * other.0[k][i];
            }
        }
        acc
    }

    pub fn diagonal_real(&self) -> [f64; DIM] {
        let mut d = [0.0; DIM];
        for (i, v) in d.iter_mut().enumerate() {
            *v = self.0[i][i].re;
        }
        d
    }
}

impl Index<(usize, usize)> for TwoQubitOperator {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for TwoQubitOperator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for TwoQubitOperator {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for TwoQubitOperator {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..DIM {
            for j in 0..DIM {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for TwoQubitOperator {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..DIM {
            for j in 0..DIM {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl Neg for TwoQubitOperator {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul for TwoQubitOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..DIM {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl Mul<C64> for TwoQubitOperator {
    type Output = Self;
    fn mul(mut self, rhs: C64) -> Self {
        for row in self.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= rhs;
            }
        }
        self
    }
}

impl Mul<f64> for TwoQubitOperator {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for row in self.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= rhs;
            }
        }
        self
    }
}

impl Mul<TwoQubitOperator> for f64 {
    type Output = TwoQubitOperator;
    fn mul(self, rhs: TwoQubitOperator) -> TwoQubitOperator {
        rhs * self
    }
}
