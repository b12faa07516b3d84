use super::{Ket, TwoQubitOperator, C64, DIM};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub values: [f64; DIM],
    pub vectors: TwoQubitOperator,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Ket {
        self.vectors.column(k)
    }

    /// `V diag(values) V^H`
    pub fn reconstruct(&self) -> TwoQubitOperator {
        self.vectors * TwoQubitOperator::from_real_diagonal(self.values) * self.vectors.adjoint()
    }
}

/// Cyclic complex Jacobi diagonalization of a Hermitian 4x4 matrix.
///
/// Each rotation first removes the phase of the pivot element and then applies
/// the real symmetric Jacobi rotation, so every step is a unitary similarity.
/// Iteration stops once the off-diagonal Frobenius norm drops below
/// `1e-12 * |M|_F`. Eigenvectors of degenerate clusters come back in an
/// arbitrary (but deterministic) orthonormal basis.
pub fn hermitian_eigendecomposition(m: &TwoQubitOperator) -> Result<EigenDecomposition> {
    let deviation = m.hermiticity_deviation();
    if !(deviation <= HERMITIAN_TOL * m.max_abs().max(1.0)) {
        return Err(Error::NotHermitian { deviation });
    }

    let mut a = (*m + m.adjoint()) * 0.5;
    let mut v = TwoQubitOperator::identity();
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= threshold {
            break;
        }
        for p in 0..DIM - 1 {
            for q in p + 1..DIM {
                let apq = a.0[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let theta = (a.0[q][q].re - a.0[p][p].re) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // U = diag(1, e^{-i phi}) * [[c, s], [-s, c]] on the (p, q) block.
                let mut u = TwoQubitOperator::identity();
                u.0[p][p] = C64::new(c, 0.0);
                u.0[p][q] = C64::new(s, 0.0);
                u.0[q][p] = phase.conj() * -s;
                u.0[q][q] = phase.conj() * c;

                a = u.adjoint() * a * u;
                a.0[p][q] = C64::new(0.0, 0.0);
                a.0[q][p] = C64::new(0.0, 0.0);
                v = v * u;
            }
        }
    }

    let diag = a.diagonal_real();
    let mut order: [usize; DIM] = [0, 1, 2, 3];
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));

    let mut values = [0.0; DIM];
    let mut vectors = TwoQubitOperator::zero();
    for (k, &src) in order.iter().enumerate() {
        values[k] = diag[src];
        vectors.set_column(k, &v.column(src));
    }
    Ok(EigenDecomposition { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{pauli_matrix, PauliLabel};
    use proptest::prelude::*;

    fn hermitian_from(params: &[f64]) -> TwoQubitOperator {
        let mut m = TwoQubitOperator::zero();
        let mut k = 0;
        for i in 0..DIM {
            m.0[i][i] = C64::new(params[k], 0.0);
            k += 1;
            for j in i + 1..DIM {
                let z = C64::new(params[k], params[k + 1]);
                k += 2;
                m.0[i][j] = z;
                m.0[j][i] = z.conj();
            }
        }
        m
    }

    /// Characteristic polynomial coefficients via Faddeev-LeVerrier:
    /// det(lambda - M) = lambda^4 + c[3] lambda^3 + c[2] lambda^2 + c[1] lambda + c[0].
    fn characteristic_polynomial(m: &TwoQubitOperator) -> [C64; 4] {
        let mut c = [C64::new(0.0, 0.0); 4];
        let mut mk = TwoQubitOperator::zero();
        let id = TwoQubitOperator::identity();
        let mut prev = C64::new(1.0, 0.0);
        for k in 1..=DIM {
            mk = *m * (mk + id * prev);
            let ck = -mk.trace() / k as f64;
            c[DIM - k] = ck;
            prev = ck;
        }
        c
    }

    /// Durand-Kerner simultaneous iteration on the monic quartic.
    fn quartic_roots(c: [C64; 4]) -> [f64; 4] {
        let eval = |z: C64| ((((z + c[3]) * z + c[2]) * z + c[1]) * z) + c[0];
        let seed = C64::new(0.4, 0.9);
        let mut roots = [seed, seed * seed, seed * seed * seed, seed * seed * seed * seed];
        let scale = 1.0 + c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for r in roots.iter_mut() {
            *r *= scale;
        }
        for _ in 0..2000 {
            let old = roots;
            for i in 0..4 {
                let mut denom = C64::new(1.0, 0.0);
                for j in 0..4 {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                roots[i] -= eval(roots[i]) / denom;
            }
            let delta: f64 = roots.iter().zip(old.iter()).map(|(a, b)| (a - b).norm()).sum();
            if delta < 1e-15 * scale {
                break;
            }
        }
        let mut out = roots.map(|z| z.re);
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn diagonal_input() {
        let m = TwoQubitOperator::from_real_diagonal([0.5, -2.0, 2.0, -0.5]);
        let e = hermitian_eigendecomposition(&m).unwrap();
        assert_eq!(e.values, [-2.0, -0.5, 0.5, 2.0]);
    }

    #[test]
    fn longitudinal_fields_are_diagonal() {
        let m = (pauli_matrix(PauliLabel::ZI) * 2.5 + pauli_matrix(PauliLabel::IZ) * 1.5) * 0.5;
        let e = hermitian_eigendecomposition(&m).unwrap();
        assert_eq!(e.values, [-2.0, -0.5, 0.5, 2.0]);
        // |00> is the ground state under the Z sign convention
        assert!((e.vector(0).inner(&Ket::basis(0)).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = TwoQubitOperator::identity();
        m.0[0][1] = C64::new(1.0, 0.0);
        assert!(matches!(
            hermitian_eigendecomposition(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn zero_matrix() {
        let e = hermitian_eigendecomposition(&TwoQubitOperator::zero()).unwrap();
        assert_eq!(e.values, [0.0; 4]);
        assert_eq!(e.vectors, TwoQubitOperator::identity());
    }

    #[test]
    fn matches_characteristic_polynomial_roots() {
        let params = [
            0.3, 1.1, -0.4, 0.7, 0.2, -1.3, 0.5, -0.8, 0.6, 0.1, 2.2, -0.9, 0.35, 1.7, 0.05, -0.6,
        ];
        let m = hermitian_from(&params);
        let oracle = quartic_roots(characteristic_polynomial(&m));
        let e = hermitian_eigendecomposition(&m).unwrap();
        for (a, b) in e.values.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", e.values, oracle);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn decomposition_properties(params in prop::collection::vec(-5.0f64..5.0, 16)) {
            let m = hermitian_from(&params);
            let e = hermitian_eigendecomposition(&m).unwrap();
            let norm = m.frobenius_norm().max(1e-300);

            for w in e.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let recon = (e.reconstruct() - m).frobenius_norm();
            prop_assert!(recon <= 1e-9 * norm, "reconstruction {}", recon);

            let unitarity = (e.vectors.adjoint() * e.vectors - TwoQubitOperator::identity()).max_abs();
            prop_assert!(unitarity <= 1e-9);

            for k in 0..DIM {
                let v = e.vector(k);
                let resid = (m.apply(&v) - v * e.values[k]).norm();
                prop_assert!(resid <= 1e-9 * norm);
            }

            let trace_sum: f64 = e.values.iter().sum();
            prop_assert!((trace_sum - m.trace().re).abs() <= 1e-10 * norm.max(1.0));

            let oracle = quartic_roots(characteristic_polynomial(&m));
            for (a, b) in e.values.iter().zip(oracle.iter()) {
                prop_assert!((a - b).abs() < 1e-6 * norm.max(1.0), "{:?} vs {:?}", e.values, oracle);
            }
        }
    }
}
