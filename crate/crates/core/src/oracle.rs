//! Schrödinger-picture reference implementation.
//!
//! Everything here works on dense complex matrices and the Hermitian
//! eigendecomposition of H, independently of the θ/ε machinery used by
//! [`crate::dynamics`]. It is meant for cross-checking, not speed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::GeneratorMatrix;
use crate::error::{Error, Result};
use crate::models::CouplingTensor;
use crate::pauli::{density_from_tensor, hilbert_dim, tensor_from_density, trace_product, word, CorrelationTensor, MultiIndex};

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    qubits: usize,
    entries: DMatrix<Complex64>,
}

impl HamiltonianMatrix {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// exp(−iHt) from the eigendecomposition H = V Λ V†.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let eig = self.entries.clone().symmetric_eigen();
        let phases = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
        );
        let v = &eig.eigenvectors;
        v * DMatrix::from_diagonal(&phases) * v.adjoint()
    }
}

/// H = −½ Σ_m J_m Σ_m.
pub fn hamiltonian_matrix(j: &CouplingTensor) -> HamiltonianMatrix {
    hamiltonian_from_entries(j.qubits(), j.entries())
}

/// Same as [`hamiltonian_matrix`] for an unvalidated coefficient vector
/// (3-body probe terms allowed). `entries` must have length 4^qubits.
pub fn hamiltonian_from_entries(qubits: usize, entries: &[f64]) -> HamiltonianMatrix {
    let d = hilbert_dim(qubits);
    let mut h = DMatrix::zeros(d, d);
    for (i, &c) in entries.iter().enumerate().filter(|(_, c)| **c != 0.0) {
        h += word(qubits, i) * Complex64::new(-0.5 * c, 0.0);
    }
    HamiltonianMatrix { qubits, entries: h }
}

/// U ρ₀ U† with U = exp(−iHt).
pub fn evolve_density(rho0: &DMatrix<Complex64>, h: &HamiltonianMatrix, t: f64) -> Result<DMatrix<Complex64>> {
    let d = h.entries.nrows();
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.nrows() });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let u = h.unitary(t);
    Ok(&u * rho0 * u.adjoint())
}

/// Tensor route through the density matrix: T → ρ → UρU† → T.
pub fn evolve_tensor(t0: &CorrelationTensor, h: &HamiltonianMatrix, t: f64) -> Result<CorrelationTensor> {
    if t0.qubits() != h.qubits {
        return Err(Error::WrongSystemSize { expected: h.qubits, found: t0.qubits() });
    }
    let rho = evolve_density(&density_from_tensor(t0), h, t)?;
    tensor_from_density(&rho)
}

/// Coefficients c_α of i[H, Σ_m] = Σ_α c_α Σ_α, c_α = 2^{−N} Tr(Σ_α · i[H, Σ_m]).
pub fn commutator_expand(h: &HamiltonianMatrix, m: &MultiIndex) -> Result<Vec<f64>> {
    if m.qubits() != h.qubits {
        return Err(Error::WrongSystemSize { expected: h.qubits, found: m.qubits() });
    }
    let n = h.qubits;
    let s = word(n, m.flat());
    let comm = (&h.entries * s - s * &h.entries) * Complex64::new(0.0, 1.0);
    let norm = hilbert_dim(n) as f64;
    Ok((0..crate::pauli::tensor_len(n))
        .map(|a| trace_product(word(n, a), &comm).re / norm)
        .collect())
}

/// Generator assembled row by row from commutator expansions.
pub fn assemble_generator(h: &HamiltonianMatrix) -> Result<DMatrix<f64>> {
    let n = h.qubits;
    let len = crate::pauli::tensor_len(n);
    let mut m = DMatrix::zeros(len, len);
    for row in 0..len {
        let c = commutator_expand(h, &MultiIndex::from_flat(row, n))?;
        for (col, v) in c.into_iter().enumerate() {
            m[(row, col)] = v;
        }
    }
    Ok(m)
}

/// Entry-wise max |M_dynamics − M_oracle|.
pub fn generator_deviation(m: &GeneratorMatrix, h: &HamiltonianMatrix) -> Result<f64> {
    Ok((m.matrix() - assemble_generator(h)?).amax())
}

/// Tr ρᵏ for k = 1..=4.
pub fn power_traces(rho: &DMatrix<Complex64>) -> [f64; 4] {
    let r2 = rho * rho;
    let r3 = &r2 * rho;
    let r4 = &r2 * &r2;
    [rho.trace().re, r2.trace().re, r3.trace().re, r4.trace().re]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{generator, generator_3q_probe, propagate};
    use crate::models::{coupling_3q, coupling_dm, coupling_xxx, exchange_dm, FieldVector, QubitPair};
    use crate::states::random_pure;

    #[test]
    fn zero_coupling() {
        let h = hamiltonian_matrix(&CouplingTensor::zeros(2).unwrap());
        assert_eq!(h.entries().camax(), 0.0);
        let c = commutator_expand(&h, &MultiIndex::from_values(&[1, 2]).unwrap()).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hamiltonian_spectra() {
        let h = hamiltonian_matrix(&coupling_xxx(1.0, FieldVector::ZERO));
        let ev = h.eigenvalues();
        let want = [-0.5, -0.5, -0.5, 1.5];
        // H = −½ Σ σᵢσᵢ: triplet at −½, singlet at +3/2
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "{ev:?}");
        }
        let h = hamiltonian_matrix(&coupling_xxx(0.0, FieldVector::along_z(1.0)));
        let ev = h.eigenvalues();
        for (a, b) in ev.iter().zip([-1.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14, "{ev:?}");
        }
        assert!((h.entries() - h.entries().adjoint()).camax() < 1e-14);
    }

    #[test]
    fn evolve_edge_cases() {
        let h = hamiltonian_matrix(&coupling_xxx(0.0, FieldVector::along_z(0.7)));
        let mut rho = DMatrix::zeros(4, 4);
        for (i, p) in [0.1, 0.2, 0.3, 0.4].iter().enumerate() {
            rho[(i, i)] = Complex64::new(*p, 0.0);
        }
        assert_eq!(evolve_density(&rho, &h, 0.0).unwrap(), rho);
        assert!((evolve_density(&rho, &h, 2.3).unwrap() - &rho).camax() < 1e-15);
        assert!(evolve_density(&DMatrix::zeros(8, 8), &h, 1.0).is_err());
    }

    #[test]
    fn commutator_rows_match_generator() {
        let j = coupling_xxx(1.0, FieldVector::ZERO);
        let h = hamiltonian_matrix(&j);
        let m = generator(&j).unwrap();
        let m30 = MultiIndex::from_values(&[3, 0]).unwrap();
        let row = commutator_expand(&h, &m30).unwrap();
        for (a, v) in row.iter().enumerate() {
            assert!((v - m.matrix()[(m30.flat(), a)]).abs() < 1e-14);
        }
    }

    #[test]
    fn three_qubit_pair_coupling() {
        let mut pairs = std::collections::BTreeMap::new();
        pairs.insert(QubitPair::P12, exchange_dm([0.4, -0.9, 1.3]));
        let j = coupling_3q(&pairs, FieldVector::ZERO).unwrap();
        let h = hamiltonian_matrix(&j);
        assert!(generator_deviation(&generator(&j).unwrap(), &h).unwrap() < 1e-12);
    }

    #[test]
    fn three_body_probe_fixes_sign() {
        let mut e = vec![0.0; 64];
        e[16 + 8 + 3] = 0.8; // Σ₁₂₃
        e[32 + 12 + 1] = -0.3; // Σ₂₃₁
        e[5] = 0.5; // Σ₀₁₁
        let h = hamiltonian_from_entries(3, &e);
        let right = generator_3q_probe(&e, -1).unwrap();
        let wrong = generator_3q_probe(&e, 1).unwrap();
        assert!(generator_deviation(&right, &h).unwrap() < 1e-12);
        assert!(generator_deviation(&wrong, &h).unwrap() > 0.1);
        assert!(generator_3q_probe(&e[..16], -1).is_err());
    }

    #[test]
    fn tensor_routes_agree() {
        let j = coupling_dm([0.3, 1.1, -0.4], FieldVector::new(0.2, -0.5, 0.8));
        let h = hamiltonian_matrix(&j);
        let m = generator(&j).unwrap();
        let t0 = random_pure(42, 2).unwrap();
        for t in [0.3, 1.7, 12.5] {
            let a = evolve_tensor(&t0, &h, t).unwrap();
            let b = propagate(&t0, &m, t).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn power_traces_preserved() {
        let j = coupling_dm([1.0, 0.2, 0.0], FieldVector::along_z(0.5));
        let h = hamiltonian_matrix(&j);
        let t0 = crate::states::random_mixture(1, 2, &[0.7, 0.3]).unwrap();
        let rho = density_from_tensor(&t0);
        let before = power_traces(&rho);
        let after = power_traces(&evolve_density(&rho, &h, 3.3).unwrap());
        for k in 0..4 {
            assert!((before[k] - after[k]).abs() < 1e-12);
        }
    }
}
