//! Extended Pauli algebra over the index set {0, 1, 2, 3} and the bijection
//! between density matrices and correlation tensors.
//!
//! Index 0 is the identity, 1..=3 are σ_x, σ_y, σ_z. Multi-qubit words are
//! flattened row-major with the first qubit most significant, so for two
//! qubits the word (μ, ν) sits at position `4μ + ν`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity and trace tolerance for density matrices handed to
/// [`tensor_from_density`].
pub const DENSITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliIndex(u8);

impl PauliIndex {
    pub const I: Self = Self(0);
    pub const X: Self = Self(1);
    pub const Y: Self = Self(2);
    pub const Z: Self = Self(3);
    pub const ALL: [Self; 4] = [Self::I, Self::X, Self::Y, Self::Z];

    pub fn new(value: u8) -> Result<Self> {
        if value > 3 {
            return Err(Error::InvalidIndex(value));
        }
        Ok(Self(value))
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_identity(self) -> bool {
        self.0 == 0
    }
}

/// Symmetric structure tensor: 1 iff one index is 0 and the other two agree.
///
/// The all-zero triple counts (σ₀σ₀ = σ₀).
pub fn theta(a: PauliIndex, b: PauliIndex, c: PauliIndex) -> i8 {
    let (a, b, c) = (a.0, b.0, c.0);
    let hit = (a == 0 && b == c) || (b == 0 && a == c) || (c == 0 && a == b);
    i8::from(hit)
}

/// Levi-Civita symbol on {1,2,3}, zero whenever any index is 0.
pub fn epsilon(a: PauliIndex, b: PauliIndex, c: PauliIndex) -> i8 {
    match (a.0, b.0, c.0) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1,
        _ => 0,
    }
}

/// Expansion of σ_μ σ_ζ = (θ_{μζα} + i ε_{μζα}) σ_α.
///
/// Exactly one α contributes, so the single `(α, coefficient)` pair is
/// returned.
pub fn pauli_product(mu: PauliIndex, zeta: PauliIndex) -> (PauliIndex, Complex64) {
    let mut terms = PauliIndex::ALL.iter().filter_map(|&alpha| {
        let c = Complex64::new(
            f64::from(theta(mu, zeta, alpha)),
            f64::from(epsilon(mu, zeta, alpha)),
        );
        (c.norm_sqr() > 0.0).then_some((alpha, c))
    });
    let term = terms.next().expect("Pauli product always has one term");
    debug_assert!(terms.next().is_none());
    term
}

/// An ordered tuple of Pauli indices, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<PauliIndex>);

impl MultiIndex {
    pub fn new(indices: Vec<PauliIndex>) -> Result<Self> {
        check_qubits(indices.len())?;
        Ok(Self(indices))
    }

    /// Parses raw values such as `[3, 0]`.
    pub fn from_values(values: &[u8]) -> Result<Self> {
        let indices = values
            .iter()
            .map(|&v| PauliIndex::new(v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices)
    }

    pub fn from_flat(flat: usize, qubits: usize) -> Self {
        let mut out = vec![PauliIndex::I; qubits];
        let mut rest = flat;
        for slot in out.iter_mut().rev() {
            *slot = PauliIndex((rest % 4) as u8);
            rest /= 4;
        }
        Self(out)
    }

    pub fn flat(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.0 as usize)
    }

    pub fn qubits(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[PauliIndex] {
        &self.0
    }

    /// Number of non-identity positions (the correlation order of the word).
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| !p.is_identity()).count()
    }
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedSize(n))
    }
}

/// Number of tensor entries, 4^N.
#[inline]
pub fn tensor_len(qubits: usize) -> usize {
    1 << (2 * qubits)
}

/// Hilbert-space dimension, 2^N.
#[inline]
pub fn hilbert_dim(qubits: usize) -> usize {
    1 << qubits
}

pub fn single_qubit_matrix(p: PauliIndex) -> Matrix2<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match p.0 {
        0 => Matrix2::new(l, o, o, l),
        1 => Matrix2::new(o, l, l, o),
        2 => Matrix2::new(o, -i, i, o),
        _ => Matrix2::new(l, o, o, -l),
    }
}

/// Kronecker product σ_{m₁} ⊗ … ⊗ σ_{m_N}.
pub fn pauli_word_matrix(m: &MultiIndex) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for &p in m.indices() {
        let s = single_qubit_matrix(p);
        let s = DMatrix::from_iterator(2, 2, s.iter().copied());
        out = out.kronecker(&s);
    }
    out
}

fn words(qubits: usize) -> &'static [DMatrix<Complex64>] {
    static TWO: OnceLock<Vec<DMatrix<Complex64>>> = OnceLock::new();
    static THREE: OnceLock<Vec<DMatrix<Complex64>>> = OnceLock::new();
    let build = || {
        (0..tensor_len(qubits))
            .map(|i| pauli_word_matrix(&MultiIndex::from_flat(i, qubits)))
            .collect()
    };
    match qubits {
        2 => TWO.get_or_init(build),
        3 => THREE.get_or_init(build),
        _ => unreachable!("qubit count validated by caller"),
    }
}

/// Cached Pauli word for flat index `i`.
pub(crate) fn word(qubits: usize, i: usize) -> &'static DMatrix<Complex64> {
    &words(qubits)[i]
}

/// Tr(A·B) without forming the product.
pub(crate) fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Real tensor T over extended Pauli indices; T at the all-zero index is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    qubits: usize,
    entries: Vec<f64>,
}

impl CorrelationTensor {
    /// Wraps raw entries in flat order. The identity entry must be 1 to 1e-10.
    pub fn from_entries(qubits: usize, entries: Vec<f64>) -> Result<Self> {
        check_qubits(qubits)?;
        if entries.len() != tensor_len(qubits) {
            return Err(Error::DimensionMismatch {
                expected: tensor_len(qubits),
                found: entries.len(),
            });
        }
        if (entries[0] - 1.0).abs() > DENSITY_TOL {
            return Err(Error::IdentityEntry(entries[0]));
        }
        Ok(Self { qubits, entries })
    }

    pub(crate) fn from_raw(qubits: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), tensor_len(qubits));
        Self { qubits, entries }
    }

    /// Tensor of the maximally mixed state: only the identity entry is set.
    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let mut entries = vec![0.0; tensor_len(qubits)];
        entries[0] = 1.0;
        Ok(Self { qubits, entries })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn get(&self, m: &MultiIndex) -> f64 {
        self.entries[m.flat()]
    }

    /// Entry at explicit raw indices, e.g. `t.at(&[3, 0])`.
    pub fn at(&self, idx: &[u8]) -> f64 {
        let flat = idx.iter().fold(0usize, |acc, &p| acc * 4 + p as usize);
        self.entries[flat]
    }

    pub fn set(&mut self, idx: &[u8], value: f64) {
        let flat = idx.iter().fold(0usize, |acc, &p| acc * 4 + p as usize);
        self.entries[flat] = value;
    }

    /// Tr ρ² = 2^{-N} Σ T².
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|t| t * t).sum::<f64>() / hilbert_dim(self.qubits) as f64
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// T_m = Tr(Σ_m ρ).
pub fn tensor_from_density(rho: &DMatrix<Complex64>) -> Result<CorrelationTensor> {
    let dim = rho.nrows();
    if rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.ncols(),
        });
    }
    let qubits = match dim {
        4 => 2,
        8 => 3,
        other => return Err(Error::DimensionMismatch { expected: 4, found: other }),
    };
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > DENSITY_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::TraceNotUnit(tr.re));
    }
    let mut entries: Vec<f64> = (0..tensor_len(qubits))
        .map(|i| trace_product(word(qubits, i), rho).re)
        .collect();
    // The trace was validated above; pin T₀ to its exact value.
    entries[0] = 1.0;
    Ok(CorrelationTensor { qubits, entries })
}

/// ρ = 2^{-N} Σ_m T_m Σ_m. Positivity is not checked.
pub fn density_from_tensor(t: &CorrelationTensor) -> DMatrix<Complex64> {
    let dim = hilbert_dim(t.qubits);
    let mut rho = DMatrix::zeros(dim, dim);
    for (i, &value) in t.entries.iter().enumerate() {
        if value != 0.0 {
            rho += word(t.qubits, i) * Complex64::new(value, 0.0);
        }
    }
    rho / Complex64::new(dim as f64, 0.0)
}
