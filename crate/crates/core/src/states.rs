//! Initial states and simple tensor transformations.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{check_qubits, hilbert_dim, tensor_from_density, tensor_len, CorrelationTensor, MultiIndex};
use crate::stationary::gamel_check;

/// Name of the random generator, recorded in output headers.
pub const RNG_NAME: &str = "ChaCha8Rng";

/// Tolerance on the sum of mixture weights.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Default tolerance for the purity seed search.
pub const PURITY_SEARCH_TOL: f64 = 5e-5;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalized complex Gaussian vector (Haar-distributed pure state).
pub fn random_state_vector<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

fn pure_tensor(psi: &DVector<Complex64>) -> Result<CorrelationTensor> {
    tensor_from_density(&(psi * psi.adjoint()))
}

pub fn random_pure(seed: u64, qubits: usize) -> Result<CorrelationTensor> {
    check_qubits(qubits)?;
    let mut rng = rng_from_seed(seed);
    pure_tensor(&random_state_vector(&mut rng, hilbert_dim(qubits)))
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("empty weight list".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!("negative or non-finite weight {w}")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
    }
    Ok(())
}

fn mixture_vectors(seed: u64, qubits: usize, count: usize) -> Vec<DVector<Complex64>> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| random_state_vector(&mut rng, hilbert_dim(qubits))).collect()
}

/// Convex mixture of independent random pure states, drawn in order from
/// one generator seeded with `seed`.
pub fn random_mixture(seed: u64, qubits: usize, weights: &[f64]) -> Result<CorrelationTensor> {
    check_qubits(qubits)?;
    check_weights(weights)?;
    let comps = mixture_vectors(seed, qubits, weights.len())
        .iter()
        .map(pure_tensor)
        .collect::<Result<Vec<_>>>()?;
    mix(&comps, weights)
}

/// Convex combination of tensors.
pub fn mix(tensors: &[CorrelationTensor], weights: &[f64]) -> Result<CorrelationTensor> {
    check_weights(weights)?;
    if tensors.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} states",
            weights.len(),
            tensors.len()
        )));
    }
    let qubits = tensors[0].qubits();
    let mut out = vec![0.0; tensor_len(qubits)];
    for (t, &w) in tensors.iter().zip(weights) {
        if t.qubits() != qubits {
            return Err(Error::WrongSystemSize { expected: qubits, found: t.qubits() });
        }
        for (o, v) in out.iter_mut().zip(t.entries()) {
            *o += w * v;
        }
    }
    out[0] = 1.0;
    Ok(CorrelationTensor::from_raw(qubits, out))
}

/// Purity of a random mixture, computed from state overlaps.
fn mixture_purity(vectors: &[DVector<Complex64>], weights: &[f64]) -> f64 {
    let mut p = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            p += weights[i] * weights[j] * a.dotc(b).norm_sqr();
        }
    }
    p
}

/// First seed in `0..max_seeds` whose random mixture has purity within
/// `tol` of `target`.
pub fn seed_for_purity(qubits: usize, weights: &[f64], target: f64, tol: f64, max_seeds: u64) -> Result<Option<u64>> {
    check_qubits(qubits)?;
    check_weights(weights)?;
    Ok((0..max_seeds).find(|&seed| {
        let vs = mixture_vectors(seed, qubits, weights.len());
        (mixture_purity(&vs, weights) - target).abs() < tol
    }))
}

/// T₀₀ = 1, Tᵢᵢ = tᵢ, all else zero; rejected when not positive.
pub fn bell_diagonal(t1: f64, t2: f64, t3: f64) -> Result<CorrelationTensor> {
    let mut e = vec![0.0; 16];
    e[0] = 1.0;
    e[5] = t1;
    e[10] = t2;
    e[15] = t3;
    let t = CorrelationTensor::from_raw(2, e);
    let report = gamel_check(&t)?;
    if !report.satisfied {
        return Err(Error::NotPositive(report.min_margin()));
    }
    Ok(t)
}

/// |0…0⟩: unit entries exactly at multi-indices over {0, 3}.
pub fn basis_state(qubits: usize) -> Result<CorrelationTensor> {
    check_qubits(qubits)?;
    let e = (0..tensor_len(qubits))
        .map(|i| {
            let m = MultiIndex::from_flat(i, qubits);
            let on = m.indices().iter().all(|p| p.value() == 0 || p.value() == 3);
            if on {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(CorrelationTensor::from_raw(qubits, e))
}

fn require_two(t: &CorrelationTensor) -> Result<()> {
    if t.qubits() != 2 {
        return Err(Error::WrongSystemSize { expected: 2, found: t.qubits() });
    }
    Ok(())
}

/// Transposition on qubit B: T_{μ2} → −T_{μ2}.
pub fn partial_transpose_b(t: &CorrelationTensor) -> Result<CorrelationTensor> {
    require_two(t)?;
    let mut e = t.entries().to_vec();
    for mu in 0..4 {
        e[4 * mu + 2] = -e[4 * mu + 2];
    }
    Ok(CorrelationTensor::from_raw(2, e))
}

/// Cyclic relabelling of the first qubit's axes, T_{i,ν} → T_{i+1,ν}.
///
/// The output satisfies `out[i+1][ν] = in[i][ν]` (indices 1..3 mod 3); it is
/// the local rotation taking x → y → z → x on qubit A.
pub fn local_cycle(t: &CorrelationTensor) -> Result<CorrelationTensor> {
    require_two(t)?;
    let src = t.entries();
    let mut e = src.to_vec();
    for i in 1..4 {
        let next = i % 3 + 1;
        for nu in 0..4 {
            e[4 * next + nu] = src[4 * i + nu];
        }
    }
    Ok(CorrelationTensor::from_raw(2, e))
}

pub fn purity(t: &CorrelationTensor) -> f64 {
    t.purity()
}

/// Schmidt coefficients (a, b), a ≥ b, of a pure 2-qubit state with the
/// given T²_AB, inverting T²_AB = 1 + 8a²b².
pub fn schmidt_from_tab(tab_squared: f64) -> Result<(f64, f64)> {
    if !(1.0..=3.0).contains(&tab_squared) {
        return Err(Error::OutOfDomain { value: tab_squared, domain: "[1, 3]" });
    }
    let a2 = 0.5 + (0.25 - (tab_squared - 1.0) / 8.0).max(0.0).sqrt();
    let b2 = 1.0 - a2;
    Ok((a2.sqrt(), b2.max(0.0).sqrt()))
}

/// Bloch vector of each qubit (entries with a single non-identity index).
pub fn bloch_vectors(t: &CorrelationTensor) -> Vec<[f64; 3]> {
    let n = t.qubits();
    (0..n)
        .map(|q| {
            let mut v = [0.0; 3];
            for (k, slot) in v.iter_mut().enumerate() {
                let mut idx = vec![0u8; n];
                idx[q] = k as u8 + 1;
                *slot = t.at(&idx);
            }
            v
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    PureRandom,
    MixedRandom,
    BellDiagonal,
    #[serde(rename = "basis_00")]
    Basis00,
    #[serde(rename = "basis_000")]
    Basis000,
    Explicit,
}

/// JSON state description.
///
/// `mixed_random` uses `weights`; if `target_purity` is set, the seed is
/// replaced by the first seed at or after `seed` reaching that purity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub kind: StateKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<serde_json::Value>,
    /// (t₁, t₂, t₃) for `bell_diagonal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_purity: Option<f64>,
}

/// Seeds scanned by [`StateSpec::build`] when `target_purity` is set.
pub const SEED_SEARCH_LIMIT: u64 = 1_000_000;

fn flatten(v: &serde_json::Value, out: &mut Vec<f64>) -> Result<()> {
    match v {
        serde_json::Value::Array(items) => items.iter().try_for_each(|x| flatten(x, out)),
        serde_json::Value::Number(n) => {
            out.push(n.as_f64().ok_or_else(|| Error::Config(format!("bad number {n}")))?);
            Ok(())
        }
        other => Err(Error::Config(format!("tensor entries must be numbers, got {other}"))),
    }
}

impl StateSpec {
    pub fn new(kind: StateKind) -> Self {
        Self { kind, seed: 0, weights: None, tensor: None, diagonal: None, target_purity: None }
    }

    /// Seed after applying the purity search, if requested.
    pub fn resolved_seed(&self, qubits: usize) -> Result<u64> {
        let (Some(target), StateKind::MixedRandom) = (self.target_purity, self.kind) else {
            return Ok(self.seed);
        };
        let weights = self.mixture_weights()?;
        let found = (self.seed..self.seed.saturating_add(SEED_SEARCH_LIMIT)).find(|&s| {
            let vs = mixture_vectors(s, qubits, weights.len());
            (mixture_purity(&vs, &weights) - target).abs() < PURITY_SEARCH_TOL
        });
        found.ok_or_else(|| Error::Config(format!("no seed reaches purity {target}")))
    }

    fn mixture_weights(&self) -> Result<Vec<f64>> {
        let w = self.weights.clone().unwrap_or_else(|| vec![0.75, 0.25]);
        check_weights(&w)?;
        Ok(w)
    }

    pub fn build(&self, qubits: usize) -> Result<CorrelationTensor> {
        check_qubits(qubits)?;
        let expect = |n: usize| {
            if n == qubits {
                Ok(())
            } else {
                Err(Error::WrongSystemSize { expected: qubits, found: n })
            }
        };
        match self.kind {
            StateKind::PureRandom => random_pure(self.seed, qubits),
            StateKind::MixedRandom => random_mixture(self.resolved_seed(qubits)?, qubits, &self.mixture_weights()?),
            StateKind::BellDiagonal => {
                expect(2)?;
                let [a, b, c] = self
                    .diagonal
                    .ok_or_else(|| Error::Config("bell_diagonal needs `diagonal`".into()))?;
                bell_diagonal(a, b, c)
            }
            StateKind::Basis00 => {
                expect(2)?;
                basis_state(2)
            }
            StateKind::Basis000 => {
                expect(3)?;
                basis_state(3)
            }
            StateKind::Explicit => {
                let v = self
                    .tensor
                    .as_ref()
                    .ok_or_else(|| Error::Config("explicit state needs `tensor`".into()))?;
                let mut flat = Vec::new();
                flatten(v, &mut flat)?;
                CorrelationTensor::from_entries(qubits, flat)
            }
        }
    }
}
