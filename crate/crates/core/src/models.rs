//! Coupling tensors J for the interaction families: anisotropic Heisenberg
//! (XYZ, with XXX as the isotropic case), Dzyaloshinskii–Moriya (DM),
//! KSEA, arbitrary 2-qubit couplings, and 2-body couplings on three qubits.
//!
//! The Hamiltonian is H = −½ Σ_m J_m Σ_m. A field B⃗ occupies the border
//! entries J_{i0} = J_{0i} = B_i (and J_{i00} = J_{0i0} = J_{00i} = B_i for
//! three qubits); the entry at the all-zero index is always 0.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{check_qubits, epsilon, tensor_len, MultiIndex, PauliIndex};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldVector(pub [f64; 3]);

impl FieldVector {
    pub const ZERO: Self = Self([0.0; 3]);

    pub fn new(bx: f64, by: f64, bz: f64) -> Self {
        Self([bx, by, bz])
    }

    pub fn along_z(b: f64) -> Self {
        Self([0.0, 0.0, b])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|b| b * b).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0.0)
    }
}

/// Real coupling tensor over extended Pauli indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTensor {
    qubits: usize,
    entries: Vec<f64>,
}

impl CouplingTensor {
    pub fn zeros(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        Ok(Self { qubits, entries: vec![0.0; tensor_len(qubits)] })
    }

    /// Validates the identity entry and, for three qubits, the 2-body restriction.
    pub fn from_entries(qubits: usize, entries: Vec<f64>) -> Result<Self> {
        check_qubits(qubits)?;
        if entries.len() != tensor_len(qubits) {
            return Err(Error::DimensionMismatch {
                expected: tensor_len(qubits),
                found: entries.len(),
            });
        }
        if entries[0] != 0.0 {
            return Err(Error::NonzeroIdentityCoupling(entries[0]));
        }
        if let Some((i, _)) = entries
            .iter()
            .enumerate()
            .find(|&(i, &v)| v != 0.0 && MultiIndex::from_flat(i, qubits).weight() > 2)
        {
            let m = MultiIndex::from_flat(i, qubits);
            return Err(Error::ThreeBodyTerm(m.indices().iter().map(|p| p.value()).collect()));
        }
        Ok(Self { qubits, entries })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn at(&self, idx: &[u8]) -> f64 {
        let flat = idx.iter().fold(0usize, |acc, &p| acc * 4 + p as usize);
        self.entries[flat]
    }

    /// Iterator over (flat index, value) of the nonzero entries.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied().enumerate().filter(|&(_, v)| v != 0.0)
    }

    /// The 4×4 block for two qubits.
    pub fn as_matrix(&self) -> Option<Matrix4<f64>> {
        (self.qubits == 2).then(|| Matrix4::from_fn(|r, c| self.entries[4 * r + c]))
    }
}

impl Add for &CouplingTensor {
    type Output = Result<CouplingTensor>;

    fn add(self, rhs: Self) -> Result<CouplingTensor> {
        if self.qubits != rhs.qubits {
            return Err(Error::WrongSystemSize { expected: self.qubits, found: rhs.qubits });
        }
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        CouplingTensor::from_entries(self.qubits, entries)
    }
}

/// Exchange block (Latin part only, no field) for a pair of spins.
pub fn exchange_xyz(j: [f64; 3]) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for i in 0..3 {
        m[(i + 1, i + 1)] = j[i];
    }
    m
}

/// J_{ij} = ε_{ijk} D_k.
pub fn exchange_dm(d: [f64; 3]) -> Matrix4<f64> {
    levi_civita_block(d, f64::from)
}

/// J_{ij} = ε²_{ijk} K_k.
pub fn exchange_ksea(k: [f64; 3]) -> Matrix4<f64> {
    levi_civita_block(k, |e| f64::from(e * e))
}

fn levi_civita_block(v: [f64; 3], weight: impl Fn(i8) -> f64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for i in 1..4u8 {
        for j in 1..4u8 {
            let mut acc = 0.0;
            for k in 1..4u8 {
                let e = epsilon(PauliIndex::new(i).unwrap(), PauliIndex::new(j).unwrap(), PauliIndex::new(k).unwrap());
                acc += weight(e) * v[(k - 1) as usize];
            }
            m[(i as usize, j as usize)] = acc;
        }
    }
    m
}

fn with_field(mut m: Matrix4<f64>, b: FieldVector) -> Matrix4<f64> {
    for i in 0..3 {
        m[(i + 1, 0)] = b.0[i];
        m[(0, i + 1)] = b.0[i];
    }
    m
}

pub fn coupling_xyz(j1: f64, j2: f64, j3: f64, b: FieldVector) -> CouplingTensor {
    coupling_general(with_field(exchange_xyz([j1, j2, j3]), b)).expect("zero corner")
}

pub fn coupling_xxx(j: f64, b: FieldVector) -> CouplingTensor {
    coupling_xyz(j, j, j, b)
}

pub fn coupling_dm(d: [f64; 3], b: FieldVector) -> CouplingTensor {
    coupling_general(with_field(exchange_dm(d), b)).expect("zero corner")
}

pub fn coupling_ksea(k: [f64; 3], b: FieldVector) -> CouplingTensor {
    coupling_general(with_field(exchange_ksea(k), b)).expect("zero corner")
}

/// Stores a full 4×4 J verbatim. J₀₀ must be 0.
pub fn coupling_general(j: Matrix4<f64>) -> Result<CouplingTensor> {
    let entries = (0..16).map(|i| j[(i / 4, i % 4)]).collect();
    CouplingTensor::from_entries(2, entries)
}

/// Unordered pair of qubits (1-based in text form, e.g. `1-2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QubitPair {
    P12,
    P13,
    P23,
}

impl QubitPair {
    pub const ALL: [Self; 3] = [Self::P12, Self::P13, Self::P23];

    /// Zero-based positions of the two qubits.
    pub fn positions(self) -> (usize, usize) {
        match self {
            Self::P12 => (0, 1),
            Self::P13 => (0, 2),
            Self::P23 => (1, 2),
        }
    }
}

impl FromStr for QubitPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits: String = s.chars().filter(|c| !matches!(c, '-' | ',' | ' ' | '(' | ')')).collect();
        match digits.as_str() {
            "12" => Ok(Self::P12),
            "13" => Ok(Self::P13),
            "23" => Ok(Self::P23),
            _ => Err(Error::MalformedPair(s.to_owned())),
        }
    }
}

impl fmt::Display for QubitPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.positions();
        write!(f, "{}-{}", a + 1, b + 1)
    }
}

/// Embeds per-pair 4×4 couplings into a 3-qubit tensor. The field acts on
/// every qubit identically. The (0,0) entry of each pair matrix must be 0;
/// any border entries in a pair matrix are embedded as single-site terms.
pub fn coupling_3q(pairs: &BTreeMap<QubitPair, Matrix4<f64>>, b: FieldVector) -> Result<CouplingTensor> {
    let mut entries = vec![0.0; tensor_len(3)];
    for (&pair, m) in pairs {
        if m[(0, 0)] != 0.0 {
            return Err(Error::NonzeroIdentityCoupling(m[(0, 0)]));
        }
        let (pa, pb) = pair.positions();
        for r in 0..4 {
            for c in 0..4 {
                if (r, c) == (0, 0) || m[(r, c)] == 0.0 {
                    continue;
                }
                let mut idx = [0usize; 3];
                idx[pa] = r;
                idx[pb] = c;
                entries[idx[0] * 16 + idx[1] * 4 + idx[2]] += m[(r, c)];
            }
        }
    }
    for (i, &bi) in b.0.iter().enumerate() {
        for site in 0..3 {
            let mut idx = [0usize; 3];
            idx[site] = i + 1;
            entries[idx[0] * 16 + idx[1] * 4 + idx[2]] += bi;
        }
    }
    CouplingTensor::from_entries(3, entries)
}

/// Same exchange block on all three pairs.
pub fn coupling_3q_uniform(exchange: Matrix4<f64>, b: FieldVector) -> Result<CouplingTensor> {
    let pairs = QubitPair::ALL.iter().map(|&p| (p, exchange)).collect();
    coupling_3q(&pairs, b)
}

/// Interaction families, used for randomized checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingFamily {
    Xxx,
    Xyz,
    Dm,
    Ksea,
    General,
}

impl CouplingFamily {
    pub const ALL: [Self; 5] = [Self::Xxx, Self::Xyz, Self::Dm, Self::Ksea, Self::General];

    pub fn name(self) -> &'static str {
        match self {
            Self::Xxx => "xxx",
            Self::Xyz => "xyz",
            Self::Dm => "dm",
            Self::Ksea => "ksea",
            Self::General => "general",
        }
    }
}

fn uniform3<R: rand::Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]
}

fn random_block<R: rand::Rng + ?Sized>(family: CouplingFamily, rng: &mut R) -> Matrix4<f64> {
    match family {
        CouplingFamily::Xxx => exchange_xyz([rng.random_range(-1.0..1.0); 3]),
        CouplingFamily::Xyz => exchange_xyz(uniform3(rng)),
        CouplingFamily::Dm => exchange_dm(uniform3(rng)),
        CouplingFamily::Ksea => exchange_ksea(uniform3(rng)),
        CouplingFamily::General => {
            let mut m = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            m[(0, 0)] = 0.0;
            m
        }
    }
}

/// Random coupling with entries uniform in [−1, 1) and a random field.
/// For three qubits each pair gets an independent block of the family.
pub fn random_coupling<R: rand::Rng + ?Sized>(family: CouplingFamily, qubits: usize, rng: &mut R) -> Result<CouplingTensor> {
    check_qubits(qubits)?;
    if qubits == 2 {
        let block = random_block(family, rng);
        let b = FieldVector(uniform3(rng));
        return match family {
            // A general block already carries its own border.
            CouplingFamily::General => coupling_general(block),
            _ => coupling_general(with_field(block, b)),
        };
    }
    let pairs: BTreeMap<QubitPair, Matrix4<f64>> = QubitPair::ALL
        .iter()
        .map(|&p| {
            let mut m = random_block(family, rng);
            // Single-site terms come from the common field only.
            for i in 1..4 {
                m[(i, 0)] = 0.0;
                m[(0, i)] = 0.0;
            }
            (p, m)
        })
        .collect();
    coupling_3q(&pairs, FieldVector(uniform3(rng)))
}

/// Parameters of a single interaction family, as read from JSON.
///
/// For `sum`, any subset of `J`, `D`, `K` may be given and the blocks add.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<serde_json::Value>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<[f64; 3]>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Xyz,
    Xxx,
    Dm,
    Ksea,
    General,
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub model: ModelKind,
    #[serde(default)]
    pub params: ModelParams,
}

/// JSON model description:
/// `{ "qubits": 2|3, "model": ..., "params": {...}, "field": [Bx,By,Bz], "pairs": {...} }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub qubits: usize,
    pub model: ModelKind,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default)]
    pub field: [f64; 3],
    /// Per-pair overrides for three qubits, keyed `"1-2"`, `"1-3"`, `"2-3"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<BTreeMap<String, PairSpec>>,
}

fn triple(v: &serde_json::Value, name: &str) -> Result<[f64; 3]> {
    serde_json::from_value::<[f64; 3]>(v.clone())
        .map_err(|e| Error::Config(format!("`{name}` must be three numbers: {e}")))
}

fn exchange_block(kind: ModelKind, p: &ModelParams) -> Result<Matrix4<f64>> {
    let need = |o: Option<[f64; 3]>, name: &str| {
        o.ok_or_else(|| Error::Config(format!("model needs parameter `{name}`")))
    };
    let j_triple = || -> Result<[f64; 3]> {
        let v = p.j.as_ref().ok_or_else(|| Error::Config("model needs parameter `J`".into()))?;
        triple(v, "J")
    };
    let block = match kind {
        ModelKind::Xyz => exchange_xyz(j_triple()?),
        ModelKind::Xxx => {
            let v = p.j.as_ref().ok_or_else(|| Error::Config("model needs parameter `J`".into()))?;
            let j = v.as_f64().ok_or_else(|| Error::Config("xxx `J` must be a number".into()))?;
            exchange_xyz([j; 3])
        }
        ModelKind::Dm => exchange_dm(need(p.d, "D")?),
        ModelKind::Ksea => exchange_ksea(need(p.k, "K")?),
        ModelKind::General => {
            let v = p.j.as_ref().ok_or_else(|| Error::Config("model needs parameter `J`".into()))?;
            let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone())
                .map_err(|e| Error::Config(format!("general `J` must be a 4x4 matrix: {e}")))?;
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return Err(Error::Config("general `J` must be a 4x4 matrix".into()));
            }
            Matrix4::from_fn(|r, c| rows[r][c])
        }
        ModelKind::Sum => {
            let mut m = Matrix4::zeros();
            if p.j.is_some() {
                m += exchange_xyz(j_triple()?);
            }
            if let Some(d) = p.d {
                m += exchange_dm(d);
            }
            if let Some(k) = p.k {
                m += exchange_ksea(k);
            }
            m
        }
    };
    Ok(block)
}

impl ModelSpec {
    pub fn field(&self) -> FieldVector {
        FieldVector(self.field)
    }

    pub fn coupling(&self) -> Result<CouplingTensor> {
        let b = self.field();
        match self.qubits {
            2 => {
                if self.pairs.is_some() {
                    return Err(Error::Config("`pairs` is only valid for 3 qubits".into()));
                }
                let block = exchange_block(self.model, &self.params)?;
                if self.model == ModelKind::General {
                    // The border of a general matrix is taken verbatim; `field` adds on top.
                    coupling_general(block + with_field(Matrix4::zeros(), b))
                } else {
                    coupling_general(with_field(block, b))
                }
            }
            3 => {
                let default = exchange_block(self.model, &self.params)?;
                let mut pairs: BTreeMap<QubitPair, Matrix4<f64>> =
                    QubitPair::ALL.iter().map(|&p| (p, default)).collect();
                if let Some(overrides) = &self.pairs {
                    for (key, spec) in overrides {
                        let pair: QubitPair = key.parse()?;
                        pairs.insert(pair, exchange_block(spec.model, &spec.params)?);
                    }
                }
                coupling_3q(&pairs, b)
            }
            n => Err(Error::UnsupportedSize(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xyz_examples() {
        let t = coupling_xyz(1.0, 1.0, 1.0, FieldVector::ZERO);
        let m = t.as_matrix().unwrap();
        assert_eq!(m, Matrix4::from_diagonal(&nalgebra::Vector4::new(0.0, 1.0, 1.0, 1.0)));

        let t = coupling_xyz(0.0, 0.0, 0.0, FieldVector::along_z(1.0));
        let nz: Vec<_> = t.nonzero().collect();
        assert_eq!(nz, vec![(3, 1.0), (12, 1.0)]);

        let (a, b, c) = (3f64.sqrt(), 2f64.sqrt(), 5f64.sqrt());
        let m = coupling_xyz(a, b, c, FieldVector::ZERO).as_matrix().unwrap();
        assert_eq!(m, Matrix4::from_diagonal(&nalgebra::Vector4::new(0.0, a, b, c)));
    }

    #[test]
    fn dm_examples() {
        let t = coupling_dm([0.0, 0.0, 1.0], FieldVector::ZERO);
        assert_eq!(t.at(&[1, 2]), 1.0);
        assert_eq!(t.at(&[2, 1]), -1.0);
        assert_eq!(t.nonzero().count(), 2);

        let m = coupling_dm([1.0, 1.0, 1.0], FieldVector::ZERO).as_matrix().unwrap();
        let want = Matrix4::new(
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, -1.0, //
            0.0, -1.0, 0.0, 1.0, //
            0.0, 1.0, -1.0, 0.0,
        );
        assert_eq!(m, want);

        let t = coupling_dm([0.0; 3], FieldVector::ZERO);
        assert_eq!(t.nonzero().count(), 0);
    }

    #[test]
    fn dm_with_field_matches_displayed_matrix() {
        let (d1, d2, d3) = (0.3, -1.1, 2.0);
        let (b1, b2, b3) = (0.5, 0.7, -0.2);
        let m = coupling_dm([d1, d2, d3], FieldVector::new(b1, b2, b3)).as_matrix().unwrap();
        let want = Matrix4::new(
            0.0, b1, b2, b3, //
            b1, 0.0, d3, -d2, //
            b2, -d3, 0.0, d1, //
            b3, d2, -d1, 0.0,
        );
        assert_eq!(m, want);
    }

    #[test]
    fn ksea_examples() {
        let t = coupling_ksea([0.0, 0.0, 1.0], FieldVector::ZERO);
        assert_eq!(t.at(&[1, 2]), 1.0);
        assert_eq!(t.at(&[2, 1]), 1.0);
        assert_eq!(t.nonzero().count(), 2);

        let m = coupling_ksea([1.0, 1.0, 1.0], FieldVector::ZERO).as_matrix().unwrap();
        for r in 1..4 {
            for c in 1..4 {
                assert_eq!(m[(r, c)], if r == c { 0.0 } else { 1.0 });
            }
        }

        let t = coupling_ksea([0.0; 3], FieldVector::new(1.0, 0.0, 0.0));
        let nz: Vec<_> = t.nonzero().collect();
        assert_eq!(nz, vec![(1, 1.0), (4, 1.0)]);
    }

    #[test]
    fn ksea_with_field_matches_displayed_matrix() {
        let (k1, k2, k3) = (0.3, -1.1, 2.0);
        let m = coupling_ksea([k1, k2, k3], FieldVector::along_z(0.4)).as_matrix().unwrap();
        let want = Matrix4::new(
            0.0, 0.0, 0.0, 0.4, //
            0.0, 0.0, k3, k2, //
            0.0, k3, 0.0, k1, //
            0.4, k2, k1, 0.0,
        );
        assert_eq!(m, want);
    }

    #[test]
    fn general_builder() {
        assert_eq!(coupling_general(Matrix4::zeros()).unwrap(), CouplingTensor::zeros(2).unwrap());
        let mut bad = Matrix4::zeros();
        bad[(0, 0)] = 1.0;
        assert!(matches!(coupling_general(bad), Err(Error::NonzeroIdentityCoupling(_))));
    }

    #[test]
    fn builders_add_linearly() {
        let b = FieldVector::new(0.1, 0.2, 0.3);
        let xyz = coupling_xyz(1.0, 2.0, 3.0, b);
        let dm = coupling_dm([0.5, -0.5, 0.25], FieldVector::ZERO);
        let ks = coupling_ksea([1.5, 0.0, -2.0], FieldVector::ZERO);
        let sum = (&(&xyz + &dm).unwrap() + &ks).unwrap();
        let want = with_field(
            exchange_xyz([1.0, 2.0, 3.0]) + exchange_dm([0.5, -0.5, 0.25]) + exchange_ksea([1.5, 0.0, -2.0]),
            b,
        );
        assert_eq!(sum.as_matrix().unwrap(), want);
    }

    #[test]
    fn dm_plus_ksea_without_third_components() {
        let dm = coupling_dm([1.0, 2.0, 0.0], FieldVector::ZERO);
        let ks = coupling_ksea([3.0, 4.0, 0.0], FieldVector::ZERO);
        let m = (&dm + &ks).unwrap().as_matrix().unwrap();
        assert_eq!(m[(1, 2)], 0.0);
        assert_eq!(m[(2, 1)], 0.0);
        assert_eq!(m[(1, 3)], -2.0 + 4.0);
        assert_eq!(m[(3, 1)], 2.0 + 4.0);
        assert_eq!(m[(2, 3)], 1.0 + 3.0);
        assert_eq!(m[(3, 2)], -1.0 + 3.0);
    }

    #[test]
    fn general_reproduces_dedicated_builders() {
        let b = FieldVector::new(0.4, -0.3, 1.2);
        let cases = [
            (coupling_xyz(1.0, -2.0, 0.5, b), with_field(exchange_xyz([1.0, -2.0, 0.5]), b)),
            (coupling_dm([0.2, 0.9, -1.4], b), with_field(exchange_dm([0.2, 0.9, -1.4]), b)),
            (coupling_ksea([0.7, -0.1, 2.2], b), with_field(exchange_ksea([0.7, -0.1, 2.2]), b)),
        ];
        for (built, matrix) in cases {
            assert_eq!(coupling_general(matrix).unwrap(), built);
        }
    }

    #[test]
    fn three_qubit_embedding() {
        let mut pairs = BTreeMap::new();
        pairs.insert(QubitPair::P12, exchange_xyz([0.7; 3]));
        let t = coupling_3q(&pairs, FieldVector::ZERO).unwrap();
        let nz: Vec<_> = t.nonzero().collect();
        assert_eq!(nz.len(), 3);
        for i in 1..4u8 {
            assert_eq!(t.at(&[i, i, 0]), 0.7);
        }

        let t = coupling_3q(&BTreeMap::new(), FieldVector::along_z(1.0)).unwrap();
        let nz: Vec<_> = t.nonzero().map(|(i, _)| i).collect();
        assert_eq!(nz.len(), 3);
        assert_eq!(t.at(&[3, 0, 0]), 1.0);
        assert_eq!(t.at(&[0, 3, 0]), 1.0);
        assert_eq!(t.at(&[0, 0, 3]), 1.0);

        let t = coupling_3q_uniform(exchange_dm([1.0; 3]), FieldVector::ZERO).unwrap();
        assert_eq!(t.nonzero().count(), 18);
        for (i, _) in t.nonzero() {
            assert_eq!(MultiIndex::from_flat(i, 3).weight(), 2);
        }
    }

    #[test]
    fn three_body_terms_rejected() {
        let mut entries = vec![0.0; 64];
        entries[16 + 4 + 1] = 1.0;
        assert!(matches!(CouplingTensor::from_entries(3, entries), Err(Error::ThreeBodyTerm(_))));
    }

    #[test]
    fn pair_keys() {
        assert_eq!("1-2".parse::<QubitPair>().unwrap(), QubitPair::P12);
        assert_eq!("(1,3)".parse::<QubitPair>().unwrap(), QubitPair::P13);
        assert_eq!("23".parse::<QubitPair>().unwrap(), QubitPair::P23);
        assert!("1-4".parse::<QubitPair>().is_err());
        assert!("2-1".parse::<QubitPair>().is_err());
        assert_eq!(QubitPair::P23.to_string(), "2-3");
    }

    #[test]
    fn model_spec_json() {
        let spec: ModelSpec = serde_json::from_str(
            r#"{"qubits":2,"model":"dm","params":{"D":[0,0,1]},"field":[0,0,0.5]}"#,
        )
        .unwrap();
        let j = spec.coupling().unwrap();
        assert_eq!(j, coupling_dm([0.0, 0.0, 1.0], FieldVector::along_z(0.5)));

        let spec: ModelSpec = serde_json::from_str(
            r#"{"qubits":3,"model":"sum","params":{"D":[1,1,0],"K":[1,1,0]},"field":[0,0,2],
                "pairs":{"1-3":{"model":"xyz","params":{"J":[1,-1,0]}}}}"#,
        )
        .unwrap();
        let j = spec.coupling().unwrap();
        assert_eq!(j.at(&[1, 0, 1]), 1.0);
        assert_eq!(j.at(&[2, 0, 2]), -1.0);
        assert_eq!(j.at(&[1, 3, 0]), exchange_dm([1.0, 1.0, 0.0])[(1, 3)] + exchange_ksea([1.0, 1.0, 0.0])[(1, 3)]);
        assert_eq!(j.at(&[0, 0, 3]), 2.0);

        let bad: ModelSpec =
            serde_json::from_str(r#"{"qubits":3,"model":"xxx","params":{"J":1},"pairs":{"1-4":{"model":"xxx","params":{"J":1}}}}"#)
                .unwrap();
        assert!(matches!(bad.coupling(), Err(Error::MalformedPair(_))));

        let missing: ModelSpec = serde_json::from_str(r#"{"qubits":2,"model":"ksea"}"#).unwrap();
        assert!(matches!(missing.coupling(), Err(Error::Config(_))));
    }
}
