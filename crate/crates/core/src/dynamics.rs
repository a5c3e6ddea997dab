//! Heisenberg-picture flow of correlation tensors, dT/dt = M T.
//!
//! The generator M is assembled from the structure tensors θ, ε and the
//! coupling J; it is real and skew-symmetric, so the flow is a rotation in
//! a set of invariant planes with characteristic frequencies ω.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::SkewDecomposition;
use crate::models::{CouplingTensor, FieldVector};
use crate::pauli::{epsilon, tensor_len, theta, CorrelationTensor, MultiIndex, PauliIndex};

/// Default relative tolerance for degeneracy merging and zero detection.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// Default bound on denominators in the commensurability test.
pub const MAX_DENOMINATOR: u64 = 64;

/// Default tolerance for rational reconstruction of frequency ratios.
pub const RATIO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    qubits: usize,
    matrix: DMatrix<f64>,
}

impl GeneratorMatrix {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// max |M + Mᵀ|.
    pub fn skew_defect(&self) -> f64 {
        (&self.matrix + self.matrix.transpose()).amax()
    }

    pub fn apply(&self, t: &CorrelationTensor) -> Vec<f64> {
        let x = DVector::from_column_slice(t.entries());
        (&self.matrix * x).iter().copied().collect()
    }
}

fn pidx(v: usize) -> PauliIndex {
    PauliIndex::new(v as u8).expect("index below 4")
}

/// M^{αβ}_{μν} = J_{ζη}(θ_{ζμα} ε_{ηνβ} + ε_{ζμα} θ_{ηνβ}).
pub fn generator_2q(j: &CouplingTensor) -> Result<GeneratorMatrix> {
    if j.qubits() != 2 {
        return Err(Error::WrongSystemSize { expected: 2, found: j.qubits() });
    }
    let mut m = DMatrix::zeros(16, 16);
    for (flat, coupling) in j.nonzero() {
        let (zeta, eta) = (pidx(flat / 4), pidx(flat % 4));
        for row in 0..16 {
            let (mu, nu) = (pidx(row / 4), pidx(row % 4));
            for col in 0..16 {
                let (alpha, beta) = (pidx(col / 4), pidx(col % 4));
                let s = theta(zeta, mu, alpha) * epsilon(eta, nu, beta)
                    + epsilon(zeta, mu, alpha) * theta(eta, nu, beta);
                if s != 0 {
                    m[(row, col)] += coupling * f64::from(s);
                }
            }
        }
    }
    Ok(GeneratorMatrix { qubits: 2, matrix: m })
}

/// M^{αβγ}_{μνλ} = J_{ζηω}(εθθ + θεθ + θθε − εεε).
pub fn generator_3q(j: &CouplingTensor) -> Result<GeneratorMatrix> {
    if j.qubits() != 3 {
        return Err(Error::WrongSystemSize { expected: 3, found: j.qubits() });
    }
    Ok(GeneratorMatrix { qubits: 3, matrix: assemble_3q(j.entries(), -1) })
}

/// Generator for an unrestricted 3-qubit coupling vector, 3-body terms
/// included.
///
/// With 2-body couplings one index of every J entry is 0 and the εεε term
/// vanishes identically, so its sign is only observable through a 3-body
/// probe. This entry point exists for that check and nothing else.
#[doc(hidden)]
pub fn generator_3q_probe(entries: &[f64], triple_epsilon_sign: i8) -> Result<GeneratorMatrix> {
    if entries.len() != 64 {
        return Err(Error::DimensionMismatch { expected: 64, found: entries.len() });
    }
    if entries[0] != 0.0 {
        return Err(Error::NonzeroIdentityCoupling(entries[0]));
    }
    Ok(GeneratorMatrix { qubits: 3, matrix: assemble_3q(entries, triple_epsilon_sign) })
}

fn assemble_3q(j: &[f64], triple_epsilon_sign: i8) -> DMatrix<f64> {
    let split = |i: usize| (pidx(i / 16), pidx((i / 4) % 4), pidx(i % 4));
    let mut m = DMatrix::zeros(64, 64);
    for (flat, &coupling) in j.iter().enumerate().filter(|(_, c)| **c != 0.0) {
        let (z, e, w) = split(flat);
        for row in 0..64 {
            let (mu, nu, la) = split(row);
            for col in 0..64 {
                let (al, be, ga) = split(col);
                let (t1, e1) = (theta(z, mu, al), epsilon(z, mu, al));
                let (t2, e2) = (theta(e, nu, be), epsilon(e, nu, be));
                let (t3, e3) = (theta(w, la, ga), epsilon(w, la, ga));
                let s = e1 * t2 * t3 + t1 * e2 * t3 + t1 * t2 * e3 + triple_epsilon_sign * e1 * e2 * e3;
                if s != 0 {
                    m[(row, col)] += coupling * f64::from(s);
                }
            }
        }
    }
    m
}

/// Dispatches on the coupling's system size.
pub fn generator(j: &CouplingTensor) -> Result<GeneratorMatrix> {
    match j.qubits() {
        2 => generator_2q(j),
        _ => generator_3q(j),
    }
}

/// Characteristic frequencies with multiplicities (number of ±iω pairs).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpectrum {
    pub frequencies: Vec<(f64, usize)>,
    /// Half the number of zero eigenvalues.
    pub zero_count: usize,
    pub dimension: usize,
}

impl FrequencySpectrum {
    /// Groups magnitudes into a spectrum; values below the zero threshold
    /// count as zero pairs. `dimension` is the matrix size.
    pub fn from_values(values: &[f64], dimension: usize, tol: f64) -> Self {
        let mut mags: Vec<f64> = values.iter().map(|w| w.abs()).collect();
        mags.sort_by(f64::total_cmp);
        let scale = mags.last().copied().unwrap_or(0.0).max(1.0);
        let thr = tol * scale;

        let mut frequencies: Vec<(f64, usize)> = Vec::new();
        let mut cluster: Vec<f64> = Vec::new();
        let flush = |cluster: &mut Vec<f64>, out: &mut Vec<(f64, usize)>| {
            if !cluster.is_empty() {
                let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
                out.push((mean, cluster.len()));
                cluster.clear();
            }
        };
        for &w in mags.iter().filter(|&&w| w > thr) {
            if let Some(&last) = cluster.last() {
                if w - last >= thr {
                    flush(&mut cluster, &mut frequencies);
                }
            }
            cluster.push(w);
        }
        flush(&mut cluster, &mut frequencies);

        let pairs: usize = frequencies.iter().map(|f| f.1).sum();
        let zero_count = (dimension - 2 * pairs) / 2;
        Self { frequencies, zero_count, dimension }
    }

    pub fn nonzero_count(&self) -> usize {
        self.frequencies.iter().map(|f| f.1).sum()
    }

    /// Largest relative deviation between matching frequencies, or `None`
    /// if the multiplicity structure differs.
    pub fn max_relative_deviation(&self, other: &Self) -> Option<f64> {
        if self.zero_count != other.zero_count || self.frequencies.len() != other.frequencies.len() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.frequencies.iter().zip(&other.frequencies) {
            if a.1 != b.1 {
                return None;
            }
            worst = worst.max((a.0 - b.0).abs() / a.0.abs().max(b.0.abs()));
        }
        Some(worst)
    }
}

/// Eigen-frequencies of a skew-symmetric generator.
///
/// Values closer than `tol · max(|λ|_max, 1)` are merged; values below that
/// threshold are zeros.
pub fn frequencies(m: &GeneratorMatrix, tol: f64) -> Result<FrequencySpectrum> {
    let dec = SkewDecomposition::new(m.matrix())?;
    Ok(FrequencySpectrum::from_values(&dec.rotation_frequencies(), dec.dim(), tol))
}

/// Two-qubit models with closed-form spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// Isotropic Heisenberg with arbitrary field.
    Xxx { j: f64, field: FieldVector },
    XyzNoField { j: [f64; 3] },
    /// Anisotropic Heisenberg with field (0, 0, b).
    XyzZField { j: [f64; 3], b: f64 },
    DmNoField { d: [f64; 3] },
    DmField { d: [f64; 3], field: FieldVector },
    /// KSEA with K₁ = K₂ = K₃ = k and no field.
    KseaUniform { k: f64 },
}

impl ClosedForm {
    pub fn coupling(&self) -> CouplingTensor {
        use crate::models::{coupling_dm, coupling_ksea, coupling_xxx, coupling_xyz};
        match *self {
            Self::Xxx { j, field } => coupling_xxx(j, field),
            Self::XyzNoField { j } => coupling_xyz(j[0], j[1], j[2], FieldVector::ZERO),
            Self::XyzZField { j, b } => coupling_xyz(j[0], j[1], j[2], FieldVector::along_z(b)),
            Self::DmNoField { d } => coupling_dm(d, FieldVector::ZERO),
            Self::DmField { d, field } => coupling_dm(d, field),
            Self::KseaUniform { k } => coupling_ksea([k; 3], FieldVector::ZERO),
        }
    }

    /// Recognizes a 2-qubit coupling with a closed-form spectrum.
    pub fn detect(j: &CouplingTensor) -> Option<Self> {
        let m = j.as_matrix()?;
        let field = FieldVector([m[(1, 0)], m[(2, 0)], m[(3, 0)]]);
        for i in 1..4 {
            if m[(i, 0)] != m[(0, i)] {
                return None;
            }
        }
        let diag = [m[(1, 1)], m[(2, 2)], m[(3, 3)]];
        let off = |a: usize, b: usize| (m[(a, b)], m[(b, a)]);
        let (o12, o13, o23) = (off(1, 2), off(1, 3), off(2, 3));
        let offdiag_zero = [o12, o13, o23].iter().all(|&(a, b)| a == 0.0 && b == 0.0);
        let z_field = field.0[0] == 0.0 && field.0[1] == 0.0;

        if offdiag_zero {
            if diag[0] == diag[1] && diag[1] == diag[2] {
                return Some(Self::Xxx { j: diag[0], field });
            }
            if field.is_zero() {
                return Some(Self::XyzNoField { j: diag });
            }
            if z_field {
                return Some(Self::XyzZField { j: diag, b: field.0[2] });
            }
            return None;
        }
        if diag.iter().any(|&d| d != 0.0) {
            return None;
        }
        let antisym = [o12, o13, o23].iter().all(|&(a, b)| a == -b);
        if antisym {
            // J_ij = ε_ijk D_k
            let d = [o23.0, -o13.0, o12.0];
            return Some(if field.is_zero() { Self::DmNoField { d } } else { Self::DmField { d, field } });
        }
        let sym = [o12, o13, o23].iter().all(|&(a, b)| a == b);
        if sym && field.is_zero() && o12.0 == o13.0 && o13.0 == o23.0 {
            return Some(Self::KseaUniform { k: o12.0 });
        }
        None
    }

    /// Signed frequency list including explicit zeros, one entry per pair.
    fn raw_values(&self) -> Vec<f64> {
        match *self {
            Self::Xxx { j, field } => {
                let b = field.norm();
                vec![b, b, 2.0 * b, 2.0 * j, b + 2.0 * j, b - 2.0 * j, 0.0, 0.0]
            }
            Self::XyzNoField { j: [j1, j2, j3] } => {
                vec![j1 + j2, j1 - j2, j2 + j3, j2 - j3, j1 + j3, j1 - j3, 0.0, 0.0]
            }
            Self::XyzZField { j: [j1, j2, j3], b } => {
                let w1 = j1 + j2;
                let w2 = (4.0 * b * b + (j1 - j2).powi(2)).sqrt();
                let mut v = vec![w1, w2];
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        v.push((w1 + s1 * w2) / 2.0 + s2 * j3);
                    }
                }
                v.extend([0.0, 0.0]);
                v
            }
            Self::DmNoField { d } => {
                let n = norm3(d);
                vec![n, n, n, n, 2.0 * n, 0.0, 0.0, 0.0]
            }
            Self::DmField { d, field } => {
                let b = field.0;
                let diff = norm3([d[0] - b[0], d[1] - b[1], d[2] - b[2]]);
                let sum = norm3([d[0] + b[0], d[1] + b[1], d[2] + b[2]]);
                let base = norm3(d).powi(2) + norm3(b).powi(2);
                let lo = (base - diff * sum).max(0.0);
                vec![
                    diff,
                    diff,
                    sum,
                    sum,
                    2f64.sqrt() * (base + diff * sum).sqrt(),
                    2f64.sqrt() * lo.sqrt(),
                    0.0,
                    0.0,
                ]
            }
            Self::KseaUniform { k } => vec![k, k, 2.0 * k, 3.0 * k, 3.0 * k, 0.0, 0.0, 0.0],
        }
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Spectrum from the closed-form frequency formulas (magnitudes, merged).
pub fn analytic_frequencies(model: &ClosedForm, tol: f64) -> FrequencySpectrum {
    FrequencySpectrum::from_values(&model.raw_values(), 16, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periodicity {
    pub periodic: bool,
    /// 2π / (gcd frequency) when periodic; `None` when non-periodic or when
    /// every frequency is zero.
    pub period: Option<f64>,
}

/// Best rational approximation p/q of `x` with q ≤ `max_den` by continued
/// fractions, accepted only if within `tol` (relative to max(1, x)).
fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol * x.max(1.0) {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac <= f64::EPSILON {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Commensurability test: every nonzero ω must be a rational multiple of
/// the smallest one with denominator ≤ `max_denominator`.
pub fn is_periodic(spec: &FrequencySpectrum, max_denominator: u64, tol: f64) -> Periodicity {
    let Some(&(w_min, _)) = spec.frequencies.first() else {
        return Periodicity { periodic: true, period: None };
    };
    let mut ratios = Vec::with_capacity(spec.frequencies.len());
    for &(w, _) in &spec.frequencies {
        match rational_approx(w / w_min, max_denominator, tol) {
            Some(pq) => ratios.push(pq),
            None => return Periodicity { periodic: false, period: None },
        }
    }
    let lcm = ratios.iter().fold(1u64, |l, &(_, q)| l / gcd(l, q) * q);
    let g = ratios.iter().fold(0u64, |g, &(p, q)| gcd(g, p * (lcm / q)));
    let fundamental = w_min / lcm as f64 * g as f64;
    Periodicity { periodic: true, period: Some(2.0 * PI / fundamental) }
}

/// exp(M t) applied to tensors, with the decomposition computed once.
#[derive(Debug, Clone)]
pub struct Propagator {
    qubits: usize,
    decomposition: SkewDecomposition,
}

impl Propagator {
    pub fn new(m: &GeneratorMatrix) -> Result<Self> {
        Ok(Self { qubits: m.qubits(), decomposition: SkewDecomposition::new(m.matrix())? })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn propagate(&self, t0: &CorrelationTensor, t: f64) -> Result<CorrelationTensor> {
        if t0.qubits() != self.qubits {
            return Err(Error::DimensionMismatch {
                expected: tensor_len(self.qubits),
                found: t0.entries().len(),
            });
        }
        if t == 0.0 {
            return Ok(t0.clone());
        }
        let x = DVector::from_column_slice(t0.entries());
        let mut y: Vec<f64> = self.decomposition.apply_exp(&x, t).iter().copied().collect();
        // Row and column 0 of M vanish, so T₀₀ is exactly conserved.
        y[0] = t0.entries()[0];
        Ok(CorrelationTensor::from_raw(self.qubits, y))
    }

    pub fn trajectory(&self, t0: &CorrelationTensor, times: &[f64]) -> Result<Vec<CorrelationTensor>> {
        times.iter().map(|&t| self.propagate(t0, t)).collect()
    }

    /// Frequencies from the same decomposition.
    pub fn spectrum(&self, tol: f64) -> FrequencySpectrum {
        FrequencySpectrum::from_values(
            &self.decomposition.rotation_frequencies(),
            self.decomposition.dim(),
            tol,
        )
    }

}

/// T(t) = exp(M t) T(0).
pub fn propagate(t0: &CorrelationTensor, m: &GeneratorMatrix, t: f64) -> Result<CorrelationTensor> {
    Propagator::new(m)?.propagate(t0, t)
}

/// [`propagate`] at every grid point, sharing one decomposition.
pub fn trajectory(t0: &CorrelationTensor, m: &GeneratorMatrix, times: &[f64]) -> Result<Vec<CorrelationTensor>> {
    if times.is_empty() {
        return Ok(Vec::new());
    }
    Propagator::new(m)?.trajectory(t0, times)
}

/// Uniform grid of `samples` points on [0, t_max].
pub fn uniform_grid(t_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Reduced 2-qubit coordinates (T_A, T_B, T_AB).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationVector2Q {
    pub t_a: f64,
    pub t_b: f64,
    pub t_ab: f64,
}

impl CorrelationVector2Q {
    pub fn tab_squared(&self) -> f64 {
        self.t_ab * self.t_ab
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.t_a - other.t_a)
            .abs()
            .max((self.t_b - other.t_b).abs())
            .max((self.t_ab - other.t_ab).abs())
    }
}

/// Squared sector sums by correlation order: entry k−1 holds the sum of T²
/// over words with exactly k non-identity positions.
pub fn sector_sums(t: &CorrelationTensor) -> Vec<f64> {
    let n = t.qubits();
    let mut sums = vec![0.0; n];
    for (i, &v) in t.entries().iter().enumerate().skip(1) {
        let w = MultiIndex::from_flat(i, n).weight();
        sums[w - 1] += v * v;
    }
    sums
}

pub fn correlation_vector_2q(t: &CorrelationTensor) -> Result<CorrelationVector2Q> {
    if t.qubits() != 2 {
        return Err(Error::WrongSystemSize { expected: 2, found: t.qubits() });
    }
    let e = t.entries();
    let (mut a, mut b, mut ab) = (0.0, 0.0, 0.0);
    for i in 1..4 {
        a += e[4 * i] * e[4 * i];
        b += e[i] * e[i];
        for j in 1..4 {
            ab += e[4 * i + j] * e[4 * i + j];
        }
    }
    Ok(CorrelationVector2Q { t_a: a.sqrt(), t_b: b.sqrt(), t_ab: ab.sqrt() })
}

/// Squared sector lengths (A₁, A₂, A₃) of a 3-qubit tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorLengths3Q {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl SectorLengths3Q {
    pub fn total(&self) -> f64 {
        self.a1 + self.a2 + self.a3
    }
}

pub fn sector_lengths_3q(t: &CorrelationTensor) -> Result<SectorLengths3Q> {
    if t.qubits() != 3 {
        return Err(Error::WrongSystemSize { expected: 3, found: t.qubits() });
    }
    let s = sector_sums(t);
    Ok(SectorLengths3Q { a1: s[0], a2: s[1], a3: s[2] })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCheck {
    pub inside: bool,
    /// RHS − T²_AB of the region inequality.
    pub margin: f64,
}

/// T²_AB ≤ 3 + T²_A + T²_B − 4 T_A T_B − 4 |T_A − T_B|.
pub fn region_check_2q(v: &CorrelationVector2Q, tol: f64) -> RegionCheck {
    let rhs = 3.0 + v.t_a * v.t_a + v.t_b * v.t_b - 4.0 * v.t_a * v.t_b - 4.0 * (v.t_a - v.t_b).abs();
    let margin = rhs - v.tab_squared();
    RegionCheck { inside: margin >= -tol, margin }
}

/// Largest reachable T²_AB from |00⟩ under J₁ = −J₂ with field (0, 0, B).
///
/// Only B/J₁ matters; the piecewise law is 3 up to |B/J₁| = 1 and
/// 1 + 2(2b/(1+b²))² beyond.
pub fn max_tab_analytic(j1: f64, j2: f64, b: f64) -> Result<f64> {
    if j1 == 0.0 || (j1 + j2).abs() > 1e-12 * j1.abs() {
        return Err(Error::OutOfDomain { value: j2, domain: "J2 = -J1 != 0" });
    }
    let b = (b / j1).abs();
    Ok(if b <= 1.0 { 3.0 } else { 1.0 + 2.0 * (2.0 * b / (1.0 + b * b)).powi(2) })
}

/// Models with a closed-form T²_AB(t) starting from |00⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TabCase {
    XyzNoField { j1: f64, j2: f64 },
    DmUniform { d: f64 },
    KseaUniform { k: f64 },
}

pub fn tab_analytic(case: TabCase, t: f64) -> f64 {
    match case {
        TabCase::XyzNoField { j1, j2 } => 1.0 + 2.0 * ((j1 - j2) * t).sin().powi(2),
        TabCase::DmUniform { d } => {
            let w = 3f64.sqrt() * d * t;
            (12.0 - 4.0 * (2.0 * w).cos() + (4.0 * w).cos()) / 9.0
        }
        TabCase::KseaUniform { k } => (13.0 - 4.0 * (6.0 * k * t).cos()) / 9.0,
    }
}
