//! Stationary states: ker(M), the density-matrix families it spans, and
//! their positivity regions.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::dynamics::{GeneratorMatrix, Propagator};
use crate::error::{Error, Result};
use crate::linalg::SkewDecomposition;
use crate::models::{coupling_dm, coupling_ksea, coupling_xyz, CouplingTensor, FieldVector};
use crate::oracle::power_traces;
use crate::pauli::{density_from_tensor, hilbert_dim, CorrelationTensor};

/// Default cutoff (relative to the generator scale) for zero frequencies.
pub const NULLSPACE_TOL: f64 = 1e-9;

/// Entries within this distance of an integer are snapped to it.
pub const SNAP_TOL: f64 = 1e-8;

/// Margins above −GAMEL_TOL count as satisfied.
pub const GAMEL_TOL: f64 = 1e-10;

/// Upper end of the "on the boundary" window for the smallest margin.
pub const BOUNDARY_UPPER: f64 = 1e-6;

/// Allowed disagreement between explicit polynomials and power traces.
const POLY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NullspaceBasis {
    pub vectors: Vec<DVector<f64>>,
    /// False after canonicalization (the echelon rows are not orthogonal).
    pub orthonormal: bool,
}

impl NullspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    fn orthonormal_columns(&self) -> DMatrix<f64> {
        if self.vectors.is_empty() {
            return DMatrix::zeros(0, 0);
        }
        DMatrix::from_columns(&self.vectors).qr().q()
    }

    /// ‖v − P v‖ / ‖v‖ with P the orthogonal projector onto the span.
    pub fn projection_residual(&self, v: &DVector<f64>) -> f64 {
        let norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        if self.vectors.is_empty() {
            return 1.0;
        }
        let q = self.orthonormal_columns();
        (v - &q * q.tr_mul(v)).norm() / norm
    }

    /// Largest residual of M v over the basis vectors.
    pub fn max_residual(&self, m: &GeneratorMatrix) -> f64 {
        self.vectors.iter().map(|v| (m.matrix() * v).amax()).fold(0.0, f64::max)
    }
}

/// Reduced row-echelon form with unit pivots and integer snapping.
fn canonicalize(vectors: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let k = vectors.len();
    let mut a = DMatrix::from_fn(k, n, |r, c| vectors[r][c]);
    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row == k {
            break;
        }
        let (best, val) = (pivot_row..k)
            .map(|r| (r, a[(r, col)].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty range");
        if val < SNAP_TOL {
            continue;
        }
        a.swap_rows(pivot_row, best);
        let p = a[(pivot_row, col)];
        for c in 0..n {
            a[(pivot_row, c)] /= p;
        }
        for r in 0..k {
            if r != pivot_row {
                let f = a[(r, col)];
                if f != 0.0 {
                    for c in 0..n {
                        a[(r, c)] -= f * a[(pivot_row, c)];
                    }
                }
            }
        }
        pivot_row += 1;
    }
    a.apply(|x| {
        let r = x.round();
        if (*x - r).abs() < SNAP_TOL {
            *x = r;
        }
    });
    (0..pivot_row).map(|r| a.row(r).transpose()).collect()
}

/// Basis of ker(M), canonicalized to reduced row-echelon form.
pub fn nullspace(m: &GeneratorMatrix, tol: f64) -> Result<NullspaceBasis> {
    let dec = SkewDecomposition::new(m.matrix())?;
    let kernel = dec.kernel_basis(tol * dec.scale().max(1.0));
    Ok(NullspaceBasis { vectors: canonicalize(&kernel, m.dim()), orthonormal: false })
}

/// The stationary families with published parametrizations and
/// positivity systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DocumentedFamily {
    /// Anisotropic Heisenberg, B = 0.
    HeisenbergNoField,
    /// Anisotropic Heisenberg, B = (0, 0, B), Δ = (J₁ − J₂)/B.
    HeisenbergZField { delta: f64 },
    /// DM with D = (1, 1, 1), B = (0, 0, 1).
    DmZField,
    /// KSEA with K = (1, 1, 1), B = (0, 0, 1).
    KseaZField,
}

type Coefficients = Vec<(usize, [f64; 3])>;

impl DocumentedFamily {
    pub fn name(&self) -> String {
        match self {
            Self::HeisenbergNoField => "heisenberg".into(),
            Self::HeisenbergZField { delta } => format!("heisenberg-zfield(delta={delta})"),
            Self::DmZField => "dm-zfield".into(),
            Self::KseaZField => "ksea-zfield".into(),
        }
    }

    /// ρ-coefficients of x, y, z on each Pauli word (flat index).
    fn coefficients(&self) -> Coefficients {
        match *self {
            Self::HeisenbergNoField => vec![(5, [1.0, 0.0, 0.0]), (10, [0.0, 1.0, 0.0]), (15, [0.0, 0.0, 1.0])],
            Self::HeisenbergZField { delta } => vec![
                (3, [1.0, 0.0, 0.0]),
                (12, [1.0, 0.0, 0.0]),
                (5, [delta, 1.0, 0.0]),
                (10, [0.0, 1.0, 0.0]),
                (15, [0.0, 0.0, 1.0]),
            ],
            Self::DmZField => vec![
                (1, [0.0, -2.0, 1.0]),
                (2, [2.0, 0.0, 1.0]),
                (3, [0.0, 0.0, 1.0]),
                (4, [2.0, 0.0, 1.0]),
                (5, [1.0, 1.0, 0.0]),
                (6, [1.0, 1.0, 1.0]),
                (7, [2.0, 0.0, 0.0]),
                (8, [0.0, -2.0, 1.0]),
                (9, [1.0, 1.0, -1.0]),
                (10, [1.0, 1.0, 0.0]),
                (11, [0.0, 2.0, 0.0]),
                (12, [0.0, 0.0, 1.0]),
                (13, [0.0, 2.0, 0.0]),
                (14, [2.0, 0.0, 0.0]),
            ],
            Self::KseaZField => vec![
                (1, [0.0, -1.0, 1.0]),
                (2, [0.0, -1.0, 1.0]),
                (3, [0.0, 0.0, 1.0]),
                (4, [0.0, -1.0, 1.0]),
                (5, [1.0, 1.0, -1.0]),
                (6, [0.0, 1.0, 0.0]),
                (7, [0.0, 1.0, 0.0]),
                (8, [0.0, -1.0, 1.0]),
                (9, [0.0, 1.0, 0.0]),
                (10, [1.0, 1.0, -1.0]),
                (11, [0.0, 1.0, 0.0]),
                (12, [0.0, 0.0, 1.0]),
                (13, [0.0, 1.0, 0.0]),
                (14, [0.0, 1.0, 0.0]),
                (15, [1.0, 0.0, 0.0]),
            ],
        }
    }

    pub fn family(&self) -> StationaryFamily {
        let mut directions = vec![vec![0.0; 16]; 3];
        for (idx, c) in self.coefficients() {
            for k in 0..3 {
                directions[k][idx] += 4.0 * c[k];
            }
        }
        StationaryFamily {
            base: CorrelationTensor::maximally_mixed(2).expect("two qubits"),
            directions,
            parameter_names: vec!["x".into(), "y".into(), "z".into()],
            documented: Some(*self),
        }
    }

    /// A coupling for which this family is the full stationary set.
    pub fn reference_coupling(&self) -> CouplingTensor {
        match *self {
            Self::HeisenbergNoField => coupling_xyz(1.0, 0.5, 0.3, FieldVector::ZERO),
            Self::HeisenbergZField { delta } => coupling_xyz(1.0 + delta, 1.0, 0.3, FieldVector::along_z(1.0)),
            Self::DmZField => coupling_dm([1.0; 3], FieldVector::along_z(1.0)),
            Self::KseaZField => coupling_ksea([1.0; 3], FieldVector::along_z(1.0)),
        }
    }

    /// Finds a documented family whose directions all lie in ker(M) and
    /// exhaust it.
    pub fn detect(j: &CouplingTensor, m: &GeneratorMatrix) -> Option<Self> {
        if j.qubits() != 2 {
            return None;
        }
        let basis = nullspace(m, NULLSPACE_TOL).ok()?;
        if basis.dim() != 4 {
            return None;
        }
        let field = [j.at(&[1, 0]), j.at(&[2, 0]), j.at(&[3, 0])];
        let mut candidates = vec![Self::HeisenbergNoField, Self::DmZField, Self::KseaZField];
        if field[0] == 0.0 && field[1] == 0.0 && field[2] != 0.0 {
            candidates.push(Self::HeisenbergZField { delta: (j.at(&[1, 1]) - j.at(&[2, 2])) / field[2] });
        }
        candidates.into_iter().find(|c| {
            c.family().directions.iter().all(|d| {
                let v = DVector::from_column_slice(d);
                (m.matrix() * &v).amax() < 1e-10 * v.amax()
            })
        })
    }

    /// Left-hand sides of the three explicit polynomial inequalities
    /// (each must be ≤ 1).
    pub fn inequality_lhs(&self, p: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = p;
        match *self {
            Self::HeisenbergNoField => {
                let s2 = x * x + y * y + z * z;
                let s4 = x.powi(4) + y.powi(4) + z.powi(4);
                let pairs = x * x * y * y + x * x * z * z + y * y * z * z;
                [
                    0.25 + 4.0 * s2,
                    0.625 + 6.0 * s2 + 48.0 * x * y * z,
                    29.0 / 32.0 + 3.0 * s2 - 24.0 * s4 + 48.0 * (x * y * z + pairs),
                ]
            }
            Self::HeisenbergZField { delta: d } => {
                let (x2, y2, z2, d2) = (x * x, y * y, z * z, d * d);
                [
                    0.25 + x2 * (4.0 * d2 + 8.0) + 8.0 * d * x * y + 8.0 * y2 + 4.0 * z2,
                    0.625
                        + x2 * (6.0 * d2 - 48.0 * z + 12.0)
                        + x * (48.0 * d * y * z + 12.0 * d * y)
                        + 48.0 * y2 * z
                        + 12.0 * y2
                        + 6.0 * z2,
                    29.0 / 32.0
                        + x2 * x2 * (-24.0 * d2 * d2 - 96.0 * d2)
                        + x2 * x * (-96.0 * d2 * d * y - 384.0 * d * y)
                        + x2 * (-96.0 * d2 * y2 + 48.0 * d2 * z2 + 3.0 * d2 - 384.0 * y2 + 96.0 * z2 - 48.0 * z + 6.0)
                        + x * (96.0 * d * y * z2 + 48.0 * d * y * z + 6.0 * d * y)
                        + 96.0 * y2 * z2
                        + 48.0 * y2 * z
                        + 6.0 * y2
                        - 24.0 * z2 * z2
                        + 3.0 * z2,
                ]
            }
            Self::DmZField => [
                0.25 + 16.0 * (5.0 * x * x + 5.0 * y * y - 2.0 * y * z + 2.0 * z * z + 2.0 * x * (y + z)),
                0.625
                    + 24.0
                        * (x * x * (5.0 - 48.0 * z) + 2.0 * z * z - 2.0 * y * z * (1.0 + 12.0 * z)
                            + y * y * (5.0 + 48.0 * z)
                            + 2.0 * x * (y + z - 12.0 * z * z)),
                29.0 / 32.0
                    + 12.0
                        * (5.0 * x * x - 32.0 * x.powi(4) + 2.0 * x * y - 640.0 * x.powi(3) * y + 5.0 * y * y
                            - 3264.0 * x * x * y * y
                            - 640.0 * x * y.powi(3)
                            - 32.0 * y.powi(4)
                            + 2.0
                                * (x - y)
                                * (1.0 + 64.0 * x * x + 16.0 * y * (-3.0 + 4.0 * y) + 16.0 * x * (-3.0 + 40.0 * y))
                                * z
                            + 2.0 * (1.0 - 24.0 * y + 24.0 * (x * (-1.0 + 8.0 * x) + 16.0 * x * y + 8.0 * y * y)) * z * z
                            + 128.0 * (x - y) * z.powi(3)
                            - 32.0 * z.powi(4)),
            ],
            Self::KseaZField => [
                0.25 + 4.0 * (3.0 * x * x + 4.0 * x * y + 12.0 * y * y - 4.0 * (x + 3.0 * y) * z + 8.0 * z * z),
                0.625
                    + 6.0
                        * (8.0 * x.powi(3) + x * x * (3.0 + 16.0 * y - 16.0 * z)
                            - 4.0 * x * (y * (-1.0 + 8.0 * y) + z - 4.0 * y * z + 4.0 * z * z)
                            + 4.0
                                * (-8.0 * y.powi(3) + 2.0 * z * z * (1.0 + 2.0 * z) - 3.0 * y * z * (1.0 + 8.0 * z)
                                    + y * y * (3.0 + 32.0 * z))),
                29.0 / 32.0
                    + 3.0
                        * (24.0 * x.powi(4) - 128.0 * y.powi(4) + 16.0 * x.powi(3) * (1.0 + 4.0 * y - 4.0 * z)
                            - 64.0 * y.powi(3) * (1.0 + 12.0 * z)
                            + 8.0 * z * z * (1.0 + 4.0 * (1.0 - 4.0 * z) * z)
                            - 4.0
                                * x
                                * (y * (-1.0 + 16.0 * y * (1.0 + 8.0 * y)) + z + 8.0 * y * (-1.0 + 24.0 * y) * z
                                    + 8.0 * (1.0 - 16.0 * y) * z * z
                                    - 96.0 * z.powi(3))
                            + 4.0 * y * y * (3.0 + 64.0 * z * (1.0 + 6.0 * z))
                            - 4.0 * y * z * (3.0 + 16.0 * z * (3.0 + 8.0 * z))
                            + x * x * (3.0 - 448.0 * y * y - 32.0 * z * (1.0 + 8.0 * z) + 32.0 * y * (1.0 + 10.0 * z))),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryFamily {
    /// Maximally mixed tensor (identity word only).
    pub base: CorrelationTensor,
    /// Tensor increments per unit of each parameter.
    pub directions: Vec<Vec<f64>>,
    pub parameter_names: Vec<String>,
    pub documented: Option<DocumentedFamily>,
}

impl StationaryFamily {
    pub fn qubits(&self) -> usize {
        self.base.qubits()
    }

    pub fn parameter_count(&self) -> usize {
        self.directions.len()
    }

    pub fn member(&self, params: &[f64]) -> Result<CorrelationTensor> {
        if params.len() != self.directions.len() {
            return Err(Error::ParameterCount { expected: self.directions.len(), found: params.len() });
        }
        let mut e = self.base.entries().to_vec();
        for (d, &p) in self.directions.iter().zip(params) {
            for (o, v) in e.iter_mut().zip(d) {
                *o += p * v;
            }
        }
        Ok(CorrelationTensor::from_raw(self.qubits(), e))
    }

    /// ρ-coefficient terms of each direction as (word, parameter, coefficient).
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        let scale = hilbert_dim(self.qubits()) as f64;
        let mut out = Vec::new();
        for (k, d) in self.directions.iter().enumerate() {
            for (i, &v) in d.iter().enumerate() {
                if v != 0.0 {
                    out.push((i, k, v / scale));
                }
            }
        }
        out.sort_by_key(|t| (t.0, t.1));
        out
    }
}

fn parameter_name(k: usize) -> String {
    const NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    NAMES.get(k).map_or_else(|| format!("p{}", k + 1), |s| s.to_string())
}

/// T = e₀ + 2^N Σ p_k v_k over the non-identity echelon rows.
pub fn family_from_nullspace(basis: &NullspaceBasis, qubits: usize) -> Result<StationaryFamily> {
    let len = crate::pauli::tensor_len(qubits);
    if basis.vectors.iter().any(|v| v.len() != len) {
        return Err(Error::DimensionMismatch { expected: len, found: basis.vectors[0].len() });
    }
    let mut e0 = DVector::zeros(len);
    e0[0] = 1.0;
    if basis.projection_residual(&e0) > 1e-9 {
        return Err(Error::MissingIdentity);
    }
    // Echelon rows other than the identity have a zero first entry; after
    // canonicalization the identity row is exactly e₀.
    let canon = canonicalize(&basis.vectors, len);
    let scale = hilbert_dim(qubits) as f64;
    let directions: Vec<Vec<f64>> = canon
        .iter()
        .filter(|v| (*v - &e0).amax() > SNAP_TOL)
        .map(|v| v.iter().map(|x| x * scale).collect())
        .collect();
    let parameter_names = (0..directions.len()).map(parameter_name).collect();
    Ok(StationaryFamily {
        base: CorrelationTensor::maximally_mixed(qubits)?,
        directions,
        parameter_names,
        documented: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    /// 1 − LHS of Tr ρ² ≤ 1, 3Tr ρ² − 2Tr ρ³ ≤ 1,
    /// 6Tr ρ² − 8Tr ρ³ + 6Tr ρ⁴ − 3(Tr ρ²)² ≤ 1.
    pub margins: [f64; 3],
    pub satisfied: bool,
}

impl PositivityReport {
    fn from_lhs(lhs: [f64; 3], tol: f64) -> Self {
        let margins = lhs.map(|l| 1.0 - l);
        Self { margins, satisfied: margins.iter().all(|&m| m >= -tol) }
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn on_boundary(&self) -> bool {
        let m = self.min_margin();
        (-GAMEL_TOL..=BOUNDARY_UPPER).contains(&m)
    }
}

/// Left-hand sides of the three trace inequalities.
pub fn gamel_lhs(t: &CorrelationTensor) -> Result<[f64; 3]> {
    if t.qubits() != 2 {
        return Err(Error::WrongSystemSize { expected: 2, found: t.qubits() });
    }
    let [_, p2, p3, p4] = power_traces(&density_from_tensor(t));
    Ok([p2, 3.0 * p2 - 2.0 * p3, 6.0 * p2 - 8.0 * p3 + 6.0 * p4 - 3.0 * p2 * p2])
}

pub fn gamel_check(t: &CorrelationTensor) -> Result<PositivityReport> {
    gamel_check_with_tol(t, GAMEL_TOL)
}

pub fn gamel_check_with_tol(t: &CorrelationTensor, tol: f64) -> Result<PositivityReport> {
    Ok(PositivityReport::from_lhs(gamel_lhs(t)?, tol))
}

/// Positivity of a family member; for documented families the explicit
/// polynomial system is evaluated too and must agree with the traces.
pub fn positivity_region_membership(family: &StationaryFamily, params: &[f64]) -> Result<PositivityReport> {
    let member = family.member(params)?;
    let traces = gamel_lhs(&member)?;
    if let Some(doc) = family.documented {
        let p = [params[0], params[1], params[2]];
        let poly = doc.inequality_lhs(p);
        for k in 0..3 {
            let scale = 1.0 + traces[k].abs();
            if (poly[k] - traces[k]).abs() > POLY_TOL * scale {
                return Err(Error::InequalityMismatch(format!(
                    "{} inequality {} at {:?}: polynomial {} vs traces {}",
                    doc.name(),
                    k + 1,
                    p,
                    poly[k],
                    traces[k]
                )));
            }
        }
    }
    Ok(PositivityReport::from_lhs(traces, GAMEL_TOL))
}

/// All real roots of a x³ + b x² + c x + d, ascending.
pub fn cubic_real_roots(a: f64, b: f64, c: f64, d: f64) -> Result<Vec<f64>> {
    if a == 0.0 {
        return Err(Error::DegenerateCubic);
    }
    let (b, c, d) = (b / a, c / a, d / a);
    let companion = Matrix3::new(-b, -c, -d, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let p = |x: f64| ((x + b) * x + c) * x + d;
    let dp = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    let mut roots: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * z.re.abs().max(1.0))
        .map(|z| {
            let x = z.re;
            let slope = dp(x);
            if slope != 0.0 {
                x - p(x) / slope
            } else {
                x
            }
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Vertices of the tetrahedral positivity region of a documented family.
pub fn tetrahedron_vertices(model: DocumentedFamily) -> Result<Vec<[f64; 3]>> {
    let q = 0.25;
    match model {
        DocumentedFamily::HeisenbergNoField => Ok(vec![[-q, q, q], [q, -q, q], [q, q, -q], [-q, -q, -q]]),
        DocumentedFamily::HeisenbergZField { delta } => {
            let s = (4.0 + delta * delta).sqrt();
            Ok(vec![
                [0.0, q, -q],
                [0.0, -q, -q],
                [1.0 / (2.0 * s), -delta / (4.0 * s), q],
                [-1.0 / (2.0 * s), delta / (4.0 * s), q],
            ])
        }
        DocumentedFamily::DmZField => {
            let (r2, r3) = (2f64.sqrt(), 3f64.sqrt());
            let n = 16.0 * 6f64.sqrt();
            Ok(vec![
                [(1.0 + r2 - r3) / n, (-1.0 + r2 + r3) / n, -4.0 / n],
                [(1.0 - r2 + r3) / n, (-1.0 - r2 - r3) / n, -4.0 / n],
                [(-1.0 + r2 + r3) / n, (1.0 + r2 - r3) / n, 4.0 / n],
                [(-1.0 - r2 - r3) / n, (1.0 - r2 + r3) / n, 4.0 / n],
            ])
        }
        DocumentedFamily::KseaZField => ksea_vertices(),
    }
}

/// Coordinate sets of the three finite KSEA vertices.
pub fn ksea_vertex_cubics() -> [[f64; 4]; 3] {
    [[2368.0, -592.0, 28.0, 1.0], [1184.0, 0.0, -20.0, 1.0], [592.0, 0.0, -16.0, -1.0]]
}

fn ksea_vertices() -> Result<Vec<[f64; 3]>> {
    let family = DocumentedFamily::KseaZField.family();
    let sets = ksea_vertex_cubics()
        .iter()
        .map(|c| cubic_real_roots(c[0], c[1], c[2], c[3]))
        .collect::<Result<Vec<_>>>()?;
    let mut found = Vec::new();
    for &x in &sets[0] {
        for &y in &sets[1] {
            for &z in &sets[2] {
                let t = family.member(&[x, y, z])?;
                let r = gamel_check_with_tol(&t, 1e-8)?;
                if (t.purity() - 1.0).abs() < 1e-8 && r.satisfied {
                    found.push([x, y, z]);
                }
            }
        }
    }
    if found.len() != 3 {
        return Err(Error::NoClosedForm(format!("KSEA vertex matching found {} triples", found.len())));
    }
    found.push([-0.25, 0.0, 0.0]);
    Ok(found)
}

/// True iff the family member is unchanged (to 1e−10) at every sample time.
pub fn verify_stationary(
    family: &StationaryFamily,
    m: &GeneratorMatrix,
    params: &[f64],
    t_samples: &[f64],
) -> Result<bool> {
    let t0 = family.member(params)?;
    let prop = Propagator::new(m)?;
    for &t in t_samples {
        if prop.propagate(&t0, t)?.max_abs_diff(&t0) > 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}
