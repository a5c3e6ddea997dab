//! Real skew-symmetric spectral machinery.
//!
//! A real skew-symmetric matrix is normal, so its real Schur form is block
//! diagonal: 2×2 blocks `[[0, ω], [−ω, 0]]` for each pair ±iω and 1×1 zero
//! blocks. The exponential is then an exact rotation in every block plane.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Block {
    /// Rotation plane spanned by Schur vectors `start`, `start + 1`.
    Rotation { start: usize, omega: f64 },
    /// One-dimensional kernel direction.
    Fixed { index: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct SkewDecomposition {
    basis: DMatrix<f64>,
    blocks: Vec<Block>,
    scale: f64,
}

/// Relative size below which a subdiagonal entry of the Schur form is
/// treated as a block boundary.
const SPLIT_TOL: f64 = 1e-13;

/// Allowed reconstruction error relative to the matrix norm.
const RECON_TOL: f64 = 1e-11;

impl SkewDecomposition {
    pub(crate) fn new(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        let scale = m.amax();
        if scale == 0.0 {
            return Ok(Self {
                basis: DMatrix::identity(n, n),
                blocks: (0..n).map(|index| Block::Fixed { index }).collect(),
                scale,
            });
        }
        let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen("real Schur iteration did not converge".into()))?;
        let (q, t) = schur.unpack();
        let skew = (&t - t.transpose()) * 0.5;

        let mut blocks = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            if i + 1 < n && skew[(i + 1, i)].abs() > SPLIT_TOL * scale {
                blocks.push(Block::Rotation { start: i, omega: skew[(i, i + 1)] });
                i += 2;
            } else {
                blocks.push(Block::Fixed { index: i });
                i += 1;
            }
        }

        let decomposition = Self { basis: q, blocks, scale };
        let recon = (decomposition.block_matrix(n) - m).amax();
        if recon > RECON_TOL * scale.max(1.0) {
            return Err(Error::Eigen(format!("skew block decomposition residual {recon:e}")));
        }
        Ok(decomposition)
    }

    fn block_matrix(&self, n: usize) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(n, n);
        for b in &self.blocks {
            if let Block::Rotation { start, omega } = *b {
                d[(start, start + 1)] = omega;
                d[(start + 1, start)] = -omega;
            }
        }
        &self.basis * d * self.basis.transpose()
    }

    pub(crate) fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Largest |ω| in the matrix (entry-wise max, used as a tolerance scale).
    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }

    /// Magnitudes of all rotation frequencies, one per ±iω pair.
    pub(crate) fn rotation_frequencies(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .filter_map(|b| match *b {
                Block::Rotation { omega, .. } => Some(omega.abs()),
                Block::Fixed { .. } => None,
            })
            .collect()
    }

    /// Orthonormal vectors spanning the eigenspace with |ω| ≤ `cutoff`.
    pub(crate) fn kernel_basis(&self, cutoff: f64) -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        for b in &self.blocks {
            match *b {
                Block::Fixed { index } => out.push(self.basis.column(index).into_owned()),
                Block::Rotation { start, omega } if omega.abs() <= cutoff => {
                    out.push(self.basis.column(start).into_owned());
                    out.push(self.basis.column(start + 1).into_owned());
                }
                Block::Rotation { .. } => {}
            }
        }
        out
    }

    /// exp(M t) x, as rotations in the Schur coordinates.
    pub(crate) fn apply_exp(&self, x: &DVector<f64>, t: f64) -> DVector<f64> {
        let mut y = self.basis.tr_mul(x);
        for b in &self.blocks {
            if let Block::Rotation { start, omega } = *b {
                let (s, c) = (omega * t).sin_cos();
                let (a, bb) = (y[start], y[start + 1]);
                y[start] = c * a + s * bb;
                y[start + 1] = -s * a + c * bb;
            }
        }
        &self.basis * y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation_generator(omega: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, omega, -omega, 0.0])
    }

    #[test]
    fn single_plane_rotation() {
        let m = rotation_generator(2.0);
        let dec = SkewDecomposition::new(&m).unwrap();
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let y = dec.apply_exp(&x, 0.3);
        // d/dt (x0, x1) = (2 x1, −2 x0)
        assert!((y[0] - (0.6f64).cos()).abs() < 1e-15);
        assert!((y[1] + (0.6f64).sin()).abs() < 1e-15);
        assert_eq!(dec.rotation_frequencies().len(), 1);
        assert!((dec.rotation_frequencies()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_matrix_is_all_kernel() {
        let dec = SkewDecomposition::new(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(dec.kernel_basis(0.0).len(), 4);
        assert!(dec.rotation_frequencies().is_empty());
    }

    #[test]
    fn exp_matches_taylor_series() {
        let n = 6;
        let mut m = DMatrix::<f64>::zeros(n, n);
        let vals = [0.3, -1.2, 0.7, 0.05, 2.0, -0.4, 1.1, 0.9, -0.6, 0.2, 0.15, -1.5, 0.8, 0.33, -0.21];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                m[(i, j)] = vals[k];
                m[(j, i)] = -vals[k];
                k += 1;
            }
        }
        let t = 0.37;
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut series = DMatrix::<f64>::identity(n, n);
        for p in 1..60 {
            term = &term * &m * (t / p as f64);
            series += &term;
        }
        let dec = SkewDecomposition::new(&m).unwrap();
        for col in 0..n {
            let e = DVector::from_fn(n, |i, _| if i == col { 1.0 } else { 0.0 });
            let got = dec.apply_exp(&e, t);
            assert!((got - series.column(col)).amax() < 1e-13);
        }
    }
}
